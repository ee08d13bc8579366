use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use conegrowth_cli::{replay, run, ExperimentConfig, MANIFEST_FILE};

/// Growth-process experiments on Cayley graphs: deterministic Monte Carlo
/// runs, limit-norm ladders, condition checks, and shape diagnostics.
#[derive(Parser)]
#[command(name = "conegrowth", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Executes the diagnostics requested by a config file.
    Run {
        /// Path to the TOML experiment configuration.
        #[arg(long)]
        config: PathBuf,
        /// Output directory (overrides outputs.directory).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads (overrides run.workers; 0 = all cores).
        #[arg(long)]
        workers: Option<usize>,
        /// Exit nonzero if any asserted diagnostic fails.
        #[arg(long)]
        assert: bool,
        /// Replaces run.master_seed.
        #[arg(long)]
        seed_override: Option<u64>,
    },
    /// Re-executes a recorded run and verifies byte-identical outputs.
    Replay {
        /// Path to a manifest.json (or a directory containing one).
        manifest: PathBuf,
    },
    /// Lists the catalog groups and their coordinate conventions.
    ListGroups,
    /// Lists the model variants and their parameters.
    ListModels,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run {
            config,
            out,
            workers,
            assert,
            seed_override,
        } => {
            let cfg = match ExperimentConfig::from_path(&config) {
                Ok(c) => c,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(2);
                }
            };
            let config_dir = config
                .parent()
                .map(PathBuf::from)
                .unwrap_or_else(|| PathBuf::from("."));
            let out_dir = out.unwrap_or_else(|| cfg.outputs.directory.clone());
            match run(&cfg, &config_dir, &out_dir, seed_override, workers) {
                Ok(outcome) => {
                    print!("{}", outcome.summary);
                    println!("artifacts: {}", outcome.out_dir.display());
                    if assert && !outcome.all_passed() {
                        eprintln!("error: at least one asserted diagnostic failed");
                        return ExitCode::FAILURE;
                    }
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(2)
                }
            }
        }
        Command::Replay { manifest } => {
            let path = if manifest.is_dir() {
                manifest.join(MANIFEST_FILE)
            } else {
                manifest
            };
            let scratch = std::env::temp_dir().join(format!(
                "conegrowth-replay-{}",
                std::process::id()
            ));
            match replay(&path, &scratch) {
                Ok(report) => {
                    let _ = std::fs::remove_dir_all(&scratch);
                    for f in &report.missing {
                        println!("missing: {f}");
                    }
                    for f in &report.modified {
                        println!("modified on disk: {f}");
                    }
                    for f in &report.drifted {
                        println!("drift on regeneration: {f}");
                    }
                    if report.is_clean() {
                        println!("replay clean: outputs reproduce byte-identically");
                        ExitCode::SUCCESS
                    } else {
                        ExitCode::FAILURE
                    }
                }
                Err(e) => {
                    let _ = std::fs::remove_dir_all(&scratch);
                    eprintln!("error: {e}");
                    ExitCode::from(2)
                }
            }
        }
        Command::ListGroups => {
            println!("free-abelian            Z^d; coords = d integers; generators +-e_i");
            println!("heisenberg              H_3(Z); coords = (x, y, z); generators X^+-1, Y^+-1");
            println!("direct-product-finite   base x M; coords = base coords + finite index;");
            println!("                        M from a multiplication-table file or a cyclic order;");
            println!("                        generators (s, m) for every base generator s and m in M");
            println!("dihedral                Z^d semidirect Z_2; coords = d integers + reflection bit;");
            println!("                        generators (+-e_i, 0) and the reflection (0, 1)");
            ExitCode::SUCCESS
        }
        Command::ListModels => {
            println!("iid-fpp        independent edge weights; model.weights = distribution");
            println!("coloring-fpp   i.i.d. vertex colors; an edge costs 0 iff endpoints match;");
            println!("               model.palette = color probabilities summing to 1");
            println!("richardson     one exponential rate per direction class, drawn per environment;");
            println!("               model.rates = rate distribution (strictly positive)");
            println!("frog           discrete-time frog model; model.walk_step_cap = per-frog step cap (0 = none)");
            println!();
            println!("distributions: constant {{value}}, bernoulli {{p, lo, hi}}, exponential {{lambda}}, uniform {{lo, hi}}");
            ExitCode::SUCCESS
        }
    }
}
