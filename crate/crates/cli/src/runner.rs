//! Task execution: fans Monte Carlo work across a configurable pool,
//! assembles outputs in deterministic task order, and writes artifacts plus
//! a manifest that allows byte-exact replay.

use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;

use conegrowth_core::budget::Budget;
use conegrowth_core::cone::{self, ShapeCloud};
use conegrowth_core::estimators::{
    check_condition_all, check_condition_aml, check_innerness_fpp, compare_c_cprime, estimate_phi,
    phi_unit_polygon, polygonal_ergodic_check, EstimatorError, EvalCtx,
};
use conegrowth_core::models::fpp::evaluate_cocycle;
use conegrowth_core::models::prf::derive_seed;
use conegrowth_core::models::Environment;
use conegrowth_core::Scalar;

use crate::config::{element_from_coords, ConfigError, ExperimentConfig, TaskConfig};
use crate::manifest::{content_hash, OutputRecord, RunManifest, MANIFEST_FILE};

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("task {task}: {source}")]
    Task {
        task: usize,
        #[source]
        source: EstimatorError,
    },
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("replay drift in {0} output file(s)")]
    Drift(usize),
}

/// Everything a finished run reports back.
pub struct RunOutcome {
    pub out_dir: PathBuf,
    /// Pass verdict per task; `None` for purely descriptive tasks.
    pub task_passes: Vec<Option<bool>>,
    pub manifest: RunManifest,
    pub summary: String,
}

impl RunOutcome {
    pub fn all_passed(&self) -> bool {
        self.task_passes.iter().all(|p| p.unwrap_or(true))
    }
}

struct TaskOutput {
    files: Vec<(String, Vec<u8>)>,
    summary: String,
    passed: Option<bool>,
}

fn json_bytes<T: Serialize>(value: &T) -> Vec<u8> {
    let mut text = serde_json::to_string_pretty(value).expect("report serializes");
    text.push('\n');
    text.into_bytes()
}

/// Executes a full run. Task seeds are normally derived from the master
/// seed; `replay` passes recorded seeds instead.
pub fn run(
    config: &ExperimentConfig,
    config_dir: &Path,
    out_dir: &Path,
    seed_override: Option<u64>,
    workers_override: Option<usize>,
) -> Result<RunOutcome, RunError> {
    let master_seed = seed_override.unwrap_or(config.run.master_seed);
    let task_seeds: Vec<u64> = (0..config.tasks.len())
        .map(|i| derive_seed(master_seed, &[0x7461736b, i as u64]))
        .collect();
    execute(config, config_dir, out_dir, &task_seeds, workers_override)
}

fn execute(
    config: &ExperimentConfig,
    config_dir: &Path,
    out_dir: &Path,
    task_seeds: &[u64],
    workers_override: Option<usize>,
) -> Result<RunOutcome, RunError> {
    let spec = config.build_group(config_dir)?;
    let model = config.build_model()?;
    let budget = match config.run.budget_mb {
        Some(mb) => Budget::from_mb(mb),
        None => Budget::from_env(),
    };
    let workers = workers_override.unwrap_or(config.run.workers);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .expect("thread pool");

    let mut outputs: Vec<(String, Vec<u8>)> = Vec::new();
    let mut passes = Vec::new();
    let mut summary = String::new();
    summary.push_str(&format!(
        "config {:016x}  group {}  model {}\n",
        config.hash(),
        spec.name(),
        model.name()
    ));
    for (i, task) in config.tasks.iter().enumerate() {
        let ctx = EvalCtx {
            spec: &spec,
            model: &model,
            margin: config.run.margin,
            budget,
            master_seed: task_seeds[i],
        };
        let result = pool.install(|| run_task(config, &ctx, i, task));
        let out = result.map_err(|source| RunError::Task { task: i, source })?;
        for (name, bytes) in out.files {
            let keep = if name.ends_with(".json") {
                config.outputs.formats.iter().any(|f| f == "json")
            } else if name.ends_with(".csv") {
                config.outputs.formats.iter().any(|f| f == "csv")
            } else {
                true
            };
            if keep {
                outputs.push((name, bytes));
            }
        }
        summary.push_str(&out.summary);
        summary.push('\n');
        passes.push(out.passed);
    }
    summary.push_str(&format!(
        "tasks passed: {}/{} asserted\n",
        passes.iter().filter(|p| **p == Some(true)).count(),
        passes.iter().filter(|p| p.is_some()).count()
    ));
    outputs.push(("summary.txt".into(), summary.clone().into_bytes()));

    std::fs::create_dir_all(out_dir)?;
    let mut records = Vec::new();
    for (name, bytes) in &outputs {
        std::fs::write(out_dir.join(name), bytes)?;
        records.push(OutputRecord {
            path: name.clone(),
            content_hash: content_hash(bytes),
            bytes: bytes.len() as u64,
        });
    }
    let manifest = RunManifest {
        tool_version: env!("CARGO_PKG_VERSION").into(),
        config_hash: format!("{:016x}", config.hash()),
        config_text: config.to_toml(),
        created_unix_secs: SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0),
        task_seeds: task_seeds.to_vec(),
        outputs: records,
    };
    manifest.write(out_dir)?;
    Ok(RunOutcome {
        out_dir: out_dir.to_path_buf(),
        task_passes: passes,
        manifest,
        summary,
    })
}

fn run_task(
    config: &ExperimentConfig,
    ctx: &EvalCtx,
    index: usize,
    task: &TaskConfig,
) -> Result<TaskOutput, EstimatorError> {
    let ladder = &config.run.ladder;
    let samples = config.run.samples;
    match task {
        TaskConfig::PhiLadder { direction } => {
            let x = element_from_coords(ctx.spec, direction)
                .map_err(config_to_estimator_error)?;
            let est = estimate_phi(ctx, &x, ladder, samples)?;
            let mut csv = String::from("n,mean,std_error,samples,boundary_touched\n");
            for r in &est.ladder {
                csv.push_str(&format!(
                    "{},{:.9},{:.9},{},{}\n",
                    r.n, r.mean, r.std_error, r.samples, r.boundary_touched
                ));
            }
            let passed = est.monotone_violations == 0 && est.phi_hat.is_finite();
            Ok(TaskOutput {
                files: vec![
                    (format!("task{index:02}-phi-ladder.json"), json_bytes(&est)),
                    (format!("task{index:02}-phi-ladder.csv"), csv.into_bytes()),
                ],
                summary: format!(
                    "task {index:02} phi-ladder {direction:?}: phi_hat = {:.6} +- {:.6} over {} rungs (subadditive-limit ladder, violations {})",
                    est.phi_hat,
                    est.phi_hat_std_error,
                    est.ladder.len(),
                    est.monotone_violations
                ),
                passed: Some(passed),
            })
        }
        TaskConfig::TailCheck {
            beta,
            radii,
            t_grid,
        } => {
            let report = check_condition_all(ctx, radii, *beta, t_grid, samples)?;
            Ok(TaskOutput {
                summary: format!(
                    "task {index:02} tail-check beta={beta}: passed = {} (trivial = {}, required exponent {})",
                    report.passed, report.trivial_pass, report.required_exponent
                ),
                passed: Some(report.passed),
                files: vec![(format!("task{index:02}-tail-check.json"), json_bytes(&report))],
            })
        }
        TaskConfig::LowerBoundCheck { direction } => {
            let x = element_from_coords(ctx.spec, direction)
                .map_err(config_to_estimator_error)?;
            let report = check_condition_aml(ctx, &x, ladder, samples)?;
            Ok(TaskOutput {
                summary: format!(
                    "task {index:02} lower-bound-check {direction:?}: a_word = {:.6}, a_ab = {:?} (linear growth floor)",
                    report.a_word, report.a_ab
                ),
                passed: Some(report.passed_word),
                files: vec![(
                    format!("task{index:02}-lower-bound.json"),
                    json_bytes(&report),
                )],
            })
        }
        TaskConfig::InnernessCheck { radius, trials } => {
            let report = check_innerness_fpp(ctx, *radius, *trials)?;
            let passed = report.structural_ok && report.tested > 0 && report.exact == report.tested;
            Ok(TaskOutput {
                summary: format!(
                    "task {index:02} innerness-check: {}/{} exact geodesic decompositions, {} skipped at boundary, structural_ok = {}",
                    report.exact, report.tested, report.skipped_boundary, report.structural_ok
                ),
                passed: Some(passed),
                files: vec![(
                    format!("task{index:02}-innerness.json"),
                    json_bytes(&report),
                )],
            })
        }
        TaskConfig::PolygonalCheck { directions } => {
            let elems: Vec<_> = directions
                .iter()
                .map(|d| element_from_coords(ctx.spec, d).map_err(config_to_estimator_error))
                .collect::<Result<_, _>>()?;
            let report = polygonal_ergodic_check(ctx, &elems, ladder, samples)?;
            let passed = report.elements.iter().all(|e| {
                e.rungs.iter().all(|r| {
                    r.gap <= 3.0 * (r.shifted_std_error + r.solo_std_error) + 1e-12
                })
            });
            let max_gap = report
                .elements
                .iter()
                .map(|e| e.max_gap)
                .fold(0.0, f64::max);
            Ok(TaskOutput {
                summary: format!(
                    "task {index:02} polygonal-check over {} elements: max gap {:.6} (shifted-base ladder consistency)",
                    report.elements.len(),
                    max_gap
                ),
                passed: Some(passed),
                files: vec![(
                    format!("task{index:02}-polygonal.json"),
                    json_bytes(&report),
                )],
            })
        }
        TaskConfig::CprimeCompare { radii } => {
            let report = compare_c_cprime(ctx, radii, samples)?;
            let medians: Vec<f64> = report.per_radius.iter().map(|r| r.median_ratio).collect();
            let passed = medians.windows(2).all(|w| w[1] <= w[0] + 1e-12);
            Ok(TaskOutput {
                summary: format!(
                    "task {index:02} cprime-compare: median |c - c''|/|x| per radius {:?} (finite-extension agreement)",
                    medians
                ),
                passed: Some(passed),
                files: vec![(format!("task{index:02}-cprime.json"), json_bytes(&report))],
            })
        }
        TaskConfig::ShapeCloud {
            n_values,
            seeds,
            compare_double,
        } => run_shape_task(ctx, index, n_values, *seeds, *compare_double),
        TaskConfig::PhiPolygon { directions, shape_n } => {
            run_phi_polygon_task(config, ctx, index, directions, *shape_n)
        }
        TaskConfig::MarginSweep { direction, power } => {
            run_margin_sweep_task(config, ctx, index, direction, *power)
        }
    }
}

fn config_to_estimator_error(e: ConfigError) -> EstimatorError {
    EstimatorError::InsufficientSamples(format!("bad task parameter: {e}"))
}

#[derive(Serialize)]
struct ShapeSeries {
    n_values: Vec<f64>,
    seeds: u32,
    /// Median Hausdorff distance between the shape at n and at 2n, per n.
    median_hausdorff: Vec<Option<f64>>,
    cloud_sizes: Vec<Vec<usize>>,
}

fn run_shape_task(
    ctx: &EvalCtx,
    index: usize,
    n_values: &[f64],
    seeds: u32,
    compare_double: bool,
) -> Result<TaskOutput, EstimatorError> {
    let mut files = Vec::new();
    let mut medians: Vec<Option<f64>> = Vec::new();
    let mut sizes: Vec<Vec<usize>> = Vec::new();
    for (ni, &n) in n_values.iter().enumerate() {
        let mut dists = Vec::new();
        let mut row = Vec::new();
        for s in 0..seeds {
            let env = Environment::new(derive_seed(ctx.master_seed, &[ni as u64, s as u64]));
            let cloud: ShapeCloud<Scalar> =
                cone::extract_shape(ctx.spec, ctx.model, &env, n, ctx.margin, &ctx.budget)?;
            row.push(cloud.len());
            let mut csv = Vec::new();
            cloud
                .write_csv(&mut csv)
                .expect("in-memory write cannot fail");
            files.push((format!("task{index:02}-shape-n{ni}-s{s}.csv"), csv));
            if compare_double {
                let double: ShapeCloud<Scalar> = cone::extract_shape(
                    ctx.spec,
                    ctx.model,
                    &env,
                    2.0 * n,
                    ctx.margin,
                    &ctx.budget,
                )?;
                dists.push(cone::hausdorff(&cloud, &double)?);
            }
        }
        sizes.push(row);
        if compare_double && !dists.is_empty() {
            dists.sort_by(|a, b| a.partial_cmp(b).unwrap());
            medians.push(Some(dists[dists.len() / 2]));
        } else {
            medians.push(None);
        }
    }
    let series = ShapeSeries {
        n_values: n_values.to_vec(),
        seeds,
        median_hausdorff: medians.clone(),
        cloud_sizes: sizes,
    };
    let passed = if compare_double && n_values.len() >= 2 {
        let vals: Vec<f64> = medians.iter().flatten().copied().collect();
        Some(vals.windows(2).all(|w| w[1] <= w[0] + 1e-12))
    } else {
        None
    };
    files.push((format!("task{index:02}-shape-series.json"), json_bytes(&series)));
    Ok(TaskOutput {
        summary: format!(
            "task {index:02} shape-cloud: median stabilization distances {:?} (rescaled-ball convergence)",
            series.median_hausdorff
        ),
        passed,
        files,
    })
}

#[derive(Serialize)]
struct PhiPolygonReport {
    vertices: Vec<Vec<f64>>,
    shape_n: f64,
    hausdorff_to_projected_shape: f64,
}

fn run_phi_polygon_task(
    config: &ExperimentConfig,
    ctx: &EvalCtx,
    index: usize,
    directions: &[Vec<i64>],
    shape_n: f64,
) -> Result<TaskOutput, EstimatorError> {
    let elems: Vec<_> = directions
        .iter()
        .map(|d| element_from_coords(ctx.spec, d).map_err(config_to_estimator_error))
        .collect::<Result<_, _>>()?;
    let vertices = phi_unit_polygon(ctx, &elems, &config.run.ladder, config.run.samples)?;
    let pitch = 1.0 / shape_n;
    let filled = cone::fill_convex_polygon(&vertices, pitch);
    let polygon_cloud: ShapeCloud<Scalar> =
        ShapeCloud::from_points(filled, shape_n, ctx.model.params_hash(), ctx.master_seed);
    let env = Environment::new(derive_seed(ctx.master_seed, &[0x73686170]));
    let cloud: ShapeCloud<Scalar> =
        cone::extract_shape(ctx.spec, ctx.model, &env, shape_n, ctx.margin, &ctx.budget)?;
    let projected: ShapeCloud<Scalar> = ShapeCloud::from_points(
        cloud
            .project_ab()
            .into_iter()
            .map(conegrowth_core::cone::ConePoint::Abelian)
            .collect(),
        cloud.n,
        cloud.model_id,
        cloud.seed,
    );
    let d = cone::hausdorff(&polygon_cloud, &projected)?;
    let report = PhiPolygonReport {
        vertices,
        shape_n,
        hausdorff_to_projected_shape: d,
    };
    Ok(TaskOutput {
        summary: format!(
            "task {index:02} phi-polygon: Hausdorff distance to projected shape = {d:.6} (directional limit profile)"
        ),
        passed: None,
        files: vec![(format!("task{index:02}-phi-polygon.json"), json_bytes(&report))],
    })
}

#[derive(Serialize)]
struct MarginSweepReport {
    direction: Vec<i64>,
    power: u32,
    margins: Vec<f64>,
    mean_values: Vec<f64>,
    /// Samples where a larger margin increased the value (exact ticks).
    monotonicity_violations: usize,
}

fn run_margin_sweep_task(
    config: &ExperimentConfig,
    ctx: &EvalCtx,
    index: usize,
    direction: &[i64],
    power: u32,
) -> Result<TaskOutput, EstimatorError> {
    let mut margins = config.run.margin_sweep.clone();
    if margins.is_empty() {
        margins = vec![1.5, 2.0, 3.0, 4.0];
    }
    let x = element_from_coords(ctx.spec, direction).map_err(config_to_estimator_error)?;
    let x_n = ctx.spec.power(&x, power as i64)?;
    let mut violations = 0usize;
    let mut sums = vec![0.0f64; margins.len()];
    for i in 0..config.run.samples {
        let env = Environment::new(derive_seed(ctx.master_seed, &[i as u64]));
        let mut prev = u64::MAX;
        for (mi, &margin) in margins.iter().enumerate() {
            let s = evaluate_cocycle(ctx.model, &env, ctx.spec, &x_n, margin, &ctx.budget)?;
            if s.ticks > prev {
                violations += 1;
            }
            prev = s.ticks;
            sums[mi] += s.value();
        }
    }
    let mean_values: Vec<f64> = sums
        .iter()
        .map(|s| s / config.run.samples as f64)
        .collect();
    let report = MarginSweepReport {
        direction: direction.to_vec(),
        power,
        margins: margins.clone(),
        mean_values: mean_values.clone(),
        monotonicity_violations: violations,
    };
    Ok(TaskOutput {
        summary: format!(
            "task {index:02} margin-sweep: means {mean_values:?} over margins {margins:?}, violations {violations} (truncation stabilization)"
        ),
        passed: Some(violations == 0),
        files: vec![(
            format!("task{index:02}-margin-sweep.json"),
            json_bytes(&report),
        )],
    })
}

/// Re-executes a manifest into a scratch directory and byte-compares the
/// regenerated outputs against the recorded hashes; also verifies the
/// original output files still exist unmodified next to the manifest.
pub struct ReplayReport {
    pub drifted: Vec<String>,
    pub missing: Vec<String>,
    pub modified: Vec<String>,
}

impl ReplayReport {
    pub fn is_clean(&self) -> bool {
        self.drifted.is_empty() && self.missing.is_empty() && self.modified.is_empty()
    }
}

pub fn replay(manifest_path: &Path, scratch_dir: &Path) -> Result<ReplayReport, RunError> {
    let manifest = RunManifest::from_path(manifest_path)?;
    let config = ExperimentConfig::from_str(&manifest.config_text)?;
    let manifest_dir = manifest_path.parent().unwrap_or(Path::new("."));
    let outcome = execute(
        &config,
        manifest_dir,
        scratch_dir,
        &manifest.task_seeds,
        None,
    )?;
    let mut drifted = Vec::new();
    let mut missing = Vec::new();
    let mut modified = Vec::new();
    for rec in &manifest.outputs {
        match outcome
            .manifest
            .outputs
            .iter()
            .find(|r| r.path == rec.path)
        {
            Some(fresh) if fresh.content_hash == rec.content_hash => {}
            _ => drifted.push(rec.path.clone()),
        }
        let original = manifest_dir.join(&rec.path);
        match std::fs::read(&original) {
            Err(_) => missing.push(rec.path.clone()),
            Ok(bytes) => {
                if content_hash(&bytes) != rec.content_hash {
                    modified.push(rec.path.clone());
                }
            }
        }
    }
    let _ = std::fs::remove_file(scratch_dir.join(MANIFEST_FILE));
    Ok(ReplayReport {
        drifted,
        missing,
        modified,
    })
}
