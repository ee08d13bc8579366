//! Experiment configuration: a single TOML file with nested blocks.
//! Unknown keys are rejected, and the whole structure round-trips through
//! serialization losslessly.

use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

use conegrowth_core::models::{ModelSpec, WeightDist};
use conegrowth_core::{FiniteGroupTable, GroupElement, GroupSpec};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read config: {0}")]
    Io(#[from] std::io::Error),
    #[error("config parse error: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid config: {0}")]
    Invalid(String),
    #[error(transparent)]
    Group(#[from] conegrowth_core::GroupError),
    #[error(transparent)]
    Model(#[from] conegrowth_core::models::ModelError),
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub group: GroupConfig,
    pub model: ModelConfig,
    pub run: RunConfig,
    #[serde(default)]
    pub tasks: Vec<TaskConfig>,
    pub outputs: OutputConfig,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct GroupConfig {
    /// One of `free-abelian`, `heisenberg`, `direct-product-finite`,
    /// `dihedral`.
    pub kind: String,
    /// Rank for `free-abelian` and `dihedral`.
    #[serde(default)]
    pub rank: Option<usize>,
    /// Base kind for `direct-product-finite`: `free-abelian` or
    /// `heisenberg`.
    #[serde(default)]
    pub base: Option<String>,
    #[serde(default)]
    pub base_rank: Option<usize>,
    /// Finite factor: either a multiplication-table file path or a cyclic
    /// order.
    #[serde(default)]
    pub table_path: Option<PathBuf>,
    #[serde(default)]
    pub table_cyclic: Option<usize>,
    /// Optional generating-set override (coordinate tuples).
    #[serde(default)]
    pub generators: Option<Vec<Vec<i64>>>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    /// One of `iid-fpp`, `coloring-fpp`, `richardson`, `frog`.
    pub variant: String,
    #[serde(default)]
    pub weights: Option<DistConfig>,
    #[serde(default)]
    pub palette: Option<Vec<f64>>,
    #[serde(default)]
    pub rates: Option<DistConfig>,
    #[serde(default)]
    pub walk_step_cap: Option<u32>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "dist", rename_all = "kebab-case", deny_unknown_fields)]
pub enum DistConfig {
    Constant { value: f64 },
    Bernoulli { p: f64, lo: f64, hi: f64 },
    Exponential { lambda: f64 },
    Uniform { lo: f64, hi: f64 },
}

impl From<&DistConfig> for WeightDist {
    fn from(d: &DistConfig) -> WeightDist {
        match *d {
            DistConfig::Constant { value } => WeightDist::Constant(value),
            DistConfig::Bernoulli { p, lo, hi } => WeightDist::Bernoulli { p, lo, hi },
            DistConfig::Exponential { lambda } => WeightDist::Exponential { lambda },
            DistConfig::Uniform { lo, hi } => WeightDist::Uniform { lo, hi },
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub master_seed: u64,
    /// Monte Carlo samples per rung (or per radius).
    pub samples: usize,
    #[serde(default = "default_ladder")]
    pub ladder: Vec<u32>,
    #[serde(default = "default_margin")]
    pub margin: f64,
    /// Margins for the truncation-stabilization sweep tasks.
    #[serde(default)]
    pub margin_sweep: Vec<f64>,
    /// Worker threads; 0 uses every core.
    #[serde(default)]
    pub workers: usize,
    /// Ball memory budget override in MiB (otherwise the environment
    /// variable or its default applies).
    #[serde(default)]
    pub budget_mb: Option<usize>,
}

fn default_ladder() -> Vec<u32> {
    vec![4, 8, 16, 32]
}

fn default_margin() -> f64 {
    3.0
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum TaskConfig {
    /// Ladder estimate of the limiting norm in one direction.
    PhiLadder { direction: Vec<i64> },
    /// Tail-decay check of c(x) above beta |x|_S.
    TailCheck {
        beta: f64,
        radii: Vec<u32>,
        t_grid: Vec<f64>,
    },
    /// Largest linear lower bound a with a * norm <= mean along the ladder.
    LowerBoundCheck { direction: Vec<i64> },
    /// Exact geodesic-decomposition witness over sampled environments.
    InnernessCheck { radius: u32, trials: usize },
    /// Shifted-base consistency of ladder estimates along a polygonal
    /// product.
    PolygonalCheck { directions: Vec<Vec<i64>> },
    /// Asymptotic agreement of the plain and finite-extension maximized
    /// cocycles.
    CprimeCompare { radii: Vec<u32> },
    /// Rescaled random balls, their stabilization series, and exports.
    ShapeCloud {
        n_values: Vec<f64>,
        seeds: u32,
        #[serde(default)]
        compare_double: bool,
    },
    /// Polygonal unit-ball candidate from directional estimates, compared
    /// with the projection of an extracted shape.
    PhiPolygon {
        directions: Vec<Vec<i64>>,
        shape_n: f64,
    },
    /// Margin sweep of one cocycle evaluation (truncation stabilization).
    MarginSweep { direction: Vec<i64>, power: u32 },
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub directory: PathBuf,
    #[serde(default = "default_formats")]
    pub formats: Vec<String>,
}

fn default_formats() -> Vec<String> {
    vec!["csv".into(), "json".into()]
}

impl ExperimentConfig {
    pub fn from_str(text: &str) -> Result<Self, ConfigError> {
        let cfg: ExperimentConfig = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self, ConfigError> {
        Self::from_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    fn validate(&self) -> Result<(), ConfigError> {
        if self.run.samples == 0 {
            return Err(ConfigError::Invalid("run.samples must be positive".into()));
        }
        if self.run.margin < 1.0 {
            return Err(ConfigError::Invalid("run.margin must be >= 1".into()));
        }
        if !self
            .outputs
            .formats
            .iter()
            .all(|f| f == "csv" || f == "json")
        {
            return Err(ConfigError::Invalid(
                "outputs.formats entries must be `csv` or `json`".into(),
            ));
        }
        Ok(())
    }

    /// Builds the group spec, reading a finite table relative to
    /// `base_dir` when needed.
    pub fn build_group(&self, base_dir: &Path) -> Result<GroupSpec, ConfigError> {
        let g = &self.group;
        let spec = match g.kind.as_str() {
            "free-abelian" => {
                let rank = g.rank.ok_or_else(|| {
                    ConfigError::Invalid("group.rank is required for free-abelian".into())
                })?;
                GroupSpec::free_abelian(rank)
            }
            "heisenberg" => GroupSpec::heisenberg(),
            "direct-product-finite" => {
                let base = match g.base.as_deref() {
                    Some("heisenberg") => GroupSpec::heisenberg(),
                    Some("free-abelian") => {
                        let rank = g.base_rank.ok_or_else(|| {
                            ConfigError::Invalid(
                                "group.base_rank is required for a free-abelian base".into(),
                            )
                        })?;
                        GroupSpec::free_abelian(rank)
                    }
                    other => {
                        return Err(ConfigError::Invalid(format!(
                            "group.base must be `heisenberg` or `free-abelian`, got {other:?}"
                        )))
                    }
                };
                let table = match (&g.table_path, g.table_cyclic) {
                    (Some(path), None) => {
                        let resolved = if path.is_absolute() {
                            path.clone()
                        } else {
                            base_dir.join(path)
                        };
                        FiniteGroupTable::from_path(&resolved)?
                    }
                    (None, Some(m)) => FiniteGroupTable::cyclic(m),
                    _ => {
                        return Err(ConfigError::Invalid(
                            "exactly one of group.table_path and group.table_cyclic is required"
                                .into(),
                        ))
                    }
                };
                GroupSpec::direct_product_finite(base, table)?
            }
            "dihedral" => {
                let rank = g.rank.ok_or_else(|| {
                    ConfigError::Invalid("group.rank is required for dihedral".into())
                })?;
                GroupSpec::dihedral_over(rank)
            }
            other => {
                return Err(ConfigError::Invalid(format!(
                    "unknown group.kind `{other}`"
                )))
            }
        };
        match &g.generators {
            None => Ok(spec),
            Some(gens) => {
                let elems: Vec<GroupElement> =
                    gens.iter().map(|c| GroupElement::new(c.as_slice())).collect();
                Ok(GroupSpec::new(spec.kind().clone(), elems)?)
            }
        }
    }

    pub fn build_model(&self) -> Result<ModelSpec, ConfigError> {
        let m = &self.model;
        let spec = match m.variant.as_str() {
            "iid-fpp" => ModelSpec::IidFpp {
                weights: m
                    .weights
                    .as_ref()
                    .map(WeightDist::from)
                    .ok_or_else(|| {
                        ConfigError::Invalid("model.weights is required for iid-fpp".into())
                    })?,
            },
            "coloring-fpp" => ModelSpec::ColoringFpp {
                palette: m.palette.clone().ok_or_else(|| {
                    ConfigError::Invalid("model.palette is required for coloring-fpp".into())
                })?,
            },
            "richardson" => ModelSpec::RichardsonEnv {
                rates: m.rates.as_ref().map(WeightDist::from).ok_or_else(|| {
                    ConfigError::Invalid("model.rates is required for richardson".into())
                })?,
            },
            "frog" => ModelSpec::Frog {
                walk_step_cap: m.walk_step_cap.unwrap_or(0),
            },
            other => {
                return Err(ConfigError::Invalid(format!(
                    "unknown model.variant `{other}`"
                )))
            }
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Stable fingerprint of the exact configuration text semantics.
    pub fn hash(&self) -> u64 {
        conegrowth_core::models::stable_hash_bytes(self.to_toml().as_bytes())
    }
}

/// Group element from configured coordinates, validated against the spec.
pub fn element_from_coords(
    spec: &GroupSpec,
    coords: &[i64],
) -> Result<GroupElement, ConfigError> {
    let e = GroupElement::new(coords);
    spec.validate_element(&e)?;
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
[group]
kind = "free-abelian"
rank = 2

[model]
variant = "iid-fpp"
weights = { dist = "constant", value = 1.0 }

[run]
master_seed = 7
samples = 5

[[tasks]]
kind = "phi-ladder"
direction = [1, 0]

[outputs]
directory = "out"
"#;

    #[test]
    fn minimal_config_parses_and_round_trips() {
        let cfg = ExperimentConfig::from_str(MINIMAL).unwrap();
        assert_eq!(cfg.run.master_seed, 7);
        let text = cfg.to_toml();
        let back = ExperimentConfig::from_str(&text).unwrap();
        assert_eq!(cfg, back);
        assert_eq!(cfg.hash(), back.hash());
    }

    #[test]
    fn unknown_keys_are_rejected_by_name() {
        let bad = MINIMAL.replace("margin_sweep", "margn").replace(
            "samples = 5",
            "samples = 5\nmargn = [1.5]",
        );
        let err = ExperimentConfig::from_str(&bad).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("margn"), "{msg}");
    }

    #[test]
    fn group_and_model_build() {
        let cfg = ExperimentConfig::from_str(MINIMAL).unwrap();
        let spec = cfg.build_group(Path::new(".")).unwrap();
        assert_eq!(spec.generator_count(), 4);
        let model = cfg.build_model().unwrap();
        assert_eq!(model.name(), "iid-fpp");
    }

    #[test]
    fn dihedral_and_product_configs_build() {
        let text = MINIMAL
            .replace("kind = \"free-abelian\"\nrank = 2", "kind = \"dihedral\"\nrank = 2")
            .replace("direction = [1, 0]", "direction = [1, 0, 0]");
        let cfg = ExperimentConfig::from_str(&text).unwrap();
        let spec = cfg.build_group(Path::new(".")).unwrap();
        assert_eq!(spec.coset_count(), 2);

        let text2 = MINIMAL.replace(
            "kind = \"free-abelian\"\nrank = 2",
            "kind = \"direct-product-finite\"\nbase = \"free-abelian\"\nbase_rank = 2\ntable_cyclic = 2",
        );
        let cfg2 = ExperimentConfig::from_str(&text2).unwrap();
        let spec2 = cfg2.build_group(Path::new(".")).unwrap();
        assert_eq!(spec2.coset_count(), 2);
    }

    #[test]
    fn invalid_values_are_rejected() {
        let bad = MINIMAL.replace("samples = 5", "samples = 0");
        assert!(ExperimentConfig::from_str(&bad).is_err());
        let bad_palette = MINIMAL.replace(
            "variant = \"iid-fpp\"\nweights = { dist = \"constant\", value = 1.0 }",
            "variant = \"coloring-fpp\"\npalette = [0.9, 0.9]",
        );
        let cfg = ExperimentConfig::from_str(&bad_palette).unwrap();
        assert!(cfg.build_model().is_err());
    }
}
