//! Random environments and cocycle evaluation: i.i.d. first-passage
//! percolation, random-coloring FPP, Richardson growth in a random
//! environment, and the frog model.
//!
//! Passage times are kept in Q32.32 fixed point (`u64` ticks). Sums of
//! ticks are exact, so subadditivity audits, margin monotonicity, and
//! geodesic-decomposition witnesses are checked with exact integer
//! comparisons rather than floating-point tolerances.

pub mod fpp;
pub mod frog;
pub mod prf;

use serde::Serialize;

use crate::cayley::CayleyError;
use crate::group::{GroupElement, GroupError};

/// Fixed-point scale: one unit of passage time.
pub const TICKS_PER_UNIT: u64 = 1 << 32;

pub fn ticks_to_f64(t: u64) -> f64 {
    t as f64 / TICKS_PER_UNIT as f64
}

pub fn f64_to_ticks(v: f64) -> u64 {
    debug_assert!(v >= 0.0 && v.is_finite());
    (v * TICKS_PER_UNIT as f64).round() as u64
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ModelError {
    #[error("operation is not supported for this model variant: {0}")]
    UnsupportedVariant(String),
    #[error("invalid model parameters: {0}")]
    InvalidModel(String),
    #[error("target norm not determined within the radius cap")]
    TargetOutsideBall,
    #[error("optimal path touches the truncation sphere; witness would be unreliable")]
    TruncationUncertain,
    #[error("activation not determined within {t_max} steps")]
    Undetermined { t_max: u32 },
    #[error("passage time overflowed the fixed-point range")]
    ValueOverflow,
    #[error(transparent)]
    Cayley(#[from] CayleyError),
    #[error(transparent)]
    Group(#[from] GroupError),
}

/// Edge-weight (or rate) distribution.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum WeightDist {
    Constant(f64),
    /// Takes value `hi` with probability `p`, else `lo`.
    Bernoulli { p: f64, lo: f64, hi: f64 },
    Exponential { lambda: f64 },
    Uniform { lo: f64, hi: f64 },
}

impl WeightDist {
    /// Inverse-CDF sample from a uniform variate in [0, 1).
    pub fn sample(&self, u: f64) -> f64 {
        match *self {
            WeightDist::Constant(v) => v,
            WeightDist::Bernoulli { p, lo, hi } => {
                if u < p {
                    hi
                } else {
                    lo
                }
            }
            WeightDist::Exponential { lambda } => -(-u).ln_1p() / lambda,
            WeightDist::Uniform { lo, hi } => lo + u * (hi - lo),
        }
    }

    fn validate_nonnegative(&self) -> Result<(), ModelError> {
        let ok = match *self {
            WeightDist::Constant(v) => v >= 0.0 && v.is_finite(),
            WeightDist::Bernoulli { p, lo, hi } => {
                (0.0..=1.0).contains(&p) && lo >= 0.0 && hi >= 0.0
            }
            WeightDist::Exponential { lambda } => lambda > 0.0,
            WeightDist::Uniform { lo, hi } => lo >= 0.0 && hi >= lo,
        };
        if ok {
            Ok(())
        } else {
            Err(ModelError::InvalidModel(format!(
                "nonnegative weight distribution required, got {self:?}"
            )))
        }
    }

    fn validate_strictly_positive(&self) -> Result<(), ModelError> {
        self.validate_nonnegative()?;
        let ok = match *self {
            WeightDist::Constant(v) => v > 0.0,
            WeightDist::Bernoulli { lo, hi, .. } => lo > 0.0 && hi > 0.0,
            WeightDist::Exponential { .. } => true,
            WeightDist::Uniform { lo, .. } => lo > 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(ModelError::InvalidModel(format!(
                "strictly positive rate distribution required, got {self:?}"
            )))
        }
    }
}

/// Which growth process the environment realizes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum ModelSpec {
    /// Independent weights per edge, one distribution for all edges.
    IidFpp { weights: WeightDist },
    /// Vertices colored i.i.d. from the palette; an edge costs 0 exactly
    /// when its endpoints share a color, else 1.
    ColoringFpp { palette: Vec<f64> },
    /// One exponential rate per direction class, drawn once per
    /// environment; edge weights are Exp(rate of class).
    RichardsonEnv { rates: WeightDist },
    /// Discrete-time frog model; `walk_step_cap` bounds each frog's walk
    /// length (0 = unbounded).
    Frog { walk_step_cap: u32 },
}

impl ModelSpec {
    pub fn validate(&self) -> Result<(), ModelError> {
        match self {
            ModelSpec::IidFpp { weights } => weights.validate_nonnegative(),
            ModelSpec::ColoringFpp { palette } => {
                if palette.is_empty() {
                    return Err(ModelError::InvalidModel("empty palette".into()));
                }
                if palette.iter().any(|&p| !(0.0..=1.0).contains(&p)) {
                    return Err(ModelError::InvalidModel(
                        "palette probabilities must lie in [0, 1]".into(),
                    ));
                }
                let total: f64 = palette.iter().sum();
                if (total - 1.0).abs() > 1e-12 {
                    return Err(ModelError::InvalidModel(format!(
                        "palette sums to {total}, expected 1"
                    )));
                }
                Ok(())
            }
            ModelSpec::RichardsonEnv { rates } => rates.validate_strictly_positive(),
            ModelSpec::Frog { .. } => Ok(()),
        }
    }

    pub fn is_fpp(&self) -> bool {
        !matches!(self, ModelSpec::Frog { .. })
    }

    pub fn name(&self) -> &'static str {
        match self {
            ModelSpec::IidFpp { .. } => "iid-fpp",
            ModelSpec::ColoringFpp { .. } => "coloring-fpp",
            ModelSpec::RichardsonEnv { .. } => "richardson",
            ModelSpec::Frog { .. } => "frog",
        }
    }

    /// Stable fingerprint of the variant and its parameters.
    pub fn params_hash(&self) -> u64 {
        stable_hash_bytes(format!("{self:?}").as_bytes())
    }
}

/// FNV-1a folded through the avalanche mixer; stable across runs and
/// platforms.
pub fn stable_hash_bytes(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h = (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01b3);
    }
    prf::mix64(h)
}

/// One realization of the random environment. Weights are never stored:
/// every query is answered by the keyed PRF, so the environment is a value
/// object that is identical across processes and thread counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Environment {
    pub master_seed: u64,
}

impl Environment {
    pub fn new(master_seed: u64) -> Self {
        Environment { master_seed }
    }
}

/// One evaluation of a cocycle c(x) or a shifted evaluation c(x) after
/// translation by `base`, with full provenance.
#[derive(Debug, Clone, Serialize)]
pub struct CocycleSample {
    pub x: GroupElement,
    pub base: GroupElement,
    /// Passage time in Q32.32 ticks.
    pub ticks: u64,
    pub truncation_radius: u32,
    pub boundary_touched: bool,
    pub seed: u64,
    pub model_id: u64,
}

impl CocycleSample {
    pub fn value(&self) -> f64 {
        ticks_to_f64(self.ticks)
    }
}

/// Writes the sample log: `model, variant_params_hash, seed, x_coords,
/// base_coords, value, truncation_radius, boundary_touched`.
pub fn write_sample_log<W: std::io::Write>(
    mut w: W,
    model: &ModelSpec,
    samples: &[CocycleSample],
) -> std::io::Result<()> {
    writeln!(
        w,
        "model,variant_params_hash,seed,x_coords,base_coords,value,truncation_radius,boundary_touched"
    )?;
    for s in samples {
        let xc: Vec<String> = s.x.coords().iter().map(|c| c.to_string()).collect();
        let bc: Vec<String> = s.base.coords().iter().map(|c| c.to_string()).collect();
        writeln!(
            w,
            "{},{:016x},{},{},{},{},{},{}",
            model.name(),
            s.model_id,
            s.seed,
            xc.join(" "),
            bc.join(" "),
            s.value(),
            s.truncation_radius,
            s.boundary_touched
        )?;
    }
    Ok(())
}
