//! Monte Carlo estimation of the limiting norm and empirical checkers for
//! the growth conditions a subadditive cocycle must satisfy.
//!
//! Every estimator derives one child seed per (operation, rung, sample)
//! from the master seed, evaluates samples in parallel, and reduces in
//! ascending sample order, so results are bit-identical for any worker
//! count.

mod conditions;
mod phi;
pub mod stats;

pub use conditions::{
    check_condition_aml, check_condition_all, check_innerness_fpp, compare_c_cprime,
    CPrimeRadiusReport, CPrimeReport, InnernessReport, LowerBoundReport, LowerBoundRung,
    TailRadiusReport, TailReport,
};
pub use phi::{
    estimate_phi, phi_unit_polygon, polygonal_ergodic_check, running_minimum, Extrapolations,
    LadderRung, PhiEstimate, PolygonalElementReport, PolygonalReport, PolygonalRung,
};

use serde::Serialize;

use crate::budget::Budget;
use crate::cayley::CayleyError;
use crate::cone::ConeError;
use crate::group::{GroupError, GroupSpec};
use crate::models::{ModelError, ModelSpec};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EstimatorError {
    #[error("estimation needs a non-identity direction")]
    IdentityDirection,
    #[error("insufficient samples: {0}")]
    InsufficientSamples(String),
    #[error("estimate produced a non-positive limit value: {0}")]
    DegenerateEstimate(f64),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Cone(#[from] ConeError),
}

impl From<CayleyError> for EstimatorError {
    fn from(e: CayleyError) -> Self {
        EstimatorError::Model(ModelError::Cayley(e))
    }
}

impl From<GroupError> for EstimatorError {
    fn from(e: GroupError) -> Self {
        EstimatorError::Model(ModelError::Group(e))
    }
}

/// Shared evaluation context for the estimator operations.
#[derive(Clone)]
pub struct EvalCtx<'a> {
    pub spec: &'a GroupSpec,
    pub model: &'a ModelSpec,
    /// Truncation margin passed to the cocycle evaluations.
    pub margin: f64,
    pub budget: Budget,
    pub master_seed: u64,
}

impl<'a> EvalCtx<'a> {
    pub fn new(spec: &'a GroupSpec, model: &'a ModelSpec, master_seed: u64) -> Self {
        EvalCtx {
            spec,
            model,
            margin: 3.0,
            budget: Budget::default(),
            master_seed,
        }
    }

    pub fn with_margin(mut self, margin: f64) -> Self {
        self.margin = margin;
        self
    }

    pub fn with_budget(mut self, budget: Budget) -> Self {
        self.budget = budget;
        self
    }
}

/// Operation tags separating the per-operation seed streams.
pub(crate) mod op_tag {
    pub const PHI: u64 = 1;
    pub const TAIL: u64 = 2;
    pub const LOWER_BOUND: u64 = 3;
    pub const INNERNESS: u64 = 4;
    pub const POLYGONAL: u64 = 5;
    pub const C_PRIME: u64 = 6;
}

/// Interval [lo, hi] of observed ratios phi_hat / |x_ab|, the empirical
/// two-sided comparability constants between the limit norm and the
/// Euclidean norm of the abelianized direction.
#[derive(Debug, Clone, Serialize)]
pub struct SandwichReport {
    pub per_direction: Vec<DirectionRatio>,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct DirectionRatio {
    pub direction: Vec<i64>,
    pub phi_hat: f64,
    pub euclidean_norm: f64,
    pub ratio: f64,
}

/// Ratios phi_hat / |x_ab|_2 over a set of directions; the interval they
/// span stays away from 0 and infinity for models passing the growth
/// conditions.
pub fn sandwich_report(
    ctx: &EvalCtx,
    directions: &[crate::group::GroupElement],
    ladder: &[u32],
    samples: usize,
) -> Result<SandwichReport, EstimatorError> {
    let mut per_direction = Vec::new();
    for dir in directions {
        let est = estimate_phi(ctx, dir, ladder, samples)?;
        let norm2 = est
            .direction
            .iter()
            .map(|&c| (c as f64) * (c as f64))
            .sum::<f64>()
            .sqrt();
        if norm2 == 0.0 {
            return Err(EstimatorError::IdentityDirection);
        }
        per_direction.push(DirectionRatio {
            direction: est.direction.clone(),
            phi_hat: est.phi_hat,
            euclidean_norm: norm2,
            ratio: est.phi_hat / norm2,
        });
    }
    let lower = per_direction
        .iter()
        .map(|d| d.ratio)
        .fold(f64::INFINITY, f64::min);
    let upper = per_direction
        .iter()
        .map(|d| d.ratio)
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(SandwichReport {
        per_direction,
        lower,
        upper,
    })
}
