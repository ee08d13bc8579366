//! Ladder estimation of the limiting norm along powers of a direction, and
//! its shifted-base consistency check along polygonal products.

use rayon::prelude::*;
use serde::Serialize;

use crate::cayley::{word_norm, Ball};
use crate::group::GroupElement;
use crate::models::fpp::{cocycle_shifted_in_ball, evaluate_cocycle};
use crate::models::prf::derive_seed;
use crate::models::Environment;

use super::stats::{linear_fit, Acc};
use super::{op_tag, EstimatorError, EvalCtx};

/// One ladder rung: samples of c(x^n)/n over independent environments.
#[derive(Debug, Clone, Serialize)]
pub struct LadderRung {
    pub n: u32,
    pub mean: f64,
    pub std_error: f64,
    pub samples: usize,
    /// How many samples had an optimal path touching the truncation sphere.
    pub boundary_touched: usize,
}

/// Intercepts of least-squares fits mean(n) = phi + c * corr(n), emitted for
/// inspection only; pass/fail logic never uses them.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Extrapolations {
    pub one_over_n: Option<f64>,
    pub one_over_sqrt_n: Option<f64>,
}

/// Ladder estimate of the limiting norm in one abelianized direction.
#[derive(Debug, Clone, Serialize)]
pub struct PhiEstimate {
    pub direction: Vec<i64>,
    pub ladder: Vec<LadderRung>,
    /// Mean of the largest rung; no extrapolation.
    pub phi_hat: f64,
    pub phi_hat_std_error: f64,
    /// Rungs whose mean exceeds the running minimum of earlier rungs by
    /// more than twice the joint standard error.
    pub monotone_violations: u32,
    pub extrapolations: Extrapolations,
}

pub(crate) fn rung_values(
    ctx: &EvalCtx,
    op: u64,
    rung_idx: usize,
    x_n: &GroupElement,
    n: u32,
    samples: usize,
) -> Result<Vec<(f64, bool)>, EstimatorError> {
    // One shared arena per rung for the FPP variants; the frog model
    // simulates per environment.
    let arena = if ctx.model.is_fpp() {
        let norm = word_norm(ctx.spec, x_n, ctx.budget.max_radius, &ctx.budget)?
            .ok_or(crate::models::ModelError::TargetOutsideBall)?;
        let radius = (ctx.margin * norm as f64).ceil() as u32;
        Some(Ball::grow(ctx.spec, radius, &ctx.budget)?)
    } else {
        None
    };
    (0..samples)
        .into_par_iter()
        .map(|i| {
            let seed = derive_seed(ctx.master_seed, &[op, rung_idx as u64, i as u64]);
            let env = Environment::new(seed);
            let sample = match &arena {
                Some(ball) => cocycle_shifted_in_ball(ctx.model, &env, ctx.spec, ball, x_n)?,
                None => evaluate_cocycle(ctx.model, &env, ctx.spec, x_n, ctx.margin, &ctx.budget)?,
            };
            Ok((sample.value() / n as f64, sample.boundary_touched))
        })
        .collect()
}

/// Estimates lim c(x^n)/n along a ladder of powers, with M independent
/// environments per rung. The estimate is the mean of the largest rung.
pub fn estimate_phi(
    ctx: &EvalCtx,
    x: &GroupElement,
    ladder: &[u32],
    samples: usize,
) -> Result<PhiEstimate, EstimatorError> {
    if *x == ctx.spec.identity() {
        return Err(EstimatorError::IdentityDirection);
    }
    if ladder.is_empty() || samples == 0 {
        return Err(EstimatorError::InsufficientSamples(
            "ladder and sample count must be nonempty".into(),
        ));
    }
    debug_assert!(ladder.windows(2).all(|w| w[0] < w[1]), "ladder must increase");
    let mut rungs = Vec::with_capacity(ladder.len());
    for (k, &n) in ladder.iter().enumerate() {
        let x_n = ctx.spec.power(x, n as i64)?;
        let values = rung_values(ctx, op_tag::PHI, k, &x_n, n, samples)?;
        let mut acc = Acc::new();
        let mut boundary = 0usize;
        for &(v, b) in &values {
            acc.push(v);
            boundary += b as usize;
        }
        rungs.push(LadderRung {
            n,
            mean: acc.mean(),
            std_error: acc.std_error(),
            samples,
            boundary_touched: boundary,
        });
    }
    let mut violations = 0u32;
    for k in 1..rungs.len() {
        let (best_idx, best) = rungs[..k]
            .iter()
            .enumerate()
            .map(|(i, r)| (i, r.mean))
            .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
            .unwrap();
        let slack = 2.0 * (rungs[k].std_error + rungs[best_idx].std_error);
        if rungs[k].mean > best + slack {
            violations += 1;
        }
    }
    let (phi_hat, phi_hat_std_error) = {
        let last = rungs.last().unwrap();
        (last.mean, last.std_error)
    };
    let xs_n: Vec<f64> = rungs.iter().map(|r| 1.0 / r.n as f64).collect();
    let xs_sqrt: Vec<f64> = rungs.iter().map(|r| 1.0 / (r.n as f64).sqrt()).collect();
    let ys: Vec<f64> = rungs.iter().map(|r| r.mean).collect();
    let extrapolations = Extrapolations {
        one_over_n: linear_fit(&xs_n, &ys).map(|(_, b)| b),
        one_over_sqrt_n: linear_fit(&xs_sqrt, &ys).map(|(_, b)| b),
    };
    Ok(PhiEstimate {
        direction: ctx.spec.abelianize(x)?,
        ladder: rungs,
        phi_hat,
        phi_hat_std_error,
        monotone_violations: violations,
        extrapolations,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct PolygonalRung {
    pub n: u32,
    pub shifted_mean: f64,
    pub shifted_std_error: f64,
    pub solo_mean: f64,
    pub solo_std_error: f64,
    pub gap: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct PolygonalElementReport {
    pub position: usize,
    pub rungs: Vec<PolygonalRung>,
    pub max_gap: f64,
}

/// Per-element comparison of the shifted rescaled cocycle along a polygonal
/// base against the unshifted ladder estimate.
#[derive(Debug, Clone, Serialize)]
pub struct PolygonalReport {
    pub elements: Vec<PolygonalElementReport>,
}

/// For each j, estimates (1/n) c(y_j^n) shifted by the product
/// y_(j-1)^n ... y_1^n and compares with the plain ladder of y_j. The two
/// limits agree, so the per-rung gap is a consistency diagnostic.
pub fn polygonal_ergodic_check(
    ctx: &EvalCtx,
    y_list: &[GroupElement],
    ladder: &[u32],
    samples: usize,
) -> Result<PolygonalReport, EstimatorError> {
    if y_list.is_empty() {
        return Err(EstimatorError::InsufficientSamples("empty element list".into()));
    }
    let mut elements = Vec::new();
    for (j, y) in y_list.iter().enumerate() {
        let mut rungs = Vec::new();
        for (k, &n) in ladder.iter().enumerate() {
            let y_n = ctx.spec.power(y, n as i64)?;
            // Base point: the product of the earlier elements' n-th powers,
            // multiplied right-to-left so y_1^n is applied first.
            let mut base = ctx.spec.identity();
            for yi in y_list[..j].iter() {
                base = ctx.spec.multiply(&ctx.spec.power(yi, n as i64)?, &base)?;
            }
            let norm = word_norm(ctx.spec, &y_n, ctx.budget.max_radius, &ctx.budget)?
                .ok_or(crate::models::ModelError::TargetOutsideBall)?;
            let radius = (ctx.margin * norm as f64).ceil() as u32;
            let arena = Ball::grow_from(ctx.spec, &base, radius, &ctx.budget)?;
            let shifted: Vec<f64> = (0..samples)
                .into_par_iter()
                .map(|i| {
                    let seed = derive_seed(
                        ctx.master_seed,
                        &[op_tag::POLYGONAL, j as u64, k as u64, i as u64],
                    );
                    let env = Environment::new(seed);
                    let s = cocycle_shifted_in_ball(ctx.model, &env, ctx.spec, &arena, &y_n)?;
                    Ok(s.value() / n as f64)
                })
                .collect::<Result<_, EstimatorError>>()?;
            let solo_arena = Ball::grow(ctx.spec, radius, &ctx.budget)?;
            let solo: Vec<f64> = (0..samples)
                .into_par_iter()
                .map(|i| {
                    let seed = derive_seed(
                        ctx.master_seed,
                        &[op_tag::POLYGONAL, j as u64, k as u64, i as u64, 1],
                    );
                    let env = Environment::new(seed);
                    let s = cocycle_shifted_in_ball(ctx.model, &env, ctx.spec, &solo_arena, &y_n)?;
                    Ok(s.value() / n as f64)
                })
                .collect::<Result<_, EstimatorError>>()?;
            let mut acc_s = Acc::new();
            shifted.iter().for_each(|&v| acc_s.push(v));
            let mut acc_p = Acc::new();
            solo.iter().for_each(|&v| acc_p.push(v));
            rungs.push(PolygonalRung {
                n,
                shifted_mean: acc_s.mean(),
                shifted_std_error: acc_s.std_error(),
                solo_mean: acc_p.mean(),
                solo_std_error: acc_p.std_error(),
                gap: (acc_s.mean() - acc_p.mean()).abs(),
            });
        }
        let max_gap = rungs.iter().map(|r| r.gap).fold(0.0, f64::max);
        elements.push(PolygonalElementReport {
            position: j,
            rungs,
            max_gap,
        });
    }
    Ok(PolygonalReport { elements })
}

/// Builds the polygonal unit-ball candidate in the abelian projection:
/// vertices dir_ab / phi_hat(dir) over a fan of directions.
pub fn phi_unit_polygon(
    ctx: &EvalCtx,
    directions: &[GroupElement],
    ladder: &[u32],
    samples: usize,
) -> Result<Vec<Vec<f64>>, EstimatorError> {
    let mut vertices = Vec::with_capacity(directions.len());
    for dir in directions {
        let est = estimate_phi(ctx, dir, ladder, samples)?;
        if est.phi_hat <= 0.0 {
            return Err(EstimatorError::DegenerateEstimate(est.phi_hat));
        }
        vertices.push(
            est.direction
                .iter()
                .map(|&c| c as f64 / est.phi_hat)
                .collect(),
        );
    }
    Ok(vertices)
}

/// Fekete-style sanity on a ladder: the running minimum of rung means,
/// which is nonincreasing by construction and approximates the infimum
/// characterization of the limit.
pub fn running_minimum(ladder: &[LadderRung]) -> Vec<f64> {
    let mut out = Vec::with_capacity(ladder.len());
    let mut best = f64::INFINITY;
    for r in ladder {
        best = best.min(r.mean);
        out.push(best);
    }
    out
}
