//! Empirical checkers for the growth hypotheses: tail decay above the word
//! norm, lower linear bounds on means, the geodesic-decomposition witness,
//! and the asymptotic comparison of the plain and finite-extension
//! maximized cocycles.

use rayon::prelude::*;
use serde::Serialize;

use crate::cayley::{ab_norm, word_norm, Ball};
use crate::group::GroupElement;
use crate::models::fpp::{c_double_prime, cocycle_shifted_in_ball, innerness_witness};
use crate::models::prf::{derive_seed, Domain, Prf};
use crate::models::{Environment, ModelError};

use super::phi::rung_values;
use super::stats::{log_log_slope, Acc, Z_95};
use super::{op_tag, EstimatorError, EvalCtx};

/// Deterministically picks a sphere element for sample `i`.
fn sphere_element(
    ball: &Ball,
    radius: u32,
    selector: &Prf,
    words: &[u64],
) -> Result<GroupElement, EstimatorError> {
    let range = ball.sphere_range(radius);
    if range.is_empty() {
        return Err(EstimatorError::InsufficientSamples(format!(
            "empty sphere at radius {radius}"
        )));
    }
    let off = selector.index(words, range.end - range.start);
    Ok(ball.element((range.start + off) as u32).clone())
}

/// Survival of c(x) over a t-grid above beta * |x|_S, per sampling radius.
#[derive(Debug, Clone, Serialize)]
pub struct TailRadiusReport {
    pub radius: u32,
    pub samples: usize,
    /// Absolute thresholds t_j = multiplier_j * beta * radius.
    pub t_grid: Vec<f64>,
    pub survival: Vec<f64>,
    /// Samples with c(x) >= beta * |x|_S.
    pub exceedances: usize,
    /// Power-law exponent fitted on the positive-survival grid points.
    pub fitted_exponent: Option<f64>,
    pub passed: bool,
}

/// Report for the at-least-linear tail condition: the survival function of
/// c(x) above beta * |x|_S must decay at least like t^-(2D+1).
#[derive(Debug, Clone, Serialize)]
pub struct TailReport {
    pub condition: &'static str,
    pub beta: f64,
    pub required_exponent: f64,
    pub per_radius: Vec<TailRadiusReport>,
    pub passed: bool,
    /// True when no radius produced any exceedance, so the pass is vacuous.
    pub trivial_pass: bool,
}

pub fn check_condition_all(
    ctx: &EvalCtx,
    radii: &[u32],
    beta: f64,
    t_grid_multipliers: &[f64],
    samples: usize,
) -> Result<TailReport, EstimatorError> {
    if radii.is_empty() || samples == 0 || t_grid_multipliers.len() < 2 {
        return Err(EstimatorError::InsufficientSamples(
            "need radii, samples, and a t-grid of at least two points".into(),
        ));
    }
    let required_exponent = (2 * ctx.spec.growth_degree() + 1) as f64;
    let selector = Prf::new(ctx.master_seed, Domain::Generic);
    let mut per_radius = Vec::new();
    for (ri, &radius) in radii.iter().enumerate() {
        let sphere_ball = Ball::grow(ctx.spec, radius, &ctx.budget)?;
        let arena_radius = (ctx.margin * radius as f64).ceil() as u32;
        let arena = Ball::grow(ctx.spec, arena_radius, &ctx.budget)?;
        let values: Vec<f64> = (0..samples)
            .into_par_iter()
            .map(|i| {
                let x = sphere_element(
                    &sphere_ball,
                    radius,
                    &selector,
                    &[op_tag::TAIL, ri as u64, i as u64],
                )?;
                let seed = derive_seed(ctx.master_seed, &[op_tag::TAIL, ri as u64, i as u64]);
                let env = Environment::new(seed);
                let s = cocycle_shifted_in_ball(ctx.model, &env, ctx.spec, &arena, &x)?;
                Ok(s.value())
            })
            .collect::<Result<_, EstimatorError>>()?;
        let base = beta * radius as f64;
        let t_grid: Vec<f64> = t_grid_multipliers.iter().map(|m| m * base).collect();
        let survival: Vec<f64> = t_grid
            .iter()
            .map(|&t| values.iter().filter(|&&v| v >= t).count() as f64 / samples as f64)
            .collect();
        let exceedances = values.iter().filter(|&&v| v >= base).count();
        let fitted_exponent = log_log_slope(&t_grid, &survival).map(|s| -s);
        let passed = exceedances == 0
            || match fitted_exponent {
                Some(e) => e >= required_exponent,
                // All mass below the second grid point: decay too fast to
                // resolve, which cannot contradict the condition.
                None => true,
            };
        per_radius.push(TailRadiusReport {
            radius,
            samples,
            t_grid,
            survival,
            exceedances,
            fitted_exponent,
            passed,
        });
    }
    let passed = per_radius.iter().all(|r| r.passed);
    let trivial_pass = per_radius.iter().all(|r| r.exceedances == 0);
    Ok(TailReport {
        condition: "at-least-linear-tail",
        beta,
        required_exponent,
        per_radius,
        passed,
        trivial_pass,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct LowerBoundRung {
    pub n: u32,
    pub mean: f64,
    pub std_error: f64,
    pub word_norm: u32,
    pub ab_norm: Option<u32>,
    /// Lower 95% confidence mean divided by the word norm.
    pub ratio_word: f64,
    /// Lower 95% confidence mean divided by the abelianized norm, when the
    /// latter is defined and nonzero.
    pub ratio_ab: Option<f64>,
}

/// Report for the at-most-linear lower bounds: the largest `a` such that
/// a * norm(x^n) <= E[c(x^n)] across rungs, for the word norm and (on the
/// nilpotent kinds) the abelianized norm.
#[derive(Debug, Clone, Serialize)]
pub struct LowerBoundReport {
    pub condition: &'static str,
    pub rungs: Vec<LowerBoundRung>,
    /// Largest a passing every rung (word-norm side).
    pub a_word: f64,
    /// Largest a passing some tail of the ladder, with its start index.
    pub a_word_tail: f64,
    pub tail_start: usize,
    /// Abelianized-norm side, absent for the finite-extension kinds or when
    /// every rung lies in the commutator subgroup.
    pub a_ab: Option<f64>,
    pub a_ab_tail: Option<f64>,
    pub passed_word: bool,
    pub passed_ab: Option<bool>,
}

pub fn check_condition_aml(
    ctx: &EvalCtx,
    x: &GroupElement,
    ladder: &[u32],
    samples: usize,
) -> Result<LowerBoundReport, EstimatorError> {
    if *x == ctx.spec.identity() {
        return Err(EstimatorError::IdentityDirection);
    }
    let ab_supported = ctx.spec.kind().is_nilpotent();
    let mut rungs = Vec::new();
    for (k, &n) in ladder.iter().enumerate() {
        let x_n = ctx.spec.power(x, n as i64)?;
        let values = rung_values(ctx, op_tag::LOWER_BOUND, k, &x_n, n, samples)?;
        let mut acc = Acc::new();
        for &(v, _) in &values {
            acc.push(v * n as f64);
        }
        let wn = word_norm(ctx.spec, &x_n, ctx.budget.max_radius, &ctx.budget)?
            .ok_or(ModelError::TargetOutsideBall)?;
        let an = if ab_supported {
            Some(ab_norm(ctx.spec, &x_n, &ctx.budget)?)
        } else {
            None
        };
        let lower_mean = acc.mean() - Z_95 * acc.std_error();
        let ratio_word = if wn > 0 { lower_mean / wn as f64 } else { f64::INFINITY };
        let ratio_ab = an.and_then(|a| (a > 0).then(|| lower_mean / a as f64));
        rungs.push(LowerBoundRung {
            n,
            mean: acc.mean(),
            std_error: acc.std_error(),
            word_norm: wn,
            ab_norm: an,
            ratio_word,
            ratio_ab,
        });
    }
    let word_ratios: Vec<f64> = rungs.iter().map(|r| r.ratio_word).collect();
    let (a_word, a_word_tail, tail_start) = full_and_tail_minima(&word_ratios);
    let ab_ratios: Vec<f64> = rungs.iter().filter_map(|r| r.ratio_ab).collect();
    let (a_ab, a_ab_tail) = if ab_ratios.is_empty() {
        (None, None)
    } else {
        let (full, tail, _) = full_and_tail_minima(&ab_ratios);
        (Some(full), Some(tail))
    };
    Ok(LowerBoundReport {
        condition: "at-most-linear-lower-bound",
        rungs,
        a_word,
        a_word_tail,
        tail_start,
        a_ab,
        a_ab_tail,
        passed_word: a_word > 0.0,
        passed_ab: a_ab.map(|a| a > 0.0),
    })
}

/// Minimum over the full slice, and the best minimum over suffixes (the
/// largest `a` witnessed by some tail of the ladder) with its start index.
fn full_and_tail_minima(ratios: &[f64]) -> (f64, f64, usize) {
    let full = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    let mut best = f64::NEG_INFINITY;
    let mut start = 0;
    for s in 0..ratios.len() {
        let m = ratios[s..].iter().copied().fold(f64::INFINITY, f64::min);
        if m > best {
            best = m;
            start = s;
        }
    }
    (full, best, start)
}

/// Exact geodesic-decomposition results over sampled (environment, target)
/// pairs.
#[derive(Debug, Clone, Serialize)]
pub struct InnernessReport {
    pub structural_ok: bool,
    pub tested: usize,
    pub exact: usize,
    pub skipped_boundary: usize,
}

pub fn check_innerness_fpp(
    ctx: &EvalCtx,
    sample_radius: u32,
    trials: usize,
) -> Result<InnernessReport, EstimatorError> {
    if ctx.spec.kind().is_nilpotent() && !ctx.spec.generators_avoid_commutator_subgroup() {
        return Ok(InnernessReport {
            structural_ok: false,
            tested: 0,
            exact: 0,
            skipped_boundary: 0,
        });
    }
    let sphere_ball = Ball::grow(ctx.spec, sample_radius, &ctx.budget)?;
    let selector = Prf::new(ctx.master_seed, Domain::Generic);
    let outcomes: Vec<Option<bool>> = (0..trials)
        .into_par_iter()
        .map(|i| {
            // Spread targets over radii 1..=sample_radius.
            let r = 1 + selector.index(&[op_tag::INNERNESS, i as u64, 0], sample_radius as usize)
                as u32;
            let x = sphere_element(&sphere_ball, r, &selector, &[op_tag::INNERNESS, i as u64, 1])?;
            let seed = derive_seed(ctx.master_seed, &[op_tag::INNERNESS, i as u64]);
            let env = Environment::new(seed);
            match innerness_witness(ctx.model, &env, ctx.spec, &x, ctx.margin, &ctx.budget) {
                Ok(w) => Ok(Some(w.total_ticks == w.step_sum_ticks)),
                Err(ModelError::TruncationUncertain) => Ok(None),
                Err(e) => Err(EstimatorError::from(e)),
            }
        })
        .collect::<Result<_, EstimatorError>>()?;
    let tested = outcomes.iter().flatten().count();
    let exact = outcomes.iter().flatten().filter(|&&b| b).count();
    let skipped = outcomes.iter().filter(|o| o.is_none()).count();
    Ok(InnernessReport {
        structural_ok: true,
        tested,
        exact,
        skipped_boundary: skipped,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct CPrimeRadiusReport {
    pub radius: u32,
    pub samples: usize,
    pub mean_ratio: f64,
    pub median_ratio: f64,
    pub max_ratio: f64,
    /// Deterministic bound 2 * max representative norm / radius.
    pub bound: f64,
}

/// Decay of |c(x) - c''([[x]])| / |x|_S across sampling radii.
#[derive(Debug, Clone, Serialize)]
pub struct CPrimeReport {
    pub max_representative_norm: u32,
    pub per_radius: Vec<CPrimeRadiusReport>,
}

pub fn compare_c_cprime(
    ctx: &EvalCtx,
    radii: &[u32],
    samples: usize,
) -> Result<CPrimeReport, EstimatorError> {
    if !ctx.spec.has_finite_extension() {
        // Trivial extension: the ratio is identically zero.
        return Ok(CPrimeReport {
            max_representative_norm: 0,
            per_radius: radii
                .iter()
                .map(|&radius| CPrimeRadiusReport {
                    radius,
                    samples: 0,
                    mean_ratio: 0.0,
                    median_ratio: 0.0,
                    max_ratio: 0.0,
                    bound: 0.0,
                })
                .collect(),
        });
    }
    let mut max_rep = 0u32;
    for j in 0..ctx.spec.coset_count() {
        let rep = ctx.spec.coset_representative(j)?;
        let n = word_norm(ctx.spec, &rep, ctx.budget.max_radius, &ctx.budget)?
            .ok_or(ModelError::TargetOutsideBall)?;
        max_rep = max_rep.max(n);
    }
    let selector = Prf::new(ctx.master_seed, Domain::Generic);
    let mut per_radius = Vec::new();
    for (ri, &radius) in radii.iter().enumerate() {
        let sphere_ball = Ball::grow(ctx.spec, radius, &ctx.budget)?;
        let arena_radius = (ctx.margin * radius as f64).ceil() as u32;
        let arena = Ball::grow(ctx.spec, arena_radius, &ctx.budget)?;
        let ratios: Vec<f64> = (0..samples)
            .into_par_iter()
            .map(|i| {
                let x = sphere_element(
                    &sphere_ball,
                    radius,
                    &selector,
                    &[op_tag::C_PRIME, ri as u64, i as u64],
                )?;
                let seed = derive_seed(ctx.master_seed, &[op_tag::C_PRIME, ri as u64, i as u64]);
                let env = Environment::new(seed);
                let c = cocycle_shifted_in_ball(ctx.model, &env, ctx.spec, &arena, &x)?;
                let cpp = c_double_prime(ctx.model, &env, ctx.spec, &x, ctx.margin, &ctx.budget)?;
                let diff = c.ticks.abs_diff(cpp.ticks);
                Ok(crate::models::ticks_to_f64(diff) / radius as f64)
            })
            .collect::<Result<_, EstimatorError>>()?;
        let mut sorted = ratios.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let median = sorted[sorted.len() / 2];
        let mut acc = Acc::new();
        ratios.iter().for_each(|&v| acc.push(v));
        per_radius.push(CPrimeRadiusReport {
            radius,
            samples,
            mean_ratio: acc.mean(),
            median_ratio: median,
            max_ratio: sorted.last().copied().unwrap_or(0.0),
            bound: 2.0 * max_rep as f64 / radius as f64,
        });
    }
    Ok(CPrimeReport {
        max_representative_norm: max_rep,
        per_radius,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::budget::Budget;
    use crate::group::{FiniteGroupTable, GroupSpec};
    use crate::models::{ModelSpec, WeightDist};

    fn unit_ctx<'a>(spec: &'a GroupSpec, model: &'a ModelSpec) -> EvalCtx<'a> {
        EvalCtx::new(spec, model, 99).with_budget(Budget::from_mb(256))
    }

    #[test]
    fn constant_weights_pass_tail_trivially() {
        let spec = GroupSpec::free_abelian(2);
        let model = ModelSpec::IidFpp {
            weights: WeightDist::Constant(1.0),
        };
        let ctx = unit_ctx(&spec, &model).with_margin(2.0);
        let report =
            check_condition_all(&ctx, &[6, 10], 2.0, &[1.0, 1.2, 1.4], 100).unwrap();
        assert!(report.passed);
        assert!(report.trivial_pass);
        assert_eq!(report.required_exponent, 5.0);
    }

    #[test]
    fn coloring_tail_passes_for_any_beta_above_one() {
        // c(x) <= |x|_S for coloring weights, so beta > 1 gives no
        // exceedances.
        let spec = GroupSpec::free_abelian(2);
        let model = ModelSpec::ColoringFpp {
            palette: vec![0.2; 5],
        };
        let ctx = unit_ctx(&spec, &model).with_margin(2.0);
        let report =
            check_condition_all(&ctx, &[8], 1.001, &[1.0, 1.2, 1.4], 200).unwrap();
        assert!(report.passed);
        assert!(report.trivial_pass);
    }

    #[test]
    fn constant_weights_have_unit_lower_bound() {
        let spec = GroupSpec::free_abelian(2);
        let model = ModelSpec::IidFpp {
            weights: WeightDist::Constant(1.0),
        };
        let ctx = unit_ctx(&spec, &model).with_margin(1.5);
        let report = check_condition_aml(
            &ctx,
            &GroupElement::free_abelian(&[1, 0]),
            &[2, 4, 8],
            3,
        )
        .unwrap();
        assert_eq!(report.a_word, 1.0);
        assert_eq!(report.a_ab, Some(1.0));
        assert!(report.passed_word);
    }

    #[test]
    fn frog_satisfies_word_lower_bound_with_unit_constant() {
        let spec = GroupSpec::free_abelian(1);
        let model = ModelSpec::Frog { walk_step_cap: 0 };
        let ctx = unit_ctx(&spec, &model).with_margin(3.0);
        let report = check_condition_aml(
            &ctx,
            &GroupElement::free_abelian(&[1]),
            &[2, 4],
            10,
        )
        .unwrap();
        // T(x) >= |x|_S pointwise, so the confidence-lowered mean can dip
        // below 1 only by sampling noise on the estimate itself.
        assert!(report.a_word >= 1.0 - 1e-9, "a_word {}", report.a_word);
        assert!(report.passed_word);
    }

    #[test]
    fn innerness_is_exact_for_coloring_on_heisenberg() {
        let spec = GroupSpec::heisenberg();
        let model = ModelSpec::ColoringFpp {
            palette: vec![0.25; 4],
        };
        let ctx = unit_ctx(&spec, &model).with_margin(3.0);
        let report = check_innerness_fpp(&ctx, 4, 40).unwrap();
        assert!(report.structural_ok);
        assert!(report.tested > 0);
        assert_eq!(report.exact, report.tested);
    }

    #[test]
    fn innerness_flags_central_generators() {
        let spec = GroupSpec::new(
            crate::group::GroupKind::Heisenberg,
            vec![
                GroupElement::heisenberg(1, 0, 0),
                GroupElement::heisenberg(-1, 0, 0),
                GroupElement::heisenberg(0, 1, 0),
                GroupElement::heisenberg(0, -1, 0),
                GroupElement::heisenberg(0, 0, 1),
                GroupElement::heisenberg(0, 0, -1),
            ],
        )
        .unwrap();
        let model = ModelSpec::IidFpp {
            weights: WeightDist::Constant(1.0),
        };
        let ctx = unit_ctx(&spec, &model);
        let report = check_innerness_fpp(&ctx, 3, 5).unwrap();
        assert!(!report.structural_ok);
    }

    #[test]
    fn trivial_extension_has_zero_ratio() {
        let spec = GroupSpec::direct_product_finite(
            GroupSpec::free_abelian(2),
            FiniteGroupTable::trivial(),
        )
        .unwrap();
        let model = ModelSpec::IidFpp {
            weights: WeightDist::Constant(1.0),
        };
        let ctx = unit_ctx(&spec, &model).with_margin(2.0);
        let report = compare_c_cprime(&ctx, &[4, 8], 20).unwrap();
        for r in &report.per_radius {
            assert_eq!(r.max_ratio, 0.0);
        }
    }

    #[test]
    fn product_extension_ratio_obeys_deterministic_bound() {
        let spec = GroupSpec::direct_product_finite(
            GroupSpec::free_abelian(2),
            FiniteGroupTable::cyclic(2),
        )
        .unwrap();
        let model = ModelSpec::IidFpp {
            weights: WeightDist::Constant(1.0),
        };
        let ctx = unit_ctx(&spec, &model).with_margin(2.0);
        let report = compare_c_cprime(&ctx, &[6, 12], 25).unwrap();
        assert!(report.max_representative_norm <= 2);
        for r in &report.per_radius {
            assert!(
                r.max_ratio <= r.bound + 1e-12,
                "radius {}: {} > {}",
                r.radius,
                r.max_ratio,
                r.bound
            );
        }
    }
}
