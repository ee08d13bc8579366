//! Discrete-time frog model on a truncated Cayley ball.
//!
//! One sleeping frog sits on every vertex of B(e, R); the frog at the
//! identity starts active. Each step, every active frog moves to a
//! uniformly random neighbor (uniform over the generating set). A sleeping
//! frog wakes the first time its vertex is occupied by an active frog.
//! Frogs stepping outside the ball are removed, which biases activation
//! times upward; the radius and horizon are reported with every sample.

use std::collections::HashMap;

use crate::budget::Budget;
use crate::cayley::{word_norm, Ball};
use crate::group::{GroupElement, GroupSpec};

use super::prf::{coord_words, Domain, Prf};
use super::{CocycleSample, Environment, ModelError, ModelSpec, TICKS_PER_UNIT};

struct ActiveFrog {
    /// Ball index of the frog's origin vertex; identifies its walk stream.
    origin: u32,
    /// Current ball index.
    pos: u32,
    /// Number of moves made so far.
    age: u32,
}

/// Runs the particle system on B(e, R) for `t_max` steps and returns the
/// first-wake times of the requested targets (`None` when the frog is
/// still asleep at the horizon).
pub fn frog_activation(
    model: &ModelSpec,
    env: &Environment,
    spec: &GroupSpec,
    targets: &[GroupElement],
    radius: u32,
    t_max: u32,
    budget: &Budget,
) -> Result<HashMap<GroupElement, Option<u64>>, ModelError> {
    let ModelSpec::Frog { walk_step_cap } = model else {
        return Err(ModelError::UnsupportedVariant(
            "activation times exist only in the frog model".into(),
        ));
    };
    let ball = Ball::grow(spec, radius, budget)?;
    for t in targets {
        if !ball.contains(t) {
            return Err(crate::cayley::CayleyError::NotInBall.into());
        }
    }
    let prf = Prf::new(env.master_seed, Domain::FrogStep);
    let gen_count = spec.generator_count();
    let origin_idx = ball.index_of(&spec.identity()).expect("center in ball");
    let mut wake: Vec<Option<u64>> = vec![None; ball.len()];
    wake[origin_idx as usize] = Some(0);
    let mut active = vec![ActiveFrog {
        origin: origin_idx,
        pos: origin_idx,
        age: 0,
    }];
    for t in 1..=t_max as u64 {
        let mut kept = Vec::with_capacity(active.len());
        for mut frog in active {
            // The walk stream is a pure function of (origin, step index).
            let mut words = coord_words(ball.element(frog.origin).coords());
            words.push(frog.age as u64);
            let g = prf.index(&words, gen_count) as u8;
            let next = spec.multiply(spec.generator(g), ball.element(frog.pos))?;
            frog.age += 1;
            let Some(next_idx) = ball.index_of(&next) else {
                continue; // left the arena
            };
            frog.pos = next_idx;
            kept.push(frog);
        }
        // Wake sleepers on occupied vertices first: a walker making its
        // final capped step still wakes whatever it lands on.
        let mut woken: Vec<u32> = Vec::new();
        for frog in &kept {
            if wake[frog.pos as usize].is_none() {
                wake[frog.pos as usize] = Some(t);
                woken.push(frog.pos);
            }
        }
        if *walk_step_cap > 0 {
            kept.retain(|f| f.age < *walk_step_cap);
        }
        active = kept;
        for idx in woken {
            active.push(ActiveFrog {
                origin: idx,
                pos: idx,
                age: 0,
            });
        }
        if active.is_empty() {
            break;
        }
    }
    Ok(targets
        .iter()
        .map(|x| {
            let idx = ball.index_of(x).expect("checked above");
            (x.clone(), wake[idx as usize])
        })
        .collect())
}

/// Cocycle view of the frog model: the activation time of the single
/// target `x`, simulated on a ball sized by the margin. Time is measured
/// in whole steps, stored in ticks for uniformity with the FPP variants.
pub fn frog_cocycle(
    model: &ModelSpec,
    env: &Environment,
    spec: &GroupSpec,
    x: &GroupElement,
    margin: f64,
    budget: &Budget,
) -> Result<CocycleSample, ModelError> {
    if !(margin >= 1.0) {
        return Err(ModelError::InvalidModel(format!(
            "margin must be >= 1, got {margin}"
        )));
    }
    if *x == spec.identity() {
        return Ok(CocycleSample {
            x: x.clone(),
            base: spec.identity(),
            ticks: 0,
            truncation_radius: 0,
            boundary_touched: false,
            seed: env.master_seed,
            model_id: model.params_hash(),
        });
    }
    let norm = word_norm(spec, x, budget.max_radius, budget)?
        .ok_or(ModelError::TargetOutsideBall)?;
    let radius = (margin * norm as f64).ceil() as u32;
    let t_max = (radius * 24).max(200);
    let times = frog_activation(model, env, spec, std::slice::from_ref(x), radius, t_max, budget)?;
    match times[x] {
        Some(t) => Ok(CocycleSample {
            x: x.clone(),
            base: spec.identity(),
            ticks: t * TICKS_PER_UNIT,
            truncation_radius: radius,
            boundary_touched: false,
            seed: env.master_seed,
            model_id: model.params_hash(),
        }),
        None => Err(ModelError::Undetermined { t_max }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn budget() -> Budget {
        Budget::from_mb(128)
    }

    #[test]
    fn origin_wakes_at_time_zero() {
        let spec = GroupSpec::free_abelian(1);
        let model = ModelSpec::Frog { walk_step_cap: 0 };
        let env = Environment::new(1);
        let times = frog_activation(
            &model,
            &env,
            &spec,
            &[spec.identity()],
            5,
            10,
            &budget(),
        )
        .unwrap();
        assert_eq!(times[&spec.identity()], Some(0));
    }

    #[test]
    fn activation_dominates_word_norm() {
        let spec = GroupSpec::free_abelian(2);
        let model = ModelSpec::Frog { walk_step_cap: 0 };
        let b = budget();
        let ball = Ball::grow(&spec, 8, &b).unwrap();
        let targets: Vec<GroupElement> = ball.iter().map(|(e, _)| e.clone()).collect();
        for seed in 0..5 {
            let env = Environment::new(seed);
            let times = frog_activation(&model, &env, &spec, &targets, 8, 200, &b).unwrap();
            for (x, t) in &times {
                if let Some(t) = t {
                    let norm = ball.norm_of(x).unwrap() as u64;
                    assert!(*t >= norm, "woke {x:?} at {t} below norm {norm}");
                }
            }
        }
    }

    #[test]
    fn first_neighbor_activation_probability_is_half() {
        // The first step of the origin walker lands on +1 or -1, each with
        // probability 1/2, so activation(+1) = 1 with probability 1/2.
        let spec = GroupSpec::free_abelian(1);
        let model = ModelSpec::Frog { walk_step_cap: 0 };
        let b = budget();
        let plus_one = GroupElement::free_abelian(&[1]);
        let n = 10_000;
        let mut hits = 0usize;
        for seed in 0..n {
            let env = Environment::new(seed);
            let times =
                frog_activation(&model, &env, &spec, std::slice::from_ref(&plus_one), 3, 1, &b)
                    .unwrap();
            if times[&plus_one] == Some(1) {
                hits += 1;
            }
        }
        let frac = hits as f64 / n as f64;
        // Exactly 1/2 up to 3 sigma of binomial noise.
        assert!(frac >= 0.5 - 3.0 * 0.005, "frac {frac}");
        assert!(frac <= 0.5 + 3.0 * 0.005, "frac {frac}");
    }

    #[test]
    fn trajectories_do_not_depend_on_target_set() {
        let spec = GroupSpec::free_abelian(2);
        let model = ModelSpec::Frog { walk_step_cap: 0 };
        let env = Environment::new(77);
        let b = budget();
        let x = GroupElement::free_abelian(&[2, 1]);
        let a = frog_activation(&model, &env, &spec, std::slice::from_ref(&x), 6, 100, &b).unwrap();
        let ball = Ball::grow(&spec, 6, &b).unwrap();
        let all: Vec<GroupElement> = ball.iter().map(|(e, _)| e.clone()).collect();
        let full = frog_activation(&model, &env, &spec, &all, 6, 100, &b).unwrap();
        assert_eq!(a[&x], full[&x]);
    }

    #[test]
    fn step_cap_slows_activation() {
        let spec = GroupSpec::free_abelian(1);
        let env = Environment::new(5);
        let b = budget();
        let far = GroupElement::free_abelian(&[4]);
        let unlimited = frog_activation(
            &ModelSpec::Frog { walk_step_cap: 0 },
            &env,
            &spec,
            std::slice::from_ref(&far),
            6,
            400,
            &b,
        )
        .unwrap()[&far];
        let capped = frog_activation(
            &ModelSpec::Frog { walk_step_cap: 2 },
            &env,
            &spec,
            std::slice::from_ref(&far),
            6,
            400,
            &b,
        )
        .unwrap()[&far];
        match (unlimited, capped) {
            (Some(u), Some(c)) => assert!(c >= u),
            (Some(_), None) => {}
            (None, Some(_)) => panic!("cap accelerated activation"),
            (None, None) => {}
        }
    }

    #[test]
    fn fpp_variants_reject_activation_queries() {
        let spec = GroupSpec::free_abelian(1);
        let env = Environment::new(0);
        let model = ModelSpec::IidFpp {
            weights: super::super::WeightDist::Constant(1.0),
        };
        assert!(matches!(
            frog_activation(&model, &env, &spec, &[], 2, 5, &budget()),
            Err(ModelError::UnsupportedVariant(_))
        ));
    }
}
