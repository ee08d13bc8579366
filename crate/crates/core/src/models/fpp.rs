//! First-passage evaluation: lazy deterministic edge weights, restricted
//! Dijkstra over word-metric balls, shifted cocycles, the finite-extension
//! maximized cocycle, and exact path witnesses.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use crate::budget::Budget;
use crate::cayley::{word_norm, Ball, EdgeKey};
use crate::group::{GroupElement, GroupSpec};

use super::prf::{coord_words, Domain, Prf};
use super::{f64_to_ticks, CocycleSample, Environment, ModelError, ModelSpec, TICKS_PER_UNIT};

/// Color of a vertex under the coloring model, drawn i.i.d. from the
/// palette by the keyed PRF.
pub fn vertex_color(
    model: &ModelSpec,
    env: &Environment,
    v: &GroupElement,
) -> Result<usize, ModelError> {
    let ModelSpec::ColoringFpp { palette } = model else {
        return Err(ModelError::UnsupportedVariant(
            "vertex colors exist only in the coloring model".into(),
        ));
    };
    let u = Prf::new(env.master_seed, Domain::VertexColor).unit_f64(&coord_words(v.coords()));
    let mut acc = 0.0;
    for (i, &p) in palette.iter().enumerate() {
        acc += p;
        if u < acc {
            return Ok(i);
        }
    }
    Ok(palette.len() - 1)
}

/// The per-environment exponential rate of a direction class in the
/// Richardson model. One draw per (environment, class).
pub fn richardson_rate(
    model: &ModelSpec,
    env: &Environment,
    class: u8,
) -> Result<f64, ModelError> {
    let ModelSpec::RichardsonEnv { rates } = model else {
        return Err(ModelError::UnsupportedVariant(
            "direction rates exist only in the Richardson model".into(),
        ));
    };
    let u = Prf::new(env.master_seed, Domain::DirectionRate).unit_f64(&[class as u64]);
    Ok(rates.sample(u))
}

/// Deterministic weight of an edge, in ticks.
pub fn edge_weight(
    model: &ModelSpec,
    env: &Environment,
    e: &EdgeKey,
) -> Result<u64, ModelError> {
    match model {
        ModelSpec::IidFpp { weights } => {
            let mut words = coord_words(e.lo().coords());
            words.extend(coord_words(e.hi().coords()));
            let u = Prf::new(env.master_seed, Domain::EdgeWeight).unit_f64(&words);
            Ok(f64_to_ticks(weights.sample(u)))
        }
        ModelSpec::ColoringFpp { .. } => {
            let a = vertex_color(model, env, e.lo())?;
            let b = vertex_color(model, env, e.hi())?;
            Ok(if a == b { 0 } else { TICKS_PER_UNIT })
        }
        ModelSpec::RichardsonEnv { .. } => {
            let lambda = richardson_rate(model, env, e.direction_class())?;
            let mut words = coord_words(e.lo().coords());
            words.extend(coord_words(e.hi().coords()));
            let u = Prf::new(env.master_seed, Domain::EdgeWeight).unit_f64(&words);
            Ok(f64_to_ticks(super::WeightDist::Exponential { lambda }.sample(u)))
        }
        ModelSpec::Frog { .. } => Err(ModelError::UnsupportedVariant(
            "the frog model has no edge weights".into(),
        )),
    }
}

const NO_PRED: u8 = u8::MAX;

/// Shortest-path tree of a restricted Dijkstra run over a ball.
pub struct DijkstraTree {
    pub source: u32,
    /// Distance in ticks; `u64::MAX` marks unreached nodes.
    pub dist: Vec<u64>,
    pred_gen: Vec<u8>,
    pred_idx: Vec<u32>,
}

impl DijkstraTree {
    pub fn dist_to(&self, idx: u32) -> Option<u64> {
        let d = self.dist[idx as usize];
        (d != u64::MAX).then_some(d)
    }

    /// Node indices of the optimal path from the source to `idx`.
    pub fn path_to(&self, idx: u32) -> Vec<u32> {
        let mut path = vec![idx];
        let mut cur = idx;
        while self.pred_gen[cur as usize] != NO_PRED {
            cur = self.pred_idx[cur as usize];
            path.push(cur);
        }
        path.reverse();
        path
    }

    /// Whether the optimal path to `idx` meets the outer sphere of the ball.
    pub fn path_touches_sphere(&self, ball: &Ball, idx: u32) -> bool {
        self.path_to(idx)
            .iter()
            .any(|&i| ball.norm_at(i) == ball.radius())
    }
}

/// Dijkstra from `source` over the subgraph induced by `ball`, optionally
/// stopping once `stop_at` settles. Settle order is keyed by (distance,
/// discovery index) and predecessor ties break toward the
/// lexicographically smallest parent coordinates, so the tree is
/// deterministic regardless of heap internals.
pub fn passage_tree(
    spec: &GroupSpec,
    model: &ModelSpec,
    env: &Environment,
    ball: &Ball,
    source: &GroupElement,
    stop_at: Option<u32>,
) -> Result<DijkstraTree, ModelError> {
    let n = ball.len();
    let source_idx = ball
        .index_of(source)
        .ok_or(crate::cayley::CayleyError::NotInBall)?;
    let mut dist = vec![u64::MAX; n];
    let mut pred_gen = vec![NO_PRED; n];
    let mut pred_idx = vec![0u32; n];
    let mut settled = vec![false; n];
    let mut heap: BinaryHeap<Reverse<(u64, u32)>> = BinaryHeap::new();
    dist[source_idx as usize] = 0;
    heap.push(Reverse((0, source_idx)));
    while let Some(Reverse((d, v))) = heap.pop() {
        if settled[v as usize] {
            continue;
        }
        settled[v as usize] = true;
        if stop_at == Some(v) {
            break;
        }
        let velem = ball.element(v).clone();
        for g in 0..spec.generator_count() as u8 {
            let w = spec.multiply(spec.generator(g), &velem)?;
            let Some(widx) = ball.index_of(&w) else {
                continue; // truncated at the ball boundary
            };
            if settled[widx as usize] {
                continue;
            }
            let wt = edge_weight(model, env, &EdgeKey::from_step(spec, &velem, g)?)?;
            let nd = d.checked_add(wt).ok_or(ModelError::ValueOverflow)?;
            let slot = &mut dist[widx as usize];
            if nd < *slot {
                *slot = nd;
                pred_gen[widx as usize] = g;
                pred_idx[widx as usize] = v;
                heap.push(Reverse((nd, widx)));
            } else if nd == *slot
                && pred_gen[widx as usize] != NO_PRED
                && ball.element(v) < ball.element(pred_idx[widx as usize])
            {
                pred_gen[widx as usize] = g;
                pred_idx[widx as usize] = v;
            }
        }
    }
    Ok(DijkstraTree {
        source: source_idx,
        dist,
        pred_gen,
        pred_idx,
    })
}

/// Full shortest-path tree over the ball.
pub fn dijkstra_ball(
    spec: &GroupSpec,
    model: &ModelSpec,
    env: &Environment,
    ball: &Ball,
    source: &GroupElement,
) -> Result<DijkstraTree, ModelError> {
    passage_tree(spec, model, env, ball, source, None)
}

/// Distance of a single intra-arena query, stopping at the target.
fn dijkstra_to_target(
    spec: &GroupSpec,
    model: &ModelSpec,
    env: &Environment,
    ball: &Ball,
    source: u32,
    target: u32,
) -> Result<u64, ModelError> {
    let tree = passage_tree(
        spec,
        model,
        env,
        ball,
        ball.element(source),
        Some(target),
    )?;
    tree.dist_to(target)
        .ok_or(crate::cayley::CayleyError::NotInBall.into())
}

fn require_fpp(model: &ModelSpec) -> Result<(), ModelError> {
    if model.is_fpp() {
        Ok(())
    } else {
        Err(ModelError::UnsupportedVariant(
            "first-passage evaluation requires an FPP-type variant".into(),
        ))
    }
}

fn require_margin(margin: f64) -> Result<(), ModelError> {
    if margin >= 1.0 && margin.is_finite() {
        Ok(())
    } else {
        Err(ModelError::InvalidModel(format!(
            "margin must be >= 1, got {margin}"
        )))
    }
}

fn zero_sample(
    spec: &GroupSpec,
    model: &ModelSpec,
    env: &Environment,
    x: GroupElement,
    base: GroupElement,
) -> CocycleSample {
    let _ = spec;
    CocycleSample {
        x,
        base,
        ticks: 0,
        truncation_radius: 0,
        boundary_touched: false,
        seed: env.master_seed,
        model_id: model.params_hash(),
    }
}

/// Restricted first-passage value c_R(x) with R = ceil(margin * |x|_S):
/// Dijkstra over the ball of radius R around the identity. The value is an
/// upper bound for the unrestricted passage time and decreases toward it as
/// the margin grows; `boundary_touched` marks samples whose optimal path
/// meets the truncation sphere.
pub fn first_passage(
    model: &ModelSpec,
    env: &Environment,
    spec: &GroupSpec,
    x: &GroupElement,
    margin: f64,
    budget: &Budget,
) -> Result<CocycleSample, ModelError> {
    cocycle_shifted(model, env, spec, x, &spec.identity(), margin, budget)
}

/// Shifted cocycle c(x) after translation by `base`: the first-passage time
/// from `base` to `x * base` in the same environment, restricted to the
/// ball of radius ceil(margin * |x|_S) around `base`.
pub fn cocycle_shifted(
    model: &ModelSpec,
    env: &Environment,
    spec: &GroupSpec,
    x: &GroupElement,
    base: &GroupElement,
    margin: f64,
    budget: &Budget,
) -> Result<CocycleSample, ModelError> {
    require_fpp(model)?;
    require_margin(margin)?;
    model.validate()?;
    spec.validate_element(x)?;
    spec.validate_element(base)?;
    if *x == spec.identity() {
        return Ok(zero_sample(spec, model, env, x.clone(), base.clone()));
    }
    let norm = word_norm(spec, x, budget.max_radius, budget)?
        .ok_or(ModelError::TargetOutsideBall)?;
    let radius = (margin * norm as f64).ceil() as u32;
    let ball = Ball::grow_from(spec, base, radius, budget)?;
    cocycle_shifted_in_ball(model, env, spec, &ball, x)
}

/// Shifted cocycle evaluated in a caller-provided arena: the ball must be
/// centered at the shift base and large enough to contain the target.
/// Sharing one arena across Monte Carlo samples of the same rung avoids
/// regrowing identical balls.
pub fn cocycle_shifted_in_ball(
    model: &ModelSpec,
    env: &Environment,
    spec: &GroupSpec,
    ball: &Ball,
    x: &GroupElement,
) -> Result<CocycleSample, ModelError> {
    require_fpp(model)?;
    let base = ball.center();
    if *x == spec.identity() {
        return Ok(zero_sample(spec, model, env, x.clone(), base.clone()));
    }
    let target = spec.multiply(x, base)?;
    let t_idx = ball
        .index_of(&target)
        .ok_or(crate::cayley::CayleyError::NotInBall)?;
    let tree = passage_tree(spec, model, env, ball, base, Some(t_idx))?;
    let ticks = tree
        .dist_to(t_idx)
        .ok_or(crate::cayley::CayleyError::NotInBall)?;
    Ok(CocycleSample {
        x: x.clone(),
        base: base.clone(),
        ticks,
        truncation_radius: ball.radius(),
        boundary_touched: tree.path_touches_sphere(&ball, t_idx),
        seed: env.master_seed,
        model_id: model.params_hash(),
    })
}

/// Evaluates c(xy), c(y), and c(x) after translation by y inside one shared
/// arena, so the subadditive inequality
/// c(xy) <= c(y) + c(x) shifted-by-y holds exactly in ticks.
pub struct SubadditivityWitness {
    pub composite: u64,
    pub first_leg: u64,
    pub shifted_second_leg: u64,
}

pub fn subadditivity_witness(
    model: &ModelSpec,
    env: &Environment,
    spec: &GroupSpec,
    x: &GroupElement,
    y: &GroupElement,
    margin: f64,
    budget: &Budget,
) -> Result<SubadditivityWitness, ModelError> {
    require_fpp(model)?;
    require_margin(margin)?;
    let nx = word_norm(spec, x, budget.max_radius, budget)?
        .ok_or(ModelError::TargetOutsideBall)?;
    let ny = word_norm(spec, y, budget.max_radius, budget)?
        .ok_or(ModelError::TargetOutsideBall)?;
    let radius = (margin * (nx + ny + 1) as f64).ceil() as u32;
    let identity = spec.identity();
    let xy = spec.multiply(x, y)?;
    let ball = Ball::grow(spec, radius, budget)?;
    let from_e = dijkstra_ball(spec, model, env, &ball, &identity)?;
    let from_y = dijkstra_ball(spec, model, env, &ball, y)?;
    let idx = |g: &GroupElement| -> Result<u32, ModelError> {
        ball.index_of(g)
            .ok_or_else(|| crate::cayley::CayleyError::NotInBall.into())
    };
    let composite = from_e.dist_to(idx(&xy)?).unwrap();
    let first_leg = from_e.dist_to(idx(y)?).unwrap();
    let shifted = from_y.dist_to(idx(&xy)?).unwrap();
    Ok(SubadditivityWitness {
        composite,
        first_leg,
        shifted_second_leg: shifted,
    })
}

/// Exact geodesic-decomposition witness: extracts an optimal path for
/// c(x), splits it into generator steps z_1, ..., z_n, and re-evaluates
/// each step as a first-passage time from its shifted base inside the same
/// arena. For FPP models the step sum equals c(x) exactly.
#[derive(Debug, Clone, Serialize)]
pub struct InnernessWitness {
    pub total_ticks: u64,
    pub step_sum_ticks: u64,
    pub steps: usize,
}

use serde::Serialize;

pub fn innerness_witness(
    model: &ModelSpec,
    env: &Environment,
    spec: &GroupSpec,
    x: &GroupElement,
    margin: f64,
    budget: &Budget,
) -> Result<InnernessWitness, ModelError> {
    require_fpp(model)?;
    require_margin(margin)?;
    if spec.kind().is_nilpotent() && !spec.generators_avoid_commutator_subgroup() {
        return Err(ModelError::InvalidModel(
            "a generator lies in the commutator subgroup; the decomposition witness needs S inside the complement".into(),
        ));
    }
    if *x == spec.identity() {
        return Ok(InnernessWitness {
            total_ticks: 0,
            step_sum_ticks: 0,
            steps: 0,
        });
    }
    let norm = word_norm(spec, x, budget.max_radius, budget)?
        .ok_or(ModelError::TargetOutsideBall)?;
    let radius = (margin * norm as f64).ceil() as u32;
    let ball = Ball::grow(spec, radius, budget)?;
    let tree = dijkstra_ball(spec, model, env, &ball, &spec.identity())?;
    let t_idx = ball
        .index_of(x)
        .ok_or(crate::cayley::CayleyError::NotInBall)?;
    if tree.path_touches_sphere(&ball, t_idx) {
        return Err(ModelError::TruncationUncertain);
    }
    let total = tree.dist_to(t_idx).unwrap();
    let path = tree.path_to(t_idx);
    let mut step_sum: u64 = 0;
    for pair in path.windows(2) {
        let d = dijkstra_to_target(spec, model, env, &ball, pair[0], pair[1])?;
        step_sum = step_sum.checked_add(d).ok_or(ModelError::ValueOverflow)?;
    }
    Ok(InnernessWitness {
        total_ticks: total,
        step_sum_ticks: step_sum,
        steps: path.len() - 1,
    })
}

/// The finite-extension maximized cocycle: the maximum of shifted passage
/// times over the coset representatives, with value 0 when x projects to
/// the quotient identity.
pub fn c_double_prime(
    model: &ModelSpec,
    env: &Environment,
    spec: &GroupSpec,
    x: &GroupElement,
    margin: f64,
    budget: &Budget,
) -> Result<CocycleSample, ModelError> {
    require_fpp(model)?;
    if !spec.has_finite_extension() {
        return Err(crate::group::GroupError::UnsupportedKind(
            "the maximized cocycle is defined for the finite-extension kinds".into(),
        )
        .into());
    }
    let (proj, _) = spec.torsion_quotient(x)?;
    if proj.is_zero() {
        return Ok(zero_sample(
            spec,
            model,
            env,
            x.clone(),
            spec.identity(),
        ));
    }
    let kappa = spec.coset_count();
    let mut best: Option<CocycleSample> = None;
    let mut any_boundary = false;
    let mut max_radius = 0u32;
    for j in 0..kappa {
        let y = spec.embed_from_base(&proj, j)?;
        for i in 0..kappa {
            let z = spec.coset_representative(i)?;
            let s = cocycle_shifted(model, env, spec, &y, &z, margin, budget)?;
            any_boundary |= s.boundary_touched;
            max_radius = max_radius.max(s.truncation_radius);
            if best.as_ref().map_or(true, |b| s.ticks > b.ticks) {
                best = Some(s);
            }
        }
    }
    let best = best.expect("kappa >= 1");
    Ok(CocycleSample {
        x: x.clone(),
        base: spec.identity(),
        ticks: best.ticks,
        truncation_radius: max_radius,
        boundary_touched: any_boundary,
        seed: env.master_seed,
        model_id: model.params_hash(),
    })
}

/// Evaluates the cocycle of any model variant: restricted first passage for
/// the FPP variants, activation time for the frog model.
pub fn evaluate_cocycle(
    model: &ModelSpec,
    env: &Environment,
    spec: &GroupSpec,
    x: &GroupElement,
    margin: f64,
    budget: &Budget,
) -> Result<CocycleSample, ModelError> {
    match model {
        ModelSpec::Frog { .. } => super::frog::frog_cocycle(model, env, spec, x, margin, budget),
        _ => first_passage(model, env, spec, x, margin, budget),
    }
}
