//! Asymptotic-cone coordinates for the catalog groups: graded rescaling,
//! dilations, abelian projection, a homogeneous quasi-norm surrogate for
//! the cone metric, rescaled random balls, and Hausdorff distances.
//!
//! Cone points are stored in graded (Lie-algebra) coordinates. For the
//! Heisenberg cone the group law is the degree-2 commutator formula
//! (u,v,w)*(u',v',w') = (u+u', v+v', w+w'+(uv'-vu')/2), under which the
//! dilations (u,v,w) -> (tu, tv, t^2 w) are automorphisms. The finite
//! extension kinds share the cone of their quotient group.

use rayon::prelude::*;
use serde::Serialize;

use crate::budget::Budget;
use crate::group::{GroupElement, GroupError, GroupKind, GroupSpec};
use crate::models::fpp::edge_weight;
use crate::models::{f64_to_ticks, Environment, ModelError, ModelSpec};
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConeError {
    #[error("empty point cloud")]
    EmptyCloud,
    #[error("cone points of different kinds cannot be combined")]
    KindMismatch,
    #[error("flood exceeded its budget: the sub-threshold cluster keeps growing past {limit} elements")]
    FloodUnbounded { limit: usize },
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// A point of the asymptotic cone in graded coordinates.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum ConePoint<F: Real> {
    /// R^d, all of it in grade 1.
    Abelian(Vec<F>),
    /// Heisenberg cone: u, v in grade 1, w in grade 2.
    Heisenberg { u: F, v: F, w: F },
}

impl<F: Real> ConePoint<F> {
    pub fn origin_like(&self) -> ConePoint<F> {
        match self {
            ConePoint::Abelian(v) => ConePoint::Abelian(vec![F::zero(); v.len()]),
            ConePoint::Heisenberg { .. } => ConePoint::Heisenberg {
                u: F::zero(),
                v: F::zero(),
                w: F::zero(),
            },
        }
    }

    pub fn is_origin(&self) -> bool {
        match self {
            ConePoint::Abelian(v) => v.iter().all(|c| c.is_zero()),
            ConePoint::Heisenberg { u, v, w } => u.is_zero() && v.is_zero() && w.is_zero(),
        }
    }
}

/// Cone group product (vector addition in grade 1; degree-2 bracket term in
/// grade 2 for the Heisenberg cone).
pub fn cone_mul<F: Real>(a: &ConePoint<F>, b: &ConePoint<F>) -> Result<ConePoint<F>, ConeError> {
    match (a, b) {
        (ConePoint::Abelian(x), ConePoint::Abelian(y)) if x.len() == y.len() => Ok(
            ConePoint::Abelian(x.iter().zip(y).map(|(&p, &q)| p + q).collect()),
        ),
        (
            ConePoint::Heisenberg { u, v, w },
            ConePoint::Heisenberg {
                u: u2,
                v: v2,
                w: w2,
            },
        ) => {
            let half = F::from_f64(0.5).unwrap();
            Ok(ConePoint::Heisenberg {
                u: *u + *u2,
                v: *v + *v2,
                w: *w + *w2 + half * (*u * *v2 - *v * *u2),
            })
        }
        _ => Err(ConeError::KindMismatch),
    }
}

pub fn cone_inv<F: Real>(a: &ConePoint<F>) -> ConePoint<F> {
    match a {
        ConePoint::Abelian(x) => ConePoint::Abelian(x.iter().map(|&c| -c).collect()),
        ConePoint::Heisenberg { u, v, w } => ConePoint::Heisenberg {
            u: -*u,
            v: -*v,
            w: -*w,
        },
    }
}

/// Cone group difference b^-1 * a.
pub fn cone_diff<F: Real>(a: &ConePoint<F>, b: &ConePoint<F>) -> Result<ConePoint<F>, ConeError> {
    cone_mul(&cone_inv(b), a)
}

/// Graded dilation: grade-i coordinates scale by t^i. Exact in the graded
/// representation.
pub fn dilate<F: Real>(p: &ConePoint<F>, t: F) -> ConePoint<F> {
    match p {
        ConePoint::Abelian(v) => ConePoint::Abelian(v.iter().map(|&c| c * t).collect()),
        ConePoint::Heisenberg { u, v, w } => ConePoint::Heisenberg {
            u: *u * t,
            v: *v * t,
            w: *w * t * t,
        },
    }
}

/// Abelian projection: keeps grade 1, drops higher grades.
pub fn project_ab<F: Real>(p: &ConePoint<F>) -> Vec<F> {
    match p {
        ConePoint::Abelian(v) => v.clone(),
        ConePoint::Heisenberg { u, v, .. } => vec![*u, *v],
    }
}

/// Homogeneous quasi-norm: Euclidean in the abelian cone,
/// ((u^2+v^2)^2 + w^2)^(1/4) in the Heisenberg cone. Degree-1 homogeneous
/// under [`dilate`].
pub fn quasi_norm<F: Real>(p: &ConePoint<F>) -> F {
    match p {
        ConePoint::Abelian(v) => v.iter().map(|&c| c * c).fold(F::zero(), |a, b| a + b).sqrt(),
        ConePoint::Heisenberg { u, v, w } => {
            let g1 = *u * *u + *v * *v;
            (g1 * g1 + *w * *w).sqrt().sqrt()
        }
    }
}

/// Quasi-distance: the quasi-norm of the cone group difference.
pub fn quasi_dist<F: Real>(a: &ConePoint<F>, b: &ConePoint<F>) -> Result<F, ConeError> {
    Ok(quasi_norm(&cone_diff(a, b)?))
}

/// Per-grade coordinate deviation: the larger of the grade-1 Euclidean gap
/// and the grade-2 absolute gap of the group difference. This measures
/// coordinate convergence rates; note that for a purely grade-2 gap the
/// degree-1 quasi-norm is its square root.
pub fn graded_deviation<F: Real>(a: &ConePoint<F>, b: &ConePoint<F>) -> Result<F, ConeError> {
    let d = cone_diff(a, b)?;
    Ok(match d {
        ConePoint::Abelian(v) => v.iter().map(|&c| c * c).fold(F::zero(), |x, y| x + y).sqrt(),
        ConePoint::Heisenberg { u, v, w } => {
            let g1 = (u * u + v * v).sqrt();
            g1.max(w.abs())
        }
    })
}

fn cone_kind(kind: &GroupKind) -> &GroupKind {
    match kind {
        GroupKind::DirectProductFinite { base, .. } => cone_kind(base),
        GroupKind::DihedralOver { .. } => kind, // handled explicitly below
        other => other,
    }
}

/// Maps a group element into the cone, rescaled by t: the graded coordinate
/// scaling (grade-1 coordinates divide by t, grade-2 by t^2). For the
/// Heisenberg kind the graded coordinates of (x, y, z) are
/// (x, y, z - xy/2), so in group coordinates the map is simply
/// (x/t, y/t, z/t^2). Finite-extension kinds map through their quotient.
pub fn rescale<F: Real>(spec: &GroupSpec, x: &GroupElement, t: F) -> Result<ConePoint<F>, ConeError> {
    spec.validate_element(x)?;
    assert!(t > F::zero(), "rescale needs t > 0");
    match spec.kind() {
        GroupKind::FreeAbelian(_) => Ok(ConePoint::Abelian(
            x.coords().iter().map(|&c| F::from_coord(c) / t).collect(),
        )),
        GroupKind::Heisenberg => {
            let half = F::from_f64(0.5).unwrap();
            let (cx, cy, cz) = (
                F::from_coord(x.coords()[0]),
                F::from_coord(x.coords()[1]),
                F::from_coord(x.coords()[2]),
            );
            Ok(ConePoint::Heisenberg {
                u: cx / t,
                v: cy / t,
                w: (cz - half * cx * cy) / (t * t),
            })
        }
        GroupKind::DihedralOver { rank } => Ok(ConePoint::Abelian(
            x.coords()[..*rank].iter().map(|&c| F::from_coord(c) / t).collect(),
        )),
        GroupKind::DirectProductFinite { .. } => {
            let (proj, _) = spec.torsion_quotient(x)?;
            match cone_kind(spec.kind()) {
                GroupKind::Heisenberg => {
                    let half = F::from_f64(0.5).unwrap();
                    let (cx, cy, cz) = (
                        F::from_coord(proj.coords()[0]),
                        F::from_coord(proj.coords()[1]),
                        F::from_coord(proj.coords()[2]),
                    );
                    Ok(ConePoint::Heisenberg {
                        u: cx / t,
                        v: cy / t,
                        w: (cz - half * cx * cy) / (t * t),
                    })
                }
                _ => Ok(ConePoint::Abelian(
                    proj.coords().iter().map(|&c| F::from_coord(c) / t).collect(),
                )),
            }
        }
    }
}

/// A finite set of cone points representing one rescaled random ball (or a
/// candidate limit profile), with provenance.
#[derive(Debug, Clone, Serialize)]
pub struct ShapeCloud<F: Real> {
    pub points: Vec<ConePoint<F>>,
    /// Rescaling parameter used to produce the points.
    pub n: f64,
    pub model_id: u64,
    pub seed: u64,
}

impl<F: Real> ShapeCloud<F> {
    pub fn from_points(points: Vec<ConePoint<F>>, n: f64, model_id: u64, seed: u64) -> Self {
        ShapeCloud {
            points,
            n,
            model_id,
            seed,
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dilate(&self, t: F) -> ShapeCloud<F> {
        ShapeCloud {
            points: self.points.iter().map(|p| dilate(p, t)).collect(),
            n: self.n,
            model_id: self.model_id,
            seed: self.seed,
        }
    }

    /// Grade-1 projections of all points.
    pub fn project_ab(&self) -> Vec<Vec<F>> {
        self.points.iter().map(project_ab).collect()
    }

    /// Writes `n, coords..., seed` rows.
    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "n,coords,seed")?;
        for p in &self.points {
            let coords: Vec<String> = match p {
                ConePoint::Abelian(v) => v.iter().map(|c| format!("{c}")).collect(),
                ConePoint::Heisenberg { u, v, w } => {
                    vec![format!("{u}"), format!("{v}"), format!("{w}")]
                }
            };
            writeln!(w, "{},{},{}", self.n, coords.join(" "), self.seed)?;
        }
        Ok(())
    }
}

/// Extracts the rescaled random ball {rescale(x, n) : c(x, omega) <= n} by
/// a lazy Dijkstra flood from the identity. The flood materializes only
/// sub-threshold nodes; `margin` bounds the word radius the flood may visit
/// (a linear-growth screening bound), and exceeding it or the element
/// budget reports `FloodUnbounded` rather than silently truncating.
pub fn extract_shape<F: Real>(
    spec: &GroupSpec,
    model: &ModelSpec,
    env: &Environment,
    n: f64,
    margin: f64,
    budget: &Budget,
) -> Result<ShapeCloud<F>, ConeError> {
    use std::cmp::Reverse;
    use std::collections::BinaryHeap;
    use std::collections::HashMap;

    assert!(n >= 0.0 && margin >= 1.0);
    if !model.is_fpp() {
        return Err(ModelError::UnsupportedVariant(
            "shape extraction floods an FPP-type environment".into(),
        )
        .into());
    }
    let threshold = f64_to_ticks(n);
    // Linear-growth screen: |x|_S is at least the max-norm of the
    // abelianized coordinates divided by the largest generator step, so a
    // sub-threshold node past this bound means the cheap cluster escapes
    // linearly beyond the margin.
    let word_cap = (margin * n).ceil() as i64 + 1;
    let max_gen_ab: i64 = spec
        .generators()
        .iter()
        .map(|s| {
            spec.abelianize(s)
                .map(|v| v.iter().map(|c| c.abs()).max().unwrap_or(1))
                .unwrap_or(1)
        })
        .max()
        .unwrap_or(1)
        .max(1);
    let ab_cap = word_cap.saturating_mul(max_gen_ab);
    let escapes = |g: &GroupElement| -> Result<bool, ConeError> {
        let ab = spec.abelianize(g)?;
        Ok(ab.iter().any(|c| c.abs() > ab_cap))
    };
    let mut index: HashMap<GroupElement, u32> = HashMap::new();
    let mut elems: Vec<GroupElement> = Vec::new();
    let mut dist: Vec<u64> = Vec::new();
    let mut settled: Vec<bool> = Vec::new();
    let mut heap: BinaryHeap<Reverse<(u64, u32)>> = BinaryHeap::new();

    let identity = spec.identity();
    index.insert(identity.clone(), 0);
    elems.push(identity);
    dist.push(0);
    settled.push(false);
    heap.push(Reverse((0, 0)));

    while let Some(Reverse((d, v))) = heap.pop() {
        if settled[v as usize] || d > threshold {
            continue;
        }
        settled[v as usize] = true;
        let velem = elems[v as usize].clone();
        for g in 0..spec.generator_count() as u8 {
            let w = spec.multiply(spec.generator(g), &velem)?;
            let e = crate::cayley::EdgeKey::from_step(spec, &velem, g)
                .map_err(crate::models::ModelError::from)?;
            let wt = edge_weight(model, env, &e)?;
            let nd = d.checked_add(wt).ok_or(ModelError::ValueOverflow)?;
            if nd > threshold {
                continue;
            }
            let widx = match index.get(&w) {
                Some(&i) => i,
                None => {
                    if elems.len() >= budget.max_elements || escapes(&w)? {
                        return Err(ConeError::FloodUnbounded {
                            limit: budget.max_elements,
                        });
                    }
                    let i = elems.len() as u32;
                    index.insert(w.clone(), i);
                    elems.push(w);
                    dist.push(u64::MAX);
                    settled.push(false);
                    i
                }
            };
            if settled[widx as usize] {
                continue;
            }
            if nd < dist[widx as usize] {
                dist[widx as usize] = nd;
                heap.push(Reverse((nd, widx)));
            }
        }
    }

    let scale = F::from_f64(n.max(1.0)).unwrap();
    let rescale_t = if n > 0.0 { F::from_f64(n).unwrap() } else { scale };
    let mut points = Vec::new();
    for (i, elem) in elems.iter().enumerate() {
        if settled[i] && dist[i] <= threshold {
            points.push(rescale(spec, elem, rescale_t)?);
        }
    }
    Ok(ShapeCloud {
        points,
        n,
        model_id: model.params_hash(),
        seed: env.master_seed,
    })
}

/// Hausdorff distance between clouds under the cone quasi-distance:
/// the larger of the two directed sup-min distances. Parallelized over
/// points with an order-independent max reduction.
pub fn hausdorff<F: Real>(a: &ShapeCloud<F>, b: &ShapeCloud<F>) -> Result<F, ConeError> {
    if a.is_empty() || b.is_empty() {
        return Err(ConeError::EmptyCloud);
    }
    let d_ab = directed_hausdorff(&a.points, &b.points)?;
    let d_ba = directed_hausdorff(&b.points, &a.points)?;
    Ok(d_ab.max(d_ba))
}

fn directed_hausdorff<F: Real>(from: &[ConePoint<F>], to: &[ConePoint<F>]) -> Result<F, ConeError> {
    // Validate kind compatibility once, then reduce without Results.
    cone_diff(&from[0], &to[0])?;
    let worst = from
        .par_iter()
        .map(|p| {
            to.iter()
                .map(|q| quasi_dist(p, q).expect("kinds validated"))
                .fold(F::infinity(), |acc, d| acc.min(d))
        })
        .reduce(|| F::zero(), |x, y| x.max(y));
    Ok(worst)
}

/// Convex hull of 2-D points (monotone chain), returned counterclockwise.
pub fn convex_hull_2d<F: Real>(points: &[Vec<F>]) -> Vec<Vec<F>> {
    let mut pts: Vec<(F, F)> = points.iter().map(|p| (p[0], p[1])).collect();
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    pts.dedup();
    if pts.len() < 3 {
        return pts.into_iter().map(|(x, y)| vec![x, y]).collect();
    }
    let cross = |o: (F, F), a: (F, F), b: (F, F)| -> F {
        (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
    };
    let mut hull: Vec<(F, F)> = Vec::new();
    for &p in &pts {
        while hull.len() >= 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= F::zero()
        {
            hull.pop();
        }
        hull.push(p);
    }
    let lower_len = hull.len() + 1;
    for &p in pts.iter().rev().skip(1) {
        while hull.len() >= lower_len
            && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= F::zero()
        {
            hull.pop();
        }
        hull.push(p);
    }
    hull.pop();
    hull.into_iter().map(|(x, y)| vec![x, y]).collect()
}

/// Fills a convex 2-D region with lattice points of the given pitch,
/// returning an abelian cloud. Used to compare a polygonal unit-ball
/// candidate against a filled rescaled ball on equal footing.
pub fn fill_convex_polygon<F: Real>(vertices: &[Vec<F>], pitch: F) -> Vec<ConePoint<F>> {
    let hull = convex_hull_2d(vertices);
    if hull.is_empty() {
        return Vec::new();
    }
    let xs: Vec<F> = hull.iter().map(|p| p[0]).collect();
    let ys: Vec<F> = hull.iter().map(|p| p[1]).collect();
    let fmin = |v: &[F]| v.iter().fold(F::infinity(), |a, &b| a.min(b));
    let fmax = |v: &[F]| v.iter().fold(F::neg_infinity(), |a, &b| a.max(b));
    let (x0, x1) = (fmin(&xs), fmax(&xs));
    let (y0, y1) = (fmin(&ys), fmax(&ys));
    let inside = |x: F, y: F| -> bool {
        // Counterclockwise hull: inside iff on the left of every edge,
        // within a small tolerance so boundary lattice points count.
        let eps = F::from_f64(1e-12).unwrap();
        let m = hull.len();
        for i in 0..m {
            let a = &hull[i];
            let b = &hull[(i + 1) % m];
            let cr = (b[0] - a[0]) * (y - a[1]) - (b[1] - a[1]) * (x - a[0]);
            if cr < -eps {
                return false;
            }
        }
        true
    };
    let mut out = Vec::new();
    let mut i = (x0 / pitch).floor();
    while i * pitch <= x1 {
        let mut j = (y0 / pitch).floor();
        while j * pitch <= y1 {
            let (x, y) = (i * pitch, j * pitch);
            if inside(x, y) {
                out.push(ConePoint::Abelian(vec![x, y]));
            }
            j = j + F::one();
        }
        i = i + F::one();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::prf::SplitStream;
    use crate::models::WeightDist;

    type P = ConePoint<f64>;

    fn budget() -> Budget {
        Budget::from_mb(256)
    }

    #[test]
    fn rescale_examples() {
        let za = GroupSpec::free_abelian(2);
        let p = rescale::<f64>(&za, &GroupElement::free_abelian(&[6, -4]), 2.0).unwrap();
        assert_eq!(p, P::Abelian(vec![3.0, -2.0]));
        let h = GroupSpec::heisenberg();
        assert!(rescale::<f64>(&h, &h.identity(), 5.0).unwrap().is_origin());
    }

    #[test]
    fn rescaled_powers_approach_the_graded_limit() {
        // (1,1,0)^n rescaled by n tends to the point with grade-1 part
        // (1,1); in group coordinates the grade-2 slot tends to 1/2.
        let h = GroupSpec::heisenberg();
        let g = GroupElement::heisenberg(1, 1, 0);
        let p = rescale::<f64>(&h, &h.power(&g, 64).unwrap(), 64.0).unwrap();
        let ConePoint::Heisenberg { u, v, w } = p else {
            panic!()
        };
        assert_eq!((u, v), (1.0, 1.0));
        // group-coordinate grade-2 slot = w + uv/2
        assert!((w + u * v / 2.0 - 0.5).abs() < 0.01);
    }

    #[test]
    fn rescale_power_closed_form() {
        // rescale(x^n, n) in graded coordinates is
        // (x, y, (z - xy/2)/n), exactly the closed form of the graded
        // scaling applied to the power formula.
        let h = GroupSpec::heisenberg();
        let mut stream = SplitStream::new(3, 0);
        for _ in 0..50 {
            let x = stream.next_i64_in(-5, 5);
            let y = stream.next_i64_in(-5, 5);
            let z = stream.next_i64_in(-5, 5);
            let g = GroupElement::heisenberg(x, y, z);
            for n in [1i64, 2, 8, 32, 64] {
                let p = rescale::<f64>(&h, &h.power(&g, n).unwrap(), n as f64).unwrap();
                let ConePoint::Heisenberg { u, v, w } = p else {
                    panic!()
                };
                let expect_w = (z as f64 - (x * y) as f64 / 2.0) / n as f64;
                assert!((u - x as f64).abs() < 1e-12);
                assert!((v - y as f64).abs() < 1e-12);
                let scale = expect_w.abs().max(1.0);
                assert!((w - expect_w).abs() / scale < 1e-12);
            }
        }
    }

    #[test]
    fn graded_limit_rate_is_one_over_n() {
        let h = GroupSpec::heisenberg();
        let g = GroupElement::heisenberg(2, 3, 1);
        let limit = rescale::<f64>(&h, &g, 1.0).map(|p| match p {
            ConePoint::Heisenberg { u, v, .. } => ConePoint::Heisenberg { u, v, w: 0.0 },
            other => other,
        });
        let limit = limit.unwrap();
        let mut prev = f64::INFINITY;
        for n in [8i64, 16, 32, 64] {
            let p = rescale::<f64>(&h, &h.power(&g, n).unwrap(), n as f64).unwrap();
            let dev = graded_deviation(&p, &limit).unwrap();
            let expected = (1.0f64 - 2.0 * 3.0 / 2.0).abs() / n as f64;
            assert!((dev - expected).abs() < 1e-12);
            assert!(dev < prev);
            prev = dev;
        }
    }

    #[test]
    fn dilate_examples_and_homogeneity() {
        let p = P::Heisenberg {
            u: 1.0,
            v: 2.0,
            w: 3.0,
        };
        assert_eq!(
            dilate(&p, 2.0),
            P::Heisenberg {
                u: 2.0,
                v: 4.0,
                w: 12.0
            }
        );
        assert_eq!(dilate(&p, 1.0), p);
        assert!(dilate(&p.origin_like(), 7.0).is_origin());
        // Degree-1 homogeneity of the quasi-norm, exact for dyadic t.
        let mut stream = SplitStream::new(5, 0);
        for _ in 0..100 {
            let q = P::Heisenberg {
                u: stream.next_f64() * 4.0 - 2.0,
                v: stream.next_f64() * 4.0 - 2.0,
                w: stream.next_f64() * 4.0 - 2.0,
            };
            for t in [2.0f64, 4.0, 0.5] {
                assert_eq!(quasi_norm(&dilate(&q, t)), t * quasi_norm(&q));
            }
            let t = 0.1 + stream.next_f64() * 3.0;
            let lhs = quasi_norm(&dilate(&q, t));
            let rhs = t * quasi_norm(&q);
            assert!((lhs - rhs).abs() <= 1e-12 * rhs.max(1.0));
        }
    }

    #[test]
    fn dilation_compatibility_of_rescale() {
        // rescale(x, st) = dilate(rescale(x, t), 1/s), exactly in the
        // graded representation for dyadic factors.
        let h = GroupSpec::heisenberg();
        let x = GroupElement::heisenberg(5, -3, 7);
        let a = rescale::<f64>(&h, &x, 8.0).unwrap();
        let b = dilate(&rescale::<f64>(&h, &x, 4.0).unwrap(), 0.5);
        assert_eq!(a, b);
    }

    #[test]
    fn projection_examples() {
        let p = P::Heisenberg {
            u: 1.5,
            v: -2.0,
            w: 9.0,
        };
        assert_eq!(project_ab(&p), vec![1.5, -2.0]);
        assert!(project_ab(&p.origin_like()).iter().all(|&c| c == 0.0));
        let t = 4.0;
        let proj_dilated = project_ab(&dilate(&p, t));
        let scaled_proj: Vec<f64> = project_ab(&p).iter().map(|&c| c * t).collect();
        assert_eq!(proj_dilated, scaled_proj);
    }

    #[test]
    fn quasi_norm_examples() {
        assert_eq!(
            quasi_norm(&P::Heisenberg {
                u: 0.0,
                v: 0.0,
                w: 1.0
            }),
            1.0
        );
        assert_eq!(quasi_norm(&P::Abelian(vec![3.0, 4.0])), 5.0);
        assert_eq!(quasi_norm(&P::Abelian(vec![0.0, 0.0])), 0.0);
    }

    #[test]
    fn hausdorff_basics() {
        let a = ShapeCloud::from_points(vec![P::Abelian(vec![0.0])], 1.0, 0, 0);
        let b = ShapeCloud::from_points(vec![P::Abelian(vec![1.0])], 1.0, 0, 0);
        assert_eq!(hausdorff(&a, &a).unwrap(), 0.0);
        assert_eq!(hausdorff(&a, &b).unwrap(), 1.0);
        let empty: ShapeCloud<f64> = ShapeCloud::from_points(vec![], 1.0, 0, 0);
        assert_eq!(hausdorff(&a, &empty).unwrap_err(), ConeError::EmptyCloud);
    }

    #[test]
    fn hausdorff_refinement_monotonicity() {
        let mut stream = SplitStream::new(9, 0);
        let rand_cloud = |stream: &mut SplitStream, k: usize| {
            ShapeCloud::from_points(
                (0..k)
                    .map(|_| {
                        P::Abelian(vec![stream.next_f64() * 2.0 - 1.0, stream.next_f64() * 2.0 - 1.0])
                    })
                    .collect(),
                1.0,
                0,
                0,
            )
        };
        for _ in 0..20 {
            let a = rand_cloud(&mut stream, 12);
            let b = rand_cloud(&mut stream, 9);
            let mut union_points = a.points.clone();
            union_points.extend(b.points.clone());
            let union = ShapeCloud::from_points(union_points, 1.0, 0, 0);
            assert!(hausdorff(&a, &union).unwrap() <= hausdorff(&a, &b).unwrap() + 1e-15);
        }
    }

    #[test]
    fn hausdorff_dilation_homogeneity_exact_for_dyadic() {
        let mut stream = SplitStream::new(13, 0);
        let mk = |stream: &mut SplitStream, k: usize| {
            ShapeCloud::from_points(
                (0..k)
                    .map(|_| P::Heisenberg {
                        u: stream.next_f64() - 0.5,
                        v: stream.next_f64() - 0.5,
                        w: stream.next_f64() - 0.5,
                    })
                    .collect(),
                1.0,
                0,
                0,
            )
        };
        let a = mk(&mut stream, 15);
        let b = mk(&mut stream, 11);
        let h = hausdorff(&a, &b).unwrap();
        for t in [2.0f64, 4.0, 0.5] {
            assert_eq!(hausdorff(&a.dilate(t), &b.dilate(t)).unwrap(), t * h);
        }
    }

    #[test]
    fn unit_weight_shape_is_the_rescaled_word_ball() {
        let spec = GroupSpec::free_abelian(2);
        let model = ModelSpec::IidFpp {
            weights: WeightDist::Constant(1.0),
        };
        let env = Environment::new(4);
        let cloud: ShapeCloud<f64> =
            extract_shape(&spec, &model, &env, 10.0, 2.0, &budget()).unwrap();
        // |{|v|_1 <= 10}| = 221
        assert_eq!(cloud.len(), 221);
        // Compare against a fine sample of the l1 unit ball.
        let mut ideal = Vec::new();
        let pitch = 0.02;
        let steps = (1.0 / pitch) as i64;
        for i in -steps..=steps {
            for j in -steps..=steps {
                let (x, y) = (i as f64 * pitch, j as f64 * pitch);
                if x.abs() + y.abs() <= 1.0 {
                    ideal.push(P::Abelian(vec![x, y]));
                }
            }
        }
        let ideal = ShapeCloud::from_points(ideal, 10.0, 0, 0);
        let d = hausdorff(&cloud, &ideal).unwrap();
        assert!(d <= 0.1, "hausdorff {d}");
    }

    #[test]
    fn shape_at_zero_is_the_origin() {
        let spec = GroupSpec::free_abelian(2);
        let model = ModelSpec::IidFpp {
            weights: WeightDist::Constant(1.0),
        };
        let env = Environment::new(4);
        let cloud: ShapeCloud<f64> = extract_shape(&spec, &model, &env, 0.0, 2.0, &budget()).unwrap();
        assert_eq!(cloud.len(), 1);
        assert!(cloud.points[0].is_origin());
    }

    #[test]
    fn coloring_shape_contains_the_word_ball() {
        let spec = GroupSpec::free_abelian(2);
        let model = ModelSpec::ColoringFpp {
            palette: vec![0.2; 5],
        };
        let env = Environment::new(8);
        let n = 30.0;
        let cloud: ShapeCloud<f64> = extract_shape(&spec, &model, &env, n, 2.0, &budget()).unwrap();
        let ball = crate::cayley::Ball::grow(&spec, 30, &budget()).unwrap();
        // Every rescaled word-ball point appears in the cloud.
        use std::collections::HashSet;
        let have: HashSet<(i64, i64)> = cloud
            .points
            .iter()
            .map(|p| match p {
                P::Abelian(v) => ((v[0] * n).round() as i64, (v[1] * n).round() as i64),
                _ => unreachable!(),
            })
            .collect();
        for (elem, _) in ball.iter() {
            let key = (elem.coords()[0], elem.coords()[1]);
            assert!(have.contains(&key), "missing {key:?}");
        }
    }

    #[test]
    fn flood_budget_is_reported() {
        let spec = GroupSpec::free_abelian(2);
        let model = ModelSpec::ColoringFpp { palette: vec![1.0] };
        let env = Environment::new(1);
        // Single color: every edge is free, the zero cluster is the whole
        // group, and the flood must refuse to run away.
        let tiny = Budget::new(500, 100);
        let out: Result<ShapeCloud<f64>, _> = extract_shape(&spec, &model, &env, 1.0, 2.0, &tiny);
        assert!(matches!(out, Err(ConeError::FloodUnbounded { .. })));
    }

    #[test]
    fn polygon_fill_covers_a_square() {
        let verts = vec![
            vec![1.0, 1.0],
            vec![-1.0, 1.0],
            vec![-1.0, -1.0],
            vec![1.0, -1.0],
        ];
        let pts = fill_convex_polygon(&verts, 0.5);
        assert_eq!(pts.len(), 25);
    }
}
