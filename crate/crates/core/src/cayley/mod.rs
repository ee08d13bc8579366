//! Word-metric machinery on Cayley graphs: breadth-first balls with
//! predecessor links, exact word norms by bidirectional search, abelianized
//! norms, and geodesic extraction.

use std::collections::HashMap;

use crate::budget::Budget;
use crate::group::{GroupElement, GroupError, GroupSpec};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CayleyError {
    #[error("memory budget exceeded: ball would grow past {limit} elements")]
    MemoryBudgetExceeded { limit: usize },
    #[error("element is not contained in the ball")]
    NotInBall,
    #[error("vertices are not adjacent in the Cayley graph")]
    NotAdjacent,
    #[error(transparent)]
    Group(#[from] GroupError),
}

const NO_PRED: u8 = u8::MAX;

/// A metric ball in the Cayley graph, grown by breadth-first search from a
/// center. Storage is index-based: a hash map from packed coordinates to a
/// dense index, one predecessor byte per node, and per-radius offsets.
#[derive(Debug, Clone)]
pub struct Ball {
    center: GroupElement,
    radius: u32,
    index: HashMap<GroupElement, u32>,
    elements: Vec<GroupElement>,
    norms: Vec<u32>,
    preds: Vec<u8>,
    sphere_offsets: Vec<u32>,
}

impl Ball {
    /// Grows the ball of the given radius around the identity.
    pub fn grow(spec: &GroupSpec, radius: u32, budget: &Budget) -> Result<Ball, CayleyError> {
        Ball::grow_from(spec, &spec.identity(), radius, budget)
    }

    /// Grows the ball of the given radius around an arbitrary center.
    /// Frontier order is fixed (discovery order, generators in set order),
    /// so predecessor links are deterministic.
    pub fn grow_from(
        spec: &GroupSpec,
        center: &GroupElement,
        radius: u32,
        budget: &Budget,
    ) -> Result<Ball, CayleyError> {
        spec.validate_element(center)?;
        let mut ball = Ball {
            center: center.clone(),
            radius,
            index: HashMap::new(),
            elements: Vec::new(),
            norms: Vec::new(),
            preds: Vec::new(),
            sphere_offsets: vec![0],
        };
        ball.push(center.clone(), 0, NO_PRED, budget)?;
        let mut level_start = 0usize;
        for depth in 1..=radius {
            let level_end = ball.elements.len();
            ball.sphere_offsets.push(level_end as u32);
            if level_start == level_end {
                break;
            }
            for i in level_start..level_end {
                let v = ball.elements[i].clone();
                for g in 0..spec.generator_count() as u8 {
                    let w = spec.multiply(spec.generator(g), &v)?;
                    if !ball.index.contains_key(&w) {
                        ball.push(w, depth, g, budget)?;
                    }
                }
            }
            level_start = level_end;
        }
        ball.sphere_offsets.push(ball.elements.len() as u32);
        while ball.sphere_offsets.len() < radius as usize + 2 {
            let last = *ball.sphere_offsets.last().unwrap();
            ball.sphere_offsets.push(last);
        }
        Ok(ball)
    }

    fn push(
        &mut self,
        elem: GroupElement,
        norm: u32,
        pred: u8,
        budget: &Budget,
    ) -> Result<(), CayleyError> {
        if self.elements.len() >= budget.max_elements {
            return Err(CayleyError::MemoryBudgetExceeded {
                limit: budget.max_elements,
            });
        }
        let idx = self.elements.len() as u32;
        self.index.insert(elem.clone(), idx);
        self.elements.push(elem);
        self.norms.push(norm);
        self.preds.push(pred);
        Ok(())
    }

    pub fn center(&self) -> &GroupElement {
        &self.center
    }

    pub fn radius(&self) -> u32 {
        self.radius
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn contains(&self, g: &GroupElement) -> bool {
        self.index.contains_key(g)
    }

    pub fn index_of(&self, g: &GroupElement) -> Option<u32> {
        self.index.get(g).copied()
    }

    pub fn element(&self, idx: u32) -> &GroupElement {
        &self.elements[idx as usize]
    }

    /// Word distance from the center, if the element lies in the ball.
    pub fn norm_of(&self, g: &GroupElement) -> Option<u32> {
        self.index_of(g).map(|i| self.norms[i as usize])
    }

    pub fn norm_at(&self, idx: u32) -> u32 {
        self.norms[idx as usize]
    }

    /// Index range of the sphere of radius `r` within the dense node order.
    pub fn sphere_range(&self, r: u32) -> std::ops::Range<usize> {
        let lo = self.sphere_offsets[r as usize] as usize;
        let hi = self.sphere_offsets[r as usize + 1] as usize;
        lo..hi
    }

    pub fn sphere_len(&self, r: u32) -> usize {
        let range = self.sphere_range(r);
        range.end - range.start
    }

    pub fn iter(&self) -> impl Iterator<Item = (&GroupElement, u32)> {
        self.elements.iter().zip(self.norms.iter().copied())
    }

    /// Geodesic word for `x`: generator indices whose in-order product is
    /// `x * center^-1` applied to the center, with length equal to the word
    /// norm. Extracted by walking predecessor links back to the center.
    pub fn geodesic(&self, spec: &GroupSpec, x: &GroupElement) -> Result<Vec<u8>, CayleyError> {
        let mut idx = self.index_of(x).ok_or(CayleyError::NotInBall)?;
        let mut word = Vec::with_capacity(self.norms[idx as usize] as usize);
        while self.preds[idx as usize] != NO_PRED {
            let g = self.preds[idx as usize];
            word.push(g);
            let inv = spec.generator(spec.inverse_generator_index(g));
            let parent = spec.multiply(inv, &self.elements[idx as usize])?;
            idx = self.index_of(&parent).ok_or(CayleyError::NotInBall)?;
        }
        Ok(word)
    }

    /// Writes the debugging dump: `kind, coords..., word_norm` per row.
    pub fn write_csv<W: std::io::Write>(&self, spec: &GroupSpec, mut w: W) -> std::io::Result<()> {
        writeln!(w, "kind,coords,word_norm")?;
        for (elem, norm) in self.iter() {
            let coords: Vec<String> = elem.coords().iter().map(|c| c.to_string()).collect();
            writeln!(w, "{},{},{}", spec.name(), coords.join(" "), norm)?;
        }
        Ok(())
    }
}

/// Multiplies a geodesic word back into a group element (left-to-right
/// product applied to the base).
pub fn replay_word(
    spec: &GroupSpec,
    word: &[u8],
    base: &GroupElement,
) -> Result<GroupElement, CayleyError> {
    let mut acc = base.clone();
    for &g in word.iter().rev() {
        acc = spec.multiply(spec.generator(g), &acc)?;
    }
    Ok(acc)
}

/// Exact word norm by bidirectional breadth-first search, or `None` when the
/// norm exceeds `cap`.
pub fn word_norm(
    spec: &GroupSpec,
    x: &GroupElement,
    cap: u32,
    budget: &Budget,
) -> Result<Option<u32>, CayleyError> {
    spec.validate_element(x)?;
    let identity = spec.identity();
    if *x == identity {
        return Ok(Some(0));
    }
    let mut side_a = SearchSide::new(identity);
    let mut side_b = SearchSide::new(x.clone());
    let mut best: Option<u32> = None;
    loop {
        if let Some(b) = best {
            if b <= side_a.depth + side_b.depth {
                return Ok(Some(b));
            }
        }
        if side_a.depth + side_b.depth >= cap && best.is_none() {
            return Ok(None);
        }
        // Expand the smaller frontier one full level.
        let (grow, other) = if side_a.frontier.len() <= side_b.frontier.len() {
            (&mut side_a, &side_b)
        } else {
            (&mut side_b, &side_a)
        };
        if grow.frontier.is_empty() {
            return Ok(best);
        }
        let mut next = Vec::new();
        let depth = grow.depth + 1;
        for v in std::mem::take(&mut grow.frontier) {
            for g in 0..spec.generator_count() as u8 {
                let w = spec.multiply(spec.generator(g), &v)?;
                if grow.dist.contains_key(&w) {
                    continue;
                }
                if grow.dist.len() + other.dist.len() >= budget.max_elements {
                    return Err(CayleyError::MemoryBudgetExceeded {
                        limit: budget.max_elements,
                    });
                }
                grow.dist.insert(w.clone(), depth);
                if let Some(&d_other) = other.dist.get(&w) {
                    let total = depth + d_other;
                    if best.map_or(true, |b| total < b) {
                        best = Some(total);
                    }
                }
                next.push(w);
            }
        }
        grow.frontier = next;
        grow.depth = depth;
    }
}

struct SearchSide {
    dist: HashMap<GroupElement, u32>,
    frontier: Vec<GroupElement>,
    depth: u32,
}

impl SearchSide {
    fn new(origin: GroupElement) -> Self {
        let mut dist = HashMap::new();
        dist.insert(origin.clone(), 0);
        SearchSide {
            dist,
            frontier: vec![origin],
            depth: 0,
        }
    }
}

/// Word distance between two vertices, d_S(x, y) = |y x^-1|_S.
pub fn word_distance(
    spec: &GroupSpec,
    x: &GroupElement,
    y: &GroupElement,
    cap: u32,
    budget: &Budget,
) -> Result<Option<u32>, CayleyError> {
    let diff = spec.multiply(y, &spec.inverse(x)?)?;
    word_norm(spec, &diff, cap, budget)
}

/// The abelianized Cayley graph of a nilpotent-kind spec: the free abelian
/// group on the abelianized dimension, generated by the nonzero projections
/// of the original generators.
pub fn abelianized_spec(spec: &GroupSpec) -> Result<GroupSpec, CayleyError> {
    if !spec.kind().is_nilpotent() {
        return Err(GroupError::UnsupportedKind(
            "abelianized norm is defined for the nilpotent kinds".into(),
        )
        .into());
    }
    let dim = spec.ab_dim();
    let mut gens: Vec<GroupElement> = Vec::new();
    for s in spec.generators() {
        let p = GroupElement::free_abelian(&spec.abelianize(s)?);
        if !p.is_zero() && !gens.contains(&p) {
            gens.push(p);
        }
    }
    Ok(GroupSpec::new(crate::group::GroupKind::FreeAbelian(dim), gens)?)
}

/// Abelianized word norm: the word norm of `abelianize(x)` in the
/// abelianized Cayley graph, which realizes the infimum of word norms over
/// the commutator coset.
pub fn ab_norm(spec: &GroupSpec, x: &GroupElement, budget: &Budget) -> Result<u32, CayleyError> {
    let ab = abelianized_spec(spec)?;
    let target = GroupElement::free_abelian(&spec.abelianize(x)?);
    match word_norm(&ab, &target, budget.max_radius, budget)? {
        Some(n) => Ok(n),
        None => Err(CayleyError::MemoryBudgetExceeded {
            limit: budget.max_elements,
        }),
    }
}

/// An unordered Cayley edge {x, sx} in canonical form, tagged with the
/// direction class of {s, s^-1}.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct EdgeKey {
    lo: GroupElement,
    hi: GroupElement,
    direction_class: u8,
}

impl EdgeKey {
    /// Builds the canonical key for the edge between `a` and `b`; fails if
    /// the two vertices are not adjacent.
    pub fn new(spec: &GroupSpec, a: &GroupElement, b: &GroupElement) -> Result<EdgeKey, CayleyError> {
        let s = spec.multiply(b, &spec.inverse(a)?)?;
        let gen = spec.generator_index(&s).ok_or(CayleyError::NotAdjacent)?;
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        Ok(EdgeKey {
            lo: lo.clone(),
            hi: hi.clone(),
            direction_class: spec.class_of_generator(gen),
        })
    }

    /// Key for the edge from `v` along generator `g` (endpoint s_g * v).
    pub fn from_step(spec: &GroupSpec, v: &GroupElement, g: u8) -> Result<EdgeKey, CayleyError> {
        let w = spec.multiply(spec.generator(g), v)?;
        let (lo, hi) = if *v <= w {
            (v.clone(), w)
        } else {
            (w, v.clone())
        };
        Ok(EdgeKey {
            lo,
            hi,
            direction_class: spec.class_of_generator(g),
        })
    }

    pub fn lo(&self) -> &GroupElement {
        &self.lo
    }

    pub fn hi(&self) -> &GroupElement {
        &self.hi
    }

    pub fn direction_class(&self) -> u8 {
        self.direction_class
    }
}
