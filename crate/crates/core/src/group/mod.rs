//! Exact arithmetic for a fixed catalog of finitely generated groups of
//! polynomial growth, together with abelianization and torsion-quotient maps.
//!
//! The catalog is closed: free abelian groups, the discrete Heisenberg
//! group, direct products of those with a finite group given by a
//! multiplication table, and generalized dihedral groups over a free
//! abelian base. Coordinates are exact signed integers with checked
//! arithmetic; an overflow is an error, never a silent wrap.

mod table;

pub use table::FiniteGroupTable;

use serde::Serialize;
use smallvec::SmallVec;
use std::collections::HashMap;
use std::fmt;

/// Packed coordinate storage; four inline slots cover every catalog kind
/// used at desk scale (Heisenberg plus a finite index, dihedral over Z^3).
pub type Coords = SmallVec<[i64; 4]>;

/// Image of an element in the abelianized coordinates.
pub type AbelianVector = Vec<i64>;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GroupError {
    #[error("integer overflow in exact group arithmetic")]
    Overflow,
    #[error("element has {got} coordinates, expected {expected} for this group kind")]
    ShapeMismatch { expected: usize, got: usize },
    #[error("coordinate out of range: {0}")]
    CoordOutOfRange(String),
    #[error("operation is not supported for this group kind: {0}")]
    UnsupportedKind(String),
    #[error("invalid finite group table: {0}")]
    InvalidTable(String),
    #[error("invalid generating set: {0}")]
    InvalidGenerators(String),
}

/// A group element as an exact integer coordinate tuple. The shape of the
/// tuple is interpreted by the owning [`GroupSpec`].
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct GroupElement {
    coords: Coords,
}

impl GroupElement {
    pub fn new(coords: impl Into<Coords>) -> Self {
        GroupElement {
            coords: coords.into(),
        }
    }

    pub fn heisenberg(x: i64, y: i64, z: i64) -> Self {
        GroupElement::new([x, y, z].as_slice())
    }

    pub fn free_abelian(v: &[i64]) -> Self {
        GroupElement::new(v)
    }

    /// Element of a direct product with a finite factor.
    pub fn with_finite_index(base: &GroupElement, idx: usize) -> Self {
        let mut c = base.coords.clone();
        c.push(idx as i64);
        GroupElement { coords: c }
    }

    /// Element of a dihedral group: base vector plus reflection bit.
    pub fn dihedral(base: &[i64], r: i64) -> Self {
        let mut c: Coords = base.into();
        c.push(r);
        GroupElement { coords: c }
    }

    pub fn coords(&self) -> &[i64] {
        &self.coords
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|&c| c == 0)
    }
}

impl fmt::Debug for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.coords.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

/// Which catalog group a [`GroupSpec`] describes.
#[derive(Debug, Clone, Serialize)]
pub enum GroupKind {
    /// Z^d with componentwise addition.
    FreeAbelian(usize),
    /// The discrete Heisenberg group H_3(Z) in (x, y, z) coordinates.
    Heisenberg,
    /// base x M for a nilpotent catalog base and a finite group M.
    DirectProductFinite {
        base: Box<GroupKind>,
        table: FiniteGroupTable,
    },
    /// Z^d semidirect Z_2, the generalized dihedral group Dih(Z^d).
    DihedralOver { rank: usize },
}

impl GroupKind {
    /// Number of integer coordinates of one element.
    pub fn coord_len(&self) -> usize {
        match self {
            GroupKind::FreeAbelian(d) => *d,
            GroupKind::Heisenberg => 3,
            GroupKind::DirectProductFinite { base, .. } => base.coord_len() + 1,
            GroupKind::DihedralOver { rank } => rank + 1,
        }
    }

    /// Dimension of the abelianized coordinates exposed by `abelianize`.
    pub fn ab_dim(&self) -> usize {
        match self {
            GroupKind::FreeAbelian(d) => *d,
            GroupKind::Heisenberg => 2,
            GroupKind::DirectProductFinite { base, .. } => base.ab_dim(),
            GroupKind::DihedralOver { rank } => *rank,
        }
    }

    /// Polynomial growth degree D of the Cayley graph.
    pub fn growth_degree(&self) -> u32 {
        match self {
            GroupKind::FreeAbelian(d) => *d as u32,
            GroupKind::Heisenberg => 4,
            GroupKind::DirectProductFinite { base, .. } => base.growth_degree(),
            GroupKind::DihedralOver { rank } => *rank as u32,
        }
    }

    pub fn is_nilpotent(&self) -> bool {
        matches!(self, GroupKind::FreeAbelian(_) | GroupKind::Heisenberg)
    }

    fn name(&self) -> String {
        match self {
            GroupKind::FreeAbelian(d) => format!("free-abelian({d})"),
            GroupKind::Heisenberg => "heisenberg".into(),
            GroupKind::DirectProductFinite { base, table } => {
                format!("{} x finite({})", base.name(), table.order())
            }
            GroupKind::DihedralOver { rank } => format!("dihedral(Z^{rank})"),
        }
    }
}

fn add(a: i64, b: i64) -> Result<i64, GroupError> {
    a.checked_add(b).ok_or(GroupError::Overflow)
}

fn mul(a: i64, b: i64) -> Result<i64, GroupError> {
    a.checked_mul(b).ok_or(GroupError::Overflow)
}

fn neg(a: i64) -> Result<i64, GroupError> {
    a.checked_neg().ok_or(GroupError::Overflow)
}

fn narrow(v: i128) -> Result<i64, GroupError> {
    i64::try_from(v).map_err(|_| GroupError::Overflow)
}

/// A catalog group together with a fixed finite symmetric generating set.
#[derive(Debug, Clone)]
pub struct GroupSpec {
    kind: GroupKind,
    generators: Vec<GroupElement>,
    /// Index of s^-1 in the generating set, per generator.
    inverse_index: Vec<u8>,
    /// Direction class of each generator: s and s^-1 share one class.
    class_of: Vec<u8>,
    class_count: usize,
    gen_lookup: HashMap<GroupElement, u8>,
}

impl GroupSpec {
    /// Builds a spec after validating the generating set: symmetric, free of
    /// the identity, and shape-compatible with the kind.
    pub fn new(kind: GroupKind, generators: Vec<GroupElement>) -> Result<Self, GroupError> {
        if let GroupKind::DirectProductFinite { base, .. } = &kind {
            if !base.is_nilpotent() {
                return Err(GroupError::UnsupportedKind(
                    "direct-product base must be free abelian or Heisenberg".into(),
                ));
            }
        }
        if generators.is_empty() {
            return Err(GroupError::InvalidGenerators("empty generating set".into()));
        }
        if generators.len() > u8::MAX as usize {
            return Err(GroupError::InvalidGenerators(
                "more than 255 generators are not supported".into(),
            ));
        }
        let mut spec = GroupSpec {
            kind,
            generators,
            inverse_index: Vec::new(),
            class_of: Vec::new(),
            class_count: 0,
            gen_lookup: HashMap::new(),
        };
        let identity = spec.identity();
        let mut seen: HashMap<GroupElement, u8> = HashMap::new();
        for (i, g) in spec.generators.iter().enumerate() {
            spec.validate_element(g)?;
            if *g == identity {
                return Err(GroupError::InvalidGenerators(
                    "the identity may not be a generator".into(),
                ));
            }
            if seen.insert(g.clone(), i as u8).is_some() {
                return Err(GroupError::InvalidGenerators(format!(
                    "duplicate generator {g:?}"
                )));
            }
        }
        let mut inverse_index = vec![0u8; spec.generators.len()];
        for (i, g) in spec.generators.iter().enumerate() {
            let inv = spec.inverse(g)?;
            match seen.get(&inv) {
                Some(&j) => inverse_index[i] = j,
                None => {
                    return Err(GroupError::InvalidGenerators(format!(
                        "generating set is not symmetric: inverse of {g:?} is missing"
                    )))
                }
            }
        }
        // Assign {s, s^-1} classes in first-appearance order.
        let mut class_of = vec![u8::MAX; spec.generators.len()];
        let mut next = 0u8;
        for i in 0..spec.generators.len() {
            if class_of[i] == u8::MAX {
                class_of[i] = next;
                class_of[inverse_index[i] as usize] = next;
                next += 1;
            }
        }
        spec.inverse_index = inverse_index;
        spec.class_count = next as usize;
        spec.class_of = class_of;
        spec.gen_lookup = seen;
        Ok(spec)
    }

    /// Z^d with generators +-e_i.
    pub fn free_abelian(d: usize) -> Self {
        let mut gens = Vec::new();
        for i in 0..d {
            for sign in [1i64, -1] {
                let mut v = vec![0i64; d];
                v[i] = sign;
                gens.push(GroupElement::free_abelian(&v));
            }
        }
        GroupSpec::new(GroupKind::FreeAbelian(d), gens).expect("valid catalog spec")
    }

    /// H_3(Z) with S = {X, X^-1, Y, Y^-1}.
    pub fn heisenberg() -> Self {
        let gens = vec![
            GroupElement::heisenberg(1, 0, 0),
            GroupElement::heisenberg(-1, 0, 0),
            GroupElement::heisenberg(0, 1, 0),
            GroupElement::heisenberg(0, -1, 0),
        ];
        GroupSpec::new(GroupKind::Heisenberg, gens).expect("valid catalog spec")
    }

    /// base x M with generators S_base x M (every finite index appears).
    pub fn direct_product_finite(base: GroupSpec, table: FiniteGroupTable) -> Result<Self, GroupError> {
        let mut gens = Vec::new();
        for s in base.generators() {
            for m in 0..table.order() {
                gens.push(GroupElement::with_finite_index(s, m));
            }
        }
        GroupSpec::new(
            GroupKind::DirectProductFinite {
                base: Box::new(base.kind.clone()),
                table,
            },
            gens,
        )
    }

    /// Dih(Z^d) with generators (+-e_i, 0) and the reflection (0, 1).
    pub fn dihedral_over(rank: usize) -> Self {
        let mut gens = Vec::new();
        for i in 0..rank {
            for sign in [1i64, -1] {
                let mut v = vec![0i64; rank];
                v[i] = sign;
                gens.push(GroupElement::dihedral(&v, 0));
            }
        }
        gens.push(GroupElement::dihedral(&vec![0i64; rank], 1));
        GroupSpec::new(GroupKind::DihedralOver { rank }, gens).expect("valid catalog spec")
    }

    pub fn kind(&self) -> &GroupKind {
        &self.kind
    }

    pub fn name(&self) -> String {
        self.kind.name()
    }

    pub fn generators(&self) -> &[GroupElement] {
        &self.generators
    }

    pub fn generator(&self, idx: u8) -> &GroupElement {
        &self.generators[idx as usize]
    }

    pub fn generator_count(&self) -> usize {
        self.generators.len()
    }

    pub fn inverse_generator_index(&self, idx: u8) -> u8 {
        self.inverse_index[idx as usize]
    }

    /// Direction class ({s, s^-1} pair) of a generator.
    pub fn class_of_generator(&self, idx: u8) -> u8 {
        self.class_of[idx as usize]
    }

    pub fn direction_class_count(&self) -> usize {
        self.class_count
    }

    /// Index of `g` in the generating set, if it is a generator.
    pub fn generator_index(&self, g: &GroupElement) -> Option<u8> {
        self.gen_lookup.get(g).copied()
    }

    pub fn identity(&self) -> GroupElement {
        GroupElement::new(vec![0i64; self.kind.coord_len()])
    }

    pub fn growth_degree(&self) -> u32 {
        self.kind.growth_degree()
    }

    pub fn ab_dim(&self) -> usize {
        self.kind.ab_dim()
    }

    pub fn validate_element(&self, g: &GroupElement) -> Result<(), GroupError> {
        let expected = self.kind.coord_len();
        if g.coords.len() != expected {
            return Err(GroupError::ShapeMismatch {
                expected,
                got: g.coords.len(),
            });
        }
        match &self.kind {
            GroupKind::DirectProductFinite { table, .. } => {
                let idx = g.coords[expected - 1];
                if idx < 0 || idx as usize >= table.order() {
                    return Err(GroupError::CoordOutOfRange(format!(
                        "finite index {idx} outside 0..{}",
                        table.order()
                    )));
                }
            }
            GroupKind::DihedralOver { .. } => {
                let r = g.coords[expected - 1];
                if r != 0 && r != 1 {
                    return Err(GroupError::CoordOutOfRange(format!(
                        "reflection bit {r} outside {{0, 1}}"
                    )));
                }
            }
            _ => {}
        }
        Ok(())
    }

    /// Exact group product.
    pub fn multiply(&self, g: &GroupElement, h: &GroupElement) -> Result<GroupElement, GroupError> {
        self.validate_element(g)?;
        self.validate_element(h)?;
        self.multiply_unchecked(g, h)
    }

    fn multiply_unchecked(&self, g: &GroupElement, h: &GroupElement) -> Result<GroupElement, GroupError> {
        match &self.kind {
            GroupKind::FreeAbelian(d) => {
                let mut c = Coords::with_capacity(*d);
                for i in 0..*d {
                    c.push(add(g.coords[i], h.coords[i])?);
                }
                Ok(GroupElement { coords: c })
            }
            GroupKind::Heisenberg => {
                let (x, y, z) = (g.coords[0], g.coords[1], g.coords[2]);
                let (x2, y2, z2) = (h.coords[0], h.coords[1], h.coords[2]);
                let zz = add(add(z, z2)?, mul(x, y2)?)?;
                Ok(GroupElement::heisenberg(add(x, x2)?, add(y, y2)?, zz))
            }
            GroupKind::DirectProductFinite { base, table } => {
                let n = base.coord_len();
                let bg = GroupElement::new(&g.coords[..n]);
                let bh = GroupElement::new(&h.coords[..n]);
                let prod = self.base_op(|spec| spec.multiply_unchecked(&bg, &bh))?;
                let m = table.mul(g.coords[n] as usize, h.coords[n] as usize);
                Ok(GroupElement::with_finite_index(&prod, m))
            }
            GroupKind::DihedralOver { rank } => {
                let r = g.coords[*rank];
                let r2 = h.coords[*rank];
                let mut c = Coords::with_capacity(rank + 1);
                for i in 0..*rank {
                    let hv = if r == 1 { neg(h.coords[i])? } else { h.coords[i] };
                    c.push(add(g.coords[i], hv)?);
                }
                c.push((r + r2) & 1);
                Ok(GroupElement { coords: c })
            }
        }
    }

    /// Runs an operation in the base group of a composite kind.
    fn base_op<T>(
        &self,
        f: impl FnOnce(&GroupSpec) -> Result<T, GroupError>,
    ) -> Result<T, GroupError> {
        // The base spec here is only used for arithmetic, so the default
        // generating set is irrelevant; kinds carry all shape information.
        match &self.kind {
            GroupKind::DirectProductFinite { base, .. } => {
                let spec = match base.as_ref() {
                    GroupKind::FreeAbelian(d) => GroupSpec::free_abelian(*d),
                    GroupKind::Heisenberg => GroupSpec::heisenberg(),
                    _ => unreachable!("validated at construction"),
                };
                f(&spec)
            }
            _ => Err(GroupError::UnsupportedKind("no base group".into())),
        }
    }

    /// Exact group inverse.
    pub fn inverse(&self, g: &GroupElement) -> Result<GroupElement, GroupError> {
        self.validate_element(g)?;
        match &self.kind {
            GroupKind::FreeAbelian(_) => {
                let c: Result<Coords, _> = g.coords.iter().map(|&v| neg(v)).collect();
                Ok(GroupElement { coords: c? })
            }
            GroupKind::Heisenberg => {
                let (x, y, z) = (g.coords[0], g.coords[1], g.coords[2]);
                Ok(GroupElement::heisenberg(
                    neg(x)?,
                    neg(y)?,
                    add(mul(x, y)?, neg(z)?)?,
                ))
            }
            GroupKind::DirectProductFinite { base, table } => {
                let n = base.coord_len();
                let bg = GroupElement::new(&g.coords[..n]);
                let inv = self.base_op(|spec| spec.inverse(&bg))?;
                Ok(GroupElement::with_finite_index(
                    &inv,
                    table.inv(g.coords[n] as usize),
                ))
            }
            GroupKind::DihedralOver { rank } => {
                let r = g.coords[*rank];
                let mut c = Coords::with_capacity(rank + 1);
                for i in 0..*rank {
                    // (x, r)^-1 = ((-1)^(r+1) x, r): negate the base exactly
                    // when r = 0.
                    c.push(if r == 0 { neg(g.coords[i])? } else { g.coords[i] });
                }
                c.push(r);
                Ok(GroupElement { coords: c })
            }
        }
    }

    /// Exact n-th power; negative exponents are powers of the inverse.
    /// Heisenberg uses the closed form, other kinds square-and-multiply.
    pub fn power(&self, g: &GroupElement, n: i64) -> Result<GroupElement, GroupError> {
        self.validate_element(g)?;
        if n == 0 {
            return Ok(self.identity());
        }
        if n < 0 {
            let inv = self.inverse(g)?;
            let m = n.checked_neg().ok_or(GroupError::Overflow)?;
            return self.power(&inv, m);
        }
        match &self.kind {
            GroupKind::Heisenberg => {
                let (x, y, z) = (
                    g.coords[0] as i128,
                    g.coords[1] as i128,
                    g.coords[2] as i128,
                );
                let n = n as i128;
                // (x, y, z)^n = (nx, ny, nz + n(n-1)/2 * xy)
                let zz = n
                    .checked_mul(z)
                    .and_then(|a| {
                        (n * (n - 1) / 2)
                            .checked_mul(x)
                            .and_then(|b| b.checked_mul(y))
                            .and_then(|b| a.checked_add(b))
                    })
                    .ok_or(GroupError::Overflow)?;
                Ok(GroupElement::heisenberg(
                    narrow(n * x)?,
                    narrow(n * y)?,
                    narrow(zz)?,
                ))
            }
            _ => {
                let mut acc = self.identity();
                let mut sq = g.clone();
                let mut k = n as u64;
                loop {
                    if k & 1 == 1 {
                        acc = self.multiply_unchecked(&acc, &sq)?;
                    }
                    k >>= 1;
                    if k == 0 {
                        break;
                    }
                    sq = self.multiply_unchecked(&sq, &sq)?;
                }
                Ok(acc)
            }
        }
    }

    /// The commutator g h g^-1 h^-1.
    pub fn commutator(&self, g: &GroupElement, h: &GroupElement) -> Result<GroupElement, GroupError> {
        let gh = self.multiply(g, h)?;
        let gi = self.inverse(g)?;
        let hi = self.inverse(h)?;
        let ghgi = self.multiply_unchecked(&gh, &gi)?;
        self.multiply_unchecked(&ghgi, &hi)
    }

    /// Image of `g` in the abelianized coordinates. For the dihedral kind
    /// this is the base coordinate of the torsion quotient rather than the
    /// (2-torsion) abelianization of the full group.
    pub fn abelianize(&self, g: &GroupElement) -> Result<AbelianVector, GroupError> {
        self.validate_element(g)?;
        Ok(match &self.kind {
            GroupKind::FreeAbelian(_) => g.coords.to_vec(),
            GroupKind::Heisenberg => vec![g.coords[0], g.coords[1]],
            GroupKind::DirectProductFinite { base, .. } => {
                let n = base.coord_len();
                let bg = GroupElement::new(&g.coords[..n]);
                self.base_op(|spec| spec.abelianize(&bg))?
            }
            GroupKind::DihedralOver { rank } => g.coords[..*rank].to_vec(),
        })
    }

    /// Whether the kind is virtually nilpotent with a nontrivial finite part.
    pub fn has_finite_extension(&self) -> bool {
        matches!(
            self.kind,
            GroupKind::DirectProductFinite { .. } | GroupKind::DihedralOver { .. }
        )
    }

    /// Index kappa = [Gamma : N] of the nilpotent normal subgroup.
    pub fn coset_count(&self) -> usize {
        match &self.kind {
            GroupKind::DirectProductFinite { table, .. } => table.order(),
            GroupKind::DihedralOver { .. } => 2,
            _ => 1,
        }
    }

    /// Fixed coset representatives: the identity for N itself, and the
    /// element carrying the smallest finite coordinate otherwise.
    pub fn coset_representative(&self, j: usize) -> Result<GroupElement, GroupError> {
        if j >= self.coset_count() {
            return Err(GroupError::CoordOutOfRange(format!(
                "coset index {j} outside 0..{}",
                self.coset_count()
            )));
        }
        match &self.kind {
            GroupKind::DirectProductFinite { base, .. } => {
                let e = GroupElement::new(vec![0i64; base.coord_len()]);
                Ok(GroupElement::with_finite_index(&e, j))
            }
            GroupKind::DihedralOver { rank } => {
                Ok(GroupElement::dihedral(&vec![0i64; *rank], j as i64))
            }
            _ => Err(GroupError::UnsupportedKind(
                "nilpotent kinds have a single coset".into(),
            )),
        }
    }

    /// Torsion-quotient map: returns the representative of [[x]] in the
    /// quotient group (as an element of the base kind) and the coset index
    /// of x. The representative is pi_N(x) = z_(j)^-1 x.
    pub fn torsion_quotient(&self, g: &GroupElement) -> Result<(GroupElement, usize), GroupError> {
        self.validate_element(g)?;
        match &self.kind {
            GroupKind::DirectProductFinite { base, .. } => {
                let n = base.coord_len();
                let j = g.coords[n] as usize;
                Ok((GroupElement::new(&g.coords[..n]), j))
            }
            GroupKind::DihedralOver { rank } => {
                let j = g.coords[*rank] as usize;
                let rep = self.coset_representative(j)?;
                let rep_inv = self.inverse(&rep)?;
                let proj = self.multiply_unchecked(&rep_inv, g)?;
                Ok((GroupElement::new(&proj.coords[..*rank]), j))
            }
            _ => Err(GroupError::UnsupportedKind(
                "torsion quotient is defined for the finite-extension kinds".into(),
            )),
        }
    }

    /// Embeds an element of the quotient group back into the full group,
    /// inside the coset with index `j`: z_(j) * x.
    pub fn embed_from_base(
        &self,
        base_elem: &GroupElement,
        j: usize,
    ) -> Result<GroupElement, GroupError> {
        match &self.kind {
            GroupKind::DirectProductFinite { base, .. } => {
                if base_elem.coords.len() != base.coord_len() {
                    return Err(GroupError::ShapeMismatch {
                        expected: base.coord_len(),
                        got: base_elem.coords.len(),
                    });
                }
                let rep = self.coset_representative(j)?;
                let lifted = GroupElement::with_finite_index(base_elem, 0);
                self.multiply(&rep, &lifted)
            }
            GroupKind::DihedralOver { rank } => {
                if base_elem.coords.len() != *rank {
                    return Err(GroupError::ShapeMismatch {
                        expected: *rank,
                        got: base_elem.coords.len(),
                    });
                }
                let rep = self.coset_representative(j)?;
                let lifted = GroupElement::dihedral(base_elem.coords(), 0);
                self.multiply(&rep, &lifted)
            }
            _ => Err(GroupError::UnsupportedKind(
                "embedding is defined for the finite-extension kinds".into(),
            )),
        }
    }

    /// The quotient group Gamma' = N / tor N as a catalog spec, generated by
    /// the nonidentity projections of this spec's generators.
    pub fn quotient_spec(&self) -> Result<GroupSpec, GroupError> {
        let base_kind = match &self.kind {
            GroupKind::DirectProductFinite { base, .. } => base.as_ref().clone(),
            GroupKind::DihedralOver { rank } => GroupKind::FreeAbelian(*rank),
            _ => {
                return Err(GroupError::UnsupportedKind(
                    "quotient spec is defined for the finite-extension kinds".into(),
                ))
            }
        };
        let mut gens: Vec<GroupElement> = Vec::new();
        for s in &self.generators {
            let (p, _) = self.torsion_quotient(s)?;
            if !p.is_zero() && !gens.contains(&p) {
                gens.push(p);
            }
        }
        GroupSpec::new(base_kind, gens)
    }

    /// True when no generator lies in the commutator subgroup. For the
    /// nilpotent kinds this is the structural precondition of the
    /// geodesic-decomposition witness.
    pub fn generators_avoid_commutator_subgroup(&self) -> bool {
        self.generators.iter().all(|s| {
            match self.abelianize(s) {
                Ok(ab) => ab.iter().any(|&c| c != 0) || s.is_zero(),
                Err(_) => false,
            }
        })
    }

    /// Structural hypotheses used to transfer FPP results through a finite
    /// extension: projections respect inverses, and the projected set
    /// generates the quotient while avoiding its commutator subgroup.
    pub fn finite_extension_report(&self) -> Result<FiniteExtensionReport, GroupError> {
        let quotient = self.quotient_spec()?;
        let mut inverse_compatible = true;
        for s in &self.generators {
            let (p, _) = self.torsion_quotient(s)?;
            let (pi, _) = self.torsion_quotient(&self.inverse(s)?)?;
            if quotient.inverse(&p)? != pi {
                inverse_compatible = false;
            }
        }
        Ok(FiniteExtensionReport {
            inverse_compatible,
            projected_avoids_commutator: quotient.generators_avoid_commutator_subgroup(),
            quotient_is_abelian: matches!(quotient.kind, GroupKind::FreeAbelian(_)),
        })
    }
}

/// See [`GroupSpec::finite_extension_report`].
#[derive(Debug, Clone, Copy, Serialize)]
pub struct FiniteExtensionReport {
    pub inverse_compatible: bool,
    pub projected_avoids_commutator: bool,
    pub quotient_is_abelian: bool,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::prf::SplitStream;

    fn random_element(spec: &GroupSpec, stream: &mut SplitStream, range: i64) -> GroupElement {
        let len = spec.kind().coord_len();
        let mut coords = Coords::with_capacity(len);
        for _ in 0..len {
            coords.push(stream.next_i64_in(-range, range));
        }
        match spec.kind() {
            GroupKind::DirectProductFinite { table, .. } => {
                let last = coords.len() - 1;
                coords[last] = stream.next_index(table.order()) as i64;
            }
            GroupKind::DihedralOver { .. } => {
                let last = coords.len() - 1;
                coords[last] &= 1;
                if coords[last] < 0 {
                    coords[last] += 1;
                }
            }
            _ => {}
        }
        GroupElement::new(coords)
    }

    fn catalog() -> Vec<GroupSpec> {
        vec![
            GroupSpec::free_abelian(2),
            GroupSpec::heisenberg(),
            GroupSpec::direct_product_finite(GroupSpec::heisenberg(), FiniteGroupTable::cyclic(3))
                .unwrap(),
            GroupSpec::dihedral_over(2),
        ]
    }

    #[test]
    fn heisenberg_examples() {
        let h = GroupSpec::heisenberg();
        let x = GroupElement::heisenberg(1, 0, 0);
        let y = GroupElement::heisenberg(0, 1, 0);
        assert_eq!(h.multiply(&x, &y).unwrap(), GroupElement::heisenberg(1, 1, 1));
        assert_eq!(h.multiply(&y, &x).unwrap(), GroupElement::heisenberg(1, 1, 0));
        let g = GroupElement::heisenberg(1, 1, 1);
        assert_eq!(h.inverse(&g).unwrap(), GroupElement::heisenberg(-1, -1, 0));
        assert_eq!(h.inverse(&h.identity()).unwrap(), h.identity());
        assert_eq!(
            h.power(&GroupElement::heisenberg(1, 1, 0), 2).unwrap(),
            GroupElement::heisenberg(2, 2, 1)
        );
        assert_eq!(h.power(&g, 0).unwrap(), h.identity());
        assert_eq!(h.commutator(&x, &y).unwrap(), GroupElement::heisenberg(0, 0, 1));
        assert_eq!(h.commutator(&g, &g).unwrap(), h.identity());
    }

    #[test]
    fn heisenberg_commutator_of_powers() {
        // [X^m, Y^n] = Z^(m n)
        let h = GroupSpec::heisenberg();
        for (m, n) in [(2i64, 3i64), (5, -4), (-3, -7), (1, 1)] {
            let xm = h.power(&GroupElement::heisenberg(1, 0, 0), m).unwrap();
            let yn = h.power(&GroupElement::heisenberg(0, 1, 0), n).unwrap();
            assert_eq!(
                h.commutator(&xm, &yn).unwrap(),
                GroupElement::heisenberg(0, 0, m * n)
            );
        }
    }

    #[test]
    fn free_abelian_power_is_scalar_multiple() {
        let spec = GroupSpec::free_abelian(2);
        let g = GroupElement::free_abelian(&[3, -1]);
        assert_eq!(
            spec.power(&g, 5).unwrap(),
            GroupElement::free_abelian(&[15, -5])
        );
    }

    #[test]
    fn dihedral_examples() {
        let d = GroupSpec::dihedral_over(1);
        let g = GroupElement::dihedral(&[5], 1);
        // (x, 1) is its own inverse.
        assert_eq!(d.inverse(&g).unwrap(), g);
        assert_eq!(d.multiply(&g, &g).unwrap(), d.identity());
        // [(x, 0), (y, 1)] = (2x, 0)
        for (x, y) in [(3i64, 4i64), (-2, 7), (0, 1)] {
            let a = GroupElement::dihedral(&[x], 0);
            let b = GroupElement::dihedral(&[y], 1);
            assert_eq!(
                d.commutator(&a, &b).unwrap(),
                GroupElement::dihedral(&[2 * x], 0)
            );
        }
    }

    #[test]
    fn dihedral_commutators_land_in_2n() {
        let d = GroupSpec::dihedral_over(2);
        let mut stream = SplitStream::new(7, 0);
        for _ in 0..10_000 {
            let g = random_element(&d, &mut stream, 20);
            let h = random_element(&d, &mut stream, 20);
            let c = d.commutator(&g, &h).unwrap();
            assert_eq!(c.coords()[2], 0, "commutator outside N x {{0}}");
            assert!(c.coords()[..2].iter().all(|v| v % 2 == 0), "odd base coordinate");
        }
    }

    #[test]
    fn group_axioms_on_random_triples() {
        for spec in catalog() {
            let mut stream = SplitStream::new(11, 0);
            let e = spec.identity();
            for _ in 0..10_000 {
                let a = random_element(&spec, &mut stream, 50);
                let b = random_element(&spec, &mut stream, 50);
                let c = random_element(&spec, &mut stream, 50);
                let ab_c = spec
                    .multiply(&spec.multiply(&a, &b).unwrap(), &c)
                    .unwrap();
                let a_bc = spec
                    .multiply(&a, &spec.multiply(&b, &c).unwrap())
                    .unwrap();
                assert_eq!(ab_c, a_bc, "associativity in {}", spec.name());
                assert_eq!(spec.multiply(&a, &e).unwrap(), a);
                assert_eq!(spec.multiply(&e, &a).unwrap(), a);
                let inv = spec.inverse(&a).unwrap();
                assert_eq!(spec.multiply(&a, &inv).unwrap(), e);
                assert_eq!(spec.multiply(&inv, &a).unwrap(), e);
            }
        }
    }

    #[test]
    fn power_matches_iterated_multiplication() {
        for spec in catalog() {
            let mut stream = SplitStream::new(13, 0);
            for _ in 0..50 {
                let g = random_element(&spec, &mut stream, 8);
                let mut acc = spec.identity();
                for n in 0..=64i64 {
                    assert_eq!(spec.power(&g, n).unwrap(), acc, "n={n} in {}", spec.name());
                    let neg = spec.power(&g, -n).unwrap();
                    assert_eq!(spec.inverse(&acc).unwrap(), neg);
                    acc = spec.multiply(&acc, &g).unwrap();
                }
            }
        }
    }

    #[test]
    fn abelianize_examples_and_homomorphism() {
        let h = GroupSpec::heisenberg();
        assert_eq!(
            h.abelianize(&GroupElement::heisenberg(3, -2, 17)).unwrap(),
            vec![3, -2]
        );
        assert_eq!(h.abelianize(&h.identity()).unwrap(), vec![0, 0]);
        assert_eq!(
            h.abelianize(&GroupElement::heisenberg(0, 0, 5)).unwrap(),
            vec![0, 0]
        );
        for spec in [GroupSpec::free_abelian(3), GroupSpec::heisenberg()] {
            let mut stream = SplitStream::new(17, 0);
            for _ in 0..2_000 {
                let g = random_element(&spec, &mut stream, 40);
                let h2 = random_element(&spec, &mut stream, 40);
                let lhs = spec.abelianize(&spec.multiply(&g, &h2).unwrap()).unwrap();
                let rhs: Vec<i64> = spec
                    .abelianize(&g)
                    .unwrap()
                    .iter()
                    .zip(spec.abelianize(&h2).unwrap())
                    .map(|(a, b)| a + b)
                    .collect();
                assert_eq!(lhs, rhs);
                let c = spec.commutator(&g, &h2).unwrap();
                assert!(spec.abelianize(&c).unwrap().iter().all(|&v| v == 0));
            }
        }
    }

    #[test]
    fn torsion_quotient_examples() {
        let dp = GroupSpec::direct_product_finite(
            GroupSpec::heisenberg(),
            FiniteGroupTable::cyclic(2),
        )
        .unwrap();
        let base = GroupElement::heisenberg(1, 2, 3);
        let g = GroupElement::with_finite_index(&base, 1);
        assert_eq!(dp.torsion_quotient(&g).unwrap(), (base.clone(), 1));
        assert_eq!(
            dp.torsion_quotient(&dp.identity()).unwrap(),
            (GroupElement::heisenberg(0, 0, 0), 0)
        );

        // pi_N(x) = z_(j)^-1 x, checked by direct multiplication: for
        // Dih(Z^2) with representative ((0,0), 1), the projection of
        // ((4,7), 1) is ((0,0),1) * ((4,7),1) = ((-4,-7), 0).
        let d = GroupSpec::dihedral_over(2);
        let x = GroupElement::dihedral(&[4, 7], 1);
        let rep = d.coset_representative(1).unwrap();
        let oracle = d.multiply(&d.inverse(&rep).unwrap(), &x).unwrap();
        assert_eq!(oracle, GroupElement::dihedral(&[-4, -7], 0));
        let (proj, j) = d.torsion_quotient(&x).unwrap();
        assert_eq!(j, 1);
        assert_eq!(proj, GroupElement::free_abelian(&[-4, -7]));
    }

    #[test]
    fn embed_inverts_torsion_quotient() {
        let dp = GroupSpec::direct_product_finite(
            GroupSpec::free_abelian(2),
            FiniteGroupTable::cyclic(2),
        )
        .unwrap();
        let d = GroupSpec::dihedral_over(2);
        for spec in [dp, d] {
            let mut stream = SplitStream::new(23, 0);
            for _ in 0..500 {
                let g = random_element(&spec, &mut stream, 30);
                let (p, j) = spec.torsion_quotient(&g).unwrap();
                assert_eq!(spec.embed_from_base(&p, j).unwrap(), g);
            }
        }
    }

    #[test]
    fn unsupported_kinds_reject_torsion_quotient() {
        let h = GroupSpec::heisenberg();
        assert!(matches!(
            h.torsion_quotient(&h.identity()),
            Err(GroupError::UnsupportedKind(_))
        ));
    }

    #[test]
    fn overflow_is_detected() {
        let h = GroupSpec::heisenberg();
        let big = GroupElement::heisenberg(i64::MAX, 1, 0);
        assert_eq!(h.multiply(&big, &big).unwrap_err(), GroupError::Overflow);
        let wide = GroupElement::heisenberg(i64::MAX / 2, i64::MAX / 2, 0);
        assert_eq!(h.power(&wide, 3).unwrap_err(), GroupError::Overflow);
    }

    #[test]
    fn shape_mismatch_is_detected() {
        let h = GroupSpec::heisenberg();
        let bad = GroupElement::free_abelian(&[1, 2]);
        assert!(matches!(
            h.multiply(&bad, &h.identity()),
            Err(GroupError::ShapeMismatch { expected: 3, got: 2 })
        ));
    }

    #[test]
    fn generating_set_validation() {
        let err = GroupSpec::new(
            GroupKind::FreeAbelian(1),
            vec![GroupElement::free_abelian(&[1])],
        )
        .unwrap_err();
        assert!(matches!(err, GroupError::InvalidGenerators(_)));

        let err = GroupSpec::new(
            GroupKind::FreeAbelian(1),
            vec![GroupElement::free_abelian(&[0])],
        )
        .unwrap_err();
        assert!(matches!(err, GroupError::InvalidGenerators(_)));
    }

    #[test]
    fn direction_classes_pair_inverses() {
        let h = GroupSpec::heisenberg();
        assert_eq!(h.direction_class_count(), 2);
        for i in 0..h.generator_count() as u8 {
            let j = h.inverse_generator_index(i);
            assert_eq!(h.class_of_generator(i), h.class_of_generator(j));
        }
    }

    #[test]
    fn quotient_spec_strips_finite_factor() {
        let dp = GroupSpec::direct_product_finite(
            GroupSpec::heisenberg(),
            FiniteGroupTable::cyclic(2),
        )
        .unwrap();
        let q = dp.quotient_spec().unwrap();
        assert_eq!(q.generator_count(), 4);
        assert!(q.generators().contains(&GroupElement::heisenberg(1, 0, 0)));
        let rep = dp.finite_extension_report().unwrap();
        assert!(rep.inverse_compatible);
        assert!(rep.projected_avoids_commutator);
        assert!(!rep.quotient_is_abelian);

        let d = GroupSpec::dihedral_over(2);
        let rep = d.finite_extension_report().unwrap();
        assert!(rep.quotient_is_abelian);
    }

    #[test]
    fn structural_commutator_check() {
        assert!(GroupSpec::heisenberg().generators_avoid_commutator_subgroup());
        let bad = GroupSpec::new(
            GroupKind::Heisenberg,
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
        assert!(!bad.generators_avoid_commutator_subgroup());
    }
}
