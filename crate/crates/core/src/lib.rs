//! Subadditive growth processes on Cayley graphs of groups of polynomial
//! growth: exact catalog-group arithmetic, word-metric balls, deterministic
//! random environments (first-passage percolation variants and the frog
//! model), Monte Carlo estimation of the limiting norm, and asymptotic-cone
//! shape diagnostics.

pub mod budget;
pub mod cayley;
pub mod cone;
pub mod estimators;
pub mod group;
pub mod models;
pub mod scalar;

pub use budget::{Budget, BUDGET_ENV_VAR};
pub use group::{AbelianVector, FiniteGroupTable, GroupElement, GroupError, GroupKind, GroupSpec};
pub use scalar::Real;

/// Concrete scalar used by the CLI and the report serializations.
pub type Scalar = f64;
/// Cone point over the default scalar.
pub type ConePoint64 = cone::ConePoint<Scalar>;
/// Shape cloud over the default scalar.
pub type ShapeCloud64 = cone::ShapeCloud<Scalar>;
