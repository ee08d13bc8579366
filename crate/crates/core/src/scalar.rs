//! Floating-point scalar abstraction for the cone-geometry and statistics
//! lanes. Group coordinates stay exact (`i64`), passage times stay exact
//! fixed-point (`u64` ticks); only the real-valued geometry is generic.

use std::fmt::{Debug, Display};

/// Real scalar: `f32` or `f64`.
pub trait Real:
    num_traits::Float
    + num_traits::FromPrimitive
    + num_traits::NumCast
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
    /// Lossless-enough conversion from an exact integer coordinate.
    fn from_coord(c: i64) -> Self {
        Self::from_i64(c).expect("integer coordinate representable")
    }
}

impl Real for f32 {}
impl Real for f64 {}
