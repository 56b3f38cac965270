//! Floating point abstraction shared by every numeric routine in the crate.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, NumAssign, ToPrimitive};

/// Real scalar the screening and solver code is generic over: `f32` or `f64`.
pub trait Scalar:
    Float
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Sum
    + Debug
    + Display
    + LowerExp
    + Default
    + Send
    + Sync
    + 'static
{
    /// Relative duality-gap tolerance used by [`SolverConfig::default`](crate::SolverConfig).
    const DEFAULT_GAP_TOL: f64;

    /// Converts an `f64` literal. Every literal used by the crate is representable.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar type")
    }

    #[inline]
    fn from_usize_lossy(x: usize) -> Self {
        Self::from_usize(x).unwrap_or_else(Self::max_value)
    }

    /// Slack used when a quantity is known to equal a threshold in exact arithmetic
    /// (for instance the support value of the feature that generated a halfspace).
    #[inline]
    fn boundary_tol() -> Self {
        Self::epsilon() * Self::lit(1.0e4)
    }
}

impl Scalar for f32 {
    const DEFAULT_GAP_TOL: f64 = 1.0e-4;
}

impl Scalar for f64 {
    const DEFAULT_GAP_TOL: f64 = 1.0e-8;
}
