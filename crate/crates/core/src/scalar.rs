//! Scalar abstraction shared by the analytic modules.

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive};

/// Real scalar type the analytic engine is generic over (`f32` or `f64`).
///
/// The two associated tolerances are precision-dependent: `f64` uses the
/// fixed `1e-12` absolute tolerance for identities and overlap cutoffs, and
/// `f32` scales both to its own epsilon.
pub trait Scalar:
    Float + FloatConst + FromPrimitive + Debug + Display + Default + Send + Sync + 'static
{
    /// Absolute tolerance for analytic identities (normalization, idempotence).
    fn identity_tol() -> Self;

    /// Below this magnitude an overlap counts as zero.
    fn overlap_cutoff() -> Self;

    /// Tolerance for basis completeness checks.
    fn completeness_tol() -> Self;

    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar type")
    }
}

impl Scalar for f64 {
    fn identity_tol() -> Self {
        1e-12
    }
    fn overlap_cutoff() -> Self {
        1e-12
    }
    fn completeness_tol() -> Self {
        1e-10
    }
}

impl Scalar for f32 {
    fn identity_tol() -> Self {
        1e-5
    }
    fn overlap_cutoff() -> Self {
        1e-6
    }
    fn completeness_tol() -> Self {
        1e-4
    }
}
