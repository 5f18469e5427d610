//! Weak values of projectors, the Bayes-like relation between a weak value
//! and its time-reversed dual, and a photon-counting simulation of weak
//! measurements in a Mach-Zehnder interferometer.
//!
//! The analytic layer ([`qcore`], [`weakvalues`], [`mzi`]) is generic over the
//! scalar type; the probe model, the simulator and the estimators work in
//! `f64`.

pub mod error;
pub mod estimators;
pub mod mc;
pub mod mzi;
pub mod probe;
pub mod qcore;
pub mod quadrature;
pub mod report;
pub mod scalar;
pub mod weakvalues;

pub use error::{Error, Result};
pub use mzi::{Arm, GlassPlacement, PathLabel, Port};
pub use scalar::Scalar;

pub type Amplitude64 = qcore::Amplitude<f64>;
pub type Amplitude32 = qcore::Amplitude<f32>;
pub type Ket64 = qcore::Ket<f64>;
pub type Ket32 = qcore::Ket<f32>;
pub type Projector64 = qcore::Projector<f64>;
pub type Projector32 = qcore::Projector<f32>;
pub type WeakValue64 = weakvalues::WeakValueResult<f64>;
pub type WeakValue32 = weakvalues::WeakValueResult<f32>;
pub type BayesDecomposition64 = weakvalues::BayesDecomposition<f64>;
pub type MziState64 = mzi::MziState<f64>;
pub type MziState32 = mzi::MziState<f32>;
