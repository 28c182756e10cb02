//! Fourier operator norms, witness families and entropic uncertainty
//! principles on finite abelian groups.
//!
//! Groups are products of cyclic factors `Z/m_1 x ... x Z/m_k`, each carrying
//! a compact or discrete Haar normalization (see [`group`]). Functions on the
//! group or its dual are [`MeasuredFunction`]s; [`fourier`] transforms them,
//! [`norms`] and [`region`] measure them and classify `(1/p, 1/q)`, and
//! [`witness`], [`estimator`], [`uncertainty`] build on top.

pub mod error;
pub mod estimator;
pub mod fourier;
pub mod group;
pub mod io;
pub mod norms;
pub mod region;
pub mod selftest;
pub mod trig;
pub mod uncertainty;
pub mod witness;

pub use error::{Error, Result};
pub use estimator::{EstimatorConfig, NormEstimate};
pub use fourier::{MeasuredFunction, Side};
pub use group::{Character, GroupElement, GroupSpec, Subgroup, View, EXHAUSTIVE_CAP};
pub use norms::{lp_norm, Exponent};
pub use region::{classify, closed_form_cpq, Cpq, RegionLabel, RegionVerdict};
pub use trig::TrigPolynomial;
pub use uncertainty::{Density, UPReport};
pub use witness::{GrowthFit, PredictionKind, WitnessPoint};
