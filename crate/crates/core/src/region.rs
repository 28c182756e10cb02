//! Finiteness regions of `C_{p,q}` in the `(u, v) = (1/p, 1/q)` plane.
//!
//! Compact groups:
//!
//! * `R1`: `u + v <= 1` and `v <= 1/2`; `C_{p,q} = a(X)^{1-u-v}`.
//! * `R2`: `u + v > 1`; infinite.
//! * `R3`: everything else (`u + v <= 1`, `v > 1/2`); infinite.
//!
//! Discrete groups:
//!
//! * `R2'`: `u + v >= 1` and `u >= 1/2`; `C_{p,q} = a^(X^)^{u+v-1}`.
//! * `R1'`: `u + v < 1` and `v < 1/2`; infinite.
//! * `R3'ext`: everything else (`u < 1/2` with `u + v >= 1` or `v >= 1/2`);
//!   infinite. The label carries `ext` because it covers the whole strip
//!   `u < 1/2`, not only the unit square.
//!
//! For a finite group every `C_{p,q}` is of course finite. The verdicts
//! describe the infinite groups the finite ones model; [`closed_form_cpq`]
//! gives the value the formulas assign in the finite regions.

use std::fmt;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::group::{GroupSpec, View};
use crate::norms::Exponent;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RegionLabel {
    R1,
    R2,
    R3,
    R1Prime,
    R2Prime,
    R3PrimeExt,
}

impl RegionLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            RegionLabel::R1 => "R1",
            RegionLabel::R2 => "R2",
            RegionLabel::R3 => "R3",
            RegionLabel::R1Prime => "R1'",
            RegionLabel::R2Prime => "R2'",
            RegionLabel::R3PrimeExt => "R3'ext",
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, RegionLabel::R1 | RegionLabel::R2Prime)
    }
}

impl fmt::Display for RegionLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl Serialize for RegionLabel {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegionVerdict {
    pub side: View,
    pub label: RegionLabel,
    pub finite: bool,
    /// `C_{p,q}` when finite.
    pub value: Option<f64>,
}

/// Classification with unit total mass on the side that sets the value
/// (`a(X) = 1` compact, `a^(X^) = 1` discrete).
pub fn classify(side: View, u: f64, v: f64) -> Result<RegionVerdict> {
    classify_with_mass(side, u, v, 1.0)
}

/// Classification where `total_mass` is `a(X)` for the compact view and
/// `a^(X^)` for the discrete view.
pub fn classify_with_mass(side: View, u: f64, v: f64, total_mass: f64) -> Result<RegionVerdict> {
    if !(u.is_finite() && v.is_finite() && u >= 0.0 && v >= 0.0) {
        return Err(Error::OutOfRange(format!(
            "(u, v) must be finite and nonnegative, got ({u}, {v})"
        )));
    }
    if !(total_mass.is_finite() && total_mass > 0.0) {
        return Err(Error::OutOfRange(format!(
            "total mass must be positive, got {total_mass}"
        )));
    }
    let s = u + v;
    let (label, value) = match side {
        View::Compact => {
            if s <= 1.0 && v <= 0.5 {
                (RegionLabel::R1, Some(total_mass.powf(1.0 - s)))
            } else if s > 1.0 {
                (RegionLabel::R2, None)
            } else {
                (RegionLabel::R3, None)
            }
        }
        View::Discrete => {
            if s >= 1.0 && u >= 0.5 {
                (RegionLabel::R2Prime, Some(total_mass.powf(s - 1.0)))
            } else if s < 1.0 && v < 0.5 {
                (RegionLabel::R1Prime, None)
            } else {
                (RegionLabel::R3PrimeExt, None)
            }
        }
    };
    Ok(RegionVerdict {
        side,
        label,
        finite: value.is_some(),
        value,
    })
}

/// Verdict for a concrete group: uses `a(X)` or `a^(X^)` from its spec.
pub fn classify_spec(spec: &GroupSpec, p: Exponent, q: Exponent) -> RegionVerdict {
    let mass = match spec.view() {
        View::Compact => spec.primal_total(),
        View::Discrete => spec.dual_total(),
    };
    classify_with_mass(spec.view(), p.reciprocal(), q.reciprocal(), mass)
        .expect("exponents and masses are validated on construction")
}

/// The closed-form operator norm, or [`Cpq::Infinite`] outside the finite
/// regions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cpq {
    Finite(f64),
    Infinite,
}

impl Cpq {
    pub fn finite(self) -> Option<f64> {
        match self {
            Cpq::Finite(v) => Some(v),
            Cpq::Infinite => None,
        }
    }
}

pub fn closed_form_cpq(spec: &GroupSpec, p: Exponent, q: Exponent) -> Cpq {
    match classify_spec(spec, p, q).value {
        Some(v) => Cpq::Finite(v),
        None => Cpq::Infinite,
    }
}
