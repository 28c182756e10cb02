//! `L^p` quasi-norms for `0 < p <= inf`.

use std::fmt;
use std::str::FromStr;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::fourier::{forward, MeasuredFunction, Side};
use crate::group::View;

/// An exponent `p in (0, inf]`, stored as `u = 1/p` so that `p = inf` is
/// exactly `u = 0`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Exponent {
    reciprocal: f64,
}

impl Exponent {
    pub const INFINITY: Exponent = Exponent { reciprocal: 0.0 };

    pub fn from_reciprocal(u: f64) -> Result<Self> {
        if !(u.is_finite() && u >= 0.0) {
            return Err(Error::InvalidExponent(format!(
                "reciprocal must be finite and >= 0, got {u}"
            )));
        }
        Ok(Self { reciprocal: u })
    }

    /// `p = inf` is accepted.
    pub fn from_p(p: f64) -> Result<Self> {
        if p == f64::INFINITY {
            return Ok(Self::INFINITY);
        }
        if !(p.is_finite() && p > 0.0) {
            return Err(Error::InvalidExponent(format!(
                "p must lie in (0, inf], got {p}"
            )));
        }
        Ok(Self {
            reciprocal: 1.0 / p,
        })
    }

    pub fn reciprocal(self) -> f64 {
        self.reciprocal
    }

    /// `p`, which is `f64::INFINITY` when `u = 0`.
    pub fn p(self) -> f64 {
        if self.reciprocal == 0.0 {
            f64::INFINITY
        } else {
            1.0 / self.reciprocal
        }
    }

    pub fn is_infinite(self) -> bool {
        self.reciprocal == 0.0
    }

    /// Hoelder conjugate `p'` with `1/p + 1/p' = 1`; requires `p >= 1`.
    pub fn conjugate(self) -> Result<Self> {
        if self.reciprocal > 1.0 {
            return Err(Error::InvalidExponent(format!(
                "conjugate exponent needs p >= 1, got p = {}",
                self.p()
            )));
        }
        Ok(Self {
            reciprocal: 1.0 - self.reciprocal,
        })
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_infinite() {
            f.write_str("inf")
        } else {
            write!(f, "{}", self.p())
        }
    }
}

impl FromStr for Exponent {
    type Err = Error;

    /// Accepts `inf`, a decimal, or a fraction `a/b`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = |d: String| Error::Parse {
            what: "exponent",
            detail: d,
        };
        if matches!(s.to_ascii_lowercase().as_str(), "inf" | "infinity" | "∞") {
            return Ok(Self::INFINITY);
        }
        let value = match s.split_once('/') {
            Some((a, b)) => {
                let a: f64 = a.trim().parse().map_err(|e| bad(format!("{s:?}: {e}")))?;
                let b: f64 = b.trim().parse().map_err(|e| bad(format!("{s:?}: {e}")))?;
                a / b
            }
            None => s.parse().map_err(|e| bad(format!("{s:?}: {e}")))?,
        };
        Self::from_p(value)
    }
}

/// Serialized as the number `p`, or the string `"inf"`.
impl Serialize for Exponent {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if self.is_infinite() {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(self.p())
        }
    }
}

/// `(sum |v|^p * atom)^{1/p}`, or `max |v|` for `p = inf`.
///
/// Values are rescaled by their maximum before powering so that very small or
/// very large `p` do not overflow.
pub fn lp_norm_values(values: &[impl AbsValue], atom: f64, p: Exponent) -> f64 {
    let max = values.iter().map(|v| v.abs_value()).fold(0.0, f64::max);
    if max == 0.0 || p.is_infinite() {
        return max;
    }
    let pp = p.p();
    let s = compensated_sum(values.iter().map(|v| (v.abs_value() / max).powf(pp)));
    max * (s * atom).powf(p.reciprocal())
}

/// Neumaier-compensated sum; keeps norms of `2^20`-point functions accurate
/// to a few ulps.
pub fn compensated_sum(xs: impl Iterator<Item = f64>) -> f64 {
    let (mut sum, mut comp) = (0.0f64, 0.0f64);
    for x in xs {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            comp += (sum - t) + x;
        } else {
            comp += (x - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Anything with a modulus.
pub trait AbsValue {
    fn abs_value(&self) -> f64;
}

impl AbsValue for f64 {
    fn abs_value(&self) -> f64 {
        self.abs()
    }
}

impl AbsValue for num_complex::Complex64 {
    fn abs_value(&self) -> f64 {
        self.norm()
    }
}

/// `||f||_p` with the Haar weights of the function's side.
pub fn lp_norm(f: &MeasuredFunction, p: Exponent) -> f64 {
    lp_norm_values(f.values(), f.atom(), p)
}

/// `||f||_p - ||f^||_{p'}` for `1 <= p <= 2` on a compact group of total
/// mass 1. The Hausdorff-Young inequality says this is never negative.
pub fn hausdorff_young_check(f: &MeasuredFunction, p: Exponent) -> Result<f64> {
    let u = p.reciprocal();
    if !(0.5..=1.0).contains(&u) {
        return Err(Error::InvalidExponent(format!(
            "Hausdorff-Young needs 1 <= p <= 2, got p = {}",
            p.p()
        )));
    }
    let spec = f.spec();
    if spec.view() != View::Compact || (spec.mass() - 1.0).abs() > 1e-15 {
        return Err(Error::InvalidSpec(
            "Hausdorff-Young check needs the compact view with mass 1".into(),
        ));
    }
    if f.side() != Side::Time {
        return Err(Error::WrongSide {
            expected: "time",
            found: f.side().as_str(),
        });
    }
    let fh = forward(f)?;
    Ok(lp_norm(f, p) - lp_norm(&fh, p.conjugate()?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{Character, GroupSpec};
    use num_complex::Complex64;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn exponent_parsing() {
        assert!("inf".parse::<Exponent>().unwrap().is_infinite());
        assert_eq!("4/3".parse::<Exponent>().unwrap().reciprocal(), 0.75);
        assert_eq!("0.5".parse::<Exponent>().unwrap().p(), 0.5);
        assert!("0".parse::<Exponent>().is_err());
        assert!("-2".parse::<Exponent>().is_err());
        assert!(Exponent::from_reciprocal(-0.1).is_err());
        assert_eq!(
            Exponent::from_p(4.0).unwrap().conjugate().unwrap().p(),
            4.0 / 3.0
        );
    }

    #[test]
    fn norms_of_simple_functions() {
        let g = GroupSpec::compact(&[5, 2]).unwrap();
        let one = MeasuredFunction::constant(&g, Side::Time, c(1.0)).unwrap();
        for p in [0.3, 1.0, 2.0, 7.5, f64::INFINITY] {
            let n = lp_norm(&one, Exponent::from_p(p).unwrap());
            assert!((n - 1.0).abs() < 1e-15, "p={p}: {n}");
        }
        let g = GroupSpec::discrete(&[4]).unwrap();
        let d = MeasuredFunction::delta(&g, Side::Time, &[0]).unwrap();
        assert_eq!(lp_norm(&d, Exponent::from_p(3.0).unwrap()), 1.0);

        let g = GroupSpec::discrete(&[2]).unwrap();
        let f = MeasuredFunction::constant(&g, Side::Time, c(1.0)).unwrap();
        assert!((lp_norm(&f, Exponent::from_p(0.5).unwrap()) - 4.0).abs() < 1e-15);
    }

    #[test]
    fn homogeneity_and_extreme_exponents() {
        let g = GroupSpec::compact(&[6]).unwrap();
        let f =
            MeasuredFunction::from_fn(&g, Side::Time, |x| Complex64::new(x[0] as f64 - 2.0, 0.5))
                .unwrap();
        for u in [0.0, 0.01, 0.5, 1.0, 3.0, 50.0] {
            let p = Exponent::from_reciprocal(u).unwrap();
            let a = lp_norm(&f.scaled(Complex64::new(0.0, -3.0)), p);
            assert!((a - 3.0 * lp_norm(&f, p)).abs() < 1e-12 * a);
        }
        let tiny = f.scaled(c(1e-200));
        assert!(lp_norm(&tiny, Exponent::from_p(0.02).unwrap()) > 0.0);
    }

    #[test]
    fn hausdorff_young_margins() {
        let g = GroupSpec::compact(&[8]).unwrap();
        let f = MeasuredFunction::from_fn(&g, Side::Time, |x| c((x[0] * x[0]) as f64)).unwrap();
        let m = hausdorff_young_check(&f, Exponent::from_p(2.0).unwrap()).unwrap();
        assert!(m.abs() < 1e-12);
        let spike = MeasuredFunction::delta(&g, Side::Time, &[3]).unwrap();
        assert!(hausdorff_young_check(&spike, Exponent::from_p(1.0).unwrap()).unwrap() >= 0.0);
        let chi = MeasuredFunction::character(&g, &Character(vec![5])).unwrap();
        let m = hausdorff_young_check(&chi, Exponent::from_p(4.0 / 3.0).unwrap()).unwrap();
        assert!(m.abs() < 1e-14);
        assert!(hausdorff_young_check(&chi, Exponent::from_p(3.0).unwrap()).is_err());
        let d = chi.with_spec(GroupSpec::discrete(&[8]).unwrap()).unwrap();
        assert!(hausdorff_young_check(&d, Exponent::from_p(1.5).unwrap()).is_err());
    }
}
