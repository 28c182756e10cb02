//! Finite abelian groups as products of cyclic factors.
//!
//! A group is `Z/m_1 x ... x Z/m_k`. Its dual is modelled by the same residue
//! tuples, with the pairing `<chi, x> = exp(2 pi i sum_j chi_j x_j / m_j)`.
//!
//! Elements are enumerated lexicographically with the last factor varying
//! fastest, so the identity has index 0. The same order is used for characters.
//!
//! The Haar measures on both sides are fixed by one scalar `mass`:
//!
//! | view       | `mass` means        | primal atom | dual atom        |
//! |------------|---------------------|-------------|------------------|
//! | `Compact`  | total mass `a(X)`   | `mass / N`  | `1 / mass`       |
//! | `Discrete` | atom mass `a({x})`  | `mass`      | `1 / (mass * N)` |
//!
//! In both cases the product of the two atoms is `1 / N`, which is exactly what
//! makes the inversion formula and Parseval's identity hold.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest group on which exhaustive operations (enumeration, transforms,
/// subgroup closure) are carried out.
pub const EXHAUSTIVE_CAP: usize = 1 << 20;

/// How the finite group is regarded: as a compact group (probability-like
/// total mass) or as a discrete group (point masses).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum View {
    Compact,
    Discrete,
}

impl View {
    pub fn as_str(self) -> &'static str {
        match self {
            View::Compact => "compact",
            View::Discrete => "discrete",
        }
    }
}

impl fmt::Display for View {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for View {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "compact" => Ok(View::Compact),
            "discrete" => Ok(View::Discrete),
            other => Err(Error::Parse {
                what: "view",
                detail: format!("expected compact|discrete, got {other:?}"),
            }),
        }
    }
}

/// A point of the group, as residues modulo each cyclic order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GroupElement(pub Vec<usize>);

/// A character of the group, in the self-dual residue model.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Character(pub Vec<usize>);

impl GroupElement {
    pub fn residues(&self) -> &[usize] {
        &self.0
    }
}

impl Character {
    pub fn residues(&self) -> &[usize] {
        &self.0
    }
}

impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_tuple(f, &self.0)
    }
}

impl fmt::Display for Character {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_tuple(f, &self.0)
    }
}

fn write_tuple(f: &mut fmt::Formatter<'_>, r: &[usize]) -> fmt::Result {
    f.write_str("(")?;
    for (i, v) in r.iter().enumerate() {
        if i > 0 {
            f.write_str(",")?;
        }
        write!(f, "{v}")?;
    }
    f.write_str(")")
}

/// An exact phase `numerator / denominator` of a full turn.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Phase {
    pub numerator: u64,
    pub denominator: u64,
}

impl Phase {
    pub fn is_zero(self) -> bool {
        self.numerator == 0
    }

    pub fn to_complex(self) -> Complex64 {
        root_of_unity(self.numerator, self.denominator)
    }
}

/// `exp(2 pi i k / n)` evaluated from the reduced rational angle.
///
/// Multiples of a quarter turn come out exactly as `+-1`, `+-i`.
pub fn root_of_unity(k: u64, n: u64) -> Complex64 {
    debug_assert!(n > 0);
    let k = k % n;
    if (4 * k as u128).is_multiple_of(n as u128) {
        return match (4 * k as u128 / n as u128) as u8 {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        };
    }
    // Reduce to the half turn nearest zero so the argument to sin/cos is small.
    let (num, neg) = if 2 * k > n { (n - k, true) } else { (k, false) };
    let angle = std::f64::consts::TAU * (num as f64) / (n as f64);
    let (s, c) = angle.sin_cos();
    Complex64::new(c, if neg { -s } else { s })
}

pub(crate) fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

pub(crate) fn lcm(a: u64, b: u64) -> u64 {
    a / gcd(a, b) * b
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// A finite abelian group `Z/m_1 x ... x Z/m_k` together with its Haar
/// normalization.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupSpec {
    orders: Vec<usize>,
    view: View,
    mass: f64,
    size: usize,
    exponent: u64,
}

impl GroupSpec {
    pub fn new(orders: Vec<usize>, view: View, mass: f64) -> Result<Self> {
        if orders.is_empty() {
            return Err(Error::InvalidSpec(
                "at least one cyclic factor is required".into(),
            ));
        }
        if let Some(bad) = orders.iter().find(|&&m| m < 2) {
            return Err(Error::InvalidSpec(format!(
                "cyclic orders must be at least 2, got {bad}"
            )));
        }
        if !(mass.is_finite() && mass > 0.0) {
            return Err(Error::InvalidSpec(format!(
                "mass must be positive, got {mass}"
            )));
        }
        let mut size: usize = 1;
        for &m in &orders {
            size = size
                .checked_mul(m)
                .ok_or_else(|| Error::InvalidSpec("group size overflows".into()))?;
        }
        // Pairing numerators are accumulated modulo the exponent in u128.
        if size > u64::MAX as usize / 4 {
            return Err(Error::InvalidSpec("group size overflows".into()));
        }
        let exponent = orders.iter().fold(1u64, |acc, &m| lcm(acc, m as u64));
        Ok(Self {
            orders,
            view,
            mass,
            size,
            exponent,
        })
    }

    /// Compact view with probability Haar measure.
    pub fn compact(orders: &[usize]) -> Result<Self> {
        Self::new(orders.to_vec(), View::Compact, 1.0)
    }

    /// Discrete view with unit point masses (dual total mass 1).
    pub fn discrete(orders: &[usize]) -> Result<Self> {
        Self::new(orders.to_vec(), View::Discrete, 1.0)
    }

    /// `(Z/r)^n` in the given view with mass 1.
    pub fn elementary(r: usize, n: usize, view: View) -> Result<Self> {
        Self::new(vec![r; n], view, 1.0)
    }

    pub fn with_normalization(&self, view: View, mass: f64) -> Result<Self> {
        Self::new(self.orders.clone(), view, mass)
    }

    pub fn orders(&self) -> &[usize] {
        &self.orders
    }

    pub fn view(&self) -> View {
        self.view
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn rank(&self) -> usize {
        self.orders.len()
    }

    /// Number of elements `N`.
    pub fn size(&self) -> usize {
        self.size
    }

    /// Least common multiple of the cyclic orders.
    pub fn exponent(&self) -> u64 {
        self.exponent
    }

    /// Haar mass of a single group element.
    pub fn primal_atom(&self) -> f64 {
        match self.view {
            View::Compact => self.mass / self.size as f64,
            View::Discrete => self.mass,
        }
    }

    /// Haar mass of a single character.
    pub fn dual_atom(&self) -> f64 {
        match self.view {
            View::Compact => 1.0 / self.mass,
            View::Discrete => 1.0 / (self.mass * self.size as f64),
        }
    }

    /// Total Haar mass of the group, `a(X)`.
    pub fn primal_total(&self) -> f64 {
        match self.view {
            View::Compact => self.mass,
            View::Discrete => self.mass * self.size as f64,
        }
    }

    /// Total Haar mass of the dual group.
    pub fn dual_total(&self) -> f64 {
        match self.view {
            View::Compact => self.size as f64 / self.mass,
            View::Discrete => 1.0 / self.mass,
        }
    }

    /// Fails with a capacity error when the group is too large to enumerate.
    pub fn check_capacity(&self) -> Result<usize> {
        if self.size > EXHAUSTIVE_CAP {
            Err(Error::Capacity {
                size: self.size as u128,
                cap: EXHAUSTIVE_CAP,
            })
        } else {
            Ok(self.size)
        }
    }

    fn check_shape(&self, residues: &[usize]) -> Result<()> {
        if residues.len() != self.orders.len() {
            return Err(Error::ShapeMismatch {
                expected: self.orders.len(),
                found: residues.len(),
            });
        }
        Ok(())
    }

    /// Builds an element, reducing each residue modulo its order.
    pub fn element(&self, residues: &[usize]) -> Result<GroupElement> {
        self.check_shape(residues)?;
        Ok(GroupElement(
            residues
                .iter()
                .zip(&self.orders)
                .map(|(&r, &m)| r % m)
                .collect(),
        ))
    }

    pub fn character(&self, residues: &[usize]) -> Result<Character> {
        self.element(residues).map(|e| Character(e.0))
    }

    pub fn identity(&self) -> GroupElement {
        GroupElement(vec![0; self.rank()])
    }

    /// Canonical index of residues in the enumeration order.
    pub fn index_of(&self, residues: &[usize]) -> Result<usize> {
        self.check_shape(residues)?;
        Ok(self.index_unchecked(residues))
    }

    pub(crate) fn index_unchecked(&self, residues: &[usize]) -> usize {
        residues
            .iter()
            .zip(&self.orders)
            .fold(0usize, |acc, (&r, &m)| acc * m + r % m)
    }

    /// Residues of the element with the given canonical index.
    pub fn residues_at(&self, mut index: usize) -> Vec<usize> {
        let mut out = vec![0; self.rank()];
        for (slot, &m) in out.iter_mut().zip(&self.orders).rev() {
            *slot = index % m;
            index /= m;
        }
        out
    }

    /// All elements in canonical (lexicographic) order, identity first.
    pub fn elements(&self) -> Result<Vec<GroupElement>> {
        let n = self.check_capacity()?;
        Ok((0..n).map(|i| GroupElement(self.residues_at(i))).collect())
    }

    pub fn add(&self, a: &GroupElement, b: &GroupElement) -> Result<GroupElement> {
        self.check_shape(&a.0)?;
        self.check_shape(&b.0)?;
        Ok(GroupElement(
            a.0.iter()
                .zip(&b.0)
                .zip(&self.orders)
                .map(|((&x, &y), &m)| (x + y) % m)
                .collect(),
        ))
    }

    pub fn neg(&self, a: &GroupElement) -> Result<GroupElement> {
        self.check_shape(&a.0)?;
        Ok(GroupElement(
            a.0.iter()
                .zip(&self.orders)
                .map(|(&x, &m)| (m - x % m) % m)
                .collect(),
        ))
    }

    pub(crate) fn neg_index(&self, mut index: usize) -> usize {
        let (mut out, mut stride) = (0, 1);
        for &m in self.orders.iter().rev() {
            out += ((m - index % m) % m) * stride;
            index /= m;
            stride *= m;
        }
        out
    }

    pub(crate) fn add_index(&self, mut a: usize, mut b: usize) -> usize {
        let (mut out, mut stride) = (0, 1);
        for &m in self.orders.iter().rev() {
            out += ((a % m + b % m) % m) * stride;
            a /= m;
            b /= m;
            stride *= m;
        }
        out
    }

    /// Exact phase of `chi(x)` as a fraction of a full turn, reduced modulo
    /// the group exponent.
    pub fn pairing_phase(&self, chi: &[usize], x: &[usize]) -> Result<Phase> {
        self.check_shape(chi)?;
        self.check_shape(x)?;
        Ok(self.pairing_phase_unchecked(chi, x))
    }

    pub(crate) fn pairing_phase_unchecked(&self, chi: &[usize], x: &[usize]) -> Phase {
        let den = self.exponent;
        let mut num: u128 = 0;
        for ((&c, &v), &m) in chi.iter().zip(x).zip(&self.orders) {
            let m = m as u128;
            let term = ((c as u128 % m) * (v as u128 % m)) % m;
            num = (num + term * (den as u128 / m)) % den as u128;
        }
        Phase {
            numerator: num as u64,
            denominator: den,
        }
    }

    /// `chi(x) = exp(2 pi i sum_j chi_j x_j / m_j)`.
    pub fn char_value(&self, chi: &Character, x: &GroupElement) -> Result<Complex64> {
        Ok(self.pairing_phase(&chi.0, &x.0)?.to_complex())
    }

    /// Least `k >= 1` with `k x = 0`.
    pub fn element_order(&self, x: &GroupElement) -> Result<u64> {
        self.check_shape(&x.0)?;
        Ok(x.0
            .iter()
            .zip(&self.orders)
            .map(|(&r, &m)| (m as u64) / gcd((r % m) as u64, m as u64))
            .fold(1, lcm))
    }

    /// Smallest subgroup containing `gens`.
    pub fn subgroup_from_generators(&self, gens: &[GroupElement]) -> Result<Subgroup> {
        let n = self.check_capacity()?;
        for g in gens {
            self.check_shape(&g.0)?;
        }
        let mut member = vec![false; n];
        member[0] = true;
        let mut members = vec![0usize];
        for g in gens {
            let gi = self.index_unchecked(&g.0);
            if member[gi] {
                continue;
            }
            // <S, g> = S + <g>: add translates by successive multiples of g
            // until a multiple falls back inside S.
            let base = members.clone();
            let mut step = gi;
            while !member[step] {
                for &s in &base {
                    let t = self.add_index(s, step);
                    if !member[t] {
                        member[t] = true;
                        members.push(t);
                    }
                }
                step = self.add_index(step, gi);
            }
        }
        members.sort_unstable();
        Ok(Subgroup {
            orders: self.orders.clone(),
            generators: gens.to_vec(),
            members,
        })
    }

    /// The annihilator `H^perp = { chi : chi(h) = 1 for all h in H }`, as a
    /// subgroup of the dual (same residue model).
    pub fn annihilator(&self, h: &Subgroup) -> Result<Subgroup> {
        let n = self.check_capacity()?;
        if h.orders != self.orders {
            return Err(Error::InvalidSpec(
                "subgroup belongs to a different group".into(),
            ));
        }
        // Triviality on a generating set is equivalent to triviality on H.
        let tests: Vec<Vec<usize>> = if h.generators.is_empty() {
            h.members.iter().map(|&i| self.residues_at(i)).collect()
        } else {
            h.generators.iter().map(|g| g.0.clone()).collect()
        };
        let members: Vec<usize> = (0..n)
            .filter(|&c| {
                let chi = self.residues_at(c);
                tests
                    .iter()
                    .all(|x| self.pairing_phase_unchecked(&chi, x).is_zero())
            })
            .collect();
        let generators = self.greedy_generators(&members);
        Ok(Subgroup {
            orders: self.orders.clone(),
            generators,
            members,
        })
    }

    /// A small generating set for a subgroup given by its (sorted) members.
    fn greedy_generators(&self, members: &[usize]) -> Vec<GroupElement> {
        let n = self.size;
        let mut covered = vec![false; n];
        covered[0] = true;
        let mut span = vec![0usize];
        let mut gens = Vec::new();
        for &m in members {
            if covered[m] {
                continue;
            }
            gens.push(GroupElement(self.residues_at(m)));
            let base = span.clone();
            let mut step = m;
            while !covered[step] {
                for &s in &base {
                    let t = self.add_index(s, step);
                    if !covered[t] {
                        covered[t] = true;
                        span.push(t);
                    }
                }
                step = self.add_index(step, m);
            }
        }
        gens
    }
}

impl fmt::Display for GroupSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("cyclic:")?;
        for (i, m) in self.orders.iter().enumerate() {
            if i > 0 {
                f.write_str("x")?;
            }
            write!(f, "{m}")?;
        }
        write!(f, ";view={};mass={}", self.view, self.mass)
    }
}

impl FromStr for GroupSpec {
    type Err = Error;

    /// Parses `cyclic:m1xm2x...;view=compact|discrete;mass=<decimal>`.
    /// `view` defaults to compact and `mass` to 1.
    fn from_str(s: &str) -> Result<Self> {
        let parse_err = |detail: String| Error::Parse {
            what: "group spec",
            detail,
        };
        let mut parts = s.trim().split(';');
        let head = parts.next().unwrap_or_default().trim();
        let factors = head
            .strip_prefix("cyclic:")
            .ok_or_else(|| parse_err(format!("expected 'cyclic:' prefix in {s:?}")))?;
        let orders = factors
            .split(['x', 'X'])
            .map(|t| {
                t.trim()
                    .parse::<usize>()
                    .map_err(|e| parse_err(format!("bad cyclic order {t:?}: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        let mut view = View::Compact;
        let mut mass = 1.0;
        for kv in parts {
            let kv = kv.trim();
            if kv.is_empty() {
                continue;
            }
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| parse_err(format!("expected key=value, got {kv:?}")))?;
            match k.trim() {
                "view" => view = v.parse()?,
                "mass" => {
                    mass = v
                        .trim()
                        .parse::<f64>()
                        .map_err(|e| parse_err(format!("bad mass {v:?}: {e}")))?
                }
                other => return Err(parse_err(format!("unknown key {other:?}"))),
            }
        }
        GroupSpec::new(orders, view, mass)
    }
}

/// A subgroup, stored with the generators it was built from and its
/// materialized members (canonical indices, sorted).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Subgroup {
    orders: Vec<usize>,
    generators: Vec<GroupElement>,
    members: Vec<usize>,
}

impl Subgroup {
    pub fn size(&self) -> usize {
        self.members.len()
    }

    pub fn generators(&self) -> &[GroupElement] {
        &self.generators
    }

    /// Canonical indices of the members, ascending.
    pub fn indices(&self) -> &[usize] {
        &self.members
    }

    pub fn contains_index(&self, index: usize) -> bool {
        self.members.binary_search(&index).is_ok()
    }

    pub fn elements(&self) -> Vec<GroupElement> {
        self.members
            .iter()
            .map(|&i| {
                let mut idx = i;
                let mut out = vec![0; self.orders.len()];
                for (slot, &m) in out.iter_mut().zip(&self.orders).rev() {
                    *slot = idx % m;
                    idx /= m;
                }
                GroupElement(out)
            })
            .collect()
    }
}
