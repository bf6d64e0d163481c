//! Truncated bivariate power series in `ε` and `ħ` with exact rational
//! coefficients.
//!
//! A [`ScalarSeries`] stores every coefficient `ε^e ħ^h` with `e ≤ K` and
//! `h ≤ N` densely. Both variables are nilpotent modulo the caps, so a series
//! with nonzero constant term is a unit and one with zero constant term can be
//! exponentiated.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::AlgebraError;

/// Truncation orders: terms with `ε`-degree above `eps` or `ħ`-degree above
/// `hbar` are dropped.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Caps {
    pub eps: u32,
    pub hbar: u32,
}

impl Caps {
    pub const fn new(eps: u32, hbar: u32) -> Self {
        Caps { eps, hbar }
    }

    fn len(self) -> usize {
        (self.eps as usize + 1) * (self.hbar as usize + 1)
    }

    #[inline]
    fn index(self, e: u32, h: u32) -> usize {
        e as usize * (self.hbar as usize + 1) + h as usize
    }
}

impl Default for Caps {
    fn default() -> Self {
        Caps::new(1, 6)
    }
}

impl fmt::Display for Caps {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(eps<={}, hbar<={})", self.eps, self.hbar)
    }
}

pub(crate) fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub(crate) fn rat_int(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// An element of `Q[ε]⟦ħ⟧ / (ε^{K+1}, ħ^{N+1})`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct ScalarSeries {
    caps: Caps,
    coeffs: Vec<BigRational>,
}

impl ScalarSeries {
    pub fn zero(caps: Caps) -> Self {
        ScalarSeries { caps, coeffs: vec![BigRational::zero(); caps.len()] }
    }

    pub fn one(caps: Caps) -> Self {
        Self::constant(caps, BigRational::one())
    }

    pub fn constant(caps: Caps, c: BigRational) -> Self {
        Self::monomial(caps, 0, 0, c)
    }

    /// `c · ε^e ħ^h`, or zero when the degree exceeds the caps.
    pub fn monomial(caps: Caps, e: u32, h: u32, c: BigRational) -> Self {
        let mut s = Self::zero(caps);
        if e <= caps.eps && h <= caps.hbar {
            s.coeffs[caps.index(e, h)] = c;
        }
        s
    }

    pub fn epsilon(caps: Caps) -> Self {
        Self::monomial(caps, 1, 0, BigRational::one())
    }

    pub fn hbar(caps: Caps) -> Self {
        Self::monomial(caps, 0, 1, BigRational::one())
    }

    /// `q^k = e^{kεħ}`.
    pub fn q_power(caps: Caps, k: i64) -> Self {
        let arg = Self::monomial(caps, 1, 1, rat_int(k));
        arg.exp_nilpotent()
    }

    pub fn caps(&self) -> Caps {
        self.caps
    }

    pub fn coeff(&self, e: u32, h: u32) -> &BigRational {
        &self.coeffs[self.caps.index(e, h)]
    }

    pub fn set_coeff(&mut self, e: u32, h: u32, c: BigRational) {
        let idx = self.caps.index(e, h);
        self.coeffs[idx] = c;
    }

    pub fn constant_term(&self) -> &BigRational {
        &self.coeffs[0]
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    pub fn is_one(&self) -> bool {
        self.coeffs[0].is_one() && self.coeffs[1..].iter().all(Zero::is_zero)
    }

    /// Nonzero coefficients as `(ε-degree, ħ-degree, coefficient)`, ordered by
    /// `ε` then `ħ`.
    pub fn terms(&self) -> impl Iterator<Item = (u32, u32, &BigRational)> + '_ {
        let width = self.caps.hbar + 1;
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(move |(i, c)| (i as u32 / width, i as u32 % width, c))
    }

    /// Lowest `ħ`-degree carrying a nonzero coefficient.
    pub fn min_hbar(&self) -> Option<u32> {
        self.terms().map(|(_, h, _)| h).min()
    }

    fn check(&self, other: &Self) -> Result<(), AlgebraError> {
        if self.caps != other.caps {
            return Err(AlgebraError::CapsMismatch { left: self.caps, right: other.caps });
        }
        Ok(())
    }

    pub fn try_add(&self, other: &Self) -> Result<Self, AlgebraError> {
        self.check(other)?;
        let mut out = self.clone();
        out.add_assign_unchecked(other);
        Ok(out)
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self, AlgebraError> {
        self.check(other)?;
        let mut out = self.clone();
        out.sub_assign_unchecked(other);
        Ok(out)
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self, AlgebraError> {
        self.check(other)?;
        Ok(self.mul_truncated(other, self.caps.hbar))
    }

    pub(crate) fn add_assign_unchecked(&mut self, other: &Self) {
        debug_assert_eq!(self.caps, other.caps);
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            if !b.is_zero() {
                *a += b;
            }
        }
    }

    pub(crate) fn sub_assign_unchecked(&mut self, other: &Self) {
        debug_assert_eq!(self.caps, other.caps);
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            if !b.is_zero() {
                *a -= b;
            }
        }
    }

    /// `self += other * factor`, keeping only `ħ`-degrees up to `limit`.
    pub(crate) fn add_mul_assign(&mut self, a: &Self, b: &Self, limit: u32) {
        debug_assert_eq!(self.caps, a.caps);
        debug_assert_eq!(a.caps, b.caps);
        let caps = self.caps;
        let limit = limit.min(caps.hbar);
        for (e1, h1, c1) in a.terms() {
            if h1 > limit {
                continue;
            }
            for (e2, h2, c2) in b.terms() {
                let (e, h) = (e1 + e2, h1 + h2);
                if e > caps.eps || h > limit {
                    continue;
                }
                self.coeffs[caps.index(e, h)] += c1 * c2;
            }
        }
    }

    pub(crate) fn mul_truncated(&self, other: &Self, limit: u32) -> Self {
        let mut out = Self::zero(self.caps);
        out.add_mul_assign(self, other, limit);
        out
    }

    pub fn neg(&self) -> Self {
        ScalarSeries { caps: self.caps, coeffs: self.coeffs.iter().map(|c| -c).collect() }
    }

    pub fn scale(&self, r: &BigRational) -> Self {
        ScalarSeries { caps: self.caps, coeffs: self.coeffs.iter().map(|c| c * r).collect() }
    }

    /// Multiplies by `ε^de ħ^dh`, dropping what falls past the caps.
    pub(crate) fn shift(&self, de: u32, dh: u32) -> Self {
        let mut out = Self::zero(self.caps);
        for (e, h, c) in self.terms() {
            if e + de <= self.caps.eps && h + dh <= self.caps.hbar {
                out.coeffs[self.caps.index(e + de, h + dh)] = c.clone();
            }
        }
        out
    }

    /// Re-expresses the series under other caps, truncating or zero-padding.
    pub(crate) fn recap(&self, caps: Caps) -> Self {
        let mut out = Self::zero(caps);
        for (e, h, c) in self.terms() {
            if e <= caps.eps && h <= caps.hbar {
                out.coeffs[caps.index(e, h)] = c.clone();
            }
        }
        out
    }

    fn nilpotent_part(&self) -> Self {
        let mut t = self.clone();
        t.coeffs[0] = BigRational::zero();
        t
    }

    /// Nilpotency bound: `t^(K+N+1) = 0` for any `t` without constant term.
    fn nil_order(&self) -> u32 {
        self.caps.eps + self.caps.hbar + 1
    }

    pub fn invert(&self) -> Result<Self, AlgebraError> {
        let c0 = self.constant_term().clone();
        if c0.is_zero() {
            return Err(AlgebraError::NotInvertible);
        }
        let inv_c0 = c0.recip();
        // 1/(c0 (1 + t)) with t = rest / c0
        let t = self.nilpotent_part().scale(&inv_c0);
        let minus_t = t.neg();
        let mut acc = Self::one(self.caps);
        let mut power = Self::one(self.caps);
        for _ in 1..self.nil_order() {
            power = power.mul_truncated(&minus_t, self.caps.hbar);
            if power.is_zero() {
                break;
            }
            acc.add_assign_unchecked(&power);
        }
        Ok(acc.scale(&inv_c0))
    }

    /// `exp` of a series with zero constant term.
    pub fn exp(&self) -> Result<Self, AlgebraError> {
        if !self.constant_term().is_zero() {
            return Err(AlgebraError::ExpDomain);
        }
        Ok(self.exp_nilpotent())
    }

    fn exp_nilpotent(&self) -> Self {
        let mut acc = Self::one(self.caps);
        let mut term = Self::one(self.caps);
        for k in 1..self.nil_order() {
            term = term.mul_truncated(self, self.caps.hbar).scale(&rat(1, k as i64));
            if term.is_zero() {
                break;
            }
            acc.add_assign_unchecked(&term);
        }
        acc
    }

    /// Square root of a series with constant term 1, via the binomial series.
    pub fn sqrt(&self) -> Result<Self, AlgebraError> {
        if !self.constant_term().is_one() {
            return Err(AlgebraError::SqrtDomain);
        }
        let t = self.nilpotent_part();
        let mut acc = Self::one(self.caps);
        let mut power = Self::one(self.caps);
        let mut binom = BigRational::one();
        let half = rat(1, 2);
        for k in 1..self.nil_order() {
            // binom(1/2, k) = binom(1/2, k-1) * (1/2 - k + 1) / k
            binom = binom * (&half - rat_int(k as i64 - 1)) / rat_int(k as i64);
            power = power.mul_truncated(&t, self.caps.hbar);
            if power.is_zero() {
                break;
            }
            acc.add_assign_unchecked(&power.scale(&binom));
        }
        Ok(acc)
    }
}

/// The q-factorial `[m]_q! = Π_{k=1}^m (1 - q^k)/(1 - q)` with `q = e^{εħ}`.
///
/// Each factor is the finite sum `1 + q + … + q^{k-1}`, so no division by the
/// non-invertible `1 - q` is needed.
pub fn q_factorial(m: u32, caps: Caps) -> ScalarSeries {
    let mut acc = ScalarSeries::one(caps);
    for k in 1..=m {
        let mut q_number = ScalarSeries::zero(caps);
        for j in 0..k {
            q_number.add_assign_unchecked(&ScalarSeries::q_power(caps, j as i64));
        }
        acc = acc.mul_truncated(&q_number, caps.hbar);
    }
    acc
}

pub(crate) fn fmt_rational(r: &BigRational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub(crate) fn parse_rational(s: &str) -> Option<BigRational> {
    let s = s.trim();
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().ok()?;
            let d: BigInt = d.trim().parse().ok()?;
            if d.is_zero() {
                return None;
            }
            Some(BigRational::new(n, d))
        }
        None => s.parse::<BigInt>().ok().map(BigRational::from_integer),
    }
}

impl fmt::Display for ScalarSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (e, h, c) in self.terms() {
            let body = match (e, h) {
                (0, 0) => fmt_rational(&c.abs()),
                _ => {
                    let mut parts = Vec::new();
                    if !c.abs().is_one() {
                        parts.push(fmt_rational(&c.abs()));
                    }
                    push_power(&mut parts, "eps", e);
                    push_power(&mut parts, "hbar", h);
                    parts.join("*")
                }
            };
            let sign = if c.is_negative() { "-" } else { "+" };
            if first {
                if c.is_negative() {
                    write!(f, "-")?;
                }
                write!(f, "{body}")?;
                first = false;
            } else {
                write!(f, " {sign} {body}")?;
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

impl fmt::Debug for ScalarSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ScalarSeries[{}]({})", self.caps, self)
    }
}

pub(crate) fn push_power(parts: &mut Vec<String>, var: &str, k: u32) {
    match k {
        0 => {}
        1 => parts.push(var.to_string()),
        _ => parts.push(format!("{var}^{k}")),
    }
}
