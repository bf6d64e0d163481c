//! The algebra 𝔻 over `Q[ε]⟦ħ⟧`, truncated at fixed caps.
//!
//! Elements are stored in the PBW basis `y^i b^j a^k x^l` with
//! `y ≺ b ≺ a ≺ x`. Multiplication straightens products using
//!
//! ```text
//! xy = q yx + (1 - e^{-εħa - ħb})/ħ      q = e^{εħ}
//! [a,x] = x   [b,x] = εx   [a,y] = -y   [b,y] = -εy   [a,b] = 0
//! ```

use std::collections::BTreeMap;
use std::fmt;

use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::error::AlgebraError;
use crate::series::{fmt_rational, push_power, Caps, ScalarSeries};

mod hopf;
pub(crate) mod ordering;
mod tensor;

pub use hopf::{antipode, r_inverse, r_matrix, rotation_element};
pub use tensor::DTensor;

/// Exponents of the ordered word `y^y b^b a^a x^x`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Monomial {
    pub y: u32,
    pub b: u32,
    pub a: u32,
    pub x: u32,
}

impl Monomial {
    pub const UNIT: Monomial = Monomial { y: 0, b: 0, a: 0, x: 0 };

    pub const fn new(y: u32, b: u32, a: u32, x: u32) -> Self {
        Monomial { y, b, a, x }
    }

    pub fn degree(&self) -> u32 {
        self.y + self.b + self.a + self.x
    }

    pub fn exponents(&self) -> [u32; 4] {
        [self.y, self.b, self.a, self.x]
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        push_power(&mut parts, "y", self.y);
        push_power(&mut parts, "b", self.b);
        push_power(&mut parts, "a", self.a);
        push_power(&mut parts, "x", self.x);
        if parts.is_empty() {
            write!(f, "1")
        } else {
            write!(f, "{}", parts.join("*"))
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Generator {
    Y,
    B,
    A,
    X,
}

impl Generator {
    pub fn monomial(self) -> Monomial {
        match self {
            Generator::Y => Monomial::new(1, 0, 0, 0),
            Generator::B => Monomial::new(0, 1, 0, 0),
            Generator::A => Monomial::new(0, 0, 1, 0),
            Generator::X => Monomial::new(0, 0, 0, 1),
        }
    }
}

/// A truncated element of 𝔻.
#[derive(Clone, PartialEq, Eq)]
pub struct DElement {
    pub(crate) caps: Caps,
    pub(crate) terms: BTreeMap<Monomial, ScalarSeries>,
}

impl DElement {
    pub fn zero(caps: Caps) -> Self {
        DElement { caps, terms: BTreeMap::new() }
    }

    pub fn one(caps: Caps) -> Self {
        Self::scalar(ScalarSeries::one(caps))
    }

    pub fn scalar(s: ScalarSeries) -> Self {
        Self::monomial(Monomial::UNIT, s)
    }

    pub fn monomial(m: Monomial, coeff: ScalarSeries) -> Self {
        let mut el = Self::zero(coeff.caps());
        if !coeff.is_zero() {
            el.terms.insert(m, coeff);
        }
        el
    }

    pub fn generator(caps: Caps, g: Generator) -> Self {
        Self::monomial(g.monomial(), ScalarSeries::one(caps))
    }

    /// Builds an element from `(monomial, coefficient)` pairs, summing repeats.
    pub fn from_terms<I>(caps: Caps, terms: I) -> Result<Self, AlgebraError>
    where
        I: IntoIterator<Item = (Monomial, ScalarSeries)>,
    {
        let mut el = Self::zero(caps);
        for (m, c) in terms {
            if c.caps() != caps {
                return Err(AlgebraError::CapsMismatch { left: caps, right: c.caps() });
            }
            el.add_term(m, &c);
        }
        el.prune();
        Ok(el)
    }

    pub fn caps(&self) -> Caps {
        self.caps
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &ScalarSeries)> {
        self.terms.iter()
    }

    pub fn coeff(&self, m: &Monomial) -> ScalarSeries {
        self.terms.get(m).cloned().unwrap_or_else(|| ScalarSeries::zero(self.caps))
    }

    pub fn min_hbar(&self) -> Option<u32> {
        self.terms.values().filter_map(ScalarSeries::min_hbar).min()
    }

    pub(crate) fn add_term(&mut self, m: Monomial, c: &ScalarSeries) {
        match self.terms.get_mut(&m) {
            Some(s) => s.add_assign_unchecked(c),
            None => {
                self.terms.insert(m, c.clone());
            }
        }
    }

    pub(crate) fn prune(&mut self) {
        self.terms.retain(|_, c| !c.is_zero());
    }

    fn check(&self, other: &Self) -> Result<(), AlgebraError> {
        if self.caps != other.caps {
            return Err(AlgebraError::CapsMismatch { left: self.caps, right: other.caps });
        }
        Ok(())
    }

    pub(crate) fn add_assign_unchecked(&mut self, other: &Self) {
        for (m, c) in &other.terms {
            self.add_term(*m, c);
        }
        self.prune();
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
        out.add_assign_unchecked(&other.neg());
        Ok(out)
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self, AlgebraError> {
        normal_order_mul(self, other)
    }

    pub(crate) fn mul_unchecked(&self, other: &Self) -> Self {
        ordering::mul_limited(self, other, self.caps.hbar)
    }

    pub fn neg(&self) -> Self {
        DElement {
            caps: self.caps,
            terms: self.terms.iter().map(|(m, c)| (*m, c.neg())).collect(),
        }
    }

    pub fn scale(&self, r: &BigRational) -> Self {
        let mut out = DElement {
            caps: self.caps,
            terms: self.terms.iter().map(|(m, c)| (*m, c.scale(r))).collect(),
        };
        out.prune();
        out
    }

    pub fn mul_series(&self, s: &ScalarSeries) -> Result<Self, AlgebraError> {
        if s.caps() != self.caps {
            return Err(AlgebraError::CapsMismatch { left: self.caps, right: s.caps() });
        }
        Ok(self.mul_series_limited(s, self.caps.hbar))
    }

    pub(crate) fn mul_series_limited(&self, s: &ScalarSeries, limit: u32) -> Self {
        let mut out = DElement {
            caps: self.caps,
            terms: self
                .terms
                .iter()
                .map(|(m, c)| (*m, c.mul_truncated(s, limit)))
                .collect(),
        };
        out.prune();
        out
    }

    /// The coefficient of `ε^k`, as an element whose series live in `ε`-degree 0.
    pub fn epsilon_part(&self, k: u32) -> Self {
        let mut out = DElement::zero(self.caps);
        if k > self.caps.eps {
            return out;
        }
        for (m, c) in &self.terms {
            let mut s = ScalarSeries::zero(self.caps);
            for h in 0..=self.caps.hbar {
                s.set_coeff(0, h, c.coeff(k, h).clone());
            }
            if !s.is_zero() {
                out.terms.insert(*m, s);
            }
        }
        out
    }

    /// Re-expresses the element with different caps, dropping terms above them.
    pub fn recap(&self, caps: Caps) -> Self {
        let mut out = DElement {
            caps,
            terms: self.terms.iter().map(|(m, c)| (*m, c.recap(caps))).collect(),
        };
        out.prune();
        out
    }

    /// Scalar terms sorted by (total degree, monomial, ε-degree, ħ-degree).
    pub fn canonical_terms(&self) -> Vec<(Monomial, u32, u32, BigRational)> {
        let mut out: Vec<_> = self
            .terms
            .iter()
            .flat_map(|(m, c)| c.terms().map(move |(e, h, r)| (*m, e, h, r.clone())))
            .collect();
        out.sort_by(|l, r| {
            (l.0.degree(), l.0, l.1, l.2).cmp(&(r.0.degree(), r.0, r.1, r.2))
        });
        out
    }

    /// One term per line: `coeff eps^e hbar^h monomial`. The zero element
    /// renders as `0`.
    pub fn canonical_text(&self) -> String {
        let terms = self.canonical_terms();
        if terms.is_empty() {
            return "0\n".to_string();
        }
        let mut s = String::new();
        for (m, e, h, c) in terms {
            let mut parts = vec![fmt_rational(&c)];
            push_power(&mut parts, "eps", e);
            push_power(&mut parts, "hbar", h);
            if m != Monomial::UNIT {
                parts.push(m.to_string());
            }
            s.push_str(&parts.join("*"));
            s.push('\n');
        }
        s
    }
}

impl fmt::Display for DElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (m, c) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            if *m == Monomial::UNIT {
                write!(f, "({c})")?;
            } else if c.is_one() {
                write!(f, "{m}")?;
            } else {
                write!(f, "({c})*{m}")?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for DElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "DElement[{}]({})", self.caps, self)
    }
}

/// The product `u · v` written back in PBW normal order.
pub fn normal_order_mul(u: &DElement, v: &DElement) -> Result<DElement, AlgebraError> {
    u.check(v)?;
    Ok(u.mul_unchecked(v))
}
