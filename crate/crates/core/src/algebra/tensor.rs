use std::collections::{BTreeMap, HashMap};
use std::fmt;

use super::{DElement, Monomial};
use crate::error::AlgebraError;
use crate::series::{Caps, ScalarSeries};

/// A truncated element of `𝔻^{⊗n}`; `n = 2` for `𝓡` and `𝓡⁻¹`.
#[derive(Clone, PartialEq, Eq)]
pub struct DTensor {
    pub(crate) caps: Caps,
    pub(crate) arity: usize,
    pub(crate) terms: BTreeMap<Vec<Monomial>, ScalarSeries>,
}

impl DTensor {
    pub fn zero(caps: Caps, arity: usize) -> Self {
        DTensor { caps, arity, terms: BTreeMap::new() }
    }

    pub fn one(caps: Caps, arity: usize) -> Self {
        let mut t = Self::zero(caps, arity);
        t.terms.insert(vec![Monomial::UNIT; arity], ScalarSeries::one(caps));
        t
    }

    /// `u₁ ⊗ u₂ ⊗ …`.
    pub fn pure(factors: &[DElement]) -> Result<Self, AlgebraError> {
        let caps = factors.first().map(|f| f.caps).unwrap_or_default();
        if let Some(bad) = factors.iter().find(|f| f.caps != caps) {
            return Err(AlgebraError::CapsMismatch { left: caps, right: bad.caps });
        }
        let mut out = Self::zero(caps, factors.len());
        let mut key = Vec::with_capacity(factors.len());
        expand(&mut out, factors, &mut key, ScalarSeries::one(caps), caps.hbar);
        out.prune();
        Ok(out)
    }

    pub fn caps(&self) -> Caps {
        self.caps
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[Monomial], &ScalarSeries)> {
        self.terms.iter().map(|(k, c)| (k.as_slice(), c))
    }

    pub fn coeff(&self, key: &[Monomial]) -> ScalarSeries {
        self.terms.get(key).cloned().unwrap_or_else(|| ScalarSeries::zero(self.caps))
    }

    pub(crate) fn add_term(&mut self, key: Vec<Monomial>, c: &ScalarSeries) {
        match self.terms.get_mut(&key) {
            Some(s) => s.add_assign_unchecked(c),
            None => {
                self.terms.insert(key, c.clone());
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
        assert_eq!(self.arity, other.arity, "tensor arity mismatch");
        Ok(())
    }

    pub fn try_add(&self, other: &Self) -> Result<Self, AlgebraError> {
        self.check(other)?;
        let mut out = self.clone();
        for (k, c) in &other.terms {
            out.add_term(k.clone(), c);
        }
        out.prune();
        Ok(out)
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self, AlgebraError> {
        self.try_add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        DTensor {
            caps: self.caps,
            arity: self.arity,
            terms: self.terms.iter().map(|(k, c)| (k.clone(), c.neg())).collect(),
        }
    }

    /// Factorwise normal-ordered product.
    pub fn try_mul(&self, other: &Self) -> Result<Self, AlgebraError> {
        self.check(other)?;
        let caps = self.caps;
        let limit = caps.hbar;
        let mut cache: HashMap<(Monomial, Monomial), DElement> = HashMap::new();
        let mut out = Self::zero(caps, self.arity);
        for (k1, c1) in &self.terms {
            let Some(h1) = c1.min_hbar() else { continue };
            for (k2, c2) in &other.terms {
                let Some(h2) = c2.min_hbar() else { continue };
                if h1 + h2 > limit {
                    continue;
                }
                let coeff = c1.mul_truncated(c2, limit);
                if coeff.is_zero() {
                    continue;
                }
                let factors: Vec<DElement> = k1
                    .iter()
                    .zip(k2)
                    .map(|(m1, m2)| {
                        cache
                            .entry((*m1, *m2))
                            .or_insert_with(|| {
                                let one = ScalarSeries::one(caps);
                                DElement::monomial(*m1, one.clone())
                                    .mul_unchecked(&DElement::monomial(*m2, one))
                            })
                            .clone()
                    })
                    .collect();
                let mut key = Vec::with_capacity(self.arity);
                expand(&mut out, &factors, &mut key, coeff, limit);
            }
        }
        out.prune();
        Ok(out)
    }

    /// Places the factors of `self` at `positions` of an `arity`-fold tensor,
    /// filling the rest with units.
    pub fn embed(&self, arity: usize, positions: &[usize]) -> Self {
        assert_eq!(positions.len(), self.arity, "one position per factor");
        let mut out = Self::zero(self.caps, arity);
        for (k, c) in &self.terms {
            let mut key = vec![Monomial::UNIT; arity];
            for (m, &p) in k.iter().zip(positions) {
                key[p] = *m;
            }
            out.add_term(key, c);
        }
        out.prune();
        out
    }

    /// Applies a linear map to factor `i`, given by its values on monomials.
    pub fn map_factor<F>(&self, i: usize, f: F) -> Self
    where
        F: Fn(&DElement) -> DElement,
    {
        let caps = self.caps;
        let mut cache: HashMap<Monomial, DElement> = HashMap::new();
        let mut out = Self::zero(caps, self.arity);
        for (k, c) in &self.terms {
            let image = cache
                .entry(k[i])
                .or_insert_with(|| f(&DElement::monomial(k[i], ScalarSeries::one(caps))));
            for (m, ci) in &image.terms {
                let mut key = k.clone();
                key[i] = *m;
                out.add_term(key, &c.mul_truncated(ci, caps.hbar));
            }
        }
        out.prune();
        out
    }
}

fn expand(
    out: &mut DTensor,
    factors: &[DElement],
    key: &mut Vec<Monomial>,
    coeff: ScalarSeries,
    limit: u32,
) {
    let Some((first, rest)) = factors.split_first() else {
        out.add_term(key.clone(), &coeff);
        return;
    };
    for (m, c) in &first.terms {
        let next = coeff.mul_truncated(c, limit);
        if next.is_zero() {
            continue;
        }
        key.push(*m);
        expand(out, rest, key, next, limit);
        key.pop();
    }
}

impl fmt::Debug for DTensor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "DTensor[{}; {}](", self.caps, self.arity)?;
        for (i, (k, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            let parts: Vec<String> = k.iter().map(|m| m.to_string()).collect();
            write!(f, "({c}) {}", parts.join(" ⊗ "))?;
        }
        write!(f, ")")
    }
}
