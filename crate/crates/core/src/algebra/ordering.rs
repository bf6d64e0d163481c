//! PBW straightening for products in 𝔻.
//!
//! Every element is handled in the grouped form `Σ y^i P(b, a) x^l` where `P`
//! is a commutative polynomial in `b` and `a`. Moving `b, a` past `y` or `x`
//! is the substitution `S: P(b, a) ↦ P(b - ε, a - 1)`:
//!
//! ```text
//! P y = y (S P)        x P = (S P) x
//! ```
//!
//! and the only nontrivial swap is `x y^p`, tabulated once per caps in
//! [`xy_table`].

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, OnceLock, RwLock};

use num_bigint::BigInt;
use num_rational::BigRational;

use super::{DElement, Monomial};
use crate::series::{rat, Caps, ScalarSeries};

/// `(exponent of b, exponent of a)`.
pub(crate) type BaKey = (u32, u32);

/// Commutative polynomial in `b, a` with series coefficients.
#[derive(Clone, Debug, PartialEq)]
pub(crate) struct BaPoly {
    pub(crate) caps: Caps,
    pub(crate) terms: BTreeMap<BaKey, ScalarSeries>,
}

impl BaPoly {
    pub(crate) fn zero(caps: Caps) -> Self {
        BaPoly { caps, terms: BTreeMap::new() }
    }

    pub(crate) fn one(caps: Caps) -> Self {
        let mut p = Self::zero(caps);
        p.terms.insert((0, 0), ScalarSeries::one(caps));
        p
    }

    pub(crate) fn is_zero(&self) -> bool {
        self.terms.values().all(ScalarSeries::is_zero)
    }

    pub(crate) fn min_hbar(&self) -> Option<u32> {
        self.terms.values().filter_map(ScalarSeries::min_hbar).min()
    }

    pub(crate) fn add_term(&mut self, key: BaKey, c: &ScalarSeries) {
        match self.terms.get_mut(&key) {
            Some(s) => s.add_assign_unchecked(c),
            None => {
                self.terms.insert(key, c.clone());
            }
        }
    }

    pub(crate) fn add_assign(&mut self, other: &BaPoly) {
        for (k, c) in &other.terms {
            self.add_term(*k, c);
        }
    }

    pub(crate) fn prune(&mut self) {
        self.terms.retain(|_, c| !c.is_zero());
    }

    pub(crate) fn mul_series(&self, s: &ScalarSeries, limit: u32) -> BaPoly {
        let mut out = BaPoly::zero(self.caps);
        for (k, c) in &self.terms {
            let prod = c.mul_truncated(s, limit);
            if !prod.is_zero() {
                out.terms.insert(*k, prod);
            }
        }
        out
    }

    /// Product keeping only `ħ`-degrees up to `limit`.
    pub(crate) fn mul(&self, other: &BaPoly, limit: u32) -> BaPoly {
        let mut out = BaPoly::zero(self.caps);
        for (&(j1, k1), c1) in &self.terms {
            let Some(h1) = c1.min_hbar() else { continue };
            if h1 > limit {
                continue;
            }
            for (&(j2, k2), c2) in &other.terms {
                let key = (j1 + j2, k1 + k2);
                let slot = out
                    .terms
                    .entry(key)
                    .or_insert_with(|| ScalarSeries::zero(self.caps));
                slot.add_mul_assign(c1, c2, limit);
            }
        }
        out.prune();
        out
    }

    /// `P(b, a) ↦ P(b - uε, a - u)`.
    pub(crate) fn shift(&self, u: u32) -> BaPoly {
        if u == 0 {
            return self.clone();
        }
        let caps = self.caps;
        let minus_u = BigInt::from(-(u as i64));
        let mut out = BaPoly::zero(caps);
        for (&(j, k), c) in &self.terms {
            for r in 0..=j.min(caps.eps) {
                let cr = c.shift(r, 0);
                if cr.is_zero() {
                    continue;
                }
                let coef_r = BigInt::from(binomial(j, r)) * minus_u.pow(r);
                for s in 0..=k {
                    let coef = &coef_r * BigInt::from(binomial(k, s)) * minus_u.pow(s);
                    out.add_term((j - r, k - s), &cr.scale(&BigRational::from_integer(coef)));
                }
            }
        }
        out.prune();
        out
    }
}

pub(crate) fn binomial(n: u32, k: u32) -> i64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: i64 = 1;
    for i in 0..k {
        acc = acc * (n - i) as i64 / (i + 1) as i64;
    }
    acc
}

pub(crate) fn factorial(n: u32) -> i64 {
    (1..=n as i64).product()
}

/// `W = (1 - e^{-εħa - ħb}) / ħ = Σ_{k≥1} (-1)^{k+1} ħ^{k-1} (εa + b)^k / k!`,
/// with the division by `ħ` carried out on the exponents.
pub(crate) fn xy_commutator_term(caps: Caps) -> BaPoly {
    let mut w = BaPoly::zero(caps);
    for k in 1..=caps.hbar + 1 {
        let sign = if k % 2 == 1 { 1 } else { -1 };
        for r in 0..=k.min(caps.eps) {
            // ε^r a^r b^(k-r) with multiplicity binom(k, r)
            let c = rat(sign * binomial(k, r), factorial(k));
            let s = ScalarSeries::monomial(caps, r, k - 1, c);
            w.add_term((k - r, r), &s);
        }
    }
    w.prune();
    w
}

/// One term `y^u P(b, a) x^v` of a normal-ordered `x^l y^p`.
#[derive(Clone, Debug)]
pub(crate) struct XyTerm {
    pub(crate) y: u32,
    pub(crate) x: u32,
    pub(crate) poly: BaPoly,
}

type XyCache = RwLock<HashMap<(Caps, u32, u32), Arc<Vec<XyTerm>>>>;
type VCache = RwLock<HashMap<(Caps, u32), Arc<BaPoly>>>;

fn xy_cache() -> &'static XyCache {
    static CACHE: OnceLock<XyCache> = OnceLock::new();
    CACHE.get_or_init(Default::default)
}

fn v_cache() -> &'static VCache {
    static CACHE: OnceLock<VCache> = OnceLock::new();
    CACHE.get_or_init(Default::default)
}

/// `V_u = Σ_{j<u} q^{u-1-j} S^j W`, so that `x y^u = q^u y^u x + y^{u-1} V_u`.
fn v_sum(caps: Caps, u: u32) -> Arc<BaPoly> {
    if let Some(v) = v_cache().read().unwrap().get(&(caps, u)) {
        return v.clone();
    }
    let w = xy_commutator_term(caps);
    let mut acc = BaPoly::zero(caps);
    for j in 0..u {
        let q = ScalarSeries::q_power(caps, (u - 1 - j) as i64);
        acc.add_assign(&w.shift(j).mul_series(&q, caps.hbar));
    }
    acc.prune();
    let acc = Arc::new(acc);
    v_cache().write().unwrap().insert((caps, u), acc.clone());
    acc
}

/// Normal form of `x^l y^p`.
pub(crate) fn xy_table(caps: Caps, l: u32, p: u32) -> Arc<Vec<XyTerm>> {
    if let Some(t) = xy_cache().read().unwrap().get(&(caps, l, p)) {
        return t.clone();
    }
    let table = if l == 0 || p == 0 {
        vec![XyTerm { y: p, x: l, poly: BaPoly::one(caps) }]
    } else {
        let prev = xy_table(caps, l - 1, p);
        let mut acc: BTreeMap<(u32, u32), BaPoly> = BTreeMap::new();
        for term in prev.iter() {
            // x · y^u P x^v = q^u y^u (S P) x^(v+1) + y^(u-1) V_u P x^v
            let u = term.y;
            let q = ScalarSeries::q_power(caps, u as i64);
            let moved = term.poly.shift(1).mul_series(&q, caps.hbar);
            acc.entry((u, term.x + 1))
                .or_insert_with(|| BaPoly::zero(caps))
                .add_assign(&moved);
            if u > 0 {
                let swapped = v_sum(caps, u).mul(&term.poly, caps.hbar);
                acc.entry((u - 1, term.x))
                    .or_insert_with(|| BaPoly::zero(caps))
                    .add_assign(&swapped);
            }
        }
        acc.into_iter()
            .filter_map(|((y, x), mut poly)| {
                poly.prune();
                (!poly.is_zero()).then_some(XyTerm { y, x, poly })
            })
            .collect()
    };
    let table = Arc::new(table);
    xy_cache().write().unwrap().insert((caps, l, p), table.clone());
    table
}

/// Splits an element into `(y-exponent, x-exponent) → P(b, a)`.
pub(crate) fn group(el: &DElement) -> BTreeMap<(u32, u32), BaPoly> {
    let mut groups: BTreeMap<(u32, u32), BaPoly> = BTreeMap::new();
    for (m, c) in &el.terms {
        groups
            .entry((m.y, m.x))
            .or_insert_with(|| BaPoly::zero(el.caps))
            .terms
            .insert((m.b, m.a), c.clone());
    }
    groups
}

pub(crate) fn ungroup(caps: Caps, groups: BTreeMap<(u32, u32), BaPoly>) -> DElement {
    let mut terms = BTreeMap::new();
    for ((y, x), poly) in groups {
        for ((b, a), c) in poly.terms {
            if !c.is_zero() {
                terms.insert(Monomial { y, b, a, x }, c);
            }
        }
    }
    DElement { caps, terms }
}

/// Normal-ordered product keeping `ħ`-degrees up to `limit`.
pub(crate) fn mul_limited(lhs: &DElement, rhs: &DElement, limit: u32) -> DElement {
    let caps = lhs.caps;
    let left = group(lhs);
    let right = group(rhs);
    let right_min: Vec<Option<u32>> = right.values().map(BaPoly::min_hbar).collect();
    let mut out: BTreeMap<(u32, u32), BaPoly> = BTreeMap::new();
    let mut right_shifts: HashMap<(u32, u32, u32), BaPoly> = HashMap::new();
    for (&(i, l), pa) in &left {
        let Some(ha) = pa.min_hbar() else { continue };
        let mut left_shifts: HashMap<u32, BaPoly> = HashMap::new();
        for ((&(p, r), pb), hb) in right.iter().zip(&right_min) {
            let Some(hb) = *hb else { continue };
            if ha + hb > limit {
                continue;
            }
            for term in xy_table(caps, l, p).iter() {
                let Some(hq) = term.poly.min_hbar() else { continue };
                if ha + hb + hq > limit {
                    continue;
                }
                let sa = left_shifts.entry(term.y).or_insert_with(|| pa.shift(term.y));
                let sb = right_shifts
                    .entry((p, r, term.x))
                    .or_insert_with(|| pb.shift(term.x));
                let prod = sa.mul(&term.poly, limit).mul(sb, limit);
                if prod.is_zero() {
                    continue;
                }
                out.entry((i + term.y, term.x + r))
                    .or_insert_with(|| BaPoly::zero(caps))
                    .add_assign(&prod);
            }
        }
    }
    for poly in out.values_mut() {
        poly.prune();
    }
    ungroup(caps, out)
}
