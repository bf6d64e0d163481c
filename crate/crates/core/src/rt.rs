//! Reshetikhin–Turaev invariants from explicit representation data.
//!
//! With `R = τ∘(ρ⊗ρ)(𝓡)` stored as a `d² × d²` matrix (row `(i, j)`, column
//! `(k, l)`), a positive crossing contributes `ρ(α)^j_k` on its over-strand and
//! `ρ(β)^i_l` on its under-strand, summed into `R^{ij}_{kl}`. For a negative
//! crossing the matrix inverse of `R` plays the same role with the over-strand
//! reading `(i, l)` and the under-strand `(j, k)`. The value is
//! `Σ ε_a (M_1 ⋯ M_L)^a_g η^g`, contracted along the strand.

use std::collections::HashMap;

use serde_json::{json, Map, Value};

use crate::algebra::{r_matrix, rotation_element, DElement};
use crate::diagram::{RotDecomp, Sign, Slot, Token};
use crate::error::{AlgebraError, RtError};
use crate::invariant::evaluate_z;
use crate::series::{fmt_rational, parse_rational, Caps, ScalarSeries};

/// Dense square matrix over the truncated series ring.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Matrix {
    dim: usize,
    entries: Vec<ScalarSeries>,
}

impl Matrix {
    pub fn zero(dim: usize, caps: Caps) -> Self {
        Matrix { dim, entries: vec![ScalarSeries::zero(caps); dim * dim] }
    }

    pub fn identity(dim: usize, caps: Caps) -> Self {
        let mut m = Self::zero(dim, caps);
        for i in 0..dim {
            m.set(i, i, ScalarSeries::one(caps));
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<ScalarSeries>>) -> Result<Self, RtError> {
        let dim = rows.len();
        if dim == 0 {
            return Err(RtError::DimensionMismatch("empty matrix".into()));
        }
        if rows.iter().any(|r| r.len() != dim) {
            return Err(RtError::DimensionMismatch("matrix is not square".into()));
        }
        let caps = rows[0][0].caps();
        let entries: Vec<ScalarSeries> = rows.into_iter().flatten().collect();
        if let Some(bad) = entries.iter().find(|e| e.caps() != caps) {
            return Err(AlgebraError::CapsMismatch { left: caps, right: bad.caps() }.into());
        }
        Ok(Matrix { dim, entries })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn caps(&self) -> Caps {
        self.entries[0].caps()
    }

    pub fn get(&self, i: usize, j: usize) -> &ScalarSeries {
        &self.entries[i * self.dim + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: ScalarSeries) {
        self.entries[i * self.dim + j] = v;
    }

    pub fn mul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.dim, other.dim, "matrix dimensions");
        let caps = self.caps();
        let n = self.dim;
        let mut out = Matrix::zero(n, caps);
        for i in 0..n {
            for k in 0..n {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..n {
                    out.entries[i * n + j].add_mul_assign(a, other.get(k, j), caps.hbar);
                }
            }
        }
        out
    }

    fn add_scaled(&mut self, other: &Matrix, s: &ScalarSeries) {
        let limit = self.caps().hbar;
        for (a, b) in self.entries.iter_mut().zip(&other.entries) {
            a.add_mul_assign(b, s, limit);
        }
    }

    /// Gauss–Jordan inverse; pivots must have a nonzero constant term.
    pub fn inverse(&self) -> Result<Matrix, RtError> {
        let n = self.dim;
        let caps = self.caps();
        let mut a = self.clone();
        let mut inv = Matrix::identity(n, caps);
        for col in 0..n {
            let pivot = (col..n)
                .find(|&r| !a.get(r, col).constant_term().eq(&num_traits::Zero::zero()))
                .ok_or(RtError::Singular)?;
            if pivot != col {
                for j in 0..n {
                    a.entries.swap(pivot * n + j, col * n + j);
                    inv.entries.swap(pivot * n + j, col * n + j);
                }
            }
            let p_inv = a.get(col, col).invert().map_err(|_| RtError::Singular)?;
            for j in 0..n {
                let v = a.get(col, j).mul_truncated(&p_inv, caps.hbar);
                a.set(col, j, v);
                let v = inv.get(col, j).mul_truncated(&p_inv, caps.hbar);
                inv.set(col, j, v);
            }
            for r in 0..n {
                if r == col || a.get(r, col).is_zero() {
                    continue;
                }
                let f = a.get(r, col).neg();
                for j in 0..n {
                    let mut v = a.get(r, j).clone();
                    v.add_mul_assign(&f, a.get(col, j), caps.hbar);
                    a.set(r, j, v);
                    let mut w = inv.get(r, j).clone();
                    w.add_mul_assign(&f, inv.get(col, j), caps.hbar);
                    inv.set(r, j, w);
                }
            }
        }
        Ok(inv)
    }
}

/// `R = τ∘(ρ⊗ρ)(𝓡)`, `h = ρ(uv⁻¹)` and their inverses.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RepData {
    pub dim: usize,
    pub r: Matrix,
    pub r_inv: Matrix,
    pub h: Matrix,
    pub h_inv: Matrix,
}

impl RepData {
    pub fn new(r: Matrix, h: Matrix) -> Result<Self, RtError> {
        let dim = h.dim();
        if r.dim() != dim * dim {
            return Err(RtError::DimensionMismatch(format!(
                "R is {0}x{0} but h is {1}x{1}",
                r.dim(),
                dim
            )));
        }
        if r.caps() != h.caps() {
            return Err(AlgebraError::CapsMismatch { left: r.caps(), right: h.caps() }.into());
        }
        let r_inv = r.inverse()?;
        let h_inv = h.inverse()?;
        Ok(RepData { dim, r, r_inv, h, h_inv })
    }

    pub fn caps(&self) -> Caps {
        self.h.caps()
    }

    /// Builds `R` and `h` from generator matrices by evaluating `ρ` on `𝓡`
    /// and on the rotation element.
    pub fn from_generators(rho: &GeneratorMatrices) -> Result<Self, RtError> {
        let caps = rho.caps();
        let d = rho.dim();
        let mut r = Matrix::zero(d * d, caps);
        let mut cache = HashMap::new();
        for (key, c) in r_matrix(caps).terms() {
            let alpha = rho.monomial_cached(&key[0], &mut cache);
            let beta = rho.monomial_cached(&key[1], &mut cache);
            // R^{ij}_{kl} += c ρ(α)^j_k ρ(β)^i_l
            for i in 0..d {
                for j in 0..d {
                    for k in 0..d {
                        for l in 0..d {
                            let ab = alpha.get(j, k).mul_truncated(beta.get(i, l), caps.hbar);
                            if ab.is_zero() {
                                continue;
                            }
                            let idx = (i * d + j) * (d * d) + (k * d + l);
                            r.entries[idx].add_mul_assign(&ab, c, caps.hbar);
                        }
                    }
                }
            }
        }
        let h = rho.eval(&rotation_element(1, caps));
        RepData::new(r, h)
    }

    /// Reads `{"dim", "R", "h", "caps"?}`; series are maps from `"e,h"` to
    /// a rational string. `caps` in the file takes precedence over `default`.
    pub fn from_json(v: &Value, default: Caps) -> Result<Self, RtError> {
        let caps = read_caps(v, default)?;
        let dim = v
            .get("dim")
            .and_then(Value::as_u64)
            .ok_or_else(|| RtError::Format("missing `dim`".into()))? as usize;
        let r = matrix_from_json(v.get("R"), caps)?;
        let h = matrix_from_json(v.get("h"), caps)?;
        if h.dim() != dim {
            return Err(RtError::DimensionMismatch(format!("h is {}x{} but dim is {dim}", h.dim(), h.dim())));
        }
        RepData::new(r, h)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "dim": self.dim,
            "caps": self.caps(),
            "R": matrix_to_json(&self.r),
            "h": matrix_to_json(&self.h),
        })
    }
}

/// `η` and `ε` of the state sum.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EndpointVectors {
    pub eta: Vec<ScalarSeries>,
    pub eps: Vec<ScalarSeries>,
}

impl EndpointVectors {
    pub fn from_json(v: &Value, default: Caps) -> Result<Self, RtError> {
        let caps = read_caps(v, default)?;
        let vec = |key: &str| -> Result<Vec<ScalarSeries>, RtError> {
            v.get(key)
                .and_then(Value::as_array)
                .ok_or_else(|| RtError::Format(format!("missing `{key}`")))?
                .iter()
                .map(|s| series_from_json(s, caps))
                .collect()
        };
        Ok(EndpointVectors { eta: vec("eta")?, eps: vec("eps")? })
    }
}

/// `ρ(y), ρ(b), ρ(a), ρ(x)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GeneratorMatrices {
    pub y: Matrix,
    pub b: Matrix,
    pub a: Matrix,
    pub x: Matrix,
}

impl GeneratorMatrices {
    pub fn dim(&self) -> usize {
        self.y.dim()
    }

    pub fn caps(&self) -> Caps {
        self.y.caps()
    }

    fn power(m: &Matrix, n: u32) -> Matrix {
        let mut acc = Matrix::identity(m.dim(), m.caps());
        for _ in 0..n {
            acc = acc.mul(m);
        }
        acc
    }

    fn monomial_cached(
        &self,
        m: &crate::algebra::Monomial,
        cache: &mut HashMap<crate::algebra::Monomial, Matrix>,
    ) -> Matrix {
        cache
            .entry(*m)
            .or_insert_with(|| {
                Self::power(&self.y, m.y)
                    .mul(&Self::power(&self.b, m.b))
                    .mul(&Self::power(&self.a, m.a))
                    .mul(&Self::power(&self.x, m.x))
            })
            .clone()
    }

    /// `ρ(u)` for a PBW-ordered element.
    pub fn eval(&self, u: &DElement) -> Matrix {
        let mut cache = HashMap::new();
        let mut out = Matrix::zero(self.dim(), self.caps());
        for (m, c) in u.terms() {
            out.add_scaled(&self.monomial_cached(m, &mut cache), c);
        }
        out
    }
}

fn check_dims(rep: &RepData, ev: &EndpointVectors) -> Result<(), RtError> {
    if ev.eta.len() != rep.dim || ev.eps.len() != rep.dim {
        return Err(RtError::DimensionMismatch(format!(
            "endpoint vectors have lengths {} and {}, expected {}",
            ev.eta.len(),
            ev.eps.len(),
            rep.dim
        )));
    }
    if let Some(bad) = ev.eta.iter().chain(&ev.eps).find(|s| s.caps() != rep.caps()) {
        return Err(AlgebraError::CapsMismatch { left: rep.caps(), right: bad.caps() }.into());
    }
    Ok(())
}

/// Pending crossing indices `(token, row, col)` plus the open strand index.
type RtKey = (Vec<(usize, usize, usize)>, usize);

/// The state sum, contracted label by label along the strand.
pub fn rt_evaluate(d: &RotDecomp, rep: &RepData, ev: &EndpointVectors) -> Result<ScalarSeries, RtError> {
    check_dims(rep, ev)?;
    let caps = rep.caps();
    let n = rep.dim;
    let mut states: HashMap<RtKey, ScalarSeries> = HashMap::new();
    for (a, e) in ev.eps.iter().enumerate() {
        if !e.is_zero() {
            states.insert((Vec::new(), a), e.clone());
        }
    }
    let add = |map: &mut HashMap<RtKey, ScalarSeries>, k: RtKey, v: ScalarSeries| {
        if v.is_zero() {
            return;
        }
        match map.get_mut(&k) {
            Some(acc) => acc.add_assign_unchecked(&v),
            None => {
                map.insert(k, v);
            }
        }
    };
    for slot in d.slots() {
        let mut next = HashMap::new();
        for ((pending, p), val) in states {
            match slot {
                Slot::Empty => add(&mut next, (pending, p), val),
                Slot::Rotation { token } => {
                    let Token::Rotation { sign, .. } = d.tokens()[token] else { unreachable!() };
                    let m = if sign == Sign::Plus { &rep.h } else { &rep.h_inv };
                    for q in 0..n {
                        let w = val.mul_truncated(m.get(p, q), caps.hbar);
                        add(&mut next, (pending.clone(), q), w);
                    }
                }
                Slot::Over { token } | Slot::Under { token } => {
                    let over_here = matches!(slot, Slot::Over { .. });
                    match pending.iter().position(|&(t, _, _)| t == token) {
                        None => {
                            for q in 0..n {
                                let mut k = pending.clone();
                                k.push((token, p, q));
                                k.sort_unstable();
                                add(&mut next, (k, q), val.clone());
                            }
                        }
                        Some(pos) => {
                            let (_, p0, q0) = pending[pos];
                            let mut k = pending.clone();
                            k.remove(pos);
                            let Token::Crossing { sign, .. } = d.tokens()[token] else { unreachable!() };
                            // (over row, over col, under row, under col)
                            let (or, oc, ur, uc) = if over_here { (p, 0, p0, q0) } else { (p0, q0, p, 0) };
                            for q in 0..n {
                                let (oc, uc) = if over_here { (q, uc) } else { (oc, q) };
                                let w = match sign {
                                    Sign::Plus => rep.r.get(ur * n + or, oc * n + uc),
                                    Sign::Minus => rep.r_inv.get(or * n + ur, uc * n + oc),
                                };
                                if w.is_zero() {
                                    continue;
                                }
                                add(&mut next, (k.clone(), q), val.mul_truncated(w, caps.hbar));
                            }
                        }
                    }
                }
            }
        }
        states = next;
    }
    let mut total = ScalarSeries::zero(caps);
    for ((pending, g), val) in states {
        debug_assert!(pending.is_empty());
        total.add_mul_assign(&val, &ev.eta[g], caps.hbar);
    }
    Ok(total)
}

/// `ε ρ(u) η`.
pub fn contract_element(u: &DElement, rho: &GeneratorMatrices, ev: &EndpointVectors) -> ScalarSeries {
    let m = rho.eval(u);
    let caps = m.caps();
    let mut total = ScalarSeries::zero(caps);
    for a in 0..m.dim() {
        for g in 0..m.dim() {
            let t = ev.eps[a].mul_truncated(m.get(a, g), caps.hbar);
            total.add_mul_assign(&t, &ev.eta[g], caps.hbar);
        }
    }
    total
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Recovery {
    Pass,
    Fail { state_sum: ScalarSeries, recovered: ScalarSeries },
}

/// Compares the state sum with `ε ρ(Z_𝔻(d)) η`.
pub fn recovery_check(
    d: &RotDecomp,
    rep: &RepData,
    rho: &GeneratorMatrices,
    ev: &EndpointVectors,
) -> Result<Recovery, RtError> {
    if rho.dim() != rep.dim {
        return Err(RtError::DimensionMismatch(format!(
            "generator matrices are {0}x{0}, representation has dim {1}",
            rho.dim(),
            rep.dim
        )));
    }
    let state_sum = rt_evaluate(d, rep, ev)?;
    let z = evaluate_z(d, rep.caps());
    let recovered = contract_element(&z.element, rho, ev);
    Ok(if state_sum == recovered {
        Recovery::Pass
    } else {
        Recovery::Fail { state_sum, recovered }
    })
}

fn read_caps(v: &Value, default: Caps) -> Result<Caps, RtError> {
    match v.get("caps") {
        None => Ok(default),
        Some(c) => serde_json::from_value(c.clone()).map_err(|e| RtError::Format(e.to_string())),
    }
}

pub fn series_to_json(s: &ScalarSeries) -> Value {
    let mut m = Map::new();
    for (e, h, c) in s.terms() {
        m.insert(format!("{e},{h}"), Value::String(fmt_rational(c)));
    }
    Value::Object(m)
}

pub fn series_from_json(v: &Value, caps: Caps) -> Result<ScalarSeries, RtError> {
    let bad = |msg: String| RtError::Format(msg);
    if let Some(n) = v.as_i64() {
        return Ok(ScalarSeries::constant(caps, crate::series::rat_int(n)));
    }
    if let Some(s) = v.as_str() {
        let c = parse_rational(s).ok_or_else(|| bad(format!("bad rational `{s}`")))?;
        return Ok(ScalarSeries::constant(caps, c));
    }
    let obj = v.as_object().ok_or_else(|| bad(format!("series must be an object, got {v}")))?;
    let mut s = ScalarSeries::zero(caps);
    for (k, c) in obj {
        let (e, h) = k.split_once(',').ok_or_else(|| bad(format!("bad degree key `{k}`")))?;
        let e: u32 = e.trim().parse().map_err(|_| bad(format!("bad degree key `{k}`")))?;
        let h: u32 = h.trim().parse().map_err(|_| bad(format!("bad degree key `{k}`")))?;
        let c = c
            .as_str()
            .and_then(parse_rational)
            .or_else(|| c.as_i64().map(crate::series::rat_int))
            .ok_or_else(|| bad(format!("bad coefficient {c}")))?;
        if e <= caps.eps && h <= caps.hbar {
            let sum = s.coeff(e, h) + c;
            s.set_coeff(e, h, sum);
        }
    }
    Ok(s)
}

fn matrix_to_json(m: &Matrix) -> Value {
    let rows: Vec<Value> = (0..m.dim())
        .map(|i| Value::Array((0..m.dim()).map(|j| series_to_json(m.get(i, j))).collect()))
        .collect();
    Value::Array(rows)
}

fn matrix_from_json(v: Option<&Value>, caps: Caps) -> Result<Matrix, RtError> {
    let rows = v
        .and_then(Value::as_array)
        .ok_or_else(|| RtError::Format("matrix must be an array of rows".into()))?;
    let rows = rows
        .iter()
        .map(|r| {
            r.as_array()
                .ok_or_else(|| RtError::Format("matrix row must be an array".into()))?
                .iter()
                .map(|s| series_from_json(s, caps))
                .collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<Vec<_>, _>>()?;
    Matrix::from_rows(rows)
}

/// Small representations of 𝔻 used as test instruments.
pub mod toy {
    use super::*;
    use crate::series::rat_int;
    use num_rational::BigRational;

    /// `d = 1`: `x = y = 0`, `a = λ`, `b = -ελ`, so `εa + b` acts as zero.
    pub fn one_dimensional(caps: Caps, lambda: BigRational) -> GeneratorMatrices {
        let scalar = |s: ScalarSeries| Matrix::from_rows(vec![vec![s]]).expect("1x1");
        let lam = ScalarSeries::constant(caps, lambda);
        let b = lam.mul_truncated(&ScalarSeries::epsilon(caps), caps.hbar).neg();
        GeneratorMatrices {
            y: Matrix::zero(1, caps),
            b: scalar(b),
            a: scalar(lam),
            x: Matrix::zero(1, caps),
        }
    }

    /// `d = 2`: `a = diag(λ, λ+1)`, `b = diag(-ε(λ+1), -ελ)`, `x e₁ = e₂`,
    /// `y e₂ = c e₁` with `c = (1 - e^{-εħ})/ħ`.
    pub fn two_dimensional(caps: Caps, lambda: i64) -> GeneratorMatrices {
        let eps = ScalarSeries::epsilon(caps);
        let k = |n: i64| ScalarSeries::constant(caps, rat_int(n));
        let mut a = Matrix::zero(2, caps);
        a.set(0, 0, k(lambda));
        a.set(1, 1, k(lambda + 1));
        let mut b = Matrix::zero(2, caps);
        b.set(0, 0, k(lambda + 1).mul_truncated(&eps, caps.hbar).neg());
        b.set(1, 1, k(lambda).mul_truncated(&eps, caps.hbar).neg());
        let mut x = Matrix::zero(2, caps);
        x.set(1, 0, ScalarSeries::one(caps));
        // (1 - e^{-εħ})/ħ = Σ_{n≥1} (-1)^{n+1} ε^n ħ^{n-1} / n!
        let mut c = ScalarSeries::zero(caps);
        let mut fact = 1i64;
        for n in 1..=caps.eps.min(caps.hbar + 1) {
            fact *= n as i64;
            let sign = if n % 2 == 1 { 1 } else { -1 };
            c.set_coeff(n, n - 1, crate::series::rat(sign, fact));
        }
        let mut y = Matrix::zero(2, caps);
        y.set(0, 1, c);
        GeneratorMatrices { y, b, a, x }
    }

    /// Endpoint vectors with small distinct integer entries.
    pub fn endpoints(dim: usize, caps: Caps) -> EndpointVectors {
        let k = |n: i64| ScalarSeries::constant(caps, rat_int(n));
        EndpointVectors {
            eta: (0..dim).map(|i| k(i as i64 + 2)).collect(),
            eps: (0..dim).map(|i| k(3 - 2 * i as i64)).collect(),
        }
    }
}
