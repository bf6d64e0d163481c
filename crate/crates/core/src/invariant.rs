//! The universal invariant `Z_𝔻` of a rotational tangle decomposition.
//!
//! Every crossing places `𝓡 = Σ αᵢ ⊗ βᵢ` (or `𝓡⁻¹`) with the first factor on
//! its over-label and the second on its under-label; every rotation places
//! `uv⁻¹` or its inverse. `Z` is the product of the placed elements in
//! ascending label order.
//!
//! The sum over crossing terms is evaluated as a walk over the labels. A
//! state is a partial product together with the term chosen at every crossing
//! that has been entered but not yet left. A crossing is entered at the first
//! of its two labels, where the state splits into one state per term; the
//! scalar coefficient of the term is applied there, so the partial product
//! already carries the full `ħ`-degree of its choices and plain truncation at
//! `N` is exact. Leaving the crossing multiplies in the bare monomial of the
//! other factor, after which states with equal pending choices are summed.

use std::collections::{BTreeMap, HashMap};

use num_rational::BigRational;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::algebra::{r_inverse, r_matrix, rotation_element, DElement, DTensor, Monomial};
use crate::diagram::{RotDecomp, Sign, Slot, Token};
use crate::error::{AlgebraError, InvariantError};
use crate::series::{fmt_rational, parse_rational, Caps, ScalarSeries};

/// `Z_𝔻` of a decomposition, truncated at `caps`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InvariantValue {
    pub element: DElement,
    pub caps: Caps,
    /// SHA-256 of the rendered decomposition, hex encoded.
    pub fingerprint: String,
}

/// The terms of `𝓡^{±1}` split according to which strand is met first.
struct Branches {
    /// `(element on the first label met, monomial on the second)`.
    terms: Vec<(DElement, Monomial)>,
}

impl Branches {
    fn new(tensor: &DTensor, over_first: bool) -> Self {
        let caps = tensor.caps();
        let (first, second) = if over_first { (0, 1) } else { (1, 0) };
        let mut grouped: BTreeMap<Monomial, DElement> = BTreeMap::new();
        for (key, c) in tensor.terms() {
            grouped
                .entry(key[second])
                .or_insert_with(|| DElement::zero(caps))
                .add_term(key[first], c);
        }
        let terms = grouped
            .into_iter()
            .map(|(m, mut el)| {
                el.prune();
                (el, m)
            })
            .filter(|(el, _)| !el.is_zero())
            .collect();
        Branches { terms }
    }
}

type StateKey = Vec<(usize, usize)>;
type States = HashMap<StateKey, DElement>;

/// One step of the walk applied to a single state.
fn step_state(
    key: &StateKey,
    el: &DElement,
    slot: Slot,
    branches: &[Option<Branches>],
    rotations: &HashMap<usize, DElement>,
    caps: Caps,
) -> Vec<(StateKey, DElement)> {
    let token = match slot {
        Slot::Empty => return vec![(key.clone(), el.clone())],
        Slot::Rotation { token } => {
            let next = el.mul_unchecked(&rotations[&token]);
            return if next.is_zero() { vec![] } else { vec![(key.clone(), next)] };
        }
        Slot::Over { token } | Slot::Under { token } => token,
    };
    let br = branches[token].as_ref().expect("crossing has branches");
    match key.binary_search_by_key(&token, |&(t, _)| t) {
        Ok(pos) => {
            let (_, b) = key[pos];
            let m = br.terms[b].1;
            let next = el.mul_unchecked(&DElement::monomial(m, ScalarSeries::one(caps)));
            if next.is_zero() {
                return vec![];
            }
            let mut k = key.clone();
            k.remove(pos);
            vec![(k, next)]
        }
        Err(pos) => {
            let base = el.min_hbar().unwrap_or(u32::MAX);
            let mut out = Vec::new();
            for (b, (first, _)) in br.terms.iter().enumerate() {
                let h = first.min_hbar().unwrap_or(u32::MAX);
                if base.saturating_add(h) > caps.hbar {
                    continue;
                }
                let next = el.mul_unchecked(first);
                if next.is_zero() {
                    continue;
                }
                let mut k = key.clone();
                k.insert(pos, (token, b));
                out.push((k, next));
            }
            out
        }
    }
}

fn merge(into: &mut States, items: impl IntoIterator<Item = (StateKey, DElement)>) {
    for (k, el) in items {
        match into.get_mut(&k) {
            Some(acc) => acc.add_assign_unchecked(&el),
            None => {
                into.insert(k, el);
            }
        }
    }
    into.retain(|_, el| !el.is_zero());
}

fn prepare(
    d: &RotDecomp,
    caps: Caps,
) -> (Vec<Slot>, Vec<Option<Branches>>, HashMap<usize, DElement>) {
    let slots = d.slots();
    let mut first_label: HashMap<usize, Slot> = HashMap::new();
    for s in &slots {
        if let Slot::Over { token } | Slot::Under { token } = *s {
            first_label.entry(token).or_insert(*s);
        }
    }
    let (r, ri) = (r_matrix(caps), r_inverse(caps));
    let mut branches = Vec::with_capacity(d.tokens().len());
    let mut rotations = HashMap::new();
    for (i, t) in d.tokens().iter().enumerate() {
        match *t {
            Token::Crossing { sign, .. } => {
                let over_first = matches!(first_label[&i], Slot::Over { .. });
                let tensor = if sign == Sign::Plus { &r } else { &ri };
                branches.push(Some(Branches::new(tensor, over_first)));
            }
            Token::Rotation { sign, .. } => {
                rotations.insert(i, rotation_element(sign.value(), caps));
                branches.push(None);
            }
        }
    }
    (slots, branches, rotations)
}

fn finish(d: &RotDecomp, caps: Caps, mut states: States) -> InvariantValue {
    let element = states.remove(&Vec::new()).unwrap_or_else(|| DElement::zero(caps));
    debug_assert!(states.is_empty(), "every crossing is left before the head");
    InvariantValue { element, caps, fingerprint: fingerprint(d) }
}

fn initial(caps: Caps) -> States {
    let mut states = States::new();
    states.insert(Vec::new(), DElement::one(caps));
    states
}

/// Evaluates `Z_𝔻(d)`, spreading the states of each step over the rayon pool
/// when the `parallel` feature is enabled.
pub fn evaluate_z(d: &RotDecomp, caps: Caps) -> InvariantValue {
    #[cfg(feature = "parallel")]
    {
        evaluate_z_parallel(d, caps)
    }
    #[cfg(not(feature = "parallel"))]
    {
        evaluate_z_sequential(d, caps)
    }
}

/// Single-threaded evaluation; always available.
pub fn evaluate_z_sequential(d: &RotDecomp, caps: Caps) -> InvariantValue {
    let (slots, branches, rotations) = prepare(d, caps);
    let mut states = initial(caps);
    for slot in slots {
        let mut next = States::new();
        for (k, el) in &states {
            merge(&mut next, step_state(k, el, slot, &branches, &rotations, caps));
        }
        states = next;
    }
    finish(d, caps, states)
}

#[cfg(feature = "parallel")]
pub fn evaluate_z_parallel(d: &RotDecomp, caps: Caps) -> InvariantValue {
    use rayon::prelude::*;

    let (slots, branches, rotations) = prepare(d, caps);
    let mut states = initial(caps);
    for slot in slots {
        let stepped: Vec<Vec<(StateKey, DElement)>> = states
            .par_iter()
            .map(|(k, el)| step_state(k, el, slot, &branches, &rotations, caps))
            .collect();
        let mut next = States::new();
        for items in stepped {
            merge(&mut next, items);
        }
        states = next;
    }
    finish(d, caps, states)
}

/// Checks the decomposition text and evaluates it.
pub fn evaluate_text(text: &str, caps: Caps) -> Result<InvariantValue, InvariantError> {
    let d = RotDecomp::parse(text)?;
    Ok(evaluate_z(&d, caps))
}

pub fn fingerprint(d: &RotDecomp) -> String {
    let digest = Sha256::digest(d.render().as_bytes());
    format!("{digest:x}")
}

/// A coefficient at which two values disagree.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Witness {
    pub monomial: Monomial,
    pub eps: u32,
    pub hbar: u32,
    #[serde(serialize_with = "ser_rational")]
    pub left: BigRational,
    #[serde(serialize_with = "ser_rational")]
    pub right: BigRational,
}

fn ser_rational<S: serde::Serializer>(r: &BigRational, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&fmt_rational(r))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "result", rename_all = "lowercase")]
pub enum Comparison {
    Equal,
    Differ(Witness),
}

impl Comparison {
    pub fn is_equal(&self) -> bool {
        matches!(self, Comparison::Equal)
    }
}

/// Exact comparison. A difference is reported at the smallest
/// `(ε-degree, ħ-degree, total degree, monomial)`.
pub fn compare(a: &InvariantValue, b: &InvariantValue) -> Result<Comparison, InvariantError> {
    if a.caps != b.caps {
        return Err(AlgebraError::CapsMismatch { left: a.caps, right: b.caps }.into());
    }
    let diff = a.element.try_sub(&b.element)?;
    let witness = diff
        .canonical_terms()
        .into_iter()
        .min_by_key(|(m, e, h, _)| (*e, *h, m.degree(), *m));
    Ok(match witness {
        None => Comparison::Equal,
        Some((m, e, h, _)) => {
            let c = |v: &InvariantValue| v.element.coeff(&m).coeff(e, h).clone();
            Comparison::Differ(Witness { monomial: m, eps: e, hbar: h, left: c(a), right: c(b) })
        }
    })
}

/// Compares only the coefficients of `ε^k`.
pub fn compare_at_epsilon(
    a: &InvariantValue,
    b: &InvariantValue,
    k: u32,
) -> Result<Comparison, InvariantError> {
    let pa = epsilon_slice(a, k)?;
    let pb = epsilon_slice(b, k)?;
    Ok(match compare(&pa, &pb)? {
        Comparison::Differ(mut w) => {
            w.eps = k;
            Comparison::Differ(w)
        }
        eq => eq,
    })
}

fn epsilon_slice(v: &InvariantValue, k: u32) -> Result<InvariantValue, InvariantError> {
    Ok(InvariantValue { element: epsilon_coefficient(v, k)?, ..v.clone() })
}

/// The coefficient of `ε^k`, with its series moved to `ε`-degree 0.
pub fn epsilon_coefficient(v: &InvariantValue, k: u32) -> Result<DElement, InvariantError> {
    if k > v.caps.eps {
        return Err(InvariantError::DegreeOutOfRange { k, max: v.caps.eps });
    }
    Ok(v.element.epsilon_part(k))
}

#[derive(Serialize, Deserialize)]
struct JsonTerm {
    monomial: [u32; 4],
    eps: u32,
    hbar: u32,
    coeff: String,
}

#[derive(Serialize, Deserialize)]
struct JsonValue {
    caps: Caps,
    terms: Vec<JsonTerm>,
}

/// `{"caps": {...}, "terms": [{"monomial": [i,j,k,l], "eps", "hbar", "coeff"}]}`
/// in canonical term order.
pub fn element_to_json(el: &DElement) -> Value {
    let terms: Vec<JsonTerm> = el
        .canonical_terms()
        .into_iter()
        .map(|(m, e, h, c)| JsonTerm { monomial: m.exponents(), eps: e, hbar: h, coeff: fmt_rational(&c) })
        .collect();
    json!(JsonValue { caps: el.caps(), terms })
}

pub fn element_from_json(v: &Value) -> Result<DElement, String> {
    let raw: JsonValue = serde_json::from_value(v.clone()).map_err(|e| e.to_string())?;
    let caps = raw.caps;
    let mut terms = Vec::new();
    for t in raw.terms {
        if t.eps > caps.eps || t.hbar > caps.hbar {
            return Err(format!("term degree ({}, {}) exceeds caps {caps}", t.eps, t.hbar));
        }
        let c = parse_rational(&t.coeff).ok_or_else(|| format!("bad coefficient `{}`", t.coeff))?;
        let [y, b, a, x] = t.monomial;
        terms.push((Monomial::new(y, b, a, x), ScalarSeries::monomial(caps, t.eps, t.hbar, c)));
    }
    DElement::from_terms(caps, terms).map_err(|e| e.to_string())
}

impl InvariantValue {
    pub fn to_json(&self) -> Value {
        element_to_json(&self.element)
    }

    pub fn canonical_text(&self) -> String {
        self.element.canonical_text()
    }
}
