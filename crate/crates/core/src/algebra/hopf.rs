use std::collections::HashMap;
use std::sync::{Arc, OnceLock, RwLock};

use super::ordering::{binomial, factorial};
use super::{DElement, DTensor, Generator, Monomial};
use crate::series::{q_factorial, rat, rat_int, Caps, ScalarSeries};

type TensorCache = RwLock<HashMap<Caps, Arc<DTensor>>>;

fn cached(cache: &'static OnceLock<TensorCache>, caps: Caps, build: fn(Caps) -> DTensor) -> DTensor {
    let cache = cache.get_or_init(Default::default);
    if let Some(t) = cache.read().unwrap().get(&caps) {
        return (**t).clone();
    }
    let t = Arc::new(build(caps));
    cache.write().unwrap().insert(caps, t.clone());
    (*t).clone()
}

/// `𝓡 = Σ_{m+n≤N} ħ^{m+n} / ([m]_q! n!) · y^m b^n ⊗ a^n x^m`.
pub fn r_matrix(caps: Caps) -> DTensor {
    static CACHE: OnceLock<TensorCache> = OnceLock::new();
    cached(&CACHE, caps, build_r)
}

fn build_r(caps: Caps) -> DTensor {
    let mut r = DTensor::zero(caps, 2);
    for m in 0..=caps.hbar {
        let inv_qf = q_factorial(m, caps).invert().expect("q-factorial has constant term m!");
        for n in 0..=caps.hbar - m {
            let c = ScalarSeries::monomial(caps, 0, m + n, rat(1, factorial(n)))
                .mul_truncated(&inv_qf, caps.hbar);
            r.add_term(vec![Monomial::new(m, n, 0, 0), Monomial::new(0, 0, n, m)], &c);
        }
    }
    r.prune();
    r
}

/// `𝓡⁻¹` as the Neumann series `Σ_k (1 - 𝓡)^k`, exact since `1 - 𝓡 = O(ħ)`.
pub fn r_inverse(caps: Caps) -> DTensor {
    static CACHE: OnceLock<TensorCache> = OnceLock::new();
    cached(&CACHE, caps, build_r_inverse)
}

fn build_r_inverse(caps: Caps) -> DTensor {
    let one = DTensor::one(caps, 2);
    let d = one.try_sub(&r_matrix(caps)).expect("same caps");
    let mut acc = one.clone();
    let mut power = one;
    for _ in 0..caps.hbar {
        power = power.try_mul(&d).expect("same caps");
        if power.is_zero() {
            break;
        }
        acc = acc.try_add(&power).expect("same caps");
    }
    acc
}

/// `exp(-sign · ½ħ(εa + b))`: `sign = +1` is the counter-clockwise rotation
/// `uv⁻¹`, `sign = -1` its inverse.
pub fn rotation_element(sign: i32, caps: Caps) -> DElement {
    assert!(sign == 1 || sign == -1, "rotation sign must be ±1");
    let mut el = DElement::zero(caps);
    for k in 0..=caps.hbar {
        // (-sign/2)^k / k!
        let num = if sign == 1 && k % 2 == 1 { -1 } else { 1 };
        let base = rat(num, factorial(k)) / rat_int(1i64 << k);
        for r in 0..=k.min(caps.eps) {
            let c = ScalarSeries::monomial(caps, r, k, base.clone() * rat_int(binomial(k, r)));
            el.add_term(Monomial::new(0, k - r, r, 0), &c);
        }
    }
    el.prune();
    el
}

fn exp_of_generator(caps: Caps, g: Generator, eps_deg: u32) -> DElement {
    // Σ_n (ε^e ħ)^n g^n / n!
    let mut el = DElement::zero(caps);
    for n in 0..=caps.hbar {
        let m = match g {
            Generator::B => Monomial::new(0, n, 0, 0),
            Generator::A => Monomial::new(0, 0, n, 0),
            _ => unreachable!("only used for the commuting generators"),
        };
        el.add_term(m, &ScalarSeries::monomial(caps, eps_deg * n, n, rat(1, factorial(n))));
    }
    el.prune();
    el
}

struct AntipodeTables {
    s_y: Vec<DElement>,
    s_b: Vec<DElement>,
    s_a: Vec<DElement>,
    s_x: Vec<DElement>,
}

impl AntipodeTables {
    fn new(caps: Caps) -> Self {
        let neg = |g| DElement::generator(caps, g).neg();
        // S(y) = -y e^{ħb},  S(x) = -x e^{εħa}
        let s_y = neg(Generator::Y).mul_unchecked(&exp_of_generator(caps, Generator::B, 0));
        let s_x = neg(Generator::X).mul_unchecked(&exp_of_generator(caps, Generator::A, 1));
        AntipodeTables {
            s_y: vec![DElement::one(caps), s_y],
            s_b: vec![DElement::one(caps), neg(Generator::B)],
            s_a: vec![DElement::one(caps), neg(Generator::A)],
            s_x: vec![DElement::one(caps), s_x],
        }
    }

    fn power(table: &mut Vec<DElement>, n: u32) -> &DElement {
        while table.len() <= n as usize {
            let next = table.last().unwrap().mul_unchecked(&table[1]);
            table.push(next);
        }
        &table[n as usize]
    }

    /// `S(y^i b^j a^k x^l) = S(x)^l S(a)^k S(b)^j S(y)^i`.
    fn image(&mut self, m: &Monomial) -> DElement {
        let sx = Self::power(&mut self.s_x, m.x).clone();
        let sa = Self::power(&mut self.s_a, m.a).clone();
        let sb = Self::power(&mut self.s_b, m.b).clone();
        let sy = Self::power(&mut self.s_y, m.y).clone();
        sx.mul_unchecked(&sa).mul_unchecked(&sb).mul_unchecked(&sy)
    }
}

/// The antipode, extended from its generator values as an anti-homomorphism.
pub fn antipode(u: &DElement) -> DElement {
    let caps = u.caps;
    let mut tables = AntipodeTables::new(caps);
    let mut out = DElement::zero(caps);
    for (m, c) in &u.terms {
        let image = tables.image(m).mul_series_limited(c, caps.hbar);
        out.add_assign_unchecked(&image);
    }
    out
}
