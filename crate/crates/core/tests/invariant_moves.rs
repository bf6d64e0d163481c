//! Moves that must leave `Z` unchanged, and how `Z` reacts to reversal.

use knotoidal_core::algebra::{antipode, normal_order_mul, DElement};
use knotoidal_core::diagram::{
    fixture, reverse_decomposition, OrientedGaussCode, RotDecomp, Sign, Token, FIXTURE_NAMES,
};
use knotoidal_core::invariant::{evaluate_z, evaluate_z_sequential};
use knotoidal_core::series::Caps;
use proptest::prelude::*;

const CAPS: Caps = Caps::new(1, 3);

fn z(d: &RotDecomp) -> DElement {
    evaluate_z(d, CAPS).element
}

/// Opens a gap of `width` fresh labels after position `gap`
/// (`0..=labels`), shifting later labels up.
fn open_gap(tokens: &[Token], gap: u32, width: u32) -> Vec<Token> {
    let f = |l: u32| if l > gap { l + width } else { l };
    tokens
        .iter()
        .map(|t| match *t {
            Token::Crossing { sign, over, under } => Token::Crossing { sign, over: f(over), under: f(under) },
            Token::Rotation { sign, label } => Token::Rotation { sign, label: f(label) },
        })
        .collect()
}

fn base_tokens(d: &RotDecomp) -> (Vec<Token>, u32) {
    if d.is_trivial() {
        (Vec::new(), 0)
    } else {
        (d.tokens().to_vec(), d.labels())
    }
}

/// A crossing and its inverse, both strands adjacent; `swap` puts the
/// over-strand second.
fn with_r2(d: &RotDecomp, i: u32, j: u32, first: Sign, swap: bool) -> RotDecomp {
    let (tokens, labels) = base_tokens(d);
    let (i, j) = (i.min(j).min(labels), i.max(j).min(labels));
    let tokens = open_gap(&tokens, j, 2);
    let mut tokens = open_gap(&tokens, i, 2);
    let (p, q) = (i + 1, j + 3);
    let (a, b) = if swap { (q, p) } else { (p, q) };
    tokens.push(Token::Crossing { sign: first, over: a, under: b });
    tokens.push(Token::Crossing { sign: first.flip(), over: a + 1, under: b + 1 });
    RotDecomp::new(tokens, labels + 4).unwrap()
}

fn with_rotation_pair(d: &RotDecomp, gap: u32, first: Sign) -> RotDecomp {
    let (tokens, labels) = base_tokens(d);
    let gap = gap.min(labels);
    let mut tokens = open_gap(&tokens, gap, 2);
    tokens.push(Token::Rotation { sign: first, label: gap + 1 });
    tokens.push(Token::Rotation { sign: first.flip(), label: gap + 2 });
    RotDecomp::new(tokens, labels + 2).unwrap()
}

fn decomp_strategy() -> impl Strategy<Value = RotDecomp> {
    (0usize..=3, 0usize..=3)
        .prop_filter("non-empty", |(c, r)| c + r > 0)
        .prop_flat_map(|(crossings, rotations)| {
            let labels = (2 * crossings + rotations) as u32;
            (
                Just((1..=labels).collect::<Vec<u32>>()).prop_shuffle(),
                prop::collection::vec(any::<bool>(), crossings + rotations),
                Just(crossings),
            )
        })
        .prop_map(|(perm, signs, crossings)| {
            let sign = |b: bool| if b { Sign::Plus } else { Sign::Minus };
            let mut tokens = Vec::new();
            let mut it = perm.iter().copied();
            for (k, &s) in signs.iter().enumerate() {
                if k < crossings {
                    let (over, under) = (it.next().unwrap(), it.next().unwrap());
                    tokens.push(Token::Crossing { sign: sign(s), over, under });
                } else {
                    tokens.push(Token::Rotation { sign: sign(s), label: it.next().unwrap() });
                }
            }
            RotDecomp::new(tokens, perm.len() as u32).unwrap()
        })
}

#[test]
fn r2_insertion_on_fixtures() {
    for name in FIXTURE_NAMES {
        let d = fixture(name).unwrap().decomposition;
        let base = z(&d);
        let l = d.labels();
        for (i, j, sign, swap) in [(0, l, Sign::Plus, false), (3, 7, Sign::Minus, true), (l, l, Sign::Plus, true)] {
            assert_eq!(z(&with_r2(&d, i, j, sign, swap)), base, "{name} gap ({i},{j})");
        }
    }
}

#[test]
fn rotation_pair_insertion_on_fixtures() {
    for name in FIXTURE_NAMES {
        let d = fixture(name).unwrap().decomposition;
        let base = z(&d);
        for gap in [0, 4, d.labels()] {
            assert_eq!(z(&with_rotation_pair(&d, gap, Sign::Minus)), base, "{name} gap {gap}");
        }
    }
}

#[test]
fn curl_normalised_seven_has_unit_epsilon_zero_part() {
    // One positive curl per unit of negative writhe; 5_7 has writhe -1.
    let caps = Caps::new(0, 6);
    let curl = RotDecomp::parse("labels 3; R+ 1 3; C- 2").unwrap();
    let seven = fixture("5_7").unwrap().decomposition;
    assert_eq!(seven.writhe(), -1);
    let product = normal_order_mul(&evaluate_z(&seven, caps).element, &evaluate_z(&curl, caps).element).unwrap();
    assert_eq!(product, DElement::one(caps));
}

#[test]
fn curl_is_central() {
    let curl = z(&RotDecomp::parse("labels 3; R+ 1 3; C- 2").unwrap());
    for g in [
        knotoidal_core::algebra::Generator::Y,
        knotoidal_core::algebra::Generator::B,
        knotoidal_core::algebra::Generator::A,
        knotoidal_core::algebra::Generator::X,
    ] {
        let u = DElement::generator(CAPS, g);
        assert_eq!(normal_order_mul(&curl, &u).unwrap(), normal_order_mul(&u, &curl).unwrap(), "{g:?}");
    }
}

#[test]
fn double_reversal_has_the_same_value() {
    for name in FIXTURE_NAMES {
        let d = fixture(name).unwrap().decomposition;
        let rr = reverse_decomposition(&reverse_decomposition(&d));
        assert_eq!(z(&rr), z(&d), "{name}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn reversal_is_the_antipode(d in decomp_strategy()) {
        prop_assert_eq!(z(&reverse_decomposition(&d)), antipode(&z(&d)));
    }

    #[test]
    fn square_of_antipode_fixes_z(d in decomp_strategy()) {
        let v = z(&d);
        prop_assert_eq!(antipode(&antipode(&v)), v);
    }

    #[test]
    fn r2_insertion_is_invisible(
        d in decomp_strategy(),
        i in 0u32..8,
        j in 0u32..8,
        first in any::<bool>(),
        swap in any::<bool>(),
    ) {
        let sign = if first { Sign::Plus } else { Sign::Minus };
        prop_assert_eq!(z(&with_r2(&d, i, j, sign, swap)), z(&d));
    }

    #[test]
    fn sequential_and_parallel_agree(d in decomp_strategy()) {
        prop_assert_eq!(evaluate_z_sequential(&d, CAPS), evaluate_z(&d, CAPS));
    }

    #[test]
    fn decomposition_text_round_trip(d in decomp_strategy()) {
        prop_assert_eq!(RotDecomp::parse(&d.render()).unwrap(), d.clone());
        prop_assert_eq!(RotDecomp::parse(&d.to_string()).unwrap(), d.clone());
        let json = serde_json::to_string(&d).unwrap();
        prop_assert_eq!(serde_json::from_str::<RotDecomp>(&json).unwrap(), d);
    }

    #[test]
    fn gauss_code_round_trip(d in decomp_strategy()) {
        let code = d.gauss_code();
        prop_assert_eq!(code.writhe(), d.writhe());
        if !code.is_empty() {
            prop_assert_eq!(OrientedGaussCode::parse(&code.render()).unwrap(), code.clone());
        }
        let json = serde_json::to_string(&code).unwrap();
        prop_assert_eq!(serde_json::from_str::<OrientedGaussCode>(&json).unwrap(), code);
    }

    #[test]
    fn reversal_keeps_writhe_and_flips_turning(d in decomp_strategy()) {
        let r = reverse_decomposition(&d);
        prop_assert_eq!(r.writhe(), d.writhe());
        prop_assert_eq!(r.rotation_number(), -d.rotation_number());
    }
}
