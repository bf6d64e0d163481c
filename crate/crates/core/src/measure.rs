//! Knot-measure estimation for open space curves.
//!
//! A curve is projected along sampled directions; each projection becomes a
//! signed Gauss code plus a rotational decomposition. Codes are reduced by
//! R1/R2 removals and tallied exactly.

use std::collections::{BTreeMap, HashMap};
use std::f64::consts::{PI, TAU};
use std::path::Path;

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
#[cfg(feature = "parallel")]
use rayon::prelude::*;
use serde::Serialize;

use crate::algebra::DElement;
use crate::diagram::{Biframing, OrientedGaussCode, Pass, RotDecomp, Sign, Token};
use crate::error::{DiagramError, MeasureError};
use crate::invariant::{element_to_json, evaluate_z};
use crate::series::Caps;

pub type Vec3 = [f64; 3];
type Vec2 = [f64; 2];

/// The class name used for a code with no crossings left.
pub const TRIVIAL_CLASS: &str = "trivial";

/// An overhand-knot arc: 32 samples of a trefoil parametrization with a
/// short gap cut out.
pub const OPEN_TREFOIL: &str = include_str!("../fixtures/open_trefoil.xyz");

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OpenCurve3D {
    points: Vec<Vec3>,
}

impl OpenCurve3D {
    pub fn new(points: Vec<Vec3>) -> Result<Self, MeasureError> {
        if points.len() < 2 {
            return Err(MeasureError::TooFewPoints(points.len()));
        }
        if let Some(i) = points.windows(2).position(|w| w[0] == w[1]) {
            return Err(MeasureError::DuplicateConsecutivePoint(i + 1, i + 2));
        }
        Ok(OpenCurve3D { points })
    }

    /// One `x y z` triple per line; blank lines and `#` comments are skipped.
    pub fn parse(text: &str) -> Result<Self, MeasureError> {
        let mut points = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |msg: String| MeasureError::ParseError { line: i + 1, msg };
            let vals: Vec<f64> = line
                .split_whitespace()
                .map(|t| t.parse::<f64>().map_err(|_| err(format!("not a number: `{t}`"))))
                .collect::<Result<_, _>>()?;
            match vals.as_slice() {
                &[x, y, z] if vals.iter().all(|v| v.is_finite()) => points.push([x, y, z]),
                &[_, _, _] => return Err(err("non-finite coordinate".into())),
                _ => return Err(err(format!("expected 3 coordinates, found {}", vals.len()))),
            }
        }
        Self::new(points)
    }

    pub fn points(&self) -> &[Vec3] {
        &self.points
    }

    pub fn map(&self, f: impl Fn(Vec3) -> Vec3) -> Result<Self, MeasureError> {
        Self::new(self.points.iter().map(|&p| f(p)).collect())
    }
}

pub fn load_curve(path: impl AsRef<Path>) -> Result<OpenCurve3D, MeasureError> {
    OpenCurve3D::parse(&std::fs::read_to_string(path)?)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProjectionResult {
    pub direction: Vec3,
    pub code: OrientedGaussCode,
    pub planar: Vec<Vec2>,
    pub decomp: RotDecomp,
    pub biframing: Biframing,
}

/// Why a direction was rejected.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Degenerate {
    OverlappingSegments,
    EndpointNearStrand,
    CrossingNearVertex,
    TripleCrossing,
    StrandsTouch,
    Cusp,
    AmbiguousTurning,
}

fn dot3(a: Vec3, b: Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn cross3(a: Vec3, b: Vec3) -> Vec3 {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn normalize3(a: Vec3) -> Vec3 {
    let n = dot3(a, a).sqrt();
    [a[0] / n, a[1] / n, a[2] / n]
}

fn sub2(a: Vec2, b: Vec2) -> Vec2 {
    [a[0] - b[0], a[1] - b[1]]
}

fn cross2(a: Vec2, b: Vec2) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

fn dot2(a: Vec2, b: Vec2) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

fn norm2(a: Vec2) -> f64 {
    dot2(a, a).sqrt()
}

/// Signed angle from `a` to `b` in `(-π, π]`.
fn angle_between(a: Vec2, b: Vec2) -> f64 {
    cross2(a, b).atan2(dot2(a, b))
}

/// Reduces an angle into `(-π, π]`.
fn wrap(theta: f64) -> f64 {
    let r = theta.rem_euclid(TAU);
    if r > PI {
        r - TAU
    } else {
        r
    }
}

fn point_segment_distance(p: Vec2, a: Vec2, b: Vec2) -> f64 {
    let ab = sub2(b, a);
    let t = (dot2(sub2(p, a), ab) / dot2(ab, ab)).clamp(0.0, 1.0);
    norm2(sub2(p, [a[0] + t * ab[0], a[1] + t * ab[1]]))
}

/// Right-handed basis `(e₁, e₂)` of the plane orthogonal to `v`, `e₁ × e₂ = v`.
fn plane_basis(v: Vec3) -> (Vec3, Vec3) {
    let axis = if v[0].abs() <= v[1].abs() && v[0].abs() <= v[2].abs() {
        [1.0, 0.0, 0.0]
    } else if v[1].abs() <= v[2].abs() {
        [0.0, 1.0, 0.0]
    } else {
        [0.0, 0.0, 1.0]
    };
    let e1 = normalize3(cross3(axis, v));
    (e1, cross3(v, e1))
}

struct Event {
    /// Position along the curve: segment index plus parameter.
    at: (usize, f64),
    crossing: usize,
    over: bool,
}

/// Projects along `v` (viewer at `+v`, larger `v`-height is over).
pub fn project(c: &OpenCurve3D, v: Vec3, tol: f64) -> Result<ProjectionResult, Degenerate> {
    assert!((dot3(v, v).sqrt() - 1.0).abs() <= 1e-12, "projection direction must be a unit vector");
    let (e1, e2) = plane_basis(v);
    let pts = c.points();
    let planar: Vec<Vec2> = pts.iter().map(|&p| [dot3(p, e1), dot3(p, e2)]).collect();
    let height: Vec<f64> = pts.iter().map(|&p| dot3(p, v)).collect();
    let nseg = planar.len() - 1;
    let dirs: Vec<Vec2> = (0..nseg).map(|i| sub2(planar[i + 1], planar[i])).collect();
    if dirs.iter().any(|d| norm2(*d) < tol) {
        return Err(Degenerate::Cusp);
    }

    // Accumulated tangent angle of every segment.
    let mut theta = Vec::with_capacity(nseg);
    theta.push(dirs[0][1].atan2(dirs[0][0]));
    for i in 1..nseg {
        let turn = angle_between(dirs[i - 1], dirs[i]);
        if PI - turn.abs() < tol {
            return Err(Degenerate::Cusp);
        }
        theta.push(theta[i - 1] + turn);
    }

    let first = planar[0];
    let last = planar[nseg];
    for j in 0..nseg {
        if j >= 1 && point_segment_distance(first, planar[j], planar[j + 1]) < tol {
            return Err(Degenerate::EndpointNearStrand);
        }
        if j + 1 < nseg && point_segment_distance(last, planar[j], planar[j + 1]) < tol {
            return Err(Degenerate::EndpointNearStrand);
        }
    }

    // (point, over segment, under segment)
    let mut crossings: Vec<(Vec2, usize, usize)> = Vec::new();
    let mut events = Vec::new();
    for i in 0..nseg {
        for j in i + 2..nseg {
            let (r, s) = (dirs[i], dirs[j]);
            let (lr, ls) = (norm2(r), norm2(s));
            let denom = cross2(r, s);
            let qp = sub2(planar[j], planar[i]);
            if denom.abs() <= tol * lr * ls {
                let close = [
                    point_segment_distance(planar[j], planar[i], planar[i + 1]),
                    point_segment_distance(planar[j + 1], planar[i], planar[i + 1]),
                    point_segment_distance(planar[i], planar[j], planar[j + 1]),
                    point_segment_distance(planar[i + 1], planar[j], planar[j + 1]),
                ];
                if close.iter().any(|&d| d < tol) {
                    return Err(Degenerate::OverlappingSegments);
                }
                continue;
            }
            let t = cross2(qp, s) / denom;
            let u = cross2(qp, r) / denom;
            let (tl, ul) = (tol / lr, tol / ls);
            if t < -tl || t > 1.0 + tl || u < -ul || u > 1.0 + ul {
                continue;
            }
            if t < tl || t > 1.0 - tl || u < ul || u > 1.0 - ul {
                return Err(Degenerate::CrossingNearVertex);
            }
            let p = [planar[i][0] + t * r[0], planar[i][1] + t * r[1]];
            let hi = height[i] + t * (height[i + 1] - height[i]);
            let hj = height[j] + u * (height[j + 1] - height[j]);
            if (hi - hj).abs() < tol {
                return Err(Degenerate::StrandsTouch);
            }
            if crossings.iter().any(|(q, _, _)| norm2(sub2(*q, p)) < tol) {
                return Err(Degenerate::TripleCrossing);
            }
            let id = crossings.len();
            let (over, under) = if hi > hj { (i, j) } else { (j, i) };
            crossings.push((p, over, under));
            events.push(Event { at: (i, t), crossing: id, over: hi > hj });
            events.push(Event { at: (j, u), crossing: id, over: hj > hi });
        }
    }
    events.sort_by(|a, b| a.at.partial_cmp(&b.at).expect("finite parameters"));

    // Rotate each crossing so its bisector points up; `up` is π/2.
    let up = PI / 2.0;
    let unit = |d: Vec2| {
        let n = norm2(d);
        [d[0] / n, d[1] / n]
    };
    let rot: Vec<f64> = crossings
        .iter()
        .map(|&(_, o, u)| {
            let (a, b) = (unit(dirs[o]), unit(dirs[u]));
            let bis = [a[0] + b[0], a[1] + b[1]];
            wrap(up - bis[1].atan2(bis[0]))
        })
        .collect();
    // Upright lifts at leg, each pass, and head.
    let mut lifts = Vec::with_capacity(events.len() + 2);
    let leg_phi = theta[0] + wrap(up - theta[0]);
    lifts.push(leg_phi);
    for e in &events {
        let phi = theta[e.at.0] + rot[e.crossing];
        lifts.push(phi - wrap(phi - up));
    }
    let head_phi = theta[nseg - 1] + wrap(up - theta[nseg - 1]);
    lifts.push(head_phi);

    let guard = tol * 1e3;
    let mut tokens = Vec::new();
    let mut label = 0u32;
    let mut over_label = vec![0u32; crossings.len()];
    let mut under_label = vec![0u32; crossings.len()];
    for (k, w) in lifts.windows(2).enumerate() {
        let turns = (w[1] - w[0]) / TAU;
        let rounded = turns.round();
        if ((turns - turns.floor()) - 0.5).abs() < guard {
            return Err(Degenerate::AmbiguousTurning);
        }
        let sign = if rounded > 0.0 { Sign::Plus } else { Sign::Minus };
        for _ in 0..rounded.abs() as u32 {
            label += 1;
            tokens.push(Token::Rotation { sign, label });
        }
        if let Some(e) = events.get(k) {
            label += 1;
            if e.over {
                over_label[e.crossing] = label;
            } else {
                under_label[e.crossing] = label;
            }
        }
    }
    for (id, &(_, o, u)) in crossings.iter().enumerate() {
        let sign = if cross2(dirs[o], dirs[u]) > 0.0 { Sign::Plus } else { Sign::Minus };
        tokens.push(Token::Crossing { sign, over: over_label[id], under: under_label[id] });
    }
    let decomp = if tokens.is_empty() {
        RotDecomp::trivial()
    } else {
        RotDecomp::new(tokens, label).expect("labels are assigned contiguously")
    };
    let code = decomp.gauss_code();
    let biframing = Biframing { framing: code.writhe(), coframing: coframing(&planar) };
    Ok(ProjectionResult { direction: v, code, planar, decomp, biframing })
}

/// `n₀ - n₁`, each winding closed up by the shortest turn back to its start.
fn coframing(planar: &[Vec2]) -> i32 {
    let n = planar.len() - 1;
    let winding = |centre: Vec2, range: std::ops::Range<usize>| -> i32 {
        let vecs: Vec<Vec2> = range.map(|k| sub2(planar[k], centre)).collect();
        let swept: f64 = vecs.windows(2).map(|w| angle_between(w[0], w[1])).sum();
        let close = angle_between(*vecs.last().unwrap(), vecs[0]);
        ((swept + close) / TAU).round() as i32
    };
    let n0 = winding(planar[0], 1..n + 1);
    let n1 = winding(planar[n], 0..n);
    n0 - n1
}

/// Removes R1 kinks and R2 bigons until neither applies; crossings are then
/// renumbered by first appearance.
pub fn simplify_gauss(code: &OrientedGaussCode) -> OrientedGaussCode {
    let mut passes: Vec<Pass> = code.passes().to_vec();
    let mut signs = code.signs().clone();
    'outer: loop {
        for i in 0..passes.len().saturating_sub(1) {
            let (a, b) = (passes[i], passes[i + 1]);
            if a.crossing == b.crossing {
                passes.drain(i..i + 2);
                signs.remove(&a.crossing);
                continue 'outer;
            }
            if a.role != b.role || signs[&a.crossing] == signs[&b.crossing] {
                continue;
            }
            let other = |c: u32, skip: usize| {
                (0..passes.len()).find(|&k| k != skip && passes[k].crossing == c).expect("two passes")
            };
            let (ja, jb) = (other(a.crossing, i), other(b.crossing, i + 1));
            if ja.abs_diff(jb) == 1 {
                let mut gone = [i, i + 1, ja, jb];
                gone.sort_unstable();
                for k in gone.into_iter().rev() {
                    passes.remove(k);
                }
                signs.remove(&a.crossing);
                signs.remove(&b.crossing);
                continue 'outer;
            }
        }
        break;
    }
    OrientedGaussCode::new(passes, signs).expect("removals keep the code valid").canonical()
}

/// The class label of a code: its simplified canonical rendering.
pub fn class_of(code: &OrientedGaussCode) -> String {
    let s = simplify_gauss(code);
    if s.is_empty() {
        TRIVIAL_CLASS.to_string()
    } else {
        s.render()
    }
}

/// Opens a closed Gauss code at the gap after pass `arc` (the last gap joins
/// the final pass to the first).
pub fn knot_to_knotoid(knot_code: &OrientedGaussCode, arc: usize) -> Result<OrientedGaussCode, DiagramError> {
    let passes = knot_code.passes();
    if passes.is_empty() {
        return Ok(OrientedGaussCode::empty());
    }
    if arc >= passes.len() {
        return Err(DiagramError::ArcOutOfRange { arc, gaps: passes.len() });
    }
    let mut opened = passes[arc + 1..].to_vec();
    opened.extend_from_slice(&passes[..=arc]);
    Ok(OrientedGaussCode::new(opened, knot_code.signs().clone())?.canonical())
}

/// The statistic averaged over sampled projections.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Phi {
    Classes,
    /// Class tallies plus the mean `ε¹` part of `Z` at these caps.
    ZMean(Caps),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MeasureEstimate {
    pub samples: usize,
    pub seed: u64,
    pub accepted: usize,
    pub rejected: usize,
    pub class_counts: BTreeMap<String, u64>,
    pub class_freq: BTreeMap<String, f64>,
    #[serde(serialize_with = "ser_mean")]
    pub invariant_mean: Option<DElement>,
}

fn ser_mean<S: serde::Serializer>(m: &Option<DElement>, s: S) -> Result<S::Ok, S::Error> {
    m.as_ref().map(element_to_json).serialize(s)
}

impl MeasureEstimate {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("estimate serializes")
    }

    /// `class,count,frequency` rows in class order.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("class,count,frequency\n");
        for (class, count) in &self.class_counts {
            s.push_str(&format!("\"{class}\",{count},{}\n", self.class_freq[class]));
        }
        s
    }
}

/// Direction `index` of the stream for `seed`: uniform on the sphere.
pub fn sample_direction(seed: u64, index: u64) -> Vec3 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    let z: f64 = rng.gen_range(-1.0..=1.0);
    let phi: f64 = rng.gen_range(0.0..TAU);
    let r = (1.0 - z * z).max(0.0).sqrt();
    [r * phi.cos(), r * phi.sin(), z]
}

pub fn sample_directions(n: usize, seed: u64) -> Vec<Vec3> {
    (0..n as u64).map(|i| sample_direction(seed, i)).collect()
}

fn map_items<T: Sync, R: Send>(items: &[T], f: impl Fn(&T) -> R + Sync + Send) -> Vec<R> {
    #[cfg(feature = "parallel")]
    {
        items.par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.iter().map(f).collect()
    }
}

pub fn estimate_measure(
    c: &OpenCurve3D,
    n: usize,
    seed: u64,
    tol: f64,
    phi: Phi,
) -> Result<MeasureEstimate, MeasureError> {
    estimate_with_directions(c, &sample_directions(n, seed), seed, tol, phi)
}

/// The estimator over an explicit list of unit directions.
pub fn estimate_with_directions(
    c: &OpenCurve3D,
    directions: &[Vec3],
    seed: u64,
    tol: f64,
    phi: Phi,
) -> Result<MeasureEstimate, MeasureError> {
    if directions.is_empty() {
        return Err(MeasureError::EmptyEstimate);
    }
    let results = map_items(directions, |&v| project(c, v, tol).ok());
    let accepted: Vec<&ProjectionResult> = results.iter().flatten().collect();
    if accepted.is_empty() {
        return Err(MeasureError::AllSamplesDegenerate);
    }
    let mut class_counts: BTreeMap<String, u64> = BTreeMap::new();
    for p in &accepted {
        *class_counts.entry(class_of(&p.code)).or_default() += 1;
    }
    let total = accepted.len() as f64;
    let class_freq = class_counts.iter().map(|(k, &n)| (k.clone(), n as f64 / total)).collect();

    let invariant_mean = match phi {
        Phi::Classes => None,
        Phi::ZMean(caps) => {
            let unique: BTreeMap<String, &RotDecomp> =
                accepted.iter().map(|p| (p.decomp.render(), &p.decomp)).collect();
            let keys: Vec<(&String, &&RotDecomp)> = unique.iter().collect();
            let values = map_items(&keys, |(_, d)| evaluate_z(d, caps).element.epsilon_part(1));
            let table: HashMap<&String, DElement> = keys.iter().map(|(k, _)| *k).zip(values).collect();
            let mut sum = DElement::zero(caps);
            for p in &accepted {
                sum = sum.try_add(&table[&p.decomp.render()]).expect("same caps");
            }
            Some(sum.scale(&BigRational::new(BigInt::from(1), BigInt::from(accepted.len()))))
        }
    };
    Ok(MeasureEstimate {
        samples: directions.len(),
        seed,
        accepted: accepted.len(),
        rejected: directions.len() - accepted.len(),
        class_counts,
        class_freq,
        invariant_mean,
    })
}

/// Most frequent class; ties go to the lexicographically least name.
pub fn dominant_knotoid(e: &MeasureEstimate) -> Result<String, MeasureError> {
    e.class_counts
        .iter()
        .max_by(|a, b| a.1.cmp(b.1).then_with(|| b.0.cmp(a.0)))
        .map(|(k, _)| k.clone())
        .ok_or(MeasureError::EmptyEstimate)
}
