//! Knotoid diagrams as oriented Gauss codes and as rotational tangle
//! decompositions, plus the built-in fixtures.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::DiagramError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "i8", try_from = "i8")]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn value(self) -> i32 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }

    pub fn flip(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Sign::Plus => '+',
            Sign::Minus => '-',
        }
    }

    fn from_symbol(c: &str) -> Option<Sign> {
        match c {
            "+" => Some(Sign::Plus),
            "-" => Some(Sign::Minus),
            _ => None,
        }
    }
}

impl From<Sign> for i8 {
    fn from(s: Sign) -> i8 {
        s.value() as i8
    }
}

impl TryFrom<i8> for Sign {
    type Error = String;

    fn try_from(v: i8) -> Result<Self, Self::Error> {
        match v {
            1 => Ok(Sign::Plus),
            -1 => Ok(Sign::Minus),
            _ => Err(format!("sign must be 1 or -1, got {v}")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Over,
    Under,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Pass {
    pub crossing: u32,
    pub role: Role,
}

/// Passes from leg to head plus one sign per crossing.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawGaussCode")]
pub struct OrientedGaussCode {
    passes: Vec<Pass>,
    signs: BTreeMap<u32, Sign>,
}

#[derive(Deserialize)]
struct RawGaussCode {
    passes: Vec<Pass>,
    signs: BTreeMap<u32, Sign>,
}

impl TryFrom<RawGaussCode> for OrientedGaussCode {
    type Error = DiagramError;

    fn try_from(raw: RawGaussCode) -> Result<Self, Self::Error> {
        OrientedGaussCode::new(raw.passes, raw.signs)
    }
}

impl OrientedGaussCode {
    pub fn new(passes: Vec<Pass>, signs: BTreeMap<u32, Sign>) -> Result<Self, DiagramError> {
        let mut seen: BTreeMap<u32, (u32, u32)> = BTreeMap::new();
        for p in &passes {
            let slot = seen.entry(p.crossing).or_default();
            match p.role {
                Role::Over => slot.0 += 1,
                Role::Under => slot.1 += 1,
            }
        }
        if let Some((&id, _)) = seen.iter().find(|(_, &(o, u))| o != 1 || u != 1) {
            return Err(DiagramError::CrossingCountMismatch(id));
        }
        let ids: BTreeSet<u32> = seen.keys().copied().collect();
        let signed: BTreeSet<u32> = signs.keys().copied().collect();
        if ids != signed {
            return Err(DiagramError::SignCountMismatch { expected: ids.len(), found: signs.len() });
        }
        Ok(OrientedGaussCode { passes, signs })
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn passes(&self) -> &[Pass] {
        &self.passes
    }

    pub fn signs(&self) -> &BTreeMap<u32, Sign> {
        &self.signs
    }

    pub fn crossing_count(&self) -> usize {
        self.signs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.passes.is_empty()
    }

    /// Parses the tabulated format: signed crossing ids (negative for an
    /// under-pass) followed by one `+`/`-` per crossing in increasing id order.
    pub fn parse(text: &str) -> Result<Self, DiagramError> {
        let mut passes = Vec::new();
        let mut sign_list = Vec::new();
        for tok in text.split_whitespace() {
            if let Some(s) = Sign::from_symbol(tok) {
                sign_list.push(s);
                continue;
            }
            if !sign_list.is_empty() {
                return Err(DiagramError::MalformedToken(tok.to_string()));
            }
            let v: i64 = tok
                .parse()
                .map_err(|_| DiagramError::MalformedToken(tok.to_string()))?;
            let id = u32::try_from(v.unsigned_abs())
                .ok()
                .filter(|&id| id > 0)
                .ok_or_else(|| DiagramError::MalformedToken(tok.to_string()))?;
            let role = if v < 0 { Role::Under } else { Role::Over };
            passes.push(Pass { crossing: id, role });
        }
        let ids: BTreeSet<u32> = passes.iter().map(|p| p.crossing).collect();
        for &id in &ids {
            let count = passes.iter().filter(|p| p.crossing == id).count();
            let overs = passes
                .iter()
                .filter(|p| p.crossing == id && p.role == Role::Over)
                .count();
            if count != 2 || overs != 1 {
                return Err(DiagramError::CrossingCountMismatch(id));
            }
        }
        if ids.len() != sign_list.len() {
            return Err(DiagramError::SignCountMismatch {
                expected: ids.len(),
                found: sign_list.len(),
            });
        }
        let signs = ids.into_iter().zip(sign_list).collect();
        Ok(OrientedGaussCode { passes, signs })
    }

    pub fn render(&self) -> String {
        let mut parts: Vec<String> = self
            .passes
            .iter()
            .map(|p| match p.role {
                Role::Over => p.crossing.to_string(),
                Role::Under => format!("-{}", p.crossing),
            })
            .collect();
        parts.extend(self.signs.values().map(|s| s.symbol().to_string()));
        parts.join(" ")
    }

    /// Sum of crossing signs, i.e. the framing.
    pub fn writhe(&self) -> i32 {
        self.signs.values().map(|s| s.value()).sum()
    }

    /// The code read from head to leg with every over/under role swapped.
    pub fn reversed_mirror_roles(&self) -> Self {
        let passes = self
            .passes
            .iter()
            .rev()
            .map(|p| Pass {
                crossing: p.crossing,
                role: match p.role {
                    Role::Over => Role::Under,
                    Role::Under => Role::Over,
                },
            })
            .collect();
        OrientedGaussCode { passes, signs: self.signs.clone() }
    }

    /// Relabels crossings 1, 2, … in order of first appearance.
    pub fn canonical(&self) -> Self {
        let mut map = BTreeMap::new();
        for p in &self.passes {
            let next = map.len() as u32 + 1;
            map.entry(p.crossing).or_insert(next);
        }
        let passes = self
            .passes
            .iter()
            .map(|p| Pass { crossing: map[&p.crossing], role: p.role })
            .collect();
        let signs = self.signs.iter().map(|(id, s)| (map[id], *s)).collect();
        OrientedGaussCode { passes, signs }
    }
}

impl fmt::Display for OrientedGaussCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Token {
    /// `R±_{over,under}`: both strands pointing up.
    Crossing { sign: Sign, over: u32, under: u32 },
    /// `C±_label`: a full counter-clockwise (`+`) or clockwise (`-`) turn.
    Rotation { sign: Sign, label: u32 },
}

impl Token {
    pub fn labels(&self) -> Vec<u32> {
        match *self {
            Token::Crossing { over, under, .. } => vec![over, under],
            Token::Rotation { label, .. } => vec![label],
        }
    }

    fn parse(text: &str) -> Result<Token, DiagramError> {
        let bad = || DiagramError::MalformedToken(text.to_string());
        let fields: Vec<&str> = text.split_whitespace().collect();
        let label = |s: &str| s.parse::<u32>().map_err(|_| bad());
        match fields.as_slice() {
            [head, i, j] if head.len() == 2 && head.starts_with('R') => {
                let sign = Sign::from_symbol(&head[1..]).ok_or_else(bad)?;
                Ok(Token::Crossing { sign, over: label(i)?, under: label(j)? })
            }
            [head, i] if head.len() == 2 && head.starts_with('C') => {
                let sign = Sign::from_symbol(&head[1..]).ok_or_else(bad)?;
                Ok(Token::Rotation { sign, label: label(i)? })
            }
            _ => Err(bad()),
        }
    }
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Token::Crossing { sign, over, under } => write!(f, "R{} {over} {under}", sign.symbol()),
            Token::Rotation { sign, label } => write!(f, "C{} {label}", sign.symbol()),
        }
    }
}

/// A rotational tangle decomposition: crossings and rotations whose strand
/// slots carry the labels `1..=labels`, joined in ascending label order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawDecomp")]
pub struct RotDecomp {
    tokens: Vec<Token>,
    labels: u32,
}

#[derive(Deserialize)]
struct RawDecomp {
    tokens: Vec<Token>,
    labels: u32,
}

impl TryFrom<RawDecomp> for RotDecomp {
    type Error = DiagramError;

    fn try_from(raw: RawDecomp) -> Result<Self, Self::Error> {
        RotDecomp::new(raw.tokens, raw.labels)
    }
}

/// What sits at a given label.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Slot {
    Over { token: usize },
    Under { token: usize },
    Rotation { token: usize },
    Empty,
}

impl RotDecomp {
    pub fn new(tokens: Vec<Token>, labels: u32) -> Result<Self, DiagramError> {
        if labels == 0 {
            return Err(DiagramError::LabelOutOfRange { label: 0, labels });
        }
        let mut used = BTreeSet::new();
        for t in &tokens {
            for l in t.labels() {
                if l == 0 || l > labels {
                    return Err(DiagramError::LabelOutOfRange { label: l, labels });
                }
                if !used.insert(l) {
                    return Err(DiagramError::DuplicateLabel(l));
                }
            }
        }
        if !tokens.is_empty() {
            if let Some(missing) = (1..=labels).find(|l| !used.contains(l)) {
                return Err(DiagramError::MissingLabel(missing));
            }
        } else if labels != 1 {
            return Err(DiagramError::MissingLabel(1));
        }
        Ok(RotDecomp { tokens, labels })
    }

    pub fn trivial() -> Self {
        RotDecomp { tokens: Vec::new(), labels: 1 }
    }

    pub fn tokens(&self) -> &[Token] {
        &self.tokens
    }

    pub fn labels(&self) -> u32 {
        self.labels
    }

    pub fn is_trivial(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn crossing_count(&self) -> usize {
        self.tokens
            .iter()
            .filter(|t| matches!(t, Token::Crossing { .. }))
            .count()
    }

    /// `slots()[l - 1]` describes label `l`.
    pub fn slots(&self) -> Vec<Slot> {
        let mut slots = vec![Slot::Empty; self.labels as usize];
        for (i, t) in self.tokens.iter().enumerate() {
            match *t {
                Token::Crossing { over, under, .. } => {
                    slots[over as usize - 1] = Slot::Over { token: i };
                    slots[under as usize - 1] = Slot::Under { token: i };
                }
                Token::Rotation { label, .. } => {
                    slots[label as usize - 1] = Slot::Rotation { token: i };
                }
            }
        }
        slots
    }

    /// Accepts `labels L` followed by tokens `R+ i j`, `R- i j`, `C+ i`,
    /// `C- i`, separated by newlines or `;`. Text after `#` is ignored.
    pub fn parse(text: &str) -> Result<Self, DiagramError> {
        let mut labels = None;
        let mut tokens = Vec::new();
        for line in text.lines() {
            let line = line.split('#').next().unwrap_or("");
            for item in line.split(';').map(str::trim).filter(|s| !s.is_empty()) {
                if let Some(rest) = item.strip_prefix("labels") {
                    let l: u32 = rest
                        .trim()
                        .parse()
                        .map_err(|_| DiagramError::MalformedToken(item.to_string()))?;
                    if labels.replace(l).is_some() {
                        return Err(DiagramError::MalformedToken(item.to_string()));
                    }
                } else {
                    tokens.push(Token::parse(item)?);
                }
            }
        }
        let labels = labels.ok_or_else(|| DiagramError::MalformedToken("missing `labels L` header".into()))?;
        Self::new(tokens, labels)
    }

    pub fn render(&self) -> String {
        let mut s = format!("labels {}\n", self.labels);
        for t in &self.tokens {
            s.push_str(&t.to_string());
            s.push('\n');
        }
        s
    }

    pub fn writhe(&self) -> i32 {
        self.tokens
            .iter()
            .map(|t| match t {
                Token::Crossing { sign, .. } => sign.value(),
                Token::Rotation { .. } => 0,
            })
            .sum()
    }

    /// Net number of full turns.
    pub fn rotation_number(&self) -> i32 {
        self.tokens
            .iter()
            .map(|t| match t {
                Token::Rotation { sign, .. } => sign.value(),
                Token::Crossing { .. } => 0,
            })
            .sum()
    }

    /// The Gauss code met when walking the labels in ascending order.
    /// Crossings are numbered by first appearance.
    pub fn gauss_code(&self) -> OrientedGaussCode {
        let mut ids: BTreeMap<usize, u32> = BTreeMap::new();
        let mut passes = Vec::new();
        let mut signs = BTreeMap::new();
        for slot in self.slots() {
            let (token, role) = match slot {
                Slot::Over { token } => (token, Role::Over),
                Slot::Under { token } => (token, Role::Under),
                _ => continue,
            };
            let next = ids.len() as u32 + 1;
            let id = *ids.entry(token).or_insert(next);
            if let Token::Crossing { sign, .. } = self.tokens[token] {
                signs.insert(id, sign);
            }
            passes.push(Pass { crossing: id, role });
        }
        OrientedGaussCode { passes, signs }
    }

    /// Joins `other` after the head of `self`.
    pub fn concat(&self, other: &RotDecomp) -> RotDecomp {
        if self.is_trivial() {
            return other.clone();
        }
        if other.is_trivial() {
            return self.clone();
        }
        let off = self.labels;
        let mut tokens = self.tokens.clone();
        tokens.extend(other.tokens.iter().map(|t| shift_token(t, |l| l + off)));
        RotDecomp { tokens, labels: self.labels + other.labels }
    }
}

fn shift_token(t: &Token, f: impl Fn(u32) -> u32) -> Token {
    match *t {
        Token::Crossing { sign, over, under } => Token::Crossing { sign, over: f(over), under: f(under) },
        Token::Rotation { sign, label } => Token::Rotation { sign, label: f(label) },
    }
}

impl fmt::Display for RotDecomp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.tokens.iter().map(|t| t.to_string()).collect();
        write!(f, "labels {}; {}", self.labels, parts.join("; "))
    }
}

/// A decomposition of the reverse `-K`.
///
/// Walking the strand backwards reverses the label order. Crossings keep
/// their sign and which strand is over, and every turn changes sense. A `C+`
/// hook is attached at the new leg and a `C-` hook at the new head.
pub fn reverse_decomposition(d: &RotDecomp) -> RotDecomp {
    if d.is_trivial() {
        return RotDecomp::trivial();
    }
    let l = d.labels;
    let relabel = |x: u32| l + 2 - x;
    let mut tokens = vec![Token::Rotation { sign: Sign::Plus, label: 1 }];
    for t in &d.tokens {
        tokens.push(match *t {
            Token::Crossing { sign, over, under } => {
                Token::Crossing { sign, over: relabel(over), under: relabel(under) }
            }
            Token::Rotation { sign, label } => Token::Rotation { sign: sign.flip(), label: relabel(label) },
        });
    }
    tokens.push(Token::Rotation { sign: Sign::Minus, label: l + 2 });
    RotDecomp { tokens, labels: l + 2 }
}

/// The pair `(fr, cofr)`: writhe and winding difference `n₀ - n₁`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Biframing {
    pub framing: i32,
    pub coframing: i32,
}

/// A named diagram with its tabulated Gauss code and a decomposition.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Fixture {
    pub name: &'static str,
    pub code: OrientedGaussCode,
    pub decomposition: RotDecomp,
}

/// A row of the table of unresolved 5-crossing pairs.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TableRow {
    pub first: &'static str,
    pub second: &'static str,
    pub code: &'static str,
}

pub const TABLE: [TableRow; 6] = [
    TableRow { first: "5_7", second: "5_421", code: "-1 -2 3 4 -3 2 -5 1 5 -4 - - - + +" },
    TableRow { first: "5_9", second: "5_561", code: "-1 2 -3 1 -4 5 -2 3 4 -5 - - - + +" },
    TableRow { first: "5_12", second: "5_593", code: "-1 2 -3 1 4 -5 -2 3 -4 5 - - - - -" },
    TableRow { first: "5_19", second: "5_796", code: "-1 2 -3 4 -5 1 -2 3 5 -4 - - - + +" },
    TableRow { first: "5_21", second: "5_814", code: "-1 2 -3 4 -5 1 5 -2 -4 3 - + - - +" },
    TableRow { first: "5_24", second: "5_891", code: "-1 2 -3 4 5 -4 -2 1 3 -5 - - - - +" },
];

const DECOMPOSITIONS: [(&str, &str, u32); 6] = [
    ("5_7", "R- 11 1; R+ 12 9; R- 8 2; R- 3 6; R+ 5 13; C- 10; C- 7; C+ 4", 13),
    ("5_421", "R+ 9 1; R+ 2 5; R- 3 13; R- 6 12; R- 10 7; C+ 11; C+ 8; C- 4", 13),
    ("5_9", "R+ 6 1; R+ 2 7; C- 3; R- 11 5; R- 4 10; C+ 8; R- 9 13; C+ 12; C+ 14", 14),
    ("5_561", "R+ 6 1; R+ 2 7; R- 8 12; R- 3 9; R- 10 4; C+ 11; C+ 5", 12),
    ("5_12", "R- 1 6; R- 7 2; R- 11 5; R- 4 10; R- 9 13; C- 3; C+ 12; C+ 8; C+ 14", 14),
    ("5_593", "R- 1 6; R- 7 2; R- 8 12; R- 3 9; R- 10 4; C+ 11; C+ 5", 12),
];

/// Names accepted by [`fixture`], in table order.
pub const FIXTURE_NAMES: [&str; 6] = ["5_7", "5_421", "5_9", "5_561", "5_12", "5_593"];

pub fn table_code(name: &str) -> Option<&'static str> {
    TABLE
        .iter()
        .find(|r| r.first == name || r.second == name)
        .map(|r| r.code)
}

pub fn fixture(name: &str) -> Option<Fixture> {
    if name == "trivial" {
        return Some(Fixture {
            name: "trivial",
            code: OrientedGaussCode::empty(),
            decomposition: RotDecomp::trivial(),
        });
    }
    let &(name, tokens, labels) = DECOMPOSITIONS.iter().find(|(n, _, _)| *n == name)?;
    let decomposition = RotDecomp::parse(&format!("labels {labels}; {tokens}"))
        .expect("built-in decomposition is valid");
    let code = OrientedGaussCode::parse(table_code(name)?).expect("built-in code is valid");
    Some(Fixture { name, code, decomposition })
}

pub fn fixtures() -> BTreeMap<&'static str, Fixture> {
    FIXTURE_NAMES
        .iter()
        .map(|n| (*n, fixture(n).expect("listed fixture exists")))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_tabulated_code() {
        let c = OrientedGaussCode::parse("-1 -2 3 4 -3 2 -5 1 5 -4 - - - + +").unwrap();
        assert_eq!(c.crossing_count(), 5);
        assert_eq!(c.writhe(), -1);
        let signs: Vec<i32> = c.signs().values().map(|s| s.value()).collect();
        assert_eq!(signs, vec![-1, -1, -1, 1, 1]);
        assert_eq!(c.render(), "-1 -2 3 4 -3 2 -5 1 5 -4 - - - + +");
    }

    #[test]
    fn empty_code_is_trivial() {
        let c = OrientedGaussCode::parse("").unwrap();
        assert!(c.is_empty());
        assert_eq!(c.writhe(), 0);
    }

    #[test]
    fn code_errors() {
        assert_eq!(
            OrientedGaussCode::parse("1 -1 2 - -"),
            Err(DiagramError::CrossingCountMismatch(2))
        );
        assert_eq!(
            OrientedGaussCode::parse("1 1 -"),
            Err(DiagramError::CrossingCountMismatch(1))
        );
        assert_eq!(
            OrientedGaussCode::parse("1 -1 - +"),
            Err(DiagramError::SignCountMismatch { expected: 1, found: 2 })
        );
        assert!(matches!(OrientedGaussCode::parse("1 -1 x"), Err(DiagramError::MalformedToken(_))));
        assert!(matches!(OrientedGaussCode::parse("1 - -1"), Err(DiagramError::MalformedToken(_))));
    }

    #[test]
    fn decomposition_errors() {
        assert_eq!(RotDecomp::parse("labels 2; R+ 1 1"), Err(DiagramError::DuplicateLabel(1)));
        assert_eq!(
            RotDecomp::parse("labels 2; R+ 1 3"),
            Err(DiagramError::LabelOutOfRange { label: 3, labels: 2 })
        );
        assert!(matches!(RotDecomp::parse("labels 2; Q+ 1 2"), Err(DiagramError::MalformedToken(_))));
        assert!(matches!(RotDecomp::parse("R+ 1 2"), Err(DiagramError::MalformedToken(_))));
        assert_eq!(RotDecomp::parse("labels 3; R+ 1 2"), Err(DiagramError::MissingLabel(3)));
    }

    #[test]
    fn trivial_decomposition() {
        let d = RotDecomp::parse("labels 1").unwrap();
        assert!(d.is_trivial());
        assert_eq!(reverse_decomposition(&d), d);
    }

    #[test]
    fn fixture_writhes() {
        let expect = [("5_7", -1), ("5_421", -1), ("5_9", -1), ("5_561", -1), ("5_12", -5), ("5_593", -5)];
        for (name, w) in expect {
            let f = fixture(name).unwrap();
            assert_eq!(f.decomposition.writhe(), w, "{name}");
            assert_eq!(f.code.writhe(), w, "{name}");
        }
    }

    #[test]
    fn seven_decomposition_walks_its_tabulated_code() {
        let f = fixture("5_7").unwrap();
        assert_eq!(f.decomposition.gauss_code(), f.code);
    }

    #[test]
    fn reversal_adds_hooks() {
        let d = RotDecomp::parse("labels 3; R+ 1 3; C- 2").unwrap();
        let r = reverse_decomposition(&d);
        assert_eq!(r.render(), "labels 5\nC+ 1\nR+ 4 2\nC+ 3\nC- 5\n");
    }
}
