//! Combinatorial data of interval exchanges: permutation pairs, the
//! intersection matrix and the singularity cycles.

use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt;

use dashu::integer::IBig;
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::IntMatrix;

/// Type of an elementary Rauzy-Veech step.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum StepType {
    #[serde(rename = "T")]
    Top,
    #[serde(rename = "B")]
    Bottom,
}

impl StepType {
    pub fn code(&self) -> &'static str {
        match self {
            StepType::Top => "T",
            StepType::Bottom => "B",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.trim() {
            "T" | "Top" | "top" => Ok(StepType::Top),
            "B" | "Bottom" | "bottom" => Ok(StepType::Bottom),
            other => Err(Error::Parse(format!("unknown step type `{other}`"))),
        }
    }
}

/// A pair of orderings of a finite alphabet. Letters are indexed by their
/// position in the sorted alphabet, which fixes the coordinates of all
/// vectors and matrices attached to the pair.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PermutationPair {
    letters: Vec<String>,
    top: Vec<usize>,
    bottom: Vec<usize>,
    pos_top: Vec<usize>,
    pos_bottom: Vec<usize>,
}

fn split_row(row: &str) -> Vec<String> {
    let row = row.trim();
    if row.split_whitespace().count() > 1 {
        row.split_whitespace().map(str::to_string).collect()
    } else {
        row.chars().map(|c| c.to_string()).collect()
    }
}

impl PermutationPair {
    /// Builds a pair from two rows of letter names.
    pub fn from_rows<S: AsRef<str>>(top: &[S], bottom: &[S]) -> Result<Self> {
        let mut letters: Vec<String> = top.iter().map(|s| s.as_ref().to_string()).collect();
        letters.sort();
        letters.dedup();
        if letters.len() != top.len() {
            return Err(Error::InvalidPermutation("repeated letter in top row".into()));
        }
        let mut b_sorted: Vec<String> = bottom.iter().map(|s| s.as_ref().to_string()).collect();
        b_sorted.sort();
        if b_sorted != letters {
            return Err(Error::InvalidPermutation("top and bottom rows use different letters".into()));
        }
        if letters.len() < 2 {
            return Err(Error::InvalidPermutation("need at least two letters".into()));
        }
        let idx: HashMap<&str, usize> = letters.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();
        let t: Vec<usize> = top.iter().map(|s| idx[s.as_ref()]).collect();
        let b: Vec<usize> = bottom.iter().map(|s| idx[s.as_ref()]).collect();
        let pair = Self::from_indices(letters.clone(), t, b);
        pair.check_irreducible()?;
        Ok(pair)
    }

    /// Builds a pair over a given alphabet from index rows. No irreducibility check.
    pub fn from_indices(letters: Vec<String>, top: Vec<usize>, bottom: Vec<usize>) -> Self {
        let d = letters.len();
        let mut pos_top = vec![0; d];
        let mut pos_bottom = vec![0; d];
        for (i, &a) in top.iter().enumerate() {
            pos_top[a] = i;
        }
        for (i, &a) in bottom.iter().enumerate() {
            pos_bottom[a] = i;
        }
        PermutationPair { letters, top, bottom, pos_top, pos_bottom }
    }

    /// Parses `"A B C D / D C B A"` or `"ABCD/DCBA"`.
    pub fn parse(s: &str) -> Result<Self> {
        let (t, b) = s
            .split_once('/')
            .ok_or_else(|| Error::Parse(format!("expected `top / bottom`, got `{s}`")))?;
        Self::from_rows(&split_row(t), &split_row(b))
    }

    /// The standard symmetric pair `(1 2 .. d / d .. 2 1)`, letters `A`, `B`, ...
    pub fn rotation_class(d: usize) -> Self {
        let letters: Vec<String> = (0..d).map(letter_name).collect();
        let top: Vec<usize> = (0..d).collect();
        let bottom: Vec<usize> = (0..d).rev().collect();
        Self::from_indices(letters, top, bottom)
    }

    pub fn random_irreducible<R: Rng>(d: usize, rng: &mut R) -> Self {
        let letters: Vec<String> = (0..d).map(letter_name).collect();
        loop {
            let top: Vec<usize> = (0..d).collect();
            let mut bottom = top.clone();
            bottom.shuffle(rng);
            let p = Self::from_indices(letters.clone(), top, bottom);
            if p.is_irreducible() {
                return p;
            }
        }
    }

    pub fn d(&self) -> usize {
        self.letters.len()
    }

    pub fn letters(&self) -> &[String] {
        &self.letters
    }

    pub fn letter(&self, a: usize) -> &str {
        &self.letters[a]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.letters.iter().position(|s| s == name)
    }

    /// Letters of the top row, left to right.
    pub fn top(&self) -> &[usize] {
        &self.top
    }

    pub fn bottom(&self) -> &[usize] {
        &self.bottom
    }

    /// Zero-based position of letter `a` in the top row.
    pub fn pos_top(&self, a: usize) -> usize {
        self.pos_top[a]
    }

    pub fn pos_bottom(&self, a: usize) -> usize {
        self.pos_bottom[a]
    }

    pub fn top_last(&self) -> usize {
        *self.top.last().unwrap()
    }

    pub fn bottom_last(&self) -> usize {
        *self.bottom.last().unwrap()
    }

    pub fn top_names(&self) -> Vec<String> {
        self.top.iter().map(|&a| self.letters[a].clone()).collect()
    }

    pub fn bottom_names(&self) -> Vec<String> {
        self.bottom.iter().map(|&a| self.letters[a].clone()).collect()
    }

    /// Smallest `k < d` whose top and bottom prefixes of length `k` coincide.
    pub fn reducibility_index(&self) -> Option<usize> {
        let d = self.d();
        let mut seen_t = vec![false; d];
        let mut seen_b = vec![false; d];
        let mut diff = 0i64;
        for k in 0..d - 1 {
            let (a, b) = (self.top[k], self.bottom[k]);
            seen_t[a] = true;
            diff += if seen_b[a] { -1 } else { 1 };
            seen_b[b] = true;
            diff += if seen_t[b] { -1 } else { 1 };
            if diff == 0 {
                return Some(k + 1);
            }
        }
        None
    }

    pub fn is_irreducible(&self) -> bool {
        self.reducibility_index().is_none()
    }

    pub fn check_irreducible(&self) -> Result<()> {
        match self.reducibility_index() {
            Some(k) => Err(Error::Reducible(k)),
            None => Ok(()),
        }
    }

    /// Combinatorial effect of one Rauzy-Veech step: the loser is moved
    /// directly after the winner in the loser's row.
    pub fn rauzy_move(&self, kind: StepType) -> PermutationPair {
        let (at, ab) = (self.top_last(), self.bottom_last());
        let (mut top, mut bottom) = (self.top.clone(), self.bottom.clone());
        match kind {
            StepType::Top => {
                top.pop();
                let p = self.pos_top[ab];
                top.insert(p + 1, at);
            }
            StepType::Bottom => {
                bottom.pop();
                let p = self.pos_bottom[at];
                bottom.insert(p + 1, ab);
            }
        }
        Self::from_indices(self.letters.clone(), top, bottom)
    }

    /// `(winner, loser)` of a step of the given type.
    pub fn winner_loser(&self, kind: StepType) -> (usize, usize) {
        let (at, ab) = (self.top_last(), self.bottom_last());
        match kind {
            StepType::Top => (ab, at),
            StepType::Bottom => (at, ab),
        }
    }

    /// Intersection matrix `Omega`.
    pub fn omega(&self) -> IntMatrix {
        let d = self.d();
        let mut m = IntMatrix::zeros(d, d);
        for a in 0..d {
            for b in 0..d {
                let v = if self.pos_top[a] < self.pos_top[b] && self.pos_bottom[a] > self.pos_bottom[b] {
                    1
                } else if self.pos_top[a] > self.pos_top[b] && self.pos_bottom[a] < self.pos_bottom[b] {
                    -1
                } else {
                    0
                };
                m.set(a, b, IBig::from(v));
            }
        }
        m
    }

    pub fn genus(&self) -> usize {
        self.omega().rank() / 2
    }

    pub fn singularities(&self) -> SingularityStructure {
        SingularityStructure::new(self)
    }

    /// All pairs reachable by Rauzy moves.
    pub fn rauzy_class(&self) -> Vec<PermutationPair> {
        let mut seen: HashSet<PermutationPair> = HashSet::new();
        let mut order = Vec::new();
        let mut queue = VecDeque::from([self.clone()]);
        seen.insert(self.clone());
        while let Some(p) = queue.pop_front() {
            for kind in [StepType::Top, StepType::Bottom] {
                let q = p.rauzy_move(kind);
                if seen.insert(q.clone()) {
                    queue.push_back(q);
                }
            }
            order.push(p);
        }
        order
    }

    /// Same pair with letters renamed by `names[i]` for the letter with index `i`.
    pub fn relabel(&self, names: &[String]) -> Result<Self> {
        let top: Vec<&str> = self.top.iter().map(|&a| names[a].as_str()).collect();
        let bottom: Vec<&str> = self.bottom.iter().map(|&a| names[a].as_str()).collect();
        Self::from_rows(&top, &bottom)
    }
}

fn letter_name(i: usize) -> String {
    if i < 26 {
        ((b'A' + i as u8) as char).to_string()
    } else {
        format!("L{i}")
    }
}

impl fmt::Display for PermutationPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} / {}", self.top_names().join(" "), self.bottom_names().join(" "))
    }
}

impl fmt::Debug for PermutationPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({self})")
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum PairRepr {
    Text(String),
    Rows { top: Vec<String>, bottom: Vec<String> },
}

impl Serialize for PermutationPair {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        PairRepr::Rows { top: self.top_names(), bottom: self.bottom_names() }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for PermutationPair {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = PairRepr::deserialize(d)?;
        match r {
            PairRepr::Text(t) => PermutationPair::parse(&t),
            PairRepr::Rows { top, bottom } => PermutationPair::from_rows(&top, &bottom),
        }
        .map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Side {
    L,
    R,
}

/// A mark `(letter, side)` is encoded as `2 * letter + side`, with `L = 0`, `R = 1`.
pub fn mark(letter: usize, side: Side) -> usize {
    2 * letter + if side == Side::R { 1 } else { 0 }
}

pub fn mark_letter(m: usize) -> usize {
    m / 2
}

pub fn mark_side(m: usize) -> Side {
    if m % 2 == 1 {
        Side::R
    } else {
        Side::L
    }
}

/// Sign of a mark in the boundary operator.
pub fn mark_sign(m: usize) -> i64 {
    if mark_side(m) == Side::R {
        1
    } else {
        -1
    }
}

/// The permutation `sigma` of the endpoint marks and its cycles.
#[derive(Clone, Debug)]
pub struct SingularityStructure {
    d: usize,
    sigma: Vec<usize>,
    cycles: Vec<Vec<usize>>,
}

impl SingularityStructure {
    pub fn new(pi: &PermutationPair) -> Self {
        let d = pi.d();
        let (at, ab) = (pi.top_last(), pi.bottom_last());
        let (ft, fb) = (pi.top()[0], pi.bottom()[0]);
        let mut sigma = vec![0; 2 * d];
        for a in 0..d {
            sigma[mark(a, Side::R)] = if a == at {
                mark(ab, Side::R)
            } else {
                mark(pi.top()[pi.pos_top(a) + 1], Side::L)
            };
            sigma[mark(a, Side::L)] = if a == fb {
                mark(ft, Side::L)
            } else {
                mark(pi.bottom()[pi.pos_bottom(a) - 1], Side::R)
            };
        }
        let mut seen = vec![false; 2 * d];
        let mut cycles = Vec::new();
        for start in 0..2 * d {
            if seen[start] {
                continue;
            }
            let mut c = Vec::new();
            let mut m = start;
            while !seen[m] {
                seen[m] = true;
                c.push(m);
                m = sigma[m];
            }
            cycles.push(c);
        }
        SingularityStructure { d, sigma, cycles }
    }

    pub fn sigma(&self, m: usize) -> usize {
        self.sigma[m]
    }

    pub fn cycles(&self) -> &[Vec<usize>] {
        &self.cycles
    }

    pub fn count(&self) -> usize {
        self.cycles.len()
    }

    /// Matrix of the boundary operator on piecewise constant functions:
    /// row `C` has `sum_{c in C} eps(c) e_{letter(c)}`.
    pub fn boundary_matrix(&self) -> IntMatrix {
        let mut m = IntMatrix::zeros(self.cycles.len(), self.d);
        for (i, c) in self.cycles.iter().enumerate() {
            for &mk in c {
                let a = mark_letter(mk);
                let v = m.get(i, a) + IBig::from(mark_sign(mk));
                m.set(i, a, v);
            }
        }
        m
    }

    /// Boundary of a function given by its one-sided values at the marks.
    pub fn boundary_of(&self, values_at_marks: &[f64]) -> Vec<f64> {
        self.cycles
            .iter()
            .map(|c| c.iter().map(|&m| mark_sign(m) as f64 * values_at_marks[m]).sum())
            .collect()
    }

    pub fn describe_mark(&self, pi: &PermutationPair, m: usize) -> String {
        format!("({},{:?})", pi.letter(mark_letter(m)), mark_side(m))
    }
}
