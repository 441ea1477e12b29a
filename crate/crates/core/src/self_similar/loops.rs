use dashu::integer::IBig;
use serde::{Deserialize, Serialize};

use crate::combinatorics::{PermutationPair, StepType};
use crate::error::{Error, Result};
use crate::iet::Iet;
use crate::linalg::IntMatrix;
use crate::numeric::{flt_int, flt_to_f64, Backend, Flt, Real};
use crate::rauzy_veech::CocyclePath;

/// A closed path in the Rauzy diagram with primitive cocycle product, together
/// with the Perron-Frobenius data of `ᵗM`.
#[derive(Clone, Debug)]
pub struct RauzyLoop {
    pub base_pi: PermutationPair,
    pub steps: Vec<StepType>,
    /// `B(0, p)`, later steps on the left.
    pub matrix: IntMatrix,
    pub pf_eigenvalue: Flt,
    /// Positive eigenvector of `ᵗM`, normalized to sum 1.
    pub pf_lengths: Vec<Flt>,
    pub bits: usize,
}

/// File form: all numbers are decimal strings.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RauzyLoopJson {
    pub base_pi: PermutationPair,
    pub steps: Vec<StepType>,
    pub matrix: Vec<Vec<String>>,
    pub pf_eigenvalue: String,
    pub pf_lengths: Vec<String>,
}

/// Permutation reached after each step, starting with `base`.
pub fn walk(base: &PermutationPair, steps: &[StepType]) -> Vec<PermutationPair> {
    let mut pis = vec![base.clone()];
    for s in steps {
        let next = pis.last().unwrap().rauzy_move(*s);
        pis.push(next);
    }
    pis
}

pub fn loop_matrix(base: &PermutationPair, steps: &[StepType]) -> IntMatrix {
    let mut m = IntMatrix::identity(base.d());
    let mut pi = base.clone();
    for s in steps {
        let (w, l) = pi.winner_loser(*s);
        m.add_row(l, w);
        pi = pi.rauzy_move(*s);
    }
    m
}

/// Exact test: a nonnegative matrix is primitive iff its power `(d-1)^2 + 1` is positive.
pub fn is_primitive(m: &IntMatrix) -> bool {
    if !m.is_nonnegative() {
        return false;
    }
    let d = m.rows();
    let mut e = (d - 1) * (d - 1) + 1;
    let mut base = m.clone();
    let mut acc = IntMatrix::identity(d);
    // entries only matter through their sign pattern
    let clamp = |x: &IntMatrix| {
        let mut y = x.clone();
        for i in 0..d {
            for j in 0..d {
                if *y.get(i, j) > IBig::ZERO {
                    y.set(i, j, IBig::ONE);
                }
            }
        }
        y
    };
    while e > 0 {
        if e & 1 == 1 {
            acc = clamp(&acc.mul(&base));
        }
        base = clamp(&base.mul(&base));
        e >>= 1;
    }
    acc.is_positive()
}

fn flt_zero(bits: usize) -> Flt {
    Flt::ZERO.with_precision(bits).value()
}

fn mat_vec(m: &[Vec<Flt>], v: &[Flt], bits: usize) -> Vec<Flt> {
    m.iter().map(|row| row.iter().zip(v).fold(flt_zero(bits), |a, (x, y)| a + x * y)).collect()
}

/// Perron-Frobenius eigenvalue and eigenvector (sum 1) of `ᵗm` by repeated squaring.
pub fn perron_frobenius(m: &IntMatrix, bits: usize) -> Result<(Flt, Vec<Flt>)> {
    let d = m.rows();
    let t = m.transpose();
    let tf: Vec<Vec<Flt>> = (0..d).map(|i| (0..d).map(|j| flt_int(t.get(i, j), bits)).collect()).collect();
    let mut a = tf.clone();
    let normalize = |v: Vec<Flt>| -> Vec<Flt> {
        let s = v.iter().fold(flt_zero(bits), |a, x| a + x);
        v.into_iter().map(|x| x / &s).collect()
    };
    let ones = vec![Flt::ONE.with_precision(bits).value(); d];
    let mut v = normalize(mat_vec(&a, &ones, bits));
    let tol = -(bits as f64 - 16.0) * std::f64::consts::LN_2;
    for _ in 0..64 {
        let sq: Vec<Vec<Flt>> = (0..d)
            .map(|i| (0..d).map(|j| (0..d).fold(flt_zero(bits), |s, k| s + &a[i][k] * &a[k][j])).collect())
            .collect();
        let mx = sq.iter().flatten().cloned().fold(flt_zero(bits), |a, x| if x > a { x } else { a });
        a = sq.into_iter().map(|r| r.into_iter().map(|x| x / &mx).collect()).collect();
        let w = normalize(mat_vec(&a, &ones, bits));
        let change = v.iter().zip(&w).map(|(x, y)| crate::numeric::flt_ln_abs(&(x - y))).fold(f64::NEG_INFINITY, f64::max);
        v = w;
        if change < tol {
            break;
        }
    }
    let tv = mat_vec(&tf, &v, bits);
    let rho = tv.iter().fold(flt_zero(bits), |a, x| a + x);
    let resid = tv.iter().zip(&v).map(|(x, y)| crate::numeric::flt_ln_abs(&(x - &rho * y))).fold(f64::NEG_INFINITY, f64::max);
    if resid > -(bits as f64 / 2.0) * std::f64::consts::LN_2 || v.iter().any(|x| *x <= flt_zero(bits)) {
        return Err(Error::InvalidLoop(format!("power iteration did not converge (residual e^{resid:.1})")));
    }
    Ok((rho, v))
}

fn short_decimal(x: &Flt) -> String {
    Real::Float(x.clone().with_precision(160).value()).to_decimal_string()
}

impl RauzyLoop {
    /// Validates the loop and computes its PF data at `bits` of precision.
    pub fn new(base_pi: PermutationPair, steps: Vec<StepType>, bits: usize) -> Result<Self> {
        base_pi.check_irreducible()?;
        if steps.is_empty() {
            return Err(Error::InvalidLoop("empty step sequence".into()));
        }
        let end = walk(&base_pi, &steps).pop().unwrap();
        if end != base_pi {
            return Err(Error::InvalidLoop("step sequence does not return to the base permutation".into()));
        }
        let matrix = loop_matrix(&base_pi, &steps);
        if !is_primitive(&matrix) {
            return Err(Error::InvalidLoop("loop matrix is not primitive".into()));
        }
        let (pf_eigenvalue, pf_lengths) = perron_frobenius(&matrix, bits)?;
        Ok(RauzyLoop { base_pi, steps, matrix, pf_eigenvalue, pf_lengths, bits })
    }

    pub fn period(&self) -> usize {
        self.steps.len()
    }

    pub fn d(&self) -> usize {
        self.base_pi.d()
    }

    pub fn pf_eigenvalue_f64(&self) -> f64 {
        flt_to_f64(&self.pf_eigenvalue)
    }

    pub fn pf_lengths_f64(&self) -> Vec<f64> {
        self.pf_lengths.iter().map(flt_to_f64).collect()
    }

    pub fn step_string(&self) -> String {
        self.steps.iter().map(StepType::code).collect()
    }

    pub fn to_json(&self) -> RauzyLoopJson {
        RauzyLoopJson {
            base_pi: self.base_pi.clone(),
            steps: self.steps.clone(),
            matrix: self.matrix.to_string_rows(),
            pf_eigenvalue: short_decimal(&self.pf_eigenvalue),
            pf_lengths: self.pf_lengths.iter().map(short_decimal).collect(),
        }
    }

    /// Rebuilds from file data; the stored matrix must match the recomputed one
    /// and the stored PF eigenvalue must agree to 1e-12.
    pub fn from_json(j: &RauzyLoopJson, bits: usize) -> Result<Self> {
        let l = Self::new(j.base_pi.clone(), j.steps.clone(), bits)?;
        if l.matrix.to_string_rows() != j.matrix {
            return Err(Error::InvalidLoop("stored matrix differs from the product over the steps".into()));
        }
        let stored: f64 = j.pf_eigenvalue.trim().parse().map_err(|_| Error::Parse(format!("bad eigenvalue `{}`", j.pf_eigenvalue)))?;
        if (stored - l.pf_eigenvalue_f64()).abs() > 1e-12 * stored {
            return Err(Error::InvalidLoop(format!("stored eigenvalue {stored} differs from {}", l.pf_eigenvalue_f64())));
        }
        Ok(l)
    }

    pub fn from_json_str(s: &str, bits: usize) -> Result<Self> {
        Self::from_json(&serde_json::from_str(s)?, bits)
    }

    /// Lengths after each step of one period, starting from the PF lengths.
    fn period_lengths(&self) -> Vec<Vec<Flt>> {
        let mut out = vec![self.pf_lengths.clone()];
        let mut pi = self.base_pi.clone();
        for s in &self.steps {
            let (w, l) = pi.winner_loser(*s);
            let mut next = out.last().unwrap().clone();
            next[w] = &next[w] - &next[l];
            out.push(next);
            pi = pi.rauzy_move(*s);
        }
        out
    }
}

/// The i.e.t. with permutation `base_pi` and the PF lengths of the loop.
pub fn build_self_similar(l: &RauzyLoop) -> Result<Iet> {
    let backend = Backend::float(l.bits);
    let lengths = l.pf_lengths.iter().cloned().map(Real::Float).collect();
    Iet::new(l.base_pi.clone(), lengths, backend.zero(), backend)
}

/// `periods` repetitions of the loop as a cocycle path. Lengths after `j` full
/// periods are the loop lengths divided by `rho^j`, so no precision is lost with depth.
pub fn iterate_periodic(l: &RauzyLoop, periods: usize) -> Result<CocyclePath> {
    let t = build_self_similar(l)?;
    let one_period = l.period_lengths();
    let p = l.period();
    let mut lengths = Vec::with_capacity(periods * p + 1);
    let mut kinds = Vec::with_capacity(periods * p);
    let mut scale = Flt::ONE.with_precision(l.bits).value();
    for _ in 0..periods {
        for i in 0..p {
            lengths.push(one_period[i].iter().map(|x| Real::Float(x / &scale)).collect());
        }
        kinds.extend_from_slice(&l.steps);
        scale = &scale * &l.pf_eigenvalue;
    }
    lengths.push(l.pf_lengths.iter().map(|x| Real::Float(x / &scale)).collect());
    CocyclePath::from_parts(&t, kinds, lengths)
}

fn codes(s: &[StepType]) -> String {
    s.iter().map(StepType::code).collect()
}

/// A repetition of a shorter loop at the same base (a repeated step word alone is not enough).
fn is_proper_power(s: &[StepType], pis: &[PermutationPair]) -> bool {
    let n = s.len();
    (1..n).any(|p| n % p == 0 && pis[p] == pis[0] && (p..n).all(|i| s[i] == s[i - p]))
}

/// True when `s` is the smallest (by step codes) of its rotations that start at the base.
fn is_canonical(s: &[StepType], pis: &[PermutationPair]) -> bool {
    let own = codes(s);
    (1..s.len()).filter(|&j| pis[j] == pis[0]).all(|j| {
        let rotated: Vec<StepType> = s[j..].iter().chain(&s[..j]).cloned().collect();
        own <= codes(&rotated)
    })
}

fn search(prefix: Vec<StepType>, base: &PermutationPair, max_len: usize, out: &mut Vec<Vec<StepType>>) {
    let pis = walk(base, &prefix);
    let mut stack = vec![(prefix, pis)];
    while let Some((seq, pis)) = stack.pop() {
        let cur = pis.last().unwrap();
        if !seq.is_empty() && cur == base && !is_proper_power(&seq, &pis) && is_canonical(&seq, &pis) {
            if is_primitive(&loop_matrix(base, &seq)) {
                out.push(seq.clone());
            }
        }
        if seq.len() < max_len {
            for kind in [StepType::Top, StepType::Bottom] {
                let mut s = seq.clone();
                s.push(kind);
                let mut p = pis.clone();
                p.push(cur.rauzy_move(kind));
                stack.push((s, p));
            }
        }
    }
}

/// All loops of length `<= max_len` at `start_pi` with primitive matrix, one per
/// rotation class, excluding repetitions of shorter loops. Sorted by length, then
/// by step codes.
pub fn find_loops(start_pi: &PermutationPair, max_len: usize, bits: usize) -> Result<Vec<RauzyLoop>> {
    start_pi.check_irreducible()?;
    let depth = max_len.min(3);
    let mut prefixes: Vec<Vec<StepType>> = vec![vec![]];
    for _ in 0..depth {
        prefixes = prefixes
            .into_iter()
            .flat_map(|p| [StepType::Top, StepType::Bottom].map(|k| p.iter().cloned().chain([k]).collect::<Vec<_>>()))
            .collect();
    }
    let mut found: Vec<Vec<StepType>> = Vec::new();
    // short loops that end inside the split prefixes
    for len in 1..=depth {
        for p in prefixes.iter().filter(|p| p.len() >= len) {
            let seq = &p[..len];
            let pis = walk(start_pi, seq);
            if pis[len] == *start_pi && !is_proper_power(seq, &pis) && is_canonical(seq, &pis) && is_primitive(&loop_matrix(start_pi, seq)) {
                found.push(seq.to_vec());
            }
        }
    }
    let branches: Vec<Vec<Vec<StepType>>> = std::thread::scope(|sc| {
        let handles: Vec<_> = prefixes
            .iter()
            .map(|p| {
                sc.spawn(move || {
                    let mut out = Vec::new();
                    search(p.clone(), start_pi, max_len, &mut out);
                    out.retain(|s| s.len() > depth);
                    out
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("loop search thread panicked")).collect()
    });
    found.extend(branches.into_iter().flatten());
    found.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| codes(a).cmp(&codes(b))));
    found.dedup();
    found.into_iter().map(|s| RauzyLoop::new(start_pi.clone(), s, bits)).collect()
}
