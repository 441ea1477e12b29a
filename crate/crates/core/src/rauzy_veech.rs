//! Rauzy-Veech induction, the Kontsevich-Zorich cocycle and acceleration times.

use std::io::Write;

use dashu::integer::IBig;
use serde::Serialize;
use serde_json::json;

use crate::combinatorics::{PermutationPair, StepType};
use crate::error::{Error, Result};
use crate::iet::Iet;
use crate::linalg::IntMatrix;
use crate::numeric::{Backend, Real};

/// One elementary step: the winner keeps its label and shortens by the loser's length.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Step {
    pub kind: StepType,
    pub winner: usize,
    pub loser: usize,
}

/// Decides the type of the next step, or reports a tie.
fn step_type(t: &Iet, ln_tol: f64) -> Result<StepType> {
    let pi = t.pi();
    let lt = &t.lengths()[pi.top_last()];
    let lb = &t.lengths()[pi.bottom_last()];
    let diff = lt.clone() - lb;
    let tie = match t.backend() {
        Backend::Rational => diff.is_zero(),
        Backend::Float { .. } => diff.is_zero() || diff.ln_abs() <= ln_tol + t.total_length().ln_abs(),
    };
    if tie {
        return Err(Error::Connection {
            step: 0,
            detail: format!(
                "last top and bottom intervals ({}, {}) have equal length",
                pi.letter(pi.top_last()),
                pi.letter(pi.bottom_last())
            ),
        });
    }
    Ok(if diff.is_negative() { StepType::Top } else { StepType::Bottom })
}

/// One Rauzy-Veech step. Returns the induced map, the step type and the
/// elementary matrix `B` with `lambda_old = B^T lambda_new`.
pub fn elementary_step(t: &Iet) -> Result<(Iet, StepType, IntMatrix)> {
    let kind = step_type(t, t.backend().ln_tolerance())?;
    let (next, step) = apply_step(t, kind);
    Ok((next, kind, IntMatrix::elementary(t.d(), step.loser, step.winner)))
}

fn apply_step(t: &Iet, kind: StepType) -> (Iet, Step) {
    let pi = t.pi();
    let (winner, loser) = pi.winner_loser(kind);
    let mut lengths = t.lengths().to_vec();
    lengths[winner] = lengths[winner].clone() - &lengths[loser];
    let next = Iet::new(pi.rauzy_move(kind), lengths, t.left().clone(), t.backend())
        .expect("Rauzy-Veech step preserves irreducibility and positivity");
    (next, Step { kind, winner, loser })
}

#[derive(Clone, Debug)]
pub struct IterateOptions {
    /// Natural log of the relative tie tolerance; defaults to the backend tolerance.
    pub ln_tol: Option<f64>,
}

impl Default for IterateOptions {
    fn default() -> Self {
        IterateOptions { ln_tol: None }
    }
}

/// A finite Rauzy-Veech path with its cocycle data.
#[derive(Clone, Debug)]
pub struct CocyclePath {
    pis: Vec<PermutationPair>,
    lengths: Vec<Vec<Real>>,
    left: Real,
    backend: Backend,
    steps: Vec<Step>,
    accel: Vec<usize>,
    accel_truncated: bool,
    windows: Vec<IntMatrix>,
    cumulative: Vec<IntMatrix>,
}

/// Runs `depth` elementary steps.
pub fn iterate(t: &Iet, depth: usize, opts: &IterateOptions) -> Result<CocyclePath> {
    let ln_tol = opts.ln_tol.unwrap_or_else(|| t.backend().ln_tolerance());
    let ln_total0 = t.total_length().ln_abs();
    let mut cur = t.clone();
    let mut kinds = Vec::with_capacity(depth);
    let mut pis = vec![t.pi().clone()];
    let mut lengths = vec![t.lengths().to_vec()];
    for n in 0..depth {
        if let Backend::Float { bits } = t.backend() {
            let ln_min = cur.lengths().iter().map(Real::ln_abs).fold(f64::INFINITY, f64::min);
            let ln_bound = ((n + 1) as f64).ln() - bits as f64 * std::f64::consts::LN_2 + 2.0 * (ln_total0 - ln_min);
            if ln_bound > ln_tol {
                return Err(Error::PrecisionExhausted { step: n, bound: ln_bound.exp() });
            }
        }
        let kind = step_type(&cur, ln_tol).map_err(|e| match e {
            Error::Connection { detail, .. } => Error::Connection { step: n, detail },
            e => e,
        })?;
        let (next, _) = apply_step(&cur, kind);
        kinds.push(kind);
        pis.push(next.pi().clone());
        lengths.push(next.lengths().to_vec());
        cur = next;
    }
    Ok(CocyclePath::build(pis, lengths, t.left().clone(), t.backend(), kinds))
}

impl CocyclePath {
    /// Assembles a path from recorded data. The permutation sequence is
    /// recomputed from the step types and checked against `pis`.
    pub fn from_parts(
        initial: &Iet,
        kinds: Vec<StepType>,
        lengths: Vec<Vec<Real>>,
    ) -> Result<Self> {
        if lengths.len() != kinds.len() + 1 {
            return Err(Error::InvalidArgument("need one length vector per time".into()));
        }
        let mut pis = vec![initial.pi().clone()];
        for k in &kinds {
            let next = pis.last().unwrap().rauzy_move(*k);
            pis.push(next);
        }
        Ok(Self::build(pis, lengths, initial.left().clone(), initial.backend(), kinds))
    }

    fn build(
        pis: Vec<PermutationPair>,
        lengths: Vec<Vec<Real>>,
        left: Real,
        backend: Backend,
        kinds: Vec<StepType>,
    ) -> Self {
        let d = pis[0].d();
        let steps: Vec<Step> = kinds
            .iter()
            .enumerate()
            .map(|(n, &kind)| {
                let (winner, loser) = pis[n].winner_loser(kind);
                Step { kind, winner, loser }
            })
            .collect();
        let mut accel = vec![0];
        let mut windows = Vec::new();
        let mut cumulative = vec![IntMatrix::identity(d)];
        let mut w = IntMatrix::identity(d);
        for (n, s) in steps.iter().enumerate() {
            w.add_row(s.loser, s.winner);
            if w.is_positive() {
                accel.push(n + 1);
                let c = w.mul(cumulative.last().unwrap());
                cumulative.push(c);
                windows.push(std::mem::replace(&mut w, IntMatrix::identity(d)));
            }
        }
        let accel_truncated = *accel.last().unwrap() != steps.len();
        CocyclePath { pis, lengths, left, backend, steps, accel, accel_truncated, windows, cumulative }
    }

    pub fn depth(&self) -> usize {
        self.steps.len()
    }

    pub fn d(&self) -> usize {
        self.pis[0].d()
    }

    pub fn backend(&self) -> Backend {
        self.backend
    }

    pub fn steps(&self) -> &[Step] {
        &self.steps
    }

    pub fn step_types(&self) -> Vec<StepType> {
        self.steps.iter().map(|s| s.kind).collect()
    }

    pub fn pi_at(&self, n: usize) -> &PermutationPair {
        &self.pis[n]
    }

    pub fn lengths_at(&self, n: usize) -> &[Real] {
        &self.lengths[n]
    }

    pub fn lengths_f64_at(&self, n: usize) -> Vec<f64> {
        self.lengths[n].iter().map(Real::to_f64).collect()
    }

    /// Lengths at time `n` divided by their sum, in double precision.
    pub fn normalized_lengths_at(&self, n: usize) -> Vec<f64> {
        let total = self.lengths[n].iter().fold(self.backend.zero(), |a, x| a + x);
        self.lengths[n].iter().map(|x| (x.clone() / &total).to_f64()).collect()
    }

    pub fn left(&self) -> &Real {
        &self.left
    }

    /// The induced map `T(n)`.
    pub fn iet_at(&self, n: usize) -> Iet {
        Iet::new(self.pis[n].clone(), self.lengths[n].clone(), self.left.clone(), self.backend)
            .expect("recorded data is valid")
    }

    /// Acceleration times `0 = n_0 < n_1 < ...`.
    pub fn accel_times(&self) -> &[usize] {
        &self.accel
    }

    /// True when the path ends strictly after the last acceleration time.
    pub fn accel_truncated(&self) -> bool {
        self.accel_truncated
    }

    /// Number of complete acceleration windows.
    pub fn num_windows(&self) -> usize {
        self.windows.len()
    }

    /// `B(n_k, n_{k+1})`.
    pub fn window(&self, k: usize) -> &IntMatrix {
        &self.windows[k]
    }

    /// `B(0, n_k)`.
    pub fn cumulative(&self, k: usize) -> &IntMatrix {
        &self.cumulative[k]
    }

    fn check_range(&self, m: usize, n: usize) -> Result<()> {
        if m > n || n > self.depth() {
            return Err(Error::Depth(format!("range {m}..{n} not inside 0..{}", self.depth())));
        }
        Ok(())
    }

    /// `B(m, n) = B(n-1, n) ... B(m, m+1)`.
    pub fn matrix(&self, m: usize, n: usize) -> Result<IntMatrix> {
        self.check_range(m, n)?;
        if let (Ok(i), Ok(j)) = (self.accel.binary_search(&m), self.accel.binary_search(&n)) {
            if j < self.cumulative.len() {
                return Ok(product_tree(&self.windows[i..j], self.d()));
            }
        }
        let mut x = IntMatrix::identity(self.d());
        for s in &self.steps[m..n] {
            x.add_row(s.loser, s.winner);
        }
        Ok(x)
    }

    /// `B(m, n)^{-1}`, exact.
    pub fn inverse(&self, m: usize, n: usize) -> Result<IntMatrix> {
        self.check_range(m, n)?;
        let mut x = IntMatrix::identity(self.d());
        for s in &self.steps[m..n] {
            x.sub_col(s.loser, s.winner);
        }
        Ok(x)
    }

    /// Logarithm of the entry-sum norm of `B(0, n_k)`.
    pub fn log_norm_cumulative(&self, k: usize) -> f64 {
        self.cumulative[k].log_norm()
    }

    /// Visit counts of `T(n)`-intervals to `T(m)`-intervals, found by iterating
    /// `T(m)` from the midpoint of each `T(n)`-interval until its first return.
    pub fn visit_counts(&self, m: usize, n: usize, cap: u64) -> Result<IntMatrix> {
        self.check_range(m, n)?;
        let d = self.d();
        let tm = self.iet_at(m);
        let tn = self.iet_at(n);
        let um = tm.top_breaks();
        let trm = tm.translations();
        let un = tn.top_breaks();
        let right_n = un[d].clone();
        let two = self.backend.from_int(2);
        let mut out = IntMatrix::zeros(d, d);
        for (pos, &alpha) in tn.pi().top().iter().enumerate() {
            let mut x = (un[pos].clone() + &un[pos + 1]) / &two;
            let mut count: u64 = 0;
            loop {
                let k = um.partition_point(|b| *b <= x) - 1;
                let beta = tm.pi().top()[k];
                let v = out.get(alpha, beta) + IBig::ONE;
                out.set(alpha, beta, v);
                x = x + &trm[beta];
                count += 1;
                if count > cap {
                    return Err(Error::ReturnTimeCap(cap));
                }
                if x < right_n {
                    break;
                }
            }
        }
        Ok(out)
    }

    /// Whether `B(m, n)` agrees with brute-force visit counts.
    pub fn visit_count_check(&self, m: usize, n: usize, cap: u64) -> Result<bool> {
        Ok(self.visit_counts(m, n, cap)? == self.matrix(m, n)?)
    }

    /// `max lambda(n) >= |lambda(0)| / ||B(0,n)|| >= min lambda(n)`, tested exactly
    /// in the rational backend.
    pub fn balanced_bounds_hold(&self, n: usize) -> Result<bool> {
        let b = self.matrix(0, n)?;
        let norm = b.norm();
        let total0 = self.lengths[0].iter().fold(self.backend.zero(), |a, x| a + x);
        let ln = &self.lengths[n];
        let max = ln.iter().cloned().fold(ln[0].clone(), |a, x| if x > a { x } else { a });
        let min = ln.iter().cloned().fold(ln[0].clone(), |a, x| if x < a { x } else { a });
        Ok(max.mul_int(&norm) >= total0 && total0 >= min.mul_int(&norm))
    }

    /// Writes one JSON object per elementary step; acceleration times also carry `B(0, n_k)`.
    pub fn write_jsonl<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let mut k = 0;
        for n in 0..=self.depth() {
            let mut obj = json!({
                "index": n,
                "pi": self.pis[n],
                "lengths": self.lengths[n].iter().map(Real::to_decimal_string).collect::<Vec<_>>(),
            });
            if n > 0 {
                let s = self.steps[n - 1];
                obj["type"] = json!(s.kind.code());
                obj["winner"] = json!(self.pis[n].letter(s.winner));
                obj["loser"] = json!(self.pis[n].letter(s.loser));
            }
            if k < self.cumulative.len() && self.accel[k] == n {
                obj["accel_index"] = json!(k);
                obj["matrix"] = json!(self.cumulative[k].to_string_rows());
                k += 1;
            }
            writeln!(w, "{obj}")?;
        }
        Ok(())
    }
}

/// Balanced product `M_{k-1} ... M_1 M_0` of a slice `[M_0, .., M_{k-1}]`.
pub fn product_tree(ms: &[IntMatrix], d: usize) -> IntMatrix {
    match ms.len() {
        0 => IntMatrix::identity(d),
        1 => ms[0].clone(),
        n => {
            let (lo, hi) = ms.split_at(n / 2);
            product_tree(hi, d).mul(&product_tree(lo, d))
        }
    }
}

/// Bits of precision needed to run `depth` steps on lengths that shrink by
/// about `rate` nats per step.
pub fn precision_for_depth(depth: usize, rate: f64) -> usize {
    let nats = 2.0 * rate * depth as f64 + ((depth + 1) as f64).ln();
    let bits = 2.0 * nats / std::f64::consts::LN_2 + 64.0;
    (bits.ceil() as usize).next_multiple_of(64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rot(a: &str, b: &str) -> Iet {
        let pi = PermutationPair::parse("A B / B A").unwrap();
        Iet::from_strs(pi, &[a, b], Backend::Rational).unwrap()
    }

    #[test]
    fn top_step_on_rotation() {
        let (next, kind, m) = elementary_step(&rot("0.6", "0.4")).unwrap();
        assert_eq!(kind, StepType::Top);
        assert_eq!(next.lengths()[0], Backend::Rational.parse_value("0.2").unwrap());
        assert_eq!(next.lengths()[1], Backend::Rational.parse_value("0.4").unwrap());
        assert_eq!(next.pi(), &PermutationPair::parse("AB/BA").unwrap());
        assert_eq!(m, IntMatrix::from_rows(&[vec![1, 0], vec![1, 1]]));
    }

    #[test]
    fn bottom_step_on_rotation() {
        let (next, kind, m) = elementary_step(&rot("0.3", "0.7")).unwrap();
        assert_eq!(kind, StepType::Bottom);
        assert_eq!(next.lengths()[1], Backend::Rational.parse_value("0.4").unwrap());
        assert_eq!(m, IntMatrix::from_rows(&[vec![1, 1], vec![0, 1]]));
    }

    #[test]
    fn tie_is_a_connection() {
        assert!(matches!(elementary_step(&rot("0.5", "0.5")), Err(Error::Connection { .. })));
    }

    #[test]
    fn inverse_is_inverse() {
        let p = iterate(&Iet::golden_rotation(512), 30, &IterateOptions::default()).unwrap();
        let b = p.matrix(3, 17).unwrap();
        assert_eq!(b.mul(&p.inverse(3, 17).unwrap()), IntMatrix::identity(2));
    }
}
