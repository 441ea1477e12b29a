//! Piecewise smooth functions on the top intervals of an interval exchange,
//! the boundary operator and spaces of piecewise polynomials.

use dashu::integer::IBig;
use serde::{Deserialize, Serialize};

use crate::combinatorics::{mark, PermutationPair, Side, SingularityStructure};
use crate::error::{Error, Result};
use crate::iet::Iet;
use crate::linalg::IntMatrix;
use crate::numeric::Real;

/// Data on one top interval: a polynomial in the local coordinate
/// `t = x - start` plus an optional sampled remainder on a uniform grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Piece {
    pub letter: String,
    pub start: f64,
    pub length: f64,
    pub poly: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<Vec<f64>>,
    #[serde(default)]
    pub sample_error: f64,
}

impl Piece {
    fn eval_poly(&self, t: f64) -> f64 {
        self.poly.iter().rev().fold(0.0, |acc, c| acc * t + c)
    }

    fn eval_samples(&self, t: f64) -> f64 {
        match &self.samples {
            None => 0.0,
            Some(s) => interpolate_uniform(s, self.length, t),
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.eval_poly(t) + self.eval_samples(t)
    }

    fn sample_step(&self) -> Option<f64> {
        self.samples.as_ref().map(|s| self.length / (s.len() - 1) as f64)
    }
}

/// Cubic Lagrange interpolation of samples on the uniform grid of `[0, len]`.
pub fn interpolate_uniform(s: &[f64], len: f64, t: f64) -> f64 {
    let n = s.len() - 1;
    if n == 0 {
        return s[0];
    }
    let h = len / n as f64;
    let pos = (t / h).clamp(0.0, n as f64);
    if n < 3 {
        let i = (pos.floor() as usize).min(n - 1);
        let f = pos - i as f64;
        return s[i] * (1.0 - f) + s[i + 1] * f;
    }
    let i = (pos.floor() as usize).clamp(1, n - 2) - 1;
    let u = pos - i as f64;
    let mut acc = 0.0;
    for j in 0..4 {
        let mut w = 1.0;
        for k in 0..4 {
            if k != j {
                w *= (u - k as f64) / (j as f64 - k as f64);
            }
        }
        acc += w * s[i + j];
    }
    acc
}

/// A function on the union of the top intervals, indexed by letter.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseFunction {
    pieces: Vec<Piece>,
    /// Letters in top order, for point location.
    order: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
struct PiecewiseJson {
    intervals: Vec<Piece>,
}

impl PiecewiseFunction {
    fn shell(t: &Iet) -> Self {
        let starts: Vec<f64> = t.top_breaks().iter().map(Real::to_f64).collect();
        let pi = t.pi();
        let pieces = (0..t.d())
            .map(|a| Piece {
                letter: pi.letter(a).to_string(),
                start: starts[pi.pos_top(a)],
                length: t.lengths()[a].to_f64(),
                poly: vec![0.0],
                samples: None,
                sample_error: 0.0,
            })
            .collect();
        PiecewiseFunction { pieces, order: pi.top().to_vec() }
    }

    pub fn zero(t: &Iet) -> Self {
        Self::shell(t)
    }

    /// Piecewise constant function with the given value on each letter.
    pub fn constant(t: &Iet, values: &[f64]) -> Self {
        Self::from_poly(t, values.iter().map(|v| vec![*v]).collect())
    }

    /// Polynomial coefficients in the local coordinate, one list per letter.
    pub fn from_poly(t: &Iet, coeffs: Vec<Vec<f64>>) -> Self {
        let mut f = Self::shell(t);
        for (p, c) in f.pieces.iter_mut().zip(coeffs) {
            p.poly = if c.is_empty() { vec![0.0] } else { c };
        }
        f
    }

    /// Taylor polynomial of `cos(2 pi k x + phase)` of the given degree on each
    /// interval; the truncation bound is stored as the sample error.
    pub fn trig(t: &Iet, k: f64, phase: f64, degree: usize) -> Self {
        let mut f = Self::shell(t);
        let w = 2.0 * std::f64::consts::PI * k;
        for p in f.pieces.iter_mut() {
            let base = w * p.start + phase;
            let mut c = Vec::with_capacity(degree + 1);
            let mut fact = 1.0;
            for j in 0..=degree {
                if j > 0 {
                    fact *= j as f64;
                }
                c.push(w.powi(j as i32) / fact * (base + j as f64 * std::f64::consts::FRAC_PI_2).cos());
            }
            let tail = (w.abs() * p.length).powi(degree as i32 + 1) / (fact * (degree + 1) as f64);
            p.poly = c;
            p.sample_error = tail;
        }
        f
    }

    /// Samples `g(x)` on a uniform grid of `n + 1` points per interval.
    pub fn from_samples(t: &Iet, n: usize, g: impl Fn(f64) -> f64) -> Self {
        let mut f = Self::shell(t);
        for p in f.pieces.iter_mut() {
            let h = p.length / n as f64;
            p.samples = Some((0..=n).map(|i| g(p.start + i as f64 * h)).collect());
        }
        f
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let j: PiecewiseJson = serde_json::from_str(s)?;
        let mut order: Vec<usize> = (0..j.intervals.len()).collect();
        order.sort_by(|&a, &b| j.intervals[a].start.total_cmp(&j.intervals[b].start));
        let mut pieces = j.intervals;
        let mut idx: Vec<usize> = (0..pieces.len()).collect();
        idx.sort_by(|&a, &b| pieces[a].letter.cmp(&pieces[b].letter));
        let sorted: Vec<Piece> = idx.iter().map(|&i| pieces[i].clone()).collect();
        let pos_of: Vec<usize> = {
            let mut v = vec![0; idx.len()];
            for (new, &old) in idx.iter().enumerate() {
                v[old] = new;
            }
            v
        };
        pieces = sorted;
        let order = order.iter().map(|&o| pos_of[o]).collect();
        Ok(PiecewiseFunction { pieces, order })
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string(&PiecewiseJson { intervals: self.pieces.clone() }).unwrap()
    }

    /// Checks that the pieces match the intervals of `t` up to `tol`.
    pub fn check_domain(&self, t: &Iet, tol: f64) -> Result<()> {
        let shell = Self::shell(t);
        for (a, b) in self.pieces.iter().zip(&shell.pieces) {
            if a.letter != b.letter || (a.start - b.start).abs() > tol || (a.length - b.length).abs() > tol {
                return Err(Error::InvalidArgument(format!("function domain does not match interval {}", b.letter)));
            }
        }
        Ok(())
    }

    pub fn d(&self) -> usize {
        self.pieces.len()
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    pub fn piece(&self, a: usize) -> &Piece {
        &self.pieces[a]
    }

    pub fn piece_mut(&mut self, a: usize) -> &mut Piece {
        &mut self.pieces[a]
    }

    pub fn has_samples(&self) -> bool {
        self.pieces.iter().any(|p| p.samples.is_some())
    }

    pub fn degree(&self) -> usize {
        self.pieces.iter().map(|p| p.poly.len().saturating_sub(1)).max().unwrap_or(0)
    }

    pub fn letter_at(&self, x: f64) -> usize {
        let k = self.order.partition_point(|&a| self.pieces[a].start <= x);
        self.order[k.clamp(1, self.order.len()) - 1]
    }

    pub fn eval(&self, x: f64) -> f64 {
        let a = self.letter_at(x);
        let p = &self.pieces[a];
        p.eval(x - p.start)
    }

    /// Value on interval `a` at local coordinate `t`.
    pub fn eval_local(&self, a: usize, t: f64) -> f64 {
        self.pieces[a].eval(t)
    }

    /// One-sided values at the endpoint marks, indexed by mark.
    pub fn values_at_marks(&self) -> Vec<f64> {
        let mut v = vec![0.0; 2 * self.d()];
        for (a, p) in self.pieces.iter().enumerate() {
            v[mark(a, Side::L)] = p.eval(0.0);
            v[mark(a, Side::R)] = p.eval(p.length);
        }
        v
    }

    pub fn boundary(&self, s: &SingularityStructure) -> Vec<f64> {
        s.boundary_of(&self.values_at_marks())
    }

    pub fn derivative(&self) -> Self {
        let mut f = self.clone();
        for p in f.pieces.iter_mut() {
            p.poly = if p.poly.len() <= 1 {
                vec![0.0]
            } else {
                p.poly.iter().enumerate().skip(1).map(|(j, c)| j as f64 * c).collect()
            };
            if let (Some(s), Some(h)) = (&p.samples, p.sample_step()) {
                let n = s.len() - 1;
                let ds: Vec<f64> = (0..=n)
                    .map(|i| match i {
                        0 => (-3.0 * s[0] + 4.0 * s[1] - s[2]) / (2.0 * h),
                        i if i == n => (3.0 * s[n] - 4.0 * s[n - 1] + s[n - 2]) / (2.0 * h),
                        i => (s[i + 1] - s[i - 1]) / (2.0 * h),
                    })
                    .collect();
                p.samples = Some(ds);
                p.sample_error = 2.0 * p.sample_error / h + h * h;
            } else {
                p.sample_error *= (p.poly.len() + 1) as f64 / p.length.max(1e-300);
            }
        }
        f
    }

    /// Mean value on each interval.
    pub fn means(&self) -> Vec<f64> {
        self.pieces
            .iter()
            .map(|p| {
                let poly: f64 = p.poly.iter().enumerate().map(|(j, c)| c * p.length.powi(j as i32) / (j + 1) as f64).sum();
                let samp = match &p.samples {
                    None => 0.0,
                    Some(s) => {
                        let n = s.len() - 1;
                        let tr: f64 = s.iter().sum::<f64>() - 0.5 * (s[0] + s[n]);
                        tr / n as f64
                    }
                };
                poly + samp
            })
            .collect()
    }

    /// Integral over the whole interval.
    pub fn integral(&self) -> f64 {
        self.means().iter().zip(&self.pieces).map(|(m, p)| m * p.length).sum()
    }

    /// Total variation on each interval, summed.
    pub fn bv_seminorm(&self) -> f64 {
        const N: usize = 2048;
        self.pieces
            .iter()
            .map(|p| {
                let mut prev = p.eval(0.0);
                let mut tv = 0.0;
                for i in 1..=N {
                    let v = p.eval(p.length * i as f64 / N as f64);
                    tv += (v - prev).abs();
                    prev = v;
                }
                tv
            })
            .sum()
    }

    /// Upper bound for the sup norm from dense sampling plus a derivative margin.
    pub fn sup_norm(&self) -> f64 {
        const N: usize = 256;
        let d = self.derivative();
        self.pieces
            .iter()
            .zip(&d.pieces)
            .map(|(p, dp)| {
                let h = p.length / N as f64;
                let mut m: f64 = 0.0;
                let mut dm: f64 = 0.0;
                for i in 0..=N {
                    let t = i as f64 * h;
                    m = m.max(p.eval(t).abs());
                    dm = dm.max(dp.eval(t).abs());
                }
                m + 0.5 * h * dm + p.sample_error
            })
            .fold(0.0, f64::max)
    }

    pub fn scaled(&self, s: f64) -> Self {
        let mut f = self.clone();
        for p in f.pieces.iter_mut() {
            p.poly.iter_mut().for_each(|c| *c *= s);
            if let Some(v) = p.samples.as_mut() {
                v.iter_mut().for_each(|c| *c *= s);
            }
            p.sample_error *= s.abs();
        }
        f
    }

    /// Pointwise sum; sampled parts must share grids.
    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.d() != other.d() {
            return Err(Error::InvalidArgument("functions live on different partitions".into()));
        }
        let mut f = self.clone();
        for (p, q) in f.pieces.iter_mut().zip(&other.pieces) {
            if p.poly.len() < q.poly.len() {
                p.poly.resize(q.poly.len(), 0.0);
            }
            for (a, b) in p.poly.iter_mut().zip(&q.poly) {
                *a += b;
            }
            p.samples = match (p.samples.take(), &q.samples) {
                (None, None) => None,
                (Some(s), None) => Some(s),
                (None, Some(s)) => Some(s.clone()),
                (Some(s), Some(t)) => {
                    if s.len() != t.len() {
                        return Err(Error::InvalidArgument("sample grids differ".into()));
                    }
                    Some(s.iter().zip(t).map(|(a, b)| a + b).collect())
                }
            };
            p.sample_error += q.sample_error;
        }
        Ok(f)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scaled(-1.0))
    }

    /// Subtracts a piecewise constant function.
    pub fn minus_constants(&self, c: &[f64]) -> Self {
        let mut f = self.clone();
        for (p, v) in f.pieces.iter_mut().zip(c) {
            p.poly[0] -= v;
        }
        f
    }

    /// Birkhoff sum `sum_{j<N} phi(T^j x)` of this function along an orbit of `t`.
    /// In the rational backend the sum is exact in the values produced by `eval`.
    pub fn birkhoff_sum(&self, t: &Iet, x: &Real, n: usize) -> Result<Real> {
        let b = t.backend();
        let mut acc = b.zero();
        let mut y = x.clone();
        for _ in 0..n {
            acc = acc + b.from_f64(self.eval(y.to_f64()));
            y = t.evaluate(&y)?;
        }
        Ok(acc)
    }
}

/// Conditions of each boundary row `sum_c eps(c) D^i chi(c) = 0`, `i < r`,
/// on coefficients `a_{alpha, j}` of `t^j`, flattened as `alpha * r + j`.
fn boundary_conditions(pi: &PermutationPair, lengths: &[IBig], r: usize) -> IntMatrix {
    let d = pi.d();
    let sing = pi.singularities();
    let cycles = sing.cycles();
    let mut m = IntMatrix::zeros(cycles.len() * r, d * r);
    for i in 0..r {
        for (ci, c) in cycles.iter().enumerate() {
            let row = i * cycles.len() + ci;
            for &mk in c {
                let a = crate::combinatorics::mark_letter(mk);
                let sign = IBig::from(crate::combinatorics::mark_sign(mk));
                for j in i..r {
                    let falling: IBig = ((j - i + 1)..=j).map(|k| IBig::from(k)).product();
                    let coef = match crate::combinatorics::mark_side(mk) {
                        Side::L if j == i => falling,
                        Side::L => continue,
                        Side::R => falling * lengths[a].pow(j - i),
                    };
                    let v = m.get(row, a * r + j) + &sign * coef;
                    m.set(row, a * r + j, v);
                }
            }
        }
    }
    m
}

/// Coboundary coefficients of `x^j`, `2 <= j <= r`, flattened as in `boundary_conditions`.
fn polynomial_coboundaries(pi: &PermutationPair, lengths: &[IBig], r: usize) -> IntMatrix {
    let d = pi.d();
    let mut start = vec![IBig::ZERO; d];
    let mut acc = IBig::ZERO;
    for &a in pi.top() {
        start[a] = acc.clone();
        acc += &lengths[a];
    }
    let mut bstart = vec![IBig::ZERO; d];
    let mut acc = IBig::ZERO;
    for &a in pi.bottom() {
        bstart[a] = acc.clone();
        acc += &lengths[a];
    }
    let rows = r.saturating_sub(1);
    let mut m = IntMatrix::zeros(rows, d * r);
    for (row, j) in (2..=r).enumerate() {
        for a in 0..d {
            // (b + t)^j - (s + t)^j with b = bstart, s = start.
            for k in 0..j {
                let binom = binomial(j, k);
                let coef = &binom * (bstart[a].pow(j - k) - start[a].pow(j - k));
                m.set(row, a * r + k, coef);
            }
        }
    }
    m
}

fn binomial(n: usize, k: usize) -> IBig {
    let mut b = IBig::ONE;
    for i in 0..k {
        b = b * IBig::from(n - i) / IBig::from(i + 1);
    }
    b
}

/// Dimensions of the piecewise polynomial spaces of degree `< r`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PolySpaceDims {
    pub r: usize,
    pub gamma: usize,
    pub gamma_boundary: usize,
    pub gamma_trivial: usize,
    pub quotient: usize,
}

/// Exact ranks for integer lengths `2, 3, 5, 7, ...` (distinct primes).
pub fn poly_space_dims(pi: &PermutationPair, mu: usize, r: usize) -> PolySpaceDims {
    let lengths: Vec<IBig> = primes(pi.d()).into_iter().map(IBig::from).collect();
    poly_space_dims_with(pi, &lengths, mu, r)
}

pub fn poly_space_dims_with(pi: &PermutationPair, lengths: &[IBig], mu: usize, r: usize) -> PolySpaceDims {
    let d = pi.d();
    let cond = boundary_conditions(pi, lengths, r);
    let gamma_boundary = d * r - cond.rank();
    let cob = polynomial_coboundaries(pi, lengths, r);
    let gamma_trivial = mu + cob.rank();
    PolySpaceDims { r, gamma: d * r, gamma_boundary, gamma_trivial, quotient: gamma_boundary - gamma_trivial }
}

fn primes(n: usize) -> Vec<u64> {
    let mut out = Vec::new();
    let mut k = 2u64;
    while out.len() < n {
        if (2..k).take_while(|p| p * p <= k).all(|p| k % p != 0) {
            out.push(k);
        }
        k += 1;
    }
    out
}

/// Real basis of `Gamma_boundary(r)` for the lengths of `t`, as coefficient
/// vectors flattened `alpha * r + j`.
pub fn boundary_poly_basis(t: &Iet, r: usize) -> Vec<Vec<f64>> {
    let pi = t.pi();
    let d = pi.d();
    let sing = pi.singularities();
    let lengths = t.lengths_f64();
    let cycles = sing.cycles();
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for i in 0..r {
        for c in cycles {
            let mut row = vec![0.0; d * r];
            for &mk in c {
                let a = crate::combinatorics::mark_letter(mk);
                let sign = crate::combinatorics::mark_sign(mk) as f64;
                for j in i..r {
                    let falling: f64 = ((j - i + 1)..=j).map(|k| k as f64).product();
                    match crate::combinatorics::mark_side(mk) {
                        Side::L if j == i => row[a * r + j] += sign * falling,
                        Side::L => {}
                        Side::R => row[a * r + j] += sign * falling * lengths[a].powi((j - i) as i32),
                    }
                }
            }
            rows.push(row);
        }
    }
    let m = nalgebra::DMatrix::from_fn(rows.len(), d * r, |i, j| rows[i][j]);
    crate::linalg::nullspace_f64(&m, 1e-10)
}

/// Coefficient vectors of the coboundaries of `x^j`, `2 <= j <= r`, for the
/// lengths and positions of `t`, flattened as `alpha * r + j`.
pub fn polynomial_coboundary_basis(t: &Iet, r: usize) -> Vec<Vec<f64>> {
    let d = t.d();
    let top: Vec<f64> = t.top_breaks().iter().map(Real::to_f64).collect();
    let bottom: Vec<f64> = t.bottom_breaks().iter().map(Real::to_f64).collect();
    let pi = t.pi();
    (2..=r)
        .map(|j| {
            let mut v = vec![0.0; d * r];
            for a in 0..d {
                let (s, b) = (top[pi.pos_top(a)], bottom[pi.pos_bottom(a)]);
                for k in 0..j {
                    let c = crate::numeric::ibig_to_f64(&binomial(j, k));
                    v[a * r + k] = c * (b.powi((j - k) as i32) - s.powi((j - k) as i32));
                }
            }
            v
        })
        .collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Greedy Gram-Schmidt in double precision, as in the high precision solver.
fn extend_orthonormal(basis: &mut Vec<Vec<f64>>, candidates: &[Vec<f64>], count: usize) {
    let mut rest = candidates.to_vec();
    for _ in 0..count {
        let residual = |c: &Vec<f64>| {
            let mut w = c.clone();
            for _ in 0..2 {
                for b in basis.iter() {
                    let k = dot(&w, b);
                    w.iter_mut().zip(b).for_each(|(x, y)| *x -= k * y);
                }
            }
            w
        };
        let res: Vec<Vec<f64>> = rest.iter().map(residual).collect();
        let Some((i, n)) = res.iter().map(|r| dot(r, r).sqrt()).enumerate().max_by(|a, b| a.1.total_cmp(&b.1))
        else {
            return;
        };
        if n == 0.0 {
            return;
        }
        basis.push(res[i].iter().map(|x| x / n).collect());
        rest.remove(i);
    }
}

/// Orthonormal basis of the complement of `Gamma_T(r)` inside `Gamma_boundary(r)`,
/// where `Gamma_T(r)` is spanned by the stable vectors (as constants) and the
/// coboundaries of `x^j`, `2 <= j <= r`. For `r = 1` this is `Gamma_u(T)`.
pub fn quotient_poly_basis(t: &Iet, gamma_s: &[Vec<f64>], r: usize) -> Vec<Vec<f64>> {
    let d = t.d();
    let mut trivial: Vec<Vec<f64>> = gamma_s
        .iter()
        .map(|v| {
            let mut w = vec![0.0; d * r];
            for a in 0..d {
                w[a * r] = v[a];
            }
            w
        })
        .collect();
    trivial.extend(polynomial_coboundary_basis(t, r));
    let mut basis = Vec::new();
    extend_orthonormal(&mut basis, &trivial, trivial.len());
    let n_trivial = basis.len();
    let boundary = boundary_poly_basis(t, r);
    extend_orthonormal(&mut basis, &boundary, boundary.len() - n_trivial);
    basis.split_off(n_trivial)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::Backend;

    fn rot() -> Iet {
        let pi = PermutationPair::parse("A B / B A").unwrap();
        Iet::from_strs(pi, &["0.6", "0.4"], Backend::Rational).unwrap()
    }

    #[test]
    fn constant_one_has_zero_boundary() {
        let t = rot();
        let f = PiecewiseFunction::constant(&t, &[1.0, 1.0]);
        let b = f.boundary(&t.pi().singularities());
        assert_eq!(b, vec![0.0]);
    }

    #[test]
    fn trig_taylor_matches_cosine() {
        let t = rot();
        let f = PiecewiseFunction::trig(&t, 1.0, 0.0, 30);
        for i in 0..100 {
            let x = i as f64 / 100.0;
            assert!((f.eval(x) - (2.0 * std::f64::consts::PI * x).cos()).abs() < 1e-12);
        }
    }

    #[test]
    fn json_round_trip() {
        let t = rot();
        let f = PiecewiseFunction::from_poly(&t, vec![vec![1.0, 2.0], vec![-0.5]]);
        let g = PiecewiseFunction::from_json_str(&f.to_json_string()).unwrap();
        assert_eq!(f, g);
    }

    #[test]
    fn torus_space_dims() {
        let pi = PermutationPair::parse("A B / B A").unwrap();
        let dims = poly_space_dims(&pi, 1, 2);
        assert_eq!((dims.gamma, dims.gamma_boundary, dims.gamma_trivial), (4, 3, 2));
    }
}
