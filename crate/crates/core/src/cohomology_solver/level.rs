//! Piecewise polynomials in high precision on the intervals of one induction level.

use crate::error::{Error, Result};
use crate::function_spaces::PiecewiseFunction;
use crate::iet::Iet;
use crate::numeric::{flt, flt_ln_abs, flt_to_f64, Flt};
use crate::rauzy_veech::CocyclePath;

pub(crate) fn zero(bits: usize) -> Flt {
    Flt::ZERO.with_precision(bits).value()
}

pub(crate) fn dot(a: &[Flt], b: &[Flt], bits: usize) -> Flt {
    a.iter().zip(b).fold(zero(bits), |acc, (x, y)| acc + x * y)
}

pub(crate) fn norm(a: &[Flt], bits: usize) -> Flt {
    use dashu::base::SquareRoot;
    dot(a, a, bits).sqrt()
}

/// `a - c b`.
pub(crate) fn axpy(a: &[Flt], c: &Flt, b: &[Flt]) -> Vec<Flt> {
    a.iter().zip(b).map(|(x, y)| x - c * y).collect()
}

pub(crate) fn to_f64_vec(a: &[Flt]) -> Vec<f64> {
    a.iter().map(flt_to_f64).collect()
}

/// Removes the components of `v` along the orthonormal vectors `basis`, twice.
pub(crate) fn project_out(v: &[Flt], basis: &[Vec<Flt>], bits: usize) -> Vec<Flt> {
    let mut w = v.to_vec();
    for _ in 0..2 {
        for b in basis {
            let c = dot(&w, b, bits);
            w = axpy(&w, &c, b);
        }
    }
    w
}

/// Greedy Gram-Schmidt: appends to `basis` up to `count` directions from
/// `candidates`, each time the one with the largest residual.
pub(crate) fn extend_orthonormal(basis: &mut Vec<Vec<Flt>>, candidates: &[Vec<Flt>], count: usize, bits: usize) {
    let mut rest: Vec<Vec<Flt>> = candidates.to_vec();
    for _ in 0..count {
        let residuals: Vec<Vec<Flt>> = rest.iter().map(|c| project_out(c, basis, bits)).collect();
        let Some((i, n)) = residuals
            .iter()
            .map(|r| norm(r, bits))
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
        else {
            return;
        };
        if n == zero(bits) {
            return;
        }
        basis.push(residuals[i].iter().map(|x| x / &n).collect());
        rest.remove(i);
    }
}

/// Coefficients of `p(s + t)` in `t`.
pub(crate) fn taylor_shift(p: &[Flt], s: &Flt) -> Vec<Flt> {
    let mut q = p.to_vec();
    let n = q.len();
    for i in 0..n {
        for j in (i..n - 1).rev() {
            let add = s * &q[j + 1];
            q[j] += add;
        }
    }
    q
}

fn horner(p: &[Flt], t: &Flt, bits: usize) -> Flt {
    p.iter().rev().fold(zero(bits), |acc, c| acc * t + c)
}

/// A function given by one polynomial in the local coordinate on each interval
/// of an induction level, indexed by letter.
#[derive(Clone, Debug)]
pub(crate) struct LevelFunction {
    pub coeffs: Vec<Vec<Flt>>,
    pub bits: usize,
}

impl LevelFunction {
    pub fn from_piecewise(f: &PiecewiseFunction, bits: usize) -> Result<Self> {
        if f.has_samples() {
            return Err(Error::InvalidArgument("sampled pieces are not supported here; use polynomial data".into()));
        }
        let coeffs = f.pieces().iter().map(|p| p.poly.iter().map(|c| flt(*c, bits)).collect()).collect();
        Ok(LevelFunction { coeffs, bits })
    }

    /// One elementary induction step: the loser collects the winner's values.
    pub fn step(&mut self, winner: usize, loser: usize, winner_new_length: &Flt) {
        let shifted = taylor_shift(&self.coeffs[winner], winner_new_length);
        let l = &mut self.coeffs[loser];
        if l.len() < shifted.len() {
            l.resize(shifted.len(), zero(self.bits));
        }
        for (a, b) in l.iter_mut().zip(shifted) {
            *a += b;
        }
    }

    /// Applies the special Birkhoff sum operator `S(m, n)` of the path.
    pub fn advance(&mut self, path: &CocyclePath, m: usize, n: usize) {
        for (i, s) in path.steps()[m..n].iter().enumerate() {
            let w_len = path.lengths_at(m + i + 1)[s.winner].to_flt(self.bits);
            self.step(s.winner, s.loser, &w_len);
        }
    }

    pub fn eval(&self, a: usize, t: &Flt) -> Flt {
        horner(&self.coeffs[a], t, self.bits)
    }

    pub fn derivative(&self) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .map(|p| {
                if p.len() <= 1 {
                    vec![zero(self.bits)]
                } else {
                    p.iter().enumerate().skip(1).map(|(j, c)| c * Flt::from(j as u64)).collect()
                }
            })
            .collect();
        LevelFunction { coeffs, bits: self.bits }
    }

    pub fn means(&self, lengths: &[Flt]) -> Vec<Flt> {
        self.coeffs
            .iter()
            .zip(lengths)
            .map(|(p, l)| {
                let mut acc = zero(self.bits);
                let mut lp = Flt::ONE.with_precision(self.bits).value();
                for (j, c) in p.iter().enumerate() {
                    acc += c * &lp / Flt::from((j + 1) as u64);
                    lp = lp * l;
                }
                acc
            })
            .collect()
    }

    /// Primitive with zero mean on each interval.
    pub fn primitive_zero_mean(&self, lengths: &[Flt]) -> Self {
        let mut coeffs: Vec<Vec<Flt>> = self
            .coeffs
            .iter()
            .map(|p| {
                let mut q = vec![zero(self.bits)];
                q.extend(p.iter().enumerate().map(|(j, c)| c / Flt::from((j + 1) as u64)));
                q
            })
            .collect();
        let prim = LevelFunction { coeffs: coeffs.clone(), bits: self.bits };
        for (q, m) in coeffs.iter_mut().zip(prim.means(lengths)) {
            q[0] -= m;
        }
        LevelFunction { coeffs, bits: self.bits }
    }

    pub fn add_constants(&mut self, c: &[Flt]) {
        for (p, v) in self.coeffs.iter_mut().zip(c) {
            p[0] += v;
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(p, q)| {
                let n = p.len().max(q.len());
                (0..n)
                    .map(|j| {
                        let a = p.get(j).cloned().unwrap_or_else(|| zero(self.bits));
                        match q.get(j) {
                            Some(b) => a - b,
                            None => a,
                        }
                    })
                    .collect()
            })
            .collect();
        LevelFunction { coeffs, bits: self.bits }
    }

    /// Natural log of a sup norm estimate: the maximum over `samples + 1`
    /// points per interval plus half a grid step times the sampled maximum
    /// of the derivative.
    pub fn ln_sup_norm(&self, lengths: &[Flt], samples: usize) -> f64 {
        let d = self.derivative();
        let mut best = f64::NEG_INFINITY;
        for (a, l) in lengths.iter().enumerate() {
            let h = l / Flt::from(samples as u64);
            let mut m = f64::NEG_INFINITY;
            let mut dm = f64::NEG_INFINITY;
            for i in 0..=samples {
                let t = &h * Flt::from(i as u64);
                m = m.max(flt_ln_abs(&self.eval(a, &t)));
                dm = dm.max(flt_ln_abs(&d.eval(a, &t)));
            }
            best = best.max(log_add(m, dm + flt_ln_abs(&h) - std::f64::consts::LN_2));
        }
        best
    }

    pub fn to_piecewise(&self, t: &Iet) -> PiecewiseFunction {
        PiecewiseFunction::from_poly(t, self.coeffs.iter().map(|p| to_f64_vec(p)).collect())
    }
}

fn log_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let m = a.max(b);
    m + ((a - m).exp() + (b - m).exp()).ln()
}

/// Lengths at time `n` of the path, in `bits` of precision.
pub(crate) fn level_lengths(path: &CocyclePath, n: usize, bits: usize) -> Vec<Flt> {
    path.lengths_at(n).iter().map(|x| x.to_flt(bits)).collect()
}
