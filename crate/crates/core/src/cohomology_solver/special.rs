use crate::error::{Error, Result};
use crate::function_spaces::PiecewiseFunction;
use crate::rauzy_veech::CocyclePath;

use super::level::{level_lengths, LevelFunction};

const ORBIT_WORK_CAP: u64 = 50_000_000;

/// Working precision for special sums along the first `n` steps of `path`.
pub(crate) fn working_bits(path: &CocyclePath, n: usize) -> usize {
    let ln_len: f64 = path.lengths_at(n).iter().map(|x| x.ln_abs()).fold(f64::INFINITY, f64::min);
    let lost = (-ln_len).max(0.0) / std::f64::consts::LN_2;
    let bits = 2 * lost.ceil() as usize + 192;
    match path.backend().bits() {
        Some(b) => bits.min(b.max(192)),
        None => bits,
    }
}

/// Special Birkhoff sum `S(m, n) phi`: on each interval of level `n`, the sum
/// of `phi` along the orbit of the level-`m` map until the first return.
/// Polynomial parts are summed exactly in high precision; sampled parts are
/// summed along orbits of the grid points.
pub fn special_sum(path: &CocyclePath, m: usize, n: usize, phi: &PiecewiseFunction) -> Result<PiecewiseFunction> {
    if m > n || n > path.depth() {
        return Err(Error::InvalidArgument(format!("levels {m}..{n} outside 0..{}", path.depth())));
    }
    let tm = path.iet_at(m);
    phi.check_domain(&tm, 1e-9 * tm.total_length().to_f64())?;
    let bits = working_bits(path, n);
    let mut poly_part = phi.clone();
    for a in 0..phi.d() {
        let p = poly_part.piece_mut(a);
        p.samples = None;
        p.sample_error = 0.0;
    }
    let mut lf = LevelFunction::from_piecewise(&poly_part, bits)?;
    lf.advance(path, m, n);
    let tn = path.iet_at(n);
    let mut out = lf.to_piecewise(&tn);
    if phi.has_samples() {
        let grid = phi.pieces().iter().filter_map(|p| p.samples.as_ref().map(|s| s.len() - 1)).max().unwrap_or(1);
        let b = path.matrix(m, n)?;
        let mut sampled = phi.clone();
        for a in 0..phi.d() {
            sampled.piece_mut(a).poly = vec![0.0];
        }
        let fm = tm.to_f64();
        let work: u64 = (0..phi.d())
            .map(|a| b.row(a).iter().map(|v| u64::try_from(v.clone()).unwrap_or(u64::MAX)).sum::<u64>())
            .fold(0u64, |acc, r| acc.saturating_add(r.saturating_mul(grid as u64 + 1)));
        if work > ORBIT_WORK_CAP {
            return Err(Error::ReturnTimeCap(ORBIT_WORK_CAP));
        }
        let mut err = 0.0f64;
        for a in 0..phi.d() {
            let r: u64 = b.row(a).iter().map(|v| u64::try_from(v.clone()).unwrap_or(u64::MAX)).sum();
            let piece = out.piece(a).clone();
            let h = piece.length / grid as f64;
            let samples: Vec<f64> = (0..=grid)
                .map(|i| {
                    let mut x = piece.start + (i as f64 * h).min(piece.length * (1.0 - 1e-12));
                    let mut acc = 0.0;
                    for _ in 0..r {
                        acc += sampled.eval(x);
                        x = fm.apply(x);
                    }
                    acc
                })
                .collect();
            err = err.max(r as f64 * phi.pieces().iter().map(|p| p.sample_error).fold(0.0, f64::max));
            let p = out.piece_mut(a);
            p.samples = Some(samples);
            p.sample_error = err;
        }
    }
    Ok(out)
}

/// Both sides of the reduction of a Birkhoff sum `S_N phi(x)` to special
/// Birkhoff sums along the acceleration times.
#[derive(Clone, Debug)]
pub struct BirkhoffBound {
    pub lhs: f64,
    pub rhs: f64,
    /// Largest `k` with the orbit point closest to the left end in `I(T(n_k))`.
    pub k: usize,
}

impl BirkhoffBound {
    pub fn holds(&self) -> bool {
        self.lhs <= self.rhs
    }
}

/// Precomputed `||S(0, n_l) phi||` and `||B(n_l, n_{l+1})||` for repeated checks.
pub struct BirkhoffBoundChecker {
    phi: PiecewiseFunction,
    t0: crate::iet::IetF64,
    level_lengths: Vec<f64>,
    sup_norms: Vec<f64>,
    window_norms: Vec<f64>,
}

impl BirkhoffBoundChecker {
    /// Uses acceleration levels `0..=levels` of the path.
    pub fn new(path: &CocyclePath, phi: &PiecewiseFunction, levels: usize) -> Result<Self> {
        let acc = path.accel_times();
        let levels = levels.min(path.num_windows());
        if levels == 0 {
            return Err(Error::Depth("path has no acceleration window".into()));
        }
        let t = path.iet_at(0);
        phi.check_domain(&t, 1e-9 * t.total_length().to_f64())?;
        let bits = working_bits(path, acc[levels]);
        let mut lf = LevelFunction::from_piecewise(phi, bits)?;
        let mut sup_norms = Vec::with_capacity(levels + 1);
        let mut level_len = Vec::with_capacity(levels + 1);
        for l in 0..=levels {
            if l > 0 {
                lf.advance(path, acc[l - 1], acc[l]);
            }
            let lens = level_lengths(path, acc[l], bits);
            let tail: f64 = phi.pieces().iter().map(|p| p.sample_error).fold(0.0, f64::max);
            sup_norms.push(lf.ln_sup_norm(&lens, 64).exp() + tail * crate::numeric::ibig_to_f64(&path.cumulative(l).max_row_sum()));
            level_len.push(path.lengths_at(acc[l]).iter().map(|x| x.to_f64()).sum());
        }
        let window_norms = (0..levels).map(|l| crate::numeric::ibig_to_f64(&path.window(l).norm())).collect();
        Ok(BirkhoffBoundChecker { phi: phi.clone(), t0: t.to_f64(), level_lengths: level_len, sup_norms, window_norms })
    }

    pub fn check(&self, x: f64, n: usize) -> Result<BirkhoffBound> {
        let left = self.t0.left();
        let mut y = x;
        let mut closest = f64::INFINITY;
        let mut lhs = 0.0;
        for _ in 0..n {
            lhs += self.phi.eval(y);
            closest = closest.min(y - left);
            y = self.t0.apply(y);
        }
        let k = self.level_lengths.iter().rposition(|l| closest < *l).unwrap_or(0);
        if k >= self.window_norms.len() {
            return Err(Error::Depth(format!("orbit returns closer than the deepest level {k}")));
        }
        let rhs = (0..=k).map(|l| self.window_norms[l] * self.sup_norms[l]).sum();
        Ok(BirkhoffBound { lhs: lhs.abs(), rhs, k })
    }
}

/// `|S_N phi(x)|` and `sum_{l<=k} ||B(n_l, n_{l+1})|| ||S(0, n_l) phi||`.
pub fn birkhoff_bound_check(path: &CocyclePath, phi: &PiecewiseFunction, x: f64, n: usize) -> Result<BirkhoffBound> {
    BirkhoffBoundChecker::new(path, phi, path.num_windows())?.check(x, n)
}
