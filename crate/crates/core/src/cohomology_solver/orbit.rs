use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::function_spaces::PiecewiseFunction;
use crate::iet::{Iet, IetF64};

/// Lagrange interpolation through the given nodes.
fn lagrange(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    let mut acc = 0.0;
    for j in 0..xs.len() {
        let mut w = 1.0;
        for k in 0..xs.len() {
            if k != j {
                w *= (x - xs[k]) / (xs[j] - xs[k]);
            }
        }
        acc += w * ys[j];
    }
    acc
}

/// Solution of `u o T - u = psi` built on the orbit of `x0`: `u(T^j x0)` is the
/// Birkhoff sum `S_j psi(x0)`, interpolated by local cubics onto a uniform grid
/// of `grid + 1` points per interval and normalized so that `u(x0) = 0`.
pub(crate) fn orbit_solution(t: &Iet, psi: &PiecewiseFunction, x0: f64, points: usize, grid: usize) -> PiecewiseFunction {
    let f = t.to_f64();
    let mut orbit: Vec<(f64, f64)> = Vec::with_capacity(points);
    let mut x = x0;
    let mut s = 0.0;
    for _ in 0..points {
        orbit.push((x, s));
        s += psi.eval(x);
        x = f.apply(x);
    }
    orbit.sort_by(|a, b| a.0.total_cmp(&b.0));
    orbit.dedup_by(|a, b| a.0 == b.0);
    let xs: Vec<f64> = orbit.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = orbit.iter().map(|p| p.1).collect();
    let n = xs.len();
    let interp = |x: f64| {
        let i = xs.partition_point(|v| *v < x);
        let lo = i.saturating_sub(2).min(n.saturating_sub(4));
        let hi = (lo + 4).min(n);
        lagrange(&xs[lo..hi], &ys[lo..hi], x)
    };
    let mut u = PiecewiseFunction::from_samples(t, grid, interp);
    let shift = u.eval(x0);
    for a in 0..u.d() {
        if let Some(v) = u.piece_mut(a).samples.as_mut() {
            v.iter_mut().for_each(|y| *y -= shift);
        }
    }
    u
}

/// `max |u(T x) - u(x) - psi(x)|` over `n` seeded random points.
pub(crate) fn residual(f: &IetF64, u: &PiecewiseFunction, psi: &PiecewiseFunction, n: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let (l, r) = (f.left(), f.right());
    (0..n)
        .map(|_| {
            let x = rng.gen_range(l..r);
            (u.eval(f.apply(x)) - u.eval(x) - psi.eval(x)).abs()
        })
        .fold(0.0, f64::max)
}
