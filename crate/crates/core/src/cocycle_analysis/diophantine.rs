use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{stable_space, windows_f64, ScaledProduct, StableSpaces};
use crate::error::{Error, Result};
use crate::linalg::complement;
use crate::rauzy_veech::CocyclePath;

#[derive(Clone, Debug)]
pub struct DcOptions {
    /// Threshold for the growth exponents in condition (c).
    pub epsilon_c: f64,
    /// Floor for condition (d).
    pub floor_d: f64,
    pub samples_d: usize,
    pub seed: u64,
    pub min_points: usize,
}

impl Default for DcOptions {
    fn default() -> Self {
        DcOptions { epsilon_c: 0.05, floor_d: 0.5, samples_d: 32, seed: 0, min_points: 10 }
    }
}

/// Least-squares line `y = slope * x + intercept`.
#[derive(Clone, Debug, Serialize)]
pub struct Fit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
    pub stderr: f64,
    pub n: usize,
}

impl Fit {
    pub fn new(pts: &[(f64, f64)]) -> Fit {
        let n = pts.len();
        let nf = n as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / nf;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / nf;
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
        let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
        let intercept = my - slope * mx;
        let sse: f64 = pts.iter().map(|p| (p.1 - slope * p.0 - intercept).powi(2)).sum();
        let r2 = if syy > 0.0 { 1.0 - sse / syy } else { 1.0 };
        let stderr = if n > 2 && sxx > 0.0 { (sse / (nf - 2.0) / sxx).sqrt() } else { f64::INFINITY };
        Fit { slope, intercept, r2, stderr, n }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Condition {
    pub pass: bool,
    /// Number of acceleration windows the verdict is based on.
    pub depth: usize,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct DiophantineReport {
    pub eta_hat: f64,
    pub theta_hat: f64,
    pub sigma_hat: f64,
    pub fit_a: Fit,
    pub fit_b: Fit,
    pub fit_c: Fit,
    pub cond_a: Condition,
    pub cond_b: Condition,
    pub cond_c: Condition,
    pub cond_d: Condition,
    pub admissible: bool,
    pub d: usize,
    pub genus: usize,
    pub mu: usize,
    pub windows: usize,
    /// `(log ||B(0,n_k)||, log ||B(n_k,n_{k+1})||)`.
    pub points_a: Vec<(f64, f64)>,
    /// `(log ||B(0,n_k)||, log ||B(0,n_k) restricted to Gamma_0||)`.
    pub points_b: Vec<(f64, f64)>,
    /// `(log ||B(0,n_k)||, log ||B(0,n_k) restricted to Gamma_s||)`.
    pub points_c: Vec<(f64, f64)>,
}

impl DiophantineReport {
    /// `(4d + d(d-1)/sigma) eta < theta`.
    pub fn admissibility_margin(&self) -> f64 {
        let d = self.d as f64;
        self.theta_hat - (4.0 * d + d * (d - 1.0) / self.sigma_hat) * self.eta_hat
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("series,k,log_norm_B,value\n");
        for (name, pts) in [("a", &self.points_a), ("b", &self.points_b), ("c", &self.points_c)] {
            for (k, (x, y)) in pts.iter().enumerate() {
                s.push_str(&format!("{name},{k},{x},{y}\n"));
            }
        }
        s
    }
}

fn zero_mean_basis(lengths: &[f64]) -> DMatrix<f64> {
    let d = lengths.len();
    let b = complement(&[lengths.to_vec()], d);
    DMatrix::from_fn(d, d - 1, |i, j| b[j][i])
}

/// Log norms of the restrictions of `B(0, n_k)` to a subspace family given
/// by orthonormal bases `q[k]`, for `k = 0..q.len()`.
fn restricted_log_norms(ws: &[DMatrix<f64>], q: &[DMatrix<f64>]) -> Vec<f64> {
    let mut p = ScaledProduct::identity(q[0].ncols());
    let mut out = vec![p.log_norm_embedded(&q[0])];
    for k in 0..q.len() - 1 {
        let g = q[k + 1].transpose() * &ws[k] * &q[k];
        p.left_mul(&g);
        out.push(p.log_norm_embedded(&q[k + 1]));
    }
    out
}

/// `max_{k<l} log ||B_s(n_k, n_l)||` and `max_{k<l} log ||B_flat(n_k, n_l)^{-1}||` for each `l`.
fn pairwise_growth(ws: &[DMatrix<f64>], ss: &StableSpaces) -> (Vec<f64>, Vec<f64>) {
    let levels = ss.levels();
    let s_maps: Vec<DMatrix<f64>> =
        (0..levels - 1).map(|k| ss.basis(k + 1).transpose() * &ws[k] * ss.basis(k)).collect();
    let q_inv: Vec<Option<DMatrix<f64>>> = (0..levels - 1)
        .map(|k| (ss.complement(k + 1).transpose() * &ws[k] * ss.complement(k)).try_inverse())
        .collect();
    let mut gs = vec![f64::NEG_INFINITY; levels];
    let mut gq = vec![f64::NEG_INFINITY; levels];
    for l in 1..levels {
        let mut ps = ScaledProduct::identity(ss.mu);
        let mut pq = ScaledProduct::identity(ss.d - ss.mu);
        for k in (0..l).rev() {
            ps.right_mul(&s_maps[k]);
            gs[l] = gs[l].max(ps.log_norm_embedded(ss.basis(l)));
            if let Some(inv) = &q_inv[k] {
                pq.left_mul(inv);
                gq[l] = gq[l].max(pq.log_norm_embedded(ss.complement(k)));
            }
        }
    }
    (gs, gq)
}

/// Estimates the exponents of the Diophantine conditions (a)-(d) along the path.
pub fn dc_test(path: &CocyclePath, opts: &DcOptions) -> Result<DiophantineReport> {
    let (ws, _) = windows_f64(path);
    let k_total = ws.len();
    if k_total < opts.min_points + 1 {
        return Err(Error::Depth(format!("{k_total} acceleration windows, need {}", opts.min_points + 1)));
    }
    let d = path.d();
    let genus = path.pi_at(0).genus();
    let acc = path.accel_times();
    let x: Vec<f64> = (0..=k_total).map(|k| path.log_norm_cumulative(k)).collect();

    let points_a: Vec<(f64, f64)> = (1..k_total).map(|k| (x[k], path.window(k).log_norm())).collect();
    let fit_a = Fit::new(&points_a);
    let eta_hat = fit_a.slope.max(0.0);
    let cond_a = Condition {
        pass: fit_a.n >= opts.min_points && fit_a.slope + 2.0 * fit_a.stderr < 1.0,
        depth: k_total,
        detail: format!("window growth exponent {:.4} +- {:.4}", fit_a.slope, fit_a.stderr),
    };

    let z: Vec<DMatrix<f64>> = (0..=k_total).map(|k| zero_mean_basis(&path.normalized_lengths_at(acc[k]))).collect();
    let lb = restricted_log_norms(&ws, &z);
    let points_b: Vec<(f64, f64)> = (1..=k_total).map(|k| (x[k], lb[k])).collect();
    let fit_b = Fit::new(&points_b);
    let theta_hat = 1.0 - fit_b.slope;
    let cond_b = Condition {
        pass: theta_hat - 2.0 * fit_b.stderr > 0.0,
        depth: k_total,
        detail: format!("zero-mean growth exponent {:.4} +- {:.4}", fit_b.slope, fit_b.stderr),
    };

    let ss = stable_space(path, None)?;
    let levels = ss.levels();
    let sb: Vec<DMatrix<f64>> = (0..levels).map(|k| ss.basis(k).clone()).collect();
    let lc = restricted_log_norms(&ws, &sb);
    let points_c: Vec<(f64, f64)> = (1..levels).map(|k| (x[k], lc[k])).collect();
    let fit_c = Fit::new(&points_c);
    let sigma_hat = -fit_c.slope;
    let (gs, gq) = pairwise_growth(&ws, &ss);
    let fs = Fit::new(&(1..levels).map(|l| (x[l], gs[l])).collect::<Vec<_>>());
    let fq = Fit::new(&(1..levels).map(|l| (x[l], gq[l])).collect::<Vec<_>>());
    let cond_c = Condition {
        pass: sigma_hat > 0.0 && fs.slope < opts.epsilon_c && fq.slope < opts.epsilon_c,
        depth: levels - 1,
        detail: format!(
            "stable contraction {:.4}; growth exponents: stable block {:.4}, inverse quotient {:.4}",
            sigma_hat, fs.slope, fq.slope
        ),
    };

    let cond_d = if ss.mu == genus {
        Condition { pass: true, depth: k_total, detail: "mu = g, condition is vacuous".into() }
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        let comp = ss.complement(0);
        let mut worst = f64::INFINITY;
        for _ in 0..opts.samples_d {
            let c = DVector::from_fn(comp.ncols(), |_, _| rng.gen_range(-1.0..1.0));
            let mut v = comp * c;
            v /= v.norm();
            let mut log_scale = 0.0f64;
            let mut best = 0.0f64;
            for w in &ws {
                v = w * v;
                let n = v.norm();
                log_scale += n.ln();
                v /= n;
                best = best.max(log_scale);
            }
            worst = worst.min(best.exp());
        }
        Condition {
            pass: worst >= opts.floor_d,
            depth: k_total,
            detail: format!("min over samples of max_n |B(0,n) v| = {worst:.4}"),
        }
    };

    let mut rep = DiophantineReport {
        eta_hat,
        theta_hat,
        sigma_hat,
        fit_a,
        fit_b,
        fit_c,
        cond_a,
        cond_b,
        cond_c,
        cond_d,
        admissible: false,
        d,
        genus,
        mu: ss.mu,
        windows: k_total,
        points_a,
        points_b,
        points_c,
    };
    rep.admissible = sigma_hat > 0.0 && theta_hat > 0.0 && rep.admissibility_margin() > 0.0;
    Ok(rep)
}
