use std::collections::HashMap;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{basis_matrix, windows_f64};
use crate::combinatorics::PermutationPair;
use crate::error::{Error, Result};
use crate::linalg::{nullspace, orthonormalize};
use crate::numeric::ibig_to_f64;
use crate::rauzy_veech::CocyclePath;

#[derive(Clone, Debug, Serialize)]
pub struct LyapunovReport {
    /// Exponents per elementary step, in decreasing order.
    pub exponents: Vec<f64>,
    /// Exponents per acceleration window.
    pub exponents_per_window: Vec<f64>,
    /// Spectrum of the restriction to the kernel of the boundary operator.
    pub kernel_boundary: Vec<f64>,
    /// Spectrum of the restriction to the image of the intersection matrix.
    pub image_omega: Vec<f64>,
    pub gap_threshold: f64,
    pub mu_estimate: usize,
    pub windows_used: usize,
    pub steps_used: usize,
}

/// Orthonormal basis of the kernel of the boundary operator on constants.
pub fn kernel_boundary_basis(pi: &PermutationPair) -> Vec<Vec<f64>> {
    let ns = nullspace(&pi.singularities().boundary_matrix());
    let cols: Vec<Vec<f64>> = ns.iter().map(|v| v.iter().map(ibig_to_f64).collect()).collect();
    orthonormalize(&cols, 1e-12)
}

/// Orthonormal basis of the column space of the intersection matrix.
pub fn image_omega_basis(pi: &PermutationPair) -> Vec<Vec<f64>> {
    let om = pi.omega().to_f64();
    let cols: Vec<Vec<f64>> = (0..om.ncols()).map(|j| om.column(j).iter().cloned().collect()).collect();
    orthonormalize(&cols, 1e-12)
}

pub(crate) fn random_frame(dim: usize, seed: u64) -> DMatrix<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = DMatrix::from_fn(dim, dim, |_, _| rng.gen_range(-1.0..1.0));
    m.qr().q()
}

/// QR iteration: returns the summed `log |r_ii|` over the windows after `burn`.
pub fn lyapunov_from_windows(ws: &[DMatrix<f64>], burn: usize) -> Vec<f64> {
    let Some(first) = ws.first() else {
        return Vec::new();
    };
    let dim = first.ncols();
    let mut frame = random_frame(dim, 0);
    let mut sums = vec![0.0; dim];
    for (k, w) in ws.iter().enumerate() {
        let qr = (w * &frame).qr();
        let r = qr.r();
        if k >= burn {
            for i in 0..dim {
                sums[i] += r[(i, i)].abs().ln();
            }
        }
        frame = qr.q();
    }
    sums
}

/// Restricts each window to invariant subspaces given per level.
fn restricted_windows(
    ws: &[DMatrix<f64>],
    pis: &[&PermutationPair],
    basis_of: impl Fn(&PermutationPair) -> Vec<Vec<f64>>,
) -> Vec<DMatrix<f64>> {
    let d = pis[0].d();
    let mut cache: HashMap<PermutationPair, DMatrix<f64>> = HashMap::new();
    let mut get = |p: &PermutationPair| -> DMatrix<f64> {
        cache.entry(p.clone()).or_insert_with(|| basis_matrix(&basis_of(p), d)).clone()
    };
    ws.iter()
        .enumerate()
        .map(|(k, w)| {
            let qa = get(pis[k]);
            let qb = get(pis[k + 1]);
            qb.transpose() * w * qa
        })
        .collect()
}

fn sorted_desc(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(|a, b| b.total_cmp(a));
    v
}

/// Lyapunov spectrum of the accelerated cocycle along the path.
pub fn lyapunov_spectrum(path: &CocyclePath) -> Result<LyapunovReport> {
    let (ws, steps) = windows_f64(path);
    if ws.len() < 4 {
        return Err(Error::Depth(format!("only {} acceleration windows", ws.len())));
    }
    let burn = ws.len() / 10;
    let windows_used = ws.len() - burn;
    let steps_used: usize = steps[burn..].iter().sum();
    let acc = path.accel_times();
    let pis: Vec<&PermutationPair> = (0..=ws.len()).map(|k| path.pi_at(acc[k])).collect();
    let per_step = |sums: Vec<f64>| sorted_desc(sums.into_iter().map(|s| s / steps_used as f64).collect());
    let sums = lyapunov_from_windows(&ws, burn);
    let exponents_per_window = sorted_desc(sums.iter().map(|s| s / windows_used as f64).collect());
    let exponents = per_step(sums);
    let kb = per_step(lyapunov_from_windows(&restricted_windows(&ws, &pis, kernel_boundary_basis), burn));
    let io = per_step(lyapunov_from_windows(&restricted_windows(&ws, &pis, image_omega_basis), burn));
    let gap_threshold = 0.1 * exponents[0];
    let mu_estimate = kb.iter().filter(|e| **e < -gap_threshold).count();
    Ok(LyapunovReport {
        exponents,
        exponents_per_window,
        kernel_boundary: kb,
        image_omega: io,
        gap_threshold,
        mu_estimate,
        windows_used,
        steps_used,
    })
}
