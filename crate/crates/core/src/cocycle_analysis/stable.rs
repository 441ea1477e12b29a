use nalgebra::DMatrix;

use super::lyapunov::random_frame;
use super::{lyapunov_spectrum, windows_f64};
use crate::error::{Error, Result};
use crate::rauzy_veech::CocyclePath;

/// Orthonormal bases of the stable space `Gamma_s(T(n_k))` and of its
/// orthogonal complement at the acceleration times where the backward
/// iteration has converged.
#[derive(Clone, Debug)]
pub struct StableSpaces {
    pub mu: usize,
    pub d: usize,
    bases: Vec<DMatrix<f64>>,
    complements: Vec<DMatrix<f64>>,
    /// Largest sine of principal angles between two independent sweeps at level 0.
    pub convergence_error: f64,
}

fn sweep(ws: &[DMatrix<f64>], seed: u64) -> Vec<DMatrix<f64>> {
    let d = ws[0].nrows();
    let mut frame = random_frame(d, seed);
    let mut frames = vec![frame.clone()];
    for w in ws.iter().rev() {
        frame = (w.transpose() * frame).qr().q();
        frames.push(frame.clone());
    }
    frames.reverse();
    frames
}

/// Computes the stable spaces by backward iteration of the transposed cocycle:
/// the dominant `d - mu` directions of `B(n_k, n_K)^T` span the orthogonal
/// complement of `Gamma_s(T(n_k))`. `mu` defaults to the number of exponents
/// below minus the gap threshold.
pub fn stable_space(path: &CocyclePath, mu: Option<usize>) -> Result<StableSpaces> {
    let (ws, _) = windows_f64(path);
    let d = path.d();
    let mu = match mu {
        Some(m) => m,
        None => {
            let rep = lyapunov_spectrum(path)?;
            if rep.exponents[0] <= 1e-9 {
                return Err(Error::Indeterminate("top exponent is not positive".into()));
            }
            let m = rep.exponents.iter().filter(|e| **e < -rep.gap_threshold).count();
            if m == 0 {
                return Err(Error::Indeterminate("no exponent below the gap threshold".into()));
            }
            m
        }
    };
    if mu == 0 || mu >= d {
        return Err(Error::Indeterminate(format!("stable dimension {mu} out of range")));
    }
    let k_total = ws.len();
    let burn = (k_total / 4).max(8);
    if k_total <= burn + 2 {
        return Err(Error::Depth(format!("{k_total} windows are too few for the backward iteration")));
    }
    let frames = sweep(&ws, 1);
    let check = sweep(&ws, 2);
    let valid = k_total - burn;
    let bases: Vec<DMatrix<f64>> = frames[..=valid].iter().map(|f| f.columns(d - mu, mu).into_owned()).collect();
    let complements = frames[..=valid].iter().map(|f| f.columns(0, d - mu).into_owned()).collect();
    let other = check[0].columns(d - mu, mu).into_owned();
    let proj = &bases[0] - &other * (other.transpose() * &bases[0]);
    let convergence_error = proj.column_iter().map(|c| c.norm()).fold(0.0, f64::max);
    Ok(StableSpaces { mu, d, bases, complements, convergence_error })
}

impl StableSpaces {
    /// Number of acceleration levels with a reliable basis.
    pub fn levels(&self) -> usize {
        self.bases.len()
    }

    /// `d x mu` orthonormal basis of `Gamma_s(T(n_k))`.
    pub fn basis(&self, k: usize) -> &DMatrix<f64> {
        &self.bases[k]
    }

    /// `d x (d - mu)` orthonormal basis of the orthogonal complement.
    pub fn complement(&self, k: usize) -> &DMatrix<f64> {
        &self.complements[k]
    }

    /// Basis vectors of `Gamma_s(T)` at level 0.
    pub fn gamma_s(&self) -> Vec<Vec<f64>> {
        self.bases[0].column_iter().map(|c| c.iter().cloned().collect()).collect()
    }

    /// Orthogonal projection of `v` onto the complement of `Gamma_s(T(n_k))`.
    pub fn project_out(&self, k: usize, v: &[f64]) -> Vec<f64> {
        let b = &self.bases[k];
        let x = nalgebra::DVector::from_column_slice(v);
        let p = &x - b * (b.transpose() * &x);
        p.iter().cloned().collect()
    }
}
