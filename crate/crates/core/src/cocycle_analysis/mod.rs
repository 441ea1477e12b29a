//! Lyapunov exponents, Oseledets stable spaces and the Diophantine
//! conditions along a Rauzy-Veech path.

mod cf;
mod diophantine;
mod lyapunov;
mod stable;

pub use cf::{cf_crosscheck, continued_fraction, CfReport};
pub use diophantine::{dc_test, DcOptions, DiophantineReport, Fit};
pub use lyapunov::{
    image_omega_basis, kernel_boundary_basis, lyapunov_from_windows, lyapunov_spectrum, LyapunovReport,
};
pub use stable::{stable_space, StableSpaces};

use nalgebra::DMatrix;

use crate::rauzy_veech::CocyclePath;

/// Window matrices `B(n_k, n_{k+1})` in double precision and their step counts.
pub(crate) fn windows_f64(path: &CocyclePath) -> (Vec<DMatrix<f64>>, Vec<usize>) {
    let acc = path.accel_times();
    let ws = (0..path.num_windows()).map(|k| path.window(k).to_f64()).collect();
    let steps = (0..path.num_windows()).map(|k| acc[k + 1] - acc[k]).collect();
    (ws, steps)
}

/// Orthonormal basis as the columns of a matrix.
pub(crate) fn basis_matrix(basis: &[Vec<f64>], d: usize) -> DMatrix<f64> {
    DMatrix::from_fn(d, basis.len(), |i, j| basis[j][i])
}

/// Product of matrices applied successively, kept normalized with a log scale.
#[derive(Clone, Debug)]
pub(crate) struct ScaledProduct {
    pub m: DMatrix<f64>,
    pub log_scale: f64,
}

impl ScaledProduct {
    pub fn identity(n: usize) -> Self {
        ScaledProduct { m: DMatrix::identity(n, n), log_scale: 0.0 }
    }

    fn normalize(&mut self) {
        let s = self.m.amax();
        if s > 0.0 && s.is_finite() {
            self.m /= s;
            self.log_scale += s.ln();
        }
    }

    /// `self <- a * self`.
    pub fn left_mul(&mut self, a: &DMatrix<f64>) {
        self.m = a * &self.m;
        self.normalize();
    }

    /// `self <- self * a`.
    pub fn right_mul(&mut self, a: &DMatrix<f64>) {
        self.m = &self.m * a;
        self.normalize();
    }

    /// Log of the largest sup norm of the images of the basis columns of
    /// `embed * self` (columns of `self` are images of orthonormal vectors).
    pub fn log_norm_embedded(&self, embed: &DMatrix<f64>) -> f64 {
        let img = embed * &self.m;
        let best = (0..img.ncols()).map(|j| img.column(j).amax()).fold(0.0, f64::max);
        best.ln() + self.log_scale
    }
}
