//! Special Birkhoff sums, the correction operators and a constructive solver
//! for the cohomological equation `u o T - u = phi - chi`.

mod correction;
mod level;
mod orbit;
mod special;

pub use correction::{
    build_correction, default_truncation, intertwining_defect, Correction, CorrectionOperator, StableSplitting,
    LN_TRUNCATION_NORM,
};
pub use special::{birkhoff_bound_check, special_sum, BirkhoffBound, BirkhoffBoundChecker};

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::cocycle_analysis::{dc_test, DcOptions, DiophantineReport, Fit};
use crate::combinatorics::SingularityStructure;
use crate::error::{Error, Result};
use crate::function_spaces::{quotient_poly_basis, PiecewiseFunction};
use crate::iet::{Iet, IetF64};
use crate::numeric::Flt;
use crate::rauzy_veech::CocyclePath;

use level::{dot, level_lengths, to_f64_vec, LevelFunction};

#[derive(Clone, Debug)]
pub struct SolveOptions {
    /// Largest accepted residual `|u o T - u - psi|`, relative to `max(1, ||psi||)`.
    pub residual_tol: f64,
    /// Largest accepted boundary value, relative to `||phi||`.
    pub boundary_tol: f64,
    pub orbit_points: usize,
    /// Grid intervals per piece of the returned solution.
    pub grid: usize,
    pub check_points: usize,
    pub seed: u64,
    /// Truncation level of the correction series.
    pub truncation: Option<usize>,
    pub base_point: Option<f64>,
    /// Depth of the stable space reference time, in units of `ln 1e15`.
    pub stable_depth_factor: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            residual_tol: 1e-6,
            boundary_tol: 1e-10,
            orbit_points: 100_000,
            grid: 1024,
            check_points: 1000,
            seed: 0,
            truncation: None,
            base_point: None,
            stable_depth_factor: 8.0,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct DecayPoint {
    pub k: usize,
    pub log_norm_b: f64,
    /// `ln ||S(0, n_k) (phi - chi)||`.
    pub log_norm_s: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct CohomologySolution {
    pub u: PiecewiseFunction,
    /// `D^i u` for `i = 1 .. r-1`.
    pub derivatives: Vec<PiecewiseFunction>,
    /// Coordinates of `chi` in the orthonormal basis of the quotient of the
    /// boundary-free piecewise polynomials by the trivial ones.
    pub chi_class: Vec<f64>,
    /// The representative `chi` that was subtracted.
    pub chi: PiecewiseFunction,
    pub residual: f64,
    /// Residuals of the equations for `D^i u`, `i = 1 .. r-1`.
    pub derivative_residuals: Vec<f64>,
    pub decay_log: Vec<DecayPoint>,
    /// `-slope` of `decay_log`; infinite when the sums vanish.
    pub decay_exponent: f64,
    pub decay_fit: Option<Fit>,
    /// Summand decay exponent and tail estimate of the correction series.
    pub correction_exponent: f64,
    pub correction_tail: f64,
    pub base_point: f64,
    pub truncation: usize,
    pub admissibility: DiophantineReport,
}

struct LevelSolution {
    chi_full: Vec<f64>,
    chi_u: Vec<f64>,
    psi_norm: f64,
    u: PiecewiseFunction,
    residual: f64,
    decay_log: Vec<DecayPoint>,
    decay_fit: Option<Fit>,
    decay_exponent: f64,
    correction: (f64, f64),
}

struct Solver<'a> {
    path: &'a CocyclePath,
    report: &'a DiophantineReport,
    opts: &'a SolveOptions,
    splitting: StableSplitting,
    op: CorrectionOperator,
    t0: Iet,
    f0: IetF64,
    sing: SingularityStructure,
    base_point: f64,
}

impl<'a> Solver<'a> {
    fn new(path: &'a CocyclePath, report: &'a DiophantineReport, opts: &'a SolveOptions) -> Result<Self> {
        if !report.admissible {
            return Err(Error::NotAdmissible(format!(
                "eta = {:.4}, theta = {:.4}, sigma = {:.4}",
                report.eta_hat, report.theta_hat, report.sigma_hat
            )));
        }
        let splitting = StableSplitting::new(path, report.mu, opts.stable_depth_factor, opts.seed)?;
        let op = build_correction(path, &splitting, report, 0, opts.truncation)?;
        let t0 = path.iet_at(0);
        let f0 = t0.to_f64();
        let sing = t0.pi().singularities();
        let base_point = match opts.base_point {
            Some(x) => x,
            None => {
                let deep = path.iet_at(path.accel_times()[op.truncation]);
                let starts = deep.top_breaks();
                let lens = deep.lengths_f64();
                let a = (0..lens.len()).max_by(|&i, &j| lens[i].total_cmp(&lens[j])).unwrap();
                starts[deep.pi().pos_top(a)].to_f64() + lens[a] / 2.0
            }
        };
        Ok(Solver { path, report, opts, splitting, op, t0, f0, sing, base_point })
    }

    fn check_boundary(&self, phi: &PiecewiseFunction, orders: usize) -> Result<()> {
        let tol = self.opts.boundary_tol * phi.sup_norm().max(f64::MIN_POSITIVE);
        let mut f = phi.clone();
        for i in 0..orders {
            let b = f.boundary(&self.sing);
            let worst = b.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            if worst > tol {
                return Err(Error::Boundary(format!("boundary of derivative {i} is {worst:.3e}, tolerance {tol:.3e}")));
            }
            f = f.derivative();
        }
        Ok(())
    }

    fn level(&self, phi: &PiecewiseFunction) -> Result<LevelSolution> {
        self.check_boundary(phi, 2)?;
        let path = self.path;
        let bits = self.splitting.bits;
        let acc = path.accel_times();
        let lf = LevelFunction::from_piecewise(phi, bits)?;
        let corr = self.op.apply_flt(path, &lf.derivative());
        let correction = correction::tail_estimate(&corr.summands, bits)?;
        let means0 = lf.means(&level_lengths(path, 0, bits));
        let chi_full: Vec<Flt> = means0.iter().zip(&corr.delta).map(|(m, c)| m - c).collect();
        let mut chi_u: Vec<Flt> = vec![level::zero(bits); path.d()];
        for e in self.op.gamma_u_flt() {
            let c = dot(&chi_full, e, bits);
            for (x, y) in chi_u.iter_mut().zip(e) {
                *x += &c * y;
            }
        }
        let mut psi = lf.clone();
        psi.add_constants(&chi_u.iter().map(|x| -x.clone()).collect::<Vec<_>>());
        let mut decay_log = Vec::new();
        for k in 0..=self.op.truncation {
            if k > 0 {
                psi.advance(path, acc[k - 1], acc[k]);
            }
            let ln_s = psi.ln_sup_norm(&level_lengths(path, acc[k], bits), 16);
            decay_log.push(DecayPoint { k, log_norm_b: path.log_norm_cumulative(k), log_norm_s: ln_s });
        }
        // The truncation error of chi is amplified by ||B(0, n_k)|| and dominates
        // the last levels, so the fit stops at L/2.
        let fit_end = self.op.truncation.div_ceil(2).max(3);
        let pts: Vec<(f64, f64)> = decay_log[1..=fit_end]
            .iter()
            .filter(|p| p.log_norm_s.is_finite())
            .map(|p| (p.log_norm_b, p.log_norm_s))
            .collect();
        let (decay_fit, decay_exponent) = if pts.len() >= 3 {
            let f = Fit::new(&pts);
            let w = -f.slope;
            (Some(f), w)
        } else {
            (None, f64::INFINITY)
        };
        if decay_exponent <= self.report.eta_hat {
            return Err(Error::Decay(format!(
                "special sums decay with exponent {decay_exponent:.4}, not above eta = {:.4}",
                self.report.eta_hat
            )));
        }
        let chi_u = to_f64_vec(&chi_u);
        let psi_f = phi.minus_constants(&chi_u);
        let u = orbit::orbit_solution(&self.t0, &psi_f, self.base_point, self.opts.orbit_points, self.opts.grid);
        let residual = orbit::residual(&self.f0, &u, &psi_f, self.opts.check_points, self.opts.seed);
        Ok(LevelSolution {
            chi_full: to_f64_vec(&chi_full),
            chi_u,
            psi_norm: psi_f.sup_norm(),
            u,
            residual,
            decay_log,
            decay_fit,
            decay_exponent,
            correction,
        })
    }

    fn check_residual(&self, lev: &LevelSolution) -> Result<()> {
        let tol = self.opts.residual_tol * lev.psi_norm.max(1.0);
        if lev.residual > tol || !lev.residual.is_finite() {
            return Err(Error::Residual { residual: lev.residual, tol });
        }
        Ok(())
    }
}

fn coordinates(v: &[f64], basis: &[Vec<f64>]) -> Vec<f64> {
    basis.iter().map(|b| b.iter().zip(v).map(|(x, y)| x * y).sum()).collect()
}

/// Solves `u o T - u = phi - chi` with `chi` piecewise constant, `u` continuous.
/// Runs the Diophantine test on the path first.
pub fn solve(path: &CocyclePath, phi: &PiecewiseFunction, opts: &SolveOptions) -> Result<CohomologySolution> {
    let report = dc_test(path, &DcOptions { seed: opts.seed, ..DcOptions::default() })?;
    solve_with(path, phi, &report, opts)
}

/// As [`solve`], with a precomputed Diophantine report.
pub fn solve_with(
    path: &CocyclePath,
    phi: &PiecewiseFunction,
    report: &DiophantineReport,
    opts: &SolveOptions,
) -> Result<CohomologySolution> {
    solve_higher_with(path, phi, 1, report, opts)
}

/// Solves with `chi` piecewise polynomial of degree `< r`, returning `u` and
/// its derivatives up to order `r - 1`, each with its own verified residual.
pub fn solve_higher(path: &CocyclePath, phi: &PiecewiseFunction, r: usize, opts: &SolveOptions) -> Result<CohomologySolution> {
    let report = dc_test(path, &DcOptions { seed: opts.seed, ..DcOptions::default() })?;
    solve_higher_with(path, phi, r, &report, opts)
}

pub fn solve_higher_with(
    path: &CocyclePath,
    phi: &PiecewiseFunction,
    r: usize,
    report: &DiophantineReport,
    opts: &SolveOptions,
) -> Result<CohomologySolution> {
    if r == 0 {
        return Err(Error::InvalidArgument("order r must be at least 1".into()));
    }
    let solver = Solver::new(path, report, opts)?;
    let t0 = &solver.t0;
    phi.check_domain(t0, 1e-9 * t0.total_length().to_f64())?;
    solver.check_boundary(phi, r + 1)?;
    let d = path.d();
    let bm = solver.sing.boundary_matrix().to_f64();
    let pinv: DMatrix<f64> = bm.clone().pseudo_inverse(1e-12).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    let mut coeffs = vec![vec![0.0; r]; d];
    let mut us: Vec<Option<PiecewiseFunction>> = vec![None; r];
    let mut residuals = vec![0.0; r];
    let mut base: Option<LevelSolution> = None;
    let mut factorial = (1..r).map(|j| j as f64).product::<f64>();
    for i in (0..r).rev() {
        let mut phi_i = phi.sub(&PiecewiseFunction::from_poly(t0, coeffs.clone()))?;
        for _ in 0..i {
            phi_i = phi_i.derivative();
        }
        let b: Vec<f64> = (&pinv * DVector::from_vec(phi_i.boundary(&solver.sing))).iter().cloned().collect();
        let phi_i = phi_i.minus_constants(&b);
        let lev = solver.level(&phi_i).map_err(|e| match (i, e) {
            (0, e) => e,
            (i, Error::Decay(m)) => Error::Decay(format!("derivative order {i}: {m}")),
            (_, e) => e,
        })?;
        solver.check_residual(&lev)?;
        for a in 0..d {
            coeffs[a][i] += (b[a] + lev.chi_u[a]) / factorial;
        }
        if i > 0 {
            factorial /= i as f64;
        }
        residuals[i] = lev.residual;
        us[i] = Some(lev.u.clone());
        if i == 0 {
            base = Some(lev);
        }
    }
    let mut us: Vec<PiecewiseFunction> = us.into_iter().map(|u| u.unwrap()).collect();
    let pi = t0.pi();
    let total = t0.total_length().to_f64();
    for i in 1..r {
        let first = pi.top()[0];
        let last = pi.top_last();
        let prev = &us[i - 1];
        let jump = prev.eval_local(last, prev.piece(last).length) - prev.eval_local(first, 0.0);
        let k = (jump - us[i].integral()) / total;
        for a in 0..d {
            if let Some(v) = us[i].piece_mut(a).samples.as_mut() {
                v.iter_mut().for_each(|y| *y += k);
            }
        }
    }
    let base = base.unwrap();
    let flat: Vec<f64> = (0..d * r).map(|j| coeffs[j / r][j % r]).collect();
    let chi_class = if r == 1 {
        coordinates(&base.chi_full, &quotient_poly_basis(t0, &solver.splitting.gamma_s_f64(), 1))
    } else {
        coordinates(&flat, &quotient_poly_basis(t0, &solver.splitting.gamma_s_f64(), r))
    };
    let u = us.remove(0);
    Ok(CohomologySolution {
        u,
        derivatives: us,
        chi_class,
        chi: PiecewiseFunction::from_poly(t0, coeffs),
        residual: base.residual,
        derivative_residuals: residuals[1..].to_vec(),
        decay_log: base.decay_log,
        decay_exponent: base.decay_exponent,
        decay_fit: base.decay_fit,
        correction_exponent: base.correction.0,
        correction_tail: base.correction.1,
        base_point: solver.base_point,
        truncation: solver.op.truncation,
        admissibility: report.clone(),
    })
}
