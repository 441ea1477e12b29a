use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cocycle_analysis::{DiophantineReport, Fit};
use crate::error::{Error, Result};
use crate::function_spaces::PiecewiseFunction;
use crate::linalg::{nullspace, IntMatrix};
use crate::numeric::{flt_int, flt_ln_abs, Flt};
use crate::rauzy_veech::CocyclePath;

use super::level::{extend_orthonormal, level_lengths, norm, project_out, to_f64_vec, LevelFunction};

/// Largest `ln ||B(0, n_k)||` used by the correction series by default.
pub const LN_TRUNCATION_NORM: f64 = 34.538776394910684; // ln 1e15

/// Default truncation: the largest `k` with `||B(0, n_k)|| < 1e15`.
pub fn default_truncation(path: &CocyclePath) -> usize {
    (0..=path.num_windows()).take_while(|&k| path.log_norm_cumulative(k) < LN_TRUNCATION_NORM).last().unwrap_or(0)
}

/// High precision bases of the stable space `Gamma_s(T(n_k))` and of
/// `Gamma_u(T(n_k))`, the orthogonal complement of `Gamma_s` inside the
/// kernel of the boundary operator.
///
/// `Gamma_s(T)` is spanned by the dominant directions of `B(0, N)^{-1}` for a
/// deep acceleration time `N`, computed exactly in integers and then in
/// floating point of twice the bit size of `B(0, N)`.
#[derive(Clone, Debug)]
pub struct StableSplitting {
    pub mu: usize,
    pub bits: usize,
    /// Acceleration index of the reference time `N`.
    pub reference: usize,
    gamma_s0: Vec<Vec<Flt>>,
}

impl StableSplitting {
    /// Picks the first acceleration time with `ln ||B(0, N)|| >= depth_factor * ln 1e15`,
    /// or the deepest one if it has at least a third of that.
    pub fn new(path: &CocyclePath, mu: usize, depth_factor: f64, seed: u64) -> Result<Self> {
        let d = path.d();
        if mu == 0 || mu >= d {
            return Err(Error::InvalidArgument(format!("stable dimension {mu} out of range")));
        }
        let target = depth_factor * LN_TRUNCATION_NORM;
        let last = path.num_windows();
        let reference = (0..=last).find(|&k| path.log_norm_cumulative(k) >= target).unwrap_or(last);
        let ln_ref = path.log_norm_cumulative(reference);
        if ln_ref < target / 3.0 {
            return Err(Error::Depth(format!(
                "ln ||B(0, N)|| = {ln_ref:.1} at the deepest acceleration time, need {:.1}",
                target / 3.0
            )));
        }
        let bits = 2 * (ln_ref / std::f64::consts::LN_2).ceil() as usize + 256;
        let inv = path.inverse(0, path.accel_times()[reference])?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let images: Vec<Vec<Flt>> = (0..mu + 2)
            .map(|_| {
                let w: Vec<Flt> =
                    (0..d).map(|_| Flt::from(rng.gen_range(-1000i64..=1000)).with_precision(bits).value()).collect();
                inv.mul_flt(&w)
            })
            .collect();
        let mut gamma_s0 = Vec::new();
        extend_orthonormal(&mut gamma_s0, &images, mu, bits);
        Ok(StableSplitting { mu, bits, reference, gamma_s0 })
    }

    /// Orthonormal basis of `Gamma_s(T(n_k))`.
    pub fn gamma_s(&self, path: &CocyclePath, k: usize) -> Vec<Vec<Flt>> {
        if k == 0 {
            return self.gamma_s0.clone();
        }
        let b = path.cumulative(k);
        let images: Vec<Vec<Flt>> = self.gamma_s0.iter().map(|v| b.mul_flt(v)).collect();
        let mut out = Vec::new();
        extend_orthonormal(&mut out, &images, self.mu, self.bits);
        out
    }

    /// Orthonormal basis of `Gamma_u(T(n_k))`, given `Gamma_s(T(n_k))`.
    pub fn gamma_u(&self, path: &CocyclePath, k: usize, gamma_s: &[Vec<Flt>]) -> Vec<Vec<Flt>> {
        let pi = path.pi_at(path.accel_times()[k]);
        let kb: Vec<Vec<Flt>> = nullspace(&pi.singularities().boundary_matrix())
            .iter()
            .map(|v| v.iter().map(|x| flt_int(x, self.bits)).collect())
            .collect();
        let mut basis = gamma_s.to_vec();
        extend_orthonormal(&mut basis, &kb, kb.len() - self.mu, self.bits);
        basis.split_off(self.mu)
    }

    /// Level-0 stable basis in double precision.
    pub fn gamma_s_f64(&self) -> Vec<Vec<f64>> {
        self.gamma_s0.iter().map(|v| to_f64_vec(v)).collect()
    }
}

/// The correction operator `P^(k) = P_0^(k) + Delta P^(k)` at acceleration
/// level `k`, with the series for `Delta P^(k)` truncated at level `L`.
///
/// `P_0^(k)` sends a function on the level-`n_k` intervals to its primitive
/// with zero mean on each interval. The summand at `l` is
/// `B_flat(n_k, n_l)^{-1} Lambda(n_{l-1}, n_l) S(n_k, n_{l-1})`, where
/// `Lambda(l-1, l) = P_0^(l) S(n_{l-1}, n_l) - S(n_{l-1}, n_l) P_0^(l-1)` is
/// piecewise constant and `B_flat^{-1}` is the inverse modulo the stable space.
#[derive(Clone, Debug)]
pub struct CorrectionOperator {
    pub level: usize,
    pub truncation: usize,
    pub bits: usize,
    /// `3 eta - theta / d` from the Diophantine report.
    pub predicted_exponent: f64,
    gamma_s: Vec<Vec<Flt>>,
    gamma_u: Vec<Vec<Flt>>,
    /// `B(n_k, n_l)^{-1}` for `l = k+1 ..= L`.
    inverses: Vec<IntMatrix>,
}

/// Result of applying a correction operator.
#[derive(Clone, Debug)]
pub(crate) struct CorrectedFlt {
    pub primitive: LevelFunction,
    pub delta: Vec<Flt>,
    /// `(ln ||B(0, n_l)||, ln ||summand_l||)` for `l = k+1 ..= L`.
    pub summands: Vec<(f64, f64)>,
}

/// Public view of an applied correction.
#[derive(Clone, Debug, serde::Serialize)]
pub struct Correction {
    /// `P^(k) phi` as a function on the level-`n_k` intervals.
    pub function: PiecewiseFunction,
    /// `Delta P^(k) phi` as a vector in `Gamma(T(n_k))`, orthogonal to `Gamma_s`.
    pub delta: Vec<f64>,
    pub summands: Vec<(f64, f64)>,
    /// Fitted exponent of summand norms against `ln ||B(0, n_l)||`.
    pub summand_exponent: f64,
    /// Geometric extrapolation of the truncated tail.
    pub tail_bound: f64,
}

/// Builds the correction operator at acceleration level `k`, truncated at `l_max`
/// (default: the largest level with `||B(0, n_l)|| < 1e15`).
pub fn build_correction(
    path: &CocyclePath,
    splitting: &StableSplitting,
    report: &DiophantineReport,
    k: usize,
    l_max: Option<usize>,
) -> Result<CorrectionOperator> {
    if !report.admissible {
        return Err(Error::NotAdmissible(format!(
            "eta = {:.4}, theta = {:.4}, sigma = {:.4}",
            report.eta_hat, report.theta_hat, report.sigma_hat
        )));
    }
    let l = l_max.unwrap_or_else(|| default_truncation(path));
    if l < 3 {
        return Err(Error::Depth(format!("truncation level {l} is below 3")));
    }
    if l >= splitting.reference || k >= l {
        return Err(Error::Depth(format!(
            "levels {k}..{l} must lie below the stable reference level {}",
            splitting.reference
        )));
    }
    let acc = path.accel_times();
    let inverses = ((k + 1)..=l).map(|j| path.inverse(acc[k], acc[j])).collect::<Result<Vec<_>>>()?;
    let gamma_s = splitting.gamma_s(path, k);
    let gamma_u = splitting.gamma_u(path, k, &gamma_s);
    Ok(CorrectionOperator {
        level: k,
        truncation: l,
        bits: splitting.bits,
        predicted_exponent: 3.0 * report.eta_hat - report.theta_hat / report.d as f64,
        gamma_s,
        gamma_u,
        inverses,
    })
}

impl CorrectionOperator {
    pub(crate) fn gamma_u_flt(&self) -> &[Vec<Flt>] {
        &self.gamma_u
    }

    /// Applies `P^(k)` to `phi`, a function on the level-`n_k` intervals.
    pub(crate) fn apply_flt(&self, path: &CocyclePath, phi: &LevelFunction) -> CorrectedFlt {
        let acc = path.accel_times();
        let bits = self.bits;
        let k = self.level;
        let primitive = phi.primitive_zero_mean(&level_lengths(path, acc[k], bits));
        let mut delta: Vec<Flt> = vec![super::level::zero(bits); path.d()];
        let mut summands = Vec::new();
        let mut psi = phi.clone();
        for (i, l) in ((k + 1)..=self.truncation).enumerate() {
            let mut pushed = psi.primitive_zero_mean(&level_lengths(path, acc[l - 1], bits));
            pushed.advance(path, acc[l - 1], acc[l]);
            psi.advance(path, acc[l - 1], acc[l]);
            let lens = level_lengths(path, acc[l], bits);
            let lambda = psi.primitive_zero_mean(&lens).sub(&pushed).means(&lens);
            let v = project_out(&self.inverses[i].mul_flt(&lambda), &self.gamma_s, bits);
            summands.push((path.log_norm_cumulative(l), flt_ln_abs(&norm(&v, bits))));
            for (a, b) in delta.iter_mut().zip(v) {
                *a += b;
            }
        }
        CorrectedFlt { primitive, delta, summands }
    }

    /// Applies `P^(k)` to a function on the level-`n_k` intervals.
    pub fn apply(&self, path: &CocyclePath, phi: &PiecewiseFunction) -> Result<Correction> {
        let lf = LevelFunction::from_piecewise(phi, self.bits)?;
        let c = self.apply_flt(path, &lf);
        let (summand_exponent, tail_bound) = tail_estimate(&c.summands, self.bits)?;
        let mut f = c.primitive.clone();
        f.add_constants(&c.delta);
        Ok(Correction {
            function: f.to_piecewise(&path.iet_at(path.accel_times()[self.level])),
            delta: to_f64_vec(&c.delta),
            summands: c.summands,
            summand_exponent,
            tail_bound,
        })
    }
}

/// Fits `ln ||summand||` against `ln ||B||` and sums the geometric tail past the last term.
/// Summands below a quarter of the working precision count as zero.
pub(crate) fn tail_estimate(summands: &[(f64, f64)], bits: usize) -> Result<(f64, f64)> {
    let floor = -(bits as f64) * std::f64::consts::LN_2 / 4.0;
    let pts: Vec<(f64, f64)> = summands.iter().filter(|p| p.1.is_finite() && p.1 > floor).cloned().collect();
    if pts.len() < 3 {
        return Ok((f64::NEG_INFINITY, pts.iter().map(|p| p.1.exp()).sum::<f64>() + floor.exp()));
    }
    let fit = Fit::new(&pts);
    if fit.slope >= 0.0 {
        return Err(Error::Decay(format!("correction summands do not decay (exponent {:.4})", fit.slope)));
    }
    let step = (pts[pts.len() - 1].0 - pts[0].0) / (pts.len() - 1) as f64;
    let q = (fit.slope * step).exp();
    let last = (fit.intercept + fit.slope * pts[pts.len() - 1].0).max(pts[pts.len() - 1].1);
    Ok((fit.slope, last.exp() * q / (1.0 - q)))
}

/// `S(n_k, n_l) P^(k) phi - P^(l) S(n_k, n_l) phi` modulo `Gamma_s(T(n_l))`, sup norm.
pub fn intertwining_defect(
    path: &CocyclePath,
    low: &CorrectionOperator,
    high: &CorrectionOperator,
    phi: &PiecewiseFunction,
) -> Result<f64> {
    if low.truncation != high.truncation || low.level >= high.level {
        return Err(Error::InvalidArgument("operators must share the truncation and be ordered".into()));
    }
    let acc = path.accel_times();
    let bits = low.bits.max(high.bits);
    let lf = LevelFunction::from_piecewise(phi, bits)?;
    let c0 = low.apply_flt(path, &lf);
    let mut lhs = c0.primitive.clone();
    lhs.add_constants(&c0.delta);
    lhs.advance(path, acc[low.level], acc[high.level]);
    let mut pushed = lf.clone();
    pushed.advance(path, acc[low.level], acc[high.level]);
    let c1 = high.apply_flt(path, &pushed);
    let mut rhs = c1.primitive.clone();
    rhs.add_constants(&c1.delta);
    let diff = lhs.sub(&rhs);
    let lens = level_lengths(path, acc[high.level], bits);
    let means = diff.means(&lens);
    let mut varying = diff.clone();
    varying.add_constants(&means.iter().map(|m| -m.clone()).collect::<Vec<_>>());
    let reduced = project_out(&means, &high.gamma_s, bits);
    let const_part = flt_ln_abs(&norm(&reduced, bits)).exp();
    Ok(const_part + varying.ln_sup_norm(&lens, 16).exp())
}
