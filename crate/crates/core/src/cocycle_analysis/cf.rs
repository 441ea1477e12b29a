use dashu::integer::IBig;
use dashu::rational::RBig;
use serde::Serialize;

use super::diophantine::Fit;
use crate::combinatorics::{PermutationPair, StepType};
use crate::error::{Error, Result};
use crate::iet::Iet;
use crate::numeric::{flt_ln_abs, Flt, Real};
use crate::rauzy_veech::{iterate, IterateOptions};

#[derive(Clone, Debug, Serialize)]
pub struct CfReport {
    pub partial_quotients: Vec<u64>,
    /// Lengths of maximal runs of equal step types, the last (possibly cut) run excluded.
    pub run_lengths: Vec<u64>,
    pub runs_match: bool,
    pub eta_hat: f64,
    pub quotient_growth: f64,
    pub agree: bool,
}

/// Partial quotients `a_1, a_2, ...` of `alpha` in `(0, 1)`, at most `n` of them.
/// Stops early for rationals; in the float backend stops once the remaining
/// precision is exhausted.
pub fn continued_fraction(alpha: &Real, n: usize) -> Vec<u64> {
    let mut out = Vec::new();
    match alpha {
        Real::Exact(r) => {
            let mut x = r.clone();
            while out.len() < n && x != RBig::ZERO {
                let inv = RBig::ONE / &x;
                let a = inv.numerator() / IBig::from(inv.denominator().clone());
                out.push(u64::try_from(a.clone()).unwrap_or(u64::MAX));
                x = inv - RBig::from(a);
            }
        }
        Real::Float(f) => {
            let bits = f.precision();
            let mut x = f.clone();
            let mut lost = 0.0f64;
            while out.len() < n && lost < (bits as f64) - 64.0 {
                if *x.repr().significand() == IBig::ZERO {
                    break;
                }
                let inv = Flt::ONE / &x;
                let a = inv.floor();
                let ai = a.to_int().value();
                // the error of x is amplified by 1/x^2 at each step
                lost += 2.0 * flt_ln_abs(&inv) / std::f64::consts::LN_2;
                let frac = inv - a;
                out.push(u64::try_from(ai).unwrap_or(u64::MAX));
                x = frac;
            }
        }
    }
    out
}

/// Compares the step-type runs of the rotation `x -> x + alpha` with the
/// continued fraction of `alpha`, and the window growth exponent with the
/// growth of the partial quotients.
pub fn cf_crosscheck(alpha: &Real, depth: usize) -> Result<CfReport> {
    let backend = match alpha {
        Real::Exact(_) => crate::numeric::Backend::Rational,
        Real::Float(f) => crate::numeric::Backend::float(f.precision()),
    };
    let one = backend.from_int(1);
    if alpha.is_negative() || alpha.is_zero() || *alpha >= one {
        return Err(Error::InvalidArgument("alpha must lie in (0, 1)".into()));
    }
    let pi = PermutationPair::parse("A B / B A")?;
    let t = Iet::new(pi, vec![one - alpha, alpha.clone()], backend.zero(), backend)?;
    let path = iterate(&t, depth, &IterateOptions::default())?;
    let kinds = path.step_types();
    let mut runs = Vec::new();
    let mut cur = (kinds[0], 0u64);
    for k in &kinds {
        if *k == cur.0 {
            cur.1 += 1;
        } else {
            runs.push(cur.1);
            cur = (*k, 1);
        }
    }
    let first_top = kinds[0] == StepType::Top;
    let cf = continued_fraction(alpha, runs.len() + 2);
    let mut expected: Vec<u64> = Vec::new();
    if cf[0] > 1 {
        expected.push(cf[0] - 1);
    }
    expected.extend(&cf[1..]);
    let runs_match = (cf[0] > 1) == first_top
        && runs.len() <= expected.len()
        && runs.iter().zip(&expected).all(|(a, b)| a == b);

    let k_total = path.num_windows();
    let pts_a: Vec<(f64, f64)> =
        (1..k_total).map(|k| (path.log_norm_cumulative(k), path.window(k).log_norm())).collect();
    let eta_hat = Fit::new(&pts_a).slope.max(0.0);
    let usable = runs.len() + 1;
    // ln q_k with q_k = a_k q_{k-1} + q_{k-2}, tracked through the ratio q_{k-1}/q_k.
    let mut ln_q = (cf[0] as f64).ln();
    let mut ratio = 1.0 / cf[0] as f64;
    let mut pts_q = Vec::new();
    for k in 1..usable.min(cf.len()) {
        pts_q.push((ln_q, (cf[k] as f64).ln()));
        let m = cf[k] as f64 + ratio;
        ln_q += m.ln();
        ratio = 1.0 / m;
    }
    let quotient_growth = Fit::new(&pts_q).slope.max(0.0);
    Ok(CfReport {
        partial_quotients: cf,
        run_lengths: runs,
        runs_match,
        eta_hat,
        quotient_growth,
        agree: (eta_hat - quotient_growth).abs() < 0.1,
    })
}
