use iet_renorm::cocycle_analysis::*;
use iet_renorm::combinatorics::PermutationPair;
use iet_renorm::iet::Iet;
use iet_renorm::numeric::{Backend, Flt, Real};
use iet_renorm::rauzy_veech::{iterate, precision_for_depth, CocyclePath, IterateOptions};
use iet_renorm::Error;

fn golden_path(depth: usize) -> CocyclePath {
    let bits = precision_for_depth(depth, 0.49);
    iterate(&Iet::golden_rotation(bits), depth, &IterateOptions::default()).unwrap()
}

fn quartic_path(depth: usize) -> CocyclePath {
    let pi = PermutationPair::parse("A B C D / D C B A").unwrap();
    let bits = precision_for_depth(depth, 0.1);
    let t = Iet::from_strs(pi, &["sqrt(2)-1", "sqrt(3)-1", "sqrt(5)-2", "sqrt(7)-2"], Backend::float(bits)).unwrap();
    iterate(&t, depth, &IterateOptions::default()).unwrap()
}

#[test]
fn golden_lyapunov_exponents() {
    let rep = lyapunov_spectrum(&golden_path(10_000)).unwrap();
    let golden_ln = ((1.0 + 5f64.sqrt()) / 2.0).ln();
    assert!((rep.exponents[0] - golden_ln).abs() < 1e-3, "{:?}", rep.exponents);
    assert!((rep.exponents[1] + golden_ln).abs() < 1e-3);
    assert!(rep.exponents.iter().sum::<f64>().abs() < 1e-6 * rep.exponents[0]);
    assert_eq!(rep.mu_estimate, 1);
}

#[test]
fn spectrum_is_symplectic_on_image_of_omega() {
    let path = quartic_path(10_000);
    let rep = lyapunov_spectrum(&path).unwrap();
    assert!(rep.exponents.iter().sum::<f64>().abs() < 1e-6 * rep.exponents[0]);
    let io = &rep.image_omega;
    assert_eq!(io.len(), 4);
    for i in 0..io.len() / 2 {
        assert!((io[i] + io[io.len() - 1 - i]).abs() < 2e-3, "{io:?}");
    }
    assert_eq!(rep.mu_estimate, 2);
}

#[test]
fn too_few_windows_is_a_depth_error() {
    assert!(matches!(lyapunov_spectrum(&golden_path(4)), Err(Error::Depth(_))));
    assert!(matches!(dc_test(&golden_path(10), &DcOptions::default()), Err(Error::Depth(_))));
}

#[test]
fn golden_stable_space_is_orthogonal_to_lengths() {
    let path = golden_path(2000);
    let ss = stable_space(&path, None).unwrap();
    assert_eq!(ss.mu, 1);
    let v = &ss.gamma_s()[0];
    let gamma = (5f64.sqrt() - 1.0) / 2.0;
    // contracting eigenvector of [[1,1],[1,2]] is (1, -gamma)
    let w = [1.0 / (1.0 + gamma * gamma).sqrt(), -gamma / (1.0 + gamma * gamma).sqrt()];
    let cos = (v[0] * w[0] + v[1] * w[1]).abs();
    assert!((1.0 - cos) < 1e-12, "{v:?}");
    assert!(ss.convergence_error < 1e-10);
}

#[test]
fn golden_dc_report() {
    let rep = dc_test(&golden_path(5000), &DcOptions::default()).unwrap();
    assert!(rep.eta_hat < 1e-6);
    assert!(rep.cond_a.pass && rep.cond_b.pass && rep.cond_c.pass && rep.cond_d.pass);
    assert!((rep.theta_hat - 2.0).abs() < 1e-3);
    assert!((rep.sigma_hat - 1.0).abs() < 1e-3);
    assert!(rep.admissible);
    assert_eq!(rep.cond_d.detail, "mu = g, condition is vacuous");
    let csv = rep.to_csv();
    assert!(csv.starts_with("series,k,log_norm_B,value\n"));
}

#[test]
fn quartic_dc_report() {
    let rep = dc_test(&quartic_path(10_000), &DcOptions::default()).unwrap();
    assert_eq!(rep.mu, 2);
    assert!(rep.cond_a.pass && rep.cond_b.pass && rep.cond_c.pass && rep.cond_d.pass);
    assert!(rep.admissible, "{rep:?}");
    assert_eq!(rep.admissible, rep.admissibility_margin() > 0.0);
}

fn from_quotients(qs: &[u64], bits: usize) -> Real {
    let b = Backend::float(bits);
    let mut x = b.parse_value("(sqrt(5) - 1)/2").unwrap().to_flt(bits);
    for q in qs.iter().rev() {
        x = Flt::ONE / (Flt::from(*q).with_precision(bits).value() + x);
    }
    Real::Float(x)
}

#[test]
fn golden_continued_fraction_crosscheck() {
    let alpha = Backend::float(precision_for_depth(2000, 0.49)).parse_value("(sqrt(5) - 1)/2").unwrap();
    let rep = cf_crosscheck(&alpha, 2000).unwrap();
    assert!(rep.partial_quotients.iter().all(|a| *a == 1));
    assert!(rep.runs_match);
    assert!(rep.eta_hat < 0.05 && rep.quotient_growth < 0.05);
    assert!((rep.eta_hat - rep.quotient_growth).abs() < 0.05);
}

#[test]
fn silver_continued_fraction_crosscheck() {
    let alpha = Backend::float(precision_for_depth(2000, 0.49)).parse_value("sqrt(2) - 1").unwrap();
    let rep = cf_crosscheck(&alpha, 2000).unwrap();
    assert!(rep.partial_quotients.iter().all(|a| *a == 2), "{:?}", rep.partial_quotients);
    assert!(rep.runs_match);
    assert!(rep.eta_hat < 0.05 && rep.quotient_growth < 0.05);
}

#[test]
fn growing_quotients_crosscheck() {
    let qs: Vec<u64> = (1..=60).collect();
    let alpha = from_quotients(&qs, 8192);
    assert_eq!(&continued_fraction(&alpha, 60)[..], &qs[..]);
    let depth: u64 = qs.iter().sum::<u64>() - 61;
    let rep = cf_crosscheck(&alpha, depth as usize).unwrap();
    assert!(rep.runs_match, "{:?}", rep.run_lengths);
    assert!(rep.eta_hat > 0.0 && rep.quotient_growth > 0.0);
    assert!(rep.agree, "{} {}", rep.eta_hat, rep.quotient_growth);
}

#[test]
fn rational_rotation_has_a_connection() {
    let alpha = Backend::Rational.parse_value("5/13").unwrap();
    assert_eq!(continued_fraction(&alpha, 10), vec![2, 1, 1, 2]);
    assert!(matches!(cf_crosscheck(&alpha, 100), Err(Error::Connection { .. })));
}
