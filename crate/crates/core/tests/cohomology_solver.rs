use iet_renorm::cocycle_analysis::{dc_test, DcOptions};
use iet_renorm::cohomology_solver::*;
use iet_renorm::combinatorics::PermutationPair;
use iet_renorm::function_spaces::PiecewiseFunction;
use iet_renorm::iet::Iet;
use iet_renorm::numeric::{ibig_to_f64, Backend, Flt, Real};
use iet_renorm::rauzy_veech::{iterate, precision_for_depth, CocyclePath, IterateOptions};
use iet_renorm::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const GOLDEN: f64 = 0.618_033_988_749_894_8;

fn golden_path(depth: usize) -> CocyclePath {
    let bits = precision_for_depth(depth, 0.49);
    iterate(&Iet::golden_rotation(bits), depth, &IterateOptions::default()).unwrap()
}

fn instance(pi: &str, lengths: &[&str], depth: usize, rate: f64) -> CocyclePath {
    let pi = PermutationPair::parse(pi).unwrap();
    let bits = precision_for_depth(depth, rate);
    let t = Iet::from_strs(pi, lengths, Backend::float(bits)).unwrap();
    iterate(&t, depth, &IterateOptions::default()).unwrap()
}

fn quartic_path(depth: usize) -> CocyclePath {
    instance("A B C D / D C B A", &["sqrt(2)-1", "sqrt(3)-1", "sqrt(5)-2", "sqrt(7)-2"], depth, 0.1)
}

fn cubic_path(depth: usize) -> CocyclePath {
    instance("A B C / C B A", &["sqrt(2)-1", "sqrt(3)-1", "sqrt(5)-2"], depth, 0.2)
}

fn poly_eval(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |a, k| a * x + k)
}

// psi = c o T - c with c one global polynomial on the interval.
fn coboundary(t: &Iet, c: &[f64]) -> PiecewiseFunction {
    let top: Vec<f64> = t.top_breaks().iter().map(|x| x.to_f64()).collect();
    let bot: Vec<f64> = t.bottom_breaks().iter().map(|x| x.to_f64()).collect();
    let pi = t.pi();
    let shift = |s: f64| -> Vec<f64> {
        let mut q = c.to_vec();
        let n = q.len();
        for i in 0..n {
            for j in (i..n - 1).rev() {
                q[j] += s * q[j + 1];
            }
        }
        q
    };
    let coeffs = (0..t.d())
        .map(|a| {
            let b = shift(bot[pi.pos_bottom(a)]);
            let s = shift(top[pi.pos_top(a)]);
            b.iter().zip(&s).map(|(x, y)| x - y).collect()
        })
        .collect();
    PiecewiseFunction::from_poly(t, coeffs)
}

// Brute-force first-return sum of phi to [0, right) along the orbit of x under t.
fn return_sum(t: &Iet, phi: &PiecewiseFunction, x: f64, right: f64) -> f64 {
    let b = t.backend();
    let mut y = b.from_f64(x);
    let mut sum = 0.0;
    loop {
        sum += phi.eval(y.to_f64());
        y = t.evaluate(&y).unwrap();
        if y.to_f64() < right {
            return sum;
        }
    }
}

#[test]
fn special_sum_of_constants_is_cocycle_action() {
    let path = quartic_path(2000);
    let t = path.iet_at(0);
    let c = [0.5, -1.25, 2.0, 0.75];
    let phi = PiecewiseFunction::constant(&t, &c);
    let acc = path.accel_times();
    let n = acc[3];
    let s = special_sum(&path, 0, n, &phi).unwrap();
    let b = path.matrix(0, n).unwrap();
    let means = s.means();
    for beta in 0..4 {
        let want: f64 = (0..4).map(|a| ibig_to_f64(b.get(beta, a)) * c[a]).sum();
        assert!((means[beta] - want).abs() < 1e-9 * want.abs().max(1.0), "{beta}: {} vs {want}", means[beta]);
    }
}

#[test]
fn special_sum_identity_and_composition() {
    let path = quartic_path(2000);
    let t = path.iet_at(0);
    let total = t.total_length().to_f64();
    let phi = PiecewiseFunction::trig(&t, 1.0 / total, 0.3, 20);
    let same = special_sum(&path, 5, 5, &special_sum(&path, 0, 5, &phi).unwrap()).unwrap();
    let direct5 = special_sum(&path, 0, 5, &phi).unwrap();
    let acc = path.accel_times();
    let (m, n) = (acc[1], acc[3]);
    let direct = special_sum(&path, 0, n, &phi).unwrap();
    let composed = special_sum(&path, m, n, &special_sum(&path, 0, m, &phi).unwrap()).unwrap();
    let right = path.iet_at(n).total_length().to_f64();
    for i in 0..200 {
        let x = right * (i as f64 + 0.5) / 200.0;
        let x5 = path.iet_at(5).total_length().to_f64() * (i as f64 + 0.5) / 200.0;
        assert!((same.eval(x5) - direct5.eval(x5)).abs() < 1e-12);
        let scale = direct.sup_norm().max(1.0);
        assert!((direct.eval(x) - composed.eval(x)).abs() < 1e-9 * scale);
    }
}

#[test]
fn special_sum_matches_first_return_sums() {
    let path = quartic_path(2000);
    let t = path.iet_at(0);
    let total = t.total_length().to_f64();
    let phi = PiecewiseFunction::trig(&t, 1.0 / total, 0.3, 20);
    let n = path.accel_times()[2];
    let s = special_sum(&path, 0, n, &phi).unwrap();
    let right = path.iet_at(n).total_length().to_f64();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..50 {
        let x = rng.gen::<f64>() * right;
        let want = return_sum(&t, &phi, x, right);
        assert!((s.eval(x) - want).abs() < 1e-8 * want.abs().max(1.0), "x={x}: {} vs {want}", s.eval(x));
    }
}

fn birkhoff_bound_sweep(path: &CocyclePath, phi: &PiecewiseFunction, levels: usize, seed: u64) {
    let checker = BirkhoffBoundChecker::new(path, phi, levels).unwrap();
    let total = path.iet_at(0).total_length().to_f64();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for i in 0..1000 {
        let x = rng.gen::<f64>() * total;
        let n = rng.gen_range(1..=5000);
        let b = checker.check(x, n).unwrap();
        assert!(b.holds(), "case {i}: x={x} N={n} lhs={} rhs={} k={}", b.lhs, b.rhs, b.k);
    }
}

#[test]
fn birkhoff_bound_golden() {
    let path = golden_path(200);
    let t = path.iet_at(0);
    birkhoff_bound_sweep(&path, &PiecewiseFunction::trig(&t, 1.0, 0.0, 30), 60, 11);
}

#[test]
fn birkhoff_bound_quartic() {
    let path = quartic_path(2000);
    let t = path.iet_at(0);
    let total = t.total_length().to_f64();
    birkhoff_bound_sweep(&path, &PiecewiseFunction::trig(&t, 1.0 / total, 0.3, 30), 20, 12);
}

// Rotation by GOLDEN: u(x) = Re(e^{2 pi i x} / (e^{2 pi i GOLDEN} - 1)) solves u o T - u = cos(2 pi x).
fn rotation_solution(x: f64) -> f64 {
    let tau = std::f64::consts::TAU;
    let (dr, di) = ((tau * GOLDEN).cos() - 1.0, (tau * GOLDEN).sin());
    let den = dr * dr + di * di;
    let (nr, ni) = ((tau * x).cos(), (tau * x).sin());
    (nr * dr + ni * di) / den
}

#[test]
fn golden_cosine_matches_fourier_solution() {
    let start = std::time::Instant::now();
    let path = golden_path(10_000);
    let t = path.iet_at(0);
    let phi = PiecewiseFunction::trig(&t, 1.0, 0.0, 40);
    let sol = solve(&path, &phi, &SolveOptions::default()).unwrap();
    let x0 = sol.base_point;
    let mut err: f64 = 0.0;
    for i in 0..1000 {
        let x = i as f64 / 1000.0;
        err = err.max((sol.u.eval(x) - (rotation_solution(x) - rotation_solution(x0))).abs());
    }
    assert!(err <= 1e-6, "sup error {err}");
    assert!(sol.residual <= 1e-6, "residual {}", sol.residual);
    assert!(sol.chi_class.iter().all(|c| c.abs() < 1e-9), "{:?}", sol.chi_class);
    assert!(start.elapsed().as_secs() < 120);
}

#[test]
fn random_polynomial_coboundaries_round_trip() {
    let paths = [golden_path(10_000), cubic_path(10_000), quartic_path(10_000)];
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    for case in 0..20 {
        let path = &paths[case % 3];
        let t = path.iet_at(0);
        let total = t.total_length().to_f64();
        let degree = 1 + case % 4;
        let mut c: Vec<f64> = (0..=degree).map(|_| rng.gen_range(-1.0..1.0)).collect();
        c[0] = 0.0;
        let phi = coboundary(&t, &c);
        let sol = solve(path, &phi, &SolveOptions::default()).unwrap_or_else(|e| panic!("case {case}: {e}"));
        let chi_norm = sol.chi_class.iter().map(|x| x * x).sum::<f64>().sqrt();
        assert!(chi_norm < 1e-8, "case {case}: chi {:?}", sol.chi_class);
        let x0 = sol.base_point;
        let mut err: f64 = 0.0;
        for i in 0..1000 {
            let x = total * i as f64 / 1000.0;
            err = err.max((sol.u.eval(x) - (poly_eval(&c, x) - poly_eval(&c, x0))).abs());
        }
        assert!(err < 1e-8, "case {case} (d={}, degree {degree}): u error {err}", t.d());
    }
}

fn correction_pair(path: &CocyclePath, mu: usize) -> (CorrectionOperator, CorrectionOperator) {
    let report = dc_test(path, &DcOptions::default()).unwrap();
    let split = StableSplitting::new(path, mu, 8.0, 0).unwrap();
    let l = default_truncation(path);
    let low = build_correction(path, &split, &report, 0, Some(l)).unwrap();
    let high = build_correction(path, &split, &report, l / 2, Some(l)).unwrap();
    (low, high)
}

#[test]
fn golden_correction_summands_vanish() {
    let path = golden_path(10_000);
    let t = path.iet_at(0);
    let phi = PiecewiseFunction::trig(&t, 1.0, 0.4, 40);
    let (low, high) = correction_pair(&path, 1);
    let c = low.apply(&path, &phi).unwrap();
    // genus one: every summand of the series is at the working-precision floor
    assert!(c.summands.iter().all(|(_, v)| *v < -200.0), "{:?}", c.summands);
    assert!(c.tail_bound < 1e-10, "{}", c.tail_bound);
    let defect = intertwining_defect(&path, &low, &high, &phi).unwrap();
    assert!(defect <= c.tail_bound.max(1e-12), "defect {defect} tail {}", c.tail_bound);
}

#[test]
fn quartic_intertwining_defect_within_tail() {
    let path = quartic_path(10_000);
    let t = path.iet_at(0);
    let total = t.total_length().to_f64();
    let phi = PiecewiseFunction::trig(&t, 1.0 / total, 0.3, 40);
    let (low, high) = correction_pair(&path, 2);
    let c = low.apply(&path, &phi).unwrap();
    assert!(c.summand_exponent < 0.0);
    let defect = intertwining_defect(&path, &low, &high, &phi).unwrap();
    assert!(defect <= c.tail_bound, "defect {defect} tail {}", c.tail_bound);
}

#[test]
fn golden_higher_order_derivatives() {
    let path = golden_path(10_000);
    let t = path.iet_at(0);
    let phi = PiecewiseFunction::trig(&t, 1.0, 0.0, 40);
    let sol = solve_higher(&path, &phi, 3, &SolveOptions::default()).unwrap();
    assert_eq!(sol.derivatives.len(), 2);
    assert_eq!(sol.chi_class.len(), 1);
    let tau = std::f64::consts::TAU;
    let h = 1e-4;
    for i in 0..200 {
        let x = 0.01 + 0.98 * i as f64 / 200.0;
        let du = (rotation_solution(x + h) - rotation_solution(x - h)) / (2.0 * h);
        let d2u = -tau * tau * rotation_solution(x);
        assert!((sol.derivatives[0].eval(x) - du).abs() < 1e-4, "x={x}: {} vs {du}", sol.derivatives[0].eval(x));
        assert!((sol.derivatives[1].eval(x) - d2u).abs() < 1e-4, "x={x}: {} vs {d2u}", sol.derivatives[1].eval(x));
    }
}

#[test]
fn chi_class_dimension_and_linearity() {
    let path = quartic_path(10_000);
    let t = path.iet_at(0);
    let total = t.total_length().to_f64();
    let phi = PiecewiseFunction::trig(&t, 1.0 / total, 0.3, 40);
    let opts = SolveOptions { residual_tol: 1.0, ..SolveOptions::default() };
    let report = dc_test(&path, &DcOptions::default()).unwrap();
    let base = solve_higher_with(&path, &phi, 2, &report, &opts).unwrap();
    // genus 2, mu 2: (2g - 2) r + 2 - mu
    assert_eq!(base.chi_class.len(), 4);
    let shifted = phi.add(&coboundary(&t, &[0.0, 0.4, -0.2, 0.1])).unwrap();
    let other = solve_higher_with(&path, &shifted, 2, &report, &opts).unwrap();
    for (a, b) in base.chi_class.iter().zip(&other.chi_class) {
        assert!((a - b).abs() < 1e-8, "{:?} vs {:?}", base.chi_class, other.chi_class);
    }
}

#[test]
fn rough_solution_fails_the_residual_gate() {
    let path = quartic_path(10_000);
    let t = path.iet_at(0);
    let total = t.total_length().to_f64();
    let phi = PiecewiseFunction::trig(&t, 1.0 / total, 0.3, 40);
    match solve(&path, &phi, &SolveOptions::default()) {
        Err(Error::Residual { residual, tol }) => assert!(residual > tol),
        other => panic!("expected a residual error, got {:?}", other.map(|s| s.residual)),
    }
}

// Rotation whose partial quotients grow like q_k^0.3 after a golden prefix.
fn liouville_path() -> CocyclePath {
    let mut qs: Vec<u64> = vec![1; 6];
    let (mut q0, mut q1) = (8.0f64, 13.0f64);
    while qs.iter().sum::<u64>() < 300_000 {
        let a = q1.powf(0.3).ceil() as u64;
        qs.push(a);
        (q0, q1) = (q1, a as f64 * q1 + q0);
    }
    qs.extend([1, 1, 1, 1]);
    let bits = 16384;
    let b = Backend::float(bits);
    let mut x = b.parse_value("(sqrt(5) - 1)/2").unwrap().to_flt(bits);
    for q in qs.iter().rev() {
        x = Flt::ONE / (Flt::from(*q).with_precision(bits).value() + x);
    }
    let pi = PermutationPair::parse("A B / B A").unwrap();
    let alpha = Real::Float(x);
    let t = Iet::new(pi, vec![b.from_int(1) - &alpha, alpha], b.zero(), b).unwrap();
    let depth = qs.iter().sum::<u64>() as usize - qs.len() - 1;
    iterate(&t, depth, &IterateOptions::default()).unwrap()
}

#[test]
fn non_admissible_path_is_refused() {
    let path = liouville_path();
    let report = dc_test(&path, &DcOptions::default()).unwrap();
    assert!(!report.admissible, "eta {}", report.eta_hat);
    let phi = PiecewiseFunction::trig(&path.iet_at(0), 1.0, 0.0, 20);
    let res = solve_with(&path, &phi, &report, &SolveOptions::default());
    assert!(matches!(res, Err(Error::NotAdmissible(_))), "{:?}", res.err());
}

#[test]
fn golden_decay_law() {
    let path = golden_path(10_000);
    let t = path.iet_at(0);
    let phi = PiecewiseFunction::trig(&t, 1.0, 0.0, 40).add(&PiecewiseFunction::trig(&t, 2.0, 1.1, 40).scaled(0.5)).unwrap();
    let sol = solve(&path, &phi, &SolveOptions::default()).unwrap();
    let fit = sol.decay_fit.unwrap();
    assert!(fit.slope < 0.0 && fit.r2 > 0.9, "{fit:?}");
    assert!(sol.decay_exponent > 0.9, "{}", sol.decay_exponent);
}
