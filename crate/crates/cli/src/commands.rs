use serde_json::{json, Value};

use iet_renorm::cocycle_analysis::{dc_test, lyapunov_spectrum, DcOptions, DiophantineReport};
use iet_renorm::cohomology_solver::{solve_higher_with, SolveOptions};
use iet_renorm::combinatorics::PermutationPair;
use iet_renorm::function_spaces::PiecewiseFunction;
use iet_renorm::rauzy_veech::CocyclePath;
use iet_renorm::self_similar::{codimension, equation_count_check, find_loops, CodimensionInput};

use crate::args::{CodimArgs, GlobalArgs, InstanceArgs, LoopsArgs, RunArgs, SolveArgs};
use crate::error::{CliError, Result};
use crate::input::{build_path, load_instances, load_phi, Instance, PathInfo};
use crate::report::{csv_field, run_parallel, Entry, Output, Report};

pub const DEPTH_ANALYZE: usize = 5000;
pub const DEPTH_RV: usize = 100;
pub const DEPTH_LYAPUNOV: usize = 10_000;
pub const DEPTH_DC: usize = 5000;

fn instance_config(a: &InstanceArgs, default_depth: usize) -> Value {
    json!({
        "depth": a.depth.unwrap_or(default_depth),
        "precision": a.precision.map_or(Value::from("auto"), Value::from),
        "rate": a.rate,
    })
}

fn run_config(r: &RunArgs, g: &GlobalArgs, default_depth: usize) -> Value {
    let mut c = instance_config(&r.instance, default_depth);
    c["epsilon_c"] = json!(r.epsilon_c);
    c["floor_d"] = json!(r.floor_d);
    c["seed"] = json!(g.seed);
    c
}

fn dc_options(r: &RunArgs, g: &GlobalArgs) -> DcOptions {
    DcOptions { epsilon_c: r.epsilon_c, floor_d: r.floor_d, seed: g.seed, ..DcOptions::default() }
}

/// Builds each instance's path and applies `f`, `--jobs` instances at a time.
pub fn per_instance(
    a: &InstanceArgs,
    g: &GlobalArgs,
    default_depth: usize,
    for_solver: bool,
    f: impl Fn(&Instance, &CocyclePath, &PathInfo) -> Result<Output> + Sync,
) -> Result<Vec<Entry>> {
    let insts = load_instances(a)?;
    Ok(run_parallel(insts.len(), g.jobs, |i| {
        let inst = &insts[i];
        let outcome = build_path(inst, a, default_depth, for_solver).and_then(|(path, info)| f(inst, &path, &info));
        Entry { name: inst.name.clone(), outcome }
    }))
}

fn combinatorics(pi: &PermutationPair) -> Value {
    let sing = pi.singularities();
    json!({
        "pi": pi,
        "d": pi.d(),
        "genus": pi.genus(),
        "singularities": sing.count(),
        "omega_rank": pi.omega().rank(),
    })
}

fn dc_summary(rep: &DiophantineReport) -> Value {
    json!({
        "eta_hat": rep.eta_hat,
        "theta_hat": rep.theta_hat,
        "sigma_hat": rep.sigma_hat,
        "cond_a": rep.cond_a.pass,
        "cond_b": rep.cond_b.pass,
        "cond_c": rep.cond_c.pass,
        "cond_d": rep.cond_d.pass,
        "admissible": rep.admissible,
        "admissibility_margin": rep.admissibility_margin(),
        "windows": rep.windows,
    })
}

pub fn analyze(r: &RunArgs, g: &GlobalArgs) -> Result<Report> {
    let opts = dc_options(r, g);
    let entries = per_instance(&r.instance, g, DEPTH_ANALYZE, false, |inst, path, info| {
        let lyap = lyapunov_spectrum(path)?;
        let dc = dc_test(path, &opts)?;
        let comb = combinatorics(path.pi_at(0));
        let row = format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            csv_field(&inst.name),
            path.d(),
            comb["genus"],
            comb["singularities"],
            comb["omega_rank"],
            info.depth,
            dc.windows,
            lyap.exponents[0],
            lyap.mu_estimate,
            dc.eta_hat,
            dc.theta_hat,
            dc.sigma_hat,
            dc.admissible
        );
        let body = json!({
            "path": info,
            "combinatorics": comb,
            "lyapunov": {
                "exponents": lyap.exponents,
                "kernel_boundary": lyap.kernel_boundary,
                "mu_estimate": lyap.mu_estimate,
            },
            "diophantine": dc_summary(&dc),
        });
        Ok(Output::ok(body, vec![row]))
    })?;
    Ok(Report {
        command: "analyze",
        config: run_config(r, g, DEPTH_ANALYZE),
        csv_header: "instance,d,genus,singularities,omega_rank,depth,windows,theta1,mu,eta_hat,theta_hat,sigma_hat,admissible",
        entries,
    })
}

pub fn rv(r: &RunArgs, g: &GlobalArgs) -> Result<Report> {
    let entries = per_instance(&r.instance, g, DEPTH_RV, false, |inst, path, info| {
        let mut buf = Vec::new();
        path.write_jsonl(&mut buf).expect("writing to memory");
        let records: Vec<Value> = String::from_utf8(buf)
            .expect("JSON is UTF-8")
            .lines()
            .skip(1)
            .map(|l| serde_json::from_str(l).expect("path records are JSON"))
            .collect();
        let rows = records
            .iter()
            .map(|s| {
                let pi: PermutationPair = serde_json::from_value(s["pi"].clone()).expect("pi round-trips");
                let lengths: Vec<&str> = s["lengths"].as_array().unwrap().iter().map(|v| v.as_str().unwrap()).collect();
                format!(
                    "{},{},{},{},{},{},{}",
                    csv_field(&inst.name),
                    s["index"],
                    s["type"].as_str().unwrap(),
                    s["winner"].as_str().unwrap(),
                    s["loser"].as_str().unwrap(),
                    pi,
                    lengths.join(";")
                )
            })
            .collect();
        let body = json!({
            "path": info,
            "initial": { "pi": path.pi_at(0), "lengths": path.iet_at(0).to_json().lengths },
            "accel_times": path.accel_times(),
            "steps": records,
        });
        Ok(Output::ok(body, rows))
    })?;
    Ok(Report {
        command: "rv",
        config: instance_config(&r.instance, DEPTH_RV),
        csv_header: "instance,index,type,winner,loser,pi,lengths",
        entries,
    })
}

pub fn lyapunov(r: &RunArgs, g: &GlobalArgs) -> Result<Report> {
    let entries = per_instance(&r.instance, g, DEPTH_LYAPUNOV, false, |inst, path, info| {
        let rep = lyapunov_spectrum(path)?;
        let mut rows = Vec::new();
        for (name, xs) in [
            ("full", &rep.exponents),
            ("kernel_boundary", &rep.kernel_boundary),
            ("image_omega", &rep.image_omega),
        ] {
            for (i, x) in xs.iter().enumerate() {
                rows.push(format!("{},{name},{i},{x}", csv_field(&inst.name)));
            }
        }
        Ok(Output::ok(json!({ "path": info, "lyapunov": rep }), rows))
    })?;
    Ok(Report {
        command: "lyapunov",
        config: instance_config(&r.instance, DEPTH_LYAPUNOV),
        csv_header: "instance,spectrum,i,exponent",
        entries,
    })
}

pub fn dc_test_cmd(r: &RunArgs, g: &GlobalArgs) -> Result<Report> {
    let opts = dc_options(r, g);
    let entries = per_instance(&r.instance, g, DEPTH_DC, false, |inst, path, info| {
        let rep = dc_test(path, &opts)?;
        let rows = rep.to_csv().lines().skip(1).map(|l| format!("{},{l}", csv_field(&inst.name))).collect();
        let body = json!({
            "path": info,
            "admissibility_margin": rep.admissibility_margin(),
            "diophantine": rep,
        });
        Ok(Output { body, csv_rows: rows, hypothesis_failed: !rep.admissible })
    })?;
    Ok(Report {
        command: "dc-test",
        config: run_config(r, g, DEPTH_DC),
        csv_header: "instance,series,k,log_norm_B,value",
        entries,
    })
}

pub const DEPTH_SOLVE: usize = 10_000;

fn piecewise_json(f: &PiecewiseFunction) -> Value {
    serde_json::from_str(&f.to_json_string()).expect("piecewise JSON")
}

pub fn solve_cmd(a: &SolveArgs, g: &GlobalArgs) -> Result<Report> {
    let dc_opts = dc_options(&a.run, g);
    let opts = SolveOptions {
        residual_tol: a.residual_tol,
        grid: a.grid,
        seed: g.seed,
        truncation: a.truncation,
        ..SolveOptions::default()
    };
    let entries = per_instance(&a.run.instance, g, DEPTH_SOLVE, true, |inst, path, info| {
        let phi = load_phi(&a.phi, &path.iet_at(0))?;
        let rep = dc_test(path, &dc_opts)?;
        let sol = solve_higher_with(path, &phi, a.r, &rep, &opts)?;
        let rows = sol
            .decay_log
            .iter()
            .map(|p| format!("{},{},{},{}", csv_field(&inst.name), p.k, p.log_norm_b, p.log_norm_s))
            .collect();
        let body = json!({
            "path": info,
            "u": piecewise_json(&sol.u),
            "derivatives": sol.derivatives.iter().map(piecewise_json).collect::<Vec<_>>(),
            "chi": piecewise_json(&sol.chi),
            "chi_class": sol.chi_class,
            "residual": sol.residual,
            "derivative_residuals": sol.derivative_residuals,
            "decay_log": sol.decay_log,
            "decay_exponent": sol.decay_exponent,
            "decay_fit": sol.decay_fit,
            "correction_exponent": sol.correction_exponent,
            "correction_tail": sol.correction_tail,
            "base_point": sol.base_point,
            "truncation": sol.truncation,
            "admissibility": dc_summary(&sol.admissibility),
        });
        Ok(Output::ok(body, rows))
    })?;
    let mut config = run_config(&a.run, g, DEPTH_SOLVE);
    config["depth"] = a.run.instance.depth.map_or(Value::from("auto"), Value::from);
    config["phi"] = json!(a.phi);
    config["r"] = json!(a.r);
    config["residual_tol"] = json!(a.residual_tol);
    config["grid"] = json!(a.grid);
    config["truncation"] = a.truncation.map_or(Value::from("auto"), Value::from);
    config["orbit_points"] = json!(opts.orbit_points);
    config["boundary_tol"] = json!(opts.boundary_tol);
    Ok(Report { command: "solve", config, csv_header: "instance,k,log_norm_b,log_norm_s", entries })
}

pub fn codim(a: &CodimArgs) -> Result<Report> {
    let pi = a.pi.as_deref().map(PermutationPair::parse).transpose()?;
    let (g, s) = match (&pi, a.g, a.s) {
        (Some(_), None, None) => (None, None),
        (None, Some(g), Some(s)) => (Some(g), Some(s)),
        _ => return Err(CliError::Usage("give either --pi or both --g and --s".into())),
    };
    let entries = a
        .r
        .iter()
        .map(|&r| {
            let outcome = (|| {
                let c = match &pi {
                    Some(pi) => CodimensionInput::from_pi(pi, a.mu, r)?,
                    None => CodimensionInput::new(g.unwrap(), s.unwrap(), a.mu, r)?,
                };
                let n = codimension(&c)?;
                let check = equation_count_check(&c)?;
                let row = format!("{},{},{},{},{},{n},{check}", c.g, c.s, c.mu, c.r, c.d());
                let body = json!({
                    "input": c,
                    "d": c.d(),
                    "codimension": n,
                    "equation_count_check": check,
                });
                Ok(Output::ok(body, vec![row]))
            })();
            Entry { name: format!("r={r}"), outcome }
        })
        .collect();
    let config = json!({ "g": a.g, "s": a.s, "pi": a.pi, "mu": a.mu, "r": a.r });
    Ok(Report { command: "codim", config, csv_header: "g,s,mu,r,d,codimension,equation_count_check", entries })
}

pub fn loops(a: &LoopsArgs, g: &GlobalArgs) -> Result<Report> {
    let entries = run_parallel(a.pis.len(), g.jobs, |i| {
        let name = a.pis[i].clone();
        let outcome = (|| {
            let pi = PermutationPair::parse(&a.pis[i])?;
            let found = find_loops(&pi, a.max_len, a.precision)?;
            let mut rows = Vec::new();
            let mut list = Vec::new();
            for (k, l) in found.iter().enumerate() {
                rows.push(format!(
                    "{},{k},{},{},{}",
                    csv_field(&name),
                    l.period(),
                    l.step_string(),
                    l.pf_eigenvalue_f64()
                ));
                let mut v = serde_json::to_value(l.to_json()).expect("loop JSON");
                v["period"] = json!(l.period());
                list.push(v);
            }
            Ok(Output::ok(json!({ "count": found.len(), "loops": list }), rows))
        })();
        Entry { name, outcome }
    });
    let config = json!({ "max_len": a.max_len, "precision": a.precision });
    Ok(Report { command: "loops", config, csv_header: "instance,index,period,steps,pf_eigenvalue", entries })
}
