use serde::Serialize;

use iet_renorm::cohomology_solver::LN_TRUNCATION_NORM;
use iet_renorm::function_spaces::PiecewiseFunction;
use iet_renorm::iet::{Iet, IetJson};
use iet_renorm::numeric::Backend;
use iet_renorm::rauzy_veech::{iterate, precision_for_depth, CocyclePath, IterateOptions};
use iet_renorm::self_similar::{iterate_periodic, RauzyLoop, EW_LOOP_JSON};

use crate::args::InstanceArgs;
use crate::error::{CliError, Result};

/// Inline JSON, or the contents of a file.
pub fn read_source(s: &str) -> Result<String> {
    if s.trim_start().starts_with('{') {
        return Ok(s.to_string());
    }
    std::fs::read_to_string(s).map_err(|e| CliError::Io { path: s.to_string(), source: e })
}

fn label(s: &str, kind: &str, i: usize) -> String {
    if s.trim_start().starts_with('{') {
        format!("{kind}#{i}")
    } else {
        s.to_string()
    }
}

#[derive(Clone, Debug)]
pub enum Source {
    Iet(IetJson),
    Loop(String),
}

#[derive(Clone, Debug)]
pub struct Instance {
    pub name: String,
    pub source: Source,
}

pub fn load_instances(a: &InstanceArgs) -> Result<Vec<Instance>> {
    let mut out = Vec::new();
    for (i, s) in a.iets.iter().enumerate() {
        let j: IetJson = serde_json::from_str(&read_source(s)?).map_err(iet_renorm::Error::from)?;
        out.push(Instance { name: label(s, "iet", i), source: Source::Iet(j) });
    }
    for (i, s) in a.loops.iter().enumerate() {
        let text = if s == "ew" { EW_LOOP_JSON.to_string() } else { read_source(s)? };
        out.push(Instance { name: label(s, "loop", i), source: Source::Loop(text) });
    }
    if out.is_empty() {
        return Err(CliError::Usage("no instance given; use --iet or --loop".into()));
    }
    Ok(out)
}

/// How a path was produced; echoed into every per-instance result.
#[derive(Clone, Debug, Serialize)]
pub struct PathInfo {
    pub depth: usize,
    pub backend: String,
    pub periods: Option<usize>,
}

/// Loops need no extra precision: lengths are rescaled by the Perron-Frobenius eigenvalue.
const LOOP_BITS: usize = 256;

pub fn load_loop(text: &str, precision: Option<usize>) -> Result<RauzyLoop> {
    Ok(RauzyLoop::from_json_str(text, precision.unwrap_or(LOOP_BITS))?)
}

pub fn build_iet(j: &IetJson, depth: usize, a: &InstanceArgs) -> Result<Iet> {
    let mut j = j.clone();
    if let Backend::Float { bits } = Backend::parse(&j.backend)? {
        let want = a.precision.unwrap_or_else(|| precision_for_depth(depth, a.rate).max(bits));
        j.backend = Backend::float(want).name();
    }
    Ok(Iet::from_json(&j)?)
}

/// Periods of a loop that reach the reference time of the solver's stable space.
pub fn solver_periods(l: &RauzyLoop) -> usize {
    (1.3 * 8.0 * LN_TRUNCATION_NORM / l.pf_eigenvalue_f64().ln()).ceil() as usize + 4
}

/// Without `--depth`, iets run `default_depth` steps; loops run as many whole
/// periods, or `solver_periods` when `for_solver` is set.
pub fn build_path(
    inst: &Instance,
    a: &InstanceArgs,
    default_depth: usize,
    for_solver: bool,
) -> Result<(CocyclePath, PathInfo)> {
    match &inst.source {
        Source::Iet(j) => {
            let depth = a.depth.unwrap_or(default_depth);
            let t = build_iet(j, depth, a)?;
            let path = iterate(&t, depth, &IterateOptions::default())?;
            let info = PathInfo { depth, backend: t.backend().name(), periods: None };
            Ok((path, info))
        }
        Source::Loop(text) => {
            let l = load_loop(text, a.precision)?;
            let periods = match a.depth {
                Some(d) => d.div_ceil(l.period()).max(1),
                None if for_solver => solver_periods(&l),
                None => default_depth.div_ceil(l.period()).max(1),
            };
            let path = iterate_periodic(&l, periods)?;
            let info = PathInfo { depth: path.depth(), backend: path.backend().name(), periods: Some(periods) };
            Ok((path, info))
        }
    }
}

/// `cos[:k[:phase]]`, or piecewise-function JSON.
pub fn load_phi(spec: &str, t: &Iet) -> Result<PiecewiseFunction> {
    if spec == "cos" || spec.starts_with("cos:") {
        let rest = &spec[3..];
        let parts: Vec<&str> = rest.split(':').skip(1).collect();
        let num = |i: usize, default: f64| -> Result<f64> {
            parts.get(i).map_or(Ok(default), |p| {
                p.parse().map_err(|_| CliError::Usage(format!("bad number `{p}` in --phi {spec}")))
            })
        };
        if parts.len() > 2 {
            return Err(CliError::Usage(format!("bad --phi `{spec}`; expected cos[:k[:phase]]")));
        }
        return Ok(PiecewiseFunction::trig(t, num(0, 1.0)?, num(1, 0.0)?, 40));
    }
    let f = PiecewiseFunction::from_json_str(&read_source(spec)?)?;
    f.check_domain(t, 1e-9)?;
    Ok(f)
}
