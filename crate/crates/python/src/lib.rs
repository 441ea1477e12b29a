//! Python bindings. Reports are returned as plain dicts with the same layout
//! as the Rust `Serialize` output.

use pyo3::create_exception;
use pyo3::exceptions::PyException;
use pyo3::prelude::*;
use serde::Serialize;

use renorm::cocycle_analysis::{dc_test as dc_test_rs, lyapunov_spectrum as lyapunov_rs, DcOptions};
use renorm::cohomology_solver::{solve_higher_with, SolveOptions};
use renorm::combinatorics::{PermutationPair as PairRs, StepType};
use renorm::function_spaces::PiecewiseFunction;
use renorm::iet::{Iet as IetRs, IetJson};
use renorm::linalg::IntMatrix;
use renorm::numeric::Backend;
use renorm::rauzy_veech::{iterate as iterate_rs, precision_for_depth, CocyclePath, IterateOptions};
use renorm::self_similar::{self as ss, CodimensionInput, RauzyLoop as LoopRs};

create_exception!(iet_renorm, IetError, PyException);
create_exception!(iet_renorm, HypothesisError, IetError);

fn err(e: renorm::Error) -> PyErr {
    use renorm::Error as E;
    let hyp = matches!(
        e,
        E::NotAdmissible(_) | E::Residual { .. } | E::Decay(_) | E::Boundary(_) | E::Indeterminate(_) | E::Connection { .. }
    );
    if hyp {
        HypothesisError::new_err(e.to_string())
    } else {
        IetError::new_err(e.to_string())
    }
}

fn to_py<T: Serialize>(py: Python<'_>, v: &T) -> PyResult<Py<PyAny>> {
    let s = serde_json::to_string(v).map_err(|e| IetError::new_err(e.to_string()))?;
    Ok(py.import("json")?.call_method1("loads", (s,))?.unbind())
}

/// Rows of Python ints, exact at any size.
fn int_rows(py: Python<'_>, b: &IntMatrix) -> PyResult<Py<PyAny>> {
    let int = py.import("builtins")?.getattr("int")?;
    let rows = b
        .to_string_rows()
        .into_iter()
        .map(|r| r.into_iter().map(|s| int.call1((s,))).collect::<PyResult<Vec<_>>>())
        .collect::<PyResult<Vec<_>>>()?;
    Ok(rows.into_pyobject(py)?.into_any().unbind())
}

#[pyclass(name = "PermutationPair", from_py_object)]
#[derive(Clone)]
struct PermutationPair(PairRs);

#[pymethods]
impl PermutationPair {
    /// Parses `"A B C D / D C B A"`.
    #[new]
    fn new(s: &str) -> PyResult<Self> {
        PairRs::parse(s).map(Self).map_err(err)
    }

    #[getter]
    fn d(&self) -> usize {
        self.0.d()
    }

    #[getter]
    fn genus(&self) -> usize {
        self.0.genus()
    }

    #[getter]
    fn singularities(&self) -> usize {
        self.0.singularities().count()
    }

    fn is_irreducible(&self) -> bool {
        self.0.is_irreducible()
    }

    /// `kind` is `"T"` or `"B"`.
    fn rauzy_move(&self, kind: &str) -> PyResult<Self> {
        let k = StepType::parse(kind).map_err(err)?;
        Ok(Self(self.0.rauzy_move(k)))
    }

    fn rauzy_class(&self) -> Vec<Self> {
        self.0.rauzy_class().into_iter().map(Self).collect()
    }

    fn __str__(&self) -> String {
        self.0.to_string()
    }

    fn __repr__(&self) -> String {
        format!("PermutationPair('{}')", self.0)
    }

    fn __eq__(&self, other: &Self) -> bool {
        self.0 == other.0
    }
}

/// `src` keeps the length expressions so that the map can be rebuilt at a
/// higher precision; maps derived from a path have none.
#[pyclass(name = "Iet", from_py_object)]
#[derive(Clone)]
struct Iet {
    t: IetRs,
    src: Option<IetJson>,
}

impl Iet {
    fn derived(t: IetRs) -> Self {
        Iet { t, src: None }
    }

    fn with_source(src: IetJson) -> Result<Self, renorm::Error> {
        Ok(Iet { t: IetRs::from_json(&src)?, src: Some(src) })
    }
}

#[pymethods]
impl Iet {
    /// Lengths are decimal strings or expressions such as `"sqrt(2) - 1"`,
    /// in alphabetical order of the letters.
    #[new]
    #[pyo3(signature = (pi, lengths, backend = "float256"))]
    fn new(pi: &PermutationPair, lengths: Vec<String>, backend: &str) -> PyResult<Self> {
        let src = IetJson { pi: pi.0.clone(), lengths, left: "0".into(), backend: backend.into() };
        Self::with_source(src).map_err(err)
    }

    #[staticmethod]
    #[pyo3(signature = (bits = 256))]
    fn golden_rotation(bits: usize) -> PyResult<Self> {
        let pi = PairRs::parse("A B / B A").map_err(err)?;
        Self::new(&PermutationPair(pi), vec!["(3 - sqrt(5))/2".into(), "(sqrt(5) - 1)/2".into()], &Backend::float(bits).name())
    }

    #[staticmethod]
    fn from_json(s: &str) -> PyResult<Self> {
        let j: IetJson = serde_json::from_str(s).map_err(|e| IetError::new_err(e.to_string()))?;
        Self::with_source(j).map_err(err)
    }

    fn to_json(&self) -> String {
        serde_json::to_string(&self.t.to_json()).expect("iet serializes")
    }

    #[getter]
    fn pi(&self) -> PermutationPair {
        PermutationPair(self.t.pi().clone())
    }

    #[getter]
    fn lengths(&self) -> Vec<f64> {
        self.t.lengths_f64()
    }

    #[getter]
    fn backend(&self) -> String {
        self.t.backend().name()
    }

    fn __call__(&self, x: f64) -> f64 {
        self.t.to_f64().apply(x)
    }
}

#[pyclass(name = "CocyclePath", frozen)]
struct Path(CocyclePath);

#[pymethods]
impl Path {
    #[getter]
    fn depth(&self) -> usize {
        self.0.depth()
    }

    #[getter]
    fn d(&self) -> usize {
        self.0.d()
    }

    /// Step codes `"T"`/`"B"`.
    fn step_types(&self) -> Vec<&'static str> {
        self.0.step_types().iter().map(StepType::code).collect()
    }

    fn accel_times(&self) -> Vec<usize> {
        self.0.accel_times().to_vec()
    }

    fn pi_at(&self, n: usize) -> PyResult<PermutationPair> {
        self.check(n)?;
        Ok(PermutationPair(self.0.pi_at(n).clone()))
    }

    fn iet_at(&self, n: usize) -> PyResult<Iet> {
        self.check(n)?;
        Ok(Iet::derived(self.0.iet_at(n)))
    }

    /// `B(m, n)` as rows of Python ints.
    fn matrix(&self, py: Python<'_>, m: usize, n: usize) -> PyResult<Py<PyAny>> {
        let b = self.0.matrix(m, n).map_err(err)?;
        int_rows(py, &b)
    }

    /// Brute-force visit counts of the level-`n` return to the level-`m` intervals.
    #[pyo3(signature = (m, n, cap = 1_000_000))]
    fn visit_counts(&self, py: Python<'_>, m: usize, n: usize, cap: u64) -> PyResult<Py<PyAny>> {
        let b = self.0.visit_counts(m, n, cap).map_err(err)?;
        int_rows(py, &b)
    }
}

impl Path {
    fn check(&self, n: usize) -> PyResult<()> {
        if n > self.0.depth() {
            return Err(IetError::new_err(format!("step {n} beyond depth {}", self.0.depth())));
        }
        Ok(())
    }
}

#[pyclass(name = "RauzyLoop", frozen)]
struct RauzyLoop(LoopRs);

#[pymethods]
impl RauzyLoop {
    #[staticmethod]
    #[pyo3(signature = (s, bits = 256))]
    fn from_json(s: &str, bits: usize) -> PyResult<Self> {
        LoopRs::from_json_str(s, bits).map(Self).map_err(err)
    }

    fn to_json(&self) -> String {
        serde_json::to_string(&self.0.to_json()).expect("loop serializes")
    }

    #[getter]
    fn period(&self) -> usize {
        self.0.period()
    }

    #[getter]
    fn steps(&self) -> String {
        self.0.step_string()
    }

    #[getter]
    fn base_pi(&self) -> PermutationPair {
        PermutationPair(self.0.base_pi.clone())
    }

    #[getter]
    fn pf_eigenvalue(&self) -> f64 {
        self.0.pf_eigenvalue_f64()
    }

    #[getter]
    fn pf_lengths(&self) -> Vec<f64> {
        self.0.pf_lengths_f64()
    }

    fn self_similar(&self) -> PyResult<Iet> {
        ss::build_self_similar(&self.0).map(Iet::derived).map_err(err)
    }

    fn iterate(&self, periods: usize) -> PyResult<Path> {
        ss::iterate_periodic(&self.0, periods).map(Path).map_err(err)
    }
}

/// Runs `depth` Rauzy-Veech steps. A float map built from length expressions is
/// rebuilt at a precision adequate for the depth, or at `bits` if given.
#[pyfunction]
#[pyo3(signature = (t, depth, bits = None, rate = 0.5))]
fn iterate(py: Python<'_>, t: &Iet, depth: usize, bits: Option<usize>, rate: f64) -> PyResult<Path> {
    let t = match (&t.src, t.t.backend()) {
        (Some(src), Backend::Float { bits: have }) => {
            let want = bits.unwrap_or_else(|| precision_for_depth(depth, rate).max(have));
            IetRs::from_json(&IetJson { backend: Backend::float(want).name(), ..src.clone() }).map_err(err)?
        }
        _ => t.t.clone(),
    };
    py.detach(|| iterate_rs(&t, depth, &IterateOptions::default())).map(Path).map_err(err)
}

#[pyfunction]
fn lyapunov_spectrum(py: Python<'_>, path: &Path) -> PyResult<Py<PyAny>> {
    let rep = py.detach(|| lyapunov_rs(&path.0)).map_err(err)?;
    to_py(py, &rep)
}

#[pyfunction]
#[pyo3(signature = (path, seed = 0))]
fn dc_test(py: Python<'_>, path: &Path, seed: u64) -> PyResult<Py<PyAny>> {
    let rep = py.detach(|| dc_test_rs(&path.0, &DcOptions { seed, ..DcOptions::default() })).map_err(err)?;
    let mut v = serde_json::to_value(&rep).expect("report serializes");
    v["admissibility_margin"] = rep.admissibility_margin().into();
    to_py(py, &v)
}

/// Solves `u o T - u = phi - chi`. `phi` is piecewise-function JSON or
/// `cos[:k[:phase]]`. Returns the solution report with `u` sampled on
/// `points` equally spaced points of the interval under `"u_values"`.
#[pyfunction]
#[pyo3(signature = (path, phi = "cos", r = 1, residual_tol = 1e-6, seed = 0, points = 1000))]
fn solve(
    py: Python<'_>,
    path: &Path,
    phi: &str,
    r: usize,
    residual_tol: f64,
    seed: u64,
    points: usize,
) -> PyResult<Py<PyAny>> {
    let t = path.0.iet_at(0);
    let f = if phi == "cos" || phi.starts_with("cos:") {
        let nums: Vec<f64> = phi[3..]
            .split(':')
            .skip(1)
            .map(|p| p.parse().map_err(|_| IetError::new_err(format!("bad phi `{phi}`"))))
            .collect::<PyResult<_>>()?;
        PiecewiseFunction::trig(&t, nums.first().copied().unwrap_or(1.0), nums.get(1).copied().unwrap_or(0.0), 40)
    } else {
        PiecewiseFunction::from_json_str(phi).map_err(err)?
    };
    let opts = SolveOptions { residual_tol, seed, ..SolveOptions::default() };
    let sol = py
        .detach(|| {
            let rep = dc_test_rs(&path.0, &DcOptions { seed, ..DcOptions::default() })?;
            solve_higher_with(&path.0, &f, r, &rep, &opts)
        })
        .map_err(err)?;
    let left = t.left().to_f64();
    let len = t.total_length().to_f64();
    let xs: Vec<f64> = (0..points).map(|i| left + len * i as f64 / points as f64).collect();
    let mut v = serde_json::to_value(&sol).expect("solution serializes");
    v["u"] = serde_json::from_str(&sol.u.to_json_string()).expect("piecewise JSON");
    v["chi"] = serde_json::from_str(&sol.chi.to_json_string()).expect("piecewise JSON");
    v["derivatives"] = sol
        .derivatives
        .iter()
        .map(|f| serde_json::from_str(&f.to_json_string()).expect("piecewise JSON"))
        .collect::<Vec<serde_json::Value>>()
        .into();
    v["u_points"] = xs.clone().into();
    v["u_values"] = xs.iter().map(|&x| sol.u.eval(x)).collect::<Vec<_>>().into();
    to_py(py, &v)
}

#[pyfunction]
fn codimension(g: u64, s: u64, mu: u64, r: u64) -> PyResult<u64> {
    let c = CodimensionInput::new(g, s, mu, r).map_err(err)?;
    ss::codimension(&c).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (pi, max_len, bits = 256))]
fn find_loops(py: Python<'_>, pi: &PermutationPair, max_len: usize, bits: usize) -> PyResult<Vec<RauzyLoop>> {
    let ls = py.detach(|| ss::find_loops(&pi.0, max_len, bits)).map_err(err)?;
    Ok(ls.into_iter().map(RauzyLoop).collect())
}

/// The stored 9-interval loop of the eight-square origami.
#[pyfunction]
#[pyo3(signature = (bits = 256))]
fn ew_loop(bits: usize) -> PyResult<RauzyLoop> {
    ss::ew_loop(bits).map(RauzyLoop).map_err(err)
}

#[pymodule]
fn iet_renorm(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("IetError", m.py().get_type::<IetError>())?;
    m.add("HypothesisError", m.py().get_type::<HypothesisError>())?;
    m.add_class::<PermutationPair>()?;
    m.add_class::<Iet>()?;
    m.add_class::<Path>()?;
    m.add_class::<RauzyLoop>()?;
    m.add_function(wrap_pyfunction!(iterate, m)?)?;
    m.add_function(wrap_pyfunction!(lyapunov_spectrum, m)?)?;
    m.add_function(wrap_pyfunction!(dc_test, m)?)?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(codimension, m)?)?;
    m.add_function(wrap_pyfunction!(find_loops, m)?)?;
    m.add_function(wrap_pyfunction!(ew_loop, m)?)?;
    Ok(())
}
