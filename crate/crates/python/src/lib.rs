//! Python bindings. Rationals cross the boundary as `"p/q"` strings (ints
//! and `fractions.Fraction` are accepted on input); structured results come
//! back as plain dicts and lists.

use std::collections::BTreeMap;

use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyValueError};
use pyo3::prelude::*;
use serde::Serialize;

use urysohn::extension::{generic_space, DistanceSpec, GrowingSpace, ValueDomain};
use urysohn::group2::{exponent3_witness, extend_invariant_metric, InvariantMetric};
use urysohn::isometry::{build_free_pair, build_unbounded, FreeWord};
use urysohn::metric::FiniteMetricSpace;
use urysohn::orbit::{orbit_graph_experiment, targeted_extension, SeriesSpec};
use urysohn::rational::Rational;
use urysohn::toeplitz::{
    amalgamation_bounds, cyclic_metric, is_admissible, is_toeplitz, prolong, prolong_rational,
    universal_prefix, ToeplitzPrefix, VectorEnumeration,
};

create_exception!(urysohn_py, UrysohnError, PyException);

fn err(e: urysohn::Error) -> PyErr {
    UrysohnError::new_err((e.to_string(), e.to_json().to_string()))
}

fn rational(obj: &Bound<'_, PyAny>) -> PyResult<Rational> {
    let text = obj.str()?.to_string();
    text.parse()
        .map_err(|_| PyValueError::new_err(format!("not a rational: {text}")))
}

fn rationals(items: &[Bound<'_, PyAny>]) -> PyResult<Vec<Rational>> {
    items.iter().map(rational).collect()
}

/// Serializes through JSON into native Python objects.
fn to_py<T: Serialize>(py: Python<'_>, value: &T) -> PyResult<Py<PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyValueError::new_err(e.to_string()))?;
    Ok(py.import("json")?.call_method1("loads", (text,))?.unbind())
}

fn domain(raw: &str) -> PyResult<ValueDomain> {
    raw.parse().map_err(err)
}

/// A finite metric space that only grows by one-point extensions.
#[pyclass(name = "Space")]
struct PySpace {
    inner: GrowingSpace,
}

#[pymethods]
impl PySpace {
    /// Builds a space from a square matrix of rationals, checking the metric axioms.
    #[new]
    #[pyo3(signature = (matrix = None))]
    fn new(matrix: Option<Vec<Vec<Bound<'_, PyAny>>>>) -> PyResult<Self> {
        let inner = match matrix {
            None => GrowingSpace::new(),
            Some(rows) => {
                let dist = rows.iter().map(|r| rationals(r)).collect::<PyResult<Vec<_>>>()?;
                GrowingSpace::from_space(FiniteMetricSpace::from_matrix(dist).map_err(err)?)
            }
        };
        Ok(Self { inner })
    }

    /// Seeded sample of `n` points; `domain` is `int:D`, `rat:Q:D` or `graph`.
    #[staticmethod]
    #[pyo3(signature = (n, domain = "int:5", seed = 0))]
    fn generic(n: usize, domain: &str, seed: u64) -> PyResult<Self> {
        let inner = generic_space(n, self::domain(domain)?, seed).map_err(err)?;
        Ok(Self { inner })
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn d(&self, a: usize, b: usize) -> PyResult<String> {
        let m = self.inner.space();
        m.check_point(a).map_err(err)?;
        m.check_point(b).map_err(err)?;
        Ok(m.d(a, b).to_string())
    }

    fn matrix(&self) -> Vec<Vec<String>> {
        let m = self.inner.space().matrix();
        m.iter().map(|r| r.iter().map(ToString::to_string).collect()).collect()
    }

    fn diameter(&self) -> String {
        self.inner.space().diameter().to_string()
    }

    /// Adds a point at the given distances `{point: value}`; returns its id.
    fn extend_point(&mut self, spec: BTreeMap<usize, Bound<'_, PyAny>>) -> PyResult<usize> {
        let spec = spec_of(spec)?;
        self.inner.extend_point(&spec).map_err(err)
    }

    /// Adds two points realizing the spec at distance `2 * min(g)`.
    fn realize_sphere_pair(
        &mut self,
        spec: BTreeMap<usize, Bound<'_, PyAny>>,
    ) -> PyResult<(usize, usize)> {
        let spec = spec_of(spec)?;
        self.inner.realize_sphere_pair(&spec).map_err(err)
    }

    /// The space document `{"points", "dist", "log"}` as a dict.
    fn to_dict(&self, py: Python<'_>) -> PyResult<Py<PyAny>> {
        let mut doc = self.inner.space().to_json();
        doc.log = Some(self.inner.log().to_vec());
        to_py(py, &doc)
    }

    fn __repr__(&self) -> String {
        format!("Space(points={})", self.inner.len())
    }
}

fn spec_of(spec: BTreeMap<usize, Bound<'_, PyAny>>) -> PyResult<DistanceSpec> {
    let mut out = DistanceSpec::new();
    for (p, v) in spec {
        out = out.with(p, rational(&v)?);
    }
    Ok(out)
}

fn prefix(values: &[Bound<'_, PyAny>]) -> PyResult<ToeplitzPrefix> {
    ToeplitzPrefix::new(rationals(values)?).map_err(err)
}

/// Violations of positivity and `|f(i) - f(j)| <= f(i+j) <= f(i) + f(j)`; empty means Toeplitz.
#[pyfunction]
fn toeplitz_violations(py: Python<'_>, values: Vec<Bound<'_, PyAny>>) -> PyResult<Py<PyAny>> {
    to_py(py, &is_toeplitz(&rationals(&values)?).violations)
}

#[pyfunction]
fn admissible(f: Vec<Bound<'_, PyAny>>, h: Vec<Bound<'_, PyAny>>) -> PyResult<bool> {
    Ok(is_admissible(&prefix(&f)?, &rationals(&h)?).is_ok())
}

/// `(lower, upper)` for the next value of `f`.
#[pyfunction]
fn next_value_bounds(f: Vec<Bound<'_, PyAny>>) -> PyResult<(String, String)> {
    let b = amalgamation_bounds(&prefix(&f)?);
    Ok((b.lower.to_string(), b.upper.to_string()))
}

/// A Toeplitz prefix starting with `f` and ending with `h`.
#[pyfunction]
fn prolong_prefix(f: Vec<Bound<'_, PyAny>>, h: Vec<Bound<'_, PyAny>>) -> PyResult<Vec<String>> {
    let f = prefix(&f)?;
    let h = rationals(&h)?;
    let p = if f.is_integral() && h.iter().all(Rational::is_integer) {
        prolong(&f, &h)
    } else {
        prolong_rational(&f, &h)
    }
    .map_err(err)?;
    Ok(p.prefix.values().iter().map(ToString::to_string).collect())
}

/// `{"prefix": [...], "table": [{vector, offset, prolonged}], "skipped": [...]}`.
#[pyfunction]
#[pyo3(signature = (steps, start = vec![1]))]
fn universal(py: Python<'_>, steps: usize, start: Vec<i64>) -> PyResult<Py<PyAny>> {
    let seed = ToeplitzPrefix::from_ints(&start).map_err(err)?;
    let u = universal_prefix(VectorEnumeration::new(), steps, &seed).map_err(err)?;
    to_py(py, &u)
}

#[pyfunction]
fn cyclic_space(f: Vec<Bound<'_, PyAny>>, size: usize) -> PyResult<PySpace> {
    let m = cyclic_metric(&prefix(&f)?, size).map_err(err)?;
    Ok(PySpace {
        inner: GrowingSpace::from_space(m),
    })
}

/// Certificates of the unbounded back-and-forth run.
#[pyfunction]
fn unbounded_certificates(py: Python<'_>, stages: usize) -> PyResult<Py<PyAny>> {
    let mut gs = GrowingSpace::new();
    let (_, certs) = build_unbounded(&mut gs, stages).map_err(err)?;
    to_py(py, &certs)
}

/// Word certificates for a free pair, e.g. `free_pair(["a", "b", "abAB"], 3)`.
#[pyfunction]
fn free_pair(py: Python<'_>, words: Vec<String>, revisits: usize) -> PyResult<Py<PyAny>> {
    let words = words
        .iter()
        .map(|w| w.parse::<FreeWord>().map_err(err))
        .collect::<PyResult<Vec<_>>>()?;
    let mut gs = GrowingSpace::new();
    let fp = build_free_pair(&mut gs, &words, revisits).map_err(err)?;
    let runs: Vec<_> = fp.runs.iter().collect();
    to_py(py, &runs)
}

/// Extends the invariant metric `d(0, x) = delta[x - 1]` by one level.
#[pyfunction]
fn extend_group2(
    delta: Vec<Bound<'_, PyAny>>,
    new: Vec<Bound<'_, PyAny>>,
) -> PyResult<Vec<String>> {
    let delta = rationals(&delta)?;
    let level = (delta.len() + 1).trailing_zeros() as usize;
    let m = InvariantMetric::new(level, delta).map_err(err)?;
    let out = extend_invariant_metric(&m, &rationals(&new)?).map_err(err)?;
    Ok(out.delta.iter().map(ToString::to_string).collect())
}

#[pyfunction]
fn exponent3(py: Python<'_>, alpha: Bound<'_, PyAny>, eps: Bound<'_, PyAny>) -> PyResult<Py<PyAny>> {
    let r = exponent3_witness(&rational(&alpha)?, &rational(&eps)?).map_err(err)?;
    to_py(py, &r)
}

/// The witness for a point joined to all of `u` and none of `v`, if found.
#[pyfunction]
#[pyo3(signature = (space, u, v, series = "harmonic"))]
fn targeted_witness(
    space: &PySpace,
    u: Vec<usize>,
    v: Vec<usize>,
    series: &str,
) -> PyResult<Option<usize>> {
    let s: SeriesSpec = series.parse().map_err(err)?;
    let t = targeted_extension(&space.inner, &s, &u, &v).map_err(err)?;
    Ok(t.witness)
}

#[pyfunction]
#[pyo3(signature = (sizes, uv_bound = 2, domain = "rat:2:4", series = "harmonic", seed = 0))]
fn orbit_experiment(
    py: Python<'_>,
    sizes: Vec<usize>,
    uv_bound: usize,
    domain: &str,
    series: &str,
    seed: u64,
) -> PyResult<Py<PyAny>> {
    let s: SeriesSpec = series.parse().map_err(err)?;
    let rows = orbit_graph_experiment(&sizes, self::domain(domain)?, &s, uv_bound, seed).map_err(err)?;
    to_py(py, &rows)
}

#[pymodule]
fn urysohn_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("UrysohnError", m.py().get_type::<UrysohnError>())?;
    m.add_class::<PySpace>()?;
    m.add_function(wrap_pyfunction!(toeplitz_violations, m)?)?;
    m.add_function(wrap_pyfunction!(admissible, m)?)?;
    m.add_function(wrap_pyfunction!(next_value_bounds, m)?)?;
    m.add_function(wrap_pyfunction!(prolong_prefix, m)?)?;
    m.add_function(wrap_pyfunction!(universal, m)?)?;
    m.add_function(wrap_pyfunction!(cyclic_space, m)?)?;
    m.add_function(wrap_pyfunction!(unbounded_certificates, m)?)?;
    m.add_function(wrap_pyfunction!(free_pair, m)?)?;
    m.add_function(wrap_pyfunction!(extend_group2, m)?)?;
    m.add_function(wrap_pyfunction!(exponent3, m)?)?;
    m.add_function(wrap_pyfunction!(targeted_witness, m)?)?;
    m.add_function(wrap_pyfunction!(orbit_experiment, m)?)?;
    Ok(())
}
