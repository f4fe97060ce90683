//! Python bindings. Reports come back as plain dicts built from their JSON form.

use khinlab::constants::{self, ThresholdMode};
use khinlab::verifier::{self, CaseGenerator, Suite};
use khinlab::{CoefficientVector, Decimal, Engine, McConfig, Weight};
use pyo3::create_exception;
use pyo3::exceptions::PyException;
use pyo3::prelude::*;
use serde::Serialize;

create_exception!(khinlab, KhinlabError, PyException);
create_exception!(khinlab, DimensionTooLarge, KhinlabError);
create_exception!(khinlab, BelowThreshold, KhinlabError);

fn err(e: khinlab::Error) -> PyErr {
    match e {
        khinlab::Error::DimensionTooLarge { .. } => DimensionTooLarge::new_err(e.to_string()),
        khinlab::Error::BelowThreshold { .. } => BelowThreshold::new_err(e.to_string()),
        _ => KhinlabError::new_err(e.to_string()),
    }
}

fn to_py<T: Serialize>(py: Python<'_>, value: &T) -> PyResult<Py<PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| KhinlabError::new_err(e.to_string()))?;
    Ok(py.import("json")?.call_method1("loads", (text,))?.unbind())
}

/// A number given either as decimal text or as a float.
#[derive(FromPyObject)]
enum Number {
    Text(String),
    Float(f64),
}

impl Number {
    fn decimal(&self) -> khinlab::Result<Decimal> {
        match self {
            Number::Text(t) => Decimal::parse(t),
            Number::Float(x) => Decimal::from_f64(*x),
        }
    }

    fn text(&self) -> khinlab::Result<String> {
        Ok(self.decimal()?.text().to_string())
    }
}

fn mode(name: &str) -> PyResult<ThresholdMode> {
    name.parse::<ThresholdMode>().map_err(KhinlabError::new_err)
}

#[pyclass(frozen, from_py_object, name = "Coefficients", module = "khinlab")]
#[derive(Clone)]
struct PyCoefficients {
    inner: CoefficientVector,
}

#[pymethods]
impl PyCoefficients {
    #[new]
    fn new(values: Vec<Number>) -> PyResult<Self> {
        let entries = values.iter().map(Number::decimal).collect::<khinlab::Result<Vec<_>>>().map_err(err)?;
        let inner = CoefficientVector::new(entries).map_err(err)?;
        Ok(Self { inner })
    }

    #[getter]
    fn values(&self) -> Vec<f64> {
        self.inner.values().to_vec()
    }

    #[getter]
    fn texts(&self) -> Vec<String> {
        self.inner.texts()
    }

    #[getter]
    fn exact(&self) -> bool {
        self.inner.is_exact()
    }

    fn norm2(&self) -> f64 {
        self.inner.norm2()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __repr__(&self) -> String {
        format!("Coefficients([{}])", self.inner.texts().join(", "))
    }
}

/// Coefficients or anything the constructor accepts.
#[derive(FromPyObject)]
enum CoeffArg {
    Wrapped(PyCoefficients),
    List(Vec<Number>),
}

impl CoeffArg {
    fn get(self) -> PyResult<CoefficientVector> {
        match self {
            CoeffArg::Wrapped(c) => Ok(c.inner),
            CoeffArg::List(v) => Ok(PyCoefficients::new(v)?.inner),
        }
    }
}

#[pyclass(frozen, from_py_object, name = "Weight", module = "khinlab")]
#[derive(Clone)]
struct PyWeight {
    inner: Weight,
}

#[pymethods]
impl PyWeight {
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(Self { inner: Weight::from_json(text).map_err(err)? })
    }

    /// Weight independent of the signs, from `(value, probability)` pairs.
    #[staticmethod]
    fn independent(atoms: Vec<(Number, Number)>) -> PyResult<Self> {
        let texts = pair_texts(&atoms)?;
        let refs: Vec<(&str, &str)> = texts.iter().map(|(v, p)| (v.as_str(), p.as_str())).collect();
        Ok(Self { inner: Weight::independent(&refs).map_err(err)? })
    }

    #[staticmethod]
    fn constant() -> Self {
        Self { inner: Weight::constant_one() }
    }

    /// Function of the first `k` signs, values in `++, +-, -+, --` order,
    /// times an optional independent factor.
    #[staticmethod]
    #[pyo3(signature = (k, values, aux = None))]
    fn sign_function(k: usize, values: Vec<Number>, aux: Option<Vec<(Number, Number)>>) -> PyResult<Self> {
        let texts = values.iter().map(Number::text).collect::<khinlab::Result<Vec<_>>>().map_err(err)?;
        let refs: Vec<&str> = texts.iter().map(String::as_str).collect();
        let aux_texts = aux.as_deref().map(pair_texts).transpose()?;
        let aux_refs: Option<Vec<(&str, &str)>> = aux_texts
            .as_ref()
            .map(|a| a.iter().map(|(v, p)| (v.as_str(), p.as_str())).collect());
        let inner = Weight::sign_function(k, &refs, aux_refs.as_deref()).map_err(err)?;
        Ok(Self { inner })
    }

    /// `P(w != 0)` as a float and as an exact ratio string.
    #[getter]
    fn nonzero_mass(&self) -> PyResult<(f64, String)> {
        let s = khinlab::weight_stats(&self.inner, 2.0).map_err(err)?.s;
        Ok((s.value(), s.to_string()))
    }

    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string(&self.inner).map_err(|e| KhinlabError::new_err(e.to_string()))
    }

    /// `(P(w != 0), ‖w‖_q)`.
    fn stats(&self, q: f64) -> PyResult<(f64, f64)> {
        let st = khinlab::weight_stats(&self.inner, q).map_err(err)?;
        Ok((st.s.value(), st.norm_q))
    }

    fn __repr__(&self) -> PyResult<String> {
        Ok(format!("Weight({})", self.to_json()?))
    }
}

fn pair_texts(pairs: &[(Number, Number)]) -> PyResult<Vec<(String, String)>> {
    pairs
        .iter()
        .map(|(v, p)| Ok((v.text()?, p.text()?)))
        .collect::<khinlab::Result<Vec<_>>>()
        .map_err(err)
}

fn engine(n_max: Option<usize>) -> Engine {
    n_max.map(Engine::new).unwrap_or_else(Engine::from_env)
}

fn weight_ref(w: &Option<PyWeight>) -> Option<&Weight> {
    w.as_ref().map(|w| &w.inner)
}

#[pyfunction]
#[pyo3(signature = (coeffs, p, weight = None, n_max = None))]
fn exact_moment(py: Python<'_>, coeffs: CoeffArg, p: f64, weight: Option<PyWeight>, n_max: Option<usize>) -> PyResult<Py<PyAny>> {
    let c = coeffs.get()?;
    let r = py.detach(|| engine(n_max).exact_moment(&c, p, weight_ref(&weight))).map_err(err)?;
    to_py(py, &r)
}

/// `P(|wξ| > t)`, or `P(|wξ| >= t)` with `strict=False`. The exact
/// probability is the `"ratio"` entry.
#[pyfunction]
#[pyo3(signature = (coeffs, t, weight = None, strict = true, n_max = None))]
fn exact_tail(
    py: Python<'_>,
    coeffs: CoeffArg,
    t: Number,
    weight: Option<PyWeight>,
    strict: bool,
    n_max: Option<usize>,
) -> PyResult<Py<PyAny>> {
    let c = coeffs.get()?;
    let t = t.decimal().map_err(err)?;
    let r = py.detach(|| engine(n_max).exact_tail(&c, &t, weight_ref(&weight), strict)).map_err(err)?;
    to_py(py, &r)
}

#[pyfunction]
#[pyo3(signature = (coeffs, n_max = None))]
fn prob_zero(py: Python<'_>, coeffs: CoeffArg, n_max: Option<usize>) -> PyResult<Py<PyAny>> {
    let c = coeffs.get()?;
    let r = py.detach(|| engine(n_max).prob_zero(&c)).map_err(err)?;
    to_py(py, &r)
}

#[pyfunction]
#[pyo3(signature = (coeffs, weight = None, n_max = None))]
fn exact_distribution(py: Python<'_>, coeffs: CoeffArg, weight: Option<PyWeight>, n_max: Option<usize>) -> PyResult<Py<PyAny>> {
    let c = coeffs.get()?;
    let r = py.detach(|| engine(n_max).exact_distribution(&c, weight_ref(&weight))).map_err(err)?;
    to_py(py, &r)
}

#[pyfunction]
#[pyo3(signature = (coeffs, p, weight = None, samples = 1_000_000, seed = 0))]
fn mc_moment(py: Python<'_>, coeffs: CoeffArg, p: f64, weight: Option<PyWeight>, samples: u64, seed: u64) -> PyResult<Py<PyAny>> {
    let c = coeffs.get()?;
    let cfg = McConfig::new(samples, seed);
    let r = py.detach(|| khinlab::mc_moment(&c, p, weight_ref(&weight), &cfg)).map_err(err)?;
    to_py(py, &r)
}

#[pyfunction]
#[pyo3(signature = (coeffs, t, weight = None, strict = true, samples = 1_000_000, seed = 0))]
fn mc_tail(
    py: Python<'_>,
    coeffs: CoeffArg,
    t: Number,
    weight: Option<PyWeight>,
    strict: bool,
    samples: u64,
    seed: u64,
) -> PyResult<Py<PyAny>> {
    let c = coeffs.get()?;
    let t = t.decimal().map_err(err)?;
    let cfg = McConfig::new(samples, seed);
    let r = py.detach(|| khinlab::mc_tail(&c, &t, weight_ref(&weight), strict, &cfg)).map_err(err)?;
    to_py(py, &r)
}

#[pyfunction]
#[pyo3(signature = (weight, p, q, mode = "classic"))]
fn extract_constants(py: Python<'_>, weight: PyWeight, p: f64, q: f64, mode: &str) -> PyResult<Py<PyAny>> {
    let r = khinlab::extract_constants(&weight.inner, p, q, self::mode(mode)?).map_err(err)?;
    to_py(py, &r)
}

#[pyfunction]
fn haagerup_bq(q: f64) -> PyResult<f64> {
    constants::haagerup_bq(q).map_err(err)
}

#[pyfunction]
fn euler_limit() -> f64 {
    constants::euler_limit()
}

#[pyfunction]
fn zero_mass_bound() -> f64 {
    constants::zero_mass_bound()
}

#[pyfunction]
#[pyo3(signature = (a, mode = "refined"))]
fn l0_tail_threshold(a: f64, mode: &str) -> PyResult<f64> {
    self::mode(mode)?.tail_threshold(a).map_err(err)
}

#[pyfunction]
fn suites() -> Vec<&'static str> {
    Suite::ALL.iter().map(|s| s.name()).collect()
}

#[pyfunction]
#[pyo3(signature = (suite, cases = 100, seed = 0))]
fn run_suite(py: Python<'_>, suite: &str, cases: u64, seed: u64) -> PyResult<Py<PyAny>> {
    let suite: Suite = suite.parse().map_err(err)?;
    let gen = CaseGenerator::new(seed);
    let r = py.detach(|| verifier::run_suite(&gen, suite, cases));
    to_py(py, &r)
}

#[pyfunction]
fn counterexample_demo(py: Python<'_>) -> PyResult<Py<PyAny>> {
    to_py(py, &verifier::counterexample_demo())
}

#[pymodule]
#[pyo3(name = "khinlab")]
fn pykhinlab(m: &Bound<'_, PyModule>) -> PyResult<()> {
    let py = m.py();
    m.add("KhinlabError", py.get_type::<KhinlabError>())?;
    m.add("DimensionTooLarge", py.get_type::<DimensionTooLarge>())?;
    m.add("BelowThreshold", py.get_type::<BelowThreshold>())?;
    m.add_class::<PyCoefficients>()?;
    m.add_class::<PyWeight>()?;
    m.add_function(wrap_pyfunction!(exact_moment, m)?)?;
    m.add_function(wrap_pyfunction!(exact_tail, m)?)?;
    m.add_function(wrap_pyfunction!(prob_zero, m)?)?;
    m.add_function(wrap_pyfunction!(exact_distribution, m)?)?;
    m.add_function(wrap_pyfunction!(mc_moment, m)?)?;
    m.add_function(wrap_pyfunction!(mc_tail, m)?)?;
    m.add_function(wrap_pyfunction!(extract_constants, m)?)?;
    m.add_function(wrap_pyfunction!(haagerup_bq, m)?)?;
    m.add_function(wrap_pyfunction!(euler_limit, m)?)?;
    m.add_function(wrap_pyfunction!(zero_mass_bound, m)?)?;
    m.add_function(wrap_pyfunction!(l0_tail_threshold, m)?)?;
    m.add_function(wrap_pyfunction!(suites, m)?)?;
    m.add_function(wrap_pyfunction!(run_suite, m)?)?;
    m.add_function(wrap_pyfunction!(counterexample_demo, m)?)?;
    Ok(())
}
