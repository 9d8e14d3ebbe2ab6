use std::sync::Arc;

use num_bigint::BigInt;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use troptheta::cobordism::{self, BraneSymbol, FiltrationOutcome, FormalSum, PipelineConfig, TorusPoint};
use troptheta::complex::{self, TropicalComplex};
use troptheta::exact::rational::{format_rational, parse_rational, Rational};
use troptheta::intersect::PerturbationCertificate;
use troptheta::theta::{make_theta, DeltaFunction, ThetaFunction};
use troptheta::torus::{self, coset_system, Polarization, TorusConfig};
use troptheta::Error;

fn py_err(e: Error) -> PyErr {
    match e {
        Error::Exhausted { .. } => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn json_err(e: serde_json::Error) -> PyErr {
    PyValueError::new_err(format!("parse error: {e}"))
}

fn parse_vec(xs: &[String]) -> PyResult<Vec<Rational>> {
    xs.iter().map(|s| parse_rational(s).map_err(py_err)).collect()
}

fn format_vec(xs: &[Rational]) -> Vec<String> {
    xs.iter().map(format_rational).collect()
}

/// A polarized tropical affine torus.
#[pyclass(name = "Torus", frozen)]
struct PyTorus {
    inner: Polarization,
}

#[pymethods]
impl PyTorus {
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let cfg: TorusConfig = serde_json::from_str(text).map_err(json_err)?;
        Ok(PyTorus { inner: cfg.build().map_err(py_err)?.0 })
    }

    #[staticmethod]
    fn principal_circle() -> Self {
        PyTorus { inner: torus::principal_circle() }
    }

    #[staticmethod]
    fn alpha_family(a: Vec<String>) -> PyResult<Self> {
        let a: [Rational; 3] = parse_vec(&a)?.try_into().map_err(|_| PyValueError::new_err("expected three values"))?;
        Ok(PyTorus { inner: torus::alpha_family_torus(a).map_err(py_err)? })
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn gram(&self) -> Vec<Vec<String>> {
        self.inner.gram().to_rows().iter().map(|r| format_vec(r)).collect()
    }

    fn elementary_divisors(&self) -> Vec<String> {
        self.inner.elementary_divisors().iter().map(BigInt::to_string).collect()
    }

    fn dual(&self) -> PyResult<Self> {
        Ok(PyTorus { inner: torus::dual_polarization(&self.inner).map_err(py_err)? })
    }

    fn to_json(&self) -> String {
        serde_json::to_string(&TorusConfig::from_polarization(&self.inner)).expect("serializable")
    }

    fn __repr__(&self) -> String {
        format!("Torus(n={}, gram={:?})", self.inner.dim(), self.gram())
    }
}

/// The theta function `f_{k,δ}` translated by `w`.
#[pyclass(name = "Theta", frozen)]
struct PyTheta {
    inner: ThetaFunction,
}

#[pymethods]
impl PyTheta {
    #[new]
    #[pyo3(signature = (torus, k, w, delta=None))]
    fn new(torus: &PyTorus, k: u64, w: Vec<String>, delta: Option<Vec<String>>) -> PyResult<Self> {
        let p = &torus.inner;
        let cosets = Arc::new(coset_system(p, k).map_err(py_err)?);
        let delta = match delta {
            Some(d) => DeltaFunction::new(cosets, parse_vec(&d)?).map_err(py_err)?,
            None => DeltaFunction::zero(cosets),
        };
        Ok(PyTheta { inner: make_theta(p, k, delta, parse_vec(&w)?).map_err(py_err)? })
    }

    #[getter]
    fn k(&self) -> u64 {
        self.inner.k
    }

    /// Number of cosets on which δ is defined.
    #[getter]
    fn num_cosets(&self) -> usize {
        self.inner.delta.values.len()
    }

    fn value(&self, v: Vec<String>) -> PyResult<String> {
        let v = parse_vec(&v)?;
        if v.len() != self.inner.dim() {
            return Err(PyValueError::new_err("dimension mismatch"));
        }
        Ok(format_rational(&self.inner.value(&v)))
    }

    /// Maximizing covectors at `v`, in integral coordinates.
    fn active(&self, v: Vec<String>) -> PyResult<Vec<Vec<String>>> {
        let v = parse_vec(&v)?;
        if v.len() != self.inner.dim() {
            return Err(PyValueError::new_err("dimension mismatch"));
        }
        Ok(self.inner.evaluate(&v).active.iter().map(|z| z.iter().map(BigInt::to_string).collect()).collect())
    }

    fn corner_locus(&self) -> PyResult<PyComplex> {
        Ok(PyComplex { inner: complex::corner_locus(&self.inner).map_err(py_err)? })
    }
}

#[pyclass(name = "Complex", frozen)]
struct PyComplex {
    inner: TropicalComplex,
}

#[pymethods]
impl PyComplex {
    #[getter]
    fn num_cells(&self) -> usize {
        self.inner.cells.len()
    }

    fn cell_dims(&self) -> Vec<usize> {
        self.inner.cells.iter().map(|c| c.dim).collect()
    }

    fn digest(&self) -> String {
        self.inner.digest()
    }

    fn check_balancing(&self) -> PyResult<bool> {
        complex::check_balancing(&self.inner).map_err(py_err)
    }

    fn check_regular(&self) -> bool {
        complex::check_regular(&self.inner)
    }

    fn to_json(&self) -> String {
        serde_json::to_string(&self.inner.to_json()).expect("serializable")
    }

    fn to_svg(&self) -> PyResult<String> {
        complex::to_svg(&self.inner).map_err(py_err)
    }
}

/// Formal sum of fibers `Σ a_b [F_b]`, points given by `Λ₁` coordinates.
#[pyclass(name = "CobordismElement", frozen)]
struct PyElement {
    inner: FormalSum,
}

#[pymethods]
impl PyElement {
    #[new]
    fn new(n: usize, terms: Vec<(Vec<String>, i64)>) -> PyResult<Self> {
        let terms = terms
            .into_iter()
            .map(|(b, a)| Ok((TorusPoint::new(parse_vec(&b)?), BigInt::from(a))))
            .collect::<PyResult<Vec<_>>>()?;
        Ok(PyElement { inner: FormalSum::from_terms(n, terms).map_err(py_err)? })
    }

    #[staticmethod]
    fn filtration_generator(pairs: Vec<(Vec<String>, Vec<String>)>) -> PyResult<Self> {
        let pairs = pairs
            .iter()
            .map(|(p, m)| Ok((TorusPoint::new(parse_vec(p)?), TorusPoint::new(parse_vec(m)?))))
            .collect::<PyResult<Vec<_>>>()?;
        Ok(PyElement { inner: cobordism::filtration_generator(&pairs).map_err(py_err)? })
    }

    fn terms(&self) -> Vec<(Vec<String>, String)> {
        self.inner.terms().iter().map(|(b, a)| (format_vec(b.coords()), a.to_string())).collect()
    }

    fn augmentation(&self) -> String {
        cobordism::augmentation(&self.inner).to_string()
    }

    fn albanese(&self) -> PyResult<Vec<String>> {
        Ok(format_vec(cobordism::albanese(&self.inner).map_err(py_err)?.coords()))
    }

    fn is_zero(&self) -> bool {
        self.inner.is_zero()
    }

    /// Pontryagin product.
    fn __mul__(&self, other: &PyElement) -> PyResult<PyElement> {
        Ok(PyElement { inner: cobordism::pontryagin(&self.inner, &other.inner).map_err(py_err)? })
    }

    fn __add__(&self, other: &PyElement) -> PyResult<PyElement> {
        Ok(PyElement { inner: self.inner.try_add(&other.inner).map_err(py_err)? })
    }

    fn __sub__(&self, other: &PyElement) -> PyResult<PyElement> {
        Ok(PyElement { inner: self.inner.try_add(&-&other.inner).map_err(py_err)? })
    }

    fn __eq__(&self, other: &PyElement) -> bool {
        self.inner == other.inner
    }
}

/// Applies the Fourier functor to a symbol given as JSON; returns JSON.
#[pyfunction]
fn fourier(symbol_json: &str, n: usize) -> PyResult<String> {
    let s: BraneSymbol = serde_json::from_str(symbol_json).map_err(json_err)?;
    let out = cobordism::fourier_object(&s, n).map_err(py_err)?;
    Ok(serde_json::to_string(&out).expect("serializable"))
}

/// Runs the filtration-vanishing pipeline; returns `(success, certificate JSON)`.
#[pyfunction]
fn verify_filtration(config_json: &str) -> PyResult<(bool, String)> {
    let cfg: PipelineConfig = serde_json::from_str(config_json).map_err(json_err)?;
    match cobordism::run_pipeline(&cfg).map_err(py_err)? {
        FiltrationOutcome::Certified(cert) => Ok((cert.success, serde_json::to_string(&cert).expect("serializable"))),
        FiltrationOutcome::Degenerate { index } => Ok((true, format!("{{\"degenerate_pair\":{index}}}"))),
    }
}

/// Replays a certificate; returns `None` on success or the first mismatch.
#[pyfunction]
fn replay(certificate_json: &str) -> PyResult<Option<String>> {
    let cert: PerturbationCertificate = serde_json::from_str(certificate_json).map_err(json_err)?;
    let r = cobordism::replay_certificate(&cert).map_err(py_err)?;
    Ok(if r.ok { None } else { r.mismatch })
}

#[pymodule]
fn pytroptheta(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyTorus>()?;
    m.add_class::<PyTheta>()?;
    m.add_class::<PyComplex>()?;
    m.add_class::<PyElement>()?;
    m.add_function(wrap_pyfunction!(fourier, m)?)?;
    m.add_function(wrap_pyfunction!(verify_filtration, m)?)?;
    m.add_function(wrap_pyfunction!(replay, m)?)?;
    Ok(())
}
