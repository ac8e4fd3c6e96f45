//! Python bindings: profiles, the functional and its bounds, and the
//! experiment drivers. Reports come back as plain dicts.

use henon4_core::log_transform::{admissible_family, marshall_moser_integral};
use henon4_core::moser::{blowup_scan as core_blowup_scan, moser_profile, MoserParams};
use henon4_core::radial::rearrangement::DEFAULT_GRID;
use henon4_core::radial::{self, profile_by_name, random_smooth_profile};
use henon4_core::symmetry::{crossover_detect, BumpKind, BumpSpec, SearchOptions};
use henon4_core::{BoundaryKind, Error, FunctionalParams, QuadratureSpec, RadialProfile, ADAMS_32PI2};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use serde::Serialize;

fn to_py(e: Error) -> PyErr {
    match e {
        Error::InvalidInput(_) | Error::Precondition(_) | Error::Domain(_) | Error::Threshold { .. } => {
            PyValueError::new_err(e.to_string())
        }
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn spec(rel_tol: Option<f64>) -> PyResult<QuadratureSpec> {
    let mut s = QuadratureSpec::default();
    if let Some(t) = rel_tol {
        s.rel_tol = t;
    }
    s.validate().map_err(to_py)?;
    Ok(s)
}

fn parse_bc(bc: &str) -> PyResult<BoundaryKind> {
    bc.parse().map_err(to_py)
}

/// Round-trips a serializable report through `json.loads`.
fn to_dict<'py, T: Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

/// A radial profile on the unit ball of R^4.
#[pyclass(name = "Profile", module = "henon4", frozen)]
struct PyProfile {
    inner: RadialProfile,
}

#[pymethods]
impl PyProfile {
    /// A member of the built-in corpus, e.g. `poly4` or `moser:1e-4:navier`.
    #[staticmethod]
    fn named(name: &str) -> PyResult<Self> {
        Ok(Self {
            inner: profile_by_name(name).map_err(to_py)?,
        })
    }

    #[staticmethod]
    #[pyo3(signature = (epsilon, bc="navier"))]
    fn moser(epsilon: f64, bc: &str) -> PyResult<Self> {
        let mp = MoserParams::new(epsilon, parse_bc(bc)?).map_err(to_py)?;
        Ok(Self {
            inner: moser_profile(&mp).map_err(to_py)?,
        })
    }

    #[staticmethod]
    fn random(seed: u64) -> Self {
        Self {
            inner: random_smooth_profile(seed),
        }
    }

    #[staticmethod]
    fn corpus_names() -> Vec<&'static str> {
        radial::corpus_names().to_vec()
    }

    #[getter]
    fn label(&self) -> String {
        self.inner.label().to_string()
    }

    #[getter]
    fn boundary(&self) -> &'static str {
        self.inner.boundary().as_str()
    }

    fn value(&self, r: f64) -> f64 {
        self.inner.value(r)
    }

    fn laplacian(&self, r: f64) -> f64 {
        self.inner.laplacian(r)
    }

    fn scaled(&self, c: f64) -> Self {
        Self {
            inner: self.inner.scaled(c),
        }
    }

    #[pyo3(signature = (rel_tol=None))]
    fn normalized(&self, rel_tol: Option<f64>) -> PyResult<Self> {
        Ok(Self {
            inner: self.inner.normalized(&spec(rel_tol)?).map_err(to_py)?,
        })
    }

    /// `∫_B |Δu|²`.
    #[pyo3(signature = (rel_tol=None))]
    fn energy(&self, rel_tol: Option<f64>) -> PyResult<f64> {
        radial::laplacian_l2_sq(&self.inner, &spec(rel_tol)?).map_err(to_py)
    }

    #[pyo3(signature = (rel_tol=None))]
    fn pointwise_margin(&self, rel_tol: Option<f64>) -> PyResult<f64> {
        radial::pointwise_log_bound_margin(&self.inner, &spec(rel_tol)?).map_err(to_py)
    }

    /// `∫_B |x|^α g(u)` with `g = e^{σu²}` or its remainder after order `m`.
    #[pyo3(signature = (alpha, sigma, m=None, rel_tol=None))]
    fn functional(&self, alpha: f64, sigma: f64, m: Option<u32>, rel_tol: Option<f64>) -> PyResult<f64> {
        let p = FunctionalParams::new(alpha, sigma, m).map_err(to_py)?;
        radial::weighted_functional(&self.inner, &p, &spec(rel_tol)?).map_err(to_py)
    }

    fn talenti_check<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        let r = radial::talenti_comparison_check(&self.inner, DEFAULT_GRID, &QuadratureSpec::default())
            .map_err(to_py)?;
        to_dict(py, &r)
    }

    fn __repr__(&self) -> String {
        format!("Profile({:?}, {})", self.inner.label(), self.inner.boundary().as_str())
    }
}

#[pyfunction]
fn sigma_alpha(alpha: f64) -> f64 {
    radial::sigma_alpha(alpha)
}

#[pyfunction]
#[pyo3(signature = (alpha, sigma, m=None, lap_norm=1.0))]
fn series_upper_bound(alpha: f64, sigma: f64, m: Option<u32>, lap_norm: f64) -> PyResult<f64> {
    let p = FunctionalParams::new(alpha, sigma, m).map_err(to_py)?;
    radial::series_upper_bound(&p, lap_norm).map_err(to_py)
}

/// Moser threshold scan at `σ = β σ_α`; returns the experiment with rows and verdict.
#[pyfunction]
#[pyo3(signature = (alpha, beta, epsilons, m=None, bc="navier"))]
fn blowup_scan<'py>(
    py: Python<'py>,
    alpha: f64,
    beta: f64,
    epsilons: Vec<f64>,
    m: Option<u32>,
    bc: &str,
) -> PyResult<Bound<'py, PyAny>> {
    let bc = parse_bc(bc)?;
    let r = py
        .detach(|| core_blowup_scan(alpha, beta, &epsilons, m, bc, &QuadratureSpec::default()))
        .map_err(to_py)?;
    to_dict(py, &r)
}

/// Translated bump against radial search over `alphas`.
#[pyfunction]
#[pyo3(signature = (alphas, m=1, sigma=ADAMS_32PI2, bump="peak", seed=7))]
fn symmetry_sweep<'py>(
    py: Python<'py>,
    alphas: Vec<f64>,
    m: u32,
    sigma: f64,
    bump: &str,
    seed: u64,
) -> PyResult<Bound<'py, PyAny>> {
    let kind: BumpKind = bump.parse().map_err(to_py)?;
    let r = py
        .detach(|| {
            let s = QuadratureSpec::default();
            let p = FunctionalParams::new(0.0, sigma, Some(m))?;
            let b = BumpSpec::new(kind, &s)?;
            let opts = SearchOptions {
                seed,
                ..SearchOptions::default()
            };
            crossover_detect(&p, &alphas, &b, &opts, &s)
        })
        .map_err(to_py)?;
    to_dict(py, &r)
}

/// `(label, ∫₀^∞ exp((∫₀ᵗψ)² - t) dt)` over the built-in admissible family.
#[pyfunction]
fn marshall_moser_scan(py: Python<'_>) -> PyResult<Vec<(String, f64)>> {
    py.detach(|| {
        let s = QuadratureSpec::default();
        admissible_family()
            .iter()
            .map(|psi| Ok((psi.label.clone(), marshall_moser_integral(psi, &s)?)))
            .collect::<henon4_core::Result<Vec<_>>>()
    })
    .map_err(to_py)
}

#[pymodule]
fn henon4(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyProfile>()?;
    m.add_function(wrap_pyfunction!(sigma_alpha, m)?)?;
    m.add_function(wrap_pyfunction!(series_upper_bound, m)?)?;
    m.add_function(wrap_pyfunction!(blowup_scan, m)?)?;
    m.add_function(wrap_pyfunction!(symmetry_sweep, m)?)?;
    m.add_function(wrap_pyfunction!(marshall_moser_scan, m)?)?;
    m.add("ADAMS_32PI2", ADAMS_32PI2)?;
    Ok(())
}
