//! Python bindings. Rationals cross the boundary as strings (`"a/b"`, or
//! anything whose `str()` parses, such as `fractions.Fraction`); structured
//! results come back as plain dicts and lists.

use egyptian_core::analytics;
use egyptian_core::construct::{self, ConstructionParams};
use egyptian_core::identities;
use egyptian_core::lemmas;
use egyptian_core::search::{self, SearchBounds};
use egyptian_core::{Error, PrimePower, Rational};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyAny;
use serde::Serialize;

fn err(e: Error) -> PyErr {
    match e {
        Error::NoSubsetFound { .. }
        | Error::InfeasibleAtScale { .. }
        | Error::ResidualNonzero(_)
        | Error::BudgetExceeded { .. } => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn rational(obj: &Bound<'_, PyAny>) -> PyResult<Rational> {
    obj.str()?.to_str()?.parse().map_err(err)
}

fn prime_power(q: u64) -> PyResult<PrimePower> {
    PrimePower::from_q(q).ok_or_else(|| PyValueError::new_err(format!("{q} is not a prime power")))
}

/// Converts through JSON into dicts and lists.
fn to_py<'py, T: Serialize>(py: Python<'py>, v: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(v).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

fn bounds(max_denominator: u64, node_budget: u64, time_budget: f64) -> SearchBounds {
    SearchBounds {
        max_denominator,
        node_budget,
        time_budget,
        ..SearchBounds::default()
    }
}

/// An Egyptian fraction: a target and its distinct denominators.
#[pyclass(module = "egyptian_py", frozen)]
struct Representation {
    inner: identities::Representation,
}

#[pymethods]
impl Representation {
    #[new]
    fn new(target: &Bound<'_, PyAny>, denominators: Vec<u64>) -> PyResult<Self> {
        let inner = identities::Representation::new(rational(target)?, denominators).map_err(err)?;
        Ok(Representation { inner })
    }

    #[getter]
    fn target(&self) -> String {
        self.inner.target.to_string()
    }

    #[getter]
    fn denominators(&self) -> Vec<u64> {
        self.inner.denominators.clone()
    }

    fn is_valid(&self) -> bool {
        self.inner.is_valid()
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }

    #[staticmethod]
    fn from_json(s: &str) -> PyResult<Self> {
        Ok(Representation {
            inner: identities::Representation::from_json(s).map_err(err)?,
        })
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __repr__(&self) -> String {
        format!("Representation({}, {:?})", self.inner.target, self.inner.denominators)
    }
}

/// Sum of `1/n` over the given denominators, as `"a/b"`.
#[pyfunction]
fn unit_fraction_sum(denominators: Vec<u64>) -> String {
    egyptian_core::arith::unit_fraction_sum(&denominators).to_string()
}

/// `(P*(n), p, nu)`.
#[pyfunction]
fn p_star(n: u64) -> (u64, u64, u32) {
    let q = egyptian_core::arith::p_star(n);
    (q.q, q.p, q.nu)
}

#[pyfunction]
fn split(n: u64) -> PyResult<(u64, u64)> {
    identities::split(n).map_err(err)
}

#[pyfunction]
fn multi_split(n: u64, m: u64) -> PyResult<Vec<u64>> {
    Ok(identities::multi_split(n, m).map_err(err)?.into_vec())
}

#[pyfunction]
fn inverse_pair(q: u64, a: i64) -> PyResult<(u64, u64)> {
    lemmas::inverse_pair(prime_power(q)?, a).map_err(err)
}

#[pyfunction]
fn clear_medium(q: u64, residual: &Bound<'_, PyAny>) -> PyResult<Vec<u64>> {
    Ok(lemmas::clear_medium(prime_power(q)?, &rational(residual)?)
        .map_err(err)?
        .into_vec())
}

#[pyfunction]
fn clear_small(residual: &Bound<'_, PyAny>) -> PyResult<u64> {
    lemmas::clear_small(&rational(residual)?).map_err(err)
}

#[pyfunction]
fn subset_inverse_sum(set: Vec<u64>, n: u64, a: i64) -> PyResult<Option<Vec<u64>>> {
    lemmas::subset_inverse_sum(&set, n, a).map_err(err)
}

#[pyfunction]
fn represent_small<'py>(py: Python<'py>, r: &Bound<'py, PyAny>, y: f64) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &construct::represent_small(&rational(r)?, y).map_err(err)?)
}

/// `(Representation, report dict)`.
#[pyfunction]
#[pyo3(signature = (r, x, smooth_exp = None))]
fn dense_representation<'py>(
    py: Python<'py>,
    r: &Bound<'py, PyAny>,
    x: f64,
    smooth_exp: Option<f64>,
) -> PyResult<(Representation, Bound<'py, PyAny>)> {
    let mut params = ConstructionParams::default();
    if let Some(e) = smooth_exp {
        params.smooth_exp = e;
    }
    let (rep, report) = construct::dense_representation(&rational(r)?, x, &params).map_err(err)?;
    Ok((Representation { inner: rep }, to_py(py, &report)?))
}

#[pyfunction]
#[pyo3(signature = (r, t, max_denominator = 10_000, node_budget = 10_000_000, time_budget = 60.0))]
fn m_t<'py>(
    py: Python<'py>,
    r: &Bound<'py, PyAny>,
    t: usize,
    max_denominator: u64,
    node_budget: u64,
    time_budget: f64,
) -> PyResult<Bound<'py, PyAny>> {
    let out = search::m_t(&rational(r)?, t, &bounds(max_denominator, node_budget, time_budget)).map_err(err)?;
    to_py(py, &out)
}

#[pyfunction]
fn t_zero<'py>(py: Python<'py>, r: &Bound<'py, PyAny>) -> PyResult<Bound<'py, PyAny>> {
    to_py(
        py,
        &search::t_zero(&rational(r)?, &SearchBounds::default()).map_err(err)?,
    )
}

/// Denominator lists of every representation (exactly `t` terms when given).
#[pyfunction]
#[pyo3(signature = (r, t = None, max_denominator = 10_000, node_budget = 10_000_000))]
fn enumerate_reps(
    r: &Bound<'_, PyAny>,
    t: Option<usize>,
    max_denominator: u64,
    node_budget: u64,
) -> PyResult<Vec<Vec<u64>>> {
    let e = search::enumerate_reps(&rational(r)?, t, &bounds(max_denominator, node_budget, 60.0)).map_err(err)?;
    if !e.complete {
        return Err(err(Error::BudgetExceeded { nodes: e.nodes }));
    }
    Ok(e.representations.into_iter().map(|r| r.denominators).collect())
}

#[pyfunction]
#[pyo3(signature = (r, j, x, node_budget = 10_000_000))]
fn lj_member<'py>(
    py: Python<'py>,
    r: &Bound<'py, PyAny>,
    j: usize,
    x: u64,
    node_budget: u64,
) -> PyResult<Bound<'py, PyAny>> {
    let b = bounds(10_000, node_budget, 60.0);
    to_py(py, &search::lj_member(&rational(r)?, j, x, &b).map_err(err)?)
}

#[pyfunction]
fn max_int_rep<'py>(py: Python<'py>, x: u64) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &search::max_int_rep(x, &SearchBounds::default()).map_err(err)?)
}

#[pyfunction]
fn dickman_rho(u: f64) -> f64 {
    analytics::dickman_rho(u)
}

#[pyfunction]
fn kloosterman_pairs<'py>(py: Python<'py>, k: u64, x: f64) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &analytics::kloosterman_pairs(k, x).map_err(err)?)
}

#[pyfunction]
#[pyo3(signature = (y, x, prime_powers = false))]
fn mertens_sum<'py>(py: Python<'py>, y: f64, x: f64, prime_powers: bool) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &analytics::mertens_sum(y, x, prime_powers).map_err(err)?)
}

#[pyfunction]
#[pyo3(signature = (alpha, x, eps, star = true))]
fn smooth_count<'py>(py: Python<'py>, alpha: f64, x: f64, eps: f64, star: bool) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &analytics::smooth_count(alpha, x, eps, star).map_err(err)?)
}

#[pyfunction]
fn bestposs_check<'py>(
    py: Python<'py>,
    denominators: Vec<u64>,
    x: f64,
    r: &Bound<'py, PyAny>,
) -> PyResult<Bound<'py, PyAny>> {
    to_py(
        py,
        &analytics::bestposs_check(&denominators, x, &rational(r)?).map_err(err)?,
    )
}

#[pyfunction]
#[pyo3(signature = (k, smooth_bound, ceiling = 100_000_000))]
fn find_k_witness(k: u64, smooth_bound: f64, ceiling: u64) -> PyResult<Option<u64>> {
    Ok(analytics::find_k_witness(k, smooth_bound, ceiling)
        .map_err(err)?
        .witness)
}

#[pymodule]
fn egyptian_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Representation>()?;
    m.add_function(wrap_pyfunction!(unit_fraction_sum, m)?)?;
    m.add_function(wrap_pyfunction!(p_star, m)?)?;
    m.add_function(wrap_pyfunction!(split, m)?)?;
    m.add_function(wrap_pyfunction!(multi_split, m)?)?;
    m.add_function(wrap_pyfunction!(inverse_pair, m)?)?;
    m.add_function(wrap_pyfunction!(clear_medium, m)?)?;
    m.add_function(wrap_pyfunction!(clear_small, m)?)?;
    m.add_function(wrap_pyfunction!(subset_inverse_sum, m)?)?;
    m.add_function(wrap_pyfunction!(represent_small, m)?)?;
    m.add_function(wrap_pyfunction!(dense_representation, m)?)?;
    m.add_function(wrap_pyfunction!(m_t, m)?)?;
    m.add_function(wrap_pyfunction!(t_zero, m)?)?;
    m.add_function(wrap_pyfunction!(enumerate_reps, m)?)?;
    m.add_function(wrap_pyfunction!(lj_member, m)?)?;
    m.add_function(wrap_pyfunction!(max_int_rep, m)?)?;
    m.add_function(wrap_pyfunction!(dickman_rho, m)?)?;
    m.add_function(wrap_pyfunction!(kloosterman_pairs, m)?)?;
    m.add_function(wrap_pyfunction!(mertens_sum, m)?)?;
    m.add_function(wrap_pyfunction!(smooth_count, m)?)?;
    m.add_function(wrap_pyfunction!(bestposs_check, m)?)?;
    m.add_function(wrap_pyfunction!(find_k_witness, m)?)?;
    Ok(())
}
