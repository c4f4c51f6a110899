//! Python bindings for the solver and its closed-form coefficients.

use biharm::forcing::{trace_value as core_trace_value, ForcingOrder};
use biharm::fractional::{frac_order as core_frac_order, TimeSignal};
use biharm::ibvp::{
    build_forcing_config, determinant as core_determinant, mass_balance_terms, neumann_entry, IbvpSolver, SolveParams,
};
use biharm::kernel::{kernel_b as core_kernel_b, mellin_check as core_mellin_check};
use biharm::profiles::{build_profile, Profile};
use biharm::propagator::GridSpec;
use biharm::{Error, C64};
use num_complex::Complex64;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn py_err(e: Error) -> PyErr {
    if e.is_config() {
        PyValueError::new_err(e.to_string())
    } else {
        PyRuntimeError::new_err(e.to_string())
    }
}

fn order(lambda: f64) -> PyResult<ForcingOrder> {
    ForcingOrder::new(lambda).map_err(py_err)
}

/// The kernel B(x).
#[pyfunction]
#[pyo3(signature = (x, tol = 1e-12))]
fn kernel_b(x: f64, tol: f64) -> PyResult<Complex64> {
    core_kernel_b(x, tol).map_err(py_err)
}

/// Dirichlet trace coefficient a(λ); raises ValueError at its poles.
#[pyfunction]
fn trace_value(lambda: f64) -> PyResult<Complex64> {
    core_trace_value(order(lambda)?).map_err(py_err)
}

/// Derivative-trace coefficient b(λ); raises ValueError at its poles.
#[pyfunction]
fn derivative_trace_value(lambda: f64) -> PyResult<Complex64> {
    neumann_entry(order(lambda)?).map_err(py_err)
}

/// det A(λ1, λ2).
#[pyfunction]
fn determinant(lambda1: f64, lambda2: f64) -> PyResult<Complex64> {
    core_determinant(order(lambda1)?, order(lambda2)?).map_err(py_err)
}

/// (numerical Mellin transform of B, closed form, relative error) at order λ.
#[pyfunction]
#[pyo3(signature = (lambda, tol = 1e-10))]
fn mellin_check(lambda: f64, tol: f64) -> PyResult<(Complex64, Complex64, f64)> {
    let m = core_mellin_check(lambda, tol).map_err(py_err)?;
    Ok((m.lhs(), m.rhs(), m.relative_error()))
}

/// Riemann–Liouville operator of order `alpha` (integral for α > 0, derivative for α < 0)
/// applied to causal samples with spacing `dt`.
#[pyfunction]
fn frac_order(samples: Vec<Complex64>, dt: f64, alpha: f64) -> PyResult<Vec<Complex64>> {
    let f = TimeSignal::new(samples, 0.0, dt, true).map_err(py_err)?;
    Ok(core_frac_order(&f, alpha).map_err(py_err)?.samples)
}

/// Solves the half-line problem for a named data profile.
///
/// Returns a dict with `x` (nodes x ≥ 0), `t`, `u` (rows per time), `converged`,
/// `contraction_ratios`, `dirichlet_error`, `neumann_error` and `mass_residual`.
#[pyfunction]
#[pyo3(signature = (profile, nx = 256, nt = 129, half_width = 20.0, horizon = 1.0, lambda1 = 0.0, lambda2 = 1.0 / 3.0, lambda_nl = 0.0, amplitude = 1.0))]
#[allow(clippy::too_many_arguments)]
fn solve<'py>(
    py: Python<'py>,
    profile: &str,
    nx: usize,
    nt: usize,
    half_width: f64,
    horizon: f64,
    lambda1: f64,
    lambda2: f64,
    lambda_nl: f64,
    amplitude: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let grid = GridSpec::new(half_width, nx, horizon, nt).map_err(py_err)?;
    let params = SolveParams { lambda_nl, ..SolveParams::default() };
    let cfg = build_forcing_config(lambda1, lambda2, params.s, params.b).map_err(py_err)?;
    let data = build_profile(Profile::parse(profile).map_err(py_err)?, grid, amplitude).map_err(py_err)?.data;
    let sol =
        py.allow_threads(|| IbvpSolver::new(grid, cfg, params).and_then(|s| s.picard_solve(&data))).map_err(py_err)?;
    let o = grid.origin();
    let u: Vec<Vec<C64>> = (0..nt).map(|n| sol.u.row(n)[o..].to_vec()).collect();
    let d = PyDict::new(py);
    d.set_item("x", (o..nx).map(|j| grid.x(j)).collect::<Vec<_>>())?;
    d.set_item("t", (0..nt).map(|n| grid.t(n)).collect::<Vec<_>>())?;
    d.set_item("u", u)?;
    d.set_item("converged", sol.diagnostics.converged)?;
    d.set_item("contraction_ratios", sol.diagnostics.contraction_ratios())?;
    d.set_item("dirichlet_error", sol.diagnostics.dirichlet_error)?;
    d.set_item("neumann_error", sol.diagnostics.neumann_error)?;
    d.set_item("mass_residual", mass_balance_terms(&sol.u, horizon).residual())?;
    Ok(d)
}

#[pymodule]
fn biharm_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(kernel_b, m)?)?;
    m.add_function(wrap_pyfunction!(trace_value, m)?)?;
    m.add_function(wrap_pyfunction!(derivative_trace_value, m)?)?;
    m.add_function(wrap_pyfunction!(determinant, m)?)?;
    m.add_function(wrap_pyfunction!(mellin_check, m)?)?;
    m.add_function(wrap_pyfunction!(frac_order, m)?)?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    Ok(())
}
