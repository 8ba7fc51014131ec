//! Python bindings: channels, exponents, the finite-n bound and the exact oracles.

use std::collections::BTreeMap;

use cqsp::bound::BoundSetup;
use cqsp::exponent::ChannelContext;
use cqsp::largedev::Increment;
use cqsp::qcore::{CMatrix, HermitianMatrix};
use cqsp::{DensityOperator, ExtendedReal, SymmetricCqChannel};
use num_complex::Complex64;
use pyo3::create_exception;
use pyo3::exceptions::PyException;
use pyo3::prelude::*;
use pyo3::types::PyDict;

create_exception!(cqsp_py, CqspError, PyException, "Error raised by cqsp, prefixed with its stable code.");

fn err(e: cqsp::Error) -> PyErr {
    CqspError::new_err(format!("[{}] {e}", e.code()))
}

fn ext(x: ExtendedReal) -> f64 {
    x.to_f64()
}

fn to_matrix(rows: &[Vec<Complex64>]) -> PyResult<CMatrix> {
    let n = rows.len();
    let m = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != m) {
        return Err(err(cqsp::Error::Parse("ragged matrix rows".into())));
    }
    Ok(CMatrix::from_fn(n, m, |i, j| rows[i][j]))
}

fn from_matrix(m: &CMatrix) -> Vec<Vec<Complex64>> {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect()).collect()
}

fn state(rows: &[Vec<Complex64>]) -> PyResult<DensityOperator> {
    let h = HermitianMatrix::new(to_matrix(rows)?).map_err(err)?;
    DensityOperator::new(h).map_err(err)
}

/// A symmetric classical-quantum channel with its capacity and `R_inf`.
#[pyclass(name = "Channel", module = "cqsp_py")]
pub struct PyChannel {
    ctx: ChannelContext,
}

#[pymethods]
impl PyChannel {
    /// `Channel(w1, v, k)` from nested lists of complex numbers.
    #[new]
    fn new(w1: Vec<Vec<Complex64>>, v: Vec<Vec<Complex64>>, k: usize) -> PyResult<Self> {
        let ch = SymmetricCqChannel::from_matrices(&to_matrix(&w1)?, &to_matrix(&v)?, k).map_err(err)?;
        Ok(Self { ctx: ChannelContext::new(ch).map_err(err)? })
    }

    /// `Channel.preset("bsc", p=0.1)`.
    #[staticmethod]
    #[pyo3(signature = (name, **params))]
    fn preset(name: &str, params: Option<&Bound<'_, PyDict>>) -> PyResult<Self> {
        let params: BTreeMap<String, f64> = match params {
            Some(d) => d.extract()?,
            None => BTreeMap::new(),
        };
        let ch = cqsp::preset(name, &params).map_err(err)?;
        Ok(Self { ctx: ChannelContext::new(ch).map_err(err)? })
    }

    #[getter]
    fn label(&self) -> String {
        self.ctx.channel.label().to_string()
    }

    #[getter]
    fn dim(&self) -> usize {
        self.ctx.channel.dim()
    }

    #[getter]
    fn alphabet_size(&self) -> usize {
        self.ctx.channel.alphabet_size()
    }

    #[getter]
    fn capacity(&self) -> f64 {
        self.ctx.capacity
    }

    #[getter]
    fn r_inf(&self) -> f64 {
        self.ctx.r_inf
    }

    /// Output state `W_x` for a 1-based symbol.
    fn output(&self, x: usize) -> PyResult<Vec<Vec<Complex64>>> {
        Ok(from_matrix(self.ctx.channel.output(x).map_err(err)?.matrix()))
    }

    /// `(E_sp(R), s*)`; both are `inf` for `R <= R_inf`.
    fn esp(&self, rate: f64) -> PyResult<(f64, f64)> {
        let p = self.ctx.esp_point(rate).map_err(err)?;
        Ok((ext(p.esp), ext(p.s_star)))
    }

    /// Saddle point at an interior rate as a dict.
    fn sigma_star<'py>(&self, py: Python<'py>, rate: f64) -> PyResult<Bound<'py, PyDict>> {
        let sp = self.ctx.sigma_star(rate).map_err(err)?;
        let d = PyDict::new(py);
        d.set_item("rate", sp.rate)?;
        d.set_item("alpha_star", sp.alpha_star)?;
        d.set_item("s_star", sp.s_star)?;
        d.set_item("esp", sp.esp)?;
        d.set_item("fixed_point_residual", sp.fixed_point_residual)?;
        d.set_item("equalization_gap", sp.equalization_gap)?;
        d.set_item("sigma", from_matrix(sp.sigma_star.matrix()))?;
        Ok(d)
    }

    /// Finite-n bound report as a dict.
    #[pyo3(signature = (rate, n, gamma = 1.0, xi = None))]
    fn sp_bound<'py>(&self, py: Python<'py>, rate: f64, n: u64, gamma: f64, xi: Option<f64>) -> PyResult<Bound<'py, PyDict>> {
        let r = BoundSetup::new(&self.ctx, rate, gamma, xi).and_then(|s| s.report(n)).map_err(err)?;
        let d = PyDict::new(py);
        d.set_item("rate", r.rate)?;
        d.set_item("n", r.n)?;
        d.set_item("gamma_n", r.gamma_n)?;
        d.set_item("rate_n", r.rate_n)?;
        d.set_item("esp_rn", ext(r.esp_rn))?;
        d.set_item("esp_r", ext(r.esp_r))?;
        d.set_item("s_star_r", ext(r.s_star_r))?;
        d.set_item("upsilon", r.upsilon)?;
        if let Some(t) = r.thresholds {
            d.set_item("thresholds", (t.n1, t.n2, t.n3, t.n0))?;
        }
        d.set_item("direct_bound", r.direct_bound)?;
        d.set_item("log_direct_bound", r.log_direct_bound)?;
        d.set_item("theorem_bound", r.theorem_bound)?;
        d.set_item("log_theorem_bound", r.log_theorem_bound)?;
        d.set_item("valid", r.valid)?;
        Ok(d)
    }

    /// Exact minimum type-I error of `W_{x_1}⊗…⊗W_{x_n}` against `sigma^{⊗n}` at level `mu`.
    fn min_type1_product(&self, xs: Vec<usize>, sigma: Vec<Vec<Complex64>>, mu: f64) -> PyResult<f64> {
        let s = state(&sigma)?;
        Ok(cqsp::oracle::min_type1_product(&self.ctx.channel, &xs, &s, mu).map_err(err)?.alpha_hat)
    }

    fn __repr__(&self) -> String {
        format!("Channel({}, C={:.6}, R_inf={:.6})", self.ctx.channel.label(), self.ctx.capacity, self.ctx.r_inf)
    }
}

/// Petz Rényi divergence `D_alpha(rho || sigma)`; `inf` on support mismatch.
#[pyfunction]
fn petz_renyi(rho: Vec<Vec<Complex64>>, sigma: Vec<Vec<Complex64>>, alpha: f64) -> PyResult<f64> {
    Ok(ext(cqsp::divergence::petz_renyi(&state(&rho)?, &state(&sigma)?, alpha).map_err(err)?))
}

/// `(alpha_hat, t)` of the optimal randomized test at type-II level `mu`.
#[pyfunction]
fn min_type1(rho: Vec<Vec<Complex64>>, sigma: Vec<Vec<Complex64>>, mu: f64) -> PyResult<(f64, f64)> {
    let r = cqsp::oracle::min_type1(&state(&rho)?, &state(&sigma)?, mu).map_err(err)?;
    Ok((r.alpha_hat, r.t))
}

/// Exact `Pr[(1/n) Σ Z_i >= z]` for `n` i.i.d. copies of a finite distribution.
#[pyfunction]
fn exact_tail(values: Vec<f64>, probs: Vec<f64>, n: usize, z: f64) -> PyResult<f64> {
    let inc = Increment::new(values, probs).map_err(err)?;
    cqsp::oracle::exact_tail(&[(&inc, n)], z).map_err(err)
}

#[pymodule]
fn cqsp_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("CqspError", m.py().get_type::<CqspError>())?;
    m.add_class::<PyChannel>()?;
    m.add_function(wrap_pyfunction!(petz_renyi, m)?)?;
    m.add_function(wrap_pyfunction!(min_type1, m)?)?;
    m.add_function(wrap_pyfunction!(exact_tail, m)?)?;
    Ok(())
}
