//! Python bindings: `import arraydesign`.

use arraydesign_core as ad;
use num_complex::Complex64;
use pyo3::exceptions::{PyArithmeticError, PyIndexError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn to_py(e: ad::DesignError) -> PyErr {
    match e {
        ad::DesignError::Numerical(_) => PyArithmeticError::new_err(e.to_string()),
        ad::DesignError::IndexOutOfRange { .. } => PyIndexError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

trait OrPy<T> {
    fn py(self) -> PyResult<T>;
}

impl<T> OrPy<T> for ad::Result<T> {
    fn py(self) -> PyResult<T> {
        self.map_err(to_py)
    }
}

/// Far-field sensing model on a uniform candidate grid.
#[pyclass(name = "SensingModel", module = "arraydesign", frozen)]
struct PySensingModel {
    inner: ad::SensingModel,
}

#[pymethods]
impl PySensingModel {
    #[new]
    #[pyo3(signature = (snr_db, *, lambda_=1.0, aperture=(-3.5, 3.5), grid_delta=0.0625, n_ref=11, r=1, power=1.0, m_half=450))]
    #[allow(clippy::too_many_arguments)]
    fn new(
        snr_db: f64,
        lambda_: f64,
        aperture: (f64, f64),
        grid_delta: f64,
        n_ref: usize,
        r: u32,
        power: f64,
        m_half: usize,
    ) -> PyResult<Self> {
        let grid = ad::CandidateGrid::from_aperture(aperture.0, aperture.1, grid_delta).py()?;
        let prior = ad::build_prior(r, power, m_half).py()?;
        Ok(PySensingModel { inner: ad::build_model(lambda_, snr_db, n_ref, grid, prior).py()? })
    }

    /// Same grid and prior at another SNR.
    fn at_snr(&self, snr_db: f64, n_ref: usize) -> PyResult<Self> {
        Ok(PySensingModel { inner: self.inner.at_snr(snr_db, n_ref).py()? })
    }

    fn with_noise_var(&self, noise_var: f64) -> PyResult<Self> {
        Ok(PySensingModel { inner: self.inner.with_noise_var(noise_var).py()? })
    }

    #[getter]
    fn noise_var(&self) -> f64 {
        self.inner.noise_var()
    }

    #[getter]
    fn lambda_(&self) -> f64 {
        self.inner.lambda()
    }

    #[getter]
    fn positions(&self) -> Vec<f64> {
        self.inner.grid().positions().to_vec()
    }

    #[getter]
    fn prior_variances(&self) -> Vec<f64> {
        self.inner.prior().variances().to_vec()
    }

    /// `(value, half_width)` of the prior mass outside the retained window.
    #[getter]
    fn tail_epsilon(&self) -> (f64, f64) {
        let t = self.inner.prior().tail_epsilon();
        (t.value, t.half_width)
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn cov(&self, x: usize, y: usize) -> PyResult<f64> {
        let n = self.inner.len();
        if x >= n || y >= n {
            return Err(PyIndexError::new_err(format!("candidate index out of range for {n} candidates")));
        }
        Ok(self.inner.cov(x, y))
    }

    fn kernel_row(&self, index: usize) -> PyResult<Vec<f64>> {
        if index >= self.inner.len() {
            return Err(PyIndexError::new_err(format!("candidate {index} out of range")));
        }
        Ok(self.inner.kernel_row(index))
    }

    /// `log det(I + C_SS / σ²)` in nats.
    fn mutual_information(&self, indices: Vec<usize>) -> PyResult<f64> {
        ad::mutual_information(&self.inner, &indices).py()
    }

    /// Per-step gains of adding `indices` in order.
    fn marginal_gains(&self, indices: Vec<usize>) -> PyResult<Vec<f64>> {
        Ok(ad::SelectionState::from_indices(&self.inner, &indices).py()?.gains().to_vec())
    }

    fn __repr__(&self) -> String {
        format!(
            "SensingModel(candidates={}, noise_var={}, lambda={}, m_half={})",
            self.inner.len(),
            self.inner.noise_var(),
            self.inner.lambda(),
            self.inner.prior().m_half()
        )
    }
}

/// A selected sensor set.
#[pyclass(name = "Design", module = "arraydesign", frozen)]
struct PyDesign {
    inner: ad::Design,
}

#[pymethods]
impl PyDesign {
    #[getter]
    fn indices(&self) -> Vec<usize> {
        self.inner.indices.clone()
    }

    #[getter]
    fn positions(&self) -> Vec<f64> {
        self.inner.positions.clone()
    }

    #[getter]
    fn sorted_positions(&self) -> Vec<f64> {
        self.inner.sorted_positions()
    }

    #[getter]
    fn gains(&self) -> Vec<f64> {
        self.inner.gains.clone()
    }

    #[getter]
    fn mi_nats(&self) -> f64 {
        self.inner.mi_nats
    }

    #[getter]
    fn solver(&self) -> &'static str {
        self.inner.solver.name()
    }

    #[getter]
    fn evaluations(&self) -> usize {
        self.inner.evaluations
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __repr__(&self) -> String {
        format!("Design(solver={}, sensors={}, mi_nats={})", self.inner.solver.name(), self.inner.len(), self.inner.mi_nats)
    }
}

fn wrap(d: ad::Design) -> PyDesign {
    PyDesign { inner: d }
}

#[pyfunction]
fn sinc(x: f64) -> f64 {
    ad::sinc(x)
}

#[pyfunction]
fn greedy(py: Python<'_>, model: &PySensingModel, n: usize) -> PyResult<PyDesign> {
    py.detach(|| ad::greedy(&model.inner, n)).py().map(wrap)
}

#[pyfunction]
fn lazy_greedy(py: Python<'_>, model: &PySensingModel, n: usize) -> PyResult<PyDesign> {
    py.detach(|| ad::lazy_greedy(&model.inner, n)).py().map(wrap)
}

#[pyfunction]
fn exhaustive(py: Python<'_>, model: &PySensingModel, n: usize) -> PyResult<PyDesign> {
    py.detach(|| ad::exhaustive_opt(&model.inner, n)).py().map(wrap)
}

/// Greedy under a partition matroid with half-open bins of width `bin_width`.
#[pyfunction]
#[pyo3(signature = (model, bin_width, offset, caps, global_cap))]
fn partition_greedy(
    py: Python<'_>,
    model: &PySensingModel,
    bin_width: f64,
    offset: f64,
    caps: Vec<usize>,
    global_cap: usize,
) -> PyResult<PyDesign> {
    let spec = ad::partition_from_bins(model.inner.grid(), bin_width, offset, &caps, global_cap).py()?;
    py.detach(|| ad::matroid_greedy(&model.inner, &spec)).py().map(wrap)
}

#[pyfunction]
fn online_bound(model: &PySensingModel, design: &PyDesign) -> PyResult<f64> {
    ad::online_bound(&model.inner, &design.inner).py()
}

#[pyfunction]
fn nemhauser_bound(mi_nats: f64) -> f64 {
    ad::nemhauser_bound(mi_nats)
}

/// Lower and upper truncation bounds, or `None` when the hypothesis fails.
#[pyfunction]
fn truncation_bounds(epsilon: f64, noise_var: f64, n: usize) -> Option<(f64, f64)> {
    ad::bounds::truncation_bounds_with(epsilon, noise_var, n).value()
}

/// All certificates for `design` as a dict; inapplicable entries are `None`.
#[pyfunction]
#[pyo3(signature = (model, design, inject_epsilon=None))]
fn certify<'py>(
    py: Python<'py>,
    model: &PySensingModel,
    design: &PyDesign,
    inject_epsilon: Option<f64>,
) -> PyResult<Bound<'py, PyDict>> {
    let r = ad::certify(&model.inner, &design.inner, inject_epsilon).py()?;
    let d = PyDict::new(py);
    d.set_item("epsilon", r.epsilon)?;
    d.set_item("epsilon_half_width", r.epsilon_half_width)?;
    d.set_item("epsilon_injected", r.epsilon_source == ad::EpsilonSource::Injected)?;
    d.set_item("delta", r.delta)?;
    d.set_item("n", r.n)?;
    d.set_item("noise_var", r.noise_var)?;
    d.set_item("achieved_mi", r.achieved_mi)?;
    d.set_item("truncation", r.truncation.value())?;
    d.set_item("discretization_hi", r.discretization_hi)?;
    d.set_item("combined_opt_upper", r.combined.value().map(|c| c.opt_upper))?;
    d.set_item("combined_penalty", r.combined.value().map(|c| c.penalty))?;
    d.set_item("nemhauser_hi", r.nemhauser_hi())?;
    d.set_item("approx_factor", r.approx_factor)?;
    d.set_item("approx_hi", r.approx_hi)?;
    d.set_item("online_hi", r.online_hi)?;
    Ok(d)
}

/// Draws one scene (stream channel 0) and its noisy measurements at `indices` (channel 1).
#[pyfunction]
fn simulate(model: &PySensingModel, indices: Vec<usize>, seed: u64, trial: u64) -> PyResult<(Vec<Complex64>, Vec<Complex64>)> {
    let scene = ad::sample_scene(model.inner.prior(), &mut ad::stream(seed, trial, 0));
    let f = ad::simulate_measurements(&model.inner, &indices, &scene, &mut ad::stream(seed, trial, 1)).py()?;
    Ok((scene.beta, f))
}

/// Posterior mean and summary statistics of the coefficients given measurements at `indices`.
#[pyfunction]
fn posterior<'py>(
    py: Python<'py>,
    model: &PySensingModel,
    indices: Vec<usize>,
    measurements: Vec<Complex64>,
) -> PyResult<Bound<'py, PyDict>> {
    let op = ad::PosteriorOperator::new(&model.inner, &indices).py()?;
    let d = PyDict::new(py);
    d.set_item("mean", op.mean(&measurements).py()?)?;
    d.set_item("trace_cov", op.trace_cov())?;
    d.set_item("information", op.information())?;
    d.set_item("logdet_measurement_cov", op.logdet_measurement_cov())?;
    Ok(d)
}

/// Paired Monte-Carlo MSE table, one dict per (design, eval SNR) cell.
#[pyfunction]
fn mc_mse<'py>(
    py: Python<'py>,
    model: &PySensingModel,
    designs: Vec<PyRef<'py, PyDesign>>,
    eval_snrs_db: Vec<f64>,
    trials: usize,
    seed: u64,
) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let ds: Vec<ad::Design> = designs.iter().map(|d| d.inner.clone()).collect();
    let table = py.detach(|| ad::mc_mse(&model.inner, &ds, &eval_snrs_db, trials, seed)).py()?;
    table
        .rows
        .iter()
        .map(|row| {
            let d = PyDict::new(py);
            d.set_item("design", row.design)?;
            d.set_item("eval_snr_db", row.eval_snr_db)?;
            d.set_item("trials", row.trials)?;
            d.set_item("mean_mse", row.mean_mse)?;
            d.set_item("stderr_mse", row.stderr_mse)?;
            d.set_item("trace_posterior_cov", row.trace_posterior_cov)?;
            Ok(d)
        })
        .collect()
}

#[pymodule]
fn arraydesign(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PySensingModel>()?;
    m.add_class::<PyDesign>()?;
    m.add_function(wrap_pyfunction!(sinc, m)?)?;
    m.add_function(wrap_pyfunction!(greedy, m)?)?;
    m.add_function(wrap_pyfunction!(lazy_greedy, m)?)?;
    m.add_function(wrap_pyfunction!(exhaustive, m)?)?;
    m.add_function(wrap_pyfunction!(partition_greedy, m)?)?;
    m.add_function(wrap_pyfunction!(online_bound, m)?)?;
    m.add_function(wrap_pyfunction!(nemhauser_bound, m)?)?;
    m.add_function(wrap_pyfunction!(truncation_bounds, m)?)?;
    m.add_function(wrap_pyfunction!(certify, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(posterior, m)?)?;
    m.add_function(wrap_pyfunction!(mc_mse, m)?)?;
    m.add("TIE_BREAK_RULE", ad::optimizer::TIE_BREAK_RULE)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
