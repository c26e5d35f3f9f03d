//! Python bindings: memory model, Gaussian helpers, bounds, gain, critical
//! numbers and the Fock-space oracle.

use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use qreading::analysis::{self, REFERENCE_GAIN_TABLE};
use qreading::certify::{self, OracleSettings};
use qreading::critical::{self, HighEnergyAsymptote, PointStatus, RootPath, SolverConfig};
use qreading::fock::{self, FockOperator, C64};
use qreading::gaussian::{self, TwoModeNormalCm};
use qreading::{bounds, channel, Bit, MemoryModel, QreadError, SignalProfile};

create_exception!(qreading, ReadingError, PyException, "Base class of library errors.");
create_exception!(qreading, NonPhysicalError, ReadingError, "Covariance matrix violates the uncertainty principle.");
create_exception!(qreading, NoAdvantageError, ReadingError, "No quantum advantage within the searched range of M.");
create_exception!(qreading, TruncationError, ReadingError, "Fock cutoff too small for the requested state.");

fn to_py(e: QreadError) -> PyErr {
    let msg = e.to_string();
    match e {
        QreadError::Domain(_) => PyValueError::new_err(msg),
        QreadError::NonPhysicalCm(_) => NonPhysicalError::new_err(msg),
        QreadError::NoAdvantage { .. } => NoAdvantageError::new_err(msg),
        QreadError::Truncation { .. } => TruncationError::new_err(msg),
        _ => ReadingError::new_err(msg),
    }
}

fn lift<T>(r: qreading::Result<T>) -> PyResult<T> {
    r.map_err(to_py)
}

fn bit(b: u8) -> PyResult<Bit> {
    match b {
        0 => Ok(Bit::Zero),
        1 => Ok(Bit::One),
        _ => Err(PyValueError::new_err(format!("bit must be 0 or 1, got {b}"))),
    }
}

fn solver(n_b_max: f64) -> SolverConfig {
    SolverConfig { n_b_max, ..SolverConfig::default() }
}

/// Pit/land reflectivities and thermal bath of a memory cell.
#[pyclass(name = "MemoryModel", frozen, from_py_object)]
#[derive(Clone, Copy)]
pub struct PyMemory {
    inner: MemoryModel,
}

#[pymethods]
impl PyMemory {
    #[new]
    fn new(r0: f64, r1: f64, n_b: f64) -> PyResult<Self> {
        Ok(Self { inner: lift(MemoryModel::new(r0, r1, n_b))? })
    }

    #[staticmethod]
    fn ideal(r0: f64, n_b: f64) -> PyResult<Self> {
        Ok(Self { inner: lift(MemoryModel::ideal(r0, n_b))? })
    }

    #[getter]
    fn r0(&self) -> f64 {
        self.inner.r0
    }

    #[getter]
    fn r1(&self) -> f64 {
        self.inner.r1
    }

    #[getter]
    fn n_b(&self) -> f64 {
        self.inner.n_b
    }

    /// Covariance matrix of the output idler-signal pair for stored bit `u`.
    fn output_cm(&self, u: u8, n_s: f64) -> PyResult<PyTwoModeCm> {
        Ok(PyTwoModeCm { inner: lift(channel::output_cm(&self.inner, bit(u)?, n_s))? })
    }

    fn __repr__(&self) -> String {
        format!("MemoryModel(r0={}, r1={}, n_b={})", self.inner.r0, self.inner.r1, self.inner.n_b)
    }
}

/// Two-mode covariance matrix in normal form `[[a I, c Z], [c Z, b I]]`.
#[pyclass(name = "TwoModeCm", frozen, from_py_object)]
#[derive(Clone, Copy)]
pub struct PyTwoModeCm {
    inner: TwoModeNormalCm,
}

#[pymethods]
impl PyTwoModeCm {
    #[new]
    fn new(a: f64, b: f64, c: f64) -> PyResult<Self> {
        Ok(Self { inner: lift(TwoModeNormalCm::new(a, b, c))? })
    }

    #[getter]
    fn a(&self) -> f64 {
        self.inner.a
    }

    #[getter]
    fn b(&self) -> f64 {
        self.inner.b
    }

    #[getter]
    fn c(&self) -> f64 {
        self.inner.c
    }

    fn symplectic_spectrum(&self) -> PyResult<(f64, f64)> {
        lift(gaussian::symplectic_spectrum(&self.inner))
    }

    /// `(nu1, nu2, x_plus, x_minus)`.
    fn williamson(&self) -> PyResult<(f64, f64, f64, f64)> {
        let w = lift(gaussian::williamson(&self.inner))?;
        Ok((w.nu1, w.nu2, w.x_plus, w.x_minus))
    }

    fn dense(&self) -> Vec<Vec<f64>> {
        let d = self.inner.dense();
        (0..4).map(|i| (0..4).map(|j| d[(i, j)]).collect()).collect()
    }

    fn __repr__(&self) -> String {
        format!("TwoModeCm(a={}, b={}, c={})", self.inner.a, self.inner.b, self.inner.c)
    }
}

#[pyclass(name = "GainReport", frozen, get_all)]
pub struct PyGainReport {
    m: u64,
    n_s: f64,
    r0: f64,
    r1: f64,
    n_b: f64,
    c_bound: f64,
    q_bound: f64,
    j_class: f64,
    j_quant: f64,
    gain: f64,
    s_star: Option<f64>,
}

#[pymethods]
impl PyGainReport {
    fn __repr__(&self) -> String {
        format!("GainReport(M={}, N_S={}, C={:e}, Q={:e}, G={:e})", self.m, self.n_s, self.c_bound, self.q_bound, self.gain)
    }
}

#[pyclass(name = "CriticalPoint", frozen, get_all)]
pub struct PyCriticalPoint {
    r0: f64,
    n_s: f64,
    m_real: f64,
    m_int: u64,
    n_b_worst: f64,
    /// "bisection" or "asymptotic".
    path: &'static str,
}

#[pymethods]
impl PyCriticalPoint {
    fn __repr__(&self) -> String {
        format!("CriticalPoint(r0={}, n_s={}, m_int={}, m_real={}, n_b_worst={})", self.r0, self.n_s, self.m_int, self.m_real, self.n_b_worst)
    }
}

fn path_name(p: RootPath) -> &'static str {
    match p {
        RootPath::Bisection => "bisection",
        RootPath::Asymptotic => "asymptotic",
    }
}

/// Density operator on a truncated Fock space (one or two modes).
#[pyclass(name = "FockState", frozen)]
pub struct PyFockState {
    inner: FockOperator,
}

#[pymethods]
impl PyFockState {
    #[staticmethod]
    #[pyo3(signature = (dim, modes = 1))]
    fn vacuum(dim: usize, modes: usize) -> PyResult<Self> {
        Ok(Self { inner: lift(FockOperator::vacuum(dim, modes))? })
    }

    #[staticmethod]
    fn number(n: usize, dim: usize) -> PyResult<Self> {
        Ok(Self { inner: lift(FockOperator::number_state(n, dim))? })
    }

    #[staticmethod]
    fn coherent(alpha: C64, dim: usize) -> PyResult<Self> {
        Ok(Self { inner: lift(FockOperator::coherent(alpha, dim))? })
    }

    #[staticmethod]
    fn thermal(n_mean: f64, dim: usize) -> PyResult<Self> {
        Ok(Self { inner: lift(FockOperator::thermal(n_mean, dim))? })
    }

    /// Two-mode squeezed vacuum with `n_s` photons per mode.
    #[staticmethod]
    fn tmsv(n_s: f64, dim: usize) -> PyResult<Self> {
        Ok(Self { inner: lift(FockOperator::tmsv(n_s, dim))? })
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    #[getter]
    fn modes(&self) -> usize {
        self.inner.modes()
    }

    #[getter]
    fn trace_deficit(&self) -> f64 {
        self.inner.trace_deficit()
    }

    fn trace(&self) -> f64 {
        self.inner.trace()
    }

    fn mean_photon_number(&self, mode: usize) -> f64 {
        self.inner.mean_photon_number(mode)
    }

    /// `(mean, covariance)` in the quadrature convention with vacuum covariance `I`.
    fn moments(&self) -> (Vec<f64>, Vec<Vec<f64>>) {
        let (mean, cov) = self.inner.moments();
        let n = mean.len();
        (mean.iter().copied().collect(), (0..n).map(|i| (0..n).map(|j| cov[(i, j)]).collect()).collect())
    }

    /// Thermal-loss channel of reflectivity `r` and bath `n_b` on `mode`.
    #[pyo3(signature = (mode, r, n_b, dim_bath = None))]
    fn apply_loss(&self, py: Python<'_>, mode: usize, r: f64, n_b: f64, dim_bath: Option<usize>) -> PyResult<Self> {
        let dim_bath = dim_bath.unwrap_or(self.inner.dim());
        let out = py.detach(|| self.inner.apply_loss(mode, r, n_b, dim_bath));
        Ok(Self { inner: lift(out)? })
    }

    fn eigenvalues(&self) -> PyResult<Vec<f64>> {
        lift(self.inner.eigenvalues())
    }

    fn __repr__(&self) -> String {
        format!("FockState(modes={}, dim={}, trace={:.12})", self.inner.modes(), self.inner.dim(), self.inner.trace())
    }
}

#[pyfunction]
fn gp(nu: f64, p: f64) -> PyResult<f64> {
    lift(gaussian::gp(nu, p))
}

#[pyfunction]
fn lambda_p(nu: f64, p: f64) -> PyResult<f64> {
    lift(gaussian::lambda_p(nu, p))
}

#[pyfunction]
fn binary_entropy(x: f64) -> PyResult<f64> {
    lift(analysis::binary_entropy(x))
}

/// Single-copy fidelity of the coherent-state outputs.
#[pyfunction]
fn coherent_fidelity(mem: &PyMemory, n_s: f64) -> PyResult<f64> {
    lift(bounds::coherent_fidelity(&mem.inner, n_s))
}

#[pyfunction]
fn chernoff_qs(mem: &PyMemory, n_s: f64, s: f64) -> PyResult<f64> {
    lift(bounds::chernoff_qs(&mem.inner, n_s, s))
}

/// `(Q, s_star)`.
#[pyfunction]
fn chernoff_infimum(mem: &PyMemory, n_s: f64) -> PyResult<(f64, f64)> {
    let c = lift(bounds::chernoff_infimum(&mem.inner, n_s))?;
    Ok((c.q, c.s_star))
}

/// `(C, Q)`: classical lower bound and quantum upper bound for `m` signals.
#[pyfunction]
fn error_bounds(mem: &PyMemory, m: u64, n_s: f64) -> PyResult<(f64, f64)> {
    let b = lift(bounds::bound_pair(&mem.inner, &lift(SignalProfile::new(m, n_s))?))?;
    Ok((b.c_bound, b.q_bound))
}

#[pyfunction]
fn gain(mem: &PyMemory, m: u64, n_s: f64) -> PyResult<PyGainReport> {
    let r = lift(analysis::gain(&mem.inner, &lift(SignalProfile::new(m, n_s))?))?;
    Ok(PyGainReport {
        m: r.sig.m,
        n_s: r.sig.n_s,
        r0: r.mem.r0,
        r1: r.mem.r1,
        n_b: r.mem.n_b,
        c_bound: r.c_bound,
        q_bound: r.q_bound,
        j_class: r.j_class,
        j_quant: r.j_quant,
        gain: r.gain,
        s_star: r.s_star,
    })
}

/// Reference rows `(M, N_S, r0, r1, N_B, printed_gain)`.
#[pyfunction]
fn reference_table() -> Vec<(u64, f64, f64, f64, f64, f64)> {
    REFERENCE_GAIN_TABLE.iter().map(|r| (r.m, r.n_s, r.r0, r.r1, r.n_b, r.printed_gain)).collect()
}

/// Real root of the gain in `M` for an ideal memory at fixed bath.
#[pyfunction]
fn critical_m(r0: f64, n_s: f64, n_b: f64) -> PyResult<f64> {
    Ok(lift(critical::critical_m(r0, n_s, n_b, &SolverConfig::default()))?.m)
}

#[pyfunction]
#[pyo3(signature = (r0, n_s, n_b_max = 10.0))]
fn critical_m_worst_case(py: Python<'_>, r0: f64, n_s: f64, n_b_max: f64) -> PyResult<PyCriticalPoint> {
    let p = lift(py.detach(|| critical::critical_m_worst_case(r0, n_s, &solver(n_b_max))))?;
    Ok(PyCriticalPoint { r0: p.r0, n_s: p.n_s, m_real: p.m_real, m_int: p.m_int, n_b_worst: p.n_b_worst, path: path_name(p.path) })
}

/// One entry per grid point; `None` where no advantage was found.
#[pyfunction]
#[pyo3(signature = (n_s, r0_grid, n_b_max = 10.0))]
fn critical_curve(py: Python<'_>, n_s: f64, r0_grid: Vec<f64>, n_b_max: f64) -> PyResult<Vec<Option<PyCriticalPoint>>> {
    let curve = lift(py.detach(|| critical::critical_curve(n_s, &r0_grid, &solver(n_b_max))))?;
    Ok(curve
        .points
        .into_iter()
        .map(|p| match (p.status, p.m_real, p.m_int, p.n_b_worst, p.path) {
            (PointStatus::Ok, Some(m_real), Some(m_int), Some(n_b_worst), Some(path)) => {
                Some(PyCriticalPoint { r0: p.r0, n_s, m_real, m_int, n_b_worst, path: path_name(path) })
            }
            _ => None,
        })
        .collect())
}

/// `ln 2 / (2 ln(1 + N_S) - N_S)`, or `None` past the divergence.
#[pyfunction]
fn asymptote_high_energy(n_s: f64) -> PyResult<Option<f64>> {
    Ok(match lift(critical::asymptote_high_energy(n_s))? {
        HighEnergyAsymptote::Finite(m) => Some(m),
        HighEnergyAsymptote::Divergent => None,
    })
}

#[pyfunction]
fn asymptote_r0_to_1(n_s: f64, eps: f64) -> PyResult<f64> {
    lift(critical::asymptote_r0_to_1(n_s, eps))
}

#[pyfunction]
fn kappa(n_b: f64, n_s: f64, eps: f64) -> f64 {
    critical::kappa(n_b, n_s, eps)
}

#[pyfunction]
fn kappa_argmax(n_s: f64) -> f64 {
    critical::kappa_argmax(n_s)
}

#[pyfunction]
fn fidelity(rho: &PyFockState, sigma: &PyFockState) -> PyResult<f64> {
    lift(fock::uhlmann_fidelity(&rho.inner, &sigma.inner))
}

/// `Tr(rho^s sigma^(1-s))`.
#[pyfunction]
fn chernoff_trace(rho: &PyFockState, sigma: &PyFockState, s: f64) -> PyResult<f64> {
    lift(fock::chernoff_trace(&rho.inner, &sigma.inner, s))
}

#[pyfunction]
fn helstrom_error(rho: &PyFockState, sigma: &PyFockState) -> PyResult<f64> {
    lift(fock::helstrom_error(&rho.inner, &sigma.inner))
}

/// Closed forms against the Fock oracle for one cell.
#[pyfunction]
#[pyo3(signature = (mem, n_s, dim = None))]
fn certify_cell<'py>(py: Python<'py>, mem: &PyMemory, n_s: f64, dim: Option<usize>) -> PyResult<Bound<'py, PyDict>> {
    let settings = OracleSettings { dim, ..OracleSettings::default() };
    let rep = lift(py.detach(|| certify::certify_cell(&mem.inner, n_s, &settings)))?;
    let d = PyDict::new(py);
    d.set_item("dim", rep.dim)?;
    d.set_item("fidelity", (rep.fidelity.gaussian, rep.fidelity.fock, rep.fidelity.fock_doubled))?;
    let chernoff: Vec<(f64, f64, f64, f64)> =
        rep.chernoff.iter().map(|c| (c.s, c.value.gaussian, c.value.fock, c.value.fock_doubled)).collect();
    d.set_item("chernoff", chernoff)?;
    d.set_item("worst_abs_error", rep.worst_abs_error())?;
    d.set_item("worst_convergence", rep.worst_convergence())?;
    d.set_item("sandwich_holds", rep.sandwich_holds())?;
    d.set_item("passes", rep.passes())?;
    Ok(d)
}

#[pymodule]
#[pyo3(name = "qreading")]
pub fn qreading_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    let py = m.py();
    m.add("ReadingError", py.get_type::<ReadingError>())?;
    m.add("NonPhysicalError", py.get_type::<NonPhysicalError>())?;
    m.add("NoAdvantageError", py.get_type::<NoAdvantageError>())?;
    m.add("TruncationError", py.get_type::<TruncationError>())?;
    m.add_class::<PyMemory>()?;
    m.add_class::<PyTwoModeCm>()?;
    m.add_class::<PyGainReport>()?;
    m.add_class::<PyCriticalPoint>()?;
    m.add_class::<PyFockState>()?;
    m.add_function(wrap_pyfunction!(gp, m)?)?;
    m.add_function(wrap_pyfunction!(lambda_p, m)?)?;
    m.add_function(wrap_pyfunction!(binary_entropy, m)?)?;
    m.add_function(wrap_pyfunction!(coherent_fidelity, m)?)?;
    m.add_function(wrap_pyfunction!(chernoff_qs, m)?)?;
    m.add_function(wrap_pyfunction!(chernoff_infimum, m)?)?;
    m.add_function(wrap_pyfunction!(error_bounds, m)?)?;
    m.add_function(wrap_pyfunction!(gain, m)?)?;
    m.add_function(wrap_pyfunction!(reference_table, m)?)?;
    m.add_function(wrap_pyfunction!(critical_m, m)?)?;
    m.add_function(wrap_pyfunction!(critical_m_worst_case, m)?)?;
    m.add_function(wrap_pyfunction!(critical_curve, m)?)?;
    m.add_function(wrap_pyfunction!(asymptote_high_energy, m)?)?;
    m.add_function(wrap_pyfunction!(asymptote_r0_to_1, m)?)?;
    m.add_function(wrap_pyfunction!(kappa, m)?)?;
    m.add_function(wrap_pyfunction!(kappa_argmax, m)?)?;
    m.add_function(wrap_pyfunction!(fidelity, m)?)?;
    m.add_function(wrap_pyfunction!(chernoff_trace, m)?)?;
    m.add_function(wrap_pyfunction!(helstrom_error, m)?)?;
    m.add_function(wrap_pyfunction!(certify_cell, m)?)?;
    Ok(())
}
