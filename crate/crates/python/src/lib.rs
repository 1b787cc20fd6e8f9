//! Python bindings for the Tavis-Cummings dimer toolkit (`import tcdimer`).

use std::path::PathBuf;

use faer::c64;
use pyo3::create_exception;
use pyo3::exceptions::PyException;
use pyo3::prelude::*;
use pyo3::types::PyDict;
use tcd_core::basis::{enumerate_sector, enumerate_truncated, Basis, SectorParams};
use tcd_core::classical::{
    classical_hamiltonian, classical_imbalance_trace, integrate, lyapunov, sample_states, ClassicalParams,
    ClassicalState, IntegratorSettings, LyapunovSettings, SamplerSettings,
};
use tcd_core::complex_stats::{csr, ComplexSpectrum};
use tcd_core::dynamics::{diagonalize_hermitian, hermitian_eigenvalues, imbalance_trace, log_time_grid, QuantumState};
use tcd_core::hermitian_stats::{gap_ratios, RealSpectrum};
use tcd_core::lindblad::{build_liouvillian, diagonalize_general, sector_project};
use tcd_core::operators::{
    build_hamiltonian_nh, build_hamiltonian_tcd, build_imbalance_operator, build_number_operator, ModelParams,
};
use tcd_core::runner;

create_exception!(tcdimer, TcdError, PyException);
create_exception!(tcdimer, ConfigError, TcdError);

fn py_err(e: tcd_core::Error) -> PyErr {
    match e {
        tcd_core::Error::Config(v) => ConfigError::new_err(v),
        other => TcdError::new_err(other.to_string()),
    }
}

/// Model parameters in units of the hopping `J`.
#[pyclass(name = "Model", from_py_object)]
#[derive(Clone)]
struct PyModel {
    inner: ModelParams,
}

#[pymethods]
impl PyModel {
    #[new]
    #[pyo3(signature = (lam, *, kappa = 0.0, j_hop = 1.0, omega_left = 1.0, omega_right = 1.0, omega_s = 1.0))]
    fn new(lam: f64, kappa: f64, j_hop: f64, omega_left: f64, omega_right: f64, omega_s: f64) -> PyResult<Self> {
        let inner = ModelParams {
            kappa,
            j_hop,
            omega_s,
            ..ModelParams::resonant(lam).with_cavities((omega_left, omega_right))
        };
        inner.validate().map_err(py_err)?;
        Ok(Self { inner })
    }

    #[getter]
    fn lam(&self) -> f64 {
        self.inner.lambda
    }

    #[getter]
    fn kappa(&self) -> f64 {
        self.inner.kappa
    }

    fn __repr__(&self) -> String {
        let m = &self.inner;
        format!(
            "Model(lam={}, kappa={}, j_hop={}, omega_left={}, omega_right={}, omega_s={})",
            m.lambda, m.kappa, m.j_hop, m.omega_c_left, m.omega_c_right, m.omega_s
        )
    }
}

/// Fixed-excitation sector basis.
#[pyclass(name = "SectorBasis")]
struct PySectorBasis {
    inner: tcd_core::basis::SectorBasis,
    n_p: u32,
}

#[pymethods]
impl PySectorBasis {
    #[new]
    fn new(n_p: u32, n_atoms: u32) -> PyResult<Self> {
        let params = SectorParams::new(n_p, n_atoms).map_err(py_err)?;
        Ok(Self {
            inner: enumerate_sector(params),
            n_p,
        })
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    /// Basis labels `(n_L, k_L, n_R, k_R)` in index order.
    fn states(&self) -> Vec<(u32, u32, u32, u32)> {
        self.inner
            .states()
            .iter()
            .map(|s| (s.n_left, s.k_left, s.n_right, s.k_right))
            .collect()
    }

    /// Sorted eigenvalues of the closed dimer.
    fn eigenvalues(&self, model: &PyModel) -> PyResult<Vec<f64>> {
        let h = build_hamiltonian_tcd(&self.inner, &model.inner).map_err(py_err)?;
        hermitian_eigenvalues(&h).map_err(py_err)
    }

    /// Eigenvalues of the gain-loss Hamiltonian with `Δ_L = κ`, `Δ_R = −κ`.
    fn nh_eigenvalues(&self, model: &PyModel) -> PyResult<Vec<c64>> {
        let params = model.inner.with_gain_loss(model.inner.kappa);
        let h = build_hamiltonian_nh(&self.inner, &params).map_err(py_err)?;
        Ok(diagonalize_general(&h).map_err(py_err)?.values)
    }

    /// Imbalance `<I>(t)` from all excitations in the left cavity, on a log
    /// grid over `[t_min, t_max]`; returns `(times, values, steady_mean)`.
    #[pyo3(signature = (model, t_min = 1e-2, t_max = 1e4, points = 2000, window_fraction = 0.2))]
    fn imbalance_trace(
        &self,
        model: &PyModel,
        t_min: f64,
        t_max: f64,
        points: usize,
        window_fraction: f64,
    ) -> PyResult<(Vec<f64>, Vec<f64>, f64)> {
        let h = build_hamiltonian_tcd(&self.inner, &model.inner).map_err(py_err)?;
        let decomp = diagonalize_hermitian(&h).map_err(py_err)?;
        let i_op = build_imbalance_operator(&self.inner, self.n_p).map_err(py_err)?;
        let psi0 = QuantumState::left_cavity(&self.inner, self.n_p).map_err(py_err)?;
        let grid = log_time_grid(t_min, t_max, points);
        let tr = imbalance_trace(&decomp, &psi0, &grid, &i_op, window_fraction).map_err(py_err)?;
        Ok((tr.times, tr.values, tr.steady_mean))
    }
}

/// Mean adjacent gap ratio of a real spectrum and the individual ratios.
#[pyfunction]
fn gap_ratio(values: Vec<f64>) -> PyResult<(f64, Vec<f64>)> {
    let g = gap_ratios(&RealSpectrum::new(values).map_err(py_err)?).map_err(py_err)?;
    Ok((g.mean, g.ratios))
}

/// Complex spacing ratio statistics: `(mean_r, mean_cos_theta, r, theta)`.
#[pyfunction]
fn complex_spacing_ratio(values: Vec<c64>) -> PyResult<(f64, f64, Vec<f64>, Vec<f64>)> {
    let res = csr(&ComplexSpectrum::new(values)).map_err(py_err)?;
    Ok((res.mean_r, res.mean_cos_theta, res.r, res.theta))
}

/// Liouvillian spectrum on the cutoff basis, optionally restricted to one
/// weak-symmetry block.
#[pyfunction]
#[pyo3(signature = (model, n_cut, two_s, sector = None))]
fn liouvillian_spectrum(model: &PyModel, n_cut: u32, two_s: u32, sector: Option<i64>) -> PyResult<Vec<c64>> {
    let basis = enumerate_truncated(n_cut, two_s);
    let l = build_liouvillian(&basis, &model.inner).map_err(py_err)?;
    let spectrum = match sector {
        Some(k) => {
            let n = build_number_operator(&basis).map_err(py_err)?;
            diagonalize_general(&sector_project(&l, &n, k).map_err(py_err)?)
        }
        None => diagonalize_general(&l),
    };
    Ok(spectrum.map_err(py_err)?.values)
}

fn classical_params(lam: f64, n_p: f64) -> PyResult<ClassicalParams> {
    let p = ClassicalParams::resonant(lam, n_p);
    p.validate().map_err(py_err)?;
    Ok(p)
}

/// Phase-space states `[x_L, p_L, sx_L, sy_L, sz_L, x_R, p_R, sx_R, sy_R, sz_R]`
/// drawn at total excitation `n_p`, optionally on the energy shell.
#[pyfunction]
#[pyo3(signature = (lam, count, seed, n_p = 2.5, energy = None, energy_tol = 1e-5))]
fn sample_classical_states(
    lam: f64,
    count: usize,
    seed: u64,
    n_p: f64,
    energy: Option<f64>,
    energy_tol: f64,
) -> PyResult<Vec<Vec<f64>>> {
    let p = classical_params(lam, n_p)?;
    let states = sample_states(&p, energy, energy_tol, count, seed, &SamplerSettings::default()).map_err(py_err)?;
    Ok(states.iter().map(|s| s.to_array().to_vec()).collect())
}

fn state_from(values: &[f64]) -> PyResult<ClassicalState> {
    if values.len() != 10 {
        return Err(TcdError::new_err(format!("expected 10 phase-space components, got {}", values.len())));
    }
    Ok(ClassicalState::from_array(values))
}

/// Classical energy of a phase-space state.
#[pyfunction]
#[pyo3(signature = (lam, state, n_p = 2.5))]
fn classical_energy(lam: f64, state: Vec<f64>, n_p: f64) -> PyResult<f64> {
    Ok(classical_hamiltonian(&state_from(&state)?, &classical_params(lam, n_p)?))
}

/// Classical imbalance trace; `state = None` starts with everything in the
/// left cavity. Returns `(times, values, steady_mean)`.
#[pyfunction]
#[pyo3(signature = (lam, t_end, state = None, n_p = 2.5, stride = 1.0))]
fn classical_imbalance(
    lam: f64,
    t_end: f64,
    state: Option<Vec<f64>>,
    n_p: f64,
    stride: f64,
) -> PyResult<(Vec<f64>, Vec<f64>, f64)> {
    let p = classical_params(lam, n_p)?;
    let s0 = match state {
        Some(v) => state_from(&v)?,
        None => ClassicalState::all_in_left_cavity(&p),
    };
    let settings = IntegratorSettings {
        t_end,
        sample_stride: stride,
        ..IntegratorSettings::default()
    };
    let traj = integrate(&s0, &p, &settings).map_err(py_err)?;
    let imb = classical_imbalance_trace(&traj, &p).map_err(py_err)?;
    Ok((imb.trace.times, imb.trace.values, imb.trace.steady_mean))
}

/// Maximal Lyapunov exponent with `m_steps` renormalizations of period `tau`.
#[pyfunction]
#[pyo3(signature = (lam, state, m_steps = 1000, tau = 1.0, n_p = 2.5))]
fn lyapunov_exponent(lam: f64, state: Vec<f64>, m_steps: usize, tau: f64, n_p: f64) -> PyResult<f64> {
    let settings = LyapunovSettings {
        m_steps,
        tau,
        ..LyapunovSettings::default()
    };
    let res = lyapunov(&state_from(&state)?, &classical_params(lam, n_p)?, &settings).map_err(py_err)?;
    Ok(res.exponent)
}

/// Parse and check a JSON configuration; returns it with defaults filled in.
#[pyfunction]
fn validate_config(raw: &str) -> PyResult<String> {
    let cfg = runner::validate_config(raw).map_err(py_err)?;
    serde_json::to_string(&cfg).map_err(|e| TcdError::new_err(e.to_string()))
}

/// Run an experiment; returns `{file name: sha256}` of the emitted files.
#[pyfunction]
#[pyo3(signature = (config, output_dir, threads = None))]
fn run_experiment<'py>(
    py: Python<'py>,
    config: &str,
    output_dir: PathBuf,
    threads: Option<usize>,
) -> PyResult<Bound<'py, PyDict>> {
    let cfg = runner::validate_config(config).map_err(py_err)?;
    let manifest = py.detach(|| runner::run(&cfg, &output_dir, threads)).map_err(py_err)?;
    let out = PyDict::new(py);
    for f in manifest.files {
        out.set_item(f.name, f.sha256)?;
    }
    Ok(out)
}

#[pymodule]
fn tcdimer(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("TcdError", m.py().get_type::<TcdError>())?;
    m.add("ConfigError", m.py().get_type::<ConfigError>())?;
    m.add_class::<PyModel>()?;
    m.add_class::<PySectorBasis>()?;
    m.add_function(wrap_pyfunction!(gap_ratio, m)?)?;
    m.add_function(wrap_pyfunction!(complex_spacing_ratio, m)?)?;
    m.add_function(wrap_pyfunction!(liouvillian_spectrum, m)?)?;
    m.add_function(wrap_pyfunction!(sample_classical_states, m)?)?;
    m.add_function(wrap_pyfunction!(classical_energy, m)?)?;
    m.add_function(wrap_pyfunction!(classical_imbalance, m)?)?;
    m.add_function(wrap_pyfunction!(lyapunov_exponent, m)?)?;
    m.add_function(wrap_pyfunction!(validate_config, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    Ok(())
}
