//! Classical mean-field limit of the dimer: two oscillators and two classical
//! spins of length 1/2, with the adaptive integrator, the energy-shell
//! sampler and the Benettin Lyapunov estimator built on top.

mod integrator;
mod lyapunov;
mod sampling;
mod tableau;

use serde::{Deserialize, Serialize};

use crate::dynamics::ObservableTrace;
use crate::error::{Error, Result};

pub use integrator::{Dop853, IntegrationStats, OdeSystem};
pub use lyapunov::{benettin, lyapunov, LyapunovResult, LyapunovSettings};
pub use sampling::{sample_states, SamplerSettings};

pub const STATE_DIM: usize = 10;

/// Phase-space point in the rescaled variables (`x, p` per `√N`, spins per `N`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassicalState {
    pub x_left: f64,
    pub p_left: f64,
    pub sx_left: f64,
    pub sy_left: f64,
    pub sz_left: f64,
    pub x_right: f64,
    pub p_right: f64,
    pub sx_right: f64,
    pub sy_right: f64,
    pub sz_right: f64,
}

impl ClassicalState {
    pub fn to_array(&self) -> [f64; STATE_DIM] {
        [
            self.x_left,
            self.p_left,
            self.sx_left,
            self.sy_left,
            self.sz_left,
            self.x_right,
            self.p_right,
            self.sx_right,
            self.sy_right,
            self.sz_right,
        ]
    }

    pub fn from_array(a: &[f64]) -> Self {
        Self {
            x_left: a[0],
            p_left: a[1],
            sx_left: a[2],
            sy_left: a[3],
            sz_left: a[4],
            x_right: a[5],
            p_right: a[6],
            sx_right: a[7],
            sy_right: a[8],
            sz_right: a[9],
        }
    }

    /// Both cavities empty, both spins down.
    pub fn vacuum() -> Self {
        Self::from_array(&[0.0, 0.0, 0.0, 0.0, -0.5, 0.0, 0.0, 0.0, 0.0, -0.5])
    }

    /// All `n_p` excitations in the left cavity, spins down.
    pub fn all_in_left_cavity(params: &ClassicalParams) -> Self {
        Self {
            x_left: (2.0 * params.n_p / params.omega_c_left).sqrt(),
            ..Self::vacuum()
        }
    }

    /// `(|s_L|², |s_R|²)`; both are 1/4 on the physical manifold.
    pub fn spin_norms(&self) -> (f64, f64) {
        (
            self.sx_left.powi(2) + self.sy_left.powi(2) + self.sz_left.powi(2),
            self.sx_right.powi(2) + self.sy_right.powi(2) + self.sz_right.powi(2),
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassicalParams {
    pub omega_c_left: f64,
    pub omega_c_right: f64,
    pub omega_s: f64,
    pub lambda: f64,
    pub j_hop: f64,
    /// Excitations per atom, `N_p / N`.
    pub n_p: f64,
}

impl ClassicalParams {
    pub fn resonant(lambda: f64, n_p: f64) -> Self {
        Self {
            omega_c_left: 1.0,
            omega_c_right: 1.0,
            omega_s: 1.0,
            lambda,
            j_hop: 1.0,
            n_p,
        }
    }

    pub fn with_cavities(mut self, (left, right): (f64, f64)) -> Self {
        self.omega_c_left = left;
        self.omega_c_right = right;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.lambda < 0.0 {
            return Err(Error::invalid("lambda must be non-negative"));
        }
        if !(self.omega_c_left > 0.0 && self.omega_c_right > 0.0) {
            return Err(Error::invalid("cavity frequencies must be positive"));
        }
        if !self.n_p.is_finite() || self.n_p < 0.0 {
            return Err(Error::invalid("n_p must be a non-negative number"));
        }
        Ok(())
    }

    /// Geometric mean of the cavity frequencies, used in the hopping term.
    fn hop_frequency(&self) -> f64 {
        (self.omega_c_left * self.omega_c_right).sqrt()
    }
}

/// Energy per atom,
/// `Σ_u [½(p² + ω_u²x²) + ω_s s^z + λ√(2/ω_u)(ω_u x s^x − p s^y)]
///  + J(w x_L x_R + p_L p_R / w)` with `w = √(ω_L ω_R)`.
pub fn classical_hamiltonian(state: &ClassicalState, params: &ClassicalParams) -> f64 {
    let unit = |x: f64, p: f64, sx: f64, sy: f64, sz: f64, w: f64| {
        let g = params.lambda * (2.0 / w).sqrt();
        0.5 * (p * p + w * w * x * x) + params.omega_s * sz + g * (w * x * sx - p * sy)
    };
    let s = state;
    let w = params.hop_frequency();
    unit(s.x_left, s.p_left, s.sx_left, s.sy_left, s.sz_left, params.omega_c_left)
        + unit(s.x_right, s.p_right, s.sx_right, s.sy_right, s.sz_right, params.omega_c_right)
        + params.j_hop * (w * s.x_left * s.x_right + s.p_left * s.p_right / w)
}

/// Hamilton's equations for the oscillators and `ṡ = ∇_s H × s` for the spins.
pub fn equations_of_motion(state: &ClassicalState, params: &ClassicalParams) -> ClassicalState {
    let mut out = [0.0; STATE_DIM];
    rhs(params, &state.to_array(), &mut out);
    ClassicalState::from_array(&out)
}

fn rhs(params: &ClassicalParams, y: &[f64], dy: &mut [f64]) {
    let w = params.hop_frequency();
    let j = params.j_hop;
    let omega = [params.omega_c_left, params.omega_c_right];
    for u in 0..2 {
        let (me, other) = (5 * u, 5 * (1 - u));
        let om = omega[u];
        let g = params.lambda * (2.0 / om).sqrt();
        let (x, p, sx, sy, sz) = (y[me], y[me + 1], y[me + 2], y[me + 3], y[me + 4]);
        let (x_o, p_o) = (y[other], y[other + 1]);
        dy[me] = p - g * sy + j * p_o / w;
        dy[me + 1] = -om * om * x - g * om * sx - j * w * x_o;
        // field B = (gωx, −gp, ω_s), ṡ = B × s
        let (bx, by, bz) = (g * om * x, -g * p, params.omega_s);
        dy[me + 2] = by * sz - bz * sy;
        dy[me + 3] = bz * sx - bx * sz;
        dy[me + 4] = bx * sy - by * sx;
    }
}

impl OdeSystem for ClassicalParams {
    fn dim(&self) -> usize {
        STATE_DIM
    }

    fn rhs(&self, _t: f64, y: &[f64], dy: &mut [f64]) {
        rhs(self, y, dy);
    }
}

/// Excitations per unit, `N_u = (ω_u/2)x² + p²/(2ω_u) + s^z + ½`.
pub fn classical_excitation(state: &ClassicalState, omega_c_left: f64, omega_c_right: f64) -> (f64, f64) {
    let n = |x: f64, p: f64, sz: f64, w: f64| 0.5 * w * x * x + p * p / (2.0 * w) + sz + 0.5;
    (
        n(state.x_left, state.p_left, state.sz_left, omega_c_left),
        n(state.x_right, state.p_right, state.sz_right, omega_c_right),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IntegratorSettings {
    pub rtol: f64,
    pub atol: f64,
    pub t_end: f64,
    /// Spacing of the recorded samples.
    pub sample_stride: f64,
}

impl Default for IntegratorSettings {
    fn default() -> Self {
        Self {
            rtol: 1e-12,
            atol: 1e-12,
            t_end: 1e4,
            sample_stride: 1.0,
        }
    }
}

impl IntegratorSettings {
    pub fn validate(&self) -> Result<()> {
        if !(self.rtol > 0.0 && self.atol > 0.0) {
            return Err(Error::invalid("rtol and atol must be positive"));
        }
        if !(self.t_end >= 0.0 && self.sample_stride > 0.0) {
            return Err(Error::invalid("t_end must be ≥ 0 and sample_stride > 0"));
        }
        Ok(())
    }

    /// Recording times `0, stride, 2·stride, …, t_end`.
    pub fn sample_times(&self) -> Vec<f64> {
        let n = (self.t_end / self.sample_stride + 1e-9).floor() as usize;
        let mut times: Vec<f64> = (0..=n).map(|i| i as f64 * self.sample_stride).collect();
        if *times.last().unwrap() < self.t_end {
            times.push(self.t_end);
        }
        times
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<ClassicalState>,
    pub stats: IntegrationStats,
}

pub fn integrate(state0: &ClassicalState, params: &ClassicalParams, settings: &IntegratorSettings) -> Result<Trajectory> {
    params.validate()?;
    settings.validate()?;
    let times = settings.sample_times();
    let mut solver = Dop853::new(settings.rtol, settings.atol);
    let mut y = state0.to_array().to_vec();
    let mut states = Vec::with_capacity(times.len());
    let mut t = 0.0;
    for &target in &times {
        solver.advance(params, &mut t, &mut y, target)?;
        states.push(ClassicalState::from_array(&y));
    }
    Ok(Trajectory {
        times,
        states,
        stats: solver.stats(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassicalImbalance {
    /// Steady window `[0.8 t_end, t_end]`.
    pub trace: ObservableTrace,
    /// Mean over the whole trajectory.
    pub mean: f64,
    /// Population standard deviation over the whole trajectory.
    pub std: f64,
}

/// `I(t) = (N_L − N_R)/n_p` along a trajectory.
pub fn classical_imbalance_trace(traj: &Trajectory, params: &ClassicalParams) -> Result<ClassicalImbalance> {
    if !(params.n_p > 0.0) {
        return Err(Error::invalid("imbalance needs n_p > 0"));
    }
    let values: Vec<f64> = traj
        .states
        .iter()
        .map(|s| {
            let (l, r) = classical_excitation(s, params.omega_c_left, params.omega_c_right);
            (l - r) / params.n_p
        })
        .collect();
    let (mean, std) = mean_std(&values)?;
    let t_end = *traj
        .times
        .last()
        .ok_or_else(|| Error::InsufficientData("empty trajectory".into()))?;
    let trace = ObservableTrace::from_samples(traj.times.clone(), values, 0.8 * t_end)?;
    Ok(ClassicalImbalance { trace, mean, std })
}

pub(crate) fn mean_std(values: &[f64]) -> Result<(f64, f64)> {
    if values.is_empty() {
        return Err(Error::InsufficientData("empty series".into()));
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    Ok((mean, var.sqrt()))
}
