//! Maximal Lyapunov exponent by the two-trajectory renormalization method.

use serde::{Deserialize, Serialize};

use super::integrator::{Dop853, OdeSystem};
use super::{ClassicalParams, ClassicalState};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LyapunovSettings {
    pub delta0: f64,
    pub tau: f64,
    pub m_steps: usize,
    pub rtol: f64,
    pub atol: f64,
}

impl Default for LyapunovSettings {
    fn default() -> Self {
        Self {
            delta0: 1e-8,
            tau: 1.0,
            m_steps: 1000,
            rtol: 1e-12,
            atol: 1e-12,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LyapunovResult {
    pub exponent: f64,
    /// Running estimate after each renormalization.
    pub history: Vec<f64>,
    pub delta0: f64,
    pub tau: f64,
    /// Last-quarter slope of the running estimate is below `10⁻³`.
    pub converged: bool,
}

/// Benettin estimate for a general system, starting the companion
/// trajectory at `y0 + δ₀ d̂`.
pub fn benettin<S: OdeSystem>(
    sys: &S,
    y0: &[f64],
    direction: &[f64],
    settings: &LyapunovSettings,
) -> Result<LyapunovResult> {
    let LyapunovSettings {
        delta0,
        tau,
        m_steps,
        rtol,
        atol,
    } = *settings;
    if !(delta0 > 0.0 && tau > 0.0) || m_steps == 0 {
        return Err(Error::invalid("delta0, tau and m_steps must be positive"));
    }
    let n = sys.dim();
    if y0.len() != n || direction.len() != n {
        return Err(Error::invalid("state length does not match the system"));
    }
    let norm = direction.iter().map(|d| d * d).sum::<f64>().sqrt();
    if !(norm > 0.0) {
        return Err(Error::invalid("offset direction must be non-zero"));
    }

    let mut ya = y0.to_vec();
    let mut yb: Vec<f64> = y0.iter().zip(direction).map(|(y, d)| y + delta0 * d / norm).collect();
    let mut sa = Dop853::new(rtol, atol);
    let mut sb = Dop853::new(rtol, atol);
    let (mut ta, mut tb) = (0.0, 0.0);
    let mut sum = 0.0;
    let mut history = Vec::with_capacity(m_steps);

    for j in 1..=m_steps {
        let target = j as f64 * tau;
        sa.advance(sys, &mut ta, &mut ya, target)?;
        sb.advance(sys, &mut tb, &mut yb, target)?;
        let delta = ya.iter().zip(&yb).map(|(a, b)| (b - a).powi(2)).sum::<f64>().sqrt();
        if !delta.is_finite() || delta == 0.0 || ya.iter().any(|v| !v.is_finite()) {
            return Err(Error::Integration {
                t: target,
                reason: format!("trajectory separation degenerated to {delta:e}"),
            });
        }
        sum += (delta / delta0).ln();
        history.push(sum / target);
        for i in 0..n {
            yb[i] = ya[i] + delta0 * (yb[i] - ya[i]) / delta;
        }
    }

    let exponent = *history.last().unwrap();
    let converged = last_quarter_slope(&history, tau).abs() < 1e-3;
    Ok(LyapunovResult {
        exponent,
        history,
        delta0,
        tau,
        converged,
    })
}

/// Least-squares slope of the running estimate against time over its last
/// quarter.
fn last_quarter_slope(history: &[f64], tau: f64) -> f64 {
    let n = history.len();
    let start = n - (n / 4).max(2).min(n);
    let pts: Vec<(f64, f64)> = (start..n).map(|i| ((i + 1) as f64 * tau, history[i])).collect();
    if pts.len() < 2 {
        return 0.0;
    }
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

/// Maximal exponent of the classical dimer. The initial offset points along
/// the normalized all-ones vector so runs are reproducible.
pub fn lyapunov(state0: &ClassicalState, params: &ClassicalParams, settings: &LyapunovSettings) -> Result<LyapunovResult> {
    params.validate()?;
    let dir = [1.0; super::STATE_DIM];
    benettin(params, &state0.to_array(), &dir, settings)
}
