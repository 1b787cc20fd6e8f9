//! Random walk over the classical excitation manifold, optionally projected
//! onto an energy shell.

use std::f64::consts::TAU;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{classical_hamiltonian, ClassicalParams, ClassicalState};
use crate::error::{Error, Result};
use crate::seeding::realization_rng;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SamplerSettings {
    /// Accepted moves discarded before the first sample.
    pub burn_in: usize,
    /// Accepted moves between samples.
    pub thin: usize,
    /// Candidates that may fail the energy match before giving up.
    pub attempt_budget: usize,
    /// Grid points used to bracket the target energy in the left-cavity phase.
    pub phase_grid: usize,
}

impl Default for SamplerSettings {
    fn default() -> Self {
        Self {
            burn_in: 5000,
            thin: 200,
            attempt_budget: 10_000,
            phase_grid: 64,
        }
    }
}

/// Four excitation reservoirs: left cavity, left spin, right cavity, right spin.
#[derive(Debug, Clone, Copy)]
struct Walker {
    exc: [f64; 4],
    phase: [f64; 4],
}

impl Walker {
    fn valid(sector: usize, value: f64) -> bool {
        if sector % 2 == 0 {
            value >= 0.0
        } else {
            (0.0..=1.0).contains(&value)
        }
    }

    /// One accepted redistribution of `δn ~ U(−1, 1)` between two reservoirs.
    fn step(&mut self, rng: &mut ChaCha8Rng) {
        loop {
            let i = rng.random_range(0..4);
            let dn: f64 = rng.random_range(-1.0..1.0);
            let reduced = self.exc[i] - dn;
            if !Self::valid(i, reduced) {
                continue;
            }
            let mut others: Vec<usize> = (0..4).filter(|&j| j != i).collect();
            others.shuffle(rng);
            if let Some(&j) = others.iter().find(|&&j| Self::valid(j, self.exc[j] + dn)) {
                self.exc[j] += dn;
                self.exc[i] = reduced;
                self.phase[i] = rng.random_range(0.0..TAU);
                self.phase[j] = rng.random_range(0.0..TAU);
                return;
            }
        }
    }

    fn state(&self, params: &ClassicalParams) -> ClassicalState {
        let cavity = |e: f64, th: f64, w: f64| {
            let e = e.max(0.0);
            ((2.0 * e / w).sqrt() * th.cos(), (2.0 * w * e).sqrt() * th.sin())
        };
        let spin = |e: f64, th: f64| {
            let sz = e.clamp(0.0, 1.0) - 0.5;
            let r = (0.25 - sz * sz).max(0.0).sqrt();
            (r * th.cos(), r * th.sin(), sz)
        };
        let (x_left, p_left) = cavity(self.exc[0], self.phase[0], params.omega_c_left);
        let (sx_left, sy_left, sz_left) = spin(self.exc[1], self.phase[1]);
        let (x_right, p_right) = cavity(self.exc[2], self.phase[2], params.omega_c_right);
        let (sx_right, sy_right, sz_right) = spin(self.exc[3], self.phase[3]);
        ClassicalState {
            x_left,
            p_left,
            sx_left,
            sy_left,
            sz_left,
            x_right,
            p_right,
            sx_right,
            sy_right,
            sz_right,
        }
    }
}

/// Rotate the left-cavity phase until the energy matches `target`.
fn match_energy(
    walker: &Walker,
    params: &ClassicalParams,
    target: f64,
    tol: f64,
    grid: usize,
) -> Option<ClassicalState> {
    let at = |theta: f64| {
        let mut w = *walker;
        w.phase[0] = theta;
        let s = w.state(params);
        (classical_hamiltonian(&s, params) - target, s)
    };
    let theta0 = walker.phase[0];
    let (f0, s0) = at(theta0);
    if f0.abs() <= tol {
        return Some(s0);
    }
    let step = TAU / grid as f64;
    let (mut a, mut fa) = (theta0, f0);
    for g in 1..=grid {
        let b = theta0 + step * g as f64;
        let (fb, sb) = at(b);
        if fb.abs() <= tol {
            return Some(sb);
        }
        if fa.signum() != fb.signum() {
            let (mut lo, mut hi, mut flo) = (a, b, fa);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                let (fm, sm) = at(mid);
                if fm.abs() <= 0.1 * tol {
                    return Some(sm);
                }
                if fm.signum() == flo.signum() {
                    lo = mid;
                    flo = fm;
                } else {
                    hi = mid;
                }
            }
            let (fm, sm) = at(0.5 * (lo + hi));
            return (fm.abs() <= tol).then_some(sm);
        }
        a = b;
        fa = fb;
    }
    None
}

/// Draw `count` states with total excitation `params.n_p`, optionally with
/// `|E − target| ≤ energy_tol`.
pub fn sample_states(
    params: &ClassicalParams,
    target_energy: Option<f64>,
    energy_tol: f64,
    count: usize,
    seed: u64,
    settings: &SamplerSettings,
) -> Result<Vec<ClassicalState>> {
    params.validate()?;
    if !(params.n_p > 0.0) {
        return Err(Error::invalid("sampling needs n_p > 0"));
    }
    if target_energy.is_some() && !(energy_tol > 0.0) {
        return Err(Error::invalid("energy_tol must be positive"));
    }
    if settings.thin == 0 || settings.phase_grid < 2 {
        return Err(Error::invalid("thin must be ≥ 1 and phase_grid ≥ 2"));
    }
    let mut rng = realization_rng(seed, 0);
    let mut walker = Walker {
        exc: [params.n_p, 0.0, 0.0, 0.0],
        phase: std::array::from_fn(|_| rng.random_range(0.0..TAU)),
    };
    for _ in 0..settings.burn_in {
        walker.step(&mut rng);
    }

    let mut out = Vec::with_capacity(count);
    let mut failures = 0usize;
    while out.len() < count {
        for _ in 0..settings.thin {
            walker.step(&mut rng);
        }
        match target_energy {
            None => out.push(walker.state(params)),
            Some(target) => match match_energy(&walker, params, target, energy_tol, settings.phase_grid) {
                Some(s) => out.push(s),
                None => {
                    failures += 1;
                    if failures > settings.attempt_budget {
                        return Err(Error::EnergyUnattainable {
                            target,
                            attempts: failures,
                        });
                    }
                }
            },
        }
    }
    Ok(out)
}
