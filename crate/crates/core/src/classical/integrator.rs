//! Adaptive explicit Runge-Kutta integration of order 8 with the embedded
//! 5th/3rd-order error estimate and step control of Hairer's DOP853.

use serde::Serialize;

use super::tableau::{A, B, BHH, C, E};
use crate::error::{Error, Result};

const STAGES: usize = 12;
const UROUND: f64 = 2.3e-16;
const SAFETY: f64 = 0.9;
const FAC_MIN: f64 = 0.333;
const FAC_MAX: f64 = 6.0;
const BETA: f64 = 0.0;

/// Autonomous or time-dependent first-order system `y' = f(t, y)`.
pub trait OdeSystem {
    fn dim(&self) -> usize;
    fn rhs(&self, t: f64, y: &[f64], dy: &mut [f64]);
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct IntegrationStats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

/// Stepper that can be advanced repeatedly to successive output times.
/// The step size carries over between calls.
#[derive(Debug, Clone)]
pub struct Dop853 {
    rtol: f64,
    atol: f64,
    h_max: f64,
    max_steps: usize,
    h: Option<f64>,
    fac_old: f64,
    /// `f(t, y)` for the point the last call ended on.
    fsal: Option<(f64, Vec<f64>, Vec<f64>)>,
    stats: IntegrationStats,
    k: Vec<Vec<f64>>,
    y_stage: Vec<f64>,
    y_new: Vec<f64>,
}

impl Dop853 {
    pub fn new(rtol: f64, atol: f64) -> Self {
        Self {
            rtol,
            atol,
            h_max: f64::INFINITY,
            max_steps: 100_000_000,
            h: None,
            fac_old: 1e-4,
            fsal: None,
            stats: IntegrationStats::default(),
            k: Vec::new(),
            y_stage: Vec::new(),
            y_new: Vec::new(),
        }
    }

    pub fn with_max_step(mut self, h_max: f64) -> Self {
        self.h_max = h_max;
        self
    }

    pub fn with_max_steps(mut self, max_steps: usize) -> Self {
        self.max_steps = max_steps;
        self
    }

    pub fn stats(&self) -> IntegrationStats {
        self.stats
    }

    fn eval<S: OdeSystem>(&mut self, sys: &S, t: f64, y: &[f64], out: &mut [f64]) {
        self.stats.evaluations += 1;
        sys.rhs(t, y, out);
    }

    fn initial_step<S: OdeSystem>(&mut self, sys: &S, t: f64, y: &[f64], f0: &[f64], dir: f64) -> f64 {
        let n = y.len();
        let (mut dnf, mut dny) = (0.0, 0.0);
        for i in 0..n {
            let sk = self.atol + self.rtol * y[i].abs();
            dnf += (f0[i] / sk).powi(2);
            dny += (y[i] / sk).powi(2);
        }
        let mut h = if dnf <= 1e-10 || dny <= 1e-10 {
            1e-6
        } else {
            (dny / dnf).sqrt() * 0.01
        };
        h = h.min(self.h_max);
        let y1: Vec<f64> = (0..n).map(|i| y[i] + dir * h * f0[i]).collect();
        let mut f1 = vec![0.0; n];
        self.eval(sys, t + dir * h, &y1, &mut f1);
        let mut der2 = 0.0;
        for i in 0..n {
            let sk = self.atol + self.rtol * y[i].abs();
            der2 += ((f1[i] - f0[i]) / sk).powi(2);
        }
        let der2 = der2.sqrt() / h;
        let der12 = der2.abs().max(dnf.sqrt());
        let h1 = if der12 <= 1e-15 {
            (h * 1e-3).max(1e-6)
        } else {
            (0.01 / der12).powf(1.0 / 8.0)
        };
        (100.0 * h).min(h1).min(self.h_max)
    }

    /// Integrate from `*t` to `t_target`, landing exactly on `t_target`.
    pub fn advance<S: OdeSystem>(&mut self, sys: &S, t: &mut f64, y: &mut [f64], t_target: f64) -> Result<()> {
        let n = sys.dim();
        if y.len() != n {
            return Err(Error::invalid("state length does not match the system"));
        }
        if t_target == *t {
            return Ok(());
        }
        let dir = (t_target - *t).signum();
        if self.k.len() != STAGES || self.k[0].len() != n {
            self.k = vec![vec![0.0; n]; STAGES];
            self.y_stage = vec![0.0; n];
            self.y_new = vec![0.0; n];
        }

        // reuse f(t, y) if the caller did not move the state
        let mut k0 = vec![0.0; n];
        match &self.fsal {
            Some((ft, fy, fk)) if *ft == *t && fy.as_slice() == &y[..] => k0.copy_from_slice(fk),
            _ => {
                let yc = y.to_vec();
                self.eval(sys, *t, &yc, &mut k0);
            }
        }
        self.k[0].copy_from_slice(&k0);

        let mut h = match self.h {
            Some(h) => h.abs(),
            None => {
                let yc = y.to_vec();
                self.initial_step(sys, *t, &yc, &k0, dir)
            }
        };
        let mut last_rejected = false;
        let mut steps = 0usize;

        loop {
            if steps >= self.max_steps {
                return Err(Error::Integration {
                    t: *t,
                    reason: "maximum number of steps exceeded".into(),
                });
            }
            if 0.1 * h <= t.abs() * UROUND || !h.is_finite() {
                return Err(Error::Integration {
                    t: *t,
                    reason: format!("step size underflow (h = {h:e})"),
                });
            }
            let remaining = (t_target - *t) * dir;
            let mut h_saved = None;
            let mut step = h;
            let mut last = false;
            if step * 1.01 >= remaining {
                h_saved = Some(h);
                step = remaining;
                last = true;
            }
            let hs = dir * step;
            steps += 1;

            for s in 1..STAGES {
                for i in 0..n {
                    let mut acc = 0.0;
                    for (j, a) in A[s - 1].iter().enumerate() {
                        acc += a * self.k[j][i];
                    }
                    self.y_stage[i] = y[i] + hs * acc;
                }
                let ys = std::mem::take(&mut self.y_stage);
                let mut ks = std::mem::take(&mut self.k[s]);
                self.eval(sys, *t + C[s] * hs, &ys, &mut ks);
                self.k[s] = ks;
                self.y_stage = ys;
            }

            let (mut err, mut err2) = (0.0, 0.0);
            for i in 0..n {
                let mut incr = 0.0;
                let mut e5 = 0.0;
                for s in 0..STAGES {
                    incr += B[s] * self.k[s][i];
                    e5 += E[s] * self.k[s][i];
                }
                self.y_new[i] = y[i] + hs * incr;
                let sk = self.atol + self.rtol * y[i].abs().max(self.y_new[i].abs());
                let e3 = incr - BHH[0] * self.k[0][i] - BHH[1] * self.k[8][i] - BHH[2] * self.k[11][i];
                err2 += (e3 / sk).powi(2);
                err += (e5 / sk).powi(2);
            }
            let mut deno = err + 0.01 * err2;
            if deno <= 0.0 {
                deno = 1.0;
            }
            let err = step * err * (1.0 / (deno * n as f64)).sqrt();
            if !err.is_finite() {
                return Err(Error::Integration {
                    t: *t,
                    reason: "non-finite error estimate".into(),
                });
            }

            let fac11 = err.powf(1.0 / 8.0 - 0.2 * BETA);
            let fac = (fac11 / self.fac_old.powf(BETA) / SAFETY).clamp(1.0 / FAC_MAX, 1.0 / FAC_MIN);
            let mut h_new = step / fac;

            if err <= 1.0 {
                self.fac_old = err.max(1e-4);
                self.stats.accepted += 1;
                let yn = std::mem::take(&mut self.y_new);
                let mut f_new = vec![0.0; n];
                self.eval(sys, *t + hs, &yn, &mut f_new);
                y.copy_from_slice(&yn);
                self.y_new = yn;
                *t = if last { t_target } else { *t + hs };
                self.k[0].copy_from_slice(&f_new);
                h_new = h_new.min(self.h_max);
                if last_rejected {
                    h_new = h_new.min(step);
                }
                last_rejected = false;
                if last {
                    self.h = Some(h_saved.unwrap_or(h_new).max(h_new).min(self.h_max));
                    self.fsal = Some((*t, y.to_vec(), f_new));
                    return Ok(());
                }
                h = h_new;
            } else {
                self.stats.rejected += 1;
                last_rejected = true;
                h = step / (1.0 / FAC_MIN).min(fac11 / SAFETY);
            }
        }
    }
}
