//! Diagnostics for complex spectra: complex spacing ratios, the dissipative
//! spectral form factor with its Heisenberg-time fit, spectral windows and
//! non-Hermitian random-matrix references.

use std::f64::consts::PI;

use faer::{c64, Mat};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hermitian_stats::moving_average;
use crate::histogram::Histogram;
use crate::seeding::realization_rng;

/// `⟨r⟩` and `⟨cos θ⟩` of the complex Ginibre ensemble (large dimension).
pub const GINUE_MEAN_R: f64 = 0.738;
pub const GINUE_MEAN_COS: f64 = -0.241;
/// Independent points in the plane.
pub const POISSON2D_MEAN_R: f64 = 2.0 / 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum SpectrumWindow {
    Rect {
        re_lo: f64,
        re_hi: f64,
        im_lo: f64,
        im_hi: f64,
    },
    Innermost {
        count: usize,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComplexSpectrum {
    pub values: Vec<c64>,
    pub window: Option<SpectrumWindow>,
}

impl ComplexSpectrum {
    pub fn new(values: Vec<c64>) -> Self {
        Self {
            values,
            window: None,
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CsrResult {
    pub xi: Vec<(f64, f64)>,
    pub r: Vec<f64>,
    pub theta: Vec<f64>,
    pub mean_r: f64,
    pub mean_cos_theta: f64,
    /// Points whose nearest neighbour coincides with them; excluded.
    pub duplicates: usize,
}

impl CsrResult {
    pub fn r_histogram(&self, bins: usize) -> Result<Histogram> {
        Histogram::from_samples(&self.r, bins, 0.0, 1.0)
    }

    pub fn theta_histogram(&self, bins: usize) -> Result<Histogram> {
        Histogram::from_samples(&self.theta, bins, -PI, PI)
    }

    /// Pool several results (e.g. over realizations).
    pub fn pooled(results: &[CsrResult]) -> Result<CsrResult> {
        let mut xi = Vec::new();
        let mut duplicates = 0;
        for r in results {
            xi.extend_from_slice(&r.xi);
            duplicates += r.duplicates;
        }
        from_ratios(xi, duplicates)
    }
}

fn from_ratios(xi: Vec<(f64, f64)>, duplicates: usize) -> Result<CsrResult> {
    if xi.is_empty() {
        return Err(Error::InsufficientData("no spacing ratios".into()));
    }
    let r: Vec<f64> = xi.iter().map(|&(re, im)| re.hypot(im)).collect();
    let theta: Vec<f64> = xi.iter().map(|&(re, im)| im.atan2(re)).collect();
    let n = xi.len() as f64;
    let mean_r = r.iter().sum::<f64>() / n;
    let mean_cos_theta = theta.iter().map(|t| t.cos()).sum::<f64>() / n;
    Ok(CsrResult {
        xi,
        r,
        theta,
        mean_r,
        mean_cos_theta,
        duplicates,
    })
}

/// `ξ_n = (z^NN − z_n)/(z^NNN − z_n)` with neighbours by Euclidean distance
/// and ties broken by index.
pub fn csr(spec: &ComplexSpectrum) -> Result<CsrResult> {
    let z = &spec.values;
    let n = z.len();
    if n < 3 {
        return Err(Error::InsufficientData("complex spacing ratios need 3 points".into()));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| z[a].re.total_cmp(&z[b].re).then(a.cmp(&b)));
    let mut rank = vec![0usize; n];
    for (pos, &i) in order.iter().enumerate() {
        rank[i] = pos;
    }

    let mut xi = Vec::with_capacity(n);
    let mut duplicates = 0;
    for (i, zi) in z.iter().enumerate() {
        // (squared distance, index) of the nearest and next-nearest
        let mut best = [(f64::INFINITY, usize::MAX); 2];
        let consider = |best: &mut [(f64, usize); 2], j: usize| {
            let cand = ((z[j] - zi).norm_sqr(), j);
            if cand < best[0] {
                best[1] = best[0];
                best[0] = cand;
            } else if cand < best[1] {
                best[1] = cand;
            }
        };
        let pos = rank[i];
        let (mut lo, mut hi) = (pos, pos + 1);
        let (mut left_open, mut right_open) = (true, true);
        while left_open || right_open {
            if left_open {
                if lo == 0 {
                    left_open = false;
                } else {
                    let j = order[lo - 1];
                    let dx = zi.re - z[j].re;
                    if dx * dx > best[1].0 {
                        left_open = false;
                    } else {
                        consider(&mut best, j);
                        lo -= 1;
                    }
                }
            }
            if right_open {
                if hi >= n {
                    right_open = false;
                } else {
                    let j = order[hi];
                    let dx = z[j].re - zi.re;
                    if dx * dx > best[1].0 {
                        right_open = false;
                    } else {
                        consider(&mut best, j);
                        hi += 1;
                    }
                }
            }
        }
        if best[0].0 == 0.0 {
            duplicates += 1;
            continue;
        }
        let ratio = (z[best[0].1] - zi) / (z[best[1].1] - zi);
        xi.push((ratio.re, ratio.im));
    }
    from_ratios(xi, duplicates)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DsffCurve {
    pub tau_magnitudes: Vec<f64>,
    pub direction_angle: f64,
    /// `<|Z(τ)|²>`.
    pub values: Vec<f64>,
    /// Unbiased connected part `M/(M−1)(<|Z|²> − |<Z>|²)`.
    pub connected: Vec<f64>,
    /// Mean level count per realization.
    pub n_levels: f64,
    pub heisenberg_time: Option<f64>,
}

/// `Z(τ) = Σ_n exp(i Re(z_n τ̄))` along `τ = |τ| e^{iθ}`.
pub fn dsff(spectra: &[ComplexSpectrum], tau_grid: &[f64], direction_angle: f64) -> Result<DsffCurve> {
    let m = spectra.len();
    if m < 2 {
        return Err(Error::InsufficientData("form factor needs 2 realizations".into()));
    }
    let dir = c64::cis(direction_angle);
    let projected: Vec<Vec<f64>> = spectra
        .iter()
        .map(|s| s.values.iter().map(|z| (z * dir.conj()).re).collect())
        .collect();
    let mf = m as f64;
    let mut values = Vec::with_capacity(tau_grid.len());
    let mut connected = Vec::with_capacity(tau_grid.len());
    for &tau in tau_grid {
        let (mut sre, mut sim, mut ssq) = (0.0, 0.0, 0.0);
        for proj in &projected {
            let (mut re, mut im) = (0.0, 0.0);
            for &x in proj {
                let (s, c) = (tau * x).sin_cos();
                re += c;
                im += s;
            }
            sre += re;
            sim += im;
            ssq += re * re + im * im;
        }
        let full = ssq / mf;
        let mean_sq = (sre * sre + sim * sim) / (mf * mf);
        values.push(full);
        connected.push((mf / (mf - 1.0) * (full - mean_sq)).max(0.0));
    }
    let n_levels = spectra.iter().map(|s| s.len() as f64).sum::<f64>() / mf;
    Ok(DsffCurve {
        tau_magnitudes: tau_grid.to_vec(),
        direction_angle,
        values,
        connected,
        n_levels,
        heisenberg_time: None,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DsffRamp {
    pub present: bool,
    pub dip_index: usize,
    pub plateau_index: usize,
    pub reason: String,
}

/// The smoothed full curve `K/𝒩` must dip to at most 1/2 and afterwards
/// settle within 5% of the plateau for the rest of the grid.
pub fn detect_dsff_ramp(curve: &DsffCurve, n_levels: f64) -> DsffRamp {
    let absent = |reason: &str| DsffRamp {
        present: false,
        dip_index: 0,
        plateau_index: 0,
        reason: reason.to_string(),
    };
    let len = curve.values.len();
    if len < 5 || !(n_levels > 0.0) {
        return absent("grid too short");
    }
    let norm: Vec<f64> = curve.values.iter().map(|v| v / n_levels).collect();
    let smooth = moving_average(&norm, (len / 20).max(1));
    let (dip, dip_value) = smooth
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |acc, (i, &v)| if v < acc.1 { (i, v) } else { acc });
    if dip_value > 0.5 {
        return absent("no dip below half the plateau");
    }
    let mut plateau = len;
    for i in (dip..len).rev() {
        if (smooth[i] - 1.0).abs() > 0.05 {
            break;
        }
        plateau = i;
    }
    if plateau >= len {
        return absent("curve never settles on the plateau");
    }
    if plateau < dip + 3 {
        return absent("ramp window holds fewer than 3 points");
    }
    DsffRamp {
        present: true,
        dip_index: dip,
        plateau_index: plateau,
        reason: String::new(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HeisenbergFit {
    pub tau_h: f64,
    pub m: f64,
    pub window: (f64, f64),
    pub rms_residual: f64,
}

/// Least-squares fit of the normalized connected form factor to
/// `1 − exp(−m|τ|²)` between the dip and the plateau onset, giving
/// `τ_H = 1/(2√m)`. `None` when no ramp is detected.
pub fn fit_heisenberg_time(curve: &DsffCurve, n_levels: f64) -> Option<HeisenbergFit> {
    let ramp = detect_dsff_ramp(curve, n_levels);
    if !ramp.present {
        return None;
    }
    let pts: Vec<(f64, f64)> = (ramp.dip_index..=ramp.plateau_index)
        .map(|i| (curve.tau_magnitudes[i].powi(2), curve.connected[i] / n_levels))
        .collect();
    let cost = |m: f64| -> f64 { pts.iter().map(|&(t2, k)| (k - 1.0 + (-m * t2).exp()).powi(2)).sum() };

    // starting scale from the half-rise point
    let t2_half = pts
        .iter()
        .find(|&&(_, k)| k >= 0.5)
        .map(|&(t2, _)| t2)
        .filter(|&t2| t2 > 0.0)
        .unwrap_or_else(|| pts.last().unwrap().0.max(1e-300));
    let m0 = std::f64::consts::LN_2 / t2_half;

    // coarse log scan, then golden section, then Gauss-Newton polish
    let (lo, hi) = (m0.ln() - 8.0, m0.ln() + 8.0);
    let steps = 400;
    let mut best = (f64::INFINITY, lo);
    for s in 0..=steps {
        let u = lo + (hi - lo) * s as f64 / steps as f64;
        let c = cost(u.exp());
        if c < best.0 {
            best = (c, u);
        }
    }
    let h = (hi - lo) / steps as f64;
    let (mut a, mut b) = (best.1 - h, best.1 + h);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..200 {
        let c1 = b - g * (b - a);
        let c2 = a + g * (b - a);
        if cost(c1.exp()) < cost(c2.exp()) {
            b = c2;
        } else {
            a = c1;
        }
    }
    let mut m = (0.5 * (a + b)).exp();
    for _ in 0..50 {
        let (mut num, mut den) = (0.0, 0.0);
        for &(t2, k) in &pts {
            let e = (-m * t2).exp();
            let r = k - 1.0 + e;
            let jac = -t2 * e;
            num += r * jac;
            den += jac * jac;
        }
        if den == 0.0 {
            break;
        }
        let next = m - num / den;
        if !(next > 0.0) || cost(next) > cost(m) {
            break;
        }
        let done = (next - m).abs() <= 1e-15 * m;
        m = next;
        if done {
            break;
        }
    }
    let rms_residual = (cost(m) / pts.len() as f64).sqrt();
    Some(HeisenbergFit {
        tau_h: 1.0 / (2.0 * m.sqrt()),
        m,
        window: (
            curve.tau_magnitudes[ramp.dip_index],
            curve.tau_magnitudes[ramp.plateau_index],
        ),
        rms_residual,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "mode")]
pub enum WindowMode {
    /// Keep values whose real and imaginary parts both lie between the
    /// given marginal quantiles.
    QuantileBox { q_lo: f64, q_hi: f64 },
    /// Keep the `n` values closest to the centroid.
    CountInnermost { n: usize },
}

impl Default for WindowMode {
    fn default() -> Self {
        WindowMode::QuantileBox { q_lo: 0.2, q_hi: 0.8 }
    }
}

/// Linear-interpolation quantile of sorted data.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let i = pos.floor() as usize;
    let frac = pos - i as f64;
    if i + 1 >= sorted.len() {
        sorted[sorted.len() - 1]
    } else {
        sorted[i] + frac * (sorted[i + 1] - sorted[i])
    }
}

pub fn window_select(spec: &ComplexSpectrum, mode: WindowMode) -> Result<ComplexSpectrum> {
    if spec.is_empty() {
        return Err(Error::InsufficientData("empty spectrum".into()));
    }
    let (values, window) = match mode {
        WindowMode::QuantileBox { q_lo, q_hi } => {
            if !(0.0..=1.0).contains(&q_lo) || !(0.0..=1.0).contains(&q_hi) || q_lo > q_hi {
                return Err(Error::invalid("quantiles must satisfy 0 ≤ q_lo ≤ q_hi ≤ 1"));
            }
            let mut re: Vec<f64> = spec.values.iter().map(|z| z.re).collect();
            let mut im: Vec<f64> = spec.values.iter().map(|z| z.im).collect();
            re.sort_by(f64::total_cmp);
            im.sort_by(f64::total_cmp);
            let rect = (quantile(&re, q_lo), quantile(&re, q_hi), quantile(&im, q_lo), quantile(&im, q_hi));
            let kept: Vec<c64> = spec
                .values
                .iter()
                .copied()
                .filter(|z: &c64| z.re >= rect.0 && z.re <= rect.1 && z.im >= rect.2 && z.im <= rect.3)
                .collect();
            (
                kept,
                SpectrumWindow::Rect {
                    re_lo: rect.0,
                    re_hi: rect.1,
                    im_lo: rect.2,
                    im_hi: rect.3,
                },
            )
        }
        WindowMode::CountInnermost { n } => {
            if n == 0 || n > spec.len() {
                return Err(Error::invalid(format!("cannot keep {n} of {} values", spec.len())));
            }
            let centroid = spec.values.iter().sum::<c64>() / spec.len() as f64;
            let mut idx: Vec<usize> = (0..spec.len()).collect();
            idx.sort_by(|&a, &b| {
                (spec.values[a] - centroid)
                    .norm_sqr()
                    .total_cmp(&(spec.values[b] - centroid).norm_sqr())
                    .then(a.cmp(&b))
            });
            idx.truncate(n);
            idx.sort_unstable();
            (idx.iter().map(|&i| spec.values[i]).collect(), SpectrumWindow::Innermost { count: n })
        }
    };
    if values.is_empty() {
        return Err(Error::InsufficientData("window selected no eigenvalues".into()));
    }
    Ok(ComplexSpectrum {
        values,
        window: Some(window),
    })
}

/// All eigenvalues of a general complex matrix.
pub fn general_eigenvalues(m: faer::MatRef<'_, c64>) -> Result<Vec<c64>> {
    if m.nrows() != m.ncols() {
        return Err(Error::invalid("matrix must be square"));
    }
    if m.nrows() == 0 {
        return Ok(Vec::new());
    }
    m.eigenvalues().map_err(|e| Error::Eigensolver(format!("{e:?}")))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ComplexEnsemble {
    Ginue,
    AiDagger,
    Poisson2d,
}

/// `count` spectra; realization `i` uses `seed_for(seed, i)`. Ginibre
/// entries have `E|M_ij|² = 1`, so the GinUE disk has radius `√dim`.
pub fn reference_ensembles_nh(kind: ComplexEnsemble, dim: usize, count: usize, seed: u64) -> Result<Vec<ComplexSpectrum>> {
    if dim < 2 {
        return Err(Error::invalid("reference ensembles need dim ≥ 2"));
    }
    let s = std::f64::consts::FRAC_1_SQRT_2;
    (0..count)
        .map(|i| {
            let mut rng = realization_rng(seed, i as u64);
            let values = match kind {
                ComplexEnsemble::Poisson2d => (0..dim)
                    .map(|_| c64::new(rng.random::<f64>(), rng.random::<f64>()))
                    .collect(),
                ComplexEnsemble::Ginue | ComplexEnsemble::AiDagger => {
                    let mut g = Mat::<c64>::from_fn(dim, dim, |_, _| {
                        let re: f64 = rng.sample(StandardNormal);
                        let im: f64 = rng.sample(StandardNormal);
                        c64::new(s * re, s * im)
                    });
                    if kind == ComplexEnsemble::AiDagger {
                        g = Mat::from_fn(dim, dim, |r, c| (g[(r, c)] + g[(c, r)]) * 0.5);
                    }
                    general_eigenvalues(g.as_ref())?
                }
            };
            Ok(ComplexSpectrum::new(values))
        })
        .collect()
}
