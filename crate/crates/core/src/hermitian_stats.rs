//! Random-matrix diagnostics for real spectra: bulk selection, unfolding,
//! spacing and gap-ratio distributions, the spectral form factor, and the
//! GOE/Poisson references they are compared against.

use faer::linalg::solvers::SolveLstsq;
use faer::{Mat, Side};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::histogram::Histogram;
use crate::seeding::realization_rng;

pub use std::f64::consts::PI;

/// Mean gap ratio of the GOE (large-dimension value).
pub const MEAN_R_GOE: f64 = 0.5359;
/// `2 ln 2 − 1`.
pub const MEAN_R_POISSON: f64 = 0.386_294_361_119_890_6;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RealSpectrum {
    /// Ascending.
    pub values: Vec<f64>,
    /// Retained window as fractions of the original level count.
    pub selection: (f64, f64),
    /// Number of exactly repeated adjacent levels.
    pub ties: usize,
}

impl RealSpectrum {
    pub fn new(mut values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("spectrum contains non-finite values"));
        }
        values.sort_by(f64::total_cmp);
        let ties = values.windows(2).filter(|w| w[0] == w[1]).count();
        Ok(Self {
            values,
            selection: (0.0, 1.0),
            ties,
        })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Keep indices `[n/3, 2n/3)`.
pub fn select_bulk(spec: &RealSpectrum) -> Result<RealSpectrum> {
    let n = spec.len();
    if n < 9 {
        return Err(Error::InsufficientData(format!("bulk selection needs 9 levels, got {n}")));
    }
    let (lo, hi) = (n / 3, 2 * n / 3);
    let values = spec.values[lo..hi].to_vec();
    let (a, b) = spec.selection;
    let span = b - a;
    let ties = values.windows(2).filter(|w| w[0] == w[1]).count();
    Ok(RealSpectrum {
        values,
        selection: (a + span * lo as f64 / n as f64, a + span * hi as f64 / n as f64),
        ties,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UnfoldedSpectrum {
    pub values: Vec<f64>,
    pub fit_degree: usize,
    /// Adjacent pairs where the fitted staircase decreases.
    pub monotonicity_violations: usize,
}

impl UnfoldedSpectrum {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn spacings(&self) -> Vec<f64> {
        self.values.windows(2).map(|w| w[1] - w[0]).collect()
    }

    pub fn mean_spacing(&self) -> f64 {
        let n = self.values.len();
        (self.values[n - 1] - self.values[0]) / (n - 1) as f64
    }
}

fn chebyshev_row(x: f64, degree: usize, row: &mut [f64]) {
    row[0] = 1.0;
    if degree >= 1 {
        row[1] = x;
    }
    for k in 2..=degree {
        row[k] = 2.0 * x * row[k - 1] - row[k - 2];
    }
}

/// Map levels through a least-squares polynomial fit of the counting
/// staircase `#{E_m ≤ E_n}`. The fit uses a Chebyshev basis on the
/// spectrum rescaled to `[−1, 1]`, so it is invariant under `E → aE + b`.
pub fn unfold(spec: &RealSpectrum, degree: usize) -> Result<UnfoldedSpectrum> {
    if degree < 3 {
        return Err(Error::invalid("unfolding degree must be at least 3"));
    }
    let n = spec.len();
    if n <= degree {
        return Err(Error::RankDeficient(format!("{n} levels cannot fix degree {degree}")));
    }
    let (e_min, e_max) = (spec.values[0], spec.values[n - 1]);
    if !(e_max > e_min) {
        return Err(Error::RankDeficient("all levels coincide".into()));
    }
    let scale = |e: f64| (2.0 * e - (e_min + e_max)) / (e_max - e_min);

    // staircase with ties sharing the count of their last member
    let mut stair = vec![0.0; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && spec.values[j + 1] == spec.values[i] {
            j += 1;
        }
        for s in &mut stair[i..=j] {
            *s = (j + 1) as f64;
        }
        i = j + 1;
    }

    let cols = degree + 1;
    let mut row = vec![0.0; cols];
    let mut a = Mat::<f64>::zeros(n, cols);
    for (r, &e) in spec.values.iter().enumerate() {
        chebyshev_row(scale(e), degree, &mut row);
        for (c, v) in row.iter().enumerate() {
            a[(r, c)] = *v;
        }
    }
    let rhs = Mat::from_fn(n, 1, |r, _| stair[r]);
    let qr = a.qr();
    let r_diag: Vec<f64> = (0..cols).map(|k| qr.R()[(k, k)].abs()).collect();
    let r_max = r_diag.iter().cloned().fold(0.0, f64::max);
    if r_diag.iter().any(|&d| d <= 1e-12 * r_max) {
        return Err(Error::RankDeficient("staircase fit matrix is singular".into()));
    }
    let coeffs = qr.solve_lstsq(&rhs);

    let values: Vec<f64> = spec
        .values
        .iter()
        .map(|&e| {
            chebyshev_row(scale(e), degree, &mut row);
            row.iter().enumerate().map(|(c, v)| v * coeffs[(c, 0)]).sum()
        })
        .collect();
    let monotonicity_violations = values.windows(2).filter(|w| w[1] < w[0]).count();
    Ok(UnfoldedSpectrum {
        values,
        fit_degree: degree,
        monotonicity_violations,
    })
}

/// Wigner surmise for the GOE.
pub fn p_goe_spacing(s: f64) -> f64 {
    if s < 0.0 {
        return 0.0;
    }
    0.5 * PI * s * (-0.25 * PI * s * s).exp()
}

pub fn p_poisson_spacing(s: f64) -> f64 {
    if s < 0.0 {
        0.0
    } else {
        (-s).exp()
    }
}

/// Gap-ratio surmise for the GOE on `r ∈ [0, 1]`.
pub fn p_goe_ratio(r: f64) -> f64 {
    if !(0.0..=1.0).contains(&r) {
        return 0.0;
    }
    27.0 / 4.0 * (r + r * r) / (1.0 + r + r * r).powf(2.5)
}

pub fn p_poisson_ratio(r: f64) -> f64 {
    if !(0.0..=1.0).contains(&r) {
        return 0.0;
    }
    2.0 / ((1.0 + r) * (1.0 + r))
}

/// Density histogram of the unfolded spacings pooled over realizations, on
/// `[0, max spacing]`.
pub fn spacing_histogram(spectra: &[UnfoldedSpectrum], bins: usize) -> Result<Histogram> {
    let spacings: Vec<f64> = spectra.iter().flat_map(|u| u.spacings()).collect();
    if spacings.len() < 100 {
        return Err(Error::InsufficientData(format!(
            "spacing histogram needs 100 spacings, got {}",
            spacings.len()
        )));
    }
    let hi = spacings.iter().cloned().fold(0.0, f64::max);
    Histogram::from_samples(&spacings, bins, 0.0, hi)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapRatios {
    pub ratios: Vec<f64>,
    pub mean: f64,
    /// Spacings that were exactly zero.
    pub zero_spacings: usize,
}

/// `r_n = min(s_n, s_{n−1}) / max(s_n, s_{n−1})` on raw levels.
pub fn gap_ratios(spec: &RealSpectrum) -> Result<GapRatios> {
    if spec.len() < 3 {
        return Err(Error::InsufficientData("gap ratios need 3 levels".into()));
    }
    let s: Vec<f64> = spec.values.windows(2).map(|w| w[1] - w[0]).collect();
    let zero_spacings = s.iter().filter(|&&x| x == 0.0).count();
    if zero_spacings == s.len() {
        return Err(Error::Degenerate("all levels coincide".into()));
    }
    let ratios: Vec<f64> = s
        .windows(2)
        .map(|w| {
            let (a, b) = (w[0].min(w[1]), w[0].max(w[1]));
            if b == 0.0 {
                0.0
            } else {
                a / b
            }
        })
        .collect();
    let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
    Ok(GapRatios {
        ratios,
        mean,
        zero_spacings,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SffCurve {
    pub times: Vec<f64>,
    /// `<|Z(t)|²>`.
    pub values: Vec<f64>,
    /// `M/(M−1) (<|Z|²> − |<Z>|²)`, the unbiased connected part.
    pub connected: Vec<f64>,
    pub n_levels: usize,
    pub n_realizations: usize,
}

/// Spectral form factor of unfolded spectra, `Z(t) = Σ_n e^{itẼ_n}`.
pub fn sff(spectra: &[UnfoldedSpectrum], grid: &[f64]) -> Result<SffCurve> {
    let m = spectra.len();
    if m < 2 {
        return Err(Error::InsufficientData("form factor needs 2 realizations".into()));
    }
    let n_levels = spectra[0].len();
    if spectra.iter().any(|s| s.len() != n_levels) {
        return Err(Error::invalid("all spectra must retain the same level count"));
    }
    let mf = m as f64;
    let mut values = Vec::with_capacity(grid.len());
    let mut connected = Vec::with_capacity(grid.len());
    for &t in grid {
        let (mut sum_re, mut sum_im, mut sum_sq) = (0.0, 0.0, 0.0);
        for spec in spectra {
            let (mut re, mut im) = (0.0, 0.0);
            for &e in &spec.values {
                let (s, c) = (t * e).sin_cos();
                re += c;
                im += s;
            }
            sum_re += re;
            sum_im += im;
            sum_sq += re * re + im * im;
        }
        let full = sum_sq / mf;
        let mean_sq = (sum_re * sum_re + sum_im * sum_im) / (mf * mf);
        values.push(full);
        connected.push((mf / (mf - 1.0) * (full - mean_sq)).max(0.0));
    }
    Ok(SffCurve {
        times: grid.to_vec(),
        values,
        connected,
        n_levels,
        n_realizations: m,
    })
}

/// Connected GOE form factor in unfolded time (mean spacing 1).
pub fn sff_goe_connected(t: f64, n: usize) -> f64 {
    let nf = n as f64;
    let t = t.abs();
    if t == 0.0 {
        return 0.0;
    }
    if t < 2.0 * PI {
        nf * (t / PI - t / (2.0 * PI) * (1.0 + t / PI).ln())
    } else {
        nf * (2.0 - t / (2.0 * PI) * ((t + PI) / (t - PI)).ln())
    }
}

/// Full GOE form factor: connected part plus the disconnected Bessel term.
pub fn sff_goe_reference(t: f64, n: usize) -> f64 {
    let nf = n as f64;
    let disconnected = if t == 0.0 {
        nf
    } else {
        PI / t * libm::j1(2.0 * nf * t / PI)
    };
    sff_goe_connected(t, n) + disconnected * disconnected
}

/// Form factor of `n` levels with independent unit-mean exponential
/// spacings, `n + 2 Re Σ_k (n−k) (1−it)^{−k}`.
pub fn sff_poisson_reference(t: f64, n: usize) -> f64 {
    let q = faer::c64::new(1.0, -t).inv();
    let mut pow = q;
    let mut acc = 0.0;
    for k in 1..n {
        acc += (n - k) as f64 * pow.re;
        pow *= q;
    }
    n as f64 + 2.0 * acc
}

/// Centered running mean over `±half` neighbours.
pub fn moving_average(values: &[f64], half: usize) -> Vec<f64> {
    let n = values.len();
    let mut prefix = vec![0.0; n + 1];
    for (i, v) in values.iter().enumerate() {
        prefix[i + 1] = prefix[i] + v;
    }
    (0..n)
        .map(|i| {
            let lo = i.saturating_sub(half);
            let hi = (i + half + 1).min(n);
            (prefix[hi] - prefix[lo]) / (hi - lo) as f64
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RampReport {
    /// `log10(t_hi / t_lo)`, zero when no rise was found.
    pub decades: f64,
    pub t_lo: f64,
    pub t_hi: f64,
}

impl RampReport {
    pub fn has_ramp(&self) -> bool {
        self.decades >= 1.0
    }
}

/// Rise of the smoothed normalized connected form factor from ≤ 0.05 to
/// ≥ 0.95 on a log-spaced grid. `t_hi` is the first time at 0.95 and
/// `t_lo` the last time at or below 0.05 before it.
pub fn ramp_detector(curve: &SffCurve) -> RampReport {
    let none = RampReport {
        decades: 0.0,
        t_lo: f64::NAN,
        t_hi: f64::NAN,
    };
    if curve.times.len() < 3 || curve.n_levels == 0 {
        return none;
    }
    let norm: Vec<f64> = curve
        .connected
        .iter()
        .map(|k| k / curve.n_levels as f64)
        .collect();
    let smooth = moving_average(&norm, (curve.times.len() / 100).max(1));
    let Some(hi) = smooth.iter().position(|&k| k >= 0.95) else {
        return none;
    };
    let Some(lo) = smooth[..hi].iter().rposition(|&k| k <= 0.05) else {
        return none;
    };
    let (t_lo, t_hi) = (curve.times[lo], curve.times[hi]);
    RampReport {
        decades: (t_hi / t_lo).log10(),
        t_lo,
        t_hi,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RealEnsemble {
    Goe,
    Poisson1d,
}

/// `count` independent spectra; realization `i` uses `seed_for(seed, i)`.
pub fn reference_ensembles(kind: RealEnsemble, dim: usize, count: usize, seed: u64) -> Result<Vec<RealSpectrum>> {
    if dim < 2 {
        return Err(Error::invalid("reference ensembles need dim ≥ 2"));
    }
    (0..count)
        .map(|i| {
            let mut rng = realization_rng(seed, i as u64);
            match kind {
                RealEnsemble::Goe => {
                    let a = Mat::<f64>::from_fn(dim, dim, |_, _| rng.sample(StandardNormal));
                    let h = Mat::<f64>::from_fn(dim, dim, |r, c| {
                        (a[(r, c)] + a[(c, r)]) / std::f64::consts::SQRT_2
                    });
                    let vals = h
                        .self_adjoint_eigenvalues(Side::Lower)
                        .map_err(|e| Error::Eigensolver(format!("{e:?}")))?;
                    RealSpectrum::new(vals)
                }
                RealEnsemble::Poisson1d => {
                    let vals = (0..dim).map(|_| rng.random::<f64>() * dim as f64).collect();
                    RealSpectrum::new(vals)
                }
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spectrum(v: &[f64]) -> RealSpectrum {
        RealSpectrum::new(v.to_vec()).unwrap()
    }

    #[test]
    fn bulk_of_nine() {
        let s = spectrum(&(0..9).map(f64::from).collect::<Vec<_>>());
        let b = select_bulk(&s).unwrap();
        assert_eq!(b.values, vec![3.0, 4.0, 5.0]);
        assert!((b.selection.0 - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn bulk_twice_is_middle_ninth() {
        let s = spectrum(&(0..81).map(f64::from).collect::<Vec<_>>());
        let b = select_bulk(&select_bulk(&s).unwrap()).unwrap();
        assert_eq!(b.len(), 9);
        assert!((b.selection.0 - 4.0 / 9.0).abs() < 1e-12);
        assert!((b.selection.1 - 5.0 / 9.0).abs() < 1e-12);
        assert!(select_bulk(&spectrum(&[0.0; 8])).is_err());
    }

    #[test]
    fn uniform_unfolds_to_unit_spacing() {
        let s = spectrum(&(0..100).map(f64::from).collect::<Vec<_>>());
        let u = unfold(&s, 3).unwrap();
        assert!(u.spacings().iter().all(|d| (d - 1.0).abs() < 1e-6));
        assert_eq!(u.monotonicity_violations, 0);
    }

    #[test]
    fn degenerate_unfold_is_an_error() {
        assert!(matches!(unfold(&spectrum(&[2.0; 50]), 5), Err(Error::RankDeficient(_))));
        assert!(unfold(&spectrum(&[1.0, 2.0, 3.0]), 5).is_err());
    }

    #[test]
    fn gap_ratio_examples() {
        let g = gap_ratios(&spectrum(&[0.0, 1.0, 2.0, 3.0])).unwrap();
        assert!(g.ratios.iter().all(|&r| r == 1.0) && g.mean == 1.0);
        let g = gap_ratios(&spectrum(&[0.0, 1.0, 3.0])).unwrap();
        assert_eq!(g.ratios, vec![0.5]);
        let g = gap_ratios(&spectrum(&[0.0, 1.0, 1.0, 2.0])).unwrap();
        assert_eq!(g.zero_spacings, 1);
        assert_eq!(g.ratios, vec![0.0, 0.0]);
        assert!(gap_ratios(&spectrum(&[1.0, 1.0, 1.0])).is_err());
    }

    #[test]
    fn reference_densities_at_zero() {
        assert_eq!(p_goe_spacing(0.0), 0.0);
        assert_eq!(p_poisson_spacing(0.0), 1.0);
    }

    #[test]
    fn poisson_sum_matches_closed_form() {
        for &n in &[2usize, 5, 40] {
            for &t in &[0.3, 1.0, 2.7, 10.0] {
                let nf = n as f64;
                let z = faer::c64::new(1.0, t).powf(1.0 - nf) + faer::c64::new(1.0, -t).powf(1.0 - nf);
                let closed = nf + 2.0 / (t * t) - z.re / (t * t);
                let sum = sff_poisson_reference(t, n);
                assert!((closed - sum).abs() < 1e-9 * closed.abs().max(1.0), "n={n} t={t}");
            }
        }
    }

    #[test]
    fn goe_reference_limits() {
        assert!((sff_goe_reference(0.0, 50) - 2500.0).abs() < 1e-9);
        assert!((sff_goe_connected(1e4, 50) / 50.0 - 1.0).abs() < 1e-3);
        let below = sff_goe_connected(2.0 * PI - 1e-9, 10);
        let above = sff_goe_connected(2.0 * PI + 1e-9, 10);
        assert!((below - above).abs() < 1e-6);
    }
}
