//! Probability-density histograms and their comparison with reference laws.

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Histogram {
    pub bin_edges: Vec<f64>,
    pub densities: Vec<f64>,
    pub counts: Vec<usize>,
    /// Samples that fell inside the range.
    pub total: usize,
}

impl Histogram {
    /// Equal-width density histogram on `[lo, hi]`; the last bin is closed.
    /// Samples outside the range are ignored.
    pub fn from_samples(samples: &[f64], bins: usize, lo: f64, hi: f64) -> Result<Self> {
        if bins == 0 || !(hi > lo) {
            return Err(Error::invalid("histogram needs bins > 0 and hi > lo"));
        }
        let width = (hi - lo) / bins as f64;
        let mut counts = vec![0usize; bins];
        for &x in samples {
            if !(lo..=hi).contains(&x) {
                continue;
            }
            let b = (((x - lo) / width) as usize).min(bins - 1);
            counts[b] += 1;
        }
        let total: usize = counts.iter().sum();
        if total == 0 {
            return Err(Error::InsufficientData("no samples inside the histogram range".into()));
        }
        let bin_edges = (0..=bins).map(|i| lo + width * i as f64).collect();
        let densities = counts
            .iter()
            .map(|&c| c as f64 / (total as f64 * width))
            .collect();
        Ok(Self {
            bin_edges,
            densities,
            counts,
            total,
        })
    }

    pub fn bins(&self) -> usize {
        self.densities.len()
    }

    pub fn bin_centers(&self) -> Vec<f64> {
        self.bin_edges.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect()
    }

    pub fn integral(&self) -> f64 {
        self.densities
            .iter()
            .zip(self.bin_edges.windows(2))
            .map(|(d, w)| d * (w[1] - w[0]))
            .sum()
    }

    /// Average of `density` over each bin.
    pub fn bin_averages(&self, density: impl Fn(f64) -> f64) -> Vec<f64> {
        self.bin_edges
            .windows(2)
            .map(|w| simpson(&density, w[0], w[1], 32) / (w[1] - w[0]))
            .collect()
    }

    /// `max_b |h_b − <p>_b|` against the bin-averaged reference density.
    pub fn sup_distance(&self, density: impl Fn(f64) -> f64) -> f64 {
        self.densities
            .iter()
            .zip(self.bin_averages(density))
            .map(|(h, p)| (h - p).abs())
            .fold(0.0, f64::max)
    }

    /// `max_b |h_b − g_b|` against another histogram on the same bins.
    pub fn sup_distance_to(&self, other: &Histogram) -> Result<f64> {
        if self.bin_edges.len() != other.bin_edges.len()
            || self
                .bin_edges
                .iter()
                .zip(&other.bin_edges)
                .any(|(a, b)| (a - b).abs() > 1e-12 * (1.0 + a.abs()))
        {
            return Err(Error::invalid("histograms have different bins"));
        }
        Ok(self
            .densities
            .iter()
            .zip(&other.densities)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }
}

/// Composite Simpson rule with `n` (rounded up to even) panels.
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let n = (n.max(2) + 1) & !1;
    let h = (b - a) / n as f64;
    let mut acc = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(a + h * i as f64);
    }
    acc * h / 3.0
}
