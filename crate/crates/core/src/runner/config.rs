//! Experiment configuration: a single JSON document, strictly validated and
//! fully defaulted.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::classical::{IntegratorSettings, LyapunovSettings, SamplerSettings};
use crate::complex_stats::WindowMode;
use crate::error::{Error, Result};
use crate::operators::ModelParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    ImbalanceQuantum,
    EigenstateStats,
    SpectralStatsHermitian,
    RVsLambdaSweep,
    ImbalanceClassical,
    LyapunovEnsemble,
    ClassicalScatter,
    LiouvillianStats,
    NhStats,
    Baselines,
}

impl Experiment {
    pub const ALL: [Experiment; 10] = [
        Experiment::ImbalanceQuantum,
        Experiment::EigenstateStats,
        Experiment::SpectralStatsHermitian,
        Experiment::RVsLambdaSweep,
        Experiment::ImbalanceClassical,
        Experiment::LyapunovEnsemble,
        Experiment::ClassicalScatter,
        Experiment::LiouvillianStats,
        Experiment::NhStats,
        Experiment::Baselines,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::ImbalanceQuantum => "imbalance_quantum",
            Experiment::EigenstateStats => "eigenstate_stats",
            Experiment::SpectralStatsHermitian => "spectral_stats_hermitian",
            Experiment::RVsLambdaSweep => "r_vs_lambda_sweep",
            Experiment::ImbalanceClassical => "imbalance_classical",
            Experiment::LyapunovEnsemble => "lyapunov_ensemble",
            Experiment::ClassicalScatter => "classical_scatter",
            Experiment::LiouvillianStats => "liouvillian_stats",
            Experiment::NhStats => "nh_stats",
            Experiment::Baselines => "baselines",
        }
    }

    pub fn from_name(name: &str) -> Option<Experiment> {
        Experiment::ALL.into_iter().find(|e| e.name() == name)
    }
}

impl std::fmt::Display for Experiment {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SectorConfig {
    pub n_p: u32,
    pub n_atoms: u32,
}

impl Default for SectorConfig {
    fn default() -> Self {
        Self { n_p: 25, n_atoms: 10 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TruncationConfig {
    pub n_cut: u32,
    /// Twice the spin length.
    pub two_s: u32,
}

impl Default for TruncationConfig {
    fn default() -> Self {
        Self { n_cut: 2, two_s: 2 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnsembleConfig {
    pub count: usize,
    pub base_seed: u64,
    /// Relative half-width of the uniform cavity-frequency disorder.
    pub disorder_width: f64,
}

impl Default for EnsembleConfig {
    fn default() -> Self {
        Self {
            count: 20,
            base_seed: 0,
            disorder_width: 0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub lambdas: Vec<f64>,
    pub t_min: f64,
    pub t_max: f64,
    pub t_points: usize,
    pub window_fraction: f64,
    pub sff_t_min: f64,
    pub sff_t_max: f64,
    pub sff_points_per_decade: usize,
    pub tau_min: f64,
    pub tau_max: f64,
    pub tau_points: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            lambdas: vec![2.0, 10.0],
            t_min: 1e-2,
            t_max: 1e4,
            t_points: 2000,
            window_fraction: 0.2,
            sff_t_min: 1e-3,
            sff_t_max: 1e2,
            sff_points_per_decade: 100,
            tau_min: 1e-2,
            tau_max: 1e3,
            tau_points: 300,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StatsConfig {
    pub unfolding_degree: usize,
    pub spacing_bins: usize,
    pub ratio_bins: usize,
    pub csr_bins: usize,
    pub window: WindowMode,
    pub dsff_angle: f64,
    /// Weak-symmetry block analysed; `null` uses the full Liouvillian.
    pub liouvillian_sector: Option<i64>,
    pub baseline_dim: usize,
    pub baseline_count: usize,
}

impl Default for StatsConfig {
    fn default() -> Self {
        Self {
            unfolding_degree: 10,
            spacing_bins: 40,
            ratio_bins: 20,
            csr_bins: 10,
            window: WindowMode::default(),
            dsff_angle: 0.0,
            liouvillian_sector: Some(0),
            baseline_dim: 1000,
            baseline_count: 20,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClassicalConfig {
    pub n_p: f64,
    /// `null` samples the whole excitation manifold.
    pub target_energy: Option<f64>,
    pub energy_tol: f64,
    pub n_states: usize,
    /// Exponents above this count as chaotic.
    pub positive_threshold: f64,
    pub integrator: IntegratorSettings,
    pub lyapunov: LyapunovSettings,
    pub sampler: SamplerSettings,
}

impl Default for ClassicalConfig {
    fn default() -> Self {
        Self {
            n_p: 2.5,
            target_energy: Some(1.5),
            energy_tol: 1e-5,
            n_states: 100,
            positive_threshold: 0.01,
            integrator: IntegratorSettings::default(),
            lyapunov: LyapunovSettings::default(),
            sampler: SamplerSettings::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    #[serde(default)]
    pub model: ModelParams,
    #[serde(default)]
    pub sector: SectorConfig,
    #[serde(default)]
    pub truncation: TruncationConfig,
    #[serde(default)]
    pub classical: ClassicalConfig,
    #[serde(default)]
    pub ensemble: EnsembleConfig,
    #[serde(default)]
    pub grids: GridConfig,
    #[serde(default)]
    pub stats: StatsConfig,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
}

impl ExperimentConfig {
    /// Fully defaulted configuration for `experiment`.
    pub fn new(experiment: Experiment) -> Self {
        Self {
            experiment,
            model: ModelParams::default(),
            sector: SectorConfig::default(),
            truncation: TruncationConfig::default(),
            classical: ClassicalConfig::default(),
            ensemble: EnsembleConfig::default(),
            grids: GridConfig::default(),
            stats: StatsConfig::default(),
            output_dir: None,
        }
    }

    /// Every semantic violation, as `field: message`.
    pub fn violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        let mut check = |ok: bool, msg: &str| {
            if !ok {
                v.push(msg.to_string());
            }
        };
        let m = &self.model;
        let finite = [
            m.omega_c_left,
            m.omega_c_right,
            m.omega_s,
            m.lambda,
            m.j_hop,
            m.delta_left,
            m.delta_right,
            m.kappa,
        ]
        .iter()
        .all(|x| x.is_finite());
        check(finite, "model: parameters must be finite");
        check(m.lambda >= 0.0, "model.lambda: must be non-negative");
        check(m.j_hop >= 0.0, "model.j_hop: must be non-negative");
        check(m.kappa >= 0.0, "model.kappa: must be non-negative");
        check(
            m.omega_c_left > 0.0 && m.omega_c_right > 0.0,
            "model.omega_c_left/omega_c_right: must be positive",
        );

        let g = &self.grids;
        check(!g.lambdas.is_empty(), "grids.lambdas: must not be empty");
        check(
            g.lambdas.iter().all(|l| l.is_finite() && *l >= 0.0),
            "grids.lambdas: every lambda must be finite and non-negative",
        );
        check(
            g.t_min > 0.0 && g.t_max > g.t_min && g.t_points >= 2,
            "grids: need 0 < t_min < t_max and t_points ≥ 2",
        );
        check(
            g.window_fraction > 0.0 && g.window_fraction <= 1.0,
            "grids.window_fraction: must lie in (0, 1]",
        );
        check(
            g.sff_t_min > 0.0 && g.sff_t_max > g.sff_t_min && g.sff_points_per_decade >= 1,
            "grids: need 0 < sff_t_min < sff_t_max and sff_points_per_decade ≥ 1",
        );
        check(
            g.tau_min > 0.0 && g.tau_max > g.tau_min && g.tau_points >= 5,
            "grids: need 0 < tau_min < tau_max and tau_points ≥ 5",
        );

        let e = &self.ensemble;
        check(e.count >= 1, "ensemble.count: must be at least 1");
        check(
            (0.0..1.0).contains(&e.disorder_width),
            "ensemble.disorder_width: must lie in [0, 1)",
        );
        let needs_pairs = matches!(
            self.experiment,
            Experiment::SpectralStatsHermitian | Experiment::LiouvillianStats | Experiment::NhStats
        );
        check(
            !needs_pairs || e.count >= 2,
            "ensemble.count: form factors need at least 2 realizations",
        );

        check(self.sector.n_atoms >= 1, "sector.n_atoms: must be at least 1");
        check(self.sector.n_p >= 1, "sector.n_p: must be at least 1");

        let s = &self.stats;
        check(s.unfolding_degree >= 3, "stats.unfolding_degree: must be at least 3");
        check(
            s.spacing_bins >= 1 && s.ratio_bins >= 1 && s.csr_bins >= 1,
            "stats: bin counts must be positive",
        );
        check(s.baseline_dim >= 2, "stats.baseline_dim: must be at least 2");
        check(s.baseline_count >= 2, "stats.baseline_count: must be at least 2");
        check(s.dsff_angle.is_finite(), "stats.dsff_angle: must be finite");
        match s.window {
            WindowMode::QuantileBox { q_lo, q_hi } => check(
                (0.0..=1.0).contains(&q_lo) && (0.0..=1.0).contains(&q_hi) && q_lo < q_hi,
                "stats.window: need 0 ≤ q_lo < q_hi ≤ 1",
            ),
            WindowMode::CountInnermost { n } => check(n >= 3, "stats.window.n: must be at least 3"),
        }

        let c = &self.classical;
        check(c.n_p > 0.0 && c.n_p.is_finite(), "classical.n_p: must be positive");
        check(c.energy_tol > 0.0, "classical.energy_tol: must be positive");
        check(c.n_states >= 1, "classical.n_states: must be at least 1");
        check(
            c.integrator.rtol > 0.0 && c.integrator.atol > 0.0,
            "classical.integrator: rtol and atol must be positive",
        );
        check(
            c.integrator.t_end > 0.0 && c.integrator.sample_stride > 0.0,
            "classical.integrator: t_end and sample_stride must be positive",
        );
        check(
            c.lyapunov.delta0 > 0.0 && c.lyapunov.tau > 0.0 && c.lyapunov.m_steps >= 1,
            "classical.lyapunov: delta0, tau and m_steps must be positive",
        );
        check(
            c.sampler.thin >= 1 && c.sampler.phase_grid >= 2,
            "classical.sampler: thin ≥ 1 and phase_grid ≥ 2",
        );

        if matches!(self.experiment, Experiment::LiouvillianStats | Experiment::NhStats) {
            check(m.kappa > 0.0, "model.kappa: must be positive for open and gain-loss spectra");
        }
        v
    }
}

/// Parse and validate a configuration document. On failure the error holds
/// every violation found.
pub fn validate_config(raw: &str) -> Result<ExperimentConfig> {
    let value: serde_json::Value =
        serde_json::from_str(raw).map_err(|e| Error::Config(vec![format!("syntax: {e}")]))?;
    let Some(obj) = value.as_object() else {
        return Err(Error::Config(vec!["config: must be a JSON object".into()]));
    };
    match obj.get("experiment") {
        None | Some(serde_json::Value::Null) => {
            return Err(Error::Config(vec!["experiment: required".into()]));
        }
        Some(serde_json::Value::String(s)) if s.is_empty() => {
            return Err(Error::Config(vec!["experiment: required".into()]));
        }
        Some(serde_json::Value::String(s)) if Experiment::from_name(s).is_none() => {
            let known: Vec<&str> = Experiment::ALL.iter().map(|e| e.name()).collect();
            return Err(Error::Config(vec![format!(
                "experiment: unknown value {s:?}, expected one of {}",
                known.join(", ")
            )]));
        }
        _ => {}
    }
    let config: ExperimentConfig =
        serde_json::from_value(value).map_err(|e| Error::Config(vec![format!("schema: {e}")]))?;
    let violations = config.violations();
    if violations.is_empty() {
        Ok(config)
    } else {
        Err(Error::Config(violations))
    }
}
