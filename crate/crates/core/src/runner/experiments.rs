use std::collections::BTreeMap;

use serde::Serialize;

use super::config::{Experiment, ExperimentConfig};
use super::output::{Cell, Csv, Outputs};
use super::{mean_stderr, par_realizations};
use crate::basis::{enumerate_sector, enumerate_truncated, SectorBasis, SectorParams};
use crate::classical::{
    classical_hamiltonian, classical_imbalance_trace, integrate, lyapunov, sample_states, ClassicalParams,
    ClassicalState,
};
use crate::complex_stats::{
    csr, detect_dsff_ramp, dsff, fit_heisenberg_time, reference_ensembles_nh, window_select, ComplexEnsemble,
    ComplexSpectrum, CsrResult, DsffRamp, HeisenbergFit,
};
use crate::dynamics::{
    critical_coupling_estimate, diagonalize_hermitian, eigenstate_imbalance_stats, hermitian_eigenvalues,
    imbalance_trace, log_time_grid, QuantumState,
};
use crate::error::Result;
use crate::hermitian_stats::{
    gap_ratios, p_goe_ratio, p_goe_spacing, p_poisson_ratio, p_poisson_spacing, ramp_detector, reference_ensembles,
    select_bulk, sff, sff_goe_reference, sff_poisson_reference, spacing_histogram, unfold, RampReport, RealEnsemble,
    RealSpectrum,
};
use crate::histogram::Histogram;
use crate::lindblad::{build_liouvillian, diagonalize_general, sector_project};
use crate::operators::{
    build_hamiltonian_nh, build_hamiltonian_tcd, build_imbalance_operator, build_number_operator, draw_disorder,
    DisorderLaw, ModelParams,
};
use crate::seeding::seed_for;

/// Separates the sampler's random stream from the disorder stream.
const SAMPLER_STREAM: u64 = 0x5eed_5a3b_1e00_0001;

fn disorder_factors(cfg: &ExperimentConfig, index: usize) -> (f64, f64) {
    if cfg.ensemble.disorder_width == 0.0 {
        return (1.0, 1.0);
    }
    let law = DisorderLaw {
        center: 1.0,
        relative_width: cfg.ensemble.disorder_width,
        seed: cfg.ensemble.base_seed,
        realization_index: index as u64,
    };
    draw_disorder(&law)
}

/// Model of realization `index` at coupling `lambda`: each cavity frequency
/// is scaled by its own disorder factor.
pub fn realization_model(cfg: &ExperimentConfig, lambda: f64, index: usize) -> ModelParams {
    let (fl, fr) = disorder_factors(cfg, index);
    ModelParams {
        lambda,
        ..cfg.model
    }
    .with_cavities((cfg.model.omega_c_left * fl, cfg.model.omega_c_right * fr))
}

/// Classical counterpart of [`realization_model`] at `classical.n_p`.
pub fn realization_classical(cfg: &ExperimentConfig, lambda: f64, index: usize) -> ClassicalParams {
    let m = realization_model(cfg, lambda, index);
    ClassicalParams {
        omega_c_left: m.omega_c_left,
        omega_c_right: m.omega_c_right,
        omega_s: m.omega_s,
        lambda,
        j_hop: m.j_hop,
        n_p: cfg.classical.n_p,
    }
}

fn sector_basis(cfg: &ExperimentConfig) -> Result<SectorBasis> {
    Ok(enumerate_sector(SectorParams::new(cfg.sector.n_p, cfg.sector.n_atoms)?))
}

fn sff_grid(cfg: &ExperimentConfig) -> Vec<f64> {
    let g = &cfg.grids;
    let decades = (g.sff_t_max / g.sff_t_min).log10();
    let points = (decades * g.sff_points_per_decade as f64).round() as usize + 1;
    log_time_grid(g.sff_t_min, g.sff_t_max, points.max(2))
}

fn time_grid(cfg: &ExperimentConfig) -> Vec<f64> {
    log_time_grid(cfg.grids.t_min, cfg.grids.t_max, cfg.grids.t_points)
}

pub(super) fn dispatch(cfg: &ExperimentConfig, out: &mut Outputs) -> Result<()> {
    match cfg.experiment {
        Experiment::ImbalanceQuantum => imbalance_quantum(cfg, out),
        Experiment::EigenstateStats => eigenstate_stats(cfg, out),
        Experiment::SpectralStatsHermitian => spectral_stats_hermitian(cfg, out),
        Experiment::RVsLambdaSweep => r_vs_lambda_sweep(cfg, out),
        Experiment::ImbalanceClassical => imbalance_classical(cfg, out),
        Experiment::LyapunovEnsemble => lyapunov_ensemble(cfg, out),
        Experiment::ClassicalScatter => classical_scatter(cfg, out),
        Experiment::LiouvillianStats => liouvillian_stats(cfg, out),
        Experiment::NhStats => nh_stats(cfg, out),
        Experiment::Baselines => baselines(cfg, out),
    }
}

#[derive(Serialize)]
struct CriticalCoupling {
    lambda_c: Option<f64>,
    reference: f64,
    sweep: Vec<(f64, f64)>,
}

fn critical_json(cfg: &ExperimentConfig, sweep: Vec<(f64, f64)>) -> CriticalCoupling {
    CriticalCoupling {
        lambda_c: critical_coupling_estimate(&sweep),
        reference: 1.9 * (f64::from(cfg.sector.n_p) / f64::from(cfg.sector.n_atoms)).sqrt(),
        sweep,
    }
}

fn imbalance_quantum(cfg: &ExperimentConfig, out: &mut Outputs) -> Result<()> {
    let basis = sector_basis(cfg)?;
    let n_p = cfg.sector.n_p;
    let i_op = build_imbalance_operator(&basis, n_p)?;
    let psi0 = QuantumState::left_cavity(&basis, n_p)?;
    let grid = time_grid(cfg);
    let mut traces = Csv::new(&["lambda", "realization", "t", "imbalance"]);
    let mut steady = Csv::new(&["lambda", "steady_mean", "stderr", "realizations"]);
    let mut sweep = Vec::new();
    for &lambda in &cfg.grids.lambdas {
        let runs = par_realizations(cfg.ensemble.count, |i| {
            let h = build_hamiltonian_tcd(&basis, &realization_model(cfg, lambda, i))?;
            let decomp = diagonalize_hermitian(&h)?;
            imbalance_trace(&decomp, &psi0, &grid, &i_op, cfg.grids.window_fraction)
        })?;
        for (i, tr) in runs.iter().enumerate() {
            for (t, v) in tr.times.iter().zip(&tr.values) {
                traces.row(&[lambda.into(), i.into(), (*t).into(), (*v).into()]);
            }
        }
        let means: Vec<f64> = runs.iter().map(|t| t.steady_mean).collect();
        let (m, se) = mean_stderr(&means);
        steady.row(&[lambda.into(), m.into(), se.into(), runs.len().into()]);
        sweep.push((lambda, m));
    }
    out.write_csv("imbalance_quantum_trace.csv", &traces)?;
    out.write_csv("imbalance_quantum_steady.csv", &steady)?;
    out.write_json("imbalance_quantum_critical.json", &critical_json(cfg, sweep))
}

fn eigenstate_stats(cfg: &ExperimentConfig, out: &mut Outputs) -> Result<()> {
    let basis = sector_basis(cfg)?;
    let i_op = build_imbalance_operator(&basis, cfg.sector.n_p)?;
    let mut csv = Csv::new(&["lambda", "realization", "energy_per_atom", "mean", "std"]);
    for &lambda in &cfg.grids.lambdas {
        let runs = par_realizations(cfg.ensemble.count, |i| {
            let h = build_hamiltonian_tcd(&basis, &realization_model(cfg, lambda, i))?;
            eigenstate_imbalance_stats(&diagonalize_hermitian(&h)?, &i_op)
        })?;
        for (i, stats) in runs.iter().enumerate() {
            for s in stats {
                csv.row(&[lambda.into(), i.into(), s.energy_per_atom.into(), s.mean.into(), s.std.into()]);
            }
        }
    }
    out.write_csv("eigenstate_stats.csv", &csv)
}

#[derive(Serialize)]
struct HermitianSummary {
    lambda: f64,
    mean_r: f64,
    mean_r_stderr: f64,
    spacing_sup_goe: f64,
    spacing_sup_poisson: f64,
    n_levels: usize,
    realizations: usize,
    ramp: RampReport,
    has_ramp: bool,
}

fn spectral_stats_hermitian(cfg: &ExperimentConfig, out: &mut Outputs) -> Result<()> {
    let basis = sector_basis(cfg)?;
    let grid = sff_grid(cfg);
    let hist_header = ["lambda", "bin_center", "density", "reference_goe", "reference_poisson"];
    let mut spacing_csv = Csv::new(&hist_header);
    let mut ratio_csv = Csv::new(&hist_header);
    let mut sff_csv = Csv::new(&["lambda", "time", "value", "connected", "reference_goe", "reference_poisson"]);
    let mut summary = Vec::new();
    for &lambda in &cfg.grids.lambdas {
        let runs = par_realizations(cfg.ensemble.count, |i| {
            let h = build_hamiltonian_tcd(&basis, &realization_model(cfg, lambda, i))?;
            let bulk = select_bulk(&RealSpectrum::new(hermitian_eigenvalues(&h)?)?)?;
            Ok((gap_ratios(&bulk)?, unfold(&bulk, cfg.stats.unfolding_degree)?))
        })?;
        let (ratios, unfolded): (Vec<_>, Vec<_>) = runs.into_iter().unzip();

        let spacing = spacing_histogram(&unfolded, cfg.stats.spacing_bins)?;
        write_hist_rows(&mut spacing_csv, lambda, &spacing, p_goe_spacing, p_poisson_spacing);
        let pooled: Vec<f64> = ratios.iter().flat_map(|r| r.ratios.iter().copied()).collect();
        let ratio_hist = Histogram::from_samples(&pooled, cfg.stats.ratio_bins, 0.0, 1.0)?;
        write_hist_rows(&mut ratio_csv, lambda, &ratio_hist, p_goe_ratio, p_poisson_ratio);

        let curve = sff(&unfolded, &grid)?;
        let n = curve.n_levels;
        let nf = n as f64;
        for (k, &t) in curve.times.iter().enumerate() {
            sff_csv.row(&[
                lambda.into(),
                t.into(),
                (curve.values[k] / nf).into(),
                (curve.connected[k] / nf).into(),
                (sff_goe_reference(t, n) / nf).into(),
                (sff_poisson_reference(t, n) / nf).into(),
            ]);
        }
        let ramp = ramp_detector(&curve);
        let means: Vec<f64> = ratios.iter().map(|r| r.mean).collect();
        let (mean_r, mean_r_stderr) = mean_stderr(&means);
        summary.push(HermitianSummary {
            lambda,
            mean_r,
            mean_r_stderr,
            spacing_sup_goe: spacing.sup_distance(p_goe_spacing),
            spacing_sup_poisson: spacing.sup_distance(p_poisson_spacing),
            n_levels: n,
            realizations: unfolded.len(),
            has_ramp: ramp.has_ramp(),
            ramp,
        });
    }
    out.write_csv("spacing_hist.csv", &spacing_csv)?;
    out.write_csv("ratio_hist.csv", &ratio_csv)?;
    out.write_csv("sff.csv", &sff_csv)?;
    out.write_json("spectral_summary.json", &summary)
}

fn write_hist_rows(csv: &mut Csv, lambda: f64, h: &Histogram, a: fn(f64) -> f64, b: fn(f64) -> f64) {
    let (ra, rb) = (h.bin_averages(a), h.bin_averages(b));
    for (k, c) in h.bin_centers().iter().enumerate() {
        csv.row(&[lambda.into(), (*c).into(), h.densities[k].into(), ra[k].into(), rb[k].into()]);
    }
}

fn r_vs_lambda_sweep(cfg: &ExperimentConfig, out: &mut Outputs) -> Result<()> {
    let basis = sector_basis(cfg)?;
    let n_p = cfg.sector.n_p;
    let i_op = build_imbalance_operator(&basis, n_p)?;
    let psi0 = QuantumState::left_cavity(&basis, n_p)?;
    let grid = time_grid(cfg);
    let mut csv = Csv::new(&[
        "lambda",
        "mean_r",
        "stderr",
        "mean_imbalance",
        "imbalance_stderr",
        "realizations",
    ]);
    let mut sweep = Vec::new();
    for &lambda in &cfg.grids.lambdas {
        let runs = par_realizations(cfg.ensemble.count, |i| {
            let h = build_hamiltonian_tcd(&basis, &realization_model(cfg, lambda, i))?;
            let decomp = diagonalize_hermitian(&h)?;
            let bulk = select_bulk(&RealSpectrum::new(decomp.eigenvalues.clone())?)?;
            let r = gap_ratios(&bulk)?.mean;
            let tr = imbalance_trace(&decomp, &psi0, &grid, &i_op, cfg.grids.window_fraction)?;
            Ok((r, tr.steady_mean))
        })?;
        let (rs, imb): (Vec<f64>, Vec<f64>) = runs.into_iter().unzip();
        let (mr, ser) = mean_stderr(&rs);
        let (mi, sei) = mean_stderr(&imb);
        csv.row(&[lambda.into(), mr.into(), ser.into(), mi.into(), sei.into(), rs.len().into()]);
        sweep.push((lambda, mi));
    }
    out.write_csv("r_vs_lambda.csv", &csv)?;
    out.write_json("r_vs_lambda_critical.json", &critical_json(cfg, sweep))
}

fn imbalance_classical(cfg: &ExperimentConfig, out: &mut Outputs) -> Result<()> {
    let mut traces = Csv::new(&["lambda", "realization", "t", "imbalance"]);
    let mut steady = Csv::new(&["lambda", "realization", "steady_mean", "mean", "std"]);
    for &lambda in &cfg.grids.lambdas {
        let runs = par_realizations(cfg.ensemble.count, |i| {
            let params = realization_classical(cfg, lambda, i);
            let traj = integrate(&ClassicalState::all_in_left_cavity(&params), &params, &cfg.classical.integrator)?;
            classical_imbalance_trace(&traj, &params)
        })?;
        for (i, r) in runs.iter().enumerate() {
            for (t, v) in r.trace.times.iter().zip(&r.trace.values) {
                traces.row(&[lambda.into(), i.into(), (*t).into(), (*v).into()]);
            }
            steady.row(&[lambda.into(), i.into(), r.trace.steady_mean.into(), r.mean.into(), r.std.into()]);
        }
    }
    out.write_csv("imbalance_classical_trace.csv", &traces)?;
    out.write_csv("imbalance_classical_steady.csv", &steady)
}

/// One sampled initial state for classical ensemble member `index`.
fn sampled_state(cfg: &ExperimentConfig, params: &ClassicalParams, index: usize) -> Result<ClassicalState> {
    let c = &cfg.classical;
    let seed = seed_for(cfg.ensemble.base_seed ^ SAMPLER_STREAM, index as u64);
    let mut states = sample_states(params, c.target_energy, c.energy_tol, 1, seed, &c.sampler)?;
    Ok(states.remove(0))
}

#[derive(Serialize)]
struct StateRecord {
    lambda: f64,
    index: usize,
    energy: f64,
    state: [f64; crate::classical::STATE_DIM],
}

fn lyapunov_ensemble(cfg: &ExperimentConfig, out: &mut Outputs) -> Result<()> {
    let mut csv = Csv::new(&["lambda", "state", "energy", "exponent", "converged"]);
    let mut summary = Csv::new(&["lambda", "positive_fraction", "mean_exponent", "states"]);
    let mut records = Vec::new();
    for &lambda in &cfg.grids.lambdas {
        let runs = par_realizations(cfg.classical.n_states, |i| {
            let params = realization_classical(cfg, lambda, i);
            let state = sampled_state(cfg, &params, i)?;
            let res = lyapunov(&state, &params, &cfg.classical.lyapunov)?;
            Ok((state, classical_hamiltonian(&state, &params), res))
        })?;
        let mut positive = 0usize;
        let mut exps = Vec::with_capacity(runs.len());
        for (i, (state, energy, res)) in runs.iter().enumerate() {
            csv.row(&[lambda.into(), i.into(), (*energy).into(), res.exponent.into(), res.converged.into()]);
            if res.exponent > cfg.classical.positive_threshold {
                positive += 1;
            }
            exps.push(res.exponent);
            records.push(StateRecord {
                lambda,
                index: i,
                energy: *energy,
                state: state.to_array(),
            });
        }
        let (mean, _) = mean_stderr(&exps);
        summary.row(&[
            lambda.into(),
            (positive as f64 / runs.len() as f64).into(),
            mean.into(),
            runs.len().into(),
        ]);
    }
    out.write_csv("lyapunov.csv", &csv)?;
    out.write_csv("lyapunov_summary.csv", &summary)?;
    out.write_json("sampled_states.json", &records)
}

fn percentile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let i = pos.floor() as usize;
    let f = pos - i as f64;
    if i + 1 < sorted.len() {
        sorted[i] + f * (sorted[i + 1] - sorted[i])
    } else {
        sorted[sorted.len() - 1]
    }
}

fn classical_scatter(cfg: &ExperimentConfig, out: &mut Outputs) -> Result<()> {
    let mut csv = Csv::new(&["lambda", "state", "energy", "mean", "std"]);
    let mut summary = Csv::new(&["lambda", "p05", "p95", "width", "states"]);
    for &lambda in &cfg.grids.lambdas {
        let runs = par_realizations(cfg.classical.n_states, |i| {
            let params = realization_classical(cfg, lambda, i);
            let state = sampled_state(cfg, &params, i)?;
            let traj = integrate(&state, &params, &cfg.classical.integrator)?;
            let imb = classical_imbalance_trace(&traj, &params)?;
            Ok((classical_hamiltonian(&state, &params), imb.mean, imb.std))
        })?;
        for (i, (e, m, s)) in runs.iter().enumerate() {
            csv.row(&[lambda.into(), i.into(), (*e).into(), (*m).into(), (*s).into()]);
        }
        let mut means: Vec<f64> = runs.iter().map(|r| r.1).collect();
        means.sort_by(f64::total_cmp);
        let (lo, hi) = (percentile(&means, 0.05), percentile(&means, 0.95));
        summary.row(&[lambda.into(), lo.into(), hi.into(), (hi - lo).into(), means.len().into()]);
    }
    out.write_csv("classical_scatter.csv", &csv)?;
    out.write_csv("classical_scatter_summary.csv", &summary)
}

fn pooled_csr(spectra: &[ComplexSpectrum]) -> Result<CsrResult> {
    let parts = spectra.iter().map(csr).collect::<Result<Vec<_>>>()?;
    CsrResult::pooled(&parts)
}

fn windowed_reference(cfg: &ExperimentConfig, kind: ComplexEnsemble) -> Result<CsrResult> {
    let specs = reference_ensembles_nh(kind, cfg.stats.baseline_dim, cfg.stats.baseline_count, cfg.ensemble.base_seed)?;
    let windowed = specs
        .iter()
        .map(|s| window_select(s, cfg.stats.window))
        .collect::<Result<Vec<_>>>()?;
    pooled_csr(&windowed)
}

#[derive(Serialize)]
struct ComplexSummary {
    lambda: f64,
    mean_r: f64,
    mean_cos_theta: f64,
    samples: usize,
    duplicates: usize,
    r_sup_distance: BTreeMap<String, f64>,
    cos_theta_difference: BTreeMap<String, f64>,
    n_levels: f64,
    ramp: DsffRamp,
    heisenberg: Option<HeisenbergFit>,
}

/// Shared reduction of windowed complex spectra: CSR pairs and histograms
/// against two references, and the form factor with its fit.
fn complex_reduction(
    cfg: &ExperimentConfig,
    prefix: &str,
    refs: &[(&str, CsrResult)],
    per_lambda: &[(f64, Vec<ComplexSpectrum>)],
    out: &mut Outputs,
) -> Result<()> {
    let bins = cfg.stats.csr_bins;
    let mut pairs = Csv::new(&["lambda", "realization", "r", "theta"]);
    let mut header = vec!["lambda", "quantity", "bin_center", "density"];
    let ref_cols: Vec<String> = refs.iter().map(|(n, _)| format!("reference_{n}")).collect();
    header.extend(ref_cols.iter().map(|s| s.as_str()));
    let mut hist = Csv::new(&header);
    let mut dsff_csv = Csv::new(&["lambda", "tau", "value", "connected"]);
    let ref_r: Vec<Histogram> = refs.iter().map(|(_, r)| r.r_histogram(bins)).collect::<Result<_>>()?;
    let ref_t: Vec<Histogram> = refs.iter().map(|(_, r)| r.theta_histogram(bins)).collect::<Result<_>>()?;
    let tau = log_time_grid(cfg.grids.tau_min, cfg.grids.tau_max, cfg.grids.tau_points);
    let mut summary = Vec::new();

    for (lambda, spectra) in per_lambda {
        let lambda = *lambda;
        let parts = spectra.iter().map(csr).collect::<Result<Vec<_>>>()?;
        for (i, p) in parts.iter().enumerate() {
            for (r, t) in p.r.iter().zip(&p.theta) {
                pairs.row(&[lambda.into(), i.into(), (*r).into(), (*t).into()]);
            }
        }
        let pooled = CsrResult::pooled(&parts)?;
        let hr = pooled.r_histogram(bins)?;
        let ht = pooled.theta_histogram(bins)?;
        for (quantity, h, refs_h) in [("r", &hr, &ref_r), ("theta", &ht, &ref_t)] {
            for (k, c) in h.bin_centers().iter().enumerate() {
                let mut row: Vec<Cell> = vec![lambda.into(), quantity.into(), (*c).into(), h.densities[k].into()];
                row.extend(refs_h.iter().map(|rh| Cell::F(rh.densities[k])));
                hist.row(&row);
            }
        }
        let curve = dsff(spectra, &tau, cfg.stats.dsff_angle)?;
        let n = curve.n_levels;
        for (k, t) in tau.iter().enumerate() {
            dsff_csv.row(&[
                lambda.into(),
                (*t).into(),
                (curve.values[k] / n).into(),
                (curve.connected[k] / n).into(),
            ]);
        }
        let mut r_sup = BTreeMap::new();
        let mut cos_diff = BTreeMap::new();
        for ((name, r), rh) in refs.iter().zip(&ref_r) {
            r_sup.insert(name.to_string(), hr.sup_distance_to(rh)?);
            cos_diff.insert(name.to_string(), (pooled.mean_cos_theta - r.mean_cos_theta).abs());
        }
        summary.push(ComplexSummary {
            lambda,
            mean_r: pooled.mean_r,
            mean_cos_theta: pooled.mean_cos_theta,
            samples: pooled.r.len(),
            duplicates: pooled.duplicates,
            r_sup_distance: r_sup,
            cos_theta_difference: cos_diff,
            n_levels: n,
            ramp: detect_dsff_ramp(&curve, n),
            heisenberg: fit_heisenberg_time(&curve, n),
        });
    }
    out.write_csv(&format!("{prefix}_csr.csv"), &pairs)?;
    out.write_csv(&format!("{prefix}_csr_hist.csv"), &hist)?;
    out.write_csv(&format!("{prefix}_dsff.csv"), &dsff_csv)?;
    out.write_json(&format!("{prefix}_summary.json"), &summary)
}

fn write_spectra(rows: &mut Csv, lambda: f64, sector: &str, spectra: &[ComplexSpectrum]) {
    for (i, s) in spectra.iter().enumerate() {
        for z in &s.values {
            rows.row(&[lambda.into(), i.into(), sector.into(), z.re.into(), z.im.into()]);
        }
    }
}

fn liouvillian_stats(cfg: &ExperimentConfig, out: &mut Outputs) -> Result<()> {
    let basis = enumerate_truncated(cfg.truncation.n_cut, cfg.truncation.two_s);
    let n_op = build_number_operator(&basis)?;
    let sector_label = cfg
        .stats
        .liouvillian_sector
        .map_or_else(|| "all".to_string(), |k| k.to_string());
    let mut spectra_csv = Csv::new(&["lambda", "realization", "sector", "re", "im"]);
    let mut per_lambda = Vec::new();
    for &lambda in &cfg.grids.lambdas {
        let full = par_realizations(cfg.ensemble.count, |i| {
            let liou = build_liouvillian(&basis, &realization_model(cfg, lambda, i))?;
            match cfg.stats.liouvillian_sector {
                Some(k) => diagonalize_general(&sector_project(&liou, &n_op, k)?),
                None => diagonalize_general(&liou),
            }
        })?;
        write_spectra(&mut spectra_csv, lambda, &sector_label, &full);
        let windowed = full
            .iter()
            .map(|s| window_select(s, cfg.stats.window))
            .collect::<Result<Vec<_>>>()?;
        per_lambda.push((lambda, windowed));
    }
    out.write_csv("liouvillian_spectrum.csv", &spectra_csv)?;
    let refs = [
        ("ginue", windowed_reference(cfg, ComplexEnsemble::Ginue)?),
        ("poisson2d", windowed_reference(cfg, ComplexEnsemble::Poisson2d)?),
    ];
    complex_reduction(cfg, "liouvillian", &refs, &per_lambda, out)
}

/// Gain-loss model of a realization: explicit `Δ_u` when given, otherwise
/// `Δ_L = κ`, `Δ_R = −κ`.
fn gain_loss_model(cfg: &ExperimentConfig, lambda: f64, index: usize) -> ModelParams {
    let m = realization_model(cfg, lambda, index);
    if m.delta_left == 0.0 && m.delta_right == 0.0 {
        m.with_gain_loss(m.kappa)
    } else {
        m
    }
}

fn nh_stats(cfg: &ExperimentConfig, out: &mut Outputs) -> Result<()> {
    let basis = sector_basis(cfg)?;
    let sector_label = cfg.sector.n_p.to_string();
    let mut spectra_csv = Csv::new(&["lambda", "realization", "sector", "re", "im"]);
    let mut per_lambda = Vec::new();
    for &lambda in &cfg.grids.lambdas {
        let full = par_realizations(cfg.ensemble.count, |i| {
            diagonalize_general(&build_hamiltonian_nh(&basis, &gain_loss_model(cfg, lambda, i))?)
        })?;
        write_spectra(&mut spectra_csv, lambda, &sector_label, &full);
        let windowed = full
            .iter()
            .map(|s| window_select(s, cfg.stats.window))
            .collect::<Result<Vec<_>>>()?;
        per_lambda.push((lambda, windowed));
    }
    out.write_csv("nh_spectrum.csv", &spectra_csv)?;
    let refs = [
        ("ai_dagger", windowed_reference(cfg, ComplexEnsemble::AiDagger)?),
        ("poisson2d", windowed_reference(cfg, ComplexEnsemble::Poisson2d)?),
    ];
    complex_reduction(cfg, "nh", &refs, &per_lambda, out)
}

fn baselines(cfg: &ExperimentConfig, out: &mut Outputs) -> Result<()> {
    let (dim, count, seed) = (cfg.stats.baseline_dim, cfg.stats.baseline_count, cfg.ensemble.base_seed);
    let mut real = Csv::new(&["ensemble", "mean_r", "stderr", "dim", "count"]);
    let mut real_hist = Csv::new(&["ensemble", "bin_center", "density", "reference_goe", "reference_poisson"]);
    for (name, kind) in [("goe", RealEnsemble::Goe), ("poisson", RealEnsemble::Poisson1d)] {
        let specs = reference_ensembles(kind, dim, count, seed)?;
        let ratios = specs.iter().map(gap_ratios).collect::<Result<Vec<_>>>()?;
        let means: Vec<f64> = ratios.iter().map(|r| r.mean).collect();
        let (m, se) = mean_stderr(&means);
        real.row(&[name.into(), m.into(), se.into(), dim.into(), count.into()]);
        let pooled: Vec<f64> = ratios.iter().flat_map(|r| r.ratios.iter().copied()).collect();
        let h = Histogram::from_samples(&pooled, cfg.stats.ratio_bins, 0.0, 1.0)?;
        let (ga, pa) = (h.bin_averages(p_goe_ratio), h.bin_averages(p_poisson_ratio));
        for (k, c) in h.bin_centers().iter().enumerate() {
            real_hist.row(&[name.into(), (*c).into(), h.densities[k].into(), ga[k].into(), pa[k].into()]);
        }
    }
    let mut complex = Csv::new(&["ensemble", "mean_r", "mean_cos_theta", "samples", "dim", "count"]);
    let mut complex_hist = Csv::new(&["ensemble", "quantity", "bin_center", "density"]);
    for (name, kind) in [
        ("ginue", ComplexEnsemble::Ginue),
        ("ai_dagger", ComplexEnsemble::AiDagger),
        ("poisson2d", ComplexEnsemble::Poisson2d),
    ] {
        let r = windowed_reference(cfg, kind)?;
        complex.row(&[
            name.into(),
            r.mean_r.into(),
            r.mean_cos_theta.into(),
            r.r.len().into(),
            dim.into(),
            count.into(),
        ]);
        for (quantity, h) in [("r", r.r_histogram(cfg.stats.csr_bins)?), ("theta", r.theta_histogram(cfg.stats.csr_bins)?)] {
            for (k, c) in h.bin_centers().iter().enumerate() {
                complex_hist.row(&[name.into(), quantity.into(), (*c).into(), h.densities[k].into()]);
            }
        }
    }
    let mut reference = Csv::new(&["quantity", "x", "goe", "poisson"]);
    for k in 0..=100 {
        let r = k as f64 / 100.0;
        reference.row(&["ratio".into(), r.into(), p_goe_ratio(r).into(), p_poisson_ratio(r).into()]);
    }
    for k in 0..=100 {
        let s = 4.0 * k as f64 / 100.0;
        reference.row(&["spacing".into(), s.into(), p_goe_spacing(s).into(), p_poisson_spacing(s).into()]);
    }
    out.write_csv("baselines_real.csv", &real)?;
    out.write_csv("baselines_real_ratio_hist.csv", &real_hist)?;
    out.write_csv("baselines_complex.csv", &complex)?;
    out.write_csv("baselines_complex_hist.csv", &complex_hist)?;
    out.write_csv("baselines_reference_curves.csv", &reference)
}
