//! End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
//! always exits 0 unless a criterion could not be evaluated at all; set
//! `TCD_ACCEPTANCE_STRICT=1` to turn a FAIL into a nonzero exit.

use std::path::{Path, PathBuf};
use std::time::Instant;

use faer::{c64, Mat};
use serde_json::{json, Value};
use tcd_core::basis::{enumerate_truncated, Basis};
use tcd_core::classical::{
    classical_excitation, classical_hamiltonian, equations_of_motion, integrate, sample_states, ClassicalParams,
    ClassicalState, IntegratorSettings, SamplerSettings, STATE_DIM,
};
use tcd_core::complex_stats::{fit_heisenberg_time, DsffCurve};
use tcd_core::dynamics::log_time_grid;
use tcd_core::hermitian_stats::{gap_ratios, reference_ensembles, RealEnsemble};
use tcd_core::lindblad::{
    build_liouvillian, conjugation_defect, diagonalize_general, liouvillian_from_operators, multiset_distance,
    sector_labels, sector_project, weak_symmetry_residual, zero_modes,
};
use tcd_core::operators::{build_annihilators, build_number_operator, ModelParams, OperatorMatrix};
use tcd_core::runner::{run, validate_config, MANIFEST_NAME};
use tcd_core::Result;

const GOE_R: f64 = 0.536;
const POISSON_R: f64 = 0.386;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Result<Verdict> {
    Ok(Verdict { pass, detail })
}

fn scratch(name: &str) -> PathBuf {
    let dir = Path::new(env!("CARGO_TARGET_TMPDIR")).join("acceptance").join(name);
    let _ = std::fs::remove_dir_all(&dir);
    dir
}

fn run_config(name: &str, doc: Value) -> Result<PathBuf> {
    let dir = scratch(name);
    run(&validate_config(&doc.to_string())?, &dir, None)?;
    Ok(dir)
}

fn read_json(dir: &Path, file: &str) -> Value {
    serde_json::from_slice(&std::fs::read(dir.join(file)).expect("runner output")).expect("valid json")
}

/// Numeric CSV body as rows of cells; non-numeric cells become NaN.
fn read_csv(dir: &Path, file: &str) -> Vec<Vec<f64>> {
    let text = std::fs::read_to_string(dir.join(file)).expect("runner output");
    text.lines()
        .skip(1)
        .map(|l| l.split(',').map(|c| c.parse().unwrap_or(f64::NAN)).collect())
        .collect()
}

fn by_lambda(summary: &Value, lambda: f64) -> &Value {
    summary
        .as_array()
        .and_then(|a| a.iter().find(|e| e["lambda"].as_f64() == Some(lambda)))
        .expect("summary entry")
}

fn f(v: &Value) -> f64 {
    v.as_f64().unwrap_or(f64::NAN)
}

fn rmt_baselines() -> Result<Verdict> {
    let mean_of = |kind| -> Result<f64> {
        let spectra = reference_ensembles(kind, 2000, 50, 2024)?;
        let means = spectra.iter().map(|s| gap_ratios(s).map(|g| g.mean)).collect::<Result<Vec<_>>>()?;
        Ok(means.iter().sum::<f64>() / means.len() as f64)
    };
    let goe = mean_of(RealEnsemble::Goe)?;
    let poisson = mean_of(RealEnsemble::Poisson1d)?;
    verdict(
        (goe - GOE_R).abs() <= 0.005 && (poisson - POISSON_R).abs() <= 0.005,
        format!("<r>_GOE = {goe:.4} (want {GOE_R} ± 0.005), <r>_Poisson = {poisson:.4} (want {POISSON_R} ± 0.005)"),
    )
}

const SWEEP: [f64; 9] = [2.0, 2.5, 3.0, 3.5, 4.0, 5.0, 6.0, 8.0, 10.0];

fn sweep_rows() -> Result<(Vec<Vec<f64>>, Value)> {
    let dir = run_config(
        "sweep",
        json!({
            "experiment": "r_vs_lambda_sweep",
            "sector": { "n_p": 25, "n_atoms": 10 },
            "ensemble": { "count": 20 },
            "grids": { "lambdas": SWEEP, "t_points": 400 }
        }),
    )?;
    Ok((read_csv(&dir, "r_vs_lambda.csv"), read_json(&dir, "r_vs_lambda_critical.json")))
}

fn chaos_transition(rows: &[Vec<f64>]) -> Result<Verdict> {
    let (first, last) = (&rows[0], &rows[rows.len() - 1]);
    // Decreasing up to noise: no step rises by more than twice its combined standard error.
    let rises = rows
        .windows(2)
        .filter(|w| w[1][1] - w[0][1] > 2.0 * w[0][2].hypot(w[1][2]))
        .count();
    let curve: Vec<String> = rows.iter().map(|r| format!("{}:{:.3}", r[0], r[1])).collect();
    verdict(
        (first[1] - GOE_R).abs() <= 0.02 && (last[1] - POISSON_R).abs() <= 0.04 && rises == 0 && last[1] < first[1],
        format!(
            "<r>(2J) = {:.4} ± {:.4} (want {GOE_R} ± 0.02), <r>(10J) = {:.4} (want {POISSON_R} ± 0.04), significant rises {rises}; curve [{}]",
            first[1],
            first[2],
            last[1],
            curve.join(" ")
        ),
    )
}

fn self_trapping(rows: &[Vec<f64>], critical: &Value) -> Result<Verdict> {
    let (low, high) = (rows[0][3], rows[rows.len() - 1][3]);
    let reference = f(&critical["reference"]);
    let lambda_c = critical["lambda_c"].as_f64();
    let within = lambda_c.is_some_and(|c| (c - reference).abs() <= 0.25 * reference);
    let curve: Vec<String> = rows.iter().map(|r| format!("{}:{:.3}", r[0], r[3])).collect();
    verdict(
        low < 0.15 && high > 0.75 && within,
        format!(
            "I(2J) = {low:.3} (< 0.15), I(10J) = {high:.3} (> 0.75), lambda_c = {} vs {reference:.3} ± 25%; curve [{}]",
            lambda_c.map_or("none".into(), |c| format!("{c:.3}")),
            curve.join(" ")
        ),
    )
}

fn spacing_and_sff() -> Result<Verdict> {
    let dir = run_config(
        "hermitian",
        json!({
            "experiment": "spectral_stats_hermitian",
            "sector": { "n_p": 25, "n_atoms": 10 },
            "ensemble": { "count": 20 },
            "grids": { "lambdas": [2.0, 10.0] }
        }),
    )?;
    let summary = read_json(&dir, "spectral_summary.json");
    let (chaotic, regular) = (by_lambda(&summary, 2.0), by_lambda(&summary, 10.0));
    let sup = f(&chaotic["spacing_sup_goe"]);
    let ramp_2 = chaotic["has_ramp"].as_bool() == Some(true);
    let ramp_10 = regular["has_ramp"].as_bool() == Some(true);
    verdict(
        sup <= 0.07 && ramp_2 && !ramp_10,
        format!("sup|P(s) - P_GOE| at 2J = {sup:.4} (<= 0.07), ramp at 2J {ramp_2}, ramp at 10J {ramp_10}"),
    )
}

fn excitation(s: &ClassicalState, p: &ClassicalParams) -> f64 {
    let (l, r) = classical_excitation(s, p.omega_c_left, p.omega_c_right);
    l + r
}

fn classical_conservation() -> Result<Verdict> {
    let settings = IntegratorSettings {
        t_end: 1e4,
        sample_stride: 10.0,
        ..IntegratorSettings::default()
    };
    let mut worst = [0.0f64; 3];
    for lambda in [2.0, 10.0] {
        let p = ClassicalParams::resonant(lambda, 2.5);
        let mut starts = vec![ClassicalState::all_in_left_cavity(&p)];
        starts.extend(sample_states(&p, Some(1.5), 1e-5, 3, 31, &SamplerSettings::default())?);
        for s0 in &starts {
            let traj = integrate(s0, &p, &settings)?;
            let (e0, n0) = (classical_hamiltonian(s0, &p), excitation(s0, &p));
            let (l0, r0) = s0.spin_norms();
            for s in &traj.states {
                let (l, r) = s.spin_norms();
                worst[0] = worst[0].max(((classical_hamiltonian(s, &p) - e0) / e0).abs());
                worst[1] = worst[1].max(((excitation(s, &p) - n0) / n0).abs());
                let norm = |a: f64, a0: f64| (a.sqrt() - a0.sqrt()).abs() / a0.sqrt();
                worst[2] = worst[2].max(norm(l, l0).max(norm(r, r0)));
            }
        }
    }

    let p = ClassicalParams {
        omega_s: 0.9,
        j_hop: 0.7,
        ..ClassicalParams::resonant(3.0, 2.5).with_cavities((1.08, 0.93))
    };
    let states = sample_states(&p, None, 1e-5, 50, 5, &SamplerSettings::default())?;
    let h = 1e-5;
    let mut eom_error = 0.0f64;
    for s in &states {
        let grad: Vec<f64> = (0..STATE_DIM)
            .map(|i| {
                let (mut up, mut down) = (s.to_array(), s.to_array());
                up[i] += h;
                down[i] -= h;
                (classical_hamiltonian(&ClassicalState::from_array(&up), &p)
                    - classical_hamiltonian(&ClassicalState::from_array(&down), &p))
                    / (2.0 * h)
            })
            .collect();
        let cross = |g: &[f64], v: [f64; 3]| [g[1] * v[2] - g[2] * v[1], g[2] * v[0] - g[0] * v[2], g[0] * v[1] - g[1] * v[0]];
        let sl = cross(&grad[2..5], [s.sx_left, s.sy_left, s.sz_left]);
        let sr = cross(&grad[7..10], [s.sx_right, s.sy_right, s.sz_right]);
        let want = [grad[1], -grad[0], sl[0], sl[1], sl[2], grad[6], -grad[5], sr[0], sr[1], sr[2]];
        let got = equations_of_motion(s, &p).to_array();
        for (a, b) in got.iter().zip(want) {
            eom_error = eom_error.max((a - b).abs());
        }
    }
    verdict(
        worst.iter().all(|&w| w <= 1e-8) && eom_error <= 1e-6,
        format!(
            "max relative drift over Jt = 1e4: energy {:.2e}, excitation {:.2e}, spin norm {:.2e} (<= 1e-8); EOM vs central difference {eom_error:.2e} (<= 1e-6)",
            worst[0], worst[1], worst[2]
        ),
    )
}

fn classical_transition() -> Result<Verdict> {
    let dir = run_config(
        "classical_imbalance",
        json!({
            "experiment": "imbalance_classical",
            "ensemble": { "count": 10 },
            "grids": { "lambdas": [2.0, 10.0] }
        }),
    )?;
    let rows = read_csv(&dir, "imbalance_classical_steady.csv");
    let steady = |lambda: f64| {
        let v: Vec<f64> = rows.iter().filter(|r| r[0] == lambda).map(|r| r[2]).collect();
        v.iter().sum::<f64>() / v.len() as f64
    };
    let (low, high) = (steady(2.0), steady(10.0));

    let dir = run_config(
        "lyapunov",
        json!({
            "experiment": "lyapunov_ensemble",
            "classical": { "n_states": 100, "lyapunov": { "m_steps": 3000 } },
            "grids": { "lambdas": [2.0, 10.0] }
        }),
    )?;
    let summary = read_csv(&dir, "lyapunov_summary.csv");
    let fraction = |lambda: f64| summary.iter().find(|r| r[0] == lambda).map_or(f64::NAN, |r| r[1]);
    let (chaotic, regular) = (fraction(2.0), fraction(10.0));
    verdict(
        low.abs() < 0.15 && high > 0.75 && chaotic >= 2.0 * regular,
        format!(
            "steady I(2J) = {low:.3}, I(10J) = {high:.3}; positive-exponent fraction {chaotic:.2} at 2J vs {regular:.2} at 10J (ratio {:.2}, want >= 2)",
            chaotic / regular
        ),
    )
}

fn liouvillian_structure() -> Result<Verdict> {
    let basis = enumerate_truncated(2, 2);
    let params = ModelParams {
        kappa: 1.0,
        ..ModelParams::resonant(1.0).with_cavities((1.03, 0.96))
    };
    let l = build_liouvillian(&basis, &params)?;
    let n = build_number_operator(&basis)?;
    let symmetry = weak_symmetry_residual(&l, &n)?;
    let mut spectrum = Vec::new();
    for k in sector_labels(&l, &n)? {
        spectrum.extend(diagonalize_general(&sector_project(&l, &n, k)?)?.values);
    }
    let modes = zero_modes(&spectrum, 1e-8);
    let conjugation = conjugation_defect(&spectrum);

    // Lossy two-level cavity: only the left mode has energy and a jump.
    let (kappa, omega) = (0.4f64, 1.3);
    let small = enumerate_truncated(1, 0);
    let (al, _) = build_annihilators(&small)?;
    let a = al.entries();
    let d = small.dim();
    let number = Mat::from_fn(d, d, |i, j| (0..d).map(|k| a[(k, i)].conj() * a[(k, j)]).sum::<c64>() * omega);
    let jump = Mat::from_fn(d, d, |i, j| a[(i, j)] * (2.0 * kappa).sqrt());
    let lossy = liouvillian_from_operators(
        &OperatorMatrix::new(small.tag(), number)?,
        &[OperatorMatrix::new(small.tag(), jump)?],
    )?;
    let analytic = [c64::new(0.0, 0.0), c64::new(-2.0 * kappa, 0.0), c64::new(-kappa, omega), c64::new(-kappa, -omega)];
    // The spectator right mode makes each eigenvalue fourfold.
    let want: Vec<c64> = analytic.iter().flat_map(|&z| [z; 4]).collect();
    let lossy_error = multiset_distance(&diagonalize_general(&lossy)?.values, &want).unwrap_or(f64::INFINITY);

    verdict(
        spectrum.len() == l.dim()
            && modes.max_real <= 1e-10
            && modes.count == 1
            && conjugation <= 1e-8
            && symmetry <= 1e-10
            && lossy_error <= 1e-12,
        format!(
            "dim {}, max Re {:.1e}, zero modes {}, conjugation defect {conjugation:.1e}, weak-U(1) residual {symmetry:.1e}, lossy-cavity limit error {lossy_error:.1e}",
            spectrum.len(),
            modes.max_real,
            modes.count
        ),
    )
}

fn non_hermitian_statistics() -> Result<Verdict> {
    let dir = run_config(
        "nh",
        json!({
            "experiment": "nh_stats",
            "model": { "kappa": 1.0 },
            "sector": { "n_p": 20, "n_atoms": 16 },
            "ensemble": { "count": 12 },
            "grids": { "lambdas": [2.0, 10.0] }
        }),
    )?;
    let summary = read_json(&dir, "nh_summary.json");
    let (chaotic, regular) = (by_lambda(&summary, 2.0), by_lambda(&summary, 10.0));
    let cos_2 = f(&chaotic["cos_theta_difference"]["ai_dagger"]);
    let sup_2 = f(&chaotic["r_sup_distance"]["ai_dagger"]);
    let cos_10 = f(&regular["cos_theta_difference"]["poisson2d"]);
    let sup_10 = f(&regular["r_sup_distance"]["poisson2d"]);
    let ramp_2 = chaotic["ramp"]["present"].as_bool() == Some(true);
    let ramp_10 = regular["ramp"]["present"].as_bool() == Some(true);

    let grid = log_time_grid(1e-3, 1e2, 400);
    let (m, levels) = (4.0, 500.0);
    let connected: Vec<f64> = grid.iter().map(|t| levels * (1.0 - (-m * t * t).exp())).collect();
    let synthetic = DsffCurve {
        tau_magnitudes: grid.clone(),
        direction_angle: 0.0,
        values: connected.clone(),
        connected,
        n_levels: levels,
        heisenberg_time: None,
    };
    let tau_h = fit_heisenberg_time(&synthetic, levels).map_or(f64::NAN, |fit| fit.tau_h);
    let tau_error = (tau_h - 1.0 / (2.0 * m.sqrt())).abs();

    verdict(
        cos_2 <= 0.03 && sup_2 < 0.07 && cos_10 <= 0.03 && sup_10 < 0.07 && ramp_2 && !ramp_10 && tau_error <= 1e-6,
        format!(
            "2J vs AI†: |d<cos>| {cos_2:.3}, sup|dP(r)| {sup_2:.3}; 10J vs Poisson2D: |d<cos>| {cos_10:.3}, sup|dP(r)| {sup_10:.3} (want <= 0.03, < 0.07); \
             <r>,<cos> at 2J = {:.3},{:.3}, at 10J = {:.3},{:.3}; DSFF ramp 2J {ramp_2}, 10J {ramp_10}; synthetic tau_H error {tau_error:.1e}",
            f(&chaotic["mean_r"]),
            f(&chaotic["mean_cos_theta"]),
            f(&regular["mean_r"]),
            f(&regular["mean_cos_theta"])
        ),
    )
}

fn determinism() -> Result<Verdict> {
    let configs = [
        json!({ "experiment": "r_vs_lambda_sweep", "sector": { "n_p": 12, "n_atoms": 4 }, "ensemble": { "count": 3 },
                "grids": { "lambdas": [2.0, 10.0], "t_points": 100 } }),
        json!({ "experiment": "nh_stats", "model": { "kappa": 1.0 }, "sector": { "n_p": 12, "n_atoms": 4 },
                "ensemble": { "count": 3 }, "grids": { "tau_points": 60 }, "stats": { "baseline_dim": 100, "baseline_count": 3 } }),
        json!({ "experiment": "lyapunov_ensemble", "classical": { "n_states": 4, "lyapunov": { "m_steps": 50 } } }),
        json!({ "experiment": "liouvillian_stats", "model": { "kappa": 1.0 }, "truncation": { "n_cut": 1, "two_s": 2 },
                "ensemble": { "count": 2 }, "grids": { "tau_points": 60 }, "stats": { "baseline_dim": 100, "baseline_count": 3 } }),
    ];
    let mut compared = 0usize;
    let mut differing = Vec::new();
    for (k, doc) in configs.into_iter().enumerate() {
        let a = run_config(&format!("repeat-{k}-a"), doc.clone())?;
        let b = run_config(&format!("repeat-{k}-b"), doc)?;
        let mut names: Vec<String> = std::fs::read_dir(&a)
            .expect("output directory")
            .map(|e| e.expect("entry").file_name().into_string().expect("utf-8 name"))
            .filter(|n| n.ends_with(".csv") && n != MANIFEST_NAME)
            .collect();
        names.sort();
        for name in names {
            compared += 1;
            if std::fs::read(a.join(&name)).ok() != std::fs::read(b.join(&name)).ok() {
                differing.push(name);
            }
        }
    }
    verdict(
        compared > 0 && differing.is_empty(),
        format!("{compared} CSV files compared across two runs, differing: {differing:?}"),
    )
}

fn main() {
    let strict = std::env::var("TCD_ACCEPTANCE_STRICT").is_ok_and(|v| v == "1");
    let mut results: Vec<(u8, &str, Result<Verdict>, f64)> = Vec::new();
    let mut timed = |id: u8, title: &'static str, check: &mut dyn FnMut() -> Result<Verdict>| {
        let start = Instant::now();
        let outcome = check();
        let secs = start.elapsed().as_secs_f64();
        report(id, title, &outcome, secs);
        results.push((id, title, outcome, secs));
    };

    timed(1, "RMT baselines", &mut rmt_baselines);
    let sweep = sweep_rows();
    match &sweep {
        Ok((rows, critical)) => {
            timed(2, "chaos-integrability transition", &mut || chaos_transition(rows));
            timed(3, "self-trapping transition", &mut || self_trapping(rows, critical));
        }
        Err(e) => {
            let msg = format!("{e}");
            timed(2, "chaos-integrability transition", &mut || Err(tcd_core::Error::InvalidParameter(msg.clone())));
            timed(3, "self-trapping transition", &mut || Err(tcd_core::Error::InvalidParameter(msg.clone())));
        }
    }
    timed(4, "spacing and SFF shapes", &mut spacing_and_sff);
    timed(5, "classical conservation", &mut classical_conservation);
    timed(6, "classical transition and Lyapunov mixedness", &mut classical_transition);
    timed(7, "Liouvillian structure", &mut liouvillian_structure);
    timed(8, "non-Hermitian statistics", &mut non_hermitian_statistics);
    timed(9, "determinism", &mut determinism);

    let passed = results.iter().filter(|r| matches!(&r.2, Ok(v) if v.pass)).count();
    let broken = results.iter().filter(|r| r.2.is_err()).count();
    println!("acceptance: {passed}/{} criteria pass", results.len());
    if broken > 0 || (strict && passed < results.len()) {
        std::process::exit(1);
    }
}

fn report(id: u8, title: &str, outcome: &Result<Verdict>, secs: f64) {
    match outcome {
        Ok(v) => println!(
            "criterion {id} {} {title}: {} [{secs:.0} s]",
            if v.pass { "PASS" } else { "FAIL" },
            v.detail
        ),
        Err(e) => println!("criterion {id} ERROR {title}: {e} [{secs:.0} s]"),
    }
}
