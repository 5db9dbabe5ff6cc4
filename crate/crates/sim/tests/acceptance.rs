//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use emc_core::baseline_pi::{pi_step, PiParams, PiState};
use emc_core::emc::{
    build_matrices, control_law, controller_closed_loop, emc_step, model_predict,
    observer_closed_loop, observer_correct, reference_closed_loop, reference_step, schedule_gains,
    ContinuousEigenSpec, ControllerMatrix, DisturbancePole, EmcOptions, EmcState,
};
use emc_core::netmodel::{generate_trace, TimingSpec};
use emc_core::numerics::{eigenvalues, poly_from_roots, solve_linear, zoh_discretize, Mat, Vector};
use emc_core::plant::{
    measure_speed, plant_step, tf_coefficients, DisturbanceProfile, PlantParams, PlantState,
};
use emc_core::sim::{compute_metrics, ReferenceSchedule, SampleRecord};
use emc_core::stability::{spectrum_deviation, sweep as stability_sweep};
use emc_sim::commands;
use emc_sim::config::{presets, Scenario};
use emc_sim::runner::{self, mean_rmse_by_ts_max};
use num_complex::Complex64;

type Command = fn(&Scenario, &Path) -> Result<Vec<PathBuf>, emc_sim::SimError>;
type Criterion = (&'static str, &'static str, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn preset(name: &str) -> Scenario {
    Scenario::parse(presets::by_name(name).unwrap()).unwrap()
}

fn nominal() -> ContinuousEigenSpec {
    ContinuousEigenSpec::nominal()
}

fn c1_coefficient_anchor() -> Outcome {
    let c = tf_coefficients(&PlantParams::default(), 0.01);
    let poles = c.poles();
    let errs = [
        (c.beta0 - 0.1313).abs(),
        (c.alpha0 + 0.1471).abs(),
        (c.alpha1 + 0.4835).abs(),
        (poles[0].re + 0.212).abs() + poles[0].im.abs(),
        (poles[1].re - 0.695).abs() + poles[1].im.abs(),
    ];
    let worst = errs.iter().cloned().fold(0.0, f64::max);
    outcome(
        worst <= 1e-3,
        format!(
            "beta0={:.5} alpha0={:.5} alpha1={:.5} poles=[{:.5}, {:.5}] max err={worst:.2e} (tol 1e-3)",
            c.beta0, c.alpha0, c.alpha1, poles[0].re, poles[1].re
        ),
    )
}

fn random_intervals() -> Vec<f64> {
    let trace = generate_trace(&TimingSpec::uniform(0.005, 0.2, 20_240_101), 30.0).unwrap();
    trace.intervals[..100].to_vec()
}

fn c2_placement_eigenvalues() -> Outcome {
    let p = PlantParams::default();
    let spec = nominal();
    let mut worst = (0.0f64, 0.0f64, 0.0f64);
    for ts in random_intervals() {
        let m = build_matrices(&p, ts, DisturbancePole::AsPrinted).unwrap();
        let g = schedule_gains(&spec, &m).unwrap();
        let t = spec.discrete(ts);
        let k = controller_closed_loop(&m, &g, ControllerMatrix::Conventional);
        worst.0 = worst
            .0
            .max((reference_closed_loop(&m, &g) - t.lambda_r).abs());
        worst.1 = worst
            .1
            .max(spectrum_deviation(&eigenvalues(&k).unwrap(), &t.lambda_k));
        worst.2 = worst.2.max(spectrum_deviation(
            &eigenvalues(&observer_closed_loop(&m, &g)).unwrap(),
            &t.lambda_n,
        ));
    }
    let max = worst.0.max(worst.1).max(worst.2);
    outcome(
        max < 1e-9,
        format!(
            "100 intervals in [0.005, 0.2]: max |eig - target| R={:.1e} K={:.1e} N={:.1e} (tol 1e-9)",
            worst.0, worst.1, worst.2
        ),
    )
}

fn c2b_placement_charpoly() -> Outcome {
    let p = PlantParams::default();
    let spec = nominal();
    let real = |v: &[f64]| {
        v.iter()
            .map(|&x| Complex64::new(x, 0.0))
            .collect::<Vec<_>>()
    };
    let mut worst = 0.0f64;
    for ts in random_intervals() {
        let m = build_matrices(&p, ts, DisturbancePole::AsPrinted).unwrap();
        let g = schedule_gains(&spec, &m).unwrap();
        let t = spec.discrete(ts);
        worst = worst.max((reference_closed_loop(&m, &g) - t.lambda_r).abs());
        let pairs = [
            (
                controller_closed_loop(&m, &g, ControllerMatrix::Conventional),
                real(&t.lambda_k),
            ),
            (observer_closed_loop(&m, &g), real(&t.lambda_n)),
        ];
        for (mat, roots) in pairs {
            let got = mat.characteristic_polynomial().unwrap();
            let want = poly_from_roots(&roots).unwrap();
            for (a, b) in got.coeffs().iter().zip(want.coeffs()) {
                worst = worst.max((a - b).abs());
            }
        }
    }
    outcome(
        worst < 1e-9,
        format!("same intervals, characteristic-polynomial coefficients: max err={worst:.1e} (tol 1e-9)"),
    )
}

fn c3_stability_sweep() -> Outcome {
    let r = stability_sweep(
        &nominal(),
        &PlantParams::default(),
        &EmcOptions::default(),
        0.01,
        0.03,
        41,
    )
    .unwrap();
    let first_n = r.lambda_n[0].iter().map(|z| z.norm()).fold(0.0, f64::max);
    let target = (-0.1438f64).exp();
    let pass = r.all_stable
        && (r.max_lambda_n_modulus() - target).abs() <= 1e-4
        && first_n == r.max_lambda_n_modulus();
    outcome(
        pass,
        format!(
            "all_stable={} max modulus={:.5} max |lambda_N|={:.5} at ts={} (target {target:.5}, tol 1e-4)",
            r.all_stable,
            r.max_modulus,
            r.max_lambda_n_modulus(),
            r.ts_grid[0]
        ),
    )
}

fn c4_observer_fidelity() -> Outcome {
    let sc = preset("distrej");
    let run = runner::run_scenario(&sc).unwrap();
    let res = sc.plant.encoder_resolution(sc.timing.ts_min);
    let max_all = run.records.iter().map(|r| r.e_m.abs()).fold(0.0, f64::max);
    let m = run.metrics;
    outcome(
        m.rms_model_error <= 0.8726 && max_all <= 3.0 * 0.8726,
        format!(
            "RMS e_m={:.4} for t>={} (tol 0.8726), max |e_m|={:.4} whole run (tol {:.4}), resolution={res:.4}",
            m.rms_model_error,
            m.window_start,
            max_all,
            3.0 * 0.8726
        ),
    )
}

fn c5_disturbance_rejection() -> Outcome {
    let mut sc = preset("distrej");
    sc.reference = ReferenceSchedule::constant(6.0);
    let d = 1.5;
    sc.disturbance = DisturbanceProfile::Step {
        magnitude: d,
        start_time: 5.0,
    };
    let run = runner::run_scenario(&sc).unwrap();
    let res = sc.plant.encoder_resolution(sc.timing.ts_min);
    let m = compute_metrics(&run.records, 7.0, res, 5.0).unwrap();
    let tail: Vec<&SampleRecord> = run.records.iter().filter(|r| r.t >= 8.0).collect();
    let mean_ud = tail.iter().map(|r| r.u_d).sum::<f64>() / tail.len() as f64;
    let cancel = sc.plant.k_v * d;
    let residual = (mean_ud - cancel).abs() / cancel;
    let spread = tail
        .iter()
        .map(|r| (r.u_d - mean_ud).abs())
        .fold(0.0, f64::max)
        / cancel;
    outcome(
        m.rmse_tracking <= res && residual < 0.05,
        format!(
            "step {d} at 5 s: RMS(ybar - y) t>=7 s={:.4} (tol {res:.4}); mean u_d t>=8 s={mean_ud:.4} vs k_v*d={cancel:.4}, residual={:.2}% (tol 5%), max deviation {:.2}%",
            m.rmse_tracking,
            residual * 100.0,
            spread * 100.0
        ),
    )
}

fn c6_critical_timing() -> Outcome {
    let sc = preset("critical");
    let runs = runner::sweep(&sc, &sc.sweep_ts_max, sc.sweep_repeats).unwrap();
    let means = mean_rmse_by_ts_max(&runs);
    let rmse: Vec<f64> = means.iter().map(|m| m.1).collect();
    let monotone = rmse.windows(2).all(|w| w[1] >= w[0]);
    let ratio = rmse[3] / rmse[2];
    outcome(
        monotone && ratio >= 1.2,
        format!(
            "mean RMSE over {} seeds at ts_max {:?}: {:?}; non-decreasing={monotone}, RMSE(0.20)/RMSE(0.15)={ratio:.3} (tol >= 1.2)",
            sc.sweep_repeats,
            means.iter().map(|m| m.0).collect::<Vec<_>>(),
            rmse.iter().map(|v| format!("{v:.4}")).collect::<Vec<_>>()
        ),
    )
}

fn c7_benchmark() -> Outcome {
    let sc = preset("benchmark");
    let runs = runner::benchmark(&sc).unwrap();
    let mut pass = runs.len() >= 5;
    let mut parts = Vec::new();
    for b in &runs {
        let (e, p) = (&b.emc.metrics, &b.pi.metrics);
        pass &= e.rmse_tracking < 0.7 * p.rmse_tracking && e.rms_u_trk < p.rms_u_trk;
        parts.push(format!(
            "seed {}: RMSE emc={:.3} pi={:.3} u_trk emc={:.3} pi={:.3}",
            b.seed, e.rmse_tracking, p.rmse_tracking, e.rms_u_trk, p.rms_u_trk
        ));
    }
    outcome(
        pass,
        format!(
            "need RMSE_emc < 0.7 RMSE_pi and lower u_trk RMS on every seed; {}",
            parts.join("; ")
        ),
    )
}

fn same_files(a: &Path, b: &Path, written: &[PathBuf]) -> bool {
    written.iter().all(|p| {
        let name = p.strip_prefix(a).unwrap();
        std::fs::read(p).unwrap() == std::fs::read(b.join(name)).unwrap()
    })
}

fn c8_determinism() -> Outcome {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let mut files = 0;
    let mut pass = true;
    for name in ["distrej", "critical", "benchmark"] {
        let sc = preset(name);
        let runs: [Command; 3] = [commands::simulate, commands::benchmark, commands::stability];
        for run in runs {
            let wa = run(&sc, a.path()).unwrap();
            run(&sc, b.path()).unwrap();
            pass &= same_files(a.path(), b.path(), &wa);
            files += wa.len();
        }
        if name == "critical" {
            let wa = commands::sweep(&sc, &[], a.path()).unwrap();
            commands::sweep(&sc, &[], b.path()).unwrap();
            pass &= same_files(a.path(), b.path(), &wa);
            files += wa.len();
        }
    }
    outcome(
        pass,
        format!("{files} CSV files written twice per preset, byte-identical={pass}"),
    )
}

fn c9_basic_cases() -> Outcome {
    let p = PlantParams::default();
    let ts = 0.01;
    let m = build_matrices(&p, ts, DisturbancePole::AsPrinted).unwrap();
    let g = schedule_gains(&nominal(), &m).unwrap();
    let zero = EmcState::default();
    let c = Complex64::new;
    let mut checks: Vec<(&str, bool)> = Vec::new();

    checks.push((
        "empty product",
        poly_from_roots(&[]).unwrap().coeffs() == [1.0],
    ));
    checks.push((
        "identity eigenvalues",
        eigenvalues(&Mat::identity(2)).unwrap() == [c(1.0, 0.0), c(1.0, 0.0)],
    ));
    let ev = eigenvalues(&Mat::diag(&[0.695, -0.212])).unwrap();
    checks.push((
        "diagonal eigenvalues",
        (ev[0] - c(-0.212, 0.0)).norm() < 1e-15 && (ev[1] - c(0.695, 0.0)).norm() < 1e-15,
    ));
    let b = Vector::from_slice(&[3.0, -1.0]);
    checks.push((
        "identity solve",
        solve_linear(&Mat::identity(2), &b).unwrap().as_slice() == b.as_slice(),
    ));
    checks.push((
        "diagonal solve",
        solve_linear(&Mat::diag(&[2.0, 4.0]), &Vector::from_slice(&[2.0, 8.0]))
            .unwrap()
            .as_slice()
            == [1.0, 2.0],
    ));
    let (ad, bd) =
        zoh_discretize(&Mat::zeros(2, 2), &Vector::from_slice(&[1.0, 2.0]), 0.3).unwrap();
    checks.push((
        "zero-matrix ZOH",
        ad == Mat::identity(2) && (bd[0] - 0.3).abs() < 1e-15 && (bd[1] - 0.6).abs() < 1e-15,
    ));
    let thin = PlantParams { tau_a: 1e-12, ..p };
    let lim = 0.01 / (p.k_v * p.tau_m);
    checks.push((
        "tau_a -> 0 limit of beta0",
        (tf_coefficients(&thin, 0.01).beta0 - lim).abs() < 1e-6 * lim,
    ));
    checks.push((
        "plant at rest stays at rest",
        plant_step(
            &PlantState::default(),
            &p,
            0.0,
            &DisturbanceProfile::None,
            0.0,
            0.02,
        ) == PlantState::default(),
    ));
    checks.push((
        "zero count change",
        measure_speed(&PlantState::default(), &PlantState::default(), &p, 0.01) == 0.0,
    ));
    let tiny = build_matrices(&p, 1e-12, DisturbancePole::AsPrinted).unwrap();
    checks.push((
        "ts -> 0 limit",
        (tiny.a_c - 1.0).abs() < 1e-9
            && (tiny.a_d[(0, 0)] - 1.0).abs() < 1e-9
            && tiny.a_d[(0, 1)].abs() < 1e-9,
    ));
    let ad_ev = eigenvalues(&m.a_d).unwrap();
    checks.push((
        "A_d eigenvalues 1+ts",
        ad_ev.iter().all(|z| (z - c(1.0 + ts, 0.0)).norm() < 1e-12),
    ));
    let unit = ContinuousEigenSpec {
        mu_k: [0.0, 0.0],
        ..nominal()
    };
    checks.push((
        "unit tracking targets give k_i = 0",
        schedule_gains(&unit, &m).unwrap().k_i == 0.0,
    ));
    let open = ContinuousEigenSpec {
        mu_n: [m.a_c.ln() / ts, (1.0 + ts).ln() / ts, (1.0 + ts).ln() / ts],
        ..nominal()
    };
    let l = schedule_gains(&open, &m).unwrap().l;
    checks.push((
        "open-loop estimator targets give L = 0",
        l.iter().all(|v| v.abs() < 1e-9),
    ));
    let s = EmcState { x_c: 2.5, ..zero };
    let (w, e) = observer_correct(&s, &m, &g, 2.5);
    checks.push(("y = x_c gives e_m = 0", e == 0.0 && w == [0.0; 3]));
    let g123 = emc_core::emc::GainSet {
        l: [1.0, 2.0, 3.0],
        ..g
    };
    let (w, e) = observer_correct(&zero, &m, &g123, 0.5);
    checks.push(("w_bar = L e_m", e == 0.5 && w == [0.5, 1.0, 1.5]));
    checks.push((
        "model at rest",
        model_predict(&zero, &m, 0.0, &[0.0; 3]) == zero,
    ));
    checks.push((
        "one volt step",
        model_predict(&zero, &m, 1.0, &[0.0; 3]).x_c == m.b_c,
    ));
    checks.push((
        "reference at rest",
        reference_step(&zero, &g, 0.0) == (0.0, 0.0, 0.0),
    ));
    checks.push((
        "reference one step",
        (reference_step(&zero, &g, 6.0).0 - m.b_c * g.n_r * 6.0).abs() < 1e-15,
    ));
    checks.push((
        "control law at rest",
        control_law(&zero, &g, 0.0, p.v_max).u == 0.0,
    ));
    let unit_err = EmcState { x_ref: 1.0, ..zero };
    checks.push((
        "u_trk = k_p",
        control_law(&unit_err, &g, 0.0, p.v_max).u_trk == g.k_p,
    ));
    let out = emc_step(&zero, &p, &nominal(), &EmcOptions::default(), ts, 0.0, 0.0).unwrap();
    checks.push(("EMC at rest", out.u == 0.0 && out.state == zero));
    let pi = PiParams::benchmark();
    checks.push((
        "PI at rest",
        pi_step(&PiState::default(), &pi, 0.0, 0.0, ts).1.u == 0.0,
    ));
    let big = PiState { integral: 10.0 };
    let (next, o) = pi_step(&big, &pi, 1.0, 0.0, ts);
    checks.push((
        "PI anti-windup",
        o.u == pi.v_max && next.integral == big.integral,
    ));
    let degenerate = generate_trace(&TimingSpec::uniform(0.01, 0.01, 3), 1.0).unwrap();
    checks.push((
        "degenerate timing range",
        degenerate.intervals.iter().all(|&t| t == 0.01),
    ));
    let lossless = generate_trace(&TimingSpec::uniform(0.01, 0.2, 3), 5.0).unwrap();
    checks.push(("no loss flags", lossless.loss_flags.iter().all(|&l| !l)));
    let on_circle = ContinuousEigenSpec {
        mu_r: 0.0,
        ..nominal()
    };
    checks.push((
        "zero eigenvalue not stable",
        !stability_sweep(&on_circle, &p, &EmcOptions::default(), 0.01, 0.03, 3)
            .unwrap()
            .all_stable,
    ));
    let rec = |y_ref: f64, y: f64, t: f64| SampleRecord {
        k: 0,
        t,
        ts,
        r_bar: y_ref,
        y_ref,
        y_true: y,
        y_meas: y,
        y_m: y,
        e_m: 0.0,
        e_bar: 0.0,
        u: 0.0,
        u_trk: 0.0,
        u_d: 0.0,
        u_ff: 0.0,
        x_d1: 0.0,
        x_d2: 0.0,
        lost: false,
    };
    let exact: Vec<_> = (0..5).map(|i| rec(2.0, 2.0, i as f64 * ts)).collect();
    checks.push((
        "rmse of exact tracking",
        compute_metrics(&exact, 0.0, 1.0, 0.0)
            .unwrap()
            .rmse_tracking
            == 0.0,
    ));
    let offset: Vec<_> = (0..5).map(|i| rec(3.0, 2.0, i as f64 * ts)).collect();
    checks.push((
        "rmse of unit offset",
        compute_metrics(&offset, 0.0, 1.0, 0.0)
            .unwrap()
            .rmse_tracking
            == 1.0,
    ));

    let failed: Vec<&str> = checks.iter().filter(|c| !c.1).map(|c| c.0).collect();
    outcome(
        failed.is_empty(),
        format!(
            "{}/{} cases hold{}",
            checks.len() - failed.len(),
            checks.len(),
            if failed.is_empty() {
                String::new()
            } else {
                format!("; failing: {}", failed.join(", "))
            }
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("1", "coefficient anchor", c1_coefficient_anchor),
        ("2", "pole placement, eigenvalues", c2_placement_eigenvalues),
        (
            "2b",
            "pole placement, characteristic polynomial",
            c2b_placement_charpoly,
        ),
        ("3", "stability sweep", c3_stability_sweep),
        ("4", "observer fidelity", c4_observer_fidelity),
        ("5", "disturbance rejection", c5_disturbance_rejection),
        ("6", "critical-timing degradation", c6_critical_timing),
        ("7", "benchmark ordering", c7_benchmark),
        ("8", "determinism", c8_determinism),
        ("9", "basic cases", c9_basic_cases),
    ];
    let mut failed = 0;
    for (id, name, check) in criteria {
        let start = Instant::now();
        let o = check();
        let ms = start.elapsed().as_millis();
        failed += usize::from(!o.pass);
        println!(
            "[{}] criterion {id} {name}: {} ({ms} ms)",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
