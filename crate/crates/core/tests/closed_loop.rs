use emc_core::baseline_pi::PiParams;
use emc_core::emc::{ContinuousEigenSpec, EmcController, EmcOptions};
use emc_core::netmodel::{generate_trace, TimingSpec};
use emc_core::plant::{DisturbanceProfile, Plant, PlantParams};
use emc_core::sim::{compute_metrics, run_loop, ControllerConfig, LoopSetup, ReferenceSchedule};

fn setup(controller: ControllerConfig) -> LoopSetup {
    LoopSetup {
        plant: PlantParams::default(),
        controller,
        disturbance: DisturbanceProfile::None,
        reference: ReferenceSchedule::new(vec![(0.0, 6.0), (5.0, -4.0)]).unwrap(),
    }
}

fn emc() -> ControllerConfig {
    ControllerConfig::Emc {
        spec: ContinuousEigenSpec::nominal(),
        options: EmcOptions::default(),
    }
}

#[test]
fn fixed_rate_tracking_reaches_one_count() {
    let p = PlantParams::default();
    let mut ctl = EmcController::new(p, ContinuousEigenSpec::nominal(), EmcOptions::default());
    let mut plant = Plant::new(p);
    let mut y = 0.0;
    let mut worst_tail = 0.0f64;
    for k in 0..500 {
        let out = ctl.step(0.01, 6.0, y).unwrap();
        y = plant.advance(out.u, &DisturbanceProfile::None, 0.01);
        if k >= 400 {
            worst_tail = worst_tail.max((y - 6.0).abs());
        }
    }
    assert!(worst_tail <= p.encoder_resolution(0.01), "{worst_tail}");
}

#[test]
fn asynchronous_loop_tracks_both_setpoints() {
    let trace = generate_trace(&TimingSpec::uniform(0.01, 0.03, 9), 10.0).unwrap();
    let recs = run_loop(&setup(emc()), &trace).unwrap();
    let res = PlantParams::default().encoder_resolution(0.01);
    let before = compute_metrics(
        &recs
            .iter()
            .filter(|r| r.t < 5.0)
            .copied()
            .collect::<Vec<_>>(),
        3.0,
        res,
        0.0,
    )
    .unwrap();
    let after = compute_metrics(&recs, 8.0, res, 5.0).unwrap();
    assert!(before.rmse_tracking < res, "{before:?}");
    assert!(after.rmse_tracking < res, "{after:?}");
    assert!(after.settling_time.is_some());
}

#[test]
fn same_trace_same_records() {
    let trace = generate_trace(&TimingSpec::uniform(0.01, 0.05, 3), 4.0).unwrap();
    let a = run_loop(&setup(emc()), &trace).unwrap();
    let b = run_loop(&setup(emc()), &trace).unwrap();
    assert_eq!(a, b);
}

#[test]
fn pi_baseline_tracks_on_fast_sampling() {
    let trace = generate_trace(&TimingSpec::uniform(0.01, 0.03, 9), 10.0).unwrap();
    let pi = ControllerConfig::Pi {
        params: PiParams::benchmark(),
        shaper_mu: ContinuousEigenSpec::nominal().mu_r,
    };
    let recs = run_loop(&setup(pi), &trace).unwrap();
    let m = compute_metrics(&recs, 1.0, 1.0, 5.0).unwrap();
    assert!(m.rmse_tracking < 1.0, "{m:?}");
}

#[test]
fn step_load_is_cancelled_by_rejection_command() {
    let trace = generate_trace(&TimingSpec::uniform(0.01, 0.03, 5), 10.0).unwrap();
    let mut s = setup(emc());
    s.reference = ReferenceSchedule::constant(6.0);
    s.disturbance = DisturbanceProfile::Step {
        magnitude: -2.0,
        start_time: 3.0,
    };
    let recs = run_loop(&s, &trace).unwrap();
    let tail: Vec<_> = recs.iter().filter(|r| r.t >= 7.0).collect();
    let mean = tail.iter().map(|r| r.u_d).sum::<f64>() / tail.len() as f64;
    let want = PlantParams::default().k_v * -2.0;
    assert!((mean - want).abs() < 0.05 * want.abs(), "{mean} vs {want}");
}
