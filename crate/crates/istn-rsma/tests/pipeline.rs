use istn_rsma::channel::{read_ensemble_binary, write_ensemble_binary};
use istn_rsma::harness::{
    read_csv, run_sweep, run_trial, to_csv_string, trial_ensembles, CsitMode, ScenarioConfig, SweepAxis,
};
use istn_rsma::schemes::{evaluate, SchemePlans};
use istn_rsma::signal::{validate_allocation, SchemeKind};

fn small() -> ScenarioConfig {
    let mut cfg = ScenarioConfig::default();
    cfg.ks = 2;
    cfg.kt = 2;
    cfg.samples = 10;
    cfg.eval_samples = 30;
    cfg.trials = 2;
    cfg.sweep_axis = SweepAxis::KappaDb;
    cfg.sweep_values = vec![5.0, 30.0];
    cfg.schemes = vec![SchemeKind::MdpRsma, SchemeKind::RsmaOma];
    cfg
}

#[test]
fn sweep_is_reproducible_and_survives_a_csv_round_trip() {
    let cfg = small();
    let a = run_sweep(&cfg).unwrap();
    let b = run_sweep(&cfg).unwrap();
    let text = to_csv_string(&a).unwrap();
    assert_eq!(text, to_csv_string(&b).unwrap());
    assert_eq!(read_csv(text.as_bytes()).unwrap(), a);
    assert_eq!(a.rows.len(), 2 * 2 * 2);
    assert!(a.rows.iter().all(|r| r.min_rate >= 0.0 && !r.is_failed()));
}

#[test]
fn held_out_rates_are_decodable_after_rescaling() {
    let cfg = small();
    let outcome = run_trial(&cfg, 5.0, 1);
    let held = outcome.held_out.as_ref().unwrap();
    for run in &outcome.runs {
        let trace = run.trace.as_ref().unwrap();
        let eval = evaluate(&SchemePlans::new(run.scheme, held), &trace.solution, held, 1.0);
        validate_allocation(&eval.report, 1e-6).unwrap();
        let row = outcome.rows.iter().find(|r| r.scheme == run.scheme).unwrap();
        assert_eq!(row.min_rate, eval.min_rate());
        assert!(eval.min_rate() <= eval.unscaled_min_rate + 1e-12);
    }
}

#[test]
fn trial_ensembles_are_stable_under_serialisation() {
    let cfg = small();
    let (opt, held) = trial_ensembles(&cfg, 30.0, 0).unwrap();
    for ens in [&opt, &held] {
        let mut buf = Vec::new();
        write_ensemble_binary(ens, &mut buf).unwrap();
        assert_eq!(&read_ensemble_binary(buf.as_slice()).unwrap(), ens);
    }
    assert_eq!((opt.samples, held.samples), (10, 30));
}

#[test]
fn perfect_knowledge_helps_most_when_fading_is_strong() {
    let mut cfg = small();
    cfg.schemes = vec![SchemeKind::SdmaIstn];
    cfg.csit = CsitMode::Both;
    cfg.eval_samples = 1;
    cfg.trials = 4;
    cfg.sweep_values = vec![0.0, 40.0];
    let table = run_sweep(&cfg).unwrap();
    let gap = |kappa: f64| {
        let robust = table.select(kappa, SchemeKind::SdmaIstn, CsitMode::Robust);
        let perfect = table.select(kappa, SchemeKind::SdmaIstn, CsitMode::Perfect);
        robust.iter().zip(&perfect).map(|(r, p)| p.min_rate - r.min_rate).sum::<f64>() / robust.len() as f64
    };
    assert!(gap(40.0) < gap(0.0), "{} vs {}", gap(40.0), gap(0.0));
    assert!(gap(40.0).abs() < 0.05);
}
