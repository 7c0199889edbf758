use freqbc_harness::study::richardson;
use freqbc_harness::{fit_rate, results_csv, run_sweep, FitError, HarnessError, Status, StudyConfig, StudyRecord};

fn quick() -> StudyConfig {
    let text = std::fs::read_to_string(format!("{}/../../configs/quick.json", env!("CARGO_MANIFEST_DIR"))).unwrap();
    StudyConfig::from_json(&text).unwrap()
}

#[test]
fn fit_recovers_an_exact_power_law() {
    let xs = [0.5, 0.25, 0.125, 0.0625];
    let ys: Vec<f64> = xs.iter().map(|x: &f64| 3.0 * x.powf(1.5)).collect();
    let f = fit_rate(&xs, &ys).unwrap();
    assert!((f.slope - 1.5).abs() < 1e-12);
    assert!((f.intercept - 3f64.ln()).abs() < 1e-12);
    assert!((f.r_squared - 1.0).abs() < 1e-12);
    for r in &f.ratios {
        assert!((r - 0.5f64.powf(1.5)).abs() < 1e-12);
    }
    assert_eq!(fit_rate(&xs[..2], &ys[..2]), Err(FitError::TooFew(2)));
    assert!(matches!(fit_rate(&xs, &ys[..3]), Err(FitError::Length(4, 3))));
    assert!(matches!(fit_rate(&[1.0, 2.0, 3.0], &[1.0, 0.0, 1.0]), Err(FitError::NonPositive { .. })));
}

#[test]
fn richardson_is_exact_for_pure_h_squared() {
    let levels = vec![vec![1.0 + 4.0], vec![1.0 + 1.0]];
    assert_eq!(richardson(&levels), vec![1.0]);
    assert!(richardson(&[]).is_empty());
}

#[test]
fn empty_sweep_is_a_config_error() {
    let mut cfg = quick();
    cfg.sweep.clear();
    let e = run_sweep(&cfg, 1).unwrap_err();
    assert!(matches!(e, HarnessError::Config(_)));
    assert_eq!(e.exit_code(), 2);
}

#[test]
fn config_round_trips_through_json() {
    let cfg = quick();
    let back = StudyConfig::from_json(&cfg.to_json()).unwrap();
    assert_eq!(back.to_json(), cfg.to_json());
    assert!(StudyConfig::from_json(r#"{"name": "x", "bogus": 1}"#).is_err());
}

#[test]
fn failed_points_keep_their_rows() {
    let failed: StudyRecord = serde_json::from_value(serde_json::json!({
        "n": 8, "epsilon": 0.125, "eta": 0.0, "ln_eta": 0.0, "mu": 0.0, "robin_a": 0.0, "sigma": 0.0, "scale": 0.0,
        "h_max": 0.0, "vertices": 0, "status": "failed", "reason": "mesh: too thin", "modes": []
    }))
    .unwrap();
    assert_eq!(failed.status, Status::Failed);
    let csv = results_csv(&[failed], 2);
    let rows: Vec<&str> = csv.lines().skip(1).collect();
    assert_eq!(rows, vec!["8,,,,,,1,,,,,,,failed", "8,,,,,,2,,,,,,,failed"]);
}
