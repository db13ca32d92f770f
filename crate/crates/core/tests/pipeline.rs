use sfbm::harness::{run_config, write_outputs, ExperimentConfig, Verdict};
use sfbm::Error;

fn config(body: &str) -> ExperimentConfig {
    ExperimentConfig::from_json(body).unwrap()
}

#[test]
fn continuous_run_writes_all_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(
        r#"{"scenario":"rate_continuous","d":1,"H":0.5,"B":{"kind":"identity"},"p":1,
            "t_grid":[64,128,256,512,1024],"replicas":8,"method":"exact_circle","seed":11}"#,
    );
    let out = run_config(&cfg).unwrap();
    assert_eq!(out.records.len(), 5 * 8);
    assert!(out.fit.slope < 0.0);
    write_outputs(&out, dir.path()).unwrap();

    let csv = std::fs::read_to_string(dir.path().join("results.csv")).unwrap();
    assert_eq!(csv.lines().count(), 41);
    assert!(csv.starts_with("scenario,t,replica,method,p,value"));
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["config"]["seed"], 11);
    let plot = std::fs::read_to_string(dir.path().join("plotdata.tsv")).unwrap();
    assert_eq!(plot.lines().count(), 6);
}

#[test]
fn seed_controls_the_sample() {
    let body = r#"{"scenario":"rate_continuous","d":2,"H":0.5,"B":{"kind":"stable","alpha":0.5},"p":1,
        "t_grid":[16,32,64,128],"replicas":3,"method":"fourier_upper","seed":SEED}"#;
    let a = run_config(&config(&body.replace("SEED", "1"))).unwrap();
    let b = run_config(&config(&body.replace("SEED", "1"))).unwrap();
    let c = run_config(&config(&body.replace("SEED", "2"))).unwrap();
    assert_eq!(a.records, b.records);
    assert_ne!(a.records, c.records);
}

#[test]
fn discrete_run_reports_prediction() {
    let cfg = config(
        r#"{"scenario":"rate_discrete","d":1,"H":0.5,"B":{"kind":"identity"},"p":1,"beta":1.0,
            "t_grid":[4,8,16,32],"replicas":6,"method":"exact_circle","seed":5}"#,
    );
    let out = run_config(&cfg).unwrap();
    assert!((out.prediction.exponent + 0.5).abs() < 1e-12);
    assert!(matches!(
        out.fit.verdict,
        Verdict::Match | Verdict::Mismatch | Verdict::LogRegime
    ));
}

#[test]
fn two_process_run_completes() {
    let cfg = config(
        r#"{"scenario":"two_process","d":1,"H":0.5,"B":{"kind":"stable","alpha":0.5},
            "B2":{"kind":"stable","alpha":0.9},"p":1,"t_grid":[8,16,32,64],"replicas":4,
            "method":"assignment","seed":9}"#,
    );
    let out = run_config(&cfg).unwrap();
    assert!(out.records.iter().all(|r| r.value >= 0.0));
}

#[test]
fn verification_scenarios_are_rejected_by_the_runner() {
    let cfg = config(
        r#"{"scenario":"verify_npoint","d":1,"H":0.5,"B":{"kind":"identity"},"p":1,
            "t_grid":[1,2,4,8],"replicas":2,"method":"exact_circle"}"#,
    );
    assert!(matches!(run_config(&cfg), Err(Error::Config(_))));
}
