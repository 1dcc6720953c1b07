use rand::Rng;
use rand_distr::StandardNormal;
use tailrisk::harness::{fit_slope, run, run_with_threads, write_outputs, Experiment, ExperimentConfig};
use tailrisk::rng::Stream;
use tailrisk::Error;

const ESTIMATE: &str = "\
experiment = estimate
seed = 3
replications = 8
n = 512
estimator = tmom
# tail parameters
risk.alpha = 0.1
risk.lambda = 1
risk.moment_bound = 5
dist.kind = pareto
dist.shape = 2.5
";

#[test]
fn config_file_roundtrip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.conf");
    std::fs::write(&path, ESTIMATE).unwrap();
    let cfg = ExperimentConfig::from_file(&path).unwrap();
    assert_eq!(cfg.experiment, Experiment::Estimate);
    assert_eq!((cfg.seed, cfg.replications, cfg.n), (3, 8, 512));
    let again: ExperimentConfig = cfg.to_text().parse().unwrap();
    assert_eq!(again, cfg);
}

#[test]
fn every_experiment_has_a_valid_default() {
    for e in Experiment::ALL {
        let cfg = ExperimentConfig::new(e);
        cfg.validate().unwrap();
        let back: ExperimentConfig = cfg.to_text().parse().unwrap();
        assert_eq!(back, cfg, "{}", e.as_str());
    }
}

#[test]
fn config_errors_name_line_and_key() {
    let text = "experiment = estimate\nrisk.alpha = 0.1\nrisk.alpah = 0.2\n";
    match text.parse::<ExperimentConfig>() {
        Err(Error::Config { line, key, .. }) => assert_eq!((line, key.as_str()), (3, "risk.alpah")),
        other => panic!("unexpected {other:?}"),
    }
    let text = "experiment = estimate\nn = 10\nn = 20\n";
    assert!(matches!(text.parse::<ExperimentConfig>(), Err(Error::Config { line: 3, .. })));
    let text = "experiment = estimate\nrisk.alpha = 1.5\n";
    assert!(text.parse::<ExperimentConfig>().is_err());
}

#[test]
fn outputs_are_written_and_reproducible() {
    let cfg: ExperimentConfig = ESTIMATE.parse().unwrap();
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let ra = run(&cfg).unwrap();
    let rb = run_with_threads(&cfg, 2).unwrap();
    let fa = write_outputs(a.path(), &cfg, &ra, 0.0).unwrap();
    let fb = write_outputs(b.path(), &cfg, &rb, 0.0).unwrap();
    assert_eq!(fa.len(), 3);
    for (x, y) in fa.iter().zip(&fb) {
        assert!(x.exists());
        assert_eq!(std::fs::read(x).unwrap(), std::fs::read(y).unwrap(), "{}", x.display());
    }
    let summary: serde_json::Value = serde_json::from_slice(&std::fs::read(a.path().join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["experiment"], "estimate");
    assert_eq!(summary["seed"], 3);
    let resolved: ExperimentConfig = std::fs::read_to_string(a.path().join("resolved_config.txt"))
        .unwrap()
        .parse()
        .unwrap();
    assert_eq!(resolved, cfg);
}

#[test]
fn seed_changes_the_rows() {
    let mut cfg: ExperimentConfig = ESTIMATE.parse().unwrap();
    let a = run(&cfg).unwrap().table;
    cfg.seed = 4;
    let b = run(&cfg).unwrap().table;
    assert_ne!(a.rows, b.rows);
}

#[test]
fn slope_interval_covers_truth() {
    let mut rng = Stream::new(21).rng();
    let mut covered = 0;
    for _ in 0..100 {
        let truth = rng.random_range(-1.5..0.5);
        let pts: Vec<(f64, f64)> = (6..12)
            .map(|k| {
                let x = 2f64.powi(k);
                let z: f64 = rng.sample(StandardNormal);
                (x, 3.0 * x.powf(truth) * (0.2 * z).exp())
            })
            .collect();
        let fit = fit_slope(&pts).unwrap();
        if (fit.slope - truth).abs() <= fit.halfwidth {
            covered += 1;
        }
    }
    assert!(covered >= 90, "covered {covered}/100");
}
