use std::process::Command;

fn tailrisk() -> Command {
    Command::new(env!("CARGO_BIN_EXE_tailrisk"))
}

#[test]
fn ifcheck_writes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("if.conf");
    std::fs::write(
        &conf,
        "experiment = ifcheck\nrisk.alpha = 0.1\ninfluence.noise_sds = 1, 2, 4\ninfluence.eps_grid = 0.01, 0.001\n",
    )
    .unwrap();
    let out = dir.path().join("out");
    let status = tailrisk()
        .args(["ifcheck", "--config"])
        .arg(&conf)
        .arg("--out")
        .arg(&out)
        .args(["--seed", "7", "--threads", "1"])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    for f in ["rows.csv", "summary.json", "resolved_config.txt"] {
        assert!(out.join(f).exists(), "{f} missing");
    }
    let resolved = std::fs::read_to_string(out.join("resolved_config.txt")).unwrap();
    assert!(resolved.contains("seed = 7"));
}

#[test]
fn bad_config_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("bad.conf");
    std::fs::write(&conf, "experiment = estimate\nrisk.alpha = 0.1\nbogus = 1\n").unwrap();
    let out = tailrisk()
        .args(["estimate", "--config"])
        .arg(&conf)
        .arg("--out")
        .arg(dir.path().join("o"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 3") && err.contains("bogus"), "{err}");
}

#[test]
fn help_lists_every_experiment() {
    let out = tailrisk().arg("--help").output().unwrap();
    let text = String::from_utf8_lossy(&out.stdout);
    for e in ["estimate", "rate-sweep", "contam-sweep", "erm", "bk", "stability", "ifcheck", "flip", "dep-sweep"] {
        assert!(text.contains(e), "{e}");
    }
}
