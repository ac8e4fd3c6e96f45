use std::process::{Command, Output};

fn henon4(args: &[&str], out: &std::path::Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_henon4"))
        .args(args)
        .arg("--out-dir")
        .arg(out)
        .env_remove("HENON4_OUT_DIR")
        .output()
        .unwrap()
}

#[test]
fn invalid_input_exits_2_without_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    for args in [
        &["threshold-scan", "--sigma", "sigma_alpha"][..],
        &["symmetry-sweep", "--m", "0"],
        &["symmetry-sweep", "--alphas", "16,32,64"],
        &["moser-blowup", "--epsilons", "1e-2:1e-10:linear"],
        &["moser-blowup", "--bc", "dirichlet", "--epsilons", "1e-2:1e-6:decade"],
        &["talenti-check", "--format", "xml"],
        &["no-such-command"],
    ] {
        let o = henon4(args, &out);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        assert!(!out.exists(), "{args:?} left files behind");
    }
}

#[test]
fn config_file_unknown_key_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"command": "talenti-check", "sede": 3}"#).unwrap();
    let o = henon4(&["--config", cfg.to_str().unwrap()], &dir.path().join("out"));
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn moser_blowup_csv() {
    let dir = tempfile::tempdir().unwrap();
    let o = henon4(
        &["moser-blowup", "--alpha", "0", "--beta", "1.2", "--epsilons", "1e-2:1e-10:decade"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(dir.path().join("moser_blowup.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "epsilon,norm_sq,value,log_value,lower_bound_exponent"
    );
    let values: Vec<f64> = lines
        .map(|l| l.split(',').nth(2).unwrap().parse().unwrap())
        .collect();
    assert_eq!(values.len(), 9);
    assert!(values[2..].windows(2).all(|w| w[1] > w[0]));
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(
        &cfg,
        r#"{"command": "threshold-scan", "alphas": [0, 4], "sigma": "0.5*sigma_alpha", "m": null, "format": "json"}"#,
    )
    .unwrap();
    let o = henon4(&["--config", cfg.to_str().unwrap(), "--format", "csv"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(dir.path().join("threshold_scan.csv")).unwrap();
    assert!(text.starts_with("alpha,sigma_alpha,series_bound,max_corpus_value\n"));
    assert_eq!(text.lines().count(), 3);
    assert!(!dir.path().join("threshold_scan.json").exists());
}
