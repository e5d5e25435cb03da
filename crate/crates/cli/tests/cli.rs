use std::fs;
use std::path::Path;

use bochner_cli::{run, EXIT_CONFIG, EXIT_OK, EXIT_RUNTIME, EXIT_VIOLATIONS};
use tempfile::TempDir;

fn bochner(args: &[&str], out: &Path) -> (i32, String) {
    let mut full = vec!["bochner"];
    full.extend_from_slice(args);
    let out_s = out.to_str().unwrap().to_string();
    full.push("--out");
    full.push(&out_s);
    let _ = fs::remove_file(out);
    let code = run(full);
    (code, fs::read_to_string(out).unwrap_or_default())
}

fn json(text: &str) -> serde_json::Value {
    serde_json::from_str(text).unwrap()
}

fn column(text: &str, name: &str) -> Vec<f64> {
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let i = header.iter().position(|h| *h == name).unwrap();
    lines.map(|l| l.split(',').nth(i).unwrap().parse().unwrap()).collect()
}

#[test]
fn transform_log1p_matches_closed_form() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("t.csv");
    let (code, text) = bochner(
        &[
            "transform",
            "--beta",
            "power:2,1",
            "--g",
            "log1p",
            "--r-grid",
            "0.1,10,3,log",
        ],
        &out,
    );
    assert_eq!(code, EXIT_OK);
    let r = column(&text, "r");
    let bg = column(&text, "beta_g");
    for (r, v) in r.iter().zip(&bg) {
        let exact = (1.0 / r).exp_m1();
        assert!((v - exact).abs() <= 1e-12 * exact, "r={r}");
    }
}

#[test]
fn transform_ou_fractional() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("t.csv");
    let (code, text) = bochner(
        &["transform", "--beta", "ou", "--g", "power:0.5", "--r-grid", "0.1,0.5,3"],
        &out,
    );
    assert_eq!(code, EXIT_OK);
    for (t, v) in column(&text, "r").iter().zip(column(&text, "beta_g")) {
        let exact = t * t / (2.0 * std::f64::consts::E) * (2.0 / (t * t)).exp();
        assert!((v - exact).abs() <= 1e-9 * exact, "t={t}: {v} vs {exact}");
    }
}

#[test]
fn transform_identity_echoes() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("t.csv");
    let (code, text) = bochner(&["transform", "--beta", "power:3,2", "--g", "identity"], &out);
    assert_eq!(code, EXIT_OK);
    for (a, b) in column(&text, "beta").iter().zip(column(&text, "beta_g")) {
        assert!((a - b).abs() <= 1e-14 * a);
    }
}

#[test]
fn transform_nash_sandwich() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("t.csv");
    let (code, text) = bochner(
        &[
            "transform",
            "--nash",
            "power:1,1",
            "--g",
            "power:0.5",
            "--x-grid",
            "0.1,10,4,log",
        ],
        &out,
    );
    assert_eq!(code, EXIT_OK);
    let dg = column(&text, "d_g");
    let lo = column(&text, "lower");
    let hi = column(&text, "upper");
    for i in 0..dg.len() {
        assert!(lo[i] <= dg[i] * (1.0 + 1e-6) && dg[i] <= hi[i] * (1.0 + 1e-6));
    }
}

#[test]
fn constants_table() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("c.csv");
    let (code, text) = bochner(&["constants", "--nash-constant", "0.7"], &out);
    assert_eq!(code, EXIT_OK);
    assert_eq!(text.lines().count(), 1 + 20 * 9);
    assert!(text.lines().skip(1).all(|l| l.ends_with(",true,true")));
    let (code, _) = bochner(&["constants"], &out);
    assert_eq!(code, EXIT_CONFIG);
    let (code, _) = bochner(&["constants", "--nash-constant", "1", "--alpha", "1.5"], &out);
    assert_eq!(code, EXIT_CONFIG);
}

#[test]
fn verify_sound_and_falsified() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("v.json");
    let base = [
        "verify",
        "--model",
        "torus:1,64",
        "--g",
        "power:0.5",
        "--samples",
        "300",
        "--format",
        "json",
    ];
    let (code, text) = bochner(&base, &out);
    assert_eq!(code, EXIT_OK, "{text}");
    let v = json(&text);
    assert_eq!(v["meta"]["passed"], true);
    assert_eq!(v["rows"].as_array().unwrap().len(), 4);

    let mut control = base.to_vec();
    control.extend(["--scale", "0.5"]);
    let (code, text) = bochner(&control, &out);
    assert_eq!(code, EXIT_VIOLATIONS);
    let v = json(&text);
    assert!(v["rows"][0]["n_violations"].as_u64().unwrap() > 0);
}

#[test]
fn verify_without_samples() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("v.json");
    let (code, text) = bochner(
        &["verify", "--model", "torus:1,64", "--samples", "0", "--format", "json"],
        &out,
    );
    assert_eq!(code, EXIT_OK);
    for row in json(&text)["rows"].as_array().unwrap() {
        assert_eq!(row["n_checked"], 0);
    }
}

#[test]
fn verify_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    let args = [
        "verify",
        "--model",
        "torus:2,8",
        "--g",
        "log1p",
        "--samples",
        "50",
        "--seed",
        "9",
        "--format",
        "json",
    ];
    let (ca, ta) = bochner(&args, &a);
    let (cb, tb) = bochner(&args, &b);
    assert_eq!((ca, &ta), (cb, &tb));
    let mut other = args.to_vec();
    other[8] = "10";
    let (_, tc) = bochner(&other, &b);
    assert_ne!(ta, tc);
}

#[test]
fn markov_file_model() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("chain.txt");
    fs::write(&path, "# two-state chain\n0.5 -0.5\n-0.5 0.5\n").unwrap();
    let spec = format!("markov:{}", path.display());
    let out = dir.path().join("s.csv");
    let (code, text) = bochner(
        &[
            "subordinate-check",
            "--model",
            &spec,
            "--measure",
            "poisson:1,1",
            "--samples",
            "4",
        ],
        &out,
    );
    assert_eq!(code, EXIT_OK, "{text}");
    assert!(column(&text, "route_gap").iter().all(|&g| g < 1e-12));
    let (code, _) = bochner(&["profile", "--model", &spec, "--r-grid", "0.1,1,2"], &out);
    assert_eq!(code, EXIT_OK);
    // A point mass attains ‖δ_i‖₂² / ‖δ_i‖₁² = 1/w_i = 2 at r → 0.
    let (_, text) = bochner(&["profile", "--model", &spec, "--r-grid", "1e-9,1e-9,1"], &out);
    assert!((column(&text, "lower_bound")[0] - 2.0).abs() < 1e-6);
}

#[test]
fn bad_inputs_exit_with_two() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("x.csv");
    for args in [
        vec!["verify", "--model", "torus:1,64", "--g", "nope"],
        vec!["verify", "--model", "sphere:2"],
        vec!["verify", "--model", "torus:1,64", "--r-grid", "1,2"],
        vec!["verify", "--model", "torus:1,64", "--checks", "bogus"],
        vec!["verify", "--model", "markov:/does/not/exist"],
        vec!["transform", "--beta", "power:2,1"],
        vec!["nosuch"],
    ] {
        assert_eq!(bochner(&args, &out).0, EXIT_CONFIG, "{args:?}");
    }
}

#[test]
fn runtime_failures_exit_with_three() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("x.csv");
    // A constant g has an empty transfer domain.
    let (code, _) = bochner(&["transform", "--beta", "power:2,1", "--g", "affine:1,0"], &out);
    assert_eq!(code, EXIT_RUNTIME);
}

#[test]
fn config_file_with_flag_override() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("run.json");
    fs::write(
        &cfg,
        r#"{"command": "transform", "beta": "power:2,1", "g": "log1p", "r-grid": {"min": 1, "max": 10, "count": 2, "log": true}}"#,
    )
    .unwrap();
    let out = dir.path().join("o.csv");
    let c = cfg.to_str().unwrap();
    let (code, text) = bochner(&["transform", "--config", c], &out);
    assert_eq!(code, EXIT_OK);
    assert_eq!(column(&text, "r"), vec![1.0, 10.0]);
    let (code, text) = bochner(&["transform", "--config", c, "--g", "identity"], &out);
    assert_eq!(code, EXIT_OK);
    assert_eq!(column(&text, "beta_g"), column(&text, "beta"));
    assert_eq!(bochner(&["verify", "--config", c], &out).0, EXIT_CONFIG);
    fs::write(&cfg, r#"{"unknown": 1}"#).unwrap();
    assert_eq!(bochner(&["transform", "--config", c], &out).0, EXIT_CONFIG);
}

#[test]
fn ultra_tables_and_verdicts() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("u.csv");
    let (code, text) = bochner(
        &[
            "ultra",
            "--theta",
            "power:2,1.5",
            "--s-min",
            "1e-12",
            "--t-grid",
            "1e-3,1e3,7,log",
        ],
        &out,
    );
    assert_eq!(code, EXIT_OK);
    for (t, a) in column(&text, "t").iter().zip(column(&text, "a")) {
        let exact = (4.0 / (2.0 * 2.0 * t)).powi(2);
        assert!((a - exact).abs() <= 1e-6 * exact);
    }
    let (code, text) = bochner(
        &["ultra-bound", "--g", "log1p", "--n", "3", "--t-grid", "0.7,0.8,2"],
        &out,
    );
    assert_eq!(code, EXIT_OK);
    assert!(text.contains(",inf,inf,false") && text.contains(",true"));
    let out_json = dir.path().join("u.json");
    let (code, text) = bochner(
        &["ultra", "--nash", "euclid:2,1", "--g", "log1p", "--format", "json"],
        &out_json,
    );
    assert_eq!(code, EXIT_OK);
    assert_eq!(json(&text)["meta"]["ultracontractive"], false);
    let (code, text) = bochner(&["ultra", "--g", "logpow:0.5,0.5", "--n", "2", "--asymptotics"], &out);
    assert_eq!(code, EXIT_OK);
    assert_eq!(text.lines().count(), 3);
}

#[test]
fn nash_round_trip_table() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("n.csv");
    let (code, text) = bochner(&["nash", "--nash", "power:1,1", "--r-grid", "0.5,2,3"], &out);
    assert_eq!(code, EXIT_OK);
    // D(x) = x conjugates to β(r) = 1/(4r).
    for (r, b) in column(&text, "r").iter().zip(column(&text, "beta")) {
        assert!((b - 0.25 / r).abs() < 1e-8);
    }
}

#[test]
fn numbers_carry_sixteen_digits() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("n.csv");
    let (_, text) = bochner(
        &["transform", "--beta", "power:2,1", "--g", "log1p", "--r-grid", "1,1,1"],
        &out,
    );
    let row = text.lines().nth(1).unwrap();
    for field in row.split(',') {
        let mantissa = field.split('e').next().unwrap().replace(['.', '-'], "");
        assert_eq!(mantissa.len(), 16, "{field}");
    }
}
