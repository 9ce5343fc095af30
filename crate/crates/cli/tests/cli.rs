use std::path::Path;
use std::process::{Command, Output};

fn contextlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_contextlab"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn export(dir: &Path, name: &str, extra: &[&str]) -> String {
    let path = dir.join(name).display().to_string();
    let mut args = vec!["pom", "export", "--out", &path];
    args.extend_from_slice(extra);
    assert!(contextlab(&args).status.success());
    path
}

#[test]
fn sweep_csv_has_expected_rows() {
    let out = contextlab(&["pom", "sweep", "--grid", "4", "--format", "csv"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "theta,s,r_depol,r_deph_x,r_deph_y,r_deph_z,r_deph_min,argmin_axis"
    );
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').take(7).map(|c| c.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 4);
    for row in &rows {
        let (theta, s) = (row[0], row[1]);
        assert!((s - (0.5 + (2f64.sqrt() * theta.sin() + theta.cos()) / 6.0)).abs() < 1e-12);
    }
    // s rises to its maximum near arctan √2 and falls after it.
    let s: Vec<f64> = rows.iter().map(|r| r[1]).collect();
    assert!(s[0] < s[1] && s[1] < s[2] && s[2] > s[3]);
}

#[test]
fn classical_fragment_has_zero_robustness() {
    let dir = tempfile::tempdir().unwrap();
    let frag = export(dir.path(), "theta0.json", &["--theta", "0"]);
    let out = contextlab(&["robustness", "--fragment", &frag, "--noise", "depol"]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let cert: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert!(cert["r_min"].as_f64().unwrap() < 1e-9);
    assert!(cert["ontic_count"].as_u64().unwrap() >= 1);
}

#[test]
fn two_to_one_certificate_and_model() {
    let dir = tempfile::tempdir().unwrap();
    let frag = export(dir.path(), "pom2.json", &[]);
    let cert_path = dir.path().join("cert.json");
    let out = contextlab(&[
        "robustness",
        "--fragment",
        &frag,
        "--out",
        cert_path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let cert: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&cert_path).unwrap()).unwrap();
    assert!(
        (cert["r_min"].as_f64().unwrap() - (1.0 - std::f64::consts::FRAC_1_SQRT_2)).abs() < 1e-9
    );

    let out = contextlab(&["model", "--fragment", &frag, "--format", "json"]);
    assert!(out.status.success());
    let model: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    for state in model["states"].as_array().unwrap() {
        let total: f64 = state["epistemic"]
            .as_array()
            .unwrap()
            .iter()
            .map(|v| v.as_f64().unwrap())
            .sum();
        assert!((total - 1.0).abs() < 1e-8);
    }

    let out = contextlab(&[
        "robustness",
        "--fragment",
        &frag,
        "--noise",
        "deph",
        "--axis",
        "Z",
    ]);
    assert!(out.status.success());
    let cert: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(cert["axis"], "Z");
}

#[test]
fn invalid_input_exits_with_one() {
    assert_eq!(
        contextlab(&["robustness", "--fragment", "/definitely/missing.json"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(
        contextlab(&["pom", "sweep", "--grid", "1"]).status.code(),
        Some(1)
    );
    assert_eq!(contextlab(&["pom", "frobnicate"]).status.code(), Some(1));

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\"states\": [[1.0]]").unwrap();
    assert_eq!(
        contextlab(&["robustness", "--fragment", bad.to_str().unwrap()])
            .status
            .code(),
        Some(1)
    );

    let frag = export(dir.path(), "f.json", &["--theta", "0.5"]);
    assert_eq!(
        contextlab(&[
            "robustness",
            "--fragment",
            &frag,
            "--noise",
            "deph",
            "--axis",
            "W"
        ])
        .status
        .code(),
        Some(1)
    );
}

#[test]
fn axes_audit_is_deterministic_and_records_seed() {
    let args = [
        "pom",
        "axes-audit",
        "--grid",
        "5",
        "--extra-axes",
        "3",
        "--seed",
        "42",
    ];
    let a = stdout(&contextlab(&args));
    let b = stdout(&contextlab(&args));
    assert_eq!(a, b);
    assert!(a.starts_with("# seed=42 rng=ChaCha8 extra_axes=3"));
    assert_eq!(
        a.lines().nth(1).unwrap(),
        "theta,r_min_xyz,r_min_aug,abs_diff"
    );
    assert_eq!(a.lines().count(), 7);
}

#[test]
fn scaling_and_bits_report() {
    let dir = tempfile::tempdir().unwrap();
    let svg = dir.path().join("scaling.svg");
    let out = contextlab(&[
        "pom",
        "scaling",
        "--n-max",
        "6",
        "--plot",
        svg.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert_eq!(text.lines().next().unwrap(), "n,two_n,r_depol");
    assert_eq!(text.lines().count(), 6);
    assert!(std::fs::read_to_string(&svg).unwrap().contains("<polyline"));

    let out = contextlab(&["pom", "bits", "--r-cap", "0.5"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("max_encodable_bits = 3"));
    assert!(text.contains("premise: hemisphere scaling gives r(n) < 0.5 for n = 2..32"));
}
