use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use hops_core::{hidden_moments, squeezing_function, HopsInput};

fn hops(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hops")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_owned()
}

const SINGLE_POINT: &[&str] = &[
    "sweep",
    "--ax-sq",
    "2",
    "--ph-mag",
    "0.5",
    "--kt-min",
    "0.25",
    "--kt-max",
    "0.25",
    "--steps",
    "1",
    "--delta-min",
    "-pi/3",
    "--delta-max",
    "-pi/3",
    "--delta-steps",
    "1",
    "--outputs",
    "sq,moments",
];

#[test]
fn single_point_sweep_matches_library() {
    let o = hops(SINGLE_POINT);
    assert!(o.status.success());
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "kt,delta_h,sq,h0,h1,h2,h3,squeezed");
    assert_eq!(lines.len(), 2);

    let inp = HopsInput::new(2.0, 0.5, -std::f64::consts::PI / 3.0).unwrap();
    let h = hidden_moments(&inp, 0.25).unwrap();
    let sq = squeezing_function(&inp, 0.25).unwrap();
    let fields: Vec<&str> = lines[1].split(',').collect();
    assert_eq!(fields[2], format!("{sq:.16e}"));
    for (i, v) in h.as_array().iter().enumerate() {
        assert_eq!(fields[3 + i], format!("{v:.16e}"));
    }
    assert_eq!(fields[7], (sq > 1.0).to_string());
}

#[test]
fn sweep_output_is_byte_identical_across_runs() {
    let args = ["sweep", "--preset", "fig1b", "--steps", "7", "--delta-steps", "9", "--outputs", "sq,degree,margins"];
    let (a, b) = (hops(&args), hops(&args));
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(stdout(&a).lines().count(), 1 + 7 * 9);
}

#[test]
fn file_output_writes_metadata_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("surface.csv");
    let o = hops(&["sweep", "--preset", "fig1a", "--steps", "3", "--delta-steps", "4", "--out", out.to_str().unwrap()]);
    assert!(o.status.success());
    assert_eq!(fs::read_to_string(&out).unwrap().lines().count(), 13);
    let meta: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("surface.csv.meta.json")).unwrap()).unwrap();
    assert_eq!(meta["config"]["ax_sq"], 1.0);
}

#[test]
fn config_file_overrides_preset_and_flags_override_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "cfg.json",
        r#"{"preset":"fig1b","ax_sq":3.0,"kt_range":{"min":0.0,"max":0.5,"steps":3},
            "delta_range":{"min":-3.0,"max":3.0,"steps":2},"outputs":["sq"]}"#,
    );
    let o = hops(&["sweep", "--config", &cfg, "--ph-mag", "2"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "kt,delta_h,sq,squeezed");
    assert_eq!(lines.len(), 7);
    let last: Vec<&str> = lines[6].split(',').collect();
    let inp = HopsInput::new(3.0, 2.0, 3.0).unwrap();
    assert_eq!(last[2], format!("{:.16e}", squeezing_function(&inp, 0.5).unwrap()));
}

#[test]
fn invalid_configurations_exit_with_usage_code() {
    let dir = tempfile::tempdir().unwrap();
    let unknown = write(dir.path(), "unknown.json", r#"{"ax_sq":1.0,"colour":"red"}"#);
    let broken = write(dir.path(), "broken.json", "{");
    for args in [
        vec!["sweep", "--config", unknown.as_str()],
        vec!["sweep", "--config", broken.as_str()],
        vec!["sweep", "--steps", "1"],
        vec!["sweep", "--ax-sq", "-1"],
        vec!["sweep", "--oracle", "--kt-max", "2"],
        vec!["sweep", "--delta-min", "-pi", "--delta-max", "-pi", "--delta-steps", "1"],
        vec!["sweep", "--outputs", "bogus"],
        vec!["demo-hidden", "--n-phases", "3"],
    ] {
        let o = hops(&args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        assert!(o.stdout.is_empty(), "{args:?}");
    }
}

#[test]
fn oracle_rows_flag_an_insufficient_cutoff() {
    let o = hops(&[
        "sweep",
        "--ax-sq",
        "4",
        "--ph-mag",
        "1",
        "--steps",
        "2",
        "--kt-max",
        "0.1",
        "--delta-steps",
        "2",
        "--oracle",
        "--n-max",
        "4",
        "--outputs",
        "sq",
    ]);
    assert!(o.status.success());
    let text = stdout(&o);
    let mut lines = text.lines();
    assert!(lines.next().unwrap().ends_with("oracle_squeezed,oracle_status"));
    for line in lines {
        assert!(line.ends_with(",insufficient_cutoff"), "{line}");
    }
}

#[test]
fn oracle_columns_track_closed_forms() {
    let o = hops(&[
        "sweep",
        "--ax-sq",
        "0.5",
        "--ph-mag",
        "1",
        "--steps",
        "2",
        "--kt-max",
        "0.2",
        "--delta-steps",
        "3",
        "--oracle",
        "--n-max",
        "24",
        "--outputs",
        "moments",
    ]);
    assert!(o.status.success());
    let text = stdout(&o);
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let col = |n: &str| header.iter().position(|h| *h == n).unwrap();
    for line in lines {
        let f: Vec<&str> = line.split(',').collect();
        assert_eq!(f[col("oracle_status")], "ok");
        for i in 0..4 {
            let closed: f64 = f[col(&format!("h{i}"))].parse().unwrap();
            let oracle: f64 = f[col(&format!("oracle_h{i}"))].parse().unwrap();
            assert!((closed - oracle).abs() <= 1e-6 * closed.abs().max(1.0), "{line}");
        }
    }
}

#[test]
fn verify_rejects_a_corrupt_grid() {
    let dir = tempfile::tempdir().unwrap();
    let grid = write(dir.path(), "grid.json", r#"{"version":1,"kt":[0.0],"points":"#);
    let o = hops(&["verify", "--grid", &grid]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("grid fixture"));
}

#[test]
fn verify_fails_when_the_cutoff_is_too_small() {
    let dir = tempfile::tempdir().unwrap();
    let grid = write(
        dir.path(),
        "grid.json",
        r#"{"version":1,"kt":[0.0,0.1],"points":[{"ax_sq":4.0,"ph_mag":1.0,"delta_h":1.0}]}"#,
    );
    let out = dir.path().join("report");
    let o = hops(&["verify", "--n-max", "2", "--grid", &grid, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("overall: FAIL"));
    let csv = fs::read_to_string(out.join("verify_report.csv")).unwrap();
    assert!(csv.lines().any(|l| l.starts_with("oracle_preconditions,") && l.ends_with(",FAIL")));
}

#[test]
fn demo_prints_four_rows() {
    let o = hops(&["demo-hidden"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "ensemble,path,s0,s1,s2,s3,h0,h1,h2,h3");
    let labels: Vec<String> = lines[1..].iter().map(|l| l.split(',').take(2).collect::<Vec<_>>().join(",")).collect();
    assert_eq!(labels, ["hops,classical", "hops,quantum", "polarized,classical", "polarized,quantum"]);
    let hops_row: Vec<f64> = lines[1].split(',').skip(2).map(|v| v.parse().unwrap()).collect();
    assert!(hops_row[1..4].iter().all(|s| s.abs() < 1e-10));
    assert!((hops_row[6].hypot(hops_row[7]) - 4.0).abs() < 1e-10);
}
