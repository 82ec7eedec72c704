use std::path::Path;
use std::process::{Command, Output};

use austere_cli::{build_immersion, RunConfig};
use austere_core::geometry::{sample_points, SamplePlan, DEFAULT_MARGIN};
use serde_json::Value;

fn austere(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_austere"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn structured(args: &[&str]) -> (Value, i32) {
    let mut all = args.to_vec();
    all.extend(["--format", "structured"]);
    let out = austere(&all);
    let code = out.status.code().unwrap();
    let v = serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("{e}: {}", String::from_utf8_lossy(&out.stderr));
    });
    (v, code)
}

fn csv(text: &str) -> (Vec<String>, Vec<Vec<f64>>) {
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    let rows = lines
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    (header, rows)
}

#[test]
fn family_export_counts() {
    let out = austere(&[
        "family", "--family", "helicoid", "--param", "m=2", "--param", "s=1", "--grid", "10,10",
    ]);
    assert!(out.status.success());
    let (header, rows) = csv(&String::from_utf8(out.stdout).unwrap());
    assert_eq!(header, ["u1", "u2", "x1", "x2", "x3"]);
    assert_eq!(rows.len(), 100);
    assert!(rows.iter().all(|r| r.len() == 5));

    let out = austere(&["family", "--family", "helicoid_cone", "--grid", "2"]);
    let (header, rows) = csv(&String::from_utf8(out.stdout).unwrap());
    assert_eq!(header.iter().filter(|h| h.starts_with('x')).count(), 6);
    assert_eq!(rows.len(), 16);
}

#[test]
fn csv_round_trips_bitwise() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("samples.csv");
    let out = austere(&[
        "family",
        "--family",
        "helicoid",
        "--param",
        "m=3",
        "--param",
        "s=2",
        "--param",
        "lambdas=0.3,1.7,-2.1",
        "--random",
        "25",
        "--seed",
        "99",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let (_, rows) = csv(&std::fs::read_to_string(&path).unwrap());
    let mut cfg = RunConfig::parse(
        "family = helicoid\nparams.m = 3\nparams.s = 2\nparams.lambdas = 0.3,1.7,-2.1",
    )
    .unwrap();
    cfg.seed = 99;
    let imm = build_immersion(&cfg).unwrap();
    let pts = sample_points(
        imm.domain(),
        &SamplePlan {
            random: 25,
            seed: 99,
            margin: DEFAULT_MARGIN,
            grid: vec![],
        },
    );
    for (row, x) in rows.iter().zip(&pts) {
        let expect: Vec<f64> = x.iter().copied().chain(imm.eval(x).unwrap()).collect();
        assert_eq!(
            row.iter().map(|v| v.to_bits()).collect::<Vec<_>>(),
            expect.iter().map(|v| v.to_bits()).collect::<Vec<_>>()
        );
    }
}

#[test]
fn config_errors_exit_two() {
    for args in [
        vec!["family", "--family", "foo"],
        vec!["verify"],
        vec!["verify", "--family", "helicoid", "--param", "lambdas=1,0"],
        vec!["verify", "--family", "helicoid_cone", "--check-ruling", "4"],
        vec!["classify", "--family", "classical_helicoid"],
        vec!["holomorphy", "--family", "sphere"],
        vec!["verify", "--config", "/nonexistent/austere.cfg"],
    ] {
        let out = austere(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(
            String::from_utf8_lossy(&out.stderr).contains("config error"),
            "{args:?}"
        );
    }
    let out = austere(&["verify", "--family", "helicoid", "--param", "lambdas=1,0"]);
    assert!(String::from_utf8_lossy(&out.stderr).contains("params.lambdas"));
}

#[test]
fn numerical_faults_exit_three() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("coarse.cfg");
    // a difference step wider than the domain
    std::fs::write(
        &cfg,
        "family = classical_helicoid\nsamples.step = 5\nsamples.random = 3\n",
    )
    .unwrap();
    let out = austere(&["slag", "--config", cfg.to_str().unwrap()]);
    assert_eq!(
        out.status.code(),
        Some(3),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(String::from_utf8_lossy(&out.stderr).contains("numerical fault"));
}

#[test]
fn verify_helicoids_and_sphere() {
    for family in [
        "classical_helicoid",
        "helicoid",
        "helicoid_cone",
        "helicoid_product",
    ] {
        let (v, code) = structured(&[
            "verify",
            "--family",
            family,
            "--random",
            "30",
            "--assert-austere",
        ]);
        assert_eq!(code, 0, "{family}");
        assert_eq!(v["summary"]["austere_fraction"], 1.0);
    }
    let out = austere(&[
        "verify",
        "--family",
        "sphere",
        "--random",
        "4",
        "--assert-austere",
    ]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    for i in 0..4 {
        assert!(err.contains(&format!("point {i}:")), "{err}");
    }
    let (v, code) = structured(&["verify", "--family", "sphere", "--random", "4"]);
    assert_eq!(code, 0);
    assert_eq!(v["summary"]["austere_fraction"], 0.0);
}

#[test]
fn cone_three_ruling() {
    let (v, code) = structured(&[
        "verify",
        "--family",
        "helicoid_cone",
        "--random",
        "40",
        "--check-ruling",
        "3",
    ]);
    assert_eq!(code, 0);
    for r in v["records"].as_array().unwrap() {
        assert!(r["ruling_defect"].as_f64().unwrap() < 1e-10);
        assert!(r["straightness_defect"].as_f64().unwrap() < 1e-12);
    }
}

#[test]
fn classify_reports() {
    let (v, code) = structured(&["classify", "--family", "helicoid_product", "--random", "10"]);
    assert_eq!(code, 0);
    for r in v["records"].as_array().unwrap() {
        assert!(r["verdict"].as_str().unwrap().contains('B'));
        assert_eq!(r["delta"], 2);
    }
    let (v, _) = structured(&["classify", "--family", "complex_cone", "--random", "5"]);
    assert!(v["records"]
        .as_array()
        .unwrap()
        .iter()
        .all(|r| r["verdict"].as_str().unwrap().contains('A')));
    let (v, _) = structured(&["classify", "--family", "helicoid_flat", "--random", "5"]);
    assert_eq!(v["summary"]["rank_one_points"], 5);
    for r in v["records"].as_array().unwrap() {
        assert_eq!(
            (r["delta"].as_u64(), r["nullity"].as_u64()),
            (Some(1), Some(2))
        );
    }
}

#[test]
fn slag_reports() {
    let (v, code) = structured(&["slag", "--family", "classical_helicoid", "--random", "50"]);
    assert_eq!(code, 0);
    assert!(v["summary"]["phase_spread"].as_f64().unwrap() < 1e-4);
    let (v, code) = structured(&["slag", "--family", "sphere", "--random", "50"]);
    assert_eq!(code, 1);
    assert!(v["summary"]["lagrangian"].as_bool().unwrap());
    assert!(v["summary"]["phase_spread"].as_f64().unwrap() > 0.01);
    let (v, code) = structured(&["slag", "--family", "flat", "--random", "10"]);
    assert_eq!(code, 0);
    assert_eq!(v["summary"]["phase_spread"], 0.0);
}

#[test]
fn holomorphy_reports() {
    let (v, code) = structured(&["holomorphy", "--family", "complex_cone", "--random", "20"]);
    assert_eq!(code, 0);
    assert_eq!(v["summary"]["orientation"], "-J");
    assert!(v["summary"]["max_flipped_defect"].as_f64().unwrap() > 0.1);
    let (_, code) = structured(&[
        "holomorphy",
        "--family",
        "complex_cone",
        "--random",
        "5",
        "--param",
        "orientation=+J",
    ]);
    assert_eq!(code, 1);
    let (v, code) = structured(&[
        "holomorphy",
        "--family",
        "complex_cylinder",
        "--random",
        "5",
    ]);
    assert_eq!(code, 0);
    assert_eq!(v["summary"]["max_defect"], 0.0);
}

#[test]
fn config_file_with_flag_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    let report = dir.path().join("report.json");
    std::fs::write(
        &cfg,
        format!(
            "family = helicoid\nparams.m = 4\nparams.s = 3\nparams.lambdas = 0.5, 1, 2, -1.5\nsamples.random = 7\nseed = 3\nformat = structured\nout = {}\n",
            report.display()
        ),
    )
    .unwrap();
    let out = austere(&["verify", "--config", cfg.to_str().unwrap(), "--random", "4"]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(out.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(v["records"].as_array().unwrap().len(), 4);
    assert_eq!(v["seed"], 3);
    assert_eq!(v["summary"]["delta_histogram"]["3"], 4);
}

#[test]
fn text_reports_are_readable() {
    let out = austere(&["verify", "--family", "classical_helicoid", "--random", "3"]);
    let s = String::from_utf8(out.stdout).unwrap();
    assert!(s.starts_with("# verify family=classical_helicoid seed=0"));
    assert!(s.contains("austere fraction: 1.0000"));
    assert!(s.trim_end().ends_with("result: pass"));
}

#[test]
fn repeated_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let run = |cmd: &str, name: &str| {
        let p = dir.path().join(name);
        let out = austere(&[
            cmd,
            "--family",
            "helicoid_cone",
            "--random",
            "12",
            "--seed",
            "41",
            "--format",
            "structured",
            "--out",
            p.to_str().unwrap(),
        ]);
        assert!(out.status.success());
        std::fs::read(Path::new(&p)).unwrap()
    };
    assert_eq!(run("classify", "a.json"), run("classify", "b.json"));
    assert_eq!(run("verify", "c.json"), run("verify", "d.json"));
}
