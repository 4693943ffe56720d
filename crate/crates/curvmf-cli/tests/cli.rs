//! End-to-end tests of the binary: exit codes, artifact round-trips,
//! determinism of report bytes.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_curvmf")
}

fn run(args: &[&str]) -> Output {
    Command::new(bin())
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, name: &str, body: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path
}

const CYLINDER_SOLVE: &str = r#"
[surface]
kind = "cylinder"
length = 1.0
n_axial = 16
n_circ = 64

[curvature]
k_family = { kind = "constant", value = -1.0 }
h_family = { kind = "constant", value = 0.5 }

[solver]
grad_tol = 1e-10
seed = 7

[experiment]
kind = "solve"
"#;

#[test]
fn solve_writes_report_and_solution() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "solve.toml", CYLINDER_SOLVE);
    let out = tmp.path().join("out");
    let res = run(&["solve", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(
        res.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&res.stderr)
    );

    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    for key in [
        "experiment",
        "spec_hash",
        "chi",
        "alpha",
        "beta",
        "C",
        "J",
        "residuals",
        "iterations",
        "termination",
        "sign_used",
    ] {
        assert!(report.get(key).is_some(), "report missing key {key}");
    }
    assert_eq!(report["chi"], 0);
    assert_eq!(report["termination"], "grad_tol");
    assert_eq!(report["sign_used"], "h");
    assert!(report["residuals"]["gb"].as_f64().unwrap() < 1e-9);
    assert!(out.join("solution.csv").exists());
    assert!(out.join("trace.csv").exists());
    assert!(out.join("edges.csv").exists());
}

#[test]
fn infeasible_config_exits_2() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "bad.toml",
        r#"
[surface]
kind = "hemisphere"
k = 2
refinement = 4

[curvature]
k_family = { kind = "constant", value = -1.0 }
h_family = { kind = "constant", value = -1.0 }

[experiment]
kind = "solve"
"#,
    );
    let out = tmp.path().join("out");
    let res = run(&["solve", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&res.stderr);
    assert!(
        stderr.contains("positive somewhere"),
        "diagnostic should cite the failed clause: {stderr}"
    );
}

#[test]
fn malformed_config_exits_4() {
    let tmp = tempfile::tempdir().unwrap();
    // No surface section at all.
    let cfg = write_config(
        tmp.path(),
        "broken.toml",
        r#"
[curvature]
k_family = { kind = "constant", value = 1.0 }
h_family = { kind = "constant", value = 0.0 }

[experiment]
kind = "solve"
"#,
    );
    let res = run(&["solve", cfg.to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(4));
}

#[test]
fn azimuthal_family_on_pants_exits_4() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "pants_azim.toml",
        r#"
[surface]
kind = "pair_of_pants"
boundary_lengths = [1.0, 1.0, 1.0]
refinement = 2

[curvature]
k_family = { kind = "constant", value = -1.0 }
h_family = { kind = "azimuthal_cosine", offset = 0.0, amplitude = 1.0, mode = 2 }

[experiment]
kind = "solve"
"#,
    );
    let res = run(&["solve", cfg.to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(4));
}

#[test]
fn verify_round_trip_reproduces_residuals() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "solve.toml", CYLINDER_SOLVE);
    let out = tmp.path().join("out");
    assert!(run(&["solve", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()])
        .status
        .success());
    let solve_report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap();

    let vout = tmp.path().join("vout");
    let res = run(&[
        "verify",
        cfg.to_str().unwrap(),
        out.join("solution.csv").to_str().unwrap(),
        "--out",
        vout.to_str().unwrap(),
    ]);
    assert!(res.status.success());
    let verify_report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(vout.join("report.json")).unwrap()).unwrap();

    // The CSV is full precision, so the recomputed residuals agree with the
    // in-memory ones.
    let gb_s = solve_report["residuals"]["gb"].as_f64().unwrap();
    let gb_v = verify_report["residuals"]["gb"].as_f64().unwrap();
    assert!((gb_s - gb_v).abs() <= 1e-12 * (1.0 + gb_s.abs()));
    let pde_s = solve_report["residuals"]["pde"].as_f64().unwrap();
    let pde_v = verify_report["residuals"]["pde"].as_f64().unwrap();
    assert!((pde_s - pde_v).abs() <= 1e-12 * (1.0 + pde_s.abs()));
}

#[test]
fn verify_reports_large_residual_without_failing() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "solve.toml", CYLINDER_SOLVE);
    // Zero field on a non-solution spec: verification reports, does not judge.
    let n = 17 * 64;
    let mut csv = String::from("vertex_id,u,v,K,h\n");
    for i in 0..n {
        csv.push_str(&format!("{i},0.0,0.0,-1.0,0.5\n"));
    }
    let sol = tmp.path().join("zero.csv");
    std::fs::write(&sol, csv).unwrap();
    let vout = tmp.path().join("vout");
    let res = run(&[
        "verify",
        cfg.to_str().unwrap(),
        sol.to_str().unwrap(),
        "--out",
        vout.to_str().unwrap(),
    ]);
    assert!(res.status.success());
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(vout.join("report.json")).unwrap()).unwrap();
    // |∫K + ∫h·1 - 0| = |-2π + 2π| = 0 for h = 1/2... the zero field happens
    // to satisfy the integral identity here, but not the PDE.
    assert!(report["residuals"]["pde"].as_f64().unwrap() > 1e-3);
}

#[test]
fn verify_dimension_mismatch_exits_4() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "solve.toml", CYLINDER_SOLVE);
    let sol = tmp.path().join("short.csv");
    std::fs::write(&sol, "vertex_id,u,v,K,h\n0,0.0,0.0,-1.0,0.5\n").unwrap();
    let res = run(&["verify", cfg.to_str().unwrap(), sol.to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(4));
}

#[test]
fn verify_perturbed_solution_has_larger_residual() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "solve.toml", CYLINDER_SOLVE);
    let out = tmp.path().join("out");
    assert!(run(&["solve", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()])
        .status
        .success());

    // Add noise to u and v columns.
    let text = std::fs::read_to_string(out.join("solution.csv")).unwrap();
    let mut noisy = String::from("vertex_id,u,v,K,h\n");
    for (i, line) in text.lines().enumerate().skip(1) {
        let parts: Vec<&str> = line.split(',').collect();
        let bump = 0.1 * ((i * 37 % 17) as f64 / 17.0 - 0.5);
        let u: f64 = parts[1].parse().unwrap();
        let v: f64 = parts[2].parse().unwrap();
        noisy.push_str(&format!(
            "{},{:e},{:e},{},{}\n",
            parts[0],
            u + bump,
            v + bump,
            parts[3],
            parts[4]
        ));
    }
    let sol = tmp.path().join("noisy.csv");
    std::fs::write(&sol, noisy).unwrap();

    let vclean = tmp.path().join("vclean");
    let vnoisy = tmp.path().join("vnoisy");
    assert!(run(&[
        "verify",
        cfg.to_str().unwrap(),
        out.join("solution.csv").to_str().unwrap(),
        "--out",
        vclean.to_str().unwrap()
    ])
    .status
    .success());
    assert!(run(&[
        "verify",
        cfg.to_str().unwrap(),
        sol.to_str().unwrap(),
        "--out",
        vnoisy.to_str().unwrap()
    ])
    .status
    .success());
    let clean: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(vclean.join("report.json")).unwrap())
            .unwrap();
    let noisy: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(vnoisy.join("report.json")).unwrap())
            .unwrap();
    assert!(
        noisy["residuals"]["pde"].as_f64().unwrap()
            > 10.0 * clean["residuals"]["pde"].as_f64().unwrap()
    );
    assert!(
        noisy["residuals"]["gb"].as_f64().unwrap()
            > clean["residuals"]["gb"].as_f64().unwrap()
    );
}

#[test]
fn identical_config_and_seed_give_identical_reports() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "solve.toml", CYLINDER_SOLVE);
    let out_a = tmp.path().join("a");
    let out_b = tmp.path().join("b");
    for out in [&out_a, &out_b] {
        assert!(run(&[
            "solve",
            cfg.to_str().unwrap(),
            "--seed",
            "99",
            "--out",
            out.to_str().unwrap()
        ])
        .status
        .success());
    }
    let a = std::fs::read(out_a.join("report.json")).unwrap();
    let b = std::fs::read(out_b.join("report.json")).unwrap();
    assert_eq!(a, b, "report bytes must be identical");
    let a = std::fs::read(out_a.join("solution.csv")).unwrap();
    let b = std::fs::read(out_b.join("solution.csv")).unwrap();
    assert_eq!(a, b, "solution bytes must be identical");
}

#[test]
fn degenerate_sign_case_reports_flag() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "degenerate.toml",
        r#"
[surface]
kind = "cylinder"
length = 1.0
n_axial = 12
n_circ = 48

[curvature]
k_family = { kind = "constant", value = -1.0 }
h_family = { kind = "azimuthal_cosine", offset = 0.0, amplitude = 1.0, mode = 1 }

[experiment]
kind = "solve"
"#,
    );
    let out = tmp.path().join("out");
    let res = run(&["solve", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(res.status.success(), "degenerate run reports, not fails");
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["sign_used"], "degenerate");
}

#[test]
fn mesh_subcommand_exports_off_and_edges() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "mesh.toml",
        r#"
[surface]
kind = "hemisphere"
k = 3
refinement = 6

[curvature]
k_family = { kind = "constant", value = 1.0 }
h_family = { kind = "constant", value = 0.0 }

[experiment]
kind = "solve"

[output]
mesh_off = true
"#,
    );
    let out = tmp.path().join("out");
    let res = run(&["mesh", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(res.status.success());
    assert!(out.join("mesh.off").exists());
    assert!(out.join("edges.csv").exists());
    let bg: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("background.json")).unwrap())
            .unwrap();
    assert_eq!(bg["chi"], 1);
    assert!(bg["gauss_bonnet_residual"].as_f64().unwrap() < 1e-9);
}

#[test]
fn off_export_for_unembedded_surface_exits_4() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "pants_off.toml",
        r#"
[surface]
kind = "pair_of_pants"
boundary_lengths = [1.0, 1.0, 1.0]
refinement = 2

[curvature]
k_family = { kind = "constant", value = -1.0 }
h_family = { kind = "constant", value = 0.5 }

[experiment]
kind = "solve"

[output]
mesh_off = true
"#,
    );
    let res = run(&["mesh", cfg.to_str().unwrap(), "--out", tmp.path().join("o").to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(4));
}

#[test]
fn sweep_sharpness_runs() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "sharp.toml",
        r#"
[surface]
kind = "cylinder"
length = 1.0
n_axial = 512
n_circ = 6

[curvature]
k_family = { kind = "constant", value = -1.0 }
h_family = { kind = "constant", value = 1.0 }

[experiment]
kind = "sharpness"
d0 = 0.8
n_min_exp = 1
n_max_exp = 7
collar = 0.25
"#,
    );
    let out = tmp.path().join("out");
    let res = run(&["sweep", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(res.status.success());
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["records"].as_array().unwrap().len(), 7);
}

#[test]
fn csv_curvature_samples_are_accepted() {
    let tmp = tempfile::tempdir().unwrap();
    // 12 x 48 cylinder -> 13*48 = 624 vertices; K from a sample table.
    let n = 13 * 48;
    let mut csv = String::from("vertex_id,value\n");
    for i in 0..n {
        csv.push_str(&format!("{i},-1.0\n"));
    }
    let kpath = tmp.path().join("k.csv");
    std::fs::write(&kpath, csv).unwrap();
    let cfg = write_config(
        tmp.path(),
        "csvk.toml",
        &format!(
            r#"
[surface]
kind = "cylinder"
length = 1.0
n_axial = 12
n_circ = 48

[curvature]
k_family = {{ kind = "csv", path = {kq} }}
h_family = {{ kind = "constant", value = 0.5 }}

[experiment]
kind = "solve"
"#,
            kq = toml_quote(kpath.to_str().unwrap())
        ),
    );
    let out = tmp.path().join("out");
    let res = run(&["solve", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(
        res.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&res.stderr)
    );

    // Incomplete table must be a config error.
    std::fs::write(&kpath, "vertex_id,value\n0,-1.0\n").unwrap();
    let res = run(&["solve", cfg.to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(4));
}

fn toml_quote(s: &str) -> String {
    format!("{s:?}")
}

#[test]
fn sweep_tm_battery_runs() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "tm.toml",
        r#"
[surface]
kind = "hemisphere"
k = 2
refinement = 8

[curvature]
k_family = { kind = "constant", value = 1.0 }
h_family = { kind = "constant", value = 0.0 }

[solver]
seed = 42

[experiment]
kind = "tm"
samples = 50
"#,
    );
    let out = tmp.path().join("out");
    let res = run(&["sweep", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(res.status.success());
    for artifact in ["report.json", "tm_battery.json", "tm_spikes.json", "tm_symmetric.json"] {
        assert!(out.join(artifact).exists(), "missing {artifact}");
    }
}
