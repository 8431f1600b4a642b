//! End-to-end tests of the command-line binary: exit codes, report files,
//! and determinism.

use std::path::Path;
use std::process::{Command, Output};

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_vmoidx"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn report_json(dir: &Path, out: &str) -> serde_json::Value {
    let text = std::fs::read_to_string(dir.join(out).join("report.json")).expect("report.json");
    serde_json::from_str(&text).expect("valid JSON")
}

#[test]
fn index_presets_and_exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    for (preset, ind, ind_minus) in [("figure1-a", 0, 1), ("figure1-b", 1, 0), ("figure1-c", -1, 2)] {
        let out = run(tmp.path(), &["index", "--preset", preset, "--out", preset]);
        assert!(out.status.success(), "{preset}: {}", String::from_utf8_lossy(&out.stderr));
        let rep = report_json(tmp.path(), preset);
        assert_eq!(rep["results"]["ind"], ind, "{preset}");
        assert_eq!(rep["results"]["ind_minus"], ind_minus, "{preset}");
        assert_eq!(rep["results"]["morse_residual"], 0, "{preset}");
        assert!(tmp.path().join(preset).join("field_samples.csv").is_file());
    }
}

#[test]
fn obstructed_extension_exits_2() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run(tmp.path(), &["extend", "--preset", "figure1-b", "--out", "o"]);
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn successful_extension_writes_field_csv() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run(tmp.path(), &["extend", "--preset", "figure1-a", "--out", "o"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(tmp.path().join("o/extended_field.csv")).unwrap();
    assert!(csv.starts_with("chart,u,v,w1,w2,w3\n"));
    assert!(csv.lines().count() > 1000);
    let rep = report_json(tmp.path(), "o");
    assert_eq!(rep["results"]["ind_minus"], 1);
}

#[test]
fn config_errors_exit_4() {
    let tmp = tempfile::tempdir().unwrap();
    for args in [
        &["index", "--surface", "nosuch", "--field", "rotation"][..],
        &["index", "--preset", "nosuch"][..],
        &["vmo-index", "--surface", "disk", "--field", "rotation", "--eps-grid", "0.1,0.2"][..],
        &["index", "--surface", "disk", "--field", "rotation", "--tol-zero", "-1"][..],
        &["index", "--surface", "disk"][..],
        &["nosuchcommand"][..],
    ] {
        let out = run(tmp.path(), args);
        assert_eq!(out.status.code(), Some(4), "args {args:?}: {}", String::from_utf8_lossy(&out.stderr));
    }
}

#[test]
fn vmo_index_writes_diagnostics() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run(
        tmp.path(),
        &["vmo-index", "--preset", "disk-hedgehog", "--eps-grid", "0.25,0.125,0.0625,0.03125", "--out", "o"],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(tmp.path().join("o/diagnostics.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "eps,omega,sup_projection_gap,sup_boundary_gap,min_g_eps,max_g_eps");
    assert_eq!(lines.len(), 5);
    let rep = report_json(tmp.path(), "o");
    assert_eq!(rep["results"]["ind"], 1);
    assert_eq!(rep["results"]["certified_tail"], 4);
}

#[test]
fn linefield_preset_reports_holonomy() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run(tmp.path(), &["linefield", "--preset", "figure2-n1", "--out", "o"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rep = report_json(tmp.path(), "o");
    assert_eq!(rep["results"]["holonomy"]["orientable"], false);
    assert_eq!(rep["results"]["verdict"]["verdict"], "certified");
    let csv = std::fs::read_to_string(tmp.path().join("o/qfield.csv")).unwrap();
    assert!(csv.starts_with("chart,u,v,x_coeff,y_coeff,e_coeff,f_coeff,g_coeff\n"));
}

#[test]
fn same_seed_reproduces_report() {
    let tmp = tempfile::tempdir().unwrap();
    for out_dir in ["a", "b"] {
        let out = run(
            tmp.path(),
            &["index", "--surface", "disk", "--field", "hyperbolic", "--seed", "9", "--out", out_dir],
        );
        assert!(out.status.success());
    }
    let mut a = report_json(tmp.path(), "a");
    let mut b = report_json(tmp.path(), "b");
    // Reports are equal modulo the timing field and the output path echo.
    for r in [&mut a, &mut b] {
        r.as_object_mut().unwrap().remove("timing_ms");
        r["config"].as_object_mut().unwrap().remove("out");
    }
    assert_eq!(a, b);
}

#[test]
fn expression_fields_and_config_files_work() {
    let tmp = tempfile::tempdir().unwrap();
    // Field as ambient expressions: the rotation field written out longhand.
    let out = run(
        tmp.path(),
        &["index", "--surface", "disk", "--field", "0 - y; x; 0", "--out", "e"],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(report_json(tmp.path(), "e")["results"]["ind"], 1);

    // Same run driven by a key=value config file.
    std::fs::write(
        tmp.path().join("run.cfg"),
        "surface = disk\nfield = 0 - y; x; 0\nout = c\n",
    )
    .unwrap();
    let out = run(tmp.path(), &["index", "--config", "run.cfg"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(report_json(tmp.path(), "c")["results"]["ind"], 1);
}

#[test]
fn custom_surface_file_is_accepted() {
    let tmp = tempfile::tempdir().unwrap();
    let tau = std::f64::consts::TAU;
    std::fs::write(
        tmp.path().join("torus.surf"),
        format!(
            "name = custom-torus\nx = (2 + cos(u)) * cos(v)\ny = (2 + cos(u)) * sin(v)\n\
             z = sin(u)\nu.min = 0\nu.max = {tau}\nv.min = 0\nv.max = {tau}\n\
             periodic.u = true\nperiodic.v = true\ngenus = 1\nboundary_count = 0\nr0 = 0.5\n"
        ),
    )
    .unwrap();
    let out = run(
        tmp.path(),
        &["index", "--surface", "torus.surf", "--field", "0 - y; x; 0", "--out", "o"],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rep = report_json(tmp.path(), "o");
    assert_eq!(rep["results"]["surface"], "custom-torus");
    assert_eq!(rep["results"]["chi"], 0);
}

#[test]
fn selftest_passes_and_bad_threads_exit_4() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run(tmp.path(), &["selftest", "--out", "o"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stdout));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("selftest:") && !text.contains("FAIL"));

    let out = Command::new(env!("CARGO_BIN_EXE_vmoidx"))
        .current_dir(tmp.path())
        .env("VMOIDX_THREADS", "zebra")
        .args(["index", "--preset", "figure1-a", "--out", "t"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(4));
}
