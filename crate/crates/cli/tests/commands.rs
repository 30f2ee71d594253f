use std::fs;
use std::path::Path;
use std::process::Command;

use fovexpm::commands::{bound, expmv, generate, sweep, CertificateFile};
use fovexpm::config::{Params, RunConfig};
use fovexpm::io::{read_matrix_market, read_vector, write_matrix_market};
use fovexpm::sweep::{SweepConfig, CSV_COLUMNS};
use fovexpm::CliError;
use fovexpm_core::expmv::RegionMode;
use fovexpm_core::fem::Domain;
use fovexpm_core::linalg::{CholeskyFactor, SparseMatrix};
use fovexpm_core::rational::Method;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_fovexpm"))
}

fn square(divisions: usize, d: f64) -> RunConfig {
    RunConfig { domain: Some(Domain::Square), divisions: Some(divisions), d: Some(d), ..Default::default() }
}

fn with_out(mut c: RunConfig, dir: &Path) -> RunConfig {
    c.out = Some(dir.to_path_buf());
    c
}

#[test]
fn generate_square_has_interior_grid_size() {
    let dir = tempfile::tempdir().unwrap();
    let s = generate(&with_out(square(20, 0.1), dir.path())).unwrap();
    assert_eq!(s.params.n, 19 * 19);
    for f in ["M.mtx", "K.mtx", "b0.txt", "mesh.txt", "params.json"] {
        assert!(dir.path().join(f).is_file(), "{f}");
    }
    let m = read_matrix_market(&dir.path().join("M.mtx")).unwrap();
    let k = read_matrix_market(&dir.path().join("K.mtx")).unwrap();
    assert_eq!((m.rows(), k.rows()), (361, 361));
    assert_eq!(read_vector(&dir.path().join("b0.txt")).unwrap().len(), 361);
    let params: Params = serde_json::from_str(&fs::read_to_string(dir.path().join("params.json")).unwrap()).unwrap();
    assert_eq!(params, s.params);
}

#[test]
fn generate_star_gives_spd_mass() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = RunConfig { domain: Some(Domain::Star), refine: Some(3), ..Default::default() };
    let s = generate(&with_out(cfg, dir.path())).unwrap();
    let m = read_matrix_market(&dir.path().join("M.mtx")).unwrap();
    assert_eq!(m.rows(), s.params.n);
    CholeskyFactor::sparse(&m).unwrap();
}

#[test]
fn generate_needs_an_existing_directory() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope");
    assert!(matches!(generate(&with_out(square(4, 0.1), &missing)), Err(CliError::Config(_))));
    let status = bin().args(["generate", "--divisions", "4", "--out"]).arg(&missing).status().unwrap();
    assert!(!status.success());
}

#[test]
fn bound_of_symmetric_stiffness_has_flat_rectangle() {
    let dir = tempfile::tempdir().unwrap();
    generate(&with_out(square(8, 0.1), dir.path())).unwrap();
    let k = read_matrix_market(&dir.path().join("K.mtx")).unwrap();
    let dense = k.to_dense();
    let sym = SparseMatrix::from_dense(&fovexpm_core::linalg::DenseMatrix::from_fn(k.rows(), k.cols(), |i, j| {
        0.5 * (dense[(i, j)] + dense[(j, i)])
    }));
    let ks = dir.path().join("Ksym.mtx");
    write_matrix_market(&ks, &sym, None).unwrap();
    let cfg = RunConfig { m: Some(dir.path().join("M.mtx")), k: Some(ks), ..Default::default() };
    let b = bound(&cfg).unwrap();
    let r = b.rectangle;
    assert!(r.nu_min <= 0.0 && r.nu_max >= 0.0);
    assert!(r.raw.nu_min.abs() < 1e-12 && r.raw.nu_max.abs() < 1e-12, "{r:?}");
    assert!(r.nu_max.abs() <= r.inflation && r.nu_min.abs() <= r.inflation);
}

#[test]
fn bound_certifies_lhp_and_scales_with_tau() {
    let dir = tempfile::tempdir().unwrap();
    let base = with_out(square(10, 0.01), dir.path());
    let one = bound(&base).unwrap();
    assert!(one.lhp_certified);
    assert!(one.summary().last().unwrap() == "LHP: certified");
    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("bound.json")).unwrap()).unwrap();
    assert_eq!(json["schema"], "fovexpm/bound/v1");
    let ten = bound(&RunConfig { tau_factor: Some(10.0), ..base }).unwrap();
    let (a, b) = (one.rectangle.raw, ten.rectangle.raw);
    for (x, y) in [(a.mu_min, b.mu_min), (a.mu_max, b.mu_max), (a.nu_min, b.nu_min), (a.nu_max, b.nu_max)] {
        assert!((10.0 * x - y).abs() <= 1e-3 * y.abs().max(1e-300) + 1e-12, "{x} {y}");
    }

    let out = bin().args(["bound", "--divisions", "6", "--d", "0.1"]).output().unwrap();
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("LHP: certified"));
}

#[test]
fn expmv_from_generated_files_verifies() {
    let dir = tempfile::tempdir().unwrap();
    generate(&with_out(square(10, 0.1), dir.path())).unwrap();
    for (method, mode) in [(Method::SubPade, RegionMode::Symmetrized), (Method::RatInterp, RegionMode::DenseA)] {
        let cfg = RunConfig {
            m: Some(dir.path().join("M.mtx")),
            k: Some(dir.path().join("K.mtx")),
            tau_factor: Some(1.0),
            eps: Some(1e-6),
            method: Some(method),
            mode: Some(mode),
            verify: true,
            out: Some(dir.path().to_path_buf()),
            ..Default::default()
        };
        let r = expmv(&cfg).unwrap();
        let c = &r.certificate;
        let measured = c.measured_error.unwrap();
        assert!(measured <= 1e-6 && measured <= c.certified_bound.unwrap(), "{c:?}");
        assert_eq!(read_vector(&dir.path().join("x.txt")).unwrap(), r.x);
        let file: CertificateFile =
            serde_json::from_str(&fs::read_to_string(dir.path().join("certificate.json")).unwrap()).unwrap();
        assert_eq!(file.status, "certified");
        assert_eq!(file.schema, "fovexpm/certificate/v1");
        let csv = fs::read_to_string(dir.path().join("run.csv")).unwrap();
        assert_eq!(csv.lines().count(), 2);
        assert!(csv.lines().nth(1).unwrap().starts_with("square,P1,1e-1,81,"), "{csv}");
    }
}

#[test]
fn expmv_failure_writes_marker_and_exits_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "expmv",
        "--domain",
        "square",
        "--divisions",
        "8",
        "--d",
        "0.1",
        "--tau-factor",
        "10",
        "--eps",
        "1e-8",
        "--method",
        "sub-pade",
        "--mode",
        "i",
        "--out",
    ];
    let out = bin().args(args).arg(dir.path()).output().unwrap();
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
    let file: CertificateFile =
        serde_json::from_str(&fs::read_to_string(dir.path().join("certificate.json")).unwrap()).unwrap();
    assert_eq!(file.status, "failed");
    let f = file.failure.unwrap();
    assert_eq!((f.marker.as_str(), f.kind.as_str()), ("--", "scaling-exhausted"));
    assert!(f.context.is_some());
    assert!(!dir.path().join("x.txt").exists());
    let csv = fs::read_to_string(dir.path().join("run.csv")).unwrap();
    assert!(csv.lines().nth(1).unwrap().ends_with(",--,,--,scaling-exhausted"));
}

#[test]
fn json_config_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    fs::write(&cfg, r#"{"domain": "square", "divisions": 6, "eps": 1e-2, "method": "rat-interp", "mode": "ii"}"#)
        .unwrap();
    let out = bin()
        .args(["expmv", "--eps", "1e-9", "--verify", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let file: CertificateFile =
        serde_json::from_str(&fs::read_to_string(dir.path().join("certificate.json")).unwrap()).unwrap();
    assert_eq!((file.eps, file.method, file.n), (1e-9, Method::RatInterp, 25));
    assert!(file.measured_error.unwrap() <= 1e-9);
}

#[test]
fn sweep_is_deterministic_and_bounded() {
    let dir = tempfile::tempdir().unwrap();
    let config_path = dir.path().join("sweep.json");
    fs::write(
        &config_path,
        r#"{"matrices": [{"domain": "square", "divisions": 6, "d": 0.1}, {"domain": "star", "refine": 1, "d": 0.001}],
            "tau-factors": [1, 10], "eps": [1e-2, 1e-6], "verify": true, "seed": 7}"#,
    )
    .unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for p in [&a, &b] {
        let s = bin().args(["sweep", "--config"]).arg(&config_path).arg("--out").arg(p).status().unwrap();
        assert!(s.success());
    }
    let text = fs::read_to_string(&a).unwrap();
    assert_eq!(text, fs::read_to_string(&b).unwrap());
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    assert_eq!(reader.headers().unwrap().iter().collect::<Vec<_>>(), CSV_COLUMNS);
    let mut rows = 0;
    for rec in reader.records() {
        let rec = rec.unwrap();
        rows += 1;
        if rec[10] == *"--" {
            assert_eq!(&rec[12], "--");
            continue;
        }
        let eps: f64 = rec[9].parse().unwrap();
        let measured: f64 = rec[11].parse().unwrap();
        let bound: f64 = rec[12].parse().unwrap();
        assert!(measured <= bound && measured <= eps, "{rec:?}");
    }
    assert_eq!(rows, 2 * 2 * 2 * 2 * 2);
}

#[test]
fn empty_sweep_writes_header_only() {
    let dir = tempfile::tempdir().unwrap();
    let report = sweep(&SweepConfig::default(), Some(dir.path())).unwrap();
    assert!(report.rows.is_empty());
    assert_eq!(fs::read_to_string(dir.path().join("sweep.csv")).unwrap(), format!("{}\n", CSV_COLUMNS.join(",")));
}
