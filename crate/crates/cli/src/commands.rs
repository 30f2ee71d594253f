//! The `generate`, `bound`, `expmv` and `sweep` commands. Each returns a
//! summary for the caller to print and writes its files under `out`.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use fovexpm_core::expmv::{estimate_region, ExpmvCertificate, FailureContext, Region, RegionMode};
use fovexpm_core::fem::generate as generate_system;
use fovexpm_core::rational::Method;
use fovexpm_core::spectral::{BoundingRectangle, CondEstimate};

use crate::config::{Params, RunConfig, PARAMS_FILE, PARAMS_SCHEMA};
use crate::error::{CliError, Result};
use crate::io::{write_matrix_market, write_mesh, write_vector};
use crate::sweep::{
    oracle_solution, outcome, run_on_region, write_rows, MatrixInfo, SweepConfig, SweepReport, FAILURE_MARKER,
};

pub const BOUND_SCHEMA: &str = "fovexpm/bound/v1";
pub const CERTIFICATE_SCHEMA: &str = "fovexpm/certificate/v1";

fn out_dir(cfg: &RunConfig) -> Result<Option<&Path>> {
    match cfg.out.as_deref() {
        None => Ok(None),
        Some(p) if p.is_dir() => Ok(Some(p)),
        Some(p) => Err(CliError::Config(format!("output directory {} does not exist", p.display()))),
    }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

#[derive(Debug, Clone, PartialEq)]
pub struct GenerateSummary {
    pub params: Params,
    pub files: Vec<PathBuf>,
}

/// Writes `M.mtx`, `K.mtx`, `b0.txt`, `mesh.txt` and `params.json`.
pub fn generate(cfg: &RunConfig) -> Result<GenerateSummary> {
    let dir = out_dir(cfg)?.ok_or_else(|| CliError::Config("generate needs --out".into()))?;
    let spec = cfg.problem_spec()?;
    let system = generate_system(&spec)?;
    let params = Params {
        schema: PARAMS_SCHEMA.to_string(),
        spec,
        n: system.dim(),
        h_bar: system.h_bar(),
        vertices: system.mesh.num_vertices(),
        triangles: system.mesh.num_triangles(),
    };
    let label = format!("{} d={} n={}", spec.domain, spec.d, params.n);
    let files: Vec<PathBuf> =
        ["M.mtx", "K.mtx", "b0.txt", "mesh.txt", PARAMS_FILE].iter().map(|f| dir.join(f)).collect();
    write_matrix_market(&files[0], &system.m, Some(&format!("mass matrix, {label}")))?;
    write_matrix_market(&files[1], &system.k, Some(&format!("stiffness matrix, {label}")))?;
    write_vector(&files[2], &system.b0, Some(&format!("initial vector, {label}")))?;
    write_mesh(&files[3], &system.mesh)?;
    write_json(&files[4], &params)?;
    Ok(GenerateSummary { params, files })
}

/// Contents of `bound.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundFile {
    pub schema: String,
    pub n: usize,
    pub tau: f64,
    pub mode: RegionMode,
    pub rectangle: BoundingRectangle,
    pub cond: Option<CondEstimate>,
    pub lhp_certified: bool,
}

impl BoundFile {
    /// Human-readable lines, ending with the LHP status.
    pub fn summary(&self) -> Vec<String> {
        let r = &self.rectangle;
        let mut lines = vec![
            format!("n = {}, tau = {:e}, mode = {}", self.n, self.tau, self.mode.label()),
            format!("Re: [{:e}, {:e}]", r.mu_min, r.mu_max),
            format!("Im: [{:e}, {:e}]", r.nu_min, r.nu_max),
        ];
        if let Some(c) = &self.cond {
            lines.push(format!("kappa(M) ~ {:.6} (safe {:.6})", c.kappa_tilde, c.kappa_safe));
        }
        lines.push(format!("LHP: {}", if self.lhp_certified { "certified" } else { "not certified" }));
        lines
    }
}

/// Rectangle and condition estimate; writes `bound.json` when `out` is set.
pub fn bound(cfg: &RunConfig) -> Result<BoundFile> {
    let dir = out_dir(cfg)?;
    let problem = cfg.load()?;
    let pencil = problem.pencil(cfg.resolve_tau(problem.h_bar)?)?;
    let region = estimate_region(&pencil, &cfg.expmv_options())?;
    let file = BoundFile {
        schema: BOUND_SCHEMA.to_string(),
        n: pencil.dim(),
        tau: pencil.tau(),
        mode: region.mode,
        rectangle: region.rectangle,
        cond: region.cond,
        lhp_certified: region.rectangle.is_lhp_certified(),
    };
    if let Some(d) = dir {
        write_json(&d.join("bound.json"), &file)?;
    }
    Ok(file)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FailureInfo {
    /// Always `--`.
    pub marker: String,
    pub kind: String,
    pub message: String,
    pub context: Option<FailureContext>,
}

/// Contents of `certificate.json`. Exactly one of `certificate` and
/// `failure` is present.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateFile {
    pub schema: String,
    pub status: String,
    pub n: usize,
    pub tau: f64,
    pub eps: f64,
    pub method: Method,
    pub mode: RegionMode,
    pub degree: Option<usize>,
    pub certified_bound: Option<f64>,
    pub measured_error: Option<f64>,
    pub certificate: Option<ExpmvCertificate>,
    pub failure: Option<FailureInfo>,
}

#[derive(Debug, Clone)]
pub struct ExpmvOutput {
    pub x: Vec<f64>,
    pub certificate: CertificateFile,
}

/// Full pipeline. Writes `x.txt`, `certificate.json` and a one-row
/// `run.csv` in the sweep format. On certification failure the certificate
/// file is still written, then [`CliError::Certification`] is returned.
pub fn expmv(cfg: &RunConfig) -> Result<ExpmvOutput> {
    let dir = out_dir(cfg)?;
    let eps = cfg.eps()?;
    let method = cfg.method.unwrap_or(Method::SubPade);
    let options = cfg.expmv_options();
    let problem = cfg.load()?;
    let b = problem.rhs()?;
    let tau = cfg.resolve_tau(problem.h_bar)?;
    let pencil = problem.pencil(tau)?;
    let reference = if cfg.verify {
        Some(oracle_solution(&pencil, b)?.ok_or_else(|| CliError::Config("problem too large for --verify".into()))?)
    } else {
        None
    };
    let region: std::result::Result<Region, _> = estimate_region(&pencil, &options);
    let result = region
        .map_err(Into::into)
        .and_then(|r| run_on_region(&r, &pencil, b, reference.as_deref(), eps, method, &options));
    let mut file = CertificateFile {
        schema: CERTIFICATE_SCHEMA.to_string(),
        status: String::new(),
        n: pencil.dim(),
        tau,
        eps,
        method,
        mode: options.mode,
        degree: None,
        certified_bound: None,
        measured_error: None,
        certificate: None,
        failure: None,
    };
    let (x, failure) = match &result {
        Ok(run) => {
            file.status = "certified".into();
            file.degree = Some(run.certificate.degree);
            file.certified_bound = Some(run.certificate.error_bound());
            file.measured_error = run.measured_error;
            file.certificate = Some(run.certificate.clone());
            (run.x.clone(), None)
        }
        Err(f) => {
            file.status = "failed".into();
            file.failure = Some(FailureInfo {
                marker: FAILURE_MARKER.to_string(),
                kind: f.error.kind().to_string(),
                message: f.to_string(),
                context: f.context.as_deref().copied(),
            });
            (Vec::new(), Some(f.clone()))
        }
    };
    if let Some(d) = dir {
        write_json(&d.join("certificate.json"), &file)?;
        if failure.is_none() {
            write_vector(&d.join("x.txt"), &x, Some(&format!("exp(tau A) b, tau = {tau:e}")))?;
        }
        let info = MatrixInfo::new(&problem, &options)?;
        let tau_factor = problem.h_bar.map_or(tau, |h| tau / h);
        let row = info.row(tau_factor, method, options.mode, eps, outcome(result));
        let path = d.join("run.csv");
        let f = fs::File::create(&path).map_err(|e| CliError::io(&path, e))?;
        write_rows(f, &[row])?;
    }
    match failure {
        Some(f) => Err(CliError::Certification(Box::new(f))),
        None => Ok(ExpmvOutput { x, certificate: file }),
    }
}

/// Runs a sweep and writes the CSV to `out` (a file, or `sweep.csv`
/// inside a directory) when given.
pub fn sweep(config: &SweepConfig, out: Option<&Path>) -> Result<SweepReport> {
    let report = crate::sweep::run_sweep(config)?;
    if let Some(p) = out {
        let path = if p.is_dir() { p.join("sweep.csv") } else { p.to_path_buf() };
        let f = fs::File::create(&path).map_err(|e| CliError::io(&path, e))?;
        report.write_csv(f)?;
    }
    Ok(report)
}
