//! Parameter sweeps over matrices, time steps, tolerances, methods and
//! region modes, reported as CSV.
//!
//! Columns, in order:
//!
//! | column | meaning |
//! |---|---|
//! | `shape` | `square`, `star`, or the directory name of file inputs |
//! | `element` | `P1` for generated systems, `file` otherwise |
//! | `d` | diffusion coefficient, empty for file inputs without `params.json` |
//! | `n` | number of unknowns |
//! | `h_bar` | mean mesh edge length, empty when unknown |
//! | `kappa_m` | estimated 2-norm condition number of `M` |
//! | `tau_factor` | time step divided by `h_bar` (the time step itself when `h_bar` is unknown) |
//! | `method` | `sub-pade` or `rat-interp` |
//! | `mode` | `i` (rectangle of the dense `A`) or `ii` (symmetrized pencil) |
//! | `eps` | requested relative tolerance |
//! | `degree` | denominator degree, `--` on failure |
//! | `measured_error` | `‖x - exp(A) b‖ / ‖b‖` against the dense oracle, empty without `--verify` |
//! | `certified_bound` | guaranteed relative error, `--` on failure |
//! | `failure` | failure kind (for example `scaling-exhausted`), empty on success |
//!
//! Floating-point fields use the shortest round-trip scientific notation
//! (`1e-8`, `5.67e-2`), so the same configuration and seed always produce
//! the same bytes.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use fovexpm_core::expmv::{
    apply_certificate, certify_region, estimate_region, expmv_dense, ExpmvCertificate, ExpmvFailure, ExpmvOptions,
    Region, RegionMode, DENSE_ORACLE_CUTOFF,
};
use fovexpm_core::linalg::norm2;
use fovexpm_core::rational::Method;
use fovexpm_core::spectral::{cond_estimate, Pencil};

use crate::config::{Problem, RunConfig};
use crate::error::{CliError, Result};

pub const FAILURE_MARKER: &str = "--";

pub const CSV_COLUMNS: [&str; 14] = [
    "shape",
    "element",
    "d",
    "n",
    "h_bar",
    "kappa_m",
    "tau_factor",
    "method",
    "mode",
    "eps",
    "degree",
    "measured_error",
    "certified_bound",
    "failure",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct SweepConfig {
    /// Each entry uses the input fields of a run configuration: either
    /// generator parameters or `m`/`k`/`b` paths.
    pub matrices: Vec<RunConfig>,
    pub tau_factors: Vec<f64>,
    pub eps: Vec<f64>,
    pub methods: Vec<Method>,
    pub modes: Vec<RegionMode>,
    pub verify: bool,
    pub seed: Option<u64>,
    pub per_side: Option<usize>,
    pub rel_resid_tol: Option<f64>,
    pub strict_kappa: bool,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            matrices: Vec::new(),
            tau_factors: vec![1.0],
            eps: vec![1e-2, 1e-4, 1e-6, 1e-8],
            methods: Method::ALL.to_vec(),
            modes: RegionMode::ALL.to_vec(),
            verify: false,
            seed: None,
            per_side: None,
            rel_resid_tol: None,
            strict_kappa: false,
        }
    }
}

impl SweepConfig {
    fn options(&self, mode: RegionMode) -> ExpmvOptions {
        let base = RunConfig {
            seed: self.seed,
            per_side: self.per_side,
            rel_resid_tol: self.rel_resid_tol,
            strict_kappa: self.strict_kappa,
            mode: Some(mode),
            ..Default::default()
        };
        base.expmv_options()
    }

    fn validate(&self) -> Result<()> {
        if let Some(t) = self.tau_factors.iter().find(|t| !(t.is_finite() && **t > 0.0)) {
            return Err(CliError::Config(format!("tau factors must be positive, got {t}")));
        }
        if let Some(e) = self.eps.iter().find(|e| !(e.is_finite() && **e > 0.0)) {
            return Err(CliError::Config(format!("eps values must be positive, got {e}")));
        }
        Ok(())
    }
}

/// Result of one certified run.
#[derive(Debug, Clone, PartialEq)]
pub enum RowOutcome {
    Certified { degree: usize, certified_bound: f64, measured_error: Option<f64> },
    Failed { kind: &'static str, message: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub shape: String,
    pub element: String,
    pub d: Option<f64>,
    pub n: usize,
    pub h_bar: Option<f64>,
    pub kappa_m: f64,
    pub tau_factor: f64,
    pub method: Method,
    pub mode: RegionMode,
    pub eps: f64,
    pub outcome: RowOutcome,
}

impl SweepRow {
    pub fn degree(&self) -> Option<usize> {
        match self.outcome {
            RowOutcome::Certified { degree, .. } => Some(degree),
            RowOutcome::Failed { .. } => None,
        }
    }

    pub fn measured_error(&self) -> Option<f64> {
        match self.outcome {
            RowOutcome::Certified { measured_error, .. } => measured_error,
            RowOutcome::Failed { .. } => None,
        }
    }

    pub fn certified_bound(&self) -> Option<f64> {
        match self.outcome {
            RowOutcome::Certified { certified_bound, .. } => Some(certified_bound),
            RowOutcome::Failed { .. } => None,
        }
    }

    pub fn failure(&self) -> Option<&'static str> {
        match self.outcome {
            RowOutcome::Certified { .. } => None,
            RowOutcome::Failed { kind, .. } => Some(kind),
        }
    }

    fn record(&self) -> [String; 14] {
        let sci = |x: f64| format!("{x:e}");
        let opt = |v: Option<f64>| v.map(sci).unwrap_or_default();
        let (degree, measured, bound, failure) = match &self.outcome {
            RowOutcome::Certified { degree, certified_bound, measured_error } => {
                (degree.to_string(), opt(*measured_error), sci(*certified_bound), String::new())
            }
            RowOutcome::Failed { kind, .. } => {
                (FAILURE_MARKER.to_string(), String::new(), FAILURE_MARKER.to_string(), (*kind).to_string())
            }
        };
        [
            self.shape.clone(),
            self.element.clone(),
            opt(self.d),
            self.n.to_string(),
            opt(self.h_bar),
            sci(self.kappa_m),
            sci(self.tau_factor),
            self.method.name().to_string(),
            self.mode.label().to_string(),
            sci(self.eps),
            degree,
            measured,
            bound,
            failure,
        ]
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SweepReport {
    pub rows: Vec<SweepRow>,
}

impl SweepReport {
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        write_rows(out, &self.rows)
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(String::from_utf8(buf).expect("csv output is utf-8"))
    }
}

pub fn write_rows<W: Write>(out: W, rows: &[SweepRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_COLUMNS)?;
    for r in rows {
        w.write_record(r.record())?;
    }
    w.flush().map_err(|e| CliError::io("<csv>", e))?;
    Ok(())
}

/// Static description of the matrix a row belongs to.
#[derive(Debug, Clone)]
pub(crate) struct MatrixInfo {
    pub shape: String,
    pub element: String,
    pub d: Option<f64>,
    pub n: usize,
    pub h_bar: Option<f64>,
    pub kappa_m: f64,
}

impl MatrixInfo {
    pub(crate) fn new(problem: &Problem, options: &ExpmvOptions) -> Result<Self> {
        let kappa_m = cond_estimate(&problem.m, options.delta, &options.eig)?.kappa_tilde;
        Ok(Self {
            shape: problem.name.clone(),
            element: if problem.spec.is_some() { "P1" } else { "file" }.to_string(),
            d: problem.spec.map(|s| s.d),
            n: problem.dim(),
            h_bar: problem.h_bar,
            kappa_m,
        })
    }

    pub(crate) fn row(
        &self,
        tau_factor: f64,
        method: Method,
        mode: RegionMode,
        eps: f64,
        outcome: RowOutcome,
    ) -> SweepRow {
        SweepRow {
            shape: self.shape.clone(),
            element: self.element.clone(),
            d: self.d,
            n: self.n,
            h_bar: self.h_bar,
            kappa_m: self.kappa_m,
            tau_factor,
            method,
            mode,
            eps,
            outcome,
        }
    }
}

/// `exp(tau M^{-1} K) b` from the dense oracle, or `None` above the cutoff.
pub fn oracle_solution(pencil: &Pencil, b: &[f64]) -> Result<Option<Vec<f64>>> {
    if pencil.dim() > DENSE_ORACLE_CUTOFF {
        return Ok(None);
    }
    Ok(Some(expmv_dense(&pencil.a_dense()?, b)?))
}

pub fn relative_error(x: &[f64], reference: &[f64], b: &[f64]) -> f64 {
    let diff: Vec<f64> = x.iter().zip(reference).map(|(a, r)| a - r).collect();
    norm2(&diff) / norm2(b)
}

/// Certified result of one (eps, method) pair on a precomputed region.
pub struct RunResult {
    pub x: Vec<f64>,
    pub certificate: ExpmvCertificate,
    pub measured_error: Option<f64>,
}

pub fn run_on_region(
    region: &Region,
    pencil: &Pencil,
    b: &[f64],
    reference: Option<&[f64]>,
    eps: f64,
    method: Method,
    options: &ExpmvOptions,
) -> std::result::Result<RunResult, ExpmvFailure> {
    let certificate = certify_region(region, eps, method, options)?;
    let x = apply_certificate(&certificate, pencil, b)?;
    let measured_error = reference.map(|r| relative_error(&x, r, b));
    Ok(RunResult { x, certificate, measured_error })
}

pub(crate) fn outcome(r: std::result::Result<RunResult, ExpmvFailure>) -> RowOutcome {
    match r {
        Ok(run) => RowOutcome::Certified {
            degree: run.certificate.degree,
            certified_bound: run.certificate.error_bound(),
            measured_error: run.measured_error,
        },
        Err(f) => RowOutcome::Failed { kind: f.error.kind(), message: f.to_string() },
    }
}

/// All rows for one matrix at one time step.
fn sweep_one(config: &SweepConfig, problem: &Problem, info: &MatrixInfo, tau_factor: f64) -> Result<Vec<SweepRow>> {
    let tau = problem.h_bar.map_or(tau_factor, |h| tau_factor * h);
    let pencil = problem.pencil(tau)?;
    let b = problem.rhs()?;
    let reference = if config.verify { oracle_solution(&pencil, b)? } else { None };
    let regions: Vec<(RegionMode, ExpmvOptions, std::result::Result<Region, ExpmvFailure>)> = config
        .modes
        .par_iter()
        .map(|&mode| {
            let options = config.options(mode);
            let region = estimate_region(&pencil, &options).map_err(ExpmvFailure::from);
            (mode, options, region)
        })
        .collect();
    let jobs: Vec<(Method, usize, f64)> = config
        .methods
        .iter()
        .flat_map(|&m| (0..regions.len()).flat_map(move |r| config.eps.iter().map(move |&e| (m, r, e))))
        .collect();
    Ok(jobs
        .into_par_iter()
        .map(|(method, r, eps)| {
            let (mode, options, region) = &regions[r];
            let result = match region {
                Ok(region) => run_on_region(region, &pencil, b, reference.as_deref(), eps, method, options),
                Err(f) => Err(f.clone()),
            };
            info.row(tau_factor, method, *mode, eps, outcome(result))
        })
        .collect())
}

/// Runs the sweep. Rows come out ordered by matrix, time step, method,
/// mode and tolerance, following the order given in the configuration.
pub fn run_sweep(config: &SweepConfig) -> Result<SweepReport> {
    config.validate()?;
    let problems = config
        .matrices
        .par_iter()
        .map(|m| {
            let problem = m.load()?;
            problem.rhs()?;
            let info = MatrixInfo::new(&problem, &config.options(RegionMode::Symmetrized))?;
            Ok((problem, info))
        })
        .collect::<Result<Vec<_>>>()?;
    let jobs: Vec<(usize, f64)> =
        (0..problems.len()).flat_map(|p| config.tau_factors.iter().map(move |&t| (p, t))).collect();
    let chunks = jobs
        .into_par_iter()
        .map(|(p, t)| sweep_one(config, &problems[p].0, &problems[p].1, t))
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepReport { rows: chunks.into_iter().flatten().collect() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use fovexpm_core::fem::Domain;

    #[test]
    fn empty_matrix_list_gives_header_only() {
        let report = run_sweep(&SweepConfig::default()).unwrap();
        assert!(report.rows.is_empty());
        assert_eq!(report.to_csv_string().unwrap(), format!("{}\n", CSV_COLUMNS.join(",")));
    }

    #[test]
    fn small_sweep_rows_are_ordered_and_bounded() {
        let config = SweepConfig {
            matrices: vec![RunConfig { domain: Some(Domain::Square), divisions: Some(6), ..Default::default() }],
            tau_factors: vec![1.0, 10.0],
            eps: vec![1e-3, 1e-7],
            verify: true,
            ..Default::default()
        };
        let report = run_sweep(&config).unwrap();
        assert_eq!(report.rows.len(), 2 * 2 * 2 * 2);
        let keys: Vec<_> = report.rows.iter().map(|r| (r.tau_factor, r.method, r.mode, r.eps)).collect();
        let mut expected = Vec::new();
        for t in &config.tau_factors {
            for m in &config.methods {
                for mode in &config.modes {
                    for e in &config.eps {
                        expected.push((*t, *m, *mode, *e));
                    }
                }
            }
        }
        assert_eq!(keys, expected);
        for r in &report.rows {
            assert_eq!(r.n, 25);
            if let (Some(m), Some(b)) = (r.measured_error(), r.certified_bound()) {
                assert!(m <= b, "{r:?}");
                assert!(m <= r.eps, "{r:?}");
            }
        }
        let again = run_sweep(&config).unwrap();
        assert_eq!(report.to_csv_string().unwrap(), again.to_csv_string().unwrap());
    }

    #[test]
    fn failures_use_the_marker() {
        let row = SweepRow {
            shape: "square".into(),
            element: "P1".into(),
            d: Some(0.1),
            n: 4,
            h_bar: Some(0.5),
            kappa_m: 3.0,
            tau_factor: 10.0,
            method: Method::SubPade,
            mode: RegionMode::DenseA,
            eps: 1e-8,
            outcome: RowOutcome::Failed { kind: "scaling-exhausted", message: String::new() },
        };
        let text = SweepReport { rows: vec![row] }.to_csv_string().unwrap();
        let line = text.lines().nth(1).unwrap();
        assert_eq!(line, "square,P1,1e-1,4,5e-1,3e0,1e1,sub-pade,i,1e-8,--,,--,scaling-exhausted");
    }

    #[test]
    fn bad_grid_values_are_rejected() {
        let c = SweepConfig { eps: vec![-1.0], ..Default::default() };
        assert!(matches!(run_sweep(&c), Err(CliError::Config(_))));
    }
}
