//! Run configuration shared by the single-run commands.
//!
//! A configuration comes from an optional JSON file; command-line flags are
//! then merged over it. A run reads its pencil either from Matrix Market
//! files or from the built-in finite element generator, never both.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use fovexpm_core::expmv::{ExpmvOptions, RegionMode};
use fovexpm_core::fem::{generate, AssembledSystem, Domain, ProblemSpec};
use fovexpm_core::linalg::SparseMatrix;
use fovexpm_core::rational::Method;
use fovexpm_core::spectral::Pencil;

use crate::error::{CliError, Result};
use crate::io::{read_matrix_market, read_vector};

pub const PARAMS_FILE: &str = "params.json";
pub const PARAMS_SCHEMA: &str = "fovexpm/params/v1";
pub const DEFAULT_B_FILE: &str = "b0.txt";

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct RunConfig {
    pub m: Option<PathBuf>,
    pub k: Option<PathBuf>,
    pub b: Option<PathBuf>,
    pub domain: Option<Domain>,
    pub divisions: Option<usize>,
    pub refine: Option<usize>,
    pub d: Option<f64>,
    pub star_points: Option<usize>,
    pub r_outer: Option<f64>,
    pub r_inner: Option<f64>,
    pub tau: Option<f64>,
    pub tau_factor: Option<f64>,
    /// Mesh size for `tau-factor` with file inputs when no `params.json`
    /// sits next to the mass matrix.
    pub h_bar: Option<f64>,
    pub eps: Option<f64>,
    pub method: Option<Method>,
    pub mode: Option<RegionMode>,
    pub verify: bool,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub per_side: Option<usize>,
    pub rel_resid_tol: Option<f64>,
    pub dense_cutoff: Option<usize>,
    pub strict_kappa: bool,
}

pub const DEFAULT_DIVISIONS: usize = 20;
pub const DEFAULT_REFINE: usize = 4;
pub const DEFAULT_D: f64 = 0.1;

impl RunConfig {
    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| CliError::parse(path, e.line(), e.to_string()))
    }

    /// Fields set in `over` replace those in `self`; boolean switches are
    /// or-ed.
    pub fn merge(self, over: RunConfig) -> RunConfig {
        RunConfig {
            m: over.m.or(self.m),
            k: over.k.or(self.k),
            b: over.b.or(self.b),
            domain: over.domain.or(self.domain),
            divisions: over.divisions.or(self.divisions),
            refine: over.refine.or(self.refine),
            d: over.d.or(self.d),
            star_points: over.star_points.or(self.star_points),
            r_outer: over.r_outer.or(self.r_outer),
            r_inner: over.r_inner.or(self.r_inner),
            tau: over.tau.or(self.tau),
            tau_factor: over.tau_factor.or(self.tau_factor),
            h_bar: over.h_bar.or(self.h_bar),
            eps: over.eps.or(self.eps),
            method: over.method.or(self.method),
            mode: over.mode.or(self.mode),
            verify: over.verify || self.verify,
            out: over.out.or(self.out),
            seed: over.seed.or(self.seed),
            per_side: over.per_side.or(self.per_side),
            rel_resid_tol: over.rel_resid_tol.or(self.rel_resid_tol),
            dense_cutoff: over.dense_cutoff.or(self.dense_cutoff),
            strict_kappa: over.strict_kappa || self.strict_kappa,
        }
    }

    fn has_files(&self) -> bool {
        self.m.is_some() || self.k.is_some()
    }

    fn has_generator(&self) -> bool {
        self.domain.is_some()
            || self.divisions.is_some()
            || self.refine.is_some()
            || self.d.is_some()
            || self.star_points.is_some()
            || self.r_outer.is_some()
            || self.r_inner.is_some()
    }

    /// Generator parameters with defaults filled in. Fails when file inputs
    /// are also present.
    pub fn problem_spec(&self) -> Result<ProblemSpec> {
        if self.has_files() {
            return Err(CliError::Config("generator parameters and --m/--k are mutually exclusive".into()));
        }
        let d = self.d.unwrap_or(DEFAULT_D);
        let mut spec = match self.domain.unwrap_or(Domain::Square) {
            Domain::Square => ProblemSpec::square(self.divisions.unwrap_or(DEFAULT_DIVISIONS), d),
            Domain::Star => ProblemSpec::star(self.refine.unwrap_or(DEFAULT_REFINE), d),
        };
        if let Some(p) = self.star_points {
            spec.star_points = p;
        }
        if let Some(r) = self.r_outer {
            spec.r_outer = r;
        }
        if let Some(r) = self.r_inner {
            spec.r_inner = r;
        }
        if !(spec.d.is_finite() && spec.d > 0.0) {
            return Err(CliError::Config("d must be positive".into()));
        }
        Ok(spec)
    }

    /// Loads the pencil matrices and the starting vector.
    pub fn load(&self) -> Result<Problem> {
        match (self.has_files(), self.has_generator()) {
            (true, true) => Err(CliError::Config("give either --m/--k or generator parameters, not both".into())),
            (true, false) => {
                let (Some(mp), Some(kp)) = (&self.m, &self.k) else {
                    return Err(CliError::Config("--m and --k must be given together".into()));
                };
                let m = read_matrix_market(mp)?;
                let k = read_matrix_market(kp)?;
                // generate writes the initial vector next to the matrices
                let default_b = mp.with_file_name(DEFAULT_B_FILE);
                let b = match &self.b {
                    Some(p) => Some(read_vector(p)?),
                    None if default_b.exists() => Some(read_vector(&default_b)?),
                    None => None,
                };
                let params = read_params_near(mp)?;
                let h_bar = self.h_bar.or(params.as_ref().map(|p| p.h_bar));
                let name = match &params {
                    Some(p) => p.spec.domain.name().to_string(),
                    None => mp
                        .parent()
                        .and_then(Path::file_name)
                        .map_or_else(|| "file".to_string(), |s| s.to_string_lossy().into_owned()),
                };
                Ok(Problem { name, m, k, b, h_bar, spec: params.map(|p| p.spec), system: None })
            }
            (false, _) => {
                let spec = self.problem_spec()?;
                let system = generate(&spec)?;
                let b = match &self.b {
                    Some(p) => Some(read_vector(p)?),
                    None => Some(system.b0.clone()),
                };
                Ok(Problem {
                    name: spec.domain.name().to_string(),
                    m: system.m.clone(),
                    k: system.k.clone(),
                    b,
                    h_bar: Some(system.h_bar()),
                    spec: Some(spec),
                    system: Some(system),
                })
            }
        }
    }

    /// Time step from `tau` or `tau-factor * h_bar`; defaults to one mesh
    /// size when neither is given.
    pub fn resolve_tau(&self, h_bar: Option<f64>) -> Result<f64> {
        let tau = match (self.tau, self.tau_factor) {
            (Some(_), Some(_)) => return Err(CliError::Config("give tau or tau-factor, not both".into())),
            (Some(t), None) => t,
            (None, factor) => {
                let h = h_bar.ok_or_else(|| {
                    CliError::Config(
                        "tau-factor needs a mesh size: use a generated problem, params.json or h-bar".into(),
                    )
                })?;
                factor.unwrap_or(1.0) * h
            }
        };
        if tau.is_finite() && tau > 0.0 {
            Ok(tau)
        } else {
            Err(CliError::Config(format!("tau must be positive, got {tau}")))
        }
    }

    pub fn eps(&self) -> Result<f64> {
        let eps = self.eps.ok_or_else(|| CliError::Config("--eps is required".into()))?;
        if eps.is_finite() && eps > 0.0 {
            Ok(eps)
        } else {
            Err(CliError::Config(format!("eps must be positive, got {eps}")))
        }
    }

    pub fn expmv_options(&self) -> ExpmvOptions {
        let mut o =
            ExpmvOptions { mode: self.mode.unwrap_or_default(), strict_kappa: self.strict_kappa, ..Default::default() };
        if let Some(s) = self.seed {
            o.eig.seed = s;
        }
        if let Some(t) = self.rel_resid_tol {
            o.eig.rel_resid_tol = t;
        }
        if let Some(c) = self.dense_cutoff {
            o.eig.dense_cutoff = c;
        }
        if let Some(p) = self.per_side {
            o.approx.per_side = p;
        }
        o
    }
}

/// Matrices and metadata of one pencil before a time step is chosen.
#[derive(Debug, Clone)]
pub struct Problem {
    pub name: String,
    pub m: SparseMatrix<f64>,
    pub k: SparseMatrix<f64>,
    pub b: Option<Vec<f64>>,
    pub h_bar: Option<f64>,
    pub spec: Option<ProblemSpec>,
    pub system: Option<AssembledSystem>,
}

impl Problem {
    pub fn dim(&self) -> usize {
        self.m.rows()
    }

    pub fn pencil(&self, tau: f64) -> Result<Pencil> {
        Ok(Pencil::new(tau, self.m.clone(), self.k.clone())?)
    }

    /// The starting vector, checked against the pencil size.
    pub fn rhs(&self) -> Result<&[f64]> {
        let b = self.b.as_deref().ok_or_else(|| CliError::Config("--b is required with file inputs".into()))?;
        if b.len() != self.dim() {
            return Err(CliError::Config(format!("b has {} entries, the pencil has size {}", b.len(), self.dim())));
        }
        Ok(b)
    }
}

/// Contents of `params.json` as written by `generate`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Params {
    pub schema: String,
    pub spec: ProblemSpec,
    pub n: usize,
    pub h_bar: f64,
    pub vertices: usize,
    pub triangles: usize,
}

fn read_params_near(m_path: &Path) -> Result<Option<Params>> {
    let path = m_path.with_file_name(PARAMS_FILE);
    if !path.exists() {
        return Ok(None);
    }
    let text = fs::read_to_string(&path).map_err(|e| CliError::io(&path, e))?;
    let params: Params = serde_json::from_str(&text).map_err(|e| CliError::parse(&path, e.line(), e.to_string()))?;
    if params.schema != PARAMS_SCHEMA {
        return Err(CliError::parse(&path, 1, format!("unsupported schema {}", params.schema)));
    }
    Ok(Some(params))
}
