//! Command-line parsing and dispatch.

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use fovexpm_core::expmv::RegionMode;
use fovexpm_core::fem::Domain;
use fovexpm_core::rational::Method;

use crate::commands;
use crate::config::RunConfig;
use crate::error::{CliError, Result};
use crate::sweep::SweepConfig;

#[derive(Debug, Parser)]
#[command(name = "fovexpm", version, about = "Error-controlled exp(tau M^-1 K) b for finite element pencils")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a generated test pencil (M.mtx, K.mtx, b0.txt, mesh.txt, params.json).
    Generate(RunArgs),
    /// Compute the bounding rectangle and condition estimate.
    Bound(RunArgs),
    /// Certify and apply the rational approximant.
    Expmv(RunArgs),
    /// Run a grid of experiments and write a CSV report.
    Sweep(SweepArgs),
}

#[derive(Debug, Args, Default)]
pub struct InputArgs {
    /// Mass matrix (Matrix Market).
    #[arg(long)]
    pub m: Option<PathBuf>,
    /// Stiffness matrix (Matrix Market).
    #[arg(long)]
    pub k: Option<PathBuf>,
    /// Starting vector, one value per line.
    #[arg(long)]
    pub b: Option<PathBuf>,
    /// Cells per side of the square mesh.
    #[arg(long)]
    pub divisions: Option<usize>,
    /// Refinement rounds of the star mesh.
    #[arg(long)]
    pub refine: Option<usize>,
    /// Mesh size used with --tau-factor for file inputs without params.json.
    #[arg(long)]
    pub h_bar: Option<f64>,
    /// Seed of the random starting vectors in the eigensolvers
    #[arg(long)]
    pub seed: Option<u64>,
    /// Boundary samples per rectangle side.
    #[arg(long)]
    pub per_side: Option<usize>,
    /// Relative residual tolerance of the iterative eigensolver.
    #[arg(long)]
    pub rel_resid_tol: Option<f64>,
    /// Use kappa(M) instead of its square root in the scalar target.
    #[arg(long)]
    pub strict_kappa: bool,
    /// JSON configuration; flags override its fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args, Default)]
pub struct RunArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// square or star
    #[arg(long)]
    pub domain: Option<Domain>,
    /// Diffusion coefficient.
    #[arg(long)]
    pub d: Option<f64>,
    /// Time step.
    #[arg(long, conflicts_with = "tau_factor")]
    pub tau: Option<f64>,
    /// Time step as a multiple of the mean edge length.
    #[arg(long)]
    pub tau_factor: Option<f64>,
    /// Relative error tolerance
    #[arg(long)]
    pub eps: Option<f64>,
    /// sub-pade or rat-interp.
    #[arg(long)]
    pub method: Option<Method>,
    /// i (dense A) or ii (symmetrized pencil).
    #[arg(long)]
    pub mode: Option<RegionMode>,
    /// Compare against the dense oracle.
    #[arg(long)]
    pub verify: bool,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Default)]
pub struct SweepArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Comma-separated domains
    #[arg(long, value_delimiter = ',')]
    pub domain: Vec<Domain>,
    /// Comma-separated diffusion coefficients
    #[arg(long, value_delimiter = ',')]
    pub d: Vec<f64>,
    /// Comma-separated time steps in units of the mean edge length
    #[arg(long, value_delimiter = ',')]
    pub tau_factor: Vec<f64>,
    /// Comma-separated tolerances
    #[arg(long, value_delimiter = ',')]
    pub eps: Vec<f64>,
    /// Comma-separated methods
    #[arg(long, value_delimiter = ',')]
    pub method: Vec<Method>,
    /// Comma-separated region modes
    #[arg(long, value_delimiter = ',')]
    pub mode: Vec<RegionMode>,
    /// Compare every run against the dense oracle
    #[arg(long)]
    pub verify: bool,
    /// CSV file, or a directory to hold sweep.csv; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl RunArgs {
    pub fn to_config(&self) -> Result<RunConfig> {
        let i = &self.input;
        let flags = RunConfig {
            m: i.m.clone(),
            k: i.k.clone(),
            b: i.b.clone(),
            domain: self.domain,
            divisions: i.divisions,
            refine: i.refine,
            d: self.d,
            tau: self.tau,
            tau_factor: self.tau_factor,
            h_bar: i.h_bar,
            eps: self.eps,
            method: self.method,
            mode: self.mode,
            verify: self.verify,
            out: self.out.clone(),
            seed: i.seed,
            per_side: i.per_side,
            rel_resid_tol: i.rel_resid_tol,
            strict_kappa: i.strict_kappa,
            ..Default::default()
        };
        let base = match &i.config {
            Some(p) => RunConfig::from_json_file(p)?,
            None => RunConfig::default(),
        };
        Ok(base.merge(flags))
    }
}

impl SweepArgs {
    /// Matrix list from the flags: the product of domains and diffusion
    /// coefficients, or a single file pencil.
    fn matrices(&self) -> Vec<RunConfig> {
        let i = &self.input;
        if i.m.is_some() || i.k.is_some() {
            return vec![RunConfig {
                m: i.m.clone(),
                k: i.k.clone(),
                b: i.b.clone(),
                h_bar: i.h_bar,
                ..Default::default()
            }];
        }
        let domains = if self.domain.is_empty() { vec![Domain::Square] } else { self.domain.clone() };
        let ds = if self.d.is_empty() { vec![crate::config::DEFAULT_D] } else { self.d.clone() };
        domains
            .iter()
            .flat_map(|&domain| {
                ds.iter().map(move |&d| RunConfig {
                    domain: Some(domain),
                    d: Some(d),
                    divisions: if domain == Domain::Square { i.divisions } else { None },
                    refine: if domain == Domain::Star { i.refine } else { None },
                    b: i.b.clone(),
                    ..Default::default()
                })
            })
            .collect()
    }

    pub fn to_config(&self) -> Result<SweepConfig> {
        let i = &self.input;
        let mut c = match &i.config {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| CliError::io(p, e))?;
                serde_json::from_str(&text).map_err(|e| CliError::parse(p, e.line(), e.to_string()))?
            }
            None => SweepConfig { matrices: self.matrices(), ..Default::default() },
        };
        let matrix_flags = !self.domain.is_empty()
            || !self.d.is_empty()
            || i.m.is_some()
            || i.k.is_some()
            || i.divisions.is_some()
            || i.refine.is_some();
        if i.config.is_some() && matrix_flags {
            c.matrices = self.matrices();
        }
        if !self.tau_factor.is_empty() {
            c.tau_factors = self.tau_factor.clone();
        }
        if !self.eps.is_empty() {
            c.eps = self.eps.clone();
        }
        if !self.method.is_empty() {
            c.methods = self.method.clone();
        }
        if !self.mode.is_empty() {
            c.modes = self.mode.clone();
        }
        c.verify |= self.verify;
        c.strict_kappa |= i.strict_kappa;
        c.seed = i.seed.or(c.seed);
        c.per_side = i.per_side.or(c.per_side);
        c.rel_resid_tol = i.rel_resid_tol.or(c.rel_resid_tol);
        Ok(c)
    }
}

/// Runs a parsed command, printing summaries to `stdout`.
pub fn run(cli: &Cli, stdout: &mut dyn Write) -> Result<()> {
    let io = |e| CliError::io("<stdout>", e);
    match &cli.command {
        Command::Generate(a) => {
            let s = commands::generate(&a.to_config()?)?;
            writeln!(stdout, "n = {}, h_bar = {}", s.params.n, s.params.h_bar).map_err(io)?;
            for f in &s.files {
                writeln!(stdout, "wrote {}", f.display()).map_err(io)?;
            }
        }
        Command::Bound(a) => {
            let cfg = a.to_config()?;
            let b = commands::bound(&cfg)?;
            if cfg.out.is_none() {
                writeln!(stdout, "{}", serde_json::to_string_pretty(&b)?).map_err(io)?;
            }
            for line in b.summary() {
                writeln!(stdout, "{line}").map_err(io)?;
            }
        }
        Command::Expmv(a) => {
            let cfg = a.to_config()?;
            let r = commands::expmv(&cfg)?;
            let c = &r.certificate;
            if cfg.out.is_none() {
                stdout.write_all(crate::io::format_vector(&r.x, None).as_bytes()).map_err(io)?;
            }
            writeln!(
                stdout,
                "certified: method {} mode {} degree {} bound {:e}",
                c.method,
                c.mode.label(),
                c.degree.unwrap_or(0),
                c.certified_bound.unwrap_or(f64::NAN)
            )
            .map_err(io)?;
            if let Some(m) = c.measured_error {
                writeln!(stdout, "measured error {m:e}").map_err(io)?;
            }
        }
        Command::Sweep(a) => {
            let report = commands::sweep(&a.to_config()?, a.out.as_deref())?;
            if a.out.is_none() {
                report.write_csv(&mut *stdout)?;
            }
        }
    }
    Ok(())
}

/// Entry point used by the binary. Certification failures exit with 2,
/// other errors with 1.
pub fn main_with_args<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let mut out = std::io::stdout().lock();
    match run(&cli, &mut out) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if matches!(e, CliError::Certification(_)) { 2 } else { 1 })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Cli {
        Cli::try_parse_from(std::iter::once("fovexpm").chain(args.iter().copied())).unwrap()
    }

    #[test]
    fn run_flags_map_to_config() {
        let cli = parse(&[
            "expmv",
            "--domain",
            "star",
            "--refine",
            "2",
            "--tau-factor",
            "10",
            "--eps",
            "1e-6",
            "--mode",
            "i",
            "--method",
            "rat-interp",
            "--verify",
        ]);
        let Command::Expmv(a) = &cli.command else { panic!() };
        let c = a.to_config().unwrap();
        assert_eq!(c.domain, Some(Domain::Star));
        assert_eq!(c.refine, Some(2));
        assert_eq!(c.tau_factor, Some(10.0));
        assert_eq!(c.mode, Some(RegionMode::DenseA));
        assert_eq!(c.method, Some(Method::RatInterp));
        assert!(c.verify);
    }

    #[test]
    fn sweep_lists_are_comma_separated() {
        let cli =
            parse(&["sweep", "--domain", "square,star", "--d", "0.1,0.001", "--eps", "1e-2,1e-6", "--mode", "ii"]);
        let Command::Sweep(a) = &cli.command else { panic!() };
        let c = a.to_config().unwrap();
        assert_eq!(c.matrices.len(), 4);
        assert_eq!(c.eps, vec![1e-2, 1e-6]);
        assert_eq!(c.modes, vec![RegionMode::Symmetrized]);
        assert_eq!(c.methods, Method::ALL.to_vec());
    }

    #[test]
    fn bad_values_are_rejected() {
        let args = ["fovexpm", "expmv", "--method", "taylor"];
        assert!(Cli::try_parse_from(args).is_err());
        assert!(Cli::try_parse_from(["fovexpm", "bound", "--tau", "1", "--tau-factor", "1"]).is_err());
    }
}
