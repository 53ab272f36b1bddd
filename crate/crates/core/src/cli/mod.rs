//! Command-line front end. Every command is a thin shell over the library:
//! the same numbers come out of calling the module functions directly with
//! the same seed.

pub mod ingest;

use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

use crate::cochrane_orcutt::{draw_initial_rhos, fit, prewhiten, FitConfig, FitResult};
use crate::dwt::BasisName;
use crate::error::{Error, Result};
use crate::fanova::{test_constant_difference, TestBranch, TestConfig, TestOutcome};
use crate::rng::{stream, START_LANE};
use crate::shrinkage::{RegimeKind, ShrinkageSpec};
use crate::signal::Signal;
use crate::simlab::{fmt_g, run_study, write_reports, StudyConfig};

pub use ingest::SeriesFile;

/// Seed of `fit` and `test` when `--seed` is not given.
pub const DEFAULT_SEED: u64 = 20_100_101;

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "wfanova", version, about = "Wavelet estimation and FANOVA tests under CAR(1) errors")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LoopArg {
    Linear,
    Term,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FinalArg {
    Linear,
    Term,
    Block,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BranchArg {
    P2,
    P12,
    Adaptive,
    #[value(name = "adaptive-p2")]
    AdaptiveP2,
}

impl From<BranchArg> for TestBranch {
    fn from(b: BranchArg) -> Self {
        match b {
            BranchArg::P2 => TestBranch::PGe2,
            BranchArg::P12 => TestBranch::PIn12,
            BranchArg::Adaptive => TestBranch::AdaptiveGeneral,
            BranchArg::AdaptiveP2 => TestBranch::AdaptivePGe2,
        }
    }
}

#[derive(Debug, Clone, clap::Args)]
pub struct FitArgs {
    #[arg(long, default_value = "db6")]
    pub basis: BasisName,
    #[arg(long = "loop", value_enum, default_value = "term")]
    pub loop_regime: LoopArg,
    #[arg(long = "final", value_enum, default_value = "term")]
    pub final_regime: FinalArg,
    /// Number of random initial values for rho.
    #[arg(long, default_value_t = 5)]
    pub starts: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Rows to keep, a power of two. Defaults to the largest that fits.
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub time_column: Option<String>,
    #[arg(long)]
    pub value_column: Option<String>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a Monte Carlo study described by a TOML file.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Worker threads; defaults to all cores.
        #[arg(long)]
        jobs: Option<usize>,
        #[arg(long)]
        seed: u64,
    },
    /// Estimate rho and f from one series.
    Fit {
        #[arg(long)]
        input: PathBuf,
        #[command(flatten)]
        fit: FitArgs,
        /// Write the fitted curve here as CSV.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Test whether a series differs from a reference by a constant.
    Test {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        reference: PathBuf,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        #[arg(long, value_enum, default_value = "p2")]
        branch: BranchArg,
        /// Noise level of the normalized coefficients; estimated by MAD if absent.
        #[arg(long)]
        eta: Option<f64>,
        #[arg(long, default_value_t = crate::fanova::DEFAULT_J_MIN)]
        j_min: usize,
        #[command(flatten)]
        fit: FitArgs,
    },
}

impl FitArgs {
    fn series(&self, path: &PathBuf) -> SeriesFile {
        SeriesFile {
            path: path.clone(),
            time_column: self.time_column.clone(),
            value_column: self.value_column.clone(),
            length: self.n,
        }
    }

    pub fn fit_config(&self, n: usize) -> Result<FitConfig> {
        if self.starts == 0 {
            return Err(Error::InvalidConfig("--starts must be at least 1".into()));
        }
        let loop_kind = match self.loop_regime {
            LoopArg::Linear => RegimeKind::Linear,
            LoopArg::Term => RegimeKind::Term,
        };
        let final_kind = match self.final_regime {
            FinalArg::Linear => RegimeKind::Linear,
            FinalArg::Term => RegimeKind::Term,
            FinalArg::Block => RegimeKind::Block,
        };
        let starts = draw_initial_rhos(self.starts, &mut stream(self.seed, 0, START_LANE));
        Ok(FitConfig::new(
            self.basis,
            ShrinkageSpec::for_length(loop_kind, n)?,
            ShrinkageSpec::for_length(final_kind, n)?,
            starts,
        ))
    }
}

/// Parses `args` (program name first) and runs the command, printing to
/// stdout and stderr. Returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
        }
    };
    match execute(&cli.command) {
        Ok(out) => {
            print!("{out}");
            EXIT_OK
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_ERROR
        }
    }
}

/// Runs a parsed command and returns its report.
pub fn execute(command: &Command) -> Result<String> {
    match command {
        Command::Simulate { config, out, jobs, seed } => cmd_simulate(config, out, *jobs, *seed),
        Command::Fit { input, fit, output } => cmd_fit(input, fit, output.as_ref()),
        Command::Test { input, reference, alpha, branch, eta, j_min, fit } => {
            let mut cfg = TestConfig::new((*branch).into());
            cfg.alpha = *alpha;
            cfg.eta = *eta;
            cfg.j_min = *j_min;
            cfg.basis = fit.basis;
            cmd_test(input, reference, fit, &cfg)
        }
    }
}

pub fn cmd_simulate(config: &PathBuf, out: &PathBuf, jobs: Option<usize>, seed: u64) -> Result<String> {
    let text = std::fs::read_to_string(config)
        .map_err(|e| Error::Input(format!("{}: {e}", config.display())))?;
    let cfg = StudyConfig::from_toml_with_seed(&text, Some(seed))?;
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(j) = jobs {
        if j == 0 {
            return Err(Error::InvalidConfig("--jobs must be at least 1".into()));
        }
        pool = pool.num_threads(j);
    }
    let pool = pool.build().map_err(|e| Error::InvalidConfig(e.to_string()))?;
    let result = pool.install(|| run_study(&cfg))?;
    let files = write_reports(&result, &cfg, out)?;
    let failures = result.failures();
    if failures > 0 {
        eprintln!("warning: {failures} of {} replications failed; see records.csv", result.records.len());
    }
    let mut report = format!(
        "{} cells x {} replications, {} records, {failures} failures\n",
        cfg.cells().len(),
        cfg.replications,
        result.records.len()
    );
    for f in files {
        let _ = writeln!(report, "wrote {}", out.join(f).display());
    }
    Ok(report)
}

pub fn fit_series(y: &Signal, args: &FitArgs) -> Result<FitResult> {
    fit(y, &args.fit_config(y.len())?)
}

pub fn cmd_fit(input: &PathBuf, args: &FitArgs, output: Option<&PathBuf>) -> Result<String> {
    let y = args.series(input).load()?;
    let res = fit_series(&y, args)?;
    if let Some(path) = output {
        let mut body = String::from("t,f_hat\n");
        for (k, v) in res.f_hat.samples().iter().enumerate() {
            let t = y.origin_time() + k as f64 * y.dt();
            let _ = writeln!(body, "{},{}", fmt_g(t), fmt_g(*v));
        }
        std::fs::write(path, body).map_err(|e| Error::Input(format!("{}: {e}", path.display())))?;
    }
    Ok(fit_report(&res, y.len()))
}

pub fn fit_report(res: &FitResult, n: usize) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "n            {n}");
    let _ = writeln!(s, "rho_hat      {:.4}", res.rho_hat);
    let _ = writeln!(s, "sigma_u_hat  {}", fmt_g(res.sigma_u_hat));
    let _ = writeln!(s, "iterations   {}", res.iterations);
    let _ = writeln!(s, "converged    {}", res.converged);
    let _ = writeln!(s, "start,initial_rho,rho_hat,iterations,converged,rss,selected");
    for (i, st) in res.starts.iter().enumerate() {
        let _ = writeln!(
            s,
            "{i},{:.4},{:.4},{},{},{},{}",
            st.initial_rho,
            st.rho_hat,
            st.iterations,
            st.converged,
            fmt_g(st.rss),
            i == res.selected
        );
    }
    s
}

/// Fits rho on `input`, prewhitens both series with it and tests whether
/// they differ by a constant.
pub fn test_pipeline(input: &Signal, reference: &Signal, args: &FitArgs, cfg: &TestConfig) -> Result<(FitResult, TestOutcome)> {
    if input.len() != reference.len() {
        return Err(Error::LengthMismatch(input.len(), reference.len()));
    }
    let res = fit_series(input, args)?;
    let z = prewhiten(input, res.rho_hat)?;
    let g = prewhiten(reference, res.rho_hat)?;
    let outcome = test_constant_difference(&z, &g, cfg)?;
    Ok((res, outcome))
}

pub fn cmd_test(input: &PathBuf, reference: &PathBuf, args: &FitArgs, cfg: &TestConfig) -> Result<String> {
    cfg.validate()?;
    let y = args.series(input).load()?;
    let r = args.series(reference).load()?;
    let (res, outcome) = test_pipeline(&y, &r, args, cfg)?;
    Ok(test_report(&res, &outcome))
}

/// Label of the statistic row, e.g. `T(j(6))+Q(j(6))`.
pub fn statistic_label(outcome: &TestOutcome) -> String {
    let j = outcome.j_used;
    match outcome.branch {
        Some(TestBranch::PGe2) => format!("T(j({j}))"),
        Some(TestBranch::PIn12) => format!("T(j({j}))+Q(j({j}))"),
        Some(TestBranch::AdaptiveGeneral) => format!("max std T(j)+Q(j), at j={j}"),
        Some(TestBranch::AdaptivePGe2) => format!("max std T(j), at j={j}"),
        None => "statistic".to_string(),
    }
}

pub fn test_report(res: &FitResult, outcome: &TestOutcome) -> String {
    let label = statistic_label(outcome);
    let width = label.len().max("critical value".len());
    let mut s = String::new();
    let _ = writeln!(s, "{:<width$}  {:.4}", "rho_hat", res.rho_hat);
    let _ = writeln!(s, "{:<width$}  {}", label, fmt_g(outcome.statistic));
    let _ = writeln!(s, "{:<width$}  {}", "critical value", fmt_g(outcome.critical_value));
    let _ = writeln!(s, "{:<width$}  {}", "eta", fmt_g(outcome.eta));
    let decision = if outcome.reject { "reject H0" } else { "do not reject H0" };
    let _ = writeln!(s, "{:<width$}  {decision}", "decision");
    s
}
