use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::Deserialize;

use super::functions::{make_test_function, TestFunctionName};
use super::{imse, scale_to_snr};
use crate::car1::{derive_params, simulate_model_with};
use crate::cochrane_orcutt::{
    draw_initial_rhos, estimate_at_rho, run_start, select_start, FitConfig, DEFAULT_MAX_ITER,
    DEFAULT_TOL,
};
use crate::dwt::BasisName;
use crate::error::{Error, Result};
use crate::rng::{derive_seed, stream, NOISE_LANE, START_LANE};
use crate::shrinkage::{default_threshold_levels, LevelRange, RegimeKind, ShrinkageSpec};
use crate::signal::Signal;

/// Fixed lag-1 values the rank study pits against the iterative estimate.
pub const FIXED_RHO_COMPETITORS: [f64; 11] =
    [-0.9, -0.7, -0.5, -0.3, -0.1, 0.0, 0.1, 0.3, 0.5, 0.7, 0.9];

/// Estimation pipelines compared in every cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum StudyRegime {
    /// Linear projection inside the loop and for the final estimate.
    Linear,
    /// Hard thresholding inside the loop and for the final estimate.
    Term,
    /// Hard thresholding inside the loop, block shrinkage for the final estimate.
    Block,
}

impl StudyRegime {
    pub const ALL: [StudyRegime; 3] = [StudyRegime::Linear, StudyRegime::Term, StudyRegime::Block];

    pub fn as_str(self) -> &'static str {
        match self {
            StudyRegime::Linear => "L",
            StudyRegime::Term => "NT",
            StudyRegime::Block => "NB",
        }
    }
}

impl std::str::FromStr for StudyRegime {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "L" | "LINEAR" => Ok(StudyRegime::Linear),
            "NT" | "TERM" => Ok(StudyRegime::Term),
            "NB" | "BLOCK" => Ok(StudyRegime::Block),
            _ => Err(Error::UnknownName(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudyConfig {
    pub functions: Vec<TestFunctionName>,
    pub ns: Vec<usize>,
    pub snrs: Vec<f64>,
    pub rhos: Vec<f64>,
    pub bases: Vec<BasisName>,
    pub regimes: Vec<StudyRegime>,
    pub replications: usize,
    pub n_starts: usize,
    pub master_seed: u64,
    /// Diffusion variance of the error process.
    pub sigma2: f64,
    pub tol: f64,
    pub max_iter: usize,
    /// Also rank the iterative estimate against the fixed-rho pipelines.
    pub rank_study: bool,
    /// Final-pass levels of the rank study; `None` uses the loop levels
    /// without their coarsest level.
    pub rank_final_levels: Option<LevelRange>,
}

impl StudyConfig {
    /// One cell with the desk-scale defaults: 100 replications, 50 starts,
    /// `sigma2 = 1`, all three regimes.
    pub fn single_cell(
        function: TestFunctionName,
        n: usize,
        snr: f64,
        rho: f64,
        basis: BasisName,
        master_seed: u64,
    ) -> Self {
        Self {
            functions: vec![function],
            ns: vec![n],
            snrs: vec![snr],
            rhos: vec![rho],
            bases: vec![basis],
            regimes: StudyRegime::ALL.to_vec(),
            replications: 100,
            n_starts: 50,
            master_seed,
            sigma2: 1.0,
            tol: DEFAULT_TOL,
            max_iter: DEFAULT_MAX_ITER,
            rank_study: false,
            rank_final_levels: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let empty = |what: &str| Error::InvalidConfig(format!("`{what}` must not be empty"));
        if self.functions.is_empty() {
            return Err(empty("functions"));
        }
        if self.ns.is_empty() {
            return Err(empty("n"));
        }
        if self.snrs.is_empty() {
            return Err(empty("snr"));
        }
        if self.rhos.is_empty() {
            return Err(empty("rho"));
        }
        if self.bases.is_empty() {
            return Err(empty("basis"));
        }
        if self.regimes.is_empty() {
            return Err(empty("regimes"));
        }
        if self.replications == 0 || self.n_starts == 0 {
            return Err(Error::InvalidConfig("replications and starts must be positive".into()));
        }
        if !(self.sigma2 > 0.0) {
            return Err(Error::InvalidConfig(format!("sigma2 = {} must be positive", self.sigma2)));
        }
        if let Some(r) = self.rhos.iter().find(|r| !(**r > 0.0 && **r < 1.0)) {
            return Err(Error::InvalidConfig(format!("rho = {r} must lie in (0, 1)")));
        }
        if let Some(s) = self.snrs.iter().find(|s| !(**s > 0.0)) {
            return Err(Error::InvalidConfig(format!("snr = {s} must be positive")));
        }
        for &n in &self.ns {
            let levels = default_threshold_levels(n)?;
            if let Some(r) = self.rank_final_levels {
                r.check(crate::signal::dyadic_level(n)?)?;
            } else if self.rank_study && levels.lo >= levels.hi {
                return Err(Error::InvalidConfig(format!("n = {n} is too short for the rank study")));
            }
        }
        Ok(())
    }

    pub fn cells(&self) -> Vec<Cell> {
        let mut out = Vec::new();
        for &function in &self.functions {
            for &n in &self.ns {
                for &snr in &self.snrs {
                    for &rho in &self.rhos {
                        for &basis in &self.bases {
                            out.push(Cell { function, n, snr, rho, basis });
                        }
                    }
                }
            }
        }
        out
    }

    /// Parses the flat TOML configuration file format.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        Self::from_toml_with_seed(text, None)
    }

    /// Like [`StudyConfig::from_toml_str`]; a given `seed` replaces the
    /// file's `seed` key, which then becomes optional.
    pub fn from_toml_with_seed(text: &str, seed: Option<u64>) -> Result<Self> {
        let file: ConfigFile =
            toml::from_str(text).map_err(|e| Error::InvalidConfig(e.message().to_string()))?;
        file.resolve(seed)
    }
}

/// On-disk form of [`StudyConfig`]. Every list key also accepts a scalar.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    functions: OneOrMany<String>,
    n: OneOrMany<usize>,
    snr: OneOrMany<f64>,
    rho: OneOrMany<f64>,
    #[serde(default)]
    basis: Option<OneOrMany<String>>,
    #[serde(default)]
    regimes: Option<OneOrMany<String>>,
    #[serde(default)]
    replications: Option<usize>,
    #[serde(default)]
    starts: Option<usize>,
    #[serde(default)]
    seed: Option<u64>,
    #[serde(default)]
    sigma2: Option<f64>,
    #[serde(default)]
    tol: Option<f64>,
    #[serde(default)]
    max_iter: Option<usize>,
    #[serde(default)]
    rank_study: bool,
    #[serde(default)]
    rank_final_levels: Option<[usize; 2]>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

impl<T> OneOrMany<T> {
    fn into_vec(self) -> Vec<T> {
        match self {
            OneOrMany::One(v) => vec![v],
            OneOrMany::Many(v) => v,
        }
    }
}

fn parse_all<T: std::str::FromStr<Err = Error>>(items: Vec<String>) -> Result<Vec<T>> {
    items.iter().map(|s| s.parse()).collect()
}

impl ConfigFile {
    fn resolve(self, seed: Option<u64>) -> Result<StudyConfig> {
        let master_seed = seed
            .or(self.seed)
            .ok_or_else(|| Error::InvalidConfig("missing `seed`".into()))?;
        let bases = match self.basis {
            Some(b) => parse_all(b.into_vec())?,
            None => vec![BasisName::Db6],
        };
        let regimes = match self.regimes {
            Some(r) => parse_all(r.into_vec())?,
            None => StudyRegime::ALL.to_vec(),
        };
        let rank_final_levels = self
            .rank_final_levels
            .map(|[lo, hi]| LevelRange::new(lo, hi))
            .transpose()?;
        let cfg = StudyConfig {
            functions: parse_all(self.functions.into_vec())?,
            ns: self.n.into_vec(),
            snrs: self.snr.into_vec(),
            rhos: self.rho.into_vec(),
            bases,
            regimes,
            replications: self.replications.unwrap_or(100),
            n_starts: self.starts.unwrap_or(50),
            master_seed,
            sigma2: self.sigma2.unwrap_or(1.0),
            tol: self.tol.unwrap_or(DEFAULT_TOL),
            max_iter: self.max_iter.unwrap_or(DEFAULT_MAX_ITER),
            rank_study: self.rank_study,
            rank_final_levels,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

/// One point of the factorial design.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cell {
    pub function: TestFunctionName,
    pub n: usize,
    pub snr: f64,
    pub rho: f64,
    pub basis: BasisName,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudyRecord {
    pub cell: Cell,
    pub regime: StudyRegime,
    pub replication: usize,
    pub rho_hat: f64,
    pub imse: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Set when the replication failed; the numeric fields are then NaN.
    pub error: Option<String>,
}

impl StudyRecord {
    pub fn rho_bias(&self) -> f64 {
        self.rho_hat - self.cell.rho
    }

    pub fn rho_sq_error(&self) -> f64 {
        self.rho_bias().powi(2)
    }
}

/// IMSE of every rank-study competitor on one replication: the eleven
/// fixed-rho pipelines in [`FIXED_RHO_COMPETITORS`] order, then the
/// iterative estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct RankRecord {
    pub cell: Cell,
    pub replication: usize,
    pub imse: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct StudyOutput {
    pub records: Vec<StudyRecord>,
    pub ranks: Vec<RankRecord>,
}

impl StudyOutput {
    pub fn failures(&self) -> usize {
        self.records.iter().filter(|r| r.error.is_some()).count()
    }
}

struct Dataset {
    f: Signal,
    y: Signal,
    starts: Vec<f64>,
}

fn make_dataset(cell: &Cell, cfg: &StudyConfig, cell_seed: u64, rep: usize) -> Result<Dataset> {
    let params = derive_params(cell.rho, cfg.sigma2, cell.n)?;
    let f = scale_to_snr(&make_test_function(cell.function, cell.n)?, params.sigma_p(), cell.snr)?;
    let mut noise = stream(cell_seed, rep as u64, NOISE_LANE);
    let y = simulate_model_with(&f, &params, &mut noise)?;
    let starts = draw_initial_rhos(cfg.n_starts, &mut stream(cell_seed, rep as u64, START_LANE));
    Ok(Dataset { f, y, starts })
}

struct LoopFit {
    rho_hat: f64,
    iterations: usize,
    converged: bool,
}

fn run_loop(y: &[f64], starts: &[f64], cfg: &FitConfig) -> Result<LoopFit> {
    let runs = starts
        .iter()
        .map(|&r| run_start(y, r, cfg))
        .collect::<Result<Vec<_>>>()?;
    let best = &runs[select_start(&runs)];
    Ok(LoopFit {
        rho_hat: best.rho_hat,
        iterations: best.iterations,
        converged: best.converged,
    })
}

fn rank_final_spec(cfg: &StudyConfig, n: usize) -> Result<ShrinkageSpec> {
    let levels = match cfg.rank_final_levels {
        Some(l) => l,
        None => {
            let l = default_threshold_levels(n)?;
            LevelRange::new(l.lo + 1, l.hi)?
        }
    };
    Ok(ShrinkageSpec::term_by_term(levels))
}

type TaskOutput = (Vec<StudyRecord>, Option<RankRecord>);

fn run_replication(cell: &Cell, cfg: &StudyConfig, cell_seed: u64, rep: usize) -> TaskOutput {
    let failed = |regime: StudyRegime, e: &Error| StudyRecord {
        cell: *cell,
        regime,
        replication: rep,
        rho_hat: f64::NAN,
        imse: f64::NAN,
        iterations: 0,
        converged: false,
        error: Some(e.to_string()),
    };
    let data = match make_dataset(cell, cfg, cell_seed, rep) {
        Ok(d) => d,
        Err(e) => return (cfg.regimes.iter().map(|&r| failed(r, &e)).collect(), None),
    };
    let y = data.y.samples();
    let truth = data.f.samples();
    let fit_cfg = |loop_kind: RegimeKind| -> Result<FitConfig> {
        let spec = ShrinkageSpec::for_length(loop_kind, cell.n)?;
        let mut c = FitConfig::new(cell.basis, spec, spec, data.starts.clone());
        c.tol = cfg.tol;
        c.max_iter = cfg.max_iter;
        Ok(c)
    };

    let needs_nonlinear =
        cfg.rank_study || cfg.regimes.iter().any(|r| *r != StudyRegime::Linear);
    let nonlinear = if needs_nonlinear {
        Some(fit_cfg(RegimeKind::Term).and_then(|c| run_loop(y, &data.starts, &c)))
    } else {
        None
    };

    let mut records = Vec::with_capacity(cfg.regimes.len());
    for &regime in &cfg.regimes {
        let outcome = (|| -> Result<StudyRecord> {
            let (fit, final_kind) = match regime {
                StudyRegime::Linear => {
                    (run_loop(y, &data.starts, &fit_cfg(RegimeKind::Linear)?)?, RegimeKind::Linear)
                }
                StudyRegime::Term | StudyRegime::Block => {
                    let kind = if regime == StudyRegime::Term {
                        RegimeKind::Term
                    } else {
                        RegimeKind::Block
                    };
                    match nonlinear.as_ref().expect("nonlinear loop computed") {
                        Ok(l) => (
                            LoopFit { rho_hat: l.rho_hat, iterations: l.iterations, converged: l.converged },
                            kind,
                        ),
                        Err(e) => return Err(e.clone()),
                    }
                }
            };
            let spec = ShrinkageSpec::for_length(final_kind, cell.n)?;
            let (f_hat, _) = estimate_at_rho(y, fit.rho_hat, cell.basis, &spec)?;
            Ok(StudyRecord {
                cell: *cell,
                regime,
                replication: rep,
                rho_hat: fit.rho_hat,
                imse: imse(&f_hat, truth)?,
                iterations: fit.iterations,
                converged: fit.converged,
                error: None,
            })
        })();
        records.push(outcome.unwrap_or_else(|e| failed(regime, &e)));
    }

    let ranks = if cfg.rank_study {
        (|| -> Result<RankRecord> {
            let spec = rank_final_spec(cfg, cell.n)?;
            let adaptive = nonlinear.as_ref().expect("nonlinear loop computed").as_ref().map_err(Clone::clone)?;
            let imses = FIXED_RHO_COMPETITORS
                .iter()
                .chain(std::iter::once(&adaptive.rho_hat))
                .map(|&rho| {
                    let (f_hat, _) = estimate_at_rho(y, rho, cell.basis, &spec)?;
                    imse(&f_hat, truth)
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(RankRecord { cell: *cell, replication: rep, imse: imses })
        })()
        .ok()
    } else {
        None
    };
    (records, ranks)
}

/// Runs the full factorial design on the current rayon pool.
///
/// Every (cell, replication) pair draws from its own random streams, so the
/// output is identical for any number of worker threads.
pub fn run_study(cfg: &StudyConfig) -> Result<StudyOutput> {
    cfg.validate()?;
    let cells = cfg.cells();
    let tasks: Vec<(usize, usize)> = (0..cells.len())
        .flat_map(|c| (0..cfg.replications).map(move |r| (c, r)))
        .collect();
    let results: Vec<TaskOutput> = tasks
        .par_iter()
        .map(|&(c, r)| {
            let seed = derive_seed(cfg.master_seed, c as u64);
            run_replication(&cells[c], cfg, seed, r)
        })
        .collect();
    let mut out = StudyOutput::default();
    for (records, rank) in results {
        out.records.extend(records);
        out.ranks.extend(rank);
    }
    Ok(out)
}

/// Ranks of one replication's IMSEs, largest IMSE first, so the smallest
/// error gets the top rank. Ties keep competitor order.
pub fn ranks_descending(imses: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..imses.len()).collect();
    order.sort_by(|&a, &b| imses[b].total_cmp(&imses[a]).then(a.cmp(&b)));
    let mut ranks = vec![0; imses.len()];
    for (pos, &idx) in order.iter().enumerate() {
        ranks[idx] = pos + 1;
    }
    ranks
}

/// Same ranks read the other way: 1 = smallest IMSE.
pub fn ranks_ascending(imses: &[f64]) -> Vec<usize> {
    let m = imses.len();
    ranks_descending(imses).into_iter().map(|r| m + 1 - r).collect()
}

fn median(values: &mut [f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    values.sort_by(f64::total_cmp);
    let m = values.len();
    if m % 2 == 1 {
        values[m / 2]
    } else {
        0.5 * (values[m / 2 - 1] + values[m / 2])
    }
}

pub fn competitor_label(index: usize) -> String {
    match FIXED_RHO_COMPETITORS.get(index) {
        Some(r) => format!("fixed_{r}"),
        None => "adaptive".to_string(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankSummary {
    pub cell: Cell,
    pub competitor: String,
    pub mean_rank: f64,
    pub median_rank: f64,
}

/// Mean and median rank of every competitor per cell.
pub fn summarize_ranks(ranks: &[RankRecord], descending: bool) -> Vec<RankSummary> {
    let mut out = Vec::new();
    for group in group_by_cell(ranks, |r| &r.cell) {
        let per_rep: Vec<Vec<usize>> = group
            .iter()
            .map(|r| if descending { ranks_descending(&r.imse) } else { ranks_ascending(&r.imse) })
            .collect();
        let m = group[0].imse.len();
        for k in 0..m {
            let mut col: Vec<f64> = per_rep.iter().map(|r| r[k] as f64).collect();
            let mean = col.iter().sum::<f64>() / col.len() as f64;
            out.push(RankSummary {
                cell: group[0].cell,
                competitor: competitor_label(k),
                mean_rank: mean,
                median_rank: median(&mut col),
            });
        }
    }
    out
}

fn same_cell(a: &Cell, b: &Cell) -> bool {
    a.function == b.function && a.n == b.n && a.snr == b.snr && a.rho == b.rho && a.basis == b.basis
}

/// Splits records into runs of equal cells, preserving order.
fn group_by_cell<'a, T>(items: &'a [T], cell: impl Fn(&T) -> &Cell) -> Vec<Vec<&'a T>> {
    let mut groups: Vec<Vec<&T>> = Vec::new();
    for item in items {
        match groups.last_mut() {
            Some(g) if same_cell(cell(g[0]), cell(item)) => g.push(item),
            _ => groups.push(vec![item]),
        }
    }
    groups
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellSummary {
    pub cell: Cell,
    pub regime: StudyRegime,
    pub bias: f64,
    pub mse: f64,
    pub mean_iters: f64,
    pub frac_converged: f64,
    pub mean_imse: f64,
    /// Successful replications entering the averages.
    pub count: usize,
    pub failures: usize,
}

/// Per-cell, per-regime averages over the successful replications.
pub fn summarize(records: &[StudyRecord]) -> Vec<CellSummary> {
    let mut out = Vec::new();
    for group in group_by_cell(records, |r| &r.cell) {
        let mut regimes: Vec<StudyRegime> = group.iter().map(|r| r.regime).collect();
        regimes.sort();
        regimes.dedup();
        for regime in regimes {
            let all: Vec<&&StudyRecord> = group.iter().filter(|r| r.regime == regime).collect();
            let ok: Vec<&&StudyRecord> = all.iter().copied().filter(|r| r.error.is_none()).collect();
            let k = ok.len() as f64;
            let avg = |f: &dyn Fn(&StudyRecord) -> f64| {
                if ok.is_empty() {
                    f64::NAN
                } else {
                    ok.iter().map(|r| f(r)).sum::<f64>() / k
                }
            };
            out.push(CellSummary {
                cell: group[0].cell,
                regime,
                bias: avg(&|r| r.rho_bias()),
                mse: avg(&|r| r.rho_sq_error()),
                mean_iters: avg(&|r| r.iterations as f64),
                frac_converged: avg(&|r| if r.converged { 1.0 } else { 0.0 }),
                mean_imse: avg(&|r| r.imse),
                count: ok.len(),
                failures: all.len() - ok.len(),
            });
        }
    }
    out
}

/// One row of the best-performer overview: for a (function, rho) pair, how
/// many (n, snr) combinations each method or basis won.
#[derive(Debug, Clone, PartialEq)]
pub struct BestCounts {
    pub function: TestFunctionName,
    pub rho: f64,
    pub combinations: usize,
    /// Combinations where the nonlinear loop has a smaller rho MSE than the
    /// linear one, each at its best basis.
    pub nonlinear_rho_wins: usize,
    /// Combinations where block final shrinkage beats term-by-term in IMSE.
    pub block_imse_wins: usize,
    pub bases: Vec<BasisName>,
    pub smallest_bias: Vec<usize>,
    pub smallest_mse: Vec<usize>,
    pub smallest_imse: Vec<usize>,
}

fn argmin_by(values: impl Iterator<Item = f64>) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, v) in values.enumerate() {
        if v.is_nan() {
            continue;
        }
        if best.is_none_or(|(_, b)| v < b) {
            best = Some((i, v));
        }
    }
    best.map(|(i, _)| i)
}

pub fn best_counts(summaries: &[CellSummary], cfg: &StudyConfig) -> Vec<BestCounts> {
    let lookup = |cell: &Cell, regime: StudyRegime| {
        summaries
            .iter()
            .find(|s| s.regime == regime && same_cell(&s.cell, cell))
    };
    let nb = cfg.bases.len();
    let mut out = Vec::new();
    for &function in &cfg.functions {
        for &rho in &cfg.rhos {
            let mut row = BestCounts {
                function,
                rho,
                combinations: 0,
                nonlinear_rho_wins: 0,
                block_imse_wins: 0,
                bases: cfg.bases.clone(),
                smallest_bias: vec![0; nb],
                smallest_mse: vec![0; nb],
                smallest_imse: vec![0; nb],
            };
            for &n in &cfg.ns {
                for &snr in &cfg.snrs {
                    row.combinations += 1;
                    let cells: Vec<Cell> = cfg
                        .bases
                        .iter()
                        .map(|&basis| Cell { function, n, snr, rho, basis })
                        .collect();
                    let metric = |regime: StudyRegime, f: &dyn Fn(&CellSummary) -> f64| -> Vec<f64> {
                        cells
                            .iter()
                            .map(|c| lookup(c, regime).map_or(f64::NAN, f))
                            .collect()
                    };
                    let best_of = |v: &[f64]| v.iter().copied().filter(|x| !x.is_nan()).fold(f64::NAN, f64::min);

                    let nl = if cfg.regimes.contains(&StudyRegime::Term) {
                        StudyRegime::Term
                    } else {
                        StudyRegime::Block
                    };
                    let nl_mse = metric(nl, &|s| s.mse);
                    let lin_mse = metric(StudyRegime::Linear, &|s| s.mse);
                    if best_of(&nl_mse) < best_of(&lin_mse) {
                        row.nonlinear_rho_wins += 1;
                    }
                    let nt_imse = metric(StudyRegime::Term, &|s| s.mean_imse);
                    let nb_imse = metric(StudyRegime::Block, &|s| s.mean_imse);
                    if best_of(&nb_imse) < best_of(&nt_imse) {
                        row.block_imse_wins += 1;
                    }
                    if let Some(i) = argmin_by(metric(nl, &|s| s.bias.abs()).into_iter()) {
                        row.smallest_bias[i] += 1;
                    }
                    if let Some(i) = argmin_by(nl_mse.into_iter()) {
                        row.smallest_mse[i] += 1;
                    }
                    let best_imse: Vec<f64> = (0..nb)
                        .map(|b| {
                            cfg.regimes
                                .iter()
                                .filter_map(|&r| lookup(&cells[b], r).map(|s| s.mean_imse))
                                .filter(|x| !x.is_nan())
                                .fold(f64::NAN, f64::min)
                        })
                        .collect();
                    if let Some(i) = argmin_by(best_imse.into_iter()) {
                        row.smallest_imse[i] += 1;
                    }
                }
            }
            out.push(row);
        }
    }
    out
}

/// Formats like C's `%g` with six significant digits.
pub fn fmt_g(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return if x.is_nan() { "nan".into() } else if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let sci = format!("{x:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..6).contains(&exp) {
        let mantissa = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        return format!("{mantissa}e{sign}{:02}", exp.abs());
    }
    let decimals = (5 - exp).max(0) as usize;
    trim_zeros(&format!("{x:.decimals$}")).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn cell_columns(c: &Cell) -> String {
    format!("{},{},{},{},{}", c.function, c.n, fmt_g(c.snr), fmt_g(c.rho), c.basis)
}

const CELL_HEADER: &str = "function,n,snr,rho,basis";

pub fn rho_summary_csv(summaries: &[CellSummary]) -> String {
    let mut s = format!("{CELL_HEADER},regime,bias,mse,mean_iters,frac_converged\n");
    for r in summaries {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{}",
            cell_columns(&r.cell),
            r.regime.as_str(),
            fmt_g(r.bias),
            fmt_g(r.mse),
            fmt_g(r.mean_iters),
            fmt_g(r.frac_converged)
        );
    }
    s
}

pub fn imse_summary_csv(summaries: &[CellSummary]) -> String {
    let mut s = format!("{CELL_HEADER},regime,mean_imse\n");
    for r in summaries {
        let _ = writeln!(s, "{},{},{}", cell_columns(&r.cell), r.regime.as_str(), fmt_g(r.mean_imse));
    }
    s
}

pub fn ranks_csv(ranks: &[RankSummary]) -> String {
    let mut s = format!("{CELL_HEADER},competitor,mean_rank,median_rank\n");
    for r in ranks {
        let _ = writeln!(
            s,
            "{},{},{},{}",
            cell_columns(&r.cell),
            r.competitor,
            fmt_g(r.mean_rank),
            fmt_g(r.median_rank)
        );
    }
    s
}

pub fn best_counts_csv(rows: &[BestCounts], cfg: &StudyConfig) -> String {
    let mut s = String::from("case,function,rho,combinations,bias_and_mse_nl");
    for prefix in ["smallest_bias", "smallest_mse"] {
        for b in &cfg.bases {
            let _ = write!(s, ",{prefix}_{b}");
        }
    }
    s.push_str(",imse_nl_blocks");
    for b in &cfg.bases {
        let _ = write!(s, ",smallest_imse_{b}");
    }
    s.push('\n');
    for row in rows {
        let rho_index = cfg.rhos.iter().position(|r| *r == row.rho).unwrap_or(0) + 1;
        let _ = write!(
            s,
            "{}{},{},{},{},{}",
            row.function.code(),
            rho_index,
            row.function,
            fmt_g(row.rho),
            row.combinations,
            row.nonlinear_rho_wins
        );
        for v in row.smallest_bias.iter().chain(&row.smallest_mse) {
            let _ = write!(s, ",{v}");
        }
        let _ = write!(s, ",{}", row.block_imse_wins);
        for v in &row.smallest_imse {
            let _ = write!(s, ",{v}");
        }
        s.push('\n');
    }
    s
}

pub fn records_csv(records: &[StudyRecord]) -> String {
    let mut s = format!("{CELL_HEADER},regime,replication,rho_hat,imse,iterations,converged,error\n");
    for r in records {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{}",
            cell_columns(&r.cell),
            r.regime.as_str(),
            r.replication,
            fmt_g(r.rho_hat),
            fmt_g(r.imse),
            r.iterations,
            r.converged,
            r.error.as_deref().unwrap_or("").replace([',', '\n'], ";")
        );
    }
    s
}

/// Writes every report of a finished study into `dir` and returns the file
/// names written.
pub fn write_reports(out: &StudyOutput, cfg: &StudyConfig, dir: &Path) -> Result<Vec<String>> {
    let io = |e: std::io::Error| Error::Input(format!("{}: {e}", dir.display()));
    fs::create_dir_all(dir).map_err(io)?;
    let summaries = summarize(&out.records);
    let mut files = vec![
        ("rho_summary.csv", rho_summary_csv(&summaries)),
        ("imse_summary.csv", imse_summary_csv(&summaries)),
        ("best_counts.csv", best_counts_csv(&best_counts(&summaries, cfg), cfg)),
        ("records.csv", records_csv(&out.records)),
    ];
    if cfg.rank_study {
        files.push(("ranks.csv", ranks_csv(&summarize_ranks(&out.ranks, true))));
        files.push(("ranks_ascending.csv", ranks_csv(&summarize_ranks(&out.ranks, false))));
    }
    for (name, body) in &files {
        fs::write(dir.join(name), body).map_err(io)?;
    }
    Ok(files.into_iter().map(|(n, _)| n.to_string()).collect())
}
