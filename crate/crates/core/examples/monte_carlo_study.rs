//! A small factorial study with a rank comparison, written as CSV reports.

use wfanova::dwt::BasisName;
use wfanova::simlab::{run_study, summarize, summarize_ranks, write_reports, StudyConfig, TestFunctionName};

pub fn main() -> wfanova::Result<()> {
    let mut cfg = StudyConfig::single_cell(TestFunctionName::Sine, 1024, 7.0, 0.99, BasisName::Db6, 2024);
    cfg.replications = 8;
    cfg.n_starts = 10;
    cfg.rank_study = true;
    let out = run_study(&cfg)?;
    for s in summarize(&out.records) {
        println!(
            "{:>2}: rho bias {:+.5}, rho mse {:.2e}, mean IMSE {:.5}, converged {:.0}%",
            s.regime.as_str(),
            s.bias,
            s.mse,
            s.mean_imse,
            100.0 * s.frac_converged
        );
    }
    if let Some(adaptive) = summarize_ranks(&out.ranks, true).into_iter().find(|r| r.competitor == "adaptive") {
        println!("adaptive pipeline: mean rank {:.2} of 12, median {}", adaptive.mean_rank, adaptive.median_rank);
    }
    let dir = std::env::temp_dir().join("wfanova-study");
    for f in write_reports(&out, &cfg, &dir)? {
        println!("wrote {}", dir.join(f).display());
    }
    Ok(())
}
