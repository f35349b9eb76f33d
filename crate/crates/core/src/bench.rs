//! Timing harness comparing brute force with branch and bound.

use std::io::Write;
use std::time::Instant;

use serde::Serialize;

use crate::election::ElectionProfile;
use crate::error::{RcvError, Result};
use crate::search::{brute_force_outcomes, enumerate_outcomes, SearchOptions, SearchReport};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Algorithm {
    BruteForce,
    Memoized,
    Unmemoized,
}

impl Algorithm {
    pub const ALL: [Algorithm; 3] = [Algorithm::BruteForce, Algorithm::Memoized, Algorithm::Unmemoized];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::BruteForce => "brute_force",
            Algorithm::Memoized => "branch_and_bound",
            Algorithm::Unmemoized => "branch_and_bound_unmemoized",
        }
    }

    pub fn run(self, profile: &ElectionProfile, opts: &SearchOptions) -> Result<SearchReport> {
        match self {
            Algorithm::BruteForce => brute_force_outcomes(profile, opts),
            Algorithm::Memoized => enumerate_outcomes(profile, &SearchOptions { memoize: true, ..opts.clone() }),
            Algorithm::Unmemoized => enumerate_outcomes(profile, &SearchOptions { memoize: false, ..opts.clone() }),
        }
    }
}

#[derive(Clone, Debug)]
pub struct BenchRun {
    pub algorithm: Algorithm,
    pub seconds: f64,
    pub report: SearchReport,
}

#[derive(Clone, Debug)]
pub struct BenchResult {
    pub n: usize,
    pub bound: usize,
    pub unbound: usize,
    pub runs: Vec<BenchRun>,
}

#[derive(Serialize)]
struct Row<'a> {
    algorithm: &'a str,
    n: usize,
    bound: usize,
    unbound: usize,
    seconds: String,
    nodes: u64,
    verify_calls: u64,
    timed_out: bool,
}

impl BenchResult {
    pub fn run(&self, algorithm: Algorithm) -> Option<&BenchRun> {
        self.runs.iter().find(|r| r.algorithm == algorithm)
    }

    /// Brute-force time over memoized branch-and-bound time.
    pub fn speedup(&self) -> Option<f64> {
        let brute = self.run(Algorithm::BruteForce)?;
        let memo = self.run(Algorithm::Memoized)?;
        Some(brute.seconds / memo.seconds.max(1e-9))
    }

    pub fn write_csv<W: Write>(&self, out: W, header: bool) -> Result<()> {
        let mut w = csv::WriterBuilder::new().has_headers(header).from_writer(out);
        for r in &self.runs {
            let seconds = if r.report.timed_out { "timeout".to_string() } else { format!("{:.6}", r.seconds) };
            w.serialize(Row {
                algorithm: r.algorithm.name(),
                n: self.n,
                bound: self.bound,
                unbound: self.unbound,
                seconds,
                nodes: r.report.nodes_expanded,
                verify_calls: r.report.verify_calls,
                timed_out: r.report.timed_out,
            })
            .map_err(|e| RcvError::Io(std::io::Error::other(e)))?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Runs every algorithm on `profile` under the same options. Runs that
/// finished must agree on the set of orders.
pub fn run_bench(profile: &ElectionProfile, opts: &SearchOptions, algorithms: &[Algorithm]) -> Result<BenchResult> {
    opts.validate()?;
    let mut runs = Vec::new();
    for &algorithm in algorithms {
        let start = Instant::now();
        let report = algorithm.run(profile, opts)?;
        let seconds = start.elapsed().as_secs_f64();
        runs.push(BenchRun { algorithm, seconds, report });
    }
    let finished: Vec<&BenchRun> = runs.iter().filter(|r| !r.report.timed_out).collect();
    for pair in finished.windows(2) {
        if pair[0].report.orders != pair[1].report.orders {
            return Err(RcvError::ResultMismatch(format!(
                "{} found {} orders, {} found {}",
                pair[0].algorithm.name(),
                pair[0].report.orders.len(),
                pair[1].algorithm.name(),
                pair[1].report.orders.len()
            )));
        }
    }
    Ok(BenchResult {
        n: profile.num_candidates(),
        bound: profile.bound_ballots.len(),
        unbound: profile.unbound_count,
        runs,
    })
}
