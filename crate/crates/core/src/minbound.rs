//! Minimum number of outstanding ballots each possible winner needs.
//!
//! For each feasible order the verifier's tentative assignments are replayed.
//! Unbound ballots the verifier never touched still need one ranking each;
//! they go to eliminated candidates wherever that keeps every elimination
//! strict, and only the remainder goes to the winner. The bound for a
//! candidate is the smallest count, over the orders it wins, of unbound
//! ballots that end up ranking it.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::election::{CandidateId, ElectionProfile, EliminationOrder};
use crate::error::{RcvError, Result};
use crate::search::{remove_candidates, SearchReport, TentativeBallots, Verifier};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MinBound {
    pub min_ballots: u64,
    /// An order attaining the minimum.
    pub witness: EliminationOrder,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MinBoundReport {
    pub candidates: Vec<String>,
    pub unbound_count: usize,
    /// Keyed by possible winner.
    pub bounds: BTreeMap<CandidateId, MinBound>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MinBoundJson {
    pub min_ballots: u64,
    pub fraction_of_unbound: f64,
}

impl MinBoundReport {
    pub fn min_ballots(&self, c: CandidateId) -> Option<u64> {
        self.bounds.get(&c).map(|b| b.min_ballots)
    }

    pub fn by_name(&self, name: &str) -> Option<u64> {
        let i = self.candidates.iter().position(|c| c == name)?;
        self.min_ballots(CandidateId(i as u16))
    }

    pub fn fraction(&self, c: CandidateId) -> Option<f64> {
        let v = self.min_ballots(c)?;
        Some(if self.unbound_count == 0 { 0.0 } else { v as f64 / self.unbound_count as f64 })
    }

    pub fn to_json(&self) -> BTreeMap<String, MinBoundJson> {
        self.bounds
            .iter()
            .map(|(&c, b)| {
                let json = MinBoundJson {
                    min_ballots: b.min_ballots,
                    fraction_of_unbound: self.fraction(c).unwrap_or(0.0),
                };
                (self.candidates[c.index()].clone(), json)
            })
            .collect()
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        serde_json::to_writer_pretty(&mut w, &self.to_json()).map_err(std::io::Error::from)?;
        writeln!(w)?;
        Ok(())
    }
}

/// Per-winner minimum over the orders in `report`, which must come from a
/// search over the same profile.
pub fn min_bound_ballots(profile: &ElectionProfile, report: &SearchReport) -> Result<MinBoundReport> {
    if report.candidates != profile.candidates {
        return Err(RcvError::InconsistentInput("report and profile have different candidates".into()));
    }
    let reduced = remove_candidates(profile, report.pruned_candidates);
    let verifier = Verifier::new(&reduced.profile)?;
    let mut to_reduced = vec![None; profile.num_candidates()];
    for (i, &orig) in reduced.original.iter().enumerate() {
        to_reduced[orig.index()] = Some(CandidateId(i as u16));
    }

    let per_order: Vec<(CandidateId, u64, &EliminationOrder)> = report
        .orders
        .par_iter()
        .map(|order| {
            let local = order
                .as_slice()
                .iter()
                .map(|c| to_reduced.get(c.index()).copied().flatten())
                .collect::<Option<Vec<_>>>()
                .ok_or_else(|| RcvError::InconsistentInput(format!("{order:?} names a pruned or unknown candidate")))?;
            let needed = ballots_needed(&verifier, &local)?;
            Ok((order.winner().expect("non-empty order"), needed, order))
        })
        .collect::<Result<_>>()?;

    let mut bounds: BTreeMap<CandidateId, MinBound> = BTreeMap::new();
    for (winner, needed, order) in per_order {
        let better = bounds.get(&winner).map_or(true, |b| needed < b.min_ballots);
        if better {
            bounds.insert(winner, MinBound { min_ballots: needed, witness: order.clone() });
        }
    }
    Ok(MinBoundReport { candidates: profile.candidates.clone(), unbound_count: profile.unbound_count, bounds })
}

/// Unbound ballots that must rank the winner of the complete `order`
/// (candidate ids of the verifier's profile).
pub fn ballots_needed(verifier: &Verifier, order: &[CandidateId]) -> Result<u64> {
    let n = verifier.num_candidates();
    if order.len() != n {
        return Err(RcvError::InconsistentInput(format!("{order:?} is not a complete order")));
    }
    let mut state = verifier.initial_state();
    for &e in order {
        if !state.active().contains(e) {
            return Err(RcvError::InconsistentInput(format!("{order:?} repeats a candidate")));
        }
        if !verifier.eliminate(&mut state, e, None) {
            return Err(RcvError::InconsistentInput(format!("{order:?} is not feasible")));
        }
    }
    let winner = order[n - 1];
    let empty: u64 = state.unbound_groups().iter().filter(|g| g.assigned.is_empty()).map(|g| g.count).sum();
    let fixed: Vec<TentativeBallots> =
        state.unbound_groups().iter().filter(|g| !g.assigned.is_empty()).cloned().collect();

    // slack[k][c]: how far c leads the round-k eliminee beyond the one vote
    // strictness requires, with the empty ballots still unassigned.
    let mut active = verifier.initial_state().active();
    let mut slack: Vec<Vec<(CandidateId, i64)>> = Vec::with_capacity(n.saturating_sub(1));
    for &e in &order[..n - 1] {
        let t = verifier.concrete_tallies(active, &fixed);
        let mut row = Vec::new();
        for c in active.iter().filter(|&c| c != e) {
            let s = t[c.index()] as i64 - t[e.index()] as i64 - 1;
            if s < 0 {
                return Err(RcvError::InconsistentInput(format!(
                    "{order:?}: elimination of {e:?} is not strict under its own assignment"
                )));
            }
            row.push((c, s));
        }
        slack.push(row);
        active.remove(e);
    }

    // Most empty ballots the eliminated candidates can absorb when the winner
    // gets `to_winner` of them. Later rounds are filled first since their
    // eliminees are rivals in every earlier round.
    let absorbed = |to_winner: i64| -> i64 {
        let mut x = vec![0i64; n];
        x[winner.index()] = to_winner;
        let mut total = 0;
        for k in (0..n - 1).rev() {
            let cap = slack[k].iter().map(|&(c, s)| x[c.index()] + s).min().unwrap_or(0);
            x[order[k].index()] = cap;
            total += cap;
        }
        total
    };
    let empty = empty as i64;
    let (mut lo, mut hi) = (0i64, empty);
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if mid + absorbed(mid) >= empty {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    Ok(state.unbound_containing(winner) + lo as u64)
}
