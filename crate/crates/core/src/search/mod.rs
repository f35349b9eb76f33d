//! Enumeration of every elimination order that the outstanding ballots could
//! still produce.
//!
//! [`enumerate_outcomes`] walks the permutation tree of candidates depth first
//! and only descends into a prefix if [`Verifier`] finds it feasible.
//! [`brute_force_outcomes`] verifies all n! complete orders independently and
//! serves as the baseline.

mod prune;
pub(crate) mod trie;
mod verify;

use std::collections::BTreeSet;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;
use std::sync::atomic::{AtomicBool, Ordering};
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::election::{CandidateId, CandidateSet, ElectionProfile, EliminationOrder};
use crate::error::{RcvError, Result};

pub use prune::{prune_candidates, remove_candidates, ReducedProfile};
pub use verify::{RoundTrace, TentativeBallots, TentativeState, Verification, Verifier};

/// Two hours.
pub const DEFAULT_TIMEOUT_SECS: f64 = 7200.0;

#[derive(Clone, Debug, PartialEq)]
pub struct SearchOptions {
    pub timeout_secs: f64,
    /// Candidates below this share of first preferences are removed before
    /// searching; 0 disables pruning.
    pub prune_threshold: f64,
    /// Carry each prefix's state down to its children instead of re-verifying
    /// the prefix from scratch.
    pub memoize: bool,
    pub parallel: bool,
    /// Seed for synthetic benchmark profiles.
    pub seed: u64,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            timeout_secs: DEFAULT_TIMEOUT_SECS,
            prune_threshold: 0.0,
            memoize: true,
            parallel: false,
            seed: 0,
        }
    }
}

impl SearchOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.timeout_secs > 0.0) {
            return Err(RcvError::InvalidOption(format!("timeout must be positive, got {}", self.timeout_secs)));
        }
        if !(0.0..1.0).contains(&self.prune_threshold) {
            return Err(RcvError::InvalidOption(format!(
                "prune threshold {} is outside [0, 1)",
                self.prune_threshold
            )));
        }
        Ok(())
    }

    fn deadline(&self, start: Instant) -> Option<Instant> {
        start.checked_add(Duration::from_secs_f64(self.timeout_secs))
    }
}

/// Result of a search: the feasible complete orders and work counters.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SearchReport {
    /// Candidate table of the searched profile, before pruning.
    pub candidates: Vec<String>,
    /// Feasible complete orders over the non-pruned candidates, sorted.
    pub orders: Vec<EliminationOrder>,
    pub possible_winners: CandidateSet,
    /// Elimination rounds evaluated.
    pub nodes_expanded: u64,
    pub verify_calls: u64,
    pub timed_out: bool,
    pub pruned_candidates: CandidateSet,
}

impl SearchReport {
    fn new(candidates: Vec<String>, orders: BTreeSet<EliminationOrder>, pruned: CandidateSet) -> Self {
        let orders: Vec<EliminationOrder> = orders.into_iter().collect();
        let possible_winners = orders.iter().filter_map(|o| o.winner()).collect();
        SearchReport {
            candidates,
            orders,
            possible_winners,
            nodes_expanded: 0,
            verify_calls: 0,
            timed_out: false,
            pruned_candidates: pruned,
        }
    }

    pub fn name(&self, c: CandidateId) -> &str {
        &self.candidates[c.index()]
    }

    pub fn winner_names(&self) -> Vec<String> {
        self.possible_winners.iter().map(|c| self.name(c).to_string()).collect()
    }

    /// Number of candidates each complete order covers.
    pub fn order_len(&self) -> usize {
        self.candidates.len() - self.pruned_candidates.len()
    }

    pub fn to_json(&self) -> ReportJson {
        let names = |cs: &mut dyn Iterator<Item = CandidateId>| cs.map(|c| self.name(c).to_string()).collect();
        ReportJson {
            candidates: self.candidates.clone(),
            possible_winners: names(&mut self.possible_winners.iter()),
            orders: self.orders.iter().map(|o| names(&mut o.as_slice().iter().copied())).collect(),
            nodes_expanded: self.nodes_expanded,
            verify_calls: self.verify_calls,
            timed_out: self.timed_out,
            pruned_candidates: names(&mut self.pruned_candidates.iter()),
        }
    }

    pub fn from_json(json: ReportJson) -> Result<Self> {
        let lookup = |name: &String| {
            json.candidates
                .iter()
                .position(|c| c == name)
                .map(|i| CandidateId(i as u16))
                .ok_or_else(|| RcvError::UnknownCandidate(name.clone()))
        };
        let orders = json
            .orders
            .iter()
            .map(|o| o.iter().map(lookup).collect::<Result<Vec<_>>>().map(EliminationOrder))
            .collect::<Result<BTreeSet<_>>>()?;
        let pruned = json.pruned_candidates.iter().map(lookup).collect::<Result<CandidateSet>>()?;
        let mut report = SearchReport::new(json.candidates.clone(), orders, pruned);
        report.nodes_expanded = json.nodes_expanded;
        report.verify_calls = json.verify_calls;
        report.timed_out = json.timed_out;
        Ok(report)
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        self.write_json_to(&mut w)?;
        w.flush()?;
        Ok(())
    }

    pub fn write_json_to<W: Write>(&self, mut w: W) -> Result<()> {
        serde_json::to_writer_pretty(&mut w, &self.to_json()).map_err(std::io::Error::from)?;
        writeln!(w)?;
        Ok(())
    }

    pub fn read_json(path: &Path) -> Result<Self> {
        let r = BufReader::new(File::open(path)?);
        let json: ReportJson = serde_json::from_reader(r).map_err(|e| RcvError::Parse {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        Self::from_json(json)
    }
}

/// Serialized form of [`SearchReport`]; candidates are referenced by name.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReportJson {
    pub candidates: Vec<String>,
    pub possible_winners: Vec<String>,
    pub orders: Vec<Vec<String>>,
    pub nodes_expanded: u64,
    pub verify_calls: u64,
    pub timed_out: bool,
    pub pruned_candidates: Vec<String>,
}

fn prepare(profile: &ElectionProfile, opts: &SearchOptions) -> Result<ReducedProfile> {
    opts.validate()?;
    profile.validate()?;
    if opts.prune_threshold > 0.0 {
        prune_candidates(profile, opts.prune_threshold)
    } else {
        Ok(remove_candidates(profile, CandidateSet::empty()))
    }
}

struct Counters {
    orders: Vec<EliminationOrder>,
    nodes: u64,
    calls: u64,
}

struct Dfs<'a> {
    verifier: &'a Verifier,
    memoize: bool,
    deadline: Option<Instant>,
    stop: &'a AtomicBool,
    out: Counters,
}

impl<'a> Dfs<'a> {
    fn new(verifier: &'a Verifier, memoize: bool, deadline: Option<Instant>, stop: &'a AtomicBool) -> Self {
        Dfs { verifier, memoize, deadline, stop, out: Counters { orders: Vec::new(), nodes: 0, calls: 0 } }
    }

    fn expired(&self) -> bool {
        if self.stop.load(Ordering::Relaxed) {
            return true;
        }
        if self.deadline.is_some_and(|d| Instant::now() >= d) {
            self.stop.store(true, Ordering::Relaxed);
            return true;
        }
        false
    }

    /// Memoized mode eliminates `c` from `state` itself; otherwise the prefix
    /// is replayed from the initial state.
    fn child(&mut self, mut state: TentativeState, c: CandidateId) -> Option<TentativeState> {
        self.out.calls += 1;
        if self.memoize {
            self.out.nodes += 1;
            return self.verifier.eliminate(&mut state, c, None).then_some(state);
        }
        let mut next = self.verifier.initial_state();
        for &e in state.prefix().iter().chain(std::iter::once(&c)) {
            self.out.nodes += 1;
            if !self.verifier.eliminate(&mut next, e, None) {
                return None;
            }
        }
        Some(next)
    }

    fn expand(&mut self, state: TentativeState) {
        let active = state.active();
        if active.is_empty() {
            self.out.orders.push(EliminationOrder(state.prefix().to_vec()));
            return;
        }
        // The last child takes the parent's state instead of a copy.
        let last = active.iter().last();
        let mut parent = Some(state);
        for c in active.iter() {
            if self.expired() {
                return;
            }
            let s = match parent.as_ref() {
                Some(p) if Some(c) != last => p.clone(),
                _ => parent.take().expect("one state per child"),
            };
            if let Some(next) = self.child(s, c) {
                self.expand(next);
            }
        }
    }
}

/// All feasible complete elimination orders, found by branch and bound.
pub fn enumerate_outcomes(profile: &ElectionProfile, opts: &SearchOptions) -> Result<SearchReport> {
    let reduced = prepare(profile, opts)?;
    let verifier = Verifier::new(&reduced.profile)?;
    let start = Instant::now();
    let deadline = opts.deadline(start);
    let stop = AtomicBool::new(false);
    let root = verifier.initial_state();

    let parts: Vec<Counters> = if opts.parallel {
        let first: Vec<CandidateId> = root.active().iter().collect();
        first
            .into_par_iter()
            .map(|c| {
                let mut dfs = Dfs::new(&verifier, opts.memoize, deadline, &stop);
                if !dfs.expired() {
                    if let Some(next) = dfs.child(root.clone(), c) {
                        dfs.expand(next);
                    }
                }
                dfs.out
            })
            .collect()
    } else {
        let mut dfs = Dfs::new(&verifier, opts.memoize, deadline, &stop);
        dfs.expand(root);
        vec![dfs.out]
    };

    let mut orders = BTreeSet::new();
    let (mut nodes, mut calls) = (0, 0);
    for p in parts {
        nodes += p.nodes;
        calls += p.calls;
        orders.extend(p.orders.into_iter().map(|o| to_original(&reduced, o)));
    }
    let mut report = SearchReport::new(profile.candidates.clone(), orders, reduced.removed);
    report.nodes_expanded = nodes;
    report.verify_calls = calls;
    report.timed_out = stop.load(Ordering::Relaxed);
    log::info!(
        "branch and bound: {} orders, {} possible winners, {} nodes in {:.3}s{}",
        report.orders.len(),
        report.possible_winners.len(),
        nodes,
        start.elapsed().as_secs_f64(),
        if report.timed_out { " (timed out)" } else { "" }
    );
    Ok(report)
}

/// Verifies each of the n! complete orders from the initial state.
pub fn brute_force_outcomes(profile: &ElectionProfile, opts: &SearchOptions) -> Result<SearchReport> {
    let reduced = prepare(profile, opts)?;
    let verifier = Verifier::new(&reduced.profile)?;
    let start = Instant::now();
    let deadline = opts.deadline(start);
    let mut perm: Vec<CandidateId> = (0..verifier.num_candidates()).map(|i| CandidateId(i as u16)).collect();
    let mut orders = BTreeSet::new();
    let (mut steps, mut timed_out) = (0u64, false);
    loop {
        if deadline.is_some_and(|d| Instant::now() >= d) {
            timed_out = true;
            break;
        }
        let mut state = verifier.initial_state();
        let mut feasible = true;
        for &e in &perm {
            steps += 1;
            if !verifier.eliminate(&mut state, e, None) {
                feasible = false;
                break;
            }
        }
        if feasible {
            orders.insert(to_original(&reduced, EliminationOrder(perm.clone())));
        }
        if !next_permutation(&mut perm) {
            break;
        }
    }
    let mut report = SearchReport::new(profile.candidates.clone(), orders, reduced.removed);
    report.nodes_expanded = steps;
    report.verify_calls = steps;
    report.timed_out = timed_out;
    log::info!(
        "brute force: {} orders, {} steps in {:.3}s{}",
        report.orders.len(),
        steps,
        start.elapsed().as_secs_f64(),
        if timed_out { " (timed out)" } else { "" }
    );
    Ok(report)
}

fn to_original(reduced: &ReducedProfile, order: EliminationOrder) -> EliminationOrder {
    EliminationOrder(order.0.into_iter().map(|c| reduced.to_original(c)).collect())
}

/// Advances to the next permutation in lexicographic order.
fn next_permutation<T: Ord>(v: &mut [T]) -> bool {
    if v.len() < 2 {
        return false;
    }
    let Some(i) = (0..v.len() - 1).rev().find(|&i| v[i] < v[i + 1]) else {
        return false;
    };
    let j = (i + 1..v.len()).rev().find(|&j| v[j] > v[i]).expect("successor exists");
    v.swap(i, j);
    v[i + 1..].reverse();
    true
}

/// Nodes below the root of the full permutation tree on `n` candidates:
/// the sum over i = 1..n of n!/(n-i)!.
pub fn permutation_tree_nodes(n: usize) -> u128 {
    let mut total = 0u128;
    let mut level = 1u128;
    for i in 0..n {
        level *= (n - i) as u128;
        total += level;
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ids(v: &[u16]) -> Vec<CandidateId> {
        v.iter().map(|&i| CandidateId(i)).collect()
    }

    fn orders(r: &SearchReport) -> Vec<Vec<CandidateId>> {
        r.orders.iter().map(|o| o.0.clone()).collect()
    }

    fn two_way(unbound: usize) -> ElectionProfile {
        ElectionProfile::new(["A", "B"], 2).ballots(2, &["A"]).ballots(1, &["B"]).with_unbound(unbound)
    }

    #[test]
    fn known_ballots_alone_fix_the_order() {
        let r = enumerate_outcomes(&two_way(0), &SearchOptions::default()).unwrap();
        assert_eq!(orders(&r), vec![ids(&[1, 0])]);
        assert_eq!(r.winner_names(), vec!["A"]);
    }

    #[test]
    fn two_unbound_ballots_open_both_orders() {
        let r = enumerate_outcomes(&two_way(2), &SearchOptions::default()).unwrap();
        assert_eq!(orders(&r), vec![ids(&[0, 1]), ids(&[1, 0])]);
        assert_eq!(r.winner_names(), vec!["A", "B"]);
        assert!(!r.timed_out);
    }

    #[test]
    fn enough_unbound_ballots_make_everything_possible() {
        let p = ElectionProfile::new(["A", "B", "C"], 3)
            .ballots(3, &["A", "B"])
            .ballots(2, &["B"])
            .ballots(1, &["C", "A"])
            .with_unbound(6 * 3);
        let r = enumerate_outcomes(&p, &SearchOptions::default()).unwrap();
        assert_eq!(r.orders.len(), 6);
        assert_eq!(r.possible_winners.len(), 3);
        assert_eq!(r.nodes_expanded as u128, permutation_tree_nodes(3));
    }

    #[test]
    fn memoization_does_not_change_the_outcome() {
        let p = ElectionProfile::new(["A", "B", "C", "D"], 2)
            .ballots(5, &["A", "B"])
            .ballots(4, &["B", "C"])
            .ballots(3, &["C"])
            .ballots(2, &["D", "A"])
            .with_unbound(3);
        let memo = enumerate_outcomes(&p, &SearchOptions::default()).unwrap();
        let plain = enumerate_outcomes(&p, &SearchOptions { memoize: false, ..Default::default() }).unwrap();
        let par = enumerate_outcomes(&p, &SearchOptions { parallel: true, ..Default::default() }).unwrap();
        let brute = brute_force_outcomes(&p, &SearchOptions::default()).unwrap();
        assert_eq!(memo.orders, plain.orders);
        assert_eq!(memo.orders, par.orders);
        assert_eq!(memo.orders, brute.orders);
        assert_eq!(memo.nodes_expanded, par.nodes_expanded);
        assert!(memo.nodes_expanded <= plain.nodes_expanded);
        assert!(memo.nodes_expanded <= brute.nodes_expanded);
    }

    #[test]
    fn pruned_candidates_are_reported_and_absent_from_orders() {
        let p = ElectionProfile::new(["A", "B", "C"], 3)
            .ballots(10, &["A"])
            .ballots(9, &["B"])
            .ballots(1, &["C", "A"]);
        let opts = SearchOptions { prune_threshold: 0.06, ..Default::default() };
        let r = enumerate_outcomes(&p, &opts).unwrap();
        assert_eq!(r.pruned_candidates.iter().collect::<Vec<_>>(), ids(&[2]));
        assert_eq!(orders(&r), vec![ids(&[1, 0])]);
        assert_eq!(r.order_len(), 2);
    }

    #[test]
    fn tiny_timeout_yields_partial_results() {
        let p = ElectionProfile::new((0..9).map(|i| format!("C{i}")), 3).with_unbound(1000);
        let opts = SearchOptions { timeout_secs: 1e-6, ..Default::default() };
        let r = enumerate_outcomes(&p, &opts).unwrap();
        assert!(r.timed_out);
        assert!(r.orders.len() < 362_880);
        let r = brute_force_outcomes(&p, &opts).unwrap();
        assert!(r.timed_out);
    }

    #[test]
    fn bad_options_are_rejected() {
        let p = two_way(0);
        let bad = SearchOptions { timeout_secs: 0.0, ..Default::default() };
        assert!(matches!(enumerate_outcomes(&p, &bad), Err(RcvError::InvalidOption(_))));
        let bad = SearchOptions { prune_threshold: -0.1, ..Default::default() };
        assert!(matches!(brute_force_outcomes(&p, &bad), Err(RcvError::InvalidOption(_))));
    }

    #[test]
    fn report_json_round_trip() {
        let r = enumerate_outcomes(&two_way(2), &SearchOptions::default()).unwrap();
        let json = serde_json::to_string(&r.to_json()).unwrap();
        assert!(json.contains("\"possible_winners\":[\"A\",\"B\"]"));
        let back = SearchReport::from_json(serde_json::from_str(&json).unwrap()).unwrap();
        assert_eq!(back, r);
    }

    #[test]
    fn permutation_tree_sizes() {
        assert_eq!(permutation_tree_nodes(1), 1);
        assert_eq!(permutation_tree_nodes(3), 3 + 6 + 6);
        assert_eq!(permutation_tree_nodes(4), 4 + 12 + 24 + 24);
        let mut v = vec![1, 2, 3];
        let mut count = 1;
        while next_permutation(&mut v) {
            count += 1;
        }
        assert_eq!(count, 6);
        assert_eq!(v, vec![3, 2, 1]);
    }
}
