//! Feasibility of a (partial) elimination order given the outstanding ballots.
//!
//! The verifier keeps known ballots fixed and makes tentative assignments on
//! unbound ballots: whenever a candidate would not strictly out-tally the
//! intended eliminee, just enough unbound ballots are bound to that candidate
//! to put it one vote ahead. Unbound ballots are interchangeable apart from
//! the rankings already assigned to them, so they are stored grouped by their
//! tentative ranking.

use std::collections::HashSet;
use std::sync::Arc;

use crate::election::{BallotSignature, CandidateId, CandidateSet, ElectionProfile};
use crate::error::{RcvError, Result};

use super::trie::{BallotTrie, Frontier};

/// `count` originally-unbound ballots sharing the same tentative ranking.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TentativeBallots {
    /// Candidates assigned so far, in assignment order.
    pub assigned: BallotSignature,
    pub count: u64,
}

/// Search-node snapshot: active candidates, the prefix eliminated so far and
/// the tentative assignments on unbound ballots.
///
/// An unbound-origin ballot is tentatively unbound (in the pool) iff none of
/// its assigned candidates is active and it still has ranking capacity;
/// otherwise it counts as tentatively bound, possibly exhausted.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TentativeState {
    active: CandidateSet,
    prefix: Vec<CandidateId>,
    /// Shared with the parent state until a boost changes it.
    unbound: Arc<Vec<TentativeBallots>>,
    bound_count: u64,
    capacity: usize,
    bound: Frontier,
}

impl TentativeState {
    pub fn active(&self) -> CandidateSet {
        self.active
    }

    pub fn prefix(&self) -> &[CandidateId] {
        &self.prefix
    }

    pub fn unbound_groups(&self) -> &[TentativeBallots] {
        &self.unbound[..]
    }

    fn in_pool(&self, g: &TentativeBallots) -> bool {
        g.assigned.len() < self.capacity && g.assigned.top_preference(self.active).is_none()
    }

    /// |U'|: unbound-origin ballots available for new assignments.
    pub fn tentative_unbound_len(&self) -> u64 {
        self.unbound.iter().filter(|g| self.in_pool(g)).map(|g| g.count).sum()
    }

    /// |B'|: bound ballots plus unbound-origin ballots currently holding an
    /// assignment (including exhausted ones).
    pub fn tentative_bound_len(&self) -> u64 {
        self.bound_count + self.unbound.iter().filter(|g| !self.in_pool(g)).map(|g| g.count).sum::<u64>()
    }

    /// Unbound-origin ballots whose tentative ranking contains `c`.
    pub fn unbound_containing(&self, c: CandidateId) -> u64 {
        self.unbound.iter().filter(|g| g.assigned.contains(c)).map(|g| g.count).sum()
    }

    /// Adds `count` ballots with ranking `assigned`, merging with an equal group.
    fn add_group(&mut self, assigned: BallotSignature, count: u64) {
        if count == 0 {
            return;
        }
        let groups = Arc::make_mut(&mut self.unbound);
        match groups.iter_mut().find(|g| g.assigned == assigned) {
            Some(g) => g.count += count,
            None => groups.push(TentativeBallots { assigned, count }),
        }
    }

    /// Binds `c` as the next ranking on `needed` pool ballots, preferring
    /// ballots with the most remaining capacity. Returns false if the pool
    /// runs out.
    fn assign(&mut self, c: CandidateId, mut needed: u64) -> bool {
        while needed > 0 {
            let pick = self
                .unbound
                .iter()
                .enumerate()
                .filter(|(_, g)| g.count > 0 && self.in_pool(g) && !g.assigned.contains(c))
                .min_by(|(_, a), (_, b)| a.assigned.len().cmp(&b.assigned.len()).then_with(|| a.assigned.cmp(&b.assigned)))
                .map(|(i, _)| i);
            let Some(i) = pick else { return false };
            let groups = Arc::make_mut(&mut self.unbound);
            let take = needed.min(groups[i].count);
            groups[i].count -= take;
            let mut assigned = groups[i].assigned.clone();
            assigned.0.push(c);
            if groups[i].count == 0 {
                groups.swap_remove(i);
            }
            self.add_group(assigned, take);
            needed -= take;
        }
        true
    }
}

/// What one elimination step did; used by tests and tooling.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RoundTrace {
    pub eliminee: CandidateId,
    /// Tallies after moving exhausted tentative ballots back to the pool, before any boost.
    pub tallies_before: Vec<u64>,
    /// Tallies after boosting, indexed by candidate id.
    pub tallies_after: Vec<u64>,
    pub boosts: Vec<(CandidateId, u64)>,
    pub pool_before: u64,
    pub pool_after: u64,
    pub feasible: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Verification {
    pub feasible: bool,
    pub next_state: Option<TentativeState>,
}

/// Checks elimination prefixes against one profile.
#[derive(Clone, Debug)]
pub struct Verifier {
    trie: BallotTrie,
    n: usize,
    capacity: usize,
    unbound_count: u64,
}

impl Verifier {
    pub fn new(profile: &ElectionProfile) -> Result<Self> {
        profile.validate()?;
        Ok(Verifier {
            trie: BallotTrie::build(&profile.bound_ballots),
            n: profile.num_candidates(),
            capacity: profile.ranking_capacity(),
            unbound_count: profile.unbound_count as u64,
        })
    }

    pub fn num_candidates(&self) -> usize {
        self.n
    }

    /// Total ballots m.
    pub fn total_ballots(&self) -> u64 {
        self.trie.total() + self.unbound_count
    }

    /// All candidates active, every unbound ballot empty and in the pool.
    pub fn initial_state(&self) -> TentativeState {
        let mut unbound = Vec::new();
        if self.unbound_count > 0 {
            unbound.push(TentativeBallots {
                assigned: BallotSignature::default(),
                count: self.unbound_count,
            });
        }
        TentativeState {
            active: CandidateSet::all(self.n),
            prefix: Vec::new(),
            unbound: Arc::new(unbound),
            bound_count: self.trie.total(),
            capacity: self.capacity,
            bound: self.trie.frontier(self.n),
        }
    }

    /// Tallies under `active` if the unbound ballots held exactly the
    /// rankings in `groups`, with no further assignments.
    pub(crate) fn concrete_tallies(&self, active: CandidateSet, groups: &[TentativeBallots]) -> Vec<u64> {
        let mut tallies = vec![0u64; self.n];
        self.trie.tally_into(active, &mut tallies);
        for g in groups {
            if let Some(c) = g.assigned.top_preference(active) {
                tallies[c.index()] += g.count;
            }
        }
        tallies
    }

    /// Tallies of the active candidates in `state`, plus exhausted ballots.
    pub fn tallies(&self, state: &TentativeState) -> (Vec<u64>, u64) {
        let (mut tallies, mut exhausted) = self.trie.frontier_tallies(&state.bound, state.active);
        for g in state.unbound.iter() {
            match g.assigned.top_preference(state.active) {
                Some(c) => tallies[c.index()] += g.count,
                None if !state.in_pool(g) => exhausted += g.count,
                None => {}
            }
        }
        (tallies, exhausted)
    }

    /// Verifies that `prefix`, which must extend `state.prefix()`, can be the
    /// elimination order so far. On success returns the state after the last
    /// elimination so the search can continue from it.
    pub fn verify(&self, prefix: &[CandidateId], state: &TentativeState) -> Result<Verification> {
        self.verify_inner(prefix, state, None)
    }

    pub fn verify_traced(
        &self,
        prefix: &[CandidateId],
        state: &TentativeState,
    ) -> Result<(Verification, Vec<RoundTrace>)> {
        let mut trace = Vec::new();
        let v = self.verify_inner(prefix, state, Some(&mut trace))?;
        Ok((v, trace))
    }

    fn verify_inner(
        &self,
        prefix: &[CandidateId],
        state: &TentativeState,
        mut trace: Option<&mut Vec<RoundTrace>>,
    ) -> Result<Verification> {
        let extension = self.check_prefix(prefix, state)?;
        let mut next = state.clone();
        for &e in extension {
            if !self.eliminate(&mut next, e, trace.as_deref_mut()) {
                return Ok(Verification { feasible: false, next_state: None });
            }
        }
        Ok(Verification { feasible: true, next_state: Some(next) })
    }

    fn check_prefix<'p>(&self, prefix: &'p [CandidateId], state: &TentativeState) -> Result<&'p [CandidateId]> {
        if !prefix.starts_with(&state.prefix) {
            return Err(RcvError::InvalidPrefix(format!(
                "{prefix:?} does not extend the state's prefix {:?}",
                state.prefix
            )));
        }
        let mut seen = HashSet::new();
        for &c in prefix {
            if c.index() >= self.n {
                return Err(RcvError::InvalidPrefix(format!("unknown candidate {c:?}")));
            }
            if !seen.insert(c) {
                return Err(RcvError::InvalidPrefix(format!("{c:?} appears twice")));
            }
        }
        Ok(&prefix[state.prefix.len()..])
    }

    /// Eliminates `e` from `state`, boosting rivals from the pool as needed.
    /// Returns false if the pool is too small; `state` is then unspecified.
    pub(crate) fn eliminate(&self, state: &mut TentativeState, e: CandidateId, trace: Option<&mut Vec<RoundTrace>>) -> bool {
        debug_assert!(state.active.contains(e));
        if state.active.len() == 1 {
            if let Some(t) = trace {
                let (tallies, _) = self.tallies(state);
                let pool = state.tentative_unbound_len();
                t.push(RoundTrace {
                    eliminee: e,
                    tallies_before: tallies.clone(),
                    tallies_after: tallies,
                    boosts: Vec::new(),
                    pool_before: pool,
                    pool_after: pool,
                    feasible: true,
                });
            }
            state.active.remove(e);
            state.prefix.push(e);
            self.trie.eliminate(&mut state.bound, e, state.active);
            return true;
        }

        let (mut tallies, _) = self.tallies(state);
        let tallies_before = trace.as_ref().map(|_| tallies.clone());
        let pool_before = state.tentative_unbound_len();
        let mut pool = pool_before;
        let mut boosts = Vec::new();
        let target = tallies[e.index()];
        let mut feasible = true;
        for c in state.active.iter() {
            if c == e || tallies[c.index()] > target {
                continue;
            }
            let margin = target - tallies[c.index()] + 1;
            if pool < margin || !state.assign(c, margin) {
                feasible = false;
                break;
            }
            pool -= margin;
            tallies[c.index()] += margin;
            boosts.push((c, margin));
        }
        if let Some(t) = trace {
            t.push(RoundTrace {
                eliminee: e,
                tallies_before: tallies_before.unwrap_or_default(),
                tallies_after: tallies,
                boosts,
                pool_before,
                pool_after: pool,
                feasible,
            });
        }
        if feasible {
            state.active.remove(e);
            state.prefix.push(e);
            self.trie.eliminate(&mut state.bound, e, state.active);
        }
        feasible
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const A: CandidateId = CandidateId(0);
    const B: CandidateId = CandidateId(1);
    const C: CandidateId = CandidateId(2);

    fn two_way(unbound: usize) -> ElectionProfile {
        ElectionProfile::new(["A", "B"], 2).ballots(2, &["A"]).ballots(1, &["B"]).with_unbound(unbound)
    }

    fn feasible(p: &ElectionProfile, prefix: &[CandidateId]) -> bool {
        let v = Verifier::new(p).unwrap();
        v.verify(prefix, &v.initial_state()).unwrap().feasible
    }

    #[test]
    fn trailing_candidate_is_eliminated_without_help() {
        assert!(feasible(&two_way(0), &[B, A]));
    }

    #[test]
    fn leader_cannot_be_eliminated_without_unbound_ballots() {
        let v = Verifier::new(&two_way(0)).unwrap();
        let (r, trace) = v.verify_traced(&[A, B], &v.initial_state()).unwrap();
        assert!(!r.feasible);
        assert!(r.next_state.is_none());
        // margin = 2 - 1 + 1 with an empty pool
        assert_eq!(trace[0].pool_before, 0);
    }

    #[test]
    fn two_unbound_ballots_can_flip_the_order() {
        let v = Verifier::new(&two_way(2)).unwrap();
        let (r, trace) = v.verify_traced(&[A, B], &v.initial_state()).unwrap();
        assert!(r.feasible);
        assert_eq!(trace[0].boosts, vec![(B, 2)]);
        assert_eq!(trace[0].tallies_after, vec![2, 3]);
        let s = r.next_state.unwrap();
        assert_eq!(s.unbound_containing(B), 2);
        // B is gone too, so its ballots have capacity for another ranking
        assert_eq!(s.tentative_unbound_len(), 2);
        let after_a = v.verify(&[A], &v.initial_state()).unwrap().next_state.unwrap();
        assert_eq!(after_a.tentative_unbound_len(), 0);
    }

    #[test]
    fn empty_extension_leaves_state_unchanged() {
        let v = Verifier::new(&two_way(2)).unwrap();
        let s = v.initial_state();
        let r = v.verify(&[], &s).unwrap();
        assert!(r.feasible);
        assert_eq!(r.next_state.unwrap(), s);
    }

    #[test]
    fn bad_prefixes_are_errors() {
        let v = Verifier::new(&two_way(2)).unwrap();
        let s = v.initial_state();
        assert!(matches!(v.verify(&[A, A], &s), Err(RcvError::InvalidPrefix(_))));
        assert!(matches!(v.verify(&[C], &s), Err(RcvError::InvalidPrefix(_))));
        let after_b = v.verify(&[B], &s).unwrap().next_state.unwrap();
        assert!(matches!(v.verify(&[A], &after_b), Err(RcvError::InvalidPrefix(_))));
        assert!(v.verify(&[B, A], &after_b).unwrap().feasible);
    }

    #[test]
    fn ballot_returns_to_pool_when_its_candidate_is_eliminated() {
        // A=4, B=2, C=1. Eliminating B first needs C boosted by 2; eliminating
        // C next lets those ballots take a second ranking.
        let p = ElectionProfile::new(["A", "B", "C"], 2)
            .ballots(4, &["A"])
            .ballots(2, &["B"])
            .ballots(1, &["C"])
            .with_unbound(2);
        let v = Verifier::new(&p).unwrap();
        let s = v.verify(&[B], &v.initial_state()).unwrap().next_state.unwrap();
        assert_eq!(s.tentative_unbound_len(), 0);
        assert_eq!(s.unbound_containing(C), 2);
        let s = v.verify(&[B, C], &s).unwrap().next_state.unwrap();
        assert_eq!(s.tentative_unbound_len(), 2);
        assert_eq!(s.tentative_bound_len() + s.tentative_unbound_len(), 9);
    }

    #[test]
    fn exhausted_unbound_ballot_stays_bound() {
        let p = ElectionProfile::new(["A", "B", "C"], 1)
            .ballots(5, &["A"])
            .ballots(2, &["B"])
            .ballots(1, &["C"])
            .with_unbound(2);
        let v = Verifier::new(&p).unwrap();
        let s = v.verify(&[B, C], &v.initial_state()).unwrap().next_state.unwrap();
        assert_eq!(s.tentative_unbound_len(), 0);
        assert_eq!(s.tentative_bound_len(), 10);
        let (_, exhausted) = v.tallies(&s);
        assert_eq!(exhausted, 2 + 2 + 1);
    }

    #[test]
    fn capacity_is_preferred_when_choosing_ballots() {
        let mut s = Verifier::new(&two_way(0)).unwrap().initial_state();
        s.active = CandidateSet::all(3);
        s.active.remove(C);
        s.capacity = 2;
        s.unbound = Arc::new(vec![
            TentativeBallots { assigned: BallotSignature(vec![C]), count: 1 },
            TentativeBallots { assigned: BallotSignature::default(), count: 1 },
        ]);
        assert!(s.assign(A, 1));
        assert!(s.unbound.iter().any(|g| g.assigned.0 == vec![A] && g.count == 1));
        assert!(s.assign(B, 1));
        assert!(s.unbound.iter().any(|g| g.assigned.0 == vec![C, B] && g.count == 1));
        assert!(!s.assign(B, 1));
    }
}
