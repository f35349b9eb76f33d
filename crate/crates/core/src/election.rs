//! Election profiles and the standard instant-runoff count.
//!
//! A profile holds the known (bound) ballots plus a count of ballots whose
//! contents are not yet known. [`count_ranked_votes`] tabulates a profile in
//! which every ballot is known.

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{RcvError, Result};

/// Largest candidate field supported by [`CandidateSet`].
pub const MAX_CANDIDATES: usize = 64;

/// A candidate, referred to by its dense index in the profile's candidate table.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CandidateId(pub u16);

impl CandidateId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Debug for CandidateId {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

impl fmt::Display for CandidateId {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A set of candidates stored as a bitmask.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
pub struct CandidateSet(u64);

impl CandidateSet {
    pub const fn empty() -> Self {
        CandidateSet(0)
    }

    /// The set {0, .., n-1}.
    pub fn all(n: usize) -> Self {
        assert!(n <= MAX_CANDIDATES, "at most {MAX_CANDIDATES} candidates are supported");
        if n == MAX_CANDIDATES {
            CandidateSet(u64::MAX)
        } else {
            CandidateSet((1u64 << n) - 1)
        }
    }

    pub fn contains(self, c: CandidateId) -> bool {
        c.index() < MAX_CANDIDATES && self.0 & (1u64 << c.0) != 0
    }

    pub fn insert(&mut self, c: CandidateId) {
        self.0 |= 1u64 << c.0;
    }

    pub fn remove(&mut self, c: CandidateId) {
        self.0 &= !(1u64 << c.0);
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn union(self, other: Self) -> Self {
        CandidateSet(self.0 | other.0)
    }

    /// Members in ascending id order.
    pub fn iter(self) -> impl Iterator<Item = CandidateId> {
        let mut bits = self.0;
        std::iter::from_fn(move || {
            if bits == 0 {
                None
            } else {
                let i = bits.trailing_zeros();
                bits &= bits - 1;
                Some(CandidateId(i as u16))
            }
        })
    }
}

impl FromIterator<CandidateId> for CandidateSet {
    fn from_iter<I: IntoIterator<Item = CandidateId>>(iter: I) -> Self {
        let mut s = CandidateSet::empty();
        for c in iter {
            s.insert(c);
        }
        s
    }
}

impl fmt::Debug for CandidateSet {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

/// An ordered, duplicate-free ranking. The first entry is the most preferred.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
pub struct BallotSignature(pub Vec<CandidateId>);

impl BallotSignature {
    pub fn new(rankings: Vec<CandidateId>) -> Self {
        BallotSignature(rankings)
    }

    pub fn rankings(&self) -> &[CandidateId] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, c: CandidateId) -> bool {
        self.0.contains(&c)
    }

    /// Highest-ranked candidate that is still in `active`.
    pub fn top_preference(&self, active: CandidateSet) -> Option<CandidateId> {
        self.0.iter().copied().find(|&c| active.contains(c))
    }
}

impl fmt::Debug for BallotSignature {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        f.debug_list().entries(self.0.iter()).finish()
    }
}

/// Candidates, bound ballots and the number of still-unbound ballots.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ElectionProfile {
    pub candidates: Vec<String>,
    pub bound_ballots: Vec<BallotSignature>,
    pub unbound_count: usize,
    /// Maximum number of rankings a voter may mark.
    pub max_rankings: usize,
}

impl ElectionProfile {
    pub fn new<S: Into<String>>(candidates: impl IntoIterator<Item = S>, max_rankings: usize) -> Self {
        ElectionProfile {
            candidates: candidates.into_iter().map(Into::into).collect(),
            bound_ballots: Vec::new(),
            unbound_count: 0,
            max_rankings,
        }
    }

    pub fn with_unbound(mut self, unbound_count: usize) -> Self {
        self.unbound_count = unbound_count;
        self
    }

    /// Adds `count` copies of a ballot given by candidate names.
    pub fn add_ballots(&mut self, count: usize, names: &[&str]) -> Result<()> {
        let sig = names
            .iter()
            .map(|n| self.candidate_id(n).ok_or_else(|| RcvError::UnknownCandidate(n.to_string())))
            .collect::<Result<Vec<_>>>()?;
        let sig = BallotSignature(sig);
        self.bound_ballots.extend(std::iter::repeat(sig).take(count));
        Ok(())
    }

    /// Builder form of [`ElectionProfile::add_ballots`]. Panics on unknown names.
    pub fn ballots(mut self, count: usize, names: &[&str]) -> Self {
        self.add_ballots(count, names).expect("known candidate names");
        self
    }

    pub fn num_candidates(&self) -> usize {
        self.candidates.len()
    }

    pub fn total_ballots(&self) -> usize {
        self.bound_ballots.len() + self.unbound_count
    }

    /// Longest ranking a ballot can hold: min(max_rankings, n).
    pub fn ranking_capacity(&self) -> usize {
        self.max_rankings.min(self.candidates.len())
    }

    pub fn all_candidates(&self) -> CandidateSet {
        CandidateSet::all(self.candidates.len().min(MAX_CANDIDATES))
    }

    pub fn candidate_id(&self, name: &str) -> Option<CandidateId> {
        self.candidates.iter().position(|c| c == name).map(|i| CandidateId(i as u16))
    }

    pub fn name(&self, c: CandidateId) -> &str {
        &self.candidates[c.index()]
    }

    pub fn names(&self, cs: impl IntoIterator<Item = CandidateId>) -> Vec<String> {
        cs.into_iter().map(|c| self.name(c).to_string()).collect()
    }

    pub fn validate(&self) -> Result<()> {
        let violations = validate_profile(self);
        if violations.is_empty() {
            Ok(())
        } else {
            Err(RcvError::InvalidProfile(violations))
        }
    }
}

/// One reason a profile is malformed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    /// Index of the offending bound ballot, if the violation is ballot-specific.
    pub ballot: Option<usize>,
    pub reason: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        match self.ballot {
            Some(i) => write!(f, "{} at ballot {}", self.reason, i),
            None => f.write_str(&self.reason),
        }
    }
}

pub fn validate_profile(profile: &ElectionProfile) -> Vec<Violation> {
    let mut out = Vec::new();
    let global = |reason: String| Violation { ballot: None, reason };
    let n = profile.num_candidates();
    if n == 0 {
        out.push(global("no candidates".into()));
    }
    if n > MAX_CANDIDATES {
        out.push(global(format!("{n} candidates exceeds the supported maximum of {MAX_CANDIDATES}")));
    }
    let mut seen = HashSet::new();
    for name in &profile.candidates {
        if name.trim().is_empty() {
            out.push(global("empty candidate name".into()));
        } else if !seen.insert(name.as_str()) {
            out.push(global(format!("duplicate candidate name {name:?}")));
        }
    }
    if profile.max_rankings == 0 {
        out.push(global("max_rankings must be positive".into()));
    }
    let capacity = profile.ranking_capacity();
    for (i, b) in profile.bound_ballots.iter().enumerate() {
        let at = |reason: String| Violation { ballot: Some(i), reason };
        if b.is_empty() {
            out.push(at("empty ballot".into()));
            continue;
        }
        if b.len() > capacity {
            out.push(at(format!("{} rankings exceeds capacity {}", b.len(), capacity)));
        }
        let mut on_ballot = CandidateSet::empty();
        for &c in b.rankings() {
            if c.index() >= n.min(MAX_CANDIDATES) {
                out.push(at(format!("unknown candidate id {}", c.0)));
            } else if on_ballot.contains(c) {
                out.push(at("duplicate candidate".into()));
            } else {
                on_ballot.insert(c);
            }
        }
    }
    out
}

/// Candidates in the order they were eliminated. A complete order ends with the winner.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
pub struct EliminationOrder(pub Vec<CandidateId>);

impl EliminationOrder {
    pub fn is_complete(&self, n: usize) -> bool {
        self.0.len() == n
    }

    pub fn winner(&self) -> Option<CandidateId> {
        self.0.last().copied()
    }

    pub fn as_slice(&self) -> &[CandidateId] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl fmt::Debug for EliminationOrder {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        f.debug_tuple("").field(&self.0).finish()
    }
}

/// Tallies for one elimination round.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RoundTally {
    pub active: CandidateSet,
    /// Indexed by candidate id; zero for inactive candidates.
    pub tallies: Vec<u64>,
    pub exhausted: u64,
    pub eliminated: CandidateId,
}

impl RoundTally {
    pub fn tally(&self, c: CandidateId) -> u64 {
        self.tallies[c.index()]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum TiePolicy {
    /// A shared minimum tally is an error.
    #[default]
    Strict,
    /// Eliminate the tied candidate with the lowest id.
    LowestId,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CountResult {
    pub order: EliminationOrder,
    pub rounds: Vec<RoundTally>,
}

impl CountResult {
    pub fn winner(&self) -> CandidateId {
        self.order.winner().expect("complete order")
    }
}

/// Standard instant-runoff count over a profile with no unbound ballots.
pub fn count_ranked_votes(profile: &ElectionProfile, ties: TiePolicy) -> Result<CountResult> {
    profile.validate()?;
    if profile.unbound_count > 0 {
        return Err(RcvError::UnboundBallotsPresent(profile.unbound_count));
    }
    count_ballots(profile, &profile.bound_ballots, ties)
}

/// Counts an explicit ballot list against the profile's candidate table.
pub(crate) fn count_ballots(
    profile: &ElectionProfile,
    ballots: &[BallotSignature],
    ties: TiePolicy,
) -> Result<CountResult> {
    let n = profile.num_candidates();
    let mut active = profile.all_candidates();
    let mut order = Vec::with_capacity(n);
    let mut rounds = Vec::with_capacity(n.saturating_sub(1));
    while active.len() > 1 {
        let mut tallies = vec![0u64; n];
        let mut exhausted = 0;
        for b in ballots {
            match b.top_preference(active) {
                Some(c) => tallies[c.index()] += 1,
                None => exhausted += 1,
            }
        }
        let min = active.iter().map(|c| tallies[c.index()]).min().expect("non-empty");
        let lowest: Vec<CandidateId> = active.iter().filter(|c| tallies[c.index()] == min).collect();
        if lowest.len() > 1 && ties == TiePolicy::Strict {
            return Err(RcvError::UnresolvableTie {
                round: rounds.len() + 1,
                candidates: profile.names(lowest),
            });
        }
        let eliminated = lowest[0];
        rounds.push(RoundTally { active, tallies, exhausted, eliminated });
        active.remove(eliminated);
        order.push(eliminated);
    }
    order.extend(active.iter());
    Ok(CountResult { order: EliminationOrder(order), rounds })
}
