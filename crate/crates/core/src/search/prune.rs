use crate::election::{BallotSignature, CandidateId, CandidateSet, ElectionProfile};
use crate::error::{RcvError, Result};

/// A profile with some candidates removed, and the map back to original ids.
#[derive(Clone, Debug)]
pub struct ReducedProfile {
    pub profile: ElectionProfile,
    /// `original[i]` is the id in the source profile of reduced candidate `i`.
    pub original: Vec<CandidateId>,
    pub removed: CandidateSet,
    /// Bound ballots that ranked only removed candidates.
    pub dropped_ballots: usize,
}

impl ReducedProfile {
    pub fn to_original(&self, c: CandidateId) -> CandidateId {
        self.original[c.index()]
    }
}

/// Deletes `removed` from the candidate table and from every ballot; later
/// rankings move up. Bound ballots left empty are dropped, since they would be
/// exhausted from the first round anyway.
pub fn remove_candidates(profile: &ElectionProfile, removed: CandidateSet) -> ReducedProfile {
    let n = profile.num_candidates();
    let mut remap = vec![None; n];
    let mut original = Vec::new();
    let mut candidates = Vec::new();
    for (i, name) in profile.candidates.iter().enumerate() {
        let id = CandidateId(i as u16);
        if !removed.contains(id) {
            remap[i] = Some(CandidateId(original.len() as u16));
            original.push(id);
            candidates.push(name.clone());
        }
    }
    let mut dropped_ballots = 0;
    let mut bound_ballots = Vec::with_capacity(profile.bound_ballots.len());
    for b in &profile.bound_ballots {
        let sig: Vec<CandidateId> = b.rankings().iter().filter_map(|c| remap[c.index()]).collect();
        if sig.is_empty() {
            dropped_ballots += 1;
        } else {
            bound_ballots.push(BallotSignature(sig));
        }
    }
    ReducedProfile {
        profile: ElectionProfile {
            candidates,
            bound_ballots,
            unbound_count: profile.unbound_count,
            max_rankings: profile.max_rankings,
        },
        original,
        removed,
        dropped_ballots,
    }
}

/// Removes every candidate whose first-round bound tally is strictly below
/// `threshold * |B|`.
pub fn prune_candidates(profile: &ElectionProfile, threshold: f64) -> Result<ReducedProfile> {
    if !(0.0..1.0).contains(&threshold) {
        return Err(RcvError::InvalidOption(format!("prune threshold {threshold} is outside [0, 1)")));
    }
    profile.validate()?;
    let mut first = vec![0u64; profile.num_candidates()];
    for b in &profile.bound_ballots {
        first[b.rankings()[0].index()] += 1;
    }
    let cutoff = threshold * profile.bound_ballots.len() as f64;
    let removed: CandidateSet = profile
        .all_candidates()
        .iter()
        .filter(|c| (first[c.index()] as f64) < cutoff)
        .collect();
    if removed.len() == profile.num_candidates() {
        return Err(RcvError::AllPruned(threshold));
    }
    if !removed.is_empty() {
        log::info!("pruning {} candidates below {:.1}% of first preferences", removed.len(), threshold * 100.0);
    }
    Ok(remove_candidates(profile, removed))
}
