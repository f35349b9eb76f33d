//! Ground truth for small elections.
//!
//! Every way of filling in the unbound ballots is enumerated and counted with
//! the standard instant-runoff count. Completions that hit a tie in some round
//! are discarded, since the search only admits strict eliminations. Nothing in
//! here touches the search code.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::election::{count_ballots, BallotSignature, CandidateId, CandidateSet, ElectionProfile, EliminationOrder, TiePolicy};
use crate::error::{RcvError, Result};

pub const DEFAULT_COMPLETION_CAP: u128 = 1_000_000;

/// Every non-empty, duplicate-free ranking of at most `capacity` of `n` candidates.
pub fn all_signatures(n: usize, capacity: usize) -> Vec<BallotSignature> {
    fn extend(n: usize, capacity: usize, cur: &mut Vec<CandidateId>, out: &mut Vec<BallotSignature>) {
        if !cur.is_empty() {
            out.push(BallotSignature(cur.clone()));
        }
        if cur.len() == capacity {
            return;
        }
        for i in 0..n {
            let c = CandidateId(i as u16);
            if !cur.contains(&c) {
                cur.push(c);
                extend(n, capacity, cur, out);
                cur.pop();
            }
        }
    }
    let mut out = Vec::new();
    extend(n, capacity.min(n), &mut Vec::new(), &mut out);
    out
}

/// (#signatures)^unbound_count, saturating.
pub fn completion_space(profile: &ElectionProfile) -> u128 {
    let sigs = all_signatures(profile.num_candidates(), profile.ranking_capacity()).len() as u128;
    (0..profile.unbound_count).fold(1u128, |acc, _| acc.saturating_mul(sigs))
}

/// Calls `f` once per completion of the unbound ballots (as a multiset, since
/// unbound ballots are interchangeable) with the completed ballots and the
/// result of a strict count over bound plus completed ballots.
pub fn for_each_completion<F>(profile: &ElectionProfile, cap: u128, mut f: F) -> Result<()>
where
    F: FnMut(&[BallotSignature], Result<crate::election::CountResult>),
{
    profile.validate()?;
    let size = completion_space(profile);
    if size > cap {
        return Err(RcvError::SpaceTooLarge { size, cap });
    }
    let sigs = all_signatures(profile.num_candidates(), profile.ranking_capacity());
    let mut ballots = profile.bound_ballots.clone();
    let bound = ballots.len();
    let mut chosen = vec![0usize; profile.unbound_count];
    loop {
        ballots.truncate(bound);
        ballots.extend(chosen.iter().map(|&i| sigs[i].clone()));
        let result = count_ballots(profile, &ballots, TiePolicy::Strict);
        f(&ballots[bound..], result);
        // next non-decreasing index sequence
        let Some(pos) = chosen.iter().rposition(|&i| i + 1 < sigs.len()) else { break };
        let v = chosen[pos] + 1;
        for slot in &mut chosen[pos..] {
            *slot = v;
        }
    }
    Ok(())
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct OracleOutcome {
    pub winners: CandidateSet,
    pub orders: BTreeSet<EliminationOrder>,
    pub completions: u64,
    /// Completions discarded because some round had a tied minimum.
    pub tied: u64,
}

/// Winners and orders over all strict completions of the unbound ballots.
pub fn exhaustive_winner_set(profile: &ElectionProfile, cap: u128) -> Result<OracleOutcome> {
    let mut out = OracleOutcome::default();
    for_each_completion(profile, cap, |_, result| {
        out.completions += 1;
        match result {
            Ok(r) => {
                out.winners.insert(r.winner());
                out.orders.insert(r.order);
            }
            Err(_) => out.tied += 1,
        }
    })?;
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RandomProfileParams {
    pub n: usize,
    pub ballots: usize,
    pub unbound: usize,
    pub max_rankings: usize,
    pub seed: u64,
}

/// `A`..`Z`, then `C26`, `C27`, ...
pub fn candidate_name(i: usize) -> String {
    if i < 26 {
        ((b'A' + i as u8) as char).to_string()
    } else {
        format!("C{i}")
    }
}

/// Each ballot is a random-length prefix of a uniformly random permutation.
pub fn random_profile(params: RandomProfileParams) -> ElectionProfile {
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut profile = ElectionProfile::new((0..params.n).map(candidate_name), params.max_rankings);
    profile.unbound_count = params.unbound;
    let capacity = profile.ranking_capacity();
    let mut perm: Vec<CandidateId> = (0..params.n).map(|i| CandidateId(i as u16)).collect();
    for _ in 0..params.ballots {
        perm.shuffle(&mut rng);
        let len = rng.gen_range(1..=capacity);
        profile.bound_ballots.push(BallotSignature(perm[..len].to_vec()));
    }
    profile
}
