//! Possible outcomes of instant-runoff elections with outstanding ballots.
//!
//! Given the ballots counted so far and the number still outstanding, the
//! crate enumerates every elimination order that some assignment of the
//! outstanding ballots could still produce, reports how many outstanding
//! ballots each possible winner minimally needs, and renders the set of
//! orders as a compressed graph.

pub mod bench;
pub mod dagviz;
pub mod election;
pub mod error;
pub mod ingest;
pub mod minbound;
pub mod oracle;
pub mod search;

pub use election::{
    count_ranked_votes, validate_profile, BallotSignature, CandidateId, CandidateSet, CountResult,
    ElectionProfile, EliminationOrder, RoundTally, TiePolicy, Violation,
};
pub use error::{RcvError, Result};
pub use search::{
    brute_force_outcomes, enumerate_outcomes, prune_candidates, SearchOptions, SearchReport, Verifier,
};
