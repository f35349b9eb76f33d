use std::path::PathBuf;

use thiserror::Error;

use crate::election::Violation;

#[derive(Debug, Error)]
pub enum RcvError {
    #[error("invalid profile: {}", format_violations(.0))]
    InvalidProfile(Vec<Violation>),

    #[error("unbound ballots present; use `outcomes` ({0} outstanding)")]
    UnboundBallotsPresent(usize),

    #[error("unresolvable tie in round {round} between {candidates:?}")]
    UnresolvableTie { round: usize, candidates: Vec<String> },

    #[error("invalid elimination prefix: {0}")]
    InvalidPrefix(String),

    #[error("every candidate was pruned at threshold {0}")]
    AllPruned(f64),

    #[error("invalid option: {0}")]
    InvalidOption(String),

    #[error("completion space too large: {size} completions exceeds cap {cap}")]
    SpaceTooLarge { size: u128, cap: u128 },

    #[error("outcome set is inconsistent with the profile: {0}")]
    InconsistentInput(String),

    #[error("outcome set is empty")]
    EmptyOutcomeSet,

    #[error("unknown candidate {0:?}")]
    UnknownCandidate(String),

    #[error("parse error in {path}: {message}")]
    Parse { path: PathBuf, message: String },

    #[error("search results disagree: {0}")]
    ResultMismatch(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn format_violations(v: &[Violation]) -> String {
    v.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; ")
}

pub type Result<T> = std::result::Result<T, RcvError>;
