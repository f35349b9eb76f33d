//! Reading and writing election profiles.
//!
//! Two formats are supported:
//!
//! * JSON: `{"candidates": [..], "max_rankings": k, "ballots": [[..], ..], "unbound_count": u}`
//! * CSV: a `rank1,...,rankK` header and one row per bound ballot. Candidate
//!   table, `max_rankings` and `unbound_count` come from a sidecar
//!   `<stem>.meta.json` (or are passed in directly).
//!
//! Every ranking goes through the same normalization: `undervote` and blank
//! slots are skipped, the ranking stops at the first `overvote`, and repeated
//! candidates keep only their first occurrence. Rankings that end up empty
//! are blank ballots and are dropped.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::election::{BallotSignature, CandidateId, ElectionProfile, Violation};
use crate::error::{RcvError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

impl Format {
    pub fn from_path(path: &Path) -> Option<Format> {
        match path.extension()?.to_str()?.to_ascii_lowercase().as_str() {
            "json" => Some(Format::Json),
            "csv" => Some(Format::Csv),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProfileJson {
    pub candidates: Vec<String>,
    pub max_rankings: usize,
    pub ballots: Vec<Vec<String>>,
    pub unbound_count: usize,
}

/// What a CSV ballot file does not carry itself.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CsvMeta {
    pub candidates: Vec<String>,
    /// Defaults to the number of rank columns.
    #[serde(default)]
    pub max_rankings: Option<usize>,
    #[serde(default)]
    pub unbound_count: usize,
}

/// One rank slot of a raw ballot.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RankToken<'a> {
    Candidate(&'a str),
    Undervote,
    Overvote,
}

impl<'a> RankToken<'a> {
    pub fn parse(cell: &'a str) -> Self {
        let cell = cell.trim();
        if cell.is_empty() || cell.eq_ignore_ascii_case("undervote") {
            RankToken::Undervote
        } else if cell.eq_ignore_ascii_case("overvote") {
            RankToken::Overvote
        } else {
            RankToken::Candidate(cell)
        }
    }
}

/// Normalizes raw rank cells into a signature over `candidates`.
pub fn normalize_ranking<'a, I>(candidates: &[String], cells: I) -> Result<BallotSignature>
where
    I: IntoIterator<Item = &'a str>,
{
    let mut sig = Vec::new();
    for cell in cells {
        match RankToken::parse(cell) {
            RankToken::Undervote => {}
            RankToken::Overvote => break,
            RankToken::Candidate(name) => {
                let id = candidates
                    .iter()
                    .position(|c| c == name)
                    .map(|i| CandidateId(i as u16))
                    .ok_or_else(|| RcvError::UnknownCandidate(name.to_string()))?;
                if !sig.contains(&id) {
                    sig.push(id);
                }
            }
        }
    }
    Ok(BallotSignature(sig))
}

fn parse_error(path: &Path, message: impl ToString) -> RcvError {
    RcvError::Parse { path: path.to_path_buf(), message: message.to_string() }
}

/// `ballots.csv` -> `ballots.meta.json`
pub fn sidecar_path(csv_path: &Path) -> PathBuf {
    csv_path.with_extension("meta.json")
}

pub fn read_profile(path: &Path, format: Format) -> Result<ElectionProfile> {
    match format {
        Format::Json => read_json(path),
        Format::Csv => {
            let meta_path = sidecar_path(path);
            let file = File::open(&meta_path)?;
            let meta: CsvMeta =
                serde_json::from_reader(BufReader::new(file)).map_err(|e| parse_error(&meta_path, e))?;
            read_csv(path, &meta)
        }
    }
}

fn read_json(path: &Path) -> Result<ElectionProfile> {
    let file = File::open(path)?;
    let json: ProfileJson = serde_json::from_reader(BufReader::new(file)).map_err(|e| parse_error(path, e))?;
    from_json(json)
}

pub fn from_json(json: ProfileJson) -> Result<ElectionProfile> {
    let mut profile = ElectionProfile::new(json.candidates, json.max_rankings);
    profile.unbound_count = json.unbound_count;
    let mut blank = 0;
    for (i, ranking) in json.ballots.iter().enumerate() {
        if ranking.len() > json.max_rankings {
            return Err(RcvError::InvalidProfile(vec![Violation {
                ballot: Some(i),
                reason: format!("{} rank slots exceeds max_rankings {}", ranking.len(), json.max_rankings),
            }]));
        }
        let sig = normalize_ranking(&profile.candidates, ranking.iter().map(String::as_str))?;
        if sig.is_empty() {
            blank += 1;
        } else {
            profile.bound_ballots.push(sig);
        }
    }
    if blank > 0 {
        log::info!("dropped {blank} blank ballots");
    }
    profile.validate()?;
    Ok(profile)
}

pub fn read_csv(path: &Path, meta: &CsvMeta) -> Result<ElectionProfile> {
    let mut reader = csv::ReaderBuilder::new().flexible(true).trim(csv::Trim::All).from_path(path).map_err(|e| {
        match e.into_kind() {
            csv::ErrorKind::Io(io) => RcvError::Io(io),
            other => parse_error(path, format!("{other:?}")),
        }
    })?;
    let header = reader.headers().map_err(|e| parse_error(path, e))?.clone();
    for (i, h) in header.iter().enumerate() {
        if !h.eq_ignore_ascii_case(&format!("rank{}", i + 1)) {
            return Err(parse_error(path, format!("expected header column rank{}, found {h:?}", i + 1)));
        }
    }
    let columns = header.len();
    let max_rankings = meta.max_rankings.unwrap_or(columns);
    if columns > max_rankings {
        return Err(parse_error(path, format!("{columns} rank columns exceeds max_rankings {max_rankings}")));
    }
    let mut profile = ElectionProfile::new(meta.candidates.clone(), max_rankings);
    profile.unbound_count = meta.unbound_count;
    let mut blank = 0;
    for (row, record) in reader.records().enumerate() {
        let record = record.map_err(|e| parse_error(path, e))?;
        if record.len() > columns {
            return Err(parse_error(path, format!("row {} has {} cells, header has {columns}", row + 1, record.len())));
        }
        let sig = normalize_ranking(&profile.candidates, record.iter())?;
        if sig.is_empty() {
            blank += 1;
        } else {
            profile.bound_ballots.push(sig);
        }
    }
    if blank > 0 {
        log::info!("dropped {blank} blank ballots from {}", path.display());
    }
    profile.validate()?;
    Ok(profile)
}

pub fn to_json(profile: &ElectionProfile) -> ProfileJson {
    ProfileJson {
        candidates: profile.candidates.clone(),
        max_rankings: profile.max_rankings,
        ballots: profile.bound_ballots.iter().map(|b| profile.names(b.rankings().iter().copied())).collect(),
        unbound_count: profile.unbound_count,
    }
}

/// Writes `profile`; for CSV the sidecar metadata file is written too.
pub fn write_profile(profile: &ElectionProfile, path: &Path, format: Format) -> Result<()> {
    profile.validate()?;
    match format {
        Format::Json => {
            let mut w = BufWriter::new(File::create(path)?);
            serde_json::to_writer(&mut w, &to_json(profile)).map_err(std::io::Error::from)?;
            writeln!(w)?;
            w.flush()?;
        }
        Format::Csv => {
            let mut w = csv::WriterBuilder::new().flexible(true).from_path(path).map_err(csv_io)?;
            let header: Vec<String> = (1..=profile.max_rankings).map(|i| format!("rank{i}")).collect();
            w.write_record(&header).map_err(csv_io)?;
            for b in &profile.bound_ballots {
                let mut row = profile.names(b.rankings().iter().copied());
                row.resize(profile.max_rankings, String::new());
                w.write_record(&row).map_err(csv_io)?;
            }
            w.flush()?;
            let meta = CsvMeta {
                candidates: profile.candidates.clone(),
                max_rankings: Some(profile.max_rankings),
                unbound_count: profile.unbound_count,
            };
            let mut m = BufWriter::new(File::create(sidecar_path(path))?);
            serde_json::to_writer_pretty(&mut m, &meta).map_err(std::io::Error::from)?;
            writeln!(m)?;
            m.flush()?;
        }
    }
    Ok(())
}

fn csv_io(e: csv::Error) -> RcvError {
    RcvError::Io(std::io::Error::other(e))
}
