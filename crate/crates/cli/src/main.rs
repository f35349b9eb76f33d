use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rcv_outcomes::bench::{run_bench, Algorithm};
use rcv_outcomes::dagviz::{build_tree, compress, EmitFormat};
use rcv_outcomes::ingest::{self, CsvMeta, Format};
use rcv_outcomes::minbound::min_bound_ballots;
use rcv_outcomes::oracle::{random_profile, RandomProfileParams};
use rcv_outcomes::search::DEFAULT_TIMEOUT_SECS;
use rcv_outcomes::{count_ranked_votes, enumerate_outcomes, ElectionProfile, RcvError, SearchOptions, SearchReport, TiePolicy};

#[derive(Parser, Debug)]
#[command(name = "rcv-outcomes", version, about = "Possible outcomes of instant-runoff elections with outstanding ballots")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Count a complete profile round by round
    Count {
        #[command(flatten)]
        input: ProfileArgs,
    },
    /// Enumerate every elimination order the outstanding ballots could still produce
    Outcomes {
        #[command(flatten)]
        input: ProfileArgs,
        #[command(flatten)]
        search: SearchArgs,
        /// Write the report JSON here instead of stdout
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Minimum number of outstanding ballots each possible winner needs
    Minbound {
        #[command(flatten)]
        input: ProfileArgs,
        #[command(flatten)]
        search: SearchArgs,
        /// Reuse a report from `outcomes` instead of searching again
        #[arg(long)]
        report: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Render a report's orders as a tree or compressed DAG
    Viz {
        report: PathBuf,
        #[arg(long, value_enum, default_value_t = VizFormat::Dot)]
        format: VizFormat,
        /// Merge identical subtrees
        #[arg(long)]
        compress: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Time brute force against branch and bound
    Bench {
        /// Benchmark this profile instead of a synthetic one
        #[arg(long)]
        profile: Option<PathBuf>,
        #[arg(long, default_value_t = 7)]
        n: usize,
        #[arg(long, default_value_t = 10_000)]
        ballots: usize,
        #[arg(long, default_value_t = 2_000)]
        unbound: usize,
        #[arg(long, default_value_t = 5)]
        max_rankings: usize,
        #[command(flatten)]
        search: SearchArgs,
        /// Write the CSV here instead of stdout
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
struct ProfileArgs {
    /// Profile in JSON, or CSV with a `<name>.meta.json` sidecar
    profile: PathBuf,
    /// CSV only: comma-separated candidate names (replaces the sidecar)
    #[arg(long, value_delimiter = ',')]
    candidates: Option<Vec<String>>,
    /// CSV only: ranking limit
    #[arg(long = "csv-max-rankings")]
    csv_max_rankings: Option<usize>,
    /// CSV only: number of outstanding ballots
    #[arg(long = "csv-unbound")]
    csv_unbound: Option<usize>,
}

#[derive(Args, Debug)]
struct SearchArgs {
    #[arg(long, default_value_t = DEFAULT_TIMEOUT_SECS)]
    timeout_secs: f64,
    /// Drop candidates below this share of first preferences (0 disables)
    #[arg(long, default_value_t = 0.0)]
    prune_threshold: f64,
    #[arg(long)]
    no_memoize: bool,
    #[arg(long)]
    parallel: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl SearchArgs {
    fn options(&self) -> SearchOptions {
        SearchOptions {
            timeout_secs: self.timeout_secs,
            prune_threshold: self.prune_threshold,
            memoize: !self.no_memoize,
            parallel: self.parallel,
            seed: self.seed,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum VizFormat {
    Dot,
    Json,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("RCV_LOG", "warn")).init();
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn run(command: Command) -> rcv_outcomes::Result<()> {
    match command {
        Command::Count { input } => cmd_count(&load(&input)?),
        Command::Outcomes { input, search, out } => {
            let profile = load(&input)?;
            let report = outcomes(&profile, &search.options())?;
            let summary = summary_line(&report);
            match out {
                Some(path) => {
                    report.write_json(&path)?;
                    println!("{summary}");
                }
                None => {
                    eprintln!("{summary}");
                    let mut buf = Vec::new();
                    report.write_json_to(&mut buf)?;
                    write_stdout(&buf)?;
                }
            }
            Ok(())
        }
        Command::Minbound { input, search, report, out } => {
            let profile = load(&input)?;
            let report = match report {
                Some(path) => SearchReport::read_json(&path)?,
                None => outcomes(&profile, &search.options())?,
            };
            let bounds = min_bound_ballots(&profile, &report)?;
            let json = bounds.to_json();
            for (name, b) in &json {
                eprintln!("{name}: {} ({:.2}% of outstanding)", b.min_ballots, 100.0 * b.fraction_of_unbound);
            }
            emit(out.as_deref(), &json_bytes(&json))
        }
        Command::Viz { report, format, compress: merge, out } => {
            let report = SearchReport::read_json(&report)?;
            if report.timed_out {
                warn_partial();
            }
            let tree = build_tree(&report)?;
            let graph = if merge { compress(&tree).to_graph() } else { tree.to_graph() };
            let format = match format {
                VizFormat::Dot => EmitFormat::Dot,
                VizFormat::Json => EmitFormat::Json,
            };
            emit(out.as_deref(), &graph.emit(format))
        }
        Command::Bench { profile, n, ballots, unbound, max_rankings, search, out } => {
            let opts = search.options();
            let profile = match profile {
                Some(path) => load_path(&path)?,
                None => random_profile(RandomProfileParams { n, ballots, unbound, max_rankings, seed: opts.seed }),
            };
            let result = run_bench(&profile, &opts, &Algorithm::ALL)?;
            if result.runs.iter().any(|r| r.report.timed_out) {
                warn_partial();
            }
            if let Some(s) = result.speedup() {
                eprintln!("speedup over brute force: {s:.2}x");
            }
            let mut buf = Vec::new();
            result.write_csv(&mut buf, true)?;
            emit(out.as_deref(), &buf)
        }
    }
}

fn load(input: &ProfileArgs) -> rcv_outcomes::Result<ElectionProfile> {
    let format = Format::from_path(&input.profile)
        .ok_or_else(|| RcvError::InvalidOption(format!("{}: expected a .json or .csv file", input.profile.display())))?;
    match (&input.candidates, format) {
        (Some(candidates), Format::Csv) => {
            let meta = CsvMeta {
                candidates: candidates.clone(),
                max_rankings: input.csv_max_rankings,
                unbound_count: input.csv_unbound.unwrap_or(0),
            };
            ingest::read_csv(&input.profile, &meta)
        }
        (Some(_), Format::Json) => Err(RcvError::InvalidOption("--candidates applies to CSV input only".into())),
        (None, _) => {
            let mut profile = ingest::read_profile(&input.profile, format)?;
            if let Some(u) = input.csv_unbound {
                profile.unbound_count = u;
            }
            if let Some(k) = input.csv_max_rankings {
                profile.max_rankings = k;
                profile.validate()?;
            }
            Ok(profile)
        }
    }
}

fn load_path(path: &Path) -> rcv_outcomes::Result<ElectionProfile> {
    load(&ProfileArgs { profile: path.to_path_buf(), candidates: None, csv_max_rankings: None, csv_unbound: None })
}

fn outcomes(profile: &ElectionProfile, opts: &SearchOptions) -> rcv_outcomes::Result<SearchReport> {
    let report = enumerate_outcomes(profile, opts)?;
    if report.timed_out {
        warn_partial();
    }
    Ok(report)
}

fn summary_line(report: &SearchReport) -> String {
    let k = report.possible_winners.len();
    let noun = if k == 1 { "possible winner" } else { "possible winners" };
    format!("{k} {noun}: {}", report.winner_names().join(", "))
}

fn warn_partial() {
    eprintln!("warning: search timed out; results are partial");
}

fn cmd_count(profile: &ElectionProfile) -> rcv_outcomes::Result<()> {
    let result = count_ranked_votes(profile, TiePolicy::default())?;
    let names = &profile.candidates;
    let width = names.iter().map(|n| n.len()).max().unwrap_or(0).max(9);
    let mut out = String::new();
    for (k, round) in result.rounds.iter().enumerate() {
        out.push_str(&format!("Round {}\n", k + 1));
        for c in round.active.iter() {
            out.push_str(&format!("  {:<width$} {:>8}\n", names[c.index()], round.tallies[c.index()]));
        }
        out.push_str(&format!("  {:<width$} {:>8}\n", "exhausted", round.exhausted));
        out.push_str(&format!("  eliminated: {}\n", names[round.eliminated.index()]));
    }
    let order: Vec<&str> = result.order.as_slice().iter().map(|c| names[c.index()].as_str()).collect();
    out.push_str(&format!("Winner: {}\n", names[result.winner().index()]));
    out.push_str(&format!("Elimination order: {}\n", order.join(", ")));
    write_stdout(out.as_bytes())
}

fn json_bytes<T: serde::Serialize>(value: &T) -> Vec<u8> {
    let mut v = serde_json::to_vec_pretty(value).expect("serializable");
    v.push(b'\n');
    v
}

fn emit(path: Option<&Path>, bytes: &[u8]) -> rcv_outcomes::Result<()> {
    match path {
        Some(p) => {
            let mut w = BufWriter::new(File::create(p)?);
            w.write_all(bytes)?;
            w.flush()?;
            Ok(())
        }
        None => write_stdout(bytes),
    }
}

fn write_stdout(bytes: &[u8]) -> rcv_outcomes::Result<()> {
    let mut out = io::stdout().lock();
    out.write_all(bytes)?;
    out.flush()?;
    Ok(())
}
