//! Command-line surface. Five subcommands cover the library: `match`
//! (run an engine), `verify` (stability report), `payoff` (normal-form
//! tables and the rank-everything dominance check), `cost` (application
//! season economics), and `simulate` (Monte Carlo curve plus escalation
//! rounds). Every run drops its outputs and a `manifest.json` into the
//! out directory; outputs are byte-identical across reruns of the same
//! inputs, manifest duration excepted.
//!
//! Exit codes: 0 success, 2 usage, 3 unreadable or malformed input,
//! 4 failed validation, 5 guard limit, 6 internal failure.

use crate::cost::{
    cost_profile, expected_total_spend, optimal_application_count, total_expected_payoff,
    BudgetMode,
};
use crate::engines::{
    boston_pool_traced, gale_shapley_traced, render_trace, EngineError, ProposingSide,
};
use crate::io::config::{parse_cost_config, parse_sim_config};
use crate::io::manifest::RunManifest;
use crate::io::market_file::{parse_market_text, MarketFileError};
use crate::io::matching_file::{parse_matching_csv, write_matching_csv, MatchingFileError};
use crate::market::{MarketInstance, Matching};
use crate::payoff::{
    build_payoff_table, check_rank_all_dominance, ActionMode, PayoffError, PlayerId, RawPayoffSpec,
    SUBSET_LIST_LIMIT, SUBSET_PLAYER_LIMIT,
};
use crate::sim::{escalation_dynamics, simulate_market, SimConfig};
use crate::stability::find_blocking_pairs;
use clap::{Args, Parser, Subcommand, ValueEnum};
use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

pub const CONFIG_DIR_ENV: &str = "MATCHMARKET_CONFIG_DIR";

#[derive(Debug)]
enum CliError {
    Parse(String),
    Validation(String),
    Guard(String),
    Internal(String),
}

impl CliError {
    fn code(&self) -> i32 {
        match self {
            CliError::Parse(_) => 3,
            CliError::Validation(_) => 4,
            CliError::Guard(_) => 5,
            CliError::Internal(_) => 6,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Parse(m)
            | CliError::Validation(m)
            | CliError::Guard(m)
            | CliError::Internal(m) => m,
        }
    }
}

impl From<EngineError> for CliError {
    fn from(e: EngineError) -> Self {
        match e {
            EngineError::TooLarge { .. } => CliError::Guard(e.to_string()),
            _ => CliError::Validation(e.to_string()),
        }
    }
}

impl From<PayoffError> for CliError {
    fn from(e: PayoffError) -> Self {
        match e {
            PayoffError::TooManyPlayers { .. } | PayoffError::ListTooLong { .. } => {
                CliError::Guard(e.to_string())
            }
            _ => CliError::Validation(e.to_string()),
        }
    }
}

#[derive(Parser)]
#[command(
    name = "matchmarket",
    version,
    about = "Two-sided matching engines, stability audits, ranking-game payoffs, and application-season economics"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a matching engine over a market file and write the matching CSV
    Match(MatchArgs),
    /// Audit a matching against a market and report blocking pairs
    Verify(VerifyArgs),
    /// Build ranking-game payoff tables and check full-list dominance
    Payoff(PayoffArgs),
    /// Profile application-season costs and find the optimal count
    Cost(CostArgs),
    /// Monte Carlo match-probability curve and escalation rounds
    Simulate(SimulateArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum EngineKind {
    /// Deferred acceptance (stable)
    Gs,
    /// Tiered priority pairing (historical, can be unstable)
    Boston,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ProposeSide {
    Applicants,
    Programs,
}

#[derive(Args)]
struct MatchArgs {
    /// Market file (CSV rows or JSON object)
    #[arg(short = 'i', long = "input")]
    input: String,
    #[arg(long, value_enum, default_value = "gs")]
    engine: EngineKind,
    /// Proposing side for deferred acceptance
    #[arg(long, value_enum, default_value = "applicants")]
    propose: ProposeSide,
    /// Also write a step-by-step trace.txt
    #[arg(long)]
    trace: bool,
    #[arg(short = 'o', long = "out-dir", default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Args)]
struct VerifyArgs {
    /// Market file (CSV rows or JSON object)
    #[arg(short = 'i', long = "input")]
    input: String,
    /// Matching CSV to audit
    #[arg(short = 'm', long = "matching")]
    matching: String,
    #[arg(short = 'o', long = "out-dir", default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    /// Subset actions on tiny games, rank-all/rank-none otherwise
    Auto,
    Extremes,
    Subsets,
}

#[derive(Args)]
struct PayoffArgs {
    /// Market file (CSV rows or JSON object)
    #[arg(short = 'i', long = "input")]
    input: String,
    /// Rank payoff tables, JSON
    #[arg(long = "spec")]
    spec: String,
    #[arg(long, value_enum, default_value = "auto")]
    mode: ModeArg,
    /// Also run the full-list weak-dominance check
    #[arg(long)]
    dominance: bool,
    #[arg(short = 'o', long = "out-dir", default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Args)]
struct CostArgs {
    /// Season config: fee tiers, probabilities, payoffs, budget
    #[arg(long = "schedule")]
    schedule: String,
    /// Report the value-maximizing application count
    #[arg(long)]
    optimize: bool,
    /// Check budget feasibility against worst-case spend instead of expected
    #[arg(long = "worst-case")]
    worst_case: bool,
    #[arg(short = 'o', long = "out-dir", default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Args)]
struct SimulateArgs {
    /// Simulation config file
    #[arg(long = "config")]
    config: String,
    /// Override the config seed
    #[arg(long)]
    seed: Option<u64>,
    /// Override the escalation round count
    #[arg(long)]
    rounds: Option<u32>,
    #[arg(short = 'o', long = "out-dir", default_value = ".")]
    out_dir: PathBuf,
}

/// Relative paths that do not exist locally fall back to
/// `$MATCHMARKET_CONFIG_DIR`.
fn resolve_path(given: &str) -> PathBuf {
    let path = PathBuf::from(given);
    if path.exists() || path.is_absolute() {
        return path;
    }
    if let Ok(dir) = std::env::var(CONFIG_DIR_ENV) {
        let alt = Path::new(&dir).join(&path);
        if alt.exists() {
            return alt;
        }
    }
    path
}

fn read_input(given: &str, manifest: &mut RunManifest) -> Result<String, CliError> {
    let path = resolve_path(given);
    let bytes =
        std::fs::read(&path).map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))?;
    manifest.record_input(given, &bytes);
    String::from_utf8(bytes)
        .map_err(|_| CliError::Parse(format!("{}: not valid UTF-8", path.display())))
}

fn load_market(given: &str, manifest: &mut RunManifest) -> Result<MarketInstance, CliError> {
    let text = read_input(given, manifest)?;
    parse_market_text(&text).map_err(|e| match e {
        MarketFileError::Market(inner) => CliError::Validation(format!("{given}: {inner}")),
        other => CliError::Parse(format!("{given}: {other}")),
    })
}

fn write_output(dir: &Path, name: &str, text: &str) -> Result<(), CliError> {
    std::fs::create_dir_all(dir)
        .map_err(|e| CliError::Internal(format!("{}: {e}", dir.display())))?;
    let path = dir.join(name);
    std::fs::write(&path, text)
        .map_err(|e| CliError::Internal(format!("{}: {e}", path.display())))?;
    println!("wrote {name}");
    Ok(())
}

fn finish(dir: &Path, mut manifest: RunManifest, started: Instant) -> Result<(), CliError> {
    manifest.duration_ms = started.elapsed().as_millis() as u64;
    std::fs::create_dir_all(dir)
        .map_err(|e| CliError::Internal(format!("{}: {e}", dir.display())))?;
    let path = dir.join("manifest.json");
    std::fs::write(&path, manifest.to_json())
        .map_err(|e| CliError::Internal(format!("{}: {e}", path.display())))?;
    Ok(())
}

/// Rounds cents to the nearest cent and formats as dollars with thousands
/// separators: 986486.0 → "$9,864.86".
fn dollars(cents: f64) -> String {
    let total = cents.round() as i64;
    let sign = if total < 0 { "-" } else { "" };
    let abs = total.unsigned_abs();
    let whole = abs / 100;
    let frac = abs % 100;
    let digits = whole.to_string();
    let mut grouped = String::new();
    for (i, c) in digits.chars().enumerate() {
        if i > 0 && (digits.len() - i).is_multiple_of(3) {
            grouped.push(',');
        }
        grouped.push(c);
    }
    format!("{sign}${grouped}.{frac:02}")
}

fn run_match(args: MatchArgs) -> Result<(), CliError> {
    let started = Instant::now();
    let mut manifest = RunManifest::new("match");
    let mut market = load_market(&args.input, &mut manifest)?;

    let side = match args.propose {
        ProposeSide::Applicants => ProposingSide::Applicants,
        ProposeSide::Programs => ProposingSide::Programs,
    };
    let mut trace = Vec::new();
    let (matching, engine_label) = match args.engine {
        EngineKind::Gs => {
            if !market.all_programs_strict() {
                market = market.flatten_tiers();
                println!("note: tier rows flattened into strict preference order");
            }
            let label = match side {
                ProposingSide::Applicants => "deferred acceptance, applicants propose",
                ProposingSide::Programs => "deferred acceptance, programs propose",
            };
            (gale_shapley_traced(&market, side, &mut trace)?, label)
        }
        EngineKind::Boston => (
            boston_pool_traced(&market, &mut trace)?,
            "tiered priority pairing",
        ),
    };

    println!("engine: {engine_label}");
    println!(
        "matched {} of {} applicants; filled {} of {} seats",
        matching.matched_count(),
        market.applicant_count(),
        matching.filled_seats(),
        market
            .program_ids()
            .map(|p| market.capacity(p) as usize)
            .sum::<usize>()
    );
    write_output(
        &args.out_dir,
        "matching.csv",
        &write_matching_csv(&market, &matching),
    )?;
    if args.trace {
        write_output(&args.out_dir, "trace.txt", &render_trace(&market, &trace))?;
    }
    manifest.record_setting(
        "engine",
        match args.engine {
            EngineKind::Gs => "gs",
            EngineKind::Boston => "boston",
        },
    );
    manifest.record_setting(
        "propose",
        match args.propose {
            ProposeSide::Applicants => "applicants",
            ProposeSide::Programs => "programs",
        },
    );
    finish(&args.out_dir, manifest, started)
}

fn run_verify(args: VerifyArgs) -> Result<(), CliError> {
    let started = Instant::now();
    let mut manifest = RunManifest::new("verify");
    let market = load_market(&args.input, &mut manifest)?;
    let matching_text = read_input(&args.matching, &mut manifest)?;
    let matching: Matching = parse_matching_csv(&matching_text, &market).map_err(|e| match e {
        MatchingFileError::Csv { .. } => CliError::Parse(format!("{}: {e}", args.matching)),
        MatchingFileError::Invalid(_) => CliError::Validation(format!("{}: {e}", args.matching)),
    })?;

    let blocks =
        find_blocking_pairs(&market, &matching).map_err(|e| CliError::Validation(e.to_string()))?;
    let mut report = String::from("applicant,program,applicant_gain,program_gain\n");
    for b in &blocks {
        let a_gain = b.applicant_gain.map(|g| g.to_string()).unwrap_or_default();
        let p_gain = b.program_gain.map(|g| g.to_string()).unwrap_or_default();
        let _ = writeln!(
            report,
            "{},{},{a_gain},{p_gain}",
            market.applicant_name(b.applicant),
            market.program_name(b.program)
        );
    }
    if blocks.is_empty() {
        println!("STABLE, 0 blocking pairs");
    } else {
        let noun = if blocks.len() == 1 { "pair" } else { "pairs" };
        println!("UNSTABLE, {} blocking {noun}", blocks.len());
    }
    write_output(&args.out_dir, "stability.csv", &report)?;
    finish(&args.out_dir, manifest, started)
}

fn table_mode(market: &MarketInstance, requested: ModeArg) -> ActionMode {
    match requested {
        ModeArg::Extremes => ActionMode::Extremes,
        ModeArg::Subsets => ActionMode::Subsets,
        ModeArg::Auto => {
            let players = market.applicant_count() + market.program_count();
            let longest = market
                .applicant_ids()
                .map(|a| market.applicant_pref(a).len())
                .chain(
                    market
                        .program_ids()
                        .map(|p| market.program_pref(p).ranked_count()),
                )
                .max()
                .unwrap_or(0);
            if players <= SUBSET_PLAYER_LIMIT && longest <= SUBSET_LIST_LIMIT {
                ActionMode::Subsets
            } else {
                ActionMode::Extremes
            }
        }
    }
}

fn run_payoff(args: PayoffArgs) -> Result<(), CliError> {
    let started = Instant::now();
    let mut manifest = RunManifest::new("payoff");
    let market = load_market(&args.input, &mut manifest)?;
    let spec_text = read_input(&args.spec, &mut manifest)?;
    let raw: RawPayoffSpec = serde_json::from_str(&spec_text)
        .map_err(|e| CliError::Parse(format!("{}: {e}", args.spec)))?;
    let spec = raw.validate().map_err(CliError::from)?;

    let players: Vec<PlayerId> = market
        .applicant_ids()
        .map(PlayerId::Applicant)
        .chain(market.program_ids().map(PlayerId::Program))
        .collect();
    let mode = table_mode(&market, args.mode);
    let mode_label = match mode {
        ActionMode::Extremes => "extremes",
        ActionMode::Subsets => "subsets",
    };
    let table = build_payoff_table(&market, &spec, &players, mode)?;

    let mut csv = String::new();
    for name in &table.player_names {
        let _ = write!(csv, "action:{name},");
    }
    let mut names = table.player_names.iter();
    if let Some(first) = names.next() {
        let _ = write!(csv, "payoff:{first}");
    }
    for name in names {
        let _ = write!(csv, ",payoff:{name}");
    }
    csv.push('\n');
    for entry in &table.entries {
        for (player, &action) in entry.action_indices.iter().enumerate() {
            let _ = write!(csv, "{},", table.actions[player][action].label);
        }
        let mut payoffs = entry.payoffs.iter();
        if let Some(first) = payoffs.next() {
            let _ = write!(csv, "{first}");
        }
        for p in payoffs {
            let _ = write!(csv, ",{p}");
        }
        csv.push('\n');
    }
    println!(
        "players: {}; mode: {mode_label}; profiles: {}",
        players.len(),
        table.entries.len()
    );
    write_output(&args.out_dir, "payoff.csv", &csv)?;
    manifest.record_setting("mode", mode_label);

    if args.dominance {
        let report = check_rank_all_dominance(&market, &spec)?;
        let verdict = if report.holds() { "yes" } else { "no" };
        println!(
            "full-list weak dominance: {verdict} ({} comparisons, {} counterexamples)",
            report.comparisons,
            report.counterexamples.len()
        );
        let mut cx = String::from(
            "player,better_action,full_list_payoff,deviation_payoff,opponent_actions\n",
        );
        for c in &report.counterexamples {
            let opponents: Vec<String> = c
                .opponent_actions
                .iter()
                .map(|(n, a)| format!("{n}={a}"))
                .collect();
            let _ = writeln!(
                cx,
                "{},{},{},{},{}",
                c.player,
                c.better_action,
                c.full_list_payoff,
                c.deviation_payoff,
                opponents.join(";")
            );
        }
        write_output(&args.out_dir, "dominance.csv", &cx)?;
    }
    finish(&args.out_dir, manifest, started)
}

fn run_cost(args: CostArgs) -> Result<(), CliError> {
    let started = Instant::now();
    let mut manifest = RunManifest::new("cost");
    let text = read_input(&args.schedule, &mut manifest)?;
    let cfg =
        parse_cost_config(&text).map_err(|e| CliError::Parse(format!("{}: {e}", args.schedule)))?;
    cfg.spec
        .validate()
        .map_err(|e| CliError::Validation(e.to_string()))?;
    cfg.budget
        .validate()
        .map_err(|e| CliError::Validation(e.to_string()))?;
    let mode = if args.worst_case {
        BudgetMode::WorstCase
    } else {
        BudgetMode::Expected
    };
    let mode_label = if args.worst_case {
        "worst-case"
    } else {
        "expected"
    };

    let rows = cost_profile(&cfg.spec, &cfg.budget, cfg.programs, mode);
    let mut csv = String::from(
        "q,fees_cents,expected_interviews,expected_spend_cents,value_cents,feasible\n",
    );
    for row in &rows {
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{}",
            row.q, row.fees, row.expected_interviews, row.expected_spend, row.value, row.feasible
        );
    }
    println!(
        "profiled q = 0..={} (budget mode: {mode_label})",
        cfg.programs
    );
    write_output(&args.out_dir, "cost.csv", &csv)?;

    if args.optimize {
        let (q_star, value) = optimal_application_count(&cfg.spec, &cfg.budget, cfg.programs, mode);
        let spend = expected_total_spend(q_star, &cfg.spec, mode);
        let (net, feasible) = total_expected_payoff(q_star, &cfg.spec, &cfg.budget, mode);
        debug_assert_eq!(net, value);
        println!("optimal application count: q* = {q_star}");
        println!("expected total cost at q*: {}", dollars(spend));
        println!(
            "expected net value at q*: {}{}",
            dollars(value),
            if feasible { "" } else { " (infeasible)" }
        );
    }
    manifest.record_setting("budget_mode", mode_label);
    manifest.record_setting("q_max", cfg.programs);
    finish(&args.out_dir, manifest, started)
}

fn run_simulate(args: SimulateArgs) -> Result<(), CliError> {
    let started = Instant::now();
    let mut manifest = RunManifest::new("simulate");
    let text = read_input(&args.config, &mut manifest)?;
    let cfg =
        parse_sim_config(&text).map_err(|e| CliError::Parse(format!("{}: {e}", args.config)))?;
    let sim = SimConfig {
        seed: args.seed.unwrap_or(cfg.sim.seed),
        ..cfg.sim
    };
    sim.validate()
        .map_err(|e| CliError::Validation(e.to_string()))?;
    cfg.spec
        .validate()
        .map_err(|e| CliError::Validation(e.to_string()))?;
    cfg.budget
        .validate()
        .map_err(|e| CliError::Validation(e.to_string()))?;
    let rounds = args.rounds.unwrap_or(cfg.rounds);

    let result = simulate_market(&sim).map_err(|e| CliError::Validation(e.to_string()))?;
    let mut curve = String::from("k,cum_prob,stderr,n_k,n_exactly_k,matched_exactly_k\n");
    for pt in &result.curve.points {
        let _ = writeln!(
            curve,
            "{},{},{},{},{},{}",
            pt.k,
            pt.cum_match_prob,
            pt.stderr,
            pt.n_at_least_k,
            pt.n_exactly_k,
            pt.matched_exactly_k
        );
    }
    println!(
        "replicas: {}; match rate: {:.4}; mean times ranked: {:.3}",
        sim.replicas, result.match_rate, result.mean_ranks_per_applicant
    );
    write_output(&args.out_dir, "curve.csv", &curve)?;

    let series = escalation_dynamics(&sim, rounds, &cfg.spec, &cfg.budget, BudgetMode::Expected)
        .map_err(|e| CliError::Validation(e.to_string()))?;
    let mut esc = String::from("round,mean_q,mean_interviews,empirical_interview_prob\n");
    for row in &series {
        let _ = writeln!(
            esc,
            "{},{},{},{}",
            row.round, row.applications, row.mean_interviews, row.empirical_interview_prob
        );
    }
    if let Some(last) = series.last() {
        println!(
            "escalation: {} rounds; final applications per applicant: {}",
            series.len(),
            last.applications
        );
    }
    write_output(&args.out_dir, "escalation.csv", &esc)?;

    manifest.seed = Some(sim.seed);
    manifest.record_setting("replicas", sim.replicas);
    manifest.record_setting("rounds", rounds);
    finish(&args.out_dir, manifest, started)
}

/// Parses argv, runs the chosen subcommand, and maps failures onto the
/// documented exit codes. Errors print to stderr.
pub fn run_cli<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let outcome = match cli.command {
        Command::Match(args) => run_match(args),
        Command::Verify(args) => run_verify(args),
        Command::Payoff(args) => run_payoff(args),
        Command::Cost(args) => run_cost(args),
        Command::Simulate(args) => run_simulate(args),
    };
    match outcome {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {}", e.message());
            e.code()
        }
    }
}
