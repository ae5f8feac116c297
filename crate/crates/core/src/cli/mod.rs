//! The `crowdgame` command line: equilibrium queries, simulation, parameter
//! sweeps and the oracle verification suite.
//!
//! Data goes to stdout (or `--out`), diagnostics to stderr. Exit status is 0
//! on success, 1 when verification fails or output cannot be written, and 2
//! for usage errors.

pub mod eq;
pub mod format;
pub mod sweep;
pub mod verify;

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::sync::Arc;

use clap::{Parser, Subcommand, ValueEnum};

use crate::error::GameError;
use crate::model::{FirstStageProfile, GameParams};
use crate::montecarlo::{
    equilibrium_policy, policy_by_name, run_batch, Conditioning, EquilibriumSelection, Policy,
    SimConfig, SimReport, DEFAULT_PARTITIONS,
};

pub use eq::{eq_report, EqQuery, EqReport};
pub use sweep::{unit_grid, write_sweep, SweepSpec, SWEEP_COLUMNS};
pub use verify::{run_verification, Analytic, AnalyticEngine, VerifyOptions};

/// Environment variable that overrides the default simulation seed.
pub const SEED_ENV: &str = "CROWDGAME_SEED";

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "crowdgame",
    version,
    about = "Crowdsourcing attack game: equilibria, simulation, sweeps"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the ex-ante payoff table, pure first-stage equilibria and region;
    /// with productivities, also the second-stage equilibrium.
    Eq(EqArgs),
    /// Run a seeded Monte Carlo batch and print a JSON report.
    Simulate(SimulateArgs),
    /// Write (q, d) phase-diagram data as CSV.
    Sweep(SweepArgs),
    /// Check every closed form against the brute-force oracle.
    Verify(VerifyArgs),
}

#[derive(Debug, clap::Args)]
pub struct EqArgs {
    /// Attack cost, in [0, 1].
    #[arg(long)]
    pub q: f64,
    /// Attack damage, in [0, 1].
    #[arg(long)]
    pub d: f64,
    /// Realised productivity of player 1; requests the second-stage equilibrium.
    #[arg(long)]
    pub p1: Option<f64>,
    #[arg(long)]
    pub p2: Option<f64>,
    /// First-stage profile for the second-stage query (CC, CS, SC, SS); defaults to CC.
    #[arg(long)]
    pub profile: Option<String>,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ConditioningArg {
    All,
    Contested,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Json,
    Text,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SelectArg {
    PreferCc,
    PreferSs,
}

#[derive(Debug, clap::Args)]
pub struct SimulateArgs {
    /// Attack cost, in [0, 1].
    #[arg(long)]
    pub q: f64,
    /// Attack damage, in [0, 1].
    #[arg(long)]
    pub d: f64,
    #[arg(long, default_value_t = 1_000_000)]
    pub trials: u64,
    #[arg(long, env = SEED_ENV, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = "equilibrium")]
    pub policy1: String,
    #[arg(long, default_value = "equilibrium")]
    pub policy2: String,
    #[arg(long, value_enum, default_value_t = ConditioningArg::All)]
    pub conditioning: ConditioningArg,
    /// Skip the first stage and play this profile.
    #[arg(long)]
    pub profile: Option<String>,
    /// First-stage equilibrium played by `equilibrium` policies where CC and SS both are.
    #[arg(long, value_enum, default_value_t = SelectArg::PreferCc)]
    pub select: SelectArg,
    #[arg(long, default_value_t = DEFAULT_PARTITIONS)]
    pub partitions: u32,
    #[arg(long, value_enum, default_value_t = FormatArg::Json)]
    pub format: FormatArg,
    /// Write to this file instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, clap::Args)]
pub struct SweepArgs {
    #[arg(long, default_value_t = 101)]
    pub q_points: usize,
    #[arg(long, default_value_t = 101)]
    pub d_points: usize,
    /// Explicit q values (comma separated); overrides --q-points.
    #[arg(long, value_delimiter = ',')]
    pub q_values: Option<Vec<f64>>,
    /// Explicit d values (comma separated); overrides --d-points.
    #[arg(long, value_delimiter = ',')]
    pub d_values: Option<Vec<f64>>,
    /// Subset of columns to emit; header order is always the canonical one.
    #[arg(long, value_delimiter = ',')]
    pub columns: Option<Vec<String>>,
    /// Write to this file instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, clap::Args)]
pub struct VerifyArgs {
    #[arg(long, default_value_t = 2000)]
    pub resolution: usize,
    #[arg(long, default_value_t = 51)]
    pub grid: usize,
    #[arg(long, default_value_t = 101)]
    pub points: usize,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(#[from] GameError),
    #[error("cannot write {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("verification failed: {0}")]
    Verification(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Io { .. } | CliError::Verification(_) => EXIT_FAILURE,
        }
    }
}

fn parse_profile(s: &Option<String>) -> Result<Option<FirstStageProfile>, GameError> {
    s.as_deref().map(str::parse).transpose()
}

fn io_err(path: &str) -> impl Fn(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_string(),
        source,
    }
}

/// Writes `body` to `out` if given, otherwise to `stdout`.
fn emit(
    out: &Option<PathBuf>,
    stdout: &mut dyn Write,
    body: impl FnOnce(&mut dyn Write) -> std::io::Result<()>,
) -> Result<(), CliError> {
    match out {
        None => body(stdout).map_err(io_err("stdout")),
        Some(path) => {
            let name = path.display().to_string();
            let file = File::create(path).map_err(io_err(&name))?;
            let mut w = BufWriter::new(file);
            body(&mut w).and_then(|_| w.flush()).map_err(io_err(&name))
        }
    }
}

pub fn cmd_eq(args: &EqArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let report = eq_report(&EqQuery {
        q: args.q,
        d: args.d,
        p1: args.p1,
        p2: args.p2,
        profile: parse_profile(&args.profile)?,
    })?;
    let text = if args.json {
        serde_json::to_string_pretty(&report).expect("report serializes") + "\n"
    } else {
        eq::render_text(&report)
    };
    stdout.write_all(text.as_bytes()).map_err(io_err("stdout"))
}

fn resolve_policy(name: &str, select: SelectArg) -> Result<Arc<dyn Policy>, GameError> {
    if name == "equilibrium" && select == SelectArg::PreferSs {
        return Ok(Arc::new(equilibrium_policy(EquilibriumSelection::PreferSS)));
    }
    policy_by_name(name)
}

pub fn simulation_config(args: &SimulateArgs) -> Result<SimConfig, GameError> {
    let params = GameParams::new(args.q, args.d)?;
    let mut config = SimConfig::new(
        params,
        args.trials,
        args.seed,
        resolve_policy(&args.policy1, args.select)?,
        resolve_policy(&args.policy2, args.select)?,
    )
    .with_partitions(args.partitions)
    .with_conditioning(match args.conditioning {
        ConditioningArg::All => Conditioning::All,
        ConditioningArg::Contested => Conditioning::ContestedOnly,
    });
    config.forced_profile = parse_profile(&args.profile)?;
    Ok(config)
}

fn render_sim_text(r: &SimReport) -> String {
    use format::sig12;
    let line = |name: &str, e: &crate::montecarlo::Estimate| {
        format!(
            "{name:<30} {} ± {} (n={})\n",
            sig12(e.mean),
            sig12(e.std_error),
            e.n
        )
    };
    let c = &r.config;
    let mut out = format!(
        "q={} d={} trials={} seed={} partitions={} policies={} vs {} conditioning={:?}\n",
        sig12(c.q),
        sig12(c.d),
        c.trials,
        c.seed,
        c.partitions,
        c.policy1,
        c.policy2,
        c.conditioning
    );
    out += &format!("{:<30} {}\n", "trials_counted", r.trials_counted);
    out += &line("mean_u1", &r.mean_u1);
    out += &line("mean_u2", &r.mean_u2);
    out += &line("attack_rate", &r.attack_rate);
    out += &line("weak_win_rate", &r.weak_win_rate);
    out += &line("total_cost", &r.total_cost);
    out += &line("total_utility", &r.total_utility);
    out += &line(
        "winner_effective_productivity",
        &r.winner_effective_productivity,
    );
    out += &line("contested_fraction", &r.contested_fraction);
    out
}

pub fn cmd_simulate(args: &SimulateArgs, stdout: &mut dyn Write) -> Result<SimReport, CliError> {
    let config = simulation_config(args)?;
    let report = run_batch(&config)?;
    let body = match args.format {
        FormatArg::Json => serde_json::to_string_pretty(&report).expect("report serializes") + "\n",
        FormatArg::Text => render_sim_text(&report),
    };
    emit(&args.out, stdout, |w| w.write_all(body.as_bytes()))?;
    Ok(report)
}

pub fn sweep_spec(args: &SweepArgs) -> Result<SweepSpec, GameError> {
    let q_grid = match &args.q_values {
        Some(v) => v.clone(),
        None => unit_grid(args.q_points)?,
    };
    let d_grid = match &args.d_values {
        Some(v) => v.clone(),
        None => unit_grid(args.d_points)?,
    };
    SweepSpec::new(q_grid, d_grid, args.columns.as_deref())
}

pub fn cmd_sweep(args: &SweepArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let spec = sweep_spec(args)?;
    emit(&args.out, stdout, |w| write_sweep(&spec, w))
}

/// Runs the suite against `engine`, printing one line per check.
pub fn cmd_verify_with(
    engine: &dyn AnalyticEngine,
    args: &VerifyArgs,
    stdout: &mut dyn Write,
) -> Result<(), CliError> {
    if args.resolution < 100 {
        return Err(GameError::InvalidArgument("--resolution must be at least 100".into()).into());
    }
    if args.grid == 0 || args.points < 2 {
        return Err(GameError::InvalidArgument(
            "--grid must be positive and --points at least 2".into(),
        )
        .into());
    }
    let opts = VerifyOptions {
        resolution: args.resolution,
        grid: args.grid,
        points: args.points,
    };
    let reports = run_verification(engine, &opts);
    for r in &reports {
        writeln!(stdout, "{}", verify::render_report(r)).map_err(io_err("stdout"))?;
    }
    let failed: Vec<&str> = reports
        .iter()
        .filter(|r| !r.passed)
        .map(|r| r.quantity_name.as_str())
        .collect();
    if failed.is_empty() {
        writeln!(stdout, "all {} checks passed", reports.len()).map_err(io_err("stdout"))?;
        Ok(())
    } else {
        Err(CliError::Verification(failed.join("; ")))
    }
}

pub fn cmd_verify(args: &VerifyArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    cmd_verify_with(&Analytic, args, stdout)
}

/// Dispatches a parsed command line and returns the process exit status.
pub fn run(cli: &Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    let result = match &cli.command {
        Command::Eq(a) => cmd_eq(a, stdout),
        Command::Simulate(a) => cmd_simulate(a, stdout).map(|_| ()),
        Command::Sweep(a) => cmd_sweep(a, stdout),
        Command::Verify(a) => cmd_verify(a, stdout),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(stderr, "crowdgame: {e}");
            e.exit_code()
        }
    }
}
