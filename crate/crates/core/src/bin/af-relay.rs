use std::path::PathBuf;
use std::process::ExitCode;

use af_relay::cli::{self, CliError, CliResult};
use af_relay::monte_carlo::GapOptions;
use af_relay::partner::Axis;
use af_relay::scenario::{ConfigError, Scenario};
use af_relay::table::{LambdaTable, TableSpec};
use af_relay::{LinkPair, Scheme};
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "af-relay", version, about = "AF cooperative relay power allocation")]
struct Cli {
    /// Scenario file (`key = value` lines).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Monte Carlo trials per point; 0 skips simulation.
    #[arg(long, global = true)]
    trials: Option<u64>,
    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Per-scheme power split at the scenario's p_total.
    Allocate,
    /// Simulated and analytic outage over the scenario's power sweep.
    SweepPower,
    /// Extra power scheme A needs over scheme B at the target outage.
    Gap(GapArgs),
    #[command(subcommand)]
    Table(TableCommand),
    /// Rank candidate partners from a `d_sr,d_rd` file.
    Rank {
        #[arg(long)]
        candidates: PathBuf,
        #[arg(long)]
        alpha: Option<f64>,
    },
    /// Rank score over partner positions (source (0,0), destination (1,0)).
    RankMap {
        #[arg(long, value_parser = parse_axis, allow_hyphen_values = true, default_value = "-0.5,1.5,41")]
        x: Axis,
        #[arg(long, value_parser = parse_axis, allow_hyphen_values = true, default_value = "-1,1,41")]
        y: Axis,
        #[arg(long)]
        alpha: Option<f64>,
    },
    /// Best partner count per rate and normalized SNR.
    PartnerCount {
        #[arg(long, value_delimiter = ',', default_value = "0.5,1,2,4")]
        rates: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_value = "10,20,30,40")]
        snr_db: Vec<f64>,
        #[arg(long, value_parser = parse_pair, default_value = "0.5,0.5")]
        pair: LinkPair,
        #[arg(long, default_value_t = 8)]
        m_max: usize,
        #[arg(long)]
        alpha: Option<f64>,
        /// Emit the whole outage-vs-m curve.
        #[arg(long)]
        curves: bool,
    },
}

#[derive(Args)]
struct GapArgs {
    #[arg(long, default_value = "none")]
    scheme_a: String,
    #[arg(long, default_value = "closed_form")]
    scheme_b: String,
    #[arg(long, default_value_t = -40.0, allow_hyphen_values = true)]
    lo_db: f64,
    #[arg(long, default_value_t = 80.0, allow_hyphen_values = true)]
    hi_db: f64,
    #[arg(long, default_value_t = 0.05)]
    tol_db: f64,
}

#[derive(Clone, Copy, ValueEnum)]
enum Profile {
    Standard,
    Compact,
}

#[derive(Subcommand)]
enum TableCommand {
    /// Build a table and write it to --out.
    Build {
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long, value_enum, default_value = "standard")]
        profile: Profile,
        #[arg(long)]
        cutoff: Option<f64>,
    },
    Info {
        #[arg(long)]
        file: PathBuf,
    },
    Query {
        #[arg(long)]
        file: PathBuf,
        #[arg(long = "pair", value_parser = parse_pair, required = true)]
        pairs: Vec<LinkPair>,
    },
    /// Table values over partner positions (source (0,0), destination (1,0)).
    Grid {
        #[arg(long)]
        file: PathBuf,
        #[arg(long, value_parser = parse_axis, allow_hyphen_values = true, default_value = "-0.5,1.5,41")]
        x: Axis,
        #[arg(long, value_parser = parse_axis, allow_hyphen_values = true, default_value = "-1,1,41")]
        y: Axis,
    },
}

fn parse_floats(s: &str) -> Result<Vec<f64>, String> {
    s.split(',')
        .map(|v| v.trim().parse::<f64>().map_err(|e| format!("`{v}`: {e}")))
        .collect()
}

fn parse_pair(s: &str) -> Result<LinkPair, String> {
    match parse_floats(s)?[..] {
        [a, b] => Ok(LinkPair::new(a, b)),
        _ => Err("expected d_sr,d_rd".into()),
    }
}

fn parse_axis(s: &str) -> Result<Axis, String> {
    match parse_floats(s)?[..] {
        [lo, hi, n] if n >= 1.0 && n.fract() == 0.0 => Axis::new(lo, hi, n as usize).map_err(|e| e.to_string()),
        _ => Err("expected min,max,count".into()),
    }
}

fn scheme(s: &str, key: &str) -> CliResult<Scheme> {
    s.parse().map_err(|e: af_relay::Error| ConfigError::for_key(key, e.to_string()).into())
}

fn run(cli: Cli) -> CliResult<String> {
    let mut sc = match &cli.config {
        Some(path) => cli::load_scenario(path)?,
        None => Scenario::default(),
    };
    if let Some(seed) = cli.seed {
        sc.seed = seed;
    }
    if let Some(n) = cli.trials {
        sc.n_trials = n;
    }
    let alpha = |a: Option<f64>| a.unwrap_or(sc.alpha);
    match cli.command {
        Command::Allocate => cli::allocate(&sc, cli::scenario_table(&sc)?.as_ref()),
        Command::SweepPower => cli::sweep_power(&sc, cli::scenario_table(&sc)?.as_ref()),
        Command::Gap(g) => {
            let (a, b) = (scheme(&g.scheme_a, "scheme_a")?, scheme(&g.scheme_b, "scheme_b")?);
            let table = if a == Scheme::Table || b == Scheme::Table {
                match &sc.table {
                    Some(p) => Some(cli::read_table(p)?),
                    None => Some(LambdaTable::build(&TableSpec::standard(sc.alpha))?),
                }
            } else {
                None
            };
            let opts = GapOptions {
                lo_db: g.lo_db,
                hi_db: g.hi_db,
                tol_db: g.tol_db,
            };
            cli::gap(&sc, a, b, opts, table.as_ref())
        }
        Command::Table(TableCommand::Build { alpha: a, profile, cutoff }) => {
            let mut spec = match profile {
                Profile::Standard => TableSpec::standard(alpha(a)),
                Profile::Compact => TableSpec::compact(alpha(a)),
            };
            if let Some(c) = cutoff {
                spec.cutoff = c;
            }
            let table = LambdaTable::build(&spec)?;
            let path = cli
                .out
                .as_ref()
                .ok_or_else(|| ConfigError::for_key("out", "`table build` needs --out"))?;
            cli::write_table(path, &table)?;
            // --out holds the table itself; the summary goes to stdout
            Ok(cli::table_info(&table))
        }
        Command::Table(TableCommand::Info { file }) => Ok(cli::table_info(&cli::read_table(&file)?)),
        Command::Table(TableCommand::Query { file, pairs }) => cli::table_query(&cli::read_table(&file)?, &pairs),
        Command::Table(TableCommand::Grid { file, x, y }) => cli::table_grid(&cli::read_table(&file)?, x, y),
        Command::Rank { candidates, alpha: a } => {
            let text = std::fs::read_to_string(&candidates)?;
            cli::rank(&cli::parse_candidates(&text)?, alpha(a))
        }
        Command::RankMap { x, y, alpha: a } => cli::rank_map(x, y, alpha(a)),
        Command::PartnerCount {
            rates,
            snr_db,
            pair,
            m_max,
            alpha: a,
            curves,
        } => cli::partner_count(&rates, &snr_db, pair, alpha(a), m_max, curves),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let out = cli.out.clone();
    let is_build = matches!(cli.command, Command::Table(TableCommand::Build { .. }));
    let result = run(cli).and_then(|csv| match (&out, is_build) {
        (Some(path), false) => std::fs::write(path, csv).map_err(CliError::from),
        _ => {
            print!("{csv}");
            Ok(())
        }
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("af-relay: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
