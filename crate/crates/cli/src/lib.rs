//! Command-line front end for `clockbound`: scenario audits, random audit
//! campaigns, the spin-½ figure, the guessing game, energy truncation and
//! parameter scans. Every command writes CSV starting with the line
//! `# schema=clockbound-v1`.

pub mod commands;
pub mod output;
pub mod scenario;

use std::path::PathBuf;

use anyhow::Context;
use clap::{Parser, Subcommand, ValueEnum};
use clockbound::game::Variant;
use clockbound::relations::SLACK_TOL;
use clockbound::SolverOptions;

use commands::{Row, ScanParam, TruncationSpec};
use output::{emit, Table};
use scenario::{parse_alpha_list, parse_f64_list, Scenario};

#[derive(Debug, Parser)]
#[command(name = "clockbound", version, about = "Audit entropic energy-time uncertainty relations")]
pub struct Cli {
    /// Seed for random campaigns and game simulations.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Convergence tolerance of the entropy optimizer.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Write CSV here instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Audit every applicable relation for a scenario, or run a random campaign.
    Audit {
        /// Scenario file (TOML).
        #[arg(required_unless_present = "random")]
        scenario: Option<PathBuf>,
        /// Audit the main relation on N random pure instances instead.
        #[arg(long, value_name = "N", conflicts_with = "scenario")]
        random: Option<usize>,
        /// Comma-separated Rényi orders, e.g. `0.5,1,2,inf`.
        #[arg(long, value_name = "LIST")]
        alpha: Option<String>,
        /// Also write the full reports as JSON.
        #[arg(long, value_name = "PATH")]
        json: Option<PathBuf>,
    },
    /// Energy and time uncertainty of a spin-½ against the polar angle.
    Figure2 {
        #[arg(long, default_value_t = 181)]
        thetas: usize,
        #[arg(long, default_value_t = 1.0)]
        kappa: f64,
        #[arg(long, default_value_t = 2.0)]
        t_final: f64,
        /// Number of equally spaced times in `[0, T_F)`.
        #[arg(long, default_value_t = 2)]
        times: usize,
    },
    /// Simulate the clock guessing game.
    Game {
        scenario: PathBuf,
        #[arg(long, default_value_t = 10_000)]
        trials: u64,
        #[arg(long, value_enum, default_value_t = VariantArg::Figure1)]
        variant: VariantArg,
        /// helstrom, pgm or custom (POVM from the scenario's `game.povm`).
        #[arg(long)]
        strategy: Option<String>,
    },
    /// Slack of the von Neumann relation under an energy cutoff.
    Truncation {
        #[arg(long, default_value_t = 10)]
        levels: usize,
        /// Population ratio between neighbouring levels.
        #[arg(long, default_value_t = 0.5)]
        ratio: f64,
        /// Comma-separated cutoffs (default: every level).
        #[arg(long, value_name = "LIST")]
        cutoffs: Option<String>,
        #[arg(long, default_value_t = 2)]
        times: usize,
        #[arg(long, default_value_t = 2.0)]
        horizon: f64,
        /// Use the diagonal (incoherent) state with the same populations.
        #[arg(long)]
        mixed: bool,
    },
    /// Audit a scenario over a range of α, θ or T_F.
    Scan {
        scenario: PathBuf,
        #[arg(long, value_enum)]
        param: ParamArg,
        #[arg(long, value_name = "LIST")]
        values: String,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum VariantArg {
    Figure1,
    AppendixA,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ParamArg {
    Alpha,
    Theta,
    TFinal,
}

/// Result of a command that ran to completion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Pass,
    /// A relation failed its audit or a solver fell short.
    Violation,
}

impl Outcome {
    pub fn exit_code(self) -> u8 {
        match self {
            Self::Pass => 0,
            Self::Violation => 2,
        }
    }
}

/// Exit code for an error: a broken identity counts as a violation, anything
/// else as bad input.
pub fn error_exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<clockbound::Error>() {
        Some(clockbound::Error::IdentityViolation { .. }) => 2,
        _ => 1,
    }
}

fn solver_options(tol: Option<f64>) -> anyhow::Result<SolverOptions> {
    let mut opts = SolverOptions::default();
    if let Some(t) = tol {
        if !(t > 0.0 && t.is_finite()) {
            anyhow::bail!("flag --tol: must be positive");
        }
        opts.tol = t;
    }
    Ok(opts)
}

fn verdict(rows: &[Row]) -> Outcome {
    if rows.iter().all(|r| r.report.passed()) {
        Outcome::Pass
    } else {
        Outcome::Violation
    }
}

/// Runs one command. Rows are produced in input order regardless of threading.
pub fn run(cli: &Cli) -> anyhow::Result<Outcome> {
    let opts = solver_options(cli.tol)?;
    match &cli.command {
        Command::Audit { scenario, random, alpha, json } => {
            let alphas = alpha.as_deref().map(parse_alpha_list).transpose().context("flag --alpha")?;
            let (rows, outputs) = match (scenario, random) {
                (_, Some(n)) => {
                    let alphas = alphas.unwrap_or_else(scenario::default_alphas);
                    (commands::random_campaign(*n, cli.seed, &alphas, &opts)?, Default::default())
                }
                (Some(path), None) => {
                    let mut s = Scenario::load(path)?;
                    if let Some(a) = alphas {
                        s.alphas = a;
                    }
                    let reports = commands::audit_scenario(&s, &opts)?;
                    (reports.into_iter().map(|report| Row { instance: 0, report }).collect(), s.outputs)
                }
                (None, None) => anyhow::bail!("give a scenario file or --random N"),
            };
            let out = cli.out.as_deref().or(outputs.csv.as_deref());
            emit(&commands::audit_table(&rows).to_csv(), out)?;
            if let Some(path) = json.as_deref().or(outputs.json.as_deref()) {
                emit(&format!("{}\n", serde_json::to_string_pretty(&rows)?), Some(path))?;
            }
            Ok(verdict(&rows))
        }
        Command::Figure2 { thetas, kappa, t_final, times } => {
            let table = commands::figure2(*thetas, *kappa, *t_final, *times)?;
            emit(&table.to_csv(), cli.out.as_deref())?;
            let bounded = |col: &str, rhs: &str| -> bool {
                let rhs: Vec<f64> = table.column(rhs).unwrap().iter().map(|v| v.parse().unwrap()).collect();
                table.column(col).unwrap().iter().zip(rhs).all(|(v, r)| v.parse::<f64>().unwrap() >= r - SLACK_TOL)
            };
            let ok = bounded("total_discrete", "rhs_discrete") && bounded("total_continuous", "rhs_continuous");
            Ok(if ok { Outcome::Pass } else { Outcome::Violation })
        }
        Command::Game { scenario, trials, variant, strategy } => {
            let s = Scenario::load(scenario)?;
            let variant = match variant {
                VariantArg::Figure1 => Variant::Figure1,
                VariantArg::AppendixA => Variant::AppendixA,
            };
            let table = commands::game(&s, *trials, cli.seed, variant, strategy.as_deref())?;
            emit(&table.to_csv(), cli.out.as_deref().or(s.outputs.csv.as_deref()))?;
            Ok(Outcome::Pass)
        }
        Command::Truncation { levels, ratio, cutoffs, times, horizon, mixed } => {
            let cutoffs = match cutoffs {
                Some(c) => parse_f64_list(c).context("flag --cutoffs")?,
                None => (0..*levels).map(|n| n as f64).collect(),
            };
            let spec = TruncationSpec { levels: *levels, ratio: *ratio, cutoffs, times: *times, horizon: *horizon, mixed: *mixed };
            let table = commands::truncation(&spec)?;
            emit(&table.to_csv(), cli.out.as_deref())?;
            let ok = table.column("slack").unwrap().iter().all(|v| v.parse::<f64>().unwrap() >= -SLACK_TOL);
            Ok(if ok { Outcome::Pass } else { Outcome::Violation })
        }
        Command::Scan { scenario, param, values } => {
            let s = Scenario::load(scenario)?;
            let values = parse_f64_list(values).context("flag --values")?;
            let param = match param {
                ParamArg::Alpha => ScanParam::Alpha,
                ParamArg::Theta => ScanParam::Theta,
                ParamArg::TFinal => ScanParam::TFinal,
            };
            let (labels, rows) = commands::scan(&s, param, &values, &opts)?;
            let audit = commands::audit_table(&rows);
            let mut header: Vec<&'static str> = vec!["param", "value"];
            header.extend_from_slice(commands::AUDIT_HEADER);
            let mut table = Table::new(&header);
            let name = match param {
                ScanParam::Alpha => "alpha",
                ScanParam::Theta => "theta",
                ScanParam::TFinal => "t_final",
            };
            for (label, row) in labels.into_iter().zip(audit.rows) {
                let mut full = vec![name.to_string(), label];
                full.extend(row);
                table.push(full);
            }
            emit(&table.to_csv(), cli.out.as_deref().or(s.outputs.csv.as_deref()))?;
            Ok(verdict(&rows))
        }
    }
}

/// Caps the worker pool at `CLOCKBOUND_THREADS` when set.
pub fn configure_threads() -> anyhow::Result<()> {
    if let Ok(v) = std::env::var("CLOCKBOUND_THREADS") {
        let n: usize = v.trim().parse().with_context(|| format!("CLOCKBOUND_THREADS={v:?} is not a thread count"))?;
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().context("configuring the thread pool")?;
    }
    Ok(())
}
