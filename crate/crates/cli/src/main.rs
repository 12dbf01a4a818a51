mod commands;
mod format;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use qchain::LogBase;

#[derive(Parser, Debug)]
#[command(name = "qchain", version, about = "Channel divergences and chain-rule checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// First channel: gad:<gamma>:<beta>, identity:<d>, replacer:<state.json> or a channel JSON file.
    #[arg(long, global = true, default_value = "gad:0.3:0")]
    pub channel_e: String,
    /// Second channel, same formats as --channel-e.
    #[arg(long, global = true, default_value = "gad:0.5:0.9")]
    pub channel_f: String,
    /// Unit of reported entropies: 2 (bits) or e (nats).
    #[arg(long, global = true, default_value = "2", value_parser = parse_log_base)]
    pub log_base: LogBase,
    #[arg(long, global = true, default_value_t = 42)]
    pub seed: u64,
    /// Grid resolution; the default depends on the command.
    #[arg(long, global = true)]
    pub resolution: Option<usize>,
    /// Error tolerance for hypothesis testing.
    #[arg(long, global = true, default_value_t = 0.05)]
    pub eps: f64,
    /// Output file; stdout when omitted.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads (does not affect output).
    #[arg(long, global = true)]
    pub workers: Option<usize>,
}

fn parse_log_base(s: &str) -> Result<LogBase, String> {
    s.parse().map_err(|e: qchain::Error| e.to_string())
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum AnsatzArg {
    #[value(name = "diag-1param")]
    Diag1,
    #[value(name = "diag-2param")]
    Diag2,
    Multistart,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Fixed-input divergence over ρ_R = diag(p, 1 − p), p ∈ [0, 1].
    Scan,
    /// Non-additivity gap over a grid of amplitude damping parameters.
    Heatmap {
        #[arg(long, default_value_t = 0.0)]
        beta_e: f64,
        #[arg(long, default_value_t = 0.9)]
        beta_f: f64,
    },
    /// Runs every chain-rule suite and prints one JSON result per line.
    Check {
        /// A few trials per suite instead of the full batch.
        #[arg(long)]
        smoke: bool,
    },
    /// Channel relative entropy and channel Dmax of the two channels.
    Divergence {
        #[arg(long, value_enum, default_value = "multistart")]
        ansatz: AnsatzArg,
        #[arg(long, default_value_t = 8)]
        restarts: usize,
    },
    /// Finite-n discrimination rates (1/n) D_H^ε on n copies.
    Stein {
        #[arg(long, default_value_t = 5)]
        n_max: usize,
        /// Input ρ_R = diag(p, 1 − p); defaults to the scan optimizer.
        #[arg(long)]
        input_p: Option<f64>,
        /// Compare E(φ) with F(φ) without a reference system.
        #[arg(long)]
        no_reference: bool,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.common.workers {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    let result = match cli.command {
        Command::Scan => commands::scan(&cli.common),
        Command::Heatmap { beta_e, beta_f } => commands::heatmap(&cli.common, beta_e, beta_f),
        Command::Check { smoke } => commands::check(&cli.common, smoke),
        Command::Divergence { ansatz, restarts } => commands::divergence(&cli.common, ansatz, restarts),
        Command::Stein {
            n_max,
            input_p,
            no_reference,
        } => commands::stein(&cli.common, n_max, input_p, !no_reference),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
