mod budget;
mod commands;
mod error;
mod output;
mod spec_file;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use lowsnr::validation::Thresholds;

use crate::budget::parse_budget_db;
use crate::error::{bad, CliError};
use crate::output::{emit, Format, Table, Unit};

/// Low-SNR capacity and on-off rate regions for fading channels.
#[derive(Debug, Parser)]
#[command(name = "lowsnr", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Channel spec JSON; for `validate`, an optional thresholds JSON.
    #[arg(long, global = true)]
    spec: Option<PathBuf>,

    /// Budgets in dB: `a,b,c` or an inclusive range `start:stop:count`.
    #[arg(long, global = true, allow_hyphen_values = true)]
    budget_db: Option<String>,

    /// Number of split points traced by `bc-region`.
    #[arg(long, global = true, default_value_t = 21)]
    grid: usize,

    /// Seed for Monte Carlo estimates.
    #[arg(long, global = true, default_value_t = 20_140_601)]
    seed: u64,

    #[arg(long, global = true, value_enum, default_value_t = Unit::Nats)]
    unit: Unit,

    /// Output file; standard output when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Single-user capacities, on-off rate and eta per budget.
    Single,
    /// MAC regions: rectangle, on-off, TDMA, sum-rate, AWGN and CSI-R.
    MacRegion,
    /// Two-user BC boundary and its time-sharing chord.
    BcRegion,
    /// On-off efficiency eta of a symmetric MAC per budget.
    EtaSweep,
    /// Rate regions per unit power, one block per budget.
    Sepup,
    /// Run the acceptance battery.
    Validate,
}

impl Command {
    fn default_budgets(&self) -> &'static str {
        match self {
            Command::Single | Command::EtaSweep => "0:-60:13",
            Command::Sepup => "-20,-40,-60",
            _ => "0",
        }
    }
}

fn run(cli: &Cli) -> Result<Table, CliError> {
    if let Command::Validate = cli.command {
        let thresholds = match &cli.spec {
            Some(path) => serde_json::from_value::<Thresholds>(spec_file::read_json(path)?)
                .map_err(|e| bad(format!("{}: {e}", path.display())))?,
            None => Thresholds::default(),
        };
        let (table, outcomes) = commands::validate(&thresholds);
        for o in &outcomes {
            log::info!("{}", o.line());
        }
        emit(&table.render(cli.format)?, cli.out.as_deref())?;
        return match commands::first_failure(&outcomes) {
            Some(e) => Err(e),
            None => Ok(Table::default()),
        };
    }
    let path = cli
        .spec
        .as_ref()
        .ok_or_else(|| bad("--spec PATH is required"))?;
    let models = spec_file::load_channels(path)?;
    let budgets = parse_budget_db(
        cli.budget_db
            .as_deref()
            .unwrap_or_else(|| cli.command.default_budgets()),
    )?;
    let table = match cli.command {
        Command::Single => commands::single(&models, &budgets, cli.unit)?,
        Command::MacRegion => commands::mac_region(&models, &budgets, cli.seed, cli.unit)?,
        Command::BcRegion => commands::bc_region(&models, &budgets, cli.grid, cli.unit)?,
        Command::EtaSweep => commands::eta_sweep(&models, &budgets, cli.unit)?,
        Command::Sepup => commands::sepup(&models, &budgets, cli.unit)?,
        Command::Validate => unreachable!(),
    };
    emit(&table.render(cli.format)?, cli.out.as_deref())?;
    Ok(table)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(_) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("lowsnr: {e}");
            e.exit_code()
        }
    }
}
