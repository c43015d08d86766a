use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use phonecall::analytics::{predicted_messages, predicted_rounds, Prediction, Regime};
use phonecall::harness::{
    emit_experiment, emit_scenario, emit_sweep, run_scenario_with, run_sweep, run_trials, scenario_presets, Execution,
    ExperimentSpec, ScenarioParams,
};
use phonecall::parallel::{resolve_workers, with_workers};
use phonecall::{Error, Protocol, Result};

#[derive(Parser)]
#[command(name = "phonecall", version, about = "Rumor spreading in the random phone call model")]
struct Cli {
    /// Worker threads for trial dispatch (default: PHONECALL_WORKERS, else all cores).
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment from a key=value config file.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Override a config key; repeatable, later wins.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a named scenario and its assertions.
    Scenario {
        /// Preset name; `list` prints the presets.
        name: String,
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print round and message predictions.
    Predict {
        /// A protocol name, or `endgame`.
        #[arg(long)]
        protocol: String,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        fin: usize,
        #[arg(long, default_value_t = 1)]
        fout: usize,
    },
    /// Run one experiment per value of a config key.
    Sweep {
        #[arg(long)]
        param: String,
        /// Comma-separated values.
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<String>,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
        #[arg(long)]
        out: PathBuf,
    },
}

fn print_prediction(label: &str, p: &Prediction) {
    let (lo, hi) = p.band();
    println!("{label}: {:.4} (band {lo:.4} .. {hi:.4}; {})", p.value, p.validity);
}

fn load_spec(config: Option<&PathBuf>, set: &[String], workers: Option<usize>) -> Result<ExperimentSpec> {
    let mut spec = match config {
        Some(path) => ExperimentSpec::from_file(path)?,
        None => ExperimentSpec::default(),
    };
    spec.apply_overrides(set)?;
    if workers.is_some() {
        spec.workers = workers;
    }
    Ok(spec)
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Simulate { config, set, out } => {
            let spec = load_spec(Some(&config), &set, cli.workers)?;
            let outcome = run_trials(&spec, Execution::Pool)?;
            emit_experiment(&outcome, &out)?;
            let s = &outcome.summary;
            println!(
                "{} n={} trials={} success_rate={} rounds_median={} msgs_mean={}",
                s.protocol, s.n, s.trials, s.success_rate, s.rounds_median, s.msgs_mean
            );
            Ok(true)
        }
        Command::Scenario { name, set, out } => {
            if name == "list" {
                for p in scenario_presets() {
                    println!("{:<22} {}", p.name, p.about);
                }
                return Ok(true);
            }
            let params = ScenarioParams::from_overrides(&set)?;
            let workers = resolve_workers(cli.workers);
            let outcome = with_workers(workers, || run_scenario_with(&name, &params))?;
            if let Some(dir) = out {
                emit_scenario(&outcome, &dir)?;
            }
            for c in &outcome.checks {
                println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
            }
            Ok(outcome.all_passed())
        }
        Command::Predict { protocol, n, fin, fout } => {
            if protocol == "endgame" {
                print_prediction("rounds", &predicted_rounds(Regime::Endgame, n, fin, fout)?);
                return Ok(true);
            }
            let protocol: Protocol = protocol.parse()?;
            print_prediction("rounds", &predicted_rounds(Regime::Protocol(protocol), n, fin, fout)?);
            print_prediction("messages", &predicted_messages(protocol, n, fin, fout)?);
            Ok(true)
        }
        Command::Sweep { param, values, config, set, out } => {
            let spec = load_spec(config.as_ref(), &set, cli.workers)?;
            let runs = run_sweep(&spec, &param, &values)?;
            emit_sweep(&runs, &param, &values, &out)?;
            for (v, r) in values.iter().zip(&runs) {
                println!("{param}={v} success_rate={} rounds_median={} msgs_mean={}", r.summary.success_rate, r.summary.rounds_median, r.summary.msgs_mean);
            }
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::Usage(_) => 2,
                _ => 1,
            })
        }
    }
}
