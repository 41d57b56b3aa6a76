use std::net::SocketAddr;
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand};
use dungeon_core::stats::welch_t;
use dungeon_core::{compute_metrics, GaParams, SessionConfig};
use dungeon_studio::bench::{parse_grid, run_bench, run_tune, tune_table};
use dungeon_studio::formats::{history_csv, metrics_csv, read_column, read_feasible_map, sig9, write_file};
use dungeon_studio::service::{self, AppState, ServiceConfig};
use dungeon_studio::simulate::{simulate, ModeChoice, Policy, SimConfig};

#[derive(Debug, Parser)]
#[command(name = "dungeon", version, about = "Dungeon level design engine: metrics, benchmarks, simulations and the session API")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print the 31 metrics of a feasible map as CSV.
    Metrics { map: PathBuf },
    /// Run the GA against one target map with no designer in the loop.
    Bench {
        #[arg(long)]
        target: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 10_000)]
        evals: usize,
        /// Where to write the best map.
        #[arg(long)]
        out: PathBuf,
        /// Where to write the per-generation history CSV.
        #[arg(long)]
        history: PathBuf,
    },
    /// Compare parameter combinations over seeds 0..n.
    Tune {
        #[arg(long)]
        target: PathBuf,
        /// e.g. "mutation=0.3,0.5;tournament=2,3;elite=1;pop=20"
        #[arg(long)]
        grid: String,
        #[arg(long, default_value_t = 30)]
        seeds: u64,
        #[arg(long, default_value_t = 10_000)]
        evals: usize,
    },
    /// Run scripted designer sessions and print the aggregate log as JSON.
    Simulate {
        /// keep-everything, keep-best-k, keep-best-<k> or random-tagger
        #[arg(long)]
        policy: Policy,
        #[arg(long)]
        sessions: usize,
        #[arg(long)]
        seed: u64,
        /// ga, control, or auto (derived from each simulated user ID)
        #[arg(long, default_value = "auto")]
        mode: ModeChoice,
        /// Evaluation budget per suggestion round.
        #[arg(long, default_value_t = 10_000)]
        budget: usize,
        /// Write one session journal per session into this directory.
        #[arg(long)]
        journal: Option<PathBuf>,
    },
    /// Welch's t-test between two one-column CSV files.
    Stats {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
    },
    /// Serve the session API.
    Serve {
        #[arg(long, env = "DUNGEON_ADDR", default_value = "127.0.0.1:8080")]
        addr: SocketAddr,
        #[arg(long, env = "DUNGEON_DATA", default_value = "data")]
        data: PathBuf,
        /// Evaluation budget per suggestion round.
        #[arg(long, env = "DUNGEON_BUDGET")]
        budget: Option<usize>,
        /// Seed for sessions created without one.
        #[arg(long, env = "DUNGEON_DEFAULT_SEED")]
        default_seed: Option<u64>,
    },
}

/// Exit status 1 with a message.
struct Failure(String);

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Failure {
        Failure(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli.command) {
        Ok(code) => code,
        Err(Failure(message)) => {
            eprintln!("error: {message}");
            ExitCode::from(1)
        }
    }
}

fn run(command: Command) -> Result<ExitCode, Failure> {
    match command {
        Command::Metrics { map } => {
            let map = read_feasible_map(&map)?;
            print!("{}", metrics_csv(&compute_metrics(&map)?));
            Ok(ExitCode::SUCCESS)
        }
        Command::Bench { target, seed, evals, out, history } => {
            let map = read_feasible_map(&target)?;
            let params = GaParams { evaluation_budget: evals, ..GaParams::default() };
            let result = run_bench(&map, seed, &params)?;
            write_file(&out, &result.best_map.to_text())?;
            write_file(&history, &history_csv(&result.history))?;
            let final_best = result.final_best_fitness_sum.map(sig9).unwrap_or_else(|| "none".into());
            println!(
                "seed={seed} evaluations={} generations={} final_best_fitness_sum={final_best}",
                result.evaluations,
                result.history.records.len()
            );
            if !result.best_is_feasible {
                eprintln!("warning: no feasible individual found; wrote the best infeasible map");
                return Ok(ExitCode::from(2));
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Tune { target, grid, seeds, evals } => {
            let map = read_feasible_map(&target)?;
            let cases = parse_grid(&grid, evals)?;
            for case in &cases {
                case.params.validate().map_err(|e| Failure(format!("{e} in {:?}", case.params)))?;
            }
            print!("{}", tune_table(&run_tune(&map, &cases, seeds)?));
            Ok(ExitCode::SUCCESS)
        }
        Command::Simulate { policy, sessions, seed, mode, budget, journal } => {
            if let Some(dir) = &journal {
                std::fs::create_dir_all(dir).map_err(|e| Failure(format!("{}: {e}", dir.display())))?;
            }
            let config = SimConfig { policy, sessions, seed, mode, session: SessionConfig::with_budget(budget) };
            config.session.params.validate()?;
            let report = simulate(&config, journal.as_deref())?;
            println!("{}", serde_json::to_string_pretty(&report)?);
            Ok(ExitCode::SUCCESS)
        }
        Command::Stats { a, b } => {
            let result = welch_t(&read_column(&a)?, &read_column(&b)?)?;
            println!("{}", serde_json::to_string_pretty(&result)?);
            Ok(ExitCode::SUCCESS)
        }
        Command::Serve { addr, data, budget, default_seed } => {
            if let Some(b) = budget {
                SessionConfig::with_budget(b).params.validate()?;
            }
            let runtime = tokio::runtime::Runtime::new()?;
            runtime.block_on(async move {
                let listener = tokio::net::TcpListener::bind(addr)
                    .await
                    .map_err(|e| Failure(format!("cannot listen on {addr}: {e}")))?;
                let state = AppState::load(ServiceConfig { data_dir: data, budget, default_seed })?;
                eprintln!(
                    "listening on {} with {} restored sessions",
                    listener.local_addr()?,
                    state.session_count().await
                );
                let shutdown = async {
                    let _ = tokio::signal::ctrl_c().await;
                };
                service::serve(listener, Arc::new(state), shutdown).await?;
                Ok(ExitCode::SUCCESS)
            })
        }
    }
}
