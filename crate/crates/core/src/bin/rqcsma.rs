use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use rqcsma::analysis::RateRegion2;
use rqcsma::harness::{
    boundary_oracle, default_box, dtmc_report, gamma_grid, grid_2d, run_traced, sweep_grid, write_oracle_csv,
    write_region_csv, write_sweep_csv, DecisionMode, ExperimentConfig,
};
use rqcsma::scheduling::{SchedulerKind, WeightFn};

#[derive(Parser)]
#[command(name = "rqcsma", version, about = "Relay-network CSMA scheduling simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one seed; JSON-lines trace plus a JSON summary on stdout.
    Run {
        #[command(flatten)]
        exp: ExpArgs,
        /// Trace destination (one JSON object per slot).
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Seeded runs over a grid of arrival rates; CSV output.
    Sweep {
        #[command(flatten)]
        exp: ExpArgs,
        /// Points per axis of the two-node grid.
        #[arg(long, default_value_t = 17)]
        grid: usize,
        #[arg(long)]
        lambda0_max: Option<f64>,
        #[arg(long)]
        lambda1_max: Option<f64>,
        /// Sweep the source rate up by γ from the configured vector instead of a grid.
        #[arg(long)]
        gamma_max: Option<f64>,
        #[arg(long, default_value_t = 11)]
        gamma_steps: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Analytic boundary of the two-node rate region; CSV output.
    Region {
        #[arg(long)]
        rho0: f64,
        #[arg(long)]
        rho1: f64,
        #[arg(long, default_value_t = 91)]
        samples: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Empirical boundary by bisection along rays; CSV output.
    BoundaryOracle {
        #[command(flatten)]
        exp: ExpArgs,
        /// Ray angles in degrees from the λ0 axis.
        #[arg(long, value_delimiter = ',', default_values_t = vec![0.0, 30.0, 45.0, 60.0, 90.0])]
        angles: Vec<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve the per-realization chains and the joint counterexample; JSON report.
    DtmcCheck {
        #[arg(long, value_delimiter = ',', default_values_t = vec![1usize, 2])]
        relays: Vec<usize>,
        #[arg(long, default_value_t = 50)]
        draws: usize,
        #[arg(long, default_value_t = 5)]
        alphas: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Experiment settings: a config file, overridable per flag.
#[derive(Args)]
struct ExpArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    rho: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    lambda: Option<Vec<f64>>,
    #[arg(long)]
    scheduler: Option<SchedulerKind>,
    #[arg(long)]
    horizon: Option<u64>,
    #[arg(long)]
    seeds: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    window: Option<u32>,
    #[arg(long)]
    a_max: Option<u32>,
    #[arg(long)]
    weight_fn: Option<WeightFn>,
    #[arg(long)]
    decision_mode: Option<DecisionMode>,
}

impl ExpArgs {
    fn resolve(&self) -> Result<ExperimentConfig, String> {
        let mut config = match (&self.config, &self.rho, &self.lambda) {
            (Some(path), _, _) => ExperimentConfig::load(path).map_err(|e| e.to_string())?,
            (None, Some(rho), Some(lambda)) => {
                let params = rqcsma::model::NetworkParams::new(rho.clone(), lambda.clone()).map_err(|e| e.to_string())?;
                ExperimentConfig::new(params, SchedulerKind::Rqcsma)
            }
            _ => return Err("give --config or both --rho and --lambda".into()),
        };
        if let Some(rho) = &self.rho {
            config.params.rho = rho.clone();
            config.params.n_relays = rho.len().saturating_sub(1);
        }
        if let Some(lambda) = &self.lambda {
            config.params.lambda = lambda.clone();
        }
        if let Some(v) = self.scheduler {
            config.scheduler = v;
        }
        if let Some(v) = self.horizon {
            config.horizon = v;
        }
        if let Some(v) = self.seeds {
            config.n_seeds = v;
        }
        if let Some(v) = self.seed {
            config.params.seed = v;
        }
        if let Some(v) = self.beta {
            config.params.beta = v;
        }
        if let Some(v) = self.window {
            config.params.contention_window = v;
        }
        if let Some(v) = self.a_max {
            config.params.a_max = v;
        }
        if let Some(v) = self.weight_fn {
            config.params.weight_fn = v;
        }
        if let Some(v) = self.decision_mode {
            config.decision_mode = v;
        }
        config.validate().map_err(|e| e.to_string())?;
        Ok(config)
    }
}

fn sink(path: Option<&Path>) -> Result<Box<dyn Write>, String> {
    match path {
        Some(p) => {
            let f = File::create(p).map_err(|e| format!("{}: {e}", p.display()))?;
            Ok(Box::new(BufWriter::new(f)))
        }
        None => Ok(Box::new(BufWriter::new(io::stdout().lock()))),
    }
}

fn io_err(e: io::Error) -> String {
    e.to_string()
}

fn run(cli: Cli) -> Result<(), String> {
    match cli.command {
        Command::Run { exp, trace } => {
            let config = exp.resolve()?;
            let seed = config.params.seed;
            let result = match trace {
                Some(path) => {
                    let mut w = sink(Some(&path))?;
                    w.write_all(config.header().as_bytes()).map_err(io_err)?;
                    let r = run_traced(&config, seed, Some(&mut *w)).map_err(|e| e.to_string())?;
                    w.flush().map_err(io_err)?;
                    r
                }
                None => run_traced(&config, seed, None).map_err(|e| e.to_string())?,
            };
            let summary = json!({
                "config": config,
                "seed": seed,
                "arrival_law": config.params.arrival_law().to_string(),
                "q_avg": result.q_avg,
                "final_backlog": result.final_backlog,
                "stable": result.stable,
                "slope": result.slope,
            });
            println!("{}", serde_json::to_string_pretty(&summary).map_err(|e| e.to_string())?);
        }
        Command::Sweep {
            exp,
            grid,
            lambda0_max,
            lambda1_max,
            gamma_max,
            gamma_steps,
            out,
        } => {
            let config = exp.resolve()?;
            let points = match gamma_max {
                Some(g) => gamma_grid(&config.params.lambda, g, gamma_steps),
                None => {
                    if config.params.n_relays != 1 {
                        return Err("grid sweeps need one relay; use --gamma-max for larger networks".into());
                    }
                    let (m0, m1) = default_box(config.params.rho[0], config.params.rho[1]);
                    grid_2d(lambda0_max.unwrap_or(m0), lambda1_max.unwrap_or(m1), grid)
                }
            };
            let results = sweep_grid(&config, &points).map_err(|e| e.to_string())?;
            let mut w = sink(out.as_deref())?;
            write_sweep_csv(&mut *w, &config, &results).map_err(io_err)?;
            w.flush().map_err(io_err)?;
        }
        Command::Region { rho0, rho1, samples, out } => {
            let region = RateRegion2::new(rho0, rho1).map_err(|e| e.to_string())?;
            let mut w = sink(out.as_deref())?;
            write_region_csv(&mut *w, &region, samples).map_err(io_err)?;
            w.flush().map_err(io_err)?;
        }
        Command::BoundaryOracle { exp, angles, out } => {
            let mut config = exp.resolve()?;
            if exp.scheduler.is_none() {
                config.scheduler = SchedulerKind::Mws;
            }
            let points = angles
                .iter()
                .map(|&a| boundary_oracle(&config, a))
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| e.to_string())?;
            let mut w = sink(out.as_deref())?;
            write_oracle_csv(&mut *w, &config, &points).map_err(io_err)?;
            w.flush().map_err(io_err)?;
        }
        Command::DtmcCheck {
            relays,
            draws,
            alphas,
            seed,
            out,
        } => {
            let report = dtmc_report(&relays, draws, alphas, seed).map_err(|e| e.to_string())?;
            let mut w = sink(out.as_deref())?;
            serde_json::to_writer_pretty(&mut w, &report).map_err(|e| e.to_string())?;
            writeln!(w).map_err(io_err)?;
            w.flush().map_err(io_err)?;
            if !report.pass {
                return Err("chain check failed".into());
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
