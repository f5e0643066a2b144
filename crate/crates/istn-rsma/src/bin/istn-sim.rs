use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use istn_rsma::harness::{
    gnuplot_dat, run_checks, run_sweep, trial_ensembles, trial_scheme_config, write_csv, ResultTable, ScenarioConfig,
    THREADS_ENV,
};
use istn_rsma::schemes::subproblem_at;
use istn_rsma::signal::SchemeKind;
use istn_rsma::solver::write_program;
use istn_rsma::{Error, Result};

/// Monte-Carlo simulator for robust multi-layer rate-splitting precoding in
/// dual-polarized satellite-terrestrial networks.
///
/// Exit status: 0 on success, 1 when runs failed or invariants were
/// violated, 2 when the simulation could not be carried out.
#[derive(Parser)]
#[command(name = "istn-sim", version, after_help = format!("The {THREADS_ENV} environment variable sets the worker thread count."))]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a sweep and write per-trial results.
    Run {
        #[command(flatten)]
        scenario: ScenarioArgs,
        /// Result CSV; standard output when omitted.
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Gnuplot data file with per-scheme means and standard errors.
        #[arg(long)]
        dat: Option<PathBuf>,
    },
    /// Run a sweep and check solver, monotonicity, feasibility and nesting
    /// invariants.
    Check {
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Write the conic subproblem of one outer iteration in text form.
    DumpProblem {
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[arg(long, default_value = "MDP-RSMA")]
        scheme: SchemeKind,
        #[arg(long, default_value_t = 0)]
        trial: usize,
        /// Outer iteration, counted from one.
        #[arg(long, default_value_t = 1)]
        iteration: usize,
        /// Sweep value; defaults to the first one.
        #[arg(long)]
        value: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the resolved configuration.
    ShowConfig {
        #[command(flatten)]
        scenario: ScenarioArgs,
    },
}

#[derive(Args)]
struct ScenarioArgs {
    /// Configuration file of `key = value` lines.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Start from a named profile (desk or full) before applying the file.
    #[arg(long)]
    profile: Option<String>,
    /// Override one key, e.g. `--set ps_dbw=16`. May be repeated.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

impl ScenarioArgs {
    fn resolve(&self) -> Result<ScenarioConfig> {
        let mut cfg = ScenarioConfig::default();
        if let Some(p) = &self.profile {
            cfg.set("profile", p)?;
        }
        if let Some(path) = &self.config {
            let text = std::fs::read_to_string(path)?;
            let mut layered = cfg.to_text();
            layered.push_str(&text);
            cfg = ScenarioConfig::from_text(&layered)?;
        }
        for o in &self.overrides {
            cfg.apply_override(o)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn writer(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn emit(table: &ResultTable, csv: Option<&Path>, dat: Option<&Path>) -> Result<()> {
    write_csv(table, writer(csv)?)?;
    if let Some(path) = dat {
        std::fs::write(path, gnuplot_dat(table)?)?;
    }
    Ok(())
}

fn execute(cmd: Command) -> Result<ExitCode> {
    match cmd {
        Command::Run { scenario, csv, dat } => {
            let cfg = scenario.resolve()?;
            let table = run_sweep(&cfg)?;
            emit(&table, csv.as_deref(), dat.as_deref())?;
            let failed = table.failures().count();
            if failed > 0 {
                eprintln!("{failed} of {} runs failed", table.rows.len());
                return Ok(ExitCode::from(1));
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Check { scenario, csv } => {
            let cfg = scenario.resolve()?;
            let (table, violations) = run_checks(&cfg)?;
            if let Some(path) = csv {
                emit(&table, Some(&path), None)?;
            }
            for v in &violations {
                println!("VIOLATION {v}");
            }
            println!("{} runs checked, {} violations", table.rows.len(), violations.len());
            Ok(if violations.is_empty() { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
        Command::DumpProblem {
            scenario,
            scheme,
            trial,
            iteration,
            value,
            out,
        } => {
            let cfg = scenario.resolve()?;
            let value = value.unwrap_or_else(|| cfg.sweep_points()[0]);
            if trial >= cfg.trials {
                return Err(Error::Config(format!("trial {trial} is outside 0..{}", cfg.trials)));
            }
            let (opt, _) = trial_ensembles(&cfg, value, trial)?;
            let sub = subproblem_at(
                scheme,
                &opt,
                cfg.at_point(value).budgets(),
                &trial_scheme_config(&cfg, value, trial),
                iteration,
            )?;
            writer(out.as_deref())?.write_all(write_program(&sub.program).as_bytes())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::ShowConfig { scenario } => {
            print!("{}", scenario.resolve()?.to_text());
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
