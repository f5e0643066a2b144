//! Monte-Carlo front end: scenario configuration, seeded sweeps, invariant
//! checks and CSV / gnuplot output.
//!
//! A sweep varies one [`SweepAxis`] over a list of values. Each trial draws
//! its geometry and fading from dedicated random streams (see
//! [`trial_rng`]) that do not depend on the sweep value, so results at
//! different values are paired. Trials run in parallel; rows are sorted into
//! canonical order before they are written, so a given seed and
//! configuration always produce the same bytes.

mod check;
mod config;
mod emit;
mod sweep;

pub use check::{
    check_power_trend, check_trial, run_checks, Violation, KKT_LIMIT, MONOTONE_SLACK, NESTING_SLACK, POWER_SLACK,
};
pub use config::{CsitMode, Profile, ScenarioConfig, SweepAxis};
pub use emit::{gnuplot_dat, read_csv, to_csv_string, write_csv, CSV_HEADER};
pub use sweep::{
    for_each_trial, run_sweep, run_trial, summarise, trial_ensembles, trial_rng, trial_scheme_config, worker_pool, ResultRow, ResultTable, RowStatus,
    SchemeRun, Stream, SummaryRow, TrialOutcome, THREADS_ENV,
};
