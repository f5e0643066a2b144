use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use log::{info, warn};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::config::{CsitMode, ScenarioConfig, SweepAxis};
use crate::channel::{build_ensemble, draw_scenario, ChannelEnsemble};
use crate::schemes::{evaluate, optimize_schemes, RunTrace, SchemePlans};
use crate::numeric::mean_and_stderr;
use crate::signal::SchemeKind;
use crate::{Error, Result};

/// Environment variable that caps the worker pool size.
pub const THREADS_ENV: &str = "ISTN_THREADS";

/// Independent random streams drawn for every trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    Geometry = 0,
    OptimisationFading = 1,
    HeldOutFading = 2,
    RandomInit = 3,
}

const STREAMS_PER_TRIAL: u64 = 4;

/// Generator for one stream of one trial. It depends only on the seed, the
/// trial and the stream, so every sweep point of a trial sees the same
/// draws.
pub fn trial_rng(seed: u64, trial: usize, stream: Stream) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial as u64 * STREAMS_PER_TRIAL + stream as u64);
    rng
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowStatus {
    Ok,
    /// Hit the outer iteration cap; the result is still a valid point.
    NotConverged,
    Failed,
}

impl RowStatus {
    pub fn name(self) -> &'static str {
        match self {
            Self::Ok => "ok",
            Self::NotConverged => "not_converged",
            Self::Failed => "failed",
        }
    }
}

impl fmt::Display for RowStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for RowStatus {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [Self::Ok, Self::NotConverged, Self::Failed]
            .into_iter()
            .find(|v| v.name() == s)
            .ok_or_else(|| Error::Parse(format!("unknown status `{s}`")))
    }
}

/// One scheme on one trial at one sweep point.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub value: f64,
    pub scheme: SchemeKind,
    pub csit: CsitMode,
    pub trial: usize,
    pub status: RowStatus,
    /// Held-out minimum rate (bit/s/Hz), zero for failed runs.
    pub min_rate: f64,
    /// Minimum rate on the ensemble the scheme was optimised on.
    pub opt_min_rate: f64,
    /// Per-user means of the super-common share, common share and private
    /// rate on the held-out ensemble.
    pub spc_rate: f64,
    pub common_rate: f64,
    pub private_rate: f64,
    pub spc_power_fraction: f64,
    pub outer_iterations: usize,
    /// Largest drop of the optimisation objective between iterations.
    pub max_decrease: f64,
    pub max_kkt_residual: f64,
    /// Common shares had to be scaled down to fit the held-out caps.
    pub rescaled: bool,
    pub wall_time_s: Option<f64>,
    pub error: String,
}

impl ResultRow {
    fn failed(value: f64, scheme: SchemeKind, csit: CsitMode, trial: usize, error: &Error) -> Self {
        Self {
            value,
            scheme,
            csit,
            trial,
            status: RowStatus::Failed,
            min_rate: 0.0,
            opt_min_rate: 0.0,
            spc_rate: 0.0,
            common_rate: 0.0,
            private_rate: 0.0,
            spc_power_fraction: 0.0,
            outer_iterations: 0,
            max_decrease: 0.0,
            max_kkt_residual: 0.0,
            rescaled: false,
            wall_time_s: None,
            error: error.to_string(),
        }
    }

    pub fn is_failed(&self) -> bool {
        self.status == RowStatus::Failed
    }
}

/// Rows of a sweep in canonical order (sweep value, scheme, CSIT mode,
/// trial).
#[derive(Debug, Clone, PartialEq)]
pub struct ResultTable {
    pub axis: SweepAxis,
    pub rows: Vec<ResultRow>,
}

fn canonical(a: &ResultRow, b: &ResultRow) -> Ordering {
    a.value
        .total_cmp(&b.value)
        .then(a.scheme.cmp(&b.scheme))
        .then(a.csit.cmp(&b.csit))
        .then(a.trial.cmp(&b.trial))
}

impl ResultTable {
    pub fn new(axis: SweepAxis, mut rows: Vec<ResultRow>) -> Self {
        rows.sort_by(canonical);
        Self { axis, rows }
    }

    pub fn failures(&self) -> impl Iterator<Item = &ResultRow> {
        self.rows.iter().filter(|r| r.is_failed())
    }

    /// Rows of one scheme and CSIT mode at one sweep value, in trial order.
    pub fn select(&self, value: f64, scheme: SchemeKind, csit: CsitMode) -> Vec<&ResultRow> {
        self.rows
            .iter()
            .filter(|r| r.value == value && r.scheme == scheme && r.csit == csit)
            .collect()
    }
}

/// A scheme's optimisation run on one trial, kept alongside its row for
/// checks that need more than the summary.
#[derive(Debug)]
pub struct SchemeRun {
    pub scheme: SchemeKind,
    pub csit: CsitMode,
    pub trace: Result<RunTrace>,
}

/// Everything one trial at one sweep point produced.
#[derive(Debug)]
pub struct TrialOutcome {
    pub value: f64,
    pub trial: usize,
    pub optimisation: Option<ChannelEnsemble>,
    pub held_out: Option<ChannelEnsemble>,
    pub runs: Vec<SchemeRun>,
    pub rows: Vec<ResultRow>,
}

fn row_for(
    value: f64,
    trial: usize,
    csit: CsitMode,
    trace: &RunTrace,
    held_out: &ChannelEnsemble,
    timing: bool,
    noise: f64,
) -> ResultRow {
    let plans = SchemePlans::new(trace.scheme, held_out);
    let eval = evaluate(&plans, &trace.solution, held_out, noise);
    let users = eval.report.users().count().max(1) as f64;
    let mean = |f: fn(&crate::signal::UserRates) -> f64| eval.report.users().map(f).sum::<f64>() / users;
    ResultRow {
        value,
        scheme: trace.scheme,
        csit,
        trial,
        status: if trace.converged { RowStatus::Ok } else { RowStatus::NotConverged },
        min_rate: eval.min_rate().max(0.0),
        opt_min_rate: trace.final_r_min(),
        spc_rate: mean(|u| u.spc_share),
        common_rate: mean(|u| u.common_share),
        private_rate: mean(|u| u.private),
        spc_power_fraction: trace.solution.spc_power_fraction(),
        outer_iterations: trace.outer_iterations(),
        max_decrease: trace.max_decrease(),
        max_kkt_residual: trace.max_kkt_residual,
        rescaled: eval.was_rescaled(),
        wall_time_s: timing.then(|| trace.wall_time.as_secs_f64()),
        error: String::new(),
    }
}

/// Optimisation and held-out ensembles of one trial at one sweep point.
pub fn trial_ensembles(cfg: &ScenarioConfig, value: f64, trial: usize) -> Result<(ChannelEnsemble, ChannelEnsemble)> {
    let point = cfg.at_point(value);
    let scenario = draw_scenario(&point.physical(), point.ks, point.kt, &mut trial_rng(cfg.seed, trial, Stream::Geometry));
    let opt = build_ensemble(&scenario, point.samples, &mut trial_rng(cfg.seed, trial, Stream::OptimisationFading))?;
    let held = build_ensemble(&scenario, point.eval_samples, &mut trial_rng(cfg.seed, trial, Stream::HeldOutFading))?;
    Ok((opt, held))
}

/// Scheme settings of one trial, including its random-start seed.
pub fn trial_scheme_config(cfg: &ScenarioConfig, value: f64, trial: usize) -> crate::schemes::SchemeConfig {
    let init_seed = trial_rng(cfg.seed, trial, Stream::RandomInit).next_u64();
    cfg.at_point(value).scheme_config_with_seed(init_seed)
}

/// Runs every configured scheme on one trial at one sweep point. `cfg` is
/// the sweep-level configuration; the point's value is applied here.
pub fn run_trial(cfg: &ScenarioConfig, value: f64, trial: usize) -> TrialOutcome {
    let point = cfg.at_point(value);
    let mut outcome = TrialOutcome {
        value,
        trial,
        optimisation: None,
        held_out: None,
        runs: Vec::new(),
        rows: Vec::new(),
    };
    let (opt, held) = match trial_ensembles(cfg, value, trial) {
        Ok(e) => e,
        Err(e) => {
            warn!("value {value} trial {trial}: {e}");
            for &csit in cfg.csit.modes() {
                for &s in &cfg.schemes {
                    outcome.rows.push(ResultRow::failed(value, s, csit, trial, &e));
                }
            }
            return outcome;
        }
    };
    let scheme_cfg = trial_scheme_config(cfg, value, trial);
    let budgets = point.budgets();
    for &csit in cfg.csit.modes() {
        let ens = match csit {
            CsitMode::Perfect => &held,
            _ => &opt,
        };
        for (scheme, trace) in optimize_schemes(&cfg.schemes, ens, budgets, &scheme_cfg) {
            let row = match &trace {
                Ok(t) => row_for(value, trial, csit, t, &held, cfg.timing, scheme_cfg.noise),
                Err(e) => {
                    warn!("value {value} trial {trial} {scheme} ({csit}): {e}");
                    ResultRow::failed(value, scheme, csit, trial, e)
                }
            };
            outcome.rows.push(row);
            outcome.runs.push(SchemeRun { scheme, csit, trace });
        }
    }
    outcome.optimisation = Some(opt);
    outcome.held_out = Some(held);
    outcome
}

/// Worker pool sized by [`THREADS_ENV`] when it is set to a positive
/// integer, otherwise rayon's default.
pub fn worker_pool() -> Result<rayon::ThreadPool> {
    pool_with(std::env::var(THREADS_ENV).ok().as_deref())
}

fn pool_with(threads: Option<&str>) -> Result<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(v) = threads {
        let n: usize = v
            .trim()
            .parse()
            .map_err(|_| Error::Config(format!("{THREADS_ENV} must be a positive integer, got `{v}`")))?;
        if n == 0 {
            return Err(Error::Config(format!("{THREADS_ENV} must be positive")));
        }
        builder = builder.num_threads(n);
    }
    builder.build().map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))
}

/// Runs `f` on every (sweep value, trial) pair in the worker pool and
/// returns the results in sweep-then-trial order.
pub fn for_each_trial<T: Send>(cfg: &ScenarioConfig, f: impl Fn(f64, usize) -> T + Sync) -> Result<Vec<T>> {
    cfg.validate()?;
    let jobs: Vec<(f64, usize)> = cfg
        .sweep_points()
        .into_iter()
        .flat_map(|v| (0..cfg.trials).map(move |t| (v, t)))
        .collect();
    let pool = worker_pool()?;
    Ok(pool.install(|| jobs.par_iter().map(|&(v, t)| f(v, t)).collect()))
}

/// The full Monte-Carlo sweep. Per-trial failures become flagged rows.
pub fn run_sweep(cfg: &ScenarioConfig) -> Result<ResultTable> {
    let rows = for_each_trial(cfg, |v, t| {
        let out = run_trial(cfg, v, t);
        info!("{} = {v}, trial {t} done", cfg.sweep_axis);
        out.rows
    })?;
    Ok(ResultTable::new(cfg.sweep_axis, rows.into_iter().flatten().collect()))
}

/// Mean and standard error of one scheme's held-out minimum rate at one
/// sweep value, over the trials that did not fail.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub value: f64,
    pub scheme: SchemeKind,
    pub csit: CsitMode,
    pub trials: usize,
    pub failures: usize,
    pub mean: f64,
    pub stderr: f64,
}

pub fn summarise(table: &ResultTable) -> Vec<SummaryRow> {
    let mut out: Vec<SummaryRow> = Vec::new();
    for group in table
        .rows
        .chunk_by(|a, b| a.value == b.value && a.scheme == b.scheme && a.csit == b.csit)
    {
        let ok: Vec<f64> = group.iter().filter(|r| !r.is_failed()).map(|r| r.min_rate).collect();
        let n = ok.len();
        let (mean, stderr) = mean_and_stderr(&ok);
        out.push(SummaryRow {
            value: group[0].value,
            scheme: group[0].scheme,
            csit: group[0].csit,
            trials: group.len(),
            failures: group.len() - n,
            mean,
            stderr,
        });
    }
    out
}
