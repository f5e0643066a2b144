//! The alternating WMMSE optimisation and the scheme family built on it.
//!
//! Every scheme is a [`LayerPlan`] (which streams exist, who decodes what,
//! which antenna ports a stream may use) run through the same loop: refresh
//! equalisers and weights at the current precoders, compile the surrogate
//! subproblem, solve it, repeat until the minimum rate settles. Orthogonal
//! access runs the satellite and terrestrial halves as two independent
//! plans.

mod evaluate;
mod init;

pub use evaluate::{evaluate, Evaluation, ALLOCATION_TOL};
pub use init::{feasible_allocation, initial_solution, InitPolicy};

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::time::{Duration, Instant};

use log::{debug, warn};

use crate::channel::ChannelEnsemble;
use crate::signal::{LayerPlan, PrecoderSolution, SchemeKind, Tx};
use crate::solver::{solve, SolveStatus, SolverOptions};
use crate::subproblem::{build, implied_min_rate, BuildOptions, Budgets, Subproblem};
use crate::wmmse::{step1_coefficients, SurrogateScaling};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchemeConfig {
    pub max_outer_iters: usize,
    /// Stop once the minimum rate moves by at most this much.
    pub epsilon: f64,
    pub init: InitPolicy,
    pub scaling: SurrogateScaling,
    pub solver: SolverOptions,
    /// Also start each rate-splitting scheme from the solution of the scheme
    /// it contains (SDMA inside RSMA-PD inside MDP-RSMA), both as is and
    /// blended with the missing layers, and keep the best run.
    pub nested_warm_start: bool,
    pub noise: f64,
}

impl Default for SchemeConfig {
    fn default() -> Self {
        Self {
            max_outer_iters: 300,
            epsilon: 1e-4,
            init: InitPolicy::MatchedFilter,
            scaling: SurrogateScaling::Tight,
            solver: SolverOptions::default(),
            nested_warm_start: true,
            noise: 1.0,
        }
    }
}

impl SchemeConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0) {
            return Err(Error::Config("epsilon must be positive".into()));
        }
        if self.max_outer_iters == 0 {
            return Err(Error::Config("at least one outer iteration is required".into()));
        }
        if !(self.noise > 0.0) {
            return Err(Error::Config("noise power must be positive".into()));
        }
        Ok(())
    }
}

/// The one or two plans a scheme is optimised over.
#[derive(Debug, Clone, PartialEq)]
pub struct SchemePlans {
    pub scheme: SchemeKind,
    parts: Vec<LayerPlan>,
}

impl SchemePlans {
    pub fn new(scheme: SchemeKind, ens: &ChannelEnsemble) -> Self {
        let sat: Vec<_> = ens.sat_users.iter().map(|u| u.pol).collect();
        let cell: Vec<_> = ens.cell_users.iter().map(|u| u.pol).collect();
        let parts = if scheme.is_oma() {
            [true, false]
                .into_iter()
                .map(|s| LayerPlan::oma_part(scheme, &sat, &cell, s))
                .filter(|p| !p.events.is_empty())
                .collect()
        } else {
            vec![LayerPlan::new(scheme, &sat, &cell)]
        };
        Self { scheme, parts }
    }

    pub fn plans(&self) -> impl Iterator<Item = &LayerPlan> {
        self.parts.iter()
    }
}

/// Where an optimisation run started.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Start {
    Init(InitPolicy),
    WarmFrom(SchemeKind),
    /// Another scheme's solution with the layers it lacks switched on along
    /// their initial directions.
    BlendFrom(SchemeKind),
}

/// History and result of one scheme's optimisation.
#[derive(Debug, Clone, PartialEq)]
pub struct RunTrace {
    pub scheme: SchemeKind,
    /// Minimum rate of the starting point followed by the optimum of every
    /// subproblem solved.
    pub r_min: Vec<f64>,
    /// Interior-point iterations per outer iteration.
    pub solver_iterations: Vec<usize>,
    pub solution: PrecoderSolution,
    pub converged: bool,
    pub start: Start,
    /// MSE weights that hit the clamp, summed over iterations.
    pub clamped_weights: usize,
    /// Largest scaled KKT residual over every accepted subproblem solution.
    pub max_kkt_residual: f64,
    pub wall_time: Duration,
}

impl RunTrace {
    pub fn outer_iterations(&self) -> usize {
        self.r_min.len().saturating_sub(1)
    }

    pub fn final_r_min(&self) -> f64 {
        self.r_min.last().copied().unwrap_or(0.0)
    }

    /// Largest decrease between consecutive iterates (zero when monotone).
    pub fn max_decrease(&self) -> f64 {
        self.r_min.windows(2).map(|w| w[0] - w[1]).fold(0.0, f64::max)
    }

    pub fn is_monotone(&self, slack: f64) -> bool {
        self.max_decrease() <= slack
    }

    /// `iteration,r_min` rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("iteration,r_min\n");
        for (i, r) in self.r_min.iter().enumerate() {
            let _ = writeln!(out, "{i},{r:.12e}");
        }
        out
    }

    fn trivial(scheme: SchemeKind, solution: PrecoderSolution, start: Start) -> Self {
        Self {
            scheme,
            r_min: vec![0.0],
            solver_iterations: Vec::new(),
            solution,
            converged: true,
            start,
            clamped_weights: 0,
            max_kkt_residual: 0.0,
            wall_time: Duration::ZERO,
        }
    }
}

/// Budgets seen by one plan: a transmitter without columns gets nothing.
fn plan_budgets(plan: &LayerPlan, budgets: Budgets) -> Budgets {
    Budgets {
        sat: if plan.sat_columns.is_empty() { 0.0 } else { budgets.sat },
        bs: if plan.bs_columns.is_empty() { 0.0 } else { budgets.bs },
    }
}

/// Scales the plan's columns of each transmitter back onto its budget if
/// the solver overshot it by round-off.
fn enforce_budgets(plan: &LayerPlan, sol: &mut PrecoderSolution, budgets: Budgets) {
    for (tx, budget) in [(Tx::Sat, budgets.sat), (Tx::Bs, budgets.bs)] {
        let cols: Vec<_> = plan.columns().filter(|c| c.tx() == tx).collect();
        let power: f64 = cols.iter().map(|&c| sol.column(c).norm_squared()).sum();
        if power > budget && power > 0.0 {
            let f = crate::C64::new((budget / power).sqrt(), 0.0);
            for c in cols {
                *sol.column_mut(c) *= f;
            }
        }
    }
}

struct PlanRun {
    r_min: Vec<f64>,
    solver_iterations: Vec<usize>,
    converged: bool,
    clamped: usize,
    max_kkt: f64,
}

fn retry_options(base: &SolverOptions) -> SolverOptions {
    SolverOptions {
        max_iter: base.max_iter * 2,
        regularization: base.regularization.max(1e-7),
        refinement_steps: base.refinement_steps.max(10),
        ..*base
    }
}

struct StepOutcome {
    solver_iterations: usize,
    clamped: usize,
    kkt_residual: f64,
}

fn subproblem_for(ens: &ChannelEnsemble, plan: &LayerPlan, budgets: Budgets, cfg: &SchemeConfig, sol: &PrecoderSolution) -> Result<(Subproblem, usize)> {
    let opts = BuildOptions {
        scaling: cfg.scaling,
        ..BuildOptions::default()
    };
    let coeffs = step1_coefficients(ens, plan, sol, cfg.noise)?;
    let sub = build(plan, &coeffs, (ens.sat_ports, ens.bs_ports), budgets, cfg.noise, &opts)?;
    Ok((sub, coeffs.clamped))
}

/// One outer iteration: refresh the surrogate at `sol`, solve it and write
/// the optimum back into `sol`. `budgets` are already restricted to the plan.
fn outer_step(
    ens: &ChannelEnsemble,
    plan: &LayerPlan,
    budgets: Budgets,
    cfg: &SchemeConfig,
    sol: &mut PrecoderSolution,
    iteration: usize,
) -> Result<StepOutcome> {
    let (sub, clamped) = subproblem_for(ens, plan, budgets, cfg, sol)?;
    let mut out = solve(&sub.program, &cfg.solver)?;
    if out.status != SolveStatus::Optimal {
        warn!("{}: solver returned {:?} at iteration {iteration}, retrying", plan.scheme, out.status);
        out = solve(&sub.program, &retry_options(&cfg.solver))?;
    }
    if out.status != SolveStatus::Optimal {
        return Err(Error::Solver {
            status: out.status,
            iteration,
        });
    }
    sub.layout.write(&out.x, sol);
    enforce_budgets(plan, sol, budgets);
    Ok(StepOutcome {
        solver_iterations: out.iterations,
        clamped,
        kkt_residual: out.residuals.max(),
    })
}

/// Runs the alternating optimisation for one plan, starting from (and
/// updating) `sol`, whose allocation must be feasible for the plan.
fn run_plan(ens: &ChannelEnsemble, plan: &LayerPlan, budgets: Budgets, cfg: &SchemeConfig, sol: &mut PrecoderSolution) -> Result<PlanRun> {
    let budgets = plan_budgets(plan, budgets);
    sol.r_min = implied_min_rate(plan, sol).max(0.0);
    if !sol.r_min.is_finite() {
        sol.r_min = 0.0;
    }
    let mut run = PlanRun {
        r_min: vec![sol.r_min],
        solver_iterations: Vec::new(),
        converged: false,
        clamped: 0,
        max_kkt: 0.0,
    };
    if budgets.sat <= 0.0 && budgets.bs <= 0.0 {
        run.converged = true;
        return Ok(run);
    }
    for iteration in 1..=cfg.max_outer_iters {
        let previous = sol.r_min;
        let step = outer_step(ens, plan, budgets, cfg, sol, iteration)?;
        run.clamped += step.clamped;
        run.r_min.push(sol.r_min);
        run.solver_iterations.push(step.solver_iterations);
        run.max_kkt = run.max_kkt.max(step.kkt_residual);
        debug!("{} iteration {iteration}: r_min {:.9}", plan.scheme, sol.r_min);
        if (sol.r_min - previous).abs() <= cfg.epsilon {
            run.converged = true;
            break;
        }
    }
    Ok(run)
}

/// Runs every plan of a scheme from `sol` (already initialised) and merges
/// the per-plan traces.
fn run_scheme_from(
    ens: &ChannelEnsemble,
    plans: &SchemePlans,
    budgets: Budgets,
    cfg: &SchemeConfig,
    mut sol: PrecoderSolution,
    start: Start,
) -> Result<RunTrace> {
    let clock = Instant::now();
    if budgets.sat <= 0.0 && budgets.bs <= 0.0 {
        let zero = PrecoderSolution::zeros(ens.sat_ports, ens.bs_ports, ens.sat_users.len(), ens.cell_users.len());
        return Ok(RunTrace::trivial(plans.scheme, zero, start));
    }
    let mut runs = Vec::new();
    for plan in plans.plans() {
        runs.push((plan.rate_scale, run_plan(ens, plan, budgets, cfg, &mut sol)?));
    }
    if runs.is_empty() {
        return Ok(RunTrace::trivial(plans.scheme, sol, start));
    }
    let len = runs.iter().map(|(_, r)| r.r_min.len()).max().unwrap_or(1);
    let at = |v: &[f64], i: usize| v[i.min(v.len() - 1)];
    let r_min: Vec<f64> = (0..len)
        .map(|i| runs.iter().map(|(scale, r)| scale * at(&r.r_min, i)).fold(f64::INFINITY, f64::min))
        .collect();
    let solver_iterations = (0..len - 1)
        .map(|i| runs.iter().map(|(_, r)| r.solver_iterations.get(i).copied().unwrap_or(0)).sum())
        .collect();
    sol.r_min = *r_min.last().expect("non-empty trace");
    Ok(RunTrace {
        scheme: plans.scheme,
        r_min,
        solver_iterations,
        solution: sol,
        converged: runs.iter().all(|(_, r)| r.converged),
        start,
        clamped_weights: runs.iter().map(|(_, r)| r.clamped).sum(),
        max_kkt_residual: runs.iter().map(|(_, r)| r.max_kkt).fold(0.0, f64::max),
        wall_time: clock.elapsed(),
    })
}

fn empty_solution(ens: &ChannelEnsemble) -> PrecoderSolution {
    PrecoderSolution::zeros(ens.sat_ports, ens.bs_ports, ens.sat_users.len(), ens.cell_users.len())
}

/// Optimises `scheme` from the configured initial point.
pub fn optimize(scheme: SchemeKind, ens: &ChannelEnsemble, budgets: Budgets, cfg: &SchemeConfig) -> Result<RunTrace> {
    cfg.validate()?;
    ens.validate()?;
    let plans = SchemePlans::new(scheme, ens);
    let mut sol = empty_solution(ens);
    for plan in plans.plans() {
        initial_solution(ens, plan, plan_budgets(plan, budgets), cfg.init, cfg.noise, &mut sol);
    }
    run_scheme_from(ens, &plans, budgets, cfg, sol, Start::Init(cfg.init))
}

/// Optimises `scheme` starting from the precoders of another scheme's
/// solution. The allocation is reset to one that is feasible for `scheme`.
pub fn optimize_from(
    scheme: SchemeKind,
    ens: &ChannelEnsemble,
    budgets: Budgets,
    cfg: &SchemeConfig,
    warm: &RunTrace,
) -> Result<RunTrace> {
    cfg.validate()?;
    let plans = SchemePlans::new(scheme, ens);
    let mut sol = warm.solution.clone();
    for plan in plans.plans() {
        feasible_allocation(ens, plan, &mut sol, cfg.noise);
    }
    run_scheme_from(ens, &plans, budgets, cfg, sol, Start::WarmFrom(warm.scheme))
}

/// Like [`optimize_from`], but the columns `scheme` has and `warm` left
/// silent get their initial direction and share of the budget; the warm
/// columns are scaled down to make room.
pub fn optimize_blended(
    scheme: SchemeKind,
    ens: &ChannelEnsemble,
    budgets: Budgets,
    cfg: &SchemeConfig,
    warm: &RunTrace,
) -> Result<RunTrace> {
    cfg.validate()?;
    let plans = SchemePlans::new(scheme, ens);
    let mut fresh = empty_solution(ens);
    let mut sol = warm.solution.clone();
    for plan in plans.plans() {
        let b = plan_budgets(plan, budgets);
        initial_solution(ens, plan, b, InitPolicy::MatchedFilter, cfg.noise, &mut fresh);
        for (tx, budget) in [(Tx::Sat, b.sat), (Tx::Bs, b.bs)] {
            let cols: Vec<_> = plan.columns().filter(|c| c.tx() == tx).collect();
            let (new, kept): (Vec<_>, Vec<_>) = cols.into_iter().partition(|&c| sol.column(c).norm_squared() == 0.0);
            let added: f64 = new.iter().map(|&c| fresh.column(c).norm_squared()).sum();
            let old: f64 = kept.iter().map(|&c| sol.column(c).norm_squared()).sum();
            if added == 0.0 {
                continue;
            }
            for &c in &new {
                *sol.column_mut(c) = fresh.column(c).clone();
            }
            if old > 0.0 {
                let f = crate::C64::new(((budget - added).max(0.0) / old).sqrt(), 0.0);
                for &c in &kept {
                    *sol.column_mut(c) *= f;
                }
            }
        }
        feasible_allocation(ens, plan, &mut sol, cfg.noise);
    }
    run_scheme_from(ens, &plans, budgets, cfg, sol, Start::BlendFrom(warm.scheme))
}

/// The subproblem solved at outer iteration `iteration` (counting from one)
/// of a run of `scheme` from the configured initial point. For orthogonal
/// schemes this is the satellite half when it exists.
pub fn subproblem_at(
    scheme: SchemeKind,
    ens: &ChannelEnsemble,
    budgets: Budgets,
    cfg: &SchemeConfig,
    iteration: usize,
) -> Result<Subproblem> {
    cfg.validate()?;
    ens.validate()?;
    if iteration == 0 {
        return Err(Error::Config("outer iterations are counted from one".into()));
    }
    let plans = SchemePlans::new(scheme, ens);
    let plan = plans
        .plans()
        .next()
        .ok_or_else(|| Error::Config(format!("{scheme} has nothing to optimise for this population")))?;
    let budgets = plan_budgets(plan, budgets);
    let mut sol = empty_solution(ens);
    initial_solution(ens, plan, budgets, cfg.init, cfg.noise, &mut sol);
    sol.r_min = implied_min_rate(plan, &sol).max(0.0);
    for it in 1..iteration {
        outer_step(ens, plan, budgets, cfg, &mut sol, it)?;
    }
    Ok(subproblem_for(ens, plan, budgets, cfg, &sol)?.0)
}

fn better(a: RunTrace, b: RunTrace) -> RunTrace {
    if b.final_r_min() > a.final_r_min() {
        b
    } else {
        a
    }
}

/// The scheme whose solution seeds `scheme` under nested warm starts.
fn inner_scheme(scheme: SchemeKind) -> Option<SchemeKind> {
    match scheme {
        SchemeKind::MdpRsma => Some(SchemeKind::RsmaPdIstn),
        SchemeKind::RsmaPdIstn => Some(SchemeKind::SdmaIstn),
        _ => None,
    }
}

/// Optimises several schemes on one ensemble, returning one result per
/// distinct requested scheme in request order. With nested warm starts the
/// contained schemes are optimised too (and reused), which makes the
/// minimum rates of SDMA-ISTN, RSMA-PD-ISTN and MDP-RSMA non-decreasing in
/// that order.
pub fn optimize_schemes(
    schemes: &[SchemeKind],
    ens: &ChannelEnsemble,
    budgets: Budgets,
    cfg: &SchemeConfig,
) -> Vec<(SchemeKind, Result<RunTrace>)> {
    let mut done: BTreeMap<SchemeKind, Result<RunTrace>> = BTreeMap::new();
    fn get(
        scheme: SchemeKind,
        ens: &ChannelEnsemble,
        budgets: Budgets,
        cfg: &SchemeConfig,
        done: &mut BTreeMap<SchemeKind, Result<RunTrace>>,
    ) {
        if done.contains_key(&scheme) {
            return;
        }
        let own = optimize(scheme, ens, budgets, cfg);
        let result = match (cfg.nested_warm_start, inner_scheme(scheme)) {
            (true, Some(inner)) => {
                get(inner, ens, budgets, cfg, done);
                match (own, &done[&inner]) {
                    (Ok(own), Ok(seed)) => {
                        let mut best = own;
                        for run in [
                            optimize_from(scheme, ens, budgets, cfg, seed),
                            optimize_blended(scheme, ens, budgets, cfg, seed),
                        ] {
                            match run {
                                Ok(t) => best = better(best, t),
                                Err(e) => warn!("{scheme}: warm start failed: {e}"),
                            }
                        }
                        Ok(best)
                    }
                    (Err(e), Ok(seed)) => {
                        warn!("{scheme}: run from the initial point failed: {e}");
                        optimize_from(scheme, ens, budgets, cfg, seed)
                    }
                    (own, Err(_)) => own,
                }
            }
            _ => own,
        };
        done.insert(scheme, result);
    }
    let mut order: Vec<SchemeKind> = Vec::new();
    for &s in schemes {
        if !order.contains(&s) {
            order.push(s);
        }
    }
    for &s in &order {
        get(s, ens, budgets, cfg, &mut done);
    }
    order
        .into_iter()
        .map(|s| (s, done.remove(&s).expect("every requested scheme was run")))
        .collect()
}

/// MDP-RSMA.
pub fn optimize_mdp_rsma(ens: &ChannelEnsemble, budgets: Budgets, cfg: &SchemeConfig) -> Result<RunTrace> {
    single(SchemeKind::MdpRsma, ens, budgets, cfg)
}

/// Rate splitting with private and common streams only.
pub fn optimize_rsma_pd_istn(ens: &ChannelEnsemble, budgets: Budgets, cfg: &SchemeConfig) -> Result<RunTrace> {
    single(SchemeKind::RsmaPdIstn, ens, budgets, cfg)
}

/// Private streams only, interference treated as noise.
pub fn optimize_sdma_istn(ens: &ChannelEnsemble, budgets: Budgets, cfg: &SchemeConfig) -> Result<RunTrace> {
    single(SchemeKind::SdmaIstn, ens, budgets, cfg)
}

/// Common and private streams on orthogonal polarizations, no SIC.
pub fn optimize_rsma_dual_pm_istn(ens: &ChannelEnsemble, budgets: Budgets, cfg: &SchemeConfig) -> Result<RunTrace> {
    single(SchemeKind::RsmaDualPmIstn, ens, budgets, cfg)
}

/// RSMA-OMA and SDMA-OMA, in that order.
pub fn optimize_oma_variants(ens: &ChannelEnsemble, budgets: Budgets, cfg: &SchemeConfig) -> Result<(RunTrace, RunTrace)> {
    Ok((
        optimize(SchemeKind::RsmaOma, ens, budgets, cfg)?,
        optimize(SchemeKind::SdmaOma, ens, budgets, cfg)?,
    ))
}

fn single(scheme: SchemeKind, ens: &ChannelEnsemble, budgets: Budgets, cfg: &SchemeConfig) -> Result<RunTrace> {
    optimize_schemes(&[scheme], ens, budgets, cfg)
        .pop()
        .expect("one result per scheme")
        .1
}
