use std::fmt;

use super::config::{CsitMode, ScenarioConfig, SweepAxis};
use super::sweep::{for_each_trial, run_trial, summarise, ResultTable, TrialOutcome};
use crate::schemes::{evaluate, SchemePlans, ALLOCATION_TOL};
use crate::signal::{validate_allocation, SchemeKind};
use crate::Result;

/// Slack on the per-iteration objective decrease.
pub const MONOTONE_SLACK: f64 = 1e-7;
/// Slack on the nesting chain between rate-splitting schemes.
pub const NESTING_SLACK: f64 = 1e-4;
/// Largest KKT residual accepted on an optimal subproblem solution.
pub const KKT_LIMIT: f64 = 1e-7;
/// Relative power overshoot tolerated.
pub const POWER_SLACK: f64 = 1e-9;

/// One broken invariant.
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub value: f64,
    pub trial: Option<usize>,
    pub scheme: Option<SchemeKind>,
    pub what: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "value {}", self.value)?;
        if let Some(t) = self.trial {
            write!(f, ", trial {t}")?;
        }
        if let Some(s) = self.scheme {
            write!(f, ", {s}")?;
        }
        write!(f, ": {}", self.what)
    }
}

/// Invariants of one trial: monotone traces, power feasibility, solver
/// accuracy, decodable allocations on the optimisation ensemble and the
/// nesting chain SDMA-ISTN <= RSMA-PD-ISTN <= MDP-RSMA.
pub fn check_trial(cfg: &ScenarioConfig, outcome: &TrialOutcome) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut flag = |scheme: Option<SchemeKind>, what: String| {
        out.push(Violation {
            value: outcome.value,
            trial: Some(outcome.trial),
            scheme,
            what,
        })
    };
    let Some(opt) = &outcome.optimisation else {
        flag(None, "ensembles could not be built".into());
        return out;
    };
    let budgets = cfg.at_point(outcome.value).budgets();
    let mut robust_rate = Vec::new();
    for run in &outcome.runs {
        let s = Some(run.scheme);
        let trace = match &run.trace {
            Ok(t) => t,
            Err(e) => {
                flag(s, format!("run failed: {e}"));
                continue;
            }
        };
        if !trace.is_monotone(MONOTONE_SLACK) {
            flag(s, format!("objective decreased by {:.3e}", trace.max_decrease()));
        }
        if trace.max_kkt_residual > KKT_LIMIT {
            flag(s, format!("KKT residual {:.3e} on an accepted solve", trace.max_kkt_residual));
        }
        let sol = &trace.solution;
        for (name, power, budget) in [("satellite", sol.sat_power(), budgets.sat), ("base station", sol.bs_power(), budgets.bs)] {
            if power > budget * (1.0 + POWER_SLACK) + 1e-12 {
                flag(s, format!("{name} power {power:.6e} exceeds budget {budget:.6e}"));
            }
        }
        if run.csit == CsitMode::Robust {
            let eval = evaluate(&SchemePlans::new(run.scheme, opt), sol, opt, 1.0);
            if let Err(e) = validate_allocation(&eval.report, ALLOCATION_TOL) {
                flag(s, format!("allocation not decodable on its own ensemble: {e}"));
            }
            robust_rate.push((run.scheme, trace.final_r_min()));
        }
    }
    let rate = |k: SchemeKind| robust_rate.iter().find(|(s, _)| *s == k).map(|(_, r)| *r);
    let chain = [SchemeKind::SdmaIstn, SchemeKind::RsmaPdIstn, SchemeKind::MdpRsma];
    for pair in chain.windows(2) {
        if let (Some(inner), Some(outer)) = (rate(pair[0]), rate(pair[1])) {
            if inner > outer + NESTING_SLACK {
                flag(
                    Some(pair[1]),
                    format!("{} reaches {inner:.6} above its {outer:.6}", pair[0]),
                );
            }
        }
    }
    out
}

/// Mean held-out rate must not fall by more than one standard error between
/// consecutive transmit-power points.
pub fn check_power_trend(table: &ResultTable) -> Vec<Violation> {
    if !matches!(table.axis, SweepAxis::PsDbw | SweepAxis::PtDbw) {
        return Vec::new();
    }
    let summary = summarise(table);
    let mut out = Vec::new();
    for a in &summary {
        let next = summary
            .iter()
            .filter(|b| b.scheme == a.scheme && b.csit == a.csit && b.value > a.value)
            .min_by(|x, y| x.value.total_cmp(&y.value));
        if let Some(b) = next {
            let slack = a.stderr.max(b.stderr);
            if b.mean < a.mean - slack {
                out.push(Violation {
                    value: b.value,
                    trial: None,
                    scheme: Some(a.scheme),
                    what: format!("mean rate falls from {:.6} to {:.6} ({})", a.mean, b.mean, a.csit),
                });
            }
        }
    }
    out
}

/// Runs the sweep and every invariant check. Returns the table alongside the
/// violations so callers can emit both.
pub fn run_checks(cfg: &ScenarioConfig) -> Result<(ResultTable, Vec<Violation>)> {
    let per_trial = for_each_trial(cfg, |v, t| {
        let outcome = run_trial(cfg, v, t);
        let violations = check_trial(cfg, &outcome);
        (outcome.rows, violations)
    })?;
    let mut rows = Vec::new();
    let mut violations = Vec::new();
    for (r, v) in per_trial {
        rows.extend(r);
        violations.extend(v);
    }
    let table = ResultTable::new(cfg.sweep_axis, rows);
    violations.extend(check_power_trend(&table));
    Ok((table, violations))
}
