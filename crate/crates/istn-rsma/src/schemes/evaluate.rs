use crate::channel::ChannelEnsemble;
use crate::signal::{ergodic_rates, LayerKind, RateReport, UserRates};

use super::SchemePlans;

/// Allocation excess tolerated before a layer counts as over its cap; the
/// tolerance the schemes use when validating allocations.
pub const ALLOCATION_TOL: f64 = 1e-6;
use crate::signal::PrecoderSolution;

/// Held-out performance of a solution.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    /// Rates after common shares have been rescaled to fit the held-out
    /// caps; this is the decodable operating point.
    pub report: RateReport,
    /// Minimum rate with the shares as optimised, before any rescaling.
    pub unscaled_min_rate: f64,
    /// Factors applied to the super-common, satellite-common and
    /// terrestrial-common shares (one when the cap was respected).
    pub rescale: [f64; 3],
}

impl Evaluation {
    pub fn min_rate(&self) -> f64 {
        self.report.min_rate
    }

    pub fn was_rescaled(&self) -> bool {
        self.rescale.iter().any(|&f| f < 1.0)
    }
}

fn merge(parts: Vec<RateReport>) -> RateReport {
    let mut out = RateReport {
        sat: Vec::new(),
        cell: Vec::new(),
        spc_cap: None,
        cpc_cap: None,
        lpc_cap: None,
        min_rate: f64::INFINITY,
    };
    for p in parts {
        if !p.sat.is_empty() {
            out.sat = p.sat;
        }
        if !p.cell.is_empty() {
            out.cell = p.cell;
        }
        out.spc_cap = out.spc_cap.or(p.spc_cap);
        out.cpc_cap = out.cpc_cap.or(p.cpc_cap);
        out.lpc_cap = out.lpc_cap.or(p.lpc_cap);
    }
    out.min_rate = out.users().map(|u| u.total).fold(f64::INFINITY, f64::min);
    if !out.min_rate.is_finite() {
        out.min_rate = 0.0;
    }
    out
}

fn rescale_layer(users: &mut [UserRates], cap: Option<f64>, share: fn(&mut UserRates) -> &mut f64) -> f64 {
    let Some(cap) = cap else { return 1.0 };
    let total: f64 = users.iter_mut().map(|u| *share(u)).sum();
    if total <= cap + ALLOCATION_TOL || total <= 0.0 {
        return 1.0;
    }
    let factor = cap.max(0.0) / total;
    for u in users.iter_mut() {
        *share(u) *= factor;
    }
    factor
}

/// Ergodic rates of `sol` on `eval`. Common shares that no longer fit under
/// a layer's held-out cap are scaled down uniformly so the reported rates
/// stay decodable.
pub fn evaluate(plans: &SchemePlans, sol: &PrecoderSolution, eval: &ChannelEnsemble, noise: f64) -> Evaluation {
    let parts = plans.plans().map(|p| ergodic_rates(eval, p, sol, noise)).collect();
    let mut report = merge(parts);
    let unscaled_min_rate = report.min_rate;
    let has = |layer| plans.plans().any(|p| p.has_layer(layer));
    let rescale = [
        if has(LayerKind::Spc) { rescale_layer(&mut report.sat, report.spc_cap, |u| &mut u.spc_share) } else { 1.0 },
        if has(LayerKind::Cpc) { rescale_layer(&mut report.sat, report.cpc_cap, |u| &mut u.common_share) } else { 1.0 },
        if has(LayerKind::Lpc) { rescale_layer(&mut report.cell, report.lpc_cap, |u| &mut u.common_share) } else { 1.0 },
    ];
    for u in report.sat.iter_mut().chain(report.cell.iter_mut()) {
        u.total = u.spc_share + u.common_share + u.private;
    }
    report.min_rate = report.users().map(|u| u.total).fold(f64::INFINITY, f64::min);
    if !report.min_rate.is_finite() {
        report.min_rate = 0.0;
    }
    Evaluation {
        report,
        unscaled_min_rate,
        rescale,
    }
}
