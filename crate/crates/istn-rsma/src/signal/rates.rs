use crate::channel::ChannelEnsemble;
use crate::numeric::mean_and_stderr;
use crate::{Error, Result};

use super::plan::{LayerKind, LayerPlan, UserRef};
use super::sinr::EventPowers;
use super::solution::PrecoderSolution;

/// Sample-average rate of one decoding event with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EventRate {
    pub mean: f64,
    pub stderr: f64,
}

/// Sample-average achievable rate (bit/s/Hz) for every event of `plan`, in
/// plan order.
pub fn event_rates(ens: &ChannelEnsemble, plan: &LayerPlan, sol: &PrecoderSolution, noise: f64) -> Vec<EventRate> {
    plan.events
        .iter()
        .map(|e| {
            let samples = if e.is_deterministic() { 1 } else { ens.samples };
            let rates: Vec<f64> = (0..samples).map(|s| EventPowers::of(ens, e, sol, s, noise).rate()).collect();
            let (mean, stderr) = mean_and_stderr(&rates);
            EventRate { mean, stderr }
        })
        .collect()
}

/// Rates of one user. Decoding rates are what the user could decode on each
/// common layer; shares are the portions allocated to it.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct UserRates {
    pub spc_decode: Option<f64>,
    pub common_decode: Option<f64>,
    pub private: f64,
    pub private_stderr: f64,
    pub spc_share: f64,
    pub common_share: f64,
    pub total: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateReport {
    pub sat: Vec<UserRates>,
    pub cell: Vec<UserRates>,
    /// Smallest decoding rate of each common layer across its decoders.
    pub spc_cap: Option<f64>,
    pub cpc_cap: Option<f64>,
    pub lpc_cap: Option<f64>,
    pub min_rate: f64,
}

impl RateReport {
    pub fn users(&self) -> impl Iterator<Item = &UserRates> {
        self.sat.iter().chain(self.cell.iter())
    }

    pub fn mean_total(&self) -> f64 {
        let n = self.sat.len() + self.cell.len();
        self.users().map(|u| u.total).sum::<f64>() / n as f64
    }

    /// CSV rows `user_kind,user,layer,rate` for logging.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("user_kind,user,layer,rate\n");
        let mut row = |kind: &str, k: usize, layer: &str, v: f64| out.push_str(&format!("{kind},{k},{layer},{v:.12e}\n"));
        for (kind, users) in [("sat", &self.sat), ("cell", &self.cell)] {
            for (k, u) in users.iter().enumerate() {
                if let Some(v) = u.spc_decode {
                    row(kind, k, "spc_decode", v);
                }
                if let Some(v) = u.common_decode {
                    row(kind, k, "common_decode", v);
                }
                row(kind, k, "spc_share", u.spc_share);
                row(kind, k, "common_share", u.common_share);
                row(kind, k, "private", u.private);
                row(kind, k, "total", u.total);
            }
        }
        out.push_str(&format!("all,0,min_rate,{:.12e}\n", self.min_rate));
        out
    }
}

fn layer_min(plan: &LayerPlan, rates: &[EventRate], layer: LayerKind) -> Option<f64> {
    plan.events
        .iter()
        .zip(rates)
        .filter(|(e, _)| e.layer == layer)
        .map(|(_, r)| r.mean)
        .reduce(f64::min)
}

/// Ergodic rates of `sol` on `ens` under `plan`, using the allocations
/// stored in the solution.
pub fn ergodic_rates(ens: &ChannelEnsemble, plan: &LayerPlan, sol: &PrecoderSolution, noise: f64) -> RateReport {
    let rates = event_rates(ens, plan, sol, noise);
    let scale = plan.rate_scale;
    let mut sat = vec![UserRates::default(); plan.sat_users];
    let mut cell = vec![UserRates::default(); plan.cell_users];
    for (e, r) in plan.events.iter().zip(&rates) {
        let u = match e.user {
            UserRef::Sat(k) => &mut sat[k],
            UserRef::Cell(k) => &mut cell[k],
        };
        match e.layer {
            LayerKind::Spc => u.spc_decode = Some(scale * r.mean),
            LayerKind::Cpc | LayerKind::Lpc => u.common_decode = Some(scale * r.mean),
            LayerKind::Private => {
                u.private = scale * r.mean;
                u.private_stderr = scale * r.stderr;
            }
        }
    }
    for (k, u) in sat.iter_mut().enumerate() {
        if plan.has_layer(LayerKind::Spc) {
            u.spc_share = scale * sol.c_spc[k];
        }
        if plan.has_layer(LayerKind::Cpc) {
            u.common_share = scale * sol.c_cpc[k];
        }
        u.total = u.spc_share + u.common_share + u.private;
    }
    for (k, u) in cell.iter_mut().enumerate() {
        if plan.has_layer(LayerKind::Lpc) {
            u.common_share = scale * sol.c_lpc[k];
        }
        u.total = u.common_share + u.private;
    }
    let min_rate = sat.iter().chain(cell.iter()).map(|u| u.total).fold(f64::INFINITY, f64::min);
    RateReport {
        spc_cap: layer_min(plan, &rates, LayerKind::Spc).map(|v| scale * v),
        cpc_cap: layer_min(plan, &rates, LayerKind::Cpc).map(|v| scale * v),
        lpc_cap: layer_min(plan, &rates, LayerKind::Lpc).map(|v| scale * v),
        sat,
        cell,
        min_rate: if min_rate.is_finite() { min_rate } else { 0.0 },
    }
}

/// Checks that every allocation is non-negative and each common layer's
/// total allocation fits under its cap (all within `tol`).
pub fn validate_allocation(report: &RateReport, tol: f64) -> Result<()> {
    let shares = |f: fn(&UserRates) -> f64, users: &[UserRates]| users.iter().map(f).sum::<f64>();
    for u in report.users() {
        for (layer, v) in [("spc", u.spc_share), ("common", u.common_share)] {
            if v < -tol {
                return Err(Error::CapViolation {
                    layer,
                    allocated: v,
                    cap: 0.0,
                });
            }
        }
    }
    let checks = [
        ("spc", shares(|u| u.spc_share, &report.sat), report.spc_cap),
        ("cpc", shares(|u| u.common_share, &report.sat), report.cpc_cap),
        ("lpc", shares(|u| u.common_share, &report.cell), report.lpc_cap),
    ];
    for (layer, allocated, cap) in checks {
        let cap = cap.unwrap_or(0.0);
        if allocated > cap + tol {
            return Err(Error::CapViolation { layer, allocated, cap });
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{build_ensemble, draw_scenario, PhysicalParams};
    use crate::numeric::{CVector, C64};
    use crate::signal::SchemeKind;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn setup() -> (ChannelEnsemble, PrecoderSolution) {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let sc = draw_scenario(&PhysicalParams::default(), 2, 2, &mut rng);
        let ens = build_ensemble(&sc, 8, &mut rng).unwrap();
        let mut sol = PrecoderSolution::zeros(ens.sat_ports, ens.bs_ports, 2, 2);
        let one = |n: usize, s: f64| CVector::from_element(n, C64::new(s, 0.0));
        sol.w_spc = one(ens.sat_ports, 1.0);
        sol.w_cpc = one(ens.sat_ports, 0.5);
        sol.w_private = vec![one(ens.sat_ports, 0.7); 2];
        sol.p_lpc = one(ens.bs_ports, 0.3);
        sol.p_private = vec![one(ens.bs_ports, 0.4); 2];
        (ens, sol)
    }

    #[test]
    fn totals_add_allocations_to_private_rates() {
        let (ens, mut sol) = setup();
        let plan = LayerPlan::for_ensemble(SchemeKind::MdpRsma, &ens);
        let probe = ergodic_rates(&ens, &plan, &sol, 1.0);
        sol.c_spc = vec![probe.spc_cap.unwrap() / 2.0; 2];
        sol.c_cpc = vec![probe.cpc_cap.unwrap() / 2.0; 2];
        sol.c_lpc = vec![probe.lpc_cap.unwrap() / 2.0; 2];
        let report = ergodic_rates(&ens, &plan, &sol, 1.0);
        validate_allocation(&report, 1e-9).unwrap();
        let u = report.sat[1];
        assert!((u.total - (sol.c_spc[1] + sol.c_cpc[1] + u.private)).abs() < 1e-14);
        let min = report.users().map(|u| u.total).fold(f64::INFINITY, f64::min);
        assert_eq!(report.min_rate, min);
    }

    #[test]
    fn over_allocation_is_reported() {
        let (ens, mut sol) = setup();
        let plan = LayerPlan::for_ensemble(SchemeKind::MdpRsma, &ens);
        let probe = ergodic_rates(&ens, &plan, &sol, 1.0);
        sol.c_cpc = vec![probe.cpc_cap.unwrap(); 2];
        let report = ergodic_rates(&ens, &plan, &sol, 1.0);
        assert!(matches!(validate_allocation(&report, 1e-9), Err(Error::CapViolation { layer: "cpc", .. })));
    }

    #[test]
    fn orthogonal_access_halves_rates() {
        let (ens, sol) = setup();
        let full = LayerPlan::oma_part(SchemeKind::SdmaOma, &[ens.sat_users[0].pol, ens.sat_users[1].pol], &[], true);
        let mut doubled = full.clone();
        doubled.rate_scale = 1.0;
        let half = ergodic_rates(&ens, &full, &sol, 1.0);
        let one = ergodic_rates(&ens, &doubled, &sol, 1.0);
        for (a, b) in half.sat.iter().zip(&one.sat) {
            assert!((2.0 * a.private - b.private).abs() < 1e-14);
        }
    }
}
