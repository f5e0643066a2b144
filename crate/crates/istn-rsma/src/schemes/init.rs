//! Starting points for the alternating optimisation.

use nalgebra::SymmetricEigen;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::channel::{complex_gaussian, ChannelEnsemble};
use crate::numeric::{CMatrix, CVector, C64};
use crate::signal::{event_rates, Column, LayerKind, LayerPlan, PrecoderSolution, Tx, UserRef};
use crate::subproblem::{implied_min_rate, Budgets};

/// How the first iterate is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InitPolicy {
    /// Private streams along their user's mean channel, common streams along
    /// the dominant direction of their decoders' mean channels.
    #[default]
    MatchedFilter,
    /// Independent complex Gaussian directions from the given seed.
    Random(u64),
}

/// Share of the satellite budget given to the private, satellite-common and
/// super-common layers, before renormalising over the layers present.
const SAT_SHARES: [f64; 3] = [0.6, 0.25, 0.15];
/// Share of the base-station budget for private and common layers.
const BS_SHARES: [f64; 2] = [0.75, 0.25];

fn restrict(v: &CVector, support: &[usize]) -> CVector {
    CVector::from_iterator(support.len(), support.iter().map(|&i| v[i]))
}

/// Dominant eigenvector of `sum_i v_i v_i^H`, or `None` if all vectors
/// vanish.
fn principal_direction(vectors: &[CVector]) -> Option<CVector> {
    let n = vectors.first()?.len();
    if n == 0 {
        return None;
    }
    let mut gram = CMatrix::zeros(n, n);
    for v in vectors {
        gram += v * v.adjoint();
    }
    let eig = SymmetricEigen::new(gram);
    let (i, &top) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))?;
    (top > 0.0).then(|| eig.eigenvectors.column(i).into_owned())
}

/// Unit direction for `col` from the mean channels of every event that
/// decodes it, falling back to the dominant direction of the sampled
/// channels when the means cancel.
fn matched_direction(ens: &ChannelEnsemble, plan: &LayerPlan, col: Column, support: &[usize]) -> Option<CVector> {
    let tx = col.tx();
    let decoders: Vec<_> = plan.events.iter().filter(|e| e.desired == col).collect();
    let samples = ens.samples.max(1);
    let mut means = Vec::new();
    let mut all = Vec::new();
    for e in &decoders {
        let mut mean = CVector::zeros(support.len());
        for s in 0..samples {
            if let Some(ch) = e.channel(ens, tx, s) {
                let r = restrict(ch, support);
                mean += &r;
                all.push(r);
            }
        }
        means.push(mean / C64::new(samples as f64, 0.0));
    }
    let spread: f64 = all.iter().map(|v| v.norm_squared()).sum::<f64>() / all.len().max(1) as f64;
    let mean_power: f64 = means.iter().map(|v| v.norm_squared()).sum::<f64>() / means.len().max(1) as f64;
    if mean_power > 1e-6 * spread {
        principal_direction(&means)
    } else {
        principal_direction(&all)
    }
}

fn random_direction(rng: &mut ChaCha8Rng, n: usize) -> Option<CVector> {
    let v = CVector::from_fn(n, |_, _| complex_gaussian(rng, 1.0));
    let norm = v.norm();
    (norm > 0.0).then(|| v / C64::new(norm, 0.0))
}

fn layer_share(plan: &LayerPlan, col: Column) -> f64 {
    let privates = |tx: Tx| plan.columns().filter(|c| c.tx() == tx && !c.is_common()).count().max(1) as f64;
    let present = |c: Column| plan.columns().any(|x| x == c);
    match col.tx() {
        Tx::Sat => {
            let weights = [
                (true, SAT_SHARES[0]),
                (present(Column::Cpc), SAT_SHARES[1]),
                (present(Column::Spc), SAT_SHARES[2]),
            ];
            let total: f64 = weights.iter().filter(|w| w.0).map(|w| w.1).sum();
            match col {
                Column::Cpc => SAT_SHARES[1] / total,
                Column::Spc => SAT_SHARES[2] / total,
                _ => SAT_SHARES[0] / total / privates(Tx::Sat),
            }
        }
        Tx::Bs => {
            let total = BS_SHARES[0] + if present(Column::Lpc) { BS_SHARES[1] } else { 0.0 };
            match col {
                Column::Lpc => BS_SHARES[1] / total,
                _ => BS_SHARES[0] / total / privates(Tx::Bs),
            }
        }
    }
}

/// Sets the allocation of `sol` to a point feasible for every surrogate:
/// no common shares, private shares equal to the achieved private rates.
pub fn feasible_allocation(ens: &ChannelEnsemble, plan: &LayerPlan, sol: &mut PrecoderSolution, noise: f64) {
    let rates = event_rates(ens, plan, sol, noise);
    for (e, r) in plan.events.iter().zip(&rates) {
        match (e.layer, e.user) {
            (LayerKind::Private, UserRef::Sat(k)) => sol.alpha_sat[k] = r.mean,
            (LayerKind::Private, UserRef::Cell(k)) => sol.alpha_cell[k] = r.mean,
            _ => {}
        }
    }
    for k in 0..plan.sat_users {
        sol.c_spc[k] = 0.0;
        sol.c_cpc[k] = 0.0;
    }
    for k in 0..plan.cell_users {
        sol.c_lpc[k] = 0.0;
    }
    sol.r_min = implied_min_rate(plan, sol);
    if !sol.r_min.is_finite() {
        sol.r_min = 0.0;
    }
}

/// First iterate for `plan`, written into `sol` (columns the plan does not
/// own are left alone).
pub fn initial_solution(
    ens: &ChannelEnsemble,
    plan: &LayerPlan,
    budgets: Budgets,
    policy: InitPolicy,
    noise: f64,
    sol: &mut PrecoderSolution,
) {
    let mut rng = match policy {
        InitPolicy::Random(seed) => Some(ChaCha8Rng::seed_from_u64(seed)),
        InitPolicy::MatchedFilter => None,
    };
    for col in plan.columns().collect::<Vec<_>>() {
        let (ports, budget) = match col.tx() {
            Tx::Sat => (ens.sat_ports, budgets.sat),
            Tx::Bs => (ens.bs_ports, budgets.bs),
        };
        let support = plan.support(col, ports);
        let w = sol.column_mut(col);
        w.fill(C64::new(0.0, 0.0));
        if budget <= 0.0 || support.is_empty() {
            continue;
        }
        let dir = match rng.as_mut() {
            Some(rng) => random_direction(rng, support.len()),
            None => matched_direction(ens, plan, col, &support),
        };
        if let Some(dir) = dir {
            let amp = (budget * layer_share(plan, col)).sqrt();
            for (i, &p) in support.iter().enumerate() {
                w[p] = dir[i] * amp;
            }
        }
    }
    feasible_allocation(ens, plan, sol, noise);
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{build_ensemble, draw_scenario, PhysicalParams};
    use crate::signal::SchemeKind;

    fn ens(kt: usize) -> ChannelEnsemble {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let sc = draw_scenario(&PhysicalParams::default(), 4, kt, &mut rng);
        build_ensemble(&sc, 10, &mut rng).unwrap()
    }

    #[test]
    fn initial_power_fills_each_budget() {
        for scheme in SchemeKind::ALL {
            let e = ens(2);
            let plan = LayerPlan::for_ensemble(scheme, &e);
            let budgets = Budgets { sat: 12.0, bs: 3.0 };
            for policy in [InitPolicy::MatchedFilter, InitPolicy::Random(4)] {
                let mut sol = PrecoderSolution::zeros(e.sat_ports, e.bs_ports, 4, 2);
                initial_solution(&e, &plan, budgets, policy, 1.0, &mut sol);
                assert!((sol.sat_power() - 12.0).abs() < 1e-9, "{scheme}");
                assert!((sol.bs_power() - 3.0).abs() < 1e-9, "{scheme}");
                assert!(sol.r_min > 0.0);
            }
        }
    }

    #[test]
    fn shares_follow_the_layer_split() {
        let e = ens(2);
        let plan = LayerPlan::for_ensemble(SchemeKind::MdpRsma, &e);
        let mut sol = PrecoderSolution::zeros(e.sat_ports, e.bs_ports, 4, 2);
        initial_solution(&e, &plan, Budgets { sat: 1.0, bs: 1.0 }, InitPolicy::MatchedFilter, 1.0, &mut sol);
        assert!((sol.w_spc.norm_squared() - 0.15).abs() < 1e-12);
        assert!((sol.w_cpc.norm_squared() - 0.25).abs() < 1e-12);
        assert!((sol.w_private[0].norm_squared() - 0.15).abs() < 1e-12);
        assert!((sol.p_lpc.norm_squared() - 0.25).abs() < 1e-12);

        let plan = LayerPlan::for_ensemble(SchemeKind::SdmaIstn, &e);
        initial_solution(&e, &plan, Budgets { sat: 1.0, bs: 1.0 }, InitPolicy::MatchedFilter, 1.0, &mut sol);
        assert!((sol.w_private[0].norm_squared() - 0.25).abs() < 1e-12);
        assert!((sol.p_private[0].norm_squared() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn private_direction_is_the_mean_channel() {
        let e = ens(0);
        let plan = LayerPlan::for_ensemble(SchemeKind::SdmaIstn, &e);
        let mut sol = PrecoderSolution::zeros(e.sat_ports, e.bs_ports, 4, 0);
        initial_solution(&e, &plan, Budgets { sat: 1.0, bs: 0.0 }, InitPolicy::MatchedFilter, 1.0, &mut sol);
        let mean = (0..e.samples).fold(CVector::zeros(e.sat_ports), |acc, s| acc + e.f(1, s));
        let align = crate::numeric::inner(&mean, &sol.w_private[1]).norm() / (mean.norm() * sol.w_private[1].norm());
        assert!((align - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_budget_leaves_transmitter_silent() {
        let e = ens(2);
        let plan = LayerPlan::for_ensemble(SchemeKind::MdpRsma, &e);
        let mut sol = PrecoderSolution::zeros(e.sat_ports, e.bs_ports, 4, 2);
        initial_solution(&e, &plan, Budgets { sat: 0.0, bs: 2.0 }, InitPolicy::MatchedFilter, 1.0, &mut sol);
        assert_eq!(sol.sat_power(), 0.0);
        assert!(sol.alpha_sat.iter().all(|&a| a == 0.0));
        assert_eq!(sol.r_min, 0.0);
    }
}
