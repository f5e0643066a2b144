//! Per-iteration convex subproblem: maximise the minimum user rate subject
//! to surrogate rate bounds, rate-allocation constraints and power budgets,
//! compiled to a real second-order cone program.
//!
//! Each decoding event contributes one epigraph slack `t` with
//! `||v(x)||^2 <= t` written as `||[2 v; 1 - t]|| <= 1 + t`, where `v`
//! stacks the factored interference terms and the desired-stream residual,
//! and one linear row `a (1 - t - delta sigma^2 - r0) + nu - rhs >= 0`.

mod embed;
mod layout;

pub use embed::{complex_vector, hermitian_form, linear_form, psd_factor, real_matrix, real_vector};
pub use layout::{ColumnBlock, VariableLayout};

use nalgebra::QR;

use crate::numeric::{CMatrix, CVector, C64};
use crate::signal::{DecodeEvent, LayerKind, LayerPlan, PrecoderSolution, Tx, UserRef};
use crate::solver::{Affine, ConicProgram, Sense};
use crate::wmmse::{EventCoefficients, SurrogateScaling, WmmseCoefficients};
use crate::{Error, Result};

/// Transmit power budgets in watts (noise power normalised to one).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Budgets {
    pub sat: f64,
    pub bs: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BuildOptions {
    pub scaling: SurrogateScaling,
    /// Lower bound imposed on every private-rate variable.
    pub alpha_floor: f64,
}

impl Default for BuildOptions {
    fn default() -> Self {
        Self {
            scaling: SurrogateScaling::Tight,
            alpha_floor: 0.0,
        }
    }
}

/// A compiled subproblem and the map from its variables back to precoders.
#[derive(Debug, Clone)]
pub struct Subproblem {
    pub program: ConicProgram,
    pub layout: VariableLayout,
}

/// Rows of `a` restricted to the coordinates in `support`.
fn restrict_cols(a: &CMatrix, support: &[usize]) -> CMatrix {
    CMatrix::from_fn(a.nrows(), support.len(), |i, j| a[(i, support[j])])
}

fn restrict_square(a: &CMatrix, support: &[usize]) -> CMatrix {
    CMatrix::from_fn(support.len(), support.len(), |i, j| a[(support[i], support[j])])
}

/// Appends the real and imaginary rows of `m w - g` to `out`, where `w` is
/// the complex block at `block`.
fn push_complex_rows(out: &mut Vec<Affine>, m: &CMatrix, g: Option<&CVector>, block: &ColumnBlock) {
    let len = block.support.len();
    for i in 0..m.nrows() {
        let offset = g.map_or(C64::new(0.0, 0.0), |g| g[i]);
        let mut re = Affine::constant(-offset.re);
        let mut im = Affine::constant(-offset.im);
        for k in 0..len {
            let z = m[(i, k)];
            if z.re != 0.0 {
                re.terms.push((block.re(k), z.re));
                im.terms.push((block.im(k), z.re));
            }
            if z.im != 0.0 {
                re.terms.push((block.im(k), -z.im));
                im.terms.push((block.re(k), z.im));
            }
        }
        out.push(re);
        out.push(im);
    }
}

/// Desired-stream residual `||B w - beta||^2 = ||R w - Q^H beta||^2 + r0`
/// from a thin QR of `B`. Returns `(R, Q^H beta, r0)`.
fn desired_factor(rows: &CMatrix, offsets: &CVector) -> (CMatrix, CVector, f64) {
    if rows.ncols() == 0 || rows.iter().all(|z| z.norm_sqr() == 0.0) {
        return (CMatrix::zeros(0, rows.ncols()), CVector::zeros(0), offsets.norm_squared());
    }
    let qr = QR::new(rows.clone());
    let q = qr.q();
    let r = qr.r();
    let proj = q.adjoint() * offsets;
    let resid = (offsets - &q * &proj).norm_squared();
    (r, proj, resid)
}

/// Everything the linear row of one event needs besides the slack.
struct EventTerms {
    cone: Vec<Affine>,
    constant: f64,
}

fn event_terms(ev: &DecodeEvent, co: &EventCoefficients, layout: &VariableLayout, noise: f64) -> Result<EventTerms> {
    let mut cone = Vec::new();
    let mut constant = co.delta_bar * noise;
    let mut desired_seen = false;
    for col in ev.columns() {
        let block = layout
            .block(col)
            .ok_or_else(|| Error::Dimension(format!("column {col:?} is not optimised by this plan")))?;
        if col == ev.desired {
            desired_seen = true;
            let rows = restrict_cols(&co.desired_rows, &block.support);
            let (r, g, r0) = desired_factor(&rows, &co.desired_offsets);
            constant += r0;
            push_complex_rows(&mut cone, &r, Some(&g), block);
            continue;
        }
        if block.support.is_empty() {
            continue;
        }
        let psi = co
            .psi(col.tx())
            .ok_or_else(|| Error::Dimension(format!("event hears no channel for {col:?}")))?;
        let l = psd_factor(&restrict_square(psi, &block.support))?;
        push_complex_rows(&mut cone, &l.adjoint(), None, block);
    }
    debug_assert!(desired_seen);
    Ok(EventTerms { cone, constant })
}

/// Right-hand side of an event's rate bound: the layer's total allocation or
/// the user's private-rate variable.
fn event_rhs(ev: &DecodeEvent, layout: &VariableLayout) -> Vec<(usize, f64)> {
    let all = |vars: &[usize]| vars.iter().map(|&v| (v, 1.0)).collect();
    match (ev.layer, ev.user) {
        (LayerKind::Spc, _) => all(&layout.c_spc),
        (LayerKind::Cpc, _) => all(&layout.c_cpc),
        (LayerKind::Lpc, _) => all(&layout.c_lpc),
        (LayerKind::Private, UserRef::Sat(k)) => vec![(layout.alpha_sat[k], 1.0)],
        (LayerKind::Private, UserRef::Cell(k)) => vec![(layout.alpha_cell[k], 1.0)],
    }
}

/// Compiles the subproblem around the coefficients of the previous iterate.
pub fn build(
    plan: &LayerPlan,
    coeffs: &WmmseCoefficients,
    ports: (usize, usize),
    budgets: Budgets,
    noise: f64,
    opts: &BuildOptions,
) -> Result<Subproblem> {
    if coeffs.events.len() != plan.events.len() {
        return Err(Error::Dimension(format!(
            "{} coefficient sets for {} events",
            coeffs.events.len(),
            plan.events.len()
        )));
    }
    if !(budgets.sat >= 0.0 && budgets.bs >= 0.0) {
        return Err(Error::Config("power budgets must be non-negative".into()));
    }
    let layout = VariableLayout::new(plan, ports, budgets);
    let mut prog = ConicProgram::new(layout.len(), Sense::Maximize);
    prog.objective[layout.r_min] = 1.0;
    let a = opts.scaling.mse_factor();

    for (i, (ev, co)) in plan.events.iter().zip(&coeffs.events).enumerate() {
        let t = layout.slack[i];
        let terms = event_terms(ev, co, &layout, noise)?;
        let mut soc = vec![Affine::constant(1.0).plus(t, 1.0), Affine::constant(1.0).plus(t, -1.0)];
        soc.extend(terms.cone.into_iter().map(|mut e| {
            e.constant *= 2.0;
            e.terms.iter_mut().for_each(|(_, v)| *v *= 2.0);
            e
        }));
        prog.add_soc(&soc);
        let mut row = Affine::constant(a * (1.0 - terms.constant) + co.nu_bar).plus(t, -a);
        row.terms.extend(event_rhs(ev, &layout).into_iter().map(|(v, c)| (v, -c)));
        prog.add_nonneg(&[row]);
    }

    let mut rows = Vec::new();
    for k in 0..layout.alpha_sat.len() {
        let mut row = Affine::var(layout.alpha_sat[k], 1.0).plus(layout.r_min, -1.0);
        for vars in [&layout.c_spc, &layout.c_cpc] {
            if let Some(&v) = vars.get(k) {
                row = row.plus(v, 1.0);
            }
        }
        rows.push(row);
    }
    for k in 0..layout.alpha_cell.len() {
        let mut row = Affine::var(layout.alpha_cell[k], 1.0).plus(layout.r_min, -1.0);
        if let Some(&v) = layout.c_lpc.get(k) {
            row = row.plus(v, 1.0);
        }
        rows.push(row);
    }
    for &v in layout.c_spc.iter().chain(&layout.c_cpc).chain(&layout.c_lpc) {
        rows.push(Affine::var(v, 1.0));
    }
    for &v in layout.alpha_sat.iter().chain(&layout.alpha_cell) {
        rows.push(Affine::var(v, 1.0).plus_constant(-opts.alpha_floor));
    }
    prog.add_nonneg(&rows);

    for (tx, budget) in [(Tx::Sat, budgets.sat), (Tx::Bs, budgets.bs)] {
        let vars: Vec<usize> = layout
            .blocks
            .iter()
            .filter(|b| b.column.tx() == tx)
            .flat_map(|b| b.variables())
            .collect();
        if vars.is_empty() {
            continue;
        }
        let mut soc = vec![Affine::constant(budget.sqrt())];
        soc.extend(vars.into_iter().map(|v| Affine::var(v, 1.0)));
        prog.add_soc(&soc);
    }
    prog.validate()?;
    Ok(Subproblem { program: prog, layout })
}

/// Surrogate rate bound minus the right-hand side of every event, evaluated
/// with the complex coefficient expressions rather than the cone program.
/// Non-negative entries mean the constraint holds.
pub fn event_margins(
    plan: &LayerPlan,
    coeffs: &WmmseCoefficients,
    sol: &PrecoderSolution,
    noise: f64,
    scaling: SurrogateScaling,
) -> Vec<f64> {
    plan.events
        .iter()
        .zip(&coeffs.events)
        .map(|(ev, co)| {
            let bound = scaling.rate_bound(co.weighted_mse(ev, sol, noise), co.nu_bar);
            let rhs = match (ev.layer, ev.user) {
                (LayerKind::Spc, _) => sol.c_spc.iter().sum(),
                (LayerKind::Cpc, _) => sol.c_cpc.iter().sum(),
                (LayerKind::Lpc, _) => sol.c_lpc.iter().sum(),
                (LayerKind::Private, UserRef::Sat(k)) => sol.alpha_sat[k],
                (LayerKind::Private, UserRef::Cell(k)) => sol.alpha_cell[k],
            };
            bound - rhs
        })
        .collect()
}

/// Smallest user total implied by the allocation variables of `sol`.
pub fn implied_min_rate(plan: &LayerPlan, sol: &PrecoderSolution) -> f64 {
    let spc = plan.has_layer(LayerKind::Spc);
    let cpc = plan.has_layer(LayerKind::Cpc);
    let lpc = plan.has_layer(LayerKind::Lpc);
    let sat = (0..plan.sat_users).map(|k| {
        sol.alpha_sat[k] + if spc { sol.c_spc[k] } else { 0.0 } + if cpc { sol.c_cpc[k] } else { 0.0 }
    });
    let cell = (0..plan.cell_users).map(|k| sol.alpha_cell[k] + if lpc { sol.c_lpc[k] } else { 0.0 });
    sat.chain(cell).fold(f64::INFINITY, f64::min)
}
