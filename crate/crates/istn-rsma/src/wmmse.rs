//! MMSE receivers, MSE weights and the sample-averaged coefficients of the
//! augmented weighted-MSE surrogate.
//!
//! For one decoding event with desired gain `a = c^H w` and total received
//! power `T`, the MMSE equaliser is `q = a^* / T`, its error is
//! `eps = 1 - |a|^2 / T`, and with weight `u = 1 / eps` the augmented WMSE
//! `u eps - log2 u` equals one minus the achievable rate.

use std::f64::consts::LN_2;

use log::debug;

use crate::channel::ChannelEnsemble;
use crate::numeric::{inner, CMatrix, CVector, CompensatedComplexSum, CompensatedSum, C64};
use crate::signal::{DecodeEvent, EventPowers, LayerPlan, PrecoderSolution, Tx};
use crate::{Error, Result};

/// Upper clamp on MSE weights; reached only when a stream is decoded almost
/// error free.
pub const MAX_WEIGHT: f64 = 1e12;

/// How the weighted-MSE surrogate is turned into a rate lower bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SurrogateScaling {
    /// `(1 - u eps) / ln 2 + log2 u`: a tangent lower bound of the rate in
    /// bits, which makes every outer iteration monotone.
    #[default]
    Tight,
    /// `1 - u eps + log2 u`: matches the rate at the expansion point but can
    /// overshoot it elsewhere.
    Unit,
}

impl SurrogateScaling {
    /// Rate bound from the sample-averaged weighted MSE `avg(u eps)` and
    /// `avg(log2 u)`.
    pub fn rate_bound(self, weighted_mse: f64, nu_bar: f64) -> f64 {
        match self {
            Self::Tight => (1.0 - weighted_mse) / LN_2 + nu_bar,
            Self::Unit => 1.0 - weighted_mse + nu_bar,
        }
    }

    /// Factor multiplying the weighted MSE in the bound.
    pub fn mse_factor(self) -> f64 {
        match self {
            Self::Tight => 1.0 / LN_2,
            Self::Unit => 1.0,
        }
    }
}

/// `q = (c^H w)^* / T`.
pub fn mmse_equalizer(channel: &CVector, precoder: &CVector, total: f64) -> Result<C64> {
    if !(total > 0.0 && total.is_finite()) {
        return Err(Error::DegenerateMmse(total, "equaliser".into()));
    }
    Ok(inner(channel, precoder).conj() / total)
}

/// `eps = 1 - |c^H w|^2 / T`.
pub fn mmse(channel: &CVector, precoder: &CVector, total: f64) -> Result<f64> {
    if !(total > 0.0 && total.is_finite()) {
        return Err(Error::DegenerateMmse(total, "mse".into()));
    }
    Ok(1.0 - inner(channel, precoder).norm_sqr() / total)
}

/// MSE for an arbitrary equaliser `q`:
/// `|q|^2 T - 2 Re{q c^H w} + 1`.
pub fn mse_with_equalizer(q: C64, channel: &CVector, precoder: &CVector, total: f64) -> f64 {
    q.norm_sqr() * total - 2.0 * (q * inner(channel, precoder)).re + 1.0
}

/// `|xi* - (1 - log2(1 + gamma))|` for one link with the given desired and
/// interference-plus-noise powers, where `xi* = 1 + log2(eps)`.
pub fn rate_wmse_identity_check(signal: f64, interference: f64) -> f64 {
    let total = signal + interference;
    let eps = interference / total;
    let xi = 1.0 + eps.log2();
    let rate = (signal / interference).ln_1p() / LN_2;
    (xi - (1.0 - rate)).abs()
}

/// Equaliser and weight of one event in one sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EqualizerState {
    pub q: C64,
    pub u: f64,
    pub total: f64,
    pub clamped: bool,
}

/// Per-event, per-sample equalisers and weights at `sol`. Deterministic
/// events (no sampled channel) carry a single entry.
pub fn equalizer_states(
    ens: &ChannelEnsemble,
    plan: &LayerPlan,
    sol: &PrecoderSolution,
    noise: f64,
) -> Result<Vec<Vec<EqualizerState>>> {
    plan.events
        .iter()
        .map(|e| {
            let samples = if e.is_deterministic() { 1 } else { ens.samples };
            (0..samples)
                .map(|s| {
                    let p = EventPowers::of(ens, e, sol, s, noise);
                    let total = p.total();
                    let ch = e
                        .channel(ens, e.desired.tx(), s)
                        .ok_or_else(|| Error::Dimension("desired stream not heard".into()))?;
                    let q = mmse_equalizer(ch, sol.column(e.desired), total)?;
                    // eps = I / T, computed without cancellation.
                    let eps = p.interference / total;
                    let raw = 1.0 / eps;
                    Ok(EqualizerState {
                        q,
                        u: raw.min(MAX_WEIGHT),
                        total,
                        clamped: raw > MAX_WEIGHT,
                    })
                })
                .collect()
        })
        .collect()
}

/// Sample-averaged surrogate coefficients of one decoding event.
#[derive(Debug, Clone, PartialEq)]
pub struct EventCoefficients {
    /// `avg(u |q|^2)`.
    pub delta_bar: f64,
    /// `avg(u)`.
    pub u_bar: f64,
    /// `avg(log2 u)`.
    pub nu_bar: f64,
    /// `avg(u |q|^2 c c^H)` over the satellite channel, if the event hears
    /// the satellite.
    pub psi_sat: Option<CMatrix>,
    /// Same over the base-station channel.
    pub psi_bs: Option<CMatrix>,
    /// `avg(u q^* c)` over the desired stream's channel.
    pub omega_bar: CVector,
    /// Rows `sqrt(u / S) q c^H` of the desired stream, one per sample, so
    /// that `avg(u |q c^H w - 1|^2) = ||R w - r||^2` with `r = sqrt(u / S)`.
    pub desired_rows: CMatrix,
    pub desired_offsets: CVector,
}

impl EventCoefficients {
    pub fn psi(&self, tx: Tx) -> Option<&CMatrix> {
        match tx {
            Tx::Sat => self.psi_sat.as_ref(),
            Tx::Bs => self.psi_bs.as_ref(),
        }
    }

    /// Sample-average weighted MSE `avg(u eps)` at `sol` computed from the
    /// coefficients: `sum_j w_j^H Psi w_j - 2 Re{omega^H w_d} + delta sigma^2
    /// + u`.
    pub fn weighted_mse(&self, event: &DecodeEvent, sol: &PrecoderSolution, noise: f64) -> f64 {
        let mut acc = CompensatedSum::new();
        for col in event.columns() {
            if let Some(psi) = self.psi(col.tx()) {
                let w = sol.column(col);
                acc.add(inner(w, &(psi * w)).re);
            }
        }
        acc.add(-2.0 * inner(&self.omega_bar, sol.column(event.desired)).re);
        acc.add(self.delta_bar * noise);
        acc.add(self.u_bar);
        acc.value()
    }

    /// `avg(u eps - log2 u)` from the coefficients.
    pub fn augmented_wmse(&self, event: &DecodeEvent, sol: &PrecoderSolution, noise: f64) -> f64 {
        self.weighted_mse(event, sol, noise) - self.nu_bar
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WmmseCoefficients {
    /// One entry per event of the plan, in plan order.
    pub events: Vec<EventCoefficients>,
    /// Number of (event, sample) weights that hit [`MAX_WEIGHT`].
    pub clamped: usize,
}

struct HermitianAccumulator {
    n: usize,
    entries: Vec<CompensatedComplexSum>,
}

impl HermitianAccumulator {
    fn new(n: usize) -> Self {
        Self {
            n,
            entries: vec![CompensatedComplexSum::default(); n * (n + 1) / 2],
        }
    }

    fn add_outer(&mut self, weight: f64, c: &CVector) {
        let mut idx = 0;
        for i in 0..self.n {
            for j in i..self.n {
                self.entries[idx].add(c[i] * c[j].conj() * weight);
                idx += 1;
            }
        }
    }

    fn finish(&self, scale: f64) -> CMatrix {
        let mut m = CMatrix::zeros(self.n, self.n);
        let mut idx = 0;
        for i in 0..self.n {
            for j in i..self.n {
                let v = self.entries[idx].value() * scale;
                if i == j {
                    m[(i, i)] = C64::new(v.re, 0.0);
                } else {
                    m[(i, j)] = v;
                    m[(j, i)] = v.conj();
                }
                idx += 1;
            }
        }
        m
    }
}

fn event_coefficients(ens: &ChannelEnsemble, e: &DecodeEvent, states: &[EqualizerState]) -> EventCoefficients {
    let samples = states.len();
    let inv = 1.0 / samples as f64;
    let hears = |tx: Tx| e.columns().any(|c| c.tx() == tx);
    let ports = |tx: Tx| match tx {
        Tx::Sat => ens.sat_ports,
        Tx::Bs => ens.bs_ports,
    };
    let mut psi_sat = hears(Tx::Sat).then(|| HermitianAccumulator::new(ens.sat_ports));
    let mut psi_bs = hears(Tx::Bs).then(|| HermitianAccumulator::new(ens.bs_ports));
    let desired_tx = e.desired.tx();
    let n_des = ports(desired_tx);
    let mut omega = vec![CompensatedComplexSum::default(); n_des];
    let (mut delta, mut u_sum, mut nu) = (CompensatedSum::new(), CompensatedSum::new(), CompensatedSum::new());
    let mut rows = CMatrix::zeros(samples, n_des);
    let mut offsets = CVector::zeros(samples);

    for (s, st) in states.iter().enumerate() {
        let d = st.u * st.q.norm_sqr();
        delta.add(d);
        u_sum.add(st.u);
        nu.add(st.u.log2());
        for (tx, acc) in [(Tx::Sat, &mut psi_sat), (Tx::Bs, &mut psi_bs)] {
            if let (Some(acc), Some(ch)) = (acc.as_mut(), e.channel(ens, tx, s)) {
                acc.add_outer(d, ch);
            }
        }
        let ch = e.channel(ens, desired_tx, s).expect("desired stream is heard");
        let wq = st.q.conj() * st.u;
        for (o, c) in omega.iter_mut().zip(ch.iter()) {
            o.add(wq * c);
        }
        let root = (st.u * inv).sqrt();
        for (j, c) in ch.iter().enumerate() {
            rows[(s, j)] = st.q * c.conj() * root;
        }
        offsets[s] = C64::new(root, 0.0);
    }

    EventCoefficients {
        delta_bar: delta.value() * inv,
        u_bar: u_sum.value() * inv,
        nu_bar: nu.value() * inv,
        psi_sat: psi_sat.map(|a| a.finish(inv)),
        psi_bs: psi_bs.map(|a| a.finish(inv)),
        omega_bar: CVector::from_iterator(n_des, omega.iter().map(|o| o.value() * inv)),
        desired_rows: rows,
        desired_offsets: offsets,
    }
}

/// Coefficients of the surrogate at the previous iterate `sol`.
pub fn step1_coefficients(
    ens: &ChannelEnsemble,
    plan: &LayerPlan,
    sol: &PrecoderSolution,
    noise: f64,
) -> Result<WmmseCoefficients> {
    let states = equalizer_states(ens, plan, sol, noise)?;
    let clamped = states.iter().flatten().filter(|s| s.clamped).count();
    if clamped > 0 {
        debug!("{clamped} MSE weights clamped at {MAX_WEIGHT:e}");
    }
    let events = plan
        .events
        .iter()
        .zip(&states)
        .map(|(e, st)| event_coefficients(ens, e, st))
        .collect();
    Ok(WmmseCoefficients { events, clamped })
}

/// `avg(u eps(W; q) - log2 u)` evaluated sample by sample with fixed
/// equalisers and weights.
pub fn sampled_augmented_wmse(
    ens: &ChannelEnsemble,
    event: &DecodeEvent,
    states: &[EqualizerState],
    sol: &PrecoderSolution,
    noise: f64,
) -> f64 {
    let mut acc = CompensatedSum::new();
    for (s, st) in states.iter().enumerate() {
        let p = EventPowers::of(ens, event, sol, s, noise);
        let ch = event.channel(ens, event.desired.tx(), s).expect("desired stream is heard");
        let eps = mse_with_equalizer(st.q, ch, sol.column(event.desired), p.total());
        acc.add(st.u * eps - st.u.log2());
    }
    acc.value() / states.len() as f64
}
