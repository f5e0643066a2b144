//! Per-realisation SINRs of the multi-layer decoding order.
//!
//! The named functions spell out the expressions for the proposed scheme
//! directly in terms of channel vectors; [`EventPowers::of`] evaluates any
//! [`DecodeEvent`] of a [`super::LayerPlan`] and is what the optimiser uses.

use crate::channel::ChannelEnsemble;
use crate::numeric::{inner, CVector};

use super::plan::DecodeEvent;
use super::solution::PrecoderSolution;

fn gain(ch: &CVector, w: &CVector) -> f64 {
    inner(ch, w).norm_sqr()
}

fn sum_gain<'a, I: IntoIterator<Item = &'a CVector>>(ch: &CVector, ws: I) -> f64 {
    ws.into_iter().map(|w| gain(ch, w)).sum()
}

/// Received desired power and interference-plus-noise of one decoding event
/// in one sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EventPowers {
    pub signal: f64,
    pub interference: f64,
}

impl EventPowers {
    pub fn of(ens: &ChannelEnsemble, event: &DecodeEvent, sol: &PrecoderSolution, sample: usize, noise: f64) -> Self {
        let received = |col: super::Column| {
            event
                .channel(ens, col.tx(), sample)
                .map_or(0.0, |ch| gain(ch, sol.column(col)))
        };
        let signal = received(event.desired);
        let interference = noise + event.interference.iter().map(|&c| received(c)).sum::<f64>();
        Self { signal, interference }
    }

    /// `T = signal + interference + noise`.
    pub fn total(&self) -> f64 {
        self.signal + self.interference
    }

    pub fn sinr(&self) -> f64 {
        self.signal / self.interference
    }

    pub fn rate(&self) -> f64 {
        self.sinr().ln_1p() / std::f64::consts::LN_2
    }
}

/// Super-common stream at a satellite user; everything else is interference.
pub fn sinr_spc_sat(f: &CVector, sol: &PrecoderSolution, noise: f64) -> f64 {
    gain(f, &sol.w_spc) / (gain(f, &sol.w_cpc) + sum_gain(f, &sol.w_private) + noise)
}

/// Super-common stream at a cellular user: all remaining satellite and
/// base-station streams interfere.
pub fn sinr_spc_cell(z: &CVector, h: &CVector, sol: &PrecoderSolution, noise: f64) -> f64 {
    let terrestrial = gain(h, &sol.p_lpc) + sum_gain(h, &sol.p_private) + noise;
    gain(z, &sol.w_spc) / (gain(z, &sol.w_cpc) + sum_gain(z, &sol.w_private) + terrestrial)
}

/// Satellite common stream after the super-common stream has been removed.
pub fn sinr_cpc_sat(f: &CVector, sol: &PrecoderSolution, noise: f64) -> f64 {
    gain(f, &sol.w_cpc) / (sum_gain(f, &sol.w_private) + noise)
}

/// Base-station common stream after the super-common stream has been
/// removed; residual satellite streams remain as interference.
pub fn sinr_lpc_cell(z: &CVector, h: &CVector, sol: &PrecoderSolution, noise: f64) -> f64 {
    let sat = gain(z, &sol.w_cpc) + sum_gain(z, &sol.w_private);
    gain(h, &sol.p_lpc) / (sat + sum_gain(h, &sol.p_private) + noise)
}

/// Private stream `k` at satellite user `k` after both common streams.
pub fn sinr_private_sat(f: &CVector, sol: &PrecoderSolution, k: usize, noise: f64) -> f64 {
    let others: f64 = sol
        .w_private
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != k)
        .map(|(_, w)| gain(f, w))
        .sum();
    gain(f, &sol.w_private[k]) / (others + noise)
}

/// Private stream `k` at cellular user `k` after its common streams.
pub fn sinr_private_cell(z: &CVector, h: &CVector, sol: &PrecoderSolution, k: usize, noise: f64) -> f64 {
    let sat = gain(z, &sol.w_cpc) + sum_gain(z, &sol.w_private);
    let others: f64 = sol
        .p_private
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != k)
        .map(|(_, p)| gain(h, p))
        .sum();
    gain(h, &sol.p_private[k]) / (sat + others + noise)
}
