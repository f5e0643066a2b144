//! Precoder solutions, decoding plans and rate evaluation.

mod plan;
mod rates;
mod sinr;
mod solution;

pub use plan::{Column, DecodeEvent, LayerKind, LayerPlan, SchemeKind, Tx, UserRef};
pub use rates::{ergodic_rates, event_rates, validate_allocation, EventRate, RateReport, UserRates};
pub use sinr::{
    sinr_cpc_sat, sinr_lpc_cell, sinr_private_cell, sinr_private_sat, sinr_spc_cell, sinr_spc_sat,
    EventPowers,
};
pub use solution::PrecoderSolution;
