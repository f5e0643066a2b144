//! Robust precoder design for integrated satellite-terrestrial networks that
//! reuse spectrum across a dual-polarized multibeam satellite and a
//! dual-polarized terrestrial base station.
//!
//! The crate is organised bottom-up:
//!
//! * [`channel`] draws geometry, polarimetric satellite channels, terrestrial
//!   channels and the sample ensembles used for sample-average optimisation.
//! * [`signal`] holds precoder solutions, decoding plans, SINR and ergodic
//!   rate evaluation.
//! * [`wmmse`] computes MMSE equalisers, weights and the sample-averaged
//!   surrogate coefficients.
//! * [`subproblem`] turns those coefficients into a second-order cone program.
//! * [`solver`] is a dense primal-dual interior-point method for that program.
//! * [`schemes`] runs the alternating optimisation for the proposed
//!   multi-layer scheme and the baselines.
//! * [`harness`] drives Monte-Carlo sweeps and writes CSV / gnuplot output.

pub mod channel;
pub mod error;
pub mod harness;
pub mod numeric;
pub mod schemes;
pub mod signal;
pub mod solver;
pub mod subproblem;
pub mod wmmse;

pub use error::{Error, Result};
pub use numeric::C64;
