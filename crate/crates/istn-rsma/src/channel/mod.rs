//! Geometry, polarimetric channel models and sample ensembles.

mod ensemble;
mod io;
mod polarization;
mod satellite;
mod scenario;
mod terrestrial;

pub use ensemble::{build_ensemble, CellUserChannels, ChannelEnsemble, PolarPair, SatUserChannels};
pub use io::{read_ensemble_binary, write_ensemble_binary, write_ensemble_csv};
pub use polarization::{polarization_vector, rotation, xpd_to_chi, Polarization};
pub use satellite::{
    effective_channel, full_channel, link_budget, satellite_channel, steering_vector,
    ArrayConfig, LinkBudget, SatGeometry, SatLink,
};
pub use scenario::{draw_scenario, CellUser, PhysicalParams, SatUser, Scenario};
pub use terrestrial::{cross_polar_mask, terrestrial_channel, TerrestrialChannel};

use rand::Rng;
use rand_distr::StandardNormal;

use crate::numeric::C64;

/// One draw from the circularly-symmetric complex Gaussian CN(0, variance).
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R, variance: f64) -> C64 {
    let scale = (variance / 2.0).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re * scale, im * scale)
}
