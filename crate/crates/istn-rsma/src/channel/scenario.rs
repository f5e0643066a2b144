use std::f64::consts::TAU;

use rand::Rng;

use super::polarization::{xpd_to_chi, Polarization};
use super::satellite::{ArrayConfig, LinkBudget, SatGeometry, SatLink};
use super::terrestrial::{terrestrial_channel, TerrestrialChannel};
use crate::numeric::db_to_linear;

/// Physical layer and deployment parameters of one network instance.
#[derive(Debug, Clone, PartialEq)]
pub struct PhysicalParams {
    pub array: ArrayConfig,
    pub bs_antennas: usize,
    pub altitude_m: f64,
    pub sat_radius_m: f64,
    pub bs_radius_m: f64,
    pub bs_height_m: f64,
    pub sat_budget: LinkBudget,
    pub bs_budget: LinkBudget,
    pub bs_pathloss_exponent: f64,
    pub kappa_db: f64,
    pub xpd_los_db: f64,
    pub xpd_nlos_db: f64,
    pub xpd_bs_db: f64,
}

impl Default for PhysicalParams {
    fn default() -> Self {
        let budget = LinkBudget {
            tx_gain_dbi: 6.0,
            rx_gain_dbi: 0.0,
            carrier_hz: 2e9,
            bandwidth_hz: 5e6,
            noise_temperature_k: 290.0,
        };
        Self {
            array: ArrayConfig { nx: 2, ny: 2 },
            bs_antennas: 2,
            altitude_m: 530e3,
            sat_radius_m: 50e3,
            bs_radius_m: 1e3,
            bs_height_m: 30.0,
            sat_budget: budget,
            bs_budget: budget,
            bs_pathloss_exponent: 4.0,
            kappa_db: 15.0,
            xpd_los_db: 15.0,
            xpd_nlos_db: 5.0,
            xpd_bs_db: 5.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SatUser {
    pub pol: Polarization,
    pub link: SatLink,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellUser {
    pub pol: Polarization,
    /// Interference link from the satellite.
    pub sat_link: SatLink,
    pub terrestrial: TerrestrialChannel,
}

/// One drawn deployment: user positions, fixed LOS phases and Faraday
/// rotations, and the terrestrial channels.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub array: ArrayConfig,
    pub bs_antennas: usize,
    pub sat_users: Vec<SatUser>,
    pub cell_users: Vec<CellUser>,
}

impl Scenario {
    pub fn sat_ports(&self) -> usize {
        self.array.ports()
    }

    pub fn bs_ports(&self) -> usize {
        2 * self.bs_antennas
    }
}

fn uniform_in_annulus<R: Rng + ?Sized>(rng: &mut R, inner: f64, outer: f64) -> (f64, f64) {
    let r = rng.gen_range(inner * inner..=outer * outer).sqrt();
    let angle = rng.gen_range(0.0..TAU);
    (r * angle.cos(), r * angle.sin())
}

/// Polarization of user `k` out of `count`: the first half gets the first
/// state of the family, the rest the second.
fn assigned_polarization(k: usize, count: usize, family: [Polarization; 2]) -> Polarization {
    if k < count.div_ceil(2) {
        family[0]
    } else {
        family[1]
    }
}

/// Draw satellite users uniformly over the satellite footprint outside the
/// cell (the base station sits at the footprint centre) and cellular users
/// uniformly over the cell.
pub fn draw_scenario<R: Rng + ?Sized>(
    params: &PhysicalParams,
    sat_users: usize,
    cell_users: usize,
    rng: &mut R,
) -> Scenario {
    let kappa = db_to_linear(params.kappa_db);
    let chi_los = xpd_to_chi(params.xpd_los_db);
    let chi_nlos = xpd_to_chi(params.xpd_nlos_db);
    let chi_bs = xpd_to_chi(params.xpd_bs_db);

    let sat_link = |rng: &mut R, x: f64, y: f64| {
        let geometry = SatGeometry::from_ground_offset(x, y, params.altitude_m);
        SatLink {
            geometry,
            beta: params.sat_budget.gain(geometry.distance, 2.0),
            kappa,
            chi_los,
            chi_nlos,
            los_phase: rng.gen_range(0.0..TAU),
            faraday: rng.gen_range(0.0..TAU),
        }
    };

    let sus = (0..sat_users)
        .map(|k| {
            let (x, y) = uniform_in_annulus(rng, params.bs_radius_m, params.sat_radius_m);
            SatUser {
                pol: assigned_polarization(k, sat_users, Polarization::circular_basis()),
                link: sat_link(rng, x, y),
            }
        })
        .collect();

    let cus = (0..cell_users)
        .map(|k| {
            let (x, y) = uniform_in_annulus(rng, 0.0, params.bs_radius_m);
            let link = sat_link(rng, x, y);
            let distance = x.hypot(y).hypot(params.bs_height_m);
            let beta = params.bs_budget.gain(distance, params.bs_pathloss_exponent);
            CellUser {
                pol: assigned_polarization(k, cell_users, Polarization::linear_basis()),
                sat_link: link,
                terrestrial: terrestrial_channel(params.bs_antennas, beta, chi_bs, rng),
            }
        })
        .collect();

    Scenario {
        array: params.array,
        bs_antennas: params.bs_antennas,
        sat_users: sus,
        cell_users: cus,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn users_land_in_their_regions_with_split_polarizations() {
        let params = PhysicalParams::default();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let sc = draw_scenario(&params, 4, 2, &mut rng);
        let pols: Vec<_> = sc.sat_users.iter().map(|u| u.pol).collect();
        assert_eq!(pols, [Polarization::Rhcp, Polarization::Rhcp, Polarization::Lhcp, Polarization::Lhcp]);
        assert_eq!(sc.cell_users[0].pol, Polarization::Vertical);
        assert_eq!(sc.cell_users[1].pol, Polarization::Horizontal);
        let max_off_nadir = (params.sat_radius_m / params.altitude_m).atan();
        for u in &sc.sat_users {
            assert!(u.link.geometry.off_nadir <= max_off_nadir + 1e-12);
            let ground = params.altitude_m * u.link.geometry.off_nadir.tan();
            assert!(ground >= params.bs_radius_m - 1e-6);
        }
        for u in &sc.cell_users {
            assert_eq!(u.terrestrial.antennas(), params.bs_antennas);
        }
    }
}
