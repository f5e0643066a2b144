use rand::Rng;

use super::polarization::Polarization;
use super::satellite::{effective_channel, full_channel, steering_vector, SatLink};
use super::scenario::Scenario;
use crate::numeric::CVector;
use crate::{Error, Result};

/// Effective channels seen through both receive chains of one polarization
/// family, indexed by [`Polarization::port`].
#[derive(Debug, Clone, PartialEq)]
pub struct PolarPair(pub [CVector; 2]);

impl PolarPair {
    pub fn get(&self, pol: Polarization) -> &CVector {
        &self.0[pol.port()]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SatUserChannels {
    pub pol: Polarization,
    /// One entry per sample.
    pub f: Vec<PolarPair>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellUserChannels {
    pub pol: Polarization,
    /// Satellite interference channel, one entry per sample.
    pub z: Vec<PolarPair>,
    /// Terrestrial channel, identical across samples.
    pub h: PolarPair,
}

/// `S` joint realisations of all effective channels for a fixed geometry.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelEnsemble {
    pub sat_ports: usize,
    pub bs_ports: usize,
    pub samples: usize,
    pub sat_users: Vec<SatUserChannels>,
    pub cell_users: Vec<CellUserChannels>,
}

impl ChannelEnsemble {
    /// Checks that every vector has the advertised length and every user has
    /// exactly `samples` realisations.
    pub fn validate(&self) -> Result<()> {
        let bad = |what: String| Err(Error::Dimension(what));
        if self.samples == 0 {
            return bad("ensemble has no samples".into());
        }
        for (k, u) in self.sat_users.iter().enumerate() {
            if !u.pol.is_circular() || u.f.len() != self.samples {
                return bad(format!("satellite user {k}"));
            }
            if u.f.iter().any(|p| p.0.iter().any(|v| v.len() != self.sat_ports)) {
                return bad(format!("satellite user {k} channel length"));
            }
        }
        for (k, u) in self.cell_users.iter().enumerate() {
            if u.pol.is_circular() || u.z.len() != self.samples {
                return bad(format!("cellular user {k}"));
            }
            if u.z.iter().any(|p| p.0.iter().any(|v| v.len() != self.sat_ports))
                || u.h.0.iter().any(|v| v.len() != self.bs_ports)
            {
                return bad(format!("cellular user {k} channel length"));
            }
        }
        Ok(())
    }

    /// Own-polarization satellite channel of satellite user `k`, sample `s`.
    pub fn f(&self, k: usize, s: usize) -> &CVector {
        let u = &self.sat_users[k];
        u.f[s].get(u.pol)
    }

    /// Satellite interference channel at cellular user `k`, sample `s`.
    pub fn z(&self, k: usize, s: usize) -> &CVector {
        let u = &self.cell_users[k];
        u.z[s].get(u.pol)
    }

    /// Terrestrial channel of cellular user `k`.
    pub fn h(&self, k: usize) -> &CVector {
        let u = &self.cell_users[k];
        u.h.get(u.pol)
    }

    /// Same channels restricted to the first `count` samples.
    pub fn truncated(&self, count: usize) -> Self {
        let count = count.min(self.samples);
        let mut out = self.clone();
        out.samples = count;
        for u in &mut out.sat_users {
            u.f.truncate(count);
        }
        for u in &mut out.cell_users {
            u.z.truncate(count);
        }
        out
    }

    /// Cellular users dropped; the satellite part is unchanged.
    pub fn without_cell_users(&self) -> Self {
        Self {
            cell_users: Vec::new(),
            ..self.clone()
        }
    }
}

fn satellite_pair<R: Rng + ?Sized>(link: &SatLink, steering: &CVector, rng: &mut R) -> PolarPair {
    let full = full_channel(steering, &link.sample(rng));
    let basis = Polarization::circular_basis();
    PolarPair(basis.map(|rx| effective_channel(&full, rx, basis)))
}

/// Draw `samples` realisations of the NLOS fading for every satellite link
/// of `scenario`. Geometry, LOS phase, rotation and terrestrial channels stay
/// fixed.
pub fn build_ensemble<R: Rng + ?Sized>(scenario: &Scenario, samples: usize, rng: &mut R) -> Result<ChannelEnsemble> {
    if samples == 0 {
        return Err(Error::Config("ensemble needs at least one sample".into()));
    }
    let array = scenario.array;
    let sat_steering: Vec<CVector> = scenario
        .sat_users
        .iter()
        .map(|u| steering_vector(array, u.link.geometry.off_nadir, u.link.geometry.azimuth))
        .collect();
    let cell_steering: Vec<CVector> = scenario
        .cell_users
        .iter()
        .map(|u| steering_vector(array, u.sat_link.geometry.off_nadir, u.sat_link.geometry.azimuth))
        .collect();

    let mut sat_users: Vec<SatUserChannels> = scenario
        .sat_users
        .iter()
        .map(|u| SatUserChannels {
            pol: u.pol,
            f: Vec::with_capacity(samples),
        })
        .collect();
    let mut cell_users: Vec<CellUserChannels> = scenario
        .cell_users
        .iter()
        .map(|u| CellUserChannels {
            pol: u.pol,
            z: Vec::with_capacity(samples),
            h: PolarPair(Polarization::linear_basis().map(|rx| u.terrestrial.effective(rx))),
        })
        .collect();

    // Sample-major draw order keeps a prefix of a larger ensemble identical
    // to a smaller ensemble drawn from the same seed.
    for _ in 0..samples {
        for (k, u) in scenario.sat_users.iter().enumerate() {
            sat_users[k].f.push(satellite_pair(&u.link, &sat_steering[k], rng));
        }
        for (k, u) in scenario.cell_users.iter().enumerate() {
            cell_users[k].z.push(satellite_pair(&u.sat_link, &cell_steering[k], rng));
        }
    }

    Ok(ChannelEnsemble {
        sat_ports: scenario.sat_ports(),
        bs_ports: scenario.bs_ports(),
        samples,
        sat_users,
        cell_users,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{draw_scenario, PhysicalParams};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn prefix_of_larger_ensemble_matches_smaller_draw() {
        let params = PhysicalParams::default();
        let sc = draw_scenario(&params, 2, 2, &mut ChaCha8Rng::seed_from_u64(1));
        let big = build_ensemble(&sc, 20, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        let small = build_ensemble(&sc, 5, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        assert_eq!(big.truncated(5), small);
        big.validate().unwrap();
    }

    #[test]
    fn high_rician_factor_collapses_sample_spread() {
        let mut params = PhysicalParams::default();
        params.kappa_db = 120.0;
        let sc = draw_scenario(&params, 1, 1, &mut ChaCha8Rng::seed_from_u64(2));
        let ens = build_ensemble(&sc, 10, &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
        for s in 1..10 {
            assert!((ens.f(0, s) - ens.f(0, 0)).norm() < 1e-5 * ens.f(0, 0).norm());
        }
    }
}
