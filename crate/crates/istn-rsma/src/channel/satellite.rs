use std::f64::consts::PI;

use nalgebra::{DMatrix, Matrix2};
use rand::Rng;

use super::polarization::{polarization_vector, rotation, Polarization};
use super::{complex_gaussian, terrestrial::cross_polar_mask};
use crate::numeric::{db_to_linear, CVector, C64};

const BOLTZMANN: f64 = 1.380_649e-23;
const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Uniform planar array of dual-polarized elements, `nx` by `ny`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ArrayConfig {
    pub nx: usize,
    pub ny: usize,
}

impl ArrayConfig {
    pub fn elements(&self) -> usize {
        self.nx * self.ny
    }

    /// Number of transmit ports (two polarizations per element).
    pub fn ports(&self) -> usize {
        2 * self.elements()
    }
}

/// Angles of departure from the satellite towards one ground user.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SatGeometry {
    /// Off-nadir angle, radians.
    pub off_nadir: f64,
    /// Azimuth angle, radians.
    pub azimuth: f64,
    /// Slant range, metres.
    pub distance: f64,
}

impl SatGeometry {
    /// Flat-Earth geometry for a ground point at horizontal offset
    /// `(x, y)` metres from the sub-satellite point.
    pub fn from_ground_offset(x: f64, y: f64, altitude: f64) -> Self {
        let ground = x.hypot(y);
        Self {
            off_nadir: ground.atan2(altitude),
            azimuth: y.atan2(x),
            distance: ground.hypot(altitude),
        }
    }
}

/// Array response `a_x (kron) a_y` for half-wavelength element spacing.
pub fn steering_vector(array: ArrayConfig, off_nadir: f64, azimuth: f64) -> CVector {
    let sin_phi = off_nadir.sin();
    let ux = sin_phi * azimuth.cos();
    let uy = sin_phi * azimuth.sin();
    CVector::from_fn(array.elements(), |idx, _| {
        let m = (idx / array.ny) as f64;
        let n = (idx % array.ny) as f64;
        C64::from_polar(1.0, -PI * (m * ux + n * uy))
    })
}

/// Free-space style link budget normalised by the receiver noise power.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkBudget {
    pub tx_gain_dbi: f64,
    pub rx_gain_dbi: f64,
    pub carrier_hz: f64,
    pub bandwidth_hz: f64,
    pub noise_temperature_k: f64,
}

impl LinkBudget {
    /// Large-scale power gain over noise at `distance` metres with path-loss
    /// exponent `exponent`.
    pub fn gain(&self, distance: f64, exponent: f64) -> f64 {
        link_budget(
            db_to_linear(self.tx_gain_dbi),
            db_to_linear(self.rx_gain_dbi),
            self.carrier_hz,
            self.bandwidth_hz,
            self.noise_temperature_k,
            distance,
            exponent,
        )
    }
}

/// `G_tx G_rx / (k_B T B) * (c / (4 pi f_c))^2 * d^-exponent`, linear gains.
pub fn link_budget(
    tx_gain: f64,
    rx_gain: f64,
    carrier_hz: f64,
    bandwidth_hz: f64,
    noise_temperature_k: f64,
    distance: f64,
    exponent: f64,
) -> f64 {
    let wavelength_term = SPEED_OF_LIGHT / (4.0 * PI * carrier_hz);
    tx_gain * rx_gain / (BOLTZMANN * noise_temperature_k * bandwidth_hz)
        * wavelength_term
        * wavelength_term
        * distance.powf(-exponent)
}

/// Statistical description of one satellite-to-ground link. The geometry,
/// LOS phase and Faraday rotation are fixed; only the NLOS term fades.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SatLink {
    pub geometry: SatGeometry,
    /// Large-scale gain over noise.
    pub beta: f64,
    /// Rician factor (linear).
    pub kappa: f64,
    /// Cross-polar fraction of the LOS component.
    pub chi_los: f64,
    /// Cross-polar fraction of the NLOS component.
    pub chi_nlos: f64,
    pub los_phase: f64,
    pub faraday: f64,
}

impl SatLink {
    /// Polarimetric 2x2 channel for a given NLOS fading matrix.
    pub fn channel_with(&self, fading: &Matrix2<C64>) -> Matrix2<C64> {
        satellite_channel(
            self.beta,
            self.kappa,
            self.chi_los,
            self.chi_nlos,
            self.los_phase,
            self.faraday,
            fading,
        )
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Matrix2<C64> {
        let fading = Matrix2::from_fn(|_, _| complex_gaussian(rng, 1.0));
        self.channel_with(&fading)
    }

    pub fn mean_channel(&self) -> Matrix2<C64> {
        self.channel_with(&Matrix2::zeros())
    }
}

/// Dual-polarized Rician satellite channel
/// `R(zeta) sqrt(beta/(kappa+1)) (sqrt(kappa) e^{j phi0} M_los + M_nlos)`.
pub fn satellite_channel(
    beta: f64,
    kappa: f64,
    chi_los: f64,
    chi_nlos: f64,
    los_phase: f64,
    faraday: f64,
    fading: &Matrix2<C64>,
) -> Matrix2<C64> {
    let los = cross_polar_mask(chi_los) * C64::from_polar(kappa.sqrt(), los_phase);
    let nlos = cross_polar_mask(chi_nlos).component_mul(fading);
    rotation(faraday) * (los + nlos) * C64::new((beta / (kappa + 1.0)).sqrt(), 0.0)
}

/// Full array channel `a (kron) G`, a `2N x 2` matrix.
pub fn full_channel(steering: &CVector, polar: &Matrix2<C64>) -> DMatrix<C64> {
    let n = steering.len();
    DMatrix::from_fn(2 * n, 2, |r, c| steering[r / 2] * polar[(r % 2, c)])
}

/// Effective channel seen by a receiver with polarization `rx` when the
/// transmitter excites each element in `tx_basis`:
/// `vec(((I_N kron rho_rx^H) F [rho_1 rho_2])^T)`.
pub fn effective_channel(full: &DMatrix<C64>, rx: Polarization, tx_basis: [Polarization; 2]) -> CVector {
    let rho_rx = polarization_vector(rx);
    let tx = tx_basis.map(polarization_vector);
    let n = full.nrows() / 2;
    CVector::from_fn(2 * n, |idx, _| {
        let element = idx / 2;
        let t = &tx[idx % 2];
        let mut acc = C64::new(0.0, 0.0);
        for r in 0..2 {
            let row = rho_rx[r].conj();
            for c in 0..2 {
                acc += row * full[(2 * element + r, c)] * t[c];
            }
        }
        acc
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::xpd_to_chi;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn steering_entries_have_unit_modulus_and_boresight_is_flat() {
        let array = ArrayConfig { nx: 3, ny: 4 };
        let a = steering_vector(array, 0.3, 1.1);
        assert_eq!(a.len(), 12);
        assert!(a.iter().all(|v| (v.norm() - 1.0).abs() < 1e-14));
        let flat = steering_vector(array, 0.0, 0.7);
        assert!(flat.iter().all(|v| (v - C64::new(1.0, 0.0)).norm() < 1e-14));
    }

    #[test]
    fn steering_matches_kronecker_of_axis_responses() {
        let array = ArrayConfig { nx: 2, ny: 3 };
        let (phi, theta) = (0.21_f64, -0.8_f64);
        let ax: Vec<C64> = (0..2)
            .map(|m| C64::from_polar(1.0, -PI * m as f64 * phi.sin() * theta.cos()))
            .collect();
        let ay: Vec<C64> = (0..3)
            .map(|n| C64::from_polar(1.0, -PI * n as f64 * phi.sin() * theta.sin()))
            .collect();
        let a = steering_vector(array, phi, theta);
        for m in 0..2 {
            for n in 0..3 {
                assert!((a[m * 3 + n] - ax[m] * ay[n]).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn satellite_budget_at_530_km_is_about_minus_ten_db() {
        let budget = LinkBudget {
            tx_gain_dbi: 6.0,
            rx_gain_dbi: 0.0,
            carrier_hz: 2e9,
            bandwidth_hz: 5e6,
            noise_temperature_k: 290.0,
        };
        // Hand calculation: 3.981 * (c / (4 pi 2e9 530e3))^2 / (k 290 5e6).
        let fspl = (SPEED_OF_LIGHT / (4.0 * PI * 2e9 * 530e3)).powi(2);
        let expected = 10f64.powf(0.6) * fspl / (BOLTZMANN * 290.0 * 5e6);
        let beta = budget.gain(530e3, 2.0);
        assert!((beta / expected - 1.0).abs() < 1e-12);
        assert!((beta - 0.1).abs() < 0.01, "{beta}");
    }

    #[test]
    fn los_only_channel_has_expected_power() {
        let link = SatLink {
            geometry: SatGeometry::from_ground_offset(0.0, 0.0, 530e3),
            beta: 0.2,
            kappa: 1e12,
            chi_los: xpd_to_chi(15.0),
            chi_nlos: xpd_to_chi(5.0),
            los_phase: 0.4,
            faraday: 0.0,
        };
        let g = link.mean_channel();
        // Frobenius power of M_los is 2, scaled by beta kappa / (kappa + 1).
        assert!((g.norm_squared() - 0.4).abs() < 1e-10);
    }

    proptest! {
        #[test]
        fn effective_channel_has_two_ports_per_element(seed in 0u64..500, nx in 1usize..4, ny in 1usize..4) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let array = ArrayConfig { nx, ny };
            let a = steering_vector(array, rng.gen_range(0.0..0.2), rng.gen_range(0.0..6.0));
            let g = Matrix2::from_fn(|_, _| complex_gaussian(&mut rng, 1.0));
            let f = effective_channel(&full_channel(&a, &g), Polarization::Rhcp, Polarization::circular_basis());
            prop_assert_eq!(f.len(), array.ports());
            prop_assert!(f.iter().all(|v| v.re.is_finite() && v.im.is_finite()));
        }
    }
}
