use nalgebra::{DMatrix, Matrix2};
use rand::Rng;

use super::complex_gaussian;
use super::polarization::Polarization;
use super::satellite::effective_channel;
use crate::numeric::{CVector, C64};

/// Element-wise amplitude mask splitting power between co- and cross-polar
/// paths: `sqrt(1 - chi)` on the diagonal and `sqrt(chi)` off it.
pub fn cross_polar_mask(chi: f64) -> Matrix2<C64> {
    let co = C64::new((1.0 - chi).sqrt(), 0.0);
    let cross = C64::new(chi.sqrt(), 0.0);
    Matrix2::new(co, cross, cross, co)
}

/// Base-station to cellular-user channel, `2 Nt x 2`, drawn once per trial
/// and known perfectly at the base station.
#[derive(Debug, Clone, PartialEq)]
pub struct TerrestrialChannel {
    pub full: DMatrix<C64>,
}

impl TerrestrialChannel {
    pub fn antennas(&self) -> usize {
        self.full.nrows() / 2
    }

    pub fn effective(&self, rx: Polarization) -> CVector {
        effective_channel(&self.full, rx, Polarization::linear_basis())
    }
}

/// `(1_Nt kron mask(chi)) (.) H~` with `H~` i.i.d. CN(0, beta).
pub fn terrestrial_channel<R: Rng + ?Sized>(antennas: usize, beta: f64, chi: f64, rng: &mut R) -> TerrestrialChannel {
    let mask = cross_polar_mask(chi);
    let full = DMatrix::from_fn(2 * antennas, 2, |r, c| mask[(r % 2, c)] * complex_gaussian(rng, beta));
    TerrestrialChannel { full }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::xpd_to_chi;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn co_polar_power_fraction_follows_xpd() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let chi = xpd_to_chi(5.0);
        let (mut co, mut cross) = (0.0, 0.0);
        for _ in 0..4000 {
            let h = terrestrial_channel(2, 1.0, chi, &mut rng);
            for n in 0..2 {
                co += h.full[(2 * n, 0)].norm_sqr() + h.full[(2 * n + 1, 1)].norm_sqr();
                cross += h.full[(2 * n, 1)].norm_sqr() + h.full[(2 * n + 1, 0)].norm_sqr();
            }
        }
        let ratio = co / cross;
        let expected = (1.0 - chi) / chi;
        assert!((ratio / expected - 1.0).abs() < 0.05, "{ratio} vs {expected}");
    }

    #[test]
    fn vertical_receiver_sees_first_row_of_each_block() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let h = terrestrial_channel(3, 2.0, 0.1, &mut rng);
        let v = h.effective(Polarization::Vertical);
        for n in 0..3 {
            assert_eq!(v[2 * n], h.full[(2 * n, 0)]);
            assert_eq!(v[2 * n + 1], h.full[(2 * n, 1)]);
        }
    }
}
