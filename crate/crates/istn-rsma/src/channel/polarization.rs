use nalgebra::Matrix2;

use crate::numeric::{db_to_linear, C64};

/// Polarization states used by the satellite (circular) and the base station
/// (linear).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Polarization {
    Rhcp,
    Lhcp,
    Vertical,
    Horizontal,
}

impl Polarization {
    pub fn is_circular(self) -> bool {
        matches!(self, Self::Rhcp | Self::Lhcp)
    }

    /// Position of this state inside its transmit basis: RHCP and V are the
    /// first port of each antenna pair, LHCP and H the second.
    pub fn port(self) -> usize {
        match self {
            Self::Rhcp | Self::Vertical => 0,
            Self::Lhcp | Self::Horizontal => 1,
        }
    }

    pub fn orthogonal(self) -> Self {
        match self {
            Self::Rhcp => Self::Lhcp,
            Self::Lhcp => Self::Rhcp,
            Self::Vertical => Self::Horizontal,
            Self::Horizontal => Self::Vertical,
        }
    }

    /// The two states of the circular or linear family, in port order.
    pub fn circular_basis() -> [Self; 2] {
        [Self::Rhcp, Self::Lhcp]
    }

    pub fn linear_basis() -> [Self; 2] {
        [Self::Vertical, Self::Horizontal]
    }

    pub fn code(self) -> u8 {
        match self {
            Self::Rhcp => 0,
            Self::Lhcp => 1,
            Self::Vertical => 2,
            Self::Horizontal => 3,
        }
    }

    pub fn from_code(code: u8) -> Option<Self> {
        Some(match code {
            0 => Self::Rhcp,
            1 => Self::Lhcp,
            2 => Self::Vertical,
            3 => Self::Horizontal,
            _ => return None,
        })
    }

    pub fn label(self) -> &'static str {
        match self {
            Self::Rhcp => "R",
            Self::Lhcp => "L",
            Self::Vertical => "V",
            Self::Horizontal => "H",
        }
    }
}

/// Jones vector of a polarization state.
pub fn polarization_vector(pol: Polarization) -> [C64; 2] {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    match pol {
        Polarization::Rhcp => [C64::new(s, 0.0), C64::new(0.0, -s)],
        Polarization::Lhcp => [C64::new(s, 0.0), C64::new(0.0, s)],
        Polarization::Vertical => [C64::new(1.0, 0.0), C64::new(0.0, 0.0)],
        Polarization::Horizontal => [C64::new(0.0, 0.0), C64::new(1.0, 0.0)],
    }
}

/// Faraday rotation of the polarization plane by `zeta` radians.
pub fn rotation(zeta: f64) -> Matrix2<C64> {
    let (s, c) = zeta.sin_cos();
    Matrix2::new(
        C64::new(c, 0.0),
        C64::new(s, 0.0),
        C64::new(-s, 0.0),
        C64::new(c, 0.0),
    )
}

/// Cross-polar power fraction for a given cross-polar discrimination,
/// `chi = 1 / (1 + XPD)` so that `XPD = (1 - chi) / chi`.
pub fn xpd_to_chi(xpd_db: f64) -> f64 {
    1.0 / (1.0 + db_to_linear(xpd_db))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn hdot(a: &[C64; 2], b: &[C64; 2]) -> C64 {
        a[0].conj() * b[0] + a[1].conj() * b[1]
    }

    #[test]
    fn bases_are_orthonormal() {
        for basis in [Polarization::circular_basis(), Polarization::linear_basis()] {
            let p = basis.map(polarization_vector);
            assert!((hdot(&p[0], &p[0]).re - 1.0).abs() < 1e-15);
            assert!((hdot(&p[1], &p[1]).re - 1.0).abs() < 1e-15);
            assert!(hdot(&p[0], &p[1]).norm() < 1e-15);
        }
    }

    #[test]
    fn xpd_round_trip_and_limits() {
        assert!((xpd_to_chi(0.0) - 0.5).abs() < 1e-15);
        for db in [-10.0, 0.0, 5.0, 15.0, 30.0] {
            let chi = xpd_to_chi(db);
            let back = 10.0 * ((1.0 - chi) / chi).log10();
            assert!((back - db).abs() < 1e-9);
        }
        assert!(xpd_to_chi(300.0) < 1e-29);
    }

    proptest! {
        #[test]
        fn rotation_is_orthogonal(zeta in -10.0f64..10.0) {
            let r = rotation(zeta);
            let prod = r.adjoint() * r;
            prop_assert!((prod - Matrix2::identity()).norm() < 1e-14);
        }

        #[test]
        fn circular_states_are_rotation_eigenvectors(zeta in 0.0f64..std::f64::consts::TAU) {
            for pol in Polarization::circular_basis() {
                let rho = polarization_vector(pol);
                let v = rotation(zeta).adjoint() * nalgebra::Vector2::new(rho[0], rho[1]);
                // rho^H R is a pure phase times rho^H.
                let overlap = rho[0].conj() * v[0] + rho[1].conj() * v[1];
                prop_assert!((overlap.norm() - 1.0).abs() < 1e-14);
            }
        }
    }
}
