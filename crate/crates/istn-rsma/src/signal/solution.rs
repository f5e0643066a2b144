use crate::numeric::CVector;

use super::plan::Column;

/// Precoders and rate allocation of one scheme. Layers a scheme does not use
/// are kept as zero vectors and zero allocations so every scheme shares one
/// shape.
#[derive(Debug, Clone, PartialEq)]
pub struct PrecoderSolution {
    /// Super-common precoder (decoded by every user).
    pub w_spc: CVector,
    /// Satellite common precoder.
    pub w_cpc: CVector,
    pub w_private: Vec<CVector>,
    /// Base-station common precoder.
    pub p_lpc: CVector,
    pub p_private: Vec<CVector>,
    pub c_spc: Vec<f64>,
    pub c_cpc: Vec<f64>,
    pub c_lpc: Vec<f64>,
    pub alpha_sat: Vec<f64>,
    pub alpha_cell: Vec<f64>,
    pub r_min: f64,
}

impl PrecoderSolution {
    pub fn zeros(sat_ports: usize, bs_ports: usize, sat_users: usize, cell_users: usize) -> Self {
        Self {
            w_spc: CVector::zeros(sat_ports),
            w_cpc: CVector::zeros(sat_ports),
            w_private: vec![CVector::zeros(sat_ports); sat_users],
            p_lpc: CVector::zeros(bs_ports),
            p_private: vec![CVector::zeros(bs_ports); cell_users],
            c_spc: vec![0.0; sat_users],
            c_cpc: vec![0.0; sat_users],
            c_lpc: vec![0.0; cell_users],
            alpha_sat: vec![0.0; sat_users],
            alpha_cell: vec![0.0; cell_users],
            r_min: 0.0,
        }
    }

    pub fn sat_users(&self) -> usize {
        self.w_private.len()
    }

    pub fn cell_users(&self) -> usize {
        self.p_private.len()
    }

    pub fn column(&self, col: Column) -> &CVector {
        match col {
            Column::Spc => &self.w_spc,
            Column::Cpc => &self.w_cpc,
            Column::SatPrivate(k) => &self.w_private[k],
            Column::Lpc => &self.p_lpc,
            Column::BsPrivate(k) => &self.p_private[k],
        }
    }

    pub fn column_mut(&mut self, col: Column) -> &mut CVector {
        match col {
            Column::Spc => &mut self.w_spc,
            Column::Cpc => &mut self.w_cpc,
            Column::SatPrivate(k) => &mut self.w_private[k],
            Column::Lpc => &mut self.p_lpc,
            Column::BsPrivate(k) => &mut self.p_private[k],
        }
    }

    /// `tr(W W^H)`.
    pub fn sat_power(&self) -> f64 {
        self.w_spc.norm_squared()
            + self.w_cpc.norm_squared()
            + self.w_private.iter().map(|w| w.norm_squared()).sum::<f64>()
    }

    /// `tr(P P^H)`.
    pub fn bs_power(&self) -> f64 {
        self.p_lpc.norm_squared() + self.p_private.iter().map(|p| p.norm_squared()).sum::<f64>()
    }

    /// Fraction of the radiated satellite power carried by the super-common
    /// stream; zero when the satellite is silent.
    pub fn spc_power_fraction(&self) -> f64 {
        let total = self.sat_power();
        if total > 0.0 {
            self.w_spc.norm_squared() / total
        } else {
            0.0
        }
    }
}
