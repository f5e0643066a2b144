//! Dense LDL^T factorisation of the regularised reduced KKT matrix
//!
//! ```text
//! [ M + d I    A^T  ]
//! [   A      -d I   ]
//! ```
//!
//! which is quasi-definite, so a factorisation without pivoting exists.
//! Pivots with the wrong sign or tiny magnitude are replaced by a signed
//! dynamic regularisation.

pub(crate) struct QuasiDefiniteLdl {
    dim: usize,
    /// Unit lower triangle stored row-major; the diagonal holds `D`.
    factor: Vec<f64>,
}

impl QuasiDefiniteLdl {
    /// Factor the row-major symmetric `dim x dim` matrix `k` whose first
    /// `positive` pivots are expected positive and the rest negative.
    pub(crate) fn factor(mut k: Vec<f64>, dim: usize, positive: usize, dynamic_reg: f64) -> Self {
        let mut row_buf = vec![0.0; dim];
        for j in 0..dim {
            // d_j = k_jj - sum_{p<j} l_jp^2 d_p ; l_ij = (k_ij - sum l_ip l_jp d_p) / d_j
            let mut d = k[j * dim + j];
            let tiny = 1e-13 * d.abs().max(f64::MIN_POSITIVE);
            for p in 0..j {
                let l = k[j * dim + p];
                row_buf[p] = l * k[p * dim + p];
                d -= l * row_buf[p];
            }
            let sign = if j < positive { 1.0 } else { -1.0 };
            if sign * d <= tiny {
                d = sign * dynamic_reg.max(tiny);
            }
            k[j * dim + j] = d;
            for i in (j + 1)..dim {
                let mut v = k[i * dim + j];
                let ri = i * dim;
                for p in 0..j {
                    v -= k[ri + p] * row_buf[p];
                }
                k[ri + j] = v / d;
            }
        }
        Self { dim, factor: k }
    }

    pub(crate) fn solve(&self, rhs: &mut [f64]) {
        let n = self.dim;
        let f = &self.factor;
        for i in 0..n {
            let mut v = rhs[i];
            for p in 0..i {
                v -= f[i * n + p] * rhs[p];
            }
            rhs[i] = v;
        }
        for i in 0..n {
            rhs[i] /= f[i * n + i];
        }
        for i in (0..n).rev() {
            let mut v = rhs[i];
            for p in (i + 1)..n {
                v -= f[p * n + i] * rhs[p];
            }
            rhs[i] = v;
        }
    }
}
