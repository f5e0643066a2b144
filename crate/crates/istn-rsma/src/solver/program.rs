use super::cones::Cone;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Minimize,
    Maximize,
}

/// Row-major sparse matrix holding `(column, value)` pairs per row.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SparseMatrix {
    pub ncols: usize,
    pub rows: Vec<Vec<(usize, f64)>>,
}

impl SparseMatrix {
    pub fn new(ncols: usize) -> Self {
        Self { ncols, rows: Vec::new() }
    }

    pub fn nrows(&self) -> usize {
        self.rows.len()
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    /// `M x`.
    pub fn mul(&self, x: &[f64]) -> Vec<f64> {
        self.rows.iter().map(|r| r.iter().map(|&(j, v)| v * x[j]).sum()).collect()
    }

    /// `M^T y`, accumulated into `out`.
    pub fn mul_t_add(&self, y: &[f64], out: &mut [f64]) {
        for (r, &yr) in self.rows.iter().zip(y) {
            if yr != 0.0 {
                for &(j, v) in r {
                    out[j] += v * yr;
                }
            }
        }
    }

    pub fn mul_t(&self, y: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.ncols];
        self.mul_t_add(y, &mut out);
        out
    }

    pub fn to_dense(&self) -> nalgebra::DMatrix<f64> {
        let mut m = nalgebra::DMatrix::zeros(self.nrows(), self.ncols);
        for (i, r) in self.rows.iter().enumerate() {
            for &(j, v) in r {
                m[(i, j)] += v;
            }
        }
        m
    }
}

/// Affine expression `sum_i coef_i x_{var_i} + constant`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Affine {
    pub terms: Vec<(usize, f64)>,
    pub constant: f64,
}

impl Affine {
    pub fn constant(value: f64) -> Self {
        Self {
            terms: Vec::new(),
            constant: value,
        }
    }

    pub fn var(index: usize, coef: f64) -> Self {
        Self {
            terms: vec![(index, coef)],
            constant: 0.0,
        }
    }

    pub fn plus_constant(mut self, value: f64) -> Self {
        self.constant += value;
        self
    }

    pub fn plus(mut self, index: usize, coef: f64) -> Self {
        self.terms.push((index, coef));
        self
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        self.constant + self.terms.iter().map(|&(j, v)| v * x[j]).sum::<f64>()
    }
}

/// A conic program `optimise c^T x s.t. A x = b, h - G x in K`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConicProgram {
    pub sense: Sense,
    pub objective: Vec<f64>,
    pub eq_matrix: SparseMatrix,
    pub eq_rhs: Vec<f64>,
    pub cone_matrix: SparseMatrix,
    pub cone_rhs: Vec<f64>,
    /// Consecutive blocks partitioning the rows of the cone matrix.
    pub cones: Vec<Cone>,
}

impl ConicProgram {
    pub fn new(variables: usize, sense: Sense) -> Self {
        Self {
            sense,
            objective: vec![0.0; variables],
            eq_matrix: SparseMatrix::new(variables),
            eq_rhs: Vec::new(),
            cone_matrix: SparseMatrix::new(variables),
            cone_rhs: Vec::new(),
            cones: Vec::new(),
        }
    }

    pub fn variables(&self) -> usize {
        self.objective.len()
    }

    /// `expr = 0`.
    pub fn add_equality(&mut self, expr: &Affine) {
        self.eq_matrix.rows.push(expr.terms.clone());
        self.eq_rhs.push(-expr.constant);
    }

    fn push_cone_row(&mut self, expr: &Affine) {
        // Slack s = h - G x must equal the expression.
        self.cone_matrix.rows.push(expr.terms.iter().map(|&(j, v)| (j, -v)).collect());
        self.cone_rhs.push(expr.constant);
    }

    /// Every expression `>= 0`.
    pub fn add_nonneg(&mut self, exprs: &[Affine]) {
        if exprs.is_empty() {
            return;
        }
        for e in exprs {
            self.push_cone_row(e);
        }
        self.cones.push(Cone::NonNeg(exprs.len()));
    }

    /// `||exprs[1..]|| <= exprs[0]`.
    pub fn add_soc(&mut self, exprs: &[Affine]) {
        assert!(exprs.len() >= 2, "second-order cone needs at least two rows");
        for e in exprs {
            self.push_cone_row(e);
        }
        self.cones.push(Cone::Soc(exprs.len()));
    }

    pub fn cone_rows(&self) -> usize {
        self.cones.iter().map(|c| c.dim()).sum()
    }

    /// Structural checks: matching dimensions, in-range indices, cone
    /// blocks covering the cone rows exactly, second-order blocks of
    /// dimension at least two.
    pub fn validate(&self) -> Result<()> {
        let n = self.variables();
        let bad = |m: String| Err(Error::Dimension(m));
        if self.eq_matrix.ncols != n || self.cone_matrix.ncols != n {
            return bad("matrix column count differs from variable count".into());
        }
        if self.eq_matrix.nrows() != self.eq_rhs.len() {
            return bad("equality rows and right-hand side differ".into());
        }
        if self.cone_matrix.nrows() != self.cone_rhs.len() {
            return bad("cone rows and right-hand side differ".into());
        }
        if self.cone_rows() != self.cone_rhs.len() {
            return bad(format!(
                "cone blocks cover {} rows, program has {}",
                self.cone_rows(),
                self.cone_rhs.len()
            ));
        }
        for c in &self.cones {
            match *c {
                Cone::NonNeg(0) => return bad("empty orthant block".into()),
                Cone::Soc(d) if d < 2 => return bad("second-order cone of dimension < 2".into()),
                _ => {}
            }
        }
        let out_of_range = self
            .eq_matrix
            .rows
            .iter()
            .chain(self.cone_matrix.rows.iter())
            .flatten()
            .any(|&(j, v)| j >= n || !v.is_finite());
        if out_of_range {
            return bad("matrix entry out of range or not finite".into());
        }
        if self.objective.iter().chain(&self.eq_rhs).chain(&self.cone_rhs).any(|v| !v.is_finite()) {
            return bad("non-finite data".into());
        }
        Ok(())
    }

    /// Slack `h - G x`.
    pub fn slack(&self, x: &[f64]) -> Vec<f64> {
        self.cone_matrix
            .mul(x)
            .into_iter()
            .zip(&self.cone_rhs)
            .map(|(gx, h)| h - gx)
            .collect()
    }

    /// Largest violation of the equalities and cone memberships at `x`,
    /// measured in the programme's own units.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let eq = self
            .eq_matrix
            .mul(x)
            .into_iter()
            .zip(&self.eq_rhs)
            .map(|(ax, b)| (ax - b).abs())
            .fold(0.0, f64::max);
        let s = self.slack(x);
        let mut worst = eq;
        let mut offset = 0;
        for c in &self.cones {
            let d = c.dim();
            worst = worst.max(c.violation(&s[offset..offset + d]));
            offset += d;
        }
        worst
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.objective.iter().zip(x).map(|(c, v)| c * v).sum()
    }
}
