//! Dense primal-dual interior-point solver for linear objectives over
//! products of non-negative orthants and second-order cones.
//!
//! Programs are stated as
//!
//! ```text
//! optimise  c^T x
//! s.t.      A x = b
//!           h - G x in K
//! ```
//!
//! and solved through a homogeneous self-dual embedding with
//! Nesterov-Todd scaling and a Mehrotra predictor-corrector step, so
//! infeasible and unbounded programs terminate with a certificate instead of
//! running out of iterations.

mod cones;
mod dump;
mod ipm;
mod kkt;
mod program;

pub use cones::Cone;
pub use dump::{parse_program, write_program};
pub use ipm::solve;
pub use program::{Affine, ConicProgram, Sense, SparseMatrix};

/// Outcome of a solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    Unbounded,
    MaxIter,
    NumericalFailure,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    pub max_iter: usize,
    /// Relative primal and dual feasibility tolerance.
    pub feas_tol: f64,
    /// Absolute duality gap tolerance.
    pub abs_tol: f64,
    /// Relative duality gap tolerance.
    pub rel_tol: f64,
    /// When the iteration stalls or breaks down, the best iterate seen is
    /// still reported optimal if all its residuals are below this.
    pub reduced_tol: f64,
    /// Static regularisation added to the reduced KKT system.
    pub regularization: f64,
    pub refinement_steps: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            max_iter: 100,
            feas_tol: 1e-8,
            abs_tol: 1e-8,
            rel_tol: 1e-8,
            reduced_tol: 1e-7,
            regularization: 1e-10,
            refinement_steps: 3,
        }
    }
}

/// Scaled residuals at the returned point. All are relative measures.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct KktResiduals {
    pub primal: f64,
    pub dual: f64,
    pub gap: f64,
}

impl KktResiduals {
    pub fn max(&self) -> f64 {
        self.primal.max(self.dual).max(self.gap)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConicSolution {
    pub status: SolveStatus,
    pub x: Vec<f64>,
    /// Equality multipliers.
    pub y: Vec<f64>,
    /// Cone multipliers.
    pub z: Vec<f64>,
    /// Cone slacks `h - G x`.
    pub s: Vec<f64>,
    /// Objective `c^T x` in the program's own sense.
    pub primal_objective: f64,
    /// Dual bound in the program's own sense.
    pub dual_objective: f64,
    pub iterations: usize,
    pub residuals: KktResiduals,
}
