//! Factorised solves against `I - C`.

use log::warn;
use nalgebra::{DMatrix, DVector, LU};
use thiserror::Error;

/// Relative residual at or below which a solve is accepted silently.
pub const RESIDUAL_TOL: f64 = 1e-10;
/// Relative residual above which a solve is refused.
pub const RESIDUAL_REFUSE: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolveError {
    #[error("matrix I - C is singular")]
    Singular,
    #[error("relative residual {0:e} exceeds {RESIDUAL_REFUSE:e}")]
    Residual(f64),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
}

/// LU factorisation of `I - C`, computed once and reused for every
/// right-hand side.
#[derive(Debug, Clone)]
pub struct LeontiefSolver {
    system: DMatrix<f64>,
    lu: LU<f64, nalgebra::Dyn, nalgebra::Dyn>,
}

impl LeontiefSolver {
    pub fn new(c: &DMatrix<f64>) -> Result<Self, SolveError> {
        if !c.is_square() {
            return Err(SolveError::DimensionMismatch {
                expected: c.nrows(),
                got: c.ncols(),
            });
        }
        let n = c.nrows();
        let system = DMatrix::<f64>::identity(n, n) - c;
        let lu = system.clone().lu();
        if !lu.is_invertible() {
            return Err(SolveError::Singular);
        }
        Ok(Self { system, lu })
    }

    pub fn dim(&self) -> usize {
        self.system.nrows()
    }

    /// Solves `(I - C) x = rhs` and checks the relative residual.
    pub fn solve(&self, rhs: &DVector<f64>) -> Result<DVector<f64>, SolveError> {
        if rhs.len() != self.dim() {
            return Err(SolveError::DimensionMismatch {
                expected: self.dim(),
                got: rhs.len(),
            });
        }
        let x = self.lu.solve(rhs).ok_or(SolveError::Singular)?;
        let scale = rhs.amax();
        let residual = (&self.system * &x - rhs).amax();
        self.check(residual, scale)?;
        Ok(x)
    }

    /// The full inverse `(I - C)^-1`, column by column from the one factorisation.
    pub fn inverse(&self) -> Result<DMatrix<f64>, SolveError> {
        let n = self.dim();
        let identity = DMatrix::<f64>::identity(n, n);
        let inv = self.lu.solve(&identity).ok_or(SolveError::Singular)?;
        let residual = (&self.system * &inv - &identity).amax();
        self.check(residual, 1.0)?;
        Ok(inv)
    }

    fn check(&self, residual: f64, scale: f64) -> Result<(), SolveError> {
        if !residual.is_finite() {
            return Err(SolveError::Singular);
        }
        let rel = if scale > 0.0 {
            residual / scale
        } else {
            residual
        };
        if rel > RESIDUAL_REFUSE {
            return Err(SolveError::Residual(rel));
        }
        if rel > RESIDUAL_TOL {
            warn!("linear solve residual {rel:e} above {RESIDUAL_TOL:e}");
        }
        Ok(())
    }
}
