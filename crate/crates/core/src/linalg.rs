//! Dense LU solves with a condition-number report.

use crate::{Error, Result};
use nalgebra::{DMatrix, DVector};

/// Solution of a dense system together with the 1-norm condition number of the matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseSolution {
    pub x: Vec<f64>,
    pub condition_number: f64,
}

/// Largest condition number accepted before the system is declared singular.
pub const MAX_CONDITION: f64 = 1e14;

fn norm1(m: &DMatrix<f64>) -> f64 {
    m.column_iter().map(|c| c.iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max)
}

/// Solve `A x = rhs` by LU with partial pivoting. Rows of `a` are given as vectors.
pub fn solve_dense(a: &[Vec<f64>], rhs: &[f64]) -> Result<DenseSolution> {
    let n = rhs.len();
    if a.len() != n || a.iter().any(|r| r.len() != n) {
        return Err(Error::InvalidParam("matrix must be square and match the right-hand side".into()));
    }
    let m = DMatrix::from_fn(n, n, |i, j| a[i][j]);
    solve_matrix(m, rhs)
}

pub fn solve_matrix(m: DMatrix<f64>, rhs: &[f64]) -> Result<DenseSolution> {
    let n = rhs.len();
    let anorm = norm1(&m);
    let lu = m.lu();
    let inv = lu.try_inverse().ok_or(Error::Singular { cond: f64::INFINITY })?;
    let cond = anorm * norm1(&inv);
    if !cond.is_finite() || cond > MAX_CONDITION {
        return Err(Error::Singular { cond });
    }
    let b = DVector::from_column_slice(rhs);
    let x = lu.solve(&b).ok_or(Error::Singular { cond })?;
    debug_assert_eq!(x.len(), n);
    Ok(DenseSolution { x: x.iter().cloned().collect(), condition_number: cond })
}

/// Max-norm residual `|A x - rhs|_inf`.
pub fn residual(a: &[Vec<f64>], x: &[f64], rhs: &[f64]) -> f64 {
    a.iter()
        .zip(rhs)
        .map(|(row, r)| (row.iter().zip(x).map(|(u, v)| u * v).sum::<f64>() - r).abs())
        .fold(0.0, f64::max)
}
