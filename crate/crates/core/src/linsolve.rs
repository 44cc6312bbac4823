//! Linear solves for the implicit diffusion stage and the steady problem.
//!
//! Both solves target the same operator family `A = shift*I - scale*L`
//! where L is the zero-flux diffusion stencil: backward Euler uses
//! `shift = 1, scale = dt`, the steady problem uses `shift = d, scale = 1`.
//! A is symmetric positive definite (shift > 0, -L positive semidefinite)
//! and an M-matrix, so exact solutions of nonnegative right-hand sides are
//! nonnegative.
//!
//! In 1D the system is tridiagonal and solved directly (Thomas algorithm);
//! forward elimination keeps the sign pattern, so the computed solution of
//! a nonnegative rhs is nonnegative even in floating point. In 2D we use
//! conjugate gradients with Jacobi preconditioning, warm-started from the
//! right-hand side scaled by 1/shift.

use crate::operators::DiffusionStencil;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum SolveError {
    #[error(
        "linear solver did not converge: {iterations} iterations, relative residual {residual:.3e} (tol {tol:.1e})"
    )]
    NoConvergence {
        iterations: usize,
        residual: f64,
        tol: f64,
    },
    #[error("linear solver produced a non-finite value")]
    NonFinite,
}

/// `A = shift*I - scale*L` for a fixed stencil.
pub struct ShiftedDiffusion<'a> {
    pub stencil: &'a DiffusionStencil,
    pub shift: f64,
    pub scale: f64,
}

impl ShiftedDiffusion<'_> {
    fn apply(&self, x: &[f64], scratch: &mut [f64], out: &mut [f64]) {
        self.stencil.apply_into(x, scratch);
        for c in 0..x.len() {
            out[c] = self.shift * x[c] - self.scale * scratch[c];
        }
    }

    fn diagonal(&self) -> Vec<f64> {
        self.stencil
            .diagonal()
            .into_iter()
            .map(|l| self.shift - self.scale * l)
            .collect()
    }
}

/// Outcome of a linear solve.
#[derive(Clone, Debug, PartialEq)]
pub struct SolveReport {
    pub iterations: usize,
    /// Final residual norm relative to the right-hand side norm.
    pub rel_residual: f64,
}

/// Solves `A x = rhs` to relative residual `tol`, dispatching on dimension.
///
/// `iter_cap` bounds CG iterations; the 1D path is direct and reports one
/// iteration.
pub fn solve(
    op: &ShiftedDiffusion<'_>,
    rhs: &[f64],
    tol: f64,
    iter_cap: usize,
) -> Result<(Vec<f64>, SolveReport), SolveError> {
    if op.stencil.grid().dim() == 1 {
        solve_tridiagonal(op, rhs)
    } else {
        solve_pcg(op, rhs, tol, iter_cap)
    }
}

/// Thomas algorithm on the 1D operator.
fn solve_tridiagonal(
    op: &ShiftedDiffusion<'_>,
    rhs: &[f64],
) -> Result<(Vec<f64>, SolveReport), SolveError> {
    let grid = op.stencil.grid();
    let n = grid.n_cells();
    assert_eq!(rhs.len(), n);
    let h = grid.spacing()[0];
    let inv_h2 = 1.0 / (h * h);

    // Row i: sub = -scale*f_i/h^2, diag = shift + scale*(f_i + f_{i+1})/h^2,
    // sup = -scale*f_{i+1}/h^2, with boundary face coefficients zero.
    let face = op.stencil.face_x();
    let mut sub = vec![0.0; n];
    let mut diag = vec![0.0; n];
    let mut sup = vec![0.0; n];
    for i in 0..n {
        sub[i] = -op.scale * face[i] * inv_h2;
        sup[i] = -op.scale * face[i + 1] * inv_h2;
        diag[i] = op.shift + op.scale * (face[i] + face[i + 1]) * inv_h2;
    }

    // Forward elimination; the M-matrix structure keeps multipliers and
    // transformed rhs nonnegative, so nonnegative inputs give nonnegative
    // outputs bitwise.
    let mut c_prime = vec![0.0; n];
    let mut d_prime = vec![0.0; n];
    let mut denom = diag[0];
    if denom == 0.0 {
        return Err(SolveError::NonFinite);
    }
    c_prime[0] = sup[0] / denom;
    d_prime[0] = rhs[0] / denom;
    for i in 1..n {
        denom = diag[i] - sub[i] * c_prime[i - 1];
        if denom == 0.0 || !denom.is_finite() {
            return Err(SolveError::NonFinite);
        }
        c_prime[i] = sup[i] / denom;
        d_prime[i] = (rhs[i] - sub[i] * d_prime[i - 1]) / denom;
    }
    let mut x = vec![0.0; n];
    x[n - 1] = d_prime[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = d_prime[i] - c_prime[i] * x[i + 1];
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(SolveError::NonFinite);
    }

    // Report the actual residual for symmetry with the CG path.
    let mut scratch = vec![0.0; n];
    let mut ax = vec![0.0; n];
    op.apply(&x, &mut scratch, &mut ax);
    let rhs_norm = norm2(rhs);
    let res = rhs
        .iter()
        .zip(&ax)
        .map(|(b, a)| (b - a) * (b - a))
        .sum::<f64>()
        .sqrt();
    Ok((
        x,
        SolveReport {
            iterations: 1,
            rel_residual: if rhs_norm > 0.0 { res / rhs_norm } else { res },
        },
    ))
}

/// Jacobi-preconditioned conjugate gradients, warm-started at rhs/shift.
fn solve_pcg(
    op: &ShiftedDiffusion<'_>,
    rhs: &[f64],
    tol: f64,
    iter_cap: usize,
) -> Result<(Vec<f64>, SolveReport), SolveError> {
    let n = rhs.len();
    let rhs_norm = norm2(rhs);
    if rhs_norm == 0.0 {
        return Ok((
            vec![0.0; n],
            SolveReport {
                iterations: 0,
                rel_residual: 0.0,
            },
        ));
    }
    let target = tol * rhs_norm;
    let diag_inv: Vec<f64> = op.diagonal().into_iter().map(|d| 1.0 / d).collect();

    let mut x: Vec<f64> = rhs.iter().map(|b| b / op.shift).collect();
    let mut scratch = vec![0.0; n];
    let mut ax = vec![0.0; n];
    op.apply(&x, &mut scratch, &mut ax);
    let mut r: Vec<f64> = rhs.iter().zip(&ax).map(|(b, a)| b - a).collect();
    let mut res_norm = norm2(&r);
    if res_norm <= target {
        return Ok((
            x,
            SolveReport {
                iterations: 0,
                rel_residual: res_norm / rhs_norm,
            },
        ));
    }

    let mut z: Vec<f64> = r.iter().zip(&diag_inv).map(|(r, m)| r * m).collect();
    let mut p = z.clone();
    let mut rho: f64 = dot(&r, &z);
    let mut q = vec![0.0; n];

    for iter in 1..=iter_cap {
        op.apply(&p, &mut scratch, &mut q);
        let pq = dot(&p, &q);
        if !(pq > 0.0) || !pq.is_finite() {
            return Err(SolveError::NonFinite);
        }
        let alpha = rho / pq;
        for c in 0..n {
            x[c] += alpha * p[c];
            r[c] -= alpha * q[c];
        }
        res_norm = norm2(&r);
        if !res_norm.is_finite() {
            return Err(SolveError::NonFinite);
        }
        if res_norm <= target {
            return Ok((
                x,
                SolveReport {
                    iterations: iter,
                    rel_residual: res_norm / rhs_norm,
                },
            ));
        }
        for c in 0..n {
            z[c] = r[c] * diag_inv[c];
        }
        let rho_next = dot(&r, &z);
        let beta = rho_next / rho;
        rho = rho_next;
        for c in 0..n {
            p[c] = z[c] + beta * p[c];
        }
    }
    Err(SolveError::NoConvergence {
        iterations: iter_cap,
        residual: res_norm / rhs_norm,
        tol,
    })
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}
