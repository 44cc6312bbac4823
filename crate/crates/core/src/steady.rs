//! The limiting elliptic problem and the attractor target.
//!
//! When the coefficients settle (d_1 -> d_inf(x), b -> b_0(x)), the
//! susceptible field approaches the solution of
//!
//! ```text
//! -div(d_inf(x) grad S_inf) + d * S_inf = b_0(x)
//! ```
//!
//! with zero-flux boundaries, and the full state approaches
//! (S_inf, 0, 0, 0). The discrete operator reuses the stepper's diffusion
//! stencil verbatim, so the elliptic solve is the t -> infinity limit of
//! the implicit stage.

use crate::grid::{Field, Grid};
use crate::linsolve::{solve, ShiftedDiffusion, SolveError};
use crate::operators::DiffusionStencil;
use crate::stepper::State;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SteadyError {
    #[error("steady problem is invalid: {0}")]
    Invalid(String),
    #[error("steady solve failed: {0}")]
    Solve(#[from] SolveError),
}

/// Data of the limiting elliptic problem.
#[derive(Clone, Debug)]
pub struct SteadyProblem {
    pub grid: Grid,
    /// Limit diffusion coefficient d_inf(x) at cell centers; >= d0 > 0.
    pub d1_inf: Field,
    /// Limit influx b_0(x) at cell centers; nonnegative.
    pub b0_profile: Field,
    /// Host death rate d > 0.
    pub d: f64,
}

impl SteadyProblem {
    pub fn validate(&self) -> Result<(), SteadyError> {
        if self.d1_inf.grid() != self.grid || self.b0_profile.grid() != self.grid {
            return Err(SteadyError::Invalid(
                "coefficient fields live on a different grid".into(),
            ));
        }
        if !(self.d > 0.0) {
            return Err(SteadyError::Invalid(format!(
                "death rate d must be positive (got {})",
                self.d
            )));
        }
        if !(self.d1_inf.min() > 0.0) {
            return Err(SteadyError::Invalid(format!(
                "limit diffusion must be strictly positive (min {})",
                self.d1_inf.min()
            )));
        }
        if self.b0_profile.min() < 0.0 {
            return Err(SteadyError::Invalid(format!(
                "limit influx must be nonnegative (min {})",
                self.b0_profile.min()
            )));
        }
        Ok(())
    }
}

/// Outcome of the steady solve.
#[derive(Clone, Debug)]
pub struct SteadyReport {
    pub iterations: usize,
    pub rel_residual: f64,
}

/// Solves `(d*I - L) S_inf = b_0` to relative residual `tol`.
///
/// The matrix is SPD (d > 0) and an M-matrix, so the solution is unique and
/// nonnegative for nonnegative b_0; constants satisfy the zero-flux problem
/// exactly, so a constant b_0 yields exactly b_0 / d.
pub fn solve_s_infinity(prob: &SteadyProblem, tol: f64) -> Result<(Field, SteadyReport), SteadyError> {
    prob.validate()?;
    let stencil = DiffusionStencil::from_cell_coefficients(&prob.d1_inf);
    let op = ShiftedDiffusion {
        stencil: &stencil,
        shift: prob.d,
        scale: 1.0,
    };
    let iter_cap = 20 * prob.grid.n_cells().max(100);
    let (values, report) = solve(&op, prob.b0_profile.values(), tol, iter_cap)?;
    Ok((
        Field::from_values(prob.grid, values),
        SteadyReport {
            iterations: report.iterations,
            rel_residual: report.rel_residual,
        },
    ))
}

/// The attractor (S_inf, 0, 0, 0).
pub fn attractor_target(prob: &SteadyProblem, tol: f64) -> Result<(State, SteadyReport), SteadyError> {
    let (s_inf, report) = solve_s_infinity(prob, tol)?;
    let zero = Field::constant(prob.grid, 0.0);
    Ok((
        State::new(s_inf, zero.clone(), zero.clone(), zero),
        report,
    ))
}

/// Largest violation of the maximum principle
/// `min b0/d <= S_inf <= max b0/d`; zero when it holds exactly.
pub fn max_principle_violation(prob: &SteadyProblem, s_inf: &Field) -> f64 {
    let lo = prob.b0_profile.min() / prob.d;
    let hi = prob.b0_profile.max() / prob.d;
    let mut worst = 0.0_f64;
    for &v in s_inf.values() {
        worst = worst.max(lo - v).max(v - hi);
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_influx_gives_b_over_d() {
        let grid = Grid::rect([1.0, 1.0], [16, 16]).unwrap();
        let prob = SteadyProblem {
            grid,
            d1_inf: Field::from_fn(grid, |x, y| 0.5 + 0.3 * (x + y)),
            b0_profile: Field::constant(grid, 0.75),
            d: 1.5,
        };
        let (s_inf, report) = solve_s_infinity(&prob, 1e-10).unwrap();
        for &v in s_inf.values() {
            assert!((v - 0.5).abs() < 1e-10, "{v}");
        }
        assert!(report.rel_residual <= 1e-10);
    }

    #[test]
    fn zero_influx_gives_zero() {
        let grid = Grid::line(1.0, 12).unwrap();
        let prob = SteadyProblem {
            grid,
            d1_inf: Field::constant(grid, 1.0),
            b0_profile: Field::constant(grid, 0.0),
            d: 0.7,
        };
        let (s_inf, _) = solve_s_infinity(&prob, 1e-10).unwrap();
        assert!(s_inf.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn manufactured_solution_second_order() {
        // S*(x) = a + cos(pi x) is zero-flux compatible on [0, 1]; with
        // d1 = 1 the forcing is b0 = d*a + (d + pi^2) cos(pi x), kept
        // nonnegative by a large enough offset a.
        let pi = std::f64::consts::PI;
        let d = 1.0;
        let a = 12.0;
        let mut errors = Vec::new();
        for n in [32usize, 64, 128] {
            let grid = Grid::line(1.0, n).unwrap();
            let prob = SteadyProblem {
                grid,
                d1_inf: Field::constant(grid, 1.0),
                b0_profile: Field::from_fn(grid, |x, _| {
                    d * a + (d + pi * pi) * (pi * x).cos()
                }),
                d,
            };
            assert!(prob.b0_profile.min() > 0.0);
            let (s_inf, _) = solve_s_infinity(&prob, 1e-12).unwrap();
            let err2: f64 = s_inf
                .values()
                .iter()
                .enumerate()
                .map(|(c, &v)| {
                    let (x, _) = grid.center(c);
                    (v - (a + (pi * x).cos())).powi(2)
                })
                .sum::<f64>()
                * grid.cell_volume();
            errors.push(err2.sqrt());
        }
        let o1 = (errors[0] / errors[1]).log2();
        let o2 = (errors[1] / errors[2]).log2();
        assert!(
            (1.7..=2.3).contains(&o1) && (1.7..=2.3).contains(&o2),
            "orders {o1:.2} {o2:.2}, errors {errors:?}"
        );
    }

    #[test]
    fn attractor_target_zeroes_the_other_species() {
        let grid = Grid::line(2.0, 10).unwrap();
        let prob = SteadyProblem {
            grid,
            d1_inf: Field::constant(grid, 0.4),
            b0_profile: Field::constant(grid, 1.0),
            d: 2.0,
        };
        let (target, _) = attractor_target(&prob, 1e-10).unwrap();
        for sp in [1, 2, 3] {
            assert!(target.fields()[sp].values().iter().all(|&v| v == 0.0));
        }
        for &v in target.fields()[0].values() {
            assert!((v - 0.5).abs() < 1e-10);
        }
    }

    #[test]
    fn maximum_principle_bounds_hold() {
        let grid = Grid::line(1.0, 24).unwrap();
        let prob = SteadyProblem {
            grid,
            d1_inf: Field::from_fn(grid, |x, _| 0.5 + x),
            b0_profile: Field::from_fn(grid, |x, _| 1.0 + (3.0 * x).sin().abs()),
            d: 1.2,
        };
        let (s_inf, _) = solve_s_infinity(&prob, 1e-12).unwrap();
        assert!(max_principle_violation(&prob, &s_inf) < 1e-9);
    }

    #[test]
    fn invalid_problems_are_rejected() {
        let grid = Grid::line(1.0, 8).unwrap();
        let prob = SteadyProblem {
            grid,
            d1_inf: Field::constant(grid, 0.0),
            b0_profile: Field::constant(grid, 1.0),
            d: 1.0,
        };
        assert!(matches!(
            solve_s_infinity(&prob, 1e-10),
            Err(SteadyError::Invalid(_))
        ));
    }
}
