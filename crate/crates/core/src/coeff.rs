//! Space-time coefficient samplers.
//!
//! Diffusion coefficients d_i(x,t) and the susceptible influx b(x,t) enter
//! the model as bounded functions: 0 < d0 <= d_i <= D0 and 0 <= b <= b0.
//! A sampler carries its evaluation rule, its declared bounds, and an
//! optional long-time limit profile (d_i(x,t) -> d_inf(x), b(x,t) -> b0(x))
//! used by the steady-state solve.

use crate::expr::{Expr, Var};
use crate::grid::{Field, Grid};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum CoeffError {
    #[error("{context}: lower bound must be positive (got {lower})")]
    NonpositiveLower { context: String, lower: f64 },
    #[error("{context}: bounds out of order (lower {lower} > upper {upper})")]
    BoundsOutOfOrder {
        context: String,
        lower: f64,
        upper: f64,
    },
    #[error("{context}: influx bound must be nonnegative (got {bound})")]
    NegativeInfluxBound { context: String, bound: f64 },
    #[error(
        "{context}: sampled value {value} at (x={x}, y={y}, t={t}) violates bounds [{lower}, {upper}]"
    )]
    OutOfBounds {
        context: String,
        value: f64,
        x: f64,
        y: f64,
        t: f64,
        lower: f64,
        upper: f64,
    },
    #[error("{context}: expression uses '{var}' which is not allowed here")]
    ForbiddenVariable { context: String, var: &'static str },
    #[error(
        "{context}: sampler does not approach its declared limit (|value - limit| = {gap} at t = {t})"
    )]
    LimitNotReached { context: String, gap: f64, t: f64 },
}

/// Evaluation rule of a sampler.
#[derive(Clone, Debug, PartialEq)]
pub enum SamplerKind {
    Constant(f64),
    /// Expression over x (and y in 2D); frozen in time.
    SpaceVarying(Expr),
    /// Expression over x, y, t.
    SpaceTime(Expr),
}

impl SamplerKind {
    #[inline]
    pub fn eval(&self, x: f64, y: f64, t: f64) -> f64 {
        match self {
            SamplerKind::Constant(v) => *v,
            SamplerKind::SpaceVarying(e) => e.eval(x, y, 0.0),
            SamplerKind::SpaceTime(e) => e.eval(x, y, t),
        }
    }

    fn uses_time(&self) -> bool {
        match self {
            SamplerKind::Constant(_) => false,
            SamplerKind::SpaceVarying(e) | SamplerKind::SpaceTime(e) => {
                e.vars_used().contains(&Var::T)
            }
        }
    }

    /// Config-file rendering: `constant <v>` or `expression <e>`.
    pub fn render(&self, source: Option<&str>) -> String {
        match self {
            SamplerKind::Constant(v) => format!("constant {v}"),
            SamplerKind::SpaceVarying(e) | SamplerKind::SpaceTime(e) => match source {
                Some(src) => format!("expression {src}"),
                None => format!("expression {e}"),
            },
        }
    }
}

/// A bounded coefficient with an optional long-time limit profile.
#[derive(Clone, Debug, PartialEq)]
pub struct CoefficientSampler {
    kind: SamplerKind,
    /// Original expression text, kept verbatim for config echo.
    source: Option<String>,
    lower: f64,
    upper: f64,
    limit: Option<SamplerKind>,
    limit_source: Option<String>,
}

impl CoefficientSampler {
    /// Diffusion coefficient with bounds 0 < d0 <= value <= D0.
    pub fn diffusion(
        kind: SamplerKind,
        d0: f64,
        d_cap: f64,
        context: &str,
    ) -> Result<Self, CoeffError> {
        if !(d0 > 0.0) {
            return Err(CoeffError::NonpositiveLower {
                context: context.to_string(),
                lower: d0,
            });
        }
        if d0 > d_cap {
            return Err(CoeffError::BoundsOutOfOrder {
                context: context.to_string(),
                lower: d0,
                upper: d_cap,
            });
        }
        Ok(Self {
            kind,
            source: None,
            lower: d0,
            upper: d_cap,
            limit: None,
            limit_source: None,
        })
    }

    /// Constant diffusion coefficient; bounds collapse onto the value and
    /// the limit profile is the value itself.
    pub fn constant_diffusion(value: f64) -> Result<Self, CoeffError> {
        Self::diffusion(SamplerKind::Constant(value), value, value, "diffusion")
    }

    /// Influx with bound 0 <= value <= b0.
    pub fn influx(kind: SamplerKind, b0: f64, context: &str) -> Result<Self, CoeffError> {
        if !(b0 >= 0.0) {
            return Err(CoeffError::NegativeInfluxBound {
                context: context.to_string(),
                bound: b0,
            });
        }
        Ok(Self {
            kind,
            source: None,
            lower: 0.0,
            upper: b0,
            limit: None,
            limit_source: None,
        })
    }

    /// Constant influx; its own limit profile.
    pub fn constant_influx(value: f64) -> Result<Self, CoeffError> {
        Self::influx(SamplerKind::Constant(value), value, "influx")
    }

    pub fn with_source(mut self, source: &str) -> Self {
        self.source = Some(source.to_string());
        self
    }

    /// Attaches an explicit limit profile (a space-only rule).
    pub fn with_limit(
        mut self,
        limit: SamplerKind,
        source: Option<&str>,
        context: &str,
    ) -> Result<Self, CoeffError> {
        if limit.uses_time() {
            return Err(CoeffError::ForbiddenVariable {
                context: format!("{context}.limit"),
                var: "t",
            });
        }
        self.limit = Some(limit);
        self.limit_source = source.map(str::to_string);
        Ok(self)
    }

    pub fn kind(&self) -> &SamplerKind {
        &self.kind
    }

    pub fn lower(&self) -> f64 {
        self.lower
    }

    pub fn upper(&self) -> f64 {
        self.upper
    }

    pub fn source(&self) -> Option<&str> {
        self.source.as_deref()
    }

    pub fn limit_source(&self) -> Option<&str> {
        self.limit_source.as_deref()
    }

    pub fn limit_kind(&self) -> Option<&SamplerKind> {
        if self.limit.is_some() {
            return self.limit.as_ref();
        }
        // A time-invariant rule is its own limit.
        if !self.kind.uses_time() {
            Some(&self.kind)
        } else {
            None
        }
    }

    /// Whether an explicit limit was configured (as opposed to inferred
    /// from time-invariance).
    pub fn has_explicit_limit(&self) -> bool {
        self.limit.is_some()
    }

    #[inline]
    pub fn eval(&self, x: f64, y: f64, t: f64) -> f64 {
        self.kind.eval(x, y, t)
    }

    /// Samples the rule at every cell center of `grid` at time `t`.
    pub fn sample_field(&self, grid: Grid, t: f64) -> Field {
        match &self.kind {
            SamplerKind::Constant(v) => Field::constant(grid, *v),
            _ => Field::from_fn(grid, |x, y| self.kind.eval(x, y, t)),
        }
    }

    /// The limit profile sampled on `grid`, if one is available.
    pub fn limit_field(&self, grid: Grid) -> Option<Field> {
        let kind = self.limit_kind()?.clone();
        Some(Field::from_fn(grid, |x, y| kind.eval(x, y, 0.0)))
    }

    /// Validates the declared bounds by sampling every cell at the given
    /// times, and probes the limit profile at a large time when one is
    /// configured.
    pub fn validate_on_grid(
        &self,
        grid: Grid,
        times: &[f64],
        context: &str,
    ) -> Result<(), CoeffError> {
        for &t in times {
            for c in 0..grid.n_cells() {
                let (x, y) = grid.center(c);
                let value = self.eval(x, y, t);
                if !value.is_finite() || value < self.lower || value > self.upper {
                    return Err(CoeffError::OutOfBounds {
                        context: context.to_string(),
                        value,
                        x,
                        y,
                        t,
                        lower: self.lower,
                        upper: self.upper,
                    });
                }
            }
        }
        if let Some(limit) = &self.limit {
            // Probe convergence far in the future; catches limits that are
            // simply wrong (e.g. an oscillating rule with a declared limit).
            let t_probe = 1.0e6;
            let tol = 1e-3 * self.upper.max(1.0);
            for c in 0..grid.n_cells() {
                let (x, y) = grid.center(c);
                let gap = (self.eval(x, y, t_probe) - limit.eval(x, y, 0.0)).abs();
                if !(gap <= tol) {
                    return Err(CoeffError::LimitNotReached {
                        context: context.to_string(),
                        gap,
                        t: t_probe,
                    });
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> Grid {
        Grid::line(1.0, 8).unwrap()
    }

    #[test]
    fn constant_diffusion_bounds_collapse() {
        let c = CoefficientSampler::constant_diffusion(0.4).unwrap();
        assert_eq!(c.lower(), 0.4);
        assert_eq!(c.upper(), 0.4);
        assert_eq!(c.eval(0.3, 0.0, 7.0), 0.4);
        assert!(c.limit_kind().is_some());
        c.validate_on_grid(grid(), &[0.0, 10.0], "d1").unwrap();
    }

    #[test]
    fn rejects_nonpositive_lower_bound() {
        let err =
            CoefficientSampler::diffusion(SamplerKind::Constant(1.0), 0.0, 1.0, "d1").unwrap_err();
        assert!(matches!(err, CoeffError::NonpositiveLower { .. }));
    }

    #[test]
    fn time_varying_sampler_within_declared_bounds() {
        let expr = Expr::parse("2 + sin(t)").unwrap();
        let c =
            CoefficientSampler::diffusion(SamplerKind::SpaceTime(expr), 1.0, 3.0, "d2").unwrap();
        c.validate_on_grid(grid(), &[0.0, 4.0], "d2").unwrap();
        assert!(c.limit_kind().is_none());
    }

    #[test]
    fn bounds_violation_is_reported_with_location() {
        let expr = Expr::parse("2 + sin(t)").unwrap();
        let c =
            CoefficientSampler::diffusion(SamplerKind::SpaceTime(expr), 1.5, 3.0, "d2").unwrap();
        // sin(4.8) < -0.99, so the sample dips below 1.5.
        let err = c.validate_on_grid(grid(), &[4.8], "d2").unwrap_err();
        assert!(matches!(err, CoeffError::OutOfBounds { .. }));
    }

    #[test]
    fn limit_profile_probe() {
        let rule = Expr::parse("2 + exp(-t)").unwrap();
        let good = CoefficientSampler::diffusion(SamplerKind::SpaceTime(rule.clone()), 1.0, 3.5, "d1")
            .unwrap()
            .with_limit(SamplerKind::Constant(2.0), None, "d1")
            .unwrap();
        good.validate_on_grid(grid(), &[0.0], "d1").unwrap();

        let bad = CoefficientSampler::diffusion(SamplerKind::SpaceTime(rule), 1.0, 3.5, "d1")
            .unwrap()
            .with_limit(SamplerKind::Constant(3.0), None, "d1")
            .unwrap();
        assert!(matches!(
            bad.validate_on_grid(grid(), &[0.0], "d1").unwrap_err(),
            CoeffError::LimitNotReached { .. }
        ));
    }

    #[test]
    fn limit_rejects_time_dependence() {
        let c = CoefficientSampler::constant_diffusion(1.0).unwrap();
        let err = c
            .with_limit(
                SamplerKind::SpaceTime(Expr::parse("1 + t").unwrap()),
                None,
                "d1",
            )
            .unwrap_err();
        assert!(matches!(err, CoeffError::ForbiddenVariable { .. }));
    }

    #[test]
    fn influx_allows_zero_bound() {
        let c = CoefficientSampler::constant_influx(0.0).unwrap();
        c.validate_on_grid(grid(), &[0.0, 1.0], "b").unwrap();
    }
}
