//! Time integration with guaranteed nonnegativity.
//!
//! One step is an operator split:
//!
//! 1. explicit reaction update in production/destruction form, with the
//!    step size limited so that `u + dt*(P - D*u) >= 0` holds cellwise
//!    (`dt <= safety / max D`); upwind convection of B joins this stage;
//! 2. per-species backward-Euler diffusion `(I - dt*L) u_new = u_star`
//!    with coefficients sampled at the end of the step. The matrix is an
//!    M-matrix, so this stage maps nonnegative data to nonnegative data.
//!
//! Reaction coefficients are sampled at the start of the step, diffusion
//! coefficients at the end; the scheme is first order in time and second
//! order in space. Any negative output or solver failure rejects the step,
//! halves dt and retries (up to a cap); negative values are never clipped.

use crate::coeff::CoefficientSampler;
use crate::grid::{Field, Grid};
use crate::linsolve::{solve, ShiftedDiffusion, SolveError};
use crate::model::{pd_split, Parameters, Species};
use crate::operators::{convect, DiffusionStencil};
use crate::linsolve::SolveReport;
use std::fmt;
use std::sync::Arc;
use thiserror::Error;

/// Additive per-species source term q(x, y, t); used by manufactured
/// solutions, not by the model itself.
pub type SourceFn = Arc<dyn Fn(f64, f64, f64) -> f64 + Send + Sync>;

#[derive(Debug, Error)]
pub enum StepError {
    #[error("configuration error: {0}")]
    InvalidConfig(String),
    #[error("linear solve failed for species {species} at t = {t}: {source}")]
    Solve {
        species: &'static str,
        t: f64,
        #[source]
        source: SolveError,
    },
    #[error("non-finite value in species {species} at t = {t}")]
    NonFinite { species: &'static str, t: f64 },
    #[error(
        "step at t = {t} still produced a negative value ({min:.3e}) after {rejections} halvings"
    )]
    RejectionLimit { t: f64, rejections: u32, min: f64 },
}

/// The four species fields at one time level.
#[derive(Clone, Debug, PartialEq)]
pub struct State {
    fields: [Field; 4],
}

impl State {
    /// Panics if the fields do not share one grid.
    pub fn new(s: Field, i: Field, r: Field, b: Field) -> Self {
        assert!(
            s.grid() == i.grid() && s.grid() == r.grid() && s.grid() == b.grid(),
            "state fields live on different grids"
        );
        Self {
            fields: [s, i, r, b],
        }
    }

    pub fn constant(grid: Grid, values: [f64; 4]) -> Self {
        Self {
            fields: values.map(|v| Field::constant(grid, v)),
        }
    }

    pub fn grid(&self) -> Grid {
        self.fields[0].grid()
    }

    pub fn field(&self, sp: Species) -> &Field {
        &self.fields[sp.index()]
    }

    pub fn fields(&self) -> &[Field; 4] {
        &self.fields
    }

    pub fn fields_mut(&mut self) -> &mut [Field; 4] {
        &mut self.fields
    }

    /// Per-species minima.
    pub fn min_values(&self) -> [f64; 4] {
        [
            self.fields[0].min(),
            self.fields[1].min(),
            self.fields[2].min(),
            self.fields[3].min(),
        ]
    }

    /// Per-species volume-weighted L1 masses.
    pub fn masses(&self) -> [f64; 4] {
        [
            self.fields[0].l1(),
            self.fields[1].l1(),
            self.fields[2].l1(),
            self.fields[3].l1(),
        ]
    }

    pub fn is_finite(&self) -> bool {
        self.fields.iter().all(Field::is_finite)
    }

    pub fn is_nonnegative(&self) -> bool {
        self.min_values().iter().all(|&m| m >= 0.0)
    }
}

/// Everything one simulation needs.
#[derive(Clone)]
pub struct SimulationConfig {
    pub grid: Grid,
    pub params: Parameters,
    /// Diffusion coefficient samplers for S, I, R, B in that order.
    pub diffusion: [CoefficientSampler; 4],
    /// Susceptible influx b(x, t).
    pub influx: CoefficientSampler,
    pub initial: State,
    pub t_end: f64,
    pub dt_max: f64,
    /// Relative residual tolerance of the implicit solves.
    pub solver_tol: f64,
    /// Positivity step-size safety factor in (0, 1].
    pub positivity_safety: f64,
    /// Observers fire every this many accepted steps.
    pub observer_cadence: usize,
    /// Maximum dt halvings per step before giving up.
    pub max_rejections: u32,
    /// Linear iteration cap as a multiple of the cell count.
    pub iter_cap_factor: usize,
    /// Hard cap on accepted steps per run.
    pub max_steps: usize,
    /// Manufactured-solution sources, if any.
    pub sources: Option<[SourceFn; 4]>,
    /// Verification hook: when false, the positivity step limit and the
    /// negative-output rejection are both disabled so that detector suites
    /// can watch the scheme fail. Always true in normal use.
    pub positivity_guard: bool,
}

impl fmt::Debug for SimulationConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SimulationConfig")
            .field("grid", &self.grid)
            .field("params", &self.params)
            .field("t_end", &self.t_end)
            .field("dt_max", &self.dt_max)
            .field("solver_tol", &self.solver_tol)
            .field("positivity_safety", &self.positivity_safety)
            .field("sources", &self.sources.is_some())
            .field("positivity_guard", &self.positivity_guard)
            .finish_non_exhaustive()
    }
}

impl SimulationConfig {
    /// A config with conventional run controls; callers fill in the physics.
    pub fn new(
        grid: Grid,
        params: Parameters,
        diffusion: [CoefficientSampler; 4],
        influx: CoefficientSampler,
        initial: State,
        t_end: f64,
    ) -> Self {
        Self {
            grid,
            params,
            diffusion,
            influx,
            initial,
            t_end,
            dt_max: 0.05,
            solver_tol: 1e-10,
            positivity_safety: 0.9,
            observer_cadence: 1,
            max_rejections: 20,
            iter_cap_factor: 10,
            max_steps: 50_000_000,
            sources: None,
            positivity_guard: true,
        }
    }

    pub fn validate(&self) -> Result<(), StepError> {
        let bad = |msg: String| Err(StepError::InvalidConfig(msg));
        self.params
            .validate()
            .map_err(|e| StepError::InvalidConfig(e.to_string()))?;
        self.params
            .validate_velocity(self.grid.dim())
            .map_err(|e| StepError::InvalidConfig(e.to_string()))?;
        if self.initial.grid() != self.grid {
            return bad("initial fields do not live on the configured grid".into());
        }
        if !self.initial.is_finite() {
            return bad("initial fields contain non-finite values".into());
        }
        let mins = self.initial.min_values();
        for (sp, &m) in Species::ALL.iter().zip(&mins) {
            if m < 0.0 {
                return bad(format!(
                    "initial data for {} has a negative value ({m})",
                    sp.name()
                ));
            }
        }
        if !(self.t_end >= 0.0) || !self.t_end.is_finite() {
            return bad(format!("t_end must be nonnegative (got {})", self.t_end));
        }
        if !(self.dt_max > 0.0) {
            return bad(format!("dt_max must be positive (got {})", self.dt_max));
        }
        if !(self.solver_tol > 0.0) {
            return bad(format!(
                "solver_tol must be positive (got {})",
                self.solver_tol
            ));
        }
        if !(self.positivity_safety > 0.0 && self.positivity_safety <= 1.0) {
            return bad(format!(
                "positivity_safety must lie in (0, 1] (got {})",
                self.positivity_safety
            ));
        }
        if self.observer_cadence == 0 {
            return bad("observer_cadence must be at least 1".into());
        }
        let times = [0.0, self.t_end];
        for (idx, sampler) in self.diffusion.iter().enumerate() {
            sampler
                .validate_on_grid(self.grid, &times, &format!("d{}", idx + 1))
                .map_err(|e| StepError::InvalidConfig(e.to_string()))?;
        }
        self.influx
            .validate_on_grid(self.grid, &times, "b")
            .map_err(|e| StepError::InvalidConfig(e.to_string()))?;
        Ok(())
    }
}

/// Report for one accepted step.
#[derive(Clone, Debug, PartialEq)]
pub struct StepReport {
    pub t_new: f64,
    pub dt_used: f64,
    /// Linear iterations per species (1 marks the direct 1D solve).
    pub linear_iterations: [usize; 4],
    /// Per-species minima of the accepted state.
    pub min_values: [f64; 4],
    /// How many halvings were needed before acceptance.
    pub rejections: u32,
}

/// Largest explicit step that keeps the reaction update nonnegative:
/// `min(dt_max, safety / D_max)` where `D_max` is the largest pointwise
/// destruction rate over species and cells. Upwind convection contributes
/// `sum_k |b_k| / h_k` to the bacteria destruction rate.
///
/// `b_influx` is accepted for signature completeness; production terms never
/// tighten the limit.
pub fn positivity_dt(
    state: &State,
    params: &Parameters,
    b_influx: &Field,
    dt_max: f64,
    safety: f64,
) -> Result<f64, StepError> {
    let _ = b_influx;
    let d_max = max_destruction_rate(state, params);
    let dt = if d_max > 0.0 {
        dt_max.min(safety / d_max)
    } else {
        dt_max
    };
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(StepError::InvalidConfig(format!(
            "computed positivity step is not positive (dt = {dt}, D_max = {d_max})"
        )));
    }
    Ok(dt)
}

fn max_destruction_rate(state: &State, params: &Parameters) -> f64 {
    let p = params;
    let i_vals = state.field(Species::I).values();
    let b_vals = state.field(Species::B).values();
    // Species 2 and 3 have state-independent rates.
    let mut d_max = (p.d + p.gamma).max(p.d + p.sigma);
    let logistic = matches!(p.growth, crate::model::GrowthForm::Logistic);
    for c in 0..i_vals.len() {
        let h = b_vals[c] / (b_vals[c] + p.k);
        let d1 = p.beta1 * i_vals[c] + p.beta2 * h + p.d;
        let d4 = if logistic {
            p.delta + p.g * b_vals[c] / p.k
        } else {
            p.delta
        };
        d_max = d_max.max(d1).max(d4);
    }
    if p.has_convection() {
        let grid = state.grid();
        let spacing = grid.spacing();
        let mut conv_rate = 0.0;
        for (axis, &v) in p.velocity.iter().enumerate() {
            conv_rate += v.abs() / spacing[axis];
        }
        d_max = d_max.max(p.delta + conv_rate);
    }
    d_max
}

/// Advances the state by one accepted step.
///
/// The proposed dt comes from [`positivity_dt`] capped by `dt_max` and the
/// remaining time to `t_end`; on a negative output or a solver failure the
/// step is retried with halved dt, up to `max_rejections` times.
pub fn step(state: &State, t: f64, cfg: &SimulationConfig) -> Result<(State, StepReport), StepError> {
    let grid = cfg.grid;
    let influx_field = cfg.influx.sample_field(grid, t);
    let dt_prop = if cfg.positivity_guard {
        positivity_dt(
            state,
            &cfg.params,
            &influx_field,
            cfg.dt_max,
            cfg.positivity_safety,
        )?
    } else {
        cfg.dt_max
    };
    let remaining = cfg.t_end - t;
    let dt_full = dt_prop.min(remaining);
    if !(dt_full > 0.0) {
        return Err(StepError::InvalidConfig(format!(
            "no time left to step (t = {t}, t_end = {})",
            cfg.t_end
        )));
    }

    // Convection depends only on the current state; reuse across halvings.
    let convection = if cfg.params.has_convection() {
        Some(convect(
            state.field(Species::B),
            &cfg.params.velocity,
            t,
        ))
    } else {
        None
    };

    let mut worst_min = f64::INFINITY;
    for halving in 0..=cfg.max_rejections {
        let dt = dt_full * 0.5_f64.powi(halving as i32);
        match try_step(state, t, dt, &influx_field, convection.as_ref(), cfg) {
            Ok((next, iterations)) => {
                for (sp, field) in Species::ALL.iter().zip(next.fields()) {
                    if !field.is_finite() {
                        return Err(StepError::NonFinite {
                            species: sp.name(),
                            t,
                        });
                    }
                }
                let min_values = next.min_values();
                let min = min_values.iter().cloned().fold(f64::INFINITY, f64::min);
                if cfg.positivity_guard && min < 0.0 {
                    worst_min = worst_min.min(min);
                    continue;
                }
                return Ok((
                    next,
                    StepReport {
                        t_new: t + dt,
                        dt_used: dt,
                        linear_iterations: iterations,
                        min_values,
                        rejections: halving,
                    },
                ));
            }
            Err(err @ StepError::Solve { .. }) => {
                if halving == cfg.max_rejections {
                    return Err(err);
                }
                // retry with smaller dt
            }
            Err(err) => return Err(err),
        }
    }
    Err(StepError::RejectionLimit {
        t,
        rejections: cfg.max_rejections,
        min: worst_min,
    })
}

fn try_step(
    state: &State,
    t: f64,
    dt: f64,
    influx_field: &Field,
    convection: Option<&Field>,
    cfg: &SimulationConfig,
) -> Result<(State, [usize; 4]), StepError> {
    let grid = cfg.grid;
    let n = grid.n_cells();
    let p = &cfg.params;

    // Stage 1: explicit reaction in production/destruction form.
    let s = state.field(Species::S).values();
    let i = state.field(Species::I).values();
    let r = state.field(Species::R).values();
    let b = state.field(Species::B).values();
    let influx = influx_field.values();
    let mut star = [
        vec![0.0; n],
        vec![0.0; n],
        vec![0.0; n],
        vec![0.0; n],
    ];
    for c in 0..n {
        let split = pd_split(s[c], i[c], r[c], b[c], influx[c], p);
        let u = [s[c], i[c], r[c], b[c]];
        for k in 0..4 {
            star[k][c] = u[k] + dt * (split.production[k] - split.destruction[k] * u[k]);
        }
    }
    if let Some(conv) = convection {
        let cv = conv.values();
        for c in 0..n {
            star[3][c] += dt * cv[c];
        }
    }
    if let Some(sources) = &cfg.sources {
        for (k, source) in sources.iter().enumerate() {
            for c in 0..n {
                let (x, y) = grid.center(c);
                star[k][c] += dt * source(x, y, t);
            }
        }
    }

    // Stage 2: implicit diffusion per species, coefficients at t + dt.
    let iter_cap = cfg.iter_cap_factor * n;
    let mut iterations = [0usize; 4];
    let mut out: [Option<Field>; 4] = [None, None, None, None];
    for (k, sp) in Species::ALL.iter().enumerate() {
        let stencil = DiffusionStencil::build(grid, &cfg.diffusion[k], t + dt);
        let op = ShiftedDiffusion {
            stencil: &stencil,
            shift: 1.0,
            scale: dt,
        };
        let (solution, report): (Vec<f64>, SolveReport) =
            solve(&op, &star[k], cfg.solver_tol, iter_cap).map_err(|e| StepError::Solve {
                species: sp.name(),
                t,
                source: e,
            })?;
        iterations[k] = report.iterations;
        out[k] = Some(Field::from_values(grid, solution));
    }
    let [o0, o1, o2, o3] = out;
    Ok((
        State::new(o0.unwrap(), o1.unwrap(), o2.unwrap(), o3.unwrap()),
        iterations,
    ))
}

/// Event handed to run observers.
pub struct StepEvent<'a> {
    pub t: f64,
    pub step_index: usize,
    pub state: &'a State,
    pub report: Option<&'a StepReport>,
}

/// Observer callback; errors are logged and isolated, never fatal.
pub type Observer<'a> = Box<dyn FnMut(&StepEvent<'_>) -> Result<(), String> + 'a>;

/// Result of a full run; on abort the partial state and series are kept.
#[derive(Debug)]
pub struct RunOutcome {
    pub state: State,
    pub t: f64,
    pub steps: usize,
    pub reports: Vec<StepReport>,
    pub abort: Option<StepError>,
}

impl RunOutcome {
    pub fn aborted(&self) -> bool {
        self.abort.is_some()
    }

    /// Smallest value seen across all species, cells and accepted steps.
    pub fn global_min(&self) -> f64 {
        self.reports
            .iter()
            .flat_map(|r| r.min_values.iter().copied())
            .fold(f64::INFINITY, f64::min)
    }
}

/// Integrates from t = 0 to `cfg.t_end`, invoking observers at the
/// configured cadence (plus the initial and final states). A run with
/// `t_end = 0` returns the initial state untouched and an empty series.
pub fn run(cfg: &SimulationConfig, observers: &mut [Observer<'_>]) -> RunOutcome {
    let mut outcome = RunOutcome {
        state: cfg.initial.clone(),
        t: 0.0,
        steps: 0,
        reports: Vec::new(),
        abort: None,
    };
    if let Err(e) = cfg.validate() {
        outcome.abort = Some(e);
        return outcome;
    }
    if cfg.t_end <= 0.0 {
        return outcome;
    }

    notify(
        observers,
        &StepEvent {
            t: 0.0,
            step_index: 0,
            state: &outcome.state,
            report: None,
        },
    );

    let time_floor = 1e-12 * cfg.t_end.max(1.0);
    let mut last_notified = 0usize;
    while cfg.t_end - outcome.t > time_floor && outcome.steps < cfg.max_steps {
        match step(&outcome.state, outcome.t, cfg) {
            Ok((next, report)) => {
                outcome.state = next;
                outcome.t = report.t_new;
                outcome.steps += 1;
                let fire = outcome.steps % cfg.observer_cadence == 0;
                outcome.reports.push(report);
                if fire {
                    let report_ref = outcome.reports.last();
                    notify(
                        observers,
                        &StepEvent {
                            t: outcome.t,
                            step_index: outcome.steps,
                            state: &outcome.state,
                            report: report_ref,
                        },
                    );
                    last_notified = outcome.steps;
                }
            }
            Err(e) => {
                outcome.abort = Some(e);
                break;
            }
        }
    }
    if outcome.steps > 0 && last_notified != outcome.steps {
        notify(
            observers,
            &StepEvent {
                t: outcome.t,
                step_index: outcome.steps,
                state: &outcome.state,
                report: outcome.reports.last(),
            },
        );
    }
    outcome
}

fn notify(observers: &mut [Observer<'_>], event: &StepEvent<'_>) {
    for obs in observers.iter_mut() {
        if let Err(msg) = obs(event) {
            log::warn!("observer error at t = {}: {msg}", event.t);
        }
    }
}
