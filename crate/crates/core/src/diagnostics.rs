//! Energy functionals, attractor distances and the per-step diagnostics
//! series.
//!
//! Two energy variants are tracked side by side because the source defines
//! them inconsistently: the *statement* variant
//! `Y4 = int(S^2 + I^2 + R^2 + B^2)` is used for boundedness checks, the
//! *proof* variant `Y3 = (1/2) int(S^2 + I^2 + R^2)` drives the decay
//! envelope
//!
//! ```text
//! env(t) = exp(-(d - g0) t / 2) * (Y(0) - 1) + 2 b0 |Omega| / (d - g0)
//! ```
//!
//! which is recorded verbatim as an informational column; the quantitative
//! decay gate lives in the verification suites and fits the rate instead.
//!
//! The attractor distance splits as J1 = (1/2) int (S - S_inf)^2,
//! J2, J3, J4 likewise against zero, and J = J1 + J2 + J3.

use crate::model::{attractor_condition, Parameters, Species};
use crate::stepper::{Observer, RunOutcome, SimulationConfig, State, StepEvent};
use crate::steady::{attractor_target, SteadyError, SteadyProblem};
use std::cell::RefCell;
use std::io::{self, Write};
use std::rc::Rc;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DiagnosticsError {
    #[error("decay envelope needs d - g0 > 0 (margin {0})")]
    EnvelopeInapplicable(f64),
    #[error("attractor target unavailable: {0}")]
    NoTarget(#[from] SteadyError),
}

/// Which definition of the energy functional to evaluate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum YVariant {
    /// `int (S^2 + I^2 + R^2 + B^2)`.
    Statement,
    /// `(1/2) int (S^2 + I^2 + R^2)`.
    Proof,
}

/// Evaluates the energy functional in the requested variant.
pub fn energy_y(state: &State, variant: YVariant) -> f64 {
    let sq = |sp: Species| state.field(sp).l2_squared();
    match variant {
        YVariant::Statement => sq(Species::S) + sq(Species::I) + sq(Species::R) + sq(Species::B),
        YVariant::Proof => 0.5 * (sq(Species::S) + sq(Species::I) + sq(Species::R)),
    }
}

/// The decay envelope evaluated verbatim:
/// `exp(-(d-g0) t / 2) (Y0 - 1) + 2 b0 |Omega| / (d - g0)`.
pub fn decay_envelope(
    t: f64,
    y0: f64,
    params: &Parameters,
    volume: f64,
    b0: f64,
) -> Result<f64, DiagnosticsError> {
    let (ok, margin) = attractor_condition(params);
    if !ok {
        return Err(DiagnosticsError::EnvelopeInapplicable(margin));
    }
    Ok((-margin * t / 2.0).exp() * (y0 - 1.0) + 2.0 * b0 * volume / margin)
}

/// Squared L2 distances to a target state, halved per component.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct JComponents {
    pub j1: f64,
    pub j2: f64,
    pub j3: f64,
    pub j4: f64,
    /// J = J1 + J2 + J3 (the host part only).
    pub j: f64,
}

/// Computes J1..J4 and J against `target` (normally (S_inf, 0, 0, 0)).
pub fn attractor_distance(state: &State, target: &State) -> JComponents {
    assert!(
        state.grid() == target.grid(),
        "state and target live on different grids"
    );
    let vol = state.grid().cell_volume();
    let half_sq = |sp: Species| -> f64 {
        let a = state.field(sp).values();
        let b = target.field(sp).values();
        0.5 * a
            .iter()
            .zip(b)
            .map(|(x, y)| (x - y) * (x - y))
            .sum::<f64>()
            * vol
    };
    let j1 = half_sq(Species::S);
    let j2 = half_sq(Species::I);
    let j3 = half_sq(Species::R);
    let j4 = half_sq(Species::B);
    JComponents {
        j1,
        j2,
        j3,
        j4,
        j: j1 + j2 + j3,
    }
}

/// One sampled row of the diagnostics series.
#[derive(Clone, Debug, PartialEq)]
pub struct DiagnosticsRecord {
    pub t: f64,
    /// Per-species L1 masses.
    pub masses: [f64; 4],
    /// Proof-variant energy.
    pub y3: f64,
    /// Statement-variant energy.
    pub y4: f64,
    pub j: JComponents,
    /// Envelope value at t; NaN when d - g0 <= 0 or no target exists.
    pub envelope: f64,
    pub min_values: [f64; 4],
}

/// CSV header of the diagnostics series.
pub const CSV_HEADER: &str =
    "t,mass_S,mass_I,mass_R,mass_B,Y3,Y4,J1,J2,J3,J4,J,envelope,min_S,min_I,min_R,min_B";

impl DiagnosticsRecord {
    pub fn csv_row(&self) -> String {
        let m = &self.masses;
        let v = &self.min_values;
        format!(
            "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
            self.t,
            m[0],
            m[1],
            m[2],
            m[3],
            self.y3,
            self.y4,
            self.j.j1,
            self.j.j2,
            self.j.j3,
            self.j.j4,
            self.j.j,
            self.envelope,
            v[0],
            v[1],
            v[2],
            v[3],
        )
    }
}

/// Writes a diagnostics series as CSV.
pub fn write_csv<W: Write>(mut w: W, records: &[DiagnosticsRecord]) -> io::Result<()> {
    writeln!(w, "{CSV_HEADER}")?;
    for rec in records {
        writeln!(w, "{}", rec.csv_row())?;
    }
    Ok(())
}

/// Accumulates diagnostics records during a run.
///
/// When no attractor target is available (time-dependent coefficients
/// without configured limits), J1 and J are reported as NaN; J2..J4 do not
/// depend on the target and are always real.
pub struct DiagnosticsCollector {
    target: Option<State>,
    envelope_params: Option<(Parameters, f64, f64)>, // params, volume, b0
    y0_proof: Option<f64>,
    records: Vec<DiagnosticsRecord>,
}

impl DiagnosticsCollector {
    pub fn new(cfg: &SimulationConfig, target: Option<State>) -> Self {
        let (ok, _) = attractor_condition(&cfg.params);
        let envelope_params = if ok {
            Some((cfg.params.clone(), cfg.grid.volume(), cfg.influx.upper()))
        } else {
            None
        };
        Self {
            target,
            envelope_params,
            y0_proof: None,
            records: Vec::new(),
        }
    }

    pub fn record(&mut self, t: f64, state: &State, min_values: [f64; 4]) {
        let y3 = energy_y(state, YVariant::Proof);
        let y4 = energy_y(state, YVariant::Statement);
        let y0 = *self.y0_proof.get_or_insert(y3);
        let j = match &self.target {
            Some(target) => attractor_distance(state, target),
            None => {
                let zero = State::constant(state.grid(), [0.0; 4]);
                let mut j = attractor_distance(state, &zero);
                j.j1 = f64::NAN;
                j.j = f64::NAN;
                j
            }
        };
        let envelope = match &self.envelope_params {
            Some((params, volume, b0)) => decay_envelope(t, y0, params, *volume, *b0)
                .unwrap_or(f64::NAN),
            None => f64::NAN,
        };
        self.records.push(DiagnosticsRecord {
            t,
            masses: state.masses(),
            y3,
            y4,
            j,
            envelope,
            min_values,
        });
    }

    pub fn records(&self) -> &[DiagnosticsRecord] {
        &self.records
    }

    pub fn into_records(self) -> Vec<DiagnosticsRecord> {
        self.records
    }
}

/// Builds the steady problem implied by the configured coefficient limits,
/// if both the d1 and influx samplers have one.
pub fn steady_problem_from_config(cfg: &SimulationConfig) -> Option<SteadyProblem> {
    let d1_inf = cfg.diffusion[0].limit_field(cfg.grid)?;
    let b0_profile = cfg.influx.limit_field(cfg.grid)?;
    Some(SteadyProblem {
        grid: cfg.grid,
        d1_inf,
        b0_profile,
        d: cfg.params.d,
    })
}

/// Output of [`simulate`]: the run outcome plus the diagnostics series.
pub struct SimulationOutput {
    pub outcome: RunOutcome,
    pub records: Vec<DiagnosticsRecord>,
    /// The attractor target used for J, when one was available.
    pub target: Option<State>,
}

/// Runs a simulation and collects the diagnostics series at the configured
/// cadence. The attractor target is solved from the coefficient limits when
/// available.
pub fn simulate(cfg: &SimulationConfig) -> Result<SimulationOutput, DiagnosticsError> {
    let target = match steady_problem_from_config(cfg) {
        Some(prob) => Some(attractor_target(&prob, 1e-10)?.0),
        None => None,
    };
    let collector = Rc::new(RefCell::new(DiagnosticsCollector::new(cfg, target.clone())));
    let handle = Rc::clone(&collector);
    let mut observers: Vec<Observer<'_>> = vec![Box::new(move |event: &StepEvent<'_>| {
        let min_values = match event.report {
            Some(report) => report.min_values,
            None => event.state.min_values(),
        };
        handle.borrow_mut().record(event.t, event.state, min_values);
        Ok(())
    })];
    let outcome = crate::stepper::run(cfg, &mut observers);
    drop(observers);
    let records = Rc::try_unwrap(collector)
        .unwrap_or_else(|_| panic!("collector still shared"))
        .into_inner()
        .into_records();
    Ok(SimulationOutput {
        outcome,
        records,
        target,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{Field, Grid};

    fn unit_grid() -> Grid {
        Grid::line(1.0, 4).unwrap()
    }

    #[test]
    fn energy_variants_on_simple_states() {
        let grid = unit_grid();
        let state = State::new(
            Field::constant(grid, 1.0),
            Field::constant(grid, 0.0),
            Field::constant(grid, 0.0),
            Field::constant(grid, 0.0),
        );
        assert_eq!(energy_y(&state, YVariant::Proof), 0.5);
        assert_eq!(energy_y(&state, YVariant::Statement), 1.0);
        let zero = State::constant(grid, [0.0; 4]);
        assert_eq!(energy_y(&zero, YVariant::Proof), 0.0);
        assert_eq!(energy_y(&zero, YVariant::Statement), 0.0);
    }

    #[test]
    fn energy_scales_quadratically() {
        let grid = unit_grid();
        let state = State::new(
            Field::from_fn(grid, |x, _| 1.0 + x),
            Field::constant(grid, 0.5),
            Field::from_fn(grid, |x, _| x),
            Field::constant(grid, 0.25),
        );
        let lambda = 0.6;
        let scaled = State::new(
            Field::from_fn(grid, |x, _| lambda * (1.0 + x)),
            Field::constant(grid, lambda * 0.5),
            Field::from_fn(grid, |x, _| lambda * x),
            Field::constant(grid, lambda * 0.25),
        );
        for variant in [YVariant::Proof, YVariant::Statement] {
            let full = energy_y(&state, variant);
            let small = energy_y(&scaled, variant);
            assert!((small - lambda * lambda * full).abs() < 1e-14 * full);
        }
    }

    #[test]
    fn envelope_special_values() {
        let mut p = Parameters::uniform(1.0);
        p.d = 1.5; // margin 0.5
        let vol = 2.0;
        let b0 = 0.75;
        let tail = 2.0 * b0 * vol / 0.5;
        let e0 = decay_envelope(0.0, 3.0, &p, vol, b0).unwrap();
        assert!((e0 - (2.0 + tail)).abs() < 1e-14);
        let late = decay_envelope(1e6, 3.0, &p, vol, b0).unwrap();
        assert!((late - tail).abs() < 1e-12);
        let flat = decay_envelope(17.3, 1.0, &p, vol, b0).unwrap();
        assert!((flat - tail).abs() < 1e-14);
    }

    #[test]
    fn envelope_rejects_nonpositive_margin() {
        let p = Parameters::uniform(1.0); // d = 1, g0 = 1
        assert!(matches!(
            decay_envelope(0.0, 1.0, &p, 1.0, 1.0),
            Err(DiagnosticsError::EnvelopeInapplicable(_))
        ));
    }

    #[test]
    fn distance_vanishes_on_target() {
        let grid = unit_grid();
        let state = State::new(
            Field::from_fn(grid, |x, _| 1.0 + x),
            Field::constant(grid, 0.2),
            Field::constant(grid, 0.1),
            Field::constant(grid, 0.3),
        );
        let j = attractor_distance(&state, &state.clone());
        assert_eq!((j.j1, j.j2, j.j3, j.j4, j.j), (0.0, 0.0, 0.0, 0.0, 0.0));
    }

    #[test]
    fn distance_single_component() {
        // S matches the target, I = 1 on a unit-volume domain: J2 = 1/2.
        let grid = unit_grid();
        let s_inf = Field::from_fn(grid, |x, _| 2.0 - x);
        let state = State::new(
            s_inf.clone(),
            Field::constant(grid, 1.0),
            Field::constant(grid, 0.0),
            Field::constant(grid, 0.0),
        );
        let target = State::new(
            s_inf,
            Field::constant(grid, 0.0),
            Field::constant(grid, 0.0),
            Field::constant(grid, 0.0),
        );
        let j = attractor_distance(&state, &target);
        assert_eq!(j.j2, 0.5);
        assert_eq!(j.j, 0.5);
        assert_eq!(j.j1, 0.0);
    }

    #[test]
    fn distance_matches_hand_sums() {
        let grid = Grid::line(1.0, 8).unwrap();
        let vals: Vec<f64> = (0..8).map(|c| (c as f64 * 1.37).sin()).collect();
        let state = State::new(
            Field::from_values(grid, vals.clone()),
            Field::constant(grid, 0.0),
            Field::constant(grid, 0.0),
            Field::constant(grid, 0.0),
        );
        let target = State::constant(grid, [0.0; 4]);
        let j = attractor_distance(&state, &target);
        let by_hand: f64 = vals.iter().map(|v| v * v).sum::<f64>() * 0.125 * 0.5;
        assert!((j.j1 - by_hand).abs() < 1e-15);
        assert_eq!(j.j, j.j1 + j.j2 + j.j3);
    }

    #[test]
    fn csv_rows_have_header_arity() {
        let grid = unit_grid();
        let state = State::constant(grid, [1.0, 0.5, 0.2, 0.1]);
        let mut collector = DiagnosticsCollector::new(
            &crate::stepper::SimulationConfig::new(
                grid,
                {
                    let mut p = Parameters::uniform(1.0);
                    p.d = 1.5;
                    p
                },
                [
                    crate::coeff::CoefficientSampler::constant_diffusion(0.1).unwrap(),
                    crate::coeff::CoefficientSampler::constant_diffusion(0.1).unwrap(),
                    crate::coeff::CoefficientSampler::constant_diffusion(0.1).unwrap(),
                    crate::coeff::CoefficientSampler::constant_diffusion(0.1).unwrap(),
                ],
                crate::coeff::CoefficientSampler::constant_influx(0.5).unwrap(),
                state.clone(),
                1.0,
            ),
            Some(State::constant(grid, [0.5, 0.0, 0.0, 0.0])),
        );
        collector.record(0.0, &state, state.min_values());
        let row = collector.records()[0].csv_row();
        assert_eq!(row.split(',').count(), CSV_HEADER.split(',').count());
    }
}
