//! Parameter sweeps over the threshold condition.
//!
//! A sweep varies one or more scalar model rates on a uniform lattice,
//! runs each point to its configured horizon and classifies it by whether
//! the attractor distance collapsed: attractor reached iff
//! `J(t_end) / J(0) < threshold`. Rows carry the margin d - g0 so the
//! transition can be read directly off the CSV.

use crate::diagnostics::{attractor_distance, simulate, steady_problem_from_config};
use crate::model::{attractor_condition, Parameters};
use crate::steady::attractor_target;
use crate::stepper::SimulationConfig;
use rayon::prelude::*;
use thiserror::Error;

/// Names of the real-valued parameters a sweep may vary.
pub const AXIS_NAMES: [&str; 9] = [
    "d", "gamma", "sigma", "delta", "xi", "g", "K", "beta1", "beta2",
];

#[derive(Debug, Error)]
pub enum SweepError {
    #[error("sweep point {index} failed: {message}")]
    Point { index: usize, message: String },
    #[error("sweep needs coefficient limits to solve the attractor target")]
    NoTarget,
}

/// One lattice axis over a named parameter.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepAxis {
    pub name: String,
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl SweepAxis {
    pub fn value(&self, idx: usize) -> f64 {
        if self.count == 1 {
            return self.min;
        }
        self.min + (self.max - self.min) * idx as f64 / (self.count - 1) as f64
    }
}

/// The sweep request: axes, per-point horizon, classification threshold.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepSpec {
    pub axes: Vec<SweepAxis>,
    pub t_end: f64,
    pub threshold: f64,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<(), String> {
        if self.axes.is_empty() {
            return Err("sweep needs at least one axis".into());
        }
        for axis in &self.axes {
            if !AXIS_NAMES.contains(&axis.name.as_str()) {
                return Err(format!(
                    "axis '{}' does not name a model parameter (expected one of {:?})",
                    axis.name, AXIS_NAMES
                ));
            }
            if axis.count < 2 {
                return Err(format!("axis '{}' needs at least 2 points", axis.name));
            }
            if !(axis.min.is_finite() && axis.max.is_finite() && axis.min <= axis.max) {
                return Err(format!("axis '{}' has a bad range", axis.name));
            }
        }
        if !(self.t_end > 0.0) {
            return Err(format!("sweep t_end must be positive (got {})", self.t_end));
        }
        if !(self.threshold > 0.0) {
            return Err(format!(
                "sweep threshold must be positive (got {})",
                self.threshold
            ));
        }
        Ok(())
    }

    pub fn n_points(&self) -> usize {
        self.axes.iter().map(|a| a.count).product()
    }

    /// Axis values at a flat lattice index (first axis varies fastest).
    pub fn point(&self, mut idx: usize) -> Vec<f64> {
        let mut values = Vec::with_capacity(self.axes.len());
        for axis in &self.axes {
            values.push(axis.value(idx % axis.count));
            idx /= axis.count;
        }
        values
    }
}

fn apply_axis(params: &mut Parameters, name: &str, value: f64) {
    match name {
        "d" => params.d = value,
        "gamma" => params.gamma = value,
        "sigma" => params.sigma = value,
        "delta" => params.delta = value,
        "xi" => params.xi = value,
        "g" => params.g = value,
        "K" => params.k = value,
        "beta1" => params.beta1 = value,
        "beta2" => params.beta2 = value,
        other => unreachable!("axis name {other} passed validation"),
    }
}

/// One classified sweep point.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub axis_values: Vec<f64>,
    pub margin: f64,
    pub j_ratio: f64,
    pub attractor_reached: bool,
}

impl SweepRow {
    pub fn classification(&self) -> &'static str {
        if self.attractor_reached {
            "attractor"
        } else {
            "persistent"
        }
    }
}

/// Runs every lattice point and classifies it. Points run in parallel;
/// the returned rows are in lattice order regardless of scheduling.
pub fn run_sweep(base: &SimulationConfig, spec: &SweepSpec) -> Result<Vec<SweepRow>, SweepError> {
    spec.validate()
        .map_err(|message| SweepError::Point { index: 0, message })?;
    let indices: Vec<usize> = (0..spec.n_points()).collect();
    indices
        .par_iter()
        .map(|&index| run_point(base, spec, index))
        .collect()
}

fn run_point(
    base: &SimulationConfig,
    spec: &SweepSpec,
    index: usize,
) -> Result<SweepRow, SweepError> {
    let axis_values = spec.point(index);
    let mut cfg = base.clone();
    cfg.t_end = spec.t_end;
    for (axis, &value) in spec.axes.iter().zip(&axis_values) {
        apply_axis(&mut cfg.params, &axis.name, value);
    }
    cfg.validate().map_err(|e| SweepError::Point {
        index,
        message: e.to_string(),
    })?;
    let (_, margin) = attractor_condition(&cfg.params);

    let prob = steady_problem_from_config(&cfg).ok_or(SweepError::NoTarget)?;
    let (target, _) = attractor_target(&prob, 1e-10).map_err(|e| SweepError::Point {
        index,
        message: e.to_string(),
    })?;
    let j0 = attractor_distance(&cfg.initial, &target).j;

    let output = simulate(&cfg).map_err(|e| SweepError::Point {
        index,
        message: e.to_string(),
    })?;
    if let Some(abort) = &output.outcome.abort {
        return Err(SweepError::Point {
            index,
            message: format!("run aborted: {abort}"),
        });
    }
    let j_end = output.records.last().map(|r| r.j.j).unwrap_or(f64::NAN);
    let j_ratio = j_end / j0.max(1e-300);
    Ok(SweepRow {
        axis_values,
        margin,
        j_ratio,
        attractor_reached: j_ratio < spec.threshold,
    })
}

/// CSV header for the sweep output: axis names, margin, ratio, class.
pub fn csv_header(spec: &SweepSpec) -> String {
    let axes: Vec<&str> = spec.axes.iter().map(|a| a.name.as_str()).collect();
    format!("{},margin,J_ratio,classification", axes.join(","))
}

/// One CSV row in full precision.
pub fn csv_row(row: &SweepRow) -> String {
    let mut cols: Vec<String> = row
        .axis_values
        .iter()
        .map(|v| format!("{v:.16e}"))
        .collect();
    cols.push(format!("{:.16e}", row.margin));
    cols.push(format!("{:.16e}", row.j_ratio));
    cols.push(row.classification().to_string());
    cols.join(",")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn axis_lattice_values() {
        let axis = SweepAxis {
            name: "d".into(),
            min: 0.8,
            max: 2.0,
            count: 13,
        };
        assert!((axis.value(0) - 0.8).abs() < 1e-15);
        assert!((axis.value(12) - 2.0).abs() < 1e-15);
        assert!((axis.value(2) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn multi_axis_points_enumerate_the_product() {
        let spec = SweepSpec {
            axes: vec![
                SweepAxis {
                    name: "d".into(),
                    min: 1.0,
                    max: 2.0,
                    count: 2,
                },
                SweepAxis {
                    name: "xi".into(),
                    min: 0.1,
                    max: 0.3,
                    count: 3,
                },
            ],
            t_end: 1.0,
            threshold: 1e-4,
        };
        assert_eq!(spec.n_points(), 6);
        assert_eq!(spec.point(0), vec![1.0, 0.1]);
        assert_eq!(spec.point(1), vec![2.0, 0.1]);
        assert_eq!(spec.point(5), vec![2.0, 0.3]);
    }

    #[test]
    fn validation_catches_bad_axes() {
        let mut spec = SweepSpec {
            axes: vec![SweepAxis {
                name: "nope".into(),
                min: 0.0,
                max: 1.0,
                count: 4,
            }],
            t_end: 1.0,
            threshold: 1e-4,
        };
        assert!(spec.validate().is_err());
        spec.axes[0].name = "d".into();
        spec.axes[0].count = 1;
        assert!(spec.validate().is_err());
        spec.axes[0].count = 2;
        assert!(spec.validate().is_ok());
    }
}
