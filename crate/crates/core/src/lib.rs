//! Numerical solver and verification harness for a four-species SIRS-B
//! reaction-diffusion system: susceptible, infected and recovered hosts
//! coupled to a bacterial reservoir with saturating incidence.
//!
//! The crate provides:
//!
//! - pointwise reaction kernels and derived thresholds ([`model`]);
//! - structured-grid operators with zero-flux boundaries ([`grid`],
//!   [`operators`], [`coeff`]);
//! - a positivity-preserving IMEX stepper ([`stepper`], [`linsolve`]);
//! - the limiting elliptic problem and attractor target ([`steady`]);
//! - energy/distance diagnostics and theorem-check suites
//!   ([`diagnostics`], [`verify`]);
//! - config parsing, shipped presets, parameter sweeps and file formats
//!   ([`config`], [`presets`], [`sweep`], [`snapshot`]).

pub mod coeff;
pub mod config;
pub mod diagnostics;
pub mod expr;
pub mod grid;
pub mod linsolve;
pub mod model;
pub mod operators;
pub mod presets;
pub mod snapshot;
pub mod steady;
pub mod stepper;
pub mod sweep;
pub mod verify;

pub use coeff::{CoefficientSampler, SamplerKind};
pub use grid::{Field, Grid, Reduction};
pub use model::{GrowthForm, Parameters, Species};
pub use stepper::{SimulationConfig, State};
