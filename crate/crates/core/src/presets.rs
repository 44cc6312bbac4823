//! Shipped scenario presets.
//!
//! Each preset is a complete config document; the CLI resolves `--config`
//! against these names before trying the filesystem.

/// Constant coefficients, margin d - g0 = 0.5, uniform initial data.
pub const ATTRACTOR_UNIFORM: &str = include_str!("../presets/attractor_uniform.cfg");
/// Oscillating infected-host mobility d2(t); no long-time limit.
pub const SEASONAL: &str = include_str!("../presets/seasonal.cfg");
/// Near-zero infected-host mobility.
pub const QUARANTINE: &str = include_str!("../presets/quarantine.cfg");
/// Sweep of d across the threshold margin zero.
pub const THRESHOLD_SWEEP: &str = include_str!("../presets/threshold_sweep.cfg");

pub const PRESET_NAMES: [&str; 4] = [
    "attractor_uniform",
    "seasonal",
    "quarantine",
    "threshold_sweep",
];

/// Looks up a preset document by name.
pub fn preset(name: &str) -> Option<&'static str> {
    match name {
        "attractor_uniform" => Some(ATTRACTOR_UNIFORM),
        "seasonal" => Some(SEASONAL),
        "quarantine" => Some(QUARANTINE),
        "threshold_sweep" => Some(THRESHOLD_SWEEP),
        _ => None,
    }
}
