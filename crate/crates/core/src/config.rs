//! Flat key-value configuration files.
//!
//! A config is a plain-text document with `[section]` headers and
//! `key = value` lines; `#` starts a comment. Sections: `[grid]`,
//! `[params]`, `[coefficients]`, `[initial]`, `[run]` and the optional
//! `[sweep]`. Coefficient and initial-data entries are either
//! `constant <number>` or `expression <formula>` over `x`, `y`, `t`
//! (initial data and limit profiles may not reference `t`). Expression
//! coefficients must declare their bounds (`d2.d0`, `d2.D0`, `b.b0`), which
//! are checked by sampling every cell at t = 0 and t = t_end.
//!
//! `parse` produces a fully validated [`SimulationConfig`]; `dump` renders
//! the effective configuration (defaults materialized) such that
//! parse -> dump -> parse is a fixed point.

use crate::coeff::{CoefficientSampler, SamplerKind};
use crate::expr::{Expr, Var};
use crate::grid::{Field, Grid};
use crate::model::{GrowthForm, Parameters, Species};
use crate::stepper::{SimulationConfig, State};
use crate::sweep::{SweepAxis, SweepSpec};
use std::collections::HashSet;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("{path}: {message}")]
    Invalid { path: String, message: String },
    #[error("{path}: missing required key")]
    Missing { path: String },
    #[error("{path}: unknown key (line {line})")]
    Unknown { path: String, line: usize },
    #[error("{path}: duplicate key (line {line})")]
    Duplicate { path: String, line: usize },
}

fn invalid(path: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        path: path.to_string(),
        message: message.into(),
    }
}

/// A parsed configuration: the simulation plus the optional sweep section
/// and enough source information to echo the document back out.
#[derive(Clone, Debug)]
pub struct ConfigDoc {
    pub sim: SimulationConfig,
    pub sweep: Option<SweepSpec>,
    /// Initial-data rules per species, kept for the effective-config dump.
    initial_rules: [(SamplerKind, Option<String>); 4],
}

/// One `key = value` line of the raw document.
#[derive(Debug)]
struct RawEntry {
    section: String,
    key: String,
    value: String,
    line: usize,
    used: bool,
}

struct RawDoc {
    entries: Vec<RawEntry>,
}

impl RawDoc {
    fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut entries = Vec::new();
        let mut section = String::new();
        let mut seen: HashSet<(String, String)> = HashSet::new();
        for (idx, raw_line) in text.lines().enumerate() {
            let line = idx + 1;
            let content = match raw_line.split_once('#') {
                Some((before, _)) => before,
                None => raw_line,
            }
            .trim();
            if content.is_empty() {
                continue;
            }
            if let Some(name) = content.strip_prefix('[') {
                let name = name.strip_suffix(']').ok_or_else(|| ConfigError::Syntax {
                    line,
                    message: "section header missing closing ']'".into(),
                })?;
                section = name.trim().to_string();
                continue;
            }
            let (key, value) = content.split_once('=').ok_or_else(|| ConfigError::Syntax {
                line,
                message: format!("expected 'key = value', got {content:?}"),
            })?;
            if section.is_empty() {
                return Err(ConfigError::Syntax {
                    line,
                    message: "key appears before any [section] header".into(),
                });
            }
            let key = key.trim().to_string();
            let value = value.trim().to_string();
            // The sweep axis key repeats, one line per axis.
            let dedup_key = (section.clone(), key.clone());
            if !(section == "sweep" && key == "axis") && !seen.insert(dedup_key) {
                return Err(ConfigError::Duplicate {
                    path: format!("{section}.{key}"),
                    line,
                });
            }
            entries.push(RawEntry {
                section: section.clone(),
                key,
                value,
                line,
                used: false,
            });
        }
        Ok(Self { entries })
    }

    fn take(&mut self, section: &str, key: &str) -> Option<String> {
        for e in &mut self.entries {
            if !e.used && e.section == section && e.key == key {
                e.used = true;
                return Some(e.value.clone());
            }
        }
        None
    }

    fn take_all(&mut self, section: &str, key: &str) -> Vec<String> {
        let mut out = Vec::new();
        for e in &mut self.entries {
            if !e.used && e.section == section && e.key == key {
                e.used = true;
                out.push(e.value.clone());
            }
        }
        out
    }

    fn has_section(&self, section: &str) -> bool {
        self.entries.iter().any(|e| e.section == section)
    }

    fn first_unused(&self) -> Option<&RawEntry> {
        self.entries.iter().find(|e| !e.used)
    }
}

fn parse_f64(value: &str, path: &str) -> Result<f64, ConfigError> {
    value
        .trim()
        .parse::<f64>()
        .map_err(|_| invalid(path, format!("expected a number, got {value:?}")))
}

fn parse_usize(value: &str, path: &str) -> Result<usize, ConfigError> {
    value
        .trim()
        .parse::<usize>()
        .map_err(|_| invalid(path, format!("expected a nonnegative integer, got {value:?}")))
}

fn parse_f64_list(value: &str, path: &str) -> Result<Vec<f64>, ConfigError> {
    value
        .split_whitespace()
        .map(|v| parse_f64(v, path))
        .collect()
}

/// Parses `constant <number>` or `expression <formula>`.
fn parse_rule(
    value: &str,
    path: &str,
    dim: usize,
    allow_time: bool,
) -> Result<(SamplerKind, Option<String>), ConfigError> {
    let value = value.trim();
    if let Some(rest) = value.strip_prefix("constant") {
        let v = parse_f64(rest, path)?;
        return Ok((SamplerKind::Constant(v), None));
    }
    if let Some(rest) = value.strip_prefix("expression") {
        let src = rest.trim();
        let expr =
            Expr::parse(src).map_err(|e| invalid(path, format!("malformed expression: {e}")))?;
        let used = expr.vars_used();
        if dim == 1 && used.contains(&Var::Y) {
            return Err(invalid(path, "variable 'y' is not available on a 1D grid"));
        }
        if used.contains(&Var::T) {
            if !allow_time {
                return Err(invalid(path, "variable 't' is not allowed here"));
            }
            return Ok((SamplerKind::SpaceTime(expr), Some(src.to_string())));
        }
        return Ok((SamplerKind::SpaceVarying(expr), Some(src.to_string())));
    }
    Err(invalid(
        path,
        format!("expected 'constant <number>' or 'expression <formula>', got {value:?}"),
    ))
}

fn parse_grid(doc: &mut RawDoc) -> Result<Grid, ConfigError> {
    let dim = parse_usize(
        &doc.take("grid", "dim").ok_or(ConfigError::Missing {
            path: "grid.dim".into(),
        })?,
        "grid.dim",
    )?;
    if dim != 1 && dim != 2 {
        return Err(invalid("grid.dim", format!("must be 1 or 2, got {dim}")));
    }
    let cells_raw = doc.take("grid", "cells").ok_or(ConfigError::Missing {
        path: "grid.cells".into(),
    })?;
    let cells: Vec<usize> = cells_raw
        .split_whitespace()
        .map(|v| parse_usize(v, "grid.cells"))
        .collect::<Result<_, _>>()?;
    let extents_raw = doc.take("grid", "extents").ok_or(ConfigError::Missing {
        path: "grid.extents".into(),
    })?;
    let extents = parse_f64_list(&extents_raw, "grid.extents")?;
    if cells.len() != dim || extents.len() != dim {
        return Err(invalid(
            "grid.cells",
            format!("expected {dim} entries for cells and extents"),
        ));
    }
    let grid = if dim == 1 {
        Grid::line(extents[0], cells[0])
    } else {
        Grid::rect([extents[0], extents[1]], [cells[0], cells[1]])
    };
    grid.map_err(|e| invalid("grid", e.to_string()))
}

fn parse_params(doc: &mut RawDoc, dim: usize) -> Result<Parameters, ConfigError> {
    let mut get = |key: &str| -> Result<f64, ConfigError> {
        let path = format!("params.{key}");
        let raw = doc
            .take("params", key)
            .ok_or(ConfigError::Missing { path: path.clone() })?;
        parse_f64(&raw, &path)
    };
    let mut params = Parameters {
        d: get("d")?,
        gamma: get("gamma")?,
        sigma: get("sigma")?,
        delta: get("delta")?,
        xi: get("xi")?,
        g: get("g")?,
        k: get("K")?,
        beta1: get("beta1")?,
        beta2: get("beta2")?,
        velocity: Vec::new(),
        growth: GrowthForm::Logistic,
    };
    if let Some(raw) = doc.take("params", "velocity") {
        params.velocity = parse_f64_list(&raw, "params.velocity")?;
    }
    if let Some(raw) = doc.take("params", "growth") {
        params.growth = match raw.trim() {
            "logistic" => GrowthForm::Logistic,
            "saturating" => GrowthForm::Saturating,
            other => {
                return Err(invalid(
                    "params.growth",
                    format!("expected 'logistic' or 'saturating', got {other:?}"),
                ))
            }
        };
    }
    // Point sign errors at the offending key.
    let named = [
        ("d", params.d),
        ("gamma", params.gamma),
        ("sigma", params.sigma),
        ("delta", params.delta),
        ("xi", params.xi),
        ("K", params.k),
        ("beta1", params.beta1),
        ("beta2", params.beta2),
    ];
    for (key, value) in named {
        if !(value > 0.0) || !value.is_finite() {
            return Err(invalid(
                &format!("params.{key}"),
                format!("must be strictly positive (got {value})"),
            ));
        }
    }
    if !(params.g >= 0.0) || !params.g.is_finite() {
        return Err(invalid(
            "params.g",
            format!("must be nonnegative (got {})", params.g),
        ));
    }
    params
        .validate_velocity(dim)
        .map_err(|e| invalid("params.velocity", e.to_string()))?;
    if params.velocity.iter().any(|v| !v.is_finite()) {
        return Err(invalid("params.velocity", "components must be finite"));
    }
    Ok(params)
}

fn parse_coefficient(
    doc: &mut RawDoc,
    name: &str,
    dim: usize,
    is_influx: bool,
) -> Result<CoefficientSampler, ConfigError> {
    let path = format!("coefficients.{name}");
    let raw = doc
        .take("coefficients", name)
        .ok_or(ConfigError::Missing { path: path.clone() })?;
    let (kind, source) = parse_rule(&raw, &path, dim, true)?;

    let mut sampler = if is_influx {
        let b0 = match doc.take("coefficients", &format!("{name}.b0")) {
            Some(raw) => parse_f64(&raw, &format!("{path}.b0"))?,
            None => match kind {
                SamplerKind::Constant(v) => v,
                _ => {
                    return Err(ConfigError::Missing {
                        path: format!("{path}.b0"),
                    })
                }
            },
        };
        CoefficientSampler::influx(kind, b0, &path).map_err(|e| invalid(&path, e.to_string()))?
    } else {
        let d0 = doc.take("coefficients", &format!("{name}.d0"));
        let d_cap = doc.take("coefficients", &format!("{name}.D0"));
        let (d0, d_cap) = match (&kind, d0, d_cap) {
            (SamplerKind::Constant(v), None, None) => (*v, *v),
            (_, Some(lo), Some(hi)) => (
                parse_f64(&lo, &format!("{path}.d0"))?,
                parse_f64(&hi, &format!("{path}.D0"))?,
            ),
            (SamplerKind::Constant(v), lo, hi) => (
                lo.map(|s| parse_f64(&s, &format!("{path}.d0")))
                    .transpose()?
                    .unwrap_or(*v),
                hi.map(|s| parse_f64(&s, &format!("{path}.D0")))
                    .transpose()?
                    .unwrap_or(*v),
            ),
            _ => {
                return Err(ConfigError::Missing {
                    path: format!("{path}.d0"),
                })
            }
        };
        CoefficientSampler::diffusion(kind, d0, d_cap, &path)
            .map_err(|e| invalid(&path, e.to_string()))?
    };
    if let Some(src) = source {
        sampler = sampler.with_source(&src);
    }
    if let Some(raw) = doc.take("coefficients", &format!("{name}.limit")) {
        let limit_path = format!("{path}.limit");
        let (limit_kind, limit_source) = parse_rule(&raw, &limit_path, dim, false)?;
        sampler = sampler
            .with_limit(limit_kind, limit_source.as_deref(), &path)
            .map_err(|e| invalid(&limit_path, e.to_string()))?;
    }
    Ok(sampler)
}

fn parse_initial(
    doc: &mut RawDoc,
    grid: Grid,
) -> Result<(State, [(SamplerKind, Option<String>); 4]), ConfigError> {
    let mut fields = Vec::with_capacity(4);
    let mut rules = Vec::with_capacity(4);
    for sp in Species::ALL {
        let path = format!("initial.{}", sp.name());
        let raw = doc
            .take("initial", sp.name())
            .ok_or(ConfigError::Missing { path: path.clone() })?;
        let (kind, source) = parse_rule(&raw, &path, grid.dim(), false)?;
        let field = Field::from_fn(grid, |x, y| kind.eval(x, y, 0.0));
        for (c, &v) in field.values().iter().enumerate() {
            if !v.is_finite() || v < 0.0 {
                let (x, y) = grid.center(c);
                return Err(invalid(
                    &path,
                    format!("initial data must be nonnegative; got {v} at (x={x}, y={y})"),
                ));
            }
        }
        fields.push(field);
        rules.push((kind, source));
    }
    let mut it = fields.into_iter();
    let state = State::new(
        it.next().unwrap(),
        it.next().unwrap(),
        it.next().unwrap(),
        it.next().unwrap(),
    );
    let rules: [(SamplerKind, Option<String>); 4] = rules.try_into().expect("exactly four rules");
    Ok((state, rules))
}

fn parse_sweep(doc: &mut RawDoc) -> Result<Option<SweepSpec>, ConfigError> {
    if !doc.has_section("sweep") {
        return Ok(None);
    }
    let mut axes = Vec::new();
    for raw in doc.take_all("sweep", "axis") {
        let parts: Vec<&str> = raw.split_whitespace().collect();
        if parts.len() != 4 {
            return Err(invalid(
                "sweep.axis",
                format!("expected '<param> <min> <max> <count>', got {raw:?}"),
            ));
        }
        axes.push(SweepAxis {
            name: parts[0].to_string(),
            min: parse_f64(parts[1], "sweep.axis")?,
            max: parse_f64(parts[2], "sweep.axis")?,
            count: parse_usize(parts[3], "sweep.axis")?,
        });
    }
    if axes.is_empty() {
        return Err(ConfigError::Missing {
            path: "sweep.axis".into(),
        });
    }
    let t_end = parse_f64(
        &doc.take("sweep", "t_end").ok_or(ConfigError::Missing {
            path: "sweep.t_end".into(),
        })?,
        "sweep.t_end",
    )?;
    let threshold = match doc.take("sweep", "threshold") {
        Some(raw) => parse_f64(&raw, "sweep.threshold")?,
        None => 1e-4,
    };
    let spec = SweepSpec {
        axes,
        t_end,
        threshold,
    };
    spec.validate().map_err(|e| invalid("sweep", e))?;
    Ok(Some(spec))
}

/// Parses and validates a configuration document.
pub fn parse(text: &str) -> Result<ConfigDoc, ConfigError> {
    let mut doc = RawDoc::parse(text)?;
    let grid = parse_grid(&mut doc)?;
    let params = parse_params(&mut doc, grid.dim())?;
    let diffusion = [
        parse_coefficient(&mut doc, "d1", grid.dim(), false)?,
        parse_coefficient(&mut doc, "d2", grid.dim(), false)?,
        parse_coefficient(&mut doc, "d3", grid.dim(), false)?,
        parse_coefficient(&mut doc, "d4", grid.dim(), false)?,
    ];
    let influx = parse_coefficient(&mut doc, "b", grid.dim(), true)?;
    let (initial, initial_rules) = parse_initial(&mut doc, grid)?;

    let t_end = parse_f64(
        &doc.take("run", "t_end").ok_or(ConfigError::Missing {
            path: "run.t_end".into(),
        })?,
        "run.t_end",
    )?;
    let mut sim = SimulationConfig::new(grid, params, diffusion, influx, initial, t_end);
    if let Some(raw) = doc.take("run", "dt_max") {
        sim.dt_max = parse_f64(&raw, "run.dt_max")?;
    }
    if let Some(raw) = doc.take("run", "solver_tol") {
        sim.solver_tol = parse_f64(&raw, "run.solver_tol")?;
    }
    if let Some(raw) = doc.take("run", "positivity_safety") {
        sim.positivity_safety = parse_f64(&raw, "run.positivity_safety")?;
    }
    if let Some(raw) = doc.take("run", "observer_cadence") {
        sim.observer_cadence = parse_usize(&raw, "run.observer_cadence")?;
    }
    let sweep = parse_sweep(&mut doc)?;

    if let Some(entry) = doc.first_unused() {
        return Err(ConfigError::Unknown {
            path: format!("{}.{}", entry.section, entry.key),
            line: entry.line,
        });
    }

    // Full semantic validation: hypothesis bounds, nonnegative initials,
    // run controls.
    sim.validate()
        .map_err(|e| invalid("config", e.to_string()))?;
    Ok(ConfigDoc {
        sim,
        sweep,
        initial_rules,
    })
}

impl ConfigDoc {
    /// Renders the effective configuration. Defaults are materialized, so
    /// parsing the dump and dumping again reproduces the same text.
    pub fn dump(&self) -> String {
        let sim = &self.sim;
        let grid = sim.grid;
        let mut out = String::new();
        let dim = grid.dim();
        out.push_str("[grid]\n");
        out.push_str(&format!("dim = {dim}\n"));
        if dim == 1 {
            out.push_str(&format!("cells = {}\n", grid.cells()[0]));
            out.push_str(&format!("extents = {}\n", grid.extents()[0]));
        } else {
            out.push_str(&format!(
                "cells = {} {}\n",
                grid.cells()[0],
                grid.cells()[1]
            ));
            out.push_str(&format!(
                "extents = {} {}\n",
                grid.extents()[0],
                grid.extents()[1]
            ));
        }

        let p = &sim.params;
        out.push_str("\n[params]\n");
        out.push_str(&format!("d = {}\n", p.d));
        out.push_str(&format!("gamma = {}\n", p.gamma));
        out.push_str(&format!("sigma = {}\n", p.sigma));
        out.push_str(&format!("delta = {}\n", p.delta));
        out.push_str(&format!("xi = {}\n", p.xi));
        out.push_str(&format!("g = {}\n", p.g));
        out.push_str(&format!("K = {}\n", p.k));
        out.push_str(&format!("beta1 = {}\n", p.beta1));
        out.push_str(&format!("beta2 = {}\n", p.beta2));
        let velocity: Vec<String> = if p.velocity.is_empty() {
            vec!["0".to_string(); dim]
        } else {
            p.velocity.iter().map(|v| format!("{v}")).collect()
        };
        out.push_str(&format!("velocity = {}\n", velocity.join(" ")));
        out.push_str(&format!(
            "growth = {}\n",
            match p.growth {
                GrowthForm::Logistic => "logistic",
                GrowthForm::Saturating => "saturating",
            }
        ));

        out.push_str("\n[coefficients]\n");
        for (idx, sampler) in sim.diffusion.iter().enumerate() {
            let name = format!("d{}", idx + 1);
            out.push_str(&format!(
                "{name} = {}\n",
                sampler.kind().render(sampler.source())
            ));
            out.push_str(&format!("{name}.d0 = {}\n", sampler.lower()));
            out.push_str(&format!("{name}.D0 = {}\n", sampler.upper()));
            if sampler.has_explicit_limit() {
                let limit = sampler.limit_kind().expect("explicit limit");
                out.push_str(&format!(
                    "{name}.limit = {}\n",
                    limit.render(sampler.limit_source())
                ));
            }
        }
        out.push_str(&format!(
            "b = {}\n",
            sim.influx.kind().render(sim.influx.source())
        ));
        out.push_str(&format!("b.b0 = {}\n", sim.influx.upper()));
        if sim.influx.has_explicit_limit() {
            let limit = sim.influx.limit_kind().expect("explicit limit");
            out.push_str(&format!(
                "b.limit = {}\n",
                limit.render(sim.influx.limit_source())
            ));
        }

        out.push_str("\n[initial]\n");
        for (sp, (kind, source)) in Species::ALL.iter().zip(&self.initial_rules) {
            out.push_str(&format!(
                "{} = {}\n",
                sp.name(),
                kind.render(source.as_deref())
            ));
        }

        out.push_str("\n[run]\n");
        out.push_str(&format!("t_end = {}\n", sim.t_end));
        out.push_str(&format!("dt_max = {}\n", sim.dt_max));
        out.push_str(&format!("solver_tol = {}\n", sim.solver_tol));
        out.push_str(&format!("positivity_safety = {}\n", sim.positivity_safety));
        out.push_str(&format!("observer_cadence = {}\n", sim.observer_cadence));

        if let Some(sweep) = &self.sweep {
            out.push_str("\n[sweep]\n");
            for axis in &sweep.axes {
                out.push_str(&format!(
                    "axis = {} {} {} {}\n",
                    axis.name, axis.min, axis.max, axis.count
                ));
            }
            out.push_str(&format!("t_end = {}\n", sweep.t_end));
            out.push_str(&format!("threshold = {}\n", sweep.threshold));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "
[grid]
dim = 1
cells = 8
extents = 1.0

[params]
d = 1.5
gamma = 1.0
sigma = 1.0
delta = 1.0
xi = 0.5
g = 0.7
K = 1.0
beta1 = 1.0
beta2 = 1.0

[coefficients]
d1 = constant 0.2
d2 = constant 0.05
d3 = constant 0.1
d4 = constant 0.02
b = constant 0.75

[initial]
S = constant 1.0
I = constant 0.5
R = constant 0.1
B = constant 0.5

[run]
t_end = 2.0
";

    #[test]
    fn minimal_config_gets_defaults_and_round_trips() {
        let doc = parse(MINIMAL).unwrap();
        assert_eq!(doc.sim.dt_max, 0.05);
        assert_eq!(doc.sim.solver_tol, 1e-10);
        assert_eq!(doc.sim.positivity_safety, 0.9);
        let dumped = doc.dump();
        let again = parse(&dumped).unwrap();
        assert_eq!(again.dump(), dumped, "dump -> parse -> dump not fixed");
    }

    #[test]
    fn negative_rate_is_rejected_with_key_path() {
        let text = MINIMAL.replace("d = 1.5", "d = -1");
        let err = parse(&text).unwrap_err();
        assert!(
            err.to_string().contains("params.d"),
            "error does not name params.d: {err}"
        );
    }

    #[test]
    fn expression_coefficient_with_declared_bounds() {
        let text = MINIMAL.replace(
            "d2 = constant 0.05",
            "d2 = expression 2 + sin(t)\nd2.d0 = 1.0\nd2.D0 = 3.0",
        );
        let doc = parse(&text).unwrap();
        assert_eq!(doc.sim.diffusion[1].lower(), 1.0);
        assert_eq!(doc.sim.diffusion[1].upper(), 3.0);
        // Round trip survives expressions too.
        let dumped = doc.dump();
        let again = parse(&dumped).unwrap();
        assert_eq!(again.dump(), dumped);
    }

    #[test]
    fn expression_without_bounds_is_missing() {
        let text = MINIMAL.replace("d2 = constant 0.05", "d2 = expression 2 + sin(t)");
        let err = parse(&text).unwrap_err();
        assert_eq!(
            err,
            ConfigError::Missing {
                path: "coefficients.d2.d0".into()
            }
        );
    }

    #[test]
    fn out_of_bounds_sampling_is_rejected() {
        // Declared D0 = 2.5 but the rule reaches 2 + sin(t_end) > 2.5 when
        // validation samples t = t_end = pi/2.
        let text = MINIMAL
            .replace(
                "d2 = constant 0.05",
                "d2 = expression 2 + sin(t)\nd2.d0 = 1.0\nd2.D0 = 2.5",
            )
            .replace("t_end = 2.0", "t_end = 1.5707963267948966");
        let err = parse(&text).unwrap_err();
        assert!(err.to_string().contains("d2"), "{err}");
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = format!("{MINIMAL}\n[extras]\nfoo = 1\n");
        let err = parse(&text).unwrap_err();
        assert!(matches!(err, ConfigError::Unknown { .. }), "{err}");
        assert!(err.to_string().contains("extras.foo"));
    }

    #[test]
    fn negative_initial_data_is_rejected() {
        let text = MINIMAL.replace("I = constant 0.5", "I = expression 0.5 - x");
        let err = parse(&text).unwrap_err();
        assert!(err.to_string().contains("initial.I"), "{err}");
    }

    #[test]
    fn initial_data_may_not_use_time() {
        let text = MINIMAL.replace("I = constant 0.5", "I = expression 0.5 + t");
        let err = parse(&text).unwrap_err();
        assert!(err.to_string().contains("initial.I"), "{err}");
    }

    #[test]
    fn y_is_rejected_on_1d_grids() {
        let text = MINIMAL.replace("S = constant 1.0", "S = expression 1 + y");
        let err = parse(&text).unwrap_err();
        assert!(err.to_string().contains("'y'"), "{err}");
    }

    #[test]
    fn duplicate_keys_are_rejected() {
        let text = format!("{MINIMAL}\n[params]\nd = 2.0\n");
        let err = parse(&text).unwrap_err();
        assert!(matches!(err, ConfigError::Duplicate { .. }), "{err}");
    }

    #[test]
    fn sweep_section_parses() {
        let text =
            format!("{MINIMAL}\n[sweep]\naxis = d 0.8 2.0 13\nt_end = 60\nthreshold = 1e-4\n");
        let doc = parse(&text).unwrap();
        let sweep = doc.sweep.unwrap();
        assert_eq!(sweep.axes.len(), 1);
        assert_eq!(sweep.axes[0].name, "d");
        assert_eq!(sweep.axes[0].count, 13);
    }

    #[test]
    fn sweep_axis_must_name_a_parameter() {
        let text = format!("{MINIMAL}\n[sweep]\naxis = bogus 0 1 3\nt_end = 10\n");
        let err = parse(&text).unwrap_err();
        assert!(err.to_string().contains("bogus"), "{err}");
    }
}
