//! Pointwise reaction kernels of the SIRS-B system.
//!
//! The state is Z = (S, I, R, B): susceptible, infected and recovered host
//! densities plus the bacteria concentration. The reaction right-hand sides
//! are
//!
//! ```text
//! f1 = b - beta1*S*I - beta2*S*h(B) - d*S + sigma*R
//! f2 = beta1*S*I + beta2*S*h(B) - (d + gamma)*I
//! f3 = gamma*I - (d + sigma)*R
//! f4 = xi*I + g*B*(1 - B/K) - delta*B
//! ```
//!
//! with the saturating incidence h(B) = B / (B + K). Convection of B is a
//! transport term and lives in the discretization, not here.
//!
//! Every f_k splits as production minus destruction, `f_k = P_k - D_k * u_k`
//! with `P_k, D_k >= 0` on nonnegative states. The time stepper relies on
//! that split for its nonnegativity guarantee, so it is part of this
//! module's contract and is property-tested against the plain reaction
//! evaluation.

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ModelError {
    #[error("bacteria concentration must be nonnegative (got {0})")]
    NegativeConcentration(f64),
    #[error("half-saturation constant K must be positive (got {0})")]
    NonpositiveK(f64),
    #[error("state component {name} must be nonnegative (got {value})")]
    NegativeState { name: &'static str, value: f64 },
    #[error("influx must be nonnegative (got {0})")]
    NegativeInflux(f64),
    #[error("parameter {name} must be {requirement} (got {value})")]
    BadParameter {
        name: &'static str,
        requirement: &'static str,
        value: f64,
    },
    #[error("velocity has {got} components but the grid dimension is {expected}")]
    VelocityDimension { got: usize, expected: usize },
}

/// Species index into four-component state vectors.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Species {
    S = 0,
    I = 1,
    R = 2,
    B = 3,
}

impl Species {
    pub const ALL: [Species; 4] = [Species::S, Species::I, Species::R, Species::B];

    pub fn name(self) -> &'static str {
        match self {
            Species::S => "S",
            Species::I => "I",
            Species::R => "R",
            Species::B => "B",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

/// Which bacterial growth term to use in f4.
///
/// `Logistic` is the model as stated: g*B*(1 - B/K). `Saturating` is the
/// variant g*B*(1 - B/(B+K)) that shows up in one intermediate system; it is
/// kept behind this explicit switch and is never the default.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum GrowthForm {
    #[default]
    Logistic,
    Saturating,
}

/// Scalar model rates plus the bacteria convection velocity.
#[derive(Clone, Debug, PartialEq)]
pub struct Parameters {
    /// Natural death rate of hosts.
    pub d: f64,
    /// Recovery rate of infected hosts.
    pub gamma: f64,
    /// Rate at which recovered hosts lose immunity.
    pub sigma: f64,
    /// Natural death rate of bacteria.
    pub delta: f64,
    /// Shedding rate of bacteria by infected hosts.
    pub xi: f64,
    /// Intrinsic growth rate of bacteria (may be zero).
    pub g: f64,
    /// Bacterial capacity, shared with the incidence half-saturation.
    pub k: f64,
    /// Human-to-human transmission rate.
    pub beta1: f64,
    /// Environment-to-human transmission rate.
    pub beta2: f64,
    /// Convection velocity of bacteria, one component per spatial axis.
    /// Zero by default.
    pub velocity: Vec<f64>,
    /// Growth-term switch; `Logistic` unless explicitly overridden.
    pub growth: GrowthForm,
}

impl Parameters {
    /// All strictly-positive rates set to `value`, g = 0, no convection.
    pub fn uniform(value: f64) -> Self {
        Self {
            d: value,
            gamma: value,
            sigma: value,
            delta: value,
            xi: value,
            g: 0.0,
            k: value,
            beta1: value,
            beta2: value,
            velocity: Vec::new(),
            growth: GrowthForm::Logistic,
        }
    }

    /// Checks the sign constraints: the named rates strictly positive,
    /// g nonnegative, velocity components finite.
    pub fn validate(&self) -> Result<(), ModelError> {
        let positive: [(&'static str, f64); 8] = [
            ("d", self.d),
            ("gamma", self.gamma),
            ("sigma", self.sigma),
            ("delta", self.delta),
            ("xi", self.xi),
            ("K", self.k),
            ("beta1", self.beta1),
            ("beta2", self.beta2),
        ];
        for (name, value) in positive {
            if !(value > 0.0) || !value.is_finite() {
                return Err(ModelError::BadParameter {
                    name,
                    requirement: "strictly positive",
                    value,
                });
            }
        }
        if !(self.g >= 0.0) || !self.g.is_finite() {
            return Err(ModelError::BadParameter {
                name: "g",
                requirement: "nonnegative",
                value: self.g,
            });
        }
        for &v in &self.velocity {
            if !v.is_finite() {
                return Err(ModelError::BadParameter {
                    name: "velocity",
                    requirement: "finite",
                    value: v,
                });
            }
        }
        Ok(())
    }

    /// Velocity must either be empty (no convection) or match the grid
    /// dimension.
    pub fn validate_velocity(&self, dim: usize) -> Result<(), ModelError> {
        if self.velocity.is_empty() || self.velocity.len() == dim {
            Ok(())
        } else {
            Err(ModelError::VelocityDimension {
                got: self.velocity.len(),
                expected: dim,
            })
        }
    }

    /// True if any convection component is nonzero.
    pub fn has_convection(&self) -> bool {
        self.velocity.iter().any(|&v| v != 0.0)
    }
}

/// Reaction right-hand sides, one per species.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReactionVector {
    pub f1: f64,
    pub f2: f64,
    pub f3: f64,
    pub f4: f64,
}

impl ReactionVector {
    pub fn as_array(&self) -> [f64; 4] {
        [self.f1, self.f2, self.f3, self.f4]
    }
}

/// Production/destruction split of the reaction terms:
/// `f_k = production[k] - destruction[k] * u_k`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PdSplit {
    pub production: [f64; 4],
    pub destruction: [f64; 4],
}

/// Saturating incidence h(B) = B / (B + K); h(0) = 0 and h < 1 for finite B.
pub fn incidence(b_conc: f64, k: f64) -> Result<f64, ModelError> {
    if !(k > 0.0) {
        return Err(ModelError::NonpositiveK(k));
    }
    if b_conc < 0.0 {
        return Err(ModelError::NegativeConcentration(b_conc));
    }
    Ok(incidence_raw(b_conc, k))
}

#[inline]
pub(crate) fn incidence_raw(b_conc: f64, k: f64) -> f64 {
    b_conc / (b_conc + k)
}

/// Evaluates f1..f4 at a nonnegative state. `b_influx` is the susceptible
/// influx b(x,t) sampled at the point in question.
pub fn reaction(
    s: f64,
    i: f64,
    r: f64,
    b: f64,
    b_influx: f64,
    p: &Parameters,
) -> Result<ReactionVector, ModelError> {
    for (name, value) in [("S", s), ("I", i), ("R", r), ("B", b)] {
        if value < 0.0 {
            return Err(ModelError::NegativeState { name, value });
        }
    }
    if b_influx < 0.0 {
        return Err(ModelError::NegativeInflux(b_influx));
    }
    Ok(reaction_raw(s, i, r, b, b_influx, p))
}

#[inline]
pub(crate) fn reaction_raw(
    s: f64,
    i: f64,
    r: f64,
    b: f64,
    b_influx: f64,
    p: &Parameters,
) -> ReactionVector {
    let h = incidence_raw(b, p.k);
    let infection = p.beta1 * s * i + p.beta2 * s * h;
    let growth = match p.growth {
        GrowthForm::Logistic => p.g * b * (1.0 - b / p.k),
        GrowthForm::Saturating => p.g * b * (1.0 - b / (b + p.k)),
    };
    ReactionVector {
        f1: b_influx - infection - p.d * s + p.sigma * r,
        f2: infection - (p.d + p.gamma) * i,
        f3: p.gamma * i - (p.d + p.sigma) * r,
        f4: p.xi * i + growth - p.delta * b,
    }
}

/// Production/destruction split of the reaction at a nonnegative state.
///
/// The logistic term splits as production g*B and destruction (g/K)*B*B;
/// the saturating variant keeps its whole growth term in production since
/// it is nonnegative.
#[inline]
pub fn pd_split(s: f64, i: f64, r: f64, b: f64, b_influx: f64, p: &Parameters) -> PdSplit {
    let h = incidence_raw(b, p.k);
    let infection_rate = p.beta1 * i + p.beta2 * h;
    let (prod4, dest4) = match p.growth {
        GrowthForm::Logistic => (p.xi * i + p.g * b, p.delta + p.g * b / p.k),
        GrowthForm::Saturating => (p.xi * i + p.g * b * (p.k / (b + p.k)), p.delta),
    };
    PdSplit {
        production: [
            b_influx + p.sigma * r,
            infection_rate * s,
            p.gamma * i,
            prod4,
        ],
        destruction: [
            infection_rate + p.d,
            p.d + p.gamma,
            p.d + p.sigma,
            dest4,
        ],
    }
}

/// The threshold rate g0 = (sigma + beta1 + beta2 + gamma) / 4.
pub fn g_zero(p: &Parameters) -> f64 {
    (p.sigma + p.beta1 + p.beta2 + p.gamma) / 4.0
}

/// Whether d - g0 > 0, together with the margin d - g0. A positive margin
/// is the sufficient condition for decay to the attractor and sets the
/// decay envelope rate.
pub fn attractor_condition(p: &Parameters) -> (bool, f64) {
    let margin = p.d - g_zero(p);
    (margin > 0.0, margin)
}
