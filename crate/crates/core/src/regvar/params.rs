use std::fmt;

use sha2::{Digest, Sha256};

use super::Law;
use crate::error::{Error, Result};

/// Which of the two laws carries the dominant regularly varying tail.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModelTag {
    /// Heavy immigration, lighter offspring.
    A,
    /// Heavy offspring (`κ > 1`), immigration lighter or tail-comparable.
    B,
}

impl fmt::Display for ModelTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ModelTag::A => "A",
            ModelTag::B => "B",
        })
    }
}

/// Offspring law `ξ`, immigration law `η` and the scalars derived from them.
///
/// The model tag is inferred from the tails:
/// - model A when `η` is heavy and `ξ` is light or strictly lighter-tailed;
///   light `η` is also accepted as model A with `κ = ∞` (no tail driver),
///   which suits exact and simulation work but not the asymptotic constants;
/// - model B when `ξ` is heavy with `κ > 1` and `η` is light, strictly
///   lighter, or has the same index and log exponent (then `p > 0`).
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    offspring: Law,
    immigration: Law,
    tag: ModelTag,
    alpha: f64,
    beta: f64,
    kappa: f64,
    p: f64,
    delta_moment: Option<f64>,
}

impl ModelParams {
    pub fn new(offspring: Law, immigration: Law) -> Result<Self> {
        offspring.validate()?;
        immigration.validate()?;
        let alpha = offspring.mean();
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::InvalidParams(format!(
                "offspring mean {alpha} must lie in (0, 1)"
            )));
        }
        if immigration.pmf(0) >= 1.0 {
            return Err(Error::InvalidParams("immigration is identically zero".into()));
        }
        let beta = immigration.mean();
        let xi = offspring.tail_shape();
        let eta = immigration.tail_shape();
        let (tag, kappa, p, delta_moment) = match (xi, eta) {
            (None, None) => (ModelTag::A, f64::INFINITY, 0.0, Some(1.0)),
            (None, Some(e)) => (ModelTag::A, e.kappa, 0.0, Some(1.0)),
            (Some(x), None) => (ModelTag::B, x.kappa, 0.0, Some(1.0)),
            (Some(x), Some(e)) if e.kappa < x.kappa => {
                (ModelTag::A, e.kappa, 0.0, Some((x.kappa - e.kappa) / 2.0))
            }
            (Some(x), Some(e)) if e.kappa > x.kappa => {
                (ModelTag::B, x.kappa, 0.0, Some((e.kappa - x.kappa) / 2.0))
            }
            (Some(x), Some(e)) => {
                if x.gamma != e.gamma {
                    return Err(Error::InvalidParams(format!(
                        "offspring and immigration share kappa={} but their log exponents \
                         differ ({} vs {}); neither tail dominates with a moment margin",
                        x.kappa, x.gamma, e.gamma
                    )));
                }
                (ModelTag::B, x.kappa, e.scale / x.scale, None)
            }
        };
        if tag == ModelTag::B && kappa <= 1.0 {
            return Err(Error::InvalidParams(format!(
                "heavy offspring requires kappa > 1, got {kappa}"
            )));
        }
        Ok(Self {
            offspring,
            immigration,
            tag,
            alpha,
            beta,
            kappa,
            p,
            delta_moment,
        })
    }

    /// Parses both laws from the text grammar.
    pub fn parse(offspring: &str, immigration: &str) -> Result<Self> {
        Self::new(offspring.parse()?, immigration.parse()?)
    }

    pub fn offspring(&self) -> &Law {
        &self.offspring
    }

    pub fn immigration(&self) -> &Law {
        &self.immigration
    }

    pub fn tag(&self) -> ModelTag {
        self.tag
    }

    /// `α = Eξ`.
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// `β = Eη`, possibly infinite in model A.
    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Tail index of the driver; `+∞` when model A has light immigration.
    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    /// `lim P(η>x)/P(ξ>x)` in model B, 0 otherwise.
    pub fn p(&self) -> f64 {
        self.p
    }

    /// Moment margin of the lighter law, when one exists.
    pub fn delta_moment(&self) -> Option<f64> {
        self.delta_moment
    }

    /// The law whose tail drives the large deviations.
    pub fn driver(&self) -> &Law {
        match self.tag {
            ModelTag::A => &self.immigration,
            ModelTag::B => &self.offspring,
        }
    }

    pub fn has_heavy_driver(&self) -> bool {
        self.kappa.is_finite()
    }

    /// Canonical text form, the input of [`ModelParams::digest`].
    pub fn canonical(&self) -> String {
        format!("offspring={};immigration={}", self.offspring, self.immigration)
    }

    /// Hex SHA-256 of the canonical form.
    pub fn digest(&self) -> String {
        let hash = Sha256::digest(self.canonical().as_bytes());
        hash.iter().map(|b| format!("{b:02x}")).collect()
    }
}
