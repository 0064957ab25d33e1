//! The n-indexed sequence of semi-complete markets.

use std::fmt;
use std::sync::Arc;

use crate::cgf::{ComponentFamily, CustomLaw, DEFAULT_TAIL_TOLERANCE};
use crate::error::{Error, Result};
use crate::hedge::HedgeModel;

/// Closed-form continuation of the component list: parameters `c · ρ^i` at
/// absolute (1-based) index `i`.
#[derive(Debug, Clone)]
pub enum GeometricTail {
    /// `γ_i = mean_scale · ρ^i`, `δ_i² = variance_scale · ρ^i`.
    Gaussian {
        mean_scale: f64,
        variance_scale: f64,
        ratio: f64,
    },
    /// `β_i = scale · ρ^i`.
    Poisson { scale: f64, ratio: f64 },
    /// `B_i = ρ^i · B̃` with `B̃` drawn from `law`.
    ScaledCustom { law: Arc<CustomLaw>, ratio: f64 },
}

impl GeometricTail {
    pub fn ratio(&self) -> f64 {
        match self {
            GeometricTail::Gaussian { ratio, .. }
            | GeometricTail::Poisson { ratio, .. }
            | GeometricTail::ScaledCustom { ratio, .. } => *ratio,
        }
    }

    fn validate(&self) -> Result<()> {
        let ratio = self.ratio();
        if !(ratio > 0.0 && ratio < 1.0) {
            return Err(Error::invalid(
                "tail.rho",
                format!("geometric ratio {ratio} must lie in (0, 1) for the tail to be summable"),
            ));
        }
        match self {
            GeometricTail::Gaussian {
                mean_scale,
                variance_scale,
                ..
            } => {
                if !mean_scale.is_finite() {
                    return Err(Error::invalid("tail.mean_c", "must be finite"));
                }
                if !(*variance_scale > 0.0 && variance_scale.is_finite()) {
                    return Err(Error::invalid("tail.c", "variance scale must be positive"));
                }
            }
            GeometricTail::Poisson { scale, .. } => {
                if !(*scale > 0.0 && scale.is_finite()) {
                    return Err(Error::invalid("tail.c", "intensity scale must be positive"));
                }
            }
            GeometricTail::ScaledCustom { .. } => {}
        }
        Ok(())
    }

    fn family_at(&self, i: usize) -> ComponentFamily {
        let w = self.ratio().powi(i.min(i32::MAX as usize) as i32);
        match self {
            GeometricTail::Gaussian {
                mean_scale,
                variance_scale,
                ..
            } => ComponentFamily::Gaussian {
                mean: mean_scale * w,
                variance: variance_scale * w,
            },
            GeometricTail::Poisson { scale, .. } => ComponentFamily::Poisson {
                intensity: scale * w,
            },
            GeometricTail::ScaledCustom { law, .. } => ComponentFamily::Custom {
                law: Arc::clone(law),
                scale: w,
            },
        }
    }
}

/// Claim components `B_1, B_2, ...`: an explicit prefix optionally continued
/// by a geometric tail. Without a tail the claim has finitely many components.
#[derive(Debug, Clone)]
pub struct ComponentSequence {
    explicit: Vec<ComponentFamily>,
    geometric: Option<GeometricTail>,
}

impl ComponentSequence {
    pub fn new(explicit: Vec<ComponentFamily>, geometric: Option<GeometricTail>) -> Result<Self> {
        if let Some(tail) = &geometric {
            tail.validate()?;
        }
        for (k, family) in explicit.iter().enumerate() {
            let ok = match family {
                ComponentFamily::Gaussian { mean, variance } => {
                    mean.is_finite() && *variance > 0.0 && variance.is_finite()
                }
                ComponentFamily::Poisson { intensity } => *intensity > 0.0 && intensity.is_finite(),
                ComponentFamily::Custom { scale, .. } => *scale > 0.0 && scale.is_finite(),
            };
            if !ok {
                return Err(Error::invalid(
                    format!("components[{k}]"),
                    "parameters must be finite with positive variance, intensity or scale",
                ));
            }
        }
        Ok(ComponentSequence {
            explicit,
            geometric,
        })
    }

    /// Purely geometric sequence.
    pub fn geometric(tail: GeometricTail) -> Result<Self> {
        ComponentSequence::new(Vec::new(), Some(tail))
    }

    pub fn explicit(&self) -> &[ComponentFamily] {
        &self.explicit
    }

    pub fn geometric_tail(&self) -> Option<&GeometricTail> {
        self.geometric.as_ref()
    }

    /// Component `B_i` for `i ≥ 1`, or `None` past the end of a finite list.
    pub fn component(&self, i: usize) -> Option<ComponentFamily> {
        assert!(i >= 1, "components are indexed from 1");
        if i <= self.explicit.len() {
            return Some(self.explicit[i - 1].clone());
        }
        self.geometric.as_ref().map(|g| g.family_at(i))
    }

    /// Number of components, `None` for an infinite sequence.
    pub fn len(&self) -> Option<usize> {
        match self.geometric {
            Some(_) => None,
            None => Some(self.explicit.len()),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.geometric.is_none() && self.explicit.is_empty()
    }
}

/// User override for the large-deviations speed `r_n`.
#[derive(Clone)]
pub enum UserScaling {
    /// `table[n]` is `r_n`.
    Table(Vec<f64>),
    Function(Arc<dyn Fn(usize) -> f64 + Send + Sync>),
}

impl fmt::Debug for UserScaling {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            UserScaling::Table(t) => f.debug_tuple("Table").field(t).finish(),
            UserScaling::Function(_) => f.write_str("Function(..)"),
        }
    }
}

/// Risk aversion, traded assets and claim components of the market sequence.
/// Market `n` trades the first `n` assets, so components `1..=n` are hedgeable.
#[derive(Debug, Clone)]
pub struct MarketSpec {
    risk_aversion: f64,
    hedge: HedgeModel,
    components: ComponentSequence,
    scaling: Option<UserScaling>,
    tail_tolerance: f64,
}

impl MarketSpec {
    pub fn new(risk_aversion: f64, hedge: HedgeModel, components: ComponentSequence) -> Result<Self> {
        if !(risk_aversion > 0.0 && risk_aversion.is_finite()) {
            return Err(Error::invalid("risk_aversion", "must be positive and finite"));
        }
        Ok(MarketSpec {
            risk_aversion,
            hedge,
            components,
            scaling: None,
            tail_tolerance: DEFAULT_TAIL_TOLERANCE,
        })
    }

    pub fn with_scaling(mut self, scaling: UserScaling) -> Self {
        self.scaling = Some(scaling);
        self
    }

    pub fn with_tail_tolerance(mut self, tolerance: f64) -> Result<Self> {
        if !(tolerance > 0.0 && tolerance < 1.0) {
            return Err(Error::invalid("tail_tolerance", "must lie in (0, 1)"));
        }
        self.tail_tolerance = tolerance;
        Ok(self)
    }

    pub fn risk_aversion(&self) -> f64 {
        self.risk_aversion
    }

    pub fn hedge(&self) -> &HedgeModel {
        &self.hedge
    }

    pub fn horizon(&self) -> f64 {
        self.hedge.horizon()
    }

    pub fn components(&self) -> &ComponentSequence {
        &self.components
    }

    pub fn scaling(&self) -> Option<&UserScaling> {
        self.scaling.as_ref()
    }

    pub fn tail_tolerance(&self) -> f64 {
        self.tail_tolerance
    }
}
