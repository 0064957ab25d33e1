//! JSON market files.

use std::fmt;
use std::path::Path;
use std::sync::Arc;

use indiff::{
    cholesky_lower, ComponentFamily, ComponentSequence, CustomLaw, Error, GeometricTail,
    HedgeModel, MarketSpec, Matrix, UserScaling,
};
use serde::{Deserialize, Serialize};

/// Schema or validation failure, located by a dotted field path.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpecError {
    pub path: String,
    pub message: String,
}

impl SpecError {
    fn new(path: impl Into<String>, message: impl Into<String>) -> Self {
        SpecError {
            path: path.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for SpecError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

impl std::error::Error for SpecError {}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MarketSpecFile {
    pub risk_aversion: f64,
    pub horizon: f64,
    pub mu: Vec<f64>,
    pub sigma_cov: Covariance,
    #[serde(default)]
    pub components: Vec<ComponentSpec>,
    pub tail: TailSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scaling: Option<ScalingSpec>,
}

/// Leading covariance block: a dense matrix or `"identity k"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Covariance {
    Named(String),
    Matrix(Vec<Vec<f64>>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase", deny_unknown_fields)]
pub enum ComponentSpec {
    Gaussian {
        #[serde(default)]
        mean: f64,
        variance: f64,
    },
    Poisson {
        intensity: f64,
    },
    Uniform {
        lo: f64,
        hi: f64,
    },
}

/// Continuation after the explicit components.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "kebab-case")]
pub enum TailSpec {
    /// Parameters `c · ρ^i` at absolute index `i`.
    Geometric(GeometricSpec),
    /// The explicit list is the whole claim and has `nmax` entries.
    Explicit { nmax: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase", deny_unknown_fields)]
pub enum GeometricSpec {
    /// `γ_i = mean_c · ρ^i`, `δ_i² = c · ρ^i`.
    Gaussian {
        #[serde(default)]
        mean_c: f64,
        c: f64,
        rho: f64,
    },
    /// `β_i = c · ρ^i`.
    Poisson { c: f64, rho: f64 },
    /// `B_i = ρ^i · U` with `U` uniform on `[lo, hi]`.
    Uniform { lo: f64, hi: f64, rho: f64 },
}

/// `table[n]` overrides the speed `r_n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScalingSpec {
    pub table: Vec<f64>,
}

fn positive(path: impl Into<String>, x: f64) -> Result<(), SpecError> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(SpecError::new(path, format!("must be positive and finite, found {x}")))
    }
}

fn finite(path: impl Into<String>, x: f64) -> Result<(), SpecError> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(SpecError::new(path, format!("must be finite, found {x}")))
    }
}

fn interval(path: &str, lo: f64, hi: f64) -> Result<(), SpecError> {
    finite(format!("{path}.lo"), lo)?;
    finite(format!("{path}.hi"), hi)?;
    if lo < hi {
        Ok(())
    } else {
        Err(SpecError::new(format!("{path}.hi"), format!("must exceed lo = {lo}")))
    }
}

fn summable(path: &str, rho: f64) -> Result<(), SpecError> {
    if rho > 0.0 && rho < 1.0 {
        Ok(())
    } else {
        Err(SpecError::new(
            format!("{path}.rho"),
            format!("tail not summable: ratio {rho} must lie in (0, 1)"),
        ))
    }
}

impl Covariance {
    fn matrix(&self) -> Result<Matrix, SpecError> {
        match self {
            Covariance::Named(name) => {
                let k = name
                    .strip_prefix("identity")
                    .map(str::trim)
                    .and_then(|k| k.parse::<usize>().ok())
                    .filter(|&k| k > 0)
                    .ok_or_else(|| {
                        SpecError::new("sigma_cov", format!("expected \"identity k\" with k >= 1, found {name:?}"))
                    })?;
                Ok(Matrix::identity(k))
            }
            Covariance::Matrix(rows) => {
                for (i, row) in rows.iter().enumerate() {
                    if row.len() != rows.len() {
                        return Err(SpecError::new(
                            format!("sigma_cov[{i}]"),
                            format!("row has {} entries, expected {}", row.len(), rows.len()),
                        ));
                    }
                    for (j, &x) in row.iter().enumerate() {
                        finite(format!("sigma_cov[{i}][{j}]"), x)?;
                        if x != rows[j][i] {
                            return Err(SpecError::new(format!("sigma_cov[{i}][{j}]"), "matrix is not symmetric"));
                        }
                    }
                }
                Matrix::from_rows(rows).map_err(|e| SpecError::new("sigma_cov", e.to_string()))
            }
        }
    }
}

impl ComponentSpec {
    fn validate(&self, path: &str) -> Result<(), SpecError> {
        match *self {
            ComponentSpec::Gaussian { mean, variance } => {
                finite(format!("{path}.mean"), mean)?;
                positive(format!("{path}.variance"), variance)
            }
            ComponentSpec::Poisson { intensity } => positive(format!("{path}.intensity"), intensity),
            ComponentSpec::Uniform { lo, hi } => interval(path, lo, hi),
        }
    }

    fn family(&self) -> Result<ComponentFamily, Error> {
        match *self {
            ComponentSpec::Gaussian { mean, variance } => ComponentFamily::gaussian(mean, variance),
            ComponentSpec::Poisson { intensity } => ComponentFamily::poisson(intensity),
            ComponentSpec::Uniform { lo, hi } => Ok(ComponentFamily::custom(Arc::new(CustomLaw::uniform(lo, hi)?))),
        }
    }
}

impl GeometricSpec {
    fn validate(&self) -> Result<(), SpecError> {
        match *self {
            GeometricSpec::Gaussian { mean_c, c, rho } => {
                finite("tail.mean_c", mean_c)?;
                positive("tail.c", c)?;
                summable("tail", rho)
            }
            GeometricSpec::Poisson { c, rho } => {
                positive("tail.c", c)?;
                summable("tail", rho)
            }
            GeometricSpec::Uniform { lo, hi, rho } => {
                interval("tail", lo, hi)?;
                summable("tail", rho)
            }
        }
    }

    fn tail(&self) -> Result<GeometricTail, Error> {
        Ok(match *self {
            GeometricSpec::Gaussian { mean_c, c, rho } => GeometricTail::Gaussian {
                mean_scale: mean_c,
                variance_scale: c,
                ratio: rho,
            },
            GeometricSpec::Poisson { c, rho } => GeometricTail::Poisson { scale: c, ratio: rho },
            GeometricSpec::Uniform { lo, hi, rho } => GeometricTail::ScaledCustom {
                law: Arc::new(CustomLaw::uniform(lo, hi)?),
                ratio: rho,
            },
        })
    }
}

impl MarketSpecFile {
    pub fn from_json(text: &str) -> Result<Self, SpecError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            SpecError::new(path, e.into_inner().to_string())
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, SpecError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| SpecError::new(".", format!("cannot read {}: {e}", path.display())))?;
        MarketSpecFile::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("market file serializes")
    }

    /// Checks every field and builds the validated market.
    pub fn to_market(&self) -> Result<MarketSpec, SpecError> {
        positive("risk_aversion", self.risk_aversion)?;
        positive("horizon", self.horizon)?;
        let cov = self.sigma_cov.matrix()?;
        if self.mu.len() != cov.dim() {
            return Err(SpecError::new(
                "mu",
                format!("has {} entries but the covariance block has {}", self.mu.len(), cov.dim()),
            ));
        }
        for (i, &m) in self.mu.iter().enumerate() {
            finite(format!("mu[{i}]"), m)?;
        }
        if let Err(e) = cholesky_lower(&cov) {
            return Err(SpecError::new("sigma_cov", format!("covariance is not elliptic: {e}")));
        }
        for (i, c) in self.components.iter().enumerate() {
            c.validate(&format!("components[{i}]"))?;
        }
        let geometric = match &self.tail {
            TailSpec::Geometric(g) => {
                g.validate()?;
                Some(g.tail().map_err(|e| SpecError::new("tail", e.to_string()))?)
            }
            TailSpec::Explicit { nmax } => {
                if *nmax == 0 || *nmax != self.components.len() {
                    return Err(SpecError::new(
                        "tail.nmax",
                        format!("must equal the number of components ({})", self.components.len()),
                    ));
                }
                None
            }
        };
        let explicit = self
            .components
            .iter()
            .enumerate()
            .map(|(i, c)| c.family().map_err(|e| SpecError::new(format!("components[{i}]"), e.to_string())))
            .collect::<Result<Vec<_>, _>>()?;
        let components = ComponentSequence::new(explicit, geometric).map_err(library)?;
        let hedge = HedgeModel::new(self.mu.clone(), cov, self.horizon).map_err(library)?;
        let mut market = MarketSpec::new(self.risk_aversion, hedge, components).map_err(library)?;
        if let Some(s) = &self.scaling {
            if s.table.is_empty() {
                return Err(SpecError::new("scaling.table", "must not be empty"));
            }
            for (i, &r) in s.table.iter().enumerate() {
                finite(format!("scaling.table[{i}]"), r)?;
            }
            market = market.with_scaling(UserScaling::Table(s.table.clone()));
        }
        Ok(market)
    }
}

fn library(e: Error) -> SpecError {
    match e {
        Error::InvalidParameter { name, reason } => SpecError::new(name, reason),
        other => SpecError::new(".", other.to_string()),
    }
}

/// Reads, validates and instantiates the market described by a JSON file.
pub fn parse_market_spec(path: impl AsRef<Path>) -> Result<MarketSpec, SpecError> {
    MarketSpecFile::load(path)?.to_market()
}
