use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::ext_real::ExtReal;
use crate::market::MarketSpec;
use crate::pricing::indifference_price;

use super::bounds::{varadhan_sup, MBounds};
use super::rate::RateFunction;
use super::scaling::ScalingSequence;

/// Growth class of positions `q_n` against the speed `r_n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    /// `q_n / r_n → 0`.
    R1,
    /// `q_n / r_n → l`, finite and nonzero.
    R2,
    /// `|q_n| / r_n → ∞`.
    R3,
}

/// Predicted `lim (p^n(q_n) - d^n)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Prediction {
    Finite(f64),
    PosInf,
    NegInf,
    /// `lim sup ≤ bound`.
    UpperBound(f64),
    /// `lim inf ≥ bound`.
    LowerBound(f64),
    /// The ratio sits at a threshold where no general limit is known.
    UncoveredBoundary,
}

impl Prediction {
    /// The prediction as an extended real when it is a definite limit.
    pub fn value(&self) -> Option<ExtReal> {
        match *self {
            Prediction::Finite(v) => Some(ExtReal::Finite(v)),
            Prediction::PosInf => Some(ExtReal::PosInf),
            Prediction::NegInf => Some(ExtReal::NegInf),
            _ => None,
        }
    }

    fn from_ext(v: ExtReal) -> Self {
        match v {
            ExtReal::Finite(x) => Prediction::Finite(x),
            ExtReal::PosInf => Prediction::PosInf,
            ExtReal::NegInf => Prediction::NegInf,
        }
    }
}

impl fmt::Display for Prediction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Prediction::Finite(v) => write!(f, "{v}"),
            Prediction::PosInf => f.write_str("inf"),
            Prediction::NegInf => f.write_str("-inf"),
            Prediction::UpperBound(v) => write!(f, "<= {v}"),
            Prediction::LowerBound(v) => write!(f, ">= {v}"),
            Prediction::UncoveredBoundary => f.write_str("uncovered-boundary"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegimeReport {
    pub regime: Regime,
    pub l: ExtReal,
    pub prediction: Prediction,
}

/// `x / y` for a bound `x` and finite positive `y`.
fn ratio(x: ExtReal, y: f64) -> ExtReal {
    x.scale(1.0 / y).expect("finite nonzero scale")
}

/// Outer end of a star bound's bisection bracket, or the bound itself.
fn outer(bound: ExtReal, bracket: Option<(f64, f64)>, upward: bool) -> ExtReal {
    match bracket {
        Some((lo, hi)) => ExtReal::Finite(if upward { hi } else { lo }),
        None => bound,
    }
}

/// Limiting price offset for positions with `q_n / r_n → l`. The uncovered
/// intervals include the bisection uncertainty of the star bounds.
pub fn regime_limit(rate: &RateFunction, a: f64, l: ExtReal, m: &MBounds) -> Result<RegimeReport> {
    if !(a > 0.0 && a.is_finite()) {
        return Err(Error::invalid("risk_aversion", "must be positive and finite"));
    }
    let (regime, prediction) = match l {
        ExtReal::Finite(x) if x == 0.0 => (Regime::R1, Prediction::Finite(0.0)),
        ExtReal::Finite(x) if x > 0.0 => {
            let l = ExtReal::Finite(x);
            let start = ratio(-m.lower, a);
            let end = ratio(-outer(m.lower_star, m.brackets[0], false), a);
            let p = if m.lower.is_finite() && start <= l && l <= end {
                Prediction::UncoveredBoundary
            } else if m.lower_star.is_finite() && l > end {
                Prediction::NegInf
            } else if l < start {
                // inf_y (y + I(y)/(al)) = -V(-al)/(al)
                Prediction::from_ext(-ratio(varadhan_sup(rate, -a * x), a * x))
            } else {
                Prediction::UncoveredBoundary
            };
            (Regime::R2, p)
        }
        ExtReal::Finite(x) => {
            let l = ExtReal::Finite(x);
            let start = ratio(-m.upper, a);
            let end = ratio(-outer(m.upper_star, m.brackets[3], true), a);
            let p = if m.upper.is_finite() && end <= l && l <= start {
                Prediction::UncoveredBoundary
            } else if m.upper_star.is_finite() && l < end {
                Prediction::PosInf
            } else if l > start {
                // sup_y (y + I(y)/(la)) = V(-la)/(-la)
                Prediction::from_ext(ratio(varadhan_sup(rate, -a * x), -a * x))
            } else {
                Prediction::UncoveredBoundary
            };
            (Regime::R2, p)
        }
        ExtReal::PosInf => {
            let p = if m.lower_star.is_finite() {
                Prediction::NegInf
            } else if m.lower == ExtReal::NegInf {
                match rate.domain_bounds().0 {
                    ExtReal::Finite(y) => Prediction::UpperBound(y),
                    ExtReal::NegInf => Prediction::NegInf,
                    ExtReal::PosInf => Prediction::UncoveredBoundary,
                }
            } else {
                Prediction::UncoveredBoundary
            };
            (Regime::R3, p)
        }
        ExtReal::NegInf => {
            let p = if m.upper_star.is_finite() {
                Prediction::PosInf
            } else if m.upper == ExtReal::PosInf {
                match rate.domain_bounds().1 {
                    ExtReal::Finite(y) => Prediction::LowerBound(y),
                    ExtReal::PosInf => Prediction::PosInf,
                    ExtReal::NegInf => Prediction::UncoveredBoundary,
                }
            } else {
                Prediction::UncoveredBoundary
            };
            (Regime::R3, p)
        }
    };
    Ok(RegimeReport {
        regime,
        l,
        prediction,
    })
}

/// Position sizes `q_n` for the empirical table.
#[derive(Clone)]
pub enum QuantityRule {
    /// `q_n = l · r_n`.
    Linear(f64),
    /// `q_n = q` for every `n`.
    Constant(f64),
    /// `q_n = f(n, r_n)` with the ratio limit `l` supplied by the caller.
    Custom {
        rule: Arc<dyn Fn(usize, f64) -> f64 + Send + Sync>,
        limit: ExtReal,
    },
}

impl fmt::Debug for QuantityRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            QuantityRule::Linear(l) => f.debug_tuple("Linear").field(l).finish(),
            QuantityRule::Constant(q) => f.debug_tuple("Constant").field(q).finish(),
            QuantityRule::Custom { limit, .. } => f.debug_struct("Custom").field("limit", limit).finish(),
        }
    }
}

impl QuantityRule {
    pub fn quantity(&self, n: usize, r_n: f64) -> f64 {
        match self {
            QuantityRule::Linear(l) => l * r_n,
            QuantityRule::Constant(q) => *q,
            QuantityRule::Custom { rule, .. } => rule(n, r_n),
        }
    }

    pub fn limit(&self) -> ExtReal {
        match self {
            QuantityRule::Linear(l) => ExtReal::Finite(*l),
            QuantityRule::Constant(_) => ExtReal::ZERO,
            QuantityRule::Custom { limit, .. } => *limit,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegimeRow {
    pub n: usize,
    pub r_n: f64,
    pub q_n: f64,
    /// `p^n(q_n) - d^n`.
    pub offset: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegimeTable {
    pub rows: Vec<RegimeRow>,
    pub report: RegimeReport,
    /// `|offset - prediction|` at the largest `n`, when the prediction is finite.
    pub final_deviation: Option<f64>,
}

/// Empirical price offsets along `n` beside the predicted regime limit.
pub fn empirical_regime_table(
    market: &MarketSpec,
    rate: &RateFunction,
    bounds: &MBounds,
    rule: &QuantityRule,
    n_list: &[usize],
) -> Result<RegimeTable> {
    let scaling = ScalingSequence::for_market(market)?;
    let mut rows = n_list
        .par_iter()
        .map(|&n| -> Result<RegimeRow> {
            let r_n = scaling.rate(n)?;
            let q_n = rule.quantity(n, r_n);
            let quote = indifference_price(market, n, q_n)?;
            Ok(RegimeRow {
                n,
                r_n,
                q_n,
                offset: quote.offset,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    rows.sort_by_key(|r| r.n);
    let report = regime_limit(rate, market.risk_aversion(), rule.limit(), bounds)?;
    let final_deviation = match (rows.last(), report.prediction) {
        (Some(row), Prediction::Finite(v)) => Some((row.offset - v).abs()),
        _ => None,
    };
    Ok(RegimeTable {
        rows,
        report,
        final_deviation,
    })
}
