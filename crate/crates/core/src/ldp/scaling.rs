use crate::cgf::{ComponentFamily, FamilyKind, TailClaim};
use crate::error::{Error, Result};
use crate::market::{GeometricTail, MarketSpec, UserScaling};

/// How the speed `r_n` is derived for a market.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScalingRule {
    /// `r_n = 1 / Var[Y_n]`.
    GaussianInverseTailVariance,
    /// `r_n = -log Σ_{i>n} β_i`.
    PoissonNegLogTailIntensity,
    UserSupplied,
}

/// Speed sequence `n ↦ r_n` bound to a market.
#[derive(Debug, Clone, Copy)]
pub struct ScalingSequence<'a> {
    market: &'a MarketSpec,
    rule: ScalingRule,
}

impl<'a> ScalingSequence<'a> {
    /// Picks the user override if present, otherwise the canonical rule of the
    /// market's (single) family.
    pub fn for_market(market: &'a MarketSpec) -> Result<Self> {
        if market.scaling().is_some() {
            return Ok(ScalingSequence {
                market,
                rule: ScalingRule::UserSupplied,
            });
        }
        let rule = match tail_family(market)? {
            FamilyKind::Gaussian => ScalingRule::GaussianInverseTailVariance,
            FamilyKind::Poisson => ScalingRule::PoissonNegLogTailIntensity,
            FamilyKind::Custom => {
                return Err(Error::MissingScaling(
                    "custom component laws need a user-supplied scaling".into(),
                ))
            }
        };
        Ok(ScalingSequence { market, rule })
    }

    pub fn rule(&self) -> ScalingRule {
        self.rule
    }

    pub fn rate(&self, n: usize) -> Result<f64> {
        let r = match self.rule {
            ScalingRule::GaussianInverseTailVariance => TailClaim::new(self.market, n).variance().recip(),
            ScalingRule::PoissonNegLogTailIntensity => -TailClaim::new(self.market, n)
                .ln_poisson_intensity()
                .expect("Poisson rule on a Poisson market"),
            ScalingRule::UserSupplied => match self.market.scaling().expect("user scaling") {
                UserScaling::Table(t) => *t.get(n).ok_or_else(|| {
                    Error::MissingScaling(format!("scaling table has no entry for n = {n}"))
                })?,
                UserScaling::Function(f) => f(n),
            },
        };
        if !(r > 0.0 && r.is_finite()) {
            return Err(Error::invalid(
                "scaling",
                format!("r_{n} = {r} must be positive and finite"),
            ));
        }
        Ok(r)
    }
}

/// The family shared by every component, or a missing-scaling error for mixed
/// markets.
fn tail_family(market: &MarketSpec) -> Result<FamilyKind> {
    let seq = market.components();
    let mut kinds = seq.explicit().iter().map(ComponentFamily::kind).collect::<Vec<_>>();
    if let Some(tail) = seq.geometric_tail() {
        kinds.push(match tail {
            GeometricTail::Gaussian { .. } => FamilyKind::Gaussian,
            GeometricTail::Poisson { .. } => FamilyKind::Poisson,
            GeometricTail::ScaledCustom { .. } => FamilyKind::Custom,
        });
    }
    match kinds.split_first() {
        None => Err(Error::MissingScaling("market has no components".into())),
        Some((first, rest)) if rest.iter().all(|k| k == first) => Ok(*first),
        Some(_) => Err(Error::MissingScaling(
            "mixed component families have no canonical scaling".into(),
        )),
    }
}

/// `r_n` for market `n`.
pub fn scaling_sequence(market: &MarketSpec, n: usize) -> Result<f64> {
    ScalingSequence::for_market(market)?.rate(n)
}
