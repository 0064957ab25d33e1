//! Reference markets used throughout the tests, benches and documentation.
//!
//! Both trade 64 uncorrelated driftless assets over a unit horizon with unit
//! risk aversion.

use crate::hedge::HedgeModel;
use crate::market::{ComponentSequence, GeometricTail, MarketSpec};

/// Covariance block size of the reference markets.
pub const BLOCK: usize = 64;

/// Gaussian components with `γ_i = 0`, `δ_i² = 2^{-i}`.
pub fn g1() -> MarketSpec {
    let components = ComponentSequence::geometric(GeometricTail::Gaussian {
        mean_scale: 0.0,
        variance_scale: 1.0,
        ratio: 0.5,
    })
    .expect("valid tail");
    MarketSpec::new(1.0, HedgeModel::identity(BLOCK, 1.0).expect("identity"), components)
        .expect("valid market")
}

/// Poisson components with `β_i = 2^{-i}`.
pub fn p1() -> MarketSpec {
    let components = ComponentSequence::geometric(GeometricTail::Poisson {
        scale: 1.0,
        ratio: 0.5,
    })
    .expect("valid tail");
    MarketSpec::new(1.0, HedgeModel::identity(BLOCK, 1.0).expect("identity"), components)
        .expect("valid market")
}
