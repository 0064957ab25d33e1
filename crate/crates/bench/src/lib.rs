//! Shared inputs for the benchmarks.

use std::sync::Arc;

use indiff::{ComponentSequence, CustomLaw, GeometricTail, HedgeModel, MarketSpec};

/// Geometric uniform tail `B_i = 0.6^i · U(-1, 1)` on 16 driftless assets.
pub fn uniform_market() -> MarketSpec {
    let law = Arc::new(CustomLaw::uniform(-1.0, 1.0).expect("valid law"));
    let components =
        ComponentSequence::geometric(GeometricTail::ScaledCustom { law, ratio: 0.6 }).expect("valid tail");
    MarketSpec::new(1.0, HedgeModel::identity(16, 1.0).expect("identity"), components).expect("valid market")
}
