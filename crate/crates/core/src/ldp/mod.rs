//! Large-deviations toolkit: speeds, scaled CGF probes, rate functions,
//! Varadhan suprema, M-bounds and the limiting-price regimes.

mod bounds;
mod gartner_ellis;
mod probe;
mod rate;
mod regime;
mod scaling;

pub use bounds::{m_bounds, m_bounds_with, varadhan_sup, MBounds};
pub use gartner_ellis::{gartner_ellis_check, GartnerEllisReport, Verdict};
pub use probe::{probe_grid, scaled_cgf_probe, ProbeEntry, ProbeSequence};
pub use rate::{
    legendre_transform, legendre_transform_fn, linspace, rate_function, DomainKind, RateFunction,
    LAMBDA_GRID, Y_GRID,
};
pub use regime::{
    empirical_regime_table, regime_limit, Prediction, QuantityRule, Regime, RegimeReport, RegimeRow,
    RegimeTable,
};
pub use scaling::{scaling_sequence, ScalingRule, ScalingSequence};
