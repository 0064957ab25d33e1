//! Exponential-utility indifference pricing in sequences of semi-complete
//! markets, with large-deviations limits of prices and optimal quantities.
//!
//! Market `n` trades `n` assets that replicate the first `n` claim components;
//! the remaining tail `Y_n = Σ_{i>n} B_i` is priced through its cumulant
//! generating function.
//!
//! ```
//! use indiff::{fixtures, indifference_price, optimal_quantity};
//!
//! let p1 = fixtures::p1();
//! let quote = indifference_price(&p1, 2, 1.0).unwrap();
//! assert!((quote.total - 0.908030140).abs() < 1e-9);
//! let q = optimal_quantity(&p1, 2, 0.85).unwrap();
//! assert!((q.q_hat - 0.916290732).abs() < 1e-9);
//! ```

pub mod cgf;
pub mod error;
pub mod ext_real;
pub mod fixtures;
pub mod hedge;
pub mod ldp;
pub mod market;
pub mod mc;
pub mod pricing;
pub mod quadrature;
pub mod sizing;

pub use cgf::{
    eval_cgf, eval_cgf_derivative, support_bounds, tail_cgf, tail_cgf_derivative, ComponentFamily,
    CustomLaw, FamilyKind, TailClaim,
};
pub use error::{Error, Result};
pub use ext_real::ExtReal;
pub use hedge::{
    cholesky_lower, hedgeable_limit, hedgeable_price, market_price_of_risk,
    risk_neutral_component_mean, HedgeModel, Matrix,
};
pub use ldp::{
    empirical_regime_table, gartner_ellis_check, legendre_transform, m_bounds, rate_function,
    regime_limit, scaled_cgf_probe, scaling_sequence, varadhan_sup, MBounds, Prediction,
    QuantityRule, RateFunction, Regime, RegimeReport,
};
pub use market::{ComponentSequence, GeometricTail, MarketSpec, UserScaling};
pub use mc::{mc_cgf, mc_price_offset, mc_tilted_mean, sample_tail, McConfig, McEstimate, TailSamples};
pub use pricing::{arbitrage_bounds, indifference_price, PriceQuote};
pub use sizing::{optimal_quantity, purchase_objective, quantity_scaling, OptimalQuantity, ScalingTable};
