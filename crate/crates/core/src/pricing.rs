//! Indifference prices and arbitrage-free bounds.

use crate::cgf::TailClaim;
use crate::error::Result;
use crate::ext_real::ExtReal;
use crate::hedge::hedgeable_price;
use crate::market::MarketSpec;

/// Per-unit indifference price of `q` units in market `n`, split into the
/// replication cost and the certainty-equivalent offset of the tail.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PriceQuote {
    pub n: usize,
    pub q: f64,
    pub hedgeable: f64,
    pub offset: f64,
    pub total: f64,
    pub risk_aversion: f64,
}

/// `p^n(q) = d^n - Λ_n(-qa) / (qa)`; at `q = 0` the tail mean replaces the offset.
pub fn indifference_price(market: &MarketSpec, n: usize, q: f64) -> Result<PriceQuote> {
    let a = market.risk_aversion();
    let hedgeable = hedgeable_price(market, n)?;
    let offset = certainty_offset(&TailClaim::new(market, n), a, q)?;
    Ok(PriceQuote {
        n,
        q,
        hedgeable,
        offset,
        total: hedgeable + offset,
        risk_aversion: a,
    })
}

/// `-Λ(-qa) / (qa)`, or `Λ̇(0)` at `q = 0`.
pub(crate) fn certainty_offset(tail: &TailClaim<'_>, a: f64, q: f64) -> Result<f64> {
    if q == 0.0 {
        return tail.cgf_derivative(0.0);
    }
    let lambda = -q * a;
    Ok(tail.cgf(lambda)? / lambda)
}

/// `(d^n + essinf Y_n, d^n + esssup Y_n)`.
pub fn arbitrage_bounds(market: &MarketSpec, n: usize) -> Result<(ExtReal, ExtReal)> {
    let d = hedgeable_price(market, n)?;
    let (lo, hi) = TailClaim::new(market, n).support();
    Ok((lo.shift(d), hi.shift(d)))
}
