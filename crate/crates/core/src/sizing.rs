//! Optimal purchase quantities at a quoted price.

use rayon::prelude::*;

use crate::cgf::TailClaim;
use crate::error::{Error, Result};
use crate::ext_real::ExtReal;
use crate::hedge::hedgeable_price;
use crate::ldp::scaling_sequence;
use crate::market::MarketSpec;
use crate::pricing::arbitrage_bounds;

const MAX_ITERATIONS: usize = 200;
const BRACKET_LIMIT: f64 = 1152921504606846976.0; // 2^60
const RESIDUAL_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimalQuantity {
    pub q_hat: f64,
    /// `|Λ̇_n(-q̂a) - (p̃ - d^n)|`.
    pub residual: f64,
    pub iterations: usize,
    pub bracket: (f64, f64),
}

/// Tilted mean `Λ̇_n(λ)`, saturating to `±∞` where it overflows.
fn tilted_mean(tail: &TailClaim<'_>, lambda: f64) -> Result<f64> {
    match tail.cgf_derivative(lambda) {
        Err(Error::Overflow { .. }) => Ok(if lambda > 0.0 {
            f64::INFINITY
        } else {
            f64::NEG_INFINITY
        }),
        other => other,
    }
}

/// Solves `Λ̇_n(-q̂a) = p̃ - d^n` by bisection.
pub fn optimal_quantity(market: &MarketSpec, n: usize, price: f64) -> Result<OptimalQuantity> {
    let (lo_b, hi_b) = arbitrage_bounds(market, n)?;
    let p = ExtReal::from_f64(price)?;
    if !(lo_b < p && p < hi_b) {
        return Err(Error::PriceNotArbitrageFree {
            price,
            lower: lo_b.to_string(),
            upper: hi_b.to_string(),
        });
    }
    let a = market.risk_aversion();
    let target = price - hedgeable_price(market, n)?;
    let tail = TailClaim::new(market, n);
    // h(q) = target - Λ̇(-qa) is increasing in q.
    let h = |q: f64| -> Result<f64> { Ok(target - tilted_mean(&tail, -q * a)?) };

    let mut lo = -1.0;
    let mut hi = 1.0;
    while h(lo)? > 0.0 {
        hi = lo;
        lo *= 2.0;
        if lo.abs() > BRACKET_LIMIT {
            return Err(Error::NearBoundary { price });
        }
    }
    while h(hi)? < 0.0 {
        lo = hi.max(lo);
        hi *= 2.0;
        if hi > BRACKET_LIMIT {
            return Err(Error::NearBoundary { price });
        }
    }

    let mut iterations = 0;
    let mut q_hat = 0.5 * (lo + hi);
    while iterations < MAX_ITERATIONS {
        iterations += 1;
        let mid = 0.5 * (lo + hi);
        q_hat = mid;
        if mid <= lo || mid >= hi {
            break;
        }
        let v = h(mid)?;
        if v == 0.0 {
            break;
        }
        if v < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let residual = (tail.cgf_derivative(-q_hat * a)? - target).abs();
    if !(residual <= RESIDUAL_TOL * (1.0 + target.abs())) {
        return Err(Error::SolverStalled {
            residual,
            iterations,
        });
    }
    Ok(OptimalQuantity {
        q_hat,
        residual,
        iterations,
        bracket: (lo, hi),
    })
}

/// `q(p̃ - d^n) + Λ_n(-qa) / a`, the convex objective minimized by `q̂`.
pub fn purchase_objective(market: &MarketSpec, n: usize, price: f64, q: f64) -> Result<f64> {
    let a = market.risk_aversion();
    let d = hedgeable_price(market, n)?;
    Ok(q * (price - d) + TailClaim::new(market, n).cgf(-q * a)? / a)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingRow {
    pub n: usize,
    pub q_hat: f64,
    pub r_n: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingTable {
    pub p_offset: f64,
    pub rows: Vec<ScalingRow>,
    pub warnings: Vec<String>,
}

/// `q̂_n` at `p̃^n = d^n + p_offset` against the speed `r_n`, for each `n`.
pub fn quantity_scaling(market: &MarketSpec, p_offset: f64, n_list: &[usize]) -> Result<ScalingTable> {
    let rows = n_list
        .par_iter()
        .map(|&n| -> Result<ScalingRow> {
            let price = hedgeable_price(market, n)? + p_offset;
            let q_hat = optimal_quantity(market, n, price)?.q_hat;
            let r_n = scaling_sequence(market, n)?;
            Ok(ScalingRow {
                n,
                q_hat,
                r_n,
                ratio: q_hat / r_n,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut warnings = Vec::new();
    let mut sorted: Vec<usize> = n_list.to_vec();
    sorted.sort_unstable();
    let supports: Vec<_> = sorted
        .iter()
        .map(|&n| TailClaim::new(market, n).support())
        .collect();
    let oscillates = supports
        .windows(3)
        .any(|w| (w[1].0 < w[0].0) != (w[2].0 < w[1].0) && w[0].0 != w[1].0 && w[1].0 != w[2].0
            || (w[1].1 > w[0].1) != (w[2].1 > w[1].1) && w[0].1 != w[1].1 && w[1].1 != w[2].1);
    if oscillates {
        warnings.push(
            "tail support bounds oscillate in n; limits of the arbitrage range may not exist".into(),
        );
    }
    Ok(ScalingTable {
        p_offset,
        rows,
        warnings,
    })
}
