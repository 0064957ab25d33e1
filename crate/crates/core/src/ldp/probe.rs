use rayon::prelude::*;

use crate::cgf::TailClaim;
use crate::error::{Error, Result};
use crate::ext_real::ExtReal;
use crate::market::MarketSpec;

use super::scaling::ScalingSequence;

/// Entries above this size can only signal divergence.
const DIVERGENCE_LEVEL: f64 = 1e6;
const CONVERGENCE_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbeEntry {
    pub n: usize,
    pub r_n: f64,
    /// `Λ_n(λ r_n) / r_n`; `+inf` where the CGF overflows.
    pub value: ExtReal,
}

/// Scaled CGF values `Λ_n(λ r_n) / r_n` along `n` and their extrapolated limit.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbeSequence {
    pub lambda: f64,
    pub entries: Vec<ProbeEntry>,
    /// Richardson extrapolation in `1/r_n` from the last two entries, `+inf`
    /// when the sequence diverges.
    pub limit: ExtReal,
    pub converged: bool,
    pub divergent: bool,
}

impl ProbeSequence {
    /// Assembles a sequence from precomputed entries sorted by `n`.
    pub fn from_entries(lambda: f64, mut entries: Vec<ProbeEntry>) -> Self {
        entries.sort_by_key(|e| e.n);
        let divergent = is_divergent(&entries);
        let (limit, converged) = if divergent {
            (ExtReal::PosInf, true)
        } else {
            extrapolate(&entries)
        };
        ProbeSequence {
            lambda,
            entries,
            limit,
            converged,
            divergent,
        }
    }
}

/// Last three entries grow super-linearly in `n` and the last exceeds `1e6`
/// (an overflowed entry counts as divergent).
fn is_divergent(entries: &[ProbeEntry]) -> bool {
    if entries.last().is_some_and(|e| e.value == ExtReal::PosInf) {
        return true;
    }
    let [.., e1, e2, e3] = entries else {
        return false;
    };
    let (Some(v1), Some(v2), Some(v3)) = (e1.value.finite(), e2.value.finite(), e3.value.finite()) else {
        return false;
    };
    let s12 = (v2 - v1) / (e2.n - e1.n) as f64;
    let s23 = (v3 - v2) / (e3.n - e2.n) as f64;
    v3 > DIVERGENCE_LEVEL && s12 > 0.0 && s23 > s12
}

/// `L = (r₂v₂ - r₁v₁)/(r₂ - r₁)` removes the `1/r_n` term; converged when the
/// estimates from the last two pairs agree.
fn extrapolate(entries: &[ProbeEntry]) -> (ExtReal, bool) {
    let finite: Vec<(f64, f64)> = entries
        .iter()
        .filter_map(|e| e.value.finite().map(|v| (e.r_n, v)))
        .collect();
    let pair = |(r1, v1): (f64, f64), (r2, v2): (f64, f64)| {
        if r2 == r1 {
            v2
        } else {
            (r2 * v2 - r1 * v1) / (r2 - r1)
        }
    };
    match finite.as_slice() {
        [] => (ExtReal::PosInf, false),
        [(_, v)] => (ExtReal::Finite(*v), false),
        [(_, v1), (_, v2)] if v1 == v2 => (ExtReal::Finite(*v2), true),
        [a, b] => (ExtReal::Finite(pair(*a, *b)), false),
        [.., a, b, c] => {
            let l1 = pair(*a, *b);
            let l2 = pair(*b, *c);
            let ok = (l2 - l1).abs() <= CONVERGENCE_TOL * (1.0 + l2.abs())
                || (c.1 - b.1).abs() <= CONVERGENCE_TOL * (1.0 + c.1.abs());
            let limit = if l2.is_finite() { l2 } else { c.1 };
            (ExtReal::Finite(limit), ok)
        }
    }
}

/// One probe entry at index `n`.
pub(crate) fn probe_entry(scaling: &ScalingSequence<'_>, market: &MarketSpec, lambda: f64, n: usize) -> Result<ProbeEntry> {
    let r_n = scaling.rate(n)?;
    let value = match TailClaim::new(market, n).cgf(lambda * r_n) {
        Ok(v) => ExtReal::from_f64(v / r_n)?,
        Err(Error::Overflow { .. }) => ExtReal::PosInf,
        Err(e) => return Err(e),
    };
    Ok(ProbeEntry { n, r_n, value })
}

/// `(n, Λ_n(λ r_n) / r_n)` for each `n`, with limit estimate.
pub fn scaled_cgf_probe(market: &MarketSpec, lambda: f64, n_list: &[usize]) -> Result<ProbeSequence> {
    let scaling = ScalingSequence::for_market(market)?;
    let entries = n_list
        .par_iter()
        .map(|&n| probe_entry(&scaling, market, lambda, n))
        .collect::<Result<Vec<_>>>()?;
    Ok(ProbeSequence::from_entries(lambda, entries))
}

/// Probes at every `λ` of a grid.
pub fn probe_grid(market: &MarketSpec, lambdas: &[f64], n_list: &[usize]) -> Result<Vec<ProbeSequence>> {
    lambdas
        .par_iter()
        .map(|&l| scaled_cgf_probe(market, l, n_list))
        .collect()
}
