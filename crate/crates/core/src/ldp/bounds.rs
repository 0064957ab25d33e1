use crate::error::{Error, Result};
use crate::ext_real::ExtReal;
use crate::market::MarketSpec;

use super::probe::{probe_entry, ProbeSequence};
use super::rate::{linspace, DomainKind, RateFunction, Y_GRID};
use super::scaling::ScalingSequence;

const SPAN_LIMIT: f64 = 1e8;
const INTEGER_LIMIT: u32 = 1_000_000;
const M_MIN: f64 = 1e-3;
const M_MAX: f64 = 1e3;
const M_WIDTH: f64 = 1e-3;
/// Speeds at which divergence of the scaled CGF is tested.
const SPEED_TARGETS: [f64; 3] = [2.5e5, 5e5, 1e6];

/// `sup_y (My - I(y))` over the effective domain of `I`.
pub fn varadhan_sup(rate: &RateFunction, m: f64) -> ExtReal {
    match rate.domain() {
        DomainKind::NonNegativeIntegers => integer_sup(rate, m),
        DomainKind::Interval(a, b) if a == b => match a.finite() {
            Some(y) => match rate.eval(y) {
                ExtReal::Finite(i) => ExtReal::Finite(m * y - i),
                _ => ExtReal::NegInf,
            },
            None => ExtReal::NegInf,
        },
        _ => continuous_sup(rate, m),
    }
}

fn objective(rate: &RateFunction, m: f64, y: f64) -> f64 {
    match rate.eval(y) {
        ExtReal::Finite(i) => m * y - i,
        _ => f64::NEG_INFINITY,
    }
}

fn integer_sup(rate: &RateFunction, m: f64) -> ExtReal {
    let mut best = f64::NEG_INFINITY;
    for y in 0..=INTEGER_LIMIT {
        best = best.max(objective(rate, m, y as f64));
    }
    let top = INTEGER_LIMIT as f64;
    let growth = match (rate.eval(top), rate.eval(top / 2.0)) {
        (ExtReal::Finite(a), ExtReal::Finite(b)) => (a - b) / (top / 2.0),
        _ => f64::INFINITY,
    };
    if m > growth {
        ExtReal::PosInf
    } else {
        ExtReal::from(best)
    }
}

fn continuous_sup(rate: &RateFunction, m: f64) -> ExtReal {
    let (dom_lo, dom_hi) = rate.domain_bounds();
    let (_, _, count) = Y_GRID;
    let mut span = Y_GRID.1;
    loop {
        let lo = ExtReal::Finite(-span).max(dom_lo).to_f64();
        let hi = ExtReal::Finite(span).min(dom_hi).to_f64();
        let ys = linspace(lo, hi, count);
        let values: Vec<f64> = ys.iter().map(|&y| objective(rate, m, y)).collect();
        let (k, &best) = values
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .expect("non-empty grid");
        if best == f64::NEG_INFINITY {
            return ExtReal::NegInf;
        }
        let at_open_edge = (k == 0 && ExtReal::Finite(lo) > dom_lo)
            || (k == ys.len() - 1 && ExtReal::Finite(hi) < dom_hi);
        if at_open_edge {
            if span >= SPAN_LIMIT {
                return ExtReal::PosInf;
            }
            span = (span * 2.0).min(SPAN_LIMIT);
            continue;
        }
        let a = ys[k.saturating_sub(1)];
        let b = ys[(k + 1).min(ys.len() - 1)];
        let refined = golden_max(|y| objective(rate, m, y), a, b);
        return ExtReal::from(refined.max(best));
    }
}

/// Golden-section search for the maximum of a unimodal function on `[a, b]`.
fn golden_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..200 {
        if (b - a).abs() <= 1e-12 * (1.0 + a.abs().max(b.abs())) {
            break;
        }
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    fc.max(fd).max(f(0.5 * (a + b)))
}

/// Finiteness thresholds of the scaled CGF limit (`M̲`, `M̄`) and of the
/// Varadhan functional (`M_*`, `M*`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MBounds {
    pub lower_star: ExtReal,
    pub lower: ExtReal,
    pub upper: ExtReal,
    pub upper_star: ExtReal,
    /// Final bisection brackets in the order `M_*`, `M̲`, `M̄`, `M*`; `None`
    /// where the bound is infinite.
    pub brackets: [Option<(f64, f64)>; 4],
}

impl MBounds {
    pub fn is_ordered(&self) -> bool {
        self.lower_star <= self.lower
            && self.lower < ExtReal::ZERO
            && ExtReal::ZERO < self.upper
            && self.upper <= self.upper_star
    }
}

/// Largest `M ∈ [1e-3, 1e3]` with `finite(M)`, bisected to width `1e-3`;
/// `None` when finite at `1e3`.
fn threshold(what: &str, finite: impl Fn(f64) -> Result<bool>) -> Result<Option<(f64, f64)>> {
    if finite(M_MAX)? {
        return Ok(None);
    }
    if !finite(M_MIN)? {
        return Err(Error::MomentCondition(format!(
            "{what} is already infinite at |M| = {M_MIN}"
        )));
    }
    let (mut lo, mut hi) = (M_MIN, M_MAX);
    while hi - lo > M_WIDTH {
        let mid = 0.5 * (lo + hi);
        if finite(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(Some((lo, hi)))
}

/// M-bounds from a divergence test on the scaled CGF and the rate function.
pub fn m_bounds_with(diverges: impl Fn(f64) -> Result<bool>, rate: &RateFunction) -> Result<MBounds> {
    let upper = threshold("scaled CGF", |m| Ok(!diverges(m)?))?;
    let lower = threshold("scaled CGF", |m| Ok(!diverges(-m)?))?;
    let upper_star = threshold("Varadhan functional", |m| Ok(varadhan_sup(rate, m).is_finite()))?;
    let lower_star = threshold("Varadhan functional", |m| Ok(varadhan_sup(rate, -m).is_finite()))?;

    let pos = |b: Option<(f64, f64)>| b.map_or(ExtReal::PosInf, |(lo, _)| ExtReal::Finite(lo));
    let neg = |b: Option<(f64, f64)>| b.map_or(ExtReal::NegInf, |(lo, _)| ExtReal::Finite(-lo));
    let flip = |b: Option<(f64, f64)>| b.map(|(lo, hi)| (-hi, -lo));
    let upper_star_v = pos(upper_star);
    let lower_star_v = neg(lower_star);
    Ok(MBounds {
        lower_star: lower_star_v,
        lower: neg(lower).max(lower_star_v),
        upper: pos(upper).min(upper_star_v),
        upper_star: upper_star_v,
        brackets: [flip(lower_star), flip(lower), upper, upper_star],
    })
}

/// Smallest `n` with `r_n ≥ target`, by doubling then bisection. Indices where
/// `r_n` is not yet positive count as below the target.
fn index_for_speed(scaling: &ScalingSequence<'_>, target: f64) -> Result<usize> {
    let reaches = |n: usize| match scaling.rate(n) {
        Ok(r) => Ok(r >= target),
        Err(Error::InvalidParameter { .. }) => Ok(false),
        Err(e) => Err(e),
    };
    let mut hi = 1usize;
    while !reaches(hi)? {
        if hi > 1 << 40 {
            return Err(Error::MomentCondition(format!(
                "scaling sequence does not reach {target}"
            )));
        }
        hi *= 2;
    }
    let mut lo = hi / 2;
    if lo == 0 {
        return Ok(hi);
    }
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if reaches(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// M-bounds of a market: divergence is probed at the indices where
/// `r_n` first reaches `2.5e5`, `5e5` and `1e6`.
pub fn m_bounds(market: &MarketSpec, rate: &RateFunction) -> Result<MBounds> {
    let scaling = ScalingSequence::for_market(market)?;
    let mut n_list = Vec::new();
    for target in SPEED_TARGETS {
        let mut n = index_for_speed(&scaling, target)?;
        if let Some(&last) = n_list.last() {
            n = n.max(last + 1);
        }
        n_list.push(n);
    }
    let diverges = |lambda: f64| -> Result<bool> {
        let entries = n_list
            .iter()
            .map(|&n| probe_entry(&scaling, market, lambda, n))
            .collect::<Result<Vec<_>>>()?;
        Ok(ProbeSequence::from_entries(lambda, entries).divergent)
    };
    m_bounds_with(diverges, rate)
}
