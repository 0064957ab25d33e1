//! Cumulant generating functions of claim components and of unhedgeable tails.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::ext_real::ExtReal;
use crate::market::{GeometricTail, MarketSpec};
use crate::quadrature::{self, GaussHermite, LADDER};

/// Default relative tolerance for truncated tail sums.
pub const DEFAULT_TAIL_TOLERANCE: f64 = 1e-12;

/// Cap on the number of terms a truncated tail sum may use.
const MAX_TAIL_TERMS: usize = 4096;

/// Largest `|x| (sup B - inf B)` integrated on the unshifted rule.
const PLAIN_SPREAD: f64 = 2.0;

type QuantileFn = dyn Fn(f64) -> f64 + Send + Sync;

/// A bounded law given by its quantile map `u ↦ B`, with `B = Q(Φ(ξ))` for a
/// standard normal driver `ξ`.
///
/// Only bounded maps are accepted: `Q(0)` and `Q(1)` must be finite, which
/// guarantees an everywhere-finite CGF.
pub struct CustomLaw {
    label: String,
    quantile: Arc<QuantileFn>,
    lo: f64,
    hi: f64,
    /// `Q(Φ(√2 x_k))` at the nodes of each ladder rule.
    node_values: Vec<Vec<f64>>,
    mean: f64,
    variance: f64,
}

impl CustomLaw {
    pub fn new<F>(label: impl Into<String>, quantile: F) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        let label = label.into();
        let lo = quantile(0.0);
        let hi = quantile(1.0);
        if !lo.is_finite() || !hi.is_finite() {
            return Err(Error::invalid(
                label,
                "quantile map must be bounded (finite at u = 0 and u = 1)",
            ));
        }
        let mut last = lo;
        for k in 1..=1000 {
            let v = quantile(k as f64 / 1000.0);
            if !(v >= last - 1e-12 * (1.0 + last.abs())) || !v.is_finite() {
                return Err(Error::invalid(label, "quantile map must be non-decreasing"));
            }
            last = v;
        }
        let node_values = LADDER
            .iter()
            .map(|&order| {
                GaussHermite::cached(order)
                    .normal_points()
                    .map(|(z, _)| quantile(quadrature::norm_cdf(z)).clamp(lo, hi))
                    .collect()
            })
            .collect();
        let mut law = CustomLaw {
            label,
            quantile: Arc::new(quantile),
            lo,
            hi,
            node_values,
            mean: 0.0,
            variance: 0.0,
        };
        let (mean, _) = quadrature::adaptive(|rule| Ok(law.moment_at(rule, |b| b)))?;
        let (second, _) = quadrature::adaptive(|rule| Ok(law.moment_at(rule, |b| (b - mean).powi(2))))?;
        law.mean = mean;
        law.variance = second.max(0.0);
        Ok(law)
    }

    /// Uniform law on `[lo, hi]`.
    pub fn uniform(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::invalid("uniform", "requires finite lo < hi"));
        }
        CustomLaw::new(format!("uniform({lo}, {hi})"), move |u| lo + (hi - lo) * u)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn quantile(&self, u: f64) -> f64 {
        (self.quantile)(u.clamp(0.0, 1.0))
    }

    pub fn support(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn variance(&self) -> f64 {
        self.variance
    }

    fn values_for(&self, rule: &GaussHermite) -> &[f64] {
        let slot = LADDER
            .iter()
            .position(|&o| o == rule.order())
            .expect("ladder rule");
        &self.node_values[slot]
    }

    fn moment_at(&self, rule: &GaussHermite, f: impl Fn(f64) -> f64) -> f64 {
        rule.normal_points()
            .zip(self.values_for(rule))
            .map(|((_, p), &b)| p * f(b))
            .sum()
    }

    /// `x Q(Φ(z)) - z²/2`, the log-integrand of `E[e^{x B}]` up to a constant.
    fn log_integrand(&self, x: f64, z: f64) -> f64 {
        x * self.quantile(quadrature::norm_cdf(z)) - 0.5 * z * z
    }

    /// Centre and width of the peak of the log-integrand.
    fn peak(&self, x: f64) -> (f64, f64) {
        const STEP: f64 = 0.25;
        let mut best = (0.0, self.log_integrand(x, 0.0));
        for k in -160..=160 {
            let z = k as f64 * STEP;
            let v = self.log_integrand(x, z);
            if v > best.1 {
                best = (z, v);
            }
        }
        let (mut a, mut b) = (best.0 - STEP, best.0 + STEP);
        let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
        for _ in 0..60 {
            let c = b - inv_phi * (b - a);
            let d = a + inv_phi * (b - a);
            if self.log_integrand(x, c) > self.log_integrand(x, d) {
                b = d;
            } else {
                a = c;
            }
        }
        let m = 0.5 * (a + b);
        let h = 1e-2;
        let curvature = (self.log_integrand(x, m + h) - 2.0 * self.log_integrand(x, m)
            + self.log_integrand(x, m - h))
            / (h * h);
        let width = if curvature < -1.0 {
            (-curvature).sqrt().recip().max(1e-3)
        } else {
            1.0
        };
        (m, width)
    }

    /// `log E[e^{x B}]` at one rule: centred on the mean with `expm1`/`ln_1p`
    /// for `placement = None`, otherwise in log-space with nodes at `m + w ξ`.
    fn cgf_at(&self, rule: &GaussHermite, x: f64, placement: Option<(f64, f64)>) -> Result<f64> {
        if !(x * self.lo).is_finite() || !(x * self.hi).is_finite() {
            return Err(Error::Overflow { lambda: x });
        }
        let v = match placement {
            None => {
                let c = self.mean;
                let (mut total, mut mass) = (0.0, 0.0);
                for ((_, p), &b) in rule.normal_points().zip(self.values_for(rule)) {
                    total += p * (x * (b - c)).exp_m1();
                    mass += p;
                }
                (total / mass).ln_1p() + x * c
            }
            Some((m, w)) => {
                let log_w = w.ln();
                let terms: Vec<f64> = rule
                    .normal_points()
                    .filter(|(_, p)| *p > 0.0)
                    .map(|(xi, p)| {
                        let z = m + w * xi;
                        p.ln() + 0.5 * xi * xi + log_w + self.log_integrand(x, z)
                    })
                    .collect();
                quadrature::log_sum_exp(terms)
            }
        };
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::Overflow { lambda: x })
        }
    }

    /// `E[B e^{x B}] / E[e^{x B}]` with the nodes of [`Self::cgf_at`].
    fn tilted_mean_at(&self, rule: &GaussHermite, x: f64, placement: Option<(f64, f64)>) -> f64 {
        let (log_w, values): (Vec<f64>, Vec<f64>) = match placement {
            None => rule
                .normal_points()
                .zip(self.values_for(rule))
                .filter(|((_, p), _)| *p > 0.0)
                .map(|((_, p), &b)| (p.ln() + x * (b - self.mean), b - self.mean))
                .unzip(),
            Some((m, w)) => rule
                .normal_points()
                .filter(|(_, p)| *p > 0.0)
                .map(|(xi, p)| {
                    let z = m + w * xi;
                    let b = self.quantile(quadrature::norm_cdf(z));
                    (p.ln() + 0.5 * xi * xi + x * b - 0.5 * z * z, b - self.mean)
                })
                .unzip(),
        };
        let top = log_w.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let (mut num, mut den) = (0.0, 0.0);
        for (lw, b) in log_w.iter().zip(&values) {
            let weight = (lw - top).exp();
            num += weight * b;
            den += weight;
        }
        self.mean + num / den
    }

    /// Adaptive CGF; also returns the accepted order and the node placement.
    fn cgf_adaptive(&self, x: f64) -> Result<(f64, usize, Option<(f64, f64)>)> {
        if x == 0.0 {
            return Ok((0.0, LADDER[0], None));
        }
        if !(x * self.lo).is_finite() || !(x * self.hi).is_finite() {
            return Err(Error::Overflow { lambda: x });
        }
        let placement = if x.abs() * (self.hi - self.lo) <= PLAIN_SPREAD {
            None
        } else {
            Some(self.peak(x))
        };
        let (v, order) = quadrature::adaptive(|rule| self.cgf_at(rule, x, placement))?;
        Ok((v, order, placement))
    }

    /// `E[Q(Φ(ξ + shift))]` for standard normal `ξ`.
    fn shifted_mean(&self, shift: f64) -> Result<f64> {
        if shift == 0.0 {
            return Ok(self.mean);
        }
        quadrature::adaptive(|rule| {
            Ok(rule.expect_normal(|z| self.quantile(quadrature::norm_cdf(z + shift))))
        })
        .map(|(v, _)| v)
    }
}

impl fmt::Debug for CustomLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomLaw")
            .field("label", &self.label)
            .field("support", &(self.lo, self.hi))
            .field("mean", &self.mean)
            .finish()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FamilyKind {
    Gaussian,
    Poisson,
    Custom,
}

/// Law of a single claim component `B_i`.
#[derive(Debug, Clone)]
pub enum ComponentFamily {
    Gaussian { mean: f64, variance: f64 },
    Poisson { intensity: f64 },
    /// `scale · B̃` with `B̃` drawn from `law`; `scale > 0`.
    Custom { law: Arc<CustomLaw>, scale: f64 },
}

impl ComponentFamily {
    pub fn gaussian(mean: f64, variance: f64) -> Result<Self> {
        if !mean.is_finite() {
            return Err(Error::invalid("mean", "must be finite"));
        }
        if !(variance > 0.0 && variance.is_finite()) {
            return Err(Error::invalid("variance", "must be positive and finite"));
        }
        Ok(ComponentFamily::Gaussian { mean, variance })
    }

    pub fn poisson(intensity: f64) -> Result<Self> {
        if !(intensity > 0.0 && intensity.is_finite()) {
            return Err(Error::invalid("intensity", "must be positive and finite"));
        }
        Ok(ComponentFamily::Poisson { intensity })
    }

    pub fn custom(law: Arc<CustomLaw>) -> Self {
        ComponentFamily::Custom { law, scale: 1.0 }
    }

    pub fn kind(&self) -> FamilyKind {
        match self {
            ComponentFamily::Gaussian { .. } => FamilyKind::Gaussian,
            ComponentFamily::Poisson { .. } => FamilyKind::Poisson,
            ComponentFamily::Custom { .. } => FamilyKind::Custom,
        }
    }

    /// `Γ(λ) = log E[e^{λB}]`.
    pub fn cgf(&self, lambda: f64) -> Result<f64> {
        if lambda == 0.0 {
            return Ok(0.0);
        }
        let v = match self {
            ComponentFamily::Gaussian { mean, variance } => {
                0.5 * lambda * (lambda * variance) + lambda * mean
            }
            ComponentFamily::Poisson { intensity } => intensity * lambda.exp_m1(),
            ComponentFamily::Custom { law, scale } => law.cgf_adaptive(lambda * scale)?.0,
        };
        finite_or_overflow(v, lambda)
    }

    /// `Γ'(λ)`: closed form for Gaussian and Poisson; for custom laws the
    /// tilted mean under the quadrature rule accepted by [`Self::cgf`].
    pub fn cgf_derivative(&self, lambda: f64) -> Result<f64> {
        let v = match self {
            ComponentFamily::Gaussian { mean, variance } => lambda * variance + mean,
            ComponentFamily::Poisson { intensity } => intensity * lambda.exp(),
            ComponentFamily::Custom { law, scale } => {
                let (_, order, placement) = law.cgf_adaptive(lambda * scale)?;
                scale * law.tilted_mean_at(GaussHermite::cached(order), lambda * scale, placement)
            }
        };
        finite_or_overflow(v, lambda)
    }

    pub fn mean(&self) -> f64 {
        match self {
            ComponentFamily::Gaussian { mean, .. } => *mean,
            ComponentFamily::Poisson { intensity } => *intensity,
            ComponentFamily::Custom { law, scale } => scale * law.mean(),
        }
    }

    pub fn variance(&self) -> f64 {
        match self {
            ComponentFamily::Gaussian { variance, .. } => *variance,
            ComponentFamily::Poisson { intensity } => *intensity,
            ComponentFamily::Custom { law, scale } => scale * scale * law.variance(),
        }
    }

    /// `(essinf B, esssup B)`.
    pub fn support(&self) -> (ExtReal, ExtReal) {
        match self {
            ComponentFamily::Gaussian { .. } => (ExtReal::NegInf, ExtReal::PosInf),
            ComponentFamily::Poisson { .. } => (ExtReal::ZERO, ExtReal::PosInf),
            ComponentFamily::Custom { law, scale } => {
                let (lo, hi) = law.support();
                (ExtReal::Finite(scale * lo), ExtReal::Finite(scale * hi))
            }
        }
    }

    /// Canonical quantile map: `B = quantile(Φ(W_T / √T))`.
    pub fn quantile(&self, u: f64) -> f64 {
        match self {
            ComponentFamily::Gaussian { mean, variance } => {
                mean + variance.sqrt() * quadrature::norm_inv_cdf(u)
            }
            ComponentFamily::Poisson { intensity } => poisson_quantile(*intensity, u),
            ComponentFamily::Custom { law, scale } => scale * law.quantile(u),
        }
    }

    /// `E[B]` when the standard-normal driver is shifted by `shift`,
    /// i.e. `E[quantile(Φ(ξ + shift))]`.
    pub(crate) fn shifted_mean(&self, shift: f64) -> Result<f64> {
        if shift == 0.0 {
            return Ok(self.mean());
        }
        match self {
            ComponentFamily::Gaussian { mean, variance } => Ok(mean + variance.sqrt() * shift),
            ComponentFamily::Poisson { intensity } => Ok(poisson_shifted_mean(*intensity, shift)),
            ComponentFamily::Custom { law, scale } => Ok(scale * law.shifted_mean(shift)?),
        }
    }
}

fn finite_or_overflow(v: f64, lambda: f64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Overflow { lambda })
    }
}

/// Survival probabilities `P(N ≥ k)` for `k = 1, 2, ...` until they vanish.
fn poisson_survival(intensity: f64) -> Vec<f64> {
    let mut pmf = Vec::new();
    let mut p = (-intensity).exp();
    let mut k = 0usize;
    loop {
        pmf.push(p);
        k += 1;
        p *= intensity / k as f64;
        if (p < 1e-300 && k as f64 > intensity) || k > 1_000_000 {
            break;
        }
    }
    let mut survival = vec![0.0; pmf.len()];
    let mut acc = 0.0;
    for k in (1..pmf.len()).rev() {
        acc += pmf[k];
        survival[k] = acc;
    }
    survival.remove(0);
    survival
}

fn poisson_quantile(intensity: f64, u: f64) -> f64 {
    if u <= 0.0 {
        return 0.0;
    }
    if u >= 1.0 {
        return f64::INFINITY;
    }
    // B ≥ k ⟺ u > 1 - P(N ≥ k); compare against survival to keep tail precision.
    let tail = 1.0 - u;
    let mut count = 0.0;
    for s in poisson_survival(intensity) {
        if tail < s {
            count += 1.0;
        } else {
            break;
        }
    }
    count
}

/// `E[N]` with `N = F⁻¹(Φ(ξ + shift))`: `Σ_k P(ξ + shift > z_k)` where
/// `z_k = Φ⁻¹(1 - P(N ≥ k))`.
fn poisson_shifted_mean(intensity: f64, shift: f64) -> f64 {
    let mut total = 0.0;
    for s in poisson_survival(intensity) {
        if s <= 0.0 {
            break;
        }
        let z = -quadrature::norm_inv_cdf(s);
        let term = quadrature::norm_sf(z - shift);
        total += term;
        if term < 1e-18 * total.max(1e-300) && s < 1e-18 {
            break;
        }
    }
    total
}

/// `Γ_i(λ)` for one component.
pub fn eval_cgf(family: &ComponentFamily, lambda: f64) -> Result<f64> {
    family.cgf(lambda)
}

/// `Γ̇_i(λ)` for one component.
pub fn eval_cgf_derivative(family: &ComponentFamily, lambda: f64) -> Result<f64> {
    family.cgf_derivative(lambda)
}

/// The unhedgeable part `Y_n = Σ_{i>n} B_i` of market `n`.
#[derive(Debug, Clone, Copy)]
pub struct TailClaim<'a> {
    market: &'a MarketSpec,
    n: usize,
    tolerance: f64,
}

impl<'a> TailClaim<'a> {
    pub fn new(market: &'a MarketSpec, n: usize) -> Self {
        TailClaim {
            market,
            n,
            tolerance: market.tail_tolerance(),
        }
    }

    pub fn with_tolerance(mut self, tolerance: f64) -> Self {
        self.tolerance = tolerance;
        self
    }

    pub fn market(&self) -> &'a MarketSpec {
        self.market
    }

    pub fn index(&self) -> usize {
        self.n
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    fn explicit_tail(&self) -> &'a [ComponentFamily] {
        let explicit = self.market.components().explicit();
        &explicit[self.n.min(explicit.len())..]
    }

    /// First absolute index (1-based) covered by the geometric continuation.
    fn geometric_start(&self) -> usize {
        (self.n + 1).max(self.market.components().explicit().len() + 1)
    }

    /// Effective truncation index: `None` when the whole tail is summed in
    /// closed form or is finite, `Some(N)` when a truncated sum is used.
    pub fn truncation_index(&self, lambda: f64) -> Result<Option<usize>> {
        match self.market.components().geometric_tail() {
            Some(GeometricTail::ScaledCustom { law, ratio }) => {
                let (_, last) = scaled_custom_sum(law, *ratio, self.geometric_start(), lambda, self.tolerance, false)?;
                Ok(Some(last))
            }
            _ => Ok(None),
        }
    }

    /// `Λ_n(λ) = Σ_{i>n} Γ_i(λ)`.
    pub fn cgf(&self, lambda: f64) -> Result<f64> {
        if lambda == 0.0 {
            return Ok(0.0);
        }
        let mut total = 0.0;
        for family in self.explicit_tail() {
            total += family.cgf(lambda)?;
        }
        if let Some(geo) = self.market.components().geometric_tail() {
            let s = self.geometric_start();
            total += match geo {
                GeometricTail::Gaussian {
                    mean_scale,
                    variance_scale,
                    ratio,
                } => {
                    let g = geometric_sum(*ratio, s);
                    let v = variance_scale * g;
                    let m = mean_scale * g;
                    0.5 * lambda * (lambda * v) + lambda * m
                }
                GeometricTail::Poisson { scale, ratio } => {
                    let ln_s = scale.ln() + ln_geometric_sum(*ratio, s);
                    poisson_tail_cgf(ln_s, lambda)
                }
                GeometricTail::ScaledCustom { law, ratio } => {
                    scaled_custom_sum(law, *ratio, s, lambda, self.tolerance, false)?.0
                }
            };
        }
        finite_or_overflow(total, lambda)
    }

    /// `Λ̇_n(λ) = Σ_{i>n} Γ̇_i(λ)`, the mean of `Y_n` under the `e^{λY_n}` tilt.
    pub fn cgf_derivative(&self, lambda: f64) -> Result<f64> {
        let mut total = 0.0;
        for family in self.explicit_tail() {
            total += family.cgf_derivative(lambda)?;
        }
        if let Some(geo) = self.market.components().geometric_tail() {
            let s = self.geometric_start();
            total += match geo {
                GeometricTail::Gaussian {
                    mean_scale,
                    variance_scale,
                    ratio,
                } => {
                    let g = geometric_sum(*ratio, s);
                    lambda * (variance_scale * g) + mean_scale * g
                }
                GeometricTail::Poisson { scale, ratio } => {
                    let ln_s = scale.ln() + ln_geometric_sum(*ratio, s);
                    (lambda + ln_s).exp()
                }
                GeometricTail::ScaledCustom { law, ratio } => {
                    scaled_custom_sum(law, *ratio, s, lambda, self.tolerance, true)?.0
                }
            };
        }
        finite_or_overflow(total, lambda)
    }

    /// `log Σ_{i>n} β_i` for Poisson-only tails; `None` for other tails.
    pub(crate) fn ln_poisson_intensity(&self) -> Option<f64> {
        let mut parts = Vec::new();
        for family in self.explicit_tail() {
            match family {
                ComponentFamily::Poisson { intensity } => parts.push(intensity.ln()),
                _ => return None,
            }
        }
        match self.market.components().geometric_tail() {
            Some(GeometricTail::Poisson { scale, ratio }) => {
                parts.push(scale.ln() + ln_geometric_sum(*ratio, self.geometric_start()))
            }
            Some(_) => return None,
            None => {}
        }
        if parts.is_empty() {
            return Some(f64::NEG_INFINITY);
        }
        Some(quadrature::log_sum_exp(parts))
    }

    /// `E[Y_n]`.
    pub fn mean(&self) -> Result<f64> {
        self.cgf_derivative(0.0)
    }

    /// `Var[Y_n]`.
    pub fn variance(&self) -> f64 {
        let mut total: f64 = self.explicit_tail().iter().map(|f| f.variance()).sum();
        if let Some(geo) = self.market.components().geometric_tail() {
            let s = self.geometric_start();
            total += match geo {
                GeometricTail::Gaussian {
                    variance_scale,
                    ratio,
                    ..
                } => variance_scale * geometric_sum(*ratio, s),
                GeometricTail::Poisson { scale, ratio } => scale * geometric_sum(*ratio, s),
                GeometricTail::ScaledCustom { law, ratio } => {
                    law.variance() * geometric_sum(ratio * ratio, s)
                }
            };
        }
        total
    }

    /// True when `Y_n` is almost surely constant.
    pub fn is_degenerate(&self) -> bool {
        self.variance() == 0.0
    }

    /// `(essinf Y_n, esssup Y_n)`.
    pub fn support(&self) -> (ExtReal, ExtReal) {
        let mut lo = ExtReal::ZERO;
        let mut hi = ExtReal::ZERO;
        let mut add = |(a, b): (ExtReal, ExtReal)| {
            // Lower bounds are never +inf and upper bounds never -inf.
            lo = lo.checked_add(a).unwrap_or(ExtReal::NegInf);
            hi = hi.checked_add(b).unwrap_or(ExtReal::PosInf);
        };
        for family in self.explicit_tail() {
            add(family.support());
        }
        if let Some(geo) = self.market.components().geometric_tail() {
            let g = geometric_sum(geo.ratio(), self.geometric_start());
            add(match geo {
                GeometricTail::Gaussian { .. } => (ExtReal::NegInf, ExtReal::PosInf),
                GeometricTail::Poisson { .. } => (ExtReal::ZERO, ExtReal::PosInf),
                GeometricTail::ScaledCustom { law, .. } => {
                    let (a, b) = law.support();
                    (ExtReal::Finite(a * g), ExtReal::Finite(b * g))
                }
            });
        }
        (lo, hi)
    }
}

/// `Σ_{i ≥ start} ρ^i`.
pub(crate) fn geometric_sum(ratio: f64, start: usize) -> f64 {
    if start <= 1000 {
        ratio.powi(start as i32) / (1.0 - ratio)
    } else {
        ln_geometric_sum(ratio, start).exp()
    }
}

pub(crate) fn ln_geometric_sum(ratio: f64, start: usize) -> f64 {
    start as f64 * ratio.ln() - (-ratio).ln_1p()
}

/// `(e^λ - 1) S` with `S = e^{ln_s}`, without over- or underflowing `S`.
fn poisson_tail_cgf(ln_s: f64, lambda: f64) -> f64 {
    if lambda < 700.0 {
        let s = ln_s.exp();
        if s > 0.0 {
            return s * lambda.exp_m1();
        }
        // S underflowed: only e^{λ + ln S} can still be representable.
        return (lambda + ln_s).exp() - s;
    }
    (lambda + ln_s).exp() - ln_s.exp()
}

/// Truncated sum over `i ≥ start` of `Γ̃(λρ^i)` (or its λ-derivative), with the
/// linear part of the remainder added exactly and the quadratic part bounded
/// by Hoeffding's lemma. Returns the value and the last index summed.
fn scaled_custom_sum(
    law: &Arc<CustomLaw>,
    ratio: f64,
    start: usize,
    lambda: f64,
    tolerance: f64,
    derivative: bool,
) -> Result<(f64, usize)> {
    let (lo, hi) = law.support();
    let width2 = (hi - lo).powi(2);
    let mean = law.mean();
    let mut partial = 0.0;
    let mut i = start;
    let mut scale = ratio.powi(start as i32);
    for _ in 0..MAX_TAIL_TERMS {
        let family = ComponentFamily::Custom {
            law: Arc::clone(law),
            scale,
        };
        partial += if derivative {
            family.cgf_derivative(lambda)?
        } else {
            family.cgf(lambda)?
        };
        // Remainder over j > i.
        let next = scale * ratio;
        let linear = next / (1.0 - ratio);
        let quad = next * next / (1.0 - ratio * ratio);
        let (value, bound) = if derivative {
            (partial + mean * linear, lambda.abs() * width2 / 4.0 * quad)
        } else {
            (partial + lambda * mean * linear, lambda * lambda * width2 / 8.0 * quad)
        };
        if bound <= tolerance * value.abs().max(f64::MIN_POSITIVE) || bound == 0.0 {
            return Ok((value, i));
        }
        i += 1;
        scale = next;
    }
    Err(Error::TailTruncation(format!(
        "remainder bound above {tolerance:e} after {MAX_TAIL_TERMS} terms"
    )))
}

/// `Λ_n(λ)` for the tail.
pub fn tail_cgf(tail: &TailClaim<'_>, lambda: f64) -> Result<f64> {
    tail.cgf(lambda)
}

/// `Λ̇_n(λ)` for the tail.
pub fn tail_cgf_derivative(tail: &TailClaim<'_>, lambda: f64) -> Result<f64> {
    tail.cgf_derivative(lambda)
}

/// `(essinf Y_n, esssup Y_n)`.
pub fn support_bounds(tail: &TailClaim<'_>) -> (ExtReal, ExtReal) {
    tail.support()
}
