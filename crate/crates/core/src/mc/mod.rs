//! Monte Carlo oracle for tail CGFs, tilted means and price offsets.
//!
//! Draws are keyed by `(seed, sample, component)`, and every reduction sums
//! fixed-size chunks in a fixed order, so estimates are bit-identical for any
//! number of worker threads.

pub mod rng;

use rayon::prelude::*;

use crate::cgf::{ComponentFamily, TailClaim};
use crate::error::{Error, Result};
use crate::market::MarketSpec;

/// Discarded tail variance allowed per unit of retained variance.
pub const VARIANCE_BUDGET: f64 = 1e-14;
const MAX_COMPONENTS: usize = 100_000;
const CHUNK: usize = 4096;
const MIN_ESS: f64 = 100.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McConfig {
    pub samples: usize,
    pub seed: u64,
    /// Last component index included; chosen from the variance budget when `None`.
    pub truncation: Option<usize>,
    /// Exponential tilt `λ₀` of the sampling law.
    pub tilt: Option<f64>,
    /// Worker threads for sampling; the global pool when `None`.
    pub workers: Option<usize>,
}

impl McConfig {
    pub fn new(samples: usize, seed: u64) -> Self {
        McConfig {
            samples,
            seed,
            truncation: None,
            tilt: None,
            workers: None,
        }
    }

    pub fn with_tilt(mut self, lambda0: f64) -> Self {
        self.tilt = Some(lambda0);
        self
    }

    pub fn with_truncation(mut self, last: usize) -> Self {
        self.truncation = Some(last);
        self
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = Some(workers);
        self
    }
}

/// Draws of the truncated tail, with importance log-weights when tilted.
#[derive(Debug, Clone, PartialEq)]
pub struct TailSamples {
    pub values: Vec<f64>,
    /// `log dP/dQ` per draw; `None` for untilted sampling.
    pub log_weights: Option<Vec<f64>>,
    /// Components `n+1 ..= truncation` were simulated.
    pub truncation: usize,
    pub tilt: Option<f64>,
}

impl TailSamples {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    fn log_weight(&self, j: usize) -> f64 {
        self.log_weights.as_ref().map_or(0.0, |w| w[j])
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct McEstimate {
    pub estimate: f64,
    pub std_error: f64,
    pub samples: usize,
    pub effective_sample_size: f64,
    /// `(estimate - analytic) / std_error` once compared.
    pub z_score: Option<f64>,
    pub warnings: Vec<String>,
}

impl McEstimate {
    pub fn compare(mut self, analytic: f64) -> Self {
        let diff = self.estimate - analytic;
        self.z_score = Some(if self.std_error > 0.0 {
            diff / self.std_error
        } else if diff == 0.0 {
            0.0
        } else {
            diff.signum() * f64::INFINITY
        });
        self
    }
}

/// Runs `f` on a dedicated pool of `workers` threads.
pub fn with_workers<R: Send>(workers: usize, f: impl FnOnce() -> R + Send) -> Result<R> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::invalid("workers", e.to_string()))?;
    Ok(pool.install(f))
}

/// Sum of `f(0..len)` over fixed chunks combined pairwise: the result does
/// not depend on scheduling.
fn det_sum(len: usize, f: impl Fn(usize) -> f64 + Sync) -> f64 {
    let chunks: Vec<f64> = (0..len.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let end = ((c + 1) * CHUNK).min(len);
            (c * CHUNK..end).map(&f).sum()
        })
        .collect();
    pairwise(&chunks)
}

fn pairwise(v: &[f64]) -> f64 {
    match v.len() {
        0 => 0.0,
        1 => v[0],
        n => pairwise(&v[..n / 2]) + pairwise(&v[n / 2..]),
    }
}

fn det_max(len: usize, f: impl Fn(usize) -> f64 + Sync + Send) -> f64 {
    (0..len)
        .into_par_iter()
        .map(f)
        .reduce(|| f64::NEG_INFINITY, f64::max)
}

/// Smallest last index `N ≥ n` whose discarded variance meets the budget.
fn truncation_index(market: &MarketSpec, n: usize, requested: Option<usize>) -> Result<usize> {
    let total = TailClaim::new(market, n).variance();
    let meets = |last: usize| {
        let discarded = TailClaim::new(market, last).variance();
        discarded <= VARIANCE_BUDGET * (total - discarded)
    };
    if let Some(last) = requested {
        if last < n || !meets(last) {
            return Err(Error::VarianceBudget(format!(
                "truncation at component {last} leaves more than {VARIANCE_BUDGET:e} of the retained variance"
            )));
        }
        return Ok(last);
    }
    let end = match market.components().len() {
        Some(len) => len.max(n),
        None => n + MAX_COMPONENTS,
    };
    (n..=end).find(|&last| meets(last)).ok_or_else(|| {
        Error::VarianceBudget(format!(
            "discarded variance above {VARIANCE_BUDGET:e} after {MAX_COMPONENTS} components"
        ))
    })
}

/// Proposal law of one component and whether it carries the tilt.
fn tilted(family: ComponentFamily, lambda0: f64) -> (ComponentFamily, bool) {
    match family {
        ComponentFamily::Gaussian { mean, variance } => (
            ComponentFamily::Gaussian {
                mean: mean + lambda0 * variance,
                variance,
            },
            true,
        ),
        ComponentFamily::Poisson { intensity } => (
            ComponentFamily::Poisson {
                intensity: intensity * lambda0.exp(),
            },
            true,
        ),
        other => (other, false),
    }
}

fn poisson_draw(intensity: f64, u: f64) -> f64 {
    let mut p = (-intensity).exp();
    let mut cdf = p;
    let mut k = 0u32;
    while u > cdf && p > 0.0 {
        k += 1;
        p *= intensity / k as f64;
        cdf += p;
    }
    k as f64
}

fn draw(family: &ComponentFamily, seed: u64, sample: u64, component: u64) -> f64 {
    match family {
        ComponentFamily::Gaussian { mean, variance } => {
            mean + variance.sqrt() * rng::normal(seed, sample, component)
        }
        ComponentFamily::Poisson { intensity } => {
            poisson_draw(*intensity, rng::uniform(seed, sample, component, 0))
        }
        ComponentFamily::Custom { law, scale } => {
            scale * law.quantile(rng::uniform(seed, sample, component, 0))
        }
    }
}

/// I.i.d. draws of `Y_n` truncated to the variance budget.
pub fn sample_tail(market: &MarketSpec, n: usize, cfg: &McConfig) -> Result<TailSamples> {
    if cfg.samples == 0 {
        return Err(Error::invalid("samples", "must be at least 1"));
    }
    let last = truncation_index(market, n, cfg.truncation)?;
    let lambda0 = cfg.tilt.unwrap_or(0.0);
    let mut families = Vec::with_capacity(last - n);
    let mut flags = Vec::with_capacity(last - n);
    let mut log_norm = 0.0;
    for i in n + 1..=last {
        let family = market.components().component(i).expect("component within truncation");
        if cfg.tilt.is_some() {
            let (proposal, carries) = tilted(family.clone(), lambda0);
            if carries {
                log_norm += family.cgf(lambda0)?;
            }
            families.push((i as u64, proposal));
            flags.push(carries);
        } else {
            families.push((i as u64, family));
            flags.push(false);
        }
    }
    let seed = cfg.seed;
    let run = || -> Vec<(f64, f64)> {
        (0..cfg.samples as u64)
            .into_par_iter()
            .map(|j| {
                let mut y = 0.0;
                let mut tilted_part = 0.0;
                for ((i, family), &carries) in families.iter().zip(&flags) {
                    let b = draw(family, seed, j, *i);
                    y += b;
                    if carries {
                        tilted_part += b;
                    }
                }
                (y, log_norm - lambda0 * tilted_part)
            })
            .collect()
    };
    let pairs = match cfg.workers {
        Some(w) => with_workers(w, run)?,
        None => run(),
    };
    let (values, log_weights): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
    Ok(TailSamples {
        values,
        log_weights: cfg.tilt.map(|_| log_weights),
        truncation: last,
        tilt: cfg.tilt,
    })
}

/// Normalized weights `e^{x_j - max}` with `x_j = log w_j + λ y_j`.
fn exponents(samples: &TailSamples, lambda: f64) -> Result<(f64, Vec<f64>)> {
    if samples.is_empty() {
        return Err(Error::invalid("samples", "must be nonempty"));
    }
    let len = samples.len();
    let x = |j: usize| samples.log_weight(j) + lambda * samples.values[j];
    let max = det_max(len, x);
    if !max.is_finite() {
        return Err(Error::DegenerateWeights(format!(
            "all weights overflow or vanish at lambda = {lambda}; sample with a tilt near lambda"
        )));
    }
    let v: Vec<f64> = (0..len).into_par_iter().map(|j| (x(j) - max).exp()).collect();
    Ok((max, v))
}

fn ess_warning(ess: f64) -> Vec<String> {
    if ess < MIN_ESS {
        vec![format!(
            "degenerate weights: effective sample size {ess:.1} is below {MIN_ESS}"
        )]
    } else {
        Vec::new()
    }
}

/// `log mean(w e^{λY})` with a delta-method standard error.
pub fn mc_cgf(samples: &TailSamples, lambda: f64) -> Result<McEstimate> {
    let len = samples.len();
    if lambda == 0.0 && samples.log_weights.is_none() && len > 0 {
        return Ok(McEstimate {
            estimate: 0.0,
            std_error: 0.0,
            samples: len,
            effective_sample_size: len as f64,
            z_score: None,
            warnings: Vec::new(),
        });
    }
    let (max, v) = exponents(samples, lambda)?;
    let sum = det_sum(len, |j| v[j]);
    let mean = sum / len as f64;
    let sq = det_sum(len, |j| v[j] * v[j]);
    let ess = sum * sum / sq;
    let std_error = if len > 1 {
        let var = det_sum(len, |j| (v[j] - mean).powi(2)) / (len - 1) as f64;
        var.sqrt() / mean / (len as f64).sqrt()
    } else {
        f64::INFINITY
    };
    Ok(McEstimate {
        estimate: max + mean.ln(),
        std_error,
        samples: len,
        effective_sample_size: ess,
        z_score: None,
        warnings: ess_warning(ess),
    })
}

/// Self-normalized `E[Y e^{λY}] / E[e^{λY}]` with a jackknife standard error.
pub fn mc_tilted_mean(samples: &TailSamples, lambda: f64) -> Result<McEstimate> {
    let len = samples.len();
    let (_, v) = exponents(samples, lambda)?;
    let y = &samples.values;
    let a = det_sum(len, |j| v[j] * y[j]);
    let b = det_sum(len, |j| v[j]);
    let sq = det_sum(len, |j| v[j] * v[j]);
    let ess = b * b / sq;
    let estimate = a / b;
    let std_error = if len > 1 {
        let loo = |j: usize| (a - v[j] * y[j]) / (b - v[j]);
        let mean = det_sum(len, loo) / len as f64;
        let ss = det_sum(len, |j| (loo(j) - mean).powi(2));
        let se = ((len - 1) as f64 / len as f64 * ss).sqrt();
        if se.is_finite() {
            se
        } else {
            f64::INFINITY
        }
    } else {
        f64::INFINITY
    };
    Ok(McEstimate {
        estimate,
        std_error,
        samples: len,
        effective_sample_size: ess,
        z_score: None,
        warnings: ess_warning(ess),
    })
}

/// Monte Carlo counterpart of the price offset `-Λ_n(-qa) / (qa)`.
pub fn mc_price_offset(samples: &TailSamples, q: f64, risk_aversion: f64) -> Result<McEstimate> {
    if q == 0.0 {
        return mc_tilted_mean(samples, 0.0);
    }
    let lambda = -q * risk_aversion;
    let mut est = mc_cgf(samples, lambda)?;
    est.estimate /= lambda;
    est.std_error /= lambda.abs();
    Ok(est)
}
