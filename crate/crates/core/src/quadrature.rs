//! Gauss–Hermite rules and standard-normal helpers.
//!
//! Nodes are eigenvalues of the Jacobi matrix, located by Sturm-sequence
//! bisection; weights follow from the orthonormal Hermite recurrence. Tables
//! are cached per order for the life of the process.

use std::sync::OnceLock;

use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};

/// Orders tried by the adaptive rule, smallest first.
pub const LADDER: [usize; 4] = [128, 256, 512, 1024];

/// Agreement required between two successive orders.
pub const AGREEMENT_TOL: f64 = 1e-10;

/// Nodes and weights for `∫ e^{-x²} f(x) dx ≈ Σ w_k f(x_k)`.
#[derive(Debug, Clone)]
pub struct GaussHermite {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussHermite {
    /// Computes the rule of the given order.
    pub fn new(order: usize) -> Self {
        assert!(order >= 1, "Gauss-Hermite order must be positive");
        let n = order;
        let half = n / 2;
        let bound = ((2 * n + 1) as f64).sqrt() + 1.0;
        let ln_rescale = RESCALE.ln();
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        // Roots above the median: eigenvalues n - half .. n of the Jacobi matrix.
        for k in (n - half)..n {
            let x = jacobi_eigenvalue(n, k, 0.0, bound);
            let (_, p2, scale_exp) = hermite_pair(n, x);
            let pp = (2.0 * n as f64).sqrt() * p2;
            let ln_pp = pp.abs().ln() + scale_exp as f64 * ln_rescale;
            // w = 2 / pp²
            let w = (std::f64::consts::LN_2 - 2.0 * ln_pp).exp();
            nodes[k] = x;
            weights[k] = w;
            nodes[n - 1 - k] = -x;
            weights[n - 1 - k] = w;
        }
        if n % 2 == 1 {
            let (_, p2, scale_exp) = hermite_pair(n, 0.0);
            let ln_pp = ((2.0 * n as f64).sqrt() * p2).abs().ln() + scale_exp as f64 * ln_rescale;
            nodes[half] = 0.0;
            weights[half] = (std::f64::consts::LN_2 - 2.0 * ln_pp).exp();
        }
        GaussHermite { nodes, weights }
    }

    /// Cached rule for one of the [`LADDER`] orders.
    ///
    /// Panics for orders outside the ladder; build those with [`GaussHermite::new`].
    pub fn cached(order: usize) -> &'static GaussHermite {
        static TABLES: [OnceLock<GaussHermite>; 4] =
            [OnceLock::new(), OnceLock::new(), OnceLock::new(), OnceLock::new()];
        let slot = LADDER
            .iter()
            .position(|&o| o == order)
            .unwrap_or_else(|| panic!("order {order} is not on the quadrature ladder"));
        TABLES[slot].get_or_init(|| GaussHermite::new(order))
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Points and probability weights for `E[f(ξ)]`, `ξ ~ N(0, 1)`.
    pub fn normal_points(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        let norm = std::f64::consts::PI.sqrt().recip();
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(&x, &w)| (std::f64::consts::SQRT_2 * x, w * norm))
    }

    /// `E[f(ξ)]` for a standard normal `ξ`.
    pub fn expect_normal(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.normal_points().map(|(z, p)| if p > 0.0 { p * f(z) } else { 0.0 }).sum()
    }
}

const RESCALE: f64 = 1e100;

/// Evaluates the orthonormal Hermite pair `(p_n(z), p_{n-1}(z))`, rescaling to
/// avoid overflow. Returns the pair and the number of rescalings applied.
fn hermite_pair(n: usize, z: f64) -> (f64, f64, i32) {
    let mut p1 = std::f64::consts::PI.powf(-0.25);
    let mut p2 = 0.0;
    let mut scale_exp = 0;
    for j in 1..=n {
        let jf = j as f64;
        let p3 = p2;
        p2 = p1;
        p1 = z * (2.0 / jf).sqrt() * p2 - ((jf - 1.0) / jf).sqrt() * p3;
        if p1.abs() > RESCALE {
            p1 /= RESCALE;
            p2 /= RESCALE;
            scale_exp += 1;
        }
    }
    (p1, p2, scale_exp)
}

/// Number of eigenvalues below `x` of the Hermite Jacobi matrix (zero
/// diagonal, off-diagonal `sqrt(j/2)`), by Sturm sequence.
fn eigenvalues_below(n: usize, x: f64) -> usize {
    let mut count = 0;
    let mut q = -x;
    for j in 0..n {
        if j > 0 {
            let e2 = j as f64 * 0.5;
            q = -x - e2 / q;
        }
        if q == 0.0 {
            q = -f64::EPSILON * (1.0 + x.abs());
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// The `k`-th smallest (0-based) eigenvalue, bisected inside `[lo, hi]`.
fn jacobi_eigenvalue(n: usize, k: usize, mut lo: f64, mut hi: f64) -> f64 {
    if eigenvalues_below(n, lo) > k {
        lo = -hi;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if eigenvalues_below(n, mid) > k {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Runs `eval` on successive orders of the ladder until two agree to
/// [`AGREEMENT_TOL`] (relative to `1 + |value|`). Returns the value and the
/// order at which it was accepted.
pub fn adaptive<F>(mut eval: F) -> Result<(f64, usize)>
where
    F: FnMut(&GaussHermite) -> Result<f64>,
{
    let mut previous = eval(GaussHermite::cached(LADDER[0]))?;
    for &order in &LADDER[1..] {
        let current = eval(GaussHermite::cached(order))?;
        if (current - previous).abs() <= AGREEMENT_TOL * (1.0 + current.abs()) {
            return Ok((current, order));
        }
        previous = current;
    }
    Err(Error::QuadratureNonConvergence {
        nodes: *LADDER.last().unwrap(),
    })
}

fn standard_normal() -> &'static Normal {
    static N: OnceLock<Normal> = OnceLock::new();
    N.get_or_init(|| Normal::new(0.0, 1.0).expect("standard normal"))
}

/// Standard normal CDF.
pub fn norm_cdf(z: f64) -> f64 {
    standard_normal().cdf(z)
}

/// Standard normal survival function `1 - Φ(z)`, accurate in the upper tail.
pub fn norm_sf(z: f64) -> f64 {
    standard_normal().sf(z)
}

/// Inverse standard normal CDF.
pub fn norm_inv_cdf(p: f64) -> f64 {
    standard_normal().inverse_cdf(p)
}

/// `log Σ exp(x_k)` over the finite entries, or `-inf` when there are none.
pub fn log_sum_exp(terms: impl IntoIterator<Item = f64> + Clone) -> f64 {
    let max = terms
        .clone()
        .into_iter()
        .fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    let s: f64 = terms.into_iter().map(|x| (x - max).exp()).sum();
    max + s.ln()
}
