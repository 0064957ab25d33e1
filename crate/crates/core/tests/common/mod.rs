//! Random market generators shared by the property and acceptance suites.
#![allow(dead_code)]

use std::sync::Arc;

use indiff::ldp::{legendre_transform_fn, linspace};
use indiff::{
    arbitrage_bounds, cholesky_lower, hedgeable_price, indifference_price, m_bounds,
    market_price_of_risk, rate_function, ComponentSequence, CustomLaw, ExtReal, FamilyKind,
    GeometricTail, HedgeModel, MarketSpec, Matrix, TailClaim,
};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use proptest::test_runner::TestCaseError;

/// `A Aᵀ + I` with the entries of `A` drawn from `seed`.
pub fn random_spd(k: usize, seed: &[f64]) -> Matrix {
    let a = |i: usize, m: usize| seed[(i * 31 + m * 17 + i * m) % seed.len()];
    let rows: Vec<Vec<f64>> = (0..k)
        .map(|i| {
            (0..k)
                .map(|j| (0..k).map(|m| a(i, m) * a(j, m)).sum::<f64>() + if i == j { 1.0 } else { 0.0 })
                .collect()
        })
        .collect();
    Matrix::from_rows(&rows).unwrap()
}

#[derive(Debug, Clone)]
pub enum Family {
    Gaussian { mean: f64, var: f64 },
    Poisson { scale: f64 },
    Uniform { lo: f64, width: f64 },
}

pub fn family() -> impl Strategy<Value = Family> {
    prop_oneof![
        (-0.5f64..0.5, 0.05f64..4.0).prop_map(|(mean, var)| Family::Gaussian { mean, var }),
        (0.05f64..3.0).prop_map(|scale| Family::Poisson { scale }),
        (-2.0f64..1.0, 0.1f64..3.0).prop_map(|(lo, width)| Family::Uniform { lo, width }),
    ]
}

pub fn build(f: &Family, ratio: f64, a: f64, k: usize, drift: &[f64]) -> MarketSpec {
    let tail = match f {
        Family::Gaussian { mean, var } => GeometricTail::Gaussian {
            mean_scale: *mean,
            variance_scale: *var,
            ratio,
        },
        Family::Poisson { scale } => GeometricTail::Poisson { scale: *scale, ratio },
        Family::Uniform { lo, width } => GeometricTail::ScaledCustom {
            law: Arc::new(CustomLaw::uniform(*lo, lo + width).unwrap()),
            ratio,
        },
    };
    let mu: Vec<f64> = (0..k).map(|i| drift[i % drift.len()]).collect();
    let hedge = HedgeModel::new(mu, random_spd(k, drift), 1.0).unwrap();
    MarketSpec::new(a, hedge, ComponentSequence::geometric(tail).unwrap()).unwrap()
}

/// Geometric-tail markets with a drifted, correlated hedge block of size 1 to 7.
pub fn market() -> impl Strategy<Value = MarketSpec> {
    (
        family(),
        0.2f64..0.9,
        0.1f64..5.0,
        1usize..8,
        prop::collection::vec(-0.5f64..0.5, 8),
    )
        .prop_map(|(f, ratio, a, k, drift)| build(&f, ratio, a, k, &drift))
}

/// `Λ(0) = 0` for the tail and its first component, and a convex tail CGF on `[-5, 5]`.
pub fn check_cgf_shape(m: &MarketSpec, n: usize) -> Result<(), TestCaseError> {
    let tail = TailClaim::new(m, n);
    prop_assert_eq!(tail.cgf(0.0).unwrap(), 0.0);
    let first = m.components().component(n + 1).unwrap();
    prop_assert_eq!(first.cgf(0.0).unwrap(), 0.0);
    let values: Vec<f64> = linspace(-5.0, 5.0, 41).iter().map(|&l| tail.cgf(l).unwrap()).collect();
    for w in values.windows(3) {
        prop_assert!(w[0] - 2.0 * w[1] + w[2] >= -1e-9, "{:?}", w);
    }
    Ok(())
}

/// Prices fall in `q` and stay strictly inside the arbitrage-free range.
pub fn check_price_order(m: &MarketSpec, n: usize) -> Result<(), TestCaseError> {
    let (lo, hi) = arbitrage_bounds(m, n).unwrap();
    let mut prev = f64::INFINITY;
    for q in linspace(-3.0, 3.0, 31) {
        let p = indifference_price(m, n, q).unwrap().total;
        prop_assert!(p <= prev + 1e-12 * (1.0 + p.abs()));
        prop_assert!(
            lo < ExtReal::Finite(p) && ExtReal::Finite(p) < hi,
            "q {}: {} not in ({}, {})",
            q,
            p,
            lo,
            hi
        );
        prev = p;
    }
    Ok(())
}

/// Centred replication-cost increments against the tail variance drop.
pub fn check_envelope(m: &MarketSpec) -> Result<(), TestCaseError> {
    let h = m.hedge();
    let theta2: f64 = h.theta().iter().map(|x| x * x).sum();
    let k = h.block_size();
    let dk = hedgeable_price(m, k).unwrap();
    let last = TailClaim::new(m, k);
    let mean_k = last.mean().unwrap();
    for n in 0..k {
        let dn = hedgeable_price(m, n).unwrap();
        let tail = TailClaim::new(m, n);
        let centred = (dk - dn) - (tail.mean().unwrap() - mean_k);
        let var = tail.variance() - last.variance();
        prop_assert!(centred.powi(2) <= (h.horizon() * theta2).exp() * var * (1.0 + 1e-9) + 1e-15);
    }
    Ok(())
}

/// `L Lᵀ = S` to 1e-12, lower-triangular `L` with positive diagonal, and `θ` against an LU solve.
pub fn check_cholesky(k: usize, seed: &[f64]) -> Result<(), TestCaseError> {
    let s = random_spd(k, seed);
    let l = cholesky_lower(&s).unwrap();
    let err = l.matmul(&l.transpose()).max_abs_diff(&s);
    prop_assert!(err <= 1e-12, "k {}: {}", k, err);
    for i in 0..k {
        prop_assert!(l[(i, i)] > 0.0);
        for j in i + 1..k {
            prop_assert_eq!(l[(i, j)], 0.0);
        }
    }
    let mu: Vec<f64> = (0..k).map(|i| seed[(3 * i) % seed.len()]).collect();
    let theta = market_price_of_risk(&l, &mu).unwrap();
    let dense = DMatrix::from_fn(k, k, |i, j| l[(i, j)]);
    let oracle = dense.lu().solve(&DVector::from_vec(mu)).unwrap();
    for i in 0..k {
        prop_assert!((theta[i] - oracle[i]).abs() <= 1e-10);
    }
    Ok(())
}

pub fn check_m_bounds_order(poisson: bool, scale: f64, ratio: f64) -> Result<(), TestCaseError> {
    let f = if poisson {
        Family::Poisson { scale }
    } else {
        Family::Gaussian { mean: 0.0, var: scale }
    };
    let m = build(&f, ratio, 1.0, 2, &[0.0]);
    let kind = if poisson { FamilyKind::Poisson } else { FamilyKind::Gaussian };
    let b = m_bounds(&m, &rate_function(kind).unwrap()).unwrap();
    prop_assert!(b.is_ordered(), "{:?}", b);
    Ok(())
}

/// Numerical and analytic rate functions are nonnegative and vanish only at the mean.
pub fn check_rate_zero(v: f64) -> Result<(), TestCaseError> {
    let rate = legendre_transform_fn(|l| 0.5 * v * l * l).unwrap();
    prop_assert_eq!(rate.eval(0.0), ExtReal::ZERO);
    let step = 100.0 / 10000.0;
    for y in linspace(-5.0 * v.min(1.0), 5.0 * v.min(1.0), 201) {
        let i = rate.eval(y);
        prop_assert!(i >= ExtReal::ZERO);
        if i == ExtReal::ZERO {
            prop_assert!(y.abs() <= v * step);
        }
    }
    for kind in [FamilyKind::Gaussian, FamilyKind::Poisson] {
        let r = rate_function(kind).unwrap();
        for y in linspace(-3.0, 7.0, 101) {
            prop_assert!(r.eval(y) >= ExtReal::ZERO);
            prop_assert_eq!(r.eval(y) == ExtReal::ZERO, y == 0.0);
        }
    }
    Ok(())
}
