//! End-to-end acceptance checks. Each criterion prints one PASS/FAIL line
//! with its runtime and budget; the process exits non-zero on any failure.

mod common;

use std::cell::Cell;
use std::panic::{self, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use common::{
    check_cgf_shape, check_cholesky, check_envelope, check_m_bounds_order, check_price_order,
    check_rate_zero, family, build,
};
use indiff::ldp::{legendre_transform_fn, linspace};
use indiff::mc::with_workers;
use indiff::{
    arbitrage_bounds, empirical_regime_table, fixtures, hedgeable_price, indifference_price,
    m_bounds, mc_cgf, mc_price_offset, mc_tilted_mean, optimal_quantity, quantity_scaling,
    rate_function, regime_limit, sample_tail, scaling_sequence, tail_cgf, tail_cgf_derivative,
    varadhan_sup, ExtReal, FamilyKind, MBounds, McConfig, Prediction, QuantityRule, TailClaim,
};
use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestCaseError, TestRng, TestRunner};

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn runner(cases: u32) -> TestRunner {
    let config = Config {
        cases,
        failure_persistence: None,
        ..Config::default()
    };
    TestRunner::new_with_rng(config, TestRng::deterministic_rng(RngAlgorithm::ChaCha))
}

fn gaussian_bounds() -> MBounds {
    m_bounds(&fixtures::g1(), &rate_function(FamilyKind::Gaussian).unwrap()).unwrap()
}

fn poisson_bounds() -> MBounds {
    m_bounds(&fixtures::p1(), &rate_function(FamilyKind::Poisson).unwrap()).unwrap()
}

fn gaussian_exact_prices() -> Outcome {
    let g1 = fixtures::g1();
    let a = g1.risk_aversion();
    let mut worst = 0.0f64;
    for n in 1..=20 {
        let d = hedgeable_price(&g1, n).map_err(|e| e.to_string())?;
        let r = scaling_sequence(&g1, n).map_err(|e| e.to_string())?;
        let gamma = TailClaim::new(&g1, n).mean().map_err(|e| e.to_string())?;
        for q in [-8.0, -1.0, -0.1, 0.1, 1.0, 8.0] {
            let p = indifference_price(&g1, n, q).map_err(|e| e.to_string())?.total;
            let err = (p - (d - a * q / (2.0 * r) + gamma)).abs();
            ensure(err <= 1e-12, || format!("n {n}, q {q}: error {err:e}"))?;
            worst = worst.max(err);
        }
    }
    Ok(format!("max error {worst:.1e}"))
}

fn poisson_worked_values() -> Outcome {
    let p1 = fixtures::p1();
    let price = indifference_price(&p1, 2, 1.0).map_err(|e| e.to_string())?.total;
    ensure((price - 0.908030140).abs() <= 1e-9, || format!("price {price}"))?;
    let q = optimal_quantity(&p1, 2, 0.85).map_err(|e| e.to_string())?.q_hat;
    ensure((q - 0.916290732).abs() <= 1e-9, || format!("quantity {q}"))?;
    Ok(format!("price {price:.9}, quantity {q:.9}"))
}

fn foc_round_trip() -> Outcome {
    let strategy = (
        family(),
        0.2f64..0.9,
        0.1f64..5.0,
        1usize..8,
        prop::collection::vec(-0.5f64..0.5, 8),
        0usize..8,
        -2.0f64..2.0,
    );
    let worst = Cell::new(0.0f64);
    let count = Cell::new(0usize);
    runner(200)
        .run(&strategy, |(f, ratio, a, k, drift, n, t)| {
            let m = build(&f, ratio, a, k, &drift);
            let n = n.min(k);
            let tail = TailClaim::new(&m, n);
            let d = hedgeable_price(&m, n).unwrap();
            let mean = tail.mean().unwrap();
            let sd = tail.variance().sqrt();
            let (lo, hi) = arbitrage_bounds(&m, n).unwrap();
            // Stay strictly inside the arbitrage-free range on either side of the mean.
            let offset = match (t < 0.0, lo, hi) {
                (true, ExtReal::Finite(lo), _) => mean - (mean - (lo - d)) * (-t / 2.2),
                (false, _, ExtReal::Finite(hi)) => mean + ((hi - d) - mean) * (t / 2.2),
                _ => mean + t * sd,
            };
            let sol = optimal_quantity(&m, n, d + offset).unwrap();
            prop_assert!(sol.residual <= 1e-9, "residual {}", sol.residual);
            let back = tail.cgf_derivative(-sol.q_hat * a).unwrap();
            prop_assert!((back - offset).abs() <= 1e-8, "{} vs {}", back, offset);
            worst.set(worst.get().max((back - offset).abs()));
            count.set(count.get() + 1);
            Ok(())
        })
        .map_err(|e| e.to_string())?;
    Ok(format!("{} triples, max repricing error {:.1e}", count.get(), worst.get()))
}

fn regime_limits() -> Outcome {
    let g = rate_function(FamilyKind::Gaussian).unwrap();
    let gb = gaussian_bounds();
    for a in [0.5, 1.0, 2.0] {
        for l in [-3.0, -0.5, 0.25, 1.0, 4.0] {
            let pred = regime_limit(&g, a, ExtReal::Finite(l), &gb).map_err(|e| e.to_string())?.prediction;
            let ok = matches!(pred, Prediction::Finite(v) if (v + 0.5 * a * l).abs() <= 1e-12);
            ensure(ok, || format!("gaussian a {a}, l {l}: {pred}"))?;
        }
        for (l, want) in [
            (ExtReal::ZERO, Prediction::Finite(0.0)),
            (ExtReal::PosInf, Prediction::NegInf),
            (ExtReal::NegInf, Prediction::PosInf),
        ] {
            let pred = regime_limit(&g, a, l, &gb).map_err(|e| e.to_string())?.prediction;
            ensure(pred == want, || format!("gaussian a {a}, l {l}: {pred}"))?;
        }
    }

    let p = rate_function(FamilyKind::Poisson).unwrap();
    let pb = poisson_bounds();
    for a in [0.5, 1.0, 2.0] {
        let at = |l: f64| regime_limit(&p, a, ExtReal::Finite(l), &pb).map(|r| r.prediction);
        for l in [-0.9 / a, -0.5 / a, 0.3, 2.0] {
            let pred = at(l).map_err(|e| e.to_string())?;
            ensure(pred == Prediction::Finite(0.0), || format!("poisson a {a}, l {l}: {pred}"))?;
        }
        for l in [-1.1 / a, -3.0 / a] {
            let pred = at(l).map_err(|e| e.to_string())?;
            ensure(pred == Prediction::PosInf, || format!("poisson a {a}, l {l}: {pred}"))?;
        }
        let pred = at(-1.0 / a).map_err(|e| e.to_string())?;
        ensure(pred == Prediction::UncoveredBoundary, || format!("poisson a {a}, l = -1/a: {pred}"))?;
    }

    let n_list: Vec<usize> = (4..=20).collect();
    let gt = empirical_regime_table(&fixtures::g1(), &g, &gb, &QuantityRule::Linear(1.0), &n_list)
        .map_err(|e| e.to_string())?;
    let gd = gt.final_deviation.ok_or("no gaussian deviation")?;
    ensure(gd <= 1e-9, || format!("gaussian deviation {gd:e}"))?;
    let pt = empirical_regime_table(&fixtures::p1(), &p, &pb, &QuantityRule::Linear(0.5), &[10, 20, 30, 40])
        .map_err(|e| e.to_string())?;
    let pd = pt.final_deviation.ok_or("no poisson deviation")?;
    ensure(pd <= 0.05, || format!("poisson deviation {pd:e}"))?;
    Ok(format!("gaussian deviation {gd:.1e}, poisson deviation {pd:.1e}"))
}

fn quantity_scaling_laws() -> Outcome {
    let n_list: Vec<usize> = (4..=20).collect();
    let g = quantity_scaling(&fixtures::g1(), -0.05, &n_list).map_err(|e| e.to_string())?;
    let mut worst_g = 0.0f64;
    for row in &g.rows {
        worst_g = worst_g.max((row.ratio - 0.05).abs());
    }
    ensure(worst_g <= 1e-12, || format!("gaussian ratio error {worst_g:e}"))?;
    let n_list: Vec<usize> = (10..=40).collect();
    let p = quantity_scaling(&fixtures::p1(), 0.1, &n_list).map_err(|e| e.to_string())?;
    for row in &p.rows {
        let bound = 0.1f64.ln().abs() / row.r_n + 1e-9;
        ensure((row.ratio + 1.0).abs() <= bound, || format!("poisson n {}: {}", row.n, row.ratio))?;
    }
    Ok(format!("gaussian ratio error {worst_g:.1e}, poisson rows {}", p.rows.len()))
}

fn legendre_and_varadhan() -> Outcome {
    let rate = legendre_transform_fn(|l| 0.5 * l * l).map_err(|e| e.to_string())?;
    let mut worst = 0.0f64;
    for y in linspace(-5.0, 5.0, 201) {
        let v = rate.eval(y).finite().ok_or_else(|| format!("infinite at {y}"))?;
        worst = worst.max((v - 0.5 * y * y).abs());
    }
    ensure(worst <= 1e-6, || format!("legendre error {worst:e}"))?;

    let i = rate_function(FamilyKind::Poisson).unwrap();
    for m in [-5.0, -1.0, 0.0, 0.5, 0.999, 1.0] {
        ensure(varadhan_sup(&i, m) == ExtReal::ZERO, || format!("varadhan at {m}"))?;
    }
    for m in [1.0001, 1.5, 4.0] {
        ensure(varadhan_sup(&i, m) == ExtReal::PosInf, || format!("varadhan at {m}"))?;
    }

    let g = gaussian_bounds();
    let inf = (ExtReal::NegInf, ExtReal::NegInf, ExtReal::PosInf, ExtReal::PosInf);
    ensure((g.lower_star, g.lower, g.upper, g.upper_star) == inf, || format!("gaussian {g:?}"))?;
    let p = poisson_bounds();
    ensure((p.lower_star, p.lower) == (ExtReal::NegInf, ExtReal::NegInf), || format!("poisson {p:?}"))?;
    let mut width = 0.0f64;
    for (v, bracket) in [(p.upper, p.brackets[2]), (p.upper_star, p.brackets[3])] {
        let (lo, hi) = bracket.ok_or("missing bracket")?;
        width = width.max(hi - lo);
        let v = v.finite().ok_or("infinite poisson bound")?;
        ensure(hi - lo <= 1e-3 && lo <= 1.0 && 1.0 <= hi && (v - 1.0).abs() <= 1e-3, || {
            format!("poisson bound {v} in [{lo}, {hi}]")
        })?;
    }
    Ok(format!("legendre error {worst:.1e}, bracket width {width:.1e}"))
}

fn monte_carlo_agreement() -> Outcome {
    const SAMPLES: usize = 1_000_000;
    const SEED: u64 = 20_240_601;
    let lambdas = [-2.0, -1.0, -0.4, 0.5, 1.0];
    let mut worst = 0.0f64;
    let mut pairs = 0usize;
    for (name, m, n) in [("G1", fixtures::g1(), 3), ("P1", fixtures::p1(), 2)] {
        let tail = TailClaim::new(&m, n);
        let a = m.risk_aversion();
        let s = sample_tail(&m, n, &McConfig::new(SAMPLES, SEED)).map_err(|e| e.to_string())?;
        for &l in &lambdas {
            let q = -l / a;
            let checks = [
                ("cgf", mc_cgf(&s, l), tail_cgf(&tail, l)),
                ("tilted mean", mc_tilted_mean(&s, l), tail_cgf_derivative(&tail, l)),
                (
                    "price offset",
                    mc_price_offset(&s, q, a),
                    indifference_price(&m, n, q).map(|p| p.offset),
                ),
            ];
            for (what, est, analytic) in checks {
                let est = est.map_err(|e| e.to_string())?;
                let analytic = analytic.map_err(|e| e.to_string())?;
                let z = est.compare(analytic).z_score.unwrap();
                ensure(z.abs() <= 4.0, || format!("{name} {what} at lambda {l}: z {z}"))?;
                worst = worst.max(z.abs());
                pairs += 1;
            }
        }
    }

    let run = |workers: usize| {
        with_workers(workers, || {
            let s = sample_tail(&fixtures::p1(), 2, &McConfig::new(SAMPLES, SEED).with_workers(workers)).unwrap();
            let mut bits: Vec<u64> = Vec::new();
            for &l in &lambdas {
                let c = mc_cgf(&s, l).unwrap();
                let t = mc_tilted_mean(&s, l).unwrap();
                bits.extend([c.estimate, c.std_error, t.estimate, t.std_error].map(f64::to_bits));
            }
            bits
        })
    };
    let base = run(1).map_err(|e| e.to_string())?;
    for w in [4, 8] {
        ensure(run(w).map_err(|e| e.to_string())? == base, || format!("estimates differ with {w} workers"))?;
    }
    Ok(format!("{pairs} pairs, max |z| {worst:.2}, identical across 1/4/8 workers"))
}

fn property<S: Strategy>(
    name: &str,
    cases: u32,
    strategy: S,
    test: impl Fn(S::Value) -> Result<(), TestCaseError>,
) -> Result<(), String> {
    runner(cases).run(&strategy, test).map_err(|e| format!("{name}: {e}"))
}

fn invariant_suite() -> Outcome {
    let indexed = || (common::market(), 0usize..6);
    property("cgf shape", 128, indexed(), |(m, n)| check_cgf_shape(&m, n))?;
    property("price order", 128, indexed(), |(m, n)| {
        check_price_order(&m, n.min(m.hedge().block_size()))
    })?;
    property("envelope", 128, common::market(), |m| check_envelope(&m))?;
    let seeds = (1usize..=64, prop::collection::vec(-1.0f64..1.0, 64));
    property("cholesky", 128, seeds, |(k, s)| check_cholesky(k, &s))?;
    let families = (any::<bool>(), 0.1f64..3.0, 0.2f64..0.8);
    property("m-bounds order", 100, families, |(p, s, r)| check_m_bounds_order(p, s, r))?;
    property("rate zero", 100, 0.05f64..4.0, check_rate_zero)?;
    Ok("6 properties over at least 100 cases each".into())
}

fn main() -> ExitCode {
    let criteria: [(&str, u64, fn() -> Outcome); 8] = [
        ("gaussian exact-price identity", 1, gaussian_exact_prices),
        ("poisson worked values", 1, poisson_worked_values),
        ("first-order-condition round trip", 5, foc_round_trip),
        ("regime limits", 10, regime_limits),
        ("optimal-quantity scaling", 5, quantity_scaling_laws),
        ("legendre and varadhan oracles", 10, legendre_and_varadhan),
        ("monte carlo agreement", 60, monte_carlo_agreement),
        ("invariant suite", 60, invariant_suite),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (i, (name, budget, check)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let outcome = panic::catch_unwind(AssertUnwindSafe(check))
            .unwrap_or_else(|p| {
                let msg = p
                    .downcast_ref::<String>()
                    .cloned()
                    .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                    .unwrap_or_default();
                Err(format!("panicked: {msg}"))
            });
        let elapsed = start.elapsed();
        let outcome = outcome.and_then(|detail| {
            if elapsed <= Duration::from_secs(budget) {
                Ok(detail)
            } else {
                Err(format!("{detail}; over the {budget} s budget"))
            }
        });
        let (tag, detail) = match &outcome {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!(
            "criterion {}: {tag} {name} ({:.2} s, budget {budget} s) {detail}",
            i + 1,
            elapsed.as_secs_f64()
        );
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
