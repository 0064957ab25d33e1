use std::sync::Arc;

use crate::cgf::FamilyKind;
use crate::error::{Error, Result};
use crate::ext_real::ExtReal;

/// Default `λ`-grid for [`legendre_transform`].
pub const LAMBDA_GRID: (f64, f64, usize) = (-50.0, 50.0, 10001);
/// Default `y`-grid for tabulating rate functions.
pub const Y_GRID: (f64, f64, usize) = (-20.0, 20.0, 8001);

/// `count` evenly spaced points from `lo` to `hi`.
pub fn linspace(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let step = (hi - lo) / (count - 1) as f64;
            (0..count)
                .map(|k| if k == count - 1 { hi } else { lo + step * k as f64 })
                .collect()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DomainKind {
    AllReals,
    NonNegativeIntegers,
    Interval(ExtReal, ExtReal),
}

#[derive(Debug, Clone)]
enum Repr {
    /// `y² / (2v)`.
    Quadratic { variance: f64 },
    /// `y` on `{0, 1, 2, ...}`, `+inf` elsewhere.
    PoissonRamp,
    /// `0` at `y = 0`, `+inf` elsewhere.
    PointMass,
    Legendre(Arc<LegendreTable>),
}

/// Grid-sampled `Γ` with forward slopes, evaluated lazily.
#[derive(Debug)]
struct LegendreTable {
    lambdas: Vec<f64>,
    gamma: Vec<f64>,
    /// Running maximum of the forward slopes, so the argmax search is monotone.
    slopes: Vec<f64>,
}

impl LegendreTable {
    /// `sup_λ (λy - Γ(λ))` and whether the sup sits strictly at a grid end.
    fn eval(&self, y: f64) -> (f64, bool) {
        let m = self.lambdas.len();
        let f = |i: usize| self.lambdas[i] * y - self.gamma[i];
        if m == 1 {
            return (f(0), false);
        }
        // First segment whose slope reaches y; the objective peaks at its left end.
        let i = self.slopes.partition_point(|&s| s < y);
        let i = i.min(m - 1);
        let mut best = i;
        for j in i.saturating_sub(1)..=(i + 1).min(m - 1) {
            if f(j) > f(best) {
                best = j;
            }
        }
        if best == 0 && f(0) > f(1) {
            return (f64::INFINITY, true);
        }
        if best == m - 1 && f(m - 1) > f(m - 2) {
            return (f64::INFINITY, true);
        }
        if best == 0 || best == m - 1 {
            return (f(best), false);
        }
        let (x0, x1, x2) = (self.lambdas[best - 1], self.lambdas[best], self.lambdas[best + 1]);
        let (f0, f1, f2) = (f(best - 1), f(best), f(best + 1));
        // Vertex of the interpolating parabola.
        let d01 = (f1 - f0) / (x1 - x0);
        let d12 = (f2 - f1) / (x2 - x1);
        let curv = (d12 - d01) / (x2 - x0);
        if curv < 0.0 {
            let xv = (0.5 * (x0 + x1) - d01 / (2.0 * curv)).clamp(x0, x2);
            let v = f0 + d01 * (xv - x0) + curv * (xv - x0) * (xv - x1);
            (v.max(f1), false)
        } else {
            (f1, false)
        }
    }
}

/// Extended-real rate function `I` with domain metadata.
#[derive(Debug, Clone)]
pub struct RateFunction {
    repr: Repr,
    domain: DomainKind,
    zero_set: (f64, f64),
    convex: bool,
    warnings: Vec<String>,
}

impl RateFunction {
    /// `I(y) = y² / (2v)`.
    pub fn quadratic(variance: f64) -> Result<Self> {
        if !(variance > 0.0 && variance.is_finite()) {
            return Err(Error::invalid("variance", "must be positive and finite"));
        }
        Ok(RateFunction {
            repr: Repr::Quadratic { variance },
            domain: DomainKind::AllReals,
            zero_set: (0.0, 0.0),
            convex: true,
            warnings: Vec::new(),
        })
    }

    /// `I(y) = y` on the non-negative integers.
    pub fn poisson_ramp() -> Self {
        RateFunction {
            repr: Repr::PoissonRamp,
            domain: DomainKind::NonNegativeIntegers,
            zero_set: (0.0, 0.0),
            convex: false,
            warnings: Vec::new(),
        }
    }

    /// Rate function of the constant limit `0`.
    pub fn point_mass() -> Self {
        RateFunction {
            repr: Repr::PointMass,
            domain: DomainKind::Interval(ExtReal::ZERO, ExtReal::ZERO),
            zero_set: (0.0, 0.0),
            convex: true,
            warnings: Vec::new(),
        }
    }

    pub fn eval(&self, y: f64) -> ExtReal {
        match &self.repr {
            Repr::Quadratic { variance } => ExtReal::Finite(0.5 * y * y / variance),
            Repr::PoissonRamp => {
                if y >= 0.0 && y.fract() == 0.0 {
                    ExtReal::Finite(y)
                } else {
                    ExtReal::PosInf
                }
            }
            Repr::PointMass => {
                if y == 0.0 {
                    ExtReal::ZERO
                } else {
                    ExtReal::PosInf
                }
            }
            Repr::Legendre(t) => {
                let (v, _) = t.eval(y);
                if v.is_finite() {
                    ExtReal::Finite(v)
                } else {
                    ExtReal::PosInf
                }
            }
        }
    }

    /// `I(y)` together with a flag set when a transform's sup touched the grid edge.
    pub fn eval_flagged(&self, y: f64) -> (ExtReal, bool) {
        match &self.repr {
            Repr::Legendre(t) => {
                let (v, touched) = t.eval(y);
                (ExtReal::from(v), touched)
            }
            _ => (self.eval(y), false),
        }
    }

    pub fn domain(&self) -> DomainKind {
        self.domain
    }

    /// `inf {y : I(y) < ∞}` and `sup {y : I(y) < ∞}`.
    pub fn domain_bounds(&self) -> (ExtReal, ExtReal) {
        match self.domain {
            DomainKind::AllReals => (ExtReal::NegInf, ExtReal::PosInf),
            DomainKind::NonNegativeIntegers => (ExtReal::ZERO, ExtReal::PosInf),
            DomainKind::Interval(a, b) => (a, b),
        }
    }

    /// Interval on which `I` vanishes.
    pub fn zero_set(&self) -> (f64, f64) {
        self.zero_set
    }

    pub fn is_convex(&self) -> bool {
        self.convex
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    /// `I` on a grid of `y` values.
    pub fn tabulate(&self, ys: &[f64]) -> Vec<ExtReal> {
        ys.iter().map(|&y| self.eval(y)).collect()
    }
}

/// Analytic rate function of the limiting law for a component family.
pub fn rate_function(kind: FamilyKind) -> Result<RateFunction> {
    match kind {
        FamilyKind::Gaussian => RateFunction::quadratic(1.0),
        FamilyKind::Poisson => Ok(RateFunction::poisson_ramp()),
        FamilyKind::Custom => Err(Error::UnsupportedRateFunction(
            "no analytic rate function for custom laws; use legendre_transform".into(),
        )),
    }
}

/// `I(y) = sup_λ (λy - Γ(λ))` from samples of a convex `Γ` on an increasing
/// `λ`-grid. Each `y` of `y_grid` whose sup touches a grid end is listed in the
/// warnings; there `I` is reported as `+inf`.
pub fn legendre_transform(lambdas: &[f64], gamma: &[f64], y_grid: &[f64]) -> Result<RateFunction> {
    if lambdas.len() != gamma.len() {
        return Err(Error::DimensionMismatch {
            expected: lambdas.len(),
            found: gamma.len(),
        });
    }
    if lambdas.len() < 3 {
        return Err(Error::invalid("lambdas", "need at least three grid points"));
    }
    if lambdas.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::invalid("lambdas", "grid must be strictly increasing"));
    }
    if let Some(i) = gamma.iter().position(|g| !g.is_finite()) {
        return Err(Error::invalid(format!("gamma[{i}]"), "samples must be finite"));
    }
    let m = lambdas.len();
    let raw: Vec<f64> = (0..m - 1)
        .map(|i| (gamma[i + 1] - gamma[i]) / (lambdas[i + 1] - lambdas[i]))
        .collect();
    for i in 1..m - 1 {
        let second = raw[i] - raw[i - 1];
        let scale = (lambdas[i + 1] - lambdas[i - 1]) * 0.5;
        if second * scale < -1e-9 * (1.0 + gamma[i].abs()) {
            return Err(Error::NonConvex {
                index: i,
                value: second * scale,
            });
        }
    }
    let mut slopes = raw.clone();
    for i in 1..slopes.len() {
        slopes[i] = slopes[i].max(slopes[i - 1]);
    }
    let table = LegendreTable {
        lambdas: lambdas.to_vec(),
        gamma: gamma.to_vec(),
        slopes,
    };

    let mut warnings = Vec::new();
    let mut touched = 0usize;
    let mut first_touch = None;
    for &y in y_grid {
        if table.eval(y).1 {
            touched += 1;
            first_touch.get_or_insert(y);
        }
    }
    if let Some(y) = first_touch {
        warnings.push(format!(
            "supremum attained at the lambda-grid boundary for {touched} of {} y values (first y = {y}); I reported as +inf there",
            y_grid.len()
        ));
    }

    // I(y) = 0 exactly for y between the one-sided slopes at the grid point nearest 0.
    let j = (0..m)
        .min_by(|&a, &b| lambdas[a].abs().total_cmp(&lambdas[b].abs()))
        .unwrap();
    let left = if j > 0 { raw[j - 1] } else { f64::NEG_INFINITY };
    let right = if j < m - 1 { raw[j] } else { f64::INFINITY };
    let domain = DomainKind::Interval(ExtReal::from(raw[0]), ExtReal::from(raw[m - 2]));

    Ok(RateFunction {
        repr: Repr::Legendre(Arc::new(table)),
        domain,
        zero_set: (left.min(right), left.max(right)),
        convex: true,
        warnings,
    })
}

/// [`legendre_transform`] of a closure sampled on the default grids.
pub fn legendre_transform_fn(gamma: impl Fn(f64) -> f64) -> Result<RateFunction> {
    let (lo, hi, count) = LAMBDA_GRID;
    let lambdas = linspace(lo, hi, count);
    let values: Vec<f64> = lambdas.iter().map(|&l| gamma(l)).collect();
    let (ylo, yhi, ycount) = Y_GRID;
    legendre_transform(&lambdas, &values, &linspace(ylo, yhi, ycount))
}
