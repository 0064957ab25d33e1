use crate::ext_real::ExtReal;

use super::probe::ProbeSequence;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Holds,
    Fails,
    Inconclusive,
}

/// Numerical evidence for the four Gärtner–Ellis conditions on a `λ`-grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GartnerEllisReport {
    pub lambdas: Vec<f64>,
    /// Estimated limit `Γ(λ)` per grid point.
    pub gamma: Vec<ExtReal>,
    pub convergence: Verdict,
    pub interior_zero: Verdict,
    pub differentiable: Verdict,
    pub steep: Verdict,
    /// Finite endpoints of the effective domain found on the grid.
    pub domain_boundary: (Option<f64>, Option<f64>),
}

impl GartnerEllisReport {
    pub fn all_hold(&self) -> bool {
        [self.convergence, self.interior_zero, self.differentiable, self.steep]
            .iter()
            .all(|v| *v == Verdict::Holds)
    }
}

const SPIKE_FACTOR: f64 = 10.0;
const STEEP_GROWTH: f64 = 1.5;

fn slope(x: &[f64], g: &[f64], i: usize) -> f64 {
    (g[i + 1] - g[i]) / (x[i + 1] - x[i])
}

pub fn gartner_ellis_check(probes: &[ProbeSequence]) -> GartnerEllisReport {
    let mut sorted: Vec<&ProbeSequence> = probes.iter().collect();
    sorted.sort_by(|a, b| a.lambda.total_cmp(&b.lambda));
    let lambdas: Vec<f64> = sorted.iter().map(|p| p.lambda).collect();
    let gamma: Vec<ExtReal> = sorted.iter().map(|p| p.limit).collect();

    let convergence = if sorted.is_empty() {
        Verdict::Inconclusive
    } else if sorted.iter().all(|p| p.converged || p.divergent) {
        Verdict::Holds
    } else {
        Verdict::Inconclusive
    };

    // Maximal run of finite values around λ = 0.
    let zero = lambdas
        .iter()
        .enumerate()
        .filter(|(i, _)| gamma[*i].is_finite())
        .min_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
        .map(|(i, _)| i);
    let Some(zero) = zero else {
        return GartnerEllisReport {
            lambdas,
            gamma,
            convergence,
            interior_zero: Verdict::Fails,
            differentiable: Verdict::Inconclusive,
            steep: Verdict::Inconclusive,
            domain_boundary: (None, None),
        };
    };
    let mut lo = zero;
    while lo > 0 && gamma[lo - 1].is_finite() {
        lo -= 1;
    }
    let mut hi = zero;
    while hi + 1 < gamma.len() && gamma[hi + 1].is_finite() {
        hi += 1;
    }
    let x = &lambdas[lo..=hi];
    let g: Vec<f64> = gamma[lo..=hi].iter().map(|v| v.to_f64()).collect();

    let has_neg = lambdas.iter().any(|&l| l < 0.0);
    let has_pos = lambdas.iter().any(|&l| l > 0.0);
    let interior_zero = if !(has_neg && has_pos) {
        Verdict::Inconclusive
    } else if x[0] < 0.0 && x[x.len() - 1] > 0.0 {
        Verdict::Holds
    } else {
        Verdict::Fails
    };

    let differentiable = if x.len() < 5 {
        Verdict::Inconclusive
    } else {
        let slopes: Vec<f64> = (0..x.len() - 1).map(|i| slope(x, &g, i)).collect();
        let jumps: Vec<f64> = slopes.windows(2).map(|w| w[1] - w[0]).collect();
        let spike = (0..jumps.len()).any(|j| {
            let left = if j > 0 { jumps[j - 1].abs() } else { 0.0 };
            let right = jumps.get(j + 1).map_or(0.0, |v| v.abs());
            let scale = 1.0 + slopes[j].abs() + slopes[j + 1].abs();
            jumps[j].abs() > SPIKE_FACTOR * left.max(right) + 1e-6 * scale
                && jumps[j].abs() > 1e-4 * scale
        });
        if spike {
            Verdict::Fails
        } else {
            Verdict::Holds
        }
    };

    let lower_boundary = (lo > 0).then_some(x[0]);
    let upper_boundary = (hi + 1 < gamma.len()).then_some(x[x.len() - 1]);
    let steep = if lower_boundary.is_none() && upper_boundary.is_none() {
        Verdict::Holds
    } else {
        let mut verdicts = Vec::new();
        if upper_boundary.is_some() {
            verdicts.push(steep_side(x, &g, false));
        }
        if lower_boundary.is_some() {
            verdicts.push(steep_side(x, &g, true));
        }
        if verdicts.contains(&Verdict::Fails) {
            Verdict::Fails
        } else if verdicts.iter().all(|v| *v == Verdict::Holds) {
            Verdict::Holds
        } else {
            Verdict::Inconclusive
        }
    };

    GartnerEllisReport {
        lambdas,
        gamma,
        convergence,
        interior_zero,
        differentiable,
        steep,
        domain_boundary: (lower_boundary, upper_boundary),
    }
}

/// Slope magnitudes of the last three segments before a finite boundary must
/// grow geometrically; flat slopes fail.
fn steep_side(x: &[f64], g: &[f64], lower: bool) -> Verdict {
    let m = x.len();
    if m < 4 {
        return Verdict::Inconclusive;
    }
    let s: Vec<f64> = if lower {
        (0..3).map(|k| -slope(x, g, k)).rev().collect()
    } else {
        (m - 4..m - 1).map(|k| slope(x, g, k)).collect()
    };
    // s[2] is the segment touching the boundary.
    let tol = 1e-9 * (1.0 + s[1].abs());
    if s[2] > STEEP_GROWTH * s[1].max(0.0) + tol && s[1] > STEEP_GROWTH * s[0].max(0.0) - tol && s[2] > 0.0 {
        Verdict::Holds
    } else if s[2] <= s[1] + tol {
        Verdict::Fails
    } else {
        Verdict::Inconclusive
    }
}
