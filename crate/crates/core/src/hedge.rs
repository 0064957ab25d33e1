//! Traded assets, market price of risk and the replication cost of the
//! hedgeable part.

use crate::cgf::{ComponentFamily, TailClaim};
use crate::error::{Error, Result};
use crate::market::MarketSpec;

/// Dense square matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    dim: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(dim: usize) -> Self {
        Matrix {
            dim,
            data: vec![0.0; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Matrix::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.len();
        let mut data = Vec::with_capacity(dim * dim);
        for row in rows {
            if row.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        Ok(Matrix { dim, data })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.data.chunks(self.dim.max(1)).map(<[f64]>::to_vec).collect()
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.dim);
        for i in 0..self.dim {
            for j in 0..self.dim {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn matmul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.dim, other.dim);
        let n = self.dim;
        let mut out = Matrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..n {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        out
    }

    pub fn matvec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(self.dim, v.len());
        self.data
            .chunks(self.dim)
            .map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// `max |a_ij - b_ij|`.
    pub fn max_abs_diff(&self, other: &Matrix) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

impl std::ops::Index<(usize, usize)> for Matrix {
    type Output = f64;

    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.dim + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.dim + j]
    }
}

/// Lower-triangular `σ` with positive diagonal and `σσ' = Σ`.
///
/// Errors with the (1-based) index of the first non-positive pivot.
pub fn cholesky_lower(cov: &Matrix) -> Result<Matrix> {
    let n = cov.dim();
    for i in 0..n {
        for j in 0..i {
            let (a, b) = (cov[(i, j)], cov[(j, i)]);
            if (a - b).abs() > 1e-12 * (1.0 + a.abs().max(b.abs())) {
                return Err(Error::invalid(
                    format!("sigma_cov[{i}][{j}]"),
                    "covariance must be symmetric",
                ));
            }
        }
    }
    let mut l = Matrix::zeros(n);
    for j in 0..n {
        let mut pivot = cov[(j, j)];
        for k in 0..j {
            pivot -= l[(j, k)] * l[(j, k)];
        }
        if !(pivot > 0.0) || !pivot.is_finite() {
            return Err(Error::NotPositiveDefinite {
                pivot: j + 1,
                value: pivot,
            });
        }
        let d = pivot.sqrt();
        l[(j, j)] = d;
        for i in (j + 1)..n {
            let mut s = cov[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / d;
        }
    }
    Ok(l)
}

/// Solves `σθ = μ` by forward substitution.
pub fn market_price_of_risk(sigma: &Matrix, mu: &[f64]) -> Result<Vec<f64>> {
    let n = sigma.dim();
    if mu.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: mu.len(),
        });
    }
    let mut theta = vec![0.0; n];
    for i in 0..n {
        let mut s = mu[i];
        for j in 0..i {
            s -= sigma[(i, j)] * theta[j];
        }
        theta[i] = s / sigma[(i, i)];
    }
    Ok(theta)
}

/// `E_Q̃[B_i]`, with the driver `W^i_T ~ N(-θ_i T, T)` under `Q̃`.
pub fn risk_neutral_component_mean(family: &ComponentFamily, theta: f64, horizon: f64) -> Result<f64> {
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(Error::invalid("horizon", "must be positive and finite"));
    }
    family.shifted_mean(-theta * horizon.sqrt())
}

/// Drift, covariance block and horizon of the traded assets, with the derived
/// Cholesky factor and market price of risk.
#[derive(Debug, Clone)]
pub struct HedgeModel {
    mu: Vec<f64>,
    cov: Matrix,
    horizon: f64,
    sigma: Matrix,
    theta: Vec<f64>,
}

impl HedgeModel {
    pub fn new(mu: Vec<f64>, cov: Matrix, horizon: f64) -> Result<Self> {
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(Error::invalid("horizon", "must be positive and finite"));
        }
        if mu.len() != cov.dim() {
            return Err(Error::DimensionMismatch {
                expected: cov.dim(),
                found: mu.len(),
            });
        }
        if let Some(i) = mu.iter().position(|m| !m.is_finite()) {
            return Err(Error::invalid(format!("mu[{i}]"), "must be finite"));
        }
        let sigma = cholesky_lower(&cov)?;
        let theta = market_price_of_risk(&sigma, &mu)?;
        Ok(HedgeModel {
            mu,
            cov,
            horizon,
            sigma,
            theta,
        })
    }

    /// `k` uncorrelated driftless assets with unit volatility.
    pub fn identity(k: usize, horizon: f64) -> Result<Self> {
        HedgeModel::new(vec![0.0; k], Matrix::identity(k), horizon)
    }

    pub fn mu(&self) -> &[f64] {
        &self.mu
    }

    pub fn covariance(&self) -> &Matrix {
        &self.cov
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn sigma(&self) -> &Matrix {
        &self.sigma
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    /// Size `k` of the stored covariance block.
    pub fn block_size(&self) -> usize {
        self.mu.len()
    }
}

/// `d^n = Σ_{i≤n} E_Q̃[B_i]`.
pub fn hedgeable_price(market: &MarketSpec, n: usize) -> Result<f64> {
    let hedge = market.hedge();
    let k = hedge.block_size();
    if n > k {
        return Err(Error::MissingHedgeRepresentation { index: n, block: k });
    }
    let mut total = 0.0;
    for i in 1..=n {
        let Some(family) = market.components().component(i) else {
            break;
        };
        total += risk_neutral_component_mean(&family, hedge.theta()[i - 1], hedge.horizon())?;
    }
    Ok(total)
}

/// `d = lim d^n`, taking `θ_i = 0` past the covariance block.
pub fn hedgeable_limit(market: &MarketSpec) -> Result<f64> {
    let k = market.hedge().block_size();
    Ok(hedgeable_price(market, k)? + TailClaim::new(market, k).mean()?)
}
