//! Chi-distribution CDF and quantiles.
//!
//! Quantiles are obtained by bisection on the chi CDF (a regularized lower
//! incomplete gamma), not by sampling: they anchor exact downstream checks,
//! so the inversion error is kept below 1e-9 in CDF terms.

use super::special::gamma_p;
use crate::error::{contract, Result};

/// Pr[chi(n) <= r].
pub fn chi_cdf(n: usize, r: f64) -> f64 {
    if r <= 0.0 {
        return 0.0;
    }
    gamma_p(n as f64 / 2.0, 0.5 * r * r)
}

/// Quantile r(nu) of the chi distribution with `n` degrees of freedom.
pub fn chi_quantile(n: usize, nu: f64) -> Result<f64> {
    contract!(n >= 1, "chi_quantile: n must be >= 1");
    contract!(
        nu > 0.0 && nu < 1.0,
        "chi_quantile: nu must lie in (0,1), got {nu}"
    );
    let mut hi = (n as f64).sqrt() + 1.0;
    while chi_cdf(n, hi) < nu {
        hi *= 2.0;
        if hi > 1e9 {
            break;
        }
    }
    let mut lo = 0.0f64;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if chi_cdf(n, mid) < nu {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= f64::EPSILON * hi {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Chi quantiles for one fixed dimension, with the median cached.
#[derive(Debug, Clone)]
pub struct ChiQuantileTable {
    n: usize,
    r_median: f64,
}

impl ChiQuantileTable {
    pub fn new(n: usize) -> Result<Self> {
        let r_median = chi_quantile(n, 0.5)?;
        Ok(ChiQuantileTable { n, r_median })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn r_median(&self) -> f64 {
        self.r_median
    }

    pub fn quantile(&self, nu: f64) -> Result<f64> {
        chi_quantile(self.n, nu)
    }
}

/// E[r^2 ; r <= r(nu)] for r ~ chi(n), via the chi-squared identity
/// E[X 1(X <= q)] = n F_{n+2}(q). Used for exact per-cell integrals of
/// radial polynomials over quantile grids.
pub fn chi_sq_partial_mean(n: usize, nu_upper: f64) -> Result<f64> {
    contract!(
        (0.0..=1.0).contains(&nu_upper),
        "chi_sq_partial_mean: nu must lie in [0,1]"
    );
    if nu_upper == 0.0 {
        return Ok(0.0);
    }
    if nu_upper == 1.0 {
        return Ok(n as f64);
    }
    let q = chi_quantile(n, nu_upper)?;
    Ok(n as f64 * gamma_p(n as f64 / 2.0 + 1.0, 0.5 * q * q))
}
