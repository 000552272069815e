//! Exact Fourier analysis of Boolean functions on {-1,1}^n for small n,
//! with the TRIBES construction and monotone-function identities.
//!
//! Truth tables are indexed by bit patterns: bit i of the index set means
//! x_i = -1, clear means x_i = +1. The transform runs over exact integer
//! sums, so Parseval holds to 1e-12 by construction.

use crate::error::{contract, Result};
use crate::rng::RngStream;
use serde::Serialize;

pub const MAX_VARS: usize = 20;

/// A +/-1-valued function on the n-cube as an explicit truth table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BooleanFunction {
    n: usize,
    table: Vec<i8>,
}

impl BooleanFunction {
    pub fn from_table(n: usize, table: Vec<i8>) -> Result<Self> {
        contract!(n >= 1 && n <= MAX_VARS, "BooleanFunction: n must lie in 1..=20");
        contract!(
            table.len() == 1 << n,
            "BooleanFunction: table length must be 2^n"
        );
        contract!(
            table.iter().all(|&v| v == 1 || v == -1),
            "BooleanFunction: values must be +/-1"
        );
        Ok(BooleanFunction { n, table })
    }

    pub fn from_fn(n: usize, f: impl Fn(u32) -> bool) -> Result<Self> {
        contract!(n >= 1 && n <= MAX_VARS, "BooleanFunction: n must lie in 1..=20");
        let table = (0..1u32 << n)
            .map(|m| if f(m) { 1 } else { -1 })
            .collect();
        Ok(BooleanFunction { n, table })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn value(&self, mask: u32) -> i8 {
        self.table[mask as usize]
    }

    /// Fraction of inputs mapped to +1.
    pub fn positive_fraction(&self) -> f64 {
        let pos = self.table.iter().filter(|&&v| v == 1).count();
        pos as f64 / self.table.len() as f64
    }

    /// Influence of variable i: Pr[f(x) != f(x with bit i flipped)].
    pub fn influence(&self, i: usize) -> f64 {
        let bit = 1usize << i;
        let mut diff = 0u64;
        for m in 0..self.table.len() {
            if m & bit == 0 && self.table[m] != self.table[m | bit] {
                diff += 1;
            }
        }
        diff as f64 / (self.table.len() / 2) as f64
    }

    /// f is monotone when flipping any input bit from -1 to +1 never
    /// decreases f. With the bit encoding (bit set = -1), clearing a bit
    /// must never decrease f.
    pub fn is_monotone(&self) -> bool {
        for i in 0..self.n {
            let bit = 1usize << i;
            for m in 0..self.table.len() {
                if m & bit != 0 && self.table[m] > self.table[m & !bit] {
                    return false;
                }
            }
        }
        true
    }
}

/// Exact Fourier coefficients, indexed by subset masks.
#[derive(Debug, Clone, Serialize)]
pub struct FourierTable {
    pub n: usize,
    pub coeffs: Vec<f64>,
}

impl FourierTable {
    pub fn coeff(&self, subset: u32) -> f64 {
        self.coeffs[subset as usize]
    }

    /// Sum of squared coefficients at exactly level `level`.
    pub fn level_weight(&self, level: u32) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(s, _)| (*s as u32).count_ones() == level)
            .map(|(_, c)| c * c)
            .sum()
    }

    pub fn parseval_sum(&self) -> f64 {
        self.coeffs.iter().map(|c| c * c).sum()
    }
}

/// Fast Walsh-Hadamard transform: f_hat(S) = 2^{-n} sum_x f(x) prod_{i in S} x_i.
pub fn exact_fourier(f: &BooleanFunction) -> FourierTable {
    let n = f.n;
    let size = 1usize << n;
    // With bit set meaning x_i = -1, the character is (-1)^{|mask & S|},
    // which is exactly the standard WHT butterfly.
    let mut acc: Vec<i64> = f.table.iter().map(|&v| v as i64).collect();
    let mut h = 1usize;
    while h < size {
        for block in (0..size).step_by(2 * h) {
            for k in block..block + h {
                let (a, b) = (acc[k], acc[k + h]);
                acc[k] = a + b;
                acc[k + h] = a - b;
            }
        }
        h *= 2;
    }
    let scale = 1.0 / size as f64;
    FourierTable {
        n,
        coeffs: acc.into_iter().map(|v| v as f64 * scale).collect(),
    }
}

/// Naive coefficient by direct enumeration; the independent oracle for the
/// fast transform.
pub fn fourier_coeff_naive(f: &BooleanFunction, subset: u32) -> f64 {
    let size = 1u32 << f.n;
    let mut sum = 0i64;
    for m in 0..size {
        let chi = if (m & subset).count_ones() % 2 == 0 {
            1
        } else {
            -1
        };
        sum += (f.value(m) as i64) * chi;
    }
    sum as f64 / size as f64
}

/// Inverse transform back to a truth table (involution up to scaling).
pub fn inverse_fourier(table: &FourierTable) -> Result<BooleanFunction> {
    let size = 1usize << table.n;
    let mut acc: Vec<f64> = table.coeffs.clone();
    let mut h = 1usize;
    while h < size {
        for block in (0..size).step_by(2 * h) {
            for k in block..block + h {
                let (a, b) = (acc[k], acc[k + h]);
                acc[k] = a + b;
                acc[k + h] = a - b;
            }
        }
        h *= 2;
    }
    let vals: Vec<i8> = acc
        .into_iter()
        .map(|v| if v >= 0.0 { 1 } else { -1 })
        .collect();
    BooleanFunction::from_table(table.n, vals)
}

/// TRIBES: OR of k disjoint ANDs of w variables, true -> +1.
/// Variable i belongs to tribe i / w.
pub fn tribes(w: usize, k: usize) -> Result<BooleanFunction> {
    contract!(w >= 1 && k >= 1, "tribes: w and k must be >= 1");
    let n = w * k;
    contract!(n <= MAX_VARS, "tribes: w*k must be <= 20");
    BooleanFunction::from_fn(n, |mask| {
        // tribe fires when all its variables are true (+1), i.e. bits clear
        (0..k).any(|t| {
            let tribe_mask = ((1u32 << w) - 1) << (t * w);
            mask & tribe_mask == 0
        })
    })
}

/// Squared Fourier weight at levels 0 and 1.
pub fn low_level_weight_boolean(f: &BooleanFunction) -> (f64, f64) {
    let table = exact_fourier(f);
    (table.level_weight(0), table.level_weight(1))
}

/// Random monotone function: monotone closure of a random positive set.
/// A test-data generator, not a uniform distribution over monotone
/// functions.
pub fn random_monotone(n: usize, density: f64, rng: &mut RngStream) -> Result<BooleanFunction> {
    contract!(n >= 1 && n <= 16, "random_monotone: n must lie in 1..=16");
    let size = 1usize << n;
    let mut positive = vec![false; size];
    for slot in positive.iter_mut() {
        *slot = rng.uniform() < density;
    }
    // monotone closure downward in mask order: clearing a bit (towards
    // all-true) keeps f positive
    for m in (0..size).rev() {
        if positive[m] {
            for i in 0..n {
                if m & (1 << i) != 0 {
                    positive[m & !(1 << i)] = true;
                }
            }
        }
    }
    BooleanFunction::from_table(
        n,
        positive.iter().map(|&p| if p { 1 } else { -1 }).collect(),
    )
}
