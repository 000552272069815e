//! The membership-query lower-bound machine: a discretized hard
//! distribution of random slab conjunctions, exact membership
//! probabilities, the augmented query oracle with its knowledge-state
//! vector, and Bayes-optimal error measurement for query strategies.
//!
//! The construction is parameterized by (n, s, gamma): slab width d solves
//! the two-sided sphere tail 2 cap(n, d/sqrt(n)) = s^{-gamma}, the process
//! intensity is Lambda = s^gamma ln 2 (so membership probability at radius
//! sqrt(n) is exactly 1/2), and the discrete support has M unit vectors
//! with per-vector inclusion probability p = Lambda / M.

use crate::density::{mc_mean, DensityEstimate, McEstimate};
use crate::error::{contract, Error, Result};
use crate::rng::{RngStream, SamplePlan, StreamId};
use crate::sampling::{cap_mass, dot, fill_gaussian, fill_sphere, norm, sample_sphere, solve_slab_width};
use rand_distr::Distribution;
use rayon::prelude::*;
use serde::Serialize;
use std::sync::Arc;

/// Parameters of the discretized hard distribution, including its fixed
/// M-element support (i.i.d. uniform sphere points, in generation order).
#[derive(Debug, Clone)]
pub struct HardDistParams {
    pub n: usize,
    pub s: u64,
    pub gamma: f64,
    pub d: f64,
    pub lambda: f64,
    pub m: usize,
    pub p: f64,
    pub seed: StreamId,
    vectors: Vec<f64>, // m x n, row-major
}

impl HardDistParams {
    pub fn support_vector(&self, i: usize) -> &[f64] {
        &self.vectors[i * self.n..(i + 1) * self.n]
    }

    /// Indices of support slabs violated by x (|z·x| > d), in order.
    pub fn violations(&self, x: &[f64]) -> Vec<u32> {
        debug_assert_eq!(x.len(), self.n);
        let mut out = Vec::new();
        for (i, row) in self.vectors.chunks_exact(self.n).enumerate() {
            if dot(row, x).abs() > self.d {
                out.push(i as u32);
            }
        }
        out
    }

    pub fn violation_count(&self, x: &[f64]) -> usize {
        self.vectors
            .chunks_exact(self.n)
            .filter(|row| dot(row, x).abs() > self.d)
            .count()
    }
}

/// Memory floor for the default support size: max(1e4, ceil(100 Lambda^2)),
/// which pins the Poisson-vs-Bernoulli total variation at 2 Lambda^2 / M
/// <= 0.02.
fn default_support(lambda: f64) -> usize {
    (100.0 * lambda * lambda).ceil().max(10_000.0) as usize
}

pub fn build_hard_params(
    n: usize,
    s: u64,
    gamma: f64,
    m_override: Option<usize>,
    seed: StreamId,
) -> Result<HardDistParams> {
    contract!(n >= 2, "build_hard_params: n must be >= 2");
    contract!(s >= 2, "build_hard_params: s must be >= 2");
    contract!(gamma >= 1.0, "build_hard_params: gamma must be >= 1");
    let s_pow = (s as f64).powf(gamma);
    let d = solve_slab_width(n, 1.0 / s_pow)?;
    let lambda = s_pow * std::f64::consts::LN_2;
    let m = m_override.unwrap_or_else(|| default_support(lambda));
    contract!(m >= 1, "build_hard_params: empty support");
    let p = lambda / m as f64;
    contract!(
        p <= 1.0,
        "build_hard_params: p = Lambda/M = {p} exceeds 1; raise M"
    );
    let mut rng = seed.child(0).stream();
    let mut vectors = vec![0.0; m * n];
    for row in vectors.chunks_exact_mut(n) {
        fill_sphere(row, 1.0, &mut rng);
    }
    Ok(HardDistParams {
        n,
        s,
        gamma,
        d,
        lambda,
        m,
        p,
        seed,
        vectors,
    })
}

/// A draw from the discrete hard distribution: the relevant subset of the
/// support. Empty active set means the constant-1 function.
#[derive(Debug, Clone)]
pub struct SlabConjunctionSample {
    active: Vec<u32>,
    bits: Vec<u64>,
}

impl SlabConjunctionSample {
    pub fn active(&self) -> &[u32] {
        &self.active
    }

    #[inline]
    pub fn is_active(&self, i: u32) -> bool {
        self.bits[(i / 64) as usize] & (1u64 << (i % 64)) != 0
    }

    /// f(x): conjunction of the active slabs.
    pub fn evaluate(&self, params: &HardDistParams, x: &[f64]) -> bool {
        self.active
            .iter()
            .all(|&i| dot(params.support_vector(i as usize), x).abs() <= params.d)
    }
}

/// Each support vector goes active independently with probability p.
pub fn sample_actual(params: &HardDistParams, rng: &mut RngStream) -> SlabConjunctionSample {
    let mut active = Vec::new();
    let mut bits = vec![0u64; (params.m + 63) / 64];
    for i in 0..params.m {
        if rng.uniform() < params.p {
            active.push(i as u32);
            bits[i / 64] |= 1u64 << (i % 64);
        }
    }
    SlabConjunctionSample { active, bits }
}

/// A draw from the continuous (Poisson point process) distribution:
/// Poisson(Lambda) fresh uniform normals.
#[derive(Debug, Clone)]
pub struct IdealSample {
    pub d: f64,
    pub normals: Vec<Vec<f64>>,
}

impl IdealSample {
    pub fn evaluate(&self, x: &[f64]) -> bool {
        self.normals.iter().all(|z| dot(z, x).abs() <= self.d)
    }
}

pub fn sample_ideal(n: usize, d: f64, lambda: f64, rng: &mut RngStream) -> Result<IdealSample> {
    contract!(n >= 2, "sample_ideal: n must be >= 2");
    contract!(d >= 0.0 && lambda >= 0.0, "sample_ideal: bad parameters");
    let count = if lambda == 0.0 {
        0usize
    } else {
        let poi = rand_distr::Poisson::new(lambda)
            .map_err(|e| Error::Contract(format!("Poisson({lambda}): {e}")))?;
        poi.sample(rng) as usize
    };
    let normals = (0..count).map(|_| sample_sphere(n, 1.0, rng)).collect();
    Ok(IdealSample { d, normals })
}

/// Exact membership probability under the ideal distribution:
/// e^{-Lambda mu} with mu the two-sided cap mass at d / |x|. Depends on x
/// only through its norm.
pub fn ideal_membership_prob(n: usize, d: f64, lambda: f64, norm_x: f64) -> Result<f64> {
    contract!(norm_x > 0.0, "ideal_membership_prob: norm must be positive");
    let alpha = (d / norm_x).min(1.0);
    let mu = 2.0 * cap_mass(n, alpha)?;
    Ok((-lambda * mu).exp())
}

/// Exact membership probability under the discrete distribution:
/// (1-p)^{#violated support slabs}.
pub fn actual_membership_prob(params: &HardDistParams, x: &[f64]) -> f64 {
    (1.0 - params.p).powi(params.violation_count(x) as i32)
}

/// Per-slab knowledge entry of the augmented oracle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Cell {
    Unset,
    Zero,
    One,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Answer {
    Positive,
    RevealedIndex(u32),
}

#[derive(Debug, Clone)]
pub struct QueryRecord {
    pub x: Vec<f64>,
    pub answer: Answer,
}

/// Knowledge state of the augmented oracle: entries only ever move
/// Unset -> Zero or Unset -> One.
#[derive(Debug, Clone)]
pub struct OracleState {
    cells: Vec<Cell>,
    queries_used: u64,
    cap: u64,
    ones: u64,
    zeros: u64,
    transcript: Vec<QueryRecord>,
}

impl OracleState {
    pub fn new(m: usize, cap: u64) -> Self {
        OracleState {
            cells: vec![Cell::Unset; m],
            queries_used: 0,
            cap,
            ones: 0,
            zeros: 0,
            transcript: Vec::new(),
        }
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn queries_used(&self) -> u64 {
        self.queries_used
    }

    pub fn ones(&self) -> u64 {
        self.ones
    }

    pub fn zeros(&self) -> u64 {
        self.zeros
    }

    pub fn transcript(&self) -> &[QueryRecord] {
        &self.transcript
    }
}

/// One query against the augmented oracle: walk the violated support slabs
/// in the fixed ordering, skip known-irrelevant entries, reveal the first
/// relevant one, and resolve unknowns against the target on the way.
pub fn augmented_query(
    state: &mut OracleState,
    f: &SlabConjunctionSample,
    x: &[f64],
    params: &HardDistParams,
) -> Result<Answer> {
    if x.len() != params.n {
        return Err(Error::DimensionMismatch {
            expected: params.n,
            got: x.len(),
        });
    }
    if state.queries_used >= state.cap {
        return Err(Error::QueryCapExceeded {
            used: state.queries_used,
            cap: state.cap,
        });
    }
    let mut answer = Answer::Positive;
    for &i in &params.violations(x) {
        match state.cells[i as usize] {
            Cell::Zero => continue,
            Cell::One => {
                answer = Answer::RevealedIndex(i);
                break;
            }
            Cell::Unset => {
                if f.is_active(i) {
                    state.cells[i as usize] = Cell::One;
                    state.ones += 1;
                    answer = Answer::RevealedIndex(i);
                    break;
                } else {
                    state.cells[i as usize] = Cell::Zero;
                    state.zeros += 1;
                }
            }
        }
    }
    state.queries_used += 1;
    state.transcript.push(QueryRecord {
        x: x.to_vec(),
        answer: answer.clone(),
    });
    Ok(answer)
}

/// Query-generation strategy for the adversary game.
#[derive(Clone)]
pub enum Strategy {
    /// Fresh standard Gaussian queries.
    GaussianQueries,
    /// Norm-targeted queries uniform on the radius-sqrt(n) sphere.
    SphereQueries,
    /// User-supplied callback: (query index, oracle state so far, rng).
    Custom {
        name: String,
        query: Arc<dyn Fn(u64, &OracleState, &mut RngStream) -> Vec<f64> + Send + Sync>,
    },
}

impl Strategy {
    pub fn name(&self) -> String {
        match self {
            Strategy::GaussianQueries => "random-queries".into(),
            Strategy::SphereQueries => "ball-queries".into(),
            Strategy::Custom { name, .. } => name.clone(),
        }
    }

    fn next(&self, q: u64, state: &OracleState, n: usize, rng: &mut RngStream) -> Vec<f64> {
        match self {
            Strategy::GaussianQueries => {
                let mut x = vec![0.0; n];
                fill_gaussian(&mut x, rng);
                x
            }
            Strategy::SphereQueries => sample_sphere(n, (n as f64).sqrt(), rng),
            Strategy::Custom { query, .. } => query(q, state, rng),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TrialStats {
    pub ones: u64,
    pub zeros: u64,
    pub error_rate: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct GameReport {
    pub strategy: String,
    pub s_queries: u64,
    pub trials: u64,
    pub eval_samples: u64,
    /// Mean prediction error of the exact-posterior predictor; NaN when
    /// eval_samples = 0.
    pub mean_error: f64,
    pub std_error: f64,
    pub max_ones: u64,
    pub ones_within_query_count: bool,
    /// 2s/p, the high-probability bound on revealed zeros.
    pub zeros_bound: f64,
    pub frac_zeros_within_bound: f64,
    pub per_trial: Vec<TrialStats>,
}

/// Play the game: draw a target, spend the query budget through the
/// augmented oracle, then predict on fresh Gaussians with the exact
/// posterior rule (forced negative when a revealed slab is violated, else
/// (1-p)^{|S(x) minus known-irrelevant|} thresholded at 1/2).
pub fn run_adversary_game(
    params: &HardDistParams,
    strategy: &Strategy,
    s_queries: u64,
    trials: u64,
    eval_samples: u64,
    seed: StreamId,
) -> Result<GameReport> {
    contract!(trials >= 1, "run_adversary_game: need at least one trial");
    let n = params.n;
    let stats: Vec<TrialStats> = (0..trials)
        .collect::<Vec<u64>>()
        .into_par_iter()
        .map(|t| {
            let mut f_rng = seed.child(3 * t).stream();
            let mut q_rng = seed.child(3 * t + 1).stream();
            let mut e_rng = seed.child(3 * t + 2).stream();
            let f = sample_actual(params, &mut f_rng);
            let mut state = OracleState::new(params.m, s_queries);
            for q in 0..s_queries {
                let x = strategy.next(q, &state, n, &mut q_rng);
                augmented_query(&mut state, &f, &x, params)
                    .expect("query cap respected by construction");
            }
            let mut errors = 0u64;
            let mut x = vec![0.0; n];
            for _ in 0..eval_samples {
                fill_gaussian(&mut x, &mut e_rng);
                let violated = params.violations(&x);
                let hit_known_relevant = violated
                    .iter()
                    .any(|&i| state.cells[i as usize] == Cell::One);
                let posterior = if hit_known_relevant {
                    0.0
                } else {
                    let undetermined = violated
                        .iter()
                        .filter(|&&i| state.cells[i as usize] != Cell::Zero)
                        .count();
                    (1.0 - params.p).powi(undetermined as i32)
                };
                let prediction = posterior >= 0.5;
                let truth = violated.iter().all(|&i| !f.is_active(i));
                if prediction != truth {
                    errors += 1;
                }
            }
            TrialStats {
                ones: state.ones,
                zeros: state.zeros,
                error_rate: if eval_samples == 0 {
                    f64::NAN
                } else {
                    errors as f64 / eval_samples as f64
                },
            }
        })
        .collect();

    let zeros_bound = 2.0 * s_queries as f64 / params.p;
    let max_ones = stats.iter().map(|s| s.ones).max().unwrap_or(0);
    let within = stats
        .iter()
        .filter(|s| (s.zeros as f64) <= zeros_bound)
        .count() as f64
        / trials as f64;
    let (mean_error, std_error) = if eval_samples == 0 {
        (f64::NAN, f64::NAN)
    } else {
        let mean = stats.iter().map(|s| s.error_rate).sum::<f64>() / trials as f64;
        let var = stats
            .iter()
            .map(|s| (s.error_rate - mean).powi(2))
            .sum::<f64>()
            / trials as f64;
        (mean, (var / trials as f64).sqrt())
    };
    Ok(GameReport {
        strategy: strategy.name(),
        s_queries,
        trials,
        eval_samples,
        mean_error,
        std_error,
        max_ones,
        ones_within_query_count: stats.iter().all(|s| s.ones <= s_queries),
        zeros_bound,
        frac_zeros_within_bound: within,
        per_trial: stats,
    })
}

/// Direct estimate of the zero-query Bayes-optimal error
/// E[min(D(x), 1-D(x))] over Gaussian x.
pub fn zero_query_bayes_error(
    params: &HardDistParams,
    plan: SamplePlan,
    seed: StreamId,
) -> McEstimate {
    let n = params.n;
    mc_mean(plan, seed, |rng| {
        let mut x = vec![0.0; n];
        fill_gaussian(&mut x, rng);
        let d = actual_membership_prob(params, &x);
        d.min(1.0 - d)
    })
}

/// Exact total variation distance between one independent-Bernoulli draw
/// of an M-element support (inclusion probability Lambda/M) and the
/// Poissonized version (Poisson(Lambda) uniform draws with replacement).
/// Per-element multiplicities above 4 fold into a single tail bucket; the
/// Bernoulli side vanishes there, so the fold is exact.
pub fn tv_poisson_vs_bernoulli(m: usize, lambda: f64) -> Result<f64> {
    contract!(m >= 1 && m <= 12, "tv_poisson_vs_bernoulli: m must lie in 1..=12");
    contract!(lambda >= 0.0, "tv_poisson_vs_bernoulli: lambda must be >= 0");
    if lambda == 0.0 {
        return Ok(0.0);
    }
    let p = lambda / m as f64;
    contract!(p <= 1.0, "tv_poisson_vs_bernoulli: lambda/m exceeds 1");
    let bern = [1.0 - p, p, 0.0, 0.0, 0.0];
    let e = (-p).exp();
    let poi = {
        let p0 = e;
        let p1 = p * e;
        let p2 = p * p / 2.0 * e;
        let p3 = p * p * p / 6.0 * e;
        [p0, p1, p2, p3, (1.0 - p0 - p1 - p2 - p3).max(0.0)]
    };

    fn rec(depth: usize, m: usize, bern: &[f64; 5], poi: &[f64; 5], bp: f64, pp: f64) -> f64 {
        if bp == 0.0 {
            // Bernoulli mass vanished: remaining Poisson subtree mass sums to pp
            return pp;
        }
        if depth == m {
            return (bp - pp).abs();
        }
        (0..5)
            .map(|k| rec(depth + 1, m, bern, poi, bp * bern[k], pp * poi[k]))
            .sum()
    }

    Ok(0.5 * rec(0, m, &bern, &poi, 1.0, 1.0))
}

/// Tail bound for sums of s independent Geom(p) variables at lambda times
/// the mean: e^{-s (lambda - 1 - ln lambda)}.
pub fn geometric_sum_tail_bound(lambda: f64, s: u64) -> f64 {
    (-(s as f64) * (lambda - 1.0 - lambda.ln())).exp()
}

/// Disagreement probability of two slabs of common half-width d under the
/// Gaussian measure; compared against 5 |z-z'| sqrt(ln(1/|z-z'|)).
pub fn slab_symmetric_difference(
    z: &[f64],
    z_prime: &[f64],
    d: f64,
    plan: SamplePlan,
    seed: StreamId,
) -> Result<DensityEstimate> {
    contract!(z.len() == z_prime.len(), "slab_symmetric_difference: dims differ");
    contract!(d > 0.0, "slab_symmetric_difference: d must be positive");
    contract!(
        (norm(z) - 1.0).abs() <= 1e-9 && (norm(z_prime) - 1.0).abs() <= 1e-9,
        "slab_symmetric_difference: normals must be unit"
    );
    let diff: f64 = z
        .iter()
        .zip(z_prime)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt();
    contract!(diff <= 1.0 / 3.0, "slab_symmetric_difference: |z - z'| must be <= 1/3");
    let n = z.len();
    let hits = crate::density::count_hits(plan, |b, size| {
        let mut rng = seed.child(b).stream();
        let mut x = vec![0.0; n];
        let mut hits = 0u64;
        for _ in 0..size {
            fill_gaussian(&mut x, &mut rng);
            let in_z = dot(z, &x).abs() <= d;
            let in_zp = dot(z_prime, &x).abs() <= d;
            if in_z != in_zp {
                hits += 1;
            }
        }
        hits
    });
    Ok(DensityEstimate::from_hits(hits, plan.total, seed))
}
