//! Hermite analysis over Gaussian space: basis evaluation, low-level weight
//! estimation from a shared sample panel, noise stability, the exact cube
//! closed form, and the r*/ball-correlation machinery.
//!
//! All weights are reported in the +/-1 convention; the 0/1-convention cube
//! value is reported alongside (conversion multiplies nonconstant
//! coefficients by 2, weights by 4).

use crate::bodies::Membership;
use crate::density::{fold_batches, gaussian_volume, mc_mean, shell_density, DensityEstimate, McEstimate};
use crate::error::{contract, Result};
use crate::rng::{SamplePlan, StreamId};
use crate::sampling::{chi_quantile, chi_sq_partial_mean, fill_gaussian, normal_abs_cdf};
use serde::Serialize;

/// Orthonormal (probabilists') Hermite polynomial h_d(x) by the three-term
/// recurrence; h_0 = 1, h_1(x) = x, h_2(x) = (x^2 - 1)/sqrt(2).
pub fn hermite_univariate(d: u32, x: f64) -> f64 {
    match d {
        0 => 1.0,
        1 => x,
        _ => {
            let mut prev = 1.0;
            let mut cur = x;
            for k in 1..d {
                let next = (x * cur - (k as f64).sqrt() * prev) / ((k + 1) as f64).sqrt();
                prev = cur;
                cur = next;
            }
            cur
        }
    }
}

/// Multi-index into the tensor Hermite basis: distinct coordinates with
/// degrees >= 1; the empty index is the constant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HermiteIndex {
    entries: Vec<(usize, u32)>,
}

impl HermiteIndex {
    pub fn constant() -> Self {
        HermiteIndex { entries: Vec::new() }
    }

    pub fn new(mut entries: Vec<(usize, u32)>) -> Result<Self> {
        entries.sort_by_key(|&(c, _)| c);
        contract!(
            entries.windows(2).all(|w| w[0].0 != w[1].0),
            "HermiteIndex: coordinates must be distinct"
        );
        contract!(
            entries.iter().all(|&(_, d)| d >= 1),
            "HermiteIndex: degrees must be >= 1"
        );
        Ok(HermiteIndex { entries })
    }

    pub fn single(coord: usize, degree: u32) -> Result<Self> {
        HermiteIndex::new(vec![(coord, degree)])
    }

    pub fn total_degree(&self) -> u32 {
        self.entries.iter().map(|&(_, d)| d).sum()
    }

    pub fn max_coord(&self) -> Option<usize> {
        self.entries.last().map(|&(c, _)| c)
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.entries
            .iter()
            .map(|&(c, d)| hermite_univariate(d, x[c]))
            .product()
    }
}

/// Monte Carlo estimate of the Hermite coefficient <f, H_idx> over
/// N(0,1)^n. Practical cap: total degree <= 4.
pub fn hermite_coeff<F>(
    f: F,
    n: usize,
    idx: &HermiteIndex,
    plan: SamplePlan,
    seed: StreamId,
) -> Result<McEstimate>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    contract!(idx.total_degree() <= 4, "hermite_coeff: degree cap is 4");
    if let Some(c) = idx.max_coord() {
        contract!(c < n, "hermite_coeff: index coordinate out of range");
    }
    let partials = fold_batches(plan, |b, size| {
        let mut rng = seed.child(b).stream();
        let mut x = vec![0.0; n];
        let (mut s, mut s2) = (0.0f64, 0.0f64);
        for _ in 0..size {
            fill_gaussian(&mut x, &mut rng);
            let v = f(&x) * idx.eval(&x);
            s += v;
            s2 += v * v;
        }
        (s, s2)
    });
    let (sum, sumsq) = partials
        .into_iter()
        .fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
    let total = plan.total as f64;
    let mean = sum / total;
    let var = (sumsq / total - mean * mean).max(0.0);
    Ok(McEstimate {
        mean,
        std_error: (var / total).sqrt(),
        samples: plan.total,
        seed,
    })
}

/// Estimated Hermite weight at levels 0, 1, 2 of a +/-1-valued body
/// indicator. `w0` is derived exactly from the volume estimate; `w1`, `w2`
/// sum squared coefficient estimates with the squared-estimator bias
/// subtracted, so entries may dip slightly negative within noise.
#[derive(Debug, Clone, Serialize)]
pub struct WeightReport {
    pub n: usize,
    pub samples: u64,
    pub vol: f64,
    pub w0: f64,
    pub w1: f64,
    pub w2: f64,
    pub se0: f64,
    pub se1: f64,
    pub se2: f64,
    pub seed: StreamId,
}

impl WeightReport {
    pub fn total(&self) -> f64 {
        self.w0 + self.w1 + self.w2
    }

    pub fn total_std_error(&self) -> f64 {
        (self.se0 * self.se0 + self.se1 * self.se1 + self.se2 * self.se2).sqrt()
    }
}

struct PanelSums {
    hits: u64,
    s1: Vec<f64>,
    q1: Vec<f64>,
    sd: Vec<f64>,
    qd: Vec<f64>,
    sp: Vec<f64>,
    qp: Vec<f64>,
}

impl PanelSums {
    fn new(n: usize) -> Self {
        let pairs = n * (n - 1) / 2;
        PanelSums {
            hits: 0,
            s1: vec![0.0; n],
            q1: vec![0.0; n],
            sd: vec![0.0; n],
            qd: vec![0.0; n],
            sp: vec![0.0; pairs],
            qp: vec![0.0; pairs],
        }
    }

    fn merge(&mut self, other: &PanelSums) {
        self.hits += other.hits;
        let add = |a: &mut Vec<f64>, b: &Vec<f64>| {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
        };
        add(&mut self.s1, &other.s1);
        add(&mut self.q1, &other.q1);
        add(&mut self.sd, &other.sd);
        add(&mut self.qd, &other.qd);
        add(&mut self.sp, &other.sp);
        add(&mut self.qp, &other.qp);
    }
}

/// Sum of bias-corrected squared coefficient estimates, with a propagated
/// standard error.
fn squared_sum(sums: &[f64], sumsqs: &[f64], total: f64) -> (f64, f64) {
    let mut w = 0.0;
    let mut var = 0.0;
    for (&s, &q) in sums.iter().zip(sumsqs) {
        let c = s / total;
        let sample_var = (q / total - c * c).max(0.0);
        let var_c = sample_var / total;
        w += c * c - var_c;
        var += 4.0 * c * c * var_c + 2.0 * var_c * var_c;
    }
    (w, var.sqrt())
}

/// Estimate W^{=0}, W^{=1}, W^{=2} of a body from one shared Gaussian
/// sample panel. The O(n^2) degree-2 coefficients all read the same panel.
pub fn low_level_weight<M: Membership>(
    body: &M,
    plan: SamplePlan,
    seed: StreamId,
) -> Result<WeightReport> {
    let n = body.dim();
    contract!(
        n <= 512,
        "low_level_weight: n capped at 512; use noise-stability proxies beyond"
    );
    contract!(n >= 1, "low_level_weight: empty dimension");
    contract!(plan.total >= 2, "low_level_weight: need samples");

    let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
    let partials = fold_batches(plan, |b, size| {
        let mut rng = seed.child(b).stream();
        let mut acc = PanelSums::new(n);
        let mut g = vec![0.0; n];
        let mut g2 = vec![0.0; n];
        for _ in 0..size {
            fill_gaussian(&mut g, &mut rng);
            let y = body.pm1(&g);
            if y > 0.0 {
                acc.hits += 1;
            }
            for i in 0..n {
                g2[i] = g[i] * g[i];
                acc.s1[i] += y * g[i];
                acc.q1[i] += g2[i];
                let h2 = (g2[i] - 1.0) * inv_sqrt2;
                acc.sd[i] += y * h2;
                acc.qd[i] += h2 * h2;
            }
            let mut base = 0;
            for i in 0..n - 1 {
                let row = n - 1 - i;
                let a = y * g[i];
                let gi2 = g2[i];
                let (sp_row, qp_row) = (
                    &mut acc.sp[base..base + row],
                    &mut acc.qp[base..base + row],
                );
                let gj = &g[i + 1..];
                let gj2 = &g2[i + 1..];
                for k in 0..row {
                    sp_row[k] += a * gj[k];
                    qp_row[k] += gi2 * gj2[k];
                }
                base += row;
            }
        }
        acc
    });

    let mut acc = PanelSums::new(n);
    for p in &partials {
        acc.merge(p);
    }
    let total = plan.total as f64;
    let vol = acc.hits as f64 / total;
    let se_vol = (vol * (1.0 - vol) / total).sqrt();
    let w0 = 4.0 * (vol - 0.5) * (vol - 0.5);
    let se0 = 8.0 * (vol - 0.5).abs() * se_vol + 4.0 * se_vol * se_vol;
    let (w1, se1) = squared_sum(&acc.s1, &acc.q1, total);
    let (wd, vard) = squared_sum(&acc.sd, &acc.qd, total);
    let (wp, varp) = squared_sum(&acc.sp, &acc.qp, total);
    Ok(WeightReport {
        n,
        samples: plan.total,
        vol,
        w0,
        w1,
        w2: wd + wp,
        se0,
        se1,
        se2: (vard * vard + varp * varp).sqrt(),
        seed,
    })
}

/// Exact low-level weight of the half-volume origin-centered cube.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct CubeLowWeight {
    pub n: usize,
    /// Per-coordinate half-width solving Pr[|g| <= c] = (1/2)^{1/n}.
    pub c: f64,
    /// Degree-0 coefficient of the 1-D interval indicator.
    pub a0: f64,
    /// Degree-2 coefficient of the 1-D interval indicator.
    pub a2: f64,
    /// W^{<=2} of the 0/1-valued cube: n (a0^{n-1} a2)^2.
    pub w_le2_01: f64,
    /// W^{<=2} of the +/-1-valued cube: 4x the 0/1 value (volume is exactly
    /// 1/2, so the level-0 weight vanishes).
    pub w_le2_pm1: f64,
}

/// Closed form for the half-volume cube. The degree-2 coefficient of the
/// interval indicator is a2 = -c e^{-c^2/2} / sqrt(pi) in the orthonormal
/// normalization (pinned once against the Monte Carlo oracle in tests).
pub fn cube_low_weight_exact(n: usize) -> Result<CubeLowWeight> {
    contract!(n >= 1, "cube_low_weight_exact: n must be >= 1");
    let a0 = 0.5f64.powf(1.0 / n as f64);
    // bisection for c with Pr[|g| <= c] = a0
    let (mut lo, mut hi) = (0.0f64, 50.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if normal_abs_cdf(mid) < a0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let c = 0.5 * (lo + hi);
    let a2 = -c * (-0.5 * c * c).exp() / std::f64::consts::PI.sqrt();
    let w01 = n as f64 * (a0.powi(n as i32 - 1) * a2).powi(2);
    Ok(CubeLowWeight {
        n,
        c,
        a0,
        a2,
        w_le2_01: w01,
        w_le2_pm1: 4.0 * w01,
    })
}

/// The half-width c(n) realizing the half-volume cube.
pub fn half_volume_cube_width(n: usize) -> Result<f64> {
    Ok(cube_low_weight_exact(n)?.c)
}

/// Monte Carlo noise stability E[f(g) f(e^{-t} g + sqrt(1-e^{-2t}) g')].
pub fn noise_stability<F>(
    f: F,
    n: usize,
    t: f64,
    plan: SamplePlan,
    seed: StreamId,
) -> Result<McEstimate>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    contract!(t >= 0.0, "noise_stability: t must be >= 0");
    contract!(plan.total >= 1, "noise_stability: need samples");
    let rho = (-t).exp();
    let comp = (1.0 - rho * rho).max(0.0).sqrt();
    let partials = fold_batches(plan, |b, size| {
        let mut rng = seed.child(b).stream();
        let mut g = vec![0.0; n];
        let mut y = vec![0.0; n];
        let (mut s, mut s2) = (0.0f64, 0.0f64);
        for _ in 0..size {
            fill_gaussian(&mut g, &mut rng);
            for (yi, gi) in y.iter_mut().zip(&g) {
                *yi = rho * gi + comp * rng.normal();
            }
            let v = f(&g) * f(&y);
            s += v;
            s2 += v * v;
        }
        (s, s2)
    });
    let (sum, sumsq) = partials
        .into_iter()
        .fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
    let total = plan.total as f64;
    let mean = sum / total;
    let var = (sumsq / total - mean * mean).max(0.0);
    Ok(McEstimate {
        mean,
        std_error: (var / total).sqrt(),
        samples: plan.total,
        seed,
    })
}

/// Product of coordinate signs (parity of sign pattern).
pub fn sign_product(x: &[f64]) -> f64 {
    x.iter()
        .map(|&v| if v >= 0.0 { 1.0 } else { -1.0 })
        .product()
}

/// Closed-form noise stability of the T-fold product of coordinate signs,
/// T = round(n^{1/4}): Sheppard's value to the T-th power.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Psi1Stability {
    pub value: f64,
    pub block: u32,
    /// False when n is not an exact fourth power and T was rounded.
    pub exact_fourth_power: bool,
}

pub fn psi1_stability_exact(n: usize, t: f64) -> Result<Psi1Stability> {
    contract!(n >= 1, "psi1_stability_exact: n must be >= 1");
    contract!(t >= 0.0, "psi1_stability_exact: t must be >= 0");
    let block = (n as f64).powf(0.25).round().max(1.0) as u32;
    let exact = (block as usize).pow(4) == n;
    let sheppard = 2.0 / std::f64::consts::PI * (-t).exp().asin();
    Ok(Psi1Stability {
        value: sheppard.powi(block as i32),
        block,
        exact_fourth_power: exact,
    })
}

/// Options for the r* search.
#[derive(Debug, Clone, Copy)]
pub struct RStarOptions {
    pub base_samples: u64,
    pub max_samples: u64,
    pub max_iters: u32,
}

impl Default for RStarOptions {
    fn default() -> Self {
        RStarOptions {
            base_samples: 4_000,
            max_samples: 64_000,
            max_iters: 36,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct RStarReport {
    pub r_star: f64,
    pub nu_star: f64,
    /// Set when beta is constant across the bracket within noise.
    pub flat: bool,
}

/// Bisection on nu for the root of beta(nu) - vol, with adaptive sample
/// counts. beta is monotone in nu for origin-containing convex bodies.
pub fn find_r_star<M: Membership>(
    body: &M,
    vol: f64,
    tol: f64,
    opts: RStarOptions,
    seed: StreamId,
) -> Result<RStarReport> {
    contract!(vol > 0.0 && vol < 1.0, "find_r_star: vol must lie in (0,1)");
    contract!(tol > 0.0, "find_r_star: tol must be positive");
    let n = body.dim();

    // adaptive estimate of beta(nu) - vol; escalates samples until the sign
    // resolves or the cap is hit, returning (estimate, resolved)
    let eval = |nu: f64, key: u64| -> Result<(f64, bool)> {
        let r = chi_quantile(n, nu)?;
        let mut samples = opts.base_samples;
        let mut attempt = 0u64;
        loop {
            let est = shell_density(
                body,
                r,
                SamplePlan::with_total(samples),
                seed.child(key).child(attempt),
            )?;
            let gap = est.mean - vol;
            if gap.abs() > 3.0 * est.std_error || samples >= opts.max_samples {
                return Ok((est.mean, gap.abs() > 3.0 * est.std_error));
            }
            samples = (samples * 4).min(opts.max_samples);
            attempt += 1;
        }
    };

    let (mut lo, mut hi) = (1.0 / 128.0, 127.0 / 128.0);
    let (mut beta_lo, lo_resolved) = eval(lo, 0)?;
    let (mut beta_hi, hi_resolved) = eval(hi, 1)?;
    if !lo_resolved && !hi_resolved && (beta_lo - beta_hi).abs() < tol {
        return Ok(RStarReport {
            r_star: chi_quantile(n, 0.5 * (lo + hi))?,
            nu_star: 0.5 * (lo + hi),
            flat: true,
        });
    }

    let mut iter = 0u32;
    while iter < opts.max_iters && beta_lo - beta_hi >= tol && hi - lo > 1e-12 {
        let mid = 0.5 * (lo + hi);
        let (beta_mid, resolved) = eval(mid, 2 + iter as u64)?;
        if !resolved {
            // beta(mid) is indistinguishable from vol: mid is the root
            return Ok(RStarReport {
                r_star: chi_quantile(n, mid)?,
                nu_star: mid,
                flat: false,
            });
        }
        if beta_mid > vol {
            lo = mid;
            beta_lo = beta_mid;
        } else {
            hi = mid;
            beta_hi = beta_mid;
        }
        iter += 1;
    }
    let nu_star = 0.5 * (lo + hi);
    Ok(RStarReport {
        r_star: chi_quantile(n, nu_star)?,
        nu_star,
        flat: false,
    })
}

/// Ball correlation E[(K(g) - vol)(r*^2 - |g|^2)] with K in the 0/1
/// convention, plus the implied level-2 weight lower bound.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct BallCorrelation {
    pub estimate: McEstimate,
    pub vol: DensityEstimate,
    /// estimate^2 / (2n); Var of the radial polynomial is exactly 2n.
    pub weight_bound: f64,
}

pub fn ball_correlation<M: Membership>(
    body: &M,
    r_star: f64,
    plan: SamplePlan,
    seed: StreamId,
) -> Result<BallCorrelation> {
    contract!(r_star > 0.0, "ball_correlation: r_star must be positive");
    let n = body.dim();
    let vol = gaussian_volume(body, plan, seed.child(0))?;
    let v = vol.mean;
    let r2 = r_star * r_star;
    let raw = mc_mean(plan, seed.child(1), |rng| {
        let mut g = vec![0.0; n];
        fill_gaussian(&mut g, rng);
        let norm2: f64 = g.iter().map(|x| x * x).sum();
        let k = if body.contains_point(&g) { 1.0 } else { 0.0 };
        (k - v) * (r2 - norm2)
    });
    // fold the volume-estimate uncertainty through E[r*^2 - |g|^2] = r*^2 - n
    let vol_term = (r2 - n as f64).abs() * vol.std_error;
    let estimate = McEstimate {
        std_error: (raw.std_error * raw.std_error + vol_term * vol_term).sqrt(),
        ..raw
    };
    Ok(BallCorrelation {
        weight_bound: estimate.mean * estimate.mean / (2.0 * n as f64),
        estimate,
        vol,
    })
}

/// Quantile-grid route to the same correlation: sum over grid cells of
/// (beta(nu_i) - vol) times the exact cell integral of r*^2 - r(nu)^2.
pub fn ball_correlation_grid<M: Membership>(
    body: &M,
    vol: &DensityEstimate,
    r_star: f64,
    cells: usize,
    samples_per_cell: u64,
    seed: StreamId,
) -> Result<McEstimate> {
    contract!(cells >= 2, "ball_correlation_grid: need at least 2 cells");
    contract!(r_star > 0.0, "ball_correlation_grid: r_star must be positive");
    let n = body.dim();
    let r2 = r_star * r_star;
    let g = cells as f64;
    let mut mean = 0.0;
    let mut var = 0.0;
    let mut prev_pm = 0.0;
    for i in 0..cells {
        let nu_hi = (i as f64 + 1.0) / g;
        let pm_hi = if i == cells - 1 {
            n as f64
        } else {
            chi_sq_partial_mean(n, nu_hi)?
        };
        // exact integral of (r*^2 - r(nu)^2) over the cell
        let cell_integral = r2 / g - (pm_hi - prev_pm);
        prev_pm = pm_hi;
        let nu_c = (i as f64 + 0.5) / g;
        let r_c = chi_quantile(n, nu_c)?;
        let beta = shell_density(
            body,
            r_c,
            SamplePlan::with_total(samples_per_cell),
            seed.child(i as u64),
        )?;
        mean += (beta.mean - vol.mean) * cell_integral;
        var += (cell_integral * beta.std_error).powi(2);
    }
    // volume error enters through sum of cell integrals = r*^2 - n
    let vol_term = (r2 - n as f64).abs() * vol.std_error;
    Ok(McEstimate {
        mean,
        std_error: (var + vol_term * vol_term).sqrt(),
        samples: cells as u64 * samples_per_cell,
        seed,
    })
}
