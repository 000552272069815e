//! Randomness primitives and the deterministic special functions they rest
//! on: Gaussian vectors, uniform sphere points, Haar-random 2-frames, chi
//! quantiles, and spherical cap measures.

pub mod caps;
pub mod chi;
pub mod special;

pub use caps::{cap_mass, cap_mass_with_tol, cap_ratio_check, solve_slab_width};
pub use chi::{chi_cdf, chi_quantile, chi_sq_partial_mean, ChiQuantileTable};
pub use special::{gamma_p, gamma_q, ln_gamma, normal_abs_cdf, normal_cdf, normal_quantile};

use crate::error::{contract, Result};
use crate::rng::RngStream;

/// An i.i.d. standard Gaussian vector in R^n.
pub fn sample_gaussian(n: usize, rng: &mut RngStream) -> Vec<f64> {
    let mut x = Vec::with_capacity(n);
    for _ in 0..n {
        x.push(rng.normal());
    }
    x
}

/// Fill `x` with i.i.d. standard normals (allocation-free inner loops).
#[inline]
pub fn fill_gaussian(x: &mut [f64], rng: &mut RngStream) {
    for xi in x.iter_mut() {
        *xi = rng.normal();
    }
}

/// Uniform point on the radius-r sphere, by Gaussian normalization.
pub fn sample_sphere(n: usize, r: f64, rng: &mut RngStream) -> Vec<f64> {
    let mut x = vec![0.0; n];
    fill_sphere(&mut x, r, rng);
    x
}

#[inline]
pub fn fill_sphere(x: &mut [f64], r: f64, rng: &mut RngStream) {
    debug_assert!(r > 0.0);
    loop {
        fill_gaussian(x, rng);
        let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm > 0.0 {
            let scale = r / norm;
            for v in x.iter_mut() {
                *v *= scale;
            }
            return;
        }
        // all-zero draw has probability 0; resample
    }
}

/// An orthonormal 2-frame in R^n spanning a Haar-random plane.
#[derive(Debug, Clone)]
pub struct Plane2D {
    e1: Vec<f64>,
    e2: Vec<f64>,
}

impl Plane2D {
    /// Build from two explicit vectors by Gram-Schmidt. Fails on (near-)
    /// collinear input.
    pub fn from_vectors(v1: &[f64], v2: &[f64]) -> Result<Self> {
        contract!(v1.len() == v2.len(), "plane basis vectors differ in length");
        contract!(v1.len() >= 2, "Plane2D needs ambient dimension >= 2");
        let n1 = norm(v1);
        contract!(n1 > 0.0, "first basis vector is zero");
        let e1: Vec<f64> = v1.iter().map(|x| x / n1).collect();
        let proj = dot(v2, &e1);
        let mut w: Vec<f64> = v2.iter().zip(&e1).map(|(x, e)| x - proj * e).collect();
        let nw = norm(&w);
        let n2 = norm(v2);
        contract!(
            n2 > 0.0 && nw / n2 > 1e-8,
            "basis vectors are numerically collinear"
        );
        for x in w.iter_mut() {
            *x /= nw;
        }
        Ok(Plane2D { e1, e2: w })
    }

    pub fn dim(&self) -> usize {
        self.e1.len()
    }

    pub fn e1(&self) -> &[f64] {
        &self.e1
    }

    pub fn e2(&self) -> &[f64] {
        &self.e2
    }

    /// Embed plane coordinates (a, b) into ambient space: a e1 + b e2.
    pub fn embed(&self, a: f64, b: f64) -> Vec<f64> {
        self.e1
            .iter()
            .zip(&self.e2)
            .map(|(u, v)| a * u + b * v)
            .collect()
    }

    /// In-plane coordinates of the projection of `v`.
    pub fn project(&self, v: &[f64]) -> (f64, f64) {
        (dot(v, &self.e1), dot(v, &self.e2))
    }

    /// Rotate the frame by `theta` within the same plane (test hook for
    /// basis-invariance checks).
    pub fn rotated(&self, theta: f64) -> Plane2D {
        let (c, s) = (theta.cos(), theta.sin());
        let e1 = self
            .e1
            .iter()
            .zip(&self.e2)
            .map(|(u, v)| c * u + s * v)
            .collect();
        let e2 = self
            .e1
            .iter()
            .zip(&self.e2)
            .map(|(u, v)| -s * u + c * v)
            .collect();
        Plane2D { e1, e2 }
    }
}

/// Haar-random 2-dimensional subspace, as an orthonormal frame.
pub fn sample_plane(n: usize, rng: &mut RngStream) -> Result<Plane2D> {
    contract!(n >= 2, "sample_plane: n must be >= 2");
    loop {
        let g1 = sample_gaussian(n, rng);
        let g2 = sample_gaussian(n, rng);
        if let Ok(p) = Plane2D::from_vectors(&g1, &g2) {
            return Ok(p);
        }
        // near-collinear draw: resample
    }
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn norm(a: &[f64]) -> f64 {
    a.iter().map(|x| x * x).sum::<f64>().sqrt()
}
