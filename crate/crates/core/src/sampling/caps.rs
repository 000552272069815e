//! Spherical cap measure by deterministic quadrature.
//!
//! `cap_mass(n, a)` is Pr[v·u >= a] for u uniform on the unit sphere in
//! R^n. After the substitution z = cos(phi) the density becomes
//! sin^{n-2}(phi) on [0, arccos a], which is evaluated in log-domain with
//! the peak factored out, so the result stays meaningful down to 1e-300
//! even at n in the thousands.

use super::special::ln_gamma;
use crate::error::{contract, Result};
use std::f64::consts::PI;

struct Simpson<'a> {
    f: &'a dyn Fn(f64) -> f64,
    evals: u64,
}

impl<'a> Simpson<'a> {
    fn eval(&mut self, x: f64) -> f64 {
        self.evals += 1;
        (self.f)(x)
    }

    #[allow(clippy::too_many_arguments)]
    fn recurse(
        &mut self,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = self.eval(lm);
        let frm = self.eval(rm);
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            left + right + delta / 15.0
        } else {
            self.recurse(a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
                + self.recurse(m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
        }
    }
}

/// Adaptive Simpson with a relative panel tolerance. Runs a coarse pass to
/// scale the tolerance, then refines against that estimate.
fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, rel_tol: f64) -> f64 {
    if a >= b {
        return 0.0;
    }
    let mut s = Simpson { f, evals: 0 };
    let fa = s.eval(a);
    let fm = s.eval(0.5 * (a + b));
    let fb = s.eval(b);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    let coarse = s.recurse(a, b, fa, fm, fb, whole, whole.abs() * 1e-3 + 1e-300, 20);
    let tol = coarse.abs() * rel_tol + 1e-300;
    s.recurse(a, b, fa, fm, fb, whole, tol, 48)
}

/// Cap measure with an explicit quadrature tolerance; `cap_mass` fixes the
/// tolerance at 1e-11. Exposed so tests can compare two resolutions.
pub fn cap_mass_with_tol(n: usize, alpha: f64, rel_tol: f64) -> Result<f64> {
    contract!(n >= 2, "cap_mass: n must be >= 2");
    contract!(
        (0.0..=1.0).contains(&alpha),
        "cap_mass: alpha must lie in [0,1], got {alpha}"
    );
    if alpha == 1.0 {
        return Ok(0.0);
    }
    if n == 2 {
        return Ok(alpha.acos() / (2.0 * PI) * 2.0);
    }
    if n == 3 {
        return Ok(0.5 * (1.0 - alpha));
    }
    let phi0 = alpha.acos();
    let lambda = (n - 2) as f64;
    let ln_peak = lambda * phi0.sin().ln();
    let g = move |phi: f64| {
        if phi <= 0.0 {
            0.0
        } else {
            (lambda * phi.sin().ln() - ln_peak).exp()
        }
    };
    let integral = adaptive_simpson(&g, 0.0, phi0, rel_tol);
    let ln_ratio = ln_gamma(n as f64 / 2.0) - ln_gamma((n as f64 - 1.0) / 2.0) - 0.5 * PI.ln();
    Ok((ln_ratio + ln_peak + integral.max(0.0).ln()).exp())
}

/// Pr[v·u >= alpha] for u uniform on S^{n-1}. Relative error <= 1e-8 for
/// outputs >= 1e-300; exact closed forms at n = 2, 3.
pub fn cap_mass(n: usize, alpha: f64) -> Result<f64> {
    cap_mass_with_tol(n, alpha, 1e-11)
}

/// Solve for the slab half-width d >= 0 with
/// `2 * cap_mass(n, d/sqrt(n)) = target` (two-sided sphere tail).
pub fn solve_slab_width(n: usize, target: f64) -> Result<f64> {
    contract!(
        target > 0.0 && target <= 1.0,
        "solve_slab_width: target must lie in (0,1], got {target}"
    );
    if target == 1.0 {
        return Ok(0.0);
    }
    let tail = |t: f64| -> Result<f64> { Ok(2.0 * cap_mass(n, t)?) };
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    let mut best = (0.5, f64::INFINITY);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let v = tail(mid)?;
        let err = (v - target).abs();
        if err < best.1 {
            best = (mid, err);
        }
        if err <= 1e-11 * target {
            break;
        }
        if v > target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= f64::EPSILON * hi.max(1e-300) {
            break;
        }
    }
    contract!(
        best.1 <= 1e-10 * target,
        "solve_slab_width: inversion residual {} exceeds tolerance",
        best.1
    );
    Ok(best.0 * (n as f64).sqrt())
}

/// Ratio Pr[|v·u| >= alpha] / Pr[|v·u| >= beta] with beta = (1+eps) alpha,
/// under the validity gate n a^2 eps <= 1/(8e^2).
pub fn cap_ratio_check(n: usize, alpha: f64, eps: f64) -> Result<f64> {
    let beta = (1.0 + eps) * alpha;
    contract!(eps >= 0.0, "cap_ratio_check: eps must be >= 0");
    contract!(
        alpha > 1.0 / (n as f64).sqrt(),
        "cap_ratio_check: need alpha > 1/sqrt(n)"
    );
    contract!(beta <= 0.5, "cap_ratio_check: need (1+eps) alpha <= 1/2");
    let gate = n as f64 * alpha * alpha * eps;
    contract!(
        gate <= 1.0 / (8.0 * std::f64::consts::E * std::f64::consts::E),
        "cap_ratio_check: n a^2 eps = {gate} exceeds 1/(8e^2)"
    );
    let num = cap_mass(n, alpha)?;
    let den = cap_mass(n, beta)?;
    contract!(den > 0.0, "cap_ratio_check: denominator underflowed");
    let ratio = num / den;
    contract!(ratio >= 1.0 - 1e-12, "cap_ratio_check: ratio {ratio} < 1");
    Ok(ratio.max(1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hemisphere_is_half() {
        for &n in &[2usize, 3, 4, 17, 100, 4096] {
            let v = cap_mass(n, 0.0).unwrap();
            assert!((v - 0.5).abs() < 1e-9, "n={n}: {v}");
        }
    }

    #[test]
    fn n3_closed_form() {
        let v = cap_mass(3, 0.4).unwrap();
        assert!((v - 0.3).abs() < 1e-14);
    }

    #[test]
    fn full_cap_is_zero() {
        assert_eq!(cap_mass(64, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn strictly_decreasing_in_alpha() {
        for &n in &[4usize, 64, 1000] {
            let mut prev = cap_mass(n, 0.0).unwrap();
            for k in 1..=20 {
                let a = k as f64 / 20.0;
                let v = cap_mass(n, a).unwrap();
                assert!(v < prev, "n={n} a={a}: {v} !< {prev}");
                prev = v;
            }
        }
    }

    #[test]
    fn two_resolutions_agree() {
        for &n in &[4usize, 64, 512, 4096] {
            for &a in &[0.01, 0.1, 0.3, 0.7, 0.95] {
                let lo = cap_mass_with_tol(n, a, 1e-9).unwrap();
                let hi = cap_mass_with_tol(n, a, 1e-12).unwrap();
                let rel = (lo - hi).abs() / hi.max(1e-300);
                assert!(rel <= 1e-8, "n={n} a={a}: rel gap {rel}");
            }
        }
    }

    #[test]
    fn gaussian_shape_at_n100() {
        // 2 cap(100, t) behaves like e^{-Θ(t² n)}: the log at t = 0.3 vs
        // t = 0.15 should differ by roughly a factor 4.
        let l1 = (2.0 * cap_mass(100, 0.3).unwrap()).ln();
        let l2 = (2.0 * cap_mass(100, 0.15).unwrap()).ln();
        let factor = l1 / l2;
        assert!(
            (3.2..=4.8).contains(&factor),
            "log-ratio factor {factor} outside [3.2, 4.8]"
        );
    }

    #[test]
    fn slab_width_round_trip() {
        for &n in &[8usize, 64, 100] {
            for &target in &[1e-4, 1e-2, 0.3, 0.9] {
                let d = solve_slab_width(n, target).unwrap();
                let back = 2.0 * cap_mass(n, d / (n as f64).sqrt()).unwrap();
                assert!(
                    (back - target).abs() <= 1e-10 * target,
                    "n={n} target={target}: residual {}",
                    (back - target).abs()
                );
            }
        }
        assert_eq!(solve_slab_width(64, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn slab_width_scaling_matches_log_s() {
        // target = s^{-gamma} with s=16, gamma=2, n=64: d = Θ(sqrt(ln s^gamma))
        let s: f64 = 16.0;
        let gamma = 2.0;
        let d = solve_slab_width(64, s.powf(-gamma)).unwrap();
        let scale = (s.powf(gamma)).ln().sqrt();
        assert!(
            d >= 0.7 * scale && d <= 2.5 * scale,
            "d = {d}, scale = {scale}"
        );
    }

    #[test]
    fn ratio_check_gate_and_bound() {
        // eps = 0 gives exactly 1
        assert_eq!(cap_ratio_check(400, 0.1, 0.0).unwrap(), 1.0);
        // gate rejection: n a^2 eps = 0.1 > 1/(8e^2)
        assert!(cap_ratio_check(400, 0.05, 0.1).is_err());
        // within the gate: R - 1 <= 50 n a^2 eps
        let (n, a, eps) = (400usize, 0.02, 0.05);
        let r = cap_ratio_check(n, a, eps).unwrap();
        assert!(r >= 1.0);
        assert!(
            r - 1.0 <= 50.0 * n as f64 * a * a * eps,
            "r - 1 = {} vs bound {}",
            r - 1.0,
            50.0 * n as f64 * a * a * eps
        );
    }
}
