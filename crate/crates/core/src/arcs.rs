//! Exact arc sets on the circle.
//!
//! A facet w·x <= theta restricted to the circle of radius rho in a plane
//! becomes rho (a cos t + b sin t) <= theta, whose solution set is a single
//! arc (or the full/empty circle). Cross-sections of facet-defined bodies
//! are computed by intersecting these arcs exactly; measures carry no Monte
//! Carlo noise.

use std::f64::consts::TAU;

/// Tolerance window for treating a facet as tangent to the circle.
const TANGENT_EPS: f64 = 1e-12;

/// Disjoint angular intervals, normalized to [0, 2pi), sorted by start.
#[derive(Debug, Clone, PartialEq)]
pub struct ArcSet {
    intervals: Vec<(f64, f64)>,
}

impl ArcSet {
    pub fn full() -> Self {
        ArcSet {
            intervals: vec![(0.0, TAU)],
        }
    }

    pub fn empty() -> Self {
        ArcSet { intervals: Vec::new() }
    }

    /// Single arc of `len` starting at `start` (any real angle, wraps).
    pub fn arc(start: f64, len: f64) -> Self {
        assert!(len >= 0.0);
        if len >= TAU {
            return ArcSet::full();
        }
        if len == 0.0 {
            return ArcSet::empty();
        }
        let s = start.rem_euclid(TAU);
        let e = s + len;
        if e <= TAU {
            ArcSet {
                intervals: vec![(s, e)],
            }
        } else {
            ArcSet {
                intervals: vec![(0.0, e - TAU), (s, TAU)],
            }
        }
    }

    pub fn intervals(&self) -> &[(f64, f64)] {
        &self.intervals
    }

    pub fn total_measure(&self) -> f64 {
        self.intervals.iter().map(|(s, e)| e - s).sum()
    }

    pub fn contains_angle(&self, theta: f64) -> bool {
        let t = theta.rem_euclid(TAU);
        self.intervals.iter().any(|&(s, e)| s <= t && t < e)
    }

    /// Set intersection of two arc sets.
    pub fn intersect(&self, other: &ArcSet) -> ArcSet {
        let mut out = Vec::new();
        let (mut i, mut j) = (0, 0);
        while i < self.intervals.len() && j < other.intervals.len() {
            let (a1, b1) = self.intervals[i];
            let (a2, b2) = other.intervals[j];
            let lo = a1.max(a2);
            let hi = b1.min(b2);
            if lo < hi {
                out.push((lo, hi));
            }
            if b1 < b2 {
                i += 1;
            } else {
                j += 1;
            }
        }
        ArcSet { intervals: out }
    }
}

/// Exact cross-section of a body with a circle: the arc set plus a counter
/// of facets that were tangent (within 1e-12) and treated as non-cutting.
#[derive(Debug, Clone)]
pub struct CrossSection {
    pub arcs: ArcSet,
    pub tangencies: u32,
}

impl CrossSection {
    pub fn full() -> Self {
        CrossSection {
            arcs: ArcSet::full(),
            tangencies: 0,
        }
    }

    pub fn empty() -> Self {
        CrossSection {
            arcs: ArcSet::empty(),
            tangencies: 0,
        }
    }

    /// Intersect with the facet condition rho (a cos t + b sin t) <= theta.
    pub fn cut(mut self, a: f64, b: f64, theta: f64, rho: f64) -> CrossSection {
        debug_assert!(rho > 0.0);
        let r = rho * a.hypot(b);
        if r == 0.0 {
            // facet constant on the circle
            if theta < 0.0 {
                self.arcs = ArcSet::empty();
            }
            return self;
        }
        let c = theta / r;
        if c >= 1.0 - TANGENT_EPS {
            // circle entirely on the feasible side (tangent from above counts)
            if c < 1.0 + TANGENT_EPS {
                self.tangencies += 1;
            }
            return self;
        }
        if c <= -1.0 + TANGENT_EPS {
            if c > -1.0 - TANGENT_EPS {
                self.tangencies += 1;
            }
            self.arcs = ArcSet::empty();
            return self;
        }
        let t = c.acos(); // excluded half-angle around the facet direction
        let psi = b.atan2(a);
        let allowed = ArcSet::arc(psi + t, TAU - 2.0 * t);
        self.arcs = self.arcs.intersect(&allowed);
        self
    }
}
