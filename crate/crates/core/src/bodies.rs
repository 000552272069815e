//! Convex-body constructors and the membership oracle they all share.
//!
//! A [`Body`] is a dimension-tagged membership oracle with symmetry and
//! inner-radius metadata. All bodies are closed sets (`<=` comparisons):
//! the convention is measure-irrelevant but keeps examples deterministic.

use crate::arcs::{ArcSet, CrossSection};
use crate::error::{contract, Error, Result};
use crate::rng::RngStream;
use crate::sampling::{dot, norm, sample_gaussian, sample_sphere, Plane2D};

/// Membership oracle over points of R^n. Implementors are immutable and
/// safe to share across workers.
pub trait Membership: Sync {
    fn dim(&self) -> usize;

    /// Pure membership test; `x.len()` must equal `dim()`.
    fn contains_point(&self, x: &[f64]) -> bool;

    /// Membership in the +/-1 convention (inside maps to +1).
    #[inline]
    fn pm1(&self, x: &[f64]) -> f64 {
        if self.contains_point(x) {
            1.0
        } else {
            -1.0
        }
    }

    /// Exact circle cross-section at radius `rho` in `plane`, when the body
    /// supports it. `None` sends callers to a Monte Carlo fallback.
    fn cross_section(&self, _plane: &Plane2D, _rho: f64) -> Option<CrossSection> {
        None
    }
}

#[derive(Debug, Clone)]
pub struct Facet {
    pub normal: Vec<f64>,
    pub offset: f64,
}

#[derive(Debug, Clone)]
pub enum BodyKind {
    Ball { radius: f64 },
    Cube { half_width: f64 },
    Halfspace { normal: Vec<f64>, offset: f64 },
    HalfspaceIntersection { facets: Vec<Facet> },
    SlabConjunction { normals: Vec<Vec<f64>>, half_width: f64 },
    FullSpace,
    EmptySet,
}

/// A convex body with certified metadata. `inner_radius` is a certificate,
/// not a supremum: `B(0, inner_radius)` is contained in the body.
#[derive(Debug, Clone)]
pub struct Body {
    dim: usize,
    kind: BodyKind,
    symmetric: bool,
    inner_radius: Option<f64>,
}

fn normalize(v: &[f64]) -> Result<Vec<f64>> {
    let n = norm(v);
    contract!(n > 0.0, "normal vector must be nonzero");
    Ok(v.iter().map(|x| x / n).collect())
}

impl Body {
    pub fn ball(dim: usize, radius: f64) -> Result<Body> {
        contract!(dim >= 1, "ball: dim must be >= 1");
        contract!(radius >= 0.0, "ball: radius must be >= 0");
        Ok(Body {
            dim,
            kind: BodyKind::Ball { radius },
            symmetric: true,
            inner_radius: Some(radius),
        })
    }

    pub fn cube(dim: usize, half_width: f64) -> Result<Body> {
        contract!(dim >= 1, "cube: dim must be >= 1");
        contract!(half_width >= 0.0, "cube: half-width must be >= 0");
        Ok(Body {
            dim,
            kind: BodyKind::Cube { half_width },
            symmetric: true,
            inner_radius: None,
        })
    }

    /// The closed halfspace {x : w·x <= theta}. The normal is normalized at
    /// construction; the offset is stored post-normalization.
    pub fn halfspace(normal: &[f64], offset: f64) -> Result<Body> {
        contract!(normal.len() >= 1, "halfspace: empty normal");
        let w = normalize(normal)?;
        let scale = norm(normal);
        Ok(Body {
            dim: w.len(),
            kind: BodyKind::Halfspace {
                normal: w,
                offset: offset / scale,
            },
            symmetric: false,
            inner_radius: None,
        })
    }

    pub fn halfspace_intersection(facets: Vec<(Vec<f64>, f64)>) -> Result<Body> {
        contract!(!facets.is_empty(), "halfspace_intersection: no facets");
        let dim = facets[0].0.len();
        let mut out = Vec::with_capacity(facets.len());
        let mut min_offset = f64::INFINITY;
        let mut all_positive = true;
        for (w, theta) in facets {
            contract!(
                w.len() == dim,
                "halfspace_intersection: facet dimension mismatch"
            );
            let scale = norm(&w);
            let normal = normalize(&w)?;
            let offset = theta / scale;
            if offset <= 0.0 {
                all_positive = false;
            }
            min_offset = min_offset.min(offset);
            out.push(Facet { normal, offset });
        }
        Ok(Body {
            dim,
            kind: BodyKind::HalfspaceIntersection { facets: out },
            symmetric: false,
            inner_radius: all_positive.then_some(min_offset),
        })
    }

    /// Conjunction of slabs {x : |z_i · x| <= d} over unit normals z_i.
    pub fn slab_conjunction(normals: Vec<Vec<f64>>, half_width: f64) -> Result<Body> {
        contract!(!normals.is_empty(), "slab_conjunction: no normals");
        contract!(half_width >= 0.0, "slab_conjunction: half-width must be >= 0");
        let dim = normals[0].len();
        let mut zs = Vec::with_capacity(normals.len());
        for z in normals {
            contract!(z.len() == dim, "slab_conjunction: normal dimension mismatch");
            zs.push(normalize(&z)?);
        }
        Ok(Body {
            dim,
            kind: BodyKind::SlabConjunction {
                normals: zs,
                half_width,
            },
            symmetric: true,
            inner_radius: None,
        })
    }

    /// Single axis-aligned slab {x : |x_i| <= d}.
    pub fn axis_slab(dim: usize, axis: usize, half_width: f64) -> Result<Body> {
        contract!(axis < dim, "axis_slab: axis out of range");
        let mut z = vec![0.0; dim];
        z[axis] = 1.0;
        Body::slab_conjunction(vec![z], half_width)
    }

    pub fn full_space(dim: usize) -> Body {
        Body {
            dim,
            kind: BodyKind::FullSpace,
            symmetric: true,
            inner_radius: None,
        }
    }

    pub fn empty_set(dim: usize) -> Body {
        Body {
            dim,
            kind: BodyKind::EmptySet,
            symmetric: true,
            inner_radius: None,
        }
    }

    pub fn kind(&self) -> &BodyKind {
        &self.kind
    }

    pub fn symmetric(&self) -> bool {
        self.symmetric
    }

    pub fn inner_radius(&self) -> Option<f64> {
        self.inner_radius
    }

    /// Checked membership test.
    pub fn contains(&self, x: &[f64]) -> Result<bool> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: x.len(),
            });
        }
        Ok(self.contains_point(x))
    }

    /// Facets as in-plane coefficients (a, b, theta) with the membership
    /// condition rho (a cos t + b sin t) <= theta, for facet-defined kinds.
    fn in_plane_facets(&self, plane: &Plane2D) -> Option<Vec<(f64, f64, f64)>> {
        match &self.kind {
            BodyKind::Halfspace { normal, offset } => {
                let (a, b) = plane.project(normal);
                Some(vec![(a, b, *offset)])
            }
            BodyKind::HalfspaceIntersection { facets } => Some(
                facets
                    .iter()
                    .map(|f| {
                        let (a, b) = plane.project(&f.normal);
                        (a, b, f.offset)
                    })
                    .collect(),
            ),
            BodyKind::SlabConjunction {
                normals,
                half_width,
            } => {
                let mut out = Vec::with_capacity(2 * normals.len());
                for z in normals {
                    let (a, b) = plane.project(z);
                    out.push((a, b, *half_width));
                    out.push((-a, -b, *half_width));
                }
                Some(out)
            }
            BodyKind::Cube { half_width } => {
                let n = self.dim;
                let mut out = Vec::with_capacity(2 * n);
                for i in 0..n {
                    let (a, b) = (plane.e1()[i], plane.e2()[i]);
                    out.push((a, b, *half_width));
                    out.push((-a, -b, *half_width));
                }
                Some(out)
            }
            _ => None,
        }
    }
}

impl Membership for Body {
    fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    fn contains_point(&self, x: &[f64]) -> bool {
        debug_assert_eq!(x.len(), self.dim);
        match &self.kind {
            BodyKind::Ball { radius } => x.iter().map(|v| v * v).sum::<f64>() <= radius * radius,
            BodyKind::Cube { half_width } => x.iter().all(|v| v.abs() <= *half_width),
            BodyKind::Halfspace { normal, offset } => dot(normal, x) <= *offset,
            BodyKind::HalfspaceIntersection { facets } => {
                facets.iter().all(|f| dot(&f.normal, x) <= f.offset)
            }
            BodyKind::SlabConjunction {
                normals,
                half_width,
            } => normals.iter().all(|z| dot(z, x).abs() <= *half_width),
            BodyKind::FullSpace => true,
            BodyKind::EmptySet => false,
        }
    }

    fn cross_section(&self, plane: &Plane2D, rho: f64) -> Option<CrossSection> {
        match &self.kind {
            BodyKind::FullSpace => Some(CrossSection::full()),
            BodyKind::EmptySet => Some(CrossSection::empty()),
            BodyKind::Ball { radius } => Some(if rho <= *radius {
                CrossSection::full()
            } else {
                CrossSection::empty()
            }),
            _ => {
                let facets = self.in_plane_facets(plane)?;
                let mut section = CrossSection::full();
                for (a, b, theta) in facets {
                    section = section.cut(a, b, theta, rho);
                    if section.arcs.total_measure() == 0.0 {
                        break;
                    }
                }
                Some(section)
            }
        }
    }
}

/// Offset distribution for random polytope constructors.
#[derive(Debug, Clone, Copy)]
pub enum OffsetDist {
    Fixed(f64),
    Uniform(f64, f64),
}

impl OffsetDist {
    fn draw(&self, rng: &mut RngStream) -> f64 {
        match *self {
            OffsetDist::Fixed(t) => t,
            OffsetDist::Uniform(lo, hi) => lo + (hi - lo) * rng.uniform(),
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match *self {
            OffsetDist::Fixed(t) => t > 0.0,
            OffsetDist::Uniform(lo, hi) => lo > 0.0 && hi >= lo,
        };
        contract!(ok, "polytope offsets must be strictly positive");
        Ok(())
    }
}

/// Result of a random polytope build; `degenerate` flags the k = 0 fallback
/// to the full space.
#[derive(Debug, Clone)]
pub struct BuiltPolytope {
    pub body: Body,
    pub degenerate: bool,
}

/// Random centrally symmetric polytope: k facet pairs (w_i, theta_i),
/// (-w_i, theta_i) with normals i.i.d. uniform on the sphere.
pub fn build_random_symmetric_polytope(
    n: usize,
    k: usize,
    offsets: OffsetDist,
    rng: &mut RngStream,
) -> Result<BuiltPolytope> {
    offsets.validate()?;
    if k == 0 {
        return Ok(BuiltPolytope {
            body: Body::full_space(n),
            degenerate: true,
        });
    }
    let mut facets = Vec::with_capacity(2 * k);
    let mut min_offset = f64::INFINITY;
    for _ in 0..k {
        let w = sample_sphere(n, 1.0, rng);
        let theta = offsets.draw(rng);
        min_offset = min_offset.min(theta);
        facets.push(Facet {
            normal: w.iter().map(|x| -x).collect(),
            offset: theta,
        });
        facets.push(Facet { normal: w, offset: theta });
    }
    Ok(BuiltPolytope {
        body: Body {
            dim: n,
            kind: BodyKind::HalfspaceIntersection { facets },
            symmetric: true,
            inner_radius: Some(min_offset),
        },
        degenerate: false,
    })
}

/// Random general polytope: k facets with i.i.d. sphere normals and
/// strictly positive offsets, so `inner_radius = min theta_i` is certified.
pub fn build_random_polytope(
    n: usize,
    k: usize,
    offsets: OffsetDist,
    rng: &mut RngStream,
) -> Result<BuiltPolytope> {
    offsets.validate()?;
    if k == 0 {
        return Ok(BuiltPolytope {
            body: Body::full_space(n),
            degenerate: true,
        });
    }
    let facets: Vec<(Vec<f64>, f64)> = (0..k)
        .map(|_| (sample_sphere(n, 1.0, rng), offsets.draw(rng)))
        .collect();
    Ok(BuiltPolytope {
        body: Body::halfspace_intersection(facets)?,
        degenerate: false,
    })
}

/// Outcome of the sampled convexity / symmetry self-tests.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckOutcome {
    /// No counterexample found in the requested trials.
    Consistent,
    /// A witness violating the property was found.
    Violation,
    /// Too few member points to test (Gaussian volume below ~1e-6).
    Inconclusive,
}

/// Sampled convexity gate: draws member pairs and tests three convex
/// combinations of each. `Consistent` means "no counterexample found".
pub fn check_convexity(body: &impl Membership, trials: u64, rng: &mut RngStream) -> CheckOutcome {
    assert!(trials >= 1, "check_convexity: trials must be >= 1");
    let n = body.dim();
    let max_draws = 200_000 + 40 * trials;
    let mut draws = 0u64;
    let mut pairs_tested = 0u64;
    let mut pending: Option<Vec<f64>> = None;
    while pairs_tested < trials && draws < max_draws {
        let x = sample_gaussian(n, rng);
        draws += 1;
        if !body.contains_point(&x) {
            continue;
        }
        match pending.take() {
            None => pending = Some(x),
            Some(y) => {
                pairs_tested += 1;
                for lambda in [0.5, rng.uniform(), rng.uniform()] {
                    let z: Vec<f64> = x
                        .iter()
                        .zip(&y)
                        .map(|(a, b)| lambda * a + (1.0 - lambda) * b)
                        .collect();
                    if !body.contains_point(&z) {
                        return CheckOutcome::Violation;
                    }
                }
            }
        }
    }
    if pairs_tested == 0 {
        CheckOutcome::Inconclusive
    } else {
        CheckOutcome::Consistent
    }
}

/// Sampled central-symmetry gate: tests contains(x) == contains(-x) on
/// Gaussian draws.
pub fn check_symmetry(body: &impl Membership, trials: u64, rng: &mut RngStream) -> CheckOutcome {
    assert!(trials >= 1, "check_symmetry: trials must be >= 1");
    let n = body.dim();
    for _ in 0..trials {
        let x = sample_gaussian(n, rng);
        let neg: Vec<f64> = x.iter().map(|v| -v).collect();
        if body.contains_point(&x) != body.contains_point(&neg) {
            return CheckOutcome::Violation;
        }
    }
    CheckOutcome::Consistent
}

/// Exact arc set of a body's circle cross-section; errors for bodies with
/// no exact section (none of the built-in kinds).
pub fn cross_section_arcs(body: &impl Membership, plane: &Plane2D, rho: f64) -> Result<ArcSet> {
    contract!(rho > 0.0, "cross_section_arcs: rho must be positive");
    body.cross_section(plane, rho)
        .map(|s| s.arcs)
        .ok_or_else(|| Error::Contract("body has no exact cross-section".into()))
}
