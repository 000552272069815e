//! Numerical laboratory for convex bodies in Gaussian space.
//!
//! The crate estimates and cross-checks, at desk scale:
//!
//! * shell densities of convex bodies and their increments under radial
//!   shrinkage, with exact 2D cross-section arc measures as oracles;
//! * weak learners (three fixed hypotheses for centrally symmetric bodies,
//!   a halfspace-augmented learner for general convex bodies);
//! * low-level Hermite weight, noise stability, and the ball-correlation
//!   machinery behind them;
//! * exact Walsh-Fourier analysis of small Boolean functions (TRIBES);
//! * a membership-query game against a discretized hard distribution of
//!   random slab intersections, with an augmented oracle and Bayes-optimal
//!   error measurement.
//!
//! Every stochastic estimator is driven by a splittable counter-based RNG
//! ([`rng::StreamId`]) and a fixed batch plan, so results are bit-identical
//! across runs and worker counts.

pub mod arcs;
pub mod bodies;
pub mod boolean_fourier;
pub mod density;
pub mod error;
pub mod hermite;
pub mod learners;
pub mod lowerbound;
pub mod rng;
pub mod sampling;
pub mod suite;

pub use error::{Error, Result};
pub use rng::{RngStream, SamplePlan, StreamId};
