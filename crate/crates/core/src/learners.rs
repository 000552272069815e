//! Weak learners for convex bodies under the Gaussian distribution.
//!
//! The symmetric learner picks among three fixed hypotheses (empty set,
//! full space, median ball); the general learner adds a halfspace trained
//! by label-weighted averaging. Selection is always by held-out agreement:
//! the underlying theorems are existential, so the artifact picks the
//! winner empirically with a fixed, documented tie order.

use crate::bodies::Membership;
use crate::density::{count_hits, DensityEstimate};
use crate::error::{contract, Result};
use crate::rng::{SamplePlan, StreamId};
use crate::sampling::{chi_quantile, dot, fill_gaussian, norm};
use serde::Serialize;

/// A candidate hypothesis in the +/-1 convention.
#[derive(Debug, Clone, Serialize)]
pub enum Hypothesis {
    /// h0: constant -1 (the empty set).
    Empty,
    /// h1: constant +1 (all of R^n).
    Full,
    /// Indicator of the origin-centered ball at the chi median radius.
    MedianBall { r_median: f64 },
    /// sign(w·x - theta) with a unit normal.
    Halfspace { w: Vec<f64>, theta: f64 },
}

impl Hypothesis {
    pub fn median_ball(n: usize) -> Result<Hypothesis> {
        Ok(Hypothesis::MedianBall {
            r_median: chi_quantile(n, 0.5)?,
        })
    }

    #[inline]
    pub fn evaluate(&self, x: &[f64]) -> f64 {
        match self {
            Hypothesis::Empty => -1.0,
            Hypothesis::Full => 1.0,
            Hypothesis::MedianBall { r_median } => {
                let r2: f64 = x.iter().map(|v| v * v).sum();
                if r_median * r_median - r2 >= 0.0 {
                    1.0
                } else {
                    -1.0
                }
            }
            Hypothesis::Halfspace { w, theta } => {
                if dot(w, x) - theta >= 0.0 {
                    1.0
                } else {
                    -1.0
                }
            }
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Hypothesis::Empty => "empty",
            Hypothesis::Full => "full",
            Hypothesis::MedianBall { .. } => "median_ball",
            Hypothesis::Halfspace { .. } => "halfspace",
        }
    }
}

/// One labeled example: x with K(x) in the +/-1 convention.
#[derive(Debug, Clone)]
pub struct LabeledSample {
    pub x: Vec<f64>,
    pub label: f64,
}

/// Infinite stream of labeled Gaussian examples for a body.
pub fn labeled_stream<'a, M: Membership>(
    body: &'a M,
    seed: StreamId,
) -> impl Iterator<Item = LabeledSample> + 'a {
    let mut rng = seed.stream();
    let n = body.dim();
    std::iter::from_fn(move || {
        let mut x = vec![0.0; n];
        fill_gaussian(&mut x, &mut rng);
        let label = body.pm1(&x);
        Some(LabeledSample { x, label })
    })
}

/// Agreement Pr[h(g) = K(g)] over fresh Gaussians.
pub fn evaluate_hypothesis<M: Membership>(
    h: &Hypothesis,
    body: &M,
    plan: SamplePlan,
    seed: StreamId,
) -> Result<DensityEstimate> {
    contract!(plan.total >= 1, "evaluate_hypothesis: need samples");
    let n = body.dim();
    if let Hypothesis::Halfspace { w, .. } = h {
        contract!(
            w.len() == n,
            "evaluate_hypothesis: hypothesis dimension mismatch"
        );
    }
    let hits = count_hits(plan, |b, size| {
        let mut rng = seed.child(b).stream();
        let mut x = vec![0.0; n];
        let mut hits = 0u64;
        for _ in 0..size {
            fill_gaussian(&mut x, &mut rng);
            if h.evaluate(&x) == body.pm1(&x) {
                hits += 1;
            }
        }
        hits
    });
    Ok(DensityEstimate::from_hits(hits, plan.total, seed))
}

/// Learner knobs; the volume-gate constant is 1/40 by default.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct LearnerConfig {
    pub vol_gate_c: f64,
}

impl Default for LearnerConfig {
    fn default() -> Self {
        LearnerConfig { vol_gate_c: 1.0 / 40.0 }
    }
}

/// Outcome of a learner run: the selected hypothesis, its held-out
/// advantage over 1/2, and diagnostics.
#[derive(Debug, Clone, Serialize)]
pub struct LearnOutcome {
    pub hypothesis: Hypothesis,
    pub advantage: f64,
    pub std_error: f64,
    pub vol_estimate: f64,
    pub gate_tripped: bool,
    /// Held-out agreement of every candidate, in evaluation order.
    pub agreements: Vec<(String, f64)>,
}

fn heldout_agreement(h: &Hypothesis, heldout: &[LabeledSample]) -> f64 {
    let hits = heldout
        .iter()
        .filter(|s| h.evaluate(&s.x) == s.label)
        .count();
    hits as f64 / heldout.len() as f64
}

/// Select by held-out agreement; earlier candidates win ties.
fn select(candidates: Vec<Hypothesis>, heldout: &[LabeledSample]) -> LearnSelection {
    let mut agreements = Vec::with_capacity(candidates.len());
    let mut best: Option<(usize, f64)> = None;
    for (i, h) in candidates.iter().enumerate() {
        let agr = heldout_agreement(h, heldout);
        agreements.push((h.name().to_string(), agr));
        if best.map_or(true, |(_, b)| agr > b) {
            best = Some((i, agr));
        }
    }
    let (idx, agr) = best.expect("non-empty candidate list");
    LearnSelection {
        hypothesis: candidates.into_iter().nth(idx).unwrap(),
        agreement: agr,
        agreements,
    }
}

struct LearnSelection {
    hypothesis: Hypothesis,
    agreement: f64,
    agreements: Vec<(String, f64)>,
}

/// Three-hypothesis learner for centrally symmetric bodies: volume gate on
/// the first half of the budget, held-out selection among {empty, full,
/// median ball} on the second half.
pub fn three_hypothesis_learner(
    labeled: impl Iterator<Item = LabeledSample>,
    budget: u64,
    n: usize,
    config: LearnerConfig,
) -> Result<LearnOutcome> {
    contract!(budget >= 100, "three_hypothesis_learner: budget must be >= 100");
    let gate_count = budget / 2;
    let mut labeled = labeled;
    let mut positives = 0u64;
    for _ in 0..gate_count {
        let s = labeled.next().expect("labeled stream exhausted");
        if s.label > 0.0 {
            positives += 1;
        }
    }
    let vol = positives as f64 / gate_count as f64;
    let gate_tripped = (vol - 0.5).abs() > config.vol_gate_c / (n as f64).sqrt();

    let heldout: Vec<LabeledSample> = labeled.take((budget - gate_count) as usize).collect();
    contract!(!heldout.is_empty(), "three_hypothesis_learner: empty held-out set");

    // candidate order doubles as the tie order; the gate promotes its pick
    let median_ball = Hypothesis::median_ball(n)?;
    let candidates = if gate_tripped {
        if vol > 0.5 {
            vec![Hypothesis::Full, median_ball, Hypothesis::Empty]
        } else {
            vec![Hypothesis::Empty, median_ball, Hypothesis::Full]
        }
    } else {
        vec![median_ball, Hypothesis::Full, Hypothesis::Empty]
    };
    let sel = select(candidates, &heldout);
    let m = heldout.len() as f64;
    Ok(LearnOutcome {
        advantage: sel.agreement - 0.5,
        std_error: (sel.agreement * (1.0 - sel.agreement) / m).sqrt(),
        vol_estimate: vol,
        gate_tripped,
        agreements: sel.agreements,
        hypothesis: sel.hypothesis,
    })
}

/// Averaging halfspace learner: w = normalized mean of label-weighted
/// examples, threshold swept over a fixed grid.
pub fn learn_halfspace_average(train: &[LabeledSample]) -> Result<Hypothesis> {
    contract!(
        train.len() >= 1000,
        "learn_halfspace_average: need at least 1000 samples"
    );
    let n = train[0].x.len();
    let mut w = vec![0.0f64; n];
    for s in train {
        debug_assert_eq!(s.x.len(), n);
        for (wi, xi) in w.iter_mut().zip(&s.x) {
            *wi += s.label * xi;
        }
    }
    let m = train.len() as f64;
    for wi in w.iter_mut() {
        *wi /= m;
    }
    let wnorm = norm(&w);
    if wnorm < 1e-12 {
        // no direction signal: fall back to a constant-side halfspace
        w = vec![0.0; n];
        w[0] = 1.0;
    } else {
        for wi in w.iter_mut() {
            *wi /= wnorm;
        }
    }

    let scores: Vec<f64> = train.iter().map(|s| dot(&w, &s.x)).collect();
    // 101 offsets on [-3, 3]; ties resolved toward the smallest |theta|
    let mut thetas: Vec<f64> = (0..101).map(|k| -3.0 + 6.0 * k as f64 / 100.0).collect();
    thetas.sort_by(|a, b| {
        (a.abs(), *a)
            .partial_cmp(&(b.abs(), *b))
            .expect("finite thetas")
    });
    let mut best = (f64::NEG_INFINITY, 0.0);
    for &theta in &thetas {
        let agree = scores
            .iter()
            .zip(train)
            .filter(|(sc, s)| {
                let h = if *sc - theta >= 0.0 { 1.0 } else { -1.0 };
                h == s.label
            })
            .count() as f64;
        if agree > best.0 {
            best = (agree, theta);
        }
    }
    Ok(Hypothesis::Halfspace { w, theta: best.1 })
}

/// General convex weak learner: volume gate, halfspace training, and
/// held-out selection among {halfspace, median ball, full, empty}.
pub fn general_convex_weak_learner(
    labeled: impl Iterator<Item = LabeledSample>,
    budget: u64,
    n: usize,
    config: LearnerConfig,
) -> Result<LearnOutcome> {
    contract!(
        budget >= 10_000,
        "general_convex_weak_learner: budget must be >= 10^4"
    );
    // 50/25/25 split: gate / train / validate
    let gate_count = budget / 2;
    let train_count = budget / 4;
    let mut labeled = labeled;

    let mut positives = 0u64;
    for _ in 0..gate_count {
        let s = labeled.next().expect("labeled stream exhausted");
        if s.label > 0.0 {
            positives += 1;
        }
    }
    let vol = positives as f64 / gate_count as f64;
    let gate_tripped = (vol - 0.5).abs() > config.vol_gate_c / (n as f64).sqrt();

    let train: Vec<LabeledSample> = labeled.by_ref().take(train_count as usize).collect();
    let halfspace = learn_halfspace_average(&train)?;
    let heldout: Vec<LabeledSample> = labeled
        .take((budget - gate_count - train_count) as usize)
        .collect();
    contract!(!heldout.is_empty(), "general_convex_weak_learner: empty held-out set");

    let candidates = vec![
        halfspace,
        Hypothesis::median_ball(n)?,
        Hypothesis::Full,
        Hypothesis::Empty,
    ];
    let sel = select(candidates, &heldout);
    let m = heldout.len() as f64;
    Ok(LearnOutcome {
        advantage: sel.agreement - 0.5,
        std_error: (sel.agreement * (1.0 - sel.agreement) / m).sqrt(),
        vol_estimate: vol,
        gate_tripped,
        agreements: sel.agreements,
        hypothesis: sel.hypothesis,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bodies::Body;
    use crate::rng::RngStream;
    use crate::sampling::sample_gaussian;

    fn sid(k: u64) -> StreamId {
        StreamId::new(77, k)
    }

    #[test]
    fn evaluate_constants() {
        let n = 8;
        let full = Body::full_space(n);
        let est =
            evaluate_hypothesis(&Hypothesis::Full, &full, SamplePlan::with_total(1000), sid(0))
                .unwrap();
        assert_eq!(est.mean, 1.0);

        let ball = Body::ball(n, chi_quantile(n, 0.5).unwrap()).unwrap();
        let est = evaluate_hypothesis(
            &Hypothesis::median_ball(n).unwrap(),
            &ball,
            SamplePlan::with_total(10_000),
            sid(1),
        )
        .unwrap();
        assert_eq!(est.mean, 1.0);
    }

    #[test]
    fn median_ball_beats_half_on_slab() {
        // slab of Gaussian volume 1/2 at n = 64: advantage at the 1/sqrt(n) scale
        let n = 64;
        let body = Body::axis_slab(n, 0, 0.6744897501960817).unwrap();
        let est = evaluate_hypothesis(
            &Hypothesis::median_ball(n).unwrap(),
            &body,
            SamplePlan::with_total(400_000),
            sid(2),
        )
        .unwrap();
        let needed = 0.05 / (n as f64).sqrt();
        assert!(
            est.mean - 0.5 >= needed + 3.0 * est.std_error,
            "advantage {} vs needed {needed}",
            est.mean - 0.5
        );
    }

    #[test]
    fn three_hypothesis_constants() {
        let n = 16;
        let full = Body::full_space(n);
        let out = three_hypothesis_learner(
            labeled_stream(&full, sid(3)),
            10_000,
            n,
            LearnerConfig::default(),
        )
        .unwrap();
        assert!(matches!(out.hypothesis, Hypothesis::Full));
        assert!((out.advantage - 0.5).abs() < 1e-9);

        let empty = Body::empty_set(n);
        let out = three_hypothesis_learner(
            labeled_stream(&empty, sid(4)),
            10_000,
            n,
            LearnerConfig::default(),
        )
        .unwrap();
        assert!(matches!(out.hypothesis, Hypothesis::Empty));

        let ball = Body::ball(n, chi_quantile(n, 0.5).unwrap()).unwrap();
        let out = three_hypothesis_learner(
            labeled_stream(&ball, sid(5)),
            10_000,
            n,
            LearnerConfig::default(),
        )
        .unwrap();
        assert!(matches!(out.hypothesis, Hypothesis::MedianBall { .. }));
        assert!((out.advantage - 0.5).abs() < 0.02);
    }

    #[test]
    fn halfspace_average_recovers_direction_and_offset() {
        let n = 12;
        let mut rng = RngStream::new(11, 0);
        let train: Vec<LabeledSample> = (0..100_000)
            .map(|_| {
                let x = sample_gaussian(n, &mut rng);
                let label = if x[0] >= 0.0 { 1.0 } else { -1.0 };
                LabeledSample { x, label }
            })
            .collect();
        let h = learn_halfspace_average(&train).unwrap();
        match &h {
            Hypothesis::Halfspace { w, theta } => {
                assert!(w[0] >= 0.99, "w[0] = {}", w[0]);
                assert!(theta.abs() <= 0.1, "theta = {theta}");
            }
            _ => panic!("expected halfspace"),
        }

        // offset recovery: labels = sign(x1 - 0.5)
        let train: Vec<LabeledSample> = (0..100_000)
            .map(|_| {
                let x = sample_gaussian(n, &mut rng);
                let label = if x[0] - 0.5 >= 0.0 { 1.0 } else { -1.0 };
                LabeledSample { x, label }
            })
            .collect();
        let h = learn_halfspace_average(&train).unwrap();
        match &h {
            Hypothesis::Halfspace { w, theta } => {
                assert!(w[0] >= 0.98);
                assert!((theta - 0.5).abs() <= 0.1, "theta = {theta}");
            }
            _ => panic!("expected halfspace"),
        }
    }

    #[test]
    fn halfspace_average_survives_label_noise() {
        // 1% adversarial flips: test agreement still >= 15/16
        let n = 10;
        let mut rng = RngStream::new(13, 0);
        let train: Vec<LabeledSample> = (0..100_000usize)
            .map(|i| {
                let x = sample_gaussian(n, &mut rng);
                let mut label = if x[0] >= 0.0 { 1.0 } else { -1.0 };
                if i % 100 == 0 {
                    label = -label;
                }
                LabeledSample { x, label }
            })
            .collect();
        let h = learn_halfspace_average(&train).unwrap();
        let mut agree = 0u64;
        let tests = 100_000;
        for _ in 0..tests {
            let x = sample_gaussian(n, &mut rng);
            let truth = if x[0] >= 0.0 { 1.0 } else { -1.0 };
            if h.evaluate(&x) == truth {
                agree += 1;
            }
        }
        let rate = agree as f64 / tests as f64;
        assert!(rate >= 15.0 / 16.0, "agreement {rate}");
    }

    #[test]
    fn halfspace_average_degenerate_mean() {
        // symmetric labels carry no direction: fall back to constant side
        let n = 6;
        let mut rng = RngStream::new(17, 0);
        let train: Vec<LabeledSample> = (0..2000)
            .map(|i| {
                let x = sample_gaussian(n, &mut rng);
                // labels independent of x, slightly biased positive
                let label = if i % 5 == 0 { -1.0 } else { 1.0 };
                LabeledSample { x, label }
            })
            .collect();
        // kill the empirical mean exactly by symmetrizing pairs
        let mut sym = Vec::with_capacity(2 * train.len());
        for s in &train {
            sym.push(s.clone());
            sym.push(LabeledSample {
                x: s.x.iter().map(|v| -v).collect(),
                label: s.label,
            });
        }
        let h = learn_halfspace_average(&sym).unwrap();
        match &h {
            Hypothesis::Halfspace { theta, .. } => {
                // majority label is +1, so the swept threshold goes negative
                assert!(*theta <= -2.0, "theta = {theta}");
            }
            _ => panic!("expected halfspace"),
        }
    }

    #[test]
    fn general_learner_prefers_halfspace_near_boundary() {
        let n = 64;
        let mut w = vec![0.0; n];
        w[0] = 1.0;
        let body = Body::halfspace(&w, 0.05).unwrap();
        let out = general_convex_weak_learner(
            labeled_stream(&body, sid(6)),
            200_000,
            n,
            LearnerConfig::default(),
        )
        .unwrap();
        assert!(
            matches!(out.hypothesis, Hypothesis::Halfspace { .. }),
            "got {:?}",
            out.hypothesis.name()
        );
        assert!(
            out.advantage + 0.5 >= 7.0 / 8.0,
            "agreement {}",
            out.advantage + 0.5
        );
    }

    #[test]
    fn general_learner_keeps_median_ball_for_symmetric_ball() {
        let n = 32;
        let body = Body::ball(n, chi_quantile(n, 0.5).unwrap()).unwrap();
        let out = general_convex_weak_learner(
            labeled_stream(&body, sid(7)),
            40_000,
            n,
            LearnerConfig::default(),
        )
        .unwrap();
        assert!(matches!(out.hypothesis, Hypothesis::MedianBall { .. }));
        assert!((out.advantage - 0.5).abs() < 0.02);
    }

    #[test]
    fn learner_never_loses_to_constants() {
        let n = 24;
        let mut rng = RngStream::new(19, 0);
        for trial in 0..5u64 {
            let built = crate::bodies::build_random_symmetric_polytope(
                n,
                6,
                crate::bodies::OffsetDist::Uniform(0.8, 2.0),
                &mut rng,
            )
            .unwrap();
            let out = general_convex_weak_learner(
                labeled_stream(&built.body, sid(100 + trial)),
                40_000,
                n,
                LearnerConfig::default(),
            )
            .unwrap();
            let best_const = out
                .agreements
                .iter()
                .filter(|(name, _)| name == "full" || name == "empty")
                .map(|&(_, a)| a)
                .fold(f64::NEG_INFINITY, f64::max);
            assert!(
                out.advantage + 0.5 >= best_const - 1e-12,
                "selected {} below constants {best_const}",
                out.advantage + 0.5
            );
        }
    }

    #[test]
    fn selection_deterministic_given_stream() {
        let n = 16;
        let body = Body::axis_slab(n, 0, 0.6745).unwrap();
        let a = three_hypothesis_learner(
            labeled_stream(&body, sid(8)),
            20_000,
            n,
            LearnerConfig::default(),
        )
        .unwrap();
        let b = three_hypothesis_learner(
            labeled_stream(&body, sid(8)),
            20_000,
            n,
            LearnerConfig::default(),
        )
        .unwrap();
        assert_eq!(a.advantage.to_bits(), b.advantage.to_bits());
        assert_eq!(a.hypothesis.name(), b.hypothesis.name());
    }
}
