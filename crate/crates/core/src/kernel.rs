//! Likelihood-constrained Metropolis-Hastings.
//!
//! Each step runs the Metropolis test on prior and proposal densities first
//! and only evaluates the likelihood when that test passes. A trial that
//! passes is kept only if its likelihood beats the current contour level;
//! otherwise the chain stays where it is.

use rand::Rng;

use crate::error::{Error, Result};
use crate::math;
use crate::proposal::GeometricProposal;
use crate::space::{ParameterSpace, Point};

/// Log-likelihood of a point. Must be deterministic and may return `-inf`.
pub trait LogLikelihood {
    fn log_likelihood(&self, coords: &[f64]) -> f64;
}

impl<F: Fn(&[f64]) -> f64 + ?Sized> LogLikelihood for F {
    fn log_likelihood(&self, coords: &[f64]) -> f64 {
        self(coords)
    }
}

/// A point with its cached log-likelihood.
#[derive(Debug, Clone, PartialEq)]
pub struct LivePoint {
    pub point: Point,
    pub log_l: f64,
}

impl LivePoint {
    pub fn evaluate<L: LogLikelihood + ?Sized>(point: Point, likelihood: &L) -> Self {
        let log_l = likelihood.log_likelihood(point.coords());
        LivePoint { point, log_l }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ChainStats {
    pub steps: u64,
    pub accepted: u64,
    pub likelihood_evals: u64,
    /// Trials that fell outside the prior support.
    pub out_of_domain: u64,
}

impl ChainStats {
    pub fn merge(&mut self, other: &ChainStats) {
        self.steps += other.steps;
        self.accepted += other.accepted;
        self.likelihood_evals += other.likelihood_evals;
        self.out_of_domain += other.out_of_domain;
    }

    pub fn acceptance_rate(&self) -> f64 {
        if self.steps == 0 {
            0.0
        } else {
            self.accepted as f64 / self.steps as f64
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StepOutcome {
    pub accepted: bool,
    pub likelihood_evaluated: bool,
    pub in_domain: bool,
}

/// One constrained MH step, updating `state` in place on acceptance.
pub fn mh_step<L, R>(
    state: &mut LivePoint,
    log_l_min: f64,
    space: &ParameterSpace,
    likelihood: &L,
    proposal: &GeometricProposal,
    rng: &mut R,
) -> Result<StepOutcome>
where
    L: LogLikelihood + ?Sized,
    R: Rng + ?Sized,
{
    let outcome = proposal.propose(&state.point, space, rng)?;
    let log_prior_trial = space.log_prior_density(&outcome.trial);
    let in_domain = log_prior_trial > f64::NEG_INFINITY;
    let log_ratio =
        log_prior_trial - space.log_prior_density(&state.point) + outcome.log_q_ratio;
    let log_u = math::ln(rng.random::<f64>());

    if !(log_u < log_ratio.min(0.0)) {
        return Ok(StepOutcome {
            accepted: false,
            likelihood_evaluated: false,
            in_domain,
        });
    }

    let log_l = likelihood.log_likelihood(outcome.trial.coords());
    let accepted = log_l > log_l_min;
    if accepted {
        state.point = outcome.trial;
        state.log_l = log_l;
    }
    Ok(StepOutcome {
        accepted,
        likelihood_evaluated: true,
        in_domain,
    })
}

/// Runs `n_steps` constrained MH steps from `start` and returns the final state.
pub fn evolve_chain<L, R>(
    start: LivePoint,
    log_l_min: f64,
    n_steps: usize,
    space: &ParameterSpace,
    likelihood: &L,
    proposal: &GeometricProposal,
    rng: &mut R,
) -> Result<(LivePoint, ChainStats)>
where
    L: LogLikelihood + ?Sized,
    R: Rng + ?Sized,
{
    if n_steps == 0 {
        return Err(Error::InvalidConfig {
            field: "chain_steps",
            constraint: "chain_steps >= 1",
        });
    }
    if !(start.log_l > log_l_min) {
        return Err(Error::Internal("chain start does not satisfy the likelihood constraint"));
    }
    let mut state = start;
    let mut stats = ChainStats::default();
    for _ in 0..n_steps {
        let step = mh_step(&mut state, log_l_min, space, likelihood, proposal, rng)?;
        stats.steps += 1;
        stats.accepted += step.accepted as u64;
        stats.likelihood_evals += step.likelihood_evaluated as u64;
        stats.out_of_domain += (!step.in_domain) as u64;
    }
    Ok((state, stats))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::TAU;
    use crate::proposal::ProposalScales;
    use crate::rng::RngState;
    use crate::space::ParameterKind;
    use alloc::vec;
    use alloc::vec::Vec;
    use core::cell::Cell;

    fn circle01() -> ParameterSpace {
        ParameterSpace::new(vec![ParameterKind::Circular { lo: 0.0, hi: 1.0 }]).unwrap()
    }

    fn proposal(space: &ParameterSpace, sigma: f64) -> GeometricProposal {
        GeometricProposal::new(
            ProposalScales::new(space, vec![sigma; space.kinds().len()]).unwrap(),
        )
    }

    #[test]
    fn flat_prior_reduces_to_contour_test() {
        let space = circle01();
        let q = proposal(&space, 0.3);
        let like = |x: &[f64]| -(x[0] - 0.5).abs();
        let mut rng = RngState::from_seed(1);
        for _ in 0..10_000 {
            let mut state = LivePoint::evaluate(Point::new(vec![0.5]), &like);
            let level = -0.2;
            let step = mh_step(&mut state, level, &space, &like, &q, &mut rng).unwrap();
            // Wrapped trials are always in domain, so the likelihood is always consulted.
            assert!(step.likelihood_evaluated && step.in_domain);
            assert_eq!(step.accepted, state.point[0] != 0.5);
            assert!(state.log_l > level);
        }
    }

    #[test]
    fn out_of_domain_trial_skips_likelihood() {
        let space = ParameterSpace::linear_box(1, 0.0, 1.0).unwrap();
        let q = proposal(&space, 10.0);
        let evals = Cell::new(0u32);
        let like = |_: &[f64]| {
            evals.set(evals.get() + 1);
            0.0
        };
        let mut rng = RngState::from_seed(2);
        let mut state = LivePoint {
            point: Point::new(vec![0.5]),
            log_l: 0.0,
        };
        let mut seen = 0;
        for _ in 0..1000 {
            let before = evals.get();
            let step = mh_step(&mut state, f64::NEG_INFINITY, &space, &like, &q, &mut rng).unwrap();
            if !step.in_domain {
                seen += 1;
                assert!(!step.accepted && !step.likelihood_evaluated);
                assert_eq!(evals.get(), before);
            }
        }
        assert!(seen > 800);
    }

    #[test]
    fn unconstrained_flat_model_accepts_everything() {
        let space = ParameterSpace::torus(2).unwrap();
        let q = proposal(&space, 1.0);
        let like = |_: &[f64]| 0.0;
        let start = LivePoint::evaluate(Point::new(vec![1.0, 1.0]), &like);
        let (_, stats) = evolve_chain(
            start,
            f64::NEG_INFINITY,
            5000,
            &space,
            &like,
            &q,
            &mut RngState::from_seed(3),
        )
        .unwrap();
        assert_eq!(stats.accepted, 5000);
        assert_eq!(stats.likelihood_evals, 5000);
        assert_eq!(stats.out_of_domain, 0);
    }

    #[test]
    fn tiny_sigma_single_step_keeps_position() {
        let space = ParameterSpace::torus(1).unwrap();
        let q = proposal(&space, 1e-12);
        let like = |x: &[f64]| x[0];
        let start = LivePoint::evaluate(Point::new(vec![3.0]), &like);
        let (end, stats) = evolve_chain(
            start.clone(),
            1.0,
            1,
            &space,
            &like,
            &q,
            &mut RngState::from_seed(4),
        )
        .unwrap();
        assert!((end.point[0] - 3.0).abs() < 1e-10);
        assert!(stats.accepted <= 1);
        assert_eq!(stats.steps, 1);
    }

    #[test]
    fn chain_arguments_validated() {
        let space = circle01();
        let q = proposal(&space, 0.1);
        let like = |_: &[f64]| 0.0;
        let start = LivePoint::evaluate(Point::new(vec![0.5]), &like);
        let mut rng = RngState::from_seed(5);
        assert!(evolve_chain(start.clone(), -1.0, 0, &space, &like, &q, &mut rng).is_err());
        assert!(evolve_chain(start, 0.0, 5, &space, &like, &q, &mut rng).is_err());
    }

    #[test]
    fn constraint_holds_at_every_step() {
        let space = ParameterSpace::new(vec![
            ParameterKind::Circular { lo: 0.0, hi: TAU },
            ParameterKind::SphericalPair {
                theta_index: 1,
                phi_index: 2,
            },
        ])
        .unwrap();
        let q = GeometricProposal::from_fraction(&space, 0.2).unwrap();
        let like = |x: &[f64]| 3.0 * (x[0] - 1.0).cos() + 5.0 * x[1].cos();
        let mut rng = RngState::from_seed(6);
        let mut state = LivePoint::evaluate(Point::new(vec![1.0, 0.0, 0.0]), &like);
        let mut level = f64::NEG_INFINITY;
        for i in 0..100_000 {
            if i % 1000 == 0 {
                // Tighten the contour halfway towards the current state.
                if !level.is_finite() {
                    level = state.log_l - 4.0;
                } else if state.log_l - level > 1e-3 {
                    level = 0.5 * (level + state.log_l);
                }
            }
            mh_step(&mut state, level, &space, &like, &q, &mut rng).unwrap();
            assert!(state.log_l > level);
        }
    }

    #[test]
    fn lazy_likelihood_half_out_of_domain() {
        // Sitting on the closed end of [0, 1] with a tiny step, half of
        // all trials leave the domain.
        let space = ParameterSpace::linear_box(1, 0.0, 1.0).unwrap();
        let q = proposal(&space, 1e-9);
        let evals = Cell::new(0u64);
        let like = |_: &[f64]| {
            evals.set(evals.get() + 1);
            0.0
        };
        let n = 20_000u64;
        let mut rng = RngState::from_seed(7);
        let mut stats = ChainStats::default();
        for _ in 0..n {
            let mut state = LivePoint {
                point: Point::new(vec![1.0]),
                log_l: 0.0,
            };
            let step = mh_step(&mut state, -1.0, &space, &like, &q, &mut rng).unwrap();
            stats.steps += 1;
            stats.likelihood_evals += step.likelihood_evaluated as u64;
        }
        assert_eq!(stats.likelihood_evals, evals.get());
        let frac = stats.likelihood_evals as f64 / n as f64;
        let se = (0.25 / n as f64).sqrt();
        assert!((frac - 0.5).abs() < 3.0 * se, "{frac}");
    }

    #[test]
    fn flat_chain_is_uniform_on_circle() {
        let space = circle01();
        let q = proposal(&space, 0.5);
        let like = |_: &[f64]| 0.0;
        let mut rng = RngState::from_seed(8);
        let mut state = LivePoint::evaluate(Point::new(vec![0.3]), &like);
        let (n, bins) = (100_000, 20);
        let mut counts = vec![0u64; bins];
        for _ in 0..n {
            mh_step(&mut state, f64::NEG_INFINITY, &space, &like, &q, &mut rng).unwrap();
            counts[(state.point[0] * bins as f64) as usize] += 1;
        }
        let expected = n as f64 / bins as f64;
        let chi2: f64 = counts
            .iter()
            .map(|&c| (c as f64 - expected).powi(2) / expected)
            .sum();
        // χ² critical value, 19 degrees of freedom, 1% level.
        assert!(chi2 < 36.191, "chi2 = {chi2}");
    }

    fn bimodal(x: &[f64]) -> f64 {
        let kappa = 20.0;
        let a = kappa * (TAU * (x[0] - 0.05)).cos();
        let b = kappa * (TAU * (x[0] - 0.95)).cos();
        let m = a.max(b);
        m + ((a - m).exp() + (b - m).exp()).ln()
    }

    fn circ_dist(a: f64, b: f64) -> f64 {
        let d = (a - b).abs();
        d.min(1.0 - d)
    }

    #[test]
    fn chain_crosses_seam_between_edge_modes() {
        // This contour splits into two disjoint arcs, one on each side of
        // the seam. The constrained chain targets the prior restricted to
        // them, so it must hop between the arcs to fill both.
        let level = 19.85;
        assert!(bimodal(&[0.0]) < level);
        let space = circle01();
        let q = proposal(&space, 0.2);
        let mut rng = RngState::from_seed(9);
        let mut state = LivePoint::evaluate(Point::new(vec![0.05]), &bimodal);
        assert!(state.log_l > level);
        let n = 10_000;
        let mut samples = Vec::with_capacity(n);
        for _ in 0..n {
            mh_step(&mut state, level, &space, &bimodal, &q, &mut rng).unwrap();
            samples.push(state.point[0]);
        }
        // Constrained-prior mass near 0.05 / 0.95, by a 10⁵-cell grid.
        let m = 100_000;
        let inside: Vec<f64> = (0..m)
            .map(|i| (i as f64 + 0.5) / m as f64)
            .filter(|&x| bimodal(&[x]) > level)
            .collect();
        for mode in [0.05, 0.95] {
            let near = |x: f64| circ_dist(x, mode) < 0.1;
            let oracle = inside.iter().filter(|&&x| near(x)).count() as f64 / inside.len() as f64;
            let frac = samples.iter().filter(|&&x| near(x)).count() as f64 / n as f64;
            assert!(frac >= 0.05, "mode {mode}: {frac}");
            assert!((frac - oracle).abs() < 0.1, "mode {mode}: {frac} vs {oracle}");
        }
        let left = samples.iter().filter(|&&x| x < 0.5).count() as f64 / n as f64;
        assert!((left - 0.5).abs() < 0.1, "{left}");
    }

    #[test]
    fn chains_are_deterministic() {
        let space = ParameterSpace::sphere();
        let q = GeometricProposal::from_fraction(&space, 0.1).unwrap();
        let like = |x: &[f64]| 4.0 * x[0].cos();
        let run = || {
            let start = LivePoint::evaluate(Point::new(vec![0.4, 1.0]), &like);
            evolve_chain(start, 0.0, 500, &space, &like, &q, &mut RngState::from_seed(10)).unwrap()
        };
        assert_eq!(run(), run());
    }
}
