//! The nested sampling loop.
//!
//! The worst livepoint is retired at every iteration and replaced by a
//! constrained MH chain started from another livepoint. Prior volume
//! shrinks deterministically, `X_i = exp(-i / n_live)`, and the evidence is
//! the rectangle-rule sum of `L_i (X_{i-1} - X_i)` plus an equal share of
//! the final volume for every remaining livepoint.

use alloc::vec::Vec;

use rand::Rng;

use crate::error::{Error, Result};
use crate::kernel::{evolve_chain, ChainStats, LivePoint, LogLikelihood};
use crate::math;
use crate::proposal::GeometricProposal;
use crate::rng::{RngState, CHAIN_STREAM, INIT_STREAM, RESAMPLE_STREAM};
use crate::space::{ParameterSpace, Point};

#[derive(Debug, Clone, PartialEq)]
pub struct SamplerConfig {
    pub n_live: usize,
    pub chain_steps: usize,
    /// Stop once the remaining evidence estimate falls below this fraction
    /// of the accumulated evidence.
    pub termination_frac: f64,
    pub max_iterations: usize,
    pub seed: u64,
    /// Number of equal-weight posterior samples to draw.
    pub posterior_count: usize,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        SamplerConfig {
            n_live: 500,
            chain_steps: 20,
            termination_frac: 1e-3,
            max_iterations: 1_000_000,
            seed: 0,
            posterior_count: 10_000,
        }
    }
}

impl SamplerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_live < 2 {
            return Err(Error::InvalidConfig {
                field: "n_live",
                constraint: "n_live >= 2",
            });
        }
        if self.chain_steps < 1 {
            return Err(Error::InvalidConfig {
                field: "chain_steps",
                constraint: "chain_steps >= 1",
            });
        }
        if !(self.termination_frac > 0.0 && self.termination_frac < 1.0) {
            return Err(Error::InvalidConfig {
                field: "termination_frac",
                constraint: "0 < termination_frac < 1",
            });
        }
        if self.max_iterations < 1 {
            return Err(Error::InvalidConfig {
                field: "max_iterations",
                constraint: "max_iterations >= 1",
            });
        }
        Ok(())
    }
}

/// A retired livepoint and its share of the evidence.
#[derive(Debug, Clone, PartialEq)]
pub struct DeadPointRecord {
    pub point: Point,
    pub log_l: f64,
    /// Log prior volume enclosed by the contour at retirement.
    pub log_x: f64,
    /// Unnormalised log posterior weight, `log_l + log ΔX`.
    pub log_weight: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunDiagnostics {
    /// The run hit `max_iterations` before the termination criterion.
    pub truncated: bool,
    /// The live set collapsed onto one likelihood value and could not shrink further.
    pub plateau: bool,
    pub chain: ChainStats,
    /// Log-likelihood of the replacement found at each iteration, aligned
    /// with the dead points. Each exceeds that dead point's `log_l`.
    pub replacement_log_l: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub log_z: f64,
    pub log_z_err: f64,
    pub information_nats: f64,
    pub n_iterations: usize,
    pub dead_points: Vec<DeadPointRecord>,
    /// The livepoints left at termination, each weighted by `X_final / n_live`.
    pub final_live: Vec<DeadPointRecord>,
    pub posterior_samples: Vec<Point>,
    pub acceptance_rate: f64,
    /// Every likelihood call, including the initial livepoints.
    pub likelihood_evals: u64,
    pub diagnostics: RunDiagnostics,
}

impl RunResult {
    /// Dead points followed by the final livepoints.
    pub fn weighted_records(&self) -> impl Iterator<Item = &DeadPointRecord> {
        self.dead_points.iter().chain(&self.final_live)
    }
}

#[derive(Debug, Clone)]
pub struct NestedSampler {
    config: SamplerConfig,
    space: ParameterSpace,
    proposal: GeometricProposal,
}

impl NestedSampler {
    pub fn new(
        config: SamplerConfig,
        space: ParameterSpace,
        proposal: GeometricProposal,
    ) -> Result<Self> {
        config.validate()?;
        if proposal.scales().as_slice().len() != space.kinds().len() {
            return Err(Error::InvalidScales(alloc::format!(
                "{} scales for {} parameter kinds",
                proposal.scales().as_slice().len(),
                space.kinds().len()
            )));
        }
        Ok(NestedSampler {
            config,
            space,
            proposal,
        })
    }

    pub fn config(&self) -> &SamplerConfig {
        &self.config
    }

    pub fn space(&self) -> &ParameterSpace {
        &self.space
    }

    pub fn run<L: LogLikelihood + ?Sized>(&self, likelihood: &L) -> Result<RunResult> {
        let cfg = &self.config;
        let n = cfg.n_live;
        let n_f = n as f64;

        let mut init_rng = RngState::substream(cfg.seed, INIT_STREAM);
        let mut live: Vec<LivePoint> = (0..n)
            .map(|_| {
                let mut lp = LivePoint::evaluate(self.space.sample_prior(&mut init_rng), likelihood);
                if lp.log_l.is_nan() {
                    lp.log_l = f64::NEG_INFINITY;
                }
                lp
            })
            .collect();
        if live.iter().all(|p| p.log_l == f64::NEG_INFINITY) {
            return Err(Error::ZeroLikelihood);
        }

        let mut rng = RngState::substream(cfg.seed, CHAIN_STREAM);
        let log_shell = math::ln(math::expm1(1.0 / n_f));
        let log_frac = math::ln(cfg.termination_frac);

        let mut dead: Vec<DeadPointRecord> = Vec::new();
        let mut diagnostics = RunDiagnostics::default();
        let mut log_z_acc = f64::NEG_INFINITY;
        let mut log_x = 0.0;
        let mut candidates: Vec<usize> = Vec::with_capacity(n);

        loop {
            if dead.len() >= cfg.max_iterations {
                diagnostics.truncated = true;
                break;
            }
            let (worst, log_l_min) = argmin(&live);
            let log_l_max = live.iter().map(|p| p.log_l).fold(f64::NEG_INFINITY, f64::max);
            if log_l_max <= log_l_min {
                // Nothing left strictly inside the contour; the live set
                // is the rest of the volume at a single likelihood level.
                diagnostics.plateau = true;
                break;
            }

            let i = dead.len() + 1;
            log_x = -(i as f64) / n_f;
            let log_weight = log_l_min + log_x + log_shell;
            log_z_acc = log_add_exp(log_z_acc, log_weight);
            dead.push(DeadPointRecord {
                point: live[worst].point.clone(),
                log_l: log_l_min,
                log_x,
                log_weight,
            });

            candidates.clear();
            candidates.extend((0..n).filter(|&j| j != worst && live[j].log_l > log_l_min));
            let start = candidates[rng.random_range(0..candidates.len())];
            let (replacement, stats) = evolve_chain(
                live[start].clone(),
                log_l_min,
                cfg.chain_steps,
                &self.space,
                likelihood,
                &self.proposal,
                &mut rng,
            )?;
            diagnostics.chain.merge(&stats);
            diagnostics.replacement_log_l.push(replacement.log_l);
            live[worst] = replacement;

            let log_l_max = live.iter().map(|p| p.log_l).fold(f64::NEG_INFINITY, f64::max);
            if log_l_max + log_x < log_frac + log_z_acc {
                break;
            }
        }

        let log_share = log_x - math::ln(n_f);
        let final_live: Vec<DeadPointRecord> = live
            .into_iter()
            .map(|p| DeadPointRecord {
                log_weight: p.log_l + log_share,
                point: p.point,
                log_l: p.log_l,
                log_x,
            })
            .collect();

        let weights: Vec<f64> = dead
            .iter()
            .chain(&final_live)
            .map(|r| r.log_weight)
            .collect();
        let log_z = log_sum_exp(&weights)?;
        let information = dead
            .iter()
            .chain(&final_live)
            .filter(|r| r.log_weight > f64::NEG_INFINITY)
            .map(|r| math::exp(r.log_weight - log_z) * (r.log_l - log_z))
            .sum::<f64>()
            .max(0.0);

        let mut resample_rng = RngState::substream(cfg.seed, RESAMPLE_STREAM);
        let posterior_samples = posterior_resample(
            &dead,
            &final_live,
            log_z,
            cfg.posterior_count,
            &mut resample_rng,
        )?;

        let chain = diagnostics.chain;
        Ok(RunResult {
            log_z,
            log_z_err: math::sqrt(information / n_f),
            information_nats: information,
            n_iterations: dead.len(),
            dead_points: dead,
            final_live,
            posterior_samples,
            acceptance_rate: chain.acceptance_rate(),
            likelihood_evals: n as u64 + chain.likelihood_evals,
            diagnostics,
        })
    }
}

fn argmin(live: &[LivePoint]) -> (usize, f64) {
    live.iter()
        .enumerate()
        .fold((0, f64::INFINITY), |(bi, bv), (i, p)| {
            if p.log_l < bv {
                (i, p.log_l)
            } else {
                (bi, bv)
            }
        })
}

fn log_add_exp(a: f64, b: f64) -> f64 {
    let m = a.max(b);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + math::ln(math::exp(a - m) + math::exp(b - m))
}

/// `log Σ exp(v)`, shifted by the maximum so large and tiny values survive.
pub fn log_sum_exp(values: &[f64]) -> Result<f64> {
    let max = values
        .iter()
        .copied()
        .reduce(f64::max)
        .ok_or(Error::EmptyInput)?;
    if max == f64::NEG_INFINITY || max == f64::INFINITY {
        return Ok(max);
    }
    let sum: f64 = values.iter().map(|v| math::exp(v - max)).sum();
    Ok(max + math::ln(sum))
}

/// Streaming `log Σ exp`, for sums too large to hold in memory.
#[derive(Debug, Clone, Copy)]
pub(crate) struct LogSumExpAcc {
    max: f64,
    sum: f64,
}

impl LogSumExpAcc {
    pub(crate) fn new() -> Self {
        LogSumExpAcc {
            max: f64::NEG_INFINITY,
            sum: 0.0,
        }
    }

    pub(crate) fn push(&mut self, v: f64) {
        if v == f64::NEG_INFINITY {
            return;
        }
        if v <= self.max {
            self.sum += math::exp(v - self.max);
        } else {
            self.sum = self.sum * math::exp(self.max - v) + 1.0;
            self.max = v;
        }
    }

    pub(crate) fn value(&self) -> f64 {
        if self.max == f64::NEG_INFINITY {
            f64::NEG_INFINITY
        } else {
            self.max + math::ln(self.sum)
        }
    }
}

/// Equal-weight posterior draws by systematic resampling.
///
/// Each record is selected a number of times within one of `count` times
/// its normalised weight `exp(log_weight - log_z)`.
pub fn posterior_resample<R: Rng + ?Sized>(
    dead: &[DeadPointRecord],
    final_live: &[DeadPointRecord],
    log_z: f64,
    count: usize,
    rng: &mut R,
) -> Result<Vec<Point>> {
    if count == 0 {
        return Ok(Vec::new());
    }
    let weights: Vec<f64> = dead
        .iter()
        .chain(final_live)
        .map(|r| math::exp(r.log_weight - log_z))
        .collect();
    let total: f64 = weights.iter().sum();
    if !(total.is_finite() && total > 0.0) || weights.iter().any(|w| !w.is_finite()) {
        return Err(Error::Internal("posterior weights do not normalise"));
    }

    let offset = rng.random::<f64>();
    let mut out = Vec::with_capacity(count);
    let mut cumulative = 0.0;
    let mut k = 0usize;
    for (record, w) in dead.iter().chain(final_live).zip(&weights) {
        cumulative += w / total * count as f64;
        while k < count && (k as f64 + offset) < cumulative {
            out.push(record.point.clone());
            k += 1;
        }
    }
    // Rounding can leave the last slot unfilled; it belongs to the last
    // record with positive weight.
    if k < count {
        let last = dead
            .iter()
            .chain(final_live)
            .zip(&weights)
            .filter(|(_, w)| **w > 0.0)
            .last()
            .map(|(r, _)| r.point.clone())
            .ok_or(Error::Internal("no positive posterior weight"))?;
        out.resize(count, last);
    }
    Ok(out)
}
