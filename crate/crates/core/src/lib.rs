//! Geometric nested sampling.
//!
//! A Metropolis-Hastings nested sampler whose trial distributions respect the
//! geometry of each parameter: bounded intervals, periodic (circular and
//! toroidal) parameters with a wrapped Gaussian, and polar/azimuth pairs on
//! the unit sphere with a Cartesian Gaussian projected back onto the sphere.
//! Neither of the two geometric proposals can leave the prior support, so no
//! trial is ever rejected for being out of domain.
//!
//! The crate is `no_std` (with `alloc`). File formats, configuration and the
//! command-line runner live in the companion `geonest` crate.
//!
//! ```
//! use geonest_core::{models::Model, GeometricProposal, NestedSampler, SamplerConfig};
//!
//! let model = Model::VonMises { mu: 1.0, kappa: 5.0 };
//! let space = model.space();
//! let proposal = GeometricProposal::from_fraction(&space, 0.1).unwrap();
//! let config = SamplerConfig { n_live: 100, seed: 7, ..SamplerConfig::default() };
//! let result = NestedSampler::new(config, space, proposal)
//!     .unwrap()
//!     .run(&model)
//!     .unwrap();
//! assert!((result.log_z - 3.3047).abs() < 0.5);
//! ```

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

mod error;
mod math;

pub mod geometry;
pub mod kernel;
pub mod models;
pub mod oracle;
pub mod proposal;
pub mod rng;
pub mod sampler;
pub mod space;

pub use error::{Error, Result};
pub use geometry::UnitVec3;
pub use kernel::{evolve_chain, mh_step, ChainStats, LivePoint, LogLikelihood, StepOutcome};
pub use proposal::{CircularBoundary, GeometricProposal, ProposalScales, TrialOutcome};
pub use rng::RngState;
pub use sampler::{
    log_sum_exp, posterior_resample, DeadPointRecord, NestedSampler, RunDiagnostics, RunResult,
    SamplerConfig,
};
pub use space::{ParameterKind, ParameterSpace, Point};
