//! Run configuration, output files and the `geonest` command line.
//!
//! The config file is TOML with four sections:
//!
//! ```toml
//! [model]
//! name = "von_mises"     # see `geonest list-models`
//! kappa = 5.0            # any parameter of the chosen model
//!
//! [sampler]
//! n_live = 500
//! chain_steps = 20
//! termination_frac = 1e-3
//! max_iterations = 1000000
//! seed = 1
//!
//! [proposal]
//! fraction = 0.1         # or: sigma = [0.3], one width per parameter kind
//!
//! [output]
//! dir = "geonest-out"
//! posterior_count = 10000
//! ```
//!
//! Random streams are derived from `seed` by the fixed offsets in
//! [`geonest_core::rng`]: `+0` for the initial livepoints,
//! `+0x9E3779B97F4A7C15` for the chains and `+0x3C6EF372FE94F82A` for
//! posterior resampling.

pub mod cli;
pub mod config;
pub mod output;

pub use config::{parse_config, ConfigError, Overrides, RunConfig, ScaleSetting};
pub use output::{write_outputs, OutputError};
