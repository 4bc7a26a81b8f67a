use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand};
use geonest_core::models::MODELS;
use geonest_core::oracle::{grid_log_evidence, QuadratureSpec};
use geonest_core::NestedSampler;

use crate::config::{load_config, ConfigError, Overrides};
use crate::output::{fmt_f64, parse_summary, summary_entries, write_outputs, SUMMARY_FILE};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_RUNTIME: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "geonest", version, about = "Geometric Metropolis-Hastings nested sampling")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run nested sampling and write dead points, posterior samples and a summary.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out_dir: Option<PathBuf>,
        #[arg(long)]
        n_live: Option<usize>,
        /// Suppress the summary on standard output.
        #[arg(long)]
        quiet: bool,
    },
    /// Compute the grid-quadrature evidence and compare it with a previous run.
    Verify {
        #[arg(long)]
        config: PathBuf,
        /// Grid points per dimension (default depends on the dimension).
        #[arg(long)]
        grid: Option<usize>,
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// List the built-in models and their parameters.
    ListModels,
}

#[derive(Debug)]
enum Failure {
    Config(String),
    Runtime(String),
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e.to_string())
    }
}

impl From<geonest_core::Error> for Failure {
    fn from(e: geonest_core::Error) -> Self {
        if e.is_usage() {
            Failure::Config(e.to_string())
        } else {
            Failure::Runtime(e.to_string())
        }
    }
}

/// Runs the command line and returns the process exit code.
pub fn main_with_args<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                write!(err, "{text}")
            } else {
                write!(out, "{text}")
            };
            return code;
        }
    };
    let outcome = match cli.command {
        Command::Run {
            config,
            seed,
            out_dir,
            n_live,
            quiet,
        } => run(
            &config,
            &Overrides {
                seed,
                n_live,
                out_dir,
            },
            quiet,
            out,
            err,
        ),
        Command::Verify {
            config,
            grid,
            out_dir,
        } => verify(&config, grid, out_dir, out),
        Command::ListModels => list_models(out),
    };
    match outcome {
        Ok(()) => EXIT_OK,
        Err(Failure::Config(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_CONFIG
        }
        Err(Failure::Runtime(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_RUNTIME
        }
    }
}

fn run(
    path: &std::path::Path,
    overrides: &Overrides,
    quiet: bool,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<(), Failure> {
    let cfg = load_config(path, overrides)?;
    let sampler = NestedSampler::new(cfg.sampler.clone(), cfg.model.space(), cfg.proposal()?)?;
    let result = sampler.run(&cfg.model).map_err(|e| Failure::Runtime(e.to_string()))?;
    write_outputs(&result, &cfg).map_err(|e| Failure::Runtime(e.to_string()))?;
    if result.diagnostics.truncated {
        let _ = writeln!(
            err,
            "warning: stopped at max_iterations = {} before the termination criterion",
            cfg.sampler.max_iterations
        );
    }
    if !quiet {
        for (k, v) in summary_entries(&result, &cfg) {
            let _ = writeln!(out, "{k} = {v}");
        }
    }
    Ok(())
}

/// Grid resolution that keeps the oracle well under a second per run.
pub fn default_grid(dim: usize) -> usize {
    match dim {
        1 => 8192,
        2 => 2048,
        _ => 256,
    }
}

fn verify(
    path: &std::path::Path,
    grid: Option<usize>,
    out_dir: Option<PathBuf>,
    out: &mut dyn Write,
) -> Result<(), Failure> {
    let cfg = load_config(
        path,
        &Overrides {
            out_dir,
            ..Overrides::default()
        },
    )?;
    let space = cfg.model.space();
    let n = grid.unwrap_or_else(|| default_grid(space.dim()));
    let spec = QuadratureSpec::new(space, n)?;
    let oracle = grid_log_evidence(&spec, &cfg.model)?;
    let _ = writeln!(out, "model = {}", cfg.model_spec.name);
    let _ = writeln!(out, "grid_points_per_dim = {n}");
    let _ = writeln!(out, "oracle_log_z = {}", fmt_f64(oracle));

    let summary_path = cfg.output_dir.join(SUMMARY_FILE);
    let Ok(text) = std::fs::read_to_string(&summary_path) else {
        let _ = writeln!(out, "no sampler summary at {}", summary_path.display());
        return Ok(());
    };
    let summary = parse_summary(&text);
    let read = |key: &str| -> Result<f64, Failure> {
        summary
            .get(key)
            .and_then(|v| v.parse().ok())
            .ok_or_else(|| {
                Failure::Runtime(format!("{} has no valid `{key}`", summary_path.display()))
            })
    };
    let (log_z, log_z_err) = (read("log_z")?, read("log_z_err")?);
    if summary.get("model").map(String::as_str) != Some(cfg.model_spec.name.as_str()) {
        let _ = writeln!(out, "warning: summary was written for a different model");
    }
    let delta = log_z - oracle;
    let _ = writeln!(out, "sampler_log_z = {}", fmt_f64(log_z));
    let _ = writeln!(out, "sampler_log_z_err = {}", fmt_f64(log_z_err));
    let _ = writeln!(out, "delta_log_z = {}", fmt_f64(delta));
    let _ = writeln!(out, "delta_in_log_z_err = {:.3}", delta.abs() / log_z_err);
    Ok(())
}

fn list_models(out: &mut dyn Write) -> Result<(), Failure> {
    for m in MODELS {
        let _ = writeln!(out, "{}\n    {}", m.name, m.description);
        for p in m.params {
            let _ = writeln!(out, "    {} = {} ({})", p.name, p.default, p.help);
        }
    }
    Ok(())
}
