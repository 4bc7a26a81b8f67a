//! `dead_points.csv`, `posterior.csv` and `summary.txt`.
//!
//! Floats are written with 17 significant digits so every value reads back
//! bit-exactly. Files are written to a temporary file in the output
//! directory and renamed into place.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use geonest_core::RunResult;

use crate::config::{RunConfig, ScaleSetting};

pub const DEAD_POINTS_FILE: &str = "dead_points.csv";
pub const POSTERIOR_FILE: &str = "posterior.csv";
pub const SUMMARY_FILE: &str = "summary.txt";

#[derive(Debug, thiserror::Error)]
#[error("cannot write {path}: {source}")]
pub struct OutputError {
    pub path: PathBuf,
    #[source]
    pub source: std::io::Error,
}

/// Formats with 17 significant digits; `inf`, `-inf` and `NaN` as Rust spells them.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn dead_points_csv(result: &RunResult, names: &[String]) -> String {
    let mut out = String::from("iter,log_l,log_x,log_weight");
    for n in names {
        out.push(',');
        out.push_str(n);
    }
    out.push('\n');
    for (i, d) in result.dead_points.iter().enumerate() {
        let _ = write!(
            out,
            "{},{},{},{}",
            i + 1,
            fmt_f64(d.log_l),
            fmt_f64(d.log_x),
            fmt_f64(d.log_weight)
        );
        for v in d.point.coords() {
            out.push(',');
            out.push_str(&fmt_f64(*v));
        }
        out.push('\n');
    }
    out
}

pub fn posterior_csv(result: &RunResult, names: &[String]) -> String {
    let mut out = names.join(",");
    out.push('\n');
    for p in &result.posterior_samples {
        let row: Vec<String> = p.coords().iter().map(|v| fmt_f64(*v)).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

/// `key = value` pairs: run results first, then every effective setting.
pub fn summary_entries(result: &RunResult, config: &RunConfig) -> Vec<(String, String)> {
    let s = &config.sampler;
    let mut e: Vec<(String, String)> = vec![
        ("log_z".into(), fmt_f64(result.log_z)),
        ("log_z_err".into(), fmt_f64(result.log_z_err)),
        ("information_nats".into(), fmt_f64(result.information_nats)),
        ("n_iterations".into(), result.n_iterations.to_string()),
        ("acceptance_rate".into(), fmt_f64(result.acceptance_rate)),
        ("likelihood_evals".into(), result.likelihood_evals.to_string()),
        ("truncated".into(), result.diagnostics.truncated.to_string()),
        ("plateau".into(), result.diagnostics.plateau.to_string()),
        ("seed".into(), s.seed.to_string()),
        ("model".into(), config.model_spec.name.clone()),
    ];
    for (k, v) in &config.model_params {
        e.push((format!("model.{k}"), fmt_f64(*v)));
    }
    e.extend([
        ("n_live".into(), s.n_live.to_string()),
        ("chain_steps".into(), s.chain_steps.to_string()),
        ("termination_frac".into(), fmt_f64(s.termination_frac)),
        ("max_iterations".into(), s.max_iterations.to_string()),
        ("posterior_count".into(), s.posterior_count.to_string()),
    ]);
    match &config.scales {
        ScaleSetting::Fraction(f) => e.push(("proposal.fraction".into(), fmt_f64(*f))),
        ScaleSetting::Sigma(v) => e.push((
            "proposal.sigma".into(),
            v.iter().map(|x| fmt_f64(*x)).collect::<Vec<_>>().join(", "),
        )),
    }
    e.push(("output_dir".into(), config.output_dir.display().to_string()));
    e
}

pub fn summary_txt(result: &RunResult, config: &RunConfig) -> String {
    summary_entries(result, config)
        .into_iter()
        .map(|(k, v)| format!("{k} = {v}\n"))
        .collect()
}

/// Parses `summary.txt` back into its key/value pairs.
pub fn parse_summary(text: &str) -> BTreeMap<String, String> {
    text.lines()
        .filter_map(|l| l.split_once(" = "))
        .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
        .collect()
}

pub fn write_outputs(result: &RunResult, config: &RunConfig) -> Result<(), OutputError> {
    let dir = &config.output_dir;
    std::fs::create_dir_all(dir).map_err(|source| OutputError {
        path: dir.clone(),
        source,
    })?;
    let names = config.model.param_names();
    write_atomic(&dir.join(DEAD_POINTS_FILE), &dead_points_csv(result, &names))?;
    write_atomic(&dir.join(POSTERIOR_FILE), &posterior_csv(result, &names))?;
    write_atomic(&dir.join(SUMMARY_FILE), &summary_txt(result, config))?;
    Ok(())
}

fn write_atomic(path: &Path, contents: &str) -> Result<(), OutputError> {
    let err = |source| OutputError {
        path: path.to_path_buf(),
        source,
    };
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(err)?;
    tmp.write_all(contents.as_bytes()).map_err(err)?;
    tmp.flush().map_err(err)?;
    tmp.persist(path).map_err(|e| err(e.error))?;
    Ok(())
}
