use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use geonest_core::models::{model_info, Model, ModelSpec};
use geonest_core::{GeometricProposal, ParameterSpace, ProposalScales, SamplerConfig};
use toml::{Table, Value};

pub const DEFAULT_FRACTION: f64 = 0.1;
pub const DEFAULT_OUTPUT_DIR: &str = "geonest-out";

const SECTIONS: &[&str] = &["model", "sampler", "proposal", "output"];
const SAMPLER_KEYS: &[&str] = &[
    "n_live",
    "chain_steps",
    "termination_frac",
    "max_iterations",
    "seed",
];
const PROPOSAL_KEYS: &[&str] = &["fraction", "sigma"];
const OUTPUT_KEYS: &[&str] = &["dir", "posterior_count"];

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("malformed config: {0}")]
    Syntax(String),

    #[error("{}", UnknownKeys(.0))]
    UnknownKeys(Vec<(String, Option<String>)>),

    #[error("`{key}` must be {expected}")]
    Type { key: String, expected: &'static str },

    #[error("{0}")]
    Invalid(#[from] geonest_core::Error),
}

struct UnknownKeys<'a>(&'a [(String, Option<String>)]);

impl fmt::Display for UnknownKeys<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "unknown config key(s): ")?;
        for (i, (key, hint)) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "`{key}`")?;
            if let Some(hint) = hint {
                write!(f, " (did you mean `{hint}`?)")?;
            }
        }
        Ok(())
    }
}

/// How proposal widths are chosen.
#[derive(Debug, Clone, PartialEq)]
pub enum ScaleSetting {
    /// A fraction of each parameter's extent.
    Fraction(f64),
    /// Explicit widths, one per parameter kind.
    Sigma(Vec<f64>),
}

impl ScaleSetting {
    pub fn proposal(&self, space: &ParameterSpace) -> Result<GeometricProposal, ConfigError> {
        let scales = match self {
            ScaleSetting::Fraction(f) => ProposalScales::suggest(space, *f)?,
            ScaleSetting::Sigma(s) => ProposalScales::new(space, s.clone())?,
        };
        Ok(GeometricProposal::new(scales))
    }
}

/// A fully validated run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub model_spec: ModelSpec,
    /// Every model parameter, defaults included.
    pub model_params: BTreeMap<String, f64>,
    pub model: Model,
    pub sampler: SamplerConfig,
    pub scales: ScaleSetting,
    pub output_dir: PathBuf,
}

impl RunConfig {
    pub fn proposal(&self) -> Result<GeometricProposal, ConfigError> {
        self.scales.proposal(&self.model.space())
    }
}

/// Command-line values that take precedence over the config file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub n_live: Option<usize>,
    pub out_dir: Option<PathBuf>,
}

pub fn load_config(path: &Path, overrides: &Overrides) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut cfg = parse_config(&text)?;
    if let Some(seed) = overrides.seed {
        cfg.sampler.seed = seed;
    }
    if let Some(n_live) = overrides.n_live {
        cfg.sampler.n_live = n_live;
    }
    if let Some(dir) = &overrides.out_dir {
        cfg.output_dir = dir.clone();
    }
    cfg.sampler.validate()?;
    Ok(cfg)
}

/// Parses and validates config text, applying defaults.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let table: Table = text
        .parse()
        .map_err(|e: toml::de::Error| ConfigError::Syntax(e.message().to_string()))?;

    let mut unknown = Vec::new();
    for (name, value) in &table {
        let known: &[&str] = match name.as_str() {
            "model" => &[],
            "sampler" => SAMPLER_KEYS,
            "proposal" => PROPOSAL_KEYS,
            "output" => OUTPUT_KEYS,
            _ => {
                unknown.push((name.clone(), suggest(name, SECTIONS)));
                continue;
            }
        };
        let Some(section) = value.as_table() else {
            return Err(ConfigError::Type {
                key: name.clone(),
                expected: "a [section]",
            });
        };
        if name != "model" {
            for key in section.keys() {
                if !known.contains(&key.as_str()) {
                    unknown.push((format!("{name}.{key}"), suggest(key, known)));
                }
            }
        }
    }

    let empty = Table::new();
    let section = |name: &str| table.get(name).and_then(Value::as_table).unwrap_or(&empty);

    let model_section = section("model");
    let name = match model_section.get("name") {
        Some(Value::String(s)) => s.clone(),
        Some(_) => {
            return Err(ConfigError::Type {
                key: "model.name".into(),
                expected: "a string",
            })
        }
        None => {
            return Err(ConfigError::Type {
                key: "model.name".into(),
                expected: "set to a model name",
            })
        }
    };
    let info = model_info(&name).ok_or_else(|| {
        let names: Vec<&str> = geonest_core::models::MODELS.iter().map(|m| m.name).collect();
        ConfigError::UnknownKeys(vec![(format!("model.name = {name}"), suggest(&name, &names))])
    })?;
    let param_names: Vec<&str> = info.params.iter().map(|p| p.name).collect();
    let mut spec = ModelSpec::new(name);
    for (key, value) in model_section {
        if key == "name" {
            continue;
        }
        if !param_names.contains(&key.as_str()) {
            unknown.push((format!("model.{key}"), suggest(key, &param_names)));
            continue;
        }
        spec.params.insert(key.clone(), real(value, &format!("model.{key}"))?);
    }
    if !unknown.is_empty() {
        return Err(ConfigError::UnknownKeys(unknown));
    }

    let model_params = spec.effective_params()?;
    let model = spec.build()?;

    let s = section("sampler");
    let o = section("output");
    let defaults = SamplerConfig::default();
    let sampler = SamplerConfig {
        n_live: opt(s, "n_live", "sampler", count)?.unwrap_or(defaults.n_live),
        chain_steps: opt(s, "chain_steps", "sampler", count)?.unwrap_or(defaults.chain_steps),
        termination_frac: opt(s, "termination_frac", "sampler", real)?
            .unwrap_or(defaults.termination_frac),
        max_iterations: opt(s, "max_iterations", "sampler", count)?
            .unwrap_or(defaults.max_iterations),
        seed: opt(s, "seed", "sampler", count)?.map_or(defaults.seed, |v| v as u64),
        posterior_count: opt(o, "posterior_count", "output", count)?
            .unwrap_or(defaults.posterior_count),
    };
    sampler.validate()?;

    let p = section("proposal");
    let scales = match (p.get("fraction"), p.get("sigma")) {
        (Some(_), Some(_)) => {
            return Err(ConfigError::Type {
                key: "proposal".into(),
                expected: "either `fraction` or `sigma`, not both",
            })
        }
        (Some(v), None) => ScaleSetting::Fraction(real(v, "proposal.fraction")?),
        (None, Some(Value::Array(items))) => ScaleSetting::Sigma(
            items
                .iter()
                .map(|v| real(v, "proposal.sigma"))
                .collect::<Result<_, _>>()?,
        ),
        (None, Some(_)) => {
            return Err(ConfigError::Type {
                key: "proposal.sigma".into(),
                expected: "an array of numbers",
            })
        }
        (None, None) => ScaleSetting::Fraction(DEFAULT_FRACTION),
    };
    scales.proposal(&model.space())?;

    let output_dir = match o.get("dir") {
        Some(Value::String(d)) => PathBuf::from(d),
        Some(_) => {
            return Err(ConfigError::Type {
                key: "output.dir".into(),
                expected: "a string",
            })
        }
        None => PathBuf::from(DEFAULT_OUTPUT_DIR),
    };

    Ok(RunConfig {
        model_spec: spec,
        model_params,
        model,
        sampler,
        scales,
        output_dir,
    })
}

fn opt<T>(
    section: &Table,
    key: &str,
    prefix: &str,
    convert: fn(&Value, &str) -> Result<T, ConfigError>,
) -> Result<Option<T>, ConfigError> {
    section
        .get(key)
        .map(|v| convert(v, &format!("{prefix}.{key}")))
        .transpose()
}

fn real(value: &Value, key: &str) -> Result<f64, ConfigError> {
    match value {
        Value::Float(f) => Ok(*f),
        Value::Integer(i) => Ok(*i as f64),
        _ => Err(ConfigError::Type {
            key: key.into(),
            expected: "a number",
        }),
    }
}

fn count(value: &Value, key: &str) -> Result<usize, ConfigError> {
    match value {
        Value::Integer(i) if *i >= 0 => Ok(*i as usize),
        _ => Err(ConfigError::Type {
            key: key.into(),
            expected: "a non-negative integer",
        }),
    }
}

fn suggest(key: &str, candidates: &[&str]) -> Option<String> {
    candidates
        .iter()
        .map(|c| (strsim::jaro_winkler(key, c), *c))
        .filter(|(score, _)| *score > 0.8)
        .max_by(|a, b| a.0.total_cmp(&b.0))
        .map(|(_, c)| c.to_string())
}
