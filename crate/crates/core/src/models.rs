//! Built-in toy likelihoods on circles, tori and spheres.
//!
//! All likelihoods are unnormalised; recovering their normalisation is the
//! evidence calculation. Each has an evidence that the grid oracle (and in
//! most cases a closed form) can check.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::geometry::{angles_to_cart_unchecked, UnitVec3};
use crate::kernel::LogLikelihood;
use crate::math::{self, PI, TAU};
use crate::space::{ParameterKind, ParameterSpace};

/// Distance of the edge-bimodal mode centres from the seam in each angle.
pub const EDGE_MODE_OFFSET: f64 = 0.1;

/// Tunable model parameter with its default.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParamInfo {
    pub name: &'static str,
    pub default: f64,
    pub help: &'static str,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelInfo {
    pub name: &'static str,
    pub description: &'static str,
    pub params: &'static [ParamInfo],
}

const fn param(name: &'static str, default: f64, help: &'static str) -> ParamInfo {
    ParamInfo {
        name,
        default,
        help,
    }
}

pub const MODELS: &[ModelInfo] = &[
    ModelInfo {
        name: "von_mises",
        description: "von Mises log-likelihood kappa*cos(theta - mu) on the circle [0, 2pi)",
        params: &[
            param("kappa", 5.0, "concentration, >= 0"),
            param("mu", 1.0, "mode location in [0, 2pi)"),
        ],
    },
    ModelInfo {
        name: "edge_bimodal_torus",
        description: "equal mixture of two von Mises products on the 2-torus, modes at \
                      (0.1, 0.1) and (2pi-0.1, 2pi-0.1) on either side of the seam",
        params: &[param("kappa", 10.0, "shared concentration, >= 0")],
    },
    ModelInfo {
        name: "vmf_sphere",
        description: "von Mises-Fisher log-likelihood kappa*(m.n) on the unit sphere",
        params: &[
            param("kappa", 10.0, "concentration, >= 0"),
            param("mu_theta", 0.0, "polar angle of the mean direction, [0, pi]"),
            param("mu_phi", 0.0, "azimuth of the mean direction, [0, 2pi)"),
        ],
    },
    ModelInfo {
        name: "antipodal_vmf_mixture",
        description: "equal mixture of von Mises-Fisher components at m and -m",
        params: &[
            param("kappa", 10.0, "shared concentration, >= 0"),
            param("mu_theta", 0.0, "polar angle of m, [0, pi]"),
            param("mu_phi", 0.0, "azimuth of m, [0, 2pi)"),
        ],
    },
    ModelInfo {
        name: "gaussian_box",
        description: "isotropic Gaussian log-likelihood on the linear box [0, 1]^dims",
        params: &[
            param("dims", 1.0, "number of linear parameters, 1..=3"),
            param("mean", 0.5, "mean of every coordinate, in [0, 1]"),
            param("sigma", 0.05, "width of every coordinate, > 0"),
        ],
    },
    ModelInfo {
        name: "constant",
        description: "constant log-likelihood on any mix of geometries",
        params: &[
            param("log_l", 0.0, "the constant log-likelihood"),
            param("linear", 0.0, "number of linear [0, 1] parameters"),
            param("circular", 1.0, "number of circular [0, 2pi) parameters"),
            param("spheres", 0.0, "number of spherical (theta, phi) pairs"),
        ],
    },
];

pub fn model_info(name: &str) -> Option<&'static ModelInfo> {
    MODELS.iter().find(|m| m.name == name)
}

/// A named model with its parameter values, as declared in a run config.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelSpec {
    pub name: String,
    pub params: BTreeMap<String, f64>,
}

impl ModelSpec {
    pub fn new(name: impl Into<String>) -> Self {
        ModelSpec {
            name: name.into(),
            params: BTreeMap::new(),
        }
    }

    pub fn with(mut self, key: &str, value: f64) -> Self {
        self.params.insert(key.to_string(), value);
        self
    }

    /// Parameters with every default filled in.
    pub fn effective_params(&self) -> Result<BTreeMap<String, f64>> {
        let info = model_info(&self.name)
            .ok_or_else(|| Error::InvalidModel(format!("unknown model `{}`", self.name)))?;
        if let Some(unknown) = self
            .params
            .keys()
            .find(|k| !info.params.iter().any(|p| p.name == k.as_str()))
        {
            return Err(Error::InvalidModel(format!(
                "model `{}` has no parameter `{unknown}`",
                self.name
            )));
        }
        Ok(info
            .params
            .iter()
            .map(|p| {
                let v = self.params.get(p.name).copied().unwrap_or(p.default);
                (p.name.to_string(), v)
            })
            .collect())
    }

    pub fn build(&self) -> Result<Model> {
        let p = self.effective_params()?;
        let get = |k: &str| p[k];
        let model = match self.name.as_str() {
            "von_mises" => Model::VonMises {
                mu: get("mu"),
                kappa: get("kappa"),
            },
            "edge_bimodal_torus" => Model::EdgeBimodalTorus {
                kappa: get("kappa"),
            },
            "vmf_sphere" | "antipodal_vmf_mixture" => {
                let (theta, phi) = (get("mu_theta"), get("mu_phi"));
                if !(0.0..=PI).contains(&theta) || !(0.0..TAU).contains(&phi) {
                    return Err(Error::InvalidModel(format!(
                        "mean direction ({theta}, {phi}) outside [0, pi] x [0, 2pi)"
                    )));
                }
                let mean = angles_to_cart_unchecked(theta, phi);
                let kappa = get("kappa");
                if self.name == "vmf_sphere" {
                    Model::VmfSphere { mean, kappa }
                } else {
                    Model::AntipodalVmfMixture { mean, kappa }
                }
            }
            "gaussian_box" => {
                let dims = count(&p, "dims")?;
                if !(1..=3).contains(&dims) {
                    return Err(Error::InvalidModel("dims must be 1, 2 or 3".into()));
                }
                Model::GaussianBox {
                    mean: vec![get("mean"); dims],
                    sigma: vec![get("sigma"); dims],
                }
            }
            "constant" => Model::Constant {
                log_l: get("log_l"),
                linear: count(&p, "linear")?,
                circular: count(&p, "circular")?,
                spheres: count(&p, "spheres")?,
            },
            _ => unreachable!("checked by effective_params"),
        };
        model.validate()?;
        Ok(model)
    }
}

fn count(p: &BTreeMap<String, f64>, key: &str) -> Result<usize> {
    let v = p[key];
    if v >= 0.0 && v <= 1e6 && math::floor(v) == v {
        Ok(v as usize)
    } else {
        Err(Error::InvalidModel(format!(
            "`{key}` must be a non-negative integer, got {v}"
        )))
    }
}

/// A ready-to-evaluate model.
#[derive(Debug, Clone, PartialEq)]
pub enum Model {
    VonMises { mu: f64, kappa: f64 },
    EdgeBimodalTorus { kappa: f64 },
    VmfSphere { mean: UnitVec3, kappa: f64 },
    AntipodalVmfMixture { mean: UnitVec3, kappa: f64 },
    GaussianBox { mean: Vec<f64>, sigma: Vec<f64> },
    Constant {
        log_l: f64,
        linear: usize,
        circular: usize,
        spheres: usize,
    },
}

impl Model {
    pub fn validate(&self) -> Result<()> {
        let kappa_ok = |k: f64| {
            if k.is_finite() && k >= 0.0 {
                Ok(())
            } else {
                Err(Error::InvalidModel(format!("kappa must be finite and >= 0, got {k}")))
            }
        };
        match self {
            Model::VonMises { mu, kappa } => {
                kappa_ok(*kappa)?;
                if !(0.0..TAU).contains(mu) {
                    return Err(Error::InvalidModel(format!("mu = {mu} outside [0, 2pi)")));
                }
            }
            Model::EdgeBimodalTorus { kappa } => kappa_ok(*kappa)?,
            Model::VmfSphere { mean, kappa } | Model::AntipodalVmfMixture { mean, kappa } => {
                kappa_ok(*kappa)?;
                if (mean.norm() - 1.0).abs() > 1e-12 {
                    return Err(Error::InvalidModel("mean direction is not a unit vector".into()));
                }
            }
            Model::GaussianBox { mean, sigma } => {
                if mean.is_empty() || mean.len() != sigma.len() {
                    return Err(Error::InvalidModel("mean and sigma lengths differ".into()));
                }
                if mean.iter().any(|m| !(0.0..=1.0).contains(m)) {
                    return Err(Error::InvalidModel("mean outside [0, 1]".into()));
                }
                if sigma.iter().any(|s| !(s.is_finite() && *s > 0.0)) {
                    return Err(Error::InvalidModel("sigma must be positive".into()));
                }
            }
            Model::Constant {
                log_l,
                linear,
                circular,
                spheres,
            } => {
                if !log_l.is_finite() {
                    return Err(Error::InvalidModel("log_l must be finite".into()));
                }
                if linear + circular + spheres == 0 {
                    return Err(Error::InvalidModel("constant model has no parameters".into()));
                }
            }
        }
        Ok(())
    }

    pub fn space(&self) -> ParameterSpace {
        let space = match self {
            Model::VonMises { .. } => ParameterSpace::torus(1),
            Model::EdgeBimodalTorus { .. } => ParameterSpace::torus(2),
            Model::VmfSphere { .. } | Model::AntipodalVmfMixture { .. } => {
                Ok(ParameterSpace::sphere())
            }
            Model::GaussianBox { mean, .. } => ParameterSpace::linear_box(mean.len(), 0.0, 1.0),
            Model::Constant {
                linear,
                circular,
                spheres,
                ..
            } => {
                let mut kinds = vec![ParameterKind::Linear { lo: 0.0, hi: 1.0 }; *linear];
                kinds.extend(vec![ParameterKind::Circular { lo: 0.0, hi: TAU }; *circular]);
                let first = linear + circular;
                kinds.extend((0..*spheres).map(|s| ParameterKind::SphericalPair {
                    theta_index: first + 2 * s,
                    phi_index: first + 2 * s + 1,
                }));
                ParameterSpace::new(kinds)
            }
        };
        space.expect("built-in model spaces are valid")
    }

    /// Column names for the model's parameters, in dimension order.
    pub fn param_names(&self) -> Vec<String> {
        match self {
            Model::VonMises { .. } => vec!["theta".into()],
            Model::EdgeBimodalTorus { .. } => vec!["theta1".into(), "theta2".into()],
            Model::VmfSphere { .. } | Model::AntipodalVmfMixture { .. } => {
                vec!["theta".into(), "phi".into()]
            }
            Model::GaussianBox { mean, .. } => (0..mean.len()).map(|i| format!("x{i}")).collect(),
            Model::Constant {
                linear,
                circular,
                spheres,
                ..
            } => {
                let mut names: Vec<String> = (0..*linear).map(|i| format!("x{i}")).collect();
                names.extend((0..*circular).map(|i| format!("angle{i}")));
                for s in 0..*spheres {
                    names.push(format!("theta{s}"));
                    names.push(format!("phi{s}"));
                }
                names
            }
        }
    }
}

impl LogLikelihood for Model {
    fn log_likelihood(&self, x: &[f64]) -> f64 {
        match self {
            Model::VonMises { mu, kappa } => kappa * math::cos(x[0] - mu),
            Model::EdgeBimodalTorus { kappa } => edge_bimodal_unchecked(x, *kappa),
            Model::VmfSphere { mean, kappa } => vmf_sphere(x[0], x[1], mean, *kappa),
            Model::AntipodalVmfMixture { mean, kappa } => {
                antipodal_vmf_mixture(x[0], x[1], mean, *kappa)
            }
            Model::GaussianBox { mean, sigma } => gaussian_box(x, mean, sigma),
            Model::Constant { log_l, .. } => *log_l,
        }
    }
}

/// `κ cos(θ - μ)`.
pub fn von_mises_circle(theta: f64, mu: f64, kappa: f64) -> Result<f64> {
    if !(kappa >= 0.0) {
        return Err(Error::InvalidModel(format!("kappa must be >= 0, got {kappa}")));
    }
    Ok(kappa * math::cos(theta - mu))
}

/// Log of an equal mixture of two von Mises products on the 2-torus with
/// centres just inside opposite corners of `[0, 2π)²`.
pub fn edge_bimodal_torus(p: &[f64], kappa: f64) -> Result<f64> {
    if p.len() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            got: p.len(),
        });
    }
    if !(kappa >= 0.0) {
        return Err(Error::InvalidModel(format!("kappa must be >= 0, got {kappa}")));
    }
    Ok(edge_bimodal_unchecked(p, kappa))
}

fn edge_bimodal_unchecked(p: &[f64], kappa: f64) -> f64 {
    let a = EDGE_MODE_OFFSET;
    let b = TAU - EDGE_MODE_OFFSET;
    let la = kappa * (math::cos(p[0] - a) + math::cos(p[1] - a));
    let lb = kappa * (math::cos(p[0] - b) + math::cos(p[1] - b));
    log_half_sum(la, lb)
}

/// `log(e^a / 2 + e^b / 2)`.
fn log_half_sum(a: f64, b: f64) -> f64 {
    let m = a.max(b);
    m + math::ln_1p(math::exp(-(a - b).abs())) - core::f64::consts::LN_2
}

/// `κ m̂·n̂(θ, φ)`.
pub fn vmf_sphere(theta: f64, phi: f64, mean: &UnitVec3, kappa: f64) -> f64 {
    kappa * mean.dot(&angles_to_cart_unchecked(theta, phi))
}

/// Equal mixture of von Mises-Fisher components at `m̂` and `-m̂`.
pub fn antipodal_vmf_mixture(theta: f64, phi: f64, mean: &UnitVec3, kappa: f64) -> f64 {
    let c = kappa * mean.dot(&angles_to_cart_unchecked(theta, phi));
    log_half_sum(c, -c)
}

/// `-½ Σ ((x_i - mean_i) / σ_i)²`.
pub fn gaussian_box(p: &[f64], mean: &[f64], sigma: &[f64]) -> f64 {
    -0.5 * p
        .iter()
        .zip(mean)
        .zip(sigma)
        .map(|((x, m), s)| {
            let z = (x - m) / s;
            z * z
        })
        .sum::<f64>()
}
