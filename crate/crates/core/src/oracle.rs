//! Brute-force evidence and posterior moments by midpoint grid quadrature.
//!
//! Interval dimensions use uniform midpoint grids. A spherical pair is
//! gridded in `cos θ` and `φ`, where the surface measure is flat, so every
//! cell carries the same prior mass and a constant likelihood integrates
//! exactly.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::kernel::LogLikelihood;
use crate::math::{self, TAU};
use crate::sampler::LogSumExpAcc;
use crate::space::{DimRole, ParameterSpace};

pub const MIN_POINTS_PER_DIM: usize = 8;
pub const MAX_GRID_POINTS: u128 = 100_000_000;
pub const MAX_DIM: usize = 3;

#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureSpec {
    points_per_dim: usize,
    space: ParameterSpace,
}

impl QuadratureSpec {
    pub fn new(space: ParameterSpace, points_per_dim: usize) -> Result<Self> {
        if points_per_dim < MIN_POINTS_PER_DIM {
            return Err(Error::InvalidConfig {
                field: "points_per_dim",
                constraint: "points_per_dim >= 8",
            });
        }
        if space.dim() > MAX_DIM {
            return Err(Error::InvalidConfig {
                field: "dimension",
                constraint: "grid quadrature needs at most 3 dimensions",
            });
        }
        let total = (points_per_dim as u128).pow(space.dim() as u32);
        if total > MAX_GRID_POINTS {
            return Err(Error::GridTooLarge(total));
        }
        Ok(QuadratureSpec {
            points_per_dim,
            space,
        })
    }

    pub fn points_per_dim(&self) -> usize {
        self.points_per_dim
    }

    pub fn space(&self) -> &ParameterSpace {
        &self.space
    }

    /// Midpoint abscissae of every dimension and the log prior mass of one cell.
    fn axes(&self) -> (Vec<Vec<f64>>, f64) {
        let n = self.points_per_dim;
        let nf = n as f64;
        let mid = |lo: f64, hi: f64| -> Vec<f64> {
            (0..n)
                .map(|k| lo + (hi - lo) * (k as f64 + 0.5) / nf)
                .collect()
        };
        let mut log_cell = 0.0;
        let axes: Vec<Vec<f64>> = self
            .space
            .roles()
            .iter()
            .map(|role| match *role {
                DimRole::Linear { lo, hi, .. } | DimRole::Circular { lo, hi, .. } => {
                    log_cell += math::ln((hi - lo) / nf);
                    mid(lo, hi)
                }
                DimRole::Theta { .. } => {
                    log_cell += math::ln(2.0 / nf);
                    mid(-1.0, 1.0).into_iter().map(math::acos).collect()
                }
                DimRole::Phi { .. } => {
                    log_cell += math::ln(TAU / nf);
                    mid(0.0, TAU)
                }
            })
            .collect();
        (axes, log_cell + self.space.log_prior_constant())
    }

    /// Calls `f` at every grid node in row-major order.
    fn for_each_node(&self, axes: &[Vec<f64>], mut f: impl FnMut(&[f64])) {
        let d = axes.len();
        let n = self.points_per_dim;
        let mut idx = alloc::vec![0usize; d];
        let mut coords: Vec<f64> = axes.iter().map(|a| a[0]).collect();
        loop {
            f(&coords);
            let mut k = d;
            loop {
                if k == 0 {
                    return;
                }
                k -= 1;
                idx[k] += 1;
                if idx[k] < n {
                    coords[k] = axes[k][idx[k]];
                    break;
                }
                idx[k] = 0;
                coords[k] = axes[k][0];
            }
        }
    }
}

/// `log Z = log ∫ L π dθ` on the midpoint grid.
pub fn grid_log_evidence<L: LogLikelihood + ?Sized>(
    spec: &QuadratureSpec,
    likelihood: &L,
) -> Result<f64> {
    let (axes, log_cell) = spec.axes();
    let mut acc = LogSumExpAcc::new();
    spec.for_each_node(&axes, |x| acc.push(likelihood.log_likelihood(x) + log_cell));
    Ok(acc.value())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MomentKind {
    /// Posterior mean of a linear coordinate (or a polar angle).
    LinearMean,
    /// `atan2(E[sin], E[cos])` of a periodic coordinate, mapped into its domain.
    CircularMean,
}

/// Posterior expectation of coordinate `which` on the grid.
pub fn grid_posterior_moment<L: LogLikelihood + ?Sized>(
    spec: &QuadratureSpec,
    likelihood: &L,
    which: usize,
    kind: MomentKind,
) -> Result<f64> {
    let role = *spec.space.roles().get(which).ok_or(Error::DimensionMismatch {
        expected: spec.space.dim(),
        got: which + 1,
    })?;
    let (lo, hi) = match (kind, role) {
        (MomentKind::LinearMean, DimRole::Linear { lo, hi, .. }) => (lo, hi),
        (MomentKind::LinearMean, DimRole::Theta { .. }) => (0.0, core::f64::consts::PI),
        (MomentKind::CircularMean, DimRole::Circular { lo, hi, .. }) => (lo, hi),
        (MomentKind::CircularMean, DimRole::Phi { .. }) => (0.0, TAU),
        (MomentKind::LinearMean, _) => {
            return Err(Error::MomentKindMismatch {
                dim: which,
                kind: "linear mean",
            })
        }
        (MomentKind::CircularMean, _) => {
            return Err(Error::MomentKindMismatch {
                dim: which,
                kind: "circular mean",
            })
        }
    };

    let (axes, _) = spec.axes();
    let mut acc = WeightedMeans::default();
    spec.for_each_node(&axes, |x| {
        let v = x[which];
        let (a, b) = match kind {
            MomentKind::LinearMean => (v, 0.0),
            MomentKind::CircularMean => {
                let angle = TAU * (v - lo) / (hi - lo);
                (math::cos(angle), math::sin(angle))
            }
        };
        acc.push(likelihood.log_likelihood(x), a, b);
    });
    let (a, b) = acc.means().ok_or(Error::ZeroLikelihood)?;
    Ok(match kind {
        MomentKind::LinearMean => a,
        MomentKind::CircularMean => {
            let mut angle = math::atan2(b, a);
            if angle < 0.0 {
                angle += TAU;
            }
            let v = lo + (hi - lo) * angle / TAU;
            if v >= hi {
                lo
            } else {
                v
            }
        }
    })
}

/// Running `Σ w a / Σ w` and `Σ w b / Σ w` with `w = exp(log_w)`, rescaled
/// as the maximum log weight grows.
#[derive(Debug, Default)]
struct WeightedMeans {
    max: Option<f64>,
    w: f64,
    wa: f64,
    wb: f64,
}

impl WeightedMeans {
    fn push(&mut self, log_w: f64, a: f64, b: f64) {
        if log_w == f64::NEG_INFINITY {
            return;
        }
        let m = match self.max {
            Some(m) if log_w <= m => m,
            Some(m) => {
                let s = math::exp(m - log_w);
                self.w *= s;
                self.wa *= s;
                self.wb *= s;
                self.max = Some(log_w);
                log_w
            }
            None => {
                self.max = Some(log_w);
                log_w
            }
        };
        let w = math::exp(log_w - m);
        self.w += w;
        self.wa += w * a;
        self.wb += w * b;
    }

    fn means(&self) -> Option<(f64, f64)> {
        self.max.map(|_| (self.wa / self.w, self.wb / self.w))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{Model, ModelSpec};
    use crate::space::ParameterKind;
    use alloc::vec;
    use approx::assert_abs_diff_eq;

    /// log I₀(x) from its power series Σ (x/2)^{2k} / (k!)².
    fn log_bessel_i0(x: f64) -> f64 {
        let q = x * x / 4.0;
        let mut term = 1.0;
        let mut sum = 1.0;
        for k in 1..200 {
            term *= q / (k * k) as f64;
            sum += term;
        }
        sum.ln()
    }

    #[test]
    fn spec_guards() {
        let s = ParameterSpace::torus(1).unwrap();
        assert!(QuadratureSpec::new(s.clone(), 7).is_err());
        assert!(QuadratureSpec::new(s, 8).is_ok());
        let big = ParameterSpace::torus(3).unwrap();
        assert_eq!(
            QuadratureSpec::new(big.clone(), 1000),
            Err(Error::GridTooLarge(1_000_000_000))
        );
        assert!(QuadratureSpec::new(big, 464).is_ok());
        assert!(QuadratureSpec::new(ParameterSpace::torus(4).unwrap(), 8).is_err());
    }

    #[test]
    fn constant_is_exact() {
        for space in [
            ParameterSpace::linear_box(2, -3.0, 5.0).unwrap(),
            ParameterSpace::sphere(),
            ParameterSpace::new(vec![
                ParameterKind::Circular { lo: 1.0, hi: 2.0 },
                ParameterKind::SphericalPair {
                    theta_index: 1,
                    phi_index: 2,
                },
            ])
            .unwrap(),
        ] {
            let spec = QuadratureSpec::new(space, 16).unwrap();
            let z = grid_log_evidence(&spec, &|_: &[f64]| 2.5).unwrap();
            assert_abs_diff_eq!(z, 2.5, epsilon = 1e-12);
        }
    }

    #[test]
    fn von_mises_matches_bessel() {
        let expected = log_bessel_i0(5.0);
        assert_abs_diff_eq!(expected, 3.304_681_8, epsilon = 1e-7);
        let model = Model::VonMises { mu: 1.0, kappa: 5.0 };
        let spec = QuadratureSpec::new(model.space(), 256).unwrap();
        assert_abs_diff_eq!(grid_log_evidence(&spec, &model).unwrap(), expected, epsilon = 1e-12);
    }

    #[test]
    fn vmf_matches_closed_form() {
        let expected = (10f64.sinh() / 10.0).ln();
        let model = ModelSpec::new("vmf_sphere").build().unwrap();
        let spec = QuadratureSpec::new(model.space(), 4096).unwrap();
        assert_abs_diff_eq!(grid_log_evidence(&spec, &model).unwrap(), expected, epsilon = 2e-6);
        // An off-axis mean direction exercises the φ grid as well.
        let tilted = ModelSpec::new("vmf_sphere")
            .with("mu_theta", 1.2)
            .with("mu_phi", 4.0)
            .build()
            .unwrap();
        let spec = QuadratureSpec::new(tilted.space(), 1024).unwrap();
        assert_abs_diff_eq!(grid_log_evidence(&spec, &tilted).unwrap(), expected, epsilon = 1e-4);
    }

    #[test]
    fn moments() {
        let flat = QuadratureSpec::new(ParameterSpace::linear_box(1, 0.0, 1.0).unwrap(), 64).unwrap();
        let m = grid_posterior_moment(&flat, &|_: &[f64]| 0.0, 0, MomentKind::LinearMean).unwrap();
        assert_abs_diff_eq!(m, 0.5, epsilon = 1e-12);

        let vm = Model::VonMises { mu: 1.0, kappa: 5.0 };
        let spec = QuadratureSpec::new(vm.space(), 256).unwrap();
        let m = grid_posterior_moment(&spec, &vm, 0, MomentKind::CircularMean).unwrap();
        assert_abs_diff_eq!(m, 1.0, epsilon = 1e-10);

        let edge = Model::EdgeBimodalTorus { kappa: 10.0 };
        let spec = QuadratureSpec::new(edge.space(), 512).unwrap();
        let m = grid_posterior_moment(&spec, &edge, 0, MomentKind::CircularMean).unwrap();
        let d = m.min(TAU - m);
        assert!(d < 1e-9, "{m}");

        assert!(matches!(
            grid_posterior_moment(&spec, &edge, 0, MomentKind::LinearMean),
            Err(Error::MomentKindMismatch { .. })
        ));
        assert!(grid_posterior_moment(&flat, &|_: &[f64]| 0.0, 0, MomentKind::CircularMean).is_err());
        assert!(grid_posterior_moment(&flat, &|_: &[f64]| 0.0, 3, MomentKind::LinearMean).is_err());
    }
}
