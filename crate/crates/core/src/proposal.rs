//! Geometric trial distributions.
//!
//! Linear parameters take a plain Gaussian step and may leave the domain.
//! Circular parameters take a Gaussian step that is wrapped back into the
//! period. A spherical pair is lifted to its unit vector, perturbed by an
//! isotropic 3-D Gaussian and projected back onto the sphere. Both
//! geometric proposals are symmetric: the wrapped normal trivially, and the
//! projected Gaussian because its density depends only on the angle between
//! the two points, which makes it symmetric under the surface measure.

use alloc::format;
use alloc::vec::Vec;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::geometry::{angles_to_cart_unchecked, cart_to_angles, project_to_sphere, wrap};
use crate::space::{ParameterKind, ParameterSpace, Point};

/// Redraws allowed when a sphere perturbation lands on the origin.
pub const MAX_PROJECTION_ATTEMPTS: usize = 100;

/// Proposal widths, one per parameter kind in the space's kind order.
///
/// Interval kinds use parameter units. A spherical pair uses the Euclidean
/// standard deviation of the 3-D Gaussian.
#[derive(Debug, Clone, PartialEq)]
pub struct ProposalScales(Vec<f64>);

impl ProposalScales {
    pub fn new(space: &ParameterSpace, sigma: Vec<f64>) -> Result<Self> {
        if sigma.len() != space.kinds().len() {
            return Err(Error::InvalidScales(format!(
                "expected {} scales (one per parameter kind), got {}",
                space.kinds().len(),
                sigma.len()
            )));
        }
        if let Some(bad) = sigma.iter().find(|s| !(s.is_finite() && **s > 0.0)) {
            return Err(Error::InvalidScales(format!(
                "scales must be positive and finite, got {bad}"
            )));
        }
        Ok(ProposalScales(sigma))
    }

    /// Widths as a fraction of each kind's extent (the diameter, 2, for spheres).
    pub fn suggest(space: &ParameterSpace, fraction: f64) -> Result<Self> {
        if !(fraction > 0.0 && fraction <= 1.0) {
            return Err(Error::InvalidConfig {
                field: "fraction",
                constraint: "0 < fraction <= 1",
            });
        }
        let sigma = space
            .kinds()
            .iter()
            .map(|k| match *k {
                ParameterKind::Linear { lo, hi } | ParameterKind::Circular { lo, hi } => {
                    fraction * (hi - lo)
                }
                ParameterKind::SphericalPair { .. } => fraction * 2.0,
            })
            .collect();
        Ok(ProposalScales(sigma))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

/// Handling of circular parameters that step past the end of their period.
///
/// `Reject` exists to measure what wrapping buys: it leaves the step
/// unwrapped so the trial falls outside the domain and is rejected by the
/// zero prior, as a naive sampler would.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CircularBoundary {
    #[default]
    Wrap,
    Reject,
}

/// A proposed point and `log q(current | trial) - log q(trial | current)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialOutcome {
    pub trial: Point,
    pub log_q_ratio: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeometricProposal {
    scales: ProposalScales,
    boundary: CircularBoundary,
}

impl GeometricProposal {
    pub fn new(scales: ProposalScales) -> Self {
        GeometricProposal {
            scales,
            boundary: CircularBoundary::Wrap,
        }
    }

    pub fn from_fraction(space: &ParameterSpace, fraction: f64) -> Result<Self> {
        Ok(Self::new(ProposalScales::suggest(space, fraction)?))
    }

    pub fn with_boundary(mut self, boundary: CircularBoundary) -> Self {
        self.boundary = boundary;
        self
    }

    pub fn scales(&self) -> &ProposalScales {
        &self.scales
    }

    pub fn boundary(&self) -> CircularBoundary {
        self.boundary
    }

    pub fn propose<R: Rng + ?Sized>(
        &self,
        current: &Point,
        space: &ParameterSpace,
        rng: &mut R,
    ) -> Result<TrialOutcome> {
        if current.len() != space.dim() {
            return Err(Error::DimensionMismatch {
                expected: space.dim(),
                got: current.len(),
            });
        }
        if self.scales.0.len() != space.kinds().len() {
            return Err(Error::InvalidScales(format!(
                "{} scales for {} parameter kinds",
                self.scales.0.len(),
                space.kinds().len()
            )));
        }
        let mut trial = current.clone();
        for (i, (kind, &sigma)) in space.kinds().iter().zip(&self.scales.0).enumerate() {
            match *kind {
                ParameterKind::Linear { .. } => {
                    let d = space.interval_dim(i);
                    trial.coords_mut()[d] += sigma * gauss(rng);
                }
                ParameterKind::Circular { lo, hi } => {
                    let d = space.interval_dim(i);
                    let stepped = current[d] + sigma * gauss(rng);
                    trial.coords_mut()[d] = match self.boundary {
                        CircularBoundary::Wrap => wrap(stepped, lo, hi)?,
                        CircularBoundary::Reject => stepped,
                    };
                }
                ParameterKind::SphericalPair {
                    theta_index,
                    phi_index,
                } => {
                    let (theta, phi) =
                        sphere_step(current[theta_index], current[phi_index], sigma, rng)?;
                    trial.coords_mut()[theta_index] = theta;
                    trial.coords_mut()[phi_index] = phi;
                }
            }
        }
        Ok(TrialOutcome {
            trial,
            log_q_ratio: 0.0,
        })
    }
}

fn gauss<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}

fn sphere_step<R: Rng + ?Sized>(
    theta: f64,
    phi: f64,
    sigma: f64,
    rng: &mut R,
) -> Result<(f64, f64)> {
    for _ in 0..MAX_PROJECTION_ATTEMPTS {
        let delta = [
            sigma * gauss(rng),
            sigma * gauss(rng),
            sigma * gauss(rng),
        ];
        match displace_on_sphere(theta, phi, delta) {
            Err(Error::DegenerateProjection(_)) => continue,
            other => return other,
        }
    }
    Err(Error::Internal("repeated degenerate sphere projections"))
}

/// Moves (θ, φ) by a Cartesian displacement and projects back to the sphere.
pub(crate) fn displace_on_sphere(theta: f64, phi: f64, delta: [f64; 3]) -> Result<(f64, f64)> {
    let centre = angles_to_cart_unchecked(theta, phi);
    let v = project_to_sphere(centre.x + delta[0], centre.y + delta[1], centre.z + delta[2])?;
    Ok(cart_to_angles(&v))
}
