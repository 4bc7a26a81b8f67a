//! Parameter geometry, the uniform prior, and prior sampling.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::ops::Index;

use rand::Rng;

use crate::error::{Error, Result};
use crate::math::{self, PI, TAU};

/// Geometric kind of one parameter (or, for spheres, a pair of parameters).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ParameterKind {
    /// Closed interval `[lo, hi]` with a uniform prior.
    Linear { lo: f64, hi: f64 },
    /// Periodic interval `[lo, hi)` with a uniform prior.
    Circular { lo: f64, hi: f64 },
    /// Polar angle θ ∈ [0, π] and azimuth φ ∈ [0, 2π), uniform on the sphere.
    SphericalPair { theta_index: usize, phi_index: usize },
}

/// What a single dimension is, with the index of the kind that owns it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum DimRole {
    Linear { lo: f64, hi: f64, kind: usize },
    Circular { lo: f64, hi: f64, kind: usize },
    Theta { kind: usize },
    Phi { kind: usize },
}

/// Ordered set of parameter kinds covering dimensions `0..dim`.
#[derive(Debug, Clone, PartialEq)]
pub struct ParameterSpace {
    kinds: Vec<ParameterKind>,
    roles: Vec<DimRole>,
    log_prior: f64,
}

impl ParameterSpace {
    /// Builds a space from its kinds.
    ///
    /// Spherical pairs claim their explicit indices first. Interval kinds
    /// then take the remaining dimensions in ascending order, in the order
    /// they are listed.
    pub fn new(kinds: Vec<ParameterKind>) -> Result<Self> {
        if kinds.is_empty() {
            return Err(Error::InvalidSpace("no parameters".into()));
        }
        let dim = kinds
            .iter()
            .map(|k| match k {
                ParameterKind::SphericalPair { .. } => 2,
                _ => 1,
            })
            .sum::<usize>();
        let mut roles: Vec<Option<DimRole>> = vec![None; dim];

        for (i, kind) in kinds.iter().enumerate() {
            if let ParameterKind::SphericalPair {
                theta_index,
                phi_index,
            } = *kind
            {
                if theta_index == phi_index {
                    return Err(Error::InvalidSpace(format!(
                        "spherical pair uses index {theta_index} twice"
                    )));
                }
                for (idx, role) in [
                    (theta_index, DimRole::Theta { kind: i }),
                    (phi_index, DimRole::Phi { kind: i }),
                ] {
                    let slot = roles.get_mut(idx).ok_or_else(|| {
                        Error::InvalidSpace(format!("index {idx} outside 0..{dim}"))
                    })?;
                    if slot.is_some() {
                        return Err(Error::InvalidSpace(format!(
                            "index {idx} is claimed twice"
                        )));
                    }
                    *slot = Some(role);
                }
            }
        }

        let mut free = (0..dim).filter(|&d| roles[d].is_none()).collect::<Vec<_>>().into_iter();
        for (i, kind) in kinds.iter().enumerate() {
            let role = match *kind {
                ParameterKind::Linear { lo, hi } => {
                    check_interval(lo, hi)?;
                    DimRole::Linear { lo, hi, kind: i }
                }
                ParameterKind::Circular { lo, hi } => {
                    check_interval(lo, hi)?;
                    DimRole::Circular { lo, hi, kind: i }
                }
                ParameterKind::SphericalPair { .. } => continue,
            };
            let d = free
                .next()
                .ok_or(Error::Internal("dimension count mismatch"))?;
            roles[d] = Some(role);
        }

        let roles = roles
            .into_iter()
            .collect::<Option<Vec<_>>>()
            .ok_or(Error::Internal("uncovered dimension"))?;

        let log_prior = kinds
            .iter()
            .map(|k| match *k {
                ParameterKind::Linear { lo, hi } | ParameterKind::Circular { lo, hi } => {
                    -math::ln(hi - lo)
                }
                ParameterKind::SphericalPair { .. } => -math::ln(4.0 * PI),
            })
            .sum();

        Ok(ParameterSpace {
            kinds,
            roles,
            log_prior,
        })
    }

    /// `n` circular parameters on `[0, 2π)`.
    pub fn torus(n: usize) -> Result<Self> {
        Self::new(vec![ParameterKind::Circular { lo: 0.0, hi: TAU }; n])
    }

    /// One sphere, θ at index 0 and φ at index 1.
    pub fn sphere() -> Self {
        Self::new(vec![ParameterKind::SphericalPair {
            theta_index: 0,
            phi_index: 1,
        }])
        .expect("valid sphere")
    }

    /// `n` linear parameters on `[lo, hi]`.
    pub fn linear_box(n: usize, lo: f64, hi: f64) -> Result<Self> {
        Self::new(vec![ParameterKind::Linear { lo, hi }; n])
    }

    pub fn dim(&self) -> usize {
        self.roles.len()
    }

    pub fn kinds(&self) -> &[ParameterKind] {
        &self.kinds
    }

    /// The prior log density on the support.
    pub(crate) fn log_prior_constant(&self) -> f64 {
        self.log_prior
    }

    pub(crate) fn roles(&self) -> &[DimRole] {
        &self.roles
    }

    /// True when no dimension is `Linear`, so the geometric proposals can
    /// never leave the domain.
    pub fn is_closed_manifold(&self) -> bool {
        !self
            .kinds
            .iter()
            .any(|k| matches!(k, ParameterKind::Linear { .. }))
    }

    pub fn domain_contains(&self, coords: &[f64]) -> Result<bool> {
        if coords.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: coords.len(),
            });
        }
        Ok(self.contains_unchecked(coords))
    }

    pub(crate) fn contains_unchecked(&self, coords: &[f64]) -> bool {
        self.roles.iter().zip(coords).all(|(role, &v)| match *role {
            DimRole::Linear { lo, hi, .. } => v >= lo && v <= hi,
            DimRole::Circular { lo, hi, .. } => v >= lo && v < hi,
            DimRole::Theta { .. } => (0.0..=PI).contains(&v),
            DimRole::Phi { .. } => (0.0..TAU).contains(&v),
        })
    }

    /// Log prior density; negative infinity outside the domain.
    ///
    /// Spherical pairs are measured against the sphere's surface area
    /// element, so every built-in prior is constant on its support.
    pub fn log_prior_density(&self, p: &Point) -> f64 {
        if p.len() == self.dim() && self.contains_unchecked(p.coords()) {
            self.log_prior
        } else {
            f64::NEG_INFINITY
        }
    }

    pub fn sample_prior<R: Rng + ?Sized>(&self, rng: &mut R) -> Point {
        let mut coords = vec![0.0; self.dim()];
        for (i, kind) in self.kinds.iter().enumerate() {
            match *kind {
                ParameterKind::Linear { lo, hi } | ParameterKind::Circular { lo, hi } => {
                    let d = self.interval_dim(i);
                    let mut v = lo + (hi - lo) * rng.random::<f64>();
                    if matches!(kind, ParameterKind::Circular { .. }) && v >= hi {
                        v = lo;
                    }
                    coords[d] = v.min(hi);
                }
                ParameterKind::SphericalPair {
                    theta_index,
                    phi_index,
                } => {
                    let u = 2.0 * rng.random::<f64>() - 1.0;
                    coords[theta_index] = math::acos(u.clamp(-1.0, 1.0));
                    let phi = TAU * rng.random::<f64>();
                    coords[phi_index] = if phi >= TAU { 0.0 } else { phi };
                }
            }
        }
        Point(coords)
    }

    /// Dimension held by the interval kind at position `kind`.
    pub(crate) fn interval_dim(&self, kind: usize) -> usize {
        self.roles
            .iter()
            .position(|r| match *r {
                DimRole::Linear { kind: k, .. } | DimRole::Circular { kind: k, .. } => k == kind,
                _ => false,
            })
            .expect("interval kind has a dimension")
    }
}

fn check_interval(lo: f64, hi: f64) -> Result<()> {
    if lo.is_finite() && hi.is_finite() && lo < hi {
        Ok(())
    } else {
        Err(Error::InvalidSpace(format!(
            "interval needs finite lo < hi, got [{lo}, {hi}]"
        )))
    }
}

/// A position in parameter space.
#[derive(Debug, Clone, PartialEq)]
pub struct Point(Vec<f64>);

impl Point {
    pub fn new(coords: Vec<f64>) -> Self {
        Point(coords)
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn coords_mut(&mut self) -> &mut [f64] {
        &mut self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl From<Vec<f64>> for Point {
    fn from(coords: Vec<f64>) -> Self {
        Point(coords)
    }
}

impl Index<usize> for Point {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngState;
    use approx::assert_abs_diff_eq;
    use core::f64::consts::FRAC_PI_2;

    fn unit_line() -> ParameterSpace {
        ParameterSpace::linear_box(1, 0.0, 1.0).unwrap()
    }

    #[test]
    fn contains_examples() {
        assert!(unit_line().domain_contains(&[0.5]).unwrap());
        assert!(!unit_line().domain_contains(&[1.2]).unwrap());
        assert!(unit_line().domain_contains(&[1.0]).unwrap());
        let s = ParameterSpace::sphere();
        assert!(!s.domain_contains(&[FRAC_PI_2, TAU]).unwrap());
        assert!(s.domain_contains(&[PI, 0.0]).unwrap());
        let c = ParameterSpace::torus(1).unwrap();
        assert!(!c.domain_contains(&[TAU]).unwrap());
    }

    #[test]
    fn contains_rejects_wrong_length() {
        assert_eq!(
            unit_line().domain_contains(&[0.1, 0.2]),
            Err(Error::DimensionMismatch {
                expected: 1,
                got: 2
            })
        );
    }

    #[test]
    fn prior_density_examples() {
        assert_eq!(unit_line().log_prior_density(&Point::new(vec![0.3])), 0.0);
        let c = ParameterSpace::torus(1).unwrap();
        assert_abs_diff_eq!(
            c.log_prior_density(&Point::new(vec![1.0])),
            -TAU.ln(),
            epsilon = 1e-15
        );
        let s = ParameterSpace::sphere();
        assert_abs_diff_eq!(
            s.log_prior_density(&Point::new(vec![1.0, 1.0])),
            -(4.0 * PI).ln(),
            epsilon = 1e-15
        );
        assert_eq!(
            unit_line().log_prior_density(&Point::new(vec![-0.1])),
            f64::NEG_INFINITY
        );
    }

    #[test]
    fn invalid_spaces() {
        assert!(ParameterSpace::linear_box(1, 1.0, 1.0).is_err());
        assert!(ParameterSpace::new(vec![ParameterKind::Circular {
            lo: 0.0,
            hi: f64::INFINITY
        }])
        .is_err());
        assert!(ParameterSpace::new(vec![ParameterKind::SphericalPair {
            theta_index: 0,
            phi_index: 0
        }])
        .is_err());
        assert!(ParameterSpace::new(vec![ParameterKind::SphericalPair {
            theta_index: 0,
            phi_index: 5
        }])
        .is_err());
        assert!(ParameterSpace::new(vec![]).is_err());
    }

    #[test]
    fn intervals_fill_around_sphere_indices() {
        let s = ParameterSpace::new(vec![
            ParameterKind::Linear { lo: 0.0, hi: 1.0 },
            ParameterKind::SphericalPair {
                theta_index: 2,
                phi_index: 0,
            },
        ])
        .unwrap();
        assert_eq!(s.dim(), 3);
        assert_eq!(s.interval_dim(0), 1);
        assert!(s.domain_contains(&[6.0, 0.5, 3.0]).unwrap());
        assert!(!s.domain_contains(&[6.0, 1.5, 3.0]).unwrap());
    }

    #[test]
    fn prior_moments() {
        let mut rng = RngState::from_seed(11);
        let n = 100_000;
        let line = unit_line();
        let mean = (0..n).map(|_| line.sample_prior(&mut rng)[0]).sum::<f64>() / n as f64;
        assert_abs_diff_eq!(mean, 0.5, epsilon = 0.01);

        let s = ParameterSpace::sphere();
        let draws: Vec<Point> = (0..n).map(|_| s.sample_prior(&mut rng)).collect();
        let mean_cos = draws.iter().map(|p| p[0].cos()).sum::<f64>() / n as f64;
        assert_abs_diff_eq!(mean_cos, 0.0, epsilon = 0.02);
        // E[θ] = ∫ θ sinθ dθ / 2 over [0, π], evaluated by midpoint quadrature.
        let m = 10_000;
        let h = PI / m as f64;
        let expected = (0..m)
            .map(|i| {
                let t = (i as f64 + 0.5) * h;
                t * t.sin() * h
            })
            .sum::<f64>()
            / 2.0;
        assert_abs_diff_eq!(expected, FRAC_PI_2, epsilon = 1e-6);
        let mean_theta = draws.iter().map(|p| p[0]).sum::<f64>() / n as f64;
        assert_abs_diff_eq!(mean_theta, expected, epsilon = 0.02);
    }

    #[test]
    fn prior_samples_are_in_domain() {
        let space = ParameterSpace::new(vec![
            ParameterKind::Linear { lo: -2.0, hi: 3.0 },
            ParameterKind::Circular { lo: 1.0, hi: 2.0 },
            ParameterKind::SphericalPair {
                theta_index: 2,
                phi_index: 3,
            },
        ])
        .unwrap();
        let mut rng = RngState::from_seed(3);
        for _ in 0..10_000 {
            let p = space.sample_prior(&mut rng);
            assert!(space.domain_contains(p.coords()).unwrap());
        }
    }

    #[test]
    fn prior_normalises_on_grid() {
        // Midpoint grid over (c, θ, φ) with the sinθ area element.
        let (nc, nt, np) = (32, 4000, 16);
        let space = ParameterSpace::new(vec![
            ParameterKind::Circular { lo: 0.0, hi: 3.0 },
            ParameterKind::SphericalPair {
                theta_index: 1,
                phi_index: 2,
            },
        ])
        .unwrap();
        let (hc, ht, hp) = (3.0 / nc as f64, PI / nt as f64, TAU / np as f64);
        let mut total = 0.0;
        for i in 0..nc {
            let c = (i as f64 + 0.5) * hc;
            for j in 0..nt {
                let t = (j as f64 + 0.5) * ht;
                for k in 0..np {
                    let phi = (k as f64 + 0.5) * hp;
                    let p = Point::new(vec![c, t, phi]);
                    total += space.log_prior_density(&p).exp() * hc * t.sin() * ht * hp;
                }
            }
        }
        assert_abs_diff_eq!(total, 1.0, epsilon = 1e-6);
    }
}
