//! Periodic wrapping and the unit sphere embedding.

use crate::error::{Error, Result};
use crate::math::{self, PI, TAU};

/// Below this norm a vector has no usable direction.
pub const MIN_PROJECTION_NORM: f64 = 1e-300;

/// Tolerance on |z| for treating a unit vector as a pole (φ is set to 0 there).
pub const POLE_TOLERANCE: f64 = 1e-12;

/// A point on the unit sphere in Cartesian form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitVec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl UnitVec3 {
    pub const NORTH: UnitVec3 = UnitVec3 {
        x: 0.0,
        y: 0.0,
        z: 1.0,
    };

    pub fn dot(&self, other: &UnitVec3) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn neg(&self) -> UnitVec3 {
        UnitVec3 {
            x: -self.x,
            y: -self.y,
            z: -self.z,
        }
    }

    pub fn norm(&self) -> f64 {
        math::hypot3(self.x, self.y, self.z)
    }
}

/// Maps `value` to its representative in `[lo, hi)` modulo `hi - lo`.
///
/// Uses floored modulo, so negative inputs land inside the interval.
pub fn wrap(value: f64, lo: f64, hi: f64) -> Result<f64> {
    if !value.is_finite() {
        return Err(Error::NonFinite(value));
    }
    if !(lo < hi) {
        return Err(Error::InvalidSpace(alloc::format!(
            "wrap interval requires lo < hi, got [{lo}, {hi})"
        )));
    }
    if value >= lo && value < hi {
        return Ok(value);
    }
    let width = hi - lo;
    let shifted = value - lo;
    let mut wrapped = lo + (shifted - width * math::floor(shifted / width));
    // Rounding can leave the result exactly on the open end.
    if wrapped >= hi {
        wrapped = lo;
    }
    if wrapped < lo {
        wrapped = lo;
    }
    Ok(wrapped)
}

/// (θ, φ) with θ ∈ [0, π], φ ∈ [0, 2π) to a Cartesian unit vector.
pub fn angles_to_cart(theta: f64, phi: f64) -> Result<UnitVec3> {
    if !(0.0..=PI).contains(&theta) || !(0.0..TAU).contains(&phi) {
        return Err(Error::AnglesOutOfDomain { theta, phi });
    }
    Ok(angles_to_cart_unchecked(theta, phi))
}

pub(crate) fn angles_to_cart_unchecked(theta: f64, phi: f64) -> UnitVec3 {
    let s = math::sin(theta);
    UnitVec3 {
        x: s * math::cos(phi),
        y: s * math::sin(phi),
        z: math::cos(theta),
    }
}

/// Inverse of [`angles_to_cart`]. At the poles φ is 0.
pub fn cart_to_angles(v: &UnitVec3) -> (f64, f64) {
    let z = v.z.clamp(-1.0, 1.0);
    let theta = math::acos(z);
    if (1.0 - z.abs()) <= POLE_TOLERANCE {
        return (theta, 0.0);
    }
    let mut phi = math::atan2(v.y, v.x);
    if phi < 0.0 {
        phi += TAU;
    }
    // -tiny + 2π rounds to 2π.
    if phi >= TAU {
        phi = 0.0;
    }
    (theta, phi)
}

/// Radial projection of a nonzero vector onto the unit sphere.
pub fn project_to_sphere(x: f64, y: f64, z: f64) -> Result<UnitVec3> {
    let norm = math::hypot3(x, y, z);
    if !norm.is_finite() {
        return Err(Error::NonFinite(norm));
    }
    if norm < MIN_PROJECTION_NORM {
        return Err(Error::DegenerateProjection(norm));
    }
    Ok(UnitVec3 {
        x: x / norm,
        y: y / norm,
        z: z / norm,
    })
}
