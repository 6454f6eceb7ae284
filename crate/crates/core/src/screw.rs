//! Rotation and screw primitives shared by the forward model and the solvers.
//!
//! Conventions: a [`ScrewAxis`] is a zero-pitch line `(direction, point)`.
//! The [`Jacobian`] stacks the linear velocity of the end-effector point on
//! top of the angular velocity, both expressed in the base frame, so column
//! `i` is `[s_i x (p_E - r_i); s_i]`.

use nalgebra::{Matrix3, SMatrix, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{IkError, Result};

pub type Vec3 = Vector3<f64>;
pub type Mat3 = Matrix3<f64>;
pub type Jacobian = SMatrix<f64, 6, 7>;

const UNIT_TOL: f64 = 1e-9;
const ORTHO_TOL: f64 = 1e-9;
/// Below this `|trace(R) + 1|` the log map switches to diagonal-based axis extraction.
const NEAR_PI_TRACE: f64 = 1e-7;
/// Minimum projected norm for [`signed_angle`].
pub const PROJECTION_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Frame {
    /// Robot base frame O.
    Base,
    /// End-effector frame E.
    EndEffector,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScrewAxis {
    pub direction: Vec3,
    pub point: Vec3,
    pub frame: Frame,
}

impl ScrewAxis {
    /// Builds an axis after checking that `direction` is unit length.
    pub fn new(direction: Vec3, point: Vec3, frame: Frame) -> Result<Self> {
        check_unit(&direction)?;
        Ok(Self {
            direction,
            point,
            frame,
        })
    }

    pub(crate) fn base(direction: Vec3, point: Vec3) -> Self {
        Self {
            direction,
            point,
            frame: Frame::Base,
        }
    }

    /// Distance from `p` to the line.
    pub fn distance_to(&self, p: &Vec3) -> f64 {
        (p - self.point).cross(&self.direction).norm()
    }

    /// True when both axes describe the same oriented line within `tol`.
    pub fn same_line(&self, other: &ScrewAxis, tol: f64) -> bool {
        (self.direction - other.direction).norm() < tol && self.distance_to(&other.point) < tol
    }
}

fn check_unit(v: &Vec3) -> Result<()> {
    if !v.iter().all(|x| x.is_finite()) {
        return Err(IkError::NonFinite("axis"));
    }
    let n = v.norm();
    if (n - 1.0).abs() > UNIT_TOL {
        return Err(IkError::NonUnitAxis(n));
    }
    Ok(())
}

/// Checks `R^T R = I` and `det R = +1` within `tol`.
pub fn check_rotation(r: &Mat3, tol: f64) -> Result<()> {
    if !r.iter().all(|x| x.is_finite()) {
        return Err(IkError::NonFinite("rotation"));
    }
    let dev = (r.transpose() * r - Mat3::identity()).abs().max();
    if dev > tol {
        return Err(IkError::NonOrthonormal(dev));
    }
    let det = r.determinant();
    if (det - 1.0).abs() > tol {
        return Err(IkError::Improper(det));
    }
    Ok(())
}

#[inline]
pub fn skew(v: &Vec3) -> Mat3 {
    Mat3::new(0.0, -v.z, v.y, v.z, 0.0, -v.x, -v.y, v.x, 0.0)
}

/// Rodrigues rotation without the unit-length check.
#[inline]
pub(crate) fn rotation(axis: &Vec3, angle: f64) -> Mat3 {
    let (s, c) = angle.sin_cos();
    let k = skew(axis);
    Mat3::identity() + k * s + k * k * (1.0 - c)
}

/// Rotates `v` about the unit `axis` by `angle` (Rodrigues vector form).
#[inline]
pub(crate) fn rotate(axis: &Vec3, angle: f64, v: &Vec3) -> Vec3 {
    let (s, c) = angle.sin_cos();
    v * c + axis.cross(v) * s + axis * (axis.dot(v) * (1.0 - c))
}

/// SO(3) exponential: rotation by `angle` radians about the unit `axis`.
pub fn exp_so3(axis: &Vec3, angle: f64) -> Result<Mat3> {
    check_unit(axis)?;
    if !angle.is_finite() {
        return Err(IkError::NonFinite("angle"));
    }
    Ok(rotation(axis, angle))
}

/// SO(3) logarithm as `(axis, angle)` with `angle` in `[0, pi]`.
///
/// The identity maps to `((0, 0, 1), 0)`. Near `pi` the axis comes from the
/// largest diagonal entry of the symmetric part.
pub fn log_so3(r: &Mat3) -> Result<(Vec3, f64)> {
    check_rotation(r, ORTHO_TOL)?;
    Ok(log_unchecked(r))
}

pub(crate) fn log_unchecked(r: &Mat3) -> (Vec3, f64) {
    let tr = r.trace();
    let c = ((tr - 1.0) * 0.5).clamp(-1.0, 1.0);
    let w = Vec3::new(r[(2, 1)] - r[(1, 2)], r[(0, 2)] - r[(2, 0)], r[(1, 0)] - r[(0, 1)]) * 0.5;
    let s = w.norm();

    if (tr + 1.0).abs() < NEAR_PI_TRACE {
        let k = (0..3)
            .max_by(|&a, &b| r[(a, a)].total_cmp(&r[(b, b)]))
            .unwrap_or(0);
        let one_minus_c = 1.0 - c;
        let ak = ((r[(k, k)] - c) / one_minus_c).max(0.0).sqrt();
        let mut axis = Vec3::zeros();
        for j in 0..3 {
            axis[j] = if j == k {
                ak
            } else {
                0.5 * (r[(j, k)] + r[(k, j)]) / (one_minus_c * ak)
            };
        }
        axis.normalize_mut();
        if axis.dot(&w) < 0.0 {
            axis = -axis;
        }
        return (axis, s.atan2(c));
    }

    if s == 0.0 {
        return (Vec3::z(), 0.0);
    }
    (w / s, s.atan2(c))
}

/// Angle in `(-pi, pi]` that rotates the projection of `a` onto the plane
/// normal to `about` into the projection of `b`.
pub fn signed_angle(a: &Vec3, b: &Vec3, about: &Vec3) -> Result<f64> {
    let pa = a - about * about.dot(a);
    let pb = b - about * about.dot(b);
    if pa.norm() <= PROJECTION_TOL || pb.norm() <= PROJECTION_TOL {
        return Err(IkError::DegenerateProjection);
    }
    Ok(wrap_pi(about.dot(&pa.cross(&pb)).atan2(pa.dot(&pb))))
}

/// Wraps an angle to `(-pi, pi]`.
#[inline]
pub fn wrap_pi(a: f64) -> f64 {
    use std::f64::consts::{PI, TAU};
    let mut x = a.rem_euclid(TAU);
    if x > PI {
        x -= TAU;
    }
    x
}

/// Geometric Jacobian about the point `p_e`, linear rows first.
pub fn jacobian_from_axes(axes: &[ScrewAxis; 7], p_e: &Vec3) -> Jacobian {
    let mut j = Jacobian::zeros();
    for (i, ax) in axes.iter().enumerate() {
        let lin = ax.direction.cross(&(p_e - ax.point));
        j.fixed_view_mut::<3, 1>(0, i).copy_from(&lin);
        j.fixed_view_mut::<3, 1>(3, i).copy_from(&ax.direction);
    }
    j
}

/// Yoshikawa manipulability `sqrt(det(J J^T))`, evaluated as the product of
/// the singular values of `J` so rank-deficient inputs give a clean zero.
pub fn manipulability(j: &Jacobian) -> f64 {
    j.singular_values().iter().product()
}

/// Number of singular values of `j` above `threshold`.
pub fn rank(j: &Jacobian, threshold: f64) -> usize {
    j.singular_values().iter().filter(|&&s| s > threshold).count()
}

/// Geodesic distance between two rotations.
pub fn rotation_distance(a: &Mat3, b: &Mat3) -> f64 {
    log_unchecked(&(a.transpose() * b)).1
}
