//! Franka arm geometry, joint limits and forward kinematics.
//!
//! Frames follow the manufacturer's modified-DH assignment. The end-effector
//! frame E is the gripper TCP: the flange frame rotated by -pi/4 about its z
//! axis and moved `d_E` along it. With the arm at `q = 0` every joint axis is
//! the z axis of its DH frame, which gives these home screws (`h = d1 + d3 + d5`):
//!
//! | joint | direction | point                     |
//! |-------|-----------|---------------------------|
//! | 1     | +z        | (0, 0, d1)                |
//! | 2     | +y        | (0, 0, d1)                |
//! | 3     | +z        | (0, 0, d1 + d3)           |
//! | 4     | -y        | (a4, 0, d1 + d3)          |
//! | 5     | +z        | (a4 - a5, 0, h)           |
//! | 6     | -y        | (a4 - a5, 0, h)           |
//! | 7     | -z        | (a4 - a5 + a7, 0, h)      |
//!
//! `a5` is stored as a positive length; the DH table lists the same offset as
//! `-0.0825` because it points back towards axis 5.

use std::f64::consts::{FRAC_1_SQRT_2, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{IkError, Result};
use crate::screw::{check_rotation, rotation, wrap_pi, Mat3, ScrewAxis, Vec3};

pub type JointVector = [f64; 7];

/// Inclusive tolerance for joint-limit checks.
pub const LIMIT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrankaGeometry {
    pub d1: f64,
    pub d3: f64,
    pub d5: f64,
    pub a4: f64,
    pub a5: f64,
    pub a7: f64,
    #[serde(rename = "dE")]
    pub d_e: f64,
    #[serde(rename = "limits")]
    pub joint_limits: [[f64; 2]; 7],
}

impl Default for FrankaGeometry {
    fn default() -> Self {
        default_geometry()
    }
}

/// Panda arm with the Franka hand attached (E = `panda_hand_tcp`).
pub fn default_geometry() -> FrankaGeometry {
    FrankaGeometry {
        d1: 0.333,
        d3: 0.316,
        d5: 0.384,
        a4: 0.0825,
        a5: 0.0825,
        a7: 0.088,
        d_e: 0.107 + 0.1034,
        joint_limits: [
            [-2.8973, 2.8973],
            [-1.7628, 1.7628],
            [-2.8973, 2.8973],
            [-3.0718, -0.0698],
            [-2.8973, 2.8973],
            [-0.0175, 3.7525],
            [-2.8973, 2.8973],
        ],
    }
}

impl FrankaGeometry {
    /// Distance from the shoulder centre to the elbow point O4.
    pub fn b1(&self) -> f64 {
        self.d3.hypot(self.a4)
    }

    /// Distance from O4 to the wrist point O6.
    pub fn b2(&self) -> f64 {
        self.d5.hypot(self.a5)
    }

    pub fn validate(&self) -> Result<()> {
        let lengths = [
            ("d1", self.d1),
            ("d3", self.d3),
            ("d5", self.d5),
            ("a4", self.a4),
            ("a5", self.a5),
            ("a7", self.a7),
            ("dE", self.d_e),
        ];
        for (name, v) in lengths {
            if !v.is_finite() || v <= 0.0 {
                return Err(IkError::InvalidGeometry(format!(
                    "{name} must be a positive length, got {v}"
                )));
            }
        }
        for (i, [lo, hi]) in self.joint_limits.iter().enumerate() {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(IkError::InvalidGeometry(format!(
                    "joint {} limits must satisfy lower < upper, got [{lo}, {hi}]",
                    i + 1
                )));
            }
        }
        Ok(())
    }

    /// Parses and validates a geometry document.
    pub fn from_json(text: &str) -> Result<Self> {
        let g: FrankaGeometry = serde_json::from_str(text)
            .map_err(|e| IkError::InvalidGeometry(e.to_string()))?;
        g.validate()?;
        Ok(g)
    }

    /// Per-joint limit check, inclusive within [`LIMIT_TOL`]. NaN fails.
    pub fn limits_ok(&self, q: &JointVector) -> [bool; 7] {
        std::array::from_fn(|i| {
            let [lo, hi] = self.joint_limits[i];
            q[i] >= lo - LIMIT_TOL && q[i] <= hi + LIMIT_TOL
        })
    }

    /// Representative of `angle` inside the limit interval of `joint`
    /// (0-based) if one exists, otherwise the value wrapped to `(-pi, pi]`.
    pub fn representative(&self, joint: usize, angle: f64) -> f64 {
        if !angle.is_finite() {
            return angle;
        }
        let [lo, hi] = self.joint_limits[joint];
        let w = wrap_pi(angle);
        for k in [0.0, 1.0, -1.0, 2.0, -2.0] {
            let c = w + k * TAU;
            if c >= lo - LIMIT_TOL && c <= hi + LIMIT_TOL {
                return c;
            }
        }
        w
    }

    /// Screw axes at `q = 0`, base frame.
    pub fn home_axes(&self) -> [ScrewAxis; 7] {
        let s = shoulder_point(self);
        let elbow_z = self.d1 + self.d3;
        let wrist_z = elbow_z + self.d5;
        let wrist_x = self.a4 - self.a5;
        let y = Vec3::y();
        let z = Vec3::z();
        [
            ScrewAxis::base(z, s),
            ScrewAxis::base(y, s),
            ScrewAxis::base(z, Vec3::new(0.0, 0.0, elbow_z)),
            ScrewAxis::base(-y, Vec3::new(self.a4, 0.0, elbow_z)),
            ScrewAxis::base(z, Vec3::new(wrist_x, 0.0, wrist_z)),
            ScrewAxis::base(-y, Vec3::new(wrist_x, 0.0, wrist_z)),
            ScrewAxis::base(-z, Vec3::new(wrist_x + self.a7, 0.0, wrist_z)),
        ]
    }

    /// End-effector pose at `q = 0`.
    pub fn home_pose(&self) -> Pose {
        let h = FRAC_1_SQRT_2;
        Pose {
            rotation: Mat3::new(h, h, 0.0, h, -h, 0.0, 0.0, 0.0, -1.0),
            position: Vec3::new(
                self.a4 - self.a5 + self.a7,
                0.0,
                self.d1 + self.d3 + self.d5 - self.d_e,
            ),
        }
    }
}

/// Rigid transform of frame E relative to the base frame O.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose {
    pub rotation: Mat3,
    pub position: Vec3,
}

/// Orthonormality slack accepted by [`Pose::new`] before projection.
pub const POSE_ORTHO_TOL: f64 = 1e-6;

impl Pose {
    /// Validates the pose and projects the rotation onto SO(3).
    ///
    /// Rotations printed to eight digits are off by ~1e-8, so inputs within
    /// [`POSE_ORTHO_TOL`] are accepted and replaced by their polar factor.
    pub fn new(rotation: Mat3, position: Vec3) -> Result<Self> {
        if !position.iter().all(|x| x.is_finite()) {
            return Err(IkError::NonFinite("position"));
        }
        check_rotation(&rotation, POSE_ORTHO_TOL)?;
        Ok(Self {
            rotation: polar_projection(&rotation),
            position,
        })
    }

    pub fn from_parts_unchecked(rotation: Mat3, position: Vec3) -> Self {
        Self { rotation, position }
    }

    /// Approach axis `k_E` (third column of the rotation) in the base frame.
    #[inline]
    pub fn approach(&self) -> Vec3 {
        self.rotation.column(2).into_owned()
    }

    /// Flange-side wrist point O7.
    #[inline]
    pub fn wrist_point(&self, geom: &FrankaGeometry) -> Vec3 {
        self.position - self.approach() * geom.d_e
    }

    /// Position and geodesic rotation distance to `other`.
    pub fn error_to(&self, other: &Pose) -> (f64, f64) {
        (
            (self.position - other.position).norm(),
            crate::screw::rotation_distance(&self.rotation, &other.rotation),
        )
    }
}

/// Nearest rotation matrix in the Frobenius sense.
pub fn polar_projection(r: &Mat3) -> Mat3 {
    let svd = r.svd(true, true);
    let (u, v_t) = (svd.u.unwrap(), svd.v_t.unwrap());
    let mut out = u * v_t;
    if out.determinant() < 0.0 {
        let mut u = u;
        u.column_mut(2).neg_mut();
        out = u * v_t;
    }
    out
}

/// Shoulder centre S, where axes 1, 2 and 3 meet.
pub fn shoulder_point(geom: &FrankaGeometry) -> Vec3 {
    Vec3::new(0.0, 0.0, geom.d1)
}

/// Product-of-exponentials forward kinematics.
///
/// Returns the pose of E and the seven joint axes displaced to configuration
/// `q`, all in the base frame.
pub fn forward_kinematics(q: &JointVector, geom: &FrankaGeometry) -> (Pose, [ScrewAxis; 7]) {
    let home = geom.home_axes();
    let mut rot = Mat3::identity();
    let mut trans = Vec3::zeros();
    let mut axes = home;
    for i in 0..7 {
        let h = &home[i];
        axes[i] = ScrewAxis::base(rot * h.direction, rot * h.point + trans);
        let step = rotation(&h.direction, q[i]);
        // T <- T * exp([S_i] q_i), with exp = (step, (I - step) r_i)
        trans += rot * (h.point - step * h.point);
        rot *= step;
    }
    let m = geom.home_pose();
    let pose = Pose {
        rotation: rot * m.rotation,
        position: rot * m.position + trans,
    };
    (pose, axes)
}
