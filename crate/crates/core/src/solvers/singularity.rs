use serde::{Deserialize, Serialize};

use crate::model::{shoulder_point, FrankaGeometry, Pose};
use crate::screw::Vec3;

use super::chain::PARALLEL_TOL;

/// Distance from S to the line of axis 7 below which the pose is type-2 singular.
pub const TYPE2_DISTANCE_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SingularityKind {
    None,
    /// Axes 1 and 3 collinear; the shoulder can spin about them.
    Type1,
    /// Axis 7 passes through the shoulder centre.
    Type2,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SingularityReport {
    pub kind: SingularityKind,
    /// Emergency q1 applied to a type-1 shoulder, if any.
    pub emergency_q1: Option<f64>,
    /// Emergency q7 used after a type-2 fallback, if any.
    pub emergency_q7: Option<f64>,
}

impl SingularityReport {
    pub const NONE: Self = Self {
        kind: SingularityKind::None,
        emergency_q1: None,
        emergency_q7: None,
    };
}

/// Distance from the shoulder centre to the line of axis 7.
pub fn type2_distance(pose: &Pose, geom: &FrankaGeometry) -> f64 {
    let k = pose.approach();
    (shoulder_point(geom) - pose.wrist_point(geom)).cross(&k).norm()
}

pub fn is_type2(pose: &Pose, geom: &FrankaGeometry) -> bool {
    type2_distance(pose, geom) < TYPE2_DISTANCE_TOL
}

/// Axes 1 and 3 collinear (both pass through S, so parallel suffices).
pub fn is_type1(s1: &Vec3, s3: &Vec3) -> bool {
    s1.cross(s3).norm() < PARALLEL_TOL
}

/// Classifies a pose, optionally together with a solved shoulder `(s1, s3)`.
/// Type-2 takes precedence because it is decided from the pose alone.
pub fn detect_singularity(pose: &Pose, shoulder: Option<(&Vec3, &Vec3)>, geom: &FrankaGeometry) -> SingularityKind {
    if is_type2(pose, geom) {
        SingularityKind::Type2
    } else if shoulder.is_some_and(|(s1, s3)| is_type1(s1, s3)) {
        SingularityKind::Type1
    } else {
        SingularityKind::None
    }
}
