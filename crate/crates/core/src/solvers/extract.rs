use crate::error::{IkError, Result};
use crate::model::{forward_kinematics, FrankaGeometry, JointVector, Pose};
use crate::screw::{rotation, signed_angle, ScrewAxis};

/// FK residual above which a set of axes is rejected.
pub const CONSISTENCY_TOL: f64 = 1e-6;

/// Joint angles from solved base-frame axes.
///
/// Each joint carries a reference direction normal to its own axis: the next
/// joint's axis for joints 1 to 6 and the x axis of E for joint 7. Joint `i` is
/// the signed angle, about the solved axis `i`, from the home reference
/// (rotated by joints `1..i`) to the solved one. The result is checked
/// against FK, and angles are reported in raw `(-pi, pi]` form.
pub fn extract_angles(axes: &[ScrewAxis; 7], pose: &Pose, geom: &FrankaGeometry) -> Result<JointVector> {
    let q = extract_unchecked(axes, pose, geom)?;
    let (fk_pose, fk_axes) = forward_kinematics(&q, geom);
    let (dp, dr) = fk_pose.error_to(pose);
    let mut residual = dp.max(dr);
    for (a, b) in fk_axes.iter().zip(axes) {
        residual = residual
            .max((a.direction - b.direction).norm())
            .max(a.distance_to(&b.point));
    }
    if !(residual <= CONSISTENCY_TOL) {
        return Err(IkError::InconsistentAxes(residual));
    }
    Ok(q)
}

pub(crate) fn extract_unchecked(
    axes: &[ScrewAxis; 7],
    pose: &Pose,
    geom: &FrankaGeometry,
) -> Result<JointVector> {
    let home = geom.home_axes();
    let home_x = geom.home_pose().rotation.column(0).into_owned();
    let solved_x = pose.rotation.column(0).into_owned();

    let mut q = [0.0; 7];
    let mut acc = nalgebra::Matrix3::identity();
    for i in 0..7 {
        let (reference, target) = if i < 6 {
            (home[i + 1].direction, axes[i + 1].direction)
        } else {
            (home_x, solved_x)
        };
        let axis = &axes[i].direction;
        q[i] = signed_angle(&(acc * reference), &target, axis)?;
        acc = rotation(axis, q[i]) * acc;
    }
    Ok(q)
}
