//! q4 locked: the S-O4-O6 triangle is rigid, so O6 lies on the sphere of
//! radius `l` about S and on the circle of radius `a7` about O7 normal to
//! `k_E`. Projecting onto the `x_E y_E` plane turns this into the
//! intersection of two circles, which gives two values of q7.

use std::f64::consts::FRAC_PI_4;

use crate::model::{shoulder_point, FrankaGeometry, Pose};
use crate::screw::wrap_pi;

use super::chain::{
    assemble_shoulder, clamp_unit, elbow_shape, fifth_axis_candidates, forearm, straight_elbow,
    wrist_from_q7, AxesCandidate, TRIG_TOL,
};
use super::Elbow;

pub(crate) fn candidates(
    pose: &Pose,
    q4: f64,
    geom: &FrankaGeometry,
    emergency_q1: Option<f64>,
    out: &mut Vec<AxesCandidate>,
) {
    let beta = -q4;
    let shape = elbow_shape(beta, geom);
    let elbow = if beta >= straight_elbow(geom) {
        Elbow::Up
    } else {
        Elbow::Down
    };
    let s = shoulder_point(geom);
    // r_{S/O7} in frame E
    let v = pose.rotation.transpose() * (s - pose.wrist_point(geom));
    let l_proj_sq = shape.l * shape.l - v.z * v.z;
    if l_proj_sq < -TRIG_TOL {
        return;
    }
    let l_so6 = l_proj_sq.max(0.0).sqrt();
    let l_se = v.x.hypot(v.y);
    if l_se < 1e-12 {
        return;
    }
    let a7 = geom.a7;
    let Some(cos_psi) = clamp_unit((l_se * l_se + a7 * a7 - l_so6 * l_so6) / (2.0 * a7 * l_se)) else {
        return;
    };
    let psi = cos_psi.acos();
    let phi = v.y.atan2(v.x);

    for (root, sign) in [(1u8, -1.0), (2u8, 1.0)] {
        let q7 = wrap_pi(sign * psi - phi - 3.0 * FRAC_PI_4);
        let wrist = wrist_from_q7(pose, q7, geom);
        for (wb, s5) in fifth_axis_candidates(&wrist.o6, &wrist.s6, &s, shape.alpha) {
            if let Some(arm) = forearm(wrist, s5, shape.orient, geom) {
                assemble_shoulder(&arm, elbow, wb, root, emergency_q1, geom, out);
            }
        }
    }
}
