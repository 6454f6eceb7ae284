use arrayvec::ArrayVec;

use crate::model::{shoulder_point, FrankaGeometry, Pose};

use super::chain::{
    assemble_shoulder, elbow_branches, elbow_shape, fifth_axis_candidates, forearm, wrist_from_q7,
    AxesCandidate, Forearm,
};
use super::Elbow;

/// Up to four forearms (elbow x wrist branch) for a locked q7.
pub(crate) fn forearms_for_q7(
    pose: &Pose,
    q7: f64,
    geom: &FrankaGeometry,
    with_elbow_down: bool,
) -> ArrayVec<(Elbow, u8, Forearm), 4> {
    let mut out = ArrayVec::new();
    let wrist = wrist_from_q7(pose, q7, geom);
    let s = shoulder_point(geom);
    let l = (wrist.o6 - s).norm();
    for (elbow, beta) in elbow_branches(l, geom) {
        if elbow == Elbow::Down && !with_elbow_down {
            continue;
        }
        let shape = elbow_shape(beta, geom);
        for (wb, s5) in fifth_axis_candidates(&wrist.o6, &wrist.s6, &s, shape.alpha) {
            if let Some(arm) = forearm(wrist, s5, shape.orient, geom) {
                out.push((elbow, wb, arm));
            }
        }
    }
    out
}

pub(crate) fn candidates(
    pose: &Pose,
    q7: f64,
    geom: &FrankaGeometry,
    emergency_q1: Option<f64>,
    out: &mut Vec<AxesCandidate>,
) {
    for (elbow, wb, arm) in forearms_for_q7(pose, q7, geom, true) {
        assemble_shoulder(&arm, elbow, wb, 0, emergency_q1, geom, out);
    }
}
