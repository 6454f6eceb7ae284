//! Geometry shared by all solvers: from a known wrist (O6, s6) down to the
//! shoulder.
//!
//! Elbow parametrisation. Joint 4 rotates link 4 by `beta = -q4` about `-s4`.
//! In the plane normal to `s4` the triangle S-O4-O6 has fixed sides `b1` and
//! `b2`; it is straight at `beta0 = atan(a4/d3) + atan(a5/d5)`. For a given
//! `l = |S O6|` the main (elbow-up) branch is `beta0 + delta` and the
//! secondary (elbow-down) branch is `beta0 - delta`, where `delta` is the
//! supplement of the interior angle at O4. The secondary branch keeps `q4 <= 0`
//! only while `l` exceeds its `q4 = 0` value.

use std::f64::consts::{FRAC_PI_4, PI};

use arrayvec::ArrayVec;

use crate::model::{shoulder_point, FrankaGeometry, Pose};
use crate::screw::{rotate, ScrewAxis, Vec3};

use super::{Branch, Elbow, Shoulder};

/// Clamping window for arccos/arcsin arguments.
pub(crate) const TRIG_TOL: f64 = 1e-9;
/// Cross-product norm below which axes 1 and 3 are treated as collinear.
/// Poses printed to eight digits leave `|s1 x s3|` around 1e-7 at a true
/// type-1 singularity; forcing the singular shoulder at this bound moves the
/// end effector by less than 6e-7 m.
pub const PARALLEL_TOL: f64 = 5e-7;
/// Slack on the folded end of the elbow-down branch.
const ELBOW_SLACK: f64 = 1e-9;

/// Clamps `x` into `[-1, 1]` when within [`TRIG_TOL`] of it.
#[inline]
pub(crate) fn clamp_unit(x: f64) -> Option<f64> {
    if x.abs() > 1.0 + TRIG_TOL || x.is_nan() {
        None
    } else {
        Some(x.clamp(-1.0, 1.0))
    }
}

/// Wrist geometry fixed by the pose and q7.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Wrist {
    pub o7: Vec3,
    pub o6: Vec3,
    pub s6: Vec3,
    pub s7: Vec3,
}

/// Places O7, O6 and axis 6 for a given q7.
#[inline]
pub(crate) fn wrist_from_q7(pose: &Pose, q7: f64, geom: &FrankaGeometry) -> Wrist {
    let r = &pose.rotation;
    let s7 = pose.approach();
    let o7 = pose.position - s7 * geom.d_e;
    let (s_a, c_a) = (FRAC_PI_4 - q7).sin_cos();
    let (s_b, c_b) = (3.0 * FRAC_PI_4 - q7).sin_cos();
    let o6 = o7 - r * Vec3::new(c_a, s_a, 0.0) * geom.a7;
    let s6 = r * Vec3::new(c_b, s_b, 0.0);
    Wrist { o7, o6, s6, s7 }
}

/// Elbow angle `beta = -q4` at which S, O4 and O6 are collinear.
#[inline]
pub(crate) fn straight_elbow(geom: &FrankaGeometry) -> f64 {
    geom.a4.atan2(geom.d3) + geom.a5.atan2(geom.d5)
}

/// Elbow angles `beta` that realise the shoulder-wrist distance `l`.
pub(crate) fn elbow_branches(l: f64, geom: &FrankaGeometry) -> ArrayVec<(Elbow, f64), 2> {
    let mut out = ArrayVec::new();
    let (b1, b2) = (geom.b1(), geom.b2());
    let raw = (b1 * b1 + b2 * b2 - l * l) / (2.0 * b1 * b2);
    let Some(c) = clamp_unit(raw) else {
        return out;
    };
    let delta = PI - c.acos();
    let beta0 = straight_elbow(geom);
    out.push((Elbow::Up, beta0 + delta));
    // No slack at full reach: delta grows like the square root of the gap.
    let l_folded = (geom.a4 - geom.a5).hypot(geom.d3 + geom.d5);
    if l > l_folded + ELBOW_SLACK && raw > -1.0 {
        out.push((Elbow::Down, beta0 - delta));
    }
    out
}

/// Shape of the S-O4-O6 triangle for elbow angle `beta`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct ElbowShape {
    /// `|S O6|`.
    pub l: f64,
    /// Angle between `s5` and `r_{S/O6}`.
    pub alpha: f64,
    /// `+1` when `s4` has the orientation of `s5 x r_{O6/S}`, `-1` otherwise.
    pub orient: f64,
}

pub(crate) fn elbow_shape(beta: f64, geom: &FrankaGeometry) -> ElbowShape {
    // Link-4 plane coordinates (x along s5 x s4, z along s5), O6 at the origin.
    let (sb, cb) = beta.sin_cos();
    let ox = geom.a4 * cb - geom.d3 * sb;
    let oz = geom.a4 * sb + geom.d3 * cb;
    let x = geom.a5 - ox;
    let z = -geom.d5 - oz;
    ElbowShape {
        l: x.hypot(z),
        alpha: x.abs().atan2(z),
        orient: if x >= 0.0 { 1.0 } else { -1.0 },
    }
}

/// Directions of axis 5 that are normal to `s6` and make angle `alpha` with
/// `r_{S/O6}`: the intersection of a cone with a great circle.
///
/// Frame C has `z` along `r_{S/O6}` and `y` along the part of `s6` normal to
/// it, so `s6 = (0, s6y, s6z)` and `s5 = (sin a sin g, sin a cos g, cos a)`;
/// orthogonality gives `cos g = -(s6z / s6y) cot a`.
pub(crate) fn fifth_axis_candidates(
    o6: &Vec3,
    s6: &Vec3,
    s: &Vec3,
    alpha: f64,
) -> ArrayVec<(u8, Vec3), 2> {
    let mut out = ArrayVec::new();
    let zc = (s - o6).normalize();
    let s6z = s6.dot(&zc);
    let perp = s6 - zc * s6z;
    let s6y = perp.norm();
    let (sa, ca) = alpha.sin_cos();
    if s6y < 1e-12 || sa < 1e-12 {
        return out;
    }
    let yc = perp / s6y;
    let xc = yc.cross(&zc);
    let Some(a_gamma) = clamp_unit(-(s6z / s6y) * ca / sa) else {
        return out;
    };
    let gamma = a_gamma.acos();
    for (idx, g) in [(1u8, gamma), (2u8, -gamma)] {
        let (sg, cg) = g.sin_cos();
        out.push((idx, xc * (sa * sg) + yc * (sa * cg) + zc * ca));
    }
    out
}

/// Axes found before the shoulder is assembled.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Forearm {
    pub wrist: Wrist,
    pub s5: Vec3,
    pub s4: Vec3,
    pub o4: Vec3,
}

/// Axis 4 and O4 from the wrist and axis 5.
#[inline]
pub(crate) fn forearm(wrist: Wrist, s5: Vec3, orient: f64, geom: &FrankaGeometry) -> Option<Forearm> {
    let s = shoulder_point(geom);
    let n = s5.cross(&(wrist.o6 - s));
    let nn = n.norm();
    if nn < 1e-12 {
        return None;
    }
    let s4 = n * (orient / nn);
    let o4 = wrist.o6 - s5 * geom.d5 + s5.cross(&s4) * geom.a5;
    Some(Forearm { wrist, s5, s4, o4 })
}

/// A full set of axes before angle extraction.
#[derive(Debug, Clone, Copy)]
pub struct AxesCandidate {
    pub axes: [ScrewAxis; 7],
    pub branch: Branch,
    /// Type-1 singular shoulder.
    pub shoulder_singular: bool,
    /// Type-1 singular with no emergency q1: q1 and q3 are undefined.
    pub self_motion: bool,
}

/// Assembles the spherical shoulder for a forearm; pushes up to two candidates.
pub(crate) fn assemble_shoulder(
    arm: &Forearm,
    elbow: Elbow,
    wrist_branch: u8,
    free: u8,
    emergency_q1: Option<f64>,
    geom: &FrankaGeometry,
    out: &mut Vec<AxesCandidate>,
) {
    let s = shoulder_point(geom);
    let r = arm.o4 - s;
    let rn = r.norm();
    if rn < 1e-12 {
        return;
    }
    let eps = geom.a4.atan2(geom.d3);
    let s3 = rotate(&arm.s4, eps, &(r / rn));
    let z = Vec3::z();
    let c = z.cross(&s3);
    let cn = c.norm();

    let tail = [
        ScrewAxis::base(s3, s),
        ScrewAxis::base(arm.s4, arm.o4),
        ScrewAxis::base(arm.s5, arm.wrist.o6),
        ScrewAxis::base(arm.wrist.s6, arm.wrist.o6),
        ScrewAxis::base(arm.wrist.s7, arm.wrist.o7),
    ];
    let build = |s2: Vec3, shoulder: Shoulder, singular: bool, self_motion: bool| AxesCandidate {
        axes: [
            ScrewAxis::base(z, s),
            ScrewAxis::base(s2, s),
            tail[0],
            tail[1],
            tail[2],
            tail[3],
            tail[4],
        ],
        branch: Branch {
            shoulder,
            elbow,
            wrist: wrist_branch,
            free,
        },
        shoulder_singular: singular,
        self_motion,
    };

    if cn < PARALLEL_TOL {
        match emergency_q1 {
            Some(q1) => {
                let s2 = Vec3::new(-q1.sin(), q1.cos(), 0.0);
                out.push(build(s2, Shoulder::Plus, true, false));
                out.push(build(-s2, Shoulder::Minus, true, false));
            }
            None => out.push(build(Vec3::y(), Shoulder::Plus, true, true)),
        }
    } else {
        let s2 = c / cn;
        out.push(build(s2, Shoulder::Plus, false, false));
        out.push(build(-s2, Shoulder::Minus, false, false));
    }
}
