//! q6 locked. With `gamma1 = pi - q6` the angle between axes 5 and 7, the
//! two axes meet at a point P fixed by the pose. The polygon S-O4-O6-P fixes
//! the angle `gamma2` between `r_{S/P}` and `-s5`, which leaves one scalar
//! equation in `u = 5pi/4 - q7`. When `q6` is 0 or pi the axes are parallel
//! and the problem is solved in the plane through axis 4 normal to them.

use std::f64::consts::{FRAC_PI_4, PI};

use crate::model::{shoulder_point, FrankaGeometry, Pose};
use crate::screw::{rotate, wrap_pi, Vec3};

use super::chain::{
    assemble_shoulder, clamp_unit, forearm, wrist_from_q7, AxesCandidate, Forearm, Wrist, TRIG_TOL,
};
use super::Elbow;

const ELBOW_SLACK: f64 = 1e-9;

pub(crate) fn candidates(
    pose: &Pose,
    q6: f64,
    geom: &FrankaGeometry,
    emergency_q1: Option<f64>,
    out: &mut Vec<AxesCandidate>,
) {
    if q6.sin().abs() < TRIG_TOL {
        parallel(pose, q6.cos().signum(), geom, emergency_q1, out);
    } else {
        skew(pose, q6, geom, emergency_q1, out);
    }
}

fn skew(pose: &Pose, q6: f64, geom: &FrankaGeometry, emergency_q1: Option<f64>, out: &mut Vec<AxesCandidate>) {
    let (sg1, cg1) = (PI - q6).sin_cos();
    let r = &pose.rotation;
    let k = pose.approach();
    let s = shoulder_point(geom);
    let p = pose.wrist_point(geom) + k * (geom.a7 * cg1 / sg1);
    let l_c = geom.a7 / sg1;

    let r_sp = s - p;
    let d_sp = r_sp.norm();
    let c = r.transpose() * r_sp;
    let l_po4 = geom.a5.hypot(geom.d5 + l_c);
    let b1 = geom.b1();
    let raw = (d_sp * d_sp + l_po4 * l_po4 - b1 * b1) / (2.0 * d_sp * l_po4);
    let Some(cos_tau) = clamp_unit(raw) else {
        return;
    };
    let tau = cos_tau.acos();
    let mut offset = (geom.a5 / (geom.d5 + l_c)).atan();
    if l_c < -geom.d5 {
        offset += PI;
    }

    let mut gammas = vec![(Elbow::Up, tau + offset)];
    let near_flat = geom.d3 + geom.d5 + l_c + ELBOW_SLACK < d_sp && raw < 1.0;
    if near_flat {
        gammas.push((Elbow::Down, -tau + offset));
    }

    let rho = sg1.abs() * c.x.hypot(c.y);
    if rho < 1e-12 {
        return;
    }
    let u2 = (c.x * sg1).atan2(c.y * sg1);
    for (elbow, gamma2) in gammas {
        let Some(sin_u1) = clamp_unit((d_sp * gamma2.cos() + c.z * cg1) / rho) else {
            continue;
        };
        let u1 = sin_u1.asin();
        for (wb, u) in [(1u8, u1 - u2), (2u8, PI - u1 - u2)] {
            let q7 = wrap_pi(5.0 * FRAC_PI_4 - u);
            let (su, cu) = u.sin_cos();
            let s5 = r * Vec3::new(-sg1 * cu, -sg1 * su, cg1);
            let wrist = wrist_from_q7(pose, q7, geom);
            if let Some(arm) = forearm(wrist, s5, 1.0, geom) {
                assemble_shoulder(&arm, elbow, wb, 0, emergency_q1, geom, out);
            }
        }
    }
}

fn parallel(pose: &Pose, sigma: f64, geom: &FrankaGeometry, emergency_q1: Option<f64>, out: &mut Vec<AxesCandidate>) {
    let r = &pose.rotation;
    let kz = Vec3::z();
    let s = shoulder_point(geom);
    // E' = projection of E on the plane through axis 4 normal to axes 5 and 7
    let e_p = Vec3::new(0.0, 0.0, -geom.d_e + sigma * geom.d5);
    let v = r.transpose() * (s - pose.position) - e_p;
    let h = v.z;
    let r_sp = Vec3::new(v.x, v.y, 0.0);
    let big_l = r_sp.norm();
    let b1 = geom.b1();
    let disc = b1 * b1 - h * h;
    if big_l < 1e-12 || disc < -TRIG_TOL {
        return;
    }
    let root = disc.max(0.0).sqrt();
    let a7 = geom.a7;
    let unit_sp = r_sp / big_l;

    for (elbow, l_i) in [(Elbow::Up, geom.a5 - root), (Elbow::Down, geom.a5 + root)] {
        if l_i.abs() < 1e-12 {
            continue;
        }
        let Some(cos_psi) = clamp_unit((l_i * l_i - a7 * a7 - big_l * big_l) / (-2.0 * a7 * big_l)) else {
            continue;
        };
        let psi = cos_psi.acos();
        for (wb, sign) in [(1u8, -1.0), (2u8, 1.0)] {
            let o6p = rotate(&kz, sign * psi, &unit_sp) * a7;
            let diff = r_sp - o6p;
            let dn = diff.norm();
            if dn < 1e-12 {
                continue;
            }
            let i4 = diff * (l_i.signum() / dn);
            let s5_e = -kz * sigma;
            let r6_e = e_p + o6p - kz * (sigma * geom.d5);
            let r4_e = e_p + o6p + i4 * geom.a5;
            let s4_e = i4.cross(&s5_e);
            let s6_e = (o6p / a7).cross(&kz);

            let arm = Forearm {
                wrist: Wrist {
                    o7: pose.wrist_point(geom),
                    o6: pose.position + r * r6_e,
                    s6: r * s6_e,
                    s7: pose.approach(),
                },
                s5: r * s5_e,
                s4: r * s4_e,
                o4: pose.position + r * r4_e,
            };
            assemble_shoulder(&arm, elbow, wb, 0, emergency_q1, geom, out);
        }
    }
}
