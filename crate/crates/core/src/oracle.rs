//! Independent reference machinery for testing: a classical DH forward
//! kinematics, finite-difference Jacobians, a damped-least-squares numeric
//! IK and a seeded configuration sampler. Nothing here is used by the
//! analytic solvers.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

use nalgebra::{Isometry3, Matrix6, Rotation3, Translation3, UnitQuaternion, Vector3, Vector6};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::model::{FrankaGeometry, JointVector, Pose};
use crate::screw::Jacobian;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleConfig {
    pub damping: f64,
    pub step_cap: f64,
    pub max_iters: usize,
    pub pos_tol: f64,
    pub rot_tol: f64,
    pub seed: u64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            damping: 1e-3,
            step_cap: 0.2,
            max_iters: 500,
            pos_tol: 1e-9,
            rot_tol: 1e-9,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NumericIk {
    Converged { q: JointVector, iterations: usize },
    NoConvergence { q: JointVector, pos_err: f64, rot_err: f64 },
}

impl NumericIk {
    pub fn converged(&self) -> Option<JointVector> {
        match self {
            NumericIk::Converged { q, .. } => Some(*q),
            NumericIk::NoConvergence { .. } => None,
        }
    }
}

/// Modified (Craig) DH link transform.
fn dh_link(a: f64, d: f64, alpha: f64, theta: f64) -> Isometry3<f64> {
    let rx = Isometry3::from_parts(Translation3::identity(), UnitQuaternion::from_axis_angle(&Vector3::x_axis(), alpha));
    let tx = Isometry3::translation(a, 0.0, 0.0);
    let rz = Isometry3::from_parts(Translation3::identity(), UnitQuaternion::from_axis_angle(&Vector3::z_axis(), theta));
    let tz = Isometry3::translation(0.0, 0.0, d);
    rx * tx * rz * tz
}

/// Base-frame transforms of joint frames 1..7 followed by the end effector.
pub fn dh_frames(q: &JointVector, geom: &FrankaGeometry) -> [Isometry3<f64>; 8] {
    let table = [
        (0.0, geom.d1, 0.0),
        (0.0, 0.0, -FRAC_PI_2),
        (0.0, geom.d3, FRAC_PI_2),
        (geom.a4, 0.0, FRAC_PI_2),
        (-geom.a5, geom.d5, -FRAC_PI_2),
        (0.0, 0.0, FRAC_PI_2),
        (geom.a7, 0.0, FRAC_PI_2),
    ];
    let mut frames = [Isometry3::identity(); 8];
    let mut t = Isometry3::identity();
    for (i, &(a, d, alpha)) in table.iter().enumerate() {
        t *= dh_link(a, d, alpha, q[i]);
        frames[i] = t;
    }
    let tool = Isometry3::from_parts(
        Translation3::new(0.0, 0.0, geom.d_e),
        UnitQuaternion::from_axis_angle(&Vector3::z_axis(), -FRAC_PI_4),
    );
    frames[7] = t * tool;
    frames
}

/// End-effector pose by DH matrix chaining.
pub fn dh_forward_kinematics(q: &JointVector, geom: &FrankaGeometry) -> Pose {
    let e = dh_frames(q, geom)[7];
    Pose::from_parts_unchecked(
        *e.rotation.to_rotation_matrix().matrix(),
        e.translation.vector,
    )
}

/// Geometric Jacobian from the DH frames (joint axes are the frame z axes).
pub fn dh_jacobian(q: &JointVector, geom: &FrankaGeometry) -> Jacobian {
    let frames = dh_frames(q, geom);
    let p = frames[7].translation.vector;
    let mut j = Jacobian::zeros();
    for i in 0..7 {
        let z = frames[i].rotation * Vector3::z();
        let o = frames[i].translation.vector;
        j.fixed_view_mut::<3, 1>(0, i).copy_from(&z.cross(&(p - o)));
        j.fixed_view_mut::<3, 1>(3, i).copy_from(&z);
    }
    j
}

/// Rotation vector of `r`. The angle comes from atan2 so that small
/// rotations keep full relative precision; near pi nalgebra takes over.
fn rotation_log(r: &nalgebra::Matrix3<f64>) -> Vector3<f64> {
    let v = 0.5 * Vector3::new(r[(2, 1)] - r[(1, 2)], r[(0, 2)] - r[(2, 0)], r[(1, 0)] - r[(0, 1)]);
    let s = v.norm();
    let c = 0.5 * (r.trace() - 1.0);
    if c < -0.9 {
        return Rotation3::from_matrix_unchecked(*r).scaled_axis();
    }
    if s < 1e-300 {
        return Vector3::zeros();
    }
    v * (s.atan2(c) / s)
}

/// Central-difference Jacobian of the DH FK: linear velocity of the end
/// effector and spatial angular velocity, both in the base frame.
pub fn fd_jacobian(q: &JointVector, geom: &FrankaGeometry, step: f64) -> Jacobian {
    let mut j = Jacobian::zeros();
    for i in 0..7 {
        let mut qp = *q;
        let mut qm = *q;
        qp[i] += step;
        qm[i] -= step;
        let p = dh_forward_kinematics(&qp, geom);
        let m = dh_forward_kinematics(&qm, geom);
        let lin = (p.position - m.position) / (2.0 * step);
        let ang = rotation_log(&(p.rotation * m.rotation.transpose())) / (2.0 * step);
        j.fixed_view_mut::<3, 1>(0, i).copy_from(&lin);
        j.fixed_view_mut::<3, 1>(3, i).copy_from(&ang);
    }
    j
}

fn twist_error(target: &Pose, current: &Pose) -> Vector6<f64> {
    let dp = target.position - current.position;
    let dr = rotation_log(&(target.rotation * current.rotation.transpose()));
    Vector6::new(dp.x, dp.y, dp.z, dr.x, dr.y, dr.z)
}

/// Damped-least-squares differential IK from `q_init`.
pub fn numeric_ik(pose: &Pose, q_init: &JointVector, cfg: &OracleConfig, geom: &FrankaGeometry) -> NumericIk {
    let mut q = *q_init;
    let lambda2 = cfg.damping * cfg.damping;
    let mut e = twist_error(pose, &dh_forward_kinematics(&q, geom));
    for it in 0..=cfg.max_iters {
        let pos_err = e.fixed_rows::<3>(0).norm();
        let rot_err = e.fixed_rows::<3>(3).norm();
        if pos_err <= cfg.pos_tol && rot_err <= cfg.rot_tol {
            return NumericIk::Converged { q, iterations: it };
        }
        if it == cfg.max_iters {
            return NumericIk::NoConvergence { q, pos_err, rot_err };
        }
        let j = dh_jacobian(&q, geom);
        let a: Matrix6<f64> = j * j.transpose() + Matrix6::identity() * lambda2;
        let Some(y) = a.cholesky().map(|c| c.solve(&e)) else {
            return NumericIk::NoConvergence { q, pos_err, rot_err };
        };
        let mut dq = j.transpose() * y;
        let biggest = dq.amax();
        if biggest > cfg.step_cap {
            dq *= cfg.step_cap / biggest;
        }
        for (qi, d) in q.iter_mut().zip(dq.iter()) {
            *qi += d;
        }
        e = twist_error(pose, &dh_forward_kinematics(&q, geom));
    }
    unreachable!("loop returns on its last iteration")
}

/// `n` configurations drawn uniformly within the joint limits.
pub fn sample_configurations(n: usize, seed: u64, geom: &FrankaGeometry) -> Vec<JointVector> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| std::array::from_fn(|i| {
            let [lo, hi] = geom.joint_limits[i];
            rng.random_range(lo..=hi)
        }))
        .collect()
}
