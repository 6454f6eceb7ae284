mod common;

use franka_ik::model::{default_geometry, forward_kinematics};
use franka_ik::oracle::{dh_jacobian, fd_jacobian, sample_configurations};
use franka_ik::screw::{jacobian_from_axes, manipulability, rank};
use franka_ik::solvers::{solve_q6, solve_q7, SingularityKind};

use common::{case1_pose, case2_pose, deg, CASE1_Q7_DEG, CASE2_Q6_DEG};

const RANK_TOL: f64 = 1e-8;

#[test]
fn axes_jacobian_matches_finite_differences() {
    let g = default_geometry();
    let mut configs = sample_configurations(100, 41, &g);
    configs.push([0.0; 7]);
    for q in configs {
        let (pose, axes) = forward_kinematics(&q, &g);
        let j = jacobian_from_axes(&axes, &pose.position);
        let dev = (j - fd_jacobian(&q, &g, 1e-6)).amax();
        assert!(dev < 1e-6, "{dev:e}");
        assert!((j - dh_jacobian(&q, &g)).amax() < 1e-12);
    }
}

#[test]
fn solver_jacobians_match_finite_differences() {
    let g = default_geometry();
    for q in sample_configurations(100, 42, &g) {
        let (pose, _) = forward_kinematics(&q, &g);
        let set = solve_q7(&pose, q[6], &g, Some(0.0)).unwrap();
        for (i, s) in set.solutions.iter().enumerate() {
            let dev = (set.jacobian(i) - fd_jacobian(&s.q, &g, 1e-6)).amax();
            assert!(dev < 1e-6, "{dev:e}");
        }
    }
}

#[test]
fn type1_shoulder_keeps_rank_six() {
    let g = default_geometry();
    let set = solve_q7(&case1_pose(), CASE1_Q7_DEG.to_radians(), &g, Some(0.0)).unwrap();
    assert_eq!(set.singularity.kind, SingularityKind::Type1);
    for i in 0..set.len() {
        assert_eq!(rank(&set.jacobian(i), RANK_TOL), 6);
    }
    // Exact type-1: axes 1 and 3 collinear.
    let q = deg(&[-90.0, 0.0, 115.96, -106.86, 131.42, 150.52, -21.32]);
    let (pose, axes) = forward_kinematics(&q, &g);
    let j = jacobian_from_axes(&axes, &pose.position);
    assert_eq!(rank(&j, RANK_TOL), 6);
    assert_eq!(rank(&fd_jacobian(&q, &g, 1e-6), RANK_TOL), 6);
    // Columns 1 and 3 coincide, so the first three columns span only two directions.
    assert!((j.column(0) - j.column(2)).amax() < 1e-12);
    let shoulder = j.fixed_columns::<3>(0).into_owned().singular_values();
    assert_eq!(shoulder.iter().filter(|&&v| v > RANK_TOL).count(), 2);
}

#[test]
fn type2_pose_keeps_rank_six() {
    let g = default_geometry();
    let set = solve_q6(&case2_pose(), CASE2_Q6_DEG.to_radians(), &g, Some(0.0), 0.0).unwrap();
    assert_eq!(set.singularity.kind, SingularityKind::Type2);
    for (i, s) in set.solutions.iter().enumerate() {
        assert_eq!(rank(&set.jacobian(i), RANK_TOL), 6);
        assert_eq!(rank(&fd_jacobian(&s.q, &g, 1e-6), RANK_TOL), 6);
    }
}

#[test]
fn manipulability_scale_and_fd_agreement() {
    let g = default_geometry();
    let mut sum = 0.0;
    let configs = sample_configurations(500, 43, &g);
    for q in &configs {
        let (pose, axes) = forward_kinematics(q, &g);
        let m = manipulability(&jacobian_from_axes(&axes, &pose.position));
        let m_fd = manipulability(&fd_jacobian(q, &g, 1e-6));
        assert!((m - m_fd).abs() <= 1e-6 * m.max(1e-9), "{m} vs {m_fd}");
        sum += m * m;
    }
    // Reference statistics are on the det(J J^T) scale, the square of this measure.
    let mean = sum / configs.len() as f64;
    assert!((1e-3..1e-2).contains(&mean), "mean det(J J^T) {mean:e}");
}
