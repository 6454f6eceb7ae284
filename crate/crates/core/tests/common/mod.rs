#![allow(dead_code)]

use std::path::PathBuf;

use franka_ik::cli::PoseDocument;
use franka_ik::model::{JointVector, Pose};
use franka_ik::screw::wrap_pi;
use franka_ik::solvers::IkSolutionSet;

pub const CASE1_Q7_DEG: f64 = -21.32455095;
pub const CASE2_Q6_DEG: f64 = 193.48937052;

/// Fully numeric Case 1 reference rows, degrees.
pub const CASE1_ROWS: [[f64; 7]; 2] = [
    [-90.0, 0.0, 115.96, -106.86, 131.42, 150.52, -21.32],
    [90.0, 0.0, -64.04, -106.86, 131.42, 150.52, -21.32],
];

/// Case 2 reference rows 1 and 5, degrees.
pub const CASE2_ROWS: [[f64; 7]; 2] = [
    [-18.99, 78.13, 28.75, -39.33, 0.0, 204.90, 0.0],
    [-12.43, 90.22, 28.08, -14.19, 0.0, 193.44, 0.0],
];

/// Per-joint tolerance for the two-decimal table values, degrees.
pub const TABLE_TOL_DEG: f64 = 0.02;

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

pub fn load_pose(name: &str) -> Pose {
    let text = std::fs::read_to_string(fixture(name)).unwrap();
    PoseDocument::parse(&text).unwrap().to_pose().unwrap().pose
}

pub fn case1_pose() -> Pose {
    load_pose("case1.json")
}

pub fn case2_pose() -> Pose {
    load_pose("case2.json")
}

pub fn deg(q: &[f64; 7]) -> JointVector {
    q.map(f64::to_radians)
}

/// Largest per-joint angular distance, NaN-aware (NaN matches only NaN).
pub fn joint_distance(a: &JointVector, b: &JointVector) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| match (x.is_nan(), y.is_nan()) {
            (true, true) => 0.0,
            (false, false) => wrap_pi(x - y).abs(),
            _ => f64::INFINITY,
        })
        .fold(0.0, f64::max)
}

pub fn contains(set: &IkSolutionSet, q: &JointVector, tol: f64) -> bool {
    set.solutions.iter().any(|s| joint_distance(&s.q, q) <= tol)
}

/// Smallest per-joint distance (degrees) from `row` to any solution.
pub fn best_match_deg(set: &IkSolutionSet, row: &[f64; 7]) -> f64 {
    let q = deg(row);
    set.solutions
        .iter()
        .map(|s| joint_distance(&s.q, &q).to_degrees())
        .fold(f64::INFINITY, f64::min)
}
