//! Building blocks of the `franka-ik` command line: JSON documents, the
//! round-trip verification protocol and the timing harness. Angles are in
//! degrees here and radians everywhere else.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::time::Instant;

use clap::ValueEnum;
use nalgebra::{Quaternion, UnitQuaternion};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::error::IkError;
use crate::model::{forward_kinematics, shoulder_point, FrankaGeometry, JointVector, Pose};
use crate::oracle::{dh_forward_kinematics, fd_jacobian, sample_configurations};
use crate::screw::{check_rotation, wrap_pi, Mat3, ScrewAxis, Vec3};
use crate::solvers::{finish, solve, solve_axes, FreeParam, IkQuery, IkSolutionSet, SingularityKind, MAX_SOLUTIONS};
use crate::swivel::{solve_swivel, swivel_from_points, SwivelQuery};

/// Rotation deviation above which a projected input is reported.
pub const PROJECTION_WARN_TOL: f64 = 1e-12;
/// Allowed deviation of an input quaternion from unit norm.
pub const QUAT_NORM_TOL: f64 = 1e-6;
/// Step of the central differences used by `verify`.
pub const FD_STEP: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },

    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),

    #[error("invalid pose: {0}")]
    Pose(String),

    #[error(transparent)]
    Ik(#[from] IkError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LockTarget {
    Q7,
    Q6,
    Q4,
    Swivel,
}

impl LockTarget {
    pub const ALL: [LockTarget; 4] = [LockTarget::Q7, LockTarget::Q6, LockTarget::Q4, LockTarget::Swivel];

    /// Joint-space tolerance of the round-trip test.
    pub fn recover_tol(self) -> f64 {
        match self {
            LockTarget::Swivel => 1e-6,
            _ => 1e-8,
        }
    }

    /// Minimum fraction of recovered configurations.
    pub fn min_success_rate(self) -> f64 {
        match self {
            LockTarget::Swivel => 1.0,
            _ => 0.995,
        }
    }
}

impl fmt::Display for LockTarget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LockTarget::Q7 => "q7",
            LockTarget::Q6 => "q6",
            LockTarget::Q4 => "q4",
            LockTarget::Swivel => "swivel",
        })
    }
}

/// End-effector pose as read from or written to JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoseDocument {
    /// Rotation, row-major.
    #[serde(rename = "R", default, skip_serializing_if = "Option::is_none")]
    pub r: Option<[f64; 9]>,
    /// Unit quaternion `[w, x, y, z]`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quat: Option<[f64; 4]>,
    /// Position in meters.
    pub t: [f64; 3],
}

/// A validated pose plus the size of the correction applied to its rotation.
#[derive(Debug, Clone, Copy)]
pub struct ParsedPose {
    pub pose: Pose,
    pub projection: f64,
}

impl ParsedPose {
    pub fn warning(&self) -> Option<String> {
        (self.projection > PROJECTION_WARN_TOL).then(|| {
            format!(
                "warning: rotation re-orthonormalized (deviation {:.3e})",
                self.projection
            )
        })
    }
}

impl PoseDocument {
    pub fn from_pose(pose: &Pose) -> Self {
        let r = &pose.rotation;
        Self {
            r: Some(std::array::from_fn(|k| r[(k / 3, k % 3)])),
            quat: None,
            t: [pose.position.x, pose.position.y, pose.position.z],
        }
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_pose(&self) -> Result<ParsedPose, CliError> {
        let rotation = match (self.r, self.quat) {
            (Some(r), None) => Mat3::from_row_slice(&r),
            (None, Some([w, x, y, z])) => {
                let q = Quaternion::new(w, x, y, z);
                let norm = q.norm();
                if !norm.is_finite() || (norm - 1.0).abs() > QUAT_NORM_TOL {
                    return Err(CliError::Pose(format!(
                        "quaternion norm {norm} is not within {QUAT_NORM_TOL:e} of 1"
                    )));
                }
                *UnitQuaternion::from_quaternion(q).to_rotation_matrix().matrix()
            }
            (Some(_), Some(_)) => return Err(CliError::Pose("give either \"R\" or \"quat\", not both".into())),
            (None, None) => return Err(CliError::Pose("missing rotation: expected \"R\" or \"quat\"".into())),
        };
        if !rotation.iter().all(|x| x.is_finite()) {
            return Err(IkError::NonFinite("rotation").into());
        }
        check_rotation(&rotation, crate::model::POSE_ORTHO_TOL)
            .map_err(|e| CliError::Pose(format!("{e}; tolerance is 1e-6")))?;
        let pose = Pose::new(rotation, Vec3::from(self.t))?;
        Ok(ParsedPose {
            pose,
            projection: (pose.rotation - rotation).amax(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionEntry {
    /// Joint angles in degrees; `null` where undefined.
    pub q_deg: [Option<f64>; 7],
    pub limit_ok: [bool; 7],
    pub branch: String,
    /// 6x7 Jacobian, row-major.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub jacobian: Option<Vec<f64>>,
}

impl SolutionEntry {
    /// Joint angles in radians, NaN where undefined.
    pub fn q_rad(&self) -> JointVector {
        self.q_deg.map(|v| v.map_or(f64::NAN, f64::to_radians))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionDocument {
    pub solutions: Vec<SolutionEntry>,
    pub singularity: SingularityKind,
    pub param_honored: bool,
    pub timing_us: f64,
}

impl SolutionDocument {
    pub fn from_set(set: &IkSolutionSet, with_jacobian: bool, timing_us: f64) -> Self {
        let solutions = set
            .solutions
            .iter()
            .enumerate()
            .map(|(i, s)| SolutionEntry {
                q_deg: s.q.map(|v| v.is_finite().then(|| v.to_degrees())),
                limit_ok: s.limit_ok,
                branch: s.branch.to_string(),
                jacobian: with_jacobian.then(|| {
                    let j = set.jacobian(i);
                    (0..6).flat_map(|r| (0..7).map(move |c| j[(r, c)])).collect()
                }),
            })
            .collect();
        Self {
            solutions,
            singularity: set.singularity.kind,
            param_honored: set.requested_param_honored,
            timing_us,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("solution documents always serialize")
    }

    /// Human-readable table; out-of-limit entries carry a `*`.
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let _ = write!(out, "{:>3}", "sol");
        for i in 1..=7 {
            let _ = write!(out, " {:>9}", format!("q{i}"));
        }
        let _ = writeln!(out, "  branch");
        for (k, s) in self.solutions.iter().enumerate() {
            let _ = write!(out, "{:>3}", k + 1);
            for (v, ok) in s.q_deg.iter().zip(&s.limit_ok) {
                let cell = match v {
                    Some(v) => format!("{v:.2}{}", if *ok { "" } else { "*" }),
                    None => "nan".to_string(),
                };
                let _ = write!(out, " {cell:>9}");
            }
            let _ = writeln!(out, "  {}", s.branch);
        }
        let singularity = match self.singularity {
            SingularityKind::None => "none",
            SingularityKind::Type1 => "type1",
            SingularityKind::Type2 => "type2",
        };
        let _ = writeln!(
            out,
            "{} solution(s), singularity {singularity}, param honored {}, {:.1} us",
            self.solutions.len(),
            self.param_honored,
            self.timing_us
        );
        out
    }
}

/// One `ik` request; angles in radians.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IkRequest {
    pub lock: LockTarget,
    pub value: f64,
    pub emergency_q1: Option<f64>,
    pub emergency_q7: f64,
    pub jacobian: bool,
}

/// Dispatches a request to the matching solver.
pub fn solve_request(pose: &Pose, req: &IkRequest, geom: &FrankaGeometry) -> Result<IkSolutionSet, IkError> {
    let free = match req.lock {
        LockTarget::Q7 => FreeParam::Q7(req.value),
        LockTarget::Q6 => FreeParam::Q6(req.value),
        LockTarget::Q4 => FreeParam::Q4(req.value),
        LockTarget::Swivel => {
            return solve_swivel(&SwivelQuery::new(*pose, req.value), geom, req.emergency_q1);
        }
    };
    let query = IkQuery::new(*pose, free)
        .with_emergency_q1(req.emergency_q1)
        .with_emergency_q7(req.emergency_q7);
    solve(&query, geom)
}

/// Solves one pose and times the solver call.
pub fn run_ik(pose: &Pose, req: &IkRequest, geom: &FrankaGeometry) -> Result<SolutionDocument, IkError> {
    let start = Instant::now();
    let set = solve_request(pose, req, geom)?;
    let timing_us = start.elapsed().as_secs_f64() * 1e6;
    Ok(SolutionDocument::from_set(&set, req.jacobian, timing_us))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxisDocument {
    pub direction: [f64; 3],
    pub point: [f64; 3],
}

impl From<&ScrewAxis> for AxisDocument {
    fn from(a: &ScrewAxis) -> Self {
        Self {
            direction: a.direction.into(),
            point: a.point.into(),
        }
    }
}

/// `fk` output: a pose document (usable as `ik --pose` input) plus the axes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FkDocument {
    #[serde(flatten)]
    pub pose: PoseDocument,
    pub axes: Vec<AxisDocument>,
}

impl FkDocument {
    pub fn new(q: &JointVector, geom: &FrankaGeometry) -> Self {
        let (pose, axes) = forward_kinematics(q, geom);
        Self {
            pose: PoseDocument::from_pose(&pose),
            axes: axes.iter().map(AxisDocument::from).collect(),
        }
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let r = self.pose.r.unwrap_or_default();
        let _ = writeln!(out, "R =");
        for row in r.chunks(3) {
            let _ = writeln!(out, "  {:>12.8} {:>12.8} {:>12.8}", row[0], row[1], row[2]);
        }
        let t = self.pose.t;
        let _ = writeln!(out, "t = {:.8} {:.8} {:.8}", t[0], t[1], t[2]);
        for (i, a) in self.axes.iter().enumerate() {
            let (d, p) = (a.direction, a.point);
            let _ = writeln!(
                out,
                "s{} = ({:>8.5} {:>8.5} {:>8.5}) through ({:>8.5} {:>8.5} {:>8.5})",
                i + 1,
                d[0],
                d[1],
                d[2],
                p[0],
                p[1],
                p[2]
            );
        }
        out
    }
}

/// Value of the locked parameter for configuration `q`, or `None` when the
/// swivel angle is undefined there.
pub fn locked_value(lock: LockTarget, q: &JointVector, geom: &FrankaGeometry) -> Option<f64> {
    match lock {
        LockTarget::Q7 => Some(q[6]),
        LockTarget::Q6 => Some(q[5]),
        LockTarget::Q4 => Some(q[3]),
        LockTarget::Swivel => {
            let (pose, axes) = forward_kinematics(q, geom);
            swivel_from_points(&shoulder_point(geom), &axes[3].point, &pose.wrist_point(geom), &axes[3].direction)
        }
    }
}

fn matches(a: &JointVector, b: &JointVector, tol: f64) -> bool {
    a.iter().zip(b).all(|(x, y)| wrap_pi(x - y).abs() <= tol)
}

pub fn median(values: &mut [f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

fn max_of(values: &[f64]) -> f64 {
    values.iter().copied().fold(0.0, f64::max)
}

/// Result of the round-trip protocol for one lock target.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub lock: LockTarget,
    pub n: usize,
    pub seed: u64,
    pub recovered: usize,
    /// Solution count -> number of calls.
    pub histogram: BTreeMap<usize, usize>,
    pub max_solutions: usize,
    pub pos_err_median: f64,
    pub pos_err_max: f64,
    pub rot_err_median: f64,
    pub rot_err_max: f64,
    /// Largest entry-wise deviation of the analytic Jacobian from central differences.
    pub jacobian_fd_max: f64,
    pub solver_errors: usize,
    pub passed: bool,
}

impl VerifyReport {
    pub fn success_rate(&self) -> f64 {
        self.recovered as f64 / self.n as f64
    }

    pub fn line(&self) -> String {
        let hist: Vec<String> = self.histogram.iter().map(|(k, v)| format!("{k}:{v}")).collect();
        format!(
            "{:<6} n={} seed={} recovered={}/{} ({:.2}%) sols[{}] pos med={:.2e} max={:.2e} rot med={:.2e} max={:.2e} jac_fd={:.2e} errors={} {}",
            self.lock.to_string(),
            self.n,
            self.seed,
            self.recovered,
            self.n,
            100.0 * self.success_rate(),
            hist.join(" "),
            self.pos_err_median,
            self.pos_err_max,
            self.rot_err_median,
            self.rot_err_max,
            self.jacobian_fd_max,
            self.solver_errors,
            if self.passed { "PASS" } else { "FAIL" }
        )
    }
}

/// Runs the round-trip protocol: FK of `n` seeded in-limit configurations,
/// then IK with the locked value taken from the generating configuration.
pub fn verify(lock: LockTarget, n: usize, seed: u64, geom: &FrankaGeometry) -> VerifyReport {
    let configs = sample_configurations(n, seed, geom);
    let tol = lock.recover_tol();
    let mut recovered = 0;
    let mut histogram = BTreeMap::new();
    let mut max_solutions = 0;
    let mut pos_errs = Vec::new();
    let mut rot_errs = Vec::new();
    let mut jac_max: f64 = 0.0;
    let mut solver_errors = 0;

    for q in &configs {
        let pose = forward_kinematics(q, geom).0;
        let Some(value) = locked_value(lock, q, geom) else {
            solver_errors += 1;
            continue;
        };
        let req = IkRequest {
            lock,
            value,
            emergency_q1: Some(IkQuery::DEFAULT_EMERGENCY_Q1),
            emergency_q7: IkQuery::DEFAULT_EMERGENCY_Q7,
            jacobian: false,
        };
        let set = match solve_request(&pose, &req, geom) {
            Ok(set) => set,
            Err(_) => {
                solver_errors += 1;
                continue;
            }
        };
        *histogram.entry(set.len()).or_insert(0) += 1;
        max_solutions = max_solutions.max(set.len());
        for s in set.solutions.iter().filter(|s| s.q.iter().all(|v| v.is_finite())) {
            let (p, r) = dh_forward_kinematics(&s.q, geom).error_to(&pose);
            pos_errs.push(p);
            rot_errs.push(r);
        }
        if let Some(i) = set.solutions.iter().position(|s| matches(&s.q, q, tol)) {
            recovered += 1;
            let dev = (set.jacobian(i) - fd_jacobian(q, geom, FD_STEP)).amax();
            jac_max = jac_max.max(dev);
        }
    }

    let pos_err_max = max_of(&pos_errs);
    let rot_err_max = max_of(&rot_errs);
    let pos_err_median = median(&mut pos_errs);
    let rot_err_median = median(&mut rot_errs);
    let rate = recovered as f64 / n as f64;
    let passed = rate >= lock.min_success_rate()
        && pos_err_median <= 1e-6
        && rot_err_median <= 1e-6
        && max_solutions <= MAX_SOLUTIONS
        && jac_max < 1e-6
        && solver_errors == 0;
    VerifyReport {
        lock,
        n,
        seed,
        recovered,
        histogram,
        max_solutions,
        pos_err_median,
        pos_err_max,
        rot_err_median,
        rot_err_max,
        jacobian_fd_max: jac_max,
        solver_errors,
        passed,
    }
}

/// Wall-clock statistics in microseconds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub lock: LockTarget,
    pub jacobian: bool,
    pub n: usize,
    pub min_us: f64,
    pub median_us: f64,
    pub max_us: f64,
    pub mean_us: f64,
    pub std_us: f64,
}

impl BenchReport {
    fn from_samples(lock: LockTarget, jacobian: bool, mut samples: Vec<f64>) -> Self {
        let n = samples.len();
        let mean = samples.iter().sum::<f64>() / n as f64;
        let var = samples.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / n as f64;
        let min = samples.iter().copied().fold(f64::INFINITY, f64::min);
        let max = max_of(&samples);
        Self {
            lock,
            jacobian,
            n,
            min_us: min,
            median_us: median(&mut samples),
            max_us: max,
            mean_us: mean,
            std_us: var.sqrt(),
        }
    }

    /// `min/median/max  mean ± std`.
    pub fn line(&self) -> String {
        format!(
            "{:<6} {:<8} n={}  min/median/max {:.2}/{:.2}/{:.2} us  mean {:.2} ± {:.2} us",
            self.lock.to_string(),
            if self.jacobian { "jacobian" } else { "joints" },
            self.n,
            self.min_us,
            self.median_us,
            self.max_us,
            self.mean_us,
            self.std_us
        )
    }
}

/// Times solver calls on `n` seeded reachable poses after one warm-up pass.
///
/// With `jacobian` set the axis-level solvers stop at the Jacobians and never
/// extract joint angles; the swivel solver always extracts them.
pub fn bench(lock: LockTarget, n: usize, seed: u64, jacobian: bool, geom: &FrankaGeometry) -> BenchReport {
    let queries: Vec<(Pose, f64)> = sample_configurations(n, seed, geom)
        .iter()
        .filter_map(|q| Some((forward_kinematics(q, geom).0, locked_value(lock, q, geom)?)))
        .collect();

    let run = |pose: &Pose, value: f64| -> usize {
        let free = match lock {
            LockTarget::Q7 => FreeParam::Q7(value),
            LockTarget::Q6 => FreeParam::Q6(value),
            LockTarget::Q4 => FreeParam::Q4(value),
            LockTarget::Swivel => {
                let Ok(set) = solve_swivel(&SwivelQuery::new(*pose, value), geom, Some(IkQuery::DEFAULT_EMERGENCY_Q1))
                else {
                    return 0;
                };
                if jacobian {
                    return (0..set.len()).map(|i| std::hint::black_box(set.jacobian(i))).count();
                }
                return set.len();
            }
        };
        let query = IkQuery::new(*pose, free);
        let Ok(axes) = solve_axes(&query, geom) else {
            return 0;
        };
        if jacobian {
            axes.jacobians().map(std::hint::black_box).count()
        } else {
            finish(axes, geom).len()
        }
    };

    let mut sink = 0usize;
    for (pose, value) in &queries {
        sink = sink.wrapping_add(run(pose, *value));
    }
    let mut samples = Vec::with_capacity(queries.len());
    for (pose, value) in &queries {
        let start = Instant::now();
        sink = sink.wrapping_add(std::hint::black_box(run(pose, *value)));
        samples.push(start.elapsed().as_secs_f64() * 1e6);
    }
    std::hint::black_box(sink);
    BenchReport::from_samples(lock, jacobian, samples)
}

/// Reads a file, or standard input for `-`.
pub fn read_input(path: &str) -> Result<String, CliError> {
    let io = |source| CliError::Io {
        path: path.to_string(),
        source,
    };
    if path == "-" {
        std::io::read_to_string(std::io::stdin()).map_err(io)
    } else {
        std::fs::read_to_string(path).map_err(io)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::default_geometry;

    #[test]
    fn quaternion_and_matrix_agree() {
        let half = std::f64::consts::FRAC_PI_4;
        let q = PoseDocument {
            r: None,
            quat: Some([half.cos(), 0.0, 0.0, half.sin()]),
            t: [0.1, 0.2, 0.3],
        };
        let m = PoseDocument {
            r: Some([0.0, -1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0]),
            quat: None,
            t: [0.1, 0.2, 0.3],
        };
        let a = q.to_pose().unwrap().pose;
        let b = m.to_pose().unwrap().pose;
        assert!((a.rotation - b.rotation).amax() < 1e-15);
    }

    #[test]
    fn rejects_bad_quaternion_and_missing_rotation() {
        let q = PoseDocument {
            r: None,
            quat: Some([1.0, 0.01, 0.0, 0.0]),
            t: [0.0; 3],
        };
        assert!(q.to_pose().is_err());
        let none = PoseDocument { r: None, quat: None, t: [0.0; 3] };
        assert!(none.to_pose().is_err());
    }

    #[test]
    fn slightly_skewed_rotation_is_projected_with_warning() {
        let doc = PoseDocument {
            r: Some([1.0, 1e-8, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0]),
            quat: None,
            t: [0.0; 3],
        };
        let parsed = doc.to_pose().unwrap();
        assert!(parsed.warning().is_some());
        assert!(check_rotation(&parsed.pose.rotation, 1e-14).is_ok());
    }

    #[test]
    fn fk_document_feeds_ik() {
        let g = default_geometry();
        let q = [0.3, -0.4, 0.5, -1.6, 0.2, 1.9, -0.7];
        let doc = FkDocument::new(&q, &g);
        let text = serde_json::to_string(&doc).unwrap();
        let pose = PoseDocument::parse(&text).unwrap().to_pose().unwrap().pose;
        let req = IkRequest {
            lock: LockTarget::Q7,
            value: q[6],
            emergency_q1: Some(0.0),
            emergency_q7: 0.0,
            jacobian: true,
        };
        let out = run_ik(&pose, &req, &g).unwrap();
        assert!(out.solutions.iter().any(|s| matches(&s.q_rad(), &q, 1e-9)));
        assert!(out.solutions.iter().all(|s| s.jacobian.as_ref().is_some_and(|j| j.len() == 42)));
    }

    #[test]
    fn median_of_even_and_odd() {
        assert_eq!(median(&mut [3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&mut [4.0, 1.0, 2.0, 3.0]), 2.5);
        assert!(median(&mut []).is_nan());
    }
}
