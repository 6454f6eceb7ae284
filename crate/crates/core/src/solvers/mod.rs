//! Analytical IK with q7, q6 or q4 as the locked redundancy parameter.
//!
//! Every solver first finds all seven screw axes (so the Jacobian is
//! available without joint angles) and only then extracts the angles. Each
//! solver has at most two choices at three independent steps, so it returns
//! at most eight solutions.

use std::f64::consts::FRAC_PI_2;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{IkError, Result};
use crate::model::{FrankaGeometry, JointVector, Pose, POSE_ORTHO_TOL};
use crate::screw::{check_rotation, jacobian_from_axes, wrap_pi, Jacobian, ScrewAxis};

pub(crate) mod chain;
mod extract;
mod q4;
mod q6;
mod q7;
pub mod singularity;

pub use chain::AxesCandidate;
pub use extract::{extract_angles, CONSISTENCY_TOL};
pub use singularity::{detect_singularity, SingularityKind, SingularityReport};

/// Maximum number of solutions any solver returns.
pub const MAX_SOLUTIONS: usize = 8;
/// Joint vectors closer than this (per joint) are duplicates.
pub const DUPLICATE_TOL: f64 = 1e-9;
/// Allowed drift of the locked joint before a candidate is discarded.
const LOCKED_TOL: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Shoulder {
    Plus,
    Minus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Elbow {
    Up,
    Down,
}

/// Which root was taken at each branching step.
///
/// `wrist` is 1 or 2. `free` numbers the roots of an intermediate free
/// variable (the two q7 values of the q4 solver, the scan roots of the swivel
/// solver) and is 0 when unused.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Branch {
    pub shoulder: Shoulder,
    pub elbow: Elbow,
    pub wrist: u8,
    pub free: u8,
}

impl fmt::Display for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self.shoulder {
            Shoulder::Plus => '+',
            Shoulder::Minus => '-',
        };
        let e = match self.elbow {
            Elbow::Up => "up",
            Elbow::Down => "down",
        };
        write!(f, "{s}/{e}/w{}", self.wrist)?;
        if self.free > 0 {
            write!(f, "/r{}", self.free)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FreeParam {
    Q7(f64),
    Q6(f64),
    Q4(f64),
}

impl FreeParam {
    pub fn value(&self) -> f64 {
        match *self {
            FreeParam::Q7(v) | FreeParam::Q6(v) | FreeParam::Q4(v) => v,
        }
    }

    /// 0-based joint index of the locked joint.
    pub fn joint(&self) -> usize {
        match self {
            FreeParam::Q7(_) => 6,
            FreeParam::Q6(_) => 5,
            FreeParam::Q4(_) => 3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IkQuery {
    pub pose: Pose,
    pub free_param: FreeParam,
    /// q1 used when the shoulder is type-1 singular. `None` reports q1 and q3 as NaN instead.
    pub emergency_q1: Option<f64>,
    /// q7 used when a q6 or q4 query hits a type-2 singularity.
    pub emergency_q7: f64,
}

impl IkQuery {
    pub const DEFAULT_EMERGENCY_Q1: f64 = FRAC_PI_2;
    pub const DEFAULT_EMERGENCY_Q7: f64 = 0.0;

    pub fn new(pose: Pose, free_param: FreeParam) -> Self {
        Self {
            pose,
            free_param,
            emergency_q1: Some(Self::DEFAULT_EMERGENCY_Q1),
            emergency_q7: Self::DEFAULT_EMERGENCY_Q7,
        }
    }

    pub fn with_emergency_q1(mut self, q1: Option<f64>) -> Self {
        self.emergency_q1 = q1;
        self
    }

    pub fn with_emergency_q7(mut self, q7: f64) -> Self {
        self.emergency_q7 = q7;
        self
    }

    pub fn validate(&self, geom: &FrankaGeometry) -> Result<()> {
        validate_pose(&self.pose)?;
        if !self.free_param.value().is_finite() {
            return Err(IkError::NonFinite("free parameter"));
        }
        if let Some(q1) = self.emergency_q1 {
            check_in_limits(q1, 0, "emergency q1", geom)?;
        }
        check_in_limits(self.emergency_q7, 6, "emergency q7", geom)
    }
}

pub(crate) fn validate_pose(pose: &Pose) -> Result<()> {
    if !pose.position.iter().all(|x| x.is_finite()) {
        return Err(IkError::NonFinite("position"));
    }
    check_rotation(&pose.rotation, POSE_ORTHO_TOL)
}

fn check_in_limits(v: f64, joint: usize, what: &str, geom: &FrankaGeometry) -> Result<()> {
    let [lo, hi] = geom.joint_limits[joint];
    if !v.is_finite() {
        return Err(IkError::NonFinite("emergency value"));
    }
    if v < lo || v > hi {
        return Err(IkError::InvalidQuery(format!(
            "{what} = {v} outside joint {} limits [{lo}, {hi}]",
            joint + 1
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SelfMotion {
    /// Type-1 shoulder spin: q1 and q3 are undefined.
    ShoulderSpin,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IkSolution {
    pub q: JointVector,
    pub axes: [ScrewAxis; 7],
    pub limit_ok: [bool; 7],
    pub branch: Branch,
    pub singular_self_motion: Option<SelfMotion>,
}

impl IkSolution {
    pub fn within_limits(&self) -> bool {
        self.limit_ok.iter().all(|&ok| ok)
    }
}

/// Axes-only output, before joint angles are extracted.
#[derive(Debug, Clone)]
pub struct AxesSet {
    pub pose: Pose,
    pub candidates: Vec<AxesCandidate>,
    pub singularity: SingularityReport,
    pub requested_param_honored: bool,
    /// Locked joint and value to enforce during extraction.
    locked: Option<(usize, f64)>,
}

impl AxesSet {
    pub fn jacobians(&self) -> impl Iterator<Item = Jacobian> + '_ {
        self.candidates
            .iter()
            .map(|c| jacobian_from_axes(&c.axes, &self.pose.position))
    }
}

#[derive(Debug, Clone)]
pub struct IkSolutionSet {
    pub pose: Pose,
    pub solutions: Vec<IkSolution>,
    pub singularity: SingularityReport,
    pub requested_param_honored: bool,
}

impl IkSolutionSet {
    pub fn len(&self) -> usize {
        self.solutions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.solutions.is_empty()
    }

    pub fn jacobian(&self, index: usize) -> Jacobian {
        jacobian_from_axes(&self.solutions[index].axes, &self.pose.position)
    }
}

/// All screw-axis candidates for a query, without joint angles.
pub fn solve_axes(query: &IkQuery, geom: &FrankaGeometry) -> Result<AxesSet> {
    query.validate(geom)?;
    let pose = query.pose;
    let mut candidates = Vec::with_capacity(MAX_SOLUTIONS);
    let mut delegated = false;

    match query.free_param {
        FreeParam::Q7(v) => q7::candidates(&pose, v, geom, query.emergency_q1, &mut candidates),
        FreeParam::Q6(_) | FreeParam::Q4(_) if singularity::is_type2(&pose, geom) => {
            delegated = true;
            q7::candidates(&pose, query.emergency_q7, geom, query.emergency_q1, &mut candidates);
        }
        FreeParam::Q6(v) => q6::candidates(&pose, v, geom, query.emergency_q1, &mut candidates),
        FreeParam::Q4(v) => q4::candidates(&pose, v, geom, query.emergency_q1, &mut candidates),
    }

    let type1 = candidates.iter().any(|c| c.shoulder_singular);
    let singularity = SingularityReport {
        kind: if delegated {
            SingularityKind::Type2
        } else if type1 {
            SingularityKind::Type1
        } else {
            SingularityKind::None
        },
        emergency_q1: if type1 { query.emergency_q1 } else { None },
        emergency_q7: delegated.then_some(query.emergency_q7),
    };
    let locked = if delegated {
        Some((6, query.emergency_q7))
    } else {
        Some((query.free_param.joint(), query.free_param.value()))
    };
    Ok(AxesSet {
        pose,
        candidates,
        singularity,
        requested_param_honored: !delegated,
        locked,
    })
}

/// Solves a query: axes first, then joint angles.
pub fn solve(query: &IkQuery, geom: &FrankaGeometry) -> Result<IkSolutionSet> {
    let axes = solve_axes(query, geom)?;
    Ok(finish(axes, geom))
}

/// Extracts joint angles, drops inconsistent candidates, sorts by branch and
/// removes duplicates.
pub fn finish(set: AxesSet, geom: &FrankaGeometry) -> IkSolutionSet {
    let mut solutions: Vec<IkSolution> = Vec::with_capacity(set.candidates.len());
    for cand in &set.candidates {
        let Ok(mut q) = extract_angles(&cand.axes, &set.pose, geom) else {
            continue;
        };
        if let Some((joint, value)) = set.locked {
            if wrap_pi(q[joint] - value).abs() > LOCKED_TOL {
                continue;
            }
        }
        for (i, qi) in q.iter_mut().enumerate() {
            *qi = geom.representative(i, *qi);
        }
        let mut self_motion = None;
        if cand.self_motion {
            q[0] = f64::NAN;
            q[2] = f64::NAN;
            self_motion = Some(SelfMotion::ShoulderSpin);
        }
        solutions.push(IkSolution {
            q,
            axes: cand.axes,
            limit_ok: geom.limits_ok(&q),
            branch: cand.branch,
            singular_self_motion: self_motion,
        });
    }
    solutions.sort_by_key(|s| s.branch);
    dedup_solutions(&mut solutions);
    IkSolutionSet {
        pose: set.pose,
        solutions,
        singularity: set.singularity,
        requested_param_honored: set.requested_param_honored,
    }
}

pub(crate) fn same_joints(a: &JointVector, b: &JointVector, tol: f64) -> bool {
    a.iter().zip(b).all(|(x, y)| {
        (x.is_nan() && y.is_nan()) || wrap_pi(x - y).abs() <= tol
    })
}

pub(crate) fn dedup_solutions(solutions: &mut Vec<IkSolution>) {
    let mut kept: Vec<IkSolution> = Vec::with_capacity(solutions.len());
    for s in solutions.drain(..) {
        if !kept.iter().any(|k| same_joints(&k.q, &s.q, DUPLICATE_TOL)) {
            kept.push(s);
        }
    }
    *solutions = kept;
}

/// Locks q7. Free of type-2 singularities.
pub fn solve_q7(pose: &Pose, q7: f64, geom: &FrankaGeometry, emergency_q1: Option<f64>) -> Result<IkSolutionSet> {
    solve(
        &IkQuery::new(*pose, FreeParam::Q7(q7)).with_emergency_q1(emergency_q1),
        geom,
    )
}

/// Locks q6; falls back to q7 = `emergency_q7` on a type-2 pose.
pub fn solve_q6(
    pose: &Pose,
    q6: f64,
    geom: &FrankaGeometry,
    emergency_q1: Option<f64>,
    emergency_q7: f64,
) -> Result<IkSolutionSet> {
    solve(
        &IkQuery::new(*pose, FreeParam::Q6(q6))
            .with_emergency_q1(emergency_q1)
            .with_emergency_q7(emergency_q7),
        geom,
    )
}

/// Locks q4; falls back to q7 = `emergency_q7` on a type-2 pose.
pub fn solve_q4(
    pose: &Pose,
    q4: f64,
    geom: &FrankaGeometry,
    emergency_q1: Option<f64>,
    emergency_q7: f64,
) -> Result<IkSolutionSet> {
    solve(
        &IkQuery::new(*pose, FreeParam::Q4(q4))
            .with_emergency_q1(emergency_q1)
            .with_emergency_q7(emergency_q7),
        geom,
    )
}

pub(crate) use q7::forearms_for_q7;
