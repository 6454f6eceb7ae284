//! Redundancy resolution by the swivel angle.
//!
//! The swivel angle `theta` is the angle from the plane through the base z
//! axis and O7 to the plane through S, O4 and O7, measured about `r_{O7/S}`.
//! O7 is fixed by the pose, so `theta` is a function of q7 on each of the
//! four elbow/wrist branches of the q7 solver. The solver samples these
//! branches over the joint-7 range, brackets the crossings of the target
//! value and refines them before handing each root to [`solve_q7`].

use crate::error::{IkError, Result};
use crate::model::{shoulder_point, FrankaGeometry, Pose};
use crate::screw::{signed_angle, wrap_pi, Vec3};
use crate::solvers::{
    dedup_solutions, forearms_for_q7, solve_q7, MAX_SOLUTIONS, validate_pose, Elbow, IkSolution, IkSolutionSet,
    SingularityKind, SingularityReport,
};

/// `|r_{O7/S} x z| / |r_{O7/S}|` below which the swivel angle is undefined.
pub const SWIVEL_SINGULAR_TOL: f64 = 1e-8;
/// Residual on `theta` accepted for a returned solution.
pub const SWIVEL_ACCEPT_TOL: f64 = 1e-6;

const MAX_REFINE_ITERS: usize = 30;
const STEP_TOL: f64 = 1e-12;
const SETTLED_STEP: f64 = 1e-9;
const EDGE_TOL: f64 = 1e-13;
const EDGE_OFFSETS: [f64; 3] = [1e-7, 1e-5, 1e-3];
/// Largest residual change between neighbouring samples taken as smooth.
const MAX_JUMP: f64 = 0.5;
const MAX_DEPTH: u32 = 24;
/// Cells whose smaller end residual is below this are searched for a pair
/// of close crossings.
const DIP_WINDOW: f64 = 0.05;

/// The four branches along which `theta(q7)` is tracked.
pub const TRACKS: [(Elbow, u8); 4] = [(Elbow::Up, 1), (Elbow::Up, 2), (Elbow::Down, 1), (Elbow::Down, 2)];

/// `theta` on each of [`TRACKS`]; `None` where the branch does not exist.
pub type SwivelValues = [Option<f64>; 4];

/// Swivel angle of an arm with shoulder centre `s`, elbow point `o4`, wrist
/// point `o7` and fourth axis `s4`.
pub fn swivel_from_points(s: &Vec3, o4: &Vec3, o7: &Vec3, s4: &Vec3) -> Option<f64> {
    let r7 = o7 - s;
    let n7 = r7.norm();
    if n7 < 1e-12 {
        return None;
    }
    let axis = r7 / n7;
    let n1 = axis.cross(&Vec3::z());
    if n1.norm() < SWIVEL_SINGULAR_TOL {
        return None;
    }
    let m = axis.cross(&(o4 - s));
    let sigma = if m.dot(s4) < 0.0 { -1.0 } else { 1.0 };
    signed_angle(&n1, &(m * sigma), &axis).ok()
}

/// True when `theta` is undefined for every q7 (O7 on the base z axis).
pub fn swivel_singular(pose: &Pose, geom: &FrankaGeometry) -> bool {
    let r7 = pose.wrist_point(geom) - shoulder_point(geom);
    let n7 = r7.norm();
    n7 < 1e-12 || r7.cross(&Vec3::z()).norm() < SWIVEL_SINGULAR_TOL * n7
}

/// Swivel angle on every branch for a given q7, from the forearm geometry
/// only (no shoulder assembly, no joint angles).
pub fn swivel_of(pose: &Pose, q7: f64, geom: &FrankaGeometry) -> SwivelValues {
    track_values(pose, q7, geom).map(|v| v.map(|(theta, _)| theta))
}

/// `(theta, distance of O4 from the line S-O7)` on every track.
fn track_values(pose: &Pose, q7: f64, geom: &FrankaGeometry) -> [Option<(f64, f64)>; 4] {
    let mut out = [None; 4];
    let s = shoulder_point(geom);
    let o7 = pose.wrist_point(geom);
    let axis = (o7 - s).normalize();
    for (elbow, wb, arm) in forearms_for_q7(pose, q7, geom, true) {
        if let Some(k) = TRACKS.iter().position(|&t| t == (elbow, wb)) {
            let offset = axis.cross(&(arm.o4 - s)).norm();
            out[k] = swivel_from_points(&s, &arm.o4, &o7, &arm.s4).map(|t| (t, offset));
        }
    }
    out
}

/// Swivel angle of a solved configuration.
pub fn swivel_of_solution(solution: &IkSolution, pose: &Pose, geom: &FrankaGeometry) -> Option<f64> {
    let a4 = &solution.axes[3];
    swivel_from_points(&shoulder_point(geom), &a4.point, &pose.wrist_point(geom), &a4.direction)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SwivelQuery {
    pub pose: Pose,
    pub theta: f64,
    pub grid_size: usize,
    pub refine_tol: f64,
    /// Upper bound on the returned solutions; in-limit solutions are kept
    /// first. The swivel problem can have more than eight solutions.
    pub max_solutions: usize,
}

impl SwivelQuery {
    pub const DEFAULT_GRID_SIZE: usize = 360;
    pub const DEFAULT_REFINE_TOL: f64 = 1e-10;

    pub fn new(pose: Pose, theta: f64) -> Self {
        Self {
            pose,
            theta,
            grid_size: Self::DEFAULT_GRID_SIZE,
            refine_tol: Self::DEFAULT_REFINE_TOL,
            max_solutions: MAX_SOLUTIONS,
        }
    }

    pub fn with_grid_size(mut self, n: usize) -> Self {
        self.grid_size = n;
        self
    }

    pub fn with_refine_tol(mut self, tol: f64) -> Self {
        self.refine_tol = tol;
        self
    }

    pub fn with_max_solutions(mut self, n: usize) -> Self {
        self.max_solutions = n;
        self
    }

    pub fn validate(&self) -> Result<()> {
        validate_pose(&self.pose)?;
        if !self.theta.is_finite() {
            return Err(IkError::NonFinite("swivel angle"));
        }
        if self.grid_size < 8 {
            return Err(IkError::InvalidQuery(format!("grid_size = {} < 8", self.grid_size)));
        }
        if self.max_solutions == 0 {
            return Err(IkError::InvalidQuery("max_solutions must be positive".into()));
        }
        if !(self.refine_tol > 0.0) {
            return Err(IkError::InvalidQuery(format!("refine_tol = {} must be positive", self.refine_tol)));
        }
        Ok(())
    }
}

/// Sampled `theta(q7)` over the joint-7 range.
#[derive(Debug, Clone, PartialEq)]
pub struct SwivelProfile {
    pub q7: Vec<f64>,
    pub theta: Vec<SwivelValues>,
    /// Distance of O4 from the line S-O7. Where it nearly vanishes `theta`
    /// turns through a full circle over a short range of q7.
    pub elbow_offset: Vec<SwivelValues>,
}

impl SwivelProfile {
    /// Samples `grid_size` evenly spaced values of q7 across its limits,
    /// plus points just inside and outside every elbow domain edge so that
    /// branches existing over less than one grid step are still seen.
    pub fn build(pose: &Pose, grid_size: usize, geom: &FrankaGeometry) -> Self {
        let [lo, hi] = geom.joint_limits[6];
        let n = grid_size.max(2);
        let step = (hi - lo) / (n - 1) as f64;
        let mut q7: Vec<f64> = (0..n).map(|i| if i == n - 1 { hi } else { lo + step * i as f64 }).collect();
        for e in elbow_edges(pose, geom) {
            for off in EDGE_OFFSETS {
                q7.extend([e - off, e + off].into_iter().filter(|x| (lo..=hi).contains(x)));
            }
        }
        q7.sort_by(f64::total_cmp);
        q7.dedup_by(|a, b| (*a - *b).abs() < EDGE_TOL);
        let values: Vec<_> = q7.iter().map(|&q| track_values(pose, q, geom)).collect();
        let theta = values.iter().map(|v| v.map(|x| x.map(|(t, _)| t))).collect();
        let elbow_offset = values.iter().map(|v| v.map(|x| x.map(|(_, d)| d))).collect();
        Self { q7, theta, elbow_offset }
    }

    pub fn len(&self) -> usize {
        self.q7.len()
    }

    pub fn is_empty(&self) -> bool {
        self.q7.is_empty()
    }

    /// True when no branch is defined at any sample.
    pub fn all_undefined(&self) -> bool {
        self.theta.iter().all(|t| t.iter().all(Option::is_none))
    }
}

/// Values of q7 within the joint limits at which `|S O6|` reaches one of
/// the lengths where an elbow branch appears or vanishes.
///
/// With `t = pi/4 - q7`, `|S O6|^2 = |r_{O7/S}|^2 + a7^2 - 2 a7 rho cos(t - psi)`
/// where `(rho, psi)` is the polar form of `r_{O7/S}` in the `x_E y_E` plane.
pub fn elbow_edges(pose: &Pose, geom: &FrankaGeometry) -> Vec<f64> {
    use std::f64::consts::{FRAC_PI_4, TAU};
    let c = pose.wrist_point(geom) - shoulder_point(geom);
    let w = pose.rotation.transpose() * c;
    let rho = w.x.hypot(w.y);
    let a7 = geom.a7;
    let mut out = Vec::new();
    if rho < 1e-12 {
        return out;
    }
    let psi = w.y.atan2(w.x);
    let k = c.norm_squared() + a7 * a7;
    let (b1, b2) = (geom.b1(), geom.b2());
    let lengths = [(b1 - b2).abs(), (geom.a4 - geom.a5).hypot(geom.d3 + geom.d5), b1 + b2];
    let [lo, hi] = geom.joint_limits[6];
    for len in lengths {
        let x = (k - len * len) / (2.0 * a7 * rho);
        if x.abs() > 1.0 {
            continue;
        }
        let d = x.acos();
        for base in [FRAC_PI_4 - psi - d, FRAC_PI_4 - psi + d] {
            let mut q = wrap_pi(base);
            while q - TAU >= lo {
                q -= TAU;
            }
            while q <= hi {
                if q >= lo {
                    out.push(q);
                }
                q += TAU;
            }
        }
    }
    out
}

/// Wrapped residual `theta(q7) - target` on one track.
struct Residual<'a> {
    pose: &'a Pose,
    geom: &'a FrankaGeometry,
    track: usize,
    target: f64,
}

impl Residual<'_> {
    fn at(&self, q7: f64) -> Option<f64> {
        swivel_of(self.pose, q7, self.geom)[self.track].map(|t| wrap_pi(t - self.target))
    }

    fn offset_at(&self, q7: f64) -> Option<f64> {
        track_values(self.pose, q7, self.geom)[self.track].map(|(_, d)| d)
    }
}

/// Golden-section minimum of the elbow offset on `[a, b]`.
fn closest_pass(res: &Residual, a: f64, b: f64) -> Option<f64> {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let (mut a, mut b) = (a, b);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let mut fc = res.offset_at(c)?;
    let mut fd = res.offset_at(d)?;
    while (b - a).abs() > STEP_TOL {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = res.offset_at(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = res.offset_at(d)?;
        }
    }
    Some(0.5 * (a + b))
}

/// A sign change between two residuals that is not a jump across `+-pi`.
fn brackets(fa: f64, fb: f64) -> bool {
    fa * fb <= 0.0 && (fa - fb).abs() < std::f64::consts::PI
}

/// Illinois-modified secant on a bracket with `fa * fb <= 0`.
///
/// Stops on an exact zero, on a q7 step below the floor, or once the
/// residual is within `tol` and the step is below [`SETTLED_STEP`]. The
/// residual test alone leaves q7 loose where `theta` is nearly stationary.
/// Solutions are validated on their own swivel angle afterwards.
fn refine(res: &Residual, mut a: f64, mut fa: f64, mut b: f64, mut fb: f64, tol: f64) -> Option<f64> {
    let mut best = if fa.abs() < fb.abs() { (a, fa) } else { (b, fb) };
    if best.1 == 0.0 {
        return Some(best.0);
    }
    let mut side = 0i8;
    let mut prev = f64::NAN;
    for _ in 0..MAX_REFINE_ITERS {
        let mut c = (a * fb - b * fa) / (fb - fa);
        if !c.is_finite() || c <= a.min(b) || c >= a.max(b) {
            c = 0.5 * (a + b);
        }
        let fc = match res.at(c) {
            Some(v) => v,
            None => {
                // Hole inside the bracket: fall back to bisection.
                c = 0.5 * (a + b);
                res.at(c)?
            }
        };
        if fc.abs() < best.1.abs() {
            best = (c, fc);
        }
        let step = (c - prev).abs();
        if fc == 0.0 || step <= STEP_TOL || (b - a).abs() <= STEP_TOL || (fc.abs() <= tol && step <= SETTLED_STEP) {
            break;
        }
        prev = c;
        if fc * fb < 0.0 {
            a = b;
            fa = fb;
            b = c;
            fb = fc;
            side = 0;
        } else {
            b = c;
            fb = fc;
            if side == -1 {
                fa *= 0.5;
            }
            side = -1;
        }
    }
    Some(best.0)
}

/// Last defined point between a defined `a` and an undefined `b`.
fn domain_edge(res: &Residual, mut a: f64, mut b: f64) -> (f64, f64) {
    let mut fa = res.at(a).unwrap_or(0.0);
    while (b - a).abs() > EDGE_TOL {
        let m = 0.5 * (a + b);
        match res.at(m) {
            Some(v) => {
                a = m;
                fa = v;
            }
            None => b = m,
        }
    }
    (a, fa)
}

/// Golden-section search for the minimum of `sign * f` on a cell whose ends
/// have the sign of `sign`; stops as soon as the residual changes sign.
fn dip(res: &Residual, a: f64, b: f64, sign: f64) -> Option<(f64, f64)> {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let (mut a, mut b) = (a, b);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let mut fc = sign * res.at(c)?;
    let mut fd = sign * res.at(d)?;
    for _ in 0..60 {
        if fc <= 0.0 {
            return Some((c, sign * fc));
        }
        if fd <= 0.0 {
            return Some((d, sign * fd));
        }
        if (b - a).abs() < STEP_TOL {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = sign * res.at(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = sign * res.at(d)?;
        }
    }
    let (x, fx) = if fc < fd { (c, fc) } else { (d, fd) };
    Some((x, sign * fx))
}

/// Brackets and refines the crossings between two samples, subdividing while
/// the residual moves too fast to rule out a hidden crossing and locating
/// the domain edge when one end is undefined.
#[allow(clippy::too_many_arguments)]
fn scan(res: &Residual, a: f64, fa: Option<f64>, b: f64, fb: Option<f64>, tol: f64, depth: u32, roots: &mut Vec<f64>) {
    match (fa, fb) {
        (Some(x), Some(y)) => {
            if wrap_pi(y - x).abs() > MAX_JUMP && depth < MAX_DEPTH && (b - a).abs() > STEP_TOL {
                let m = 0.5 * (a + b);
                let fm = res.at(m);
                scan(res, a, fa, m, fm, tol, depth + 1, roots);
                scan(res, m, fm, b, fb, tol, depth + 1, roots);
            } else if brackets(x, y) {
                roots.extend(refine(res, a, x, b, y, tol));
            } else if x.abs().min(y.abs()) < DIP_WINDOW {
                if let Some((m, fm)) = dip(res, a, b, x.signum()) {
                    if fm.abs() <= tol {
                        roots.push(m);
                    } else if fm * x < 0.0 {
                        roots.extend(refine(res, a, x, m, fm, tol));
                        roots.extend(refine(res, m, fm, b, y, tol));
                    }
                }
            }
        }
        (Some(_), None) => {
            let (e, fe) = domain_edge(res, a, b);
            if e != a {
                scan(res, a, fa, e, Some(fe), tol, depth + 1, roots);
            }
        }
        (None, Some(_)) => {
            let (e, fe) = domain_edge(res, b, a);
            if e != b {
                scan(res, e, Some(fe), b, fb, tol, depth + 1, roots);
            }
        }
        (None, None) => {}
    }
}

/// Roots of `theta(q7) = target` on one track of the profile.
fn track_roots(profile: &SwivelProfile, res: &Residual, tol: f64, roots: &mut Vec<f64>) {
    let k = res.track;
    let f: Vec<Option<f64>> = profile
        .theta
        .iter()
        .map(|t| t[k].map(|v| wrap_pi(v - res.target)))
        .collect();
    let d: Vec<Option<f64>> = profile.elbow_offset.iter().map(|v| v[k]).collect();
    let mut pts: Vec<(f64, Option<f64>)> = profile.q7.iter().copied().zip(f).collect();
    let n = pts.len();

    // Split at every closest approach of O4 to the line S-O7 so that a full
    // turn of theta is never hidden inside one cell.
    for i in 1..n.saturating_sub(1) {
        let (Some(dl), Some(dm), Some(dr)) = (d[i - 1], d[i], d[i + 1]) else {
            continue;
        };
        if dm <= dl && dm <= dr {
            if let Some(t) = closest_pass(res, pts[i - 1].0, pts[i + 1].0) {
                pts.push((t, res.at(t)));
            }
        }
    }
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));

    for w in pts.windows(2) {
        scan(res, w[0].0, w[0].1, w[1].0, w[1].1, tol, 0, roots);
    }
}

/// Solves for the configurations whose swivel angle equals `query.theta`.
pub fn solve_swivel(query: &SwivelQuery, geom: &FrankaGeometry, emergency_q1: Option<f64>) -> Result<IkSolutionSet> {
    query.validate()?;
    let pose = &query.pose;
    if swivel_singular(pose, geom) {
        return Err(IkError::SwivelUndefined);
    }
    let target = wrap_pi(query.theta);
    let profile = SwivelProfile::build(pose, query.grid_size, geom);

    let mut roots = Vec::new();
    for track in 0..TRACKS.len() {
        let res = Residual { pose, geom, track, target };
        track_roots(&profile, &res, query.refine_tol, &mut roots);
    }
    roots.sort_by(f64::total_cmp);
    roots.dedup_by(|a, b| (*a - *b).abs() <= STEP_TOL);

    let mut solutions = Vec::new();
    let mut singularity = SingularityReport::NONE;
    for (i, &q7) in roots.iter().enumerate() {
        let set = solve_q7(pose, q7, geom, emergency_q1)?;
        if set.singularity.kind == SingularityKind::Type1 {
            singularity = set.singularity;
        }
        for mut s in set.solutions {
            let ok = swivel_of_solution(&s, pose, geom).is_some_and(|t| wrap_pi(t - target).abs() < SWIVEL_ACCEPT_TOL);
            if ok {
                s.branch.free = u8::try_from(i + 1).unwrap_or(u8::MAX);
                solutions.push(s);
            }
        }
    }
    dedup_solutions(&mut solutions);
    if solutions.len() > query.max_solutions {
        solutions.sort_by_key(|s| (!s.within_limits(), s.branch));
        solutions.truncate(query.max_solutions);
    }
    solutions.sort_by_key(|s| s.branch);
    Ok(IkSolutionSet {
        pose: *pose,
        solutions,
        singularity,
        requested_param_honored: true,
    })
}
