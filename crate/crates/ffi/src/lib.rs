//! C ABI over `franka-ik`.
//!
//! Handles are opaque and owned by the caller once returned; release them
//! with the matching `*_free` function. Every fallible call returns a
//! [`FikStatus`]; on failure [`fik_last_error`] describes the problem for the
//! calling thread. Angles are radians, lengths meters, matrices row-major.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use franka_ik::cli::{solve_request, IkRequest, LockTarget};
use franka_ik::error::IkError;
use franka_ik::model::{default_geometry, forward_kinematics, FrankaGeometry, Pose};
use franka_ik::screw::{Mat3, Vec3};
use franka_ik::solvers::{IkQuery, IkSolutionSet, SingularityKind};

/// Result of a C API call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FikStatus {
    Ok = 0,
    NullPointer = 1,
    /// Non-finite values, a non-orthonormal rotation or out-of-range options.
    InvalidInput = 2,
    /// The swivel angle is undefined for this pose.
    SwivelUndefined = 3,
    IndexOutOfRange = 4,
    InvalidGeometry = 5,
    /// Internal consistency check failed.
    Internal = 6,
    Panic = 7,
}

/// Locked redundancy parameter, passed as an integer to `fik_solve`.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FikLock {
    Q7 = 0,
    Q6 = 1,
    Q4 = 2,
    Swivel = 3,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FikSingularity {
    None = 0,
    Type1 = 1,
    Type2 = 2,
}

/// Emergency values used at singular poses.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FikOptions {
    /// q1 used at a type-1 singular shoulder when `use_emergency_q1` is set;
    /// otherwise q1 and q3 are reported as NaN there.
    pub emergency_q1: f64,
    pub use_emergency_q1: bool,
    /// q7 used when a q6 or q4 query hits a type-2 singularity.
    pub emergency_q7: f64,
}

/// Robot geometry.
pub struct FikGeometry {
    inner: FrankaGeometry,
}

/// Solutions of one query.
pub struct FikSolutionSet {
    inner: IkSolutionSet,
}

struct Failure {
    status: FikStatus,
    message: String,
}

impl Failure {
    fn new(status: FikStatus, message: impl Into<String>) -> Self {
        Self {
            status,
            message: message.into(),
        }
    }
}

impl From<IkError> for Failure {
    fn from(e: IkError) -> Self {
        let status = match e {
            IkError::SwivelUndefined => FikStatus::SwivelUndefined,
            IkError::InvalidGeometry(_) => FikStatus::InvalidGeometry,
            IkError::InconsistentAxes(_) => FikStatus::Internal,
            _ => FikStatus::InvalidInput,
        };
        Self::new(status, e.to_string())
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: &str) {
    let text = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(text));
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> FikStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            clear_error();
            FikStatus::Ok
        }
        Ok(Err(failure)) => {
            set_error(&failure.message);
            failure.status
        }
        Err(_) => {
            set_error("internal panic");
            FikStatus::Panic
        }
    }
}

fn non_null<T>(p: *const T, what: &str) -> Result<*const T, Failure> {
    if p.is_null() {
        Err(Failure::new(FikStatus::NullPointer, format!("{what} is null")))
    } else {
        Ok(p)
    }
}

/// Reads `N` doubles from `p`.
///
/// # Safety
/// `p` must be null or point to `N` readable doubles.
unsafe fn read_array<const N: usize>(p: *const f64, what: &str) -> Result<[f64; N], Failure> {
    let p = non_null(p, what)?;
    let mut out = [0.0; N];
    ptr::copy_nonoverlapping(p, out.as_mut_ptr(), N);
    Ok(out)
}

/// Writes `values` to `p`.
///
/// # Safety
/// `p` must be null or point to `values.len()` writable doubles.
unsafe fn write_array(p: *mut f64, values: &[f64], what: &str) -> Result<(), Failure> {
    let p = non_null(p.cast_const(), what)?.cast_mut();
    ptr::copy_nonoverlapping(values.as_ptr(), p, values.len());
    Ok(())
}

/// # Safety
/// `geometry` must be null or a live handle from this library.
unsafe fn geometry_or_default(geometry: *const FikGeometry) -> FrankaGeometry {
    if geometry.is_null() {
        default_geometry()
    } else {
        (*geometry).inner.clone()
    }
}

/// # Safety
/// `set` must be null or a live handle from this library.
unsafe fn set_ref<'a>(set: *const FikSolutionSet) -> Result<&'a IkSolutionSet, Failure> {
    Ok(&(*non_null(set, "solution set")?).inner)
}

fn check_index(set: &IkSolutionSet, index: usize) -> Result<(), Failure> {
    if index >= set.len() {
        return Err(Failure::new(
            FikStatus::IndexOutOfRange,
            format!("index {index} out of range for {} solutions", set.len()),
        ));
    }
    Ok(())
}

/// Message describing the last failed call on this thread, or null. The
/// pointer stays valid until the next call into this library on the same
/// thread.
#[no_mangle]
pub extern "C" fn fik_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Default options: emergency q1 = pi/2, emergency q7 = 0.
#[no_mangle]
pub extern "C" fn fik_options_default() -> FikOptions {
    FikOptions {
        emergency_q1: IkQuery::DEFAULT_EMERGENCY_Q1,
        use_emergency_q1: true,
        emergency_q7: IkQuery::DEFAULT_EMERGENCY_Q7,
    }
}

/// Built-in Franka geometry. Never null.
#[no_mangle]
pub extern "C" fn fik_geometry_default() -> *mut FikGeometry {
    Box::into_raw(Box::new(FikGeometry {
        inner: default_geometry(),
    }))
}

/// Parses a geometry JSON document (keys d1, d3, d5, a4, a5, a7, dE, limits).
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn fik_geometry_from_json(json: *const c_char, out: *mut *mut FikGeometry) -> FikStatus {
    guard(|| {
        non_null(out.cast_const(), "out")?;
        *out = ptr::null_mut();
        let text = CStr::from_ptr(non_null(json, "json")?)
            .to_str()
            .map_err(|e| Failure::new(FikStatus::InvalidInput, format!("json is not UTF-8: {e}")))?;
        let inner = FrankaGeometry::from_json(text)?;
        *out = Box::into_raw(Box::new(FikGeometry { inner }));
        Ok(())
    })
}

/// # Safety
/// `geometry` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn fik_geometry_free(geometry: *mut FikGeometry) {
    if !geometry.is_null() {
        drop(Box::from_raw(geometry));
    }
}

/// Solves a pose with the joint (or swivel angle) selected by `lock` fixed to
/// `value`. An unreachable pose succeeds with an empty set.
///
/// `geometry` and `options` may be null for the defaults. `rotation` holds 9
/// doubles, `position` 3. `lock` is a `FikLock` value. On success `*out`
/// receives a set to release with `fik_solution_set_free`.
///
/// # Safety
/// All non-null pointers must reference valid memory of the documented size.
#[no_mangle]
pub unsafe extern "C" fn fik_solve(
    geometry: *const FikGeometry,
    rotation: *const f64,
    position: *const f64,
    lock: u32,
    value: f64,
    options: *const FikOptions,
    out: *mut *mut FikSolutionSet,
) -> FikStatus {
    guard(|| {
        non_null(out.cast_const(), "out")?;
        *out = ptr::null_mut();
        let r = read_array::<9>(rotation, "rotation")?;
        let t = read_array::<3>(position, "position")?;
        let lock = match lock {
            0 => LockTarget::Q7,
            1 => LockTarget::Q6,
            2 => LockTarget::Q4,
            3 => LockTarget::Swivel,
            other => return Err(Failure::new(FikStatus::InvalidInput, format!("unknown lock target {other}"))),
        };
        let opts = if options.is_null() {
            fik_options_default()
        } else {
            *options
        };
        let geom = geometry_or_default(geometry);
        let pose = Pose::new(Mat3::from_row_slice(&r), Vec3::from(t))?;
        let req = IkRequest {
            lock,
            value,
            emergency_q1: opts.use_emergency_q1.then_some(opts.emergency_q1),
            emergency_q7: opts.emergency_q7,
            jacobian: false,
        };
        let inner = solve_request(&pose, &req, &geom)?;
        *out = Box::into_raw(Box::new(FikSolutionSet { inner }));
        Ok(())
    })
}

/// Forward kinematics. Writes the end-effector rotation (9) and position (3);
/// if `axes` is non-null it receives 42 doubles, direction then point for
/// each of the seven joint axes.
///
/// # Safety
/// All non-null pointers must reference valid memory of the documented size.
#[no_mangle]
pub unsafe extern "C" fn fik_fk(
    geometry: *const FikGeometry,
    q: *const f64,
    rotation: *mut f64,
    position: *mut f64,
    axes: *mut f64,
) -> FikStatus {
    guard(|| {
        let q = read_array::<7>(q, "q")?;
        if !q.iter().all(|v| v.is_finite()) {
            return Err(IkError::NonFinite("joint angles").into());
        }
        let geom = geometry_or_default(geometry);
        let (pose, screw_axes) = forward_kinematics(&q, &geom);
        let r: Vec<f64> = (0..9).map(|k| pose.rotation[(k / 3, k % 3)]).collect();
        write_array(rotation, &r, "rotation")?;
        write_array(position, pose.position.as_slice(), "position")?;
        if !axes.is_null() {
            let flat: Vec<f64> = screw_axes
                .iter()
                .flat_map(|a| a.direction.iter().chain(a.point.iter()).copied().collect::<Vec<_>>())
                .collect();
            write_array(axes, &flat, "axes")?;
        }
        Ok(())
    })
}

/// Number of solutions; 0 for a null set.
///
/// # Safety
/// `set` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn fik_solution_set_len(set: *const FikSolutionSet) -> usize {
    if set.is_null() {
        0
    } else {
        (*set).inner.len()
    }
}

/// Joint angles of solution `index` (7 doubles, NaN where undefined).
///
/// # Safety
/// `set` must be a live handle and `q` must hold 7 doubles.
#[no_mangle]
pub unsafe extern "C" fn fik_solution_set_joints(set: *const FikSolutionSet, index: usize, q: *mut f64) -> FikStatus {
    guard(|| {
        let s = set_ref(set)?;
        check_index(s, index)?;
        write_array(q, &s.solutions[index].q, "q")
    })
}

/// Bit `i` is set when joint `i + 1` of solution `index` is within its limits.
///
/// # Safety
/// `set` must be a live handle and `mask` writable.
#[no_mangle]
pub unsafe extern "C" fn fik_solution_set_limit_mask(
    set: *const FikSolutionSet,
    index: usize,
    mask: *mut u8,
) -> FikStatus {
    guard(|| {
        let s = set_ref(set)?;
        check_index(s, index)?;
        let bits = s.solutions[index]
            .limit_ok
            .iter()
            .enumerate()
            .fold(0u8, |m, (i, &ok)| m | (u8::from(ok) << i));
        *non_null(mask.cast_const(), "mask")?.cast_mut() = bits;
        Ok(())
    })
}

/// 6x7 Jacobian of solution `index`, row-major, linear rows first, about the
/// end-effector point in the base frame.
///
/// # Safety
/// `set` must be a live handle and `jacobian` must hold 42 doubles.
#[no_mangle]
pub unsafe extern "C" fn fik_solution_set_jacobian(
    set: *const FikSolutionSet,
    index: usize,
    jacobian: *mut f64,
) -> FikStatus {
    guard(|| {
        let s = set_ref(set)?;
        check_index(s, index)?;
        let j = s.jacobian(index);
        let flat: Vec<f64> = (0..6).flat_map(|r| (0..7).map(move |c| j[(r, c)])).collect();
        write_array(jacobian, &flat, "jacobian")
    })
}

/// Singularity class of the query; `None` for a null set.
///
/// # Safety
/// `set` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn fik_solution_set_singularity(set: *const FikSolutionSet) -> FikSingularity {
    if set.is_null() {
        return FikSingularity::None;
    }
    match (*set).inner.singularity.kind {
        SingularityKind::None => FikSingularity::None,
        SingularityKind::Type1 => FikSingularity::Type1,
        SingularityKind::Type2 => FikSingularity::Type2,
    }
}

/// False when a type-2 pose forced the solver to ignore the locked value.
///
/// # Safety
/// `set` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn fik_solution_set_param_honored(set: *const FikSolutionSet) -> bool {
    !set.is_null() && (*set).inner.requested_param_honored
}

/// # Safety
/// `set` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn fik_solution_set_free(set: *mut FikSolutionSet) {
    if !set.is_null() {
        drop(Box::from_raw(set));
    }
}
