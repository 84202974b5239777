//! C ABI for the substructuring toolkit.
//!
//! The surface follows the usual opaque-handle pattern: a
//! [`substruct_problem`] owns a mesh and partition, a
//! [`substruct_corners`] owns a selected corner set, and every function
//! returns a [`substruct_status`]. On failure the thread-local message
//! from [`substruct_last_error`] describes what went wrong. Handles must
//! be released with their matching `_free` function; all functions are
//! safe to call from multiple threads as long as each handle is used by
//! one thread at a time.

#![allow(non_camel_case_types)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use substruct_core::bddc::{
    build_constraints, build_preconditioner, pcg, reduce_to_schur, ConstraintMode,
};
use substruct_core::corners::{
    augment_random, select_corners, Algorithm, CornerSet, DimMode, SelectionOptions,
};
use substruct_core::interface::classify_interface;
use substruct_core::mesh::{
    assemble, generate_structured, generate_wedged_beam, load_mesh, Mesh, Pde, StructuredSpec,
};
use substruct_core::partition::{load_partition, partition_geometric, GapPolicy, Partition};

/// Status codes returned by every fallible function.
#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum substruct_status {
    /// Success.
    SUBSTRUCT_OK = 0,
    /// A pointer was null or an argument out of range.
    SUBSTRUCT_INVALID_ARGUMENT = 1,
    /// A file could not be read or parsed.
    SUBSTRUCT_IO_ERROR = 2,
    /// A local problem or the coarse problem is singular.
    SUBSTRUCT_SINGULAR = 3,
    /// The iteration budget was exhausted before convergence.
    SUBSTRUCT_NOT_CONVERGED = 4,
    /// An unexpected internal failure; see substruct_last_error.
    SUBSTRUCT_INTERNAL = 5,
}

use substruct_status::*;

/// Corner selection strategy.
#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq)]
pub enum substruct_algorithm {
    SUBSTRUCT_ALGORITHM_FULL = 0,
    SUBSTRUCT_ALGORITHM_MINIMAL = 1,
    SUBSTRUCT_ALGORITHM_EDGE = 2,
}

/// Face selection rule: three corners per face component, two, or pick
/// from the mesh dimension.
#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq)]
pub enum substruct_dim_mode {
    SUBSTRUCT_DIM_MODE_AUTO = 0,
    SUBSTRUCT_DIM_MODE_3D = 1,
    SUBSTRUCT_DIM_MODE_2D = 2,
}

/// Governing equation.
#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq)]
pub enum substruct_pde {
    SUBSTRUCT_PDE_LAPLACE = 0,
    SUBSTRUCT_PDE_ELASTICITY = 1,
}

/// Coarse constraint modes: corners, optionally with edge and face averages.
#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq)]
pub enum substruct_constraints {
    SUBSTRUCT_CONSTRAINTS_C = 0,
    SUBSTRUCT_CONSTRAINTS_CE = 1,
    SUBSTRUCT_CONSTRAINTS_CF = 2,
    SUBSTRUCT_CONSTRAINTS_CEF = 3,
}

/// Solve outcome in plain C types.
#[repr(C)]
#[derive(Clone, Copy)]
pub struct substruct_solve_report {
    pub iterations: u64,
    pub converged: bool,
    pub kappa_est: f64,
    pub n_corners: u64,
    pub n_coarse_dofs: u64,
    pub t_setup: f64,
    pub t_coarse_factorization: f64,
    pub t_pcg: f64,
}

/// Opaque mesh-plus-partition handle.
pub struct substruct_problem {
    mesh: Mesh,
    partition: Partition,
}

/// Opaque corner set handle.
pub struct substruct_corners {
    set: CornerSet,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(message: &str) {
    let sanitized = message.replace('\0', " ");
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(sanitized).unwrap_or_default();
    });
}

/// Message for the most recent failure on this thread. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn substruct_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

fn guard(f: impl FnOnce() -> substruct_status) -> substruct_status {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(payload) => {
            let message = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic across the FFI boundary".to_string());
            set_error(&message);
            SUBSTRUCT_INTERNAL
        }
    }
}

/// # Safety
/// `ptr` must be valid for reads of a NUL-terminated string.
unsafe fn cstr<'a>(ptr: *const c_char) -> Result<&'a str, substruct_status> {
    if ptr.is_null() {
        set_error("null string argument");
        return Err(SUBSTRUCT_INVALID_ARGUMENT);
    }
    CStr::from_ptr(ptr).to_str().map_err(|_| {
        set_error("string argument is not valid UTF-8");
        SUBSTRUCT_INVALID_ARGUMENT
    })
}

fn emit(out: *mut *mut substruct_problem, problem: substruct_problem) -> substruct_status {
    unsafe { *out = Box::into_raw(Box::new(problem)) };
    SUBSTRUCT_OK
}

/// Load a problem from a mesh JSON file and a partition file (one
/// subdomain id per element line). When `renumber_gaps` is true, empty
/// subdomain ids are compacted instead of rejected.
///
/// # Safety
/// `mesh_path` and `part_path` must be NUL-terminated strings and `out`
/// a valid destination pointer.
#[no_mangle]
pub unsafe extern "C" fn substruct_problem_from_files(
    mesh_path: *const c_char,
    part_path: *const c_char,
    renumber_gaps: bool,
    out: *mut *mut substruct_problem,
) -> substruct_status {
    guard(|| {
        if out.is_null() {
            set_error("null output pointer");
            return SUBSTRUCT_INVALID_ARGUMENT;
        }
        let mesh_path = match cstr(mesh_path) {
            Ok(s) => s,
            Err(status) => return status,
        };
        let part_path = match cstr(part_path) {
            Ok(s) => s,
            Err(status) => return status,
        };
        let mesh = match load_mesh(mesh_path) {
            Ok(m) => m,
            Err(e) => {
                set_error(&e.to_string());
                return SUBSTRUCT_IO_ERROR;
            }
        };
        let policy = if renumber_gaps { GapPolicy::Renumber } else { GapPolicy::Deny };
        let partition = match load_partition(part_path, &mesh, policy) {
            Ok((p, _)) => p,
            Err(e) => {
                set_error(&e.to_string());
                return SUBSTRUCT_IO_ERROR;
            }
        };
        emit(out, substruct_problem { mesh, partition })
    })
}

/// Load a mesh file and partition it internally into `nparts` subdomains
/// by recursive coordinate bisection.
///
/// # Safety
/// `mesh_path` must be a NUL-terminated string and `out` a valid
/// destination pointer.
#[no_mangle]
pub unsafe extern "C" fn substruct_problem_from_mesh(
    mesh_path: *const c_char,
    nparts: u32,
    out: *mut *mut substruct_problem,
) -> substruct_status {
    guard(|| {
        if out.is_null() {
            set_error("null output pointer");
            return SUBSTRUCT_INVALID_ARGUMENT;
        }
        let mesh_path = match cstr(mesh_path) {
            Ok(s) => s,
            Err(status) => return status,
        };
        let mesh = match load_mesh(mesh_path) {
            Ok(m) => m,
            Err(e) => {
                set_error(&e.to_string());
                return SUBSTRUCT_IO_ERROR;
            }
        };
        let partition = match partition_geometric(&mesh, nparts as usize) {
            Ok(p) => p,
            Err(e) => {
                set_error(&e.to_string());
                return SUBSTRUCT_INVALID_ARGUMENT;
            }
        };
        emit(out, substruct_problem { mesh, partition })
    })
}

/// Built-in regular grid fixture: `cells[axis]` elements per subdomain and
/// `subs[axis]` subdomains per axis, `dim` entries each.
///
/// # Safety
/// `cells` and `subs` must point to `dim` readable entries and `out` must
/// be a valid destination pointer.
#[no_mangle]
pub unsafe extern "C" fn substruct_problem_structured(
    dim: u32,
    cells: *const u32,
    subs: *const u32,
    out: *mut *mut substruct_problem,
) -> substruct_status {
    guard(|| {
        if out.is_null() || cells.is_null() || subs.is_null() {
            set_error("null pointer argument");
            return SUBSTRUCT_INVALID_ARGUMENT;
        }
        let dim = dim as usize;
        if !(dim == 2 || dim == 3) {
            set_error("dimension must be 2 or 3");
            return SUBSTRUCT_INVALID_ARGUMENT;
        }
        let cells: Vec<usize> =
            std::slice::from_raw_parts(cells, dim).iter().map(|&c| c as usize).collect();
        let subs: Vec<usize> =
            std::slice::from_raw_parts(subs, dim).iter().map(|&s| s as usize).collect();
        let spec = StructuredSpec::new(dim, &cells, &subs);
        match generate_structured(&spec) {
            Ok((mesh, partition)) => emit(out, substruct_problem { mesh, partition }),
            Err(e) => {
                set_error(&e.to_string());
                SUBSTRUCT_INVALID_ARGUMENT
            }
        }
    })
}

/// Built-in beam fixture whose two subdomains share a two-piece interface.
///
/// # Safety
/// `out` must be a valid destination pointer.
#[no_mangle]
pub unsafe extern "C" fn substruct_problem_wedged_beam(
    out: *mut *mut substruct_problem,
) -> substruct_status {
    guard(|| {
        if out.is_null() {
            set_error("null output pointer");
            return SUBSTRUCT_INVALID_ARGUMENT;
        }
        let (mesh, partition) = generate_wedged_beam();
        emit(out, substruct_problem { mesh, partition })
    })
}

/// # Safety
/// `problem` must come from a `substruct_problem_*` constructor and not
/// have been freed already. Passing null is a no-op.
#[no_mangle]
pub unsafe extern "C" fn substruct_problem_free(problem: *mut substruct_problem) {
    if !problem.is_null() {
        drop(Box::from_raw(problem));
    }
}

/// Interface statistics: glob counts per kind plus the interface size.
///
/// # Safety
/// `problem` must be a live handle; count pointers may be null when a
/// value is not wanted.
#[no_mangle]
pub unsafe extern "C" fn substruct_classify_counts(
    problem: *const substruct_problem,
    faces: *mut u64,
    edges: *mut u64,
    vertices: *mut u64,
    interface_nodes: *mut u64,
) -> substruct_status {
    guard(|| {
        let Some(p) = problem.as_ref() else {
            set_error("null problem handle");
            return SUBSTRUCT_INVALID_ARGUMENT;
        };
        let cls = classify_interface(&p.mesh, &p.partition);
        let (f, e, v) = cls.kind_counts();
        if !faces.is_null() {
            *faces = f as u64;
        }
        if !edges.is_null() {
            *edges = e as u64;
        }
        if !vertices.is_null() {
            *vertices = v as u64;
        }
        if !interface_nodes.is_null() {
            *interface_nodes = cls.interface_nodes().len() as u64;
        }
        SUBSTRUCT_OK
    })
}

/// Select the basic corner set, optionally augmented by `extra_corners`
/// random interface nodes drawn with `seed`.
///
/// # Safety
/// `problem` must be a live handle and `out` a valid destination pointer.
#[no_mangle]
pub unsafe extern "C" fn substruct_select(
    problem: *const substruct_problem,
    algorithm: substruct_algorithm,
    dim_mode: substruct_dim_mode,
    detect_components: bool,
    extra_corners: u64,
    seed: u64,
    out: *mut *mut substruct_corners,
) -> substruct_status {
    guard(|| {
        let Some(p) = problem.as_ref() else {
            set_error("null problem handle");
            return SUBSTRUCT_INVALID_ARGUMENT;
        };
        if out.is_null() {
            set_error("null output pointer");
            return SUBSTRUCT_INVALID_ARGUMENT;
        }
        let algorithm = match algorithm {
            substruct_algorithm::SUBSTRUCT_ALGORITHM_FULL => Algorithm::Full,
            substruct_algorithm::SUBSTRUCT_ALGORITHM_MINIMAL => Algorithm::Minimal,
            substruct_algorithm::SUBSTRUCT_ALGORITHM_EDGE => Algorithm::Edge,
        };
        let dim_mode = match dim_mode {
            substruct_dim_mode::SUBSTRUCT_DIM_MODE_AUTO => DimMode::for_mesh(&p.mesh),
            substruct_dim_mode::SUBSTRUCT_DIM_MODE_3D => DimMode::ThreeD,
            substruct_dim_mode::SUBSTRUCT_DIM_MODE_2D => DimMode::TwoD,
        };
        let opts = SelectionOptions { algorithm, dim_mode, detect_components };
        let cls = classify_interface(&p.mesh, &p.partition);
        let set = match select_corners(&p.mesh, &p.partition, &cls, opts) {
            Ok((basic, _)) if extra_corners > 0 => {
                match augment_random(&basic, &cls, extra_corners as usize, seed) {
                    Ok(s) => s,
                    Err(e) => {
                        set_error(&e.to_string());
                        return SUBSTRUCT_INVALID_ARGUMENT;
                    }
                }
            }
            Ok((basic, _)) => basic,
            Err(e) => {
                set_error(&e.to_string());
                return SUBSTRUCT_INVALID_ARGUMENT;
            }
        };
        *out = Box::into_raw(Box::new(substruct_corners { set }));
        SUBSTRUCT_OK
    })
}

/// Number of corners in the set; 0 for a null handle.
///
/// # Safety
/// `corners` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn substruct_corners_len(corners: *const substruct_corners) -> u64 {
    corners.as_ref().map_or(0, |c| c.set.len() as u64)
}

/// Copy the corner node ids (ascending) into `buf`.
///
/// # Safety
/// `buf` must be valid for `len` writes; `len` must be at least
/// `substruct_corners_len(corners)`.
#[no_mangle]
pub unsafe extern "C" fn substruct_corners_copy(
    corners: *const substruct_corners,
    buf: *mut u64,
    len: u64,
) -> substruct_status {
    guard(|| {
        let Some(c) = corners.as_ref() else {
            set_error("null corners handle");
            return SUBSTRUCT_INVALID_ARGUMENT;
        };
        if buf.is_null() || (len as usize) < c.set.len() {
            set_error("buffer too small for corner set");
            return SUBSTRUCT_INVALID_ARGUMENT;
        }
        let slice = std::slice::from_raw_parts_mut(buf, c.set.len());
        for (slot, &node) in slice.iter_mut().zip(c.set.corners.iter()) {
            *slot = node as u64;
        }
        SUBSTRUCT_OK
    })
}

/// # Safety
/// `corners` must come from [`substruct_select`] and not have been freed
/// already. Passing null is a no-op.
#[no_mangle]
pub unsafe extern "C" fn substruct_corners_free(corners: *mut substruct_corners) {
    if !corners.is_null() {
        drop(Box::from_raw(corners));
    }
}

/// Assemble, reduce to the interface, build the BDDC preconditioner for
/// the given corner set and constraint mode, and solve by PCG.
///
/// Elasticity uses `young` and `poisson`; Laplace ignores them. Returns
/// `SUBSTRUCT_SINGULAR` when a local problem or the coarse problem has a
/// mechanism and `SUBSTRUCT_NOT_CONVERGED` when `maxit` is exhausted (the
/// report is still filled in that case).
///
/// # Safety
/// `problem` and `corners` must be live handles and `report` a valid
/// destination pointer.
#[no_mangle]
pub unsafe extern "C" fn substruct_solve(
    problem: *const substruct_problem,
    corners: *const substruct_corners,
    pde: substruct_pde,
    young: f64,
    poisson: f64,
    mode: substruct_constraints,
    tol: f64,
    maxit: u64,
    report: *mut substruct_solve_report,
) -> substruct_status {
    guard(|| {
        let (Some(p), Some(c)) = (problem.as_ref(), corners.as_ref()) else {
            set_error("null handle");
            return SUBSTRUCT_INVALID_ARGUMENT;
        };
        if report.is_null() {
            set_error("null report pointer");
            return SUBSTRUCT_INVALID_ARGUMENT;
        }
        let pde = match pde {
            substruct_pde::SUBSTRUCT_PDE_LAPLACE => Pde::Laplace,
            substruct_pde::SUBSTRUCT_PDE_ELASTICITY => Pde::Elasticity { e: young, nu: poisson },
        };
        let mode = match mode {
            substruct_constraints::SUBSTRUCT_CONSTRAINTS_C => ConstraintMode::C,
            substruct_constraints::SUBSTRUCT_CONSTRAINTS_CE => ConstraintMode::CE,
            substruct_constraints::SUBSTRUCT_CONSTRAINTS_CF => ConstraintMode::CF,
            substruct_constraints::SUBSTRUCT_CONSTRAINTS_CEF => ConstraintMode::CEF,
        };

        let setup_start = std::time::Instant::now();
        let system = match assemble(&p.mesh, &pde) {
            Ok(s) => s,
            Err(e) => {
                set_error(&e.to_string());
                return SUBSTRUCT_INVALID_ARGUMENT;
            }
        };
        let cls = classify_interface(&p.mesh, &p.partition);
        let promoted = match cls.promote_to_corners(&p.mesh, &c.set.corners) {
            Ok(pr) => pr,
            Err(e) => {
                set_error(&format!("corner set does not match this problem: {e}"));
                return SUBSTRUCT_INVALID_ARGUMENT;
            }
        };
        let dpn = pde.dofs_per_node(p.mesh.dim);
        let constraints = match build_constraints(&promoted, &c.set, mode, dpn) {
            Ok(cs) => cs,
            Err(e) => {
                set_error(&e.to_string());
                return SUBSTRUCT_INVALID_ARGUMENT;
            }
        };
        let schur = match reduce_to_schur(&system, &p.mesh, &p.partition) {
            Ok(s) => s,
            Err(e) => {
                set_error(&e.to_string());
                return SUBSTRUCT_SINGULAR;
            }
        };
        let op = match build_preconditioner(&schur, &constraints) {
            Ok(op) => op,
            Err(e) => {
                set_error(&e.to_string());
                return SUBSTRUCT_SINGULAR;
            }
        };
        let setup = setup_start.elapsed().as_secs_f64();
        let (_, solve) = pcg(&schur, &op, tol, maxit as usize);
        *report = substruct_solve_report {
            iterations: solve.iterations as u64,
            converged: solve.converged,
            kappa_est: solve.kappa_est,
            n_corners: c.set.len() as u64,
            n_coarse_dofs: op.n_coarse_dofs as u64,
            t_setup: setup,
            t_coarse_factorization: op.coarse_factor_seconds,
            t_pcg: solve.timings.pcg,
        };
        if solve.converged {
            SUBSTRUCT_OK
        } else {
            set_error("PCG exhausted its iteration budget");
            SUBSTRUCT_NOT_CONVERGED
        }
    })
}
