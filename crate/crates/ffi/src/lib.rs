//! C ABI for the hmdd solver library.
//!
//! The stable surface lives in `include/hmdd.h`, which is maintained by
//! hand and checked against this file by the tests. Conventions:
//!
//! * Functions return an `HmddStatus` code; outputs go through pointers.
//! * `HmddMesh` and `HmddSolution` are opaque handles owned by the caller
//!   and released with the matching `_free` function. A `_free` on NULL is
//!   a no-op.
//! * On any error, `hmdd_last_error()` returns a thread-local message valid
//!   until the next failing call on the same thread.
//! * Handles are immutable after creation and safe to share across threads
//!   for reads; creation and destruction are not synchronized.
//! * No call unwinds across the boundary; panics turn into
//!   `HMDD_STATUS_INTERNAL`.

// Handle arguments are null-checked before any dereference; validity beyond
// non-null (the handle came from this library and is still live) is the C
// caller's contract, stated in the header.
#![allow(clippy::not_unsafe_ptr_arg_deref)]

use hmdd::assembly::{assemble, ProblemData, QuadratureSettings};
use hmdd::error::Error;
use hmdd::mesh::{write_mesh, Mesh, Point};
use hmdd::solver::{solve, SolverChoice};
use hmdd::spaces::{build_dofmap, DofMap, FieldEvaluator, Solution};
use hmdd::study::{run_case, Geometry};
use hmdd::trace::build_trace_projector;
use std::cell::RefCell;
use std::ffi::{c_char, c_double, c_int, c_uint, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

/// Status codes of every API call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HmddStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Geometry = 3,
    Singular = 4,
    Residual = 5,
    Io = 6,
    Internal = 7,
}

/// Error norms and run metadata of one solved case, mirrored in the header.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct HmddErrorReport {
    pub level: c_uint,
    pub order: c_uint,
    pub n_dofs: c_uint,
    pub _reserved: c_uint,
    pub tau: c_double,
    pub h: c_double,
    pub residual: c_double,
    pub e_u: c_double,
    pub e_q: c_double,
    pub e_div: c_double,
    pub j_qn: c_double,
    pub j_u: c_double,
    pub e_mu: c_double,
    pub e_mean_mu: c_double,
    pub e_mean_u: c_double,
    pub norm_q: c_double,
}

/// Opaque mesh handle.
pub struct HmddMesh {
    mesh: Mesh,
}

/// Opaque solution handle: the mesh, numbering, and coefficients of one
/// solve, with point evaluation.
pub struct HmddSolution {
    mesh: Mesh,
    dofmap: DofMap,
    solution: Solution,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::new("").unwrap());
}

fn set_error(message: &str) {
    let cleaned = message.replace('\0', " ");
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(cleaned).unwrap_or_default();
    });
}

fn status_of(err: &Error) -> HmddStatus {
    match err {
        Error::InvalidGeometry(_) => HmddStatus::Geometry,
        Error::Construction(_) | Error::Config(_) | Error::ProblemData(_) | Error::Parse(_) => {
            HmddStatus::InvalidArgument
        }
        Error::Singular { .. } => HmddStatus::Singular,
        Error::ResidualContract { .. } => HmddStatus::Residual,
        Error::ReferenceRejected(_) => HmddStatus::Internal,
        Error::Io(_) => HmddStatus::Io,
    }
}

fn guarded(body: impl FnOnce() -> HmddStatus) -> HmddStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(status) => status,
        Err(_) => {
            set_error("internal panic");
            HmddStatus::Internal
        }
    }
}

fn parse_geometry(geometry: c_int) -> Result<Geometry, HmddStatus> {
    match geometry {
        0 => Ok(Geometry::Square),
        1 => Ok(Geometry::Annulus),
        _ => {
            set_error("geometry must be HMDD_GEOMETRY_SQUARE (0) or HMDD_GEOMETRY_ANNULUS (1)");
            Err(HmddStatus::InvalidArgument)
        }
    }
}

/// Version string of the library; static storage, do not free.
#[no_mangle]
pub extern "C" fn hmdd_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Message of the last failing call on this thread; valid until the next
/// failing call. Static storage, do not free.
#[no_mangle]
pub extern "C" fn hmdd_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Build a benchmark mesh: geometry 0 is the two-patch unit square, 1 the
/// radius-2 disk with the interface on the unit circle. `level` counts
/// uniform refinements.
#[no_mangle]
pub extern "C" fn hmdd_mesh_create(
    geometry: c_int,
    level: c_uint,
    out_mesh: *mut *mut HmddMesh,
) -> HmddStatus {
    guarded(|| {
        if out_mesh.is_null() {
            set_error("out_mesh is NULL");
            return HmddStatus::NullPointer;
        }
        let geometry = match parse_geometry(geometry) {
            Ok(g) => g,
            Err(status) => return status,
        };
        match geometry.mesh(level as usize) {
            Ok(mesh) => {
                let handle = Box::new(HmddMesh { mesh });
                unsafe { *out_mesh = Box::into_raw(handle) };
                HmddStatus::Ok
            }
            Err(e) => {
                set_error(&e.to_string());
                status_of(&e)
            }
        }
    })
}

#[no_mangle]
pub extern "C" fn hmdd_mesh_free(mesh: *mut HmddMesh) {
    if !mesh.is_null() {
        drop(unsafe { Box::from_raw(mesh) });
    }
}

#[no_mangle]
pub extern "C" fn hmdd_mesh_cell_count(mesh: *const HmddMesh, out: *mut c_uint) -> HmddStatus {
    guarded(|| {
        if mesh.is_null() || out.is_null() {
            set_error("NULL argument");
            return HmddStatus::NullPointer;
        }
        unsafe { *out = (*mesh).mesh.n_cells() as c_uint };
        HmddStatus::Ok
    })
}

#[no_mangle]
pub extern "C" fn hmdd_mesh_skeleton_facet_count(
    mesh: *const HmddMesh,
    out: *mut c_uint,
) -> HmddStatus {
    guarded(|| {
        if mesh.is_null() || out.is_null() {
            set_error("NULL argument");
            return HmddStatus::NullPointer;
        }
        unsafe { *out = (*mesh).mesh.skeleton_facets().count() as c_uint };
        HmddStatus::Ok
    })
}

#[no_mangle]
pub extern "C" fn hmdd_mesh_width(mesh: *const HmddMesh, out: *mut c_double) -> HmddStatus {
    guarded(|| {
        if mesh.is_null() || out.is_null() {
            set_error("NULL argument");
            return HmddStatus::NullPointer;
        }
        unsafe { *out = (*mesh).mesh.mesh_width };
        HmddStatus::Ok
    })
}

/// Write a mesh in the plain text format to `path` (UTF-8, NUL-terminated).
///
/// # Safety
/// `path` must point to a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn hmdd_mesh_write(
    mesh: *const HmddMesh,
    path: *const c_char,
) -> HmddStatus {
    guarded(|| {
        if mesh.is_null() || path.is_null() {
            set_error("NULL argument");
            return HmddStatus::NullPointer;
        }
        let path = match unsafe { std::ffi::CStr::from_ptr(path) }.to_str() {
            Ok(s) => s,
            Err(_) => {
                set_error("path is not valid UTF-8");
                return HmddStatus::InvalidArgument;
            }
        };
        let text = write_mesh(unsafe { &(*mesh).mesh });
        match std::fs::write(path, text) {
            Ok(()) => HmddStatus::Ok,
            Err(e) => {
                set_error(&e.to_string());
                HmddStatus::Io
            }
        }
    })
}

/// Coefficient and source callbacks; must be pure functions of (x, y) and
/// safe to call from multiple threads.
pub type HmddScalarFn = extern "C" fn(x: c_double, y: c_double) -> c_double;

/// Solve the stabilized hybrid mixed system on a mesh for user-supplied
/// kappa and source callbacks. `solver` is 0 for the full factorization,
/// 1 for per-patch static condensation.
#[no_mangle]
pub extern "C" fn hmdd_solve(
    mesh: *const HmddMesh,
    order: c_uint,
    tau: c_double,
    kappa: HmddScalarFn,
    source: HmddScalarFn,
    solver: c_int,
    out_solution: *mut *mut HmddSolution,
) -> HmddStatus {
    guarded(|| {
        if mesh.is_null() || out_solution.is_null() {
            set_error("NULL argument");
            return HmddStatus::NullPointer;
        }
        let choice = match solver {
            0 => SolverChoice::Full,
            1 => SolverChoice::Condensed,
            _ => {
                set_error("solver must be HMDD_SOLVER_FULL (0) or HMDD_SOLVER_CONDENSED (1)");
                return HmddStatus::InvalidArgument;
            }
        };
        let mesh_ref = unsafe { &(*mesh).mesh };
        let quad = QuadratureSettings::default();
        let result = (|| -> hmdd::Result<HmddSolution> {
            let dofmap = build_dofmap(mesh_ref, order as usize)?;
            let projector =
                build_trace_projector(mesh_ref, &dofmap, quad.trace_points(order as usize))?;
            let data = ProblemData::new(
                move |p: Point| kappa(p.x, p.y),
                move |p: Point| source(p.x, p.y),
                tau,
            );
            let system = assemble(mesh_ref, &dofmap, &projector, &data, &quad)?;
            let (solution, _) = solve(mesh_ref, &dofmap, &system, choice)?;
            Ok(HmddSolution {
                mesh: mesh_ref.clone(),
                dofmap,
                solution,
            })
        })();
        match result {
            Ok(handle) => {
                unsafe { *out_solution = Box::into_raw(Box::new(handle)) };
                HmddStatus::Ok
            }
            Err(e) => {
                set_error(&e.to_string());
                status_of(&e)
            }
        }
    })
}

#[no_mangle]
pub extern "C" fn hmdd_solution_free(solution: *mut HmddSolution) {
    if !solution.is_null() {
        drop(unsafe { Box::from_raw(solution) });
    }
}

/// Evaluate the primal variable u_h at a world point. Fails with
/// HMDD_STATUS_INVALID_ARGUMENT when the point lies outside the mesh.
#[no_mangle]
pub extern "C" fn hmdd_solution_eval_u(
    solution: *const HmddSolution,
    x: c_double,
    y: c_double,
    out: *mut c_double,
) -> HmddStatus {
    guarded(|| {
        if solution.is_null() || out.is_null() {
            set_error("NULL argument");
            return HmddStatus::NullPointer;
        }
        let handle = unsafe { &*solution };
        let eval = FieldEvaluator::new(&handle.mesh, &handle.dofmap);
        match eval.u_at(&handle.solution, Point::new(x, y)) {
            Some(v) => {
                unsafe { *out = v };
                HmddStatus::Ok
            }
            None => {
                set_error("point lies outside the mesh");
                HmddStatus::InvalidArgument
            }
        }
    })
}

/// Number of unknowns of a solution (flux + scalar + hybrid).
#[no_mangle]
pub extern "C" fn hmdd_solution_dof_count(
    solution: *const HmddSolution,
    out: *mut c_uint,
) -> HmddStatus {
    guarded(|| {
        if solution.is_null() || out.is_null() {
            set_error("NULL argument");
            return HmddStatus::NullPointer;
        }
        unsafe { *out = (*solution).dofmap.total() as c_uint };
        HmddStatus::Ok
    })
}

/// Run one benchmark case end to end (mesh, solve, error norms against the
/// built-in reference solution of the geometry).
#[no_mangle]
pub extern "C" fn hmdd_run_case(
    geometry: c_int,
    level: c_uint,
    order: c_uint,
    tau: c_double,
    solver: c_int,
    out_report: *mut HmddErrorReport,
) -> HmddStatus {
    guarded(|| {
        if out_report.is_null() {
            set_error("out_report is NULL");
            return HmddStatus::NullPointer;
        }
        let geometry = match parse_geometry(geometry) {
            Ok(g) => g,
            Err(status) => return status,
        };
        let choice = match solver {
            0 => SolverChoice::Full,
            1 => SolverChoice::Condensed,
            _ => {
                set_error("solver must be HMDD_SOLVER_FULL (0) or HMDD_SOLVER_CONDENSED (1)");
                return HmddStatus::InvalidArgument;
            }
        };
        match run_case(
            geometry,
            level as usize,
            order as usize,
            tau,
            choice,
            &QuadratureSettings::default(),
        ) {
            Ok(r) => {
                let report = HmddErrorReport {
                    level: r.level as c_uint,
                    order: r.order as c_uint,
                    n_dofs: r.n_dofs as c_uint,
                    _reserved: 0,
                    tau: r.tau,
                    h: r.h,
                    residual: r.residual,
                    e_u: r.e_u,
                    e_q: r.e_q,
                    e_div: r.e_div,
                    j_qn: r.j_qn,
                    j_u: r.j_u,
                    e_mu: r.e_mu,
                    e_mean_mu: r.e_mean_mu,
                    e_mean_u: r.e_mean_u,
                    norm_q: r.norm_q,
                };
                unsafe { *out_report = report };
                HmddStatus::Ok
            }
            Err(e) => {
                set_error(&e.to_string());
                status_of(&e)
            }
        }
    })
}
