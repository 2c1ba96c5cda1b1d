//! C ABI for the projector-algebra library.
//!
//! Conventions: every function returns a [`PkStatus`] code; results come
//! back through out-pointers. Handles are opaque and freed with the
//! matching `pk_*_free`. On any failure `pk_last_error_message` returns a
//! thread-local description of the most recent error. No function panics
//! across the boundary.
//!
//! Pointer contracts (buffer lengths, handle validity) are stated on each
//! function instead of per-item safety sections.
#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use paulikern::algebra::{
    commutation_check, complete_projector, kernel_basis, power_limit, sum_projector,
    verify_expansion_identity, verify_kernel_identity,
};
use paulikern::error::Error;
use paulikern::models::{
    build_three_body_toy, equal_overlap_triple, random_ensemble, ForbiddenState, ToyModel,
    ToyModelParams,
};
use paulikern::operator::{hermitian_eig, Operator, ProjectorSet};
use paulikern::opp::lambda_sweep;

/// Status codes returned by every API call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PkStatus {
    PkOk = 0,
    PkNullArgument = 1,
    PkInvalidArgument = 2,
    PkDimMismatch = 3,
    PkEmptySpan = 4,
    PkRankZero = 5,
    PkNotSymmetric = 6,
    PkIndexOutOfRange = 7,
    PkDiverged = 8,
    PkInvalidOverlap = 9,
    PkBadRanks = 10,
    PkEmptyKernel = 11,
    PkLevelCount = 12,
    PkQuadratureFailure = 13,
    PkJsonError = 14,
    PkUtf8Error = 15,
    PkInternalPanic = 16,
}

/// Forbidden relative-motion states of the toy model.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PkForbiddenState {
    PkFs0S = 0,
    PkFs2S = 1,
}

/// Opaque family of projectors on a common space.
pub struct PkProjectorSet(ProjectorSet);

/// Opaque dense symmetric operator.
pub struct PkOperator(Operator);

/// Opaque three-body toy model (projector set plus Hamiltonian).
pub struct PkToyModel(ToyModel);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let sanitized = msg.replace('\0', " ");
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(sanitized).unwrap_or_default();
    });
}

fn status_of(err: &Error) -> PkStatus {
    match err {
        Error::DimMismatch { .. } => PkStatus::PkDimMismatch,
        Error::EmptySpan => PkStatus::PkEmptySpan,
        Error::RankZero { .. } => PkStatus::PkRankZero,
        Error::NotSymmetric { .. } => PkStatus::PkNotSymmetric,
        Error::IndexOutOfRange { .. } => PkStatus::PkIndexOutOfRange,
        Error::Diverged { .. } => PkStatus::PkDiverged,
        Error::InvalidOverlap { .. } => PkStatus::PkInvalidOverlap,
        Error::BadRanks { .. } => PkStatus::PkBadRanks,
        Error::EmptyKernel => PkStatus::PkEmptyKernel,
        Error::LevelCountExceedsKernel { .. } => PkStatus::PkLevelCount,
        Error::QuadratureFailure { .. } => PkStatus::PkQuadratureFailure,
        Error::InvalidParams { .. } => PkStatus::PkInvalidArgument,
        Error::NonFiniteEntry { .. } => PkStatus::PkInvalidArgument,
    }
}

fn fail(err: &Error) -> PkStatus {
    set_error(&err.to_string());
    status_of(err)
}

/// Runs a closure behind a panic guard.
fn guarded(f: impl FnOnce() -> PkStatus) -> PkStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(_) => {
            set_error("internal panic");
            PkStatus::PkInternalPanic
        }
    }
}

/// Message describing the most recent error on this thread. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn pk_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Frees a string returned by this library.
#[no_mangle]
pub unsafe extern "C" fn pk_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

macro_rules! nonnull {
    ($ptr:expr) => {
        match unsafe { $ptr.as_ref() } {
            Some(r) => r,
            None => {
                set_error("null argument");
                return PkStatus::PkNullArgument;
            }
        }
    };
}

macro_rules! out_ptr {
    ($ptr:expr) => {
        match unsafe { $ptr.as_mut() } {
            Some(r) => r,
            None => {
                set_error("null out-pointer");
                return PkStatus::PkNullArgument;
            }
        }
    };
}

/// Builds a seeded random ensemble of projectors: `ranks` holds one rank
/// per projector. Identical seeds give identical sets.
#[no_mangle]
pub unsafe extern "C" fn pk_set_random(
    dim: usize,
    ranks: *const usize,
    n_proj: usize,
    seed: u64,
    out: *mut *mut PkProjectorSet,
) -> PkStatus {
    let out = out_ptr!(out);
    if ranks.is_null() {
        set_error("null ranks");
        return PkStatus::PkNullArgument;
    }
    let ranks = unsafe { std::slice::from_raw_parts(ranks, n_proj) };
    guarded(|| match random_ensemble(dim, n_proj, ranks, seed) {
        Ok(set) => {
            *out = Box::into_raw(Box::new(PkProjectorSet(set)));
            PkStatus::PkOk
        }
        Err(e) => fail(&e),
    })
}

/// Three rank-1 projectors with exact pairwise overlap `c`.
#[no_mangle]
pub unsafe extern "C" fn pk_set_equal_overlap(
    dim: usize,
    c: f64,
    out: *mut *mut PkProjectorSet,
) -> PkStatus {
    let out = out_ptr!(out);
    guarded(|| match equal_overlap_triple(dim, c) {
        Ok(set) => {
            *out = Box::into_raw(Box::new(PkProjectorSet(set)));
            PkStatus::PkOk
        }
        Err(e) => fail(&e),
    })
}

/// Parses the projector-set JSON schema
/// `{"dim": n, "projectors": [{"span": [[..], ..]}, ..]}`.
#[no_mangle]
pub unsafe extern "C" fn pk_set_from_json(
    json: *const c_char,
    out: *mut *mut PkProjectorSet,
) -> PkStatus {
    let out = out_ptr!(out);
    if json.is_null() {
        set_error("null json");
        return PkStatus::PkNullArgument;
    }
    let text = match unsafe { CStr::from_ptr(json) }.to_str() {
        Ok(t) => t,
        Err(_) => {
            set_error("json is not valid UTF-8");
            return PkStatus::PkUtf8Error;
        }
    };
    guarded(|| match serde_json::from_str::<ProjectorSet>(text) {
        Ok(set) => {
            *out = Box::into_raw(Box::new(PkProjectorSet(set)));
            PkStatus::PkOk
        }
        Err(e) => {
            set_error(&e.to_string());
            PkStatus::PkJsonError
        }
    })
}

/// Serializes a set to its JSON schema; free the string with
/// `pk_string_free`.
#[no_mangle]
pub unsafe extern "C" fn pk_set_to_json(
    set: *const PkProjectorSet,
    out: *mut *mut c_char,
) -> PkStatus {
    let set = nonnull!(set);
    let out = out_ptr!(out);
    guarded(|| {
        let text = serde_json::to_string(&set.0).expect("schema serializes");
        *out = CString::new(text).expect("no interior NUL").into_raw();
        PkStatus::PkOk
    })
}

#[no_mangle]
pub unsafe extern "C" fn pk_set_free(set: *mut PkProjectorSet) {
    if !set.is_null() {
        drop(unsafe { Box::from_raw(set) });
    }
}

/// Basis dimension, or 0 for a null handle.
#[no_mangle]
pub unsafe extern "C" fn pk_set_dim(set: *const PkProjectorSet) -> usize {
    unsafe { set.as_ref() }.map_or(0, |s| s.0.dim())
}

/// Number of projectors, or 0 for a null handle.
#[no_mangle]
pub unsafe extern "C" fn pk_set_count(set: *const PkProjectorSet) -> usize {
    unsafe { set.as_ref() }.map_or(0, |s| s.0.len())
}

/// Rank of one member.
#[no_mangle]
pub unsafe extern "C" fn pk_set_rank(
    set: *const PkProjectorSet,
    index: usize,
    out: *mut usize,
) -> PkStatus {
    let set = nonnull!(set);
    let out = out_ptr!(out);
    match set.0.get(index) {
        Some(p) => {
            *out = p.rank();
            PkStatus::PkOk
        }
        None => {
            set_error("projector index out of range");
            PkStatus::PkIndexOutOfRange
        }
    }
}

/// Ascending spectrum of the projector sum. `out` must hold `dim` values.
#[no_mangle]
pub unsafe extern "C" fn pk_sum_spectrum(
    set: *const PkProjectorSet,
    out: *mut f64,
    out_len: usize,
) -> PkStatus {
    let set = nonnull!(set);
    if out.is_null() {
        set_error("null out buffer");
        return PkStatus::PkNullArgument;
    }
    if out_len < set.0.dim() {
        set_error("out buffer shorter than dim");
        return PkStatus::PkDimMismatch;
    }
    let out = unsafe { std::slice::from_raw_parts_mut(out, set.0.dim()) };
    guarded(|| match hermitian_eig(&sum_projector(&set.0)) {
        Ok(eig) => {
            out.copy_from_slice(&eig.eigenvalues);
            PkStatus::PkOk
        }
        Err(e) => fail(&e),
    })
}

/// Dimension of the allowed subspace `ker P` at the given eigenvalue
/// cutoff.
#[no_mangle]
pub unsafe extern "C" fn pk_kernel_dim(
    set: *const PkProjectorSet,
    threshold: f64,
    out: *mut usize,
) -> PkStatus {
    let set = nonnull!(set);
    let out = out_ptr!(out);
    guarded(|| {
        *out = kernel_basis(&set.0, threshold).kernel_dim();
        PkStatus::PkOk
    })
}

/// The complete projector, defined spectrally; always exists.
#[no_mangle]
pub unsafe extern "C" fn pk_complete_projector(
    set: *const PkProjectorSet,
    threshold: f64,
    out: *mut *mut PkOperator,
) -> PkStatus {
    let set = nonnull!(set);
    let out = out_ptr!(out);
    guarded(|| {
        let complete = complete_projector(&set.0, threshold);
        *out = Box::into_raw(Box::new(PkOperator(complete.op().clone())));
        PkStatus::PkOk
    })
}

/// `1 - (1-P)^m` with a Frobenius-norm guard; fails with `PkDiverged`
/// once the spectrum of `P` reaches 2 and the powers blow up.
#[no_mangle]
pub unsafe extern "C" fn pk_power_limit(
    set: *const PkProjectorSet,
    m: u64,
    guard: f64,
    out: *mut *mut PkOperator,
) -> PkStatus {
    let set = nonnull!(set);
    let out = out_ptr!(out);
    guarded(|| match power_limit(&set.0, m, guard) {
        Ok(op) => {
            *out = Box::into_raw(Box::new(PkOperator(op)));
            PkStatus::PkOk
        }
        Err(e) => fail(&e),
    })
}

/// Frobenius residual of the order-`m` expansion identity.
#[no_mangle]
pub unsafe extern "C" fn pk_expansion_residual(
    set: *const PkProjectorSet,
    m: u32,
    out: *mut f64,
) -> PkStatus {
    let set = nonnull!(set);
    let out = out_ptr!(out);
    guarded(|| {
        *out = verify_expansion_identity(&set.0, m).residual;
        PkStatus::PkOk
    })
}

/// Kernel comparison between `P` and the complete projector: dimensions
/// from both routes and the worst cross-residual.
#[no_mangle]
pub unsafe extern "C" fn pk_kernel_identity_check(
    set: *const PkProjectorSet,
    threshold: f64,
    out_kernel_dim_sum: *mut usize,
    out_kernel_dim_complete: *mut usize,
    out_max_residual: *mut f64,
) -> PkStatus {
    let set = nonnull!(set);
    let dim_p = out_ptr!(out_kernel_dim_sum);
    let dim_complete = out_ptr!(out_kernel_dim_complete);
    let max_residual = out_ptr!(out_max_residual);
    guarded(|| {
        let report = verify_kernel_identity(&set.0, threshold);
        *dim_p = report.kernel_dim_sum;
        *dim_complete = report.kernel_dim_complete;
        *max_residual = report
            .complete_on_sum_kernel
            .max(report.sum_on_complete_kernel);
        PkStatus::PkOk
    })
}

/// Worst absorption residual over the family: each member satisfies
/// `P_i G = G P_i = P_i` with `G` the complete projector.
#[no_mangle]
pub unsafe extern "C" fn pk_commutation_max_residual(
    set: *const PkProjectorSet,
    threshold: f64,
    out: *mut f64,
) -> PkStatus {
    let set = nonnull!(set);
    let out = out_ptr!(out);
    guarded(|| {
        *out = commutation_check(&set.0, threshold).max_residual;
        PkStatus::PkOk
    })
}

/// Dimension of an operator handle, or 0 for null.
#[no_mangle]
pub unsafe extern "C" fn pk_operator_dim(op: *const PkOperator) -> usize {
    unsafe { op.as_ref() }.map_or(0, |o| o.0.dim())
}

/// Copies the entries row-major into `out` (`dim * dim` values).
#[no_mangle]
pub unsafe extern "C" fn pk_operator_entries(
    op: *const PkOperator,
    out: *mut f64,
    out_len: usize,
) -> PkStatus {
    let op = nonnull!(op);
    if out.is_null() {
        set_error("null out buffer");
        return PkStatus::PkNullArgument;
    }
    let dim = op.0.dim();
    if out_len < dim * dim {
        set_error("out buffer shorter than dim * dim");
        return PkStatus::PkDimMismatch;
    }
    let out = unsafe { std::slice::from_raw_parts_mut(out, dim * dim) };
    for i in 0..dim {
        for j in 0..dim {
            out[i * dim + j] = op.0.matrix()[(i, j)];
        }
    }
    PkStatus::PkOk
}

#[no_mangle]
pub unsafe extern "C" fn pk_operator_free(op: *mut PkOperator) {
    if !op.is_null() {
        drop(unsafe { Box::from_raw(op) });
    }
}

/// Builds the three-identical-particle toy model. `fs` lists the
/// forbidden states carried by every pair.
#[no_mangle]
pub unsafe extern "C" fn pk_toy_build(
    nmax: usize,
    fs: *const PkForbiddenState,
    fs_len: usize,
    rotation_cos: f64,
    depth: f64,
    range: f64,
    out: *mut *mut PkToyModel,
) -> PkStatus {
    let out = out_ptr!(out);
    if fs.is_null() {
        set_error("null fs");
        return PkStatus::PkNullArgument;
    }
    let fs = unsafe { std::slice::from_raw_parts(fs, fs_len) };
    let fs: Vec<ForbiddenState> = fs
        .iter()
        .map(|f| match f {
            PkForbiddenState::PkFs0S => ForbiddenState::ZeroS,
            PkForbiddenState::PkFs2S => ForbiddenState::TwoS,
        })
        .collect();
    let params = ToyModelParams {
        nmax,
        fs,
        rotation_cos,
        potential_depth: depth,
        potential_range: range,
        oscillator_length: 1.0,
    };
    guarded(|| match build_three_body_toy(&params) {
        Ok(toy) => {
            *out = Box::into_raw(Box::new(PkToyModel(toy)));
            PkStatus::PkOk
        }
        Err(e) => fail(&e),
    })
}

/// Clones the model's projector set into a standalone handle.
#[no_mangle]
pub unsafe extern "C" fn pk_toy_set(
    toy: *const PkToyModel,
    out: *mut *mut PkProjectorSet,
) -> PkStatus {
    let toy = nonnull!(toy);
    let out = out_ptr!(out);
    *out = Box::into_raw(Box::new(PkProjectorSet(toy.0.set.clone())));
    PkStatus::PkOk
}

/// Clones the model's Hamiltonian into a standalone handle.
#[no_mangle]
pub unsafe extern "C" fn pk_toy_hamiltonian(
    toy: *const PkToyModel,
    out: *mut *mut PkOperator,
) -> PkStatus {
    let toy = nonnull!(toy);
    let out = out_ptr!(out);
    *out = Box::into_raw(Box::new(PkOperator(toy.0.hamiltonian.clone())));
    PkStatus::PkOk
}

/// Basis size of the model.
#[no_mangle]
pub unsafe extern "C" fn pk_toy_dim(toy: *const PkToyModel) -> usize {
    unsafe { toy.as_ref() }.map_or(0, |t| t.0.set.dim())
}

#[no_mangle]
pub unsafe extern "C" fn pk_toy_free(toy: *mut PkToyModel) {
    if !toy.is_null() {
        drop(unsafe { Box::from_raw(toy) });
    }
}

/// Pseudopotential sweep: fills `out_energies` (`n_lambda * levels`,
/// row-major by grid point), `out_projected` (`levels`) and `out_slopes`
/// (`levels`; NaN when a level has no measurable tail).
#[no_mangle]
pub unsafe extern "C" fn pk_opp_sweep(
    h: *const PkOperator,
    set: *const PkProjectorSet,
    lambdas: *const f64,
    n_lambda: usize,
    levels: usize,
    threshold: f64,
    out_energies: *mut f64,
    out_projected: *mut f64,
    out_slopes: *mut f64,
) -> PkStatus {
    let h = nonnull!(h);
    let set = nonnull!(set);
    if lambdas.is_null()
        || out_energies.is_null()
        || out_projected.is_null()
        || out_slopes.is_null()
    {
        set_error("null buffer");
        return PkStatus::PkNullArgument;
    }
    let grid = unsafe { std::slice::from_raw_parts(lambdas, n_lambda) };
    let energies = unsafe { std::slice::from_raw_parts_mut(out_energies, n_lambda * levels) };
    let projected = unsafe { std::slice::from_raw_parts_mut(out_projected, levels) };
    let slopes = unsafe { std::slice::from_raw_parts_mut(out_slopes, levels) };
    guarded(
        || match lambda_sweep(&h.0, &set.0, grid, levels, threshold) {
            Ok(sweep) => {
                for (i, row) in sweep.energies.iter().enumerate() {
                    energies[i * levels..(i + 1) * levels].copy_from_slice(row);
                }
                projected.copy_from_slice(&sweep.projected_energies);
                for (k, slope) in sweep.slopes.iter().enumerate() {
                    slopes[k] = slope.unwrap_or(f64::NAN);
                }
                PkStatus::PkOk
            }
            Err(e) => fail(&e),
        },
    )
}
