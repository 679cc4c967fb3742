//! C interface to `sparse-ctrl`.
//!
//! Families and systems are opaque heap handles created by `scl_*_new`-style
//! functions and released with the matching `*_free`. Every fallible call
//! returns an [`SclStatus`]; on failure the message is available from
//! [`scl_last_error`] on the same thread until the next failing call.
//! Node indices crossing this boundary are 0-based.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use nalgebra::DMatrix;
use sparse_ctrl::bounds::{bound, BoundModel, BoundParams};
use sparse_ctrl::control::{is_sparse_controllable, ConditionBStrategy, LinearSystem};
use sparse_ctrl::linalg::RankPolicy;
use sparse_ctrl::graphs::{row_normalize, sample_weight_vector, WeightDist};
use sparse_ctrl::montecarlo::{estimate_probability, trial_rng, ExperimentConfig, GraphModel};
use sparse_ctrl::sparsity::{count_subsets_q, Support, SupportFamily};
use sparse_ctrl::CoreError;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SclStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidParameter = 2,
    Capacity = 3,
    Numerical = 4,
    ModelAssumption = 5,
    MatchingFailed = 6,
    Parse = 7,
    Io = 8,
    BufferTooSmall = 9,
    Panic = 10,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SclFamilyKind {
    Unconstrained = 0,
    Piecewise = 1,
    Block = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SclGraphModel {
    ErUndirected = 0,
    ErDirected = 1,
    PowerLaw = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SclStrategy {
    Auto = 0,
    Exhaustive = 1,
    UnconstrainedShortcut = 2,
    Sampled = 3,
}

/// Admissible support family.
pub struct SclFamily {
    inner: SupportFamily,
}

/// State matrix of a system with identity input matrix.
pub struct SclSystem {
    inner: LinearSystem,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SclVerdict {
    pub controllable: bool,
    pub cond_a: bool,
    pub cond_b: bool,
    /// A sampled search found no witness; not a proof of failure.
    pub inconclusive: bool,
    /// Length of the witness support, 0 when there is none.
    pub witness_len: usize,
    /// Smallest singular value over the eigenvalue tests, NaN if none ran.
    pub min_eigen_margin: f64,
    /// Smallest singular value certifying the witness, NaN if none.
    pub cond_b_margin: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SclBound {
    pub q: f64,
    pub raw_q: f64,
    pub valid: bool,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SclEstimate {
    pub controllable_count: usize,
    pub trials: usize,
    pub p_hat: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &CoreError) -> SclStatus {
    match e {
        CoreError::InvalidParameter(_) => SclStatus::InvalidParameter,
        CoreError::Capacity(_) => SclStatus::Capacity,
        CoreError::Numerical(_) => SclStatus::Numerical,
        CoreError::ModelAssumption(_) => SclStatus::ModelAssumption,
        CoreError::MatchingFailed { .. } => SclStatus::MatchingFailed,
        CoreError::Parse { .. } => SclStatus::Parse,
        CoreError::Io(_) => SclStatus::Io,
    }
}

fn fail(status: SclStatus, msg: impl Into<String>) -> SclStatus {
    set_error(msg.into());
    status
}

/// Runs `f`, translating errors and panics into status codes.
fn guard<F: FnOnce() -> Result<(), SclStatus>>(f: F) -> SclStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SclStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => fail(SclStatus::Panic, "internal panic"),
    }
}

fn core<T>(r: sparse_ctrl::Result<T>) -> Result<T, SclStatus> {
    r.map_err(|e| fail(status_of(&e), e.to_string()))
}

fn non_null<T>(p: *const T, name: &str) -> Result<(), SclStatus> {
    if p.is_null() {
        Err(fail(SclStatus::NullPointer, format!("{name} is null")))
    } else {
        Ok(())
    }
}

fn into_handle<T>(value: T, out: *mut *mut T) {
    // SAFETY: callers check `out` for null first.
    unsafe { *out = Box::into_raw(Box::new(value)) };
}

/// Message of the last failed call on this thread, or null. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn scl_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Creates a structured family. `m` is the piece count or block length and is
/// ignored for unconstrained families.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn scl_family_new(
    kind: SclFamilyKind,
    n: usize,
    s: usize,
    m: usize,
    out: *mut *mut SclFamily,
) -> SclStatus {
    guard(|| {
        non_null(out, "out")?;
        let inner = core(match kind {
            SclFamilyKind::Unconstrained => SupportFamily::unconstrained(n, s),
            SclFamilyKind::Piecewise => SupportFamily::piecewise(n, s, m),
            SclFamilyKind::Block => SupportFamily::block(n, s, m),
        })?;
        into_handle(SclFamily { inner }, out);
        Ok(())
    })
}

/// Creates an explicit family from `count` sets of `s` 0-based indices each,
/// stored contiguously in `indices`.
///
/// # Safety
/// `indices` must point to `count * s` readable values and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn scl_family_explicit(
    n: usize,
    s: usize,
    indices: *const usize,
    count: usize,
    out: *mut *mut SclFamily,
) -> SclStatus {
    guard(|| {
        non_null(out, "out")?;
        non_null(indices, "indices")?;
        let total = count
            .checked_mul(s)
            .ok_or_else(|| fail(SclStatus::InvalidParameter, "count * s overflows"))?;
        let flat = slice::from_raw_parts(indices, total);
        let sets = flat
            .chunks(s.max(1))
            .map(|c| Support::new(c.to_vec(), n))
            .collect::<sparse_ctrl::Result<Vec<_>>>();
        let inner = core(sets.and_then(|sets| SupportFamily::explicit(n, s, sets)))?;
        into_handle(SclFamily { inner }, out);
        Ok(())
    })
}

/// # Safety
/// `family` must be null or a handle from this library that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn scl_family_free(family: *mut SclFamily) {
    if !family.is_null() {
        drop(Box::from_raw(family));
    }
}

/// Number of members.
///
/// # Safety
/// `family` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn scl_family_size(family: *const SclFamily, out: *mut u64) -> SclStatus {
    guard(|| {
        non_null(family, "family")?;
        non_null(out, "out")?;
        let size = core((*family).inner.size())?;
        *out = u64::try_from(size).map_err(|_| fail(SclStatus::Capacity, "family size exceeds 64 bits"))?;
        Ok(())
    })
}

/// Number of distinct `t`-subsets of members.
///
/// # Safety
/// `family` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn scl_family_q(family: *const SclFamily, t: usize, out: *mut u64) -> SclStatus {
    guard(|| {
        non_null(family, "family")?;
        non_null(out, "out")?;
        let q = core(count_subsets_q(t, &(*family).inner))?;
        *out = u64::try_from(q).map_err(|_| fail(SclStatus::Capacity, "Q exceeds 64 bits"))?;
        Ok(())
    })
}

/// Wraps an `n × n` row-major state matrix.
///
/// # Safety
/// `phi` must point to `n * n` readable values and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn scl_system_from_dense(n: usize, phi: *const f64, out: *mut *mut SclSystem) -> SclStatus {
    guard(|| {
        non_null(out, "out")?;
        non_null(phi, "phi")?;
        let len = n
            .checked_mul(n)
            .ok_or_else(|| fail(SclStatus::InvalidParameter, "n * n overflows"))?;
        let m = DMatrix::from_row_slice(n, n, slice::from_raw_parts(phi, len));
        let inner = core(LinearSystem::with_identity_input(m))?;
        into_handle(SclSystem { inner }, out);
        Ok(())
    })
}

/// Samples a graph with uniform node weights and wraps its row-normalized
/// matrix. `param` is `p` for the ER models and the exponent for power law.
/// The draw matches trial `trial_index` of an experiment seeded with `seed`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn scl_system_sample(
    model: SclGraphModel,
    n: usize,
    param: f64,
    seed: u64,
    trial_index: usize,
    out: *mut *mut SclSystem,
) -> SclStatus {
    guard(|| {
        non_null(out, "out")?;
        let mut rng = trial_rng(seed, trial_index as u64);
        let adj = core(graph_model(model, param).sample_adjacency(n, 100, &mut rng))?;
        let w = sample_weight_vector(n, WeightDist::Uniform, &mut rng);
        let sys = core(row_normalize(&adj, &w))?;
        let inner = core(LinearSystem::with_identity_input(sys.a_bar))?;
        into_handle(SclSystem { inner }, out);
        Ok(())
    })
}

/// # Safety
/// `system` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn scl_system_free(system: *mut SclSystem) {
    if !system.is_null() {
        drop(Box::from_raw(system));
    }
}

/// State dimension, 0 for a null handle.
///
/// # Safety
/// `system` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn scl_system_dim(system: *const SclSystem) -> usize {
    if system.is_null() {
        0
    } else {
        (*system).inner.n()
    }
}

/// Copies the state matrix row-major into `buf`, which holds `len` values.
///
/// # Safety
/// `system` must be a live handle and `buf` must have room for `len` values.
#[no_mangle]
pub unsafe extern "C" fn scl_system_matrix(system: *const SclSystem, buf: *mut f64, len: usize) -> SclStatus {
    guard(|| {
        non_null(system, "system")?;
        non_null(buf, "buf")?;
        let phi = (*system).inner.phi();
        let n = phi.nrows();
        if len < n * n {
            return Err(fail(SclStatus::BufferTooSmall, format!("need {} values, got {len}", n * n)));
        }
        let out = slice::from_raw_parts_mut(buf, n * n);
        for i in 0..n {
            for j in 0..n {
                out[i * n + j] = phi[(i, j)];
            }
        }
        Ok(())
    })
}

fn graph_model(model: SclGraphModel, param: f64) -> GraphModel {
    match model {
        SclGraphModel::ErUndirected => GraphModel::ErUndirected { p: param },
        SclGraphModel::ErDirected => GraphModel::ErDirected { p: param },
        SclGraphModel::PowerLaw => GraphModel::power_law(param),
    }
}

fn strategy(kind: SclStrategy, draws: usize, seed: u64) -> ConditionBStrategy {
    match kind {
        SclStrategy::Auto => ConditionBStrategy::Auto,
        SclStrategy::Exhaustive => ConditionBStrategy::Exhaustive,
        SclStrategy::UnconstrainedShortcut => ConditionBStrategy::UnconstrainedShortcut,
        SclStrategy::Sampled => ConditionBStrategy::Sampled { draws, seed },
    }
}

/// Tests sparse controllability. `draws` and `sample_seed` are used only by
/// the sampled strategy. When `witness` is non-null it receives up to
/// `witness_cap` 0-based indices of the witness support; a witness longer than
/// `witness_cap` gives `BufferTooSmall` with `out` still filled in.
///
/// # Safety
/// `system` and `family` must be live handles, `out` writable, and `witness`
/// either null or valid for `witness_cap` writes.
#[no_mangle]
pub unsafe extern "C" fn scl_check(
    system: *const SclSystem,
    family: *const SclFamily,
    kind: SclStrategy,
    draws: usize,
    sample_seed: u64,
    out: *mut SclVerdict,
    witness: *mut usize,
    witness_cap: usize,
) -> SclStatus {
    guard(|| {
        non_null(system, "system")?;
        non_null(family, "family")?;
        non_null(out, "out")?;
        let v = core(is_sparse_controllable(
            &(*system).inner,
            &(*family).inner,
            &RankPolicy::default(),
            strategy(kind, draws, sample_seed),
        ))?;
        let idx = v.witness.as_ref().map(|w| w.indices().to_vec()).unwrap_or_default();
        *out = SclVerdict {
            controllable: v.controllable,
            cond_a: v.cond_a,
            cond_b: v.cond_b,
            inconclusive: v.diagnostics.inconclusive,
            witness_len: idx.len(),
            min_eigen_margin: v
                .diagnostics
                .eigen_margins
                .iter()
                .map(|m| m.sigma_min)
                .reduce(f64::min)
                .unwrap_or(f64::NAN),
            cond_b_margin: v.diagnostics.condition_b_margin.unwrap_or(f64::NAN),
        };
        if !witness.is_null() {
            if idx.len() > witness_cap {
                return Err(fail(
                    SclStatus::BufferTooSmall,
                    format!("witness has {} indices, buffer holds {witness_cap}", idx.len()),
                ));
            }
            slice::from_raw_parts_mut(witness, idx.len()).copy_from_slice(&idx);
        }
        Ok(())
    })
}

/// Probability lower bound; `directed` selects the directed-graph formula.
///
/// # Safety
/// `family` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn scl_bound(
    family: *const SclFamily,
    directed: bool,
    p: f64,
    big_c: f64,
    small_c: f64,
    out: *mut SclBound,
) -> SclStatus {
    guard(|| {
        non_null(family, "family")?;
        non_null(out, "out")?;
        let params = core(BoundParams::new(big_c, small_c))?;
        let model = if directed { BoundModel::Directed } else { BoundModel::Undirected };
        let r = core(bound(model, &(*family).inner, p, &params))?;
        *out = SclBound {
            q: r.q,
            raw_q: r.raw_q,
            valid: r.valid,
        };
        Ok(())
    })
}

/// Monte Carlo estimate of the probability that a random graph of the given
/// model is controllable with the family.
///
/// # Safety
/// `family` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn scl_estimate_probability(
    model: SclGraphModel,
    param: f64,
    family: *const SclFamily,
    trials: usize,
    seed: u64,
    out: *mut SclEstimate,
) -> SclStatus {
    guard(|| {
        non_null(family, "family")?;
        non_null(out, "out")?;
        let config = ExperimentConfig::new(graph_model(model, param), (*family).inner.clone(), seed).with_trials(trials);
        let row = core(estimate_probability(&config))?;
        *out = SclEstimate {
            controllable_count: row.controllable_count,
            trials: row.trials,
            p_hat: row.p_hat,
            ci_low: row.ci_low,
            ci_high: row.ci_high,
        };
        Ok(())
    })
}
