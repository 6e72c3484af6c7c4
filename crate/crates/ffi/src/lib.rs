//! C ABI for `smoothclust`.
//!
//! Matrices and affinity graphs cross the boundary as opaque handles that
//! the caller releases with the matching `*_free` function. Dense data is
//! exchanged as row-major `double` arrays. Every fallible function returns
//! an [`SmcStatus`]; on failure a description is available from
//! [`smc_last_error_message`] on the same thread until the next call.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use smoothclust::graph::{knn_affinity, normalized_laplacian, AffinityMatrix, GraphFilter};
use smoothclust::metrics::{accuracy, nmi, purity};
use smoothclust::numerics::SeededRng;
use smoothclust::selfexpress::{
    lsr_affinity, run_flsr, run_ftrr, FilterSource, FitOutcome, IterationConfig, LsrConfig,
    TrrConfig, DEFAULT_EPSILON, DEFAULT_MAX_ITER,
};
use smoothclust::spectral::{cluster, SpectralConfig};
use smoothclust::{Error, FeatureMatrix};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SmcStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullPointer = 1,
    /// A parameter was out of range or inconsistent with the inputs.
    InvalidArgument = 2,
    /// Inputs broke a structural precondition (shape, symmetry, sign).
    ContractViolation = 3,
    /// A factorization or eigensolver failed.
    Numerical = 4,
    Io = 5,
    Parse = 6,
    /// An internal panic was caught at the boundary.
    Panic = 7,
}

/// Row-per-sample feature matrix.
pub struct SmcMatrix {
    inner: FeatureMatrix,
}

/// Symmetric nonnegative affinity graph.
pub struct SmcAffinity {
    inner: AffinityMatrix,
}

/// Settings for `smc_run_flsr` and `smc_run_ftrr`.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmcFitOptions {
    pub alpha: f64,
    /// Filter order.
    pub k: u32,
    /// Entries kept per affinity row; used by FTRR only.
    pub p: usize,
    pub epsilon: f64,
    pub max_iter: usize,
    /// Filter the previous representation instead of the raw features.
    pub filter_previous: bool,
    pub zero_diag: bool,
}

/// Convergence information of a fit.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SmcFitSummary {
    pub iterations: usize,
    pub converged: bool,
    pub final_residual: f64,
}

struct Failure {
    status: SmcStatus,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::Usage(_) | Error::Parameter(_) => SmcStatus::InvalidArgument,
            Error::Contract(_) => SmcStatus::ContractViolation,
            Error::Numerical(_) => SmcStatus::Numerical,
            Error::Io { .. } => SmcStatus::Io,
            Error::Parse { .. } => SmcStatus::Parse,
        };
        Failure {
            status,
            message: e.to_string(),
        }
    }
}

fn invalid(message: impl Into<String>) -> Failure {
    Failure {
        status: SmcStatus::InvalidArgument,
        message: message.into(),
    }
}

fn null(what: &str) -> Failure {
    Failure {
        status: SmcStatus::NullPointer,
        message: format!("{what} is null"),
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(message: Option<String>) {
    let c = message.map(|m| CString::new(m.replace('\0', " ")).expect("interior NULs removed"));
    LAST_ERROR.with(|slot| *slot.borrow_mut() = c);
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> SmcStatus {
    set_last_error(None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SmcStatus::Ok,
        Ok(Err(failure)) => {
            set_last_error(Some(failure.message));
            failure.status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(Some(format!("internal panic: {msg}")));
            SmcStatus::Panic
        }
    }
}

unsafe fn borrow<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn slice<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn slice_mut<'a, T>(p: *mut T, len: usize, what: &str) -> Result<&'a mut [T], Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts_mut(p, len))
}

fn check_out<T>(out: *mut *mut T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null("out"));
    }
    Ok(())
}

unsafe fn emit<T>(out: *mut *mut T, value: T) {
    *out = Box::into_raw(Box::new(value));
}

fn checked_len(rows: usize, cols: usize) -> Result<usize, Failure> {
    rows.checked_mul(cols)
        .ok_or_else(|| invalid(format!("{rows} x {cols} overflows")))
}

fn copy_row_major(m: &FeatureMatrix, out: &mut [f64]) {
    for (i, row) in m.row_iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            out[i * m.ncols() + j] = *v;
        }
    }
}

/// Description of the last failure on this thread, or null.
///
/// The pointer stays valid until the next call into this library from the
/// same thread.
#[no_mangle]
pub extern "C" fn smc_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn smc_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Copies a row-major `rows x cols` array into a new matrix handle.
///
/// # Safety
/// `data` must point to `rows * cols` readable doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn smc_matrix_new(
    data: *const f64,
    rows: usize,
    cols: usize,
    out: *mut *mut SmcMatrix,
) -> SmcStatus {
    guard(|| {
        check_out(out)?;
        if rows == 0 || cols == 0 {
            return Err(invalid("matrix dimensions must be positive"));
        }
        let values = slice(data, checked_len(rows, cols)?, "data")?;
        if values.iter().any(|v| !v.is_finite()) {
            return Err(invalid("matrix contains non-finite values"));
        }
        emit(
            out,
            SmcMatrix {
                inner: FeatureMatrix::from_row_slice(rows, cols, values),
            },
        );
        Ok(())
    })
}

/// Releases a matrix handle; null is ignored.
///
/// # Safety
/// `m` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn smc_matrix_free(m: *mut SmcMatrix) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// Row count, or 0 for null.
///
/// # Safety
/// `m` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn smc_matrix_rows(m: *const SmcMatrix) -> usize {
    m.as_ref().map_or(0, |m| m.inner.nrows())
}

/// Column count, or 0 for null.
///
/// # Safety
/// `m` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn smc_matrix_cols(m: *const SmcMatrix) -> usize {
    m.as_ref().map_or(0, |m| m.inner.ncols())
}

/// Writes the matrix row-major into `out`, which holds `len` doubles.
///
/// # Safety
/// `m` must be a live handle and `out` must hold `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn smc_matrix_copy(m: *const SmcMatrix, out: *mut f64, len: usize) -> SmcStatus {
    guard(|| {
        let m = borrow(m, "matrix")?;
        if len != m.inner.len() {
            return Err(invalid(format!("buffer holds {len} values, matrix has {}", m.inner.len())));
        }
        copy_row_major(&m.inner, slice_mut(out, len, "out")?);
        Ok(())
    })
}

/// Builds an affinity graph from a row-major `n x n` weight array.
///
/// # Safety
/// `weights` must point to `n * n` readable doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn smc_affinity_new(
    weights: *const f64,
    n: usize,
    out: *mut *mut SmcAffinity,
) -> SmcStatus {
    guard(|| {
        check_out(out)?;
        if n == 0 {
            return Err(invalid("affinity must have at least one node"));
        }
        let values = slice(weights, checked_len(n, n)?, "weights")?;
        let inner = AffinityMatrix::new(FeatureMatrix::from_row_slice(n, n, values))?;
        emit(out, SmcAffinity { inner });
        Ok(())
    })
}

/// Releases an affinity handle; null is ignored.
///
/// # Safety
/// `w` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn smc_affinity_free(w: *mut SmcAffinity) {
    if !w.is_null() {
        drop(Box::from_raw(w));
    }
}

/// Node count, or 0 for null.
///
/// # Safety
/// `w` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn smc_affinity_size(w: *const SmcAffinity) -> usize {
    w.as_ref().map_or(0, |w| w.inner.n())
}

/// Writes the `n x n` weights row-major into `out`, which holds `len` doubles.
///
/// # Safety
/// `w` must be a live handle and `out` must hold `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn smc_affinity_copy(w: *const SmcAffinity, out: *mut f64, len: usize) -> SmcStatus {
    guard(|| {
        let w = borrow(w, "affinity")?;
        let weights = w.inner.weights();
        if len != weights.len() {
            return Err(invalid(format!("buffer holds {len} values, graph has {}", weights.len())));
        }
        copy_row_major(weights, slice_mut(out, len, "out")?);
        Ok(())
    })
}

/// Gaussian kNN graph over the rows of `x`.
///
/// # Safety
/// `x` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn smc_knn_affinity(
    x: *const SmcMatrix,
    neighbors: usize,
    out: *mut *mut SmcAffinity,
) -> SmcStatus {
    guard(|| {
        check_out(out)?;
        let x = borrow(x, "x")?;
        let inner = knn_affinity(&x.inner, neighbors)?;
        emit(out, SmcAffinity { inner });
        Ok(())
    })
}

/// Applies `(I - L/2)^k` on the graph `w` to every column of `x`.
///
/// # Safety
/// `w` and `x` must be live handles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn smc_filter(
    w: *const SmcAffinity,
    x: *const SmcMatrix,
    k: u32,
    out: *mut *mut SmcMatrix,
) -> SmcStatus {
    guard(|| {
        check_out(out)?;
        let w = borrow(w, "affinity")?;
        let x = borrow(x, "x")?;
        let filtered = GraphFilter::new(k, normalized_laplacian(&w.inner)).apply(&x.inner)?;
        emit(out, SmcMatrix { inner: filtered });
        Ok(())
    })
}

/// One-shot LSR affinity `(|Z| + |Z^T|) / 2`.
///
/// # Safety
/// `x` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn smc_lsr_affinity(
    x: *const SmcMatrix,
    alpha: f64,
    out: *mut *mut SmcAffinity,
) -> SmcStatus {
    guard(|| {
        check_out(out)?;
        let x = borrow(x, "x")?;
        let inner = lsr_affinity(&x.inner, &LsrConfig::new(alpha))?;
        emit(out, SmcAffinity { inner });
        Ok(())
    })
}

/// alpha 0.01, k 1, p 0 (must be set for FTRR), default stopping rule.
#[no_mangle]
pub extern "C" fn smc_fit_options_default() -> SmcFitOptions {
    SmcFitOptions {
        alpha: 0.01,
        k: 1,
        p: 0,
        epsilon: DEFAULT_EPSILON,
        max_iter: DEFAULT_MAX_ITER,
        filter_previous: false,
        zero_diag: false,
    }
}

fn iteration_config(o: &SmcFitOptions) -> IterationConfig {
    IterationConfig {
        filter_order: o.k,
        epsilon: o.epsilon,
        max_iter: o.max_iter,
        source: if o.filter_previous {
            FilterSource::Previous
        } else {
            FilterSource::Raw
        },
    }
}

fn lsr_config(o: &SmcFitOptions) -> LsrConfig {
    LsrConfig {
        alpha: o.alpha,
        zero_diag: o.zero_diag,
    }
}

unsafe fn finish_fit(fit: FitOutcome, out: *mut *mut SmcAffinity, summary: *mut SmcFitSummary) {
    if let Some(s) = summary.as_mut() {
        *s = SmcFitSummary {
            iterations: fit.trace.iterations(),
            converged: fit.trace.converged,
            final_residual: fit.trace.final_residual().unwrap_or(f64::NAN),
        };
    }
    emit(out, SmcAffinity { inner: fit.affinity });
}

/// Alternating graph filtering and LSR until the affinity settles.
///
/// # Safety
/// `x` and `options` must be valid; `out` must be writable; `summary` may be null.
#[no_mangle]
pub unsafe extern "C" fn smc_run_flsr(
    x: *const SmcMatrix,
    options: *const SmcFitOptions,
    out: *mut *mut SmcAffinity,
    summary: *mut SmcFitSummary,
) -> SmcStatus {
    guard(|| {
        check_out(out)?;
        let x = borrow(x, "x")?;
        let o = borrow(options, "options")?;
        let fit = run_flsr(&x.inner, &lsr_config(o), &iteration_config(o))?;
        finish_fit(fit, out, summary);
        Ok(())
    })
}

/// `smc_run_flsr` followed by keeping the `p` largest entries per row.
///
/// # Safety
/// `x` and `options` must be valid; `out` must be writable; `summary` may be null.
#[no_mangle]
pub unsafe extern "C" fn smc_run_ftrr(
    x: *const SmcMatrix,
    options: *const SmcFitOptions,
    out: *mut *mut SmcAffinity,
    summary: *mut SmcFitSummary,
) -> SmcStatus {
    guard(|| {
        check_out(out)?;
        let x = borrow(x, "x")?;
        let o = borrow(options, "options")?;
        let trr = TrrConfig {
            base: lsr_config(o),
            p: o.p,
        };
        let fit = run_ftrr(&x.inner, &trr, &iteration_config(o))?;
        finish_fit(fit, out, summary);
        Ok(())
    })
}

/// Spectral clustering of `w` into `g` groups; writes `len == n` labels.
///
/// # Safety
/// `w` must be a live handle and `labels` must hold `len` writable entries.
#[no_mangle]
pub unsafe extern "C" fn smc_cluster(
    w: *const SmcAffinity,
    g: usize,
    seed: u64,
    restarts: usize,
    labels: *mut usize,
    len: usize,
) -> SmcStatus {
    guard(|| {
        let w = borrow(w, "affinity")?;
        if len != w.inner.n() {
            return Err(invalid(format!("label buffer holds {len}, graph has {} nodes", w.inner.n())));
        }
        let out = slice_mut(labels, len, "labels")?;
        let assignment = cluster(
            &w.inner,
            g,
            &mut SeededRng::new(seed),
            &SpectralConfig::with_restarts(restarts),
        )?;
        out.copy_from_slice(assignment.labels());
        Ok(())
    })
}

type Metric = fn(&[usize], &[usize]) -> smoothclust::Result<f64>;

unsafe fn score(metric: Metric, pred: *const usize, truth: *const usize, n: usize, out: *mut f64) -> SmcStatus {
    guard(|| {
        let pred = slice(pred, n, "pred")?;
        let truth = slice(truth, n, "truth")?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = metric(pred, truth)?;
        Ok(())
    })
}

/// Clustering accuracy under the best one-to-one label mapping.
///
/// # Safety
/// `pred` and `truth` must hold `n` entries; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn smc_accuracy(pred: *const usize, truth: *const usize, n: usize, out: *mut f64) -> SmcStatus {
    score(accuracy, pred, truth, n, out)
}

/// Normalized mutual information.
///
/// # Safety
/// `pred` and `truth` must hold `n` entries; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn smc_nmi(pred: *const usize, truth: *const usize, n: usize, out: *mut f64) -> SmcStatus {
    score(nmi, pred, truth, n, out)
}

/// Purity.
///
/// # Safety
/// `pred` and `truth` must hold `n` entries; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn smc_purity(pred: *const usize, truth: *const usize, n: usize, out: *mut f64) -> SmcStatus {
    score(purity, pred, truth, n, out)
}
