//! C ABI over `ising_parity`.
//!
//! Every fallible function returns an [`IpStatus`] and writes its result
//! through an out-pointer. The message of the most recent failure on the
//! calling thread is available from [`ip_last_error_message`]. Couplings and
//! disorder ensembles are opaque handles released with their `_free`
//! function.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use ising_parity::disorder::{expected_utility, DisorderEnsemble, DisorderKind, PositivityPolicy};
use ising_parity::free_fermion::{ghz_overlap_squared, log_ghz_overlap_squared, CouplingVector};
use ising_parity::parity_game::{
    advantage_density, classical_bound, find_advantage_boundary, quantum_win_probability, utility,
    utility_clean,
};
use ising_parity::perturbation::{
    chi_double_prime, chi_prime, laplacian_u, second_variation_closed_form, CorrelationKind,
    DistanceMode,
};
use ising_parity::Error;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IpStatus {
    Ok = 0,
    InvalidArgument = 1,
    Numerical = 2,
    NullPointer = 3,
    Panic = 4,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IpCorrelation {
    Perfect = 0,
    Iid = 1,
    Exponential = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IpDistance {
    Linear = 0,
    Ring = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IpDisorder {
    GaussianIid = 0,
    GaussianPerfect = 1,
    GaussianCorrelated = 2,
    /// `strength` is the full width W of the uniform distribution.
    UniformIid = 3,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IpPolicy {
    RejectSample = 0,
    RejectRun = 1,
}

/// Opaque coupling vector.
pub struct IpCouplings(CouplingVector);

/// Opaque disorder ensemble.
pub struct IpEnsemble(DisorderEnsemble);

/// Summary statistics of a Monte Carlo run.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct IpMonteCarloSummary {
    pub n_samples: usize,
    pub n_rejected: usize,
    pub sigma: f64,
    pub mean_utility: f64,
    /// Standard error of `mean_utility`.
    pub std_error: f64,
    pub mean_density: f64,
    pub clean_utility: f64,
    pub clean_density: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

fn status_of(error: &Error) -> IpStatus {
    if error.is_configuration() || matches!(error, Error::NonPositiveCoupling { .. }) {
        IpStatus::InvalidArgument
    } else {
        IpStatus::Numerical
    }
}

/// Run `body`, converting errors and panics into status codes.
fn guard(body: impl FnOnce() -> Result<(), (IpStatus, String)>) -> IpStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => IpStatus::Ok,
        Ok(Err((status, message))) => {
            set_last_error(message);
            status
        }
        Err(_) => {
            set_last_error("internal panic".into());
            IpStatus::Panic
        }
    }
}

fn lift<T>(r: ising_parity::Result<T>) -> Result<T, (IpStatus, String)> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

fn null(name: &str) -> (IpStatus, String) {
    (IpStatus::NullPointer, format!("{name} is null"))
}

/// Write a computed scalar to `out`.
fn scalar(out: *mut f64, f: impl FnOnce() -> ising_parity::Result<f64>) -> IpStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let v = lift(f())?;
        unsafe { *out = v };
        Ok(())
    })
}

fn couplings<'a>(handle: *const IpCouplings) -> Result<&'a CouplingVector, (IpStatus, String)> {
    unsafe { handle.as_ref() }.map(|h| &h.0).ok_or_else(|| null("couplings"))
}

fn with_couplings(
    handle: *const IpCouplings,
    out: *mut f64,
    f: impl FnOnce(&CouplingVector) -> ising_parity::Result<f64>,
) -> IpStatus {
    guard(|| {
        let g = couplings(handle)?;
        if out.is_null() {
            return Err(null("out"));
        }
        let v = lift(f(g))?;
        unsafe { *out = v };
        Ok(())
    })
}

fn distance(d: IpDistance) -> DistanceMode {
    match d {
        IpDistance::Linear => DistanceMode::Linear,
        IpDistance::Ring => DistanceMode::Ring,
    }
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn ip_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Copy the last error message of this thread into `buffer`, truncated and
/// NUL-terminated. Returns the full message length in bytes, excluding the
/// terminator, or 0 when there is no error.
///
/// # Safety
/// `buffer` must be valid for `capacity` bytes or null.
#[no_mangle]
pub unsafe extern "C" fn ip_last_error_message(buffer: *mut c_char, capacity: usize) -> usize {
    LAST_ERROR.with(|slot| {
        let slot = slot.borrow();
        let Some(message) = slot.as_ref() else {
            return 0;
        };
        let bytes = message.as_bytes();
        if !buffer.is_null() && capacity > 0 {
            let n = bytes.len().min(capacity - 1);
            std::ptr::copy_nonoverlapping(bytes.as_ptr().cast(), buffer, n);
            *buffer.add(n) = 0;
        }
        bytes.len()
    })
}

/// Create a coupling vector from `len` positive fields.
///
/// # Safety
/// `values` must point to `len` readable doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ip_couplings_new(values: *const f64, len: usize, out: *mut *mut IpCouplings) -> IpStatus {
    guard(|| {
        if values.is_null() {
            return Err(null("values"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let v = std::slice::from_raw_parts(values, len).to_vec();
        let g = lift(CouplingVector::new(v))?;
        *out = Box::into_raw(Box::new(IpCouplings(g)));
        Ok(())
    })
}

/// Create `n_sites` equal fields `g`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ip_couplings_uniform(g: f64, n_sites: usize, out: *mut *mut IpCouplings) -> IpStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let c = lift(CouplingVector::uniform(g, n_sites))?;
        *out = Box::into_raw(Box::new(IpCouplings(c)));
        Ok(())
    })
}

/// Number of sites, 0 for a null handle.
///
/// # Safety
/// `handle` must come from this library or be null.
#[no_mangle]
pub unsafe extern "C" fn ip_couplings_len(handle: *const IpCouplings) -> usize {
    handle.as_ref().map_or(0, |h| h.0.len())
}

/// # Safety
/// `handle` must come from this library, be null, and not be used again.
#[no_mangle]
pub unsafe extern "C" fn ip_couplings_free(handle: *mut IpCouplings) {
    if !handle.is_null() {
        drop(Box::from_raw(handle));
    }
}

/// Squared overlap of the ground state with the GHZ⁺ state.
///
/// # Safety
/// `handle` must come from this library; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ip_ghz_overlap_squared(handle: *const IpCouplings, out: *mut f64) -> IpStatus {
    with_couplings(handle, out, ghz_overlap_squared)
}

/// Natural log of [`ip_ghz_overlap_squared`], finite far below underflow.
///
/// # Safety
/// `handle` must come from this library; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ip_log_ghz_overlap_squared(handle: *const IpCouplings, out: *mut f64) -> IpStatus {
    with_couplings(handle, out, log_ghz_overlap_squared)
}

/// Log-odds utility of the parity game for the given couplings.
///
/// # Safety
/// `handle` must come from this library; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ip_utility(handle: *const IpCouplings, out: *mut f64) -> IpStatus {
    with_couplings(handle, out, utility)
}

/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ip_utility_clean(g: f64, n_sites: usize, out: *mut f64) -> IpStatus {
    scalar(out, || utility_clean(g, n_sites))
}

/// Large-N utility per site.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ip_advantage_density(g: f64, out: *mut f64) -> IpStatus {
    scalar(out, || advantage_density(g))
}

/// Field at which the utility density changes sign.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ip_advantage_boundary(out: *mut f64) -> IpStatus {
    scalar(out, find_advantage_boundary)
}

/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ip_classical_bound(n_players: usize, out: *mut f64) -> IpStatus {
    scalar(out, || classical_bound(n_players))
}

/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ip_quantum_win_probability(overlap_plus_sq: f64, overlap_minus_sq: f64, out: *mut f64) -> IpStatus {
    scalar(out, || quantum_win_probability(overlap_plus_sq, overlap_minus_sq))
}

/// First derivative of the clean utility with respect to a uniform field.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ip_chi_prime(g: f64, n_sites: usize, out: *mut f64) -> IpStatus {
    scalar(out, || chi_prime(g, n_sites))
}

/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ip_chi_double_prime(g: f64, n_sites: usize, out: *mut f64) -> IpStatus {
    scalar(out, || chi_double_prime(g, n_sites))
}

/// Sum of the diagonal second derivatives at a uniform field.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ip_laplacian(g: f64, n_sites: usize, out: *mut f64) -> IpStatus {
    scalar(out, || laplacian_u(g, n_sites))
}

/// Second variation of the utility under Gaussian disorder of strength
/// `sigma`. Writes the shift `delta_u2` and the rescaled `delta_u2/(N σ²)`.
/// `xi` is read only for the exponential kind.
///
/// # Safety
/// Both out-pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn ip_second_variation(
    g: f64,
    n_sites: usize,
    correlation: IpCorrelation,
    xi: f64,
    distance_mode: IpDistance,
    sigma: f64,
    delta_u2: *mut f64,
    rescaled: *mut f64,
) -> IpStatus {
    guard(|| {
        if delta_u2.is_null() || rescaled.is_null() {
            return Err(null("out"));
        }
        let kind = match correlation {
            IpCorrelation::Perfect => CorrelationKind::Perfect,
            IpCorrelation::Iid => CorrelationKind::Iid,
            IpCorrelation::Exponential => CorrelationKind::Exponential {
                xi,
                distance: distance(distance_mode),
            },
        };
        let report = lift(second_variation_closed_form(g, n_sites, kind, sigma))?;
        *delta_u2 = report.delta_u2;
        *rescaled = report.rescaled;
        Ok(())
    })
}

/// Create a disorder ensemble around mean field `mean`. `strength` is σ
/// for Gaussian kinds and the width W for the uniform kind; `xi` is read
/// only for the correlated kind.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ip_ensemble_new(
    mean: f64,
    n_sites: usize,
    kind: IpDisorder,
    strength: f64,
    xi: f64,
    distance_mode: IpDistance,
    policy: IpPolicy,
    out: *mut *mut IpEnsemble,
) -> IpStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let kind = match kind {
            IpDisorder::GaussianIid => DisorderKind::GaussianIid { sigma: strength },
            IpDisorder::GaussianPerfect => DisorderKind::GaussianPerfect { sigma: strength },
            IpDisorder::GaussianCorrelated => DisorderKind::GaussianCorrelated {
                sigma: strength,
                xi,
                distance: distance(distance_mode),
            },
            IpDisorder::UniformIid => DisorderKind::UniformIid { width: strength },
        };
        let policy = match policy {
            IpPolicy::RejectSample => PositivityPolicy::RejectSample,
            IpPolicy::RejectRun => PositivityPolicy::RejectRun,
        };
        let ensemble = lift(DisorderEnsemble::new(mean, n_sites, kind))?.with_policy(policy);
        *out = Box::into_raw(Box::new(IpEnsemble(ensemble)));
        Ok(())
    })
}

/// # Safety
/// `handle` must come from this library, be null, and not be used again.
#[no_mangle]
pub unsafe extern "C" fn ip_ensemble_free(handle: *mut IpEnsemble) {
    if !handle.is_null() {
        drop(Box::from_raw(handle));
    }
}

/// Monte Carlo average of the utility over `n_samples` draws. Results are
/// reproducible for a given seed and independent of the thread count.
///
/// # Safety
/// `handle` must come from this library; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ip_monte_carlo(
    handle: *const IpEnsemble,
    n_samples: usize,
    seed: u64,
    out: *mut IpMonteCarloSummary,
) -> IpStatus {
    guard(|| {
        let ensemble = handle.as_ref().ok_or_else(|| null("ensemble"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let r = lift(expected_utility(&ensemble.0, n_samples, seed))?;
        *out = IpMonteCarloSummary {
            n_samples: r.n_samples,
            n_rejected: r.n_rejected,
            sigma: r.sigma,
            mean_utility: r.mean_utility,
            std_error: r.stderr,
            mean_density: r.mean_density,
            clean_utility: r.clean_utility,
            clean_density: r.clean_density,
        };
        Ok(())
    })
}
