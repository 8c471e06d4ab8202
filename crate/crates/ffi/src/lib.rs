//! C ABI for `ve-infer`.
//!
//! Conventions:
//! * every fallible function returns a [`VeStatus`] and writes results
//!   through out-pointers, which are left untouched on failure;
//! * after a non-OK status, [`ve_last_error_message`] describes the failure
//!   (per thread, valid until the next call into this library on that thread);
//! * objects created here (`VeTrialData`, `VeChain`, strings) must be released
//!   with the matching `*_free` function;
//! * panics never cross the boundary; they surface as `VE_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use ve_infer::analysis::{parse_request, run_analysis};
use ve_infer::conditional::{irr_point_estimate, posterior_theta, ve_credible_interval, BetaDistributionParams};
use ve_infer::datasets;
use ve_infer::full_bayes::{
    elicit_priors, prior_mean_ve, sample_posterior, summarize_chain, GammaPriorPair, LikelihoodConfig,
    LikelihoodTerms, McmcConfig, PosteriorChain, VarianceNSource,
};
use ve_infer::model::{theta_from_ve, ve_from_theta, Efficacy, TrialData};
use ve_infer::moments::{surveillance_mean, surveillance_variance, MomentMode};
use ve_infer::Error;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VeStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullPointer = 1,
    /// An argument lies outside the mathematical domain.
    Domain = 2,
    /// Structurally invalid input (bad counts, malformed JSON, ...).
    InvalidInput = 3,
    /// A numerical routine failed.
    Numerical = 4,
    /// A Rust panic was caught.
    Panic = 5,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VeMomentMode {
    Corrected = 0,
    PaperCompat = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VeVarianceN {
    PerCohort = 0,
    AppendixNv = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VeGammaPrior {
    pub a_v: f64,
    pub b_v: f64,
    pub a_c: f64,
    pub b_c: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VeMcmcConfig {
    pub chains: u32,
    pub iterations: u64,
    pub burn_in: u64,
    pub seed: u64,
    pub target_acceptance: f64,
    pub initial_step: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VeLikelihood {
    pub moment_mode: VeMomentMode,
    pub variance_n: VeVarianceN,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VeDraw {
    pub chain: u32,
    pub iteration: u64,
    pub lambda_v: f64,
    pub lambda_c: f64,
    pub ve: f64,
    pub log_posterior: f64,
}

/// Posterior summary of VE (fractions, not percent).
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VeSummary {
    pub draws: u64,
    pub mean: f64,
    pub median: f64,
    pub sd: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    /// NaN when undefined.
    pub ess: f64,
    pub r_hat: f64,
    pub r_hat_defined: bool,
}

/// Opaque trial data.
pub struct VeTrialData(TrialData);

/// Opaque set of retained posterior draws.
pub struct VeChain(PosteriorChain);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> VeStatus {
    match e {
        Error::Domain { .. } => VeStatus::Domain,
        Error::InvalidInput { .. } => VeStatus::InvalidInput,
        Error::Numerical { .. } => VeStatus::Numerical,
    }
}

struct Failure(VeStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(VeStatus::NullPointer, format!("{what} is null"))
}

/// Runs `f`, converting errors and panics into a status.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> VeStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => VeStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_last_error(&msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(&format!("panic: {msg}"));
            VeStatus::Panic
        }
    }
}

/// # Safety
/// `p` must be null or valid for writes of `T`.
unsafe fn write_out<T>(p: *mut T, what: &str, value: T) -> Result<(), Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    p.write(value);
    Ok(())
}

/// # Safety
/// `p` must be null or point to a live `T`.
unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

/// # Safety
/// `s` must be null or a NUL-terminated string.
unsafe fn c_str<'a>(s: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if s.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(s)
        .to_str()
        .map_err(|_| Failure(VeStatus::InvalidInput, format!("{what} is not valid UTF-8")))
}

fn gamma_prior(p: &VeGammaPrior) -> Result<GammaPriorPair, Failure> {
    Ok(GammaPriorPair::new(p.a_v, p.b_v, p.a_c, p.b_c)?)
}

fn moment_mode(m: VeMomentMode) -> MomentMode {
    match m {
        VeMomentMode::Corrected => MomentMode::Corrected,
        VeMomentMode::PaperCompat => MomentMode::PaperCompat,
    }
}

/// Message for the last failure on this thread, or null if none. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn ve_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn ve_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Creates validated trial data.
///
/// # Safety
/// `out` must be valid for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn ve_trial_data_new(
    n_v: u64,
    n_c: u64,
    s_v: f64,
    s_c: f64,
    x_v: u64,
    x_c: u64,
    d: f64,
    out: *mut *mut VeTrialData,
) -> VeStatus {
    guard(|| {
        let data = TrialData::new(n_v, n_c, s_v, s_c, x_v, x_c, d)?;
        write_out(out, "out", Box::into_raw(Box::new(VeTrialData(data))))
    })
}

/// Loads a built-in dataset by name (e.g. `"pfizer-c4591001-interim"`).
///
/// # Safety
/// `name` must be a NUL-terminated string; `out` valid for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn ve_trial_data_builtin(name: *const c_char, out: *mut *mut VeTrialData) -> VeStatus {
    guard(|| {
        let name = c_str(name, "name")?;
        let data = datasets::builtin(name)
            .ok_or_else(|| Failure(VeStatus::InvalidInput, format!("unknown dataset {name:?}")))?;
        write_out(out, "out", Box::into_raw(Box::new(VeTrialData(data))))
    })
}

/// # Safety
/// `data` must be null or a pointer from `ve_trial_data_*`, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ve_trial_data_free(data: *mut VeTrialData) {
    if !data.is_null() {
        drop(Box::from_raw(data));
    }
}

/// θ = s_v(1-VE) / (s_v(1-VE) + s_c).
///
/// # Safety
/// `out` must be valid for a write.
#[no_mangle]
pub unsafe extern "C" fn ve_theta_from_ve(ve: f64, s_v: f64, s_c: f64, out: *mut f64) -> VeStatus {
    guard(|| write_out(out, "out", theta_from_ve(Efficacy::new(ve)?, s_v, s_c)?))
}

/// Inverse of [`ve_theta_from_ve`].
///
/// # Safety
/// `out` must be valid for a write.
#[no_mangle]
pub unsafe extern "C" fn ve_ve_from_theta(theta: f64, s_v: f64, s_c: f64, out: *mut f64) -> VeStatus {
    guard(|| write_out(out, "out", ve_from_theta(theta, s_v, s_c)?.value()))
}

/// Equal-tail VE credible interval from the conditional method with a
/// Beta(a, b) prior on θ.
///
/// # Safety
/// `data` must be a live handle; `lo` and `hi` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ve_conditional_interval(
    data: *const VeTrialData,
    a: f64,
    b: f64,
    level: f64,
    lo: *mut f64,
    hi: *mut f64,
) -> VeStatus {
    guard(|| {
        let data = &deref(data, "data")?.0;
        if lo.is_null() || hi.is_null() {
            return Err(null("lo/hi"));
        }
        let post = posterior_theta(BetaDistributionParams::new(a, b)?, data.x_v, data.x_c);
        let ci = ve_credible_interval(post, data.s_v, data.s_c, level)?;
        write_out(lo, "lo", ci.lo.value())?;
        write_out(hi, "hi", ci.hi.value())
    })
}

/// Plug-in estimate `1 - (x_v/s_v)/(x_c/s_c)`.
///
/// # Safety
/// `data` must be a live handle; `out` valid for a write.
#[no_mangle]
pub unsafe extern "C" fn ve_irr_point_estimate(data: *const VeTrialData, out: *mut f64) -> VeStatus {
    guard(|| {
        let data = &deref(data, "data")?.0;
        write_out(out, "out", irr_point_estimate(data)?.value())
    })
}

/// Default Gamma priors from a VE guess in [0, 1) and a control-arm rate.
///
/// # Safety
/// `out` must be valid for a write.
#[no_mangle]
pub unsafe extern "C" fn ve_elicit_priors(ve_hat: f64, lambda_c_hat: f64, out: *mut VeGammaPrior) -> VeStatus {
    guard(|| {
        let p = elicit_priors(ve_hat, lambda_c_hat)?;
        write_out(
            out,
            "out",
            VeGammaPrior {
                a_v: p.a_v,
                b_v: p.b_v,
                a_c: p.a_c,
                b_c: p.b_c,
            },
        )
    })
}

/// Prior mean of VE; a domain error when `a_c <= 1`.
///
/// # Safety
/// `prior` must point to a `VeGammaPrior`; `out` valid for a write.
#[no_mangle]
pub unsafe extern "C" fn ve_prior_mean_ve(prior: *const VeGammaPrior, out: *mut f64) -> VeStatus {
    guard(|| {
        let p = gamma_prior(deref(prior, "prior")?)?;
        write_out(out, "out", prior_mean_ve(&p)?.value())
    })
}

/// Mean and variance of per-participant follow-up `min(T, C)`. In
/// paper-compatible mode the variance may be negative.
///
/// # Safety
/// `mean` and `variance` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ve_surveillance_moments(
    lambda: f64,
    d: f64,
    mode: VeMomentMode,
    mean: *mut f64,
    variance: *mut f64,
) -> VeStatus {
    guard(|| {
        if mean.is_null() || variance.is_null() {
            return Err(null("mean/variance"));
        }
        let m = surveillance_mean(lambda, d)?;
        let v = surveillance_variance(lambda, d, moment_mode(mode))?;
        write_out(mean, "mean", m)?;
        write_out(variance, "variance", v)
    })
}

/// Default sampler settings.
#[no_mangle]
pub extern "C" fn ve_mcmc_config_default() -> VeMcmcConfig {
    let d = McmcConfig::default();
    VeMcmcConfig {
        chains: d.chains as u32,
        iterations: d.iterations as u64,
        burn_in: d.burn_in as u64,
        seed: d.seed,
        target_acceptance: d.target_acceptance,
        initial_step: d.initial_step,
    }
}

fn to_usize(v: u64, what: &str) -> Result<usize, Failure> {
    usize::try_from(v).map_err(|_| Failure(VeStatus::InvalidInput, format!("{what} too large")))
}

/// Samples the full-model posterior.
///
/// # Safety
/// `data` must be a live handle; `prior`, `cfg`, `lik` valid pointers; `out`
/// valid for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn ve_sample_posterior(
    data: *const VeTrialData,
    prior: *const VeGammaPrior,
    cfg: *const VeMcmcConfig,
    lik: *const VeLikelihood,
    out: *mut *mut VeChain,
) -> VeStatus {
    guard(|| {
        let data = &deref(data, "data")?.0;
        let priors = gamma_prior(deref(prior, "prior")?)?;
        let c = deref(cfg, "cfg")?;
        let l = deref(lik, "lik")?;
        if out.is_null() {
            return Err(null("out"));
        }
        let cfg = McmcConfig {
            chains: c.chains as usize,
            iterations: to_usize(c.iterations, "iterations")?,
            burn_in: to_usize(c.burn_in, "burn_in")?,
            seed: c.seed,
            target_acceptance: c.target_acceptance,
            initial_step: c.initial_step,
        };
        let lik = LikelihoodConfig {
            moment_mode: moment_mode(l.moment_mode),
            variance_n_source: match l.variance_n {
                VeVarianceN::PerCohort => VarianceNSource::PerCohort,
                VeVarianceN::AppendixNv => VarianceNSource::AppendixNv,
            },
            terms: LikelihoodTerms::default(),
        };
        let chain = sample_posterior(data, &priors, &cfg, &lik)?;
        write_out(out, "out", Box::into_raw(Box::new(VeChain(chain))))
    })
}

/// Number of retained draws (all chains), 0 for a null handle.
///
/// # Safety
/// `chain` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ve_chain_len(chain: *const VeChain) -> u64 {
    chain.as_ref().map_or(0, |c| c.0.len() as u64)
}

/// Copies draw `index` (ordered by chain, then iteration).
///
/// # Safety
/// `chain` must be a live handle; `out` valid for a write.
#[no_mangle]
pub unsafe extern "C" fn ve_chain_draw(chain: *const VeChain, index: u64, out: *mut VeDraw) -> VeStatus {
    guard(|| {
        let c = &deref(chain, "chain")?.0;
        let d = usize::try_from(index)
            .ok()
            .and_then(|i| c.draws.get(i))
            .ok_or_else(|| Failure(VeStatus::InvalidInput, format!("draw index {index} out of range")))?;
        write_out(
            out,
            "out",
            VeDraw {
                chain: d.chain,
                iteration: d.iteration,
                lambda_v: d.lambda_v,
                lambda_c: d.lambda_c,
                ve: d.ve,
                log_posterior: d.log_posterior,
            },
        )
    })
}

/// Summarizes the VE draws at credible `level`.
///
/// # Safety
/// `chain` must be a live handle; `out` valid for a write.
#[no_mangle]
pub unsafe extern "C" fn ve_chain_summarize(chain: *const VeChain, level: f64, out: *mut VeSummary) -> VeStatus {
    guard(|| {
        let c = &deref(chain, "chain")?.0;
        let s = summarize_chain(c, level, &[])?;
        write_out(
            out,
            "out",
            VeSummary {
                draws: s.draws as u64,
                mean: s.mean_ve.value(),
                median: s.median_ve.value(),
                sd: s.sd_ve,
                ci_lo: s.ci.lo.value(),
                ci_hi: s.ci.hi.value(),
                ess: s.ess.unwrap_or(f64::NAN),
                r_hat: s.r_hat,
                r_hat_defined: s.r_hat_defined,
            },
        )
    })
}

/// # Safety
/// `chain` must be null or a handle from [`ve_sample_posterior`], not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ve_chain_free(chain: *mut VeChain) {
    if !chain.is_null() {
        drop(Box::from_raw(chain));
    }
}

/// Runs a JSON analysis request (same format as the CLI) and returns the JSON
/// report. Free the result with [`ve_string_free`].
///
/// # Safety
/// `request` must be a NUL-terminated string; `out` valid for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn ve_analyze_json(request: *const c_char, out: *mut *mut c_char) -> VeStatus {
    guard(|| {
        let text = c_str(request, "request")?;
        if out.is_null() {
            return Err(null("out"));
        }
        let resolved = parse_request(text)?.resolve(None)?;
        let (report, _) = run_analysis(&resolved)?;
        let json = serde_json::to_string(&report).map_err(|e| Failure(VeStatus::Numerical, e.to_string()))?;
        let c = CString::new(json).map_err(|e| Failure(VeStatus::InvalidInput, e.to_string()))?;
        write_out(out, "out", c.into_raw())
    })
}

/// # Safety
/// `s` must be null or a string returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ve_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
