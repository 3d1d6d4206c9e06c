//! C ABI for the `devian` library.
//!
//! Objects cross the boundary as opaque handles created by `*_new`/`*_fit`/
//! `*_simulate`/`devian_detect` and released with the matching `*_free`.
//! Every fallible call returns a [`DevianStatus`]; on failure a description
//! is available from [`devian_last_error_message`] until the next failing
//! call on the same thread.
//!
//! All arrays are caller-owned. Predictor matrices are passed column-major
//! (`nrows` values for the first predictor, then the second, ...) and never
//! include the intercept, which is always added.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use devian::data_io::report_to_json;
use devian::{
    build_design, detect, fit_ols, simulate_null_t_with, studentized_residuals,
    studentized_residuals_oracle, zscore_last, DesignMatrix, DetectionReport,
    EmpiricalTDistribution, Error, FittedModel, ResidualMethod, SimulationConfig,
};

/// Result codes returned by every fallible function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DevianStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    NonFiniteInput = 3,
    DimensionMismatch = 4,
    RankDeficient = 5,
    TooFewRows = 6,
    LeverageOne = 7,
    ZeroVariance = 8,
    SimulationDegenerate = 9,
    InsufficientSamples = 10,
    FingerprintMismatch = 11,
    BufferTooSmall = 12,
    Internal = 13,
}

impl From<&Error> for DevianStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::NonFiniteInput { .. } => DevianStatus::NonFiniteInput,
            Error::DimensionMismatch { .. } => DevianStatus::DimensionMismatch,
            Error::RankDeficient { .. } => DevianStatus::RankDeficient,
            Error::TooFewRows { .. } => DevianStatus::TooFewRows,
            Error::LeverageOne { .. } => DevianStatus::LeverageOne,
            Error::ZeroResidualVariance { .. } | Error::ZeroVariance => DevianStatus::ZeroVariance,
            Error::SimulationDegenerate { .. } => DevianStatus::SimulationDegenerate,
            Error::InsufficientSamples { .. } => DevianStatus::InsufficientSamples,
            Error::FingerprintMismatch { .. } => DevianStatus::FingerprintMismatch,
            Error::InvalidConfig(_) | Error::EmptyInput(_) => DevianStatus::InvalidArgument,
            _ => DevianStatus::Internal,
        }
    }
}

/// Opaque design matrix (intercept included).
pub struct DevianDesign {
    inner: DesignMatrix,
}

/// Opaque least-squares fit.
pub struct DevianModel {
    inner: FittedModel,
}

/// Opaque simulated null law of the maximum studentized residual.
pub struct DevianDistribution {
    inner: EmpiricalTDistribution,
}

/// Opaque detection result.
pub struct DevianReport {
    inner: DetectionReport,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let msg = CString::new(msg.replace('\0', " ")).expect("no interior nul");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

fn fail(status: DevianStatus, msg: impl Into<String>) -> DevianStatus {
    set_error(msg.into());
    status
}

fn from_error(e: Error) -> DevianStatus {
    let status = DevianStatus::from(&e);
    set_error(e.to_string());
    status
}

/// Runs `f`, converting panics into `Internal`.
fn guard<F: FnOnce() -> DevianStatus>(f: F) -> DevianStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(_) => fail(DevianStatus::Internal, "panic inside devian"),
    }
}

unsafe fn input<'a>(data: *const f64, len: usize) -> Option<&'a [f64]> {
    if len == 0 {
        Some(&[])
    } else if data.is_null() {
        None
    } else {
        Some(slice::from_raw_parts(data, len))
    }
}

unsafe fn copy_out(src: &[f64], out: *mut f64, len: usize) -> DevianStatus {
    if out.is_null() {
        return fail(DevianStatus::NullPointer, "output buffer is null");
    }
    if len < src.len() {
        return fail(
            DevianStatus::BufferTooSmall,
            format!("buffer holds {len} values, {} needed", src.len()),
        );
    }
    ptr::copy_nonoverlapping(src.as_ptr(), out, src.len());
    DevianStatus::Ok
}

/// Message for the most recent failure on this thread, or NULL. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn devian_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

// ---------------------------------------------------------------- design

/// Builds an `nrows × (npredictors + 1)` design, prepending the intercept.
#[no_mangle]
pub unsafe extern "C" fn devian_design_new(
    predictors: *const f64,
    nrows: usize,
    npredictors: usize,
    out: *mut *mut DevianDesign,
) -> DevianStatus {
    guard(|| {
        if out.is_null() {
            return fail(DevianStatus::NullPointer, "out is null");
        }
        let Some(data) = input(predictors, nrows * npredictors) else {
            return fail(DevianStatus::NullPointer, "predictors is null");
        };
        let columns: Vec<&[f64]> = (0..npredictors)
            .map(|j| &data[j * nrows..(j + 1) * nrows])
            .collect();
        match build_design(&columns, nrows) {
            Ok(inner) => {
                *out = Box::into_raw(Box::new(DevianDesign { inner }));
                DevianStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

#[no_mangle]
pub unsafe extern "C" fn devian_design_free(design: *mut DevianDesign) {
    if !design.is_null() {
        drop(Box::from_raw(design));
    }
}

#[no_mangle]
pub unsafe extern "C" fn devian_design_nrows(design: *const DevianDesign) -> usize {
    design.as_ref().map_or(0, |d| d.inner.nrows())
}

/// Columns including the intercept.
#[no_mangle]
pub unsafe extern "C" fn devian_design_ncols(design: *const DevianDesign) -> usize {
    design.as_ref().map_or(0, |d| d.inner.ncols())
}

#[no_mangle]
pub unsafe extern "C" fn devian_design_leverages(
    design: *const DevianDesign,
    out: *mut f64,
    len: usize,
) -> DevianStatus {
    guard(|| match design.as_ref() {
        Some(d) => copy_out(d.inner.leverages(), out, len),
        None => fail(DevianStatus::NullPointer, "design is null"),
    })
}

// ----------------------------------------------------------------- model

#[no_mangle]
pub unsafe extern "C" fn devian_model_fit(
    design: *const DevianDesign,
    response: *const f64,
    len: usize,
    out: *mut *mut DevianModel,
) -> DevianStatus {
    guard(|| {
        let (Some(d), false) = (design.as_ref(), out.is_null()) else {
            return fail(DevianStatus::NullPointer, "design or out is null");
        };
        let Some(y) = input(response, len) else {
            return fail(DevianStatus::NullPointer, "response is null");
        };
        match fit_ols(&d.inner, y) {
            Ok(inner) => {
                *out = Box::into_raw(Box::new(DevianModel { inner }));
                DevianStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

#[no_mangle]
pub unsafe extern "C" fn devian_model_free(model: *mut DevianModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

#[no_mangle]
pub unsafe extern "C" fn devian_model_coefficients(
    model: *const DevianModel,
    out: *mut f64,
    len: usize,
) -> DevianStatus {
    guard(|| match model.as_ref() {
        Some(m) => copy_out(m.inner.coefficients(), out, len),
        None => fail(DevianStatus::NullPointer, "model is null"),
    })
}

/// Externally studentized residuals via the deletion identities.
#[no_mangle]
pub unsafe extern "C" fn devian_model_studentized_residuals(
    model: *const DevianModel,
    out: *mut f64,
    len: usize,
) -> DevianStatus {
    guard(|| {
        let Some(m) = model.as_ref() else {
            return fail(DevianStatus::NullPointer, "model is null");
        };
        match studentized_residuals(&m.inner) {
            Ok(e) => copy_out(&e.values, out, len),
            Err(e) => from_error(e),
        }
    })
}

/// Externally studentized residuals by explicit leave-one-out refits.
#[no_mangle]
pub unsafe extern "C" fn devian_studentized_residuals_oracle(
    design: *const DevianDesign,
    response: *const f64,
    response_len: usize,
    out: *mut f64,
    len: usize,
) -> DevianStatus {
    guard(|| {
        let Some(d) = design.as_ref() else {
            return fail(DevianStatus::NullPointer, "design is null");
        };
        let Some(y) = input(response, response_len) else {
            return fail(DevianStatus::NullPointer, "response is null");
        };
        match studentized_residuals_oracle(&d.inner, y) {
            Ok(e) => copy_out(&e.values, out, len),
            Err(e) => from_error(e),
        }
    })
}

#[no_mangle]
pub unsafe extern "C" fn devian_zscore_last(
    series: *const f64,
    len: usize,
    out: *mut f64,
) -> DevianStatus {
    guard(|| {
        let Some(s) = input(series, len) else {
            return fail(DevianStatus::NullPointer, "series is null");
        };
        if out.is_null() {
            return fail(DevianStatus::NullPointer, "out is null");
        }
        match zscore_last(s) {
            Ok(z) => {
                *out = z;
                DevianStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

// ---------------------------------------------------------- distribution

/// Tabulates the null law with `nsim` draws. `oracle != 0` selects the
/// leave-one-out refit path. The result does not depend on `workers`.
#[no_mangle]
pub unsafe extern "C" fn devian_simulate(
    design: *const DevianDesign,
    nsim: usize,
    seed: u64,
    workers: usize,
    oracle: i32,
    out: *mut *mut DevianDistribution,
) -> DevianStatus {
    guard(|| {
        let (Some(d), false) = (design.as_ref(), out.is_null()) else {
            return fail(DevianStatus::NullPointer, "design or out is null");
        };
        let config = SimulationConfig {
            nsim,
            seed,
            workers,
            ..Default::default()
        };
        let method = if oracle != 0 {
            ResidualMethod::Oracle
        } else {
            ResidualMethod::Fast
        };
        match simulate_null_t_with(&d.inner, &config, method) {
            Ok(inner) => {
                *out = Box::into_raw(Box::new(DevianDistribution { inner }));
                DevianStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

#[no_mangle]
pub unsafe extern "C" fn devian_distribution_free(dist: *mut DevianDistribution) {
    if !dist.is_null() {
        drop(Box::from_raw(dist));
    }
}

#[no_mangle]
pub unsafe extern "C" fn devian_distribution_nsim(dist: *const DevianDistribution) -> usize {
    dist.as_ref().map_or(0, |d| d.inner.nsim())
}

/// Copies the sorted simulated statistics.
#[no_mangle]
pub unsafe extern "C" fn devian_distribution_samples(
    dist: *const DevianDistribution,
    out: *mut f64,
    len: usize,
) -> DevianStatus {
    guard(|| match dist.as_ref() {
        Some(d) => copy_out(d.inner.sorted_samples(), out, len),
        None => fail(DevianStatus::NullPointer, "distribution is null"),
    })
}

#[no_mangle]
pub unsafe extern "C" fn devian_distribution_quantile(
    dist: *const DevianDistribution,
    alpha: f64,
    out: *mut f64,
) -> DevianStatus {
    guard(|| {
        let (Some(d), false) = (dist.as_ref(), out.is_null()) else {
            return fail(DevianStatus::NullPointer, "distribution or out is null");
        };
        if !(alpha > 0.0 && alpha < 1.0) {
            return fail(DevianStatus::InvalidArgument, "alpha must lie in (0, 1)");
        }
        *out = d.inner.quantile(alpha);
        DevianStatus::Ok
    })
}

#[no_mangle]
pub unsafe extern "C" fn devian_distribution_quantile_standard_error(
    dist: *const DevianDistribution,
    alpha: f64,
    out: *mut f64,
) -> DevianStatus {
    guard(|| {
        let (Some(d), false) = (dist.as_ref(), out.is_null()) else {
            return fail(DevianStatus::NullPointer, "distribution or out is null");
        };
        match d.inner.quantile_standard_error(alpha) {
            Ok(se) => {
                *out = se;
                DevianStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

#[no_mangle]
pub unsafe extern "C" fn devian_distribution_p_value(
    dist: *const DevianDistribution,
    t_obs: f64,
    out: *mut f64,
) -> DevianStatus {
    guard(|| {
        let (Some(d), false) = (dist.as_ref(), out.is_null()) else {
            return fail(DevianStatus::NullPointer, "distribution or out is null");
        };
        if !t_obs.is_finite() {
            return fail(DevianStatus::NonFiniteInput, "t_obs must be finite");
        }
        *out = d.inner.p_value(t_obs);
        DevianStatus::Ok
    })
}

// ---------------------------------------------------------------- report

#[no_mangle]
pub unsafe extern "C" fn devian_detect(
    model: *const DevianModel,
    dist: *const DevianDistribution,
    alpha: f64,
    out: *mut *mut DevianReport,
) -> DevianStatus {
    guard(|| {
        let (Some(m), Some(d), false) = (model.as_ref(), dist.as_ref(), out.is_null()) else {
            return fail(
                DevianStatus::NullPointer,
                "model, distribution or out is null",
            );
        };
        match detect(&m.inner, &d.inner, alpha) {
            Ok(inner) => {
                *out = Box::into_raw(Box::new(DevianReport { inner }));
                DevianStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

#[no_mangle]
pub unsafe extern "C" fn devian_report_free(report: *mut DevianReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

/// Observed statistic; NaN for a null handle.
#[no_mangle]
pub unsafe extern "C" fn devian_report_t_obs(report: *const DevianReport) -> f64 {
    report.as_ref().map_or(f64::NAN, |r| r.inner.t_obs)
}

#[no_mangle]
pub unsafe extern "C" fn devian_report_threshold(report: *const DevianReport) -> f64 {
    report.as_ref().map_or(f64::NAN, |r| r.inner.threshold)
}

#[no_mangle]
pub unsafe extern "C" fn devian_report_p_value(report: *const DevianReport) -> f64 {
    report.as_ref().map_or(f64::NAN, |r| r.inner.p_value)
}

#[no_mangle]
pub unsafe extern "C" fn devian_report_outlier_count(report: *const DevianReport) -> usize {
    report.as_ref().map_or(0, |r| r.inner.outlier_indices.len())
}

/// Copies the 0-based indices of flagged observations, ascending.
#[no_mangle]
pub unsafe extern "C" fn devian_report_outliers(
    report: *const DevianReport,
    out: *mut usize,
    len: usize,
) -> DevianStatus {
    guard(|| {
        let Some(r) = report.as_ref() else {
            return fail(DevianStatus::NullPointer, "report is null");
        };
        let idx = &r.inner.outlier_indices;
        if idx.is_empty() {
            return DevianStatus::Ok;
        }
        if out.is_null() {
            return fail(DevianStatus::NullPointer, "out is null");
        }
        if len < idx.len() {
            return fail(DevianStatus::BufferTooSmall, "outlier buffer too small");
        }
        ptr::copy_nonoverlapping(idx.as_ptr(), out, idx.len());
        DevianStatus::Ok
    })
}

/// JSON rendering of the report; release with [`devian_string_free`].
#[no_mangle]
pub unsafe extern "C" fn devian_report_to_json(
    report: *const DevianReport,
    out: *mut *mut c_char,
) -> DevianStatus {
    guard(|| {
        let (Some(r), false) = (report.as_ref(), out.is_null()) else {
            return fail(DevianStatus::NullPointer, "report or out is null");
        };
        match report_to_json(&r.inner) {
            Ok(json) => {
                *out = CString::new(json).expect("json has no nul").into_raw();
                DevianStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

#[no_mangle]
pub unsafe extern "C" fn devian_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
