//! C ABI for the `mnnts` library.
//!
//! Models and datasets are opaque handles created and freed through this
//! interface. Every fallible function returns an [`MnntsStatus`]; on failure
//! [`mnnts_last_error_message`] describes the error. Variable indices are
//! 0-based and angles are radians.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use mnnts::dataset::{AngleUnit, AngularDataset};
use mnnts::density::{cdf_univariate, density, AnglePoint};
use mnnts::estimate::{fit, Method};
use mnnts::independence::{independence_score, lr_test, Split};
use mnnts::io::{ingest_csv, ModelFile, ModelMetadata};
use mnnts::marginal::marginal;
use mnnts::params::{DimVector, MnntsParams};
use mnnts::{conditional, sample, ConditionalSpec, Error, SplitMix64};
use num_complex::Complex64;

/// Status codes returned by every fallible function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MnntsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DataError = 3,
    NumericError = 4,
    Degenerate = 5,
    IoError = 6,
    BufferTooSmall = 7,
    Panic = 8,
}

/// Estimation method for [`mnnts_fit`] and [`mnnts_lr_test`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MnntsMethod {
    Md = 0,
    Ml = 1,
}

impl From<MnntsMethod> for Method {
    fn from(m: MnntsMethod) -> Self {
        match m {
            MnntsMethod::Md => Method::Md,
            MnntsMethod::Ml => Method::Ml,
        }
    }
}

/// Result of a likelihood-ratio test of independence.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct MnntsLrResult {
    pub statistic: f64,
    pub df: u64,
    pub p_value: f64,
    pub loglik_full: f64,
    pub loglik_indep: f64,
    pub approximate: bool,
    pub clipped: bool,
}

/// Opaque model handle.
pub struct MnntsModel {
    params: MnntsParams,
}

/// Opaque dataset handle.
pub struct MnntsDataset {
    data: AngularDataset,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(err: &Error) -> MnntsStatus {
    match err {
        Error::Index { .. } | Error::Argument(_) => MnntsStatus::InvalidArgument,
        Error::Data(_) => MnntsStatus::DataError,
        Error::Io(_) => MnntsStatus::IoError,
        Error::Numeric(_) => MnntsStatus::NumericError,
        Error::Degenerate(_) | Error::DegenerateConditioning { .. } => MnntsStatus::Degenerate,
    }
}

enum Failure {
    Lib(Error),
    Status(MnntsStatus, String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

fn null() -> Failure {
    Failure::Status(MnntsStatus::NullPointer, "null pointer argument".into())
}

fn invalid(msg: impl Into<String>) -> Failure {
    Failure::Status(MnntsStatus::InvalidArgument, msg.into())
}

/// Run `f`, translating errors and panics into status codes.
fn guard<F>(f: F) -> MnntsStatus
where
    F: FnOnce() -> Result<(), Failure>,
{
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_last_error("");
            MnntsStatus::Ok
        }
        Ok(Err(Failure::Lib(e))) => {
            set_last_error(&e.to_string());
            status_of(&e)
        }
        Ok(Err(Failure::Status(s, msg))) => {
            set_last_error(&msg);
            s
        }
        Err(_) => {
            set_last_error("internal panic");
            MnntsStatus::Panic
        }
    }
}

unsafe fn slice<'a, T>(p: *const T, len: usize) -> Result<&'a [T], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null());
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn slice_mut<'a, T>(p: *mut T, len: usize) -> Result<&'a mut [T], Failure> {
    if len == 0 {
        return Ok(&mut []);
    }
    if p.is_null() {
        return Err(null());
    }
    Ok(std::slice::from_raw_parts_mut(p, len))
}

unsafe fn model_ref<'a>(m: *const MnntsModel) -> Result<&'a MnntsParams, Failure> {
    m.as_ref().map(|m| &m.params).ok_or_else(null)
}

unsafe fn dataset_ref<'a>(d: *const MnntsDataset) -> Result<&'a AngularDataset, Failure> {
    d.as_ref().map(|d| &d.data).ok_or_else(null)
}

unsafe fn c_str<'a>(s: *const c_char) -> Result<&'a str, Failure> {
    if s.is_null() {
        return Err(null());
    }
    CStr::from_ptr(s)
        .to_str()
        .map_err(|_| invalid("string is not valid UTF-8"))
}

unsafe fn write_out<T>(out: *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null());
    }
    out.write(value);
    Ok(())
}

fn boxed_model(params: MnntsParams) -> *mut MnntsModel {
    Box::into_raw(Box::new(MnntsModel { params }))
}

fn dims_from(dims: &[usize]) -> Result<DimVector, Failure> {
    Ok(DimVector::new(dims.to_vec())?)
}

/// Message describing the most recent failure on this thread, or an empty
/// string. The pointer stays valid until the next call into this library on
/// the same thread.
#[no_mangle]
pub extern "C" fn mnnts_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Create a model from dimension orders and coefficient parts.
///
/// With `normalize` false the coefficients must already satisfy the
/// constraints; otherwise any nonzero vector is normalized.
///
/// # Safety
/// `dims` must point to `n_vars` values; `re` and `im` to `len` values each.
/// `out` must be a valid pointer to receive the handle.
#[no_mangle]
pub unsafe extern "C" fn mnnts_model_new(
    dims: *const usize,
    n_vars: usize,
    re: *const f64,
    im: *const f64,
    len: usize,
    normalize: bool,
    out: *mut *mut MnntsModel,
) -> MnntsStatus {
    guard(|| {
        let d = dims_from(slice(dims, n_vars)?)?;
        let re = slice(re, len)?;
        let im = slice(im, len)?;
        let coeffs: Vec<Complex64> = re
            .iter()
            .zip(im)
            .map(|(&a, &b)| Complex64::new(a, b))
            .collect();
        let params = if normalize {
            MnntsParams::from_unnormalized(d, &coeffs)?
        } else {
            MnntsParams::new(d, coeffs)?
        };
        write_out(out, boxed_model(params))
    })
}

/// Uniform model on the torus with the given orders.
///
/// # Safety
/// `dims` must point to `n_vars` values and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn mnnts_model_uniform(
    dims: *const usize,
    n_vars: usize,
    out: *mut *mut MnntsModel,
) -> MnntsStatus {
    guard(|| {
        let d = dims_from(slice(dims, n_vars)?)?;
        write_out(out, boxed_model(MnntsParams::uniform(d)))
    })
}

/// Release a model. Null is ignored.
///
/// # Safety
/// `model` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn mnnts_model_free(model: *mut MnntsModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Number of variables, or 0 for a null handle.
///
/// # Safety
/// `model` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn mnnts_model_n_vars(model: *const MnntsModel) -> usize {
    model.as_ref().map_or(0, |m| m.params.n_vars())
}

/// Number of coefficients, or 0 for a null handle.
///
/// # Safety
/// `model` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn mnnts_model_len(model: *const MnntsModel) -> usize {
    model.as_ref().map_or(0, |m| m.params.coeffs().len())
}

/// Copy the dimension orders into `out` (capacity `cap`).
///
/// # Safety
/// `model` must be live; `out` must hold `cap` values.
#[no_mangle]
pub unsafe extern "C" fn mnnts_model_dims(
    model: *const MnntsModel,
    out: *mut usize,
    cap: usize,
) -> MnntsStatus {
    guard(|| {
        let p = model_ref(model)?;
        let dims = p.dims().as_slice();
        if cap < dims.len() {
            return Err(Failure::Status(
                MnntsStatus::BufferTooSmall,
                format!("need room for {} orders", dims.len()),
            ));
        }
        slice_mut(out, dims.len())?.copy_from_slice(dims);
        Ok(())
    })
}

/// Copy real and imaginary parts of the coefficients into buffers of
/// capacity `cap`.
///
/// # Safety
/// `model` must be live; `re` and `im` must hold `cap` values each.
#[no_mangle]
pub unsafe extern "C" fn mnnts_model_coefficients(
    model: *const MnntsModel,
    re: *mut f64,
    im: *mut f64,
    cap: usize,
) -> MnntsStatus {
    guard(|| {
        let p = model_ref(model)?;
        let c = p.coeffs();
        if cap < c.len() {
            return Err(Failure::Status(
                MnntsStatus::BufferTooSmall,
                format!("need room for {} coefficients", c.len()),
            ));
        }
        let re = slice_mut(re, c.len())?;
        let im = slice_mut(im, c.len())?;
        for (k, z) in c.iter().enumerate() {
            re[k] = z.re;
            im[k] = z.im;
        }
        Ok(())
    })
}

/// Density at `theta` (`n` angles).
///
/// # Safety
/// `model` must be live, `theta` must hold `n` values and `out` be valid.
#[no_mangle]
pub unsafe extern "C" fn mnnts_density(
    model: *const MnntsModel,
    theta: *const f64,
    n: usize,
    out: *mut f64,
) -> MnntsStatus {
    guard(|| {
        let p = model_ref(model)?;
        let v = density(p, &AnglePoint::new(slice(theta, n)?))?;
        write_out(out, v)
    })
}

/// Distribution function of a univariate model at `theta` in `[0, 2π]`.
///
/// # Safety
/// `model` must be live and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn mnnts_cdf(
    model: *const MnntsModel,
    theta: f64,
    out: *mut f64,
) -> MnntsStatus {
    guard(|| {
        let v = cdf_univariate(model_ref(model)?, theta)?;
        write_out(out, v)
    })
}

/// Mixing probabilities of the marginal of the `n_keep` variables in
/// `keep`, in descending order. `out_len` receives the number of
/// components; if it exceeds `cap` nothing is copied and
/// `MNNTS_STATUS_BUFFER_TOO_SMALL` is returned.
///
/// # Safety
/// `model` must be live; `keep` must hold `n_keep` values; `out` must hold
/// `cap` values; `out_len` must be valid.
#[no_mangle]
pub unsafe extern "C" fn mnnts_marginal_probabilities(
    model: *const MnntsModel,
    keep: *const usize,
    n_keep: usize,
    out: *mut f64,
    cap: usize,
    out_len: *mut usize,
) -> MnntsStatus {
    guard(|| {
        let m = marginal(model_ref(model)?, slice(keep, n_keep)?)?;
        let probs = m.probs();
        write_out(out_len, probs.len())?;
        if cap < probs.len() {
            return Err(Failure::Status(
                MnntsStatus::BufferTooSmall,
                format!("need room for {} probabilities", probs.len()),
            ));
        }
        slice_mut(out, probs.len())?.copy_from_slice(probs);
        Ok(())
    })
}

/// Component `index` of the marginal mixture as a new model.
///
/// # Safety
/// `model` must be live; `keep` must hold `n_keep` values; `out` valid.
#[no_mangle]
pub unsafe extern "C" fn mnnts_marginal_component(
    model: *const MnntsModel,
    keep: *const usize,
    n_keep: usize,
    index: usize,
    out: *mut *mut MnntsModel,
) -> MnntsStatus {
    guard(|| {
        let m = marginal(model_ref(model)?, slice(keep, n_keep)?)?;
        let comp = m
            .components()
            .get(index)
            .ok_or_else(|| invalid(format!("component {index} of {}", m.components().len())))?;
        write_out(out, boxed_model(comp.clone()))
    })
}

/// Conditional model of the remaining variables (ascending order) given
/// `vars[i] = angles[i]`.
///
/// # Safety
/// `model` must be live; `vars` and `angles` must hold `n` values; `out`
/// valid.
#[no_mangle]
pub unsafe extern "C" fn mnnts_conditional(
    model: *const MnntsModel,
    vars: *const usize,
    angles: *const f64,
    n: usize,
    out: *mut *mut MnntsModel,
) -> MnntsStatus {
    guard(|| {
        let pairs: Vec<(usize, f64)> = slice(vars, n)?
            .iter()
            .copied()
            .zip(slice(angles, n)?.iter().copied())
            .collect();
        let spec = ConditionalSpec::from_pairs(&pairs)?;
        let c = conditional(model_ref(model)?, &spec)?;
        write_out(out, boxed_model(c))
    })
}

/// Independence score between two blocks of variables.
///
/// # Safety
/// `model` must be live; `first`/`second` must hold `n_first`/`n_second`
/// values; `out` valid.
#[no_mangle]
pub unsafe extern "C" fn mnnts_independence_score(
    model: *const MnntsModel,
    first: *const usize,
    n_first: usize,
    second: *const usize,
    n_second: usize,
    out: *mut f64,
) -> MnntsStatus {
    guard(|| {
        let p = model_ref(model)?;
        let split = Split::new(
            slice(first, n_first)?.to_vec(),
            slice(second, n_second)?.to_vec(),
            p.n_vars(),
        )?;
        write_out(out, independence_score(p, &split)?)
    })
}

/// Parse a JSON model file from a string.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn mnnts_model_from_json(
    json: *const c_char,
    out: *mut *mut MnntsModel,
) -> MnntsStatus {
    guard(|| {
        let params = ModelFile::from_json(c_str(json)?)?.params()?;
        write_out(out, boxed_model(params))
    })
}

/// Serialize a model as JSON. Free the string with [`mnnts_string_free`].
///
/// # Safety
/// `model` must be live and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn mnnts_model_to_json(
    model: *const MnntsModel,
    out: *mut *mut c_char,
) -> MnntsStatus {
    guard(|| {
        let text = ModelFile::from_params(model_ref(model)?, ModelMetadata::default()).to_json()?;
        let c = CString::new(text).map_err(|_| invalid("model text contains NUL"))?;
        write_out(out, c.into_raw())
    })
}

/// Read a model file.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn mnnts_model_load(
    path: *const c_char,
    out: *mut *mut MnntsModel,
) -> MnntsStatus {
    guard(|| {
        let params = ModelFile::read(Path::new(c_str(path)?))?.params()?;
        write_out(out, boxed_model(params))
    })
}

/// Write a model file.
///
/// # Safety
/// `model` must be live and `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn mnnts_model_save(
    model: *const MnntsModel,
    path: *const c_char,
) -> MnntsStatus {
    guard(|| {
        let file = ModelFile::from_params(model_ref(model)?, ModelMetadata::default());
        file.write(Path::new(c_str(path)?))?;
        Ok(())
    })
}

/// Release a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn mnnts_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Dataset from a row-major `n_obs × n_vars` array of radians.
///
/// # Safety
/// `values` must hold `n_obs * n_vars` values and `out` be valid.
#[no_mangle]
pub unsafe extern "C" fn mnnts_dataset_new(
    values: *const f64,
    n_obs: usize,
    n_vars: usize,
    out: *mut *mut MnntsDataset,
) -> MnntsStatus {
    guard(|| {
        let len = n_obs
            .checked_mul(n_vars)
            .ok_or_else(|| invalid("dataset size overflows"))?;
        let data = AngularDataset::from_flat(
            AngularDataset::default_names(n_vars),
            slice(values, len)?.to_vec(),
        )?;
        write_out(out, Box::into_raw(Box::new(MnntsDataset { data })))
    })
}

/// Read a CSV with a header row. Rows containing `missing` are dropped and
/// counted in `dropped` (which may be null).
///
/// # Safety
/// `path` and `missing` must be NUL-terminated strings and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn mnnts_dataset_load_csv(
    path: *const c_char,
    degrees: bool,
    missing: *const c_char,
    out: *mut *mut MnntsDataset,
    dropped: *mut usize,
) -> MnntsStatus {
    guard(|| {
        let unit = if degrees {
            AngleUnit::Degrees
        } else {
            AngleUnit::Radians
        };
        let ingested = ingest_csv(Path::new(c_str(path)?), unit, c_str(missing)?)?;
        if !dropped.is_null() {
            dropped.write(ingested.dropped);
        }
        write_out(
            out,
            Box::into_raw(Box::new(MnntsDataset {
                data: ingested.dataset,
            })),
        )
    })
}

/// Release a dataset. Null is ignored.
///
/// # Safety
/// `data` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn mnnts_dataset_free(data: *mut MnntsDataset) {
    if !data.is_null() {
        drop(Box::from_raw(data));
    }
}

/// Number of observations, or 0 for a null handle.
///
/// # Safety
/// `data` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn mnnts_dataset_n_obs(data: *const MnntsDataset) -> usize {
    data.as_ref().map_or(0, |d| d.data.n_obs())
}

/// Number of variables, or 0 for a null handle.
///
/// # Safety
/// `data` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn mnnts_dataset_n_vars(data: *const MnntsDataset) -> usize {
    data.as_ref().map_or(0, |d| d.data.n_vars())
}

/// Copy the row-major values (radians) into `out` of capacity `cap`.
///
/// # Safety
/// `data` must be live and `out` must hold `cap` values.
#[no_mangle]
pub unsafe extern "C" fn mnnts_dataset_values(
    data: *const MnntsDataset,
    out: *mut f64,
    cap: usize,
) -> MnntsStatus {
    guard(|| {
        let values = dataset_ref(data)?.values();
        if cap < values.len() {
            return Err(Failure::Status(
                MnntsStatus::BufferTooSmall,
                format!("need room for {} values", values.len()),
            ));
        }
        slice_mut(out, values.len())?.copy_from_slice(values);
        Ok(())
    })
}

/// Fit a model. `loglik` may be null.
///
/// # Safety
/// `data` must be live; `dims` must hold `n_vars` values; `out` valid.
#[no_mangle]
pub unsafe extern "C" fn mnnts_fit(
    data: *const MnntsDataset,
    dims: *const usize,
    n_vars: usize,
    method: MnntsMethod,
    out: *mut *mut MnntsModel,
    loglik: *mut f64,
) -> MnntsStatus {
    guard(|| {
        let d = dims_from(slice(dims, n_vars)?)?;
        let report = fit(dataset_ref(data)?, &d, method.into())?;
        if !loglik.is_null() {
            loglik.write(report.loglik);
        }
        write_out(out, boxed_model(report.params))
    })
}

/// Likelihood-ratio test of independence between two blocks.
///
/// # Safety
/// `data` must be live; `dims` must hold `n_vars` values; `first`/`second`
/// must hold `n_first`/`n_second` values; `out` valid.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn mnnts_lr_test(
    data: *const MnntsDataset,
    dims: *const usize,
    n_vars: usize,
    first: *const usize,
    n_first: usize,
    second: *const usize,
    n_second: usize,
    method: MnntsMethod,
    out: *mut MnntsLrResult,
) -> MnntsStatus {
    guard(|| {
        let d = dims_from(slice(dims, n_vars)?)?;
        let split = Split::new(
            slice(first, n_first)?.to_vec(),
            slice(second, n_second)?.to_vec(),
            n_vars,
        )?;
        let r = lr_test(dataset_ref(data)?, &d, &split, method.into())?;
        write_out(
            out,
            MnntsLrResult {
                statistic: r.lr_statistic,
                df: r.df as u64,
                p_value: r.p_value,
                loglik_full: r.loglik_full,
                loglik_indep: r.loglik_indep,
                approximate: r.approximate,
                clipped: r.clipped,
            },
        )
    })
}

/// Draw `count` observations with a generator seeded by `seed`.
///
/// # Safety
/// `model` must be live and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn mnnts_sample(
    model: *const MnntsModel,
    seed: u64,
    count: usize,
    out: *mut *mut MnntsDataset,
) -> MnntsStatus {
    guard(|| {
        let mut rng = SplitMix64::new(seed);
        let data = sample(model_ref(model)?, &mut rng, count)?;
        write_out(out, Box::into_raw(Box::new(MnntsDataset { data })))
    })
}
