//! C ABI for simrsf.
//!
//! Datasets, predictions and AUC curves are opaque handles created by the
//! library and released with the matching `*_free` function. Every fallible
//! call returns a [`SimrsfStatus`]; on failure [`simrsf_last_error`] gives a
//! message for the calling thread. Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::{CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use libc::{c_char, c_int, size_t};
use simrsf::config::KvConfig;
use simrsf::seed::{derive_seed, Stream};
use simrsf::{
    AucCurve, CaseSeeds, ChfCurve, Dataset, Error, ForestConfig, SbrsfConfig, SbrsfPrediction, SimConfig,
    SurvivalRecord, TreeConfig,
};

/// Result codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SimrsfStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Io = 3,
    Parse = 4,
    InvalidData = 5,
    InsufficientDeaths = 6,
    RetryCapExhausted = 7,
    InvalidWeights = 8,
    Config = 9,
    OutOfRange = 10,
    Panic = 99,
}

pub struct SimrsfDataset(Dataset);
pub struct SimrsfPrediction(SbrsfPrediction);
pub struct SimrsfAucCurve(AucCurve);

/// Settings for one forest. `mtry = 0` selects ceil(sqrt(p)).
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct SimrsfForestParams {
    pub n_trees: size_t,
    pub d0: size_t,
    pub mtry: size_t,
}

/// SB-RSF settings. `threshold <= 0` disables thresholding.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct SimrsfParams {
    pub global: SimrsfForestParams,
    pub per_case: SimrsfForestParams,
    pub seed: u64,
    pub dependent_censoring: bool,
    pub threshold: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> SimrsfStatus {
    match e {
        Error::Io { .. } => SimrsfStatus::Io,
        Error::Csv(_) | Error::Parse { .. } | Error::InvalidEvent { .. } | Error::MissingValue { .. } => {
            SimrsfStatus::Parse
        }
        Error::Schema(_)
        | Error::InvalidData(_)
        | Error::EmptyInput
        | Error::DimensionMismatch { .. }
        | Error::IpcwUndefined { .. } => SimrsfStatus::InvalidData,
        Error::InsufficientDeaths { .. } => SimrsfStatus::InsufficientDeaths,
        Error::RetryCapExhausted { .. } => SimrsfStatus::RetryCapExhausted,
        Error::InvalidWeights(_) => SimrsfStatus::InvalidWeights,
        Error::Config(_) | Error::Grid(_) => SimrsfStatus::Config,
        Error::TestCase { source, .. } => status_of(source),
    }
}

struct Fail(SimrsfStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> SimrsfStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SimrsfStatus::Ok,
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            SimrsfStatus::Panic
        }
    }
}

fn null() -> Fail {
    Fail(SimrsfStatus::NullPointer, "null pointer argument".into())
}

unsafe fn as_ref<'a, T>(p: *const T) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(null)
}

unsafe fn as_str<'a>(p: *const c_char) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(null());
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Fail(SimrsfStatus::InvalidArgument, "string is not UTF-8".into()))
}

unsafe fn put<T>(out: *mut *mut T, value: T) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null());
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

fn forest_config(p: &SimrsfForestParams, n_features: usize, seed: u64) -> Result<ForestConfig, Fail> {
    let mut tree = TreeConfig::default_for(n_features);
    tree.d0 = p.d0;
    if p.mtry > 0 {
        tree.mtry = p.mtry;
    }
    tree.validate(n_features)?;
    Ok(ForestConfig::new(p.n_trees, tree, seed))
}

/// Message for the last failed call on this thread, or NULL. Valid until
/// the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn simrsf_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn simrsf_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Load a CSV with `time`, `event` and optional `id` columns; every other
/// column is a numeric covariate.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn simrsf_dataset_load_csv(path: *const c_char, out: *mut *mut SimrsfDataset) -> SimrsfStatus {
    guard(|| {
        let path = as_str(path)?;
        let schema = simrsf::CsvSchema::infer(path, &[])?;
        put(out, SimrsfDataset(simrsf::load_csv(path, &schema)?))
    })
}

/// Build a dataset from arrays. `covariates` is row-major `n x p`;
/// `event[i]` is 0 or 1.
///
/// # Safety
/// `time` and `event` must point to `n` elements, `covariates` to `n * p`.
#[no_mangle]
pub unsafe extern "C" fn simrsf_dataset_from_arrays(
    time: *const f64,
    event: *const u8,
    covariates: *const f64,
    n: size_t,
    p: size_t,
    out: *mut *mut SimrsfDataset,
) -> SimrsfStatus {
    guard(|| {
        if time.is_null() || event.is_null() || (covariates.is_null() && n * p > 0) {
            return Err(null());
        }
        let time = std::slice::from_raw_parts(time, n);
        let event = std::slice::from_raw_parts(event, n);
        let x = if n * p == 0 {
            &[][..]
        } else {
            std::slice::from_raw_parts(covariates, n * p)
        };
        let records = (0..n)
            .map(|i| {
                let e = match event[i] {
                    0 => false,
                    1 => true,
                    v => {
                        return Err(Fail(
                            SimrsfStatus::InvalidArgument,
                            format!("event[{i}] = {v}, expected 0 or 1"),
                        ))
                    }
                };
                Ok(SurvivalRecord {
                    time: time[i],
                    event: e,
                    covariates: x[i * p..(i + 1) * p].to_vec(),
                })
            })
            .collect::<Result<Vec<_>, Fail>>()?;
        let names = (1..=p).map(|k| format!("x{k}")).collect();
        put(out, SimrsfDataset(Dataset::new(records, names)?))
    })
}

/// Simulate a dataset from `key = value` configuration text (may be NULL
/// or empty for the defaults) with the given seed.
///
/// # Safety
/// `config` must be NULL or NUL-terminated; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn simrsf_simulate(
    config: *const c_char,
    seed: u64,
    out: *mut *mut SimrsfDataset,
) -> SimrsfStatus {
    guard(|| {
        let mut kv = if config.is_null() {
            KvConfig::new()
        } else {
            KvConfig::parse(as_str(config)?)?
        };
        kv.set("seed", seed);
        let data = simrsf::simulate(&SimConfig::from_kv(&kv)?)?;
        put(out, SimrsfDataset(data.dataset))
    })
}

/// Random train/test split; `fraction` is the training share.
///
/// # Safety
/// `data` must be a live handle; `train` and `test` valid pointers.
#[no_mangle]
pub unsafe extern "C" fn simrsf_dataset_split(
    data: *const SimrsfDataset,
    fraction: f64,
    seed: u64,
    train: *mut *mut SimrsfDataset,
    test: *mut *mut SimrsfDataset,
) -> SimrsfStatus {
    guard(|| {
        if train.is_null() || test.is_null() {
            return Err(null());
        }
        let (a, b) = simrsf::split_train_test(&as_ref(data)?.0, fraction, seed)?;
        put(train, SimrsfDataset(a))?;
        put(test, SimrsfDataset(b))
    })
}

/// Number of records, or 0 for NULL.
///
/// # Safety
/// `data` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn simrsf_dataset_len(data: *const SimrsfDataset) -> size_t {
    data.as_ref().map_or(0, |d| d.0.len())
}

/// Number of covariate columns, or 0 for NULL.
///
/// # Safety
/// `data` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn simrsf_dataset_n_features(data: *const SimrsfDataset) -> size_t {
    data.as_ref().map_or(0, |d| d.0.n_features())
}

/// # Safety
/// `data` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn simrsf_dataset_free(data: *mut SimrsfDataset) {
    if !data.is_null() {
        drop(Box::from_raw(data));
    }
}

/// Plain random survival forest. Seeds follow the command-line tool, so
/// the same `seed` gives the same forest as `simrsf run`.
///
/// # Safety
/// All pointers must be valid; handles live.
#[no_mangle]
pub unsafe extern "C" fn simrsf_rsf_fit_predict(
    train: *const SimrsfDataset,
    test: *const SimrsfDataset,
    params: *const SimrsfForestParams,
    seed: u64,
    out: *mut *mut SimrsfPrediction,
) -> SimrsfStatus {
    guard(|| {
        let (train, test) = (&as_ref(train)?.0, &as_ref(test)?.0);
        let cfg = forest_config(
            as_ref(params)?,
            train.n_features(),
            derive_seed(seed, Stream::GlobalForest, 0),
        )?;
        put(out, SimrsfPrediction(simrsf::rsf_fit_predict(train, test, &cfg)?))
    })
}

/// Similarity-based forest: one weighted forest per test record.
///
/// # Safety
/// All pointers must be valid; handles live.
#[no_mangle]
pub unsafe extern "C" fn simrsf_sbrsf_fit_predict(
    train: *const SimrsfDataset,
    test: *const SimrsfDataset,
    params: *const SimrsfParams,
    out: *mut *mut SimrsfPrediction,
) -> SimrsfStatus {
    guard(|| {
        let (train, test) = (&as_ref(train)?.0, &as_ref(test)?.0);
        let p = as_ref(params)?;
        let forest_seed = derive_seed(p.seed, Stream::GlobalForest, 0);
        let cfg = SbrsfConfig {
            global: forest_config(&p.global, train.n_features(), forest_seed)?,
            per_case: forest_config(&p.per_case, train.n_features(), forest_seed)?,
            dependent_censoring: p.dependent_censoring,
            threshold: (p.threshold > 0.0).then_some(p.threshold),
            case_seeds: CaseSeeds::Derived,
            seed: p.seed,
        };
        put(out, SimrsfPrediction(simrsf::sbrsf_fit_predict(train, test, &cfg)?))
    })
}

/// Number of predicted test records, or 0 for NULL.
///
/// # Safety
/// `pred` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn simrsf_prediction_len(pred: *const SimrsfPrediction) -> size_t {
    pred.as_ref().map_or(0, |p| p.0.per_test_chf.len())
}

unsafe fn curve<'a>(pred: *const SimrsfPrediction, case: size_t) -> Result<&'a ChfCurve, Fail> {
    let p = as_ref(pred)?;
    p.0.per_test_chf
        .get(case)
        .ok_or_else(|| Fail(SimrsfStatus::OutOfRange, format!("test case {case} out of range")))
}

/// Cumulative hazard of test record `case` at time `t`.
///
/// # Safety
/// `pred` must be a live handle and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn simrsf_prediction_chf(
    pred: *const SimrsfPrediction,
    case: size_t,
    t: f64,
    out: *mut f64,
) -> SimrsfStatus {
    guard(|| {
        let v = curve(pred, case)?.eval(t);
        *out.as_mut().ok_or_else(null)? = v;
        Ok(())
    })
}

/// Borrow the jump times and values of one predicted curve. The arrays
/// stay valid until the prediction is freed.
///
/// # Safety
/// `pred` must be a live handle; output pointers valid.
#[no_mangle]
pub unsafe extern "C" fn simrsf_prediction_curve(
    pred: *const SimrsfPrediction,
    case: size_t,
    times: *mut *const f64,
    values: *mut *const f64,
    len: *mut size_t,
) -> SimrsfStatus {
    guard(|| {
        let c = curve(pred, case)?;
        if times.is_null() || values.is_null() || len.is_null() {
            return Err(null());
        }
        *times = c.times().as_ptr();
        *values = c.values().as_ptr();
        *len = c.times().len();
        Ok(())
    })
}

/// Sampling weight of training record `i` for test record `j`.
///
/// # Safety
/// `pred` must be a live handle and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn simrsf_prediction_weight(
    pred: *const SimrsfPrediction,
    i: size_t,
    j: size_t,
    out: *mut f64,
) -> SimrsfStatus {
    guard(|| {
        let w = &as_ref(pred)?.0.weight_matrix;
        if i >= w.n_train() || j >= w.n_test() {
            return Err(Fail(
                SimrsfStatus::OutOfRange,
                format!("weight ({i}, {j}) out of range"),
            ));
        }
        *out.as_mut().ok_or_else(null)? = w.get(i, j);
        Ok(())
    })
}

/// # Safety
/// `pred` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn simrsf_prediction_free(pred: *mut SimrsfPrediction) {
    if !pred.is_null() {
        drop(Box::from_raw(pred));
    }
}

/// Time-varying AUC of `pred` on `test` at `n` grid times.
///
/// # Safety
/// `grid` must point to `n` doubles; handles live; `out` valid.
#[no_mangle]
pub unsafe extern "C" fn simrsf_time_varying_auc(
    test: *const SimrsfDataset,
    pred: *const SimrsfPrediction,
    grid: *const f64,
    n: size_t,
    out: *mut *mut SimrsfAucCurve,
) -> SimrsfStatus {
    guard(|| {
        if grid.is_null() && n > 0 {
            return Err(null());
        }
        let grid = if n == 0 {
            &[][..]
        } else {
            std::slice::from_raw_parts(grid, n)
        };
        let curve = simrsf::time_varying_auc(&as_ref(test)?.0, &as_ref(pred)?.0.per_test_chf, grid)?;
        put(out, SimrsfAucCurve(curve))
    })
}

/// Number of grid points, or 0 for NULL.
///
/// # Safety
/// `curve` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn simrsf_auc_len(curve: *const SimrsfAucCurve) -> size_t {
    curve.as_ref().map_or(0, |c| c.0.grid.len())
}

/// AUC at grid point `k`; writes NaN where no case or no control exists.
///
/// # Safety
/// `curve` must be a live handle and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn simrsf_auc_value(curve: *const SimrsfAucCurve, k: size_t, out: *mut f64) -> SimrsfStatus {
    guard(|| {
        let c = &as_ref(curve)?.0;
        let v = c
            .auc
            .get(k)
            .ok_or_else(|| Fail(SimrsfStatus::OutOfRange, format!("grid index {k} out of range")))?;
        *out.as_mut().ok_or_else(null)? = v.unwrap_or(f64::NAN);
        Ok(())
    })
}

/// # Safety
/// `curve` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn simrsf_auc_free(curve: *mut SimrsfAucCurve) {
    if !curve.is_null() {
        drop(Box::from_raw(curve));
    }
}

/// Returns 1 if `status` is [`SimrsfStatus::Ok`].
#[no_mangle]
pub extern "C" fn simrsf_ok(status: SimrsfStatus) -> c_int {
    (status == SimrsfStatus::Ok) as c_int
}
