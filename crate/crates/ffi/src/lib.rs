//! C ABI over `vae-debias`.
//!
//! Datasets and checkpoints are opaque handles created by this library and
//! released with their `_free` function. Every fallible call returns a
//! [`VdStatus`]; on failure [`vd_last_error_message`] describes the error
//! for the calling thread until its next call into the library. Strings
//! returned through `char **` out-parameters are owned by the caller and
//! must be released with [`vd_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{self, AssertUnwindSafe};
use std::path::PathBuf;
use std::ptr;

use vae_debias::data::{load_csv, synth_generate, write_csv, Attribute, EmbeddingDataset, SynthConfig, Task};
use vae_debias::eval::{fairness_report, probe_report, ProbeReport};
use vae_debias::poison_bench::{run_poison_sweep, PoisonSweepConfig};
use vae_debias::trainer::{
    load_checkpoint, save_checkpoint, train, transform_dataset, AdversarialObjective, AdversaryInput, Checkpoint,
    OutputSpace, TrainConfig, TransformMode,
};
use vae_debias::vae::KlReduction;
use vae_debias::Error;

/// Result of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VdStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullArgument = 1,
    /// An argument was out of range or not valid UTF-8.
    InvalidArgument = 2,
    /// Configuration or input data failed validation.
    Validation = 3,
    Io = 4,
    /// Training or evaluation produced a non-finite value.
    Numeric = 5,
    /// A checkpoint was written by an unsupported format version.
    Version = 6,
    /// A checkpoint could not be parsed.
    Corrupt = 7,
    /// An internal panic was caught at the boundary.
    Panic = 8,
}

/// Loaded or generated embedding dataset.
pub struct VdDataset(EmbeddingDataset);

/// Trained model and the standardization it was fit with.
pub struct VdCheckpoint(Checkpoint);

pub const VD_ATTRIBUTE_SEX: u32 = 1;
pub const VD_ATTRIBUTE_AGE: u32 = 2;

pub const VD_OBJECTIVE_CONFUSION: u32 = 0;
pub const VD_OBJECTIVE_REVERSAL: u32 = 1;

pub const VD_ADVERSARY_INPUT_MEAN: u32 = 0;
pub const VD_ADVERSARY_INPUT_SAMPLE: u32 = 1;

pub const VD_KL_MEAN: u32 = 0;
pub const VD_KL_SUM: u32 = 1;

pub const VD_SPACE_RECONSTRUCTION: u32 = 0;
pub const VD_SPACE_LATENT: u32 = 1;

/// Synthetic generator settings. Start from [`vd_synth_config_default`].
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VdSynthConfig {
    pub n_train: usize,
    pub n_test: usize,
    pub dimension: usize,
    pub sex_signal_dims: usize,
    pub age_signal_dims: usize,
    pub task_signal_dims: usize,
    pub overlap_dims: usize,
    pub sex_strength: f64,
    pub age_strength: f64,
    pub task_strength: f64,
    pub task_group_bias: f64,
    pub noise_sigma: f64,
    pub nuisance_rank: usize,
    pub residual_sigma: f64,
    pub age_min: f64,
    pub age_max: f64,
    pub male_fraction: f64,
    pub risk_sharpness: f64,
    pub threshold_1y: f64,
    pub threshold_2y: f64,
    pub seed: u64,
}

impl From<&SynthConfig> for VdSynthConfig {
    fn from(c: &SynthConfig) -> Self {
        VdSynthConfig {
            n_train: c.n_train,
            n_test: c.n_test,
            dimension: c.dimension,
            sex_signal_dims: c.sex_signal_dims,
            age_signal_dims: c.age_signal_dims,
            task_signal_dims: c.task_signal_dims,
            overlap_dims: c.overlap_dims,
            sex_strength: c.sex_strength,
            age_strength: c.age_strength,
            task_strength: c.task_strength,
            task_group_bias: c.task_group_bias,
            noise_sigma: c.noise_sigma,
            nuisance_rank: c.nuisance_rank,
            residual_sigma: c.residual_sigma,
            age_min: c.age_min,
            age_max: c.age_max,
            male_fraction: c.male_fraction,
            risk_sharpness: c.risk_sharpness,
            threshold_1y: c.threshold_1y,
            threshold_2y: c.threshold_2y,
            seed: c.seed,
        }
    }
}

impl From<&VdSynthConfig> for SynthConfig {
    fn from(c: &VdSynthConfig) -> Self {
        SynthConfig {
            n_train: c.n_train,
            n_test: c.n_test,
            dimension: c.dimension,
            sex_signal_dims: c.sex_signal_dims,
            age_signal_dims: c.age_signal_dims,
            task_signal_dims: c.task_signal_dims,
            overlap_dims: c.overlap_dims,
            sex_strength: c.sex_strength,
            age_strength: c.age_strength,
            task_strength: c.task_strength,
            task_group_bias: c.task_group_bias,
            noise_sigma: c.noise_sigma,
            nuisance_rank: c.nuisance_rank,
            residual_sigma: c.residual_sigma,
            age_min: c.age_min,
            age_max: c.age_max,
            male_fraction: c.male_fraction,
            risk_sharpness: c.risk_sharpness,
            threshold_1y: c.threshold_1y,
            threshold_2y: c.threshold_2y,
            seed: c.seed,
        }
    }
}

/// Training settings. Start from [`vd_train_config_default`].
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VdTrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub lr_vae: f64,
    pub lr_adv: f64,
    pub latent_dim: usize,
    pub beta_kl: f64,
    pub lambda_adv: f64,
    pub adv_steps: usize,
    pub seed: u64,
    /// Bitwise OR of `VD_ATTRIBUTE_*`.
    pub attributes: u32,
    /// Width of the single hidden layer of each adversary branch; 0 for a linear adversary.
    pub adversary_hidden: usize,
    /// One of `VD_OBJECTIVE_*`.
    pub objective: u32,
    /// One of `VD_ADVERSARY_INPUT_*`.
    pub adversary_input: u32,
    /// One of `VD_KL_*`.
    pub kl_reduction: u32,
}

impl From<&TrainConfig> for VdTrainConfig {
    fn from(c: &TrainConfig) -> Self {
        let mut attributes = 0;
        for a in &c.attributes {
            attributes |= match a {
                Attribute::Sex => VD_ATTRIBUTE_SEX,
                Attribute::Age => VD_ATTRIBUTE_AGE,
            };
        }
        VdTrainConfig {
            epochs: c.epochs,
            batch_size: c.batch_size,
            lr_vae: c.lr_vae,
            lr_adv: c.lr_adv,
            latent_dim: c.latent_dim,
            beta_kl: c.beta_kl,
            lambda_adv: c.lambda_adv,
            adv_steps: c.adv_steps,
            seed: c.seed,
            attributes,
            adversary_hidden: c.adversary_hidden.first().copied().unwrap_or(0),
            objective: match c.objective {
                AdversarialObjective::Confusion => VD_OBJECTIVE_CONFUSION,
                AdversarialObjective::Reversal => VD_OBJECTIVE_REVERSAL,
            },
            adversary_input: match c.adversary_input {
                AdversaryInput::Mean => VD_ADVERSARY_INPUT_MEAN,
                AdversaryInput::Sample => VD_ADVERSARY_INPUT_SAMPLE,
            },
            kl_reduction: match c.kl_reduction {
                KlReduction::Mean => VD_KL_MEAN,
                KlReduction::Sum => VD_KL_SUM,
            },
        }
    }
}

impl TryFrom<&VdTrainConfig> for TrainConfig {
    type Error = Failure;

    fn try_from(c: &VdTrainConfig) -> Result<Self, Failure> {
        if c.attributes & !(VD_ATTRIBUTE_SEX | VD_ATTRIBUTE_AGE) != 0 {
            return Err(Failure::invalid(format!("unknown attribute bits in {:#x}", c.attributes)));
        }
        let mut attributes = Vec::new();
        if c.attributes & VD_ATTRIBUTE_SEX != 0 {
            attributes.push(Attribute::Sex);
        }
        if c.attributes & VD_ATTRIBUTE_AGE != 0 {
            attributes.push(Attribute::Age);
        }
        let objective = match c.objective {
            VD_OBJECTIVE_CONFUSION => AdversarialObjective::Confusion,
            VD_OBJECTIVE_REVERSAL => AdversarialObjective::Reversal,
            v => return Err(Failure::invalid(format!("unknown objective {v}"))),
        };
        let adversary_input = match c.adversary_input {
            VD_ADVERSARY_INPUT_MEAN => AdversaryInput::Mean,
            VD_ADVERSARY_INPUT_SAMPLE => AdversaryInput::Sample,
            v => return Err(Failure::invalid(format!("unknown adversary input {v}"))),
        };
        let kl_reduction = match c.kl_reduction {
            VD_KL_MEAN => KlReduction::Mean,
            VD_KL_SUM => KlReduction::Sum,
            v => return Err(Failure::invalid(format!("unknown KL reduction {v}"))),
        };
        Ok(TrainConfig {
            epochs: c.epochs,
            batch_size: c.batch_size,
            lr_vae: c.lr_vae,
            lr_adv: c.lr_adv,
            latent_dim: c.latent_dim,
            beta_kl: c.beta_kl,
            lambda_adv: c.lambda_adv,
            adv_steps: c.adv_steps,
            seed: c.seed,
            attributes,
            adversary_hidden: if c.adversary_hidden == 0 { vec![] } else { vec![c.adversary_hidden] },
            objective,
            adversary_input,
            kl_reduction,
        })
    }
}

/// Error carried to the boundary before it becomes a status and message.
#[derive(Debug)]
pub struct Failure {
    status: VdStatus,
    message: String,
}

impl Failure {
    fn null(name: &str) -> Self {
        Failure {
            status: VdStatus::NullArgument,
            message: format!("{name} is null"),
        }
    }

    fn invalid(message: String) -> Self {
        Failure {
            status: VdStatus::InvalidArgument,
            message,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::Io { .. } => VdStatus::Io,
            Error::Numeric(_) => VdStatus::Numeric,
            Error::Version { .. } => VdStatus::Version,
            Error::Corrupt { .. } => VdStatus::Corrupt,
            _ => VdStatus::Validation,
        };
        Failure {
            status,
            message: e.to_string(),
        }
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(message: &str) {
    let c = CString::new(message.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> VdStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match panic::catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => VdStatus::Ok,
        Ok(Err(f)) => {
            set_last_error(&f.message);
            f.status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(&format!("internal panic: {msg}"));
            VdStatus::Panic
        }
    }
}

unsafe fn arg<'a, T>(p: *const T, name: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| Failure::null(name))
}

unsafe fn out_arg<'a, T>(p: *mut T, name: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| Failure::null(name))
}

unsafe fn path_arg(p: *const c_char, name: &str) -> Result<PathBuf, Failure> {
    if p.is_null() {
        return Err(Failure::null(name));
    }
    CStr::from_ptr(p)
        .to_str()
        .map(PathBuf::from)
        .map_err(|_| Failure::invalid(format!("{name} is not valid UTF-8")))
}

fn into_c_string(s: String) -> *mut c_char {
    CString::new(s).expect("JSON and CSV output has no nul bytes").into_raw()
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn vd_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message for the calling thread's last failed call, or null after a
/// success. Valid until the thread's next call into the library.
#[no_mangle]
pub extern "C" fn vd_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// # Safety
/// `s` must be null or a string returned by this library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn vd_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

#[no_mangle]
pub extern "C" fn vd_synth_config_default() -> VdSynthConfig {
    VdSynthConfig::from(&SynthConfig::default())
}

#[no_mangle]
pub extern "C" fn vd_train_config_default() -> VdTrainConfig {
    VdTrainConfig::from(&TrainConfig::default())
}

/// # Safety
/// `config` must point to a valid config and `out` to writable storage.
#[no_mangle]
pub unsafe extern "C" fn vd_synth_generate(config: *const VdSynthConfig, out: *mut *mut VdDataset) -> VdStatus {
    guard(|| {
        let cfg = SynthConfig::from(arg(config, "config")?);
        let out = out_arg(out, "out")?;
        let ds = synth_generate(&cfg)?;
        *out = Box::into_raw(Box::new(VdDataset(ds)));
        Ok(())
    })
}

/// # Safety
/// `path` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn vd_dataset_load_csv(path: *const c_char, out: *mut *mut VdDataset) -> VdStatus {
    guard(|| {
        let path = path_arg(path, "path")?;
        let out = out_arg(out, "out")?;
        let ds = load_csv(&path)?;
        *out = Box::into_raw(Box::new(VdDataset(ds)));
        Ok(())
    })
}

/// # Safety
/// `dataset` must be a live handle and `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn vd_dataset_write_csv(dataset: *const VdDataset, path: *const c_char) -> VdStatus {
    guard(|| {
        let ds = arg(dataset, "dataset")?;
        let path = path_arg(path, "path")?;
        write_csv(&ds.0, &path)?;
        Ok(())
    })
}

/// Number of records, or 0 for a null handle.
///
/// # Safety
/// `dataset` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn vd_dataset_len(dataset: *const VdDataset) -> usize {
    dataset.as_ref().map_or(0, |d| d.0.len())
}

/// Feature dimension, or 0 for a null handle.
///
/// # Safety
/// `dataset` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn vd_dataset_dimension(dataset: *const VdDataset) -> usize {
    dataset.as_ref().map_or(0, |d| d.0.dimension())
}

/// Copies all features row-major into `out`, which must hold exactly
/// `len * dimension` values.
///
/// # Safety
/// `dataset` must be a live handle and `out` valid for `out_len` writes.
#[no_mangle]
pub unsafe extern "C" fn vd_dataset_features(dataset: *const VdDataset, out: *mut f64, out_len: usize) -> VdStatus {
    guard(|| {
        let ds = arg(dataset, "dataset")?;
        if out.is_null() {
            return Err(Failure::null("out"));
        }
        let need = ds.0.len() * ds.0.dimension();
        if out_len != need {
            return Err(Failure::invalid(format!("out_len is {out_len}, need {need}")));
        }
        let dst = std::slice::from_raw_parts_mut(out, out_len);
        for (i, rec) in ds.0.records().iter().enumerate() {
            dst[i * ds.0.dimension()..(i + 1) * ds.0.dimension()].copy_from_slice(&rec.features);
        }
        Ok(())
    })
}

/// # Safety
/// `dataset` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn vd_dataset_free(dataset: *mut VdDataset) {
    if !dataset.is_null() {
        drop(Box::from_raw(dataset));
    }
}

/// # Safety
/// `dataset` must be a live handle, `config` valid and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn vd_train(
    dataset: *const VdDataset,
    config: *const VdTrainConfig,
    out: *mut *mut VdCheckpoint,
) -> VdStatus {
    guard(|| {
        let ds = arg(dataset, "dataset")?;
        let cfg = TrainConfig::try_from(arg(config, "config")?)?;
        let out = out_arg(out, "out")?;
        let ck = train(&ds.0, &cfg)?;
        *out = Box::into_raw(Box::new(VdCheckpoint(ck)));
        Ok(())
    })
}

/// # Safety
/// `path` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn vd_checkpoint_load(path: *const c_char, out: *mut *mut VdCheckpoint) -> VdStatus {
    guard(|| {
        let path = path_arg(path, "path")?;
        let out = out_arg(out, "out")?;
        let ck = load_checkpoint(&path)?;
        *out = Box::into_raw(Box::new(VdCheckpoint(ck)));
        Ok(())
    })
}

/// # Safety
/// `checkpoint` must be a live handle and `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn vd_checkpoint_save(checkpoint: *const VdCheckpoint, path: *const c_char) -> VdStatus {
    guard(|| {
        let ck = arg(checkpoint, "checkpoint")?;
        let path = path_arg(path, "path")?;
        save_checkpoint(&ck.0, &path)?;
        Ok(())
    })
}

/// Latent width, or 0 for a null handle.
///
/// # Safety
/// `checkpoint` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn vd_checkpoint_latent_dim(checkpoint: *const VdCheckpoint) -> usize {
    checkpoint.as_ref().map_or(0, |c| c.0.latent_dim())
}

/// # Safety
/// `checkpoint` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn vd_checkpoint_free(checkpoint: *mut VdCheckpoint) {
    if !checkpoint.is_null() {
        drop(Box::from_raw(checkpoint));
    }
}

/// Debiased copy of `dataset`. `space` is one of `VD_SPACE_*`.
///
/// # Safety
/// Handles must be live and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn vd_transform(
    checkpoint: *const VdCheckpoint,
    dataset: *const VdDataset,
    space: u32,
    stochastic: bool,
    out: *mut *mut VdDataset,
) -> VdStatus {
    guard(|| {
        let ck = arg(checkpoint, "checkpoint")?;
        let ds = arg(dataset, "dataset")?;
        let out = out_arg(out, "out")?;
        let output_space = match space {
            VD_SPACE_RECONSTRUCTION => OutputSpace::Reconstruction,
            VD_SPACE_LATENT => OutputSpace::Latent,
            v => return Err(Failure::invalid(format!("unknown output space {v}"))),
        };
        let mode = TransformMode {
            output_space,
            deterministic: !stochastic,
        };
        let t = transform_dataset(&ck.0, &ds.0, mode)?;
        *out = Box::into_raw(Box::new(VdDataset(t)));
        Ok(())
    })
}

/// Sex, age and both task probes on one dataset, as JSON.
///
/// # Safety
/// `dataset` must be a live handle and `out_json` writable.
#[no_mangle]
pub unsafe extern "C" fn vd_probe_report_json(dataset: *const VdDataset, out_json: *mut *mut c_char) -> VdStatus {
    guard(|| {
        let ds = arg(dataset, "dataset")?;
        let out = out_arg(out_json, "out_json")?;
        let r = ProbeReport::new(probe_report(&ds.0, "dataset", &Attribute::ALL, &Task::ALL)?);
        *out = into_c_string(serde_json::to_string(&r).expect("report serializes"));
        Ok(())
    })
}

/// Before/after probe and EOD report, as JSON.
///
/// # Safety
/// Handles must be live and `out_json` writable.
#[no_mangle]
pub unsafe extern "C" fn vd_fairness_report_json(
    original: *const VdDataset,
    debiased: *const VdDataset,
    out_json: *mut *mut c_char,
) -> VdStatus {
    guard(|| {
        let o = arg(original, "original")?;
        let d = arg(debiased, "debiased")?;
        let out = out_arg(out_json, "out_json")?;
        let r = fairness_report(&o.0, &d.0)?;
        *out = into_c_string(serde_json::to_string(&r).expect("report serializes"));
        Ok(())
    })
}

/// Label-flipping grid with the default fractions, groups and tasks, as CSV.
///
/// # Safety
/// Handles must be live and `out_csv` writable.
#[no_mangle]
pub unsafe extern "C" fn vd_poison_sweep_csv(
    original: *const VdDataset,
    debiased: *const VdDataset,
    seed: u64,
    out_csv: *mut *mut c_char,
) -> VdStatus {
    guard(|| {
        let o = arg(original, "original")?;
        let d = arg(debiased, "debiased")?;
        let out = out_arg(out_csv, "out_csv")?;
        let cfg = PoisonSweepConfig {
            seed,
            ..PoisonSweepConfig::default()
        };
        let curve = run_poison_sweep(&o.0, &d.0, &cfg)?;
        let mut buf = Vec::new();
        curve.write_csv(&mut buf).expect("writing to memory");
        *out = into_c_string(String::from_utf8(buf).expect("CSV is UTF-8"));
        Ok(())
    })
}
