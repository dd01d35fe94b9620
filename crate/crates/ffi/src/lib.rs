//! C ABI over the `neuroadc` simulator.
//!
//! Configurations and traces are opaque heap handles owned by the caller and
//! released with the matching `_free` function. Every fallible call returns a
//! [`NadcStatus`]; on failure [`nadc_last_error`] describes the problem. The
//! message is per thread and stays valid until the next call on that thread.
//! Panics never cross the boundary; they are reported as `NADC_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use neuroadc::config::{self, ExperimentConfig};
use neuroadc::engine::{calibrate_charge_gain, run, SimTrace};
use neuroadc::recon::{decoherence_metrics, monte_carlo, reconstruct};
use neuroadc::stimulus::Waveform;
use neuroadc::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NadcStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Parse = 3,
    Io = 4,
    Calibration = 5,
    Degenerate = 6,
    Runtime = 7,
    OutOfRange = 8,
    Panic = 9,
}

/// One output spike.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct NadcSpike {
    pub step: u64,
    pub time_seconds: f64,
    pub row: usize,
    pub col: usize,
    pub id: usize,
}

/// Opaque experiment configuration.
pub struct NadcConfig(ExperimentConfig);

/// Opaque simulation result.
pub struct NadcTrace(SimTrace);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(err: &Error) -> NadcStatus {
    match err {
        Error::InvalidParameter { .. } | Error::Contract(_) => NadcStatus::InvalidArgument,
        Error::Parse { .. } => NadcStatus::Parse,
        Error::Io { .. } => NadcStatus::Io,
        Error::Calibration { .. } => NadcStatus::Calibration,
        Error::Degenerate(_) => NadcStatus::Degenerate,
        Error::SamplesExhausted { .. } => NadcStatus::Runtime,
        Error::Trial { source, .. } => status_of(source),
    }
}

/// Runs `f`, converting errors and panics into a status.
fn guard(f: impl FnOnce() -> Result<(), (NadcStatus, String)>) -> NadcStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => NadcStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            NadcStatus::Panic
        }
    }
}

fn lib<T>(r: neuroadc::Result<T>) -> Result<T, (NadcStatus, String)> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

fn null(what: &str) -> (NadcStatus, String) {
    (NadcStatus::NullPointer, format!("{what} is null"))
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, (NadcStatus, String)> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| {
        (
            NadcStatus::InvalidArgument,
            format!("{what} is not valid UTF-8"),
        )
    })
}

unsafe fn out_arg<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, (NadcStatus, String)> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn config_ref<'a>(
    p: *const NadcConfig,
) -> Result<&'a ExperimentConfig, (NadcStatus, String)> {
    p.as_ref().map(|c| &c.0).ok_or_else(|| null("config"))
}

unsafe fn config_mut<'a>(
    p: *mut NadcConfig,
) -> Result<&'a mut ExperimentConfig, (NadcStatus, String)> {
    p.as_mut().map(|c| &mut c.0).ok_or_else(|| null("config"))
}

unsafe fn trace_ref<'a>(p: *const NadcTrace) -> Result<&'a SimTrace, (NadcStatus, String)> {
    p.as_ref().map(|t| &t.0).ok_or_else(|| null("trace"))
}

fn boxed(cfg: ExperimentConfig) -> *mut NadcConfig {
    Box::into_raw(Box::new(NadcConfig(cfg)))
}

/// Last error message on this thread, or null if the last call succeeded.
#[no_mangle]
pub extern "C" fn nadc_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library defaults (7x30 array, sawtooth input).
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn nadc_config_default(out: *mut *mut NadcConfig) -> NadcStatus {
    guard(|| {
        *out_arg(out, "out")? = boxed(ExperimentConfig::default());
        Ok(())
    })
}

/// `paper-sine-50` or `paper-ramp-10`.
///
/// # Safety
/// `name` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn nadc_config_from_preset(
    name: *const c_char,
    out: *mut *mut NadcConfig,
) -> NadcStatus {
    guard(|| {
        let name = str_arg(name, "name")?;
        let out = out_arg(out, "out")?;
        *out = boxed(lib(config::preset(name))?);
        Ok(())
    })
}

/// Loads a config file over the library defaults.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn nadc_config_from_file(
    path: *const c_char,
    out: *mut *mut NadcConfig,
) -> NadcStatus {
    guard(|| {
        let path = str_arg(path, "path")?;
        let out = out_arg(out, "out")?;
        *out = boxed(lib(config::load(path, &ExperimentConfig::default()))?);
        Ok(())
    })
}

/// Parses config text over the library defaults.
///
/// # Safety
/// `text` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn nadc_config_from_str(
    text: *const c_char,
    out: *mut *mut NadcConfig,
) -> NadcStatus {
    guard(|| {
        let text = str_arg(text, "text")?;
        let out = out_arg(out, "out")?;
        *out = boxed(lib(config::parse_str(text))?);
        Ok(())
    })
}

/// Renders the config as text. Free the result with [`nadc_string_free`].
///
/// # Safety
/// `config` must come from this library; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn nadc_config_render(
    config: *const NadcConfig,
    out: *mut *mut c_char,
) -> NadcStatus {
    guard(|| {
        let cfg = config_ref(config)?;
        let out = out_arg(out, "out")?;
        let text =
            CString::new(config::render(cfg)).map_err(|e| (NadcStatus::Runtime, e.to_string()))?;
        *out = text.into_raw();
        Ok(())
    })
}

/// # Safety
/// `s` must be null or come from [`nadc_config_render`].
#[no_mangle]
pub unsafe extern "C" fn nadc_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// # Safety
/// `config` must be null or come from this library, and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn nadc_config_free(config: *mut NadcConfig) {
    if !config.is_null() {
        drop(Box::from_raw(config));
    }
}

/// # Safety
/// `config` must come from this library.
#[no_mangle]
pub unsafe extern "C" fn nadc_config_set_seed(config: *mut NadcConfig, seed: u64) -> NadcStatus {
    guard(|| {
        config_mut(config)?.sim.seed = seed;
        Ok(())
    })
}

/// # Safety
/// `config` must come from this library.
#[no_mangle]
pub unsafe extern "C" fn nadc_config_set_duration(
    config: *mut NadcConfig,
    steps: u64,
) -> NadcStatus {
    guard(|| {
        if steps == 0 {
            return Err((
                NadcStatus::InvalidArgument,
                "duration must be >= 1 step".into(),
            ));
        }
        config_mut(config)?.sim.duration_steps = steps;
        Ok(())
    })
}

/// Replaces the input waveform with a constant current.
///
/// # Safety
/// `config` must come from this library.
#[no_mangle]
pub unsafe extern "C" fn nadc_config_set_constant_input(
    config: *mut NadcConfig,
    amps: f64,
) -> NadcStatus {
    guard(|| {
        let cfg = config_mut(config)?;
        let w = Waveform::Constant { amps };
        lib(w.validate())?;
        cfg.sim.waveform = w;
        cfg.waveform_file = None;
        Ok(())
    })
}

/// # Safety
/// `config` must come from this library.
#[no_mangle]
pub unsafe extern "C" fn nadc_config_set_inhibition(
    config: *mut NadcConfig,
    enabled: bool,
) -> NadcStatus {
    guard(|| {
        config_mut(config)?.sim.policy.enabled = enabled;
        Ok(())
    })
}

/// # Safety
/// `config` must come from this library.
#[no_mangle]
pub unsafe extern "C" fn nadc_config_set_charge_gain(
    config: *mut NadcConfig,
    charge_gain: f64,
) -> NadcStatus {
    guard(|| {
        let cfg = config_mut(config)?;
        let mut neuron = cfg.sim.neuron;
        neuron.charge_gain = charge_gain;
        lib(neuron.validate())?;
        cfg.sim.neuron = neuron;
        Ok(())
    })
}

/// # Safety
/// `config` must come from this library; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn nadc_config_n_neurons(
    config: *const NadcConfig,
    out: *mut usize,
) -> NadcStatus {
    guard(|| {
        let n = config_ref(config)?.sim.n_neurons();
        *out_arg(out, "out")? = n;
        Ok(())
    })
}

/// Simulates the configured run.
///
/// # Safety
/// `config` must come from this library; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn nadc_run(
    config: *const NadcConfig,
    out: *mut *mut NadcTrace,
) -> NadcStatus {
    guard(|| {
        let cfg = config_ref(config)?;
        let out = out_arg(out, "out")?;
        let trace = lib(run(&cfg.sim))?;
        *out = Box::into_raw(Box::new(NadcTrace(trace)));
        Ok(())
    })
}

/// # Safety
/// `trace` must be null or come from [`nadc_run`], and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn nadc_trace_free(trace: *mut NadcTrace) {
    if !trace.is_null() {
        drop(Box::from_raw(trace));
    }
}

/// # Safety
/// `trace` must come from [`nadc_run`]; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn nadc_trace_spike_count(
    trace: *const NadcTrace,
    out: *mut usize,
) -> NadcStatus {
    guard(|| {
        let n = trace_ref(trace)?.spikes.len();
        *out_arg(out, "out")? = n;
        Ok(())
    })
}

/// # Safety
/// `trace` must come from [`nadc_run`]; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn nadc_trace_spike(
    trace: *const NadcTrace,
    index: usize,
    out: *mut NadcSpike,
) -> NadcStatus {
    guard(|| {
        let t = trace_ref(trace)?;
        let out = out_arg(out, "out")?;
        let s = t.spikes.get(index).ok_or_else(|| {
            (
                NadcStatus::OutOfRange,
                format!(
                    "spike index {index} out of range ({} spikes)",
                    t.spikes.len()
                ),
            )
        })?;
        *out = NadcSpike {
            step: s.step,
            time_seconds: s.time_seconds,
            row: s.row,
            col: s.col,
            id: s.id,
        };
        Ok(())
    })
}

/// Inter-spike-interval statistics of the aggregate spike train.
///
/// # Safety
/// `trace` must come from [`nadc_run`]; the outputs must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn nadc_trace_decoherence(
    trace: *const NadcTrace,
    isi_cv: *mut f64,
    burst_fraction: *mut f64,
) -> NadcStatus {
    guard(|| {
        let t = trace_ref(trace)?;
        let cv = out_arg(isi_cv, "isi_cv")?;
        let bf = out_arg(burst_fraction, "burst_fraction")?;
        let d = lib(decoherence_metrics(t, t.config.scan.scan_step_seconds))?;
        *cv = d.isi_cv;
        *bf = d.burst_fraction;
        Ok(())
    })
}

/// Runs the configuration and returns the held-out low-pass reconstruction error.
///
/// # Safety
/// `config` must come from this library; `rms_pct` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn nadc_reconstruct_rms(
    config: *const NadcConfig,
    rms_pct: *mut f64,
) -> NadcStatus {
    guard(|| {
        let cfg = config_ref(config)?;
        let out = out_arg(rms_pct, "rms_pct")?;
        let trace = lib(run(&cfg.sim))?;
        *out = lib(reconstruct(&trace, &cfg.recon))?.rms_pct;
        Ok(())
    })
}

/// Repeats the reconstruction with seeds `seed..seed + n_trials`.
/// `per_trial` may be null; otherwise it must hold `n_trials` doubles.
///
/// # Safety
/// Pointers must be valid as described.
#[no_mangle]
pub unsafe extern "C" fn nadc_monte_carlo(
    config: *const NadcConfig,
    n_trials: usize,
    mean_pct: *mut f64,
    std_pct: *mut f64,
    per_trial: *mut f64,
) -> NadcStatus {
    guard(|| {
        let cfg = config_ref(config)?;
        let mean = out_arg(mean_pct, "mean_pct")?;
        let std = out_arg(std_pct, "std_pct")?;
        let r = lib(monte_carlo(&cfg.sim, &cfg.recon, n_trials))?;
        *mean = r.mean_pct;
        *std = r.std_pct;
        if !per_trial.is_null() {
            std::slice::from_raw_parts_mut(per_trial, n_trials)
                .copy_from_slice(&r.per_trial_rms_pct);
        }
        Ok(())
    })
}

/// Finds the charge gain giving `target_rate` spikes per second. The config
/// is not modified.
///
/// # Safety
/// `config` must come from this library; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn nadc_calibrate_charge_gain(
    config: *const NadcConfig,
    target_rate: f64,
    out: *mut f64,
) -> NadcStatus {
    guard(|| {
        let cfg = config_ref(config)?;
        let out = out_arg(out, "out")?;
        *out = lib(calibrate_charge_gain(target_rate, &cfg.sim))?;
        Ok(())
    })
}
