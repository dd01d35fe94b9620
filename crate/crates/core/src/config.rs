//! Configuration files and experiment presets.
//!
//! The file format is flat `key = value` text grouped in sections:
//!
//! ```text
//! # comment
//! [scan]
//! rows = 1
//! cols = 10
//! [waveform]
//! kind = sawtooth
//! max_amps = 1e-7
//! ```
//!
//! A key may also be written fully qualified outside any section
//! (`scan.cols = 10`). Unknown keys are rejected. Every key starts from a
//! base configuration (the defaults, or a preset) and only the keys present
//! in the file override it.
//!
//! | key | default | meaning |
//! |-----|---------|---------|
//! | `scan.rows` | 7 | array rows |
//! | `scan.cols` | 30 | array columns |
//! | `scan.scan_step_seconds` | 3e-8 | one selection step |
//! | `scan.gen_ticks_per_step` | 10 | inhibition clock ticks per step |
//! | `neuron.charge_gain` | 1e13 | threshold units per coulomb |
//! | `neuron.i_exc_max` | 8e-7 | input clamp, amperes, or `none` |
//! | `neuron.i_inh` | 4e-6 | inhibition discharge current, amperes |
//! | `neuron.leak_tau` | inf | leak time constant, seconds, or `inf` |
//! | `neuron.v_max` | 2.0 | saturation ceiling, threshold units |
//! | `policy.enabled` | true | lateral inhibition on/off |
//! | `policy.base_width_ticks` | 8 | width at scan distance 1 |
//! | `policy.decrement_ticks` | 1 | width reduction per position |
//! | `policy.min_width_ticks` | 1 | width floor |
//! | `policy.jitter_ticks` | 1 | uniform jitter half-range |
//! | `policy.fanout` | all | `all` or a count |
//! | `waveform.kind` | sawtooth | `sine`, `sawtooth`, `constant`, `samples` |
//! | `waveform.offset_amps`, `peak_to_peak_amps`, `frequency_hz`, `phase_rad` | | sine |
//! | `waveform.min_amps`, `max_amps`, `period_seconds` | 0, 1e-7, 5e-5 | sawtooth |
//! | `waveform.amps` | | constant |
//! | `waveform.file`, `sample_period_seconds` | | samples (one value per line) |
//! | `mismatch.sigma_exc` | 0.2 | input mirror mismatch |
//! | `mismatch.sigma_inh` | 0.3 | inhibition path mismatch |
//! | `mismatch.bound_lo`, `bound_hi` | 0.1, 2.0 | truncation bounds |
//! | `mismatch.seed` | run | `run` (use `run.seed`) or an integer |
//! | `run.duration_steps` | 3334 | scan steps to simulate |
//! | `run.seed` | 0 | rng seed |
//! | `run.record_membrane` | false | keep per-step membrane voltages |
//! | `recon.window_steps` | sweep | counting window, `sweep` or steps |
//! | `recon.alpha` | 0.1 | low-pass coefficient |
//!
//! The neuron tick duration is not a key; it is always
//! `scan_step_seconds / gen_ticks_per_step`.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::engine::{calibrate_charge_gain, MismatchSpec, SimConfig};
use crate::error::{Error, Result};
use crate::inhibition::{Fanout, InhibitionPolicy};
use crate::neuron::NeuronParams;
use crate::recon::ReconConfig;
use crate::scan::ScanConfig;
use crate::stimulus::{load_samples, Waveform};

/// Target aggregate output rate of the ten-neuron ramp preset, spikes per second.
pub const RAMP_TARGET_RATE: f64 = 6.6e6;

pub const PRESETS: [&str; 2] = ["paper-sine-50", "paper-ramp-10"];

/// Everything needed to run and score one experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub sim: SimConfig,
    pub recon: ReconConfig,
    /// Source of a `samples` waveform, kept so the config can be re-rendered.
    pub waveform_file: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let mut sim = SimConfig {
            scan: ScanConfig::default(),
            neuron: NeuronParams {
                charge_gain: 1.0e13,
                ..NeuronParams::default()
            },
            policy: InhibitionPolicy::default(),
            waveform: Waveform::ramp_sawtooth(),
            mismatch: MismatchSpec::default(),
            duration_steps: 3334,
            seed: 0,
            record_membrane: false,
        };
        sim.sync_tick();
        ExperimentConfig {
            sim,
            recon: ReconConfig::default(),
            waveform_file: None,
        }
    }
}

/// Lateral-inhibition current at which a base-width pulse discharges half a
/// threshold at unit mismatch, given the other neuron parameters.
pub fn half_threshold_i_inh(charge_gain: f64, base_width_ticks: u32, tick_seconds: f64) -> f64 {
    0.5 / (f64::from(base_width_ticks) * charge_gain * tick_seconds)
}

/// Charge gain at which a base-width pulse of `i_inh` discharges half a threshold.
pub fn half_threshold_gain(i_inh: f64, base_width_ticks: u32, tick_seconds: f64) -> f64 {
    0.5 / (f64::from(base_width_ticks) * i_inh * tick_seconds)
}

/// Ten neurons in one row driven by the 0 -> 100 nA -> 0 triangle over
/// 50 us, 33.3 MHz column shift, 333 MHz inhibition clock, 800 nA input
/// clamp and 4 uA inhibition current, no mismatch. Runs two input periods.
/// `charge_gain` is calibrated to 6.6 spikes/us at seed 0.
pub fn ramp_10() -> Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::default();
    let sim = &mut cfg.sim;
    sim.scan = ScanConfig {
        rows: 1,
        cols: 10,
        scan_step_seconds: 30e-9,
        gen_ticks_per_step: 10,
    };
    sim.neuron.i_exc_max = 800e-9;
    sim.neuron.i_inh = 4e-6;
    sim.waveform = Waveform::ramp_sawtooth();
    sim.mismatch = MismatchSpec::none();
    sim.duration_steps = 3334;
    sim.seed = 0;
    sim.sync_tick();
    // Inhibition-free starting point: each neuron carries a tenth of the
    // target rate at the 50 nA mean input.
    sim.neuron.charge_gain = RAMP_TARGET_RATE / (sim.n_neurons() as f64 * 50e-9);
    sim.neuron.charge_gain = calibrate_charge_gain(RAMP_TARGET_RATE, sim)?;
    Ok(cfg)
}

/// Fifty neurons in one row driven by a 2 uA + 1 uA peak-to-peak sine whose
/// period is 2000 sweeps, 20 % / 30 % mismatch. One sweep at 2 uA raises
/// the membrane by 0.1 threshold; the input clamp is off. The inhibition
/// current is set so a base-width pulse discharges half a threshold.
/// Runs two input periods.
pub fn sine_50() -> ExperimentConfig {
    let mut cfg = ExperimentConfig::default();
    let sim = &mut cfg.sim;
    sim.scan = ScanConfig {
        rows: 1,
        cols: 50,
        scan_step_seconds: 30e-9,
        gen_ticks_per_step: 10,
    };
    sim.sync_tick();
    let sweep = sim.scan.sweep_seconds();
    sim.neuron.charge_gain = 0.1 / (2e-6 * sweep);
    sim.neuron.i_exc_max = f64::INFINITY;
    sim.neuron.i_inh = half_threshold_i_inh(
        sim.neuron.charge_gain,
        sim.policy.base_width_ticks,
        sim.neuron.tick_seconds,
    );
    sim.waveform = Waveform::Sine {
        offset_amps: 2e-6,
        peak_to_peak_amps: 1e-6,
        frequency_hz: 1.0 / (2000.0 * sweep),
        phase_rad: 0.0,
    };
    sim.mismatch = MismatchSpec::default();
    sim.duration_steps = 2 * 2000 * sim.n_neurons() as u64;
    sim.seed = 0;
    cfg
}

pub fn preset(name: &str) -> Result<ExperimentConfig> {
    match name {
        "paper-sine-50" => Ok(sine_50()),
        "paper-ramp-10" => ramp_10(),
        other => Err(Error::invalid(
            "preset",
            format!(
                "unknown preset {other:?}; expected one of {}",
                PRESETS.join(", ")
            ),
        )),
    }
}

const WAVEFORM_KEYS: [&str; 11] = [
    "kind",
    "offset_amps",
    "peak_to_peak_amps",
    "frequency_hz",
    "phase_rad",
    "min_amps",
    "max_amps",
    "period_seconds",
    "amps",
    "file",
    "sample_period_seconds",
];

fn known_keys() -> Vec<String> {
    let mut keys: Vec<String> = [
        "scan.rows",
        "scan.cols",
        "scan.scan_step_seconds",
        "scan.gen_ticks_per_step",
        "neuron.charge_gain",
        "neuron.i_exc_max",
        "neuron.i_inh",
        "neuron.leak_tau",
        "neuron.v_max",
        "policy.enabled",
        "policy.base_width_ticks",
        "policy.decrement_ticks",
        "policy.min_width_ticks",
        "policy.jitter_ticks",
        "policy.fanout",
        "mismatch.sigma_exc",
        "mismatch.sigma_inh",
        "mismatch.bound_lo",
        "mismatch.bound_hi",
        "mismatch.seed",
        "run.duration_steps",
        "run.seed",
        "run.record_membrane",
        "recon.window_steps",
        "recon.alpha",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    keys.extend(WAVEFORM_KEYS.iter().map(|k| format!("waveform.{k}")));
    keys
}

struct Entry {
    value: String,
    line: usize,
}

/// Key/value pairs read from a config file, consumed as they are applied.
struct Entries {
    map: BTreeMap<String, Entry>,
}

impl Entries {
    fn parse(text: &str) -> Result<Self> {
        let known = known_keys();
        let mut map = BTreeMap::new();
        let mut section: Option<String> = None;
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('[') {
                let name = rest.strip_suffix(']').ok_or_else(|| Error::Parse {
                    line: line_no,
                    key: line.to_string(),
                    msg: "unterminated section header".into(),
                })?;
                section = Some(name.trim().to_string());
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| Error::Parse {
                line: line_no,
                key: line.to_string(),
                msg: "expected `key = value`".into(),
            })?;
            let k = k.trim();
            let key = match &section {
                Some(s) if !k.contains('.') => format!("{s}.{k}"),
                _ => k.to_string(),
            };
            if !known.contains(&key) {
                return Err(Error::Parse {
                    line: line_no,
                    key,
                    msg: "unknown key".into(),
                });
            }
            let entry = Entry {
                value: v.trim().to_string(),
                line: line_no,
            };
            if let Some(prev) = map.insert(key.clone(), entry) {
                return Err(Error::Parse {
                    line: line_no,
                    key,
                    msg: format!("duplicate key (first set on line {})", prev.line),
                });
            }
        }
        Ok(Entries { map })
    }

    fn take<T>(
        &mut self,
        key: &str,
        parse: impl FnOnce(&str) -> std::result::Result<T, String>,
    ) -> Result<Option<(T, usize)>> {
        match self.map.remove(key) {
            None => Ok(None),
            Some(e) => parse(&e.value)
                .map(|v| Some((v, e.line)))
                .map_err(|msg| Error::Parse {
                    line: e.line,
                    key: key.to_string(),
                    msg,
                }),
        }
    }

    fn set<T>(
        &mut self,
        key: &str,
        target: &mut T,
        parse: impl FnOnce(&str) -> std::result::Result<T, String>,
    ) -> Result<()> {
        if let Some((v, _)) = self.take(key, parse)? {
            *target = v;
        }
        Ok(())
    }

    fn line_of(&self, key: &str) -> Option<usize> {
        self.map.get(key).map(|e| e.line)
    }
}

fn real(s: &str) -> std::result::Result<f64, String> {
    s.parse::<f64>()
        .map_err(|_| format!("expected a number, got {s:?}"))
}

fn real_or_inf(word: &'static str) -> impl Fn(&str) -> std::result::Result<f64, String> {
    move |s| {
        if s.eq_ignore_ascii_case(word) {
            Ok(f64::INFINITY)
        } else {
            real(s)
        }
    }
}

fn uint<T: std::str::FromStr>(s: &str) -> std::result::Result<T, String> {
    s.parse::<T>()
        .map_err(|_| format!("expected a non-negative integer, got {s:?}"))
}

fn boolean(s: &str) -> std::result::Result<bool, String> {
    match s {
        "true" | "yes" | "on" | "1" => Ok(true),
        "false" | "no" | "off" | "0" => Ok(false),
        _ => Err(format!("expected true or false, got {s:?}")),
    }
}

fn fanout(s: &str) -> std::result::Result<Fanout, String> {
    if s == "all" {
        Ok(Fanout::All)
    } else {
        uint(s).map(Fanout::Limited)
    }
}

fn run_or_seed(s: &str) -> std::result::Result<Option<u64>, String> {
    if s == "run" {
        Ok(None)
    } else {
        uint(s).map(Some)
    }
}

fn sweep_or_steps(s: &str) -> std::result::Result<Option<u64>, String> {
    if s == "sweep" {
        Ok(None)
    } else {
        uint(s).map(Some)
    }
}

fn kind_of(w: &Waveform) -> &'static str {
    match w {
        Waveform::Sine { .. } => "sine",
        Waveform::Sawtooth { .. } => "sawtooth",
        Waveform::Constant { .. } => "constant",
        Waveform::Samples { .. } => "samples",
    }
}

/// Attaches the file line of the offending key to a validation error.
fn locate(err: Error, lines: &BTreeMap<String, usize>) -> Error {
    if let Error::InvalidParameter { name, reason } = &err {
        if let Some(&line) = lines.get(*name) {
            return Error::Parse {
                line,
                key: name.to_string(),
                msg: reason.clone(),
            };
        }
    }
    err
}

/// Parses config text on top of `base`. Relative sample-file paths resolve
/// against `dir`.
pub fn parse_with_base(
    text: &str,
    base: &ExperimentConfig,
    dir: Option<&Path>,
) -> Result<ExperimentConfig> {
    let mut e = Entries::parse(text)?;
    let mut cfg = base.clone();

    // Remember where each key was for error reporting after validation.
    let lines: BTreeMap<String, usize> = e.map.iter().map(|(k, v)| (k.clone(), v.line)).collect();

    let sim = &mut cfg.sim;
    e.set("scan.rows", &mut sim.scan.rows, uint)?;
    e.set("scan.cols", &mut sim.scan.cols, uint)?;
    e.set(
        "scan.scan_step_seconds",
        &mut sim.scan.scan_step_seconds,
        real,
    )?;
    e.set(
        "scan.gen_ticks_per_step",
        &mut sim.scan.gen_ticks_per_step,
        uint,
    )?;
    e.set("neuron.charge_gain", &mut sim.neuron.charge_gain, real)?;
    e.set(
        "neuron.i_exc_max",
        &mut sim.neuron.i_exc_max,
        real_or_inf("none"),
    )?;
    e.set("neuron.i_inh", &mut sim.neuron.i_inh, real)?;
    e.set(
        "neuron.leak_tau",
        &mut sim.neuron.leak_tau,
        real_or_inf("inf"),
    )?;
    e.set("neuron.v_max", &mut sim.neuron.v_max, real)?;
    e.set("policy.enabled", &mut sim.policy.enabled, boolean)?;
    e.set(
        "policy.base_width_ticks",
        &mut sim.policy.base_width_ticks,
        uint,
    )?;
    e.set(
        "policy.decrement_ticks",
        &mut sim.policy.decrement_ticks,
        uint,
    )?;
    e.set(
        "policy.min_width_ticks",
        &mut sim.policy.min_width_ticks,
        uint,
    )?;
    e.set("policy.jitter_ticks", &mut sim.policy.jitter_ticks, uint)?;
    e.set("policy.fanout", &mut sim.policy.fanout, fanout)?;
    e.set("mismatch.sigma_exc", &mut sim.mismatch.sigma_exc, real)?;
    e.set("mismatch.sigma_inh", &mut sim.mismatch.sigma_inh, real)?;
    e.set("mismatch.bound_lo", &mut sim.mismatch.bounds.0, real)?;
    e.set("mismatch.bound_hi", &mut sim.mismatch.bounds.1, real)?;
    e.set("mismatch.seed", &mut sim.mismatch.seed, run_or_seed)?;
    e.set("run.duration_steps", &mut sim.duration_steps, uint)?;
    e.set("run.seed", &mut sim.seed, uint)?;
    e.set("run.record_membrane", &mut sim.record_membrane, boolean)?;
    e.set(
        "recon.window_steps",
        &mut cfg.recon.window_steps,
        sweep_or_steps,
    )?;
    e.set("recon.alpha", &mut cfg.recon.alpha, real)?;
    sim.sync_tick();

    let kind_line = e.line_of("waveform.kind");
    let kind = match e.take("waveform.kind", |s| Ok(s.to_string()))? {
        Some((k, _)) => k,
        None => kind_of(&sim.waveform).to_string(),
    };
    let same_kind = kind == kind_of(&sim.waveform);
    let base_wave = sim.waveform.clone();
    let field = |e: &mut Entries, name: &str, fallback: Option<f64>| -> Result<f64> {
        let key = format!("waveform.{name}");
        match e.take(&key, real)? {
            Some((v, _)) => Ok(v),
            None => fallback.ok_or_else(|| Error::Parse {
                line: kind_line.unwrap_or(0),
                key: key.clone(),
                msg: format!("required for waveform kind {kind:?}"),
            }),
        }
    };
    let mut file_out = cfg.waveform_file.clone();
    sim.waveform = match kind.as_str() {
        "sine" => {
            let b = match (same_kind, &base_wave) {
                (
                    true,
                    Waveform::Sine {
                        offset_amps,
                        peak_to_peak_amps,
                        frequency_hz,
                        phase_rad,
                    },
                ) => [
                    Some(*offset_amps),
                    Some(*peak_to_peak_amps),
                    Some(*frequency_hz),
                    Some(*phase_rad),
                ],
                _ => [None, None, None, Some(0.0)],
            };
            Waveform::Sine {
                offset_amps: field(&mut e, "offset_amps", b[0])?,
                peak_to_peak_amps: field(&mut e, "peak_to_peak_amps", b[1])?,
                frequency_hz: field(&mut e, "frequency_hz", b[2])?,
                phase_rad: field(&mut e, "phase_rad", b[3])?,
            }
        }
        "sawtooth" => {
            let b = match (same_kind, &base_wave) {
                (
                    true,
                    Waveform::Sawtooth {
                        min_amps,
                        max_amps,
                        period_seconds,
                    },
                ) => [Some(*min_amps), Some(*max_amps), Some(*period_seconds)],
                _ => [Some(0.0), None, None],
            };
            Waveform::Sawtooth {
                min_amps: field(&mut e, "min_amps", b[0])?,
                max_amps: field(&mut e, "max_amps", b[1])?,
                period_seconds: field(&mut e, "period_seconds", b[2])?,
            }
        }
        "constant" => {
            let b = match (same_kind, &base_wave) {
                (true, Waveform::Constant { amps }) => Some(*amps),
                _ => None,
            };
            Waveform::Constant {
                amps: field(&mut e, "amps", b)?,
            }
        }
        "samples" => {
            let (base_period, base_values) = match (same_kind, &base_wave) {
                (
                    true,
                    Waveform::Samples {
                        values,
                        sample_period_seconds,
                    },
                ) => (Some(*sample_period_seconds), Some(values.clone())),
                _ => (None, None),
            };
            let period = field(&mut e, "sample_period_seconds", base_period)?;
            match e.take("waveform.file", |s| Ok(PathBuf::from(s)))? {
                Some((path, line)) => {
                    let resolved = match dir {
                        Some(d) if path.is_relative() => d.join(&path),
                        _ => path.clone(),
                    };
                    file_out = Some(path);
                    load_samples(&resolved, period).map_err(|err| Error::Parse {
                        line,
                        key: "waveform.file".into(),
                        msg: err.to_string(),
                    })?
                }
                None => match base_values {
                    Some(values) => Waveform::Samples {
                        values,
                        sample_period_seconds: period,
                    },
                    None => {
                        return Err(Error::Parse {
                            line: kind_line.unwrap_or(0),
                            key: "waveform.file".into(),
                            msg: "required for waveform kind \"samples\"".into(),
                        })
                    }
                },
            }
        }
        other => {
            return Err(Error::Parse {
                line: kind_line.unwrap_or(0),
                key: "waveform.kind".into(),
                msg: format!("unknown kind {other:?}"),
            })
        }
    };
    if kind != "samples" {
        file_out = None;
    }
    cfg.waveform_file = file_out;

    if let Some((key, entry)) = e.map.iter().next() {
        return Err(Error::Parse {
            line: entry.line,
            key: key.clone(),
            msg: format!("not valid for waveform kind {kind:?}"),
        });
    }

    cfg.sim.validate().map_err(|err| locate(err, &lines))?;
    cfg.recon.validate().map_err(|err| locate(err, &lines))?;
    Ok(cfg)
}

pub fn parse_str(text: &str) -> Result<ExperimentConfig> {
    parse_with_base(text, &ExperimentConfig::default(), None)
}

pub fn load(path: impl AsRef<Path>, base: &ExperimentConfig) -> Result<ExperimentConfig> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_with_base(&text, base, path.parent())
}

/// Resolves a preset name or a config file path.
pub fn parse_config(source: &str) -> Result<ExperimentConfig> {
    if PRESETS.contains(&source) {
        preset(source)
    } else {
        load(source, &ExperimentConfig::default())
    }
}

fn f(x: f64) -> String {
    format!("{x:?}")
}

/// Renders every key. Parsing the output reproduces `cfg` exactly.
pub fn render(cfg: &ExperimentConfig) -> String {
    let s = &cfg.sim;
    let mut out = String::new();
    let w = &mut out;
    let _ = writeln!(w, "[scan]");
    let _ = writeln!(w, "rows = {}", s.scan.rows);
    let _ = writeln!(w, "cols = {}", s.scan.cols);
    let _ = writeln!(w, "scan_step_seconds = {}", f(s.scan.scan_step_seconds));
    let _ = writeln!(w, "gen_ticks_per_step = {}", s.scan.gen_ticks_per_step);
    let _ = writeln!(w, "\n[neuron]");
    let _ = writeln!(w, "charge_gain = {}", f(s.neuron.charge_gain));
    if s.neuron.i_exc_max.is_infinite() {
        let _ = writeln!(w, "i_exc_max = none");
    } else {
        let _ = writeln!(w, "i_exc_max = {}", f(s.neuron.i_exc_max));
    }
    let _ = writeln!(w, "i_inh = {}", f(s.neuron.i_inh));
    let _ = writeln!(w, "leak_tau = {}", f(s.neuron.leak_tau));
    let _ = writeln!(w, "v_max = {}", f(s.neuron.v_max));
    let _ = writeln!(w, "\n[policy]");
    let p = &s.policy;
    let _ = writeln!(w, "enabled = {}", p.enabled);
    let _ = writeln!(w, "base_width_ticks = {}", p.base_width_ticks);
    let _ = writeln!(w, "decrement_ticks = {}", p.decrement_ticks);
    let _ = writeln!(w, "min_width_ticks = {}", p.min_width_ticks);
    let _ = writeln!(w, "jitter_ticks = {}", p.jitter_ticks);
    match p.fanout {
        Fanout::All => {
            let _ = writeln!(w, "fanout = all");
        }
        Fanout::Limited(n) => {
            let _ = writeln!(w, "fanout = {n}");
        }
    }
    let _ = writeln!(w, "\n[waveform]");
    let _ = writeln!(w, "kind = {}", kind_of(&s.waveform));
    match &s.waveform {
        Waveform::Sine {
            offset_amps,
            peak_to_peak_amps,
            frequency_hz,
            phase_rad,
        } => {
            let _ = writeln!(w, "offset_amps = {}", f(*offset_amps));
            let _ = writeln!(w, "peak_to_peak_amps = {}", f(*peak_to_peak_amps));
            let _ = writeln!(w, "frequency_hz = {}", f(*frequency_hz));
            let _ = writeln!(w, "phase_rad = {}", f(*phase_rad));
        }
        Waveform::Sawtooth {
            min_amps,
            max_amps,
            period_seconds,
        } => {
            let _ = writeln!(w, "min_amps = {}", f(*min_amps));
            let _ = writeln!(w, "max_amps = {}", f(*max_amps));
            let _ = writeln!(w, "period_seconds = {}", f(*period_seconds));
        }
        Waveform::Constant { amps } => {
            let _ = writeln!(w, "amps = {}", f(*amps));
        }
        Waveform::Samples {
            sample_period_seconds,
            ..
        } => {
            let _ = writeln!(w, "sample_period_seconds = {}", f(*sample_period_seconds));
            if let Some(p) = &cfg.waveform_file {
                let _ = writeln!(w, "file = {}", p.display());
            }
        }
    }
    let _ = writeln!(w, "\n[mismatch]");
    let m = &s.mismatch;
    let _ = writeln!(w, "sigma_exc = {}", f(m.sigma_exc));
    let _ = writeln!(w, "sigma_inh = {}", f(m.sigma_inh));
    let _ = writeln!(w, "bound_lo = {}", f(m.bounds.0));
    let _ = writeln!(w, "bound_hi = {}", f(m.bounds.1));
    match m.seed {
        None => {
            let _ = writeln!(w, "seed = run");
        }
        Some(seed) => {
            let _ = writeln!(w, "seed = {seed}");
        }
    }
    let _ = writeln!(w, "\n[run]");
    let _ = writeln!(w, "duration_steps = {}", s.duration_steps);
    let _ = writeln!(w, "seed = {}", s.seed);
    let _ = writeln!(w, "record_membrane = {}", s.record_membrane);
    let _ = writeln!(w, "\n[recon]");
    match cfg.recon.window_steps {
        None => {
            let _ = writeln!(w, "window_steps = sweep");
        }
        Some(n) => {
            let _ = writeln!(w, "window_steps = {n}");
        }
    }
    let _ = writeln!(w, "alpha = {}", f(cfg.recon.alpha));
    out
}
