//! Input current waveforms. Every neuron shares the same input port.

use std::f64::consts::PI;
use std::path::Path;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum Waveform {
    Sine {
        offset_amps: f64,
        peak_to_peak_amps: f64,
        frequency_hz: f64,
        phase_rad: f64,
    },
    /// Symmetric triangle: linear rise for half the period, linear fall for the other half.
    Sawtooth {
        min_amps: f64,
        max_amps: f64,
        period_seconds: f64,
    },
    Constant {
        amps: f64,
    },
    /// Zero-order hold over recorded samples.
    Samples {
        values: Vec<f64>,
        sample_period_seconds: f64,
    },
}

impl Waveform {
    /// Input of the ten-neuron ramp preset: 0 A at 0 s, 100 nA at
    /// 25 us, back to 0 A at 50 us.
    pub fn ramp_sawtooth() -> Waveform {
        Waveform::Sawtooth {
            min_amps: 0.0,
            max_amps: 100e-9,
            period_seconds: 50e-6,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Waveform::Sine {
                offset_amps,
                peak_to_peak_amps,
                frequency_hz,
                phase_rad,
            } => {
                if !(frequency_hz > 0.0 && frequency_hz.is_finite()) {
                    return Err(Error::invalid(
                        "waveform.frequency_hz",
                        "must be finite and > 0",
                    ));
                }
                if !(peak_to_peak_amps >= 0.0 && peak_to_peak_amps.is_finite()) {
                    return Err(Error::invalid(
                        "waveform.peak_to_peak_amps",
                        "must be finite and >= 0",
                    ));
                }
                if !(offset_amps - peak_to_peak_amps / 2.0 >= 0.0 && offset_amps.is_finite()) {
                    return Err(Error::invalid(
                        "waveform.offset_amps",
                        "sine must stay >= 0 A (offset >= peak_to_peak / 2)",
                    ));
                }
                if !phase_rad.is_finite() {
                    return Err(Error::invalid("waveform.phase_rad", "must be finite"));
                }
            }
            Waveform::Sawtooth {
                min_amps,
                max_amps,
                period_seconds,
            } => {
                if !(min_amps >= 0.0) {
                    return Err(Error::invalid("waveform.min_amps", "must be >= 0"));
                }
                if !(max_amps >= min_amps && max_amps.is_finite()) {
                    return Err(Error::invalid(
                        "waveform.max_amps",
                        "must be finite and >= min_amps",
                    ));
                }
                if !(period_seconds > 0.0 && period_seconds.is_finite()) {
                    return Err(Error::invalid(
                        "waveform.period_seconds",
                        "must be finite and > 0",
                    ));
                }
            }
            Waveform::Constant { amps } => {
                if !(amps >= 0.0 && amps.is_finite()) {
                    return Err(Error::invalid("waveform.amps", "must be finite and >= 0"));
                }
            }
            Waveform::Samples {
                ref values,
                sample_period_seconds,
            } => {
                if values.is_empty() {
                    return Err(Error::invalid("waveform.file", "no samples"));
                }
                if let Some(i) = values.iter().position(|v| !(*v >= 0.0 && v.is_finite())) {
                    return Err(Error::invalid(
                        "waveform.file",
                        format!("sample {} is negative or not finite", i + 1),
                    ));
                }
                if !(sample_period_seconds > 0.0 && sample_period_seconds.is_finite()) {
                    return Err(Error::invalid(
                        "waveform.sample_period_seconds",
                        "must be finite and > 0",
                    ));
                }
            }
        }
        Ok(())
    }

    /// Repetition period, if the waveform is periodic.
    pub fn period(&self) -> Option<f64> {
        match *self {
            Waveform::Sine { frequency_hz, .. } => Some(1.0 / frequency_hz),
            Waveform::Sawtooth { period_seconds, .. } => Some(period_seconds),
            Waveform::Constant { .. } | Waveform::Samples { .. } => None,
        }
    }

    /// Input current at time `t` seconds.
    pub fn sample(&self, t: f64) -> Result<f64> {
        if !(t >= 0.0) {
            return Err(Error::Contract(format!(
                "sample time must be >= 0, got {t:e}"
            )));
        }
        Ok(match *self {
            Waveform::Sine {
                offset_amps,
                peak_to_peak_amps,
                frequency_hz,
                phase_rad,
            } => {
                offset_amps
                    + peak_to_peak_amps / 2.0 * (2.0 * PI * frequency_hz * t + phase_rad).sin()
            }
            Waveform::Sawtooth {
                min_amps,
                max_amps,
                period_seconds,
            } => {
                let half = period_seconds / 2.0;
                let phase = t % period_seconds;
                let frac = if phase <= half {
                    phase / half
                } else {
                    (period_seconds - phase) / half
                };
                min_amps + (max_amps - min_amps) * frac
            }
            Waveform::Constant { amps } => amps,
            Waveform::Samples {
                ref values,
                sample_period_seconds,
            } => {
                // Tolerate float error in t landing just short of a sample edge.
                let idx = (t / sample_period_seconds + 1e-9).floor() as usize;
                *values.get(idx).ok_or(Error::SamplesExhausted {
                    t,
                    len: values.len(),
                })?
            }
        })
    }
}

/// Parses a sample file: one ampere value per line, decimal or scientific.
/// Blank lines are skipped.
pub fn parse_samples(text: &str, sample_period_seconds: f64) -> Result<Waveform> {
    let mut values = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let v: f64 = line.parse().map_err(|_| Error::Parse {
            line: i + 1,
            key: "sample".into(),
            msg: format!("not a number: {line:?}"),
        })?;
        if !(v >= 0.0 && v.is_finite()) {
            return Err(Error::Parse {
                line: i + 1,
                key: "sample".into(),
                msg: format!("current must be finite and >= 0, got {line}"),
            });
        }
        values.push(v);
    }
    if values.is_empty() {
        return Err(Error::Parse {
            line: 0,
            key: "sample".into(),
            msg: "file contains no samples".into(),
        });
    }
    let w = Waveform::Samples {
        values,
        sample_period_seconds,
    };
    w.validate()?;
    Ok(w)
}

pub fn load_samples(path: impl AsRef<Path>, sample_period_seconds: f64) -> Result<Waveform> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_samples(&text, sample_period_seconds)
}
