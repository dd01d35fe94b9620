//! CSV output for external plotting.
//!
//! Floats are written with 15 significant digits in scientific notation,
//! trailing zeros trimmed (`9.0e-8`). Integers are plain decimal.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::engine::SimTrace;
use crate::error::{Error, Result};
use crate::recon::{CompensationTable, MonteCarloReport, Reconstruction};

pub const SPIKES_HEADER: &str = "step,time_s,row,col,id";
pub const MEMBRANE_HEADER: &str = "step,id,v";
pub const RECONSTRUCTION_HEADER: &str = "window,time_s,count,filtered,estimate,reference,abs_error";
pub const MONTE_CARLO_HEADER: &str = "trial,seed,rms_pct";
pub const COMPENSATION_HEADER: &str = "normalized_count,input_estimate";

/// Formats `x` with 15 significant digits, shortest mantissa kept.
pub fn fmt_float(x: f64) -> String {
    if !x.is_finite() {
        return format!("{x}");
    }
    let s = format!("{x:.14e}");
    let (mantissa, exp) = s.split_once('e').expect("exponent form");
    let mantissa = mantissa.trim_end_matches('0');
    let mantissa = if mantissa.ends_with('.') {
        format!("{mantissa}0")
    } else {
        mantissa.to_string()
    };
    format!("{mantissa}e{exp}")
}

fn write_rows(path: &Path, header: &str, rows: impl Iterator<Item = String>) -> Result<()> {
    let io_err = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut w = BufWriter::new(File::create(path).map_err(io_err)?);
    writeln!(w, "{header}").map_err(io_err)?;
    for row in rows {
        writeln!(w, "{row}").map_err(io_err)?;
    }
    w.flush().map_err(io_err)
}

pub fn write_spikes(path: impl AsRef<Path>, trace: &SimTrace) -> Result<()> {
    write_rows(
        path.as_ref(),
        SPIKES_HEADER,
        trace.spikes.iter().map(|s| {
            format!(
                "{},{},{},{},{}",
                s.step,
                fmt_float(s.time_seconds),
                s.row,
                s.col,
                s.id
            )
        }),
    )
}

pub fn write_membrane(path: impl AsRef<Path>, trace: &SimTrace) -> Result<()> {
    let m = trace
        .membrane
        .as_ref()
        .ok_or_else(|| Error::Contract("membrane was not recorded for this run".into()))?;
    let n = trace.n_neurons();
    write_rows(
        path.as_ref(),
        MEMBRANE_HEADER,
        m.iter()
            .enumerate()
            .map(|(i, v)| format!("{},{},{}", i / n, i % n, fmt_float(*v))),
    )
}

pub fn write_reconstruction(path: impl AsRef<Path>, r: &Reconstruction) -> Result<()> {
    write_rows(
        path.as_ref(),
        RECONSTRUCTION_HEADER,
        (0..r.counts.len()).map(|i| {
            format!(
                "{},{},{},{},{},{},{}",
                i,
                fmt_float(i as f64 * r.window_seconds),
                r.counts[i],
                fmt_float(r.filtered[i]),
                fmt_float(r.estimate[i]),
                fmt_float(r.reference[i]),
                fmt_float((r.estimate[i] - r.reference[i]).abs()),
            )
        }),
    )
}

pub fn write_monte_carlo(path: impl AsRef<Path>, report: &MonteCarloReport) -> Result<()> {
    write_rows(
        path.as_ref(),
        MONTE_CARLO_HEADER,
        report
            .per_trial_rms_pct
            .iter()
            .enumerate()
            .map(|(i, e)| format!("{},{},{}", i, report.seed_of(i), fmt_float(*e))),
    )
}

pub fn write_compensation(path: impl AsRef<Path>, table: &CompensationTable) -> Result<()> {
    write_rows(
        path.as_ref(),
        COMPENSATION_HEADER,
        table
            .breakpoints
            .iter()
            .map(|(c, x)| format!("{},{}", fmt_float(*c), fmt_float(*x))),
    )
}
