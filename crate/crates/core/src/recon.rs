//! Reconstruction of the input from spike trains, and the metrics used to
//! judge it.
//!
//! Two reconstruction paths exist. The low-pass path counts spikes per
//! window, smooths the counts with a single-pole filter and maps them to
//! amperes with an affine least-squares fit learned on the first half of the
//! record. The compensation path learns a monotone inverse of the normalized
//! spike-count response to a ramp and applies it to later counts.

use rayon::prelude::*;

use crate::engine::{run, SimConfig, SimTrace};
use crate::error::{Error, Result};
use crate::stimulus::Waveform;

/// Spike counts over consecutive, non-overlapping windows of scan steps.
#[derive(Debug, Clone, PartialEq)]
pub struct CountSeries {
    pub window_steps: u64,
    pub values: Vec<u64>,
    pub start_time_seconds: f64,
}

impl CountSeries {
    pub fn as_f64(&self) -> Vec<f64> {
        self.values.iter().map(|&c| c as f64).collect()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Counts spikes in windows of `window_steps`; a trailing partial window is dropped.
pub fn spike_counts(trace: &SimTrace, window_steps: u64) -> Result<CountSeries> {
    if window_steps == 0 {
        return Err(Error::invalid("recon.window_steps", "must be >= 1"));
    }
    let n_windows = (trace.duration_steps() / window_steps) as usize;
    let mut values = vec![0u64; n_windows];
    for s in &trace.spikes {
        let w = (s.step / window_steps) as usize;
        if w < n_windows {
            values[w] += 1;
        }
    }
    Ok(CountSeries {
        window_steps,
        values,
        start_time_seconds: 0.0,
    })
}

/// Single-pole smoothing: `y[0] = x[0]`, `y[t] = a*x[t] + (1-a)*y[t-1]`.
pub fn lowpass(x: &[f64], alpha: f64) -> Result<Vec<f64>> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::invalid(
            "recon.alpha",
            format!("must be in (0, 1], got {alpha}"),
        ));
    }
    let mut out = Vec::with_capacity(x.len());
    let mut y = match x.first() {
        Some(&x0) => x0,
        None => return Ok(out),
    };
    out.push(y);
    for &xt in &x[1..] {
        y += alpha * (xt - y);
        out.push(y);
    }
    Ok(out)
}

/// Least-squares `(a, b)` minimizing `sum (a*series + b - reference)^2`.
pub fn affine_fit(series: &[f64], reference: &[f64]) -> Result<(f64, f64)> {
    if series.len() != reference.len() {
        return Err(Error::Contract(format!(
            "affine_fit: length mismatch {} vs {}",
            series.len(),
            reference.len()
        )));
    }
    if series.len() < 2 {
        return Err(Error::Degenerate(
            "affine_fit needs at least two points".into(),
        ));
    }
    let n = series.len() as f64;
    let mx = series.iter().sum::<f64>() / n;
    let my = reference.iter().sum::<f64>() / n;
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for (&x, &y) in series.iter().zip(reference) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    if !(sxx > 0.0) {
        return Err(Error::Degenerate("affine_fit: series is constant".into()));
    }
    let a = sxy / sxx;
    Ok((a, my - a * mx))
}

/// `100 * RMS(estimate - reference) / RMS(reference)`.
pub fn rms_error_pct(estimate: &[f64], reference: &[f64]) -> Result<f64> {
    if estimate.len() != reference.len() || estimate.is_empty() {
        return Err(Error::Contract(format!(
            "rms_error_pct: lengths {} and {} must match and be >= 1",
            estimate.len(),
            reference.len()
        )));
    }
    let ref_sq: f64 = reference.iter().map(|r| r * r).sum();
    if !(ref_sq > 0.0) {
        return Err(Error::Degenerate("reference has zero RMS".into()));
    }
    let err_sq: f64 = estimate
        .iter()
        .zip(reference)
        .map(|(e, r)| (e - r) * (e - r))
        .sum();
    Ok(100.0 * (err_sq / ref_sq).sqrt())
}

/// Pool-adjacent-violators: the least-squares non-decreasing fit to `y`.
pub fn isotonic(y: &[f64]) -> Vec<f64> {
    // (mean, weight) blocks
    let mut blocks: Vec<(f64, usize)> = Vec::with_capacity(y.len());
    for &v in y {
        blocks.push((v, 1));
        while blocks.len() >= 2 {
            let (m1, w1) = blocks[blocks.len() - 1];
            let (m0, w0) = blocks[blocks.len() - 2];
            if m0 <= m1 {
                break;
            }
            blocks.pop();
            let w = w0 + w1;
            *blocks.last_mut().unwrap() = ((m0 * w0 as f64 + m1 * w1 as f64) / w as f64, w);
        }
    }
    blocks
        .into_iter()
        .flat_map(|(m, w)| std::iter::repeat_n(m, w))
        .collect()
}

/// Maps normalized spike counts back to normalized input.
#[derive(Debug, Clone, PartialEq)]
pub struct CompensationTable {
    /// `(normalized_count, input_estimate)`, strictly increasing in the
    /// first coordinate and non-decreasing in the second, spanning `[0, 1]`.
    pub breakpoints: Vec<(f64, f64)>,
    /// Smoothed count that normalizes to 1.0.
    pub count_scale: f64,
}

/// Learns the inverse of the normalized spike-count response to a rising ramp.
///
/// Counts are smoothed with [`lowpass`] and divided by their maximum. A
/// monotone forward response (normalized input -> normalized count) is
/// fitted with pool-adjacent-violators and then inverted; plateaus of equal
/// count collapse to one breakpoint at the mean input they cover.
pub fn fit_compensation(
    counts: &CountSeries,
    reference: &[f64],
    alpha: f64,
) -> Result<CompensationTable> {
    if counts.len() != reference.len() {
        return Err(Error::Contract(format!(
            "fit_compensation: {} counts vs {} reference points",
            counts.len(),
            reference.len()
        )));
    }
    if counts.values.iter().all(|&c| c == 0) {
        return Err(Error::Degenerate(
            "fit_compensation: all spike counts are zero".into(),
        ));
    }
    let smooth = lowpass(&counts.as_f64(), alpha)?;
    let scale = smooth.iter().cloned().fold(f64::MIN, f64::max);
    let norm: Vec<f64> = smooth.iter().map(|c| c / scale).collect();

    let (rmin, rmax) = reference
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &r| {
            (lo.min(r), hi.max(r))
        });
    if !(rmax > rmin) {
        return Err(Error::Degenerate(
            "fit_compensation: reference is constant".into(),
        ));
    }
    let mut pairs: Vec<(f64, f64)> = reference
        .iter()
        .map(|r| (r - rmin) / (rmax - rmin))
        .zip(norm)
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let forward = isotonic(&pairs.iter().map(|p| p.1).collect::<Vec<_>>());

    // Invert: group equal fitted counts.
    let mut breakpoints: Vec<(f64, f64)> = Vec::new();
    let mut i = 0;
    while i < forward.len() {
        let c = forward[i];
        let mut j = i;
        let mut sum = 0.0;
        while j < forward.len() && forward[j] == c {
            sum += pairs[j].0;
            j += 1;
        }
        breakpoints.push((c, sum / (j - i) as f64));
        i = j;
    }
    if breakpoints[0].0 > 0.0 {
        breakpoints.insert(0, (0.0, breakpoints[0].1));
    }
    let last = *breakpoints.last().unwrap();
    if last.0 < 1.0 {
        breakpoints.push((1.0, last.1));
    }
    Ok(CompensationTable {
        breakpoints,
        count_scale: scale,
    })
}

/// Piecewise-linear lookup through the table; inputs outside `[0, 1]` clamp
/// to the table ends.
pub fn apply_compensation(series: &[f64], table: &CompensationTable) -> Vec<f64> {
    let bp = &table.breakpoints;
    series
        .iter()
        .map(|&x| {
            let x = x.clamp(0.0, 1.0);
            let i = bp.partition_point(|p| p.0 <= x);
            if i == 0 {
                return bp[0].1;
            }
            if i == bp.len() {
                return bp[bp.len() - 1].1;
            }
            let (x0, y0) = bp[i - 1];
            let (x1, y1) = bp[i];
            y0 + (y1 - y0) * (x - x0) / (x1 - x0)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Decoherence {
    /// Coefficient of variation of global inter-spike intervals.
    pub isi_cv: f64,
    /// Fraction of inter-spike intervals of at most two scan steps.
    pub burst_fraction: f64,
}

/// Spread of the merged output spike train. Needs at least three spikes.
pub fn decoherence_metrics(trace: &SimTrace, scan_step_seconds: f64) -> Result<Decoherence> {
    if trace.spikes.len() < 3 {
        return Err(Error::Degenerate(format!(
            "decoherence needs >= 3 spikes, got {}",
            trace.spikes.len()
        )));
    }
    let isi: Vec<u64> = trace
        .spikes
        .windows(2)
        .map(|w| w[1].step - w[0].step)
        .collect();
    let n = isi.len() as f64;
    let secs: Vec<f64> = isi.iter().map(|&d| d as f64 * scan_step_seconds).collect();
    let mean = secs.iter().sum::<f64>() / n;
    let var = secs.iter().map(|d| (d - mean) * (d - mean)).sum::<f64>() / n;
    let bursts = isi.iter().filter(|&&d| d <= 2).count();
    Ok(Decoherence {
        isi_cv: var.sqrt() / mean,
        burst_fraction: bursts as f64 / n,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReconConfig {
    /// Counting window in scan steps; `None` means one full sweep.
    pub window_steps: Option<u64>,
    pub alpha: f64,
}

impl Default for ReconConfig {
    fn default() -> Self {
        ReconConfig {
            window_steps: None,
            alpha: 0.1,
        }
    }
}

impl ReconConfig {
    pub fn window_for(&self, config: &SimConfig) -> u64 {
        self.window_steps.unwrap_or(config.n_neurons() as u64)
    }

    pub fn validate(&self) -> Result<()> {
        if self.window_steps == Some(0) {
            return Err(Error::invalid("recon.window_steps", "must be >= 1"));
        }
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(Error::invalid("recon.alpha", "must be in (0, 1]"));
        }
        Ok(())
    }
}

/// Mean input current over each window, as seen by the neurons.
pub fn window_reference(
    waveform: &Waveform,
    scan_step_seconds: f64,
    window_steps: u64,
    n_windows: usize,
) -> Result<Vec<f64>> {
    mean_input(waveform, scan_step_seconds, 0, window_steps, n_windows)
}

fn mean_input(
    waveform: &Waveform,
    scan_step_seconds: f64,
    first_step: u64,
    window_steps: u64,
    n_windows: usize,
) -> Result<Vec<f64>> {
    (0..n_windows as u64)
        .map(|w| {
            let start = first_step + w * window_steps;
            let mut sum = 0.0;
            for s in start..start + window_steps {
                sum += waveform.sample(s as f64 * scan_step_seconds)?;
            }
            Ok(sum / window_steps as f64)
        })
        .collect()
}

/// Per-window output of the low-pass reconstruction path.
#[derive(Debug, Clone, PartialEq)]
pub struct Reconstruction {
    pub window_steps: u64,
    pub window_seconds: f64,
    pub counts: Vec<u64>,
    pub filtered: Vec<f64>,
    pub estimate: Vec<f64>,
    pub reference: Vec<f64>,
    /// Affine map from filtered counts to amperes.
    pub gain: f64,
    pub offset: f64,
    /// First window of the held-out evaluation half.
    pub eval_start: usize,
    /// RMS error on the held-out half, percent of reference RMS.
    pub rms_pct: f64,
}

/// Counts, low-pass filters, fits the affine scale on the first half of the
/// windows and scores the second half.
pub fn reconstruct(trace: &SimTrace, recon: &ReconConfig) -> Result<Reconstruction> {
    recon.validate()?;
    let cfg = &trace.config;
    let window = recon.window_for(cfg);
    let counts = spike_counts(trace, window)?;
    if counts.len() < 4 {
        return Err(Error::Degenerate(format!(
            "reconstruction needs >= 4 windows, got {} (window {} steps)",
            counts.len(),
            window
        )));
    }
    let filtered = lowpass(&counts.as_f64(), recon.alpha)?;
    let reference = window_reference(
        &cfg.waveform,
        cfg.scan.scan_step_seconds,
        window,
        counts.len(),
    )?;
    let half = counts.len() / 2;
    let (gain, offset) = affine_fit(&filtered[..half], &reference[..half])?;
    let estimate: Vec<f64> = filtered.iter().map(|f| gain * f + offset).collect();
    let rms_pct = rms_error_pct(&estimate[half..], &reference[half..])?;
    Ok(Reconstruction {
        window_steps: window,
        window_seconds: window as f64 * cfg.scan.scan_step_seconds,
        counts: counts.values,
        filtered,
        estimate,
        reference,
        gain,
        offset,
        eval_start: half,
        rms_pct,
    })
}

/// Compensation learned on the rising half of one sawtooth period and
/// applied to the rising half of the next.
#[derive(Debug, Clone, PartialEq)]
pub struct RampRoundTrip {
    pub table: CompensationTable,
    pub window_steps: u64,
    /// Compensated estimate over the fresh rising half, normalized input units.
    pub estimate: Vec<f64>,
    /// True normalized input over the same windows.
    pub reference: Vec<f64>,
    pub max_abs_error: f64,
    /// Whether `estimate` never decreases.
    pub monotone: bool,
}

fn counts_from(
    trace: &SimTrace,
    first_step: u64,
    window_steps: u64,
    n_windows: usize,
) -> CountSeries {
    let mut values = vec![0u64; n_windows];
    let end = first_step + window_steps * n_windows as u64;
    for s in trace
        .spikes
        .iter()
        .filter(|s| s.step >= first_step && s.step < end)
    {
        values[((s.step - first_step) / window_steps) as usize] += 1;
    }
    CountSeries {
        window_steps,
        values,
        start_time_seconds: first_step as f64 * trace.config.scan.scan_step_seconds,
    }
}

/// Fits [`fit_compensation`] on the rising half of the first sawtooth period
/// of `trace` and evaluates it on the rising half of the second.
pub fn ramp_round_trip(trace: &SimTrace, recon: &ReconConfig) -> Result<RampRoundTrip> {
    recon.validate()?;
    let cfg = &trace.config;
    let dt = cfg.scan.scan_step_seconds;
    let period = match cfg.waveform {
        Waveform::Sawtooth { period_seconds, .. } => period_seconds,
        _ => {
            return Err(Error::Contract(
                "compensation needs a sawtooth input".into(),
            ))
        }
    };
    let window = recon.window_for(cfg);
    let period_steps = (period / dt).ceil() as u64;
    let n_windows = ((period / 2.0 / dt).floor() as u64 / window) as usize;
    if n_windows < 2 {
        return Err(Error::Degenerate(format!(
            "rising half of {period_steps} steps holds fewer than 2 windows of {window}"
        )));
    }
    let needed = period_steps + n_windows as u64 * window;
    if trace.duration_steps() < needed {
        return Err(Error::Contract(format!(
            "compensation needs {needed} steps (two rising halves), trace has {}",
            trace.duration_steps()
        )));
    }

    let fit_counts = counts_from(trace, 0, window, n_windows);
    let fit_ref = mean_input(&cfg.waveform, dt, 0, window, n_windows)?;
    let table = fit_compensation(&fit_counts, &fit_ref, recon.alpha)?;

    let (rmin, rmax) = fit_ref
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &r| {
            (lo.min(r), hi.max(r))
        });
    let fresh = counts_from(trace, period_steps, window, n_windows);
    let norm: Vec<f64> = lowpass(&fresh.as_f64(), recon.alpha)?
        .iter()
        .map(|c| c / table.count_scale)
        .collect();
    let estimate = apply_compensation(&norm, &table);
    let reference: Vec<f64> = mean_input(&cfg.waveform, dt, period_steps, window, n_windows)?
        .iter()
        .map(|r| (r - rmin) / (rmax - rmin))
        .collect();
    let max_abs_error = estimate
        .iter()
        .zip(&reference)
        .map(|(e, r)| (e - r).abs())
        .fold(0.0, f64::max);
    let monotone = estimate.windows(2).all(|w| w[1] >= w[0]);
    Ok(RampRoundTrip {
        table,
        window_steps: window,
        estimate,
        reference,
        max_abs_error,
        monotone,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonteCarloReport {
    pub per_trial_rms_pct: Vec<f64>,
    pub mean_pct: f64,
    /// Population standard deviation.
    pub std_pct: f64,
    pub n_trials: usize,
    pub base_seed: u64,
}

impl MonteCarloReport {
    pub fn from_trials(per_trial_rms_pct: Vec<f64>, base_seed: u64) -> Self {
        let n = per_trial_rms_pct.len();
        let mean = per_trial_rms_pct.iter().sum::<f64>() / n as f64;
        let var = per_trial_rms_pct
            .iter()
            .map(|e| (e - mean) * (e - mean))
            .sum::<f64>()
            / n as f64;
        MonteCarloReport {
            per_trial_rms_pct,
            mean_pct: mean,
            std_pct: var.sqrt(),
            n_trials: n,
            base_seed,
        }
    }

    pub fn seed_of(&self, trial: usize) -> u64 {
        self.base_seed.wrapping_add(trial as u64)
    }
}

/// Runs the low-pass pipeline `n_trials` times with seeds `config.seed + i`,
/// each trial drawing fresh mismatch. Trials run in parallel; results are in
/// trial order.
pub fn monte_carlo(
    config: &SimConfig,
    recon: &ReconConfig,
    n_trials: usize,
) -> Result<MonteCarloReport> {
    if n_trials == 0 {
        return Err(Error::invalid("trials", "must be >= 1"));
    }
    let errors = (0..n_trials)
        .into_par_iter()
        .map(|i| {
            let mut cfg = config.clone();
            cfg.seed = config.seed.wrapping_add(i as u64);
            cfg.mismatch.seed = None;
            cfg.record_membrane = false;
            run(&cfg)
                .and_then(|t| reconstruct(&t, recon))
                .map(|r| r.rms_pct)
                .map_err(|e| Error::Trial {
                    trial: i,
                    source: Box::new(e),
                })
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(MonteCarloReport::from_trials(errors, config.seed))
}
