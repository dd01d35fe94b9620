//! Clocked simulation loop.
//!
//! Each scan step runs, in order:
//!
//! 1. sample the shared input current at `t = step * scan_step_seconds`;
//! 2. deliver the inhibition pulses scheduled for this step;
//! 3. integrate every neuron over one scan step;
//! 4. if the selected neuron is at threshold, emit a spike, let the
//!    inhibition generator decide between broadcast and suppression, reset
//!    the firer and queue its lateral pulses, then clear its inhibited flag;
//! 5. advance the scan cursor.
//!
//! A run is a pure function of its [`SimConfig`]. Mismatch factors and pulse
//! jitter come from separate ChaCha streams derived from the seed.

use std::collections::VecDeque;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::inhibition::{InhibitionGenerator, InhibitionPolicy, PulseEvent};
use crate::neuron::{NeuronParams, NeuronState};
use crate::scan::{ScanConfig, ScanCursor};
use crate::stimulus::Waveform;

const MISMATCH_STREAM: u64 = 0;
const JITTER_STREAM: u64 = 1;

/// Fixed per-neuron device mismatch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MismatchSpec {
    /// Relative standard deviation of the input current mirror gain.
    pub sigma_exc: f64,
    /// Relative standard deviation of the inhibition discharge gain.
    pub sigma_inh: f64,
    /// Truncation interval; draws outside it are redrawn.
    pub bounds: (f64, f64),
    /// Overrides the run seed for mismatch draws only.
    pub seed: Option<u64>,
}

impl Default for MismatchSpec {
    fn default() -> Self {
        MismatchSpec {
            sigma_exc: 0.20,
            sigma_inh: 0.30,
            bounds: (0.1, 2.0),
            seed: None,
        }
    }
}

impl MismatchSpec {
    pub fn none() -> Self {
        MismatchSpec {
            sigma_exc: 0.0,
            sigma_inh: 0.0,
            ..MismatchSpec::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, s) in [
            ("mismatch.sigma_exc", self.sigma_exc),
            ("mismatch.sigma_inh", self.sigma_inh),
        ] {
            if !(0.0..1.0).contains(&s) {
                return Err(Error::invalid(name, format!("must be in [0, 1), got {s}")));
            }
        }
        let (lo, hi) = self.bounds;
        if !(lo > 0.0 && lo < 1.0) {
            return Err(Error::invalid("mismatch.bound_lo", "must be in (0, 1)"));
        }
        if !(hi > 1.0 && hi.is_finite()) {
            return Err(Error::invalid(
                "mismatch.bound_hi",
                "must be finite and > 1",
            ));
        }
        Ok(())
    }
}

/// Draws per-neuron `(g_exc, g_inh)` factors: normal with mean 1, redrawn
/// until inside the bounds. All excitatory factors are drawn before the
/// inhibitory ones.
pub fn inject_mismatch<R: rand::Rng + ?Sized>(
    spec: &MismatchSpec,
    n: usize,
    rng: &mut R,
) -> Vec<(f64, f64)> {
    let (lo, hi) = spec.bounds;
    let mut draw_all = |sigma: f64| -> Vec<f64> {
        if sigma == 0.0 {
            return vec![1.0; n];
        }
        let normal = Normal::new(1.0, sigma).expect("sigma validated finite");
        (0..n)
            .map(|_| loop {
                let g = normal.sample(rng);
                if (lo..=hi).contains(&g) {
                    break g;
                }
            })
            .collect()
    };
    let exc = draw_all(spec.sigma_exc);
    let inh = draw_all(spec.sigma_inh);
    exc.into_iter().zip(inh).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub scan: ScanConfig,
    /// `tick_seconds` must equal `scan.tick_seconds()`; see [`SimConfig::sync_tick`].
    pub neuron: NeuronParams,
    pub policy: InhibitionPolicy,
    pub waveform: Waveform,
    pub mismatch: MismatchSpec,
    pub duration_steps: u64,
    pub seed: u64,
    pub record_membrane: bool,
}

impl SimConfig {
    /// Re-derives the neuron tick duration from the scan timing.
    pub fn sync_tick(&mut self) {
        self.neuron.tick_seconds = self.scan.tick_seconds();
    }

    pub fn validate(&self) -> Result<()> {
        self.scan.validate()?;
        self.neuron.validate()?;
        self.policy.validate(self.scan.gen_ticks_per_step)?;
        self.waveform.validate()?;
        self.mismatch.validate()?;
        if self.duration_steps == 0 {
            return Err(Error::invalid("run.duration_steps", "must be >= 1"));
        }
        let tick = self.scan.tick_seconds();
        if (self.neuron.tick_seconds - tick).abs() > 1e-12 * tick {
            return Err(Error::invalid(
                "neuron.tick_seconds",
                format!(
                    "{:e} disagrees with scan timing {:e}",
                    self.neuron.tick_seconds, tick
                ),
            ));
        }
        Ok(())
    }

    pub fn n_neurons(&self) -> usize {
        self.scan.n_neurons()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpikeEvent {
    pub step: u64,
    pub time_seconds: f64,
    pub row: usize,
    pub col: usize,
    pub id: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimTrace {
    /// Ordered by step, at most one per step.
    pub spikes: Vec<SpikeEvent>,
    /// Row-major `duration_steps x n_neurons` membrane voltages sampled at the end of each step.
    pub membrane: Option<Vec<f64>>,
    pub config: SimConfig,
    pub seed: u64,
    pub g_exc: Vec<f64>,
    pub g_inh: Vec<f64>,
}

impl SimTrace {
    pub fn duration_steps(&self) -> u64 {
        self.config.duration_steps
    }

    pub fn n_neurons(&self) -> usize {
        self.config.n_neurons()
    }

    /// Membrane voltages of all neurons after `step`, if recorded.
    pub fn membrane_at(&self, step: u64) -> Option<&[f64]> {
        let n = self.n_neurons();
        let start = step as usize * n;
        self.membrane.as_ref().and_then(|m| m.get(start..start + n))
    }

    /// Mean aggregate output rate, spikes per second.
    pub fn mean_rate(&self) -> f64 {
        self.spikes.len() as f64
            / (self.duration_steps() as f64 * self.config.scan.scan_step_seconds)
    }
}

/// Live simulation state.
pub struct Engine {
    config: SimConfig,
    generator: InhibitionGenerator,
    neurons: Vec<NeuronState>,
    cursor: ScanCursor,
    step: u64,
    /// `pending[k]` holds pulses for step `self.step + k`.
    pending: VecDeque<Vec<PulseEvent>>,
    jitter_rng: ChaCha8Rng,
    decay: f64,
}

impl Engine {
    pub fn new(config: SimConfig) -> Result<Self> {
        config.validate()?;
        let n = config.n_neurons();
        let mut mismatch_rng =
            ChaCha8Rng::seed_from_u64(config.mismatch.seed.unwrap_or(config.seed));
        mismatch_rng.set_stream(MISMATCH_STREAM);
        let neurons = inject_mismatch(&config.mismatch, n, &mut mismatch_rng)
            .into_iter()
            .map(|(ge, gi)| NeuronState::new(ge, gi))
            .collect();
        let mut jitter_rng = ChaCha8Rng::seed_from_u64(config.seed);
        jitter_rng.set_stream(JITTER_STREAM);
        Ok(Engine {
            generator: InhibitionGenerator::new(config.policy, config.scan.gen_ticks_per_step)?,
            decay: config.neuron.decay(config.scan.scan_step_seconds),
            neurons,
            cursor: ScanCursor::default(),
            step: 0,
            pending: VecDeque::new(),
            jitter_rng,
            config,
        })
    }

    pub fn config(&self) -> &SimConfig {
        &self.config
    }

    pub fn neurons(&self) -> &[NeuronState] {
        &self.neurons
    }

    pub fn cursor(&self) -> ScanCursor {
        self.cursor
    }

    /// Index of the next step to execute.
    pub fn current_step(&self) -> u64 {
        self.step
    }

    /// Pulses queued for future steps, in delivery order.
    pub fn pending(&self) -> impl Iterator<Item = &PulseEvent> {
        self.pending.iter().flatten()
    }

    /// Executes one scan step and returns the spike it emitted, if any.
    pub fn step(&mut self) -> Result<Option<SpikeEvent>> {
        let scan = self.config.scan;
        let params = self.config.neuron;
        let dt = scan.scan_step_seconds;
        let t = self.step as f64 * dt;

        let i_in = self.config.waveform.sample(t)?;
        if !(i_in >= 0.0) {
            return Err(Error::Contract(format!(
                "negative input current {i_in:e} at t = {t:e}"
            )));
        }

        if let Some(due) = self.pending.pop_front() {
            for ev in due {
                debug_assert_eq!(ev.delivery_step, self.step);
                let target = &mut self.neurons[ev.target_id];
                *target = target.apply_pulse(&params, ev.width_ticks, ev.is_self_reset);
                if !ev.is_self_reset {
                    target.inhibited = true;
                }
            }
        }

        let decay = self.decay;
        for n in self.neurons.iter_mut() {
            *n = n.integrate_with_decay(&params, i_in, dt, decay);
        }

        let id = self.cursor.linear_id(&scan);
        let mut spike = None;
        if self.neurons[id].at_threshold() {
            spike = Some(SpikeEvent {
                step: self.step,
                time_seconds: t,
                row: self.cursor.row,
                col: self.cursor.col,
                id,
            });
            let firer = self.neurons[id];
            let schedule = self.generator.handle_fire(
                firer.inhibited,
                id,
                self.step,
                self.neurons.len(),
                &mut self.jitter_rng,
            );
            for ev in schedule {
                if ev.delivery_step == self.step {
                    let target = &mut self.neurons[ev.target_id];
                    *target = target.apply_pulse(&params, ev.width_ticks, ev.is_self_reset);
                } else {
                    // Lateral pulses are due no earlier than the next step, whose
                    // slot is pending[0] once this step's bucket is gone.
                    let k = (ev.delivery_step - self.step - 1) as usize;
                    if self.pending.len() <= k {
                        self.pending.resize_with(k + 1, Vec::new);
                    }
                    self.pending[k].push(ev);
                }
            }
            self.neurons[id].inhibited = false;
        }

        self.cursor = self.cursor.advance(&scan);
        self.step += 1;
        Ok(spike)
    }
}

/// Runs `config.duration_steps` steps from rest and returns the full trace.
pub fn run(config: &SimConfig) -> Result<SimTrace> {
    let mut engine = Engine::new(config.clone())?;
    let n = config.n_neurons();
    let steps = config.duration_steps;
    let mut spikes = Vec::new();
    let mut membrane = config
        .record_membrane
        .then(|| Vec::with_capacity(steps as usize * n));
    for _ in 0..steps {
        if let Some(s) = engine.step()? {
            spikes.push(s);
        }
        if let Some(m) = membrane.as_mut() {
            m.extend(engine.neurons.iter().map(|s| s.v));
        }
    }
    Ok(SimTrace {
        spikes,
        membrane,
        seed: config.seed,
        g_exc: engine.neurons.iter().map(|s| s.g_exc).collect(),
        g_inh: engine.neurons.iter().map(|s| s.g_inh).collect(),
        config: config.clone(),
    })
}

/// Number of steps covering one waveform period, or `duration_steps` for
/// aperiodic inputs.
fn calibration_steps(config: &SimConfig) -> u64 {
    match config.waveform.period() {
        Some(p) => (p / config.scan.scan_step_seconds).ceil().max(1.0) as u64,
        None => config.duration_steps,
    }
}

/// Relative tolerance on the calibrated aggregate rate.
pub const CALIBRATION_TOLERANCE: f64 = 0.01;

/// Finds a `charge_gain` whose mean aggregate spike rate over one waveform
/// period is within 1% of `target_rate` (spikes per second).
///
/// Brackets the target by doubling/halving from `base.neuron.charge_gain`,
/// then bisects geometrically.
pub fn calibrate_charge_gain(target_rate: f64, base: &SimConfig) -> Result<f64> {
    if !(target_rate > 0.0 && target_rate.is_finite()) {
        return Err(Error::invalid("target_rate", "must be finite and > 0"));
    }
    let mut cfg = base.clone();
    cfg.duration_steps = calibration_steps(base);
    cfg.record_membrane = false;
    let mut rate_at = |k: f64| -> Result<f64> {
        cfg.neuron.charge_gain = k;
        Ok(run(&cfg)?.mean_rate())
    };
    let within = |r: f64| (r - target_rate).abs() <= CALIBRATION_TOLERANCE * target_rate;

    const MAX_EXPAND: usize = 80;
    let k0 = base.neuron.charge_gain;
    let r0 = rate_at(k0)?;
    if within(r0) {
        return Ok(k0);
    }
    let (mut lo, mut hi, mut r_lo, mut r_hi) = (k0, k0, r0, r0);
    if r0 < target_rate {
        for _ in 0..MAX_EXPAND {
            lo = hi;
            r_lo = r_hi;
            hi *= 2.0;
            r_hi = rate_at(hi)?;
            if r_hi >= target_rate {
                break;
            }
        }
    } else {
        for _ in 0..MAX_EXPAND {
            hi = lo;
            r_hi = r_lo;
            lo /= 2.0;
            r_lo = rate_at(lo)?;
            if r_lo <= target_rate {
                break;
            }
        }
    }
    let unreachable = |lo, hi, r_lo, r_hi| Error::Calibration {
        target: target_rate,
        lo,
        hi,
        rate_lo: r_lo,
        rate_hi: r_hi,
    };
    if !(r_lo <= target_rate && target_rate <= r_hi) {
        return Err(unreachable(lo, hi, r_lo, r_hi));
    }
    for k in [lo, hi] {
        if within(rate_at(k)?) {
            return Ok(k);
        }
    }
    for _ in 0..200 {
        let mid = (lo * hi).sqrt();
        if !(mid > lo && mid < hi) {
            break;
        }
        let r = rate_at(mid)?;
        if within(r) {
            return Ok(mid);
        }
        if r < target_rate {
            lo = mid;
            r_lo = r;
        } else {
            hi = mid;
            r_hi = r;
        }
    }
    Err(unreachable(lo, hi, r_lo, r_hi))
}
