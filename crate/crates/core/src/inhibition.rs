//! Inhibition generator: the reconfigurable controller that turns a spike
//! flag into a pulse-width-modulated inhibition schedule.
//!
//! When a neuron fires without having been inhibited by a peer, the
//! generator resets it and then sends a lateral pulse to each following
//! neuron in scan order, one per scan step, with widths that shrink with
//! scan distance plus a small random component. A neuron that fires while
//! already inhibited is only reset.

use rand::Rng;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fanout {
    /// Every other neuron in the array.
    All,
    /// At most this many neurons following the firer.
    Limited(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InhibitionPolicy {
    /// Width for the first lateral target (scan distance 1).
    pub base_width_ticks: u32,
    /// Width reduction per additional scan position.
    pub decrement_ticks: u32,
    /// Floor for lateral widths before jitter.
    pub min_width_ticks: u32,
    /// Uniform integer jitter in `[-j, +j]` added to every lateral width.
    pub jitter_ticks: u32,
    pub fanout: Fanout,
    /// Master switch for lateral inhibition. Self-reset is unaffected.
    pub enabled: bool,
}

impl Default for InhibitionPolicy {
    fn default() -> Self {
        InhibitionPolicy {
            base_width_ticks: 8,
            decrement_ticks: 1,
            min_width_ticks: 1,
            jitter_ticks: 1,
            fanout: Fanout::All,
            enabled: true,
        }
    }
}

impl InhibitionPolicy {
    pub fn validate(&self, gen_ticks_per_step: u32) -> Result<()> {
        if self.min_width_ticks > self.base_width_ticks {
            return Err(Error::invalid(
                "policy.min_width_ticks",
                format!(
                    "{} exceeds base_width_ticks {}",
                    self.min_width_ticks, self.base_width_ticks
                ),
            ));
        }
        if self.base_width_ticks > gen_ticks_per_step {
            return Err(Error::invalid(
                "policy.base_width_ticks",
                format!(
                    "{} exceeds gen_ticks_per_step {}",
                    self.base_width_ticks, gen_ticks_per_step
                ),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PulseEvent {
    pub target_id: usize,
    /// Absolute scan step at which the pulse is delivered.
    pub delivery_step: u64,
    pub width_ticks: u32,
    pub origin_id: usize,
    pub is_self_reset: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PulseWidth {
    /// Full-step pulse that grounds the firer's membrane.
    SelfReset,
    Lateral(u32),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InhibitionGenerator {
    pub policy: InhibitionPolicy,
    pub gen_ticks_per_step: u32,
}

impl InhibitionGenerator {
    pub fn new(policy: InhibitionPolicy, gen_ticks_per_step: u32) -> Result<Self> {
        policy.validate(gen_ticks_per_step)?;
        Ok(InhibitionGenerator {
            policy,
            gen_ticks_per_step,
        })
    }

    /// Width for a target at scan distance `distance` from the firer.
    ///
    /// Draws from `rng` only for lateral targets with nonzero jitter.
    pub fn pulse_width<R: Rng + ?Sized>(&self, distance: usize, rng: &mut R) -> PulseWidth {
        if distance == 0 {
            return PulseWidth::SelfReset;
        }
        let p = &self.policy;
        let ramp =
            i64::from(p.base_width_ticks) - (distance as i64 - 1) * i64::from(p.decrement_ticks);
        let mut width = ramp.max(i64::from(p.min_width_ticks));
        if p.jitter_ticks > 0 {
            let j = i64::from(p.jitter_ticks);
            width += rng.gen_range(-j..=j);
        }
        PulseWidth::Lateral(width.clamp(0, i64::from(self.gen_ticks_per_step)) as u32)
    }

    fn self_reset(&self, firer_id: usize, step: u64) -> PulseEvent {
        PulseEvent {
            target_id: firer_id,
            delivery_step: step,
            width_ticks: self.gen_ticks_per_step,
            origin_id: firer_id,
            is_self_reset: true,
        }
    }

    /// Self-reset for the firer followed by one lateral pulse per scan step
    /// to the neurons after it, wrapping modulo the array.
    pub fn build_schedule<R: Rng + ?Sized>(
        &self,
        firer_id: usize,
        step: u64,
        n_neurons: usize,
        rng: &mut R,
    ) -> Vec<PulseEvent> {
        debug_assert!(firer_id < n_neurons);
        let mut events = vec![self.self_reset(firer_id, step)];
        if !self.policy.enabled {
            return events;
        }
        let lateral = match self.policy.fanout {
            Fanout::All => n_neurons - 1,
            Fanout::Limited(f) => f.min(n_neurons - 1),
        };
        events.reserve(lateral);
        for k in 1..=lateral {
            let width = match self.pulse_width(k, rng) {
                PulseWidth::Lateral(w) => w,
                PulseWidth::SelfReset => unreachable!("k >= 1"),
            };
            events.push(PulseEvent {
                target_id: (firer_id + k) % n_neurons,
                delivery_step: step + k as u64,
                width_ticks: width,
                origin_id: firer_id,
                is_self_reset: false,
            });
        }
        events
    }

    /// Broadcasts only if the firer has not itself been inhibited by a peer.
    pub fn handle_fire<R: Rng + ?Sized>(
        &self,
        firer_inhibited: bool,
        firer_id: usize,
        step: u64,
        n_neurons: usize,
        rng: &mut R,
    ) -> Vec<PulseEvent> {
        if firer_inhibited {
            vec![self.self_reset(firer_id, step)]
        } else {
            self.build_schedule(firer_id, step, n_neurons, rng)
        }
    }
}
