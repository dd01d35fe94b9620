//! Behavioral integrate-and-fire neuron.
//!
//! The membrane is expressed in threshold units: the comparator trips at
//! exactly `1.0`, and every circuit constant (membrane capacitance,
//! threshold voltage) collapses into a single `charge_gain` that converts
//! coulombs of input charge into membrane rise.
//!
//! Charging goes through the input current mirror, scaled by the neuron's
//! fixed mismatch `g_exc` and clamped at `i_exc_max`. Discharging happens
//! only during an inhibition pulse, at `g_inh * i_inh` for the pulse width.

use crate::error::{Error, Result};

/// Comparator threshold in membrane units.
pub const THRESHOLD: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NeuronParams {
    /// Threshold units per coulomb, i.e. `1 / (C_mem * V_th)`.
    pub charge_gain: f64,
    /// Upper clamp on the effective charging current, amperes.
    /// `f64::INFINITY` disables the clamp.
    pub i_exc_max: f64,
    /// Discharge current while an inhibition pulse is active, amperes.
    pub i_inh: f64,
    /// Exponential membrane decay constant, seconds. `f64::INFINITY` disables leak.
    pub leak_tau: f64,
    /// Saturation ceiling in threshold units.
    pub v_max: f64,
    /// Duration of one inhibition-generator tick, seconds.
    pub tick_seconds: f64,
}

impl Default for NeuronParams {
    fn default() -> Self {
        NeuronParams {
            charge_gain: 1.0e12,
            i_exc_max: 800e-9,
            i_inh: 4e-6,
            leak_tau: f64::INFINITY,
            v_max: 2.0,
            tick_seconds: 3e-9,
        }
    }
}

impl NeuronParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.charge_gain > 0.0 && self.charge_gain.is_finite()) {
            return Err(Error::invalid(
                "neuron.charge_gain",
                "must be finite and > 0",
            ));
        }
        if !(self.i_exc_max > 0.0) {
            return Err(Error::invalid("neuron.i_exc_max", "must be > 0"));
        }
        if !(self.i_inh > 0.0 && self.i_inh.is_finite()) {
            return Err(Error::invalid("neuron.i_inh", "must be finite and > 0"));
        }
        if !(self.leak_tau > 0.0) {
            return Err(Error::invalid("neuron.leak_tau", "must be > 0 or inf"));
        }
        if !(self.v_max >= THRESHOLD && self.v_max.is_finite()) {
            return Err(Error::invalid("neuron.v_max", "must be finite and >= 1.0"));
        }
        if !(self.tick_seconds > 0.0 && self.tick_seconds.is_finite()) {
            return Err(Error::invalid(
                "neuron.tick_seconds",
                "must be finite and > 0",
            ));
        }
        Ok(())
    }

    /// Multiplicative membrane decay over `dt`; exactly 1 with leak disabled.
    pub fn decay(&self, dt: f64) -> f64 {
        if self.leak_tau.is_infinite() {
            1.0
        } else {
            (-dt / self.leak_tau).exp()
        }
    }

    /// Membrane drop for one tick of lateral inhibition at unit mismatch.
    pub fn drop_per_tick(&self) -> f64 {
        self.charge_gain * self.i_inh * self.tick_seconds
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NeuronState {
    /// Membrane voltage in threshold units.
    pub v: f64,
    /// Fixed mismatch on the input current path.
    pub g_exc: f64,
    /// Fixed mismatch on the inhibition discharge path.
    pub g_inh: f64,
    /// Set when a lateral pulse from another neuron arrived since this
    /// neuron's own last spike.
    pub inhibited: bool,
}

impl Default for NeuronState {
    fn default() -> Self {
        NeuronState::new(1.0, 1.0)
    }
}

impl NeuronState {
    pub fn new(g_exc: f64, g_inh: f64) -> Self {
        NeuronState {
            v: 0.0,
            g_exc,
            g_inh,
            inhibited: false,
        }
    }

    /// Integrates input current `i_in` over `dt` seconds.
    pub fn integrate(self, params: &NeuronParams, i_in: f64, dt: f64) -> Result<Self> {
        if !(i_in >= 0.0) {
            return Err(Error::Contract(format!(
                "input current must be >= 0, got {i_in:e}"
            )));
        }
        if !(dt > 0.0) {
            return Err(Error::Contract(format!("dt must be > 0, got {dt:e}")));
        }
        Ok(self.integrate_with_decay(params, i_in, dt, params.decay(dt)))
    }

    /// Hot-path form of [`integrate`](Self::integrate) with a precomputed decay
    /// factor and no argument checks.
    #[inline]
    pub(crate) fn integrate_with_decay(
        mut self,
        params: &NeuronParams,
        i_in: f64,
        dt: f64,
        decay: f64,
    ) -> Self {
        // Clamp in the input domain so that i_in == i_exc_max / g_exc lands
        // exactly on the clamp.
        let current = if i_in >= params.i_exc_max / self.g_exc {
            params.i_exc_max
        } else {
            self.g_exc * i_in
        };
        self.v = (self.v * decay + params.charge_gain * current * dt).min(params.v_max);
        self
    }

    /// Applies one inhibition pulse of `width_ticks` generator ticks.
    ///
    /// A self-reset pulse sets the membrane to exactly zero; a lateral pulse
    /// discharges at the mismatched inhibition current and floors at ground.
    pub fn apply_pulse(
        mut self,
        params: &NeuronParams,
        width_ticks: u32,
        is_self_reset: bool,
    ) -> Self {
        if is_self_reset {
            self.v = 0.0;
        } else {
            let drop = params.drop_per_tick() * self.g_inh * f64::from(width_ticks);
            self.v = (self.v - drop).max(0.0);
        }
        self
    }

    pub fn at_threshold(&self) -> bool {
        self.v >= THRESHOLD
    }
}
