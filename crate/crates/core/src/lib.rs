//! Behavioral simulator of a neuromorphic ADC: a scanned two-dimensional
//! array of integrate-and-fire neurons whose spikes are decohered by
//! pulse-width-modulated lateral inhibition, plus the reconstruction and
//! measurement pipeline around it.

// `!(x > 0.0)` is how validation rejects NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod engine;
pub mod error;
pub mod inhibition;
pub mod io;
pub mod neuron;
pub mod recon;
pub mod scan;
pub mod stimulus;

pub use error::{Error, Result};
