//! Row/column scan chains over the neuron array.
//!
//! The column chain shifts every scan step and the row chain shifts once per
//! column pass, so neurons are selected in column-fast raster order and each
//! one is visited exactly once per sweep.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanConfig {
    pub rows: usize,
    pub cols: usize,
    /// Duration of one selection step (33.3 MHz column shift rate -> 30 ns).
    pub scan_step_seconds: f64,
    /// Inhibition-generator clock ticks per scan step.
    pub gen_ticks_per_step: u32,
}

impl Default for ScanConfig {
    fn default() -> Self {
        ScanConfig {
            rows: 7,
            cols: 30,
            scan_step_seconds: 30e-9,
            gen_ticks_per_step: 10,
        }
    }
}

impl ScanConfig {
    pub fn validate(&self) -> Result<()> {
        if self.rows == 0 {
            return Err(Error::invalid("scan.rows", "must be >= 1"));
        }
        if self.cols == 0 {
            return Err(Error::invalid("scan.cols", "must be >= 1"));
        }
        if !(self.scan_step_seconds > 0.0 && self.scan_step_seconds.is_finite()) {
            return Err(Error::invalid(
                "scan.scan_step_seconds",
                "must be finite and > 0",
            ));
        }
        if self.gen_ticks_per_step == 0 {
            return Err(Error::invalid("scan.gen_ticks_per_step", "must be >= 1"));
        }
        Ok(())
    }

    pub fn n_neurons(&self) -> usize {
        self.rows * self.cols
    }

    pub fn tick_seconds(&self) -> f64 {
        self.scan_step_seconds / f64::from(self.gen_ticks_per_step)
    }

    /// Duration of one full sweep over the array.
    pub fn sweep_seconds(&self) -> f64 {
        self.scan_step_seconds * self.n_neurons() as f64
    }

    /// Cursor selected at absolute scan step `step`, starting from (0, 0).
    pub fn cursor_at(&self, step: u64) -> ScanCursor {
        let id = (step % self.n_neurons() as u64) as usize;
        ScanCursor {
            row: id / self.cols,
            col: id % self.cols,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct ScanCursor {
    pub row: usize,
    pub col: usize,
}

impl ScanCursor {
    pub fn advance(self, config: &ScanConfig) -> ScanCursor {
        debug_assert!(self.row < config.rows && self.col < config.cols);
        if self.col + 1 < config.cols {
            ScanCursor {
                col: self.col + 1,
                ..self
            }
        } else if self.row + 1 < config.rows {
            ScanCursor {
                row: self.row + 1,
                col: 0,
            }
        } else {
            ScanCursor { row: 0, col: 0 }
        }
    }

    pub fn linear_id(self, config: &ScanConfig) -> usize {
        self.row * config.cols + self.col
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn cfg(rows: usize, cols: usize) -> ScanConfig {
        ScanConfig {
            rows,
            cols,
            ..ScanConfig::default()
        }
    }

    #[test]
    fn advance_examples() {
        let c = ScanCursor { row: 0, col: 0 }.advance(&cfg(1, 3));
        assert_eq!(c, ScanCursor { row: 0, col: 1 });
        let c = ScanCursor { row: 0, col: 2 }.advance(&cfg(2, 3));
        assert_eq!(c, ScanCursor { row: 1, col: 0 });
        let c = ScanCursor { row: 1, col: 2 }.advance(&cfg(2, 3));
        assert_eq!(c, ScanCursor { row: 0, col: 0 });
    }

    #[test]
    fn linear_id_examples() {
        assert_eq!(ScanCursor::default().linear_id(&cfg(4, 5)), 0);
        assert_eq!(ScanCursor { row: 1, col: 0 }.linear_id(&cfg(2, 3)), 3);
        let full = ScanConfig::default();
        assert_eq!(ScanCursor { row: 6, col: 29 }.linear_id(&full), 209);
        assert_eq!(full.n_neurons(), 210);
    }

    #[test]
    fn default_timing() {
        let c = ScanConfig::default();
        assert!((c.tick_seconds() - 3e-9).abs() < 1e-24);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn one_sweep_visits_every_neuron_once(rows in 1usize..12, cols in 1usize..40) {
            let c = cfg(rows, cols);
            let n = c.n_neurons();
            let mut cur = ScanCursor::default();
            let mut seen = vec![false; n];
            let mut prev = None;
            for step in 0..n {
                let id = cur.linear_id(&c);
                prop_assert_eq!(cur, c.cursor_at(step as u64));
                prop_assert!(!seen[id]);
                seen[id] = true;
                if let Some(p) = prev {
                    prop_assert!(id > p);
                }
                prev = Some(id);
                cur = cur.advance(&c);
            }
            prop_assert_eq!(cur, ScanCursor::default());
            prop_assert!(seen.iter().all(|&s| s));
        }
    }
}
