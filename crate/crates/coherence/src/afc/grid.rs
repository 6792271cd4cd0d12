//! Shared frequency/time grid for the storage simulation.
//!
//! A grid of `n` points spanning `span` MHz fixes both domains at once:
//! frequency resolution df = span/n, time step dt = 1/span µs, total
//! duration n/span µs. MHz·µs = 1, so no unit factors appear anywhere.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FreqGrid {
    n: usize,
    span_mhz: f64,
}

impl FreqGrid {
    /// `n` must be a power of two (fast transforms, clean index folding).
    pub fn new(n: usize, span_mhz: f64) -> Result<Self> {
        if n < 16 || !n.is_power_of_two() {
            return Err(Error::argument(format!(
                "grid size must be a power of two >= 16, got {n}"
            )));
        }
        if !(span_mhz > 0.0) {
            return Err(Error::argument(format!(
                "grid span must be positive, got {span_mhz} MHz"
            )));
        }
        Ok(FreqGrid { n, span_mhz })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn span_mhz(&self) -> f64 {
        self.span_mhz
    }

    pub fn df_mhz(&self) -> f64 {
        self.span_mhz / self.n as f64
    }

    pub fn dt_us(&self) -> f64 {
        1.0 / self.span_mhz
    }

    pub fn duration_us(&self) -> f64 {
        self.n as f64 / self.span_mhz
    }

    /// Detuning of centered index `i`: (i − n/2)·df, ascending, 0 at n/2.
    pub fn freq_at(&self, i: usize) -> f64 {
        (i as f64 - (self.n / 2) as f64) * self.df_mhz()
    }

    /// Map a centered index to the wrap-around order used by the DFT
    /// (DC first). The map is an involution for power-of-two n.
    pub fn wrapped_index(&self, centered: usize) -> usize {
        (centered + self.n / 2) % self.n
    }
}
