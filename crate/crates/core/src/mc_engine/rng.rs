//! Counter-addressed Gaussian substreams.
//!
//! Every `(path, driver)` pair owns its own ChaCha8 stream, selected by
//! the stream id `3 * path + driver` under the master seed. Step `k` of a
//! stream consumes exactly one 64-bit word at word position `2k`, so any
//! draw can be located without replaying earlier ones and the assignment
//! of paths to worker threads never changes a result.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ContinuousCDF, Normal};

/// Index of the Brownian driver inside a path.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u8)]
pub enum Driver {
    /// `W⁰`, the short rate (and the bond).
    Rate = 0,
    /// `W¹`, the stock.
    Stock = 1,
    /// `W²`, the forward variance.
    Variance = 2,
}

impl Driver {
    pub const COUNT: u64 = 3;
}

/// Sequential reader over one `(seed, path, driver)` substream.
#[derive(Clone)]
pub struct GaussianStream {
    rng: ChaCha8Rng,
    std_normal: Normal,
}

impl GaussianStream {
    pub fn new(seed: u64, path: usize, driver: Driver) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(path as u64 * Driver::COUNT + driver as u64);
        Self {
            rng,
            std_normal: Normal::standard(),
        }
    }

    /// Position the stream so the next draw is the one for `step`.
    pub fn seek(&mut self, step: usize) {
        self.rng.set_word_pos(2 * step as u128);
    }

    #[inline]
    pub fn next_normal(&mut self) -> f64 {
        let u = open_unit(self.rng.next_u64());
        self.std_normal.inverse_cdf(u)
    }
}

/// Map 64 random bits to a uniform in the open interval (0, 1).
#[inline]
fn open_unit(bits: u64) -> f64 {
    ((bits >> 12) as f64 + 0.5) * (1.0 / (1u64 << 52) as f64)
}

/// Standard normal deviate for increment `step` of `driver` on `path`.
pub fn gaussian_stream(seed: u64, path: usize, driver: Driver, step: usize) -> f64 {
    let mut s = GaussianStream::new(seed, path, driver);
    s.seek(step);
    s.next_normal()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_and_random_access() {
        let a = gaussian_stream(7, 12, Driver::Stock, 99);
        let b = gaussian_stream(7, 12, Driver::Stock, 99);
        assert_eq!(a.to_bits(), b.to_bits());

        let mut seq = GaussianStream::new(7, 12, Driver::Stock);
        let draws: Vec<f64> = (0..100).map(|_| seq.next_normal()).collect();
        assert_eq!(draws[99].to_bits(), a.to_bits());
        assert_eq!(
            draws[0].to_bits(),
            gaussian_stream(7, 12, Driver::Stock, 0).to_bits()
        );
    }

    #[test]
    fn substreams_differ() {
        let x = gaussian_stream(1, 0, Driver::Rate, 5);
        assert_ne!(x, gaussian_stream(1, 0, Driver::Stock, 5));
        assert_ne!(x, gaussian_stream(1, 1, Driver::Rate, 5));
        assert_ne!(x, gaussian_stream(2, 0, Driver::Rate, 5));
    }

    #[test]
    fn unit_interval_is_open() {
        assert!(open_unit(0) > 0.0);
        assert!(open_unit(u64::MAX) < 1.0);
    }
}
