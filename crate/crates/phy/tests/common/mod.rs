//! Shared measurement helpers for integration tests.
//!
//! The periodogram here is computed directly with rustfft, independent of
//! the library's own DFT wrapper, so spectral assertions do not trust the
//! code under test.

use num_complex::Complex64;
use rustfft::FftPlanner;

/// One-sided periodogram: (frequencies, |X[k]|^2) for k = 0..n/2.
pub fn periodogram(samples: &[f64], rate: f64) -> (Vec<f64>, Vec<f64>) {
    let n = samples.len();
    let mut buf: Vec<Complex64> = samples.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let df = rate / n as f64;
    let half = n / 2;
    let freqs = (0..=half).map(|k| k as f64 * df).collect();
    let power = (0..=half).map(|k| buf[k].norm_sqr()).collect();
    (freqs, power)
}

/// Total periodogram power in the closed band [f_lo, f_hi] Hz.
pub fn band_power(samples: &[f64], rate: f64, f_lo: f64, f_hi: f64) -> f64 {
    let (freqs, power) = periodogram(samples, rate);
    freqs
        .iter()
        .zip(&power)
        .filter(|(f, _)| **f >= f_lo && **f <= f_hi)
        .map(|(_, p)| p)
        .sum()
}

/// Frequency of the strongest periodogram bin.
pub fn peak_frequency(samples: &[f64], rate: f64) -> f64 {
    let (freqs, power) = periodogram(samples, rate);
    let (i, _) = power
        .iter()
        .enumerate()
        .max_by(|(_, a), (_, b)| a.total_cmp(b))
        .unwrap();
    freqs[i]
}
