//! Normalized cross-correlation for preamble detection.

use crate::error::{Error, Result};
use crate::signal::SampledSignal;
use num_complex::Complex64;

/// Cross-correlates two equally sampled signals.
///
/// Returns the full normalized correlation and the lag of the maximum
/// absolute value. Index `i` of the returned vector corresponds to lag
/// `i as isize - (b.len() - 1)` and holds
/// `sum_n a[n] * b[n - lag] / (||a|| * ||b||)`, so if `a` is a copy of `b`
/// delayed by `d` samples the peak sits at lag `d`.
pub fn cross_correlate(a: &SampledSignal, b: &SampledSignal) -> Result<(Vec<f64>, isize)> {
    if (a.sample_rate - b.sample_rate).abs() > 1e-9 * a.sample_rate {
        return Err(Error::invalid(format!(
            "sample rate mismatch: {} vs {}",
            a.sample_rate, b.sample_rate
        )));
    }
    if a.is_empty() || b.is_empty() {
        return Err(Error::invalid("cross-correlation needs non-empty inputs"));
    }
    let nb = b.len();
    let norm = (a.energy() * b.energy()).sqrt();
    if norm == 0.0 {
        return Err(Error::invalid("cross-correlation of all-zero signal"));
    }

    let full = correlate_fft(&a.samples, &b.samples);
    let values: Vec<f64> = full.iter().map(|v| v / norm).collect();
    let (best_idx, _) = values
        .iter()
        .enumerate()
        .max_by(|(_, x), (_, y)| x.abs().total_cmp(&y.abs()))
        .unwrap();
    let peak_lag = best_idx as isize - (nb as isize - 1);
    Ok((values, peak_lag))
}

/// Raw (unnormalized) full cross-correlation via FFT:
/// out[i] = sum_n a[n] * b[n - (i - nb + 1)], i in 0..na+nb-1.
pub(crate) fn correlate_fft(a: &[f64], b: &[f64]) -> Vec<f64> {
    let na = a.len();
    let nb = b.len();
    let full_len = na + nb - 1;
    let fft_len = full_len.next_power_of_two();
    let mut fa = vec![Complex64::new(0.0, 0.0); fft_len];
    let mut fb = vec![Complex64::new(0.0, 0.0); fft_len];
    for (i, &v) in a.iter().enumerate() {
        fa[i] = Complex64::new(v, 0.0);
    }
    // time-reverse b so convolution computes correlation
    for (i, &v) in b.iter().rev().enumerate() {
        fb[i] = Complex64::new(v, 0.0);
    }
    crate::dft::fft_forward(&mut fa);
    crate::dft::fft_forward(&mut fb);
    for (x, y) in fa.iter_mut().zip(&fb) {
        *x *= y;
    }
    crate::dft::fft_inverse(&mut fa);
    let scale = 1.0 / fft_len as f64;
    fa[..full_len].iter().map(|v| v.re * scale).collect()
}
