//! Unitary DFT on power-of-two blocks.
//!
//! Both directions are scaled by 1/sqrt(N) so Parseval checks hold
//! independent of direction.

use crate::error::{Error, Result};
use num_complex::Complex64;
use rustfft::FftPlanner;

/// Forward (`inverse = false`) or inverse unitary DFT of a power-of-two block.
pub fn dft(block: &[Complex64], inverse: bool) -> Result<Vec<Complex64>> {
    let n = block.len();
    if n == 0 || !n.is_power_of_two() {
        return Err(Error::invalid(format!(
            "DFT length must be a power of two, got {n}"
        )));
    }
    let mut buf = block.to_vec();
    let mut planner = FftPlanner::new();
    let fft = if inverse {
        planner.plan_fft_inverse(n)
    } else {
        planner.plan_fft_forward(n)
    };
    fft.process(&mut buf);
    let scale = 1.0 / (n as f64).sqrt();
    for v in &mut buf {
        *v *= scale;
    }
    Ok(buf)
}

/// Unscaled forward FFT of arbitrary length (internal modem plumbing).
pub(crate) fn fft_forward(buf: &mut [Complex64]) {
    FftPlanner::new().plan_fft_forward(buf.len()).process(buf);
}

/// Unscaled inverse FFT of arbitrary length (internal modem plumbing).
pub(crate) fn fft_inverse(buf: &mut [Complex64]) {
    FftPlanner::new().plan_fft_inverse(buf.len()).process(buf);
}
