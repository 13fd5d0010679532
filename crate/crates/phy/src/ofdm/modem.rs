//! Passband OFDM block synthesis and demodulation.
//!
//! The transmitter places active-subcarrier symbols on the exact DFT grid
//! around the carrier bin and synthesizes the real passband waveform with
//! one inverse FFT per block, followed by a zero-padded guard interval.
//! The receiver folds the guard tail back onto the symbol window
//! (standard zero-padded OFDM overlap-add) and reads the active bins of a
//! forward FFT, which performs the downconversion and matched DFT in one
//! step.

use crate::dft::{fft_forward, fft_inverse};
use crate::error::{Error, Result};
use crate::ofdm::config::OfdmConfig;
use crate::signal::SampledSignal;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

/// Per-subcarrier amplitude that makes the transmitted passband signal
/// unit power: with `n_active` unit-energy symbols the waveform power is
/// `2 * n_active * a^2`.
pub fn subcarrier_amplitude(config: &OfdmConfig) -> f64 {
    let n_active = config.data_set.len() + config.pilot_set.len();
    1.0 / (2.0 * n_active as f64).sqrt()
}

/// Deterministic QPSK pilot sequence shared by transmitter and receiver.
pub fn pilot_symbols(config: &OfdmConfig) -> Vec<Complex64> {
    let mut rng = ChaCha12Rng::seed_from_u64(config.pilot_seed);
    (0..config.pilot_set.len())
        .map(|_| {
            let re = if rng.random::<bool>() { 1.0 } else { -1.0 };
            let im = if rng.random::<bool>() { 1.0 } else { -1.0 };
            Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
        })
        .collect()
}

/// Synthesizes the T-long passband symbol window (no guard) at `rate`.
pub(crate) fn synthesize_symbol(
    config: &OfdmConfig,
    data: &[Complex64],
    pilots: &[Complex64],
    rate: f64,
) -> Result<Vec<f64>> {
    if data.len() != config.data_set.len() {
        return Err(Error::invalid(format!(
            "expected {} data symbols, got {}",
            config.data_set.len(),
            data.len()
        )));
    }
    if pilots.len() != config.pilot_set.len() {
        return Err(Error::invalid(format!(
            "expected {} pilot symbols, got {}",
            config.pilot_set.len(),
            pilots.len()
        )));
    }
    let m = config.symbol_samples(rate);
    let kc = config.carrier_bin()? as i64;
    let a = subcarrier_amplitude(config);
    let mut spectrum = vec![Complex64::new(0.0, 0.0); m];
    let mut place = |k: i32, s: Complex64| -> Result<()> {
        let bin = kc + k as i64;
        if bin <= 0 || bin as usize >= m / 2 {
            return Err(Error::invalid(format!(
                "subcarrier {k} maps to bin {bin} outside (0, {})",
                m / 2
            )));
        }
        spectrum[bin as usize] = s * a;
        Ok(())
    };
    for (&k, &s) in config.data_set.iter().zip(data) {
        place(k, s)?;
    }
    for (&k, &s) in config.pilot_set.iter().zip(pilots) {
        place(k, s)?;
    }
    fft_inverse(&mut spectrum);
    Ok(spectrum.iter().map(|v| 2.0 * v.re).collect())
}

/// One zero-padded OFDM block at the analog rate: T of signal followed by
/// T_g of exact silence.
pub fn modulate_block(
    config: &OfdmConfig,
    data: &[Complex64],
    pilots: &[Complex64],
) -> Result<SampledSignal> {
    let mut samples = synthesize_symbol(config, data, pilots, config.analog_rate)?;
    samples.extend(std::iter::repeat_n(0.0, config.guard_samples(config.analog_rate)));
    SampledSignal::new(samples, config.analog_rate, 0.0)
}

/// Subcarrier observations of one demodulated block.
#[derive(Debug, Clone)]
pub struct DemodulatedBlock {
    /// Symbols on `config.data_set`, in set order.
    pub data: Vec<Complex64>,
    /// Symbols on `config.pilot_set`, in set order.
    pub pilots: Vec<Complex64>,
    /// Observations on `config.null_set` (noise only in loopback).
    pub nulls: Vec<Complex64>,
}

/// Demodulates the block whose symbol window starts at sample
/// `block_offset` of `received` (ADC rate).
pub fn demodulate_block(
    received: &SampledSignal,
    config: &OfdmConfig,
    block_offset: usize,
) -> Result<DemodulatedBlock> {
    let rate = received.sample_rate;
    if (rate - config.adc_rate).abs() > 1e-6 * config.adc_rate {
        return Err(Error::invalid(format!(
            "demodulation expects the ADC rate {} Hz, signal is at {rate} Hz",
            config.adc_rate
        )));
    }
    let m = config.symbol_samples(rate);
    let guard = config.guard_samples(rate);
    if block_offset + m + guard > received.len() {
        return Err(Error::invalid(format!(
            "block window [{block_offset}, {}) out of bounds (len {})",
            block_offset + m + guard,
            received.len()
        )));
    }
    let x = &received.samples;
    let mut window: Vec<Complex64> = x[block_offset..block_offset + m]
        .iter()
        .map(|&v| Complex64::new(v, 0.0))
        .collect();
    // fold the zero-padded tail back into the symbol window
    for i in 0..guard {
        window[i].re += x[block_offset + m + i];
    }
    fft_forward(&mut window);
    let kc = config.carrier_bin()? as i64;
    let scale = 1.0 / (m as f64 * subcarrier_amplitude(config));
    let read = |k: i32| window[(kc + k as i64) as usize] * scale;
    Ok(DemodulatedBlock {
        data: config.data_set.iter().map(|&k| read(k)).collect(),
        pilots: config.pilot_set.iter().map(|&k| read(k)).collect(),
        nulls: config.null_set.iter().map(|&k| read(k)).collect(),
    })
}
