//! FIR filter design, filtering and rational resampling.
//!
//! The lowpass designs are windowed-sinc with a Kaiser window sized for
//! 60 dB of stopband rejection, which is what the ADC anti-alias stage
//! uses. All parameters are plain data so alternative designs can be
//! swapped in through the same `FirFilter` type.

use crate::error::{Error, Result};
use crate::signal::SampledSignal;

/// Kaiser beta for 60 dB stopband attenuation: 0.1102 * (A - 8.7).
const KAISER_BETA_60DB: f64 = 0.1102 * (60.0 - 8.7);

/// Default tap count for the anti-alias / interpolation lowpass.
pub const DEFAULT_AA_TAPS: usize = 127;

#[derive(Debug, Clone)]
pub struct FirFilter {
    taps: Vec<f64>,
}

impl FirFilter {
    pub fn new(taps: Vec<f64>) -> Result<Self> {
        if taps.is_empty() {
            return Err(Error::invalid("FIR filter needs at least one tap"));
        }
        if taps.iter().any(|t| !t.is_finite()) {
            return Err(Error::invalid("FIR taps must be finite"));
        }
        Ok(Self { taps })
    }

    /// Windowed-sinc lowpass. `cutoff` is the -6 dB edge as a fraction of
    /// the sample rate (0 < cutoff < 0.5). DC gain is normalized to 1.
    pub fn low_pass(num_taps: usize, cutoff: f64) -> Result<Self> {
        if num_taps == 0 {
            return Err(Error::invalid("num_taps must be positive"));
        }
        if !(cutoff > 0.0 && cutoff < 0.5) {
            return Err(Error::invalid(format!(
                "cutoff must lie in (0, 0.5) of the sample rate, got {cutoff}"
            )));
        }
        let m = (num_taps - 1) as f64;
        let mut taps: Vec<f64> = (0..num_taps)
            .map(|i| {
                let n = i as f64 - m / 2.0;
                let s = sinc(2.0 * cutoff * n);
                let w = kaiser(i as f64, m, KAISER_BETA_60DB);
                2.0 * cutoff * s * w
            })
            .collect();
        let dc: f64 = taps.iter().sum();
        for t in &mut taps {
            *t /= dc;
        }
        Ok(Self { taps })
    }

    /// Bandpass as a difference of two lowpasses; passband gain ~1.
    pub fn band_pass(num_taps: usize, low: f64, high: f64) -> Result<Self> {
        if !(low > 0.0 && high > low && high < 0.5) {
            return Err(Error::invalid("need 0 < low < high < 0.5"));
        }
        let hi = Self::low_pass(num_taps, high)?;
        let lo = Self::low_pass(num_taps, low)?;
        let taps = hi
            .taps
            .iter()
            .zip(&lo.taps)
            .map(|(a, b)| a - b)
            .collect();
        Self::new(taps)
    }

    pub fn taps(&self) -> &[f64] {
        &self.taps
    }

    pub fn dc_gain(&self) -> f64 {
        self.taps.iter().sum()
    }

    /// Group delay in samples, (len - 1) / 2 for symmetric designs.
    pub fn group_delay(&self) -> f64 {
        (self.taps.len() - 1) as f64 / 2.0
    }

    /// Full linear convolution, length `n + taps - 1`. No delay compensation.
    pub fn convolve(&self, x: &[f64]) -> Vec<f64> {
        let n = x.len();
        let k = self.taps.len();
        let mut y = vec![0.0; n + k - 1];
        for (i, &xi) in x.iter().enumerate() {
            if xi == 0.0 {
                continue;
            }
            for (j, &tj) in self.taps.iter().enumerate() {
                y[i + j] += xi * tj;
            }
        }
        y
    }
}

fn sinc(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        let px = std::f64::consts::PI * x;
        px.sin() / px
    }
}

/// Zeroth-order modified Bessel function of the first kind (series form).
fn bessel_i0(x: f64) -> f64 {
    let mut sum = 1.0;
    let mut term = 1.0;
    let half_x = x / 2.0;
    for k in 1..=40 {
        term *= (half_x / k as f64) * (half_x / k as f64);
        sum += term;
        if term < sum * 1e-16 {
            break;
        }
    }
    sum
}

fn kaiser(i: f64, m: f64, beta: f64) -> f64 {
    let r = 2.0 * i / m - 1.0;
    bessel_i0(beta * (1.0 - r * r).max(0.0).sqrt()) / bessel_i0(beta)
}

/// Applies `filter` to `signal` with group-delay compensation: the output
/// has the same length and timeline alignment as the input.
pub fn fir_filter(signal: &SampledSignal, filter: &FirFilter) -> Result<SampledSignal> {
    if signal.is_empty() {
        return Err(Error::invalid("cannot filter an empty signal"));
    }
    let full = filter.convolve(&signal.samples);
    let gd = filter.group_delay().round() as usize;
    let out: Vec<f64> = (0..signal.len()).map(|n| full[n + gd]).collect();
    SampledSignal::new(out, signal.sample_rate, signal.start_time)
}

/// Finds small integers (up, down) with target/source == up/down.
fn rational_ratio(source: f64, target: f64) -> Option<(usize, usize)> {
    for down in 1..=512usize {
        let up_f = target * down as f64 / source;
        let up = up_f.round();
        if up >= 1.0 && (up_f - up).abs() < 1e-9 * up.max(1.0) && up <= 512.0 {
            return Some((up as usize, down));
        }
    }
    None
}

/// Rate conversion by a small rational factor.
///
/// When `anti_alias` is set and the rate drops, the signal is lowpass
/// filtered at 0.35 * target_rate before decimation (this is the ADC
/// boundary model). Upsampling always applies the interpolation lowpass.
pub fn resample(signal: &SampledSignal, target_rate: f64, anti_alias: bool) -> Result<SampledSignal> {
    if !(target_rate > 0.0) || !target_rate.is_finite() {
        return Err(Error::invalid("target_rate must be positive"));
    }
    let source = signal.sample_rate;
    let (up, down) = rational_ratio(source, target_rate).ok_or_else(|| {
        Error::UnsupportedRatio(format!(
            "{source} Hz -> {target_rate} Hz is not a small rational ratio"
        ))
    })?;
    if up == 1 && down == 1 {
        return Ok(signal.clone());
    }

    let inter_rate = source * up as f64;
    // Cutoff guards both images (when up > 1) and aliases (when down > 1).
    // 0.35 of the lower rate leaves room for the 127-tap transition band:
    // the stopband is fully reached before the new Nyquist frequency.
    let cutoff_hz = 0.35 * source.min(target_rate);
    let needs_filter = up > 1 || (anti_alias && down > 1);

    if !needs_filter {
        let out: Vec<f64> = signal.samples.iter().step_by(down).copied().collect();
        return SampledSignal::new(out, target_rate, signal.start_time);
    }

    let filter = FirFilter::low_pass(DEFAULT_AA_TAPS, cutoff_hz / inter_rate)?;
    let gd = filter.group_delay().round() as usize;
    let taps = filter.taps();
    let n_in = signal.len();
    let n_out = (n_in * up).div_ceil(down);
    let gain = up as f64;
    let mut out = vec![0.0; n_out];
    // Polyphase evaluation on the zero-stuffed grid: output sample m sits at
    // intermediate index m*down; only every up-th intermediate sample is
    // nonzero, so the inner sum walks the input directly.
    for (m, o) in out.iter_mut().enumerate() {
        let center = m * down + gd; // index into the full convolution
        let mut acc = 0.0;
        // full[c] = sum_j taps[j] * stuffed[c - j]; stuffed[i] != 0 iff i % up == 0
        let j_lo = center.saturating_sub(n_in * up - 1);
        let j_hi = taps.len().min(center + 1);
        let mut j = j_lo + (center - j_lo) % up; // first j with (center-j) % up == 0
        while j < j_hi {
            let i = (center - j) / up;
            acc += taps[j] * signal.samples[i];
            j += up;
        }
        *o = acc * gain;
    }
    SampledSignal::new(out, target_rate, signal.start_time)
}
