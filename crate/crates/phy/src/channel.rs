//! Synthetic propagation and noise.
//!
//! A tapped-delay multipath channel followed by additive background
//! Gaussian noise and an impulsive component. The impulsive generators
//! (Bernoulli-Gaussian and symmetric alpha-stable via the
//! Chambers-Mallows-Stuck transform) stand in for recorded field noise;
//! a recorded waveform can be substituted through the ingestion path.

use crate::error::{Error, Result};
use crate::signal::SampledSignal;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, PI};

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Tap {
    /// Path delay in seconds; rounded to the nearest sample on application.
    pub delay: f64,
    pub gain_re: f64,
    #[serde(default)]
    pub gain_im: f64,
}

impl Tap {
    pub fn gain(&self) -> Complex64 {
        Complex64::new(self.gain_re, self.gain_im)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum ImpulseModel {
    None,
    /// Each sample independently carries a zero-mean Gaussian impulse of
    /// power `impulse_power` with probability `probability`.
    BernoulliGaussian { probability: f64, impulse_power: f64 },
    /// Symmetric alpha-stable noise; `dispersion` is scale^alpha, so
    /// alpha = 2 gives a Gaussian of variance 2 * dispersion.
    AlphaStable { alpha: f64, dispersion: f64 },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct ChannelSpec {
    pub taps: Vec<Tap>,
    /// Linear power of the additive background Gaussian noise.
    pub background_noise_power: f64,
    pub impulse_model: ImpulseModel,
    pub seed: u64,
}

impl Default for ChannelSpec {
    fn default() -> Self {
        Self {
            taps: vec![Tap {
                delay: 0.0,
                gain_re: 1.0,
                gain_im: 0.0,
            }],
            background_noise_power: 0.0,
            impulse_model: ImpulseModel::None,
            seed: 0,
        }
    }
}

impl ChannelSpec {
    pub fn validation_errors(&self) -> Vec<String> {
        let mut errs = Vec::new();
        if self.taps.is_empty() {
            errs.push("channel needs at least one tap".into());
        }
        for (i, t) in self.taps.iter().enumerate() {
            if t.delay < 0.0 || !t.delay.is_finite() {
                errs.push(format!("tap {i} delay must be >= 0, got {}", t.delay));
            }
            if !t.gain().norm().is_finite() {
                errs.push(format!("tap {i} gain must be finite"));
            }
        }
        if !(self.background_noise_power >= 0.0) {
            errs.push("background_noise_power must be >= 0".into());
        }
        match self.impulse_model {
            ImpulseModel::None => {}
            ImpulseModel::BernoulliGaussian {
                probability,
                impulse_power,
            } => {
                if !(0.0..=1.0).contains(&probability) {
                    errs.push(format!("impulse probability {probability} outside [0, 1]"));
                }
                if !(impulse_power >= 0.0) {
                    errs.push("impulse_power must be >= 0".into());
                }
            }
            ImpulseModel::AlphaStable { alpha, dispersion } => {
                if !(alpha > 0.0 && alpha <= 2.0) {
                    errs.push(format!("alpha {alpha} outside (0, 2]"));
                }
                if !(dispersion >= 0.0) {
                    errs.push("dispersion must be >= 0".into());
                }
            }
        }
        errs
    }

    pub fn validate(&self) -> Result<()> {
        let errs = self.validation_errors();
        if errs.is_empty() {
            Ok(())
        } else {
            Err(Error::invalid(errs.join("; ")))
        }
    }

    /// Largest tap delay, seconds.
    pub fn delay_spread(&self) -> f64 {
        self.taps.iter().fold(0.0, |m, t| m.max(t.delay))
    }
}

/// Tapped-delay convolution plus background and impulsive noise.
/// Deterministic for a given `(spec, seed)`.
pub fn apply_channel(signal: &SampledSignal, spec: &ChannelSpec) -> Result<SampledSignal> {
    spec.validate()?;
    let rate = signal.sample_rate;
    let max_delay = spec
        .taps
        .iter()
        .map(|t| (t.delay * rate).round() as usize)
        .max()
        .unwrap_or(0);
    let n_out = signal.len() + max_delay;
    let mut out = vec![0.0f64; n_out];

    let complex_taps = spec.taps.iter().any(|t| t.gain_im != 0.0);
    if complex_taps {
        // complex gains rotate the carrier: act on the analytic signal
        let analytic = analytic_signal(&signal.samples);
        for t in &spec.taps {
            let d = (t.delay * rate).round() as usize;
            let g = t.gain();
            for (i, &xa) in analytic.iter().enumerate() {
                out[i + d] += (g * xa).re;
            }
        }
    } else {
        for t in &spec.taps {
            let d = (t.delay * rate).round() as usize;
            let g = t.gain_re;
            for (i, &x) in signal.samples.iter().enumerate() {
                out[i + d] += g * x;
            }
        }
    }

    if spec.background_noise_power > 0.0 {
        let mut rng = ChaCha12Rng::seed_from_u64(spec.seed);
        let normal = Normal::new(0.0, spec.background_noise_power.sqrt()).unwrap();
        for v in out.iter_mut() {
            *v += normal.sample(&mut rng);
        }
    }
    if spec.impulse_model != ImpulseModel::None {
        let imp = generate_impulsive_noise(spec.impulse_model, n_out, rate, spec.seed ^ 0x1a2b)?;
        for (v, w) in out.iter_mut().zip(&imp.samples) {
            *v += w;
        }
    }
    SampledSignal::new(out, rate, signal.start_time)
}

/// Analytic signal via FFT (positive frequencies doubled).
fn analytic_signal(x: &[f64]) -> Vec<Complex64> {
    let n = x.len().next_power_of_two();
    let mut buf: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    buf.resize(n, Complex64::new(0.0, 0.0));
    crate::dft::fft_forward(&mut buf);
    for (i, v) in buf.iter_mut().enumerate() {
        if i == 0 || (n % 2 == 0 && i == n / 2) {
            // leave DC and Nyquist
        } else if i < n / 2 {
            *v *= 2.0;
        } else {
            *v = Complex64::new(0.0, 0.0);
        }
    }
    crate::dft::fft_inverse(&mut buf);
    let scale = 1.0 / n as f64;
    buf.truncate(x.len());
    buf.iter().map(|v| v * scale).collect()
}

/// Draws `n` samples of impulsive noise at `rate`.
pub fn generate_impulsive_noise(
    model: ImpulseModel,
    n: usize,
    rate: f64,
    seed: u64,
) -> Result<SampledSignal> {
    if n == 0 {
        return Err(Error::invalid("sample count must be positive"));
    }
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let samples = match model {
        ImpulseModel::None => vec![0.0; n],
        ImpulseModel::BernoulliGaussian {
            probability,
            impulse_power,
        } => {
            if !(0.0..=1.0).contains(&probability) {
                return Err(Error::invalid(format!(
                    "impulse probability {probability} outside [0, 1]"
                )));
            }
            let normal = Normal::new(0.0, impulse_power.max(0.0).sqrt()).unwrap();
            (0..n)
                .map(|_| {
                    // draw both variates so the stream layout is fixed
                    let hit = rng.random::<f64>() < probability;
                    let g = normal.sample(&mut rng);
                    if hit {
                        g
                    } else {
                        0.0
                    }
                })
                .collect()
        }
        ImpulseModel::AlphaStable { alpha, dispersion } => {
            if !(alpha > 0.0 && alpha <= 2.0) {
                return Err(Error::invalid(format!("alpha {alpha} outside (0, 2]")));
            }
            let scale = dispersion.max(0.0).powf(1.0 / alpha);
            (0..n)
                .map(|_| scale * sas_standard(alpha, &mut rng))
                .collect()
        }
    };
    SampledSignal::new(samples, rate, 0.0)
}

/// Standard symmetric alpha-stable variate (Chambers-Mallows-Stuck).
fn sas_standard<R: Rng>(alpha: f64, rng: &mut R) -> f64 {
    let v = PI * (rng.random::<f64>() - 0.5); // uniform (-pi/2, pi/2)
    let w = -(rng.random::<f64>().max(1e-300)).ln(); // exponential(1)
    if (alpha - 1.0).abs() < 1e-12 {
        return v.tan();
    }
    let v = v.clamp(-FRAC_PI_2 + 1e-12, FRAC_PI_2 - 1e-12);
    (alpha * v).sin() / v.cos().powf(1.0 / alpha)
        * ((v * (1.0 - alpha)).cos() / w).powf((1.0 - alpha) / alpha)
}
