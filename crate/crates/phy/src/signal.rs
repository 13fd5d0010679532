//! Uniformly sampled real-valued waveforms.
//!
//! `SampledSignal` is the currency passed between every processing stage:
//! transmitter, channel, analog front-end, ADC and receiver. The
//! `start_time` field pins the first sample onto the frame timeline so
//! stage outputs stay mutually aligned after filtering and resampling.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct SampledSignal {
    pub samples: Vec<f64>,
    /// Samples per second. Always positive.
    pub sample_rate: f64,
    /// Frame time of the first sample, in seconds.
    pub start_time: f64,
}

impl SampledSignal {
    pub fn new(samples: Vec<f64>, sample_rate: f64, start_time: f64) -> Result<Self> {
        if !(sample_rate > 0.0) || !sample_rate.is_finite() {
            return Err(Error::invalid(format!(
                "sample_rate must be positive and finite, got {sample_rate}"
            )));
        }
        if !start_time.is_finite() {
            return Err(Error::invalid("start_time must be finite"));
        }
        if let Some(i) = samples.iter().position(|s| !s.is_finite()) {
            return Err(Error::invalid(format!("non-finite sample at index {i}")));
        }
        Ok(Self {
            samples,
            sample_rate,
            start_time,
        })
    }

    /// All-zero signal of `n` samples.
    pub fn zeros(n: usize, sample_rate: f64, start_time: f64) -> Self {
        Self {
            samples: vec![0.0; n],
            sample_rate,
            start_time,
        }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate
    }

    /// Frame time of sample `k`.
    pub fn time_of(&self, k: usize) -> f64 {
        self.start_time + k as f64 / self.sample_rate
    }

    /// Nearest sample index for frame time `t` (may be out of range).
    pub fn index_at(&self, t: f64) -> i64 {
        ((t - self.start_time) * self.sample_rate).round() as i64
    }

    pub fn energy(&self) -> f64 {
        self.samples.iter().map(|s| s * s).sum()
    }

    pub fn power(&self) -> f64 {
        if self.samples.is_empty() {
            0.0
        } else {
            self.energy() / self.samples.len() as f64
        }
    }

    pub fn rms(&self) -> f64 {
        self.power().sqrt()
    }

    pub fn peak(&self) -> f64 {
        self.samples.iter().fold(0.0_f64, |m, s| m.max(s.abs()))
    }

    /// Returns an error if any sample is NaN or infinite. Stage boundaries
    /// call this to keep the finite-samples invariant checkable.
    pub fn check_finite(&self) -> Result<()> {
        if let Some(i) = self.samples.iter().position(|s| !s.is_finite()) {
            return Err(Error::invalid(format!("non-finite sample at index {i}")));
        }
        Ok(())
    }

    /// Copy of the sample range `[start, start+len)` keeping the timeline.
    pub fn window(&self, start: usize, len: usize) -> Result<SampledSignal> {
        if start + len > self.samples.len() {
            return Err(Error::invalid(format!(
                "window [{start}, {}) out of bounds (len {})",
                start + len,
                self.samples.len()
            )));
        }
        Ok(SampledSignal {
            samples: self.samples[start..start + len].to_vec(),
            sample_rate: self.sample_rate,
            start_time: self.time_of(start),
        })
    }

    /// Same samples, re-anchored so that sample `k` sits at frame time `t`.
    pub fn anchored(mut self, k: usize, t: f64) -> SampledSignal {
        self.start_time = t - k as f64 / self.sample_rate;
        self
    }
}
