//! Frame synchronization.
//!
//! Coarse timing comes from the self-correlation of the CP-OFDM preamble:
//! the cyclic prefix repeats one symbol later, so a sliding correlation
//! between the two windows peaks at the prefix start. The estimate is
//! then refined by cross-correlating against the known LFM preamble
//! template around the coarse position.

use crate::error::{Error, Result};
use crate::ofdm::config::OfdmConfig;
use crate::ofdm::frame::{lfm_template, FrameLayout, SegmentKind};
use crate::signal::SampledSignal;
use crate::xcorr::correlate_fft;

/// Normalized self-correlation a detection must exceed; pure noise stays
/// far below this for prefix windows thousands of samples long.
const DETECTION_THRESHOLD: f64 = 0.4;

/// Locates the frame start in `received` (ADC rate). Returns the sample
/// index of the first LFM preamble sample.
pub fn synchronize(received: &SampledSignal, config: &OfdmConfig) -> Result<usize> {
    let rate = received.sample_rate;
    if (rate - config.adc_rate).abs() > 1e-6 * config.adc_rate {
        return Err(Error::invalid(format!(
            "synchronization expects the ADC rate {} Hz, signal is at {rate} Hz",
            config.adc_rate
        )));
    }
    let layout = FrameLayout::for_config(config)?;
    let frame_n = (layout.total_duration * rate).round() as usize;
    if received.len() < frame_n {
        return Err(Error::invalid(format!(
            "received signal ({} samples) shorter than one frame ({frame_n} samples)",
            received.len()
        )));
    }

    let ns = config.symbol_samples(rate);
    let lg = config.guard_samples(rate);
    let x = &received.samples;
    let search_n = x.len() - (ns + lg);

    // sliding sums for c(n) = sum_i x[n+i] x[n+ns+i], window length lg
    let mut c = 0.0f64;
    let mut e1 = 0.0f64;
    let mut e2 = 0.0f64;
    for i in 0..lg {
        c += x[i] * x[i + ns];
        e1 += x[i] * x[i];
        e2 += x[i + ns] * x[i + ns];
    }
    // Floor the normalizer so near-empty windows (the zero-padded guards
    // leak only filter ringing) cannot produce spurious metric ~ +-1.
    let mean_power = received.power();
    let energy_floor = (0.05 * mean_power * lg as f64).max(1e-30);
    let mut best_metric = f64::NEG_INFINITY;
    let mut best_n = 0usize;
    for n in 0..search_n {
        let metric = c / (e1 * e2).sqrt().max(energy_floor);
        if metric > best_metric {
            best_metric = metric;
            best_n = n;
        }
        if n + 1 < search_n {
            c += x[n + lg] * x[n + lg + ns] - x[n] * x[n + ns];
            e1 += x[n + lg] * x[n + lg] - x[n] * x[n];
            e2 += x[n + lg + ns] * x[n + lg + ns] - x[n + ns] * x[n + ns];
        }
    }
    if best_metric < DETECTION_THRESHOLD {
        return Err(Error::NotFound(format!(
            "no CP-OFDM preamble: peak self-correlation {best_metric:.3} below \
             threshold {DETECTION_THRESHOLD}"
        )));
    }

    let cp_offset = layout
        .segment(&SegmentKind::CpOfdmPreamble)
        .expect("layout always has a CP-OFDM preamble")
        .offset;
    let coarse = best_n as i64 - (cp_offset * rate).round() as i64;

    // refine against the LFM template within +-lg samples of the coarse fix
    let template = lfm_template(config, rate);
    let m = template.len();
    let w = lg as i64;
    let slice_start = (coarse - w).max(0) as usize;
    let slice_end = ((coarse + w) as usize + m).min(x.len());
    if slice_start >= slice_end {
        return Err(Error::NotFound("coarse estimate outside the buffer".into()));
    }
    let corr = correlate_fft(&x[slice_start..slice_end], &template.samples);
    let (best_idx, _) = corr
        .iter()
        .enumerate()
        .max_by(|(_, a), (_, b)| a.abs().total_cmp(&b.abs()))
        .unwrap();
    let refined = slice_start as i64 + best_idx as i64 - (m as i64 - 1);
    if refined < 0 {
        return Err(Error::NotFound(format!(
            "refined frame start {refined} is before the buffer start"
        )));
    }
    Ok(refined as usize)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ofdm::frame::build_frame;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;
    use rand_distr::{Distribution, Normal};

    fn frame_at_adc(config: &OfdmConfig, seed: u64) -> SampledSignal {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let bits: Vec<u8> = (0..config.payload_bits_len())
            .map(|_| rng.random::<bool>() as u8)
            .collect();
        let (frame, _) = build_frame(config, &bits, seed).unwrap();
        crate::fir::resample(&frame, config.adc_rate, true).unwrap()
    }

    #[test]
    fn noiseless_delay_recovered() {
        let config = OfdmConfig::table1();
        let frame = frame_at_adc(&config, 11);
        let d = 1234usize;
        let mut rx = vec![0.0; d];
        rx.extend_from_slice(&frame.samples);
        rx.extend(std::iter::repeat_n(0.0, 500));
        let rx = SampledSignal::new(rx, config.adc_rate, 0.0).unwrap();
        let est = synchronize(&rx, &config).unwrap();
        assert!(
            (est as i64 - d as i64).abs() <= 1,
            "estimated {est}, true {d}"
        );
    }

    #[test]
    fn awgn_trials_mostly_within_two_samples() {
        let config = OfdmConfig::table1();
        let frame = frame_at_adc(&config, 12);
        let sig_power = frame.power() * frame.len() as f64
            / ((frame.duration() - 2.0) * config.adc_rate); // rough on-air fraction
        let noise_std = (sig_power / 10.0).sqrt(); // ~10 dB SNR
        let normal = Normal::new(0.0, noise_std).unwrap();
        let mut hits = 0;
        let trials = 50;
        for t in 0..trials {
            let mut rng = ChaCha12Rng::seed_from_u64(1000 + t);
            let d = 300 + (t as usize * 37) % 900;
            let mut rx = vec![0.0; d];
            rx.extend_from_slice(&frame.samples);
            for v in rx.iter_mut() {
                *v += normal.sample(&mut rng);
            }
            let rx = SampledSignal::new(rx, config.adc_rate, 0.0).unwrap();
            if let Ok(est) = synchronize(&rx, &config) {
                if (est as i64 - d as i64).abs() <= 2 {
                    hits += 1;
                }
            }
        }
        assert!(hits >= 48, "only {hits}/{trials} trials within +-2 samples");
    }

    #[test]
    fn pure_noise_not_found() {
        let config = OfdmConfig::table1();
        let layout = FrameLayout::for_config(&config).unwrap();
        let n = (layout.total_duration * config.adc_rate).round() as usize + 100;
        let mut rng = ChaCha12Rng::seed_from_u64(77);
        let normal = Normal::new(0.0, 1.0).unwrap();
        let rx = SampledSignal::new(
            (0..n).map(|_| normal.sample(&mut rng)).collect(),
            config.adc_rate,
            0.0,
        )
        .unwrap();
        assert!(matches!(synchronize(&rx, &config), Err(Error::NotFound(_))));
    }
}
