//! Frame assembly: preambles, silences, data blocks and postamble.
//!
//! Frame structure (times relative to frame start):
//! LFM chirp, silence, HFM chirp, silence, BPSK m-sequence, silence,
//! CP-OFDM preamble, silence, the data blocks (zero-padded OFDM), a
//! trailing silence and an HFM postamble. Only the CP-OFDM preamble is
//! load-bearing for synchronization; all segment durations are
//! configuration.

use crate::error::{Error, Result};
use crate::ofdm::config::OfdmConfig;
use crate::ofdm::mapping::{interleave, map_symbols};
use crate::ofdm::modem::{pilot_symbols, synthesize_symbol};
use crate::signal::SampledSignal;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "block", rename_all = "snake_case")]
pub enum SegmentKind {
    LfmPreamble,
    HfmPreamble,
    MSequence,
    CpOfdmPreamble,
    Silence,
    DataBlock(usize),
    HfmPostamble,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Segment {
    pub kind: SegmentKind,
    /// Offset from frame start, seconds.
    pub offset: f64,
    pub duration: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FrameLayout {
    pub segments: Vec<Segment>,
    pub total_duration: f64,
}

impl FrameLayout {
    /// Deterministic layout implied by the configuration alone.
    pub fn for_config(config: &OfdmConfig) -> Result<FrameLayout> {
        let rate = config.analog_rate;
        let ovs = config.oversample_factor()?;
        // keep every segment boundary on the ADC grid
        let grid = |seconds: f64| -> usize {
            let n = (seconds * rate).round() as usize;
            n.div_ceil(ovs) * ovs
        };
        let chirp_n = grid(config.chirp_duration);
        let silence_n = grid(config.preamble_silence);
        let mseq_n = grid(1023.0 / config.mseq_chip_rate);
        let sym_n = config.symbol_samples(rate);
        let guard_n = config.guard_samples(rate);
        let block_n = sym_n + guard_n;
        let cp_n = guard_n + sym_n;
        let data_gap_n = grid(config.data_silence);
        let post_gap_n = grid(config.postamble_silence);

        let mut segments = Vec::new();
        let mut cursor = 0usize;
        let push = |kind: SegmentKind, n: usize, cursor: &mut usize, segs: &mut Vec<Segment>| {
            segs.push(Segment {
                kind,
                offset: *cursor as f64 / rate,
                duration: n as f64 / rate,
            });
            *cursor += n;
        };
        push(SegmentKind::LfmPreamble, chirp_n, &mut cursor, &mut segments);
        push(SegmentKind::Silence, silence_n, &mut cursor, &mut segments);
        push(SegmentKind::HfmPreamble, chirp_n, &mut cursor, &mut segments);
        push(SegmentKind::Silence, silence_n, &mut cursor, &mut segments);
        push(SegmentKind::MSequence, mseq_n, &mut cursor, &mut segments);
        push(SegmentKind::Silence, silence_n, &mut cursor, &mut segments);
        push(SegmentKind::CpOfdmPreamble, cp_n, &mut cursor, &mut segments);
        push(SegmentKind::Silence, data_gap_n, &mut cursor, &mut segments);
        for b in 0..config.num_blocks() {
            push(SegmentKind::DataBlock(b), block_n, &mut cursor, &mut segments);
        }
        push(SegmentKind::Silence, post_gap_n, &mut cursor, &mut segments);
        push(SegmentKind::HfmPostamble, chirp_n, &mut cursor, &mut segments);
        Ok(FrameLayout {
            segments,
            total_duration: cursor as f64 / rate,
        })
    }

    pub fn segment(&self, kind: &SegmentKind) -> Option<&Segment> {
        self.segments.iter().find(|s| &s.kind == kind)
    }

    /// Frame-time offset of data block `b`'s symbol window.
    pub fn data_block_offset(&self, b: usize) -> Result<f64> {
        self.segment(&SegmentKind::DataBlock(b))
            .map(|s| s.offset)
            .ok_or_else(|| Error::invalid(format!("no data block {b} in layout")))
    }

    /// All silence segments, in frame order.
    pub fn silences(&self) -> impl Iterator<Item = &Segment> {
        self.segments
            .iter()
            .filter(|s| s.kind == SegmentKind::Silence)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Header(format!("layout serialize: {e}")))
    }

    pub fn from_toml(text: &str) -> Result<FrameLayout> {
        toml::from_str(text).map_err(|e| Error::Header(format!("layout parse: {e}")))
    }
}

/// Linear FM chirp sweeping `f0..f1` over `n` samples.
fn lfm_chirp(f0: f64, f1: f64, n: usize, rate: f64, amplitude: f64) -> Vec<f64> {
    let duration = n as f64 / rate;
    let k = (f1 - f0) / duration;
    (0..n)
        .map(|i| {
            let t = i as f64 / rate;
            amplitude * (2.0 * PI * (f0 * t + 0.5 * k * t * t)).sin()
        })
        .collect()
}

/// Hyperbolic FM chirp: instantaneous frequency 1 / (1/f0 - k t).
fn hfm_chirp(f0: f64, f1: f64, n: usize, rate: f64, amplitude: f64) -> Vec<f64> {
    let duration = n as f64 / rate;
    let k = (1.0 / f0 - 1.0 / f1) / duration;
    (0..n)
        .map(|i| {
            let t = i as f64 / rate;
            let phase = -2.0 * PI / k * (1.0 - f0 * k * t).max(1e-12).ln();
            amplitude * phase.sin()
        })
        .collect()
}

/// Maximal-length sequence from the degree-10 LFSR x^10 + x^3 + 1,
/// BPSK modulated on the carrier.
fn mseq_waveform(config: &OfdmConfig, n: usize, rate: f64, amplitude: f64) -> Vec<f64> {
    let mut state = 0x2ffu16; // any nonzero seed
    let mut chips = Vec::with_capacity(1023);
    for _ in 0..1023 {
        let bit = ((state >> 9) ^ (state >> 2)) & 1;
        chips.push(if state & 0x200 != 0 { 1.0 } else { -1.0 });
        state = ((state << 1) | bit) & 0x3ff;
    }
    let fc = config.center_frequency;
    (0..n)
        .map(|i| {
            let t = i as f64 / rate;
            let chip_idx = (t * config.mseq_chip_rate) as usize;
            if chip_idx >= chips.len() {
                return 0.0;
            }
            amplitude * chips[chip_idx] * (2.0 * PI * fc * t).cos()
        })
        .collect()
}

/// LFM preamble template at `rate` (used by synchronization).
pub fn lfm_template(config: &OfdmConfig, rate: f64) -> SampledSignal {
    let b = config.bandwidth();
    let n = (config.chirp_duration * rate).round() as usize;
    let samples = lfm_chirp(
        config.center_frequency - b / 2.0,
        config.center_frequency + b / 2.0,
        n,
        rate,
        std::f64::consts::SQRT_2,
    );
    SampledSignal {
        samples,
        sample_rate: rate,
        start_time: 0.0,
    }
}

/// Active-subcarrier symbols of the CP-OFDM preamble, drawn from `seed`.
fn cp_preamble_symbols(config: &OfdmConfig, seed: u64) -> (Vec<Complex64>, Vec<Complex64>) {
    let mut rng = ChaCha12Rng::seed_from_u64(seed ^ 0xc0de_0fd_a);
    let mut draw = |n: usize| -> Vec<Complex64> {
        (0..n)
            .map(|_| {
                let re = if rng.random::<bool>() { 1.0 } else { -1.0 };
                let im = if rng.random::<bool>() { 1.0 } else { -1.0 };
                Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
            })
            .collect()
    };
    (draw(config.data_set.len()), draw(config.pilot_set.len()))
}

/// Builds the complete transmit frame at the analog rate.
///
/// `payload_bits` must fill the configured data blocks exactly; `seed`
/// randomizes the CP-OFDM preamble content.
pub fn build_frame(
    config: &OfdmConfig,
    payload_bits: &[u8],
    seed: u64,
) -> Result<(SampledSignal, FrameLayout)> {
    config.validate()?;
    let expected = config.payload_bits_len();
    if payload_bits.len() != expected {
        return Err(Error::invalid(format!(
            "payload must be exactly {expected} bits, got {}",
            payload_bits.len()
        )));
    }
    let rate = config.analog_rate;
    let layout = FrameLayout::for_config(config)?;
    let total_n = (layout.total_duration * rate).round() as usize;
    let mut samples = vec![0.0f64; total_n];
    let b = config.bandwidth();
    let f_lo = config.center_frequency - b / 2.0;
    let f_hi = config.center_frequency + b / 2.0;
    let amp = std::f64::consts::SQRT_2; // unit-power chirps, matching block power

    let pilots = pilot_symbols(config);
    let sym_n = config.symbol_samples(rate);
    let guard_n = config.guard_samples(rate);
    let mut bit_cursor = 0usize;

    for seg in &layout.segments {
        let off = (seg.offset * rate).round() as usize;
        let n = (seg.duration * rate).round() as usize;
        match &seg.kind {
            SegmentKind::Silence => {}
            SegmentKind::LfmPreamble => {
                samples[off..off + n].copy_from_slice(&lfm_chirp(f_lo, f_hi, n, rate, amp));
            }
            SegmentKind::HfmPreamble | SegmentKind::HfmPostamble => {
                samples[off..off + n].copy_from_slice(&hfm_chirp(f_lo, f_hi, n, rate, amp));
            }
            SegmentKind::MSequence => {
                samples[off..off + n].copy_from_slice(&mseq_waveform(config, n, rate, amp));
            }
            SegmentKind::CpOfdmPreamble => {
                let (d, p) = cp_preamble_symbols(config, seed);
                let symbol = synthesize_symbol(config, &d, &p, rate)?;
                // cyclic prefix: the last guard_n samples lead the symbol
                samples[off..off + guard_n].copy_from_slice(&symbol[sym_n - guard_n..]);
                samples[off + guard_n..off + guard_n + sym_n].copy_from_slice(&symbol);
            }
            SegmentKind::DataBlock(bidx) => {
                let scheme = config.modulation_per_block[*bidx];
                let nbits = scheme.bits_per_symbol() * config.data_set.len();
                let bits = &payload_bits[bit_cursor..bit_cursor + nbits];
                bit_cursor += nbits;
                let mapped = map_symbols(bits, scheme)?;
                let data = interleave(&mapped, config.interleave_depth)?;
                let symbol = synthesize_symbol(config, &data, &pilots, rate)?;
                samples[off..off + sym_n].copy_from_slice(&symbol);
                // guard interval stays zero-padded
            }
        }
    }
    let signal = SampledSignal::new(samples, rate, 0.0)?;
    Ok((signal, layout))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn payload(config: &OfdmConfig, seed: u64) -> Vec<u8> {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        (0..config.payload_bits_len())
            .map(|_| rng.random::<bool>() as u8)
            .collect()
    }

    #[test]
    fn total_duration_near_fourteen_nine() {
        let config = OfdmConfig::table1();
        let layout = FrameLayout::for_config(&config).unwrap();
        assert!(
            layout.total_duration >= 14.4 && layout.total_duration <= 15.4,
            "total duration {}",
            layout.total_duration
        );
    }

    #[test]
    fn offsets_strictly_increasing_and_nonoverlapping() {
        let config = OfdmConfig::table1();
        let layout = FrameLayout::for_config(&config).unwrap();
        for w in layout.segments.windows(2) {
            assert!(w[1].offset > w[0].offset);
            assert!(w[1].offset >= w[0].offset + w[0].duration - 1e-12);
        }
    }

    #[test]
    fn silences_are_exact_zeros() {
        let config = OfdmConfig::table1();
        let (frame, layout) = build_frame(&config, &payload(&config, 3), 3).unwrap();
        for seg in layout.silences() {
            let a = (seg.offset * frame.sample_rate).round() as usize;
            let n = (seg.duration * frame.sample_rate).round() as usize;
            assert!(
                frame.samples[a..a + n].iter().all(|&v| v == 0.0),
                "silence at {} s has nonzero samples",
                seg.offset
            );
        }
    }

    #[test]
    fn wrong_payload_size_rejected() {
        let config = OfdmConfig::table1();
        assert!(build_frame(&config, &[0, 1, 0], 1).is_err());
    }

    #[test]
    fn layout_toml_round_trip() {
        let config = OfdmConfig::table1();
        let layout = FrameLayout::for_config(&config).unwrap();
        let text = layout.to_toml().unwrap();
        let back = FrameLayout::from_toml(&text).unwrap();
        assert_eq!(back.segments.len(), layout.segments.len());
        assert_eq!(back.total_duration, layout.total_duration);
    }
}
