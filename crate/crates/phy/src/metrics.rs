//! Per-block SNR and BER evaluation.
//!
//! Noise power comes from the silence intervals of the frame; block SNR
//! is the time-domain ratio (P_s - P_n) / P_n measured at the demodulator
//! input, where P_s is the mean power over the block's time window.

use crate::error::{Error, Result};
use crate::ofdm::config::Modulation;
use crate::ofdm::frame::{FrameLayout, SegmentKind};
use crate::signal::SampledSignal;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BlockMetrics {
    pub block_index: usize,
    pub modulation: Modulation,
    /// Time-domain SNR in dB; None when the block power did not exceed
    /// the noise power (the -inf case).
    pub snr_db: Option<f64>,
    pub ber: f64,
    pub bit_errors: usize,
    pub bits: usize,
}

/// Mean noise power over the frame's silence intervals.
///
/// The first `guard` seconds of every silence window are skipped so
/// multipath tails from the previous segment do not bias the estimate;
/// the remainders of all silences are pooled. `received.start_time`
/// anchors the layout's frame timeline onto the buffer.
pub fn noise_power_from_silence(
    received: &SampledSignal,
    layout: &FrameLayout,
    guard: f64,
) -> Result<f64> {
    if !(guard >= 0.0) {
        return Err(Error::invalid(format!("guard must be >= 0, got {guard}")));
    }
    let mut acc = 0.0f64;
    let mut count = 0usize;
    for seg in layout.silences() {
        let t0 = seg.offset + guard;
        let t1 = seg.offset + seg.duration;
        if t1 <= t0 {
            continue;
        }
        let a = received.index_at(t0).max(0) as usize;
        let b = (received.index_at(t1).max(0) as usize).min(received.len());
        if b <= a {
            continue;
        }
        acc += received.samples[a..b].iter().map(|x| x * x).sum::<f64>();
        count += b - a;
    }
    if count == 0 {
        return Err(Error::NotAvailable(
            "no usable silence samples: every silence is shorter than the guard \
             or outside the buffer"
                .into(),
        ));
    }
    Ok(acc / count as f64)
}

/// Time-domain SNR of data block `block`: 10 log10((P_s - P_n) / P_n).
/// Returns None when P_s <= P_n.
pub fn block_snr(
    received: &SampledSignal,
    layout: &FrameLayout,
    block: usize,
    noise_power: f64,
) -> Result<Option<f64>> {
    if !(noise_power > 0.0) {
        return Err(Error::invalid(format!(
            "noise_power must be positive, got {noise_power}"
        )));
    }
    let seg = layout
        .segment(&SegmentKind::DataBlock(block))
        .ok_or_else(|| Error::invalid(format!("no data block {block} in layout")))?;
    let a = received.index_at(seg.offset).max(0) as usize;
    let b = (received.index_at(seg.offset + seg.duration).max(0) as usize).min(received.len());
    if b <= a {
        return Err(Error::invalid(format!(
            "block {block} window lies outside the received buffer"
        )));
    }
    let p_s = received.samples[a..b].iter().map(|x| x * x).sum::<f64>() / (b - a) as f64;
    if p_s <= noise_power {
        Ok(None)
    } else {
        Ok(Some(10.0 * ((p_s - noise_power) / noise_power).log10()))
    }
}

/// Hamming distance / length between decided and reference bits.
pub fn block_ber(decided: &[u8], reference: &[u8]) -> Result<(f64, usize, usize)> {
    if decided.len() != reference.len() {
        return Err(Error::invalid(format!(
            "bit vectors differ in length: {} vs {}",
            decided.len(),
            reference.len()
        )));
    }
    if decided.is_empty() {
        return Err(Error::invalid("cannot compute BER over zero bits"));
    }
    let errors = decided
        .iter()
        .zip(reference)
        .filter(|(a, b)| (**a != 0) != (**b != 0))
        .count();
    Ok((errors as f64 / decided.len() as f64, errors, decided.len()))
}
