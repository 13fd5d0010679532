//! Full receive chain for one frame at the ADC rate:
//! synchronize, demodulate each block, estimate, equalize, demap.

use crate::error::Result;
use crate::ofdm::config::{Modulation, OfdmConfig};
use crate::ofdm::estimate::{lmmse_equalize, ls_channel_estimate};
use crate::ofdm::frame::FrameLayout;
use crate::ofdm::mapping::{deinterleave, demap_symbols};
use crate::ofdm::modem::{demodulate_block, pilot_symbols};
use crate::ofdm::sync::synchronize;
use crate::signal::SampledSignal;
use num_complex::Complex64;

#[derive(Debug, Clone)]
pub struct BlockDecision {
    pub modulation: Modulation,
    pub bits: Vec<u8>,
    /// Max-log LLR per bit (positive favors 0), exported for external decoders.
    pub soft_metrics: Vec<f64>,
    pub equalized: Vec<Complex64>,
    /// Null-subcarrier noise variance used for the soft metrics.
    pub noise_variance: f64,
}

#[derive(Debug, Clone)]
pub struct FrameReception {
    /// Sample index of the frame start within the input buffer.
    pub frame_start: usize,
    pub layout: FrameLayout,
    pub blocks: Vec<BlockDecision>,
}

impl FrameReception {
    /// Payload bits concatenated over all blocks.
    pub fn payload_bits(&self) -> Vec<u8> {
        self.blocks.iter().flat_map(|b| b.bits.clone()).collect()
    }
}

/// Runs the whole receive chain on `received` (ADC rate).
pub fn receive_frame(received: &SampledSignal, config: &OfdmConfig) -> Result<FrameReception> {
    let frame_start = synchronize(received, config)?;
    let layout = FrameLayout::for_config(config)?;
    let rate = received.sample_rate;
    let tx_pilots = pilot_symbols(config);
    let mut blocks = Vec::with_capacity(config.num_blocks());
    for b in 0..config.num_blocks() {
        let offset = frame_start + (layout.data_block_offset(b)? * rate).round() as usize;
        let demod = demodulate_block(received, config, offset)?;
        let est = ls_channel_estimate(&demod.pilots, &tx_pilots, &demod.nulls, config)?;
        let gains = est.gains_at(&config.data_set)?;
        let equalized = lmmse_equalize(&demod.data, &gains, est.noise_variance);
        let deinterleaved = deinterleave(&equalized, config.interleave_depth)?;
        let scheme = config.modulation_per_block[b];
        let (bits, soft_metrics) = demap_symbols(&deinterleaved, scheme, est.noise_variance);
        blocks.push(BlockDecision {
            modulation: scheme,
            bits,
            soft_metrics,
            equalized: deinterleaved,
            noise_variance: est.noise_variance,
        });
    }
    Ok(FrameReception {
        frame_start,
        layout,
        blocks,
    })
}
