//! Recorded-waveform ingestion: run the configured front-ends and the
//! receiver on a waveform file instead of a simulated channel.

use crate::config::ExperimentConfig;
use crate::experiment::{score_stream, MetricsRow};
use anyhow::{bail, Context};
use std::path::Path;
use uwa_phy::wave::read_waveform;

/// Parses a reference payload file: ASCII '0'/'1', whitespace ignored.
pub fn read_payload(path: &Path, expected_bits: usize) -> anyhow::Result<Vec<u8>> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading payload {}", path.display()))?;
    let mut bits = Vec::with_capacity(expected_bits);
    for (i, c) in text.chars().enumerate() {
        match c {
            '0' => bits.push(0u8),
            '1' => bits.push(1u8),
            c if c.is_whitespace() => {}
            c => bail!("payload {}: invalid character {c:?} at offset {i}", path.display()),
        }
    }
    if bits.len() != expected_bits {
        bail!(
            "payload {} has {} bits, the configuration requires {expected_bits}",
            path.display(),
            bits.len()
        );
    }
    Ok(bits)
}

/// Scores every configured front-end on the recorded waveform. With a
/// reference payload the rows carry BER; without one they are SNR-only.
pub fn ingest_waveform(
    config: &ExperimentConfig,
    waveform: &Path,
    reference: Option<&Path>,
) -> anyhow::Result<Vec<MetricsRow>> {
    config
        .validate()
        .map_err(|e| anyhow::anyhow!("invalid experiment config:\n{e}"))?;
    let signal = read_waveform(waveform)
        .with_context(|| format!("reading waveform {}", waveform.display()))?;
    if signal.sample_rate + 1e-6 < config.ofdm.adc_rate {
        bail!(
            "waveform sample rate {} Hz is below the ADC rate {} Hz required by the receiver",
            signal.sample_rate,
            config.ofdm.adc_rate
        );
    }
    let payload = reference
        .map(|p| read_payload(p, config.ofdm.payload_bits_len()))
        .transpose()?;

    let mut rows = Vec::new();
    for fe in &config.frontends {
        rows.extend(
            score_stream(
                &config.ofdm,
                fe,
                &signal,
                payload.as_deref(),
                0,
                config.seed,
                config.silence_guard,
            )
            .with_context(|| format!("front-end {} on {}", fe.label(), waveform.display()))?,
        );
    }
    Ok(rows)
}
