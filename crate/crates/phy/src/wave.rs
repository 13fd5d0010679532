//! Raw waveform file I/O.
//!
//! Samples are stored as 32-bit little-endian floats, single channel.
//! A sidecar TOML header at `<path>.toml` carries `sample_rate`,
//! `start_time` and `num_samples`. This is the ingestion path for real
//! recordings as well as the dump format for simulated waveforms.

use crate::error::{Error, Result};
use crate::signal::SampledSignal;
use serde::{Deserialize, Serialize};
use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WaveHeader {
    pub sample_rate: f64,
    pub start_time: f64,
    pub num_samples: usize,
}

pub fn header_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_os_string();
    s.push(".toml");
    PathBuf::from(s)
}

pub fn write_waveform(path: &Path, signal: &SampledSignal) -> Result<()> {
    let header = WaveHeader {
        sample_rate: signal.sample_rate,
        start_time: signal.start_time,
        num_samples: signal.len(),
    };
    let header_text =
        toml::to_string(&header).map_err(|e| Error::Header(format!("serialize: {e}")))?;
    fs::write(header_path(path), header_text)?;
    let mut file = fs::File::create(path)?;
    let mut buf = Vec::with_capacity(signal.len() * 4);
    for &s in &signal.samples {
        buf.extend_from_slice(&(s as f32).to_le_bytes());
    }
    file.write_all(&buf)?;
    Ok(())
}

pub fn read_waveform(path: &Path) -> Result<SampledSignal> {
    let header_text = fs::read_to_string(header_path(path)).map_err(|e| {
        Error::Header(format!(
            "missing sidecar header {}: {e}",
            header_path(path).display()
        ))
    })?;
    let header: WaveHeader =
        toml::from_str(&header_text).map_err(|e| Error::Header(format!("parse: {e}")))?;
    if !(header.sample_rate > 0.0) {
        return Err(Error::Header(format!(
            "sample_rate must be positive, got {}",
            header.sample_rate
        )));
    }
    let mut raw = Vec::new();
    fs::File::open(path)?.read_to_end(&mut raw)?;
    if raw.len() % 4 != 0 {
        return Err(Error::Header(format!(
            "data length {} is not a multiple of 4 bytes",
            raw.len()
        )));
    }
    let actual = raw.len() / 4;
    if actual != header.num_samples {
        return Err(Error::Header(format!(
            "truncated or padded waveform: header declares {} samples, file holds {actual}",
            header.num_samples
        )));
    }
    let samples: Vec<f64> = raw
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]) as f64)
        .collect();
    SampledSignal::new(samples, header.sample_rate, header.start_time)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let dir = std::env::temp_dir().join("uwa_phy_wave_test");
        fs::create_dir_all(&dir).unwrap();
        let path = dir.join("rt.f32");
        let sig = SampledSignal::new(vec![0.0, 0.5, -0.25, 1.0], 96_000.0, 0.125).unwrap();
        write_waveform(&path, &sig).unwrap();
        let back = read_waveform(&path).unwrap();
        assert_eq!(back.sample_rate, 96_000.0);
        assert_eq!(back.start_time, 0.125);
        assert_eq!(back.samples, sig.samples);
    }

    #[test]
    fn truncated_file_names_counts() {
        let dir = std::env::temp_dir().join("uwa_phy_wave_test");
        fs::create_dir_all(&dir).unwrap();
        let path = dir.join("trunc.f32");
        let sig = SampledSignal::new(vec![1.0; 10], 96_000.0, 0.0).unwrap();
        write_waveform(&path, &sig).unwrap();
        let raw = fs::read(&path).unwrap();
        fs::write(&path, &raw[..raw.len() - 8]).unwrap();
        let err = read_waveform(&path).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("10") && msg.contains("8"), "{msg}");
    }
}
