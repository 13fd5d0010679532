//! OFDM system configuration.
//!
//! The shipped defaults describe a 1024-subcarrier zero-padded OFDM
//! system in the 21-27 kHz acoustic band: 672 data, 256 pilot and 96
//! null subcarriers, 24 kHz carrier, 96 kHz ADC rate and a 4x
//! oversampled 384 kHz "analog" rate ahead of the ADC model.
//!
//! The subcarrier spacing is 6000/1024 = 5.859375 Hz so that the symbol
//! spans exactly 16384 samples at 96 kHz and the carrier falls on DFT
//! bin 4096; this keeps modulation and demodulation on an exact grid.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Modulation {
    Qpsk,
    Qam16,
}

impl Modulation {
    pub fn bits_per_symbol(&self) -> usize {
        match self {
            Modulation::Qpsk => 2,
            Modulation::Qam16 => 4,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Modulation::Qpsk => "qpsk",
            Modulation::Qam16 => "qam16",
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct OfdmConfig {
    pub n_subcarriers: usize,
    /// Delta f in Hz; symbol_duration * subcarrier_spacing must be 1.
    pub subcarrier_spacing: f64,
    pub center_frequency: f64,
    pub symbol_duration: f64,
    pub guard_duration: f64,
    /// Oversampled pre-ADC rate; must be an integer multiple of adc_rate.
    pub analog_rate: f64,
    pub adc_rate: f64,
    /// Disjoint subcarrier index sets over [-N/2, N/2 - 1].
    pub data_set: Vec<i32>,
    pub pilot_set: Vec<i32>,
    pub null_set: Vec<i32>,
    pub modulation_per_block: Vec<Modulation>,
    /// Silence between preamble segments, seconds.
    pub preamble_silence: f64,
    /// Silence between the last preamble and the first data block.
    pub data_silence: f64,
    /// Silence between the last data block and the postamble.
    pub postamble_silence: f64,
    /// LFM/HFM preamble sweep duration, seconds.
    pub chirp_duration: f64,
    /// Chip rate of the BPSK m-sequence preamble, Hz.
    pub mseq_chip_rate: f64,
    /// Row count of the per-block symbol interleaver; must divide |S_D|.
    pub interleave_depth: usize,
    /// Seed for the deterministic pilot symbol sequence.
    pub pilot_seed: u64,
}

impl Default for OfdmConfig {
    fn default() -> Self {
        Self::table1()
    }
}

impl OfdmConfig {
    /// The default under-ice modem parameter set.
    pub fn table1() -> Self {
        let n: usize = 1024;
        let spacing = 6000.0 / n as f64; // 5.859375 Hz, B_s = 6 kHz
        let (data_set, pilot_set, null_set) = default_subcarrier_sets(n);
        let mut modulation_per_block = vec![Modulation::Qpsk; 20];
        modulation_per_block.extend(vec![Modulation::Qam16; 20]);
        Self {
            n_subcarriers: n,
            subcarrier_spacing: spacing,
            center_frequency: 24_000.0,
            symbol_duration: 1.0 / spacing, // 170.67 ms
            guard_duration: 0.0793,
            analog_rate: 384_000.0,
            adc_rate: 96_000.0,
            data_set,
            pilot_set,
            null_set,
            modulation_per_block,
            preamble_silence: 0.3,
            data_silence: 0.1,
            postamble_silence: 0.3,
            chirp_duration: 0.85,
            mseq_chip_rate: 1_200.0,
            interleave_depth: 8,
            pilot_seed: 0x0fda,
        }
    }

    pub fn block_duration(&self) -> f64 {
        self.symbol_duration + self.guard_duration
    }

    pub fn bandwidth(&self) -> f64 {
        self.n_subcarriers as f64 * self.subcarrier_spacing
    }

    pub fn num_blocks(&self) -> usize {
        self.modulation_per_block.len()
    }

    /// Total payload bits carried by all data blocks.
    pub fn payload_bits_len(&self) -> usize {
        self.modulation_per_block
            .iter()
            .map(|m| m.bits_per_symbol() * self.data_set.len())
            .sum()
    }

    /// Symbol window in samples at `rate`.
    pub fn symbol_samples(&self, rate: f64) -> usize {
        (self.symbol_duration * rate).round() as usize
    }

    /// Guard (zero-padding) window in samples at `rate`, kept on the ADC
    /// grid so the analog count is an exact multiple of the ADC count.
    pub fn guard_samples(&self, rate: f64) -> usize {
        let adc_guard = (self.guard_duration * self.adc_rate).round() as usize;
        let factor = (rate / self.adc_rate).round();
        if (factor - rate / self.adc_rate).abs() < 1e-9 && factor >= 1.0 {
            adc_guard * factor as usize
        } else {
            (self.guard_duration * rate).round() as usize
        }
    }

    /// Integer analog/ADC oversampling factor.
    pub fn oversample_factor(&self) -> Result<usize> {
        let f = self.analog_rate / self.adc_rate;
        if (f - f.round()).abs() > 1e-9 || f < 1.0 {
            return Err(Error::UnsupportedRatio(format!(
                "analog_rate / adc_rate must be a positive integer, got {f}"
            )));
        }
        Ok(f.round() as usize)
    }

    /// DFT bin index of the carrier when the symbol window is transformed
    /// at any grid-commensurate rate: f_c / delta_f.
    pub fn carrier_bin(&self) -> Result<usize> {
        let b = self.center_frequency / self.subcarrier_spacing;
        if (b - b.round()).abs() > 1e-6 {
            return Err(Error::UnsupportedRatio(format!(
                "center_frequency must be an integer multiple of the subcarrier spacing \
                 (f_c / df = {b})"
            )));
        }
        Ok(b.round() as usize)
    }

    /// Subcarrier frequency f_k = f_c + k * delta_f for k in [-N/2, N/2-1].
    pub fn subcarrier_frequency(&self, k: i32) -> Result<f64> {
        let half = self.n_subcarriers as i32 / 2;
        if k < -half || k >= half {
            return Err(Error::invalid(format!(
                "subcarrier index {k} outside [-{half}, {}]",
                half - 1
            )));
        }
        Ok(self.center_frequency + k as f64 * self.subcarrier_spacing)
    }

    /// Sorted union of data and pilot indices (S_A).
    pub fn active_set(&self) -> Vec<i32> {
        let mut v: Vec<i32> = self
            .data_set
            .iter()
            .chain(self.pilot_set.iter())
            .copied()
            .collect();
        v.sort_unstable();
        v
    }

    /// Collects every violated constraint; empty means valid.
    pub fn validation_errors(&self) -> Vec<String> {
        let mut errs = Vec::new();
        let n = self.n_subcarriers;
        if n == 0 || !n.is_power_of_two() {
            errs.push(format!("n_subcarriers must be a power of two, got {n}"));
        }
        if !(self.subcarrier_spacing > 0.0) {
            errs.push("subcarrier_spacing must be positive".into());
        }
        if (self.subcarrier_spacing * self.symbol_duration - 1.0).abs() > 1e-9 {
            errs.push(format!(
                "subcarrier_spacing * symbol_duration must equal 1 (got {})",
                self.subcarrier_spacing * self.symbol_duration
            ));
        }
        if !(self.guard_duration > 0.0) {
            errs.push("guard_duration must be positive".into());
        }
        let half = n as i32 / 2;
        let mut seen = vec![0u8; n];
        let mut tally = |set: &[i32], name: &str, errs: &mut Vec<String>| {
            for &k in set {
                if k < -half || k >= half {
                    errs.push(format!("{name} index {k} outside [-{half}, {})", half));
                } else {
                    let idx = (k + half) as usize;
                    seen[idx] += 1;
                }
            }
        };
        tally(&self.data_set, "data_set", &mut errs);
        tally(&self.pilot_set, "pilot_set", &mut errs);
        tally(&self.null_set, "null_set", &mut errs);
        if seen.iter().any(|&c| c != 1) {
            errs.push("data/pilot/null sets must partition the full index range".into());
        }
        let bs = self.bandwidth();
        if !(self.center_frequency - bs / 2.0 > 0.0
            && self.center_frequency + bs / 2.0 < self.adc_rate / 2.0)
        {
            errs.push(format!(
                "signal band [{}, {}] must fit inside (0, {})",
                self.center_frequency - bs / 2.0,
                self.center_frequency + bs / 2.0,
                self.adc_rate / 2.0
            ));
        }
        if self.oversample_factor().is_err() {
            errs.push("analog_rate must be an integer multiple of adc_rate".into());
        }
        for (rate, name) in [(self.adc_rate, "adc_rate"), (self.analog_rate, "analog_rate")] {
            let m = rate / self.subcarrier_spacing;
            if (m - m.round()).abs() > 1e-6 {
                errs.push(format!(
                    "{name} must be an integer multiple of the subcarrier spacing \
                     (rate/df = {m})"
                ));
            }
        }
        if self.carrier_bin().is_err() {
            errs.push(
                "center_frequency must be an integer multiple of the subcarrier spacing".into(),
            );
        }
        if self.modulation_per_block.is_empty() {
            errs.push("modulation_per_block must not be empty".into());
        }
        if self.interleave_depth == 0 || self.data_set.len() % self.interleave_depth != 0 {
            errs.push(format!(
                "interleave_depth {} must divide |S_D| = {}",
                self.interleave_depth,
                self.data_set.len()
            ));
        }
        for (v, name) in [
            (self.preamble_silence, "preamble_silence"),
            (self.data_silence, "data_silence"),
            (self.postamble_silence, "postamble_silence"),
            (self.chirp_duration, "chirp_duration"),
            (self.mseq_chip_rate, "mseq_chip_rate"),
        ] {
            if !(v > 0.0) {
                errs.push(format!("{name} must be positive"));
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
}

/// Default index layout: 44 nulls at each band edge plus an 8-wide
/// cluster at the carrier, pilots spread evenly over the 928 active
/// subcarriers (every 29/8 positions), remaining 672 carry data.
pub fn default_subcarrier_sets(n: usize) -> (Vec<i32>, Vec<i32>, Vec<i32>) {
    let half = n as i32 / 2;
    let edge = (n * 44).div_ceil(1024); // scales the 1024-point layout
    let center = (n * 8) / 1024;
    let mut null_set: Vec<i32> = Vec::new();
    null_set.extend(-half..-half + edge as i32);
    null_set.extend(half - edge as i32..half);
    null_set.extend(-(center as i32) / 2..center as i32 - (center as i32) / 2);
    null_set.sort_unstable();
    let active: Vec<i32> = (-half..half).filter(|k| !null_set.contains(k)).collect();
    let n_active = active.len();
    let n_pilots = n_active * 256 / 928;
    let pilot_set: Vec<i32> = (0..n_pilots)
        .map(|i| active[i * n_active / n_pilots])
        .collect();
    let data_set: Vec<i32> = active
        .iter()
        .filter(|k| !pilot_set.contains(k))
        .copied()
        .collect();
    (data_set, pilot_set, null_set)
}
