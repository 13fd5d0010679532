//! Symbol mapping, demapping and block interleaving.
//!
//! QPSK maps bit pair `00` to `(1+j)/sqrt(2)` with each bit selecting the
//! sign of one axis (Gray). 16-QAM uses a per-axis Gray code over
//! `{-3,-1,+1,+3}/sqrt(10)`; both constellations have unit average energy.

use crate::error::{Error, Result};
use crate::ofdm::config::Modulation;
use num_complex::Complex64;

/// Soft metrics are capped at this magnitude when the noise variance
/// vanishes (stands in for an infinite-confidence log-likelihood ratio).
pub const LLR_CAP: f64 = 1e12;

const INV_SQRT2: f64 = std::f64::consts::FRAC_1_SQRT_2;

fn gray2_level(b0: u8, b1: u8) -> f64 {
    // 00 -> +3, 01 -> +1, 11 -> -1, 10 -> -3 (adjacent codes differ by one bit)
    match (b0, b1) {
        (0, 0) => 3.0,
        (0, 1) => 1.0,
        (1, 1) => -1.0,
        _ => -3.0,
    }
}

/// Constellation points paired with their bit labels.
pub fn constellation(scheme: Modulation) -> Vec<(Complex64, Vec<u8>)> {
    match scheme {
        Modulation::Qpsk => {
            let mut pts = Vec::with_capacity(4);
            for b0 in 0..2u8 {
                for b1 in 0..2u8 {
                    let re = (1.0 - 2.0 * b0 as f64) * INV_SQRT2;
                    let im = (1.0 - 2.0 * b1 as f64) * INV_SQRT2;
                    pts.push((Complex64::new(re, im), vec![b0, b1]));
                }
            }
            pts
        }
        Modulation::Qam16 => {
            let norm = 1.0 / 10f64.sqrt();
            let mut pts = Vec::with_capacity(16);
            for b0 in 0..2u8 {
                for b1 in 0..2u8 {
                    for b2 in 0..2u8 {
                        for b3 in 0..2u8 {
                            let re = gray2_level(b0, b1) * norm;
                            let im = gray2_level(b2, b3) * norm;
                            pts.push((Complex64::new(re, im), vec![b0, b1, b2, b3]));
                        }
                    }
                }
            }
            pts
        }
    }
}

/// Maps a bit sequence (values 0/1) onto unit-average-energy symbols.
pub fn map_symbols(bits: &[u8], scheme: Modulation) -> Result<Vec<Complex64>> {
    let bps = scheme.bits_per_symbol();
    if bits.len() % bps != 0 {
        return Err(Error::invalid(format!(
            "bit count {} not divisible by {bps}",
            bits.len()
        )));
    }
    if let Some(&b) = bits.iter().find(|&&b| b > 1) {
        return Err(Error::invalid(format!("bit value {b} is not 0 or 1")));
    }
    let out = bits
        .chunks_exact(bps)
        .map(|c| match scheme {
            Modulation::Qpsk => Complex64::new(
                (1.0 - 2.0 * c[0] as f64) * INV_SQRT2,
                (1.0 - 2.0 * c[1] as f64) * INV_SQRT2,
            ),
            Modulation::Qam16 => {
                let norm = 1.0 / 10f64.sqrt();
                Complex64::new(
                    gray2_level(c[0], c[1]) * norm,
                    gray2_level(c[2], c[3]) * norm,
                )
            }
        })
        .collect();
    Ok(out)
}

/// Hard decisions by minimum Euclidean distance plus max-log LLRs.
///
/// `noise_variance` scales the soft metrics; LLR > 0 favors bit 0.
pub fn demap_symbols(
    symbols: &[Complex64],
    scheme: Modulation,
    noise_variance: f64,
) -> (Vec<u8>, Vec<f64>) {
    let points = constellation(scheme);
    let bps = scheme.bits_per_symbol();
    let mut bits = Vec::with_capacity(symbols.len() * bps);
    let mut llrs = Vec::with_capacity(symbols.len() * bps);
    let sigma2 = noise_variance.max(0.0);
    for &y in symbols {
        let mut best = 0usize;
        let mut best_d = f64::INFINITY;
        let mut min0 = vec![f64::INFINITY; bps];
        let mut min1 = vec![f64::INFINITY; bps];
        for (i, (p, label)) in points.iter().enumerate() {
            let d = (y - p).norm_sqr();
            if d < best_d {
                best_d = d;
                best = i;
            }
            for (b, &bit) in label.iter().enumerate() {
                if bit == 0 {
                    min0[b] = min0[b].min(d);
                } else {
                    min1[b] = min1[b].min(d);
                }
            }
        }
        bits.extend_from_slice(&points[best].1);
        for b in 0..bps {
            let raw = min1[b] - min0[b];
            let llr = if sigma2 > 0.0 { raw / sigma2 } else { raw * LLR_CAP };
            llrs.push(llr.clamp(-LLR_CAP, LLR_CAP));
        }
    }
    (bits, llrs)
}

/// Row-column block interleaver with `depth` rows; `depth` must divide
/// the input length. `interleave([a,b,c,d], 2) == [a,c,b,d]`.
pub fn interleave<T: Clone>(symbols: &[T], depth: usize) -> Result<Vec<T>> {
    if depth == 0 || symbols.len() % depth != 0 {
        return Err(Error::invalid(format!(
            "depth {depth} must divide length {}",
            symbols.len()
        )));
    }
    let cols = symbols.len() / depth;
    let mut out = Vec::with_capacity(symbols.len());
    for c in 0..cols {
        for r in 0..depth {
            out.push(symbols[r * cols + c].clone());
        }
    }
    Ok(out)
}

/// Inverse of [`interleave`] with the same depth.
pub fn deinterleave<T: Clone>(symbols: &[T], depth: usize) -> Result<Vec<T>> {
    if depth == 0 || symbols.len() % depth != 0 {
        return Err(Error::invalid(format!(
            "depth {depth} must divide length {}",
            symbols.len()
        )));
    }
    interleave(symbols, symbols.len() / depth)
}
