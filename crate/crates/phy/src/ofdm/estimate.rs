//! Pilot-based LS channel estimation and scalar LMMSE equalization.

use crate::error::{Error, Result};
use crate::ofdm::config::OfdmConfig;
use num_complex::Complex64;

/// Per-subcarrier channel estimate over the active set, with the noise
/// variance measured on the null subcarriers (symbol units).
#[derive(Debug, Clone)]
pub struct ChannelEstimate {
    /// Active subcarrier indices, ascending.
    pub indices: Vec<i32>,
    pub gains: Vec<Complex64>,
    pub noise_variance: f64,
}

impl ChannelEstimate {
    /// Gains at the given subcarrier indices (must be active).
    pub fn gains_at(&self, set: &[i32]) -> Result<Vec<Complex64>> {
        set.iter()
            .map(|k| {
                self.indices
                    .binary_search(k)
                    .map(|i| self.gains[i])
                    .map_err(|_| Error::invalid(format!("subcarrier {k} not in the estimate")))
            })
            .collect()
    }
}

/// Least-squares channel estimate from pilot observations.
///
/// Pilot gains are `rx / tx`; gains on the remaining active subcarriers
/// come from linear interpolation over the subcarrier index (flat
/// extrapolation past the outermost pilots). `nulls` are the null-bin
/// observations used for the noise variance; pass an empty slice when
/// unavailable.
pub fn ls_channel_estimate(
    rx_pilots: &[Complex64],
    tx_pilots: &[Complex64],
    nulls: &[Complex64],
    config: &OfdmConfig,
) -> Result<ChannelEstimate> {
    if rx_pilots.len() != config.pilot_set.len() || tx_pilots.len() != config.pilot_set.len() {
        return Err(Error::invalid(format!(
            "pilot vectors must match |S_P| = {}",
            config.pilot_set.len()
        )));
    }
    if let Some(i) = tx_pilots.iter().position(|p| p.norm_sqr() == 0.0) {
        return Err(Error::invalid(format!("transmitted pilot {i} is zero")));
    }
    // pilot positions sorted by subcarrier index
    let mut order: Vec<usize> = (0..config.pilot_set.len()).collect();
    order.sort_by_key(|&i| config.pilot_set[i]);
    let pk: Vec<i32> = order.iter().map(|&i| config.pilot_set[i]).collect();
    let pg: Vec<Complex64> = order
        .iter()
        .map(|&i| rx_pilots[i] / tx_pilots[i])
        .collect();

    let indices = config.active_set();
    let gains = indices
        .iter()
        .map(|&k| interpolate(&pk, &pg, k))
        .collect();
    let noise_variance = if nulls.is_empty() {
        0.0
    } else {
        nulls.iter().map(|v| v.norm_sqr()).sum::<f64>() / nulls.len() as f64
    };
    Ok(ChannelEstimate {
        indices,
        gains,
        noise_variance,
    })
}

fn interpolate(pk: &[i32], pg: &[Complex64], k: i32) -> Complex64 {
    match pk.binary_search(&k) {
        Ok(i) => pg[i],
        Err(0) => pg[0],
        Err(i) if i == pk.len() => pg[pk.len() - 1],
        Err(i) => {
            let (k0, k1) = (pk[i - 1] as f64, pk[i] as f64);
            let w = (k as f64 - k0) / (k1 - k0);
            pg[i - 1] * (1.0 - w) + pg[i] * w
        }
    }
}

/// Scalar per-subcarrier LMMSE: `H* y / (|H|^2 + sigma^2)` under a
/// unit-energy symbol prior. Reduces to zero-forcing as sigma^2 -> 0 and
/// outputs zero where both the gain and the noise variance vanish.
pub fn lmmse_equalize(
    symbols: &[Complex64],
    gains: &[Complex64],
    noise_variance: f64,
) -> Vec<Complex64> {
    let sigma2 = noise_variance.max(0.0);
    symbols
        .iter()
        .zip(gains)
        .map(|(&y, &h)| {
            let denom = h.norm_sqr() + sigma2;
            if denom == 0.0 {
                Complex64::new(0.0, 0.0)
            } else {
                h.conj() * y / denom
            }
        })
        .collect()
}
