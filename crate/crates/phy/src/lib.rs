//! Physical-layer simulation library for an impulsive-noise-robust
//! underwater acoustic ZP-OFDM link.
//!
//! The crate covers the whole chain: frame synthesis at an oversampled
//! "analog" rate, a multipath channel with Gaussian plus impulsive noise,
//! an analog nonlinear preprocessor (and digital blanking/clipping
//! baselines), the ADC boundary, and a complete OFDM receiver with
//! synchronization, LS channel estimation and LMMSE equalization.

pub mod channel;
pub mod dft;
pub mod error;
pub mod fir;
pub mod frontend;
pub mod metrics;
pub mod ofdm;
pub mod signal;
pub mod wave;
pub mod xcorr;

pub use channel::{apply_channel, generate_impulsive_noise, ChannelSpec, ImpulseModel, Tap};
pub use error::{Error, Result};
pub use frontend::{
    adc, apply_windowed_baseline, blanking, clipping, derive_baseline_thresholds, influence,
    manp_process, track_resolution, BaselineThresholds, InfluenceParams, SlidingMedian,
};
pub use metrics::{block_ber, block_snr, noise_power_from_silence, BlockMetrics};
pub use signal::SampledSignal;
