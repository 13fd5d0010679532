//! End-to-end receive-chain integration tests.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, Normal};
use uwa_phy::frontend::adc;
use uwa_phy::metrics::block_ber;
use uwa_phy::ofdm::config::{Modulation, OfdmConfig};
use uwa_phy::ofdm::frame::{build_frame, FrameLayout};
use uwa_phy::ofdm::mapping::{demap_symbols, map_symbols};
use uwa_phy::ofdm::modem::{demodulate_block, subcarrier_amplitude};
use uwa_phy::ofdm::receiver::receive_frame;
use uwa_phy::ofdm::estimate::lmmse_equalize;
use uwa_phy::SampledSignal;

fn random_payload(config: &OfdmConfig, seed: u64) -> Vec<u8> {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    (0..config.payload_bits_len())
        .map(|_| rng.random::<bool>() as u8)
        .collect()
}

#[test]
fn noiseless_loopback_recovers_every_bit() {
    let config = OfdmConfig::table1();
    let payload = random_payload(&config, 42);
    let (frame, _) = build_frame(&config, &payload, 42).unwrap();
    let received = adc(&frame, &config).unwrap();
    let rx = receive_frame(&received, &config).unwrap();
    assert_eq!(rx.blocks.len(), config.num_blocks());
    let decided = rx.payload_bits();
    let (ber, errors, bits) = block_ber(&decided, &payload).unwrap();
    assert_eq!(bits, config.payload_bits_len());
    assert_eq!(errors, 0, "loopback BER {ber}");
    // both modulations were exercised
    assert!(rx.blocks.iter().any(|b| b.modulation == Modulation::Qpsk));
    assert!(rx.blocks.iter().any(|b| b.modulation == Modulation::Qam16));
}

#[test]
fn null_bin_noise_variance_tracks_injected_noise() {
    let config = OfdmConfig::table1();
    let payload = random_payload(&config, 7);
    let (frame, layout) = build_frame(&config, &payload, 7).unwrap();
    let clean = adc(&frame, &config).unwrap();
    let sigma_t = 0.03f64; // time-domain noise std at the ADC rate
    let mut rng = ChaCha12Rng::seed_from_u64(70);
    let normal = Normal::new(0.0, sigma_t).unwrap();
    let noisy = SampledSignal::new(
        clean.samples.iter().map(|&v| v + normal.sample(&mut rng)).collect(),
        clean.sample_rate,
        clean.start_time,
    )
    .unwrap();

    // independent conversion of the injected time-domain variance to
    // symbol units: a null bin collects m symbol samples plus g folded
    // guard samples, then is scaled by 1 / (m * a)
    let rate = config.adc_rate;
    let m = config.symbol_samples(rate) as f64;
    let g = config.guard_samples(rate) as f64;
    let a = subcarrier_amplitude(&config);
    let expected = (m + g) * sigma_t * sigma_t / (m * a).powi(2);

    let mut acc = 0.0;
    let mut count = 0usize;
    for b in 0..config.num_blocks() {
        let off = (layout.data_block_offset(b).unwrap() * rate).round() as usize;
        let demod = demodulate_block(&noisy, &config, off).unwrap();
        acc += demod.nulls.iter().map(|v| v.norm_sqr()).sum::<f64>();
        count += demod.nulls.len();
    }
    let measured = acc / count as f64;
    let rel = (measured - expected).abs() / expected;
    assert!(
        rel < 0.10,
        "null variance {measured:.4e} vs expected {expected:.4e} ({:.1}% off)",
        100.0 * rel
    );
}

#[test]
fn qpsk_symbol_errors_rare_at_20_db() {
    // flat channel, LMMSE equalizer, 1e5 symbols at 20 dB SNR
    let n = 100_000;
    let mut rng = ChaCha12Rng::seed_from_u64(20);
    let bits: Vec<u8> = (0..2 * n).map(|_| rng.random::<bool>() as u8).collect();
    let tx = map_symbols(&bits, Modulation::Qpsk).unwrap();
    let sigma2 = 0.01f64; // complex noise variance for 20 dB
    let per_dim = Normal::new(0.0, (sigma2 / 2.0).sqrt()).unwrap();
    let rx: Vec<Complex64> = tx
        .iter()
        .map(|s| s + Complex64::new(per_dim.sample(&mut rng), per_dim.sample(&mut rng)))
        .collect();
    let h = vec![Complex64::new(1.0, 0.0); n];
    let eq = lmmse_equalize(&rx, &h, sigma2);
    let (decided, _) = demap_symbols(&eq, Modulation::Qpsk, sigma2);
    let mut symbol_errors = 0usize;
    for i in 0..n {
        if decided[2 * i] != bits[2 * i] || decided[2 * i + 1] != bits[2 * i + 1] {
            symbol_errors += 1;
        }
    }
    let ser = symbol_errors as f64 / n as f64;
    assert!(ser < 1e-3, "SER {ser} at 20 dB");
}

/// Gaussian tail function via the Abramowitz-Stegun erfc approximation
/// (formula 7.1.26, |error| < 1.5e-7) — independent of the library.
fn q_func(x: f64) -> f64 {
    let z = x / std::f64::consts::SQRT_2;
    let t = 1.0 / (1.0 + 0.3275911 * z);
    let poly = t
        * (0.254829592 + t * (-0.284496736 + t * (1.421413741 + t * (-1.453152027 + t * 1.061405429))));
    0.5 * poly * (-z * z).exp()
}

#[test]
fn qpsk_ber_matches_analytic_at_10_db() {
    // Es/N0 = 10 dB, Eb/N0 = 5: BER = Q(sqrt(2 * Eb/N0)) = Q(sqrt(10))
    let n = 1_000_000;
    let mut rng = ChaCha12Rng::seed_from_u64(21);
    let bits: Vec<u8> = (0..2 * n).map(|_| rng.random::<bool>() as u8).collect();
    let tx = map_symbols(&bits, Modulation::Qpsk).unwrap();
    let sigma2 = 0.1f64;
    let per_dim = Normal::new(0.0, (sigma2 / 2.0).sqrt()).unwrap();
    let rx: Vec<Complex64> = tx
        .iter()
        .map(|s| s + Complex64::new(per_dim.sample(&mut rng), per_dim.sample(&mut rng)))
        .collect();
    let (decided, _) = demap_symbols(&rx, Modulation::Qpsk, sigma2);
    let (ber, _, _) = block_ber(&decided, &bits).unwrap();
    let analytic = q_func(10f64.sqrt());
    assert!(
        ber < 2.0 * analytic && ber > analytic / 2.0,
        "BER {ber:.3e} vs analytic {analytic:.3e}"
    );
}

#[test]
fn receiver_survives_small_timing_offset() {
    // the frame embedded mid-buffer with AWGN still decodes cleanly
    let config = OfdmConfig::table1();
    let payload = random_payload(&config, 91);
    let (frame, _) = build_frame(&config, &payload, 91).unwrap();
    let at_adc = adc(&frame, &config).unwrap();
    let delay = 4321usize;
    let mut rng = ChaCha12Rng::seed_from_u64(92);
    let normal = Normal::new(0.0, 0.01).unwrap();
    let mut samples = vec![0.0; delay];
    samples.extend_from_slice(&at_adc.samples);
    samples.extend(std::iter::repeat_n(0.0, 2000));
    for v in samples.iter_mut() {
        *v += normal.sample(&mut rng);
    }
    let rx_sig = SampledSignal::new(samples, config.adc_rate, 0.0).unwrap();
    let rx = receive_frame(&rx_sig, &config).unwrap();
    assert!((rx.frame_start as i64 - delay as i64).abs() <= 2);
    let (ber, _, _) = block_ber(&rx.payload_bits(), &payload).unwrap();
    assert!(ber < 1e-3, "BER {ber} with timing offset + light noise");
}

#[test]
fn layout_matches_frame_length() {
    let config = OfdmConfig::table1();
    let payload = random_payload(&config, 5);
    let (frame, layout) = build_frame(&config, &payload, 5).unwrap();
    let expect = (layout.total_duration * config.analog_rate).round() as usize;
    assert_eq!(frame.len(), expect);
    let relayout = FrameLayout::for_config(&config).unwrap();
    assert_eq!(relayout.total_duration, layout.total_duration);
}
