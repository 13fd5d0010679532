//! Seeded Monte-Carlo experiment runner.
//!
//! Every trial builds one frame, passes it through the channel once, and
//! scores every configured front-end against that same received
//! waveform, so front-end comparisons are paired: identical payload,
//! identical multipath, identical noise realization. Results are fully
//! deterministic functions of the base seed.

use crate::config::{ExperimentConfig, FrontendConfig};
use anyhow::{bail, Context};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use uwa_phy::frontend::{adc, apply_windowed_baseline, manp_process};
use uwa_phy::metrics::{block_ber, block_snr, noise_power_from_silence};
use uwa_phy::ofdm::config::OfdmConfig;
use uwa_phy::ofdm::frame::build_frame;
use uwa_phy::ofdm::receiver::receive_frame;
use uwa_phy::{apply_channel, SampledSignal};

/// One CSV row: the metrics of one block of one front-end of one run.
#[derive(Debug, Clone)]
pub struct MetricsRow {
    pub run_id: usize,
    pub seed: u64,
    pub frontend: String,
    pub block_index: usize,
    pub modulation: String,
    /// None when the block power never exceeded the noise power, or when
    /// no noise estimate was available.
    pub snr_db: Option<f64>,
    /// None when no reference payload was available.
    pub ber: Option<f64>,
    pub bit_errors: Option<usize>,
    pub bits: usize,
}

/// Per-front-end aggregate over all runs.
#[derive(Debug, Clone)]
pub struct FrontendSummary {
    pub frontend: String,
    /// Total bit errors / total bits across all scored blocks.
    pub mean_ber: Option<f64>,
    /// Mean of the per-block SNR estimates that were available.
    pub mean_snr_db: Option<f64>,
    pub blocks: usize,
}

/// SplitMix64: decorrelates per-trial seeds drawn from the base seed.
fn derive_seed(base: u64, stream: u64) -> u64 {
    let mut z = base
        .wrapping_add(stream.wrapping_mul(0x9e37_79b9_7f4a_7c15))
        .wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn random_payload(config: &OfdmConfig, seed: u64) -> Vec<u8> {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    (0..config.payload_bits_len())
        .map(|_| rng.random::<bool>() as u8)
        .collect()
}

/// Runs the selected front-end and the ADC on the received stream,
/// returning the signal at the ADC rate ready for the receiver.
pub fn apply_frontend(
    frontend: &FrontendConfig,
    received: &SampledSignal,
    ofdm: &OfdmConfig,
) -> uwa_phy::Result<SampledSignal> {
    match frontend {
        FrontendConfig::None => adc(received, ofdm),
        FrontendConfig::Manp { params } => adc(&manp_process(received, params)?, ofdm),
        FrontendConfig::Blanking { k, window } => {
            apply_windowed_baseline(&adc(received, ofdm)?, *window, *k, true)
        }
        FrontendConfig::Clipping { k, window } => {
            apply_windowed_baseline(&adc(received, ofdm)?, *window, *k, false)
        }
    }
}

/// Front-end + receiver + metrics for one received stream.
pub fn score_stream(
    ofdm: &OfdmConfig,
    frontend: &FrontendConfig,
    received: &SampledSignal,
    reference: Option<&[u8]>,
    run_id: usize,
    seed: u64,
    silence_guard: f64,
) -> uwa_phy::Result<Vec<MetricsRow>> {
    let processed = apply_frontend(frontend, received, ofdm)?;
    let rx = receive_frame(&processed, ofdm)?;
    // re-anchor so frame time zero sits at the synchronized frame start
    let anchored = processed.anchored(rx.frame_start, 0.0);
    let noise_power = noise_power_from_silence(&anchored, &rx.layout, silence_guard).ok();

    let mut rows = Vec::with_capacity(rx.blocks.len());
    let mut cursor = 0usize;
    for (b, block) in rx.blocks.iter().enumerate() {
        let nbits = block.bits.len();
        let (ber, errors) = match reference {
            Some(r) => {
                let (ber, errors, _) = block_ber(&block.bits, &r[cursor..cursor + nbits])?;
                (Some(ber), Some(errors))
            }
            None => (None, None),
        };
        cursor += nbits;
        let snr_db = match noise_power {
            Some(p) if p > 0.0 => block_snr(&anchored, &rx.layout, b, p)?,
            _ => None,
        };
        rows.push(MetricsRow {
            run_id,
            seed,
            frontend: frontend.label().to_string(),
            block_index: b,
            modulation: block.modulation.name().to_string(),
            snr_db,
            ber,
            bit_errors: errors,
            bits: nbits,
        });
    }
    Ok(rows)
}

fn run_trial(config: &ExperimentConfig, t: usize) -> anyhow::Result<Vec<MetricsRow>> {
    let trial_seed = derive_seed(config.seed, t as u64);
    let payload = random_payload(&config.ofdm, trial_seed ^ 0x70ad);
    let (frame, _) = build_frame(&config.ofdm, &payload, trial_seed)
        .with_context(|| format!("building frame for trial {t}"))?;
    let mut chan = config.channel.clone();
    chan.seed = trial_seed;
    let received = apply_channel(&frame, &chan)
        .with_context(|| format!("applying channel in trial {t}"))?;

    if let Some(dir) = &config.dump_dir {
        dump_trial(dir, t, &received, &payload)?;
    }

    let mut rows = Vec::new();
    for fe in &config.frontends {
        rows.extend(
            score_stream(
                &config.ofdm,
                fe,
                &received,
                Some(&payload),
                t,
                trial_seed,
                config.silence_guard,
            )
            .with_context(|| format!("front-end {} in trial {t}", fe.label()))?,
        );
    }
    Ok(rows)
}

fn dump_trial(
    dir: &Path,
    t: usize,
    received: &SampledSignal,
    payload: &[u8],
) -> anyhow::Result<()> {
    std::fs::create_dir_all(dir)?;
    let wave = dir.join(format!("trial_{t:03}.f32"));
    uwa_phy::wave::write_waveform(&wave, received)
        .with_context(|| format!("writing {}", wave.display()))?;
    let bits: String = payload.iter().map(|&b| if b != 0 { '1' } else { '0' }).collect();
    std::fs::write(dir.join(format!("trial_{t:03}.payload.txt")), bits)?;
    Ok(())
}

/// Runs all trials; rows are ordered by (trial, front-end, block)
/// regardless of `jobs`.
pub fn run_experiment(config: &ExperimentConfig, jobs: usize) -> anyhow::Result<Vec<MetricsRow>> {
    config
        .validate()
        .map_err(|e| anyhow::anyhow!("invalid experiment config:\n{e}"))?;
    let trials = config.trials;
    let jobs = jobs.max(1).min(trials);

    if jobs == 1 {
        let mut rows = Vec::new();
        for t in 0..trials {
            rows.extend(run_trial(config, t)?);
        }
        return Ok(rows);
    }

    let results: Mutex<Vec<Option<anyhow::Result<Vec<MetricsRow>>>>> =
        Mutex::new((0..trials).map(|_| None).collect());
    let next = AtomicUsize::new(0);
    std::thread::scope(|scope| {
        for _ in 0..jobs {
            scope.spawn(|| loop {
                let t = next.fetch_add(1, Ordering::Relaxed);
                if t >= trials {
                    break;
                }
                let out = run_trial(config, t);
                results.lock().unwrap()[t] = Some(out);
            });
        }
    });
    let mut rows = Vec::new();
    for (t, slot) in results.into_inner().unwrap().into_iter().enumerate() {
        match slot {
            Some(Ok(r)) => rows.extend(r),
            Some(Err(e)) => return Err(e),
            None => bail!("trial {t} was never executed"),
        }
    }
    Ok(rows)
}

/// Writes rows as CSV; optional fields serialize as empty cells.
pub fn write_csv(rows: &[MetricsRow], path: &Path) -> anyhow::Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    let mut w = csv::Writer::from_path(path)?;
    w.write_record([
        "run_id",
        "seed",
        "frontend",
        "block_index",
        "modulation",
        "snr_db",
        "ber",
        "bit_errors",
        "bits",
    ])?;
    for r in rows {
        w.write_record([
            r.run_id.to_string(),
            r.seed.to_string(),
            r.frontend.clone(),
            r.block_index.to_string(),
            r.modulation.clone(),
            r.snr_db.map(|v| format!("{v:.6}")).unwrap_or_default(),
            r.ber.map(|v| format!("{v:.8}")).unwrap_or_default(),
            r.bit_errors.map(|v| v.to_string()).unwrap_or_default(),
            r.bits.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Aggregates rows per front-end, preserving first-seen order.
pub fn summarize(rows: &[MetricsRow]) -> Vec<FrontendSummary> {
    let mut order: Vec<String> = Vec::new();
    for r in rows {
        if !order.contains(&r.frontend) {
            order.push(r.frontend.clone());
        }
    }
    order
        .into_iter()
        .map(|name| {
            let group: Vec<&MetricsRow> = rows.iter().filter(|r| r.frontend == name).collect();
            let (errs, bits) = group.iter().fold((0usize, 0usize), |(e, n), r| match r.bit_errors {
                Some(be) => (e + be, n + r.bits),
                None => (e, n),
            });
            let snrs: Vec<f64> = group.iter().filter_map(|r| r.snr_db).collect();
            FrontendSummary {
                frontend: name,
                mean_ber: (bits > 0).then(|| errs as f64 / bits as f64),
                mean_snr_db: (!snrs.is_empty())
                    .then(|| snrs.iter().sum::<f64>() / snrs.len() as f64),
                blocks: group.len(),
            }
        })
        .collect()
}
