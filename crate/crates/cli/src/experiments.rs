//! Experiment pipelines. Pure functions of a [`RunConfig`]; the commands
//! only add file output on top.

use anyhow::{bail, ensure, Context};
use ase_core::{
    decode_ideal, empirical_errors, encode_signal_with, encode_time, fit_linear_decoder,
    ideal_adc_fft, sft_frame, simulate_window, spectrum_rmse, AnalogSignal, EncoderConfig,
    ErrorReport, LinearDecoderParams, SftConfig, Spectrum, SpikeTrain, TuningResult,
};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{retune, DecoderChoice, RunConfig};

pub fn encode(run: &RunConfig) -> anyhow::Result<SpikeTrain> {
    let cfg = run.encoder_config()?;
    let options = run.encode_options(&cfg)?;
    let train = encode_signal_with(run.signal()?, &cfg, &options)?;
    ensure!(!train.is_empty(), "signal is shorter than one sampling window");
    Ok(train)
}

/// Linear decoder chosen by the `[sft]` section, along with the fit when the
/// tuner produced it.
pub fn resolve_decoder(
    run: &RunConfig,
    cfg: &EncoderConfig,
) -> anyhow::Result<(LinearDecoderParams, Option<TuningResult>)> {
    match run.sft.decoder {
        DecoderChoice::Endpoint => Ok((LinearDecoderParams::endpoint(cfg), None)),
        DecoderChoice::Explicit { t_lin_min, t_lin_max } => Ok((
            LinearDecoderParams::new(t_lin_min, t_lin_max, cfg.u_min, cfg.u_max)?,
            None,
        )),
        DecoderChoice::Fitted => {
            // the threshold is part of the encoder here, never re-chosen
            let settings = ase_core::TunerConfig {
                threshold_candidates: None,
                ..run.tuner.settings.clone()
            };
            let fit = fit_linear_decoder(cfg, &settings).context("fitting the linear decoder")?;
            Ok((fit.decoder(), Some(fit)))
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DecodedWindow {
    pub window: usize,
    pub bin: Option<u32>,
    pub spike_time: Option<f64>,
    pub ideal: Option<f64>,
    pub linear: Option<f64>,
}

/// Ideal and linear reconstructions of every window. Silent windows decode
/// to nothing.
pub fn decode(train: &SpikeTrain, decoder: &LinearDecoderParams) -> anyhow::Result<Vec<DecodedWindow>> {
    (0..train.len())
        .map(|m| {
            let spike_time = train.registered_time(m);
            let ideal = spike_time.map(|t| decode_ideal(t, &train.config)).transpose()?;
            Ok(DecodedWindow {
                window: m,
                bin: train.bins[m],
                spike_time,
                ideal,
                linear: spike_time.map(|t| ase_core::decode_linear(t, decoder)),
            })
        })
        .collect()
}

/// Evenly spaced grid of `points` values over `[lo, hi]`.
pub fn grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..points)
            .map(|i| lo + (hi - lo) * i as f64 / (points - 1) as f64)
            .collect(),
    }
}

/// Constant-voltage error sweep for one threshold. Grid point `i` is
/// encoded in window `i`, so per-window noise differs across the grid.
pub fn constant_sweep(run: &RunConfig, u_th: f64, points: usize) -> anyhow::Result<ErrorReport> {
    ensure!(points >= 2, "the u_in grid needs at least 2 points");
    let cfg = run
        .encoder_config()?
        .with_threshold(u_th)
        .with_context(|| format!("u_th = {u_th} V"))?;
    let options = run.encode_options(&cfg)?;
    let inputs = grid(cfg.u_min, cfg.u_max, points);
    let mut decoded = Vec::with_capacity(points);
    let mut t_true = Vec::with_capacity(points);
    let mut t_meas = Vec::with_capacity(points);
    for (m, &u) in inputs.iter().enumerate() {
        let Some(k) = simulate_window(u, &cfg, options.noise.as_ref(), m as u64) else {
            bail!("u_in = {u} V produced no spike within the window (u_th = {u_th} V)");
        };
        let t = f64::from(k) * cfg.reader_period;
        decoded.push(decode_ideal(t, &cfg)?);
        t_meas.push(t);
        t_true.push(encode_time(u, &cfg)?.time().unwrap_or(f64::INFINITY));
    }
    Ok(empirical_errors(&inputs, &decoded, &t_true, &t_meas, &cfg)?)
}

/// One point of the spectrum comparison: the S-FT of the first frame of the
/// encoded signal against the FFT of ideal samples.
#[derive(Debug, Clone)]
pub struct SftOutcome {
    pub frequency: Option<f64>,
    pub spectrum: Spectrum,
    pub reference: Spectrum,
    pub rmse: f64,
    pub decoder: LinearDecoderParams,
    pub fit: Option<TuningResult>,
    pub silent_windows: usize,
}

impl SftOutcome {
    pub fn peak_frequency(&self) -> f64 {
        self.spectrum.bin_frequency(self.spectrum.peak_bin())
    }
}

/// Runs encode, S-FT and the ideal-ADC comparison for `signal`. The signal
/// duration is stretched to one full frame when it is shorter.
pub fn sft_point(run: &RunConfig, signal: &AnalogSignal) -> anyhow::Result<SftOutcome> {
    let cfg = run.encoder_config()?;
    let options = run.encode_options(&cfg)?;
    let (decoder, fit) = resolve_decoder(run, &cfg)?;
    sft_point_with(run, signal, &cfg, decoder, fit, &options)
}

fn sft_point_with(
    run: &RunConfig,
    signal: &AnalogSignal,
    cfg: &EncoderConfig,
    decoder: LinearDecoderParams,
    fit: Option<TuningResult>,
    options: &ase_core::EncodeOptions,
) -> anyhow::Result<SftOutcome> {
    let k = run.sft.frame_size;
    let frame_duration = k as f64 * cfg.sample_period;
    let mut signal = signal.clone();
    // a hair over K windows so rounding never drops the last one
    signal.duration = signal.duration.max(frame_duration * (1.0 + 1e-9));
    let train = encode_signal_with(&signal, cfg, options)?;
    let spikes = &train.spike_times()[..k];
    let sft_cfg = SftConfig::for_encoder(cfg, decoder, k);
    let spectrum = sft_frame(spikes, &sft_cfg)?;
    let reference = ideal_adc_fft(&signal, cfg.sample_period, k)?;
    let rmse = spectrum_rmse(&spectrum, &reference)?;
    ensure!(
        rmse.is_finite() && spectrum.coefficients.iter().all(|c| c.re.is_finite() && c.im.is_finite()),
        "S-FT produced non-finite coefficients"
    );
    Ok(SftOutcome {
        frequency: match signal.waveform {
            ase_core::Waveform::Sine(s) => Some(s.frequency),
            _ => None,
        },
        spectrum,
        reference,
        rmse,
        decoder,
        fit,
        silent_windows: spikes.iter().filter(|s| s.is_none()).count(),
    })
}

/// [`sft_point`] for every frequency of the `[sft]` section, in parallel.
/// The decoder is fitted once and shared by all points.
pub fn sft_sweep(run: &RunConfig) -> anyhow::Result<Vec<SftOutcome>> {
    let base = run.signal()?;
    let cfg = run.encoder_config()?;
    let options = run.encode_options(&cfg)?;
    let (decoder, fit) = resolve_decoder(run, &cfg)?;
    ensure!(!run.sft.frequencies.is_empty(), "the [sft] section lists no frequencies");
    run.sft
        .frequencies
        .par_iter()
        .map(|&nu| {
            let signal = retune(base, nu)?;
            sft_point_with(run, &signal, &cfg, decoder, fit.clone(), &options)
                .with_context(|| format!("frequency {nu} Hz"))
        })
        .collect()
}

/// Fits the decoder for the encoder section and every listed scenario.
pub fn tune(run: &RunConfig) -> anyhow::Result<Vec<TuningResult>> {
    let base = run.encoder_config()?;
    let configs: Vec<EncoderConfig> = if run.tuner.scenarios.is_empty() {
        vec![base]
    } else {
        run.tuner
            .scenarios
            .iter()
            .map(|s| {
                let c = EncoderConfig { u_min: s.u_min, u_th: s.u_th, ..base };
                c.validate()
                    .map(|()| c)
                    .with_context(|| format!("scenario u_min = {} V, u_th = {} V", s.u_min, s.u_th))
            })
            .collect::<anyhow::Result<_>>()?
    };
    configs
        .par_iter()
        .map(|c| Ok(fit_linear_decoder(c, &run.tuner.settings)?))
        .collect()
}
