//! Subcommand definitions and artifact writing.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{ensure, Context};
use ase_core::io::{
    read_spike_train, write_atomic, write_error_report_csv, write_spectrum_csv,
    write_spike_train_csv, SpikeTrainMeta,
};
use ase_core::{timing_summary, LinearDecoderParams, Spectrum, TuningResult};
use clap::{Parser, Subcommand};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{retune, RunConfig};
use crate::experiments::{self, SftOutcome};

#[derive(Debug, Parser)]
#[command(name = "ase", version, about = "Analog-to-spike encoder experiments")]
pub struct Cli {
    /// JSON run configuration; built-in defaults when omitted.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Seed for noise and tuner, overriding the config.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Encode the [signal] into a spike train (spikes.csv + spikes.json).
    Encode,
    /// Decode a spike train with the ideal and the linear decoder.
    Decode {
        #[arg(long)]
        input: PathBuf,
        /// Sidecar of the train; defaults to the input with a .json extension.
        #[arg(long)]
        meta: Option<PathBuf>,
    },
    /// Constant-voltage error sweep over a u_in grid for several thresholds.
    SweepConstant {
        #[arg(long, value_delimiter = ',', default_values_t = [0.1, 0.5, 0.75, 0.9])]
        thresholds: Vec<f64>,
        #[arg(long, default_value_t = 256)]
        points: usize,
    },
    /// Fit the linear decoder for the encoder and any listed scenarios.
    Tune,
    /// Spectrum of one frame of the [signal] against the ideal ADC.
    Sft {
        /// Replace the frequency of a sine signal.
        #[arg(long)]
        frequency: Option<f64>,
    },
    /// Spectrum comparison for every frequency in [sft].frequencies.
    SftSweep,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Encode => "encode",
            Command::Decode { .. } => "decode",
            Command::SweepConstant { .. } => "sweep-constant",
            Command::Tune => "tune",
            Command::Sft { .. } => "sft",
            Command::SftSweep => "sft-sweep",
        }
    }
}

/// Every JSON output carries the full configuration that produced it.
#[derive(Serialize)]
struct Sidecar<'a, T: Serialize> {
    tool: &'static str,
    version: &'static str,
    command: &'static str,
    run_seed: u64,
    run_config: &'a RunConfig,
    #[serde(flatten)]
    result: T,
}

struct Ctx {
    run: RunConfig,
    out: PathBuf,
    command: &'static str,
}

impl Ctx {
    fn path(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }

    fn write_json<T: Serialize>(&self, name: &str, result: T) -> anyhow::Result<PathBuf> {
        let doc = Sidecar {
            tool: "ase",
            version: env!("CARGO_PKG_VERSION"),
            command: self.command,
            run_seed: self.run.seed(),
            run_config: &self.run,
            result,
        };
        let mut bytes = serde_json::to_vec_pretty(&doc)?;
        bytes.push(b'\n');
        let path = self.path(name);
        write_atomic(&path, &bytes).with_context(|| format!("writing {}", path.display()))?;
        Ok(path)
    }

    fn write_csv<F>(&self, name: &str, fill: F) -> anyhow::Result<PathBuf>
    where
        F: FnOnce(&mut Vec<u8>) -> anyhow::Result<()>,
    {
        let mut bytes = Vec::new();
        fill(&mut bytes)?;
        let path = self.path(name);
        write_atomic(&path, &bytes).with_context(|| format!("writing {}", path.display()))?;
        Ok(path)
    }
}

/// Runs a parsed command line and returns the files it wrote.
pub fn run(cli: Cli) -> anyhow::Result<Vec<PathBuf>> {
    let mut run = RunConfig::load(cli.config.as_deref())?;
    if let Some(seed) = cli.seed {
        run = run.with_seed(seed);
    }
    run.validate()?;
    fs::create_dir_all(&cli.out).with_context(|| format!("creating {}", cli.out.display()))?;
    let ctx = Ctx {
        run,
        out: cli.out,
        command: cli.command.name(),
    };
    match cli.command {
        Command::Encode => encode(&ctx),
        Command::Decode { input, meta } => decode(&ctx, &input, meta.as_deref()),
        Command::SweepConstant { thresholds, points } => sweep_constant(&ctx, &thresholds, points),
        Command::Tune => tune(&ctx),
        Command::Sft { frequency } => sft(&ctx, frequency),
        Command::SftSweep => sft_sweep(&ctx),
    }
}

#[derive(Serialize)]
struct EncodeResult {
    #[serde(flatten)]
    meta: SpikeTrainMeta,
    fired: usize,
}

fn encode(ctx: &Ctx) -> anyhow::Result<Vec<PathBuf>> {
    let train = experiments::encode(&ctx.run)?;
    let csv = ctx.write_csv("spikes.csv", |b| Ok(write_spike_train_csv(&train, b)?))?;
    let json = ctx.write_json(
        "spikes.json",
        EncodeResult {
            meta: SpikeTrainMeta::of(&train),
            fired: train.fired_count(),
        },
    )?;
    Ok(vec![csv, json])
}

#[derive(Serialize)]
struct DecodeResult<'a> {
    input: &'a Path,
    decoder: LinearDecoderParams,
    fit: Option<TuningResult>,
    windows: usize,
    silent: usize,
}

fn decode(ctx: &Ctx, input: &Path, meta: Option<&Path>) -> anyhow::Result<Vec<PathBuf>> {
    let meta = meta.map_or_else(|| input.with_extension("json"), Path::to_path_buf);
    let open = |p: &Path| fs::File::open(p).with_context(|| format!("opening {}", p.display()));
    let train = read_spike_train(open(input)?, open(&meta)?)
        .with_context(|| format!("reading spike train {}", input.display()))?;
    let (decoder, fit) = experiments::resolve_decoder(&ctx.run, &train.config)?;
    let rows = experiments::decode(&train, &decoder)?;
    let csv = ctx.write_csv("decoded.csv", |b| {
        let mut w = csv::Writer::from_writer(b);
        w.write_record(["window", "bin", "spike_time", "ideal", "linear"])?;
        let opt = |v: Option<String>| v.unwrap_or_default();
        for r in &rows {
            w.write_record([
                r.window.to_string(),
                opt(r.bin.map(|k| k.to_string())),
                opt(r.spike_time.map(|t| t.to_string())),
                opt(r.ideal.map(|v| v.to_string())),
                opt(r.linear.map(|v| v.to_string())),
            ])?;
        }
        w.flush()?;
        Ok(())
    })?;
    let json = ctx.write_json(
        "decoded.json",
        DecodeResult {
            input,
            decoder,
            fit,
            windows: rows.len(),
            silent: rows.iter().filter(|r| r.bin.is_none()).count(),
        },
    )?;
    Ok(vec![csv, json])
}

#[derive(Serialize)]
struct SweepSummary {
    u_th: f64,
    file: String,
    t_min: f64,
    t_max: f64,
    mean_eps_u: f64,
    max_eps_u: f64,
    mean_eps_ts: f64,
    rmse: f64,
}

#[derive(Serialize)]
struct SweepResult {
    points: usize,
    thresholds: Vec<SweepSummary>,
}

fn sweep_constant(ctx: &Ctx, thresholds: &[f64], points: usize) -> anyhow::Result<Vec<PathBuf>> {
    ensure!(!thresholds.is_empty(), "no thresholds given");
    let base = ctx.run.encoder_config()?;
    let results: Vec<(SweepSummary, PathBuf)> = thresholds
        .par_iter()
        .map(|&u_th| {
            let report = experiments::constant_sweep(&ctx.run, u_th, points)?;
            let file = format!("errors_uth_{u_th}.csv");
            let path = ctx.write_csv(&file, |b| Ok(write_error_report_csv(&report, b)?))?;
            let timing = timing_summary(&base.with_threshold(u_th)?);
            let summary = SweepSummary {
                u_th,
                file,
                t_min: timing.t_wait,
                t_max: timing.t_wait + timing.t_spk,
                mean_eps_u: report.mean_eps_u,
                max_eps_u: report.max_eps_u,
                mean_eps_ts: report.mean_eps_ts,
                rmse: report.rmse,
            };
            Ok((summary, path))
        })
        .collect::<anyhow::Result<_>>()?;
    let (summaries, mut paths): (Vec<_>, Vec<_>) = results.into_iter().unzip();
    paths.push(ctx.write_json(
        "sweep_constant.json",
        SweepResult {
            points,
            thresholds: summaries,
        },
    )?);
    Ok(paths)
}

fn tune(ctx: &Ctx) -> anyhow::Result<Vec<PathBuf>> {
    experiments::tune(&ctx.run)?
        .into_iter()
        .map(|fit| {
            let name = format!("tune_umin_{}_uth_{}.json", fit.config.u_min, fit.config.u_th);
            ctx.write_json(&name, fit)
        })
        .collect()
}

#[derive(Serialize)]
struct SftSummary {
    frequency: Option<f64>,
    rmse: f64,
    peak_bin: usize,
    peak_hz: f64,
    silent_windows: usize,
    spectrum_file: String,
    reference_file: String,
}

impl SftSummary {
    fn of(o: &SftOutcome, spectrum_file: String, reference_file: String) -> Self {
        Self {
            frequency: o.frequency,
            rmse: o.rmse,
            peak_bin: o.spectrum.peak_bin(),
            peak_hz: o.peak_frequency(),
            silent_windows: o.silent_windows,
            spectrum_file,
            reference_file,
        }
    }
}

#[derive(Serialize)]
struct SftResult {
    decoder: LinearDecoderParams,
    fit: Option<TuningResult>,
    points: Vec<SftSummary>,
}

fn spectrum_writer(s: &Spectrum) -> impl FnOnce(&mut Vec<u8>) -> anyhow::Result<()> + '_ {
    move |b| Ok(write_spectrum_csv(s, b)?)
}

fn sft(ctx: &Ctx, frequency: Option<f64>) -> anyhow::Result<Vec<PathBuf>> {
    let signal = match frequency {
        Some(nu) => retune(ctx.run.signal()?, nu)?,
        None => ctx.run.signal()?.clone(),
    };
    let out = experiments::sft_point(&ctx.run, &signal)?;
    let spectrum = ctx.write_csv("spectrum.csv", spectrum_writer(&out.spectrum))?;
    let reference = ctx.write_csv("reference.csv", spectrum_writer(&out.reference))?;
    let json = ctx.write_json(
        "sft.json",
        SftResult {
            decoder: out.decoder,
            fit: out.fit.clone(),
            points: vec![SftSummary::of(&out, "spectrum.csv".into(), "reference.csv".into())],
        },
    )?;
    Ok(vec![spectrum, reference, json])
}

fn sft_sweep(ctx: &Ctx) -> anyhow::Result<Vec<PathBuf>> {
    let outcomes = experiments::sft_sweep(&ctx.run)?;
    let written: Vec<(SftSummary, [PathBuf; 2])> = outcomes
        .par_iter()
        .map(|o| {
            let nu = o.frequency.unwrap_or_default();
            let (s, r) = (format!("spectrum_{nu}hz.csv"), format!("reference_{nu}hz.csv"));
            let paths = [
                ctx.write_csv(&s, spectrum_writer(&o.spectrum))?,
                ctx.write_csv(&r, spectrum_writer(&o.reference))?,
            ];
            Ok((SftSummary::of(o, s, r), paths))
        })
        .collect::<anyhow::Result<_>>()?;
    let mut paths: Vec<PathBuf> = written.iter().flat_map(|(_, p)| p.iter().cloned()).collect();
    paths.push(ctx.write_csv("sft_sweep.csv", |b| {
        let mut w = csv::Writer::from_writer(b);
        w.write_record(["freq_hz", "rmse", "peak_hz", "silent_windows"])?;
        for (s, _) in &written {
            w.write_record([
                s.frequency.unwrap_or_default().to_string(),
                s.rmse.to_string(),
                s.peak_hz.to_string(),
                s.silent_windows.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    })?);
    let first = &outcomes[0];
    paths.push(ctx.write_json(
        "sft_sweep.json",
        SftResult {
            decoder: first.decoder,
            fit: first.fit.clone(),
            points: written.into_iter().map(|(s, _)| s).collect(),
        },
    )?);
    Ok(paths)
}
