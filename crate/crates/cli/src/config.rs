//! The JSON run configuration shared by all subcommands.

use std::fs;
use std::path::Path;

use anyhow::{bail, Context};
use ase_core::{
    AnalogSignal, EncodeOptions, EncoderConfig, InputCoupling, LinearDecoderParams,
    ThermalNoiseModel, TunerConfig, Waveform,
};
use serde::{Deserialize, Serialize};

pub const SWEEP_FREQUENCIES: [f64; 8] = [25.0, 50.0, 75.0, 100.0, 250.0, 500.0, 750.0, 1000.0];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EncoderSection {
    pub tau: f64,
    pub u_th: f64,
    pub u_min: f64,
    pub u_max: f64,
    pub sample_period: f64,
    /// Reader ticks per sampling window, `N`.
    pub resolution: u32,
    pub coupling: InputCoupling,
}

impl Default for EncoderSection {
    fn default() -> Self {
        Self {
            tau: 3e-3,
            u_th: 0.1,
            u_min: 1.0,
            u_max: 5.0,
            sample_period: 1.0 / 3000.0,
            resolution: 100,
            coupling: InputCoupling::SampleAndHold,
        }
    }
}

impl EncoderSection {
    pub fn build(&self) -> ase_core::Result<EncoderConfig> {
        EncoderConfig::with_resolution(
            self.tau,
            self.u_th,
            self.u_min,
            self.u_max,
            self.sample_period,
            self.resolution,
        )
    }
}

/// Which linear decoder feeds the S-FT and the `linear` column of `decode`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DecoderChoice {
    /// Fitted by the tuner for the encoder's range.
    #[default]
    Fitted,
    /// `t_lin_min = f(u_max)`, `t_lin_max = f(u_min)`.
    Endpoint,
    Explicit { t_lin_min: f64, t_lin_max: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SftSection {
    pub frame_size: usize,
    pub decoder: DecoderChoice,
    /// Frequencies of `sft-sweep`, Hz.
    pub frequencies: Vec<f64>,
}

impl Default for SftSection {
    fn default() -> Self {
        Self {
            frame_size: 128,
            decoder: DecoderChoice::Fitted,
            frequencies: SWEEP_FREQUENCIES.to_vec(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub u_min: f64,
    pub u_th: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct TunerSection {
    #[serde(flatten)]
    pub settings: TunerConfig,
    /// Extra `(u_min, u_th)` variants fitted by `tune`; empty means the
    /// encoder section alone.
    pub scenarios: Vec<Scenario>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub encoder: EncoderSection,
    pub noise: Option<ThermalNoiseModel>,
    pub tuner: TunerSection,
    pub sft: SftSection,
    pub signal: Option<AnalogSignal>,
}

impl RunConfig {
    /// Reads a config file, or the defaults when `path` is `None`.
    pub fn load(path: Option<&Path>) -> anyhow::Result<Self> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }

    /// Seeds every random component.
    pub fn with_seed(mut self, seed: u64) -> Self {
        if let Some(noise) = &mut self.noise {
            noise.seed = seed;
        }
        self.tuner.settings.seed = seed;
        self
    }

    pub fn seed(&self) -> u64 {
        self.noise.map_or(self.tuner.settings.seed, |n| n.seed)
    }

    pub fn encoder_config(&self) -> anyhow::Result<EncoderConfig> {
        self.encoder.build().context("invalid [encoder] section")
    }

    pub fn encode_options(&self, cfg: &EncoderConfig) -> anyhow::Result<EncodeOptions> {
        if let Some(noise) = &self.noise {
            noise.validate(cfg).context("invalid [noise] section")?;
        }
        Ok(EncodeOptions {
            noise: self.noise,
            coupling: self.encoder.coupling,
        })
    }

    pub fn signal(&self) -> anyhow::Result<&AnalogSignal> {
        let Some(signal) = &self.signal else {
            bail!("this command needs a [signal] section");
        };
        signal.validate().context("invalid [signal] section")?;
        Ok(signal)
    }

    /// Checks every section that does not depend on the subcommand.
    pub fn validate(&self) -> anyhow::Result<()> {
        let cfg = self.encoder_config()?;
        self.encode_options(&cfg)?;
        self.tuner.settings.validate().context("invalid [tuner] section")?;
        if self.sft.frame_size < 2 {
            bail!("invalid [sft] section: frame_size must be at least 2");
        }
        if self.sft.frequencies.iter().any(|f| !(f.is_finite() && *f > 0.0)) {
            bail!("invalid [sft] section: frequencies must be finite and > 0");
        }
        if let DecoderChoice::Explicit { t_lin_min, t_lin_max } = self.sft.decoder {
            LinearDecoderParams::new(t_lin_min, t_lin_max, cfg.u_min, cfg.u_max)
                .context("invalid [sft] decoder")?;
        }
        if let Some(signal) = &self.signal {
            signal.validate().context("invalid [signal] section")?;
        }
        Ok(())
    }
}

/// Replaces the frequency of a sine signal.
pub fn retune(signal: &AnalogSignal, frequency: f64) -> anyhow::Result<AnalogSignal> {
    let Waveform::Sine(spec) = signal.waveform else {
        bail!("a frequency sweep needs a sine [signal]");
    };
    let spec = ase_core::SineSpec::new(spec.amplitude, frequency, spec.offset)?;
    Ok(AnalogSignal::new(Waveform::Sine(spec), signal.duration)?)
}
