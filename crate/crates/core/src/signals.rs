//! Test signals and the ideal-ADC reference spectrum.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{config_err, input_err, Result};
use crate::sft::Spectrum;

/// `h(t) = amplitude * sin(2 pi frequency t) + offset`, zero phase at `t = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SineSpec {
    pub amplitude: f64,
    pub frequency: f64,
    pub offset: f64,
}

impl SineSpec {
    pub fn new(amplitude: f64, frequency: f64, offset: f64) -> Result<Self> {
        let s = Self {
            amplitude,
            frequency,
            offset,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.amplitude.is_finite() && self.frequency.is_finite() && self.offset.is_finite()) {
            return Err(config_err("sine parameters must be finite"));
        }
        if self.amplitude < 0.0 {
            return Err(config_err("sine amplitude must be >= 0"));
        }
        if self.frequency <= 0.0 {
            return Err(config_err("sine frequency must be > 0"));
        }
        if self.offset - self.amplitude < 0.0 {
            return Err(config_err("sine must stay non-negative (offset >= amplitude)"));
        }
        Ok(())
    }

    pub fn value_at(&self, t: f64) -> f64 {
        self.amplitude * (TAU * self.frequency * t).sin() + self.offset
    }

    /// `(offset - amplitude, offset + amplitude)`.
    pub fn range(&self) -> (f64, f64) {
        (self.offset - self.amplitude, self.offset + self.amplitude)
    }
}

/// Shape of an [`AnalogSignal`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Waveform {
    Constant { level: f64 },
    Sine(SineSpec),
    /// Sum of sines; offsets add.
    MultiSine { components: Vec<SineSpec> },
    /// Uniformly sampled values, linearly interpolated, held at the last sample.
    Samples { dt: f64, values: Vec<f64> },
}

/// A real-valued input voltage `u_in(t)` on `[0, duration]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalogSignal {
    pub waveform: Waveform,
    pub duration: f64,
}

impl AnalogSignal {
    pub fn new(waveform: Waveform, duration: f64) -> Result<Self> {
        let s = Self { waveform, duration };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.duration.is_finite() && self.duration > 0.0) {
            return Err(input_err("signal duration must be finite and > 0"));
        }
        match &self.waveform {
            Waveform::Constant { level } if !level.is_finite() => {
                Err(input_err("constant level must be finite"))
            }
            Waveform::Sine(s) => s.validate(),
            Waveform::MultiSine { components } => {
                if components.is_empty() {
                    return Err(input_err("multi-sine needs at least one component"));
                }
                components.iter().try_for_each(SineSpec::validate)
            }
            Waveform::Samples { dt, values } => {
                if !(dt.is_finite() && *dt > 0.0) {
                    return Err(input_err("sample spacing must be finite and > 0"));
                }
                if values.is_empty() {
                    return Err(input_err("sampled signal is empty"));
                }
                if values.iter().any(|v| !v.is_finite()) {
                    return Err(input_err("sampled signal contains non-finite values"));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    pub fn value_at(&self, t: f64) -> f64 {
        match &self.waveform {
            Waveform::Constant { level } => *level,
            Waveform::Sine(s) => s.value_at(t),
            Waveform::MultiSine { components } => components.iter().map(|s| s.value_at(t)).sum(),
            Waveform::Samples { dt, values } => {
                let x = (t / dt).max(0.0);
                let i = x.floor() as usize;
                if i + 1 >= values.len() {
                    return values[values.len() - 1];
                }
                let frac = x - i as f64;
                values[i] + frac * (values[i + 1] - values[i])
            }
        }
    }

    /// Values at `t = m * period` for `m = 0..count`.
    pub fn sample(&self, period: f64, count: usize) -> Vec<f64> {
        (0..count).map(|m| self.value_at(m as f64 * period)).collect()
    }
}

pub fn sine(spec: SineSpec, duration: f64) -> Result<AnalogSignal> {
    AnalogSignal::new(Waveform::Sine(spec), duration)
}

pub fn constant(level: f64, duration: f64) -> Result<AnalogSignal> {
    AnalogSignal::new(Waveform::Constant { level }, duration)
}

/// Spectrum of `count` exact samples of `sig` taken every `sample_period`,
/// as an ideal ADC followed by an FFT would produce.
pub fn ideal_adc_fft(sig: &AnalogSignal, sample_period: f64, count: usize) -> Result<Spectrum> {
    if count < 2 {
        return Err(input_err("need at least two samples"));
    }
    let last = (count - 1) as f64 * sample_period;
    if last > sig.duration {
        return Err(input_err(format!(
            "{count} samples at {sample_period:e} s do not fit in a {:e} s signal",
            sig.duration
        )));
    }
    let mut buf: Vec<Complex64> = sig
        .sample(sample_period, count)
        .into_iter()
        .map(|v| Complex64::new(v, 0.0))
        .collect();
    FftPlanner::new().plan_fft_forward(count).process(&mut buf);
    Ok(Spectrum::new(buf, sample_period))
}
