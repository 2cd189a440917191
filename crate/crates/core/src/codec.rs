//! Closed-form encoding and decoding maps of the analog-to-spike encoder.
//!
//! A held input voltage `u_in` charges an RC membrane from rest. The spike
//! time is the threshold crossing of `u(t) = u_in (1 - exp(-t / tau))`:
//!
//! ```text
//! t_s = f(u_in) = -tau * ln(1 - u_th / u_in)
//! u_in = f^-1(t_s) = u_th / (1 - exp(-t_s / tau))
//! ```
//!
//! Everything here is pure arithmetic on `f64`. Quantization and noise live
//! in [`crate::circuit`] and [`crate::error_model`].

use serde::{Deserialize, Serialize};

use crate::error::{config_err, input_err, Error, Result};

/// Relative slack allowed when checking that `T_S / T_N` is an integer.
const RESOLUTION_TOLERANCE: f64 = 1e-9;

/// Parameters of one encoder channel. Voltages in volts, times in seconds.
///
/// The resting potential is fixed at [`EncoderConfig::U_REST`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EncoderConfig {
    /// Membrane time constant `RC`.
    pub tau: f64,
    /// Threshold voltage.
    pub u_th: f64,
    /// Lower end of the input working range.
    pub u_min: f64,
    /// Upper end of the input working range.
    pub u_max: f64,
    /// Sampling clock period `T_S`; one spike window per period.
    pub sample_period: f64,
    /// Reader clock period `T_N`; the spike-time quantum.
    pub reader_period: f64,
}

impl EncoderConfig {
    pub const U_REST: f64 = 0.0;

    /// Builds and validates a configuration.
    pub fn new(
        tau: f64,
        u_th: f64,
        u_min: f64,
        u_max: f64,
        sample_period: f64,
        reader_period: f64,
    ) -> Result<Self> {
        let cfg = Self {
            tau,
            u_th,
            u_min,
            u_max,
            sample_period,
            reader_period,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Builds a configuration from a sampling period and a resolution `N`,
    /// setting `T_N = T_S / N`.
    pub fn with_resolution(
        tau: f64,
        u_th: f64,
        u_min: f64,
        u_max: f64,
        sample_period: f64,
        resolution: u32,
    ) -> Result<Self> {
        if resolution == 0 {
            return Err(config_err("resolution N must be at least 1"));
        }
        Self::new(
            tau,
            u_th,
            u_min,
            u_max,
            sample_period,
            sample_period / f64::from(resolution),
        )
    }

    /// Checks every invariant and names the first violated one.
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("tau", self.tau),
            ("u_th", self.u_th),
            ("u_min", self.u_min),
            ("u_max", self.u_max),
            ("sample_period", self.sample_period),
            ("reader_period", self.reader_period),
        ];
        if let Some((name, _)) = fields.iter().find(|(_, v)| !v.is_finite()) {
            return Err(config_err(format!("{name} must be finite")));
        }
        if self.tau <= 0.0 {
            return Err(config_err("tau must be > 0"));
        }
        if self.sample_period <= 0.0 || self.reader_period <= 0.0 {
            return Err(config_err("sample_period and reader_period must be > 0"));
        }
        if !(0.0 < self.u_th && self.u_th < self.u_min && self.u_min < self.u_max) {
            return Err(config_err(format!(
                "voltages must satisfy 0 < u_th < u_min < u_max (got u_th={}, u_min={}, u_max={})",
                self.u_th, self.u_min, self.u_max
            )));
        }
        let ratio = self.sample_period / self.reader_period;
        let n = ratio.round();
        if n < 1.0 || (ratio - n).abs() > RESOLUTION_TOLERANCE * n {
            return Err(config_err(format!(
                "resolution N = sample_period / reader_period must be a positive integer (got {ratio})"
            )));
        }
        let t_max = raw_spike_time(self.u_min, self.u_th, self.tau);
        if t_max > self.sample_period {
            return Err(config_err(format!(
                "spike time of u_min ({t_max:e} s) exceeds sample_period ({:e} s)",
                self.sample_period
            )));
        }
        Ok(())
    }

    /// Spike-time resolution `N = T_S / T_N`.
    pub fn resolution(&self) -> u32 {
        (self.sample_period / self.reader_period).round() as u32
    }

    /// Returns a copy with a different threshold, validated.
    pub fn with_threshold(&self, u_th: f64) -> Result<Self> {
        let cfg = Self { u_th, ..*self };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Returns a copy with a different input range, validated.
    pub fn with_range(&self, u_min: f64, u_max: f64) -> Result<Self> {
        let cfg = Self {
            u_min,
            u_max,
            ..*self
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Outcome of encoding one held value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum SpikeTime {
    /// Crossing time in seconds since window onset.
    Fired(f64),
    /// The membrane never reaches threshold.
    NoSpike,
}

impl SpikeTime {
    pub fn time(self) -> Option<f64> {
        match self {
            SpikeTime::Fired(t) => Some(t),
            SpikeTime::NoSpike => None,
        }
    }

    pub fn is_fired(self) -> bool {
        matches!(self, SpikeTime::Fired(_))
    }
}

/// `-tau * ln(1 - threshold / u)` without argument checks. Callers ensure `u > threshold > 0`.
pub(crate) fn raw_spike_time(u: f64, threshold: f64, tau: f64) -> f64 {
    -tau * (-threshold / u).ln_1p()
}

/// Exact threshold-crossing time for a held input `u_in`.
///
/// Inputs at or below threshold never fire. The result is not clipped to
/// the sampling window; see [`crate::circuit::simulate_window`] for that.
pub fn encode_time(u_in: f64, cfg: &EncoderConfig) -> Result<SpikeTime> {
    if !u_in.is_finite() {
        return Err(input_err(format!("input voltage must be finite (got {u_in})")));
    }
    if u_in <= cfg.u_th {
        return Ok(SpikeTime::NoSpike);
    }
    Ok(SpikeTime::Fired(raw_spike_time(u_in, cfg.u_th, cfg.tau)))
}

/// Ideal decoder, the exact inverse of [`encode_time`].
///
/// `t_s = +inf` decodes to `u_th`.
pub fn decode_ideal(t_s: f64, cfg: &EncoderConfig) -> Result<f64> {
    if t_s.is_nan() || t_s <= 0.0 {
        return Err(Error::Domain(format!(
            "spike time must be > 0 for ideal decoding (got {t_s})"
        )));
    }
    // 1 - exp(-x) == -expm1(-x)
    Ok(cfg.u_th / -(-t_s / cfg.tau).exp_m1())
}

/// Affine phase code `g` and its inverse, mapping `[y_min, y_max]` onto
/// `[t_lin_max, t_lin_min]` (larger values spike earlier).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearDecoderParams {
    pub t_lin_min: f64,
    pub t_lin_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl LinearDecoderParams {
    pub fn new(t_lin_min: f64, t_lin_max: f64, y_min: f64, y_max: f64) -> Result<Self> {
        let p = Self {
            t_lin_min,
            t_lin_max,
            y_min,
            y_max,
        };
        p.validate()?;
        Ok(p)
    }

    /// Decoder spanning exactly the encoder's time range `[f(u_max), f(u_min)]`.
    pub fn endpoint(cfg: &EncoderConfig) -> Self {
        Self {
            t_lin_min: raw_spike_time(cfg.u_max, cfg.u_th, cfg.tau),
            t_lin_max: raw_spike_time(cfg.u_min, cfg.u_th, cfg.tau),
            y_min: cfg.u_min,
            y_max: cfg.u_max,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let all_finite = [self.t_lin_min, self.t_lin_max, self.y_min, self.y_max]
            .iter()
            .all(|v| v.is_finite());
        if !all_finite {
            return Err(config_err("linear decoder parameters must be finite"));
        }
        if self.t_lin_max <= self.t_lin_min {
            return Err(config_err(format!(
                "t_lin_max ({}) must exceed t_lin_min ({})",
                self.t_lin_max, self.t_lin_min
            )));
        }
        if self.y_max <= self.y_min {
            return Err(config_err(format!(
                "y_max ({}) must exceed y_min ({})",
                self.y_max, self.y_min
            )));
        }
        Ok(())
    }

    /// Value change per second of spike time, `(y_max - y_min) / (t_lin_max - t_lin_min)`.
    pub fn slope(&self) -> f64 {
        (self.y_max - self.y_min) / (self.t_lin_max - self.t_lin_min)
    }
}

/// Linear encoder `g(y)`. Extrapolates outside `[y_min, y_max]`.
pub fn encode_linear(y: f64, p: &LinearDecoderParams) -> f64 {
    p.t_lin_min + (p.y_max - y) / p.slope()
}

/// Linear decoder `g^-1(t)`. Extrapolates outside `[t_lin_min, t_lin_max]`.
pub fn decode_linear(t: f64, p: &LinearDecoderParams) -> f64 {
    p.y_max - p.slope() * (t - p.t_lin_min)
}

/// Waiting time, informative spike range and their ratio for a configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimingSummary {
    /// `f(u_max)`: earliest possible spike.
    pub t_wait: f64,
    /// `f(u_min) - f(u_max)`.
    pub t_spk: f64,
    /// `t_spk / t_wait`; does not depend on `tau`.
    pub mu: f64,
}

pub fn timing_summary(cfg: &EncoderConfig) -> TimingSummary {
    let t_wait = raw_spike_time(cfg.u_max, cfg.u_th, cfg.tau);
    let t_spk = raw_spike_time(cfg.u_min, cfg.u_th, cfg.tau) - t_wait;
    TimingSummary {
        t_wait,
        t_spk,
        mu: t_spk / t_wait,
    }
}
