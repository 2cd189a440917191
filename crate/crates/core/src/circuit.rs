//! Behavioral simulation of one encoder channel.
//!
//! Each sampling window `[t_m, t_m + T_S)` starts with the membrane at rest.
//! The membrane charges toward the input, fires once on crossing the
//! threshold, and is then clamped to rest until the next sampling edge
//! (adaptive refractory period `T_S - t_s`). The reader registers the spike
//! on the first reader tick at or after the crossing, so a window yields a
//! bin `k = ceil(t_s / T_N)` in `1..=N`, or nothing.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::codec::{raw_spike_time, EncoderConfig};
use crate::error::{config_err, input_err, Result};
use crate::signals::AnalogSignal;

/// Relative slack when counting whole windows in a signal.
const WINDOW_COUNT_TOLERANCE: f64 = 1e-9;
/// Integration sub-steps per reader tick in tracking mode.
const TRACKING_SUBSTEPS: u32 = 16;
const BISECTION_ROUNDS: u32 = 60;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseMode {
    /// The full `delta_u` is added to the membrane in every window.
    Constant,
    /// A fresh offset uniform in `[0, delta_u)` per window.
    #[default]
    PerWindowRandom,
}

/// Additive membrane-voltage perturbation. A positive offset lowers the
/// effective threshold to `u_th - offset`, so spikes come earlier.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThermalNoiseModel {
    pub delta_u: f64,
    #[serde(default)]
    pub mode: NoiseMode,
    #[serde(default)]
    pub seed: u64,
}

impl ThermalNoiseModel {
    pub fn constant(delta_u: f64) -> Self {
        Self {
            delta_u,
            mode: NoiseMode::Constant,
            seed: 0,
        }
    }

    pub fn per_window(delta_u: f64, seed: u64) -> Self {
        Self {
            delta_u,
            mode: NoiseMode::PerWindowRandom,
            seed,
        }
    }

    pub fn validate(&self, cfg: &EncoderConfig) -> Result<()> {
        if !(self.delta_u.is_finite() && self.delta_u >= 0.0) {
            return Err(config_err("noise delta_u must be finite and >= 0"));
        }
        if self.delta_u >= cfg.u_th {
            return Err(config_err(format!(
                "noise delta_u ({}) must stay below u_th ({})",
                self.delta_u, cfg.u_th
            )));
        }
        Ok(())
    }

    /// Membrane offset applied in window `window`.
    ///
    /// The random mode draws from a ChaCha stream keyed by the window index,
    /// so the value does not depend on evaluation order.
    pub fn offset_for_window(&self, window: u64) -> f64 {
        match self.mode {
            NoiseMode::Constant => self.delta_u,
            NoiseMode::PerWindowRandom => {
                let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
                rng.set_stream(window);
                self.delta_u * rng.random::<f64>()
            }
        }
    }
}

/// How the membrane sees the input during a window.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InputCoupling {
    /// The input is held at its value at the window start.
    #[default]
    SampleAndHold,
    /// The RC membrane integrates the time-varying input directly.
    Tracking,
}

/// Per-run encoder options beyond the configuration.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct EncodeOptions {
    pub noise: Option<ThermalNoiseModel>,
    #[serde(default)]
    pub coupling: InputCoupling,
}

fn noise_offset(noise: Option<&ThermalNoiseModel>, window: u64) -> f64 {
    noise.map_or(0.0, |n| n.offset_for_window(window))
}

/// Crossing time for a held input with the threshold lowered by `offset`.
pub fn held_crossing_time(u_in: f64, cfg: &EncoderConfig, offset: f64) -> Option<f64> {
    let threshold = cfg.u_th - offset;
    (u_in.is_finite() && u_in > threshold).then(|| raw_spike_time(u_in, threshold, cfg.tau))
}

/// Reader bin for a crossing at `t_s` after window onset.
///
/// An exact hit on a tick registers on that tick. Crossings after `T_S`
/// produce no spike.
pub fn register(t_s: f64, cfg: &EncoderConfig) -> Option<u32> {
    if t_s > cfg.sample_period {
        return None;
    }
    let n = cfg.resolution();
    let k = (t_s / cfg.reader_period).ceil().max(1.0);
    // t_s <= T_S but rounding pushed the quotient past N
    Some(if k > f64::from(n) { n } else { k as u32 })
}

/// Simulates one window with the input held at `u_in`.
///
/// `window` selects the noise draw in per-window random mode.
pub fn simulate_window(
    u_in: f64,
    cfg: &EncoderConfig,
    noise: Option<&ThermalNoiseModel>,
    window: u64,
) -> Option<u32> {
    held_crossing_time(u_in, cfg, noise_offset(noise, window)).and_then(|t| register(t, cfg))
}

fn rk4_step(sig: &AnalogSignal, t: f64, u: f64, h: f64, tau: f64) -> f64 {
    let rhs = |t: f64, u: f64| (sig.value_at(t) - u) / tau;
    let k1 = rhs(t, u);
    let k2 = rhs(t + 0.5 * h, u + 0.5 * h * k1);
    let k3 = rhs(t + 0.5 * h, u + 0.5 * h * k2);
    let k4 = rhs(t + h, u + h * k3);
    u + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
}

/// Crossing time for a window starting at `t_m` when the membrane follows
/// the live input (`tau du/dt + u = u_in(t)`), integrated with RK4 and
/// refined by bisection inside the crossing step.
pub fn tracking_crossing_time(
    sig: &AnalogSignal,
    t_m: f64,
    cfg: &EncoderConfig,
    offset: f64,
) -> Option<f64> {
    let threshold = cfg.u_th - offset;
    let h = cfg.reader_period / f64::from(TRACKING_SUBSTEPS);
    let steps = cfg.resolution() * TRACKING_SUBSTEPS;
    let mut u = EncoderConfig::U_REST;
    for i in 0..steps {
        let s = f64::from(i) * h;
        let next = rk4_step(sig, t_m + s, u, h, cfg.tau);
        if next >= threshold {
            let (mut lo, mut hi) = (0.0, h);
            for _ in 0..BISECTION_ROUNDS {
                let mid = 0.5 * (lo + hi);
                if rk4_step(sig, t_m + s, u, mid, cfg.tau) >= threshold {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            return Some(s + hi);
        }
        u = next;
    }
    None
}

/// Encoded output of a signal: one optional reader bin per sampling window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpikeTrain {
    pub config: EncoderConfig,
    /// `bins[m]` is the registered bin of window `m`, `None` for a silent window.
    pub bins: Vec<Option<u32>>,
    #[serde(default)]
    pub options: EncodeOptions,
}

impl SpikeTrain {
    pub fn new(config: EncoderConfig, bins: Vec<Option<u32>>, options: EncodeOptions) -> Result<Self> {
        let n = config.resolution();
        if let Some((m, k)) = bins
            .iter()
            .enumerate()
            .find_map(|(m, b)| b.filter(|k| *k == 0 || *k > n).map(|k| (m, k)))
        {
            return Err(input_err(format!("window {m}: bin {k} outside 1..={n}")));
        }
        Ok(Self {
            config,
            bins,
            options,
        })
    }

    pub fn len(&self) -> usize {
        self.bins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bins.is_empty()
    }

    /// Registered spike time `k * T_N` of window `m`, relative to its onset.
    pub fn registered_time(&self, m: usize) -> Option<f64> {
        self.bins[m].map(|k| f64::from(k) * self.config.reader_period)
    }

    pub fn spike_times(&self) -> Vec<Option<f64>> {
        (0..self.len()).map(|m| self.registered_time(m)).collect()
    }

    pub fn fired_count(&self) -> usize {
        self.bins.iter().filter(|b| b.is_some()).count()
    }
}

/// Number of whole sampling windows in `duration`.
pub fn window_count(duration: f64, cfg: &EncoderConfig) -> usize {
    (duration / cfg.sample_period * (1.0 + WINDOW_COUNT_TOLERANCE)).floor() as usize
}

/// Encodes `sig` window by window with the input sampled at each window start.
pub fn encode_signal(
    sig: &AnalogSignal,
    cfg: &EncoderConfig,
    noise: Option<&ThermalNoiseModel>,
) -> Result<SpikeTrain> {
    encode_signal_with(
        sig,
        cfg,
        &EncodeOptions {
            noise: noise.copied(),
            coupling: InputCoupling::SampleAndHold,
        },
    )
}

pub fn encode_signal_with(
    sig: &AnalogSignal,
    cfg: &EncoderConfig,
    options: &EncodeOptions,
) -> Result<SpikeTrain> {
    cfg.validate()?;
    sig.validate()?;
    if let Some(noise) = &options.noise {
        noise.validate(cfg)?;
    }
    let windows = window_count(sig.duration, cfg);
    if windows == 0 {
        return Err(input_err(format!(
            "signal of {:e} s is shorter than one sampling window ({:e} s)",
            sig.duration, cfg.sample_period
        )));
    }
    let noise = options.noise.as_ref();
    let bins = (0..windows)
        .into_par_iter()
        .map(|m| {
            let t_m = m as f64 * cfg.sample_period;
            match options.coupling {
                InputCoupling::SampleAndHold => {
                    simulate_window(sig.value_at(t_m), cfg, noise, m as u64)
                }
                InputCoupling::Tracking => {
                    let offset = noise_offset(noise, m as u64);
                    tracking_crossing_time(sig, t_m, cfg, offset).and_then(|t| register(t, cfg))
                }
            }
        })
        .collect();
    Ok(SpikeTrain {
        config: *cfg,
        bins,
        options: *options,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub t: f64,
    pub u: f64,
}

/// Membrane voltage over one window for a held input, sampled every `dt`.
///
/// Follows `U_in (1 - exp(-t / tau))` up to the crossing and rest afterwards.
/// The last point sits on the closing sampling edge, where the membrane is at rest.
pub fn membrane_trace(u_in: f64, cfg: &EncoderConfig, dt: f64) -> Result<Vec<TracePoint>> {
    if !(dt > 0.0 && dt <= cfg.reader_period) {
        return Err(input_err(format!(
            "trace step must be in (0, T_N] (got {dt:e}, T_N = {:e})",
            cfg.reader_period
        )));
    }
    if !u_in.is_finite() {
        return Err(input_err("input voltage must be finite"));
    }
    let crossing = held_crossing_time(u_in, cfg, 0.0);
    let steps = (cfg.sample_period / dt).floor() as usize;
    let mut trace: Vec<TracePoint> = (0..=steps)
        .map(|i| i as f64 * dt)
        .take_while(|&t| t < cfg.sample_period)
        .map(|t| {
            let refractory = crossing.is_some_and(|ts| t >= ts);
            let u = if refractory {
                EncoderConfig::U_REST
            } else {
                u_in * -(-t / cfg.tau).exp_m1()
            };
            TracePoint { t, u }
        })
        .collect();
    trace.push(TracePoint {
        t: cfg.sample_period,
        u: EncoderConfig::U_REST,
    });
    Ok(trace)
}
