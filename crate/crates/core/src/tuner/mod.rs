//! Fitting a linear phase decoder to the encoder's logarithmic spike-time map.
//!
//! The decoder time limits are parameterized relative to the encoder's own
//! range as `t_lin_min = t_min (1 + k1)` and `t_lin_max = t_max (1 + k2)`,
//! and `(k1, k2)` is searched by differential evolution to minimize
//! `alpha * eps_lin - mu`.

mod de;

pub use de::{differential_evolution, DeConfig, DeResult};

use serde::{Deserialize, Serialize};

use crate::codec::{decode_linear, raw_spike_time, timing_summary, EncoderConfig, LinearDecoderParams};
use crate::error::{config_err, input_err, Result};

fn default_alpha() -> f64 {
    1.0
}
fn default_k_bounds() -> (f64, f64) {
    (-1.0, 2.0)
}
fn default_population() -> usize {
    DeConfig::default().population
}
fn default_mutation() -> f64 {
    DeConfig::default().mutation
}
fn default_crossover() -> f64 {
    DeConfig::default().crossover
}
fn default_generations() -> usize {
    DeConfig::default().generations
}
fn default_grid_points() -> usize {
    1024
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TunerConfig {
    /// Weight of the linear error against the time ratio.
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    /// Search interval shared by `k1` and `k2`.
    #[serde(default = "default_k_bounds")]
    pub k_bounds: (f64, f64),
    #[serde(default = "default_population")]
    pub population: usize,
    #[serde(default = "default_mutation")]
    pub mutation: f64,
    #[serde(default = "default_crossover")]
    pub crossover: f64,
    #[serde(default = "default_generations")]
    pub generations: usize,
    #[serde(default)]
    pub seed: u64,
    /// Trapezoid points for the `eps_lin` integral.
    #[serde(default = "default_grid_points")]
    pub grid_points: usize,
    /// When set, each threshold is tried in turn and the lowest loss wins.
    /// Otherwise the configuration's own threshold is kept.
    #[serde(default)]
    pub threshold_candidates: Option<Vec<f64>>,
}

impl Default for TunerConfig {
    fn default() -> Self {
        Self {
            alpha: default_alpha(),
            k_bounds: default_k_bounds(),
            population: default_population(),
            mutation: default_mutation(),
            crossover: default_crossover(),
            generations: default_generations(),
            seed: 0,
            grid_points: default_grid_points(),
            threshold_candidates: None,
        }
    }
}

impl TunerConfig {
    pub fn de_config(&self) -> DeConfig {
        DeConfig {
            population: self.population,
            mutation: self.mutation,
            crossover: self.crossover,
            generations: self.generations,
            seed: self.seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha.is_finite() && self.alpha >= 0.0) {
            return Err(config_err("alpha must be finite and >= 0"));
        }
        let (lo, hi) = self.k_bounds;
        if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
            return Err(config_err("k_bounds must be a finite interval"));
        }
        if lo < -1.0 {
            return Err(config_err("k_bounds must not go below -1 (negative decoder times)"));
        }
        if self.grid_points < 2 {
            return Err(config_err("grid_points must be at least 2"));
        }
        if matches!(&self.threshold_candidates, Some(c) if c.is_empty()) {
            return Err(config_err("threshold_candidates must not be empty when given"));
        }
        self.de_config().validate()
    }
}

/// `integral over [lo, hi] of |y - decode(encode(y))| dy`, composite trapezoid
/// on `grid_points` equally spaced nodes.
pub fn integrated_error<E, D>(range: (f64, f64), encode: E, decode: D, grid_points: usize) -> Result<f64>
where
    E: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
{
    if grid_points < 2 {
        return Err(input_err("integration grid needs at least 2 points"));
    }
    let (lo, hi) = range;
    let h = (hi - lo) / (grid_points - 1) as f64;
    let err = |y: f64| (y - decode(encode(y))).abs();
    let interior: f64 = (1..grid_points - 1).map(|i| err(lo + i as f64 * h)).sum();
    Ok(h * (0.5 * (err(lo) + err(hi)) + interior))
}

/// Integrated mismatch between the input and its encode-then-linear-decode
/// reconstruction over `[u_min, u_max]`, in V^2.
pub fn linear_error(cfg: &EncoderConfig, p: &LinearDecoderParams, grid_points: usize) -> Result<f64> {
    integrated_error(
        (cfg.u_min, cfg.u_max),
        |y| raw_spike_time(y, cfg.u_th, cfg.tau),
        |t| decode_linear(t, p),
        grid_points,
    )
}

/// `alpha * eps_lin - mu`.
pub fn loss(cfg: &EncoderConfig, p: &LinearDecoderParams, alpha: f64, grid_points: usize) -> Result<f64> {
    Ok(alpha * linear_error(cfg, p, grid_points)? - timing_summary(cfg).mu)
}

/// Decoder with time limits `t_min (1 + k1)` and `t_max (1 + k2)`.
pub fn decoder_from_k(cfg: &EncoderConfig, k1: f64, k2: f64) -> Result<LinearDecoderParams> {
    let t_min = raw_spike_time(cfg.u_max, cfg.u_th, cfg.tau);
    let t_max = raw_spike_time(cfg.u_min, cfg.u_th, cfg.tau);
    LinearDecoderParams::new(t_min * (1.0 + k1), t_max * (1.0 + k2), cfg.u_min, cfg.u_max)
}

/// Fitted linear decoder and its scores.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuningResult {
    pub k1: f64,
    pub k2: f64,
    pub t_lin_min: f64,
    pub t_lin_max: f64,
    pub eps_lin: f64,
    pub mu: f64,
    pub loss: f64,
    pub alpha: f64,
    /// Encoder the decoder was fitted for (with the chosen threshold).
    pub config: EncoderConfig,
    pub seed: u64,
}

impl TuningResult {
    pub fn decoder(&self) -> LinearDecoderParams {
        LinearDecoderParams {
            t_lin_min: self.t_lin_min,
            t_lin_max: self.t_lin_max,
            y_min: self.config.u_min,
            y_max: self.config.u_max,
        }
    }
}

fn fit_fixed_threshold(cfg: &EncoderConfig, tc: &TunerConfig) -> Result<TuningResult> {
    let objective = |k: &[f64]| match decoder_from_k(cfg, k[0], k[1]) {
        Ok(p) => loss(cfg, &p, tc.alpha, tc.grid_points).unwrap_or(f64::INFINITY),
        Err(_) => f64::INFINITY,
    };
    let result = differential_evolution(objective, &[tc.k_bounds; 2], &tc.de_config())?;
    let (mut k1, mut k2, mut best) = (result.best[0], result.best[1], result.best_value);
    // never do worse than plain endpoint interpolation when it is admissible
    let (lo, hi) = tc.k_bounds;
    if lo <= 0.0 && 0.0 <= hi {
        let endpoint = objective(&[0.0, 0.0]);
        if endpoint < best {
            (k1, k2, best) = (0.0, 0.0, endpoint);
        }
    }
    let p = decoder_from_k(cfg, k1, k2)?;
    Ok(TuningResult {
        k1,
        k2,
        t_lin_min: p.t_lin_min,
        t_lin_max: p.t_lin_max,
        eps_lin: linear_error(cfg, &p, tc.grid_points)?,
        mu: timing_summary(cfg).mu,
        loss: best,
        alpha: tc.alpha,
        config: *cfg,
        seed: tc.seed,
    })
}

/// Fits `(k1, k2)` for `cfg`, optionally also choosing the threshold from
/// `tc.threshold_candidates`. Deterministic for a fixed seed.
pub fn fit_linear_decoder(cfg: &EncoderConfig, tc: &TunerConfig) -> Result<TuningResult> {
    cfg.validate()?;
    tc.validate()?;
    let Some(candidates) = &tc.threshold_candidates else {
        return fit_fixed_threshold(cfg, tc);
    };
    let mut best: Option<TuningResult> = None;
    for &u_th in candidates {
        let Ok(candidate_cfg) = cfg.with_threshold(u_th) else {
            continue;
        };
        let fit = fit_fixed_threshold(&candidate_cfg, tc)?;
        if best.as_ref().is_none_or(|b| fit.loss < b.loss) {
            best = Some(fit);
        }
    }
    best.ok_or_else(|| config_err("no threshold candidate yields a valid encoder configuration"))
}
