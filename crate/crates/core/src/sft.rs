//! Spiking Fourier transform over phase-coded input frames.
//!
//! Each output bin owns four integrate-without-leak neurons: a positive and
//! a negative one for the real part and the same for the imaginary part.
//!
//! * Charge phase, length `T_c`: input spike `n` arriving at `t_n` injects a
//!   constant current `w[k][n]` until the phase ends, leaving the membrane at
//!   `sum_n w[k][n] (T_c - t_n)`. The negative neuron uses `-w`. Both are
//!   floored at rest before readout.
//! * Readout phase, length `T_r`: every neuron receives the same constant
//!   current and fires when it reaches threshold, so its spike time is an
//!   affine, decreasing function of its charged membrane.
//!
//! Decoding the readout spikes and undoing the linear input code recovers the
//! DFT of the linearly decoded input values `y_n = g^-1(t_n)`.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circuit::SpikeTrain;
use crate::codec::{EncoderConfig, LinearDecoderParams};
use crate::error::{config_err, input_err, Result};

/// Real DFT kernels: `cos(2 pi k n / K)` and `-sin(2 pi k n / K)`, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DftWeights {
    size: usize,
    cos: Vec<f64>,
    neg_sin: Vec<f64>,
}

impl DftWeights {
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn cos(&self, k: usize, n: usize) -> f64 {
        self.cos[k * self.size + n]
    }

    pub fn neg_sin(&self, k: usize, n: usize) -> f64 {
        self.neg_sin[k * self.size + n]
    }

    pub fn cos_row(&self, k: usize) -> &[f64] {
        &self.cos[k * self.size..(k + 1) * self.size]
    }

    pub fn neg_sin_row(&self, k: usize) -> &[f64] {
        &self.neg_sin[k * self.size..(k + 1) * self.size]
    }
}

/// `(cos, sin)` of `2 pi r / size`, exact on quarter turns.
fn unit_root(r: usize, size: usize) -> (f64, f64) {
    if (4 * r).is_multiple_of(size) {
        return [(1.0, 0.0), (0.0, 1.0), (-1.0, 0.0), (0.0, -1.0)][4 * r / size];
    }
    let angle = TAU * r as f64 / size as f64;
    (angle.cos(), angle.sin())
}

pub fn dft_weights(size: usize) -> Result<DftWeights> {
    if size < 2 {
        return Err(input_err("DFT size must be at least 2"));
    }
    let mut cos = Vec::with_capacity(size * size);
    let mut neg_sin = Vec::with_capacity(size * size);
    for k in 0..size {
        for n in 0..size {
            let (c, s) = unit_root(k * n % size, size);
            cos.push(c);
            neg_sin.push(-s);
        }
    }
    Ok(DftWeights { size, cos, neg_sin })
}

/// Complex DFT coefficients (unnormalized) with bin-frequency metadata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub coefficients: Vec<Complex64>,
    pub sample_period: f64,
}

impl Spectrum {
    pub fn new(coefficients: Vec<Complex64>, sample_period: f64) -> Self {
        Self {
            coefficients,
            sample_period,
        }
    }

    pub fn len(&self) -> usize {
        self.coefficients.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coefficients.is_empty()
    }

    /// `k / (K T_S)` in Hz.
    pub fn bin_frequency(&self, k: usize) -> f64 {
        k as f64 / (self.len() as f64 * self.sample_period)
    }

    pub fn magnitude(&self, k: usize) -> f64 {
        self.coefficients[k].norm()
    }

    pub fn magnitudes(&self) -> Vec<f64> {
        self.coefficients.iter().map(|c| c.norm()).collect()
    }

    /// Bin nearest to `freq_hz`.
    pub fn bin_of(&self, freq_hz: f64) -> usize {
        let k = (freq_hz * self.len() as f64 * self.sample_period).round() as usize;
        k.min(self.len() - 1)
    }

    /// Largest-magnitude bin in `1..=K/2` (DC excluded).
    pub fn peak_bin(&self) -> usize {
        (1..=self.len() / 2)
            .max_by(|&a, &b| self.magnitude(a).total_cmp(&self.magnitude(b)))
            .unwrap_or(0)
    }
}

/// Root mean squared difference between two spectra of equal size, with
/// coefficients normalized by the frame size so the result is in signal units.
pub fn spectrum_rmse(a: &Spectrum, b: &Spectrum) -> Result<f64> {
    if a.len() != b.len() || a.is_empty() {
        return Err(input_err(format!(
            "spectra must have the same non-zero size (got {} and {})",
            a.len(),
            b.len()
        )));
    }
    let k = a.len() as f64;
    let sum: f64 = a
        .coefficients
        .iter()
        .zip(&b.coefficients)
        .map(|(x, y)| ((x - y) / k).norm_sqr())
        .sum();
    Ok((sum / k).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SftConfig {
    /// Windows per frame, `K`.
    pub frame_size: usize,
    /// Linear code assumed for the input spikes.
    pub decoder: LinearDecoderParams,
    /// Sampling period of the input frame, for bin frequencies.
    pub sample_period: f64,
    /// Duration of one phase step.
    pub time_step: f64,
    pub charge_phase_steps: u32,
    pub readout_phase_steps: u32,
}

impl SftConfig {
    /// Phase steps of one reader tick. The charge phase covers the sampling
    /// window and the decoder's silent-input time `t_lin_max`.
    pub fn for_encoder(cfg: &EncoderConfig, decoder: LinearDecoderParams, frame_size: usize) -> Self {
        let n = cfg.resolution();
        let silent_steps = (decoder.t_lin_max / cfg.reader_period).ceil();
        let charge = if silent_steps.is_finite() && silent_steps > f64::from(n) {
            silent_steps as u32
        } else {
            n
        };
        Self {
            frame_size,
            decoder,
            sample_period: cfg.sample_period,
            time_step: cfg.reader_period,
            charge_phase_steps: charge,
            readout_phase_steps: n,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.frame_size < 2 {
            return Err(config_err("S-FT frame size must be at least 2"));
        }
        if self.charge_phase_steps == 0 || self.readout_phase_steps == 0 {
            return Err(config_err("S-FT phase step counts must be at least 1"));
        }
        if !(self.time_step.is_finite() && self.time_step > 0.0) {
            return Err(config_err("S-FT time step must be finite and > 0"));
        }
        if !(self.sample_period.is_finite() && self.sample_period > 0.0) {
            return Err(config_err("S-FT sample period must be finite and > 0"));
        }
        self.decoder.validate()?;
        if self.decoder.t_lin_max > self.charge_duration() {
            return Err(config_err(
                "charge phase ends before t_lin_max; silent inputs could not be charged",
            ));
        }
        Ok(())
    }

    pub fn charge_duration(&self) -> f64 {
        f64::from(self.charge_phase_steps) * self.time_step
    }

    pub fn readout_duration(&self) -> f64 {
        f64::from(self.readout_phase_steps) * self.time_step
    }
}

/// Readout spike times of one bin's four neurons, relative to readout onset.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BinSpikes {
    pub re_pos: f64,
    pub re_neg: f64,
    pub im_pos: f64,
    pub im_neg: f64,
}

/// Output of one frame: the readout spikes of every bin.
#[derive(Debug, Clone, PartialEq)]
pub struct SftReadout {
    pub bins: Vec<BinSpikes>,
}

/// S-FT network with its weights built once for a frame size.
#[derive(Debug, Clone)]
pub struct SpikingFourier {
    cfg: SftConfig,
    weights: DftWeights,
    row_sums: Vec<(f64, f64)>,
    threshold: f64,
    readout_current: f64,
}

impl SpikingFourier {
    pub fn new(cfg: SftConfig) -> Result<Self> {
        cfg.validate()?;
        let weights = dft_weights(cfg.frame_size)?;
        let row_sums = (0..cfg.frame_size)
            .map(|k| {
                (
                    weights.cos_row(k).iter().sum(),
                    weights.neg_sin_row(k).iter().sum(),
                )
            })
            .collect();
        // |w| <= 1, so no membrane can exceed K * T_c
        let threshold = cfg.frame_size as f64 * cfg.charge_duration();
        Ok(Self {
            cfg,
            weights,
            row_sums,
            threshold,
            readout_current: threshold / cfg.readout_duration(),
        })
    }

    pub fn config(&self) -> &SftConfig {
        &self.cfg
    }

    fn fire_time(&self, membrane: f64) -> f64 {
        (self.threshold - membrane.max(0.0)) / self.readout_current
    }

    fn membrane_at(&self, fire_time: f64) -> f64 {
        self.threshold - self.readout_current * fire_time
    }

    /// Runs the charge and readout phases on one frame of input spike times.
    /// Silent windows (`None`) are fed as spikes at `t_lin_max`.
    pub fn run(&self, spikes: &[Option<f64>]) -> Result<SftReadout> {
        let k_size = self.cfg.frame_size;
        if spikes.len() != k_size {
            return Err(input_err(format!(
                "frame needs {k_size} spike entries, got {}",
                spikes.len()
            )));
        }
        let t_c = self.cfg.charge_duration();
        let charge: Vec<f64> = spikes
            .iter()
            .map(|s| s.unwrap_or(self.cfg.decoder.t_lin_max))
            .map(|t| {
                if !(t.is_finite() && t >= 0.0) {
                    Err(input_err(format!("spike time {t} is not a finite non-negative value")))
                } else if t > t_c {
                    Err(input_err(format!(
                        "spike at {t:e} s arrives after the charge phase ends ({t_c:e} s)"
                    )))
                } else {
                    Ok(t_c - t)
                }
            })
            .collect::<Result<_>>()?;
        let bins = (0..k_size)
            .map(|k| {
                let dot = |row: &[f64]| row.iter().zip(&charge).map(|(w, c)| w * c).sum::<f64>();
                let re = dot(self.weights.cos_row(k));
                let im = dot(self.weights.neg_sin_row(k));
                BinSpikes {
                    re_pos: self.fire_time(re),
                    re_neg: self.fire_time(-re),
                    im_pos: self.fire_time(im),
                    im_neg: self.fire_time(-im),
                }
            })
            .collect();
        Ok(SftReadout { bins })
    }

    /// Turns readout spikes back into DFT coefficients of the decoded inputs.
    pub fn decode(&self, readout: &SftReadout) -> Spectrum {
        let p = &self.cfg.decoder;
        let slope = p.slope();
        // charge of input n is y_n / slope + offset
        let offset = self.cfg.charge_duration() - p.t_lin_min - p.y_max / slope;
        let coefficients = readout
            .bins
            .iter()
            .zip(&self.row_sums)
            .map(|(b, &(re_sum, im_sum))| {
                let re = self.membrane_at(b.re_pos) - self.membrane_at(b.re_neg);
                let im = self.membrane_at(b.im_pos) - self.membrane_at(b.im_neg);
                Complex64::new(slope * (re - offset * re_sum), slope * (im - offset * im_sum))
            })
            .collect();
        Spectrum::new(coefficients, self.cfg.sample_period)
    }

    pub fn transform(&self, spikes: &[Option<f64>]) -> Result<Spectrum> {
        Ok(self.decode(&self.run(spikes)?))
    }
}

/// Spectrum of one frame of `K` phase-coded spike times.
pub fn sft_frame(spikes: &[Option<f64>], cfg: &SftConfig) -> Result<Spectrum> {
    SpikingFourier::new(*cfg)?.transform(spikes)
}

/// Spectra of consecutive frames of `train`, starting every `hop` windows.
pub fn sft_stream(train: &SpikeTrain, cfg: &SftConfig, hop: usize) -> Result<Vec<Spectrum>> {
    if hop == 0 {
        return Err(input_err("hop must be at least 1"));
    }
    let k = cfg.frame_size;
    if train.len() < k {
        return Err(input_err(format!(
            "spike train has {} windows, fewer than the frame size {k}",
            train.len()
        )));
    }
    let network = SpikingFourier::new(*cfg)?;
    let times = train.spike_times();
    let starts: Vec<usize> = (0..=train.len() - k).step_by(hop).collect();
    starts
        .into_par_iter()
        .map(|s| network.transform(&times[s..s + k]))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn size_two_weights() {
        let w = dft_weights(2).unwrap();
        assert_eq!(w.cos_row(0), &[1.0, 1.0]);
        assert_eq!(w.cos_row(1), &[1.0, -1.0]);
        assert!(w.neg_sin.iter().all(|v| *v == 0.0));
        assert!(dft_weights(1).is_err());
    }

    #[test]
    fn size_four_kernel_entry() {
        let w = dft_weights(4).unwrap();
        assert!(w.cos(1, 1).abs() < 1e-15);
        assert!((w.neg_sin(1, 1) + 1.0).abs() < 1e-15);
    }

    #[test]
    fn non_dc_rows_sum_to_zero() {
        for size in [3, 8, 17, 128] {
            let w = dft_weights(size).unwrap();
            for k in 1..size {
                assert!(w.cos_row(k).iter().sum::<f64>().abs() < 1e-12);
                assert!(w.neg_sin_row(k).iter().sum::<f64>().abs() < 1e-12);
            }
        }
    }

    fn test_cfg(k: usize) -> SftConfig {
        SftConfig {
            frame_size: k,
            decoder: LinearDecoderParams::new(20e-6, 300e-6, 1.0, 5.0).unwrap(),
            sample_period: 1.0 / 3000.0,
            time_step: 1.0 / 300_000.0,
            charge_phase_steps: 100,
            readout_phase_steps: 100,
        }
    }

    #[test]
    fn constant_frame_is_dc_only() {
        let cfg = test_cfg(16);
        let spec = sft_frame(&[Some(120e-6); 16], &cfg).unwrap();
        let dc = spec.magnitude(0);
        assert!(dc > 0.0);
        assert!((1..16).all(|k| spec.magnitude(k) < 1e-9 * dc));
    }

    #[test]
    fn readout_spikes_stay_in_readout_phase() {
        let cfg = test_cfg(8);
        let net = SpikingFourier::new(cfg).unwrap();
        let frame: Vec<Option<f64>> = (0..8).map(|n| Some(20e-6 + 35e-6 * n as f64)).collect();
        let out = net.run(&frame).unwrap();
        let t_r = cfg.readout_duration();
        for b in &out.bins {
            for t in [b.re_pos, b.re_neg, b.im_pos, b.im_neg] {
                assert!((0.0..=t_r).contains(&t), "{t}");
            }
            // at most one neuron of a pair carries charge
            assert!(b.re_pos == t_r || b.re_neg == t_r);
        }
    }

    #[test]
    fn silent_window_reads_as_smallest_value() {
        let cfg = test_cfg(4);
        let a = sft_frame(&[Some(100e-6), None, Some(50e-6), Some(80e-6)], &cfg).unwrap();
        let b = sft_frame(&[Some(100e-6), Some(300e-6), Some(50e-6), Some(80e-6)], &cfg).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn bad_frames_rejected() {
        let cfg = test_cfg(4);
        assert!(sft_frame(&[Some(1e-5); 3], &cfg).is_err());
        assert!(sft_frame(&[Some(1e-5), Some(1e-5), Some(1e-5), Some(1.0)], &cfg).is_err());
        assert!(sft_frame(&[Some(-1e-5), Some(1e-5), Some(1e-5), Some(1e-5)], &cfg).is_err());
        let short_charge = SftConfig {
            charge_phase_steps: 50,
            ..cfg
        };
        assert!(short_charge.validate().is_err());
    }

    #[test]
    fn spectrum_metadata() {
        let s = Spectrum::new(vec![Complex64::new(0.0, 0.0); 120], 1.0 / 3000.0);
        assert!((s.bin_frequency(20) - 500.0).abs() < 1e-9);
        assert_eq!(s.bin_of(1000.0), 40);
        assert!(spectrum_rmse(&s, &s).unwrap() == 0.0);
        let t = Spectrum::new(vec![Complex64::new(120.0, 0.0); 120], 1.0 / 3000.0);
        assert!((spectrum_rmse(&s, &t).unwrap() - 1.0).abs() < 1e-12);
    }
}
