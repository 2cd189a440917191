//! Analytic spike-time error predictors and empirical error metrics.

use serde::{Deserialize, Serialize};

use crate::codec::{decode_ideal, raw_spike_time, EncoderConfig};
use crate::error::{input_err, Error, Result};

/// Average registration delay of a uniformly distributed crossing phase, `T_N / 2`.
pub fn quantization_shift(cfg: &EncoderConfig) -> f64 {
    cfg.reader_period / 2.0
}

/// How much earlier a spike fires when `delta_u` is added to the membrane.
pub fn thermal_shift(u_in: f64, delta_u: f64, cfg: &EncoderConfig) -> Result<f64> {
    let lowered = cfg.u_th - delta_u;
    if lowered <= 0.0 {
        return Err(Error::Domain(format!(
            "u_th - delta_u must be > 0 (got {lowered})"
        )));
    }
    if delta_u < 0.0 {
        return Err(Error::Domain("delta_u must be >= 0".into()));
    }
    if u_in.is_nan() || u_in <= cfg.u_th {
        return Err(Error::Domain(format!(
            "input {u_in} V does not exceed u_th = {} V",
            cfg.u_th
        )));
    }
    Ok(raw_spike_time(u_in, cfg.u_th, cfg.tau) - raw_spike_time(u_in, lowered, cfg.tau))
}

/// Signed error `u - f^-1(t_s + T_N/2 - dt_thermal)` predicted for a held input.
///
/// Positive values mean the decoder under-reads (late spike).
pub fn predicted_decoding_error(u_in: f64, delta_u: f64, cfg: &EncoderConfig) -> Result<f64> {
    predicted_decoding_error_with_shift(u_in, delta_u, quantization_shift(cfg), cfg)
}

/// As [`predicted_decoding_error`] with an explicit quantization delay.
pub fn predicted_decoding_error_with_shift(
    u_in: f64,
    delta_u: f64,
    quant_shift: f64,
    cfg: &EncoderConfig,
) -> Result<f64> {
    let t_s = raw_spike_time(u_in, cfg.u_th, cfg.tau);
    let measured = t_s + quant_shift - thermal_shift(u_in, delta_u, cfg)?;
    Ok(u_in - decode_ideal(measured, cfg)?)
}

/// Error of a single decoded sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleError {
    pub u_in: f64,
    pub decoded: f64,
    /// `|u_in - decoded|`, volts.
    pub eps_u: f64,
    /// `|t_true - t_measured| / T_N`.
    pub eps_ts: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport {
    pub samples: Vec<SampleError>,
    pub mean_eps_u: f64,
    pub max_eps_u: f64,
    pub mean_eps_ts: f64,
    /// Root mean squared decoding error over all samples.
    pub rmse: f64,
}

/// Evaluates per-sample and aggregate errors of a decoded run.
pub fn empirical_errors(
    truth: &[f64],
    decoded: &[f64],
    spike_true: &[f64],
    spike_meas: &[f64],
    cfg: &EncoderConfig,
) -> Result<ErrorReport> {
    let m = truth.len();
    if m == 0 {
        return Err(input_err("need at least one sample"));
    }
    if decoded.len() != m || spike_true.len() != m || spike_meas.len() != m {
        return Err(input_err(format!(
            "length mismatch: truth {m}, decoded {}, spike_true {}, spike_meas {}",
            decoded.len(),
            spike_true.len(),
            spike_meas.len()
        )));
    }
    let samples: Vec<SampleError> = (0..m)
        .map(|i| SampleError {
            u_in: truth[i],
            decoded: decoded[i],
            eps_u: (truth[i] - decoded[i]).abs(),
            eps_ts: (spike_true[i] - spike_meas[i]).abs() / cfg.reader_period,
        })
        .collect();
    let n = m as f64;
    Ok(ErrorReport {
        mean_eps_u: samples.iter().map(|s| s.eps_u).sum::<f64>() / n,
        max_eps_u: samples.iter().map(|s| s.eps_u).fold(0.0, f64::max),
        mean_eps_ts: samples.iter().map(|s| s.eps_ts).sum::<f64>() / n,
        rmse: rmse(truth, decoded)?,
        samples,
    })
}

/// `sqrt(mean((a - b)^2))`.
pub fn rmse(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.is_empty() || a.len() != b.len() {
        return Err(input_err(format!(
            "rmse needs equal non-empty inputs (got {} and {})",
            a.len(),
            b.len()
        )));
    }
    let sum: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum();
    Ok((sum / a.len() as f64).sqrt())
}

/// Worst-case ideal-decoder error from one full reader tick of delay,
/// `|u - f^-1(f(u) + T_N)|`.
pub fn quantization_envelope(u_in: f64, cfg: &EncoderConfig) -> Result<f64> {
    let t = raw_spike_time(u_in, cfg.u_th, cfg.tau) + cfg.reader_period;
    Ok((u_in - decode_ideal(t, cfg)?).abs())
}

#[cfg(test)]
mod tests {
    use super::*;

    /// 3 kHz sampling, N = 100: T_N = 3.33 us.
    fn sft_cfg() -> EncoderConfig {
        EncoderConfig::with_resolution(3e-3, 0.1, 1.0, 5.0, 1.0 / 3000.0, 100).unwrap()
    }

    /// T_N = 1.48 us, the reader tick of the hardware setup.
    fn mcu_cfg() -> EncoderConfig {
        EncoderConfig::with_resolution(3e-3, 0.1, 1.0, 5.0, 444e-6, 300).unwrap()
    }

    #[test]
    fn quantization_shift_is_half_tick() {
        assert!((quantization_shift(&mcu_cfg()) - 0.74e-6).abs() < 1e-15);
        assert!((quantization_shift(&sft_cfg()) - 1.6667e-6).abs() < 1e-10);
    }

    #[test]
    fn thermal_shift_values() {
        let c = sft_cfg();
        // independent evaluation: 3 ms * (ln(0.91) - ln(0.9))
        let expected = 3e-3 * (0.91f64.ln() - 0.9f64.ln());
        let s1 = thermal_shift(1.0, 0.01, &c).unwrap();
        assert!((s1 - expected).abs() < 1e-15);
        assert!((s1 - 33.1e-6).abs() < 0.1e-6, "{s1}");
        let s5 = thermal_shift(5.0, 0.01, &c).unwrap();
        assert!((s5 - 6.1e-6).abs() < 0.1e-6, "{s5}");
        assert_eq!(thermal_shift(2.0, 0.0, &c).unwrap(), 0.0);
        assert!(thermal_shift(2.0, 0.1, &c).is_err());
        assert!(thermal_shift(0.05, 0.01, &c).is_err());
    }

    #[test]
    fn no_perturbation_no_error() {
        let c = sft_cfg();
        let e = predicted_decoding_error_with_shift(2.5, 0.0, 0.0, &c).unwrap();
        assert!(e.abs() < 1e-12);
    }

    #[test]
    fn large_noise_at_low_voltage_reads_high() {
        let c = mcu_cfg();
        let thermal = thermal_shift(1.05, 0.05, &c).unwrap();
        assert!(thermal > 100.0 * quantization_shift(&c));
        assert!(predicted_decoding_error(1.05, 0.05, &c).unwrap() < 0.0);
    }

    #[test]
    fn empirical_metrics() {
        let c = sft_cfg();
        let truth = [1.0, 2.0, 3.0];
        let r = empirical_errors(&truth, &truth, &[1e-4; 3], &[1e-4; 3], &c).unwrap();
        assert_eq!(r.rmse, 0.0);
        assert!(r.samples.iter().all(|s| s.eps_u == 0.0 && s.eps_ts == 0.0));
        let shifted: Vec<f64> = truth.iter().map(|u| u + 0.1).collect();
        let r = empirical_errors(&truth, &shifted, &[1e-4; 3], &[1e-4; 3], &c).unwrap();
        assert!((r.rmse - 0.1).abs() < 1e-12);
        assert!(empirical_errors(&truth, &shifted[..2], &[0.0; 3], &[0.0; 3], &c).is_err());
        assert!(empirical_errors(&[], &[], &[], &[], &c).is_err());
    }
}
