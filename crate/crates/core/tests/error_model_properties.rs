use ase_core::error_model::quantization_envelope;
use ase_core::{
    encode_time, predicted_decoding_error, quantization_shift, simulate_window, thermal_shift,
    EncoderConfig, ThermalNoiseModel,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn cfg() -> EncoderConfig {
    EncoderConfig::with_resolution(3e-3, 0.1, 1.0, 5.0, 1.0 / 3000.0, 100).unwrap()
}

fn grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

#[test]
fn thermal_shift_shrinks_with_input() {
    let c = cfg();
    let shifts: Vec<f64> = grid(1.0, 5.0, 200)
        .into_iter()
        .map(|u| thermal_shift(u, 0.01, &c).unwrap())
        .collect();
    assert!(shifts.iter().all(|&s| s > 0.0));
    assert!(shifts.windows(2).all(|w| w[1] < w[0]));
}

#[test]
fn quantization_only_error_grows_with_input() {
    let c = cfg();
    let errs: Vec<f64> = grid(1.0, 5.0, 200)
        .into_iter()
        .map(|u| predicted_decoding_error(u, 0.0, &c).unwrap())
        .collect();
    assert!(errs.iter().all(|&e| e > 0.0));
    assert!(errs.windows(2).all(|w| w[1] > w[0]));
}

#[test]
fn mean_registration_delay_is_half_a_tick() {
    let c = cfg();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let windows = 10_000;
    let mut total = 0.0;
    for _ in 0..windows {
        let u: f64 = rng.random_range(1.0..5.0);
        let t = encode_time(u, &c).unwrap().time().unwrap();
        let k = simulate_window(u, &c, None, 0).unwrap();
        total += f64::from(k) * c.reader_period - t;
    }
    let mean = total / windows as f64;
    let expected = quantization_shift(&c);
    assert!(((mean - expected) / expected).abs() < 0.05, "{mean} vs {expected}");
}

#[test]
fn constant_noise_advances_bins_by_predicted_shift() {
    let c = cfg();
    let noise = ThermalNoiseModel::constant(0.01);
    for u in grid(1.0, 5.0, 81) {
        let clean = simulate_window(u, &c, None, 0).unwrap();
        let noisy = simulate_window(u, &c, Some(&noise), 0).unwrap();
        let measured = f64::from(clean) - f64::from(noisy);
        let predicted = thermal_shift(u, 0.01, &c).unwrap() / c.reader_period;
        assert!((measured - predicted).abs() <= 1.0, "u {u}: {measured} vs {predicted}");
    }
}

#[test]
fn envelope_bounds_observed_error() {
    let c = cfg();
    for u in grid(1.0, 5.0, 401) {
        let k = simulate_window(u, &c, None, 0).unwrap();
        let decoded = ase_core::decode_ideal(f64::from(k) * c.reader_period, &c).unwrap();
        let env = quantization_envelope(u, &c).unwrap();
        assert!((u - decoded).abs() <= env * (1.0 + 1e-9), "u {u}");
    }
    // the envelope widens toward the top of the range
    let lo = quantization_envelope(1.0, &c).unwrap();
    let hi = quantization_envelope(5.0, &c).unwrap();
    assert!(hi > 10.0 * lo);
}

#[test]
fn domain_errors() {
    let c = cfg();
    assert!(thermal_shift(1.0, 0.1, &c).is_err());
    assert!(thermal_shift(1.0, -0.01, &c).is_err());
    assert!(thermal_shift(0.05, 0.01, &c).is_err());
}
