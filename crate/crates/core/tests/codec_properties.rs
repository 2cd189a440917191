use ase_core::{decode_ideal, encode_time, timing_summary, EncoderConfig};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn cfg(tau: f64, u_th: f64) -> EncoderConfig {
    EncoderConfig::with_resolution(tau, u_th, 1.0, 5.0, 0.1, 100_000).unwrap()
}

fn spike(u: f64, c: &EncoderConfig) -> f64 {
    encode_time(u, c).unwrap().time().unwrap()
}

#[test]
fn round_trip_on_random_voltages() {
    let c = cfg(3e-3, 0.1);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..1000 {
        let u: f64 = rng.random_range(c.u_th..=c.u_max);
        if u == c.u_th {
            continue;
        }
        let back = decode_ideal(spike(u, &c), &c).unwrap();
        assert!((back - u).abs() < 1e-9 * u, "{u} -> {back}");
    }
}

#[test]
fn mu_is_tau_invariant() {
    let reference = timing_summary(&cfg(3e-3, 0.1)).mu;
    for tau in [1e-3, 3e-3, 10e-3] {
        let mu = timing_summary(&cfg(tau, 0.1)).mu;
        assert!(((mu - reference) / reference).abs() < 1e-12, "tau {tau}: {mu}");
    }
}

#[test]
fn mu_grows_with_threshold() {
    let grid: Vec<f64> = (1..=50).map(|i| 0.999 * f64::from(i) / 50.0).collect();
    let mus: Vec<f64> = grid.iter().map(|&u| timing_summary(&cfg(3e-3, u)).mu).collect();
    assert!(mus.windows(2).all(|w| w[1] > w[0]));
    // near u_min the ratio blows up
    assert!(mus[49] > 5.0 * mus[0]);
}

proptest! {
    #[test]
    fn spike_time_decreases_with_input(a in 0.1001f64..50.0, b in 0.1001f64..50.0) {
        prop_assume!(a != b);
        let c = cfg(3e-3, 0.1);
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        prop_assert!(spike(hi, &c) < spike(lo, &c));
    }

    #[test]
    fn spike_time_scales_with_tau(u in 0.11f64..10.0, scale in 0.1f64..10.0) {
        let base = cfg(1e-3, 0.1);
        let scaled = cfg(1e-3 * scale, 0.1);
        let t0 = spike(u, &base);
        let t1 = spike(u, &scaled);
        prop_assert!((t1 - scale * t0).abs() <= 1e-12 * t1);
    }
}
