//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use ase_core::{EncoderConfig, LinearDecoderParams};
use num_complex::Complex64;

/// Crossing time of `tau du/dt + u = u_in` from rest, by explicit Euler
/// stepping with step `dt` and linear interpolation inside the last step.
pub fn euler_crossing(u_in: f64, u_th: f64, tau: f64, dt: f64, t_end: f64) -> Option<f64> {
    let mut u = 0.0;
    let mut t = 0.0;
    while t < t_end {
        let next = u + dt * (u_in - u) / tau;
        if next >= u_th {
            return Some(t + dt * (u_th - u) / (next - u));
        }
        u = next;
        t += dt;
    }
    None
}

/// Textbook DFT with complex exponentials, `X_k = sum_n x_n exp(-2 pi i k n / K)`.
pub fn direct_dft(values: &[f64]) -> Vec<Complex64> {
    let k_size = values.len();
    (0..k_size)
        .map(|k| {
            values
                .iter()
                .enumerate()
                .map(|(n, &x)| {
                    let phase = -2.0 * std::f64::consts::PI * (k * n) as f64 / k_size as f64;
                    Complex64::from_polar(x, phase)
                })
                .sum()
        })
        .collect()
}

/// `integral |y - g^-1(f(y))| dy` by the trapezoid rule, computed from the
/// formulas directly rather than through the library.
pub fn eps_lin_direct(cfg: &EncoderConfig, t_lin_min: f64, t_lin_max: f64, points: usize) -> f64 {
    let (lo, hi) = (cfg.u_min, cfg.u_max);
    let h = (hi - lo) / (points - 1) as f64;
    let err = |y: f64| {
        let t = -cfg.tau * (1.0 - cfg.u_th / y).ln();
        let decoded = hi - (hi - lo) / (t_lin_max - t_lin_min) * (t - t_lin_min);
        (y - decoded).abs()
    };
    let mut sum = 0.5 * (err(lo) + err(hi));
    for i in 1..points - 1 {
        sum += err(lo + i as f64 * h);
    }
    sum * h
}

/// Brute-force minimum of `eps_lin` over a `steps x steps` lattice of
/// `(k1, k2)` in `[lo, hi]^2`. Returns `(k1, k2, eps_lin)`.
pub fn grid_search(cfg: &EncoderConfig, lo: f64, hi: f64, steps: usize, points: usize) -> (f64, f64, f64) {
    let t_min = -cfg.tau * (1.0 - cfg.u_th / cfg.u_max).ln();
    let t_max = -cfg.tau * (1.0 - cfg.u_th / cfg.u_min).ln();
    let mut best = (0.0, 0.0, f64::INFINITY);
    for i in 0..steps {
        let k1 = lo + (hi - lo) * i as f64 / (steps - 1) as f64;
        for j in 0..steps {
            let k2 = lo + (hi - lo) * j as f64 / (steps - 1) as f64;
            let (a, b) = (t_min * (1.0 + k1), t_max * (1.0 + k2));
            if b <= a {
                continue;
            }
            let e = eps_lin_direct(cfg, a, b, points);
            if e < best.2 {
                best = (k1, k2, e);
            }
        }
    }
    best
}

/// Inverse of the linear code, written out from its definition.
pub fn linear_value(t: f64, p: &LinearDecoderParams) -> f64 {
    p.y_max - (p.y_max - p.y_min) / (p.t_lin_max - p.t_lin_min) * (t - p.t_lin_min)
}

/// Derives the phase-coded time of value `y`, written out from its definition.
pub fn linear_time(y: f64, p: &LinearDecoderParams) -> f64 {
    p.t_lin_min + (p.t_lin_max - p.t_lin_min) / (p.y_max - p.y_min) * (p.y_max - y)
}
