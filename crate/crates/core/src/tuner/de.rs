//! Differential evolution, `rand/1/bin` strategy.
//!
//! Trial vectors for a generation are built from the population as it stood
//! at the start of the generation, evaluated (in parallel), and only then
//! compared against their targets. The result is therefore identical to a
//! sequential run with the same seed.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{config_err, input_err, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeConfig {
    pub population: usize,
    /// Differential weight `F`.
    pub mutation: f64,
    /// Crossover probability `CR`.
    pub crossover: f64,
    pub generations: usize,
    pub seed: u64,
}

impl Default for DeConfig {
    fn default() -> Self {
        Self {
            population: 30,
            mutation: 0.8,
            crossover: 0.9,
            generations: 300,
            seed: 0,
        }
    }
}

impl DeConfig {
    pub fn validate(&self) -> Result<()> {
        if self.population < 4 {
            return Err(config_err("DE population must be at least 4"));
        }
        if !(self.mutation > 0.0 && self.mutation < 2.0) {
            return Err(config_err("DE mutation factor must be in (0, 2)"));
        }
        if !(self.crossover > 0.0 && self.crossover <= 1.0) {
            return Err(config_err("DE crossover probability must be in (0, 1]"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeResult {
    pub best: Vec<f64>,
    pub best_value: f64,
    /// Best objective value after initialization and after each generation.
    pub history: Vec<f64>,
    pub evaluations: usize,
}

fn score<F: Fn(&[f64]) -> f64>(objective: &F, x: &[f64]) -> f64 {
    let v = objective(x);
    if v.is_finite() {
        v
    } else {
        f64::INFINITY
    }
}

fn sample_in(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    if hi > lo {
        rng.random_range(lo..=hi)
    } else {
        lo
    }
}

/// Minimizes `objective` over the box `bounds`. Non-finite objective values
/// count as `+inf`.
pub fn differential_evolution<F>(objective: F, bounds: &[(f64, f64)], cfg: &DeConfig) -> Result<DeResult>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    cfg.validate()?;
    if bounds.is_empty() {
        return Err(input_err("DE needs at least one dimension"));
    }
    if let Some((lo, hi)) = bounds
        .iter()
        .find(|(lo, hi)| !(lo.is_finite() && hi.is_finite() && lo <= hi))
    {
        return Err(input_err(format!("invalid DE bounds [{lo}, {hi}]")));
    }

    let dim = bounds.len();
    let np = cfg.population;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    let mut population: Vec<Vec<f64>> = (0..np)
        .map(|_| bounds.iter().map(|&(lo, hi)| sample_in(&mut rng, lo, hi)).collect())
        .collect();
    let mut fitness: Vec<f64> = population.par_iter().map(|x| score(&objective, x)).collect();
    let mut evaluations = np;

    let best_index = |fitness: &[f64]| {
        (0..fitness.len())
            .min_by(|&a, &b| fitness[a].total_cmp(&fitness[b]))
            .unwrap_or(0)
    };
    let mut history = Vec::with_capacity(cfg.generations + 1);
    history.push(fitness[best_index(&fitness)]);

    for _ in 0..cfg.generations {
        let trials: Vec<Vec<f64>> = (0..np)
            .map(|i| {
                let mut pick = || loop {
                    let r = rng.random_range(0..np);
                    if r != i {
                        break r;
                    }
                };
                let a = pick();
                let b = loop {
                    let r = pick();
                    if r != a {
                        break r;
                    }
                };
                let c = loop {
                    let r = pick();
                    if r != a && r != b {
                        break r;
                    }
                };
                let forced = rng.random_range(0..dim);
                (0..dim)
                    .map(|j| {
                        if j == forced || rng.random::<f64>() < cfg.crossover {
                            let v = population[a][j]
                                + cfg.mutation * (population[b][j] - population[c][j]);
                            v.clamp(bounds[j].0, bounds[j].1)
                        } else {
                            population[i][j]
                        }
                    })
                    .collect()
            })
            .collect();
        let trial_fitness: Vec<f64> = trials.par_iter().map(|x| score(&objective, x)).collect();
        evaluations += np;
        for (i, (trial, value)) in trials.into_iter().zip(trial_fitness).enumerate() {
            if value <= fitness[i] {
                population[i] = trial;
                fitness[i] = value;
            }
        }
        history.push(fitness[best_index(&fitness)]);
    }

    let best = best_index(&fitness);
    Ok(DeResult {
        best: population[best].clone(),
        best_value: fitness[best],
        history,
        evaluations,
    })
}
