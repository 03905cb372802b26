//! Real-valued genetic algorithm: binary tournaments, arithmetic crossover,
//! Gaussian mutation and a single elite.

use std::time::Instant;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::config::GaConfig;
use super::eval::Evaluator;
use super::problem::FitProblem;
use super::report::{push_best, FitReport, Method, RunOutcome};
use super::rng;
use crate::error::{Error, Result};

fn best_index(fitness: &[f64]) -> usize {
    let mut best = 0;
    for (i, &f) in fitness.iter().enumerate().skip(1) {
        if f < fitness[best] {
            best = i;
        }
    }
    best
}

fn tournament(rng: &mut ChaCha8Rng, fitness: &[f64]) -> usize {
    let a = rng.random_range(0..fitness.len());
    let b = rng.random_range(0..fitness.len());
    if fitness[b] < fitness[a] || (fitness[b] == fitness[a] && b < a) {
        b
    } else {
        a
    }
}

pub fn fit_genetic(
    problem: &FitProblem,
    config: &GaConfig,
    seed: u64,
    workers: usize,
) -> Result<FitReport> {
    evolve(problem, config, seed, workers, None)
}

/// GA with an optional explicit initial population (unit-cube coordinates).
pub fn evolve(
    problem: &FitProblem,
    config: &GaConfig,
    seed: u64,
    workers: usize,
    initial: Option<Vec<Vec<f64>>>,
) -> Result<FitReport> {
    config.validate()?;
    let dim = problem.dim();
    let size = config.population;
    if let Some(init) = &initial {
        if init.len() != size || init.iter().any(|x| x.len() != dim) {
            return Err(Error::Config(format!(
                "initial population must be {size} vectors of length {dim}"
            )));
        }
    }
    let eval = Evaluator::new(problem, workers)?;
    let timer = Instant::now();

    // one stream per population slot
    let mut rngs: Vec<ChaCha8Rng> = (0..size).map(|i| rng::stream(seed, i as u64)).collect();
    let mut pop: Vec<Vec<f64>> = match initial {
        Some(init) => init
            .into_iter()
            .map(|x| x.into_iter().map(|v| v.clamp(0.0, 1.0)).collect())
            .collect(),
        None => rngs
            .iter_mut()
            .map(|r| (0..dim).map(|_| r.random::<f64>()).collect())
            .collect(),
    };
    let mut fitness = eval.mse_unit_batch(&pop);
    let e = best_index(&fitness);
    let (mut best_x, mut best_f) = (pop[e].clone(), fitness[e]);
    let mut trace = vec![best_f];

    let n = config.generations.max(1) as f64;
    let scale_ratio = if config.mutation_scale > 0.0 && config.mutation_scale_final > 0.0 {
        (config.mutation_scale_final / config.mutation_scale).powf(1.0 / n)
    } else {
        1.0
    };
    let mut sigma = config.mutation_scale;

    for _ in 0..config.generations {
        let elite = best_index(&fitness);
        let mut children: Vec<Vec<f64>> = Vec::with_capacity(size - 1);
        for rng in rngs.iter_mut().skip(1) {
            let p1 = &pop[tournament(rng, &fitness)];
            let p2 = &pop[tournament(rng, &fitness)];
            let blend: f64 = rng.random();
            let child = p1
                .iter()
                .zip(p2)
                .map(|(&a, &b)| {
                    let mut g = b + blend * (a - b);
                    // draw both regardless so the stream advances identically
                    let flip: f64 = rng.random();
                    let z: f64 = rng.sample(StandardNormal);
                    if flip < config.mutation_rate {
                        g += sigma * z;
                    }
                    g.clamp(0.0, 1.0)
                })
                .collect();
            children.push(child);
        }
        let child_fitness = eval.mse_unit_batch(&children);

        let mut next = Vec::with_capacity(size);
        let mut next_f = Vec::with_capacity(size);
        next.push(pop[elite].clone());
        next_f.push(fitness[elite]);
        next.extend(children);
        next_f.extend(child_fitness);
        pop = next;
        fitness = next_f;

        let g = best_index(&fitness);
        if fitness[g] < best_f {
            best_f = fitness[g];
            best_x.clone_from(&pop[g]);
        }
        push_best(&mut trace, best_f);
        sigma *= scale_ratio;
    }

    let elapsed = timer.elapsed().as_secs_f64();
    let outcome = RunOutcome {
        theta: problem.space().from_unit(&best_x),
        mse: best_f,
        iterations: config.generations,
        evaluations: eval.evaluations(),
        trace,
        converged: best_f.is_finite(),
    };
    FitReport::from_outcome(Method::Ga, problem, seed, elapsed, outcome)
}
