//! Global-best particle swarm over the unit-scaled box.

use std::time::Instant;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::config::PsoConfig;
use super::eval::Evaluator;
use super::problem::FitProblem;
use super::report::{push_best, FitReport, Method, RunOutcome};
use super::rng;
use crate::error::Result;

struct Particle {
    x: Vec<f64>,
    v: Vec<f64>,
    best_x: Vec<f64>,
    best_f: f64,
    rng: ChaCha8Rng,
}

/// Lowest value wins; ties go to the lowest index.
fn argmin(values: impl Iterator<Item = f64>) -> usize {
    let mut best = (0, f64::INFINITY);
    for (i, v) in values.enumerate() {
        if i == 0 || v < best.1 {
            best = (i, v);
        }
    }
    best.0
}

pub fn fit_pso(
    problem: &FitProblem,
    config: &PsoConfig,
    seed: u64,
    workers: usize,
) -> Result<FitReport> {
    config.validate()?;
    let dim = problem.dim();
    let vmax = config.velocity_clamp;
    let eval = Evaluator::new(problem, workers)?;
    let timer = Instant::now();

    let mut swarm: Vec<Particle> = (0..config.swarm_size)
        .map(|i| {
            let mut rng = rng::stream(seed, i as u64);
            let x: Vec<f64> = (0..dim).map(|_| rng.random::<f64>()).collect();
            let v: Vec<f64> = (0..dim).map(|_| rng.random_range(-vmax..=vmax)).collect();
            Particle {
                best_x: x.clone(),
                x,
                v,
                best_f: f64::INFINITY,
                rng,
            }
        })
        .collect();

    let positions: Vec<Vec<f64>> = swarm.iter().map(|p| p.x.clone()).collect();
    for (p, f) in swarm.iter_mut().zip(eval.mse_unit_batch(&positions)) {
        p.best_f = f;
    }
    let mut g = argmin(swarm.iter().map(|p| p.best_f));
    let mut gbest_x = swarm[g].best_x.clone();
    let mut gbest_f = swarm[g].best_f;
    let mut trace = vec![gbest_f];

    for _ in 0..config.max_iterations {
        for p in swarm.iter_mut() {
            #[allow(clippy::needless_range_loop)]
            for d in 0..dim {
                let u1: f64 = p.rng.random();
                let u2: f64 = p.rng.random();
                let v = config.inertia * p.v[d]
                    + config.cognitive * u1 * (p.best_x[d] - p.x[d])
                    + config.social * u2 * (gbest_x[d] - p.x[d]);
                p.v[d] = v.clamp(-vmax, vmax);
                p.x[d] = (p.x[d] + p.v[d]).clamp(0.0, 1.0);
            }
        }
        let positions: Vec<Vec<f64>> = swarm.iter().map(|p| p.x.clone()).collect();
        let values = eval.mse_unit_batch(&positions);
        for (p, f) in swarm.iter_mut().zip(values) {
            if f < p.best_f {
                p.best_f = f;
                p.best_x = p.x.clone();
            }
        }
        g = argmin(swarm.iter().map(|p| p.best_f));
        gbest_f = swarm[g].best_f;
        gbest_x.clone_from(&swarm[g].best_x);
        push_best(&mut trace, gbest_f);
    }

    let elapsed = timer.elapsed().as_secs_f64();
    let outcome = RunOutcome {
        theta: problem.space().from_unit(&gbest_x),
        mse: gbest_f,
        iterations: config.max_iterations,
        evaluations: eval.evaluations(),
        trace,
        converged: gbest_f.is_finite(),
    };
    FitReport::from_outcome(Method::Pso, problem, seed, elapsed, outcome)
}

#[cfg(test)]
mod tests {
    use super::argmin;

    #[test]
    fn argmin_prefers_lowest_index() {
        assert_eq!(argmin([3.0, 1.0, 1.0, 2.0].into_iter()), 1);
        assert_eq!(argmin([f64::INFINITY, f64::INFINITY].into_iter()), 0);
    }
}
