//! Single-chain simulated annealing with Metropolis acceptance.

use std::time::Instant;

use rand::Rng;
use rand_distr::StandardNormal;

use super::config::SaConfig;
use super::eval::Evaluator;
use super::problem::FitProblem;
use super::report::{push_best, FitReport, Method, RunOutcome};
use super::rng;
use crate::error::Result;

pub fn fit_simulated_annealing(
    problem: &FitProblem,
    config: &SaConfig,
    seed: u64,
    workers: usize,
) -> Result<FitReport> {
    config.validate()?;
    let dim = problem.dim();
    // a single chain has nothing to evaluate concurrently
    let _ = workers;
    let eval = Evaluator::new(problem, 1)?;
    let timer = Instant::now();

    let mut rng = rng::stream(seed, 0);
    let mut x: Vec<f64> = (0..dim).map(|_| rng.random::<f64>()).collect();
    let mut fx = eval.mse_unit(&x);
    let (mut best_x, mut best_f) = (x.clone(), fx);
    let mut trace = vec![best_f];

    let n = config.iterations.max(1) as f64;
    let step_ratio = if config.step > 0.0 && config.step_final > 0.0 {
        (config.step_final / config.step).powf(1.0 / n)
    } else {
        1.0
    };
    let mut temperature = config.t0;
    let mut step = config.step;

    for _ in 0..config.iterations {
        let y: Vec<f64> = x
            .iter()
            .map(|&xi| {
                let z: f64 = rng.sample(StandardNormal);
                (xi + step * z).clamp(0.0, 1.0)
            })
            .collect();
        let fy = eval.mse_unit(&y);
        let delta = fy - fx;
        // always draw so the stream position does not depend on the branch
        let u: f64 = rng.random();
        let accept = delta <= 0.0 || (temperature > 0.0 && u < (-delta / temperature).exp());
        if accept {
            x = y;
            fx = fy;
            if fx < best_f {
                best_f = fx;
                best_x.clone_from(&x);
            }
        }
        push_best(&mut trace, best_f);
        temperature *= config.cooling;
        step *= step_ratio;
    }

    let elapsed = timer.elapsed().as_secs_f64();
    let outcome = RunOutcome {
        theta: problem.space().from_unit(&best_x),
        mse: best_f,
        iterations: config.iterations,
        evaluations: eval.evaluations(),
        trace,
        converged: best_f.is_finite(),
    };
    FitReport::from_outcome(Method::Sa, problem, seed, elapsed, outcome)
}
