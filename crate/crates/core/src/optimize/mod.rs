//! Identification objective and the optimizers that minimize it.
//!
//! Every optimizer takes a [`FitProblem`], its own configuration, a seed and
//! a worker count, and returns a [`FitReport`]. Stochastic methods draw
//! from one ChaCha stream per particle / individual / chain, so reports are
//! bit-identical for a given seed whatever the worker count.

mod config;
mod eval;
mod ga;
mod grid;
mod lm;
mod problem;
mod pso;
mod report;
mod rng;
mod sa;
mod space;

pub use config::{GaConfig, LmConfig, OptimizerConfig, PsoConfig, SaConfig};
pub use ga::{evolve, fit_genetic};
pub use grid::{grid_oracle, log_grid, GridResult};
pub use lm::{fit_least_squares, mse_gradient};
pub use problem::{objective_mse, FitProblem};
pub use pso::fit_pso;
pub use report::{FitReport, Method};
pub use sa::fit_simulated_annealing;
pub use space::{Scale, SearchSpace};

use crate::error::Result;

/// Run the named method with its section of `config`.
pub fn fit(
    method: Method,
    problem: &FitProblem,
    config: &OptimizerConfig,
    seed: u64,
    workers: usize,
) -> Result<FitReport> {
    match method {
        Method::Ls => fit_least_squares(problem, &config.ls, seed, workers),
        Method::Pso => fit_pso(problem, &config.pso, seed, workers),
        Method::Sa => fit_simulated_annealing(problem, &config.sa, seed, workers),
        Method::Ga => fit_genetic(problem, &config.ga, seed, workers),
    }
}
