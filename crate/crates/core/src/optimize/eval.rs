use std::sync::atomic::{AtomicUsize, Ordering};

use rayon::prelude::*;

use super::problem::{objective_mse, FitProblem};
use crate::error::{Error, Result};

/// Objective evaluation with optional worker threads.
///
/// Batches are returned in input order so every reduction downstream runs
/// in candidate-index order regardless of scheduling.
pub(crate) struct Evaluator<'a> {
    problem: &'a FitProblem,
    pool: Option<rayon::ThreadPool>,
    count: AtomicUsize,
}

impl<'a> Evaluator<'a> {
    pub fn new(problem: &'a FitProblem, workers: usize) -> Result<Self> {
        let pool = if workers > 1 {
            Some(
                rayon::ThreadPoolBuilder::new()
                    .num_threads(workers)
                    .build()
                    .map_err(|e| Error::Config(format!("thread pool: {e}")))?,
            )
        } else {
            None
        };
        Ok(Self {
            problem,
            pool,
            count: AtomicUsize::new(0),
        })
    }

    pub fn problem(&self) -> &FitProblem {
        self.problem
    }

    pub fn evaluations(&self) -> usize {
        self.count.load(Ordering::Relaxed)
    }

    /// MSE at a physical parameter vector; infeasible points score +inf.
    pub fn mse(&self, theta: &[f64]) -> f64 {
        self.count.fetch_add(1, Ordering::Relaxed);
        match objective_mse(theta, self.problem) {
            Ok(v) if v.is_finite() => v,
            _ => f64::INFINITY,
        }
    }

    pub fn mse_unit(&self, u: &[f64]) -> f64 {
        self.mse(&self.problem.space().from_unit(u))
    }

    pub fn mse_unit_batch(&self, points: &[Vec<f64>]) -> Vec<f64> {
        self.map(points, |u| self.mse_unit(u))
    }

    /// Order-preserving map, parallel when a pool is configured.
    pub fn map<T, U, F>(&self, items: &[T], f: F) -> Vec<U>
    where
        T: Sync,
        U: Send,
        F: Fn(&T) -> U + Sync + Send,
    {
        match &self.pool {
            Some(pool) => pool.install(|| items.par_iter().map(&f).collect()),
            None => items.iter().map(f).collect(),
        }
    }

    pub fn residuals(&self, theta: &[f64]) -> Result<Vec<f64>> {
        self.count.fetch_add(1, Ordering::Relaxed);
        self.problem.residuals(theta)
    }
}
