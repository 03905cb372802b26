//! Levenberg-Marquardt on the voltage residual vector.
//!
//! Iterates in the internal scale (log for circuit constants), projects
//! each trial point onto the box and uses a central-difference Jacobian.

use std::time::Instant;

use nalgebra::{DMatrix, DVector};

use super::config::LmConfig;
use super::eval::Evaluator;
use super::problem::FitProblem;
use super::report::{push_best, FitReport, Method, RunOutcome};
use super::space::{Scale, SearchSpace};
use crate::error::{Error, Result};

const MAX_DAMPING: f64 = 1e16;
const MIN_DAMPING: f64 = 1e-15;

fn to_theta(space: &SearchSpace, z: &[f64]) -> Vec<f64> {
    z.iter()
        .enumerate()
        .map(|(j, &v)| space.value_from_internal(j, v))
        .collect()
}

fn mean_square(r: &[f64]) -> f64 {
    r.iter().map(|x| x * x).sum::<f64>() / r.len() as f64
}

/// Central-difference Jacobian of the residuals with respect to the
/// internal coordinates `z`. Columns are evaluated through `eval`, in
/// parallel when it has workers.
fn jacobian(eval: &Evaluator<'_>, z: &[f64], fd_step: f64) -> Result<DMatrix<f64>> {
    let space = eval.problem().space();
    let n = eval.problem().segment().len();
    let cols: Vec<usize> = (0..z.len()).collect();
    let columns = eval.map(&cols, |&j| -> Result<Vec<f64>> {
        let h = fd_step * z[j].abs().max(1.0);
        let mut zp = z.to_vec();
        let mut zm = z.to_vec();
        zp[j] += h;
        zm[j] -= h;
        // evaluate off-box as well: the model is defined for any positive value
        let unclamped = |zz: &[f64]| -> Vec<f64> {
            zz.iter()
                .enumerate()
                .map(|(k, &v)| match space.scales()[k] {
                    Scale::Log => v.exp(),
                    Scale::Linear => v,
                })
                .collect()
        };
        let rp = eval.residuals(&unclamped(&zp))?;
        let rm = eval.residuals(&unclamped(&zm))?;
        Ok(rp
            .iter()
            .zip(&rm)
            .map(|(a, b)| (a - b) / (2.0 * h))
            .collect())
    });
    let mut jac = DMatrix::zeros(n, z.len());
    for (j, col) in columns.into_iter().enumerate() {
        let col = col?;
        if col.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain(format!("non-finite Jacobian column {j}")));
        }
        jac.set_column(j, &DVector::from_vec(col));
    }
    Ok(jac)
}

fn internal_point(space: &SearchSpace, theta: &[f64]) -> Vec<f64> {
    theta
        .iter()
        .enumerate()
        .map(|(j, &v)| space.to_internal(j, v))
        .collect()
}

/// Gradient of the MSE with respect to the physical parameters, assembled
/// from the same finite-difference Jacobian the solver uses.
pub fn mse_gradient(problem: &FitProblem, theta: &[f64], config: &LmConfig) -> Result<Vec<f64>> {
    if theta.len() != problem.dim() {
        return Err(Error::DimensionMismatch {
            expected: problem.dim(),
            got: theta.len(),
        });
    }
    let eval = Evaluator::new(problem, 1)?;
    let space = problem.space();
    let z = internal_point(space, theta);
    let r = DVector::from_vec(problem.residuals(theta)?);
    let jac = jacobian(&eval, &z, config.fd_step)?;
    let g = jac.tr_mul(&r) * (2.0 / r.len() as f64);
    Ok(g.iter()
        .enumerate()
        .map(|(j, &gz)| match space.scales()[j] {
            Scale::Log => gz / theta[j],
            Scale::Linear => gz,
        })
        .collect())
}

/// Every parameter has some influence on the residuals.
fn identifiable(jac: &DMatrix<f64>) -> bool {
    let norms: Vec<f64> = jac.column_iter().map(|c| c.norm()).collect();
    let max = norms.iter().copied().fold(0.0, f64::max);
    max > 0.0 && norms.iter().all(|&n| n > 1e-12 * max)
}

enum Stop {
    Gradient,
    Step,
    Stalled,
    MaxIterations,
}

pub fn fit_least_squares(
    problem: &FitProblem,
    config: &LmConfig,
    seed: u64,
    workers: usize,
) -> Result<FitReport> {
    let space = problem.space();
    let start = match &config.initial {
        Some(init) => {
            if init.len() != problem.dim() {
                return Err(Error::DimensionMismatch {
                    expected: problem.dim(),
                    got: init.len(),
                });
            }
            space.clamp(init)
        }
        None => space.center(),
    };
    let eval = Evaluator::new(problem, workers)?;
    let timer = Instant::now();

    let bounds: Vec<(f64, f64)> = (0..space.dim()).map(|j| space.internal_bounds(j)).collect();
    let mut z = internal_point(space, &start);
    let mut r = eval.residuals(&to_theta(space, &z))?;
    let n = r.len() as f64;
    let mut cost = mean_square(&r);
    let mut trace = vec![cost];
    let mut damping = config.initial_damping;
    let mut iterations = 0;
    let mut jac_ok;

    let stop = 'outer: loop {
        let jac = jacobian(&eval, &z, config.fd_step)?;
        jac_ok = identifiable(&jac);
        let rv = DVector::from_column_slice(&r);
        let g = jac.tr_mul(&rv);
        if g.amax() * 2.0 / n < config.gradient_tol {
            break Stop::Gradient;
        }
        let jtj = jac.tr_mul(&jac);
        let diag_floor = jtj.diagonal().max() * 1e-12;

        loop {
            if iterations >= config.max_iterations {
                break 'outer Stop::MaxIterations;
            }
            iterations += 1;

            let mut a = jtj.clone();
            for j in 0..a.ncols() {
                a[(j, j)] += damping * jtj[(j, j)].max(diag_floor);
            }
            let delta = match a.cholesky() {
                Some(ch) => ch.solve(&(-&g)),
                None => {
                    damping *= 4.0;
                    if damping > MAX_DAMPING {
                        break 'outer Stop::Stalled;
                    }
                    continue;
                }
            };
            let z_new: Vec<f64> = z
                .iter()
                .zip(delta.iter())
                .zip(&bounds)
                .map(|((&zi, &di), &(lo, hi))| (zi + di).clamp(lo, hi))
                .collect();
            let step = z_new
                .iter()
                .zip(&z)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            if step < config.step_tol {
                break 'outer Stop::Step;
            }
            let r_new = eval.residuals(&to_theta(space, &z_new))?;
            let cost_new = mean_square(&r_new);
            if cost_new < cost {
                z = z_new;
                r = r_new;
                cost = cost_new;
                push_best(&mut trace, cost);
                damping = (damping / 3.0).max(MIN_DAMPING);
                continue 'outer;
            }
            damping *= 4.0;
            if damping > MAX_DAMPING {
                break 'outer Stop::Stalled;
            }
        }
    };

    let converged = jac_ok && !matches!(stop, Stop::MaxIterations);
    let elapsed = timer.elapsed().as_secs_f64();
    let outcome = RunOutcome {
        theta: to_theta(space, &z),
        mse: cost,
        iterations,
        evaluations: eval.evaluations(),
        trace,
        converged,
    };
    FitReport::from_outcome(Method::Ls, problem, seed, elapsed, outcome)
}
