use crate::ecm::EcmParams;
use crate::error::{Error, Result};

use super::problem::{objective_mse, FitProblem};

#[derive(Debug, Clone, PartialEq)]
pub struct GridResult {
    pub theta: Vec<f64>,
    pub mse: f64,
    pub evaluations: usize,
}

/// Log-spaced points from `lo` to `hi`, both endpoints exact.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let ratio = hi / lo;
    (0..n)
        .map(|j| match j {
            0 => lo,
            j if j == n - 1 => hi,
            j => lo * ratio.powf(j as f64 / (n - 1) as f64),
        })
        .collect()
}

/// Exhaustive search over a log-spaced grid of the five circuit constants.
///
/// Points are visited in lexicographic index order and only a strictly
/// lower MSE replaces the incumbent, so ties resolve lexicographically.
pub fn grid_oracle(problem: &FitProblem, points_per_dim: usize) -> Result<GridResult> {
    if problem.is_joint() || problem.dim() != EcmParams::DIM {
        return Err(Error::Unsupported(
            "grid oracle only supports fixed-OCV (5-parameter) problems".into(),
        ));
    }
    if points_per_dim < 2 {
        return Err(Error::Domain(format!(
            "points_per_dim must be >= 2, got {points_per_dim}"
        )));
    }
    let space = problem.space();
    let axes: Vec<Vec<f64>> = (0..EcmParams::DIM)
        .map(|j| log_grid(space.lower()[j], space.upper()[j], points_per_dim))
        .collect();

    let total = points_per_dim.pow(EcmParams::DIM as u32);
    let mut idx = [0usize; EcmParams::DIM];
    let mut best: Option<(Vec<f64>, f64)> = None;
    for _ in 0..total {
        let theta: Vec<f64> = idx.iter().enumerate().map(|(j, &i)| axes[j][i]).collect();
        let mse = objective_mse(&theta, problem)?;
        if best.as_ref().is_none_or(|(_, b)| mse < *b) {
            best = Some((theta, mse));
        }
        // odometer increment, last index fastest
        for j in (0..EcmParams::DIM).rev() {
            idx[j] += 1;
            if idx[j] < points_per_dim {
                break;
            }
            idx[j] = 0;
        }
    }
    let (theta, mse) = best.expect("grid has at least 32 points");
    Ok(GridResult {
        theta,
        mse,
        evaluations: total,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_grid_endpoints() {
        let g = log_grid(1e-4, 1.0, 5);
        assert_eq!(g[0], 1e-4);
        assert_eq!(g[4], 1.0);
        assert!((g[2] - 1e-2).abs() < 1e-15);
    }
}
