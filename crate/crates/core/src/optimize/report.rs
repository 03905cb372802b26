use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::ecm::{canonicalize, EcmParams};
use crate::error::{Error, Result};

use super::problem::FitProblem;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Ls,
    Pso,
    Sa,
    Ga,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::Ls, Method::Pso, Method::Sa, Method::Ga];

    /// Short command-line name.
    pub fn key(&self) -> &'static str {
        match self {
            Method::Ls => "ls",
            Method::Pso => "pso",
            Method::Sa => "sa",
            Method::Ga => "ga",
        }
    }

    /// Display name as used in comparison tables.
    pub fn label(&self) -> &'static str {
        match self {
            Method::Ls => "Least Squares",
            Method::Pso => "Particle Swarm",
            Method::Sa => "Simulated Annealing",
            Method::Ga => "Genetic Algorithm",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.key().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| {
                let valid: Vec<_> = Method::ALL.iter().map(|m| m.key()).collect();
                Error::Config(format!(
                    "unknown method `{s}`; valid methods: {}",
                    valid.join(", ")
                ))
            })
    }
}

/// Outcome of one identification run.
///
/// `trace[0]` is the best MSE after initialization and `trace[k]` the best
/// after iteration `k` (for least squares: after each accepted step). The
/// trace is non-increasing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub method: Method,
    pub best_params: EcmParams,
    /// Present when the OCV polynomial was identified jointly.
    pub ocv_coefficients: Option<Vec<f64>>,
    /// Full canonical search vector.
    pub theta: Vec<f64>,
    /// Volt squared.
    pub mse: f64,
    /// Wall-clock seconds spent inside the optimizer.
    pub execution_time: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub trace: Vec<f64>,
    pub seed: u64,
    /// False when the run hit its iteration cap before a convergence test
    /// fired, or when the data cannot identify every parameter.
    pub converged: bool,
}

pub(crate) struct RunOutcome {
    pub theta: Vec<f64>,
    pub mse: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub trace: Vec<f64>,
    pub converged: bool,
}

impl FitReport {
    pub(crate) fn from_outcome(
        method: Method,
        problem: &FitProblem,
        seed: u64,
        elapsed: f64,
        out: RunOutcome,
    ) -> Result<Self> {
        let theta = canonicalize(&out.theta);
        let best_params = EcmParams::from_slice(&theta)?;
        let ocv_coefficients = problem.is_joint().then(|| theta[EcmParams::DIM..].to_vec());
        Ok(Self {
            method,
            best_params,
            ocv_coefficients,
            theta,
            mse: out.mse,
            execution_time: elapsed,
            iterations: out.iterations,
            evaluations: out.evaluations,
            trace: out.trace,
            seed,
            converged: out.converged,
        })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// Equality ignoring wall-clock time.
    pub fn same_result(&self, other: &FitReport) -> bool {
        let mut a = self.clone();
        a.execution_time = other.execution_time;
        a == *other
            && a.theta
                .iter()
                .zip(&other.theta)
                .all(|(x, y)| x.to_bits() == y.to_bits())
            && a.mse.to_bits() == other.mse.to_bits()
            && a.trace
                .iter()
                .zip(&other.trace)
                .all(|(x, y)| x.to_bits() == y.to_bits())
    }
}

/// Best-so-far running minimum, used for every trace.
pub(crate) fn push_best(trace: &mut Vec<f64>, value: f64) {
    let v = match trace.last() {
        Some(&last) if last <= value => last,
        _ => value,
    };
    trace.push(v);
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn method_names() {
        assert_eq!("pso".parse::<Method>().unwrap(), Method::Pso);
        assert_eq!("LS".parse::<Method>().unwrap(), Method::Ls);
        let err = "nosuch".parse::<Method>().unwrap_err().to_string();
        assert!(err.contains("ls, pso, sa, ga"), "{err}");
    }

    #[test]
    fn push_best_is_monotone() {
        let mut t = Vec::new();
        for v in [3.0, 4.0, 1.0, 2.0, 1.0] {
            push_best(&mut t, v);
        }
        assert_eq!(t, vec![3.0, 3.0, 1.0, 1.0, 1.0]);
    }
}
