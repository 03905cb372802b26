use std::panic::{catch_unwind, AssertUnwindSafe};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::optimize::{fit, FitProblem, FitReport, Method, OptimizerConfig};

/// Where a benchmark problem came from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub cell_id: String,
    pub cycle_index: i64,
    /// Source dataset or file.
    pub source: String,
}

#[derive(Debug, Clone)]
pub struct BenchProblem {
    pub problem: FitProblem,
    pub provenance: Provenance,
}

impl BenchProblem {
    /// Provenance taken from the problem's segment.
    pub fn new(problem: FitProblem, source: impl Into<String>) -> Self {
        let seg = problem.segment();
        let provenance = Provenance {
            cell_id: seg.cell_id.clone(),
            cycle_index: seg.cycle_index,
            source: source.into(),
        };
        Self {
            problem,
            provenance,
        }
    }
}

/// Every method run on every problem with every seed.
#[derive(Debug, Clone)]
pub struct BenchmarkSuite {
    pub problems: Vec<BenchProblem>,
    pub methods: Vec<Method>,
    /// Per-method settings, including iteration budgets.
    pub config: OptimizerConfig,
    pub seeds: Vec<u64>,
    /// Number of runs executed concurrently. Each run is single-threaded.
    pub workers: usize,
}

impl BenchmarkSuite {
    pub fn new(
        problems: Vec<BenchProblem>,
        methods: Vec<Method>,
        config: OptimizerConfig,
        seeds: Vec<u64>,
    ) -> Result<Self> {
        let suite = Self {
            problems,
            methods,
            config,
            seeds,
            workers: 1,
        };
        suite.validate()?;
        Ok(suite)
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = workers.max(1);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.problems.is_empty() {
            return Err(Error::Config("benchmark suite has no problems".into()));
        }
        if self.methods.is_empty() {
            return Err(Error::Config("benchmark suite has no methods".into()));
        }
        if self.seeds.is_empty() {
            return Err(Error::Config("benchmark suite has no seeds".into()));
        }
        self.config.validate()
    }

    pub fn run_count(&self) -> usize {
        self.problems.len() * self.methods.len() * self.seeds.len()
    }
}

/// Outcome of one (method, problem, seed) run. Failed runs carry an error
/// message and no numbers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub method: Method,
    /// Index into the suite's problem list.
    pub problem: usize,
    pub cell_id: String,
    pub cycle_index: i64,
    pub source: String,
    pub seed: u64,
    pub mse: Option<f64>,
    pub et: Option<f64>,
    pub converged: bool,
    pub error: Option<String>,
}

impl BenchRow {
    pub fn failed(&self) -> bool {
        self.error.is_some()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodAggregate {
    pub method: Method,
    /// Successful runs.
    pub runs: usize,
    pub failed: usize,
    pub median_mse: Option<f64>,
    pub median_et: Option<f64>,
    pub mean_mse: Option<f64>,
    pub mean_et: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkReport {
    pub rows: Vec<BenchRow>,
    pub aggregates: Vec<MethodAggregate>,
}

impl BenchmarkReport {
    pub fn from_rows(rows: Vec<BenchRow>) -> Self {
        let aggregates = aggregate(&rows);
        Self { rows, aggregates }
    }

    pub fn aggregate_for(&self, method: Method) -> Option<&MethodAggregate> {
        self.aggregates.iter().find(|a| a.method == method)
    }

    /// Equality ignoring the wall-clock columns.
    pub fn same_results(&self, other: &BenchmarkReport) -> bool {
        let strip = |r: &BenchmarkReport| {
            let rows: Vec<BenchRow> = r
                .rows
                .iter()
                .map(|row| BenchRow {
                    et: None,
                    ..row.clone()
                })
                .collect();
            let aggs: Vec<MethodAggregate> = r
                .aggregates
                .iter()
                .map(|a| MethodAggregate {
                    median_et: None,
                    mean_et: None,
                    ..a.clone()
                })
                .collect();
            (rows, aggs)
        };
        let (ra, aa) = strip(self);
        let (rb, ab) = strip(other);
        let bits = |rows: &[BenchRow]| -> Vec<Option<u64>> {
            rows.iter().map(|r| r.mse.map(f64::to_bits)).collect()
        };
        ra == rb && aa == ab && bits(&ra) == bits(&rb)
    }
}

/// Median of a non-empty sample; the mean of the two middle values for an
/// even count.
pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    Some(if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    })
}

fn mean(values: &[f64]) -> Option<f64> {
    (!values.is_empty()).then(|| values.iter().sum::<f64>() / values.len() as f64)
}

/// Per-method statistics over successful rows, methods in first-seen order.
pub fn aggregate(rows: &[BenchRow]) -> Vec<MethodAggregate> {
    let mut methods: Vec<Method> = Vec::new();
    for r in rows {
        if !methods.contains(&r.method) {
            methods.push(r.method);
        }
    }
    methods
        .into_iter()
        .map(|method| {
            let mine: Vec<&BenchRow> = rows.iter().filter(|r| r.method == method).collect();
            let ok: Vec<&BenchRow> = mine.iter().copied().filter(|r| !r.failed()).collect();
            let mse: Vec<f64> = ok.iter().filter_map(|r| r.mse).collect();
            let et: Vec<f64> = ok.iter().filter_map(|r| r.et).collect();
            MethodAggregate {
                method,
                runs: ok.len(),
                failed: mine.len() - ok.len(),
                median_mse: median(&mse),
                median_et: median(&et),
                mean_mse: mean(&mse),
                mean_et: mean(&et),
            }
        })
        .collect()
}

fn run_one(
    suite: &BenchmarkSuite,
    index: usize,
    method: Method,
    seed: u64,
) -> (BenchRow, Option<FitReport>) {
    let bp = &suite.problems[index];
    let outcome = catch_unwind(AssertUnwindSafe(|| {
        fit(method, &bp.problem, &suite.config, seed, 1)
    }));
    let result = match outcome {
        Ok(Ok(report)) if report.mse.is_finite() => Ok(report),
        Ok(Ok(_)) => Err("no finite objective value found".to_string()),
        Ok(Err(e)) => Err(e.to_string()),
        Err(_) => Err("optimizer panicked".to_string()),
    };
    let mut row = BenchRow {
        method,
        problem: index,
        cell_id: bp.provenance.cell_id.clone(),
        cycle_index: bp.provenance.cycle_index,
        source: bp.provenance.source.clone(),
        seed,
        mse: None,
        et: None,
        converged: false,
        error: None,
    };
    match result {
        Ok(report) => {
            row.mse = Some(report.mse);
            row.et = Some(report.execution_time);
            row.converged = report.converged;
            (row, Some(report))
        }
        Err(msg) => {
            row.error = Some(msg);
            (row, None)
        }
    }
}

/// Run the suite and also return every successful [`FitReport`], aligned
/// with the report rows.
pub fn run_suite_detailed(
    suite: &BenchmarkSuite,
) -> Result<(BenchmarkReport, Vec<Option<FitReport>>)> {
    suite.validate()?;
    let mut triples = Vec::with_capacity(suite.run_count());
    for p in 0..suite.problems.len() {
        for &m in &suite.methods {
            for &s in &suite.seeds {
                triples.push((p, m, s));
            }
        }
    }
    let results: Vec<(BenchRow, Option<FitReport>)> = if suite.workers > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(suite.workers)
            .build()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
        pool.install(|| {
            triples
                .par_iter()
                .map(|&(p, m, s)| run_one(suite, p, m, s))
                .collect()
        })
    } else {
        triples
            .iter()
            .map(|&(p, m, s)| run_one(suite, p, m, s))
            .collect()
    };
    let (rows, fits): (Vec<_>, Vec<_>) = results.into_iter().unzip();
    Ok((BenchmarkReport::from_rows(rows), fits))
}

/// Execute every (problem, method, seed) triple. Rows are ordered by
/// problem, then method, then seed. Failing runs become flagged rows.
pub fn run_suite(suite: &BenchmarkSuite) -> Result<BenchmarkReport> {
    run_suite_detailed(suite).map(|(report, _)| report)
}
