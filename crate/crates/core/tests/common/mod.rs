#![allow(dead_code)]

use std::path::PathBuf;

use ecmfit::ecm::CellSpec;
use ecmfit::optimize::FitProblem;
use ecmfit::synthetic::{constant_current_segment, reference_ocv, reference_params};

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

/// Numeric columns of a CSV fixture with a header row.
pub fn read_columns(name: &str) -> Vec<Vec<f64>> {
    let mut rdr = csv::Reader::from_path(fixture(name)).unwrap();
    let width = rdr.headers().unwrap().len();
    let mut cols = vec![Vec::new(); width];
    for rec in rdr.records() {
        let rec = rec.unwrap();
        for (j, field) in rec.iter().enumerate() {
            cols[j].push(field.parse::<f64>().unwrap());
        }
    }
    cols
}

pub fn cell() -> CellSpec {
    CellSpec::new(2.0, 1.0).unwrap()
}

/// 300 s, 1 Hz, 1 A discharge generated from the reference parameters.
pub fn synthetic_problem() -> FitProblem {
    let seg = constant_current_segment(
        &reference_params(),
        &reference_ocv(),
        &cell(),
        1.0,
        300.0,
        1.0,
    )
    .unwrap();
    FitProblem::fixed_ocv(seg, reference_ocv()).unwrap()
}

pub fn max_relative_error(theta: &[f64], truth: &[f64]) -> f64 {
    theta
        .iter()
        .zip(truth)
        .map(|(a, b)| ((a - b) / b).abs())
        .fold(0.0, f64::max)
}
