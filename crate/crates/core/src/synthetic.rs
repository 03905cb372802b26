//! Noiseless segments generated from known parameters.

use crate::dataset::DischargeSegment;
use crate::ecm::{simulate_terminal_voltage, CellSpec, EcmParams, OcvCurve};
use crate::error::Result;

/// Degree-5 OCV shape of a typical Li-ion cell: 3.0 V empty, 4.2 V full,
/// monotone in between.
pub fn reference_ocv() -> OcvCurve {
    OcvCurve::with_coefficients(vec![3.0, 2.0, -3.6, 3.8, -1.6, 0.6])
        .expect("reference OCV is inside the envelope")
}

/// Circuit constants used by the recovery benchmarks.
pub fn reference_params() -> EcmParams {
    EcmParams {
        r0: 0.05,
        r1: 0.02,
        c1: 1000.0,
        r2: 0.03,
        c2: 20000.0,
    }
}

/// Simulate a constant-current discharge sampled every `dt` seconds for
/// `duration` seconds and package it as a segment.
pub fn constant_current_segment(
    params: &EcmParams,
    ocv: &OcvCurve,
    cell: &CellSpec,
    current: f64,
    duration: f64,
    dt: f64,
) -> Result<DischargeSegment> {
    let n = (duration / dt).round() as usize + 1;
    let time: Vec<f64> = (0..n).map(|k| k as f64 * dt).collect();
    let current = vec![current; n];
    profile_segment(params, ocv, cell, time, current)
}

/// Simulate an arbitrary current profile and package it as a segment.
pub fn profile_segment(
    params: &EcmParams,
    ocv: &OcvCurve,
    cell: &CellSpec,
    time: Vec<f64>,
    current: Vec<f64>,
) -> Result<DischargeSegment> {
    let sim = simulate_terminal_voltage(params, ocv, cell, &time, &current)?;
    DischargeSegment::new(
        "synthetic",
        1,
        time,
        current,
        sim.voltage,
        cell.soc_init,
        cell.capacity,
    )
}
