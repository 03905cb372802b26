//! Discrete-time simulation of the two-branch circuit.
//!
//! Branches are discretized by zero-order hold: the current sample `i_k`
//! is held over the interval `(t_{k-1}, t_k]`. Positive current discharges
//! the cell.

use serde::{Deserialize, Serialize};

use super::ocv::OcvCurve;
use super::params::{CellSpec, EcmParams};
use crate::error::{Error, Result};

const SECONDS_PER_HOUR: f64 = 3600.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimulationState {
    pub v1: f64,
    pub v2: f64,
    pub soc: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Simulation {
    pub voltage: Vec<f64>,
    pub states: Vec<SimulationState>,
}

fn check_finite(name: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name} must be finite, got {v}")))
    }
}

/// `exp(-dt / (r c))`, the per-step decay of an RC branch.
pub fn branch_decay_factor(r: f64, c: f64, dt: f64) -> Result<f64> {
    check_finite("r", r)?;
    check_finite("c", c)?;
    check_finite("dt", dt)?;
    if r <= 0.0 || c <= 0.0 {
        return Err(Error::Domain(format!(
            "branch needs r > 0 and c > 0, got r={r}, c={c}"
        )));
    }
    if dt < 0.0 {
        return Err(Error::Domain(format!("dt must be >= 0, got {dt}")));
    }
    Ok((-dt / (r * c)).exp())
}

#[inline]
fn branch_update(v_prev: f64, i: f64, r: f64, alpha: f64) -> f64 {
    alpha * v_prev + r * (1.0 - alpha) * i
}

/// Advance one branch's polarization voltage by `dt` under constant current `i`.
pub fn step_branch(v_prev: f64, i: f64, r: f64, c: f64, dt: f64) -> Result<f64> {
    check_finite("v_prev", v_prev)?;
    check_finite("i", i)?;
    let alpha = branch_decay_factor(r, c, dt)?;
    Ok(branch_update(v_prev, i, r, alpha))
}

#[inline]
fn coulomb_update(soc_prev: f64, i: f64, dt: f64, capacity: f64) -> f64 {
    (soc_prev - i * dt / (SECONDS_PER_HOUR * capacity)).clamp(0.0, 1.0)
}

/// SOC after drawing `i` amperes for `dt` seconds from a `capacity` Ah cell.
pub fn coulomb_count(soc_prev: f64, i: f64, dt: f64, capacity: f64) -> Result<f64> {
    check_finite("soc_prev", soc_prev)?;
    check_finite("i", i)?;
    check_finite("dt", dt)?;
    check_finite("capacity", capacity)?;
    if capacity <= 0.0 {
        return Err(Error::Domain(format!(
            "capacity must be > 0, got {capacity}"
        )));
    }
    if dt < 0.0 {
        return Err(Error::Domain(format!("dt must be >= 0, got {dt}")));
    }
    if !(0.0..=1.0).contains(&soc_prev) {
        return Err(Error::Domain(format!(
            "soc_prev must lie in [0, 1], got {soc_prev}"
        )));
    }
    Ok(coulomb_update(soc_prev, i, dt, capacity))
}

pub(crate) fn validate_profile(time: &[f64], current: &[f64]) -> Result<()> {
    if time.len() != current.len() {
        return Err(Error::InvalidSeries(format!(
            "time has {} samples, current has {}",
            time.len(),
            current.len()
        )));
    }
    if time.len() < 2 {
        return Err(Error::InvalidSeries(format!(
            "need at least 2 samples, got {}",
            time.len()
        )));
    }
    for (k, (&t, &i)) in time.iter().zip(current).enumerate() {
        if !t.is_finite() || !i.is_finite() {
            return Err(Error::InvalidSeries(format!(
                "non-finite sample at index {k}"
            )));
        }
    }
    if let Some(k) = time.windows(2).position(|w| w[1] <= w[0]) {
        return Err(Error::InvalidSeries(format!(
            "timestamps not strictly increasing at index {}",
            k + 1
        )));
    }
    Ok(())
}

/// Core recurrence. Inputs must already be validated; `visit` receives
/// `(k, terminal_voltage, state)` for every sample in order.
pub(crate) fn run_recurrence(
    params: &EcmParams,
    ocv: &OcvCurve,
    cell: &CellSpec,
    time: &[f64],
    current: &[f64],
    mut visit: impl FnMut(usize, f64, SimulationState),
) {
    let mut state = SimulationState {
        v1: 0.0,
        v2: 0.0,
        soc: cell.soc_init,
    };
    let tau1 = params.r1 * params.c1;
    let tau2 = params.r2 * params.c2;
    let mut last_dt = f64::NAN;
    let (mut a1, mut a2) = (1.0, 1.0);

    for k in 0..time.len() {
        let i = current[k];
        if k > 0 {
            let dt = time[k] - time[k - 1];
            if dt != last_dt {
                a1 = (-dt / tau1).exp();
                a2 = (-dt / tau2).exp();
                last_dt = dt;
            }
            state.soc = coulomb_update(state.soc, i, dt, cell.capacity);
            state.v1 = branch_update(state.v1, i, params.r1, a1);
            state.v2 = branch_update(state.v2, i, params.r2, a2);
        }
        // v1 + v2 is summed first so swapping the branches is bit-exact
        let vt = ocv.eval(state.soc) - (state.v1 + state.v2) - i * params.r0;
        visit(k, vt, state);
    }
}

/// Terminal voltage `V_OC(SOC_k) - V1_k - V2_k - I_k R0` over a current profile.
///
/// Branch states start at zero and SOC at `cell.soc_init`. The output has one
/// entry per input sample.
pub fn simulate_terminal_voltage(
    params: &EcmParams,
    ocv: &OcvCurve,
    cell: &CellSpec,
    time: &[f64],
    current: &[f64],
) -> Result<Simulation> {
    params.validate()?;
    validate_profile(time, current)?;
    let mut voltage = Vec::with_capacity(time.len());
    let mut states = Vec::with_capacity(time.len());
    run_recurrence(params, ocv, cell, time, current, |_, v, s| {
        voltage.push(v);
        states.push(s);
    });
    Ok(Simulation { voltage, states })
}
