use std::ops::Range;

use serde::{Deserialize, Serialize};

use super::archive::RawRecord;
use crate::ecm::CellSpec;
use crate::error::{Error, Result};
use crate::kv::{self, KeyValues};

pub const MIN_SEGMENT_LEN: usize = 16;

/// A maximal run of consecutive records sharing a cycle index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CycleRun {
    pub cycle_index: i64,
    pub range: Range<usize>,
}

/// Uniform-or-not discharge window ready for identification.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DischargeSegment {
    pub cell_id: String,
    pub cycle_index: i64,
    pub time: Vec<f64>,
    pub current: Vec<f64>,
    pub voltage: Vec<f64>,
    pub soc_start: f64,
    /// Ampere-hour.
    pub capacity: f64,
}

impl DischargeSegment {
    pub fn new(
        cell_id: impl Into<String>,
        cycle_index: i64,
        time: Vec<f64>,
        current: Vec<f64>,
        voltage: Vec<f64>,
        soc_start: f64,
        capacity: f64,
    ) -> Result<Self> {
        let seg = Self {
            cell_id: cell_id.into(),
            cycle_index,
            time,
            current,
            voltage,
            soc_start,
            capacity,
        };
        seg.validate()?;
        Ok(seg)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.time.len();
        if n < MIN_SEGMENT_LEN && self.current.len() == n && self.voltage.len() == n {
            return Err(Error::SegmentTooShort {
                len: n,
                min: MIN_SEGMENT_LEN,
            });
        }
        self.validate_series()
    }

    /// Every invariant except the minimum length.
    pub fn validate_series(&self) -> Result<()> {
        let n = self.time.len();
        if self.current.len() != n || self.voltage.len() != n {
            return Err(Error::InvalidSeries(format!(
                "series lengths differ: time {n}, current {}, voltage {}",
                self.current.len(),
                self.voltage.len()
            )));
        }
        if self.time.first() != Some(&0.0) {
            return Err(Error::InvalidSeries(format!(
                "segment time must start at 0, got {}",
                self.time[0]
            )));
        }
        crate::ecm::validate_profile(&self.time, &self.current)?;
        if let Some(k) = self.current.iter().position(|&i| i < 0.0) {
            return Err(Error::InvalidSeries(format!(
                "negative (charging) current at index {k}"
            )));
        }
        if let Some(k) = self
            .voltage
            .iter()
            .position(|v| !v.is_finite() || *v <= 0.0)
        {
            return Err(Error::InvalidSeries(format!(
                "invalid voltage at index {k}"
            )));
        }
        CellSpec::new(self.capacity, self.soc_start)?;
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.time.len()
    }

    pub fn is_empty(&self) -> bool {
        self.time.is_empty()
    }

    pub fn cell(&self) -> CellSpec {
        CellSpec {
            capacity: self.capacity,
            soc_init: self.soc_start,
        }
    }
}

/// Contiguous runs of equal cycle index, in file order.
pub fn segment_cycles(records: &[RawRecord]) -> Vec<CycleRun> {
    let mut runs: Vec<CycleRun> = Vec::new();
    for (k, r) in records.iter().enumerate() {
        match runs.last_mut() {
            Some(run) if run.cycle_index == r.cycle_index => run.range.end = k + 1,
            _ => runs.push(CycleRun {
                cycle_index: r.cycle_index,
                range: k..k + 1,
            }),
        }
    }
    runs
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindowPolicy {
    /// Ampere; first sample at or above this starts the window.
    pub onset_threshold: f64,
    /// Seconds.
    pub window_length: f64,
}

impl Default for WindowPolicy {
    fn default() -> Self {
        Self {
            onset_threshold: 0.05,
            window_length: 300.0,
        }
    }
}

impl WindowPolicy {
    /// Apply `window.onset_threshold` and `window.length` overrides.
    pub fn with_overrides(mut self, kv: &KeyValues) -> Result<Self> {
        kv::set(kv, "window.onset_threshold", &mut self.onset_threshold)?;
        kv::set(kv, "window.length", &mut self.window_length)?;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.onset_threshold.is_finite() && self.onset_threshold > 0.0) {
            return Err(Error::Config(format!(
                "window.onset_threshold must be > 0, got {}",
                self.onset_threshold
            )));
        }
        if !(self.window_length.is_finite() && self.window_length > 0.0) {
            return Err(Error::Config(format!(
                "window.length must be > 0, got {}",
                self.window_length
            )));
        }
        Ok(())
    }
}

/// Discharge windows of every cycle in `records`.
///
/// Cycles without a usable discharge are skipped. When no cycle yields a
/// window, the error of the first cycle is returned.
pub fn discharge_segments(
    cell_id: &str,
    records: &[RawRecord],
    policy: &WindowPolicy,
    cell: &CellSpec,
) -> Result<Vec<DischargeSegment>> {
    let mut out = Vec::new();
    let mut first_err = None;
    for run in segment_cycles(records) {
        match extract_discharge_window(cell_id, &records[run.range], policy, cell) {
            Ok(seg) => out.push(seg),
            Err(e @ (Error::NoDischarge { .. } | Error::SegmentTooShort { .. })) => {
                first_err.get_or_insert(e);
            }
            Err(e) => return Err(e),
        }
    }
    match (out.is_empty(), first_err) {
        (true, Some(e)) => Err(e),
        (true, None) => Err(Error::EmptyInput),
        _ => Ok(out),
    }
}

/// Cut the early-discharge window out of one cycle.
///
/// `cell.soc_init` is the SOC at the start of the cycle; the segment's
/// `soc_start` is obtained by coulomb counting up to the onset sample. The
/// window stops early at the first charging sample, and samples whose
/// timestamp does not advance are dropped.
pub fn extract_discharge_window(
    cell_id: &str,
    cycle: &[RawRecord],
    policy: &WindowPolicy,
    cell: &CellSpec,
) -> Result<DischargeSegment> {
    let onset = cycle
        .iter()
        .position(|r| r.current >= policy.onset_threshold)
        .ok_or(Error::NoDischarge {
            threshold: policy.onset_threshold,
        })?;

    let mut soc = cell.soc_init;
    for k in 1..onset {
        let dt = cycle[k].test_time - cycle[k - 1].test_time;
        if dt > 0.0 {
            soc = crate::ecm::coulomb_count(soc, cycle[k].current, dt, cell.capacity)?;
        }
    }

    let t0 = cycle[onset].test_time;
    let (mut time, mut current, mut voltage) = (Vec::new(), Vec::new(), Vec::new());
    for r in &cycle[onset..] {
        let t = r.test_time - t0;
        if t > policy.window_length + 1e-9 || r.current < 0.0 {
            break;
        }
        if time.last().is_some_and(|&prev| t <= prev) {
            continue;
        }
        time.push(t);
        current.push(r.current);
        voltage.push(r.voltage);
    }
    if time.len() < MIN_SEGMENT_LEN {
        return Err(Error::SegmentTooShort {
            len: time.len(),
            min: MIN_SEGMENT_LEN,
        });
    }
    DischargeSegment::new(
        cell_id,
        cycle[onset].cycle_index,
        time,
        current,
        voltage,
        soc,
        cell.capacity,
    )
}

fn interpolate(time: &[f64], values: &[f64], t: f64) -> f64 {
    // index of the last knot <= t
    let j = time.partition_point(|&x| x <= t).saturating_sub(1);
    if j + 1 >= time.len() {
        return values[time.len() - 1];
    }
    let w = (t - time[j]) / (time[j + 1] - time[j]);
    values[j] + w * (values[j + 1] - values[j])
}

/// Linear interpolation onto `0, dt, 2dt, ...`.
///
/// The last original timestamp is always kept: it replaces the final grid
/// point when it falls on the grid (to within 1e-9 dt) and is appended
/// otherwise. The minimum segment length is not enforced here.
pub fn resample_uniform(segment: &DischargeSegment, dt: f64) -> Result<DischargeSegment> {
    segment.validate_series()?;
    if !dt.is_finite() || dt <= 0.0 {
        return Err(Error::Domain(format!("dt must be positive, got {dt}")));
    }
    let t_last = *segment.time.last().ok_or(Error::EmptyInput)?;
    if dt > t_last {
        return Err(Error::Domain(format!(
            "dt {dt} s exceeds segment span {t_last} s"
        )));
    }
    let steps = (t_last / dt + 1e-9).floor() as usize;
    let mut grid: Vec<f64> = (0..=steps).map(|k| k as f64 * dt).collect();
    let last = grid.len() - 1;
    if (grid[last] - t_last).abs() <= 1e-9 * dt {
        grid[last] = t_last;
    } else {
        grid.push(t_last);
    }
    let current = grid
        .iter()
        .map(|&t| interpolate(&segment.time, &segment.current, t))
        .collect();
    let voltage = grid
        .iter()
        .map(|&t| interpolate(&segment.time, &segment.voltage, t))
        .collect();
    let out = DischargeSegment {
        cell_id: segment.cell_id.clone(),
        cycle_index: segment.cycle_index,
        time: grid,
        current,
        voltage,
        soc_start: segment.soc_start,
        capacity: segment.capacity,
    };
    out.validate_series()?;
    Ok(out)
}
