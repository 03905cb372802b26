//! Cycler-log ingestion and discharge-window extraction.

mod archive;
mod segment;

pub use archive::{invert_current, parse_timeseries, read_timeseries, ColumnMap, RawRecord};
pub use segment::{
    discharge_segments, extract_discharge_window, resample_uniform, segment_cycles, CycleRun,
    DischargeSegment, WindowPolicy, MIN_SEGMENT_LEN,
};
