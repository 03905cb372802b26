//! Two-branch (dual polarization) equivalent circuit model.

mod ocv;
mod params;
mod sim;

pub use ocv::{fit_ocv, OcvCurve, OCV_ENVELOPE};
pub use params::{canonicalize, CellSpec, EcmParams};
pub use sim::{
    branch_decay_factor, coulomb_count, simulate_terminal_voltage, step_branch, Simulation,
    SimulationState,
};
pub(crate) use sim::{run_recurrence, validate_profile};
