use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Circuit constants of the two-branch model.
///
/// Resistances in ohm, capacitances in farad. The constructor checks
/// positivity and finiteness but does not force canonical branch order;
/// use [`EcmParams::canonical`] for that.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EcmParams {
    pub r0: f64,
    pub r1: f64,
    pub c1: f64,
    pub r2: f64,
    pub c2: f64,
}

impl EcmParams {
    pub const DIM: usize = 5;
    pub const NAMES: [&'static str; 5] = ["r0", "r1", "c1", "r2", "c2"];

    pub fn new(r0: f64, r1: f64, c1: f64, r2: f64, c2: f64) -> Result<Self> {
        let p = Self { r0, r1, c1, r2, c2 };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in Self::NAMES.iter().zip(self.to_array()) {
            if !v.is_finite() || v <= 0.0 {
                return Err(Error::InvalidParams(format!(
                    "{name} must be positive and finite, got {v}"
                )));
            }
        }
        Ok(())
    }

    pub fn from_slice(theta: &[f64]) -> Result<Self> {
        if theta.len() < Self::DIM {
            return Err(Error::DimensionMismatch {
                expected: Self::DIM,
                got: theta.len(),
            });
        }
        Self::new(theta[0], theta[1], theta[2], theta[3], theta[4])
    }

    pub fn to_array(&self) -> [f64; 5] {
        [self.r0, self.r1, self.c1, self.r2, self.c2]
    }

    pub fn tau1(&self) -> f64 {
        self.r1 * self.c1
    }

    pub fn tau2(&self) -> f64 {
        self.r2 * self.c2
    }

    pub fn is_canonical(&self) -> bool {
        self.tau1() <= self.tau2()
    }

    /// Branch-swapped copy with the faster time constant first.
    pub fn canonical(&self) -> Self {
        if self.is_canonical() {
            *self
        } else {
            Self {
                r0: self.r0,
                r1: self.r2,
                c1: self.c2,
                r2: self.r1,
                c2: self.c1,
            }
        }
    }

    pub fn swapped(&self) -> Self {
        Self {
            r0: self.r0,
            r1: self.r2,
            c1: self.c2,
            r2: self.r1,
            c2: self.c1,
        }
    }
}

/// Swap the two RC pairs of a parameter vector when the first branch is
/// the slower one. Trailing OCV coefficients are left in place.
pub fn canonicalize(theta: &[f64]) -> Vec<f64> {
    let mut out = theta.to_vec();
    if out.len() >= EcmParams::DIM && out[1] * out[2] > out[3] * out[4] {
        out.swap(1, 3);
        out.swap(2, 4);
    }
    out
}

/// Nominal capacity and starting SOC of the simulated cell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CellSpec {
    /// Ampere-hour.
    pub capacity: f64,
    pub soc_init: f64,
}

impl CellSpec {
    pub fn new(capacity: f64, soc_init: f64) -> Result<Self> {
        if !capacity.is_finite() || capacity <= 0.0 {
            return Err(Error::Domain(format!(
                "capacity must be positive, got {capacity}"
            )));
        }
        if !(0.0..=1.0).contains(&soc_init) {
            return Err(Error::Domain(format!(
                "soc_init must lie in [0, 1], got {soc_init}"
            )));
        }
        Ok(Self { capacity, soc_init })
    }
}
