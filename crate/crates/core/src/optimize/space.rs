use serde::{Deserialize, Serialize};

use crate::ecm::{canonicalize, EcmParams};
use crate::error::{Error, Result};
use crate::kv::{self, KeyValues};

/// How a coordinate is mapped onto the unit interval the optimizers search.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Scale {
    /// Logarithmic; bounds must be positive.
    Log,
    Linear,
}

/// Box bounds over the parameter vector `(r0, r1, c1, r2, c2, ocv_0, ..., ocv_n)`.
///
/// Circuit parameters are searched on a log scale, OCV coefficients on a
/// linear one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchSpace {
    lower: Vec<f64>,
    upper: Vec<f64>,
    scales: Vec<Scale>,
}

impl SearchSpace {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != upper.len() {
            return Err(Error::DimensionMismatch {
                expected: lower.len(),
                got: upper.len(),
            });
        }
        if lower.len() < EcmParams::DIM {
            return Err(Error::DimensionMismatch {
                expected: EcmParams::DIM,
                got: lower.len(),
            });
        }
        let scales = (0..lower.len())
            .map(|j| {
                if j < EcmParams::DIM {
                    Scale::Log
                } else {
                    Scale::Linear
                }
            })
            .collect();
        let space = Self {
            lower,
            upper,
            scales,
        };
        space.validate()?;
        Ok(space)
    }

    fn validate(&self) -> Result<()> {
        for j in 0..self.dim() {
            let (lo, hi) = (self.lower[j], self.upper[j]);
            let name = Self::name(j);
            if !lo.is_finite() || !hi.is_finite() || lo >= hi {
                return Err(Error::Config(format!(
                    "bounds for {name} must satisfy lo < hi, got [{lo}, {hi}]"
                )));
            }
            if self.scales[j] == Scale::Log && lo <= 0.0 {
                return Err(Error::Config(format!(
                    "lower bound for {name} must be positive, got {lo}"
                )));
            }
        }
        Ok(())
    }

    /// Default circuit box for fixed-OCV identification.
    pub fn default_fixed() -> Self {
        Self::new(
            vec![1e-4, 1e-4, 10.0, 1e-4, 1e2],
            vec![1.0, 1.0, 1e4, 1.0, 1e6],
        )
        .expect("default bounds are valid")
    }

    /// Default box for joint circuit + OCV identification with a polynomial
    /// of the given degree.
    pub fn default_joint(degree: usize) -> Self {
        let fixed = Self::default_fixed();
        let mut lower = fixed.lower;
        let mut upper = fixed.upper;
        lower.push(2.5);
        upper.push(4.5);
        for _ in 0..degree {
            lower.push(-5.0);
            upper.push(5.0);
        }
        Self::new(lower, upper).expect("default bounds are valid")
    }

    pub fn name(j: usize) -> String {
        match EcmParams::NAMES.get(j) {
            Some(n) => n.to_string(),
            None => format!("ocv{}", j - EcmParams::DIM),
        }
    }

    /// Apply `bounds.<name>.lo` / `bounds.<name>.hi` overrides.
    pub fn with_overrides(mut self, kv: &KeyValues) -> Result<Self> {
        for j in 0..self.dim() {
            let name = Self::name(j);
            kv::set(kv, &format!("bounds.{name}.lo"), &mut self.lower[j])?;
            kv::set(kv, &format!("bounds.{name}.hi"), &mut self.upper[j])?;
        }
        if let Some(key) = kv.keys().filter(|k| k.starts_with("bounds.")).find(|k| {
            !(0..self.dim()).any(|j| {
                let n = Self::name(j);
                **k == format!("bounds.{n}.lo") || **k == format!("bounds.{n}.hi")
            })
        }) {
            return Err(Error::Config(format!("unknown bound key `{key}`")));
        }
        self.validate()?;
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn scales(&self) -> &[Scale] {
        &self.scales
    }

    /// Coordinate `j` of `theta` in the optimizer's internal scale
    /// (natural log for log-scaled coordinates).
    pub(crate) fn to_internal(&self, j: usize, v: f64) -> f64 {
        match self.scales[j] {
            Scale::Log => v.ln(),
            Scale::Linear => v,
        }
    }

    pub(crate) fn value_from_internal(&self, j: usize, z: f64) -> f64 {
        let v = match self.scales[j] {
            Scale::Log => z.exp(),
            Scale::Linear => z,
        };
        v.clamp(self.lower[j], self.upper[j])
    }

    pub(crate) fn internal_bounds(&self, j: usize) -> (f64, f64) {
        (
            self.to_internal(j, self.lower[j]),
            self.to_internal(j, self.upper[j]),
        )
    }

    /// Map a point of the unit cube onto the box.
    pub fn from_unit(&self, u: &[f64]) -> Vec<f64> {
        u.iter()
            .enumerate()
            .map(|(j, &x)| {
                if x <= 0.0 {
                    return self.lower[j];
                }
                if x >= 1.0 {
                    return self.upper[j];
                }
                let (zlo, zhi) = self.internal_bounds(j);
                self.value_from_internal(j, zlo + x * (zhi - zlo))
            })
            .collect()
    }

    pub fn to_unit(&self, theta: &[f64]) -> Vec<f64> {
        theta
            .iter()
            .enumerate()
            .map(|(j, &v)| {
                let (zlo, zhi) = self.internal_bounds(j);
                let v = v.clamp(self.lower[j], self.upper[j]);
                ((self.to_internal(j, v) - zlo) / (zhi - zlo)).clamp(0.0, 1.0)
            })
            .collect()
    }

    /// Midpoint of the box in the internal scale.
    pub fn center(&self) -> Vec<f64> {
        self.from_unit(&vec![0.5; self.dim()])
    }

    pub fn clamp(&self, theta: &[f64]) -> Vec<f64> {
        theta
            .iter()
            .enumerate()
            .map(|(j, &v)| v.clamp(self.lower[j], self.upper[j]))
            .collect()
    }

    pub fn contains(&self, theta: &[f64]) -> bool {
        theta.len() == self.dim()
            && theta
                .iter()
                .enumerate()
                .all(|(j, &v)| (self.lower[j]..=self.upper[j]).contains(&v))
    }

    /// True when `theta`, or `theta` with its RC branches swapped, lies in
    /// the box. Canonical reordering may move a point across the `c1`/`c2`
    /// bounds, which differ.
    pub fn contains_up_to_swap(&self, theta: &[f64]) -> bool {
        if self.contains(theta) {
            return true;
        }
        let mut swapped = theta.to_vec();
        if swapped.len() >= EcmParams::DIM {
            swapped.swap(1, 3);
            swapped.swap(2, 4);
        }
        self.contains(&swapped) || self.contains(&canonicalize(theta))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_consistent() {
        let s = SearchSpace::default_fixed();
        assert_eq!(s.dim(), 5);
        let j = SearchSpace::default_joint(5);
        assert_eq!(j.dim(), 11);
        assert_eq!(j.scales()[5], Scale::Linear);
    }

    #[test]
    fn unit_mapping_hits_bounds() {
        let s = SearchSpace::default_fixed();
        assert_eq!(s.from_unit(&[0.0; 5]), s.lower().to_vec());
        assert_eq!(s.from_unit(&[1.0; 5]), s.upper().to_vec());
        let c = s.center();
        assert!((c[0] - 1e-2).abs() < 1e-15);
        assert!((c[4] - 1e4).abs() < 1e-9);
        let u = s.to_unit(&c);
        assert!(u.iter().all(|x| (x - 0.5).abs() < 1e-12));
    }

    #[test]
    fn overrides() {
        let kv = crate::kv::parse_kv("bounds.r0.lo=0.001\nbounds.c2.hi=5e5\n").unwrap();
        let s = SearchSpace::default_fixed().with_overrides(&kv).unwrap();
        assert_eq!(s.lower()[0], 0.001);
        assert_eq!(s.upper()[4], 5e5);

        let bad = crate::kv::parse_kv("bounds.r9.lo=1\n").unwrap();
        assert!(SearchSpace::default_fixed().with_overrides(&bad).is_err());
        let inverted = crate::kv::parse_kv("bounds.r0.lo=2\n").unwrap();
        assert!(SearchSpace::default_fixed()
            .with_overrides(&inverted)
            .is_err());
    }

    #[test]
    fn rejects_bad_boxes() {
        assert!(SearchSpace::new(vec![0.0; 5], vec![1.0; 5]).is_err());
        assert!(SearchSpace::new(vec![1.0; 5], vec![1.0; 5]).is_err());
        assert!(SearchSpace::new(vec![0.1; 4], vec![1.0; 4]).is_err());
    }
}
