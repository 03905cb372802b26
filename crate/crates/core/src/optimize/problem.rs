use crate::dataset::DischargeSegment;
use crate::ecm::{run_recurrence, CellSpec, EcmParams, OcvCurve};
use crate::error::{Error, Result};

use super::space::SearchSpace;

/// Identification problem: a measured segment, the OCV treatment and the
/// feasible box.
///
/// With `ocv = Some(..)` the search vector is the five circuit constants.
/// With `ocv = None` the OCV polynomial coefficients are appended to it.
#[derive(Debug, Clone)]
pub struct FitProblem {
    segment: DischargeSegment,
    ocv: Option<OcvCurve>,
    cell: CellSpec,
    space: SearchSpace,
}

impl FitProblem {
    pub fn new(
        segment: DischargeSegment,
        ocv: Option<OcvCurve>,
        cell: CellSpec,
        space: SearchSpace,
    ) -> Result<Self> {
        segment.validate()?;
        let expected = match &ocv {
            Some(_) => EcmParams::DIM,
            None => {
                if space.dim() <= EcmParams::DIM {
                    return Err(Error::DimensionMismatch {
                        expected: EcmParams::DIM + 1,
                        got: space.dim(),
                    });
                }
                space.dim()
            }
        };
        if space.dim() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                got: space.dim(),
            });
        }
        Ok(Self {
            segment,
            ocv,
            cell,
            space,
        })
    }

    /// Fixed-OCV problem with the default box; the cell comes from the segment.
    pub fn fixed_ocv(segment: DischargeSegment, ocv: OcvCurve) -> Result<Self> {
        let cell = segment.cell();
        Self::new(segment, Some(ocv), cell, SearchSpace::default_fixed())
    }

    /// Joint circuit + OCV problem with the default box.
    pub fn joint_ocv(segment: DischargeSegment, degree: usize) -> Result<Self> {
        let cell = segment.cell();
        Self::new(segment, None, cell, SearchSpace::default_joint(degree))
    }

    pub fn with_space(mut self, space: SearchSpace) -> Result<Self> {
        let dim = self.space.dim();
        if space.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: space.dim(),
            });
        }
        self.space = space;
        Ok(self)
    }

    pub fn segment(&self) -> &DischargeSegment {
        &self.segment
    }

    pub fn ocv(&self) -> Option<&OcvCurve> {
        self.ocv.as_ref()
    }

    pub fn cell(&self) -> &CellSpec {
        &self.cell
    }

    pub fn space(&self) -> &SearchSpace {
        &self.space
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    pub fn is_joint(&self) -> bool {
        self.ocv.is_none()
    }

    fn split(&self, theta: &[f64]) -> Result<(EcmParams, Option<OcvCurve>)> {
        if theta.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: theta.len(),
            });
        }
        let params = EcmParams::from_slice(theta)?;
        let ocv = match self.ocv {
            Some(_) => None,
            None => {
                let coeffs = &theta[EcmParams::DIM..];
                if coeffs.iter().any(|c| !c.is_finite()) {
                    return Err(Error::Domain("non-finite OCV coefficient".into()));
                }
                Some(OcvCurve::unchecked(coeffs.to_vec()))
            }
        };
        Ok((params, ocv))
    }

    /// Feed every `(k, predicted, measured)` triple to `visit`.
    pub(crate) fn visit_residuals(
        &self,
        theta: &[f64],
        mut visit: impl FnMut(usize, f64, f64),
    ) -> Result<()> {
        let (params, joint_curve) = self.split(theta)?;
        let curve = joint_curve
            .as_ref()
            .or(self.ocv.as_ref())
            .expect("either fixed or joint OCV");
        let seg = &self.segment;
        run_recurrence(
            &params,
            curve,
            &self.cell,
            &seg.time,
            &seg.current,
            |k, v, _| visit(k, v, seg.voltage[k]),
        );
        Ok(())
    }

    /// Residual vector `v_pred - v_meas`.
    pub fn residuals(&self, theta: &[f64]) -> Result<Vec<f64>> {
        let mut out = Vec::with_capacity(self.segment.len());
        self.visit_residuals(theta, |_, p, m| out.push(p - m))?;
        Ok(out)
    }

    /// Predicted terminal voltage at `theta`.
    pub fn predict(&self, theta: &[f64]) -> Result<Vec<f64>> {
        let mut out = Vec::with_capacity(self.segment.len());
        self.visit_residuals(theta, |_, p, _| out.push(p))?;
        Ok(out)
    }
}

/// Mean squared error between predicted and measured terminal voltage.
pub fn objective_mse(theta: &[f64], problem: &FitProblem) -> Result<f64> {
    let mut sum = 0.0;
    problem.visit_residuals(theta, |_, p, m| {
        let r = p - m;
        sum += r * r;
    })?;
    Ok(sum / problem.segment.len() as f64)
}
