//! Open-circuit voltage as a polynomial in SOC.

use std::fmt::Write as _;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Voltage envelope a single Li-ion cell's OCV must stay within.
pub const OCV_ENVELOPE: (f64, f64) = (0.5, 6.0);

const ENVELOPE_SAMPLES: usize = 201;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OcvCurve {
    /// Lowest degree first.
    coefficients: Vec<f64>,
    valid_range: (f64, f64),
}

impl OcvCurve {
    pub fn new(coefficients: Vec<f64>, valid_range: (f64, f64)) -> Result<Self> {
        let curve = Self {
            coefficients,
            valid_range,
        };
        curve.validate()?;
        Ok(curve)
    }

    /// Curve over the full SOC range `[0, 1]`.
    pub fn with_coefficients(coefficients: Vec<f64>) -> Result<Self> {
        Self::new(coefficients, (0.0, 1.0))
    }

    /// Constant OCV.
    pub fn constant(volts: f64) -> Result<Self> {
        Self::with_coefficients(vec![volts])
    }

    /// Skips the envelope check. Used for candidate coefficient vectors
    /// during joint identification, where any finite polynomial is allowed.
    pub(crate) fn unchecked(coefficients: Vec<f64>) -> Self {
        Self {
            coefficients,
            valid_range: (0.0, 1.0),
        }
    }

    fn validate(&self) -> Result<()> {
        if self.coefficients.is_empty() {
            return Err(Error::InvalidOcv(
                "at least one coefficient required".into(),
            ));
        }
        if let Some(c) = self.coefficients.iter().find(|c| !c.is_finite()) {
            return Err(Error::InvalidOcv(format!("non-finite coefficient {c}")));
        }
        let (lo, hi) = self.valid_range;
        if !(0.0..=1.0).contains(&lo) || !(0.0..=1.0).contains(&hi) || lo > hi {
            return Err(Error::InvalidOcv(format!(
                "valid range [{lo}, {hi}] must lie within [0, 1]"
            )));
        }
        let (vmin, vmax) = OCV_ENVELOPE;
        for k in 0..ENVELOPE_SAMPLES {
            let soc = lo + (hi - lo) * k as f64 / (ENVELOPE_SAMPLES - 1) as f64;
            let v = self.horner(soc);
            if !(vmin..=vmax).contains(&v) {
                return Err(Error::InvalidOcv(format!(
                    "OCV({soc}) = {v} V outside [{vmin}, {vmax}] V"
                )));
            }
        }
        Ok(())
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn valid_range(&self) -> (f64, f64) {
        self.valid_range
    }

    pub fn degree(&self) -> usize {
        self.coefficients.len() - 1
    }

    fn horner(&self, soc: f64) -> f64 {
        self.coefficients
            .iter()
            .rev()
            .fold(0.0, |acc, &c| acc * soc + c)
    }

    /// OCV at `soc`, clamped to the valid range first.
    pub fn eval(&self, soc: f64) -> f64 {
        let (lo, hi) = self.valid_range;
        self.horner(soc.clamp(lo, hi))
    }

    /// Parse the plain-text curve format: one coefficient per line, lowest
    /// degree first, optional `# ocv degree=<n>` header.
    pub fn parse(text: &str) -> Result<Self> {
        let mut declared_degree = None;
        let mut coefficients = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(comment) = line.strip_prefix('#') {
                if let Some(deg) = comment.trim().strip_prefix("ocv degree=") {
                    let d = deg.trim().parse::<usize>().map_err(|e| Error::Parse {
                        line: idx + 1,
                        message: format!("bad degree `{deg}`: {e}"),
                    })?;
                    declared_degree = Some(d);
                }
                continue;
            }
            let c = line.parse::<f64>().map_err(|e| Error::Parse {
                line: idx + 1,
                message: format!("bad coefficient `{line}`: {e}"),
            })?;
            coefficients.push(c);
        }
        if let Some(d) = declared_degree {
            if coefficients.len() != d + 1 {
                return Err(Error::InvalidOcv(format!(
                    "header declares degree {d} but {} coefficients follow",
                    coefficients.len()
                )));
            }
        }
        Self::with_coefficients(coefficients)
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("# ocv degree={}\n", self.degree());
        for c in &self.coefficients {
            let _ = writeln!(s, "{c}");
        }
        s
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }
}

/// Least-squares polynomial of the given degree through `(soc, volts)` points.
///
/// The returned curve's valid range spans the sampled SOC values.
pub fn fit_ocv(points: &[(f64, f64)], degree: usize) -> Result<OcvCurve> {
    let n = points.len();
    let m = degree + 1;
    if n < m {
        return Err(Error::RankDeficient(format!(
            "degree {degree} needs at least {m} points, got {n}"
        )));
    }
    if points.iter().any(|(s, v)| !s.is_finite() || !v.is_finite()) {
        return Err(Error::Domain("non-finite OCV sample".into()));
    }
    let mut socs: Vec<f64> = points.iter().map(|p| p.0).collect();
    socs.sort_by(f64::total_cmp);
    socs.dedup();
    if socs.len() < m {
        return Err(Error::RankDeficient(format!(
            "degree {degree} needs {m} distinct SOC values, got {}",
            socs.len()
        )));
    }

    let vander = DMatrix::from_fn(n, m, |i, j| points[i].0.powi(j as i32));
    let rhs = DVector::from_iterator(n, points.iter().map(|p| p.1));
    let svd = vander.svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if smax == 0.0 || smin / smax < 1e-13 {
        return Err(Error::RankDeficient(format!(
            "Vandermonde condition too poor (sigma_min/sigma_max = {:e})",
            if smax == 0.0 { 0.0 } else { smin / smax }
        )));
    }
    let sol = svd
        .solve(&rhs, 0.0)
        .map_err(|e| Error::RankDeficient(e.to_string()))?;

    let range = (
        socs[0].clamp(0.0, 1.0),
        socs[socs.len() - 1].clamp(0.0, 1.0),
    );
    OcvCurve::new(sol.iter().copied().collect(), range)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn eval_examples() {
        let c = OcvCurve::constant(3.7).unwrap();
        assert_eq!(c.eval(0.5), 3.7);

        let lin = OcvCurve::with_coefficients(vec![3.0, 1.0]).unwrap();
        assert_eq!(lin.eval(0.25), 3.25);
        assert_eq!(lin.eval(1.5), 4.0);
        assert_eq!(lin.eval(-1.0), 3.0);
    }

    #[test]
    fn envelope_enforced() {
        assert!(OcvCurve::constant(0.2).is_err());
        assert!(OcvCurve::constant(7.0).is_err());
        assert!(OcvCurve::with_coefficients(vec![]).is_err());
        assert!(OcvCurve::with_coefficients(vec![3.0, f64::NAN]).is_err());
        // in range at soc=0, leaves the envelope before soc=1
        assert!(OcvCurve::with_coefficients(vec![3.0, 4.0]).is_err());
        assert!(OcvCurve::new(vec![3.0], (0.5, 1.2)).is_err());
    }

    #[test]
    fn fit_two_points_line() {
        let c = fit_ocv(&[(0.0, 3.0), (1.0, 4.0)], 1).unwrap();
        assert_abs_diff_eq!(c.coefficients()[0], 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(c.coefficients()[1], 1.0, epsilon = 1e-12);
    }

    #[test]
    fn fit_noiseless_quadratic() {
        let pts: Vec<(f64, f64)> = (0..10)
            .map(|k| {
                let s = k as f64 / 9.0;
                (s, 3.2 + 0.9 * s * s)
            })
            .collect();
        let c = fit_ocv(&pts, 2).unwrap();
        let want = [3.2, 0.0, 0.9];
        for (got, want) in c.coefficients().iter().zip(want) {
            assert_abs_diff_eq!(*got, want, epsilon = 1e-9);
        }
    }

    #[test]
    fn fit_line_matches_normal_equations() {
        let pts = [(0.0, 3.0), (0.5, 3.6), (1.0, 3.9)];
        let c = fit_ocv(&pts, 1).unwrap();
        // 2x2 normal equations solved by Cramer's rule
        let n = pts.len() as f64;
        let sx: f64 = pts.iter().map(|p| p.0).sum();
        let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
        let sy: f64 = pts.iter().map(|p| p.1).sum();
        let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
        let det = n * sxx - sx * sx;
        let a0 = (sy * sxx - sx * sxy) / det;
        let a1 = (n * sxy - sx * sy) / det;
        assert_abs_diff_eq!(c.coefficients()[0], a0, epsilon = 1e-12);
        assert_abs_diff_eq!(c.coefficients()[1], a1, epsilon = 1e-12);
        assert_abs_diff_eq!(a0, 3.05, epsilon = 1e-12);
        assert_abs_diff_eq!(a1, 0.9, epsilon = 1e-12);
    }

    #[test]
    fn fit_rank_deficient() {
        assert!(matches!(
            fit_ocv(&[(0.5, 3.0), (0.5, 3.1), (0.5, 3.2)], 1),
            Err(Error::RankDeficient(_))
        ));
        assert!(matches!(
            fit_ocv(&[(0.5, 3.0)], 1),
            Err(Error::RankDeficient(_))
        ));
    }

    #[test]
    fn file_format() {
        let c = OcvCurve::parse("# ocv degree=1\n3.0\n1.0\n").unwrap();
        assert_eq!(c.coefficients(), &[3.0, 1.0]);
        assert_eq!(OcvCurve::parse(&c.to_text()).unwrap(), c);

        let no_header = OcvCurve::parse("3.7\n").unwrap();
        assert_eq!(no_header.coefficients(), &[3.7]);

        assert!(OcvCurve::parse("# ocv degree=2\n3.0\n1.0\n").is_err());
        assert!(matches!(
            OcvCurve::parse("3.0\nabc\n"),
            Err(Error::Parse { line: 2, .. })
        ));
    }
}
