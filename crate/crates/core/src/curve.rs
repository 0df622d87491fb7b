//! Cross sections sampled on uniform angle grids.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classical::{self, FieldOrientation, CAUSTIC_EPS};
use crate::error::{Error, Result};
use crate::quantum::{self, QuantumSetup};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AngleGrid {
    /// Strictly increasing, in `[-π, π]`.
    pub thetas: Vec<f64>,
    pub exclusion_eps: f64,
    pub singularities: Vec<f64>,
}

impl AngleGrid {
    /// `n` evenly spaced angles from `lo` to `hi`, minus any within
    /// `exclusion_eps` of a singular angle.
    pub fn uniform(
        lo: f64,
        hi: f64,
        n: usize,
        singularities: &[f64],
        exclusion_eps: f64,
    ) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && -PI <= lo && lo < hi && hi <= PI) {
            return Err(Error::domain(format!(
                "angle range must satisfy -pi <= theta_min < theta_max <= pi, got [{lo}, {hi}]"
            )));
        }
        if n < 2 {
            return Err(Error::domain(format!(
                "grid needs at least 2 points, got {n}"
            )));
        }
        if exclusion_eps.is_nan() || exclusion_eps < 0.0 {
            return Err(Error::domain("exclusion_eps must be >= 0"));
        }
        let step = (hi - lo) / (n - 1) as f64;
        let thetas: Vec<f64> = (0..n)
            .map(|i| if i + 1 == n { hi } else { lo + step * i as f64 })
            .filter(|t| singularities.iter().all(|s| (t - s).abs() >= exclusion_eps))
            .collect();
        if thetas.is_empty() {
            return Err(Error::domain(
                "every grid angle falls inside an excluded neighbourhood",
            ));
        }
        Ok(Self {
            thetas,
            exclusion_eps,
            singularities: singularities.to_vec(),
        })
    }

    pub fn len(&self) -> usize {
        self.thetas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.thetas.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DcsKind {
    Classical,
    Quantum,
    AharonovBohm,
    Impenetrable,
    HighEnergy,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DcsCurve {
    pub grid: AngleGrid,
    pub values: Vec<f64>,
    pub kind: DcsKind,
}

impl DcsCurve {
    fn evaluate<F>(grid: AngleGrid, kind: DcsKind, f: F) -> Result<Self>
    where
        F: Fn(f64) -> Result<f64> + Sync,
    {
        let values = grid
            .thetas
            .par_iter()
            .map(|&t| f(t))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { grid, values, kind })
    }

    pub fn classical(rho_l: f64, lo: f64, hi: f64, n: usize) -> Result<Self> {
        Self::classical_oriented(rho_l, lo, hi, n, FieldOrientation::Standard)
    }

    pub fn classical_oriented(
        rho_l: f64,
        lo: f64,
        hi: f64,
        n: usize,
        orientation: FieldOrientation,
    ) -> Result<Self> {
        let top = classical::theta_max(rho_l)?;
        let singular: Vec<f64> = if rho_l > 1.0 {
            vec![0.0, -top, top]
        } else {
            vec![0.0]
        };
        let grid = AngleGrid::uniform(lo, hi, n, &singular, CAUSTIC_EPS)?;
        Self::evaluate(grid, DcsKind::Classical, |t| {
            classical::classical_dcs_oriented(rho_l, t, orientation)
        })
    }

    pub fn quantum(setup: &QuantumSetup, lo: f64, hi: f64, n: usize) -> Result<Self> {
        let grid = AngleGrid::uniform(lo, hi, n, &[0.0], setup.forward_eps)?;
        Self::evaluate(grid, DcsKind::Quantum, |t| quantum::quantum_dcs(setup, t))
    }

    pub fn aharonov_bohm(setup: &QuantumSetup, lo: f64, hi: f64, n: usize) -> Result<Self> {
        let grid = AngleGrid::uniform(lo, hi, n, &[0.0], setup.forward_eps)?;
        Self::evaluate(grid, DcsKind::AharonovBohm, |t| quantum::ab_dcs(setup, t))
    }

    pub fn impenetrable(lo: f64, hi: f64, n: usize) -> Result<Self> {
        let grid = AngleGrid::uniform(lo, hi, n, &[], 0.0)?;
        Self::evaluate(
            grid,
            DcsKind::Impenetrable,
            classical::limit_dcs_impenetrable,
        )
    }

    pub fn high_energy(rho_l: f64, lo: f64, hi: f64, n: usize) -> Result<Self> {
        let grid = AngleGrid::uniform(lo, hi, n, &[0.0], CAUSTIC_EPS)?;
        Self::evaluate(grid, DcsKind::HighEnergy, |t| {
            classical::limit_dcs_high_energy(rho_l, t)
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_drops_singular_points() {
        let g = AngleGrid::uniform(-1.0, 1.0, 201, &[0.0], 1e-3).unwrap();
        assert_eq!(g.len(), 200);
        assert!(g.thetas.windows(2).all(|w| w[1] > w[0]));
        assert_eq!(*g.thetas.last().unwrap(), 1.0);
        assert!(AngleGrid::uniform(1.0, -1.0, 10, &[], 0.0).is_err());
        assert!(AngleGrid::uniform(-4.0, 1.0, 10, &[], 0.0).is_err());
        assert!(AngleGrid::uniform(-1.0, 1.0, 1, &[], 0.0).is_err());
    }

    #[test]
    fn classical_curve_example() {
        let c = DcsCurve::classical(0.5, -3.1, 3.1, 256).unwrap();
        assert_eq!(c.values.len(), 256);
        let (i, _) = c
            .grid
            .thetas
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1 - PI / 2.0).abs().total_cmp(&(b.1 - PI / 2.0).abs()))
            .unwrap();
        assert!((c.values[i] - 0.628).abs() < 0.01, "{}", c.values[i]);
    }

    #[test]
    fn caustic_is_skipped() {
        let top = classical::theta_max(2.0).unwrap();
        let c = DcsCurve::classical(2.0, top - 1e-3, top + 1e-3, 3).unwrap();
        assert_eq!(c.grid.len(), 2);
        assert_eq!(c.values[1], 0.0);
    }

    #[test]
    fn ab_curve_vanishes_on_flux_quanta() {
        let setup = QuantumSetup::new(1.0, 2.0 * PI).unwrap();
        let c = DcsCurve::aharonov_bohm(&setup, -PI, PI, 128).unwrap();
        assert!(c.values.iter().all(|v| *v < 1e-27));
        let q = DcsCurve::quantum(&setup, -PI, PI, 129).unwrap();
        assert_eq!(q.grid.len(), 128);
    }
}
