//! Envelope of the oscillating Born cross section and its scaling under
//! `s_p, s_phi → λ s_p, λ s_phi` at fixed `ρ_L`.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classical::classical_dcs;
use crate::error::{require_positive, Error, Result};
use crate::quantum::{quantum_dcs, QuantumSetup, DEFAULT_FORWARD_EPS};

/// Fewest samples per oscillation period of the cross section.
pub const SAMPLES_PER_PERIOD: f64 = 24.0;
/// Default window, in oscillation periods.
pub const DEFAULT_WINDOW_PERIODS: f64 = 4.0;
pub const MIN_FIT_POINTS: usize = 8;

const GOLDEN_ITERATIONS: usize = 80;

/// Angular spacing `π / (s_p cos(θ/2))` between maxima of `J1²(2 s_p sin(θ/2))`.
pub fn oscillation_period(s_p: f64, theta: f64) -> f64 {
    PI / (s_p * (0.5 * theta).cos())
}

pub fn default_window(s_p: f64, theta: f64) -> f64 {
    DEFAULT_WINDOW_PERIODS * oscillation_period(s_p, theta)
}

/// Large-argument envelope obtained by replacing `|J1(x)|` with `√(2/(πx))`.
pub fn analytic_envelope(s_p: f64, s_phi: f64, theta: f64) -> Result<f64> {
    require_positive("s_p", s_p)?;
    require_positive("s_phi", s_phi)?;
    let s = (0.5 * theta).sin().abs();
    if s == 0.0 {
        return Err(Error::domain("analytic envelope is singular at theta = 0"));
    }
    Ok(s_phi * s_phi / (8.0 * PI * s_p.powi(3)) / (PI * s_p * s) / s.powi(4))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Peak {
    pub theta: f64,
    pub dcs: f64,
}

struct Window {
    setup: QuantumSetup,
    theta: f64,
    lo: f64,
    hi: f64,
    samples: usize,
}

impl Window {
    fn new(s_p: f64, s_phi: f64, theta: f64, window: f64) -> Result<Self> {
        let setup = QuantumSetup::new(s_p, s_phi)?;
        let theta = theta.abs();
        if !(theta > DEFAULT_FORWARD_EPS && theta < PI) {
            return Err(Error::domain(format!(
                "envelope angle must lie in ({DEFAULT_FORWARD_EPS}, pi), got {theta}"
            )));
        }
        let period = oscillation_period(s_p, theta);
        if !(window.is_finite() && window >= 3.0 * period * (1.0 - 1e-12)) {
            return Err(Error::domain(format!(
                "window {window} is shorter than three oscillation periods ({})",
                3.0 * period
            )));
        }
        let lo = (theta - 0.5 * window).max(DEFAULT_FORWARD_EPS);
        let hi = (theta + 0.5 * window).min(PI);
        // the period is shortest where cos(θ/2) is largest, at the low edge
        let shortest = oscillation_period(s_p, lo);
        let samples = (SAMPLES_PER_PERIOD * (hi - lo) / shortest).ceil() as usize + 1;
        Ok(Self {
            setup,
            theta,
            lo,
            hi,
            samples: samples.max(3),
        })
    }

    fn at(&self, i: usize) -> f64 {
        if i + 1 == self.samples {
            self.hi
        } else {
            self.lo + (self.hi - self.lo) * i as f64 / (self.samples - 1) as f64
        }
    }

    fn dcs(&self, theta: f64) -> Result<f64> {
        quantum_dcs(&self.setup, theta)
    }

    fn sampled(&self) -> Result<Vec<(f64, f64)>> {
        (0..self.samples)
            .map(|i| {
                let t = self.at(i);
                Ok((t, self.dcs(t)?))
            })
            .collect()
    }

    fn peaks(&self) -> Result<Vec<Peak>> {
        let samples = self.sampled()?;
        let mut peaks = Vec::new();
        for w in samples.windows(3) {
            if w[1].1 > w[0].1 && w[1].1 >= w[2].1 {
                peaks.push(self.refine(w[0].0, w[2].0)?);
            }
        }
        Ok(peaks)
    }

    fn refine(&self, mut a: f64, mut b: f64) -> Result<Peak> {
        let g = 0.5 * (5f64.sqrt() - 1.0);
        let mut c = b - g * (b - a);
        let mut d = a + g * (b - a);
        let mut fc = self.dcs(c)?;
        let mut fd = self.dcs(d)?;
        for _ in 0..GOLDEN_ITERATIONS {
            if fc > fd {
                b = d;
                d = c;
                fd = fc;
                c = b - g * (b - a);
                fc = self.dcs(c)?;
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + g * (b - a);
                fd = self.dcs(d)?;
            }
            if b - a <= 4.0 * f64::EPSILON * b {
                break;
            }
        }
        Ok(if fc > fd {
            Peak { theta: c, dcs: fc }
        } else {
            Peak { theta: d, dcs: fd }
        })
    }
}

/// Refined local maxima of `quantum_dcs` on `[θ − window/2, θ + window/2]`.
pub fn local_maxima(s_p: f64, s_phi: f64, theta: f64, window: f64) -> Result<Vec<Peak>> {
    Window::new(s_p, s_phi, theta, window)?.peaks()
}

/// Largest value of `quantum_dcs` over the window, maxima refined.
pub fn windowed_max(s_p: f64, s_phi: f64, theta: f64, window: f64) -> Result<f64> {
    let w = Window::new(s_p, s_phi, theta, window)?;
    let sampled = w.sampled()?.into_iter().map(|(_, v)| v);
    let peaks = w.peaks()?.into_iter().map(|p| p.dcs);
    Ok(sampled.chain(peaks).fold(0.0, f64::max))
}

/// Envelope of `quantum_dcs` at `θ`: the curve through the local maxima of
/// the cross section, interpolated log-linearly between the two maxima that
/// bracket `θ` inside the window.
pub fn envelope_at(s_p: f64, s_phi: f64, theta: f64, window: f64) -> Result<f64> {
    let w = Window::new(s_p, s_phi, theta, window)?;
    let peaks = w.peaks()?;
    let below = peaks.iter().rev().find(|p| p.theta <= w.theta);
    let above = peaks.iter().find(|p| p.theta >= w.theta);
    let (lo, hi) = match (below, above) {
        (Some(lo), Some(hi)) => (lo, hi),
        _ => {
            return Err(Error::domain(format!(
                "no J1 maximum on both sides of theta = {} within window {window}",
                w.theta
            )))
        }
    };
    if hi.theta == lo.theta {
        return Ok(lo.dcs);
    }
    let t = (w.theta - lo.theta) / (hi.theta - lo.theta);
    Ok((lo.dcs.ln() * (1.0 - t) + hi.dcs.ln() * t).exp())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingScan {
    pub rho_l: f64,
    pub theta: f64,
    pub s_p_base: f64,
    pub s_phi_base: f64,
    pub lambdas: Vec<f64>,
    pub s_p: Vec<f64>,
    pub s_phi: Vec<f64>,
    pub envelopes: Vec<f64>,
}

impl ScalingScan {
    pub fn len(&self) -> usize {
        self.lambdas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambdas.is_empty()
    }
}

/// `λ = 10^(k/2)` for `k = 0..=2·decades`.
pub fn standard_lambda_grid(decades: u32) -> Vec<f64> {
    (0..=2 * decades as i32)
        .map(|k| 10f64.powf(0.5 * k as f64))
        .collect()
}

pub fn scaling_scan(rho_l: f64, theta: f64, s_p_base: f64, lambdas: &[f64]) -> Result<ScalingScan> {
    require_positive("rho_l", rho_l)?;
    require_positive("s_p_base", s_p_base)?;
    if lambdas.is_empty() {
        return Err(Error::domain("lambda grid is empty"));
    }
    if lambdas[0] < 1.0
        || lambdas
            .windows(2)
            .any(|w| w[1].partial_cmp(&w[0]) != Some(std::cmp::Ordering::Greater))
    {
        return Err(Error::domain(
            "lambda grid must be strictly increasing and start at >= 1",
        ));
    }
    let s_phi_base = PI * s_p_base / rho_l;
    let points: Vec<(f64, f64)> = lambdas
        .iter()
        .map(|&l| (l * s_p_base, PI * l * s_p_base / rho_l))
        .collect();
    let envelopes = points
        .par_iter()
        .map(|&(s_p, s_phi)| envelope_at(s_p, s_phi, theta, default_window(s_p, theta)))
        .collect::<Result<Vec<_>>>()?;
    Ok(ScalingScan {
        rho_l,
        theta,
        s_p_base,
        s_phi_base,
        lambdas: lambdas.to_vec(),
        s_p: points.iter().map(|p| p.0).collect(),
        s_phi: points.iter().map(|p| p.1).collect(),
        envelopes,
    })
}

/// Least-squares line through `(ln x, ln y)`. Residuals are in natural log.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    pub slope: f64,
    pub intercept: f64,
    pub max_residual: f64,
    pub n_points: usize,
}

pub fn fit_loglog(x: &[f64], y: &[f64]) -> Result<ScalingFit> {
    if x.len() != y.len() {
        return Err(Error::domain(
            "fit abscissae and ordinates differ in length",
        ));
    }
    if x.len() < MIN_FIT_POINTS {
        return Err(Error::domain(format!(
            "log-log fit needs at least {MIN_FIT_POINTS} points, got {}",
            x.len()
        )));
    }
    if let Some(v) = x.iter().chain(y).find(|v| !(v.is_finite() && **v > 0.0)) {
        return Err(Error::domain(format!(
            "log-log fit needs finite positive values, got {v}"
        )));
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    // shifting by the first point keeps a constant series exactly flat
    let dx: Vec<f64> = lx.iter().map(|v| v - lx[0]).collect();
    let dy: Vec<f64> = ly.iter().map(|v| v - ly[0]).collect();
    let n = x.len() as f64;
    let mx = dx.iter().sum::<f64>() / n;
    let my = dy.iter().sum::<f64>() / n;
    let sxx: f64 = dx.iter().map(|v| (v - mx) * (v - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::domain("log-log fit needs distinct abscissae"));
    }
    let sxy: f64 = dx.iter().zip(&dy).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let shifted_intercept = my - slope * mx;
    let max_residual = dx
        .iter()
        .zip(&dy)
        .map(|(a, b)| (b - shifted_intercept - slope * a).abs())
        .fold(0.0, f64::max);
    Ok(ScalingFit {
        slope,
        intercept: ly[0] + shifted_intercept - slope * lx[0],
        max_residual,
        n_points: x.len(),
    })
}

pub fn fit_loglog_slope(scan: &ScalingScan) -> Result<ScalingFit> {
    fit_loglog(&scan.lambdas, &scan.envelopes)
}

/// Classical cross section at the scan's `(ρ_L, θ)`, once per `λ`.
pub fn classical_counterpart(scan: &ScalingScan) -> Result<Vec<f64>> {
    scan.lambdas
        .iter()
        .map(|_| classical_dcs(scan.rho_l, scan.theta))
        .collect()
}

/// `classical_dcs / envelope` along the scan.
pub fn classical_gap(scan: &ScalingScan) -> Result<Vec<f64>> {
    let classical = classical_counterpart(scan)?;
    Ok(classical
        .iter()
        .zip(&scan.envelopes)
        .map(|(c, e)| c / e)
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CouplingScan {
    pub s_p: f64,
    pub theta: f64,
    pub s_phi: Vec<f64>,
    pub envelopes: Vec<f64>,
}

/// Envelope at fixed `s_p` for each `s_phi`.
pub fn coupling_scan(s_p: f64, theta: f64, s_phi: &[f64]) -> Result<CouplingScan> {
    let window = default_window(s_p, theta);
    let envelopes = s_phi
        .par_iter()
        .map(|&f| envelope_at(s_p, f, theta, window))
        .collect::<Result<Vec<_>>>()?;
    Ok(CouplingScan {
        s_p,
        theta,
        s_phi: s_phi.to_vec(),
        envelopes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::rho_from_actions;

    #[test]
    fn grid_shape() {
        let g = standard_lambda_grid(4);
        assert_eq!(g.len(), 9);
        assert_eq!(g[0], 1.0);
        assert!((g[8] - 1e4).abs() < 1e-9);
        for w in g.windows(2) {
            assert!((w[1] / w[0] - 10f64.sqrt()).abs() < 1e-12);
        }
    }

    #[test]
    fn envelope_dominates_center() {
        for s_p in [20.0, 100.0, 1000.0] {
            let t = PI / 2.0;
            let setup = QuantumSetup::new(s_p, 3.0).unwrap();
            let w = default_window(s_p, t);
            let env = envelope_at(s_p, 3.0, t, w).unwrap();
            assert!(env >= quantum_dcs(&setup, t).unwrap());
            assert!(windowed_max(s_p, 3.0, t, w).unwrap() >= quantum_dcs(&setup, t).unwrap());
        }
    }

    #[test]
    fn envelope_matches_asymptotics() {
        for s_p in [100.0, 300.0, 1e3, 1e4] {
            for t in [PI / 4.0, PI / 2.0, 2.0] {
                let env = envelope_at(s_p, 5.0, t, default_window(s_p, t)).unwrap();
                let want = analytic_envelope(s_p, 5.0, t).unwrap();
                assert!(
                    (env / want - 1.0).abs() < 0.03,
                    "s_p={s_p} t={t}: {env} vs {want}"
                );
            }
        }
    }

    #[test]
    fn envelope_is_window_stable() {
        let t = PI / 2.0;
        let w = default_window(1e3, t);
        let a = envelope_at(1e3, 7.0, t, w).unwrap();
        let b = envelope_at(1e3, 7.0, t, 2.0 * w).unwrap();
        assert!((a / b - 1.0).abs() <= 0.02);
    }

    #[test]
    fn narrow_windows_are_rejected() {
        let t = PI / 2.0;
        let p = oscillation_period(100.0, t);
        assert!(envelope_at(100.0, 1.0, t, 2.0 * p).is_err());
        assert!(envelope_at(100.0, 1.0, 0.0, 3.0 * p).is_err());
        assert!(envelope_at(100.0, 1.0, t, 3.0 * p).is_ok());
    }

    #[test]
    fn standard_scan() {
        let scan = scaling_scan(0.5, PI / 2.0, 100.0, &standard_lambda_grid(4)).unwrap();
        for w in scan.envelopes.windows(2) {
            assert!(w[1] < w[0]);
        }
        for (s_p, s_phi) in scan.s_p.iter().zip(&scan.s_phi) {
            assert!((rho_from_actions(*s_p, *s_phi).unwrap() / 0.5 - 1.0).abs() < 1e-14);
        }
        let fit = fit_loglog_slope(&scan).unwrap();
        assert!((fit.slope + 2.0).abs() <= 0.05, "{fit:?}");
        assert!(fit.max_residual <= 0.02, "{fit:?}");
        assert_eq!(fit.n_points, 9);

        let ten = scaling_scan(0.5, PI / 2.0, 100.0, &[1.0, 10.0]).unwrap();
        let ratio = ten.envelopes[1] / ten.envelopes[0];
        assert!((ratio / 1e-2 - 1.0).abs() <= 0.1, "{ratio}");

        let classical = classical_counterpart(&scan).unwrap();
        let flat = fit_loglog(&scan.lambdas, &classical).unwrap();
        assert_eq!(flat.slope, 0.0);
        let gap = fit_loglog(&scan.lambdas, &classical_gap(&scan).unwrap()).unwrap();
        assert!((gap.slope - 2.0).abs() <= 0.05);
    }

    #[test]
    fn coupling_is_quadratic() {
        let phis: Vec<f64> = (0..9).map(|k| 0.1 * 2f64.powi(k)).collect();
        let scan = coupling_scan(50.0, 1.0, &phis).unwrap();
        let fit = fit_loglog(&scan.s_phi, &scan.envelopes).unwrap();
        assert!((fit.slope - 2.0).abs() < 1e-12, "{fit:?}");
        assert!(fit.max_residual < 1e-12);
    }

    #[test]
    fn fit_preconditions() {
        let x: Vec<f64> = (1..=8).map(f64::from).collect();
        let y: Vec<f64> = x.iter().map(|v| 3.0 * v.powf(-1.5)).collect();
        let fit = fit_loglog(&x, &y).unwrap();
        assert!((fit.slope + 1.5).abs() < 1e-13);
        assert!((fit.intercept - 3f64.ln()).abs() < 1e-13);
        assert!(fit_loglog(&x[..7], &y[..7]).is_err());
        let mut bad = y.clone();
        bad[3] = f64::NAN;
        assert!(fit_loglog(&x, &bad).is_err());
        assert!(fit_loglog(&[2.0; 8], &y).is_err());
        assert!(scaling_scan(0.5, 1.0, 100.0, &[1.0, 1.0]).is_err());
        assert!(scaling_scan(0.5, 1.0, 100.0, &[0.5, 1.0]).is_err());
    }
}
