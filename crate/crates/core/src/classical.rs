//! Classical scattering by a uniform field confined to the unit disk.
//!
//! A particle with impact parameter `b` (units of `R`) runs along a circle of
//! radius `rho_l` inside the solenoid and leaves deflected by
//! `θ(b) = 2·atan2(√(1-b²), b + rho_l)`. The cross section is the flux
//! folding `Σ |db/dθ|` over every impact parameter that reaches `θ`.
//!
//! Positive angles are the rotation sense of the interior orbit. Reversing
//! the field or the charge maps `θ → -θ`; see [`FieldOrientation`].

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{require_positive, Error, Result};
use crate::quadrature;

/// Exclusion radius around the fold angle, radians.
pub const CAUSTIC_EPS: f64 = 1e-6;

/// Power of `(θ_max - θ)` governing the fold divergence.
pub const CAUSTIC_EXPONENT: f64 = -0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FieldOrientation {
    #[default]
    Standard,
    Mirrored,
}

impl FieldOrientation {
    pub fn apply(self, theta: f64) -> f64 {
        match self {
            FieldOrientation::Standard => theta,
            FieldOrientation::Mirrored => -theta,
        }
    }
}

/// One impact parameter reaching a given angle, with `|db/dθ|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Branch {
    pub b: f64,
    pub jacobian: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchSet {
    pub theta: f64,
    pub branches: Vec<Branch>,
}

impl BranchSet {
    pub fn jacobian_sum(&self) -> f64 {
        self.branches.iter().map(|br| br.jacobian).sum()
    }
}

fn check_impact(b: f64) -> Result<()> {
    if b.is_finite() && b.abs() <= 1.0 {
        Ok(())
    } else {
        Err(Error::domain(format!(
            "impact parameter must satisfy |b| <= 1, got {b}"
        )))
    }
}

fn check_angle(theta: f64) -> Result<f64> {
    if !theta.is_finite() || theta.abs() > PI {
        return Err(Error::domain(format!(
            "angle must lie in (-pi, pi], got {theta}"
        )));
    }
    if theta == 0.0 {
        return Err(Error::ForwardExclusion { theta, eps: 0.0 });
    }
    Ok(if theta == -PI { PI } else { theta })
}

/// Deflection before wrapping: `2·atan2(√(1-b²), b + rho)` in `[0, 2π]`.
fn raw_deflection(rho_l: f64, b: f64) -> f64 {
    2.0 * (1.0 - b * b).max(0.0).sqrt().atan2(b + rho_l)
}

fn wrap(raw: f64) -> f64 {
    if raw > PI {
        raw - TAU
    } else {
        raw
    }
}

/// `a - b` reduced to `(-π, π]`; deflections of `π` and `-π` coincide.
pub fn angle_difference(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    if d > PI {
        d - TAU
    } else {
        d
    }
}

/// Exit angle of a particle entering with impact parameter `b`.
pub fn deflection_angle(rho_l: f64, b: f64) -> Result<f64> {
    require_positive("rho_l", rho_l)?;
    check_impact(b)?;
    if b.abs() == 1.0 {
        return Ok(0.0);
    }
    Ok(wrap(raw_deflection(rho_l, b)))
}

/// `dθ/db = -2(1 + b·rho) / (√(1-b²)(1 + 2b·rho + rho²))`.
pub fn deflection_slope(rho_l: f64, b: f64) -> f64 {
    let s = (1.0 - b * b).sqrt();
    -2.0 * (1.0 + b * rho_l) / (s * (1.0 + 2.0 * b * rho_l + rho_l * rho_l))
}

fn jacobian_at(rho_l: f64, b: f64) -> f64 {
    let s = (1.0 - b * b).max(0.0).sqrt();
    s * (1.0 + 2.0 * b * rho_l + rho_l * rho_l) / (2.0 * (1.0 + b * rho_l).abs())
}

/// Impact parameter where `dθ/db` vanishes, if it lies in `[-1, 1]`.
pub fn fold_point(rho_l: f64) -> Option<f64> {
    (rho_l >= 1.0).then(|| -1.0 / rho_l)
}

/// Largest attainable deflection: `2·arcsin(1/rho_l)` for `rho_l >= 1`,
/// `π` (the whole circle) below.
///
/// At the fold `b* = -1/rho_l` the deflection satisfies
/// `tan(θ/2) = 1/√(rho_l² - 1)`, i.e. `sin(θ_max/2) = 1/rho_l`. The same
/// angle is where `√(1 - rho_l² sin²(θ/2))` in the folded cross section
/// vanishes.
pub fn theta_max(rho_l: f64) -> Result<f64> {
    require_positive("rho_l", rho_l)?;
    Ok(if rho_l >= 1.0 {
        2.0 * (1.0 / rho_l).asin()
    } else {
        PI
    })
}

/// Bisects a monotone stretch `(lo, hi)` of the raw deflection for `target`.
/// Endpoints are never evaluated, so limits at `b = ±1` need not be finite.
fn bisect(rho_l: f64, mut lo: f64, mut hi: f64, target: f64, increasing: bool) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let above = raw_deflection(rho_l, mid) > target;
        if above == increasing {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Every impact parameter scattered into `theta`, without caustic checks.
fn branches_unchecked(rho_l: f64, theta: f64) -> Vec<Branch> {
    let make = |b: f64| Branch {
        b,
        jacobian: jacobian_at(rho_l, b),
    };
    if rho_l < 1.0 {
        // raw deflection falls monotonically from 2π (b = -1) to 0 (b = 1)
        let target = if theta > 0.0 { theta } else { theta + TAU };
        return vec![make(bisect(rho_l, -1.0, 1.0, target, false))];
    }
    let top = 2.0 * (1.0 / rho_l).asin();
    if theta <= 0.0 || theta >= top {
        return Vec::new();
    }
    let fold = -1.0 / rho_l;
    let mut out = Vec::with_capacity(2);
    if fold > -1.0 {
        out.push(make(bisect(rho_l, -1.0, fold, theta, true)));
    }
    out.push(make(bisect(rho_l, fold, 1.0, theta, false)));
    out
}

pub fn impact_parameters_for(rho_l: f64, theta: f64) -> Result<BranchSet> {
    require_positive("rho_l", rho_l)?;
    let theta = check_angle(theta)?;
    Ok(BranchSet {
        theta,
        branches: branches_unchecked(rho_l, theta),
    })
}

/// Classical cross section in units of `R`, as the sum of `|db/dθ|` over
/// branches. Angles outside the attainable range give 0.
pub fn classical_dcs(rho_l: f64, theta: f64) -> Result<f64> {
    require_positive("rho_l", rho_l)?;
    let theta = check_angle(theta)?;
    if rho_l > 1.0 {
        let top = 2.0 * (1.0 / rho_l).asin();
        if (theta - top).abs() < CAUSTIC_EPS {
            return Err(Error::CausticDivergence {
                theta,
                theta_max: top,
                exponent: CAUSTIC_EXPONENT,
            });
        }
    }
    Ok(branches_unchecked(rho_l, theta)
        .iter()
        .map(|br| br.jacobian)
        .sum())
}

pub fn classical_dcs_oriented(
    rho_l: f64,
    theta: f64,
    orientation: FieldOrientation,
) -> Result<f64> {
    classical_dcs(rho_l, orientation.apply(theta))
}

/// The two closed-form terms of the folded cross section,
/// `|sinθ/2 · (rho ± (1 + rho² cosθ) / (2 cos(θ/2) √(1 - rho² sin²(θ/2))))|`.
///
/// Evaluated with `sinθ / cos(θ/2) = 2 sin(θ/2)` cancelled so that `θ = ±π`
/// is regular. Both terms are even in `θ`.
pub fn closed_form_terms(rho_l: f64, theta: f64) -> Result<(f64, f64)> {
    require_positive("rho_l", rho_l)?;
    let theta = check_angle(theta)?;
    let half_sin = (0.5 * theta).sin();
    let radicand = 1.0 - rho_l * rho_l * half_sin * half_sin;
    if radicand <= 0.0 {
        return Err(Error::domain(format!(
            "theta = {theta} lies beyond the fold angle for rho_l = {rho_l}"
        )));
    }
    let a = 0.5 * theta.sin() * rho_l;
    let c = half_sin * (1.0 + rho_l * rho_l * theta.cos()) / (2.0 * radicand.sqrt());
    Ok(((a + c).abs(), (a - c).abs()))
}

/// Closed form with the second term switched on by the step `Θ(rho_l - 1)`
/// (taken as 0 at `rho_l = 1`). For `rho_l < 1` this is even in `θ` and
/// reproduces the cross section only for `θ > 0`.
pub fn classical_dcs_closed_form(rho_l: f64, theta: f64) -> Result<f64> {
    let (first, second) = closed_form_terms(rho_l, theta)?;
    Ok(if rho_l > 1.0 { first + second } else { first })
}

/// Impenetrable-solenoid limit `|sin(θ/2)| / 2`.
pub fn limit_dcs_impenetrable(theta: f64) -> Result<f64> {
    if !theta.is_finite() || theta.abs() > PI {
        return Err(Error::domain(format!(
            "angle must lie in (-pi, pi], got {theta}"
        )));
    }
    Ok(0.5 * (0.5 * theta).sin().abs())
}

/// Smallest Larmor ratio accepted by the narrow-cone approximation.
pub const HIGH_ENERGY_MIN_RHO: f64 = 10.0;

/// Narrow-cone approximation `θ(1 + rho²) / √(4 - rho²θ²)`.
pub fn limit_dcs_high_energy(rho_l: f64, theta: f64) -> Result<f64> {
    if !(rho_l.is_finite() && rho_l >= HIGH_ENERGY_MIN_RHO) {
        return Err(Error::domain(format!(
            "high-energy limit needs rho_l >= {HIGH_ENERGY_MIN_RHO}, got {rho_l}"
        )));
    }
    if !(theta.is_finite() && theta >= 0.0) {
        return Err(Error::domain(format!(
            "high-energy limit needs theta >= 0, got {theta}"
        )));
    }
    let radicand = 4.0 - rho_l * rho_l * theta * theta;
    if radicand <= 0.0 {
        return Err(Error::domain(format!(
            "rho_l * theta = {} must be < 2",
            rho_l * theta
        )));
    }
    Ok(theta * (1.0 + rho_l * rho_l) / radicand.sqrt())
}

/// Integral of the cross section over all attainable angles, units of `R`.
///
/// Flux conservation makes this 2 (the solenoid's diameter). Beyond the
/// fold the substitution `θ = θ_max - u²` removes the inverse square root.
pub fn total_cross_section(rho_l: f64) -> Result<f64> {
    require_positive("rho_l", rho_l)?;
    let dcs = |theta: f64| {
        branches_unchecked(rho_l, theta)
            .iter()
            .map(|b| b.jacobian)
            .sum::<f64>()
    };
    let (abs_tol, rel_tol, max_intervals) = (1e-10, 1e-10, 2000);
    if rho_l < 1.0 {
        let neg = quadrature::integrate(dcs, -PI, 0.0, abs_tol, rel_tol, max_intervals)?;
        let pos = quadrature::integrate(dcs, 0.0, PI, abs_tol, rel_tol, max_intervals)?;
        return Ok(neg.value + pos.value);
    }
    let top = 2.0 * (1.0 / rho_l).asin();
    let q = quadrature::integrate(
        |u: f64| 2.0 * u * dcs(top - u * u),
        0.0,
        top.sqrt(),
        abs_tol,
        rel_tol,
        max_intervals,
    )?;
    Ok(q.value)
}
