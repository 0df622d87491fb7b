//! Born-level and Aharonov–Bohm cross sections, and the radial profiles of
//! the vector potential and its Fourier vertex.
//!
//! Cross sections are in units of `R`; `ħ/p` enters as `R/s_p`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::bessel::{self, j0_unchecked, j1_unchecked};
use crate::error::{require_positive, Error, Result};
use crate::quadrature::gauss_kronrod_15;

pub const DEFAULT_FORWARD_EPS: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuantumSetup {
    pub s_p: f64,
    pub s_phi: f64,
    /// Half-width of the excluded cone around `θ = 0`, radians.
    pub forward_eps: f64,
}

impl QuantumSetup {
    pub fn new(s_p: f64, s_phi: f64) -> Result<Self> {
        Self::with_forward_eps(s_p, s_phi, DEFAULT_FORWARD_EPS)
    }

    pub fn with_forward_eps(s_p: f64, s_phi: f64, forward_eps: f64) -> Result<Self> {
        require_positive("s_p", s_p)?;
        require_positive("s_phi", s_phi)?;
        if !(forward_eps > 0.0 && forward_eps < 0.1) {
            return Err(Error::domain(format!(
                "forward_eps must lie in (0, 0.1), got {forward_eps}"
            )));
        }
        Ok(Self {
            s_p,
            s_phi,
            forward_eps,
        })
    }

    /// `|sin(θ/2)|` after checking the angle against the forward cone.
    fn half_sine(&self, theta: f64) -> Result<f64> {
        if !theta.is_finite() || theta.abs() > PI {
            return Err(Error::domain(format!(
                "angle must lie in [-pi, pi], got {theta}"
            )));
        }
        if theta.abs() < self.forward_eps {
            return Err(Error::ForwardExclusion {
                theta,
                eps: self.forward_eps,
            });
        }
        Ok((0.5 * theta).sin().abs())
    }
}

/// Signed square root of the Born cross section,
/// `√(s_phi²/(8π s_p³)) · J1(2 s_p |sin(θ/2)|) / sin²(θ/2)`.
pub fn quantum_amplitude(setup: &QuantumSetup, theta: f64) -> Result<f64> {
    let s = setup.half_sine(theta)?;
    let scale = setup.s_phi / (8.0 * PI * setup.s_p.powi(3)).sqrt();
    Ok(scale * j1_unchecked(2.0 * setup.s_p * s) / (s * s))
}

/// First-order cross section
/// `(1/8π)(s_phi²/s_p³) |J1(2 s_p |sin(θ/2)|) / sin²(θ/2)|²`.
pub fn quantum_dcs(setup: &QuantumSetup, theta: f64) -> Result<f64> {
    let s = setup.half_sine(theta)?;
    let ratio = j1_unchecked(2.0 * setup.s_p * s) / (s * s);
    Ok(setup.s_phi * setup.s_phi / (8.0 * PI * setup.s_p.powi(3)) * ratio * ratio)
}

/// Zero-radius result `sin²(s_phi/2) / (2π s_p sin²(θ/2))`.
pub fn ab_dcs(setup: &QuantumSetup, theta: f64) -> Result<f64> {
    let s = setup.half_sine(theta)?;
    let flux = (0.5 * setup.s_phi).sin();
    Ok(flux * flux / (2.0 * PI * setup.s_p * s * s))
}

/// Angles `2·arcsin(j_{1,k} / (2 s_p))` where the Born cross section
/// vanishes, for every zero with `j_{1,k} <= 2 s_p`.
pub fn bessel_zero_angles(s_p: f64) -> Result<Vec<f64>> {
    require_positive("s_p", s_p)?;
    let mut out = Vec::new();
    for k in 1..=bessel::MAX_ZERO_INDEX {
        let z = bessel::j1_zero(k)?;
        if z > 2.0 * s_p {
            break;
        }
        out.push(2.0 * (z / (2.0 * s_p)).asin());
    }
    Ok(out)
}

/// Azimuthal vector potential in units of `Φ/(2πR)`: `r` inside, `1/r` outside.
pub fn gauge_profile(r: f64) -> Result<f64> {
    if !(r.is_finite() && r >= 0.0) {
        return Err(Error::domain(format!("radius must be >= 0, got {r}")));
    }
    Ok(if r < 1.0 { r } else { 1.0 / r })
}

/// Scalar part `J1(q)/q²` of the Fourier vertex, `q` in units of `ħ/R`.
pub fn vertex_profile(q: f64) -> Result<f64> {
    require_positive("q", q)?;
    Ok(j1_unchecked(q) / (q * q))
}

/// A radial function for [`hankel1_transform`].
pub trait RadialProfile {
    fn value(&self, r: f64) -> f64;

    /// Coefficient `c` of the `c/r` behaviour beyond the integration cutoff,
    /// used for the analytic tail.
    fn inverse_r_tail(&self) -> f64 {
        0.0
    }

    /// Radii where the profile has a kink; panels are aligned to them.
    fn breakpoints(&self) -> Vec<f64> {
        Vec::new()
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct GaugeProfile;

impl RadialProfile for GaugeProfile {
    fn value(&self, r: f64) -> f64 {
        if r < 1.0 {
            r
        } else {
            1.0 / r
        }
    }

    fn inverse_r_tail(&self) -> f64 {
        1.0
    }

    fn breakpoints(&self) -> Vec<f64> {
        vec![1.0]
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ZeroProfile;

impl RadialProfile for ZeroProfile {
    fn value(&self, _: f64) -> f64 {
        0.0
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Scaled<P> {
    pub inner: P,
    pub factor: f64,
}

impl<P: RadialProfile> RadialProfile for Scaled<P> {
    fn value(&self, r: f64) -> f64 {
        self.factor * self.inner.value(r)
    }

    fn inverse_r_tail(&self) -> f64 {
        self.factor * self.inner.inverse_r_tail()
    }

    fn breakpoints(&self) -> Vec<f64> {
        self.inner.breakpoints()
    }
}

/// Fewest quadrature points per period of `J1(q r)`.
pub const MIN_POINTS_PER_OSCILLATION: f64 = 20.0;

const NODES_PER_PANEL: usize = 15;

/// `∫₀^∞ profile(r) J1(q r) r dr` by 15-point Kronrod panels on
/// `[0, r_max]` plus `c · J0(q r_max) / q` for a `c/r` tail.
pub fn hankel1_transform<P: RadialProfile>(
    profile: &P,
    q: f64,
    r_max: f64,
    n_points: usize,
) -> Result<f64> {
    require_positive("q", q)?;
    if !(r_max.is_finite() && r_max * q >= 50.0) {
        return Err(Error::domain(format!(
            "r_max must be at least 50/q = {}, got {r_max}",
            50.0 / q
        )));
    }
    let oscillations = q * r_max / (2.0 * PI);
    if (n_points as f64) < MIN_POINTS_PER_OSCILLATION * oscillations {
        return Err(Error::numerical(
            format!(
                "{n_points} points leave the {oscillations:.1} oscillations of J1 unresolved (need {})",
                (MIN_POINTS_PER_OSCILLATION * oscillations).ceil()
            ),
            f64::NAN,
        ));
    }
    let mut cuts = vec![0.0];
    cuts.extend(
        profile
            .breakpoints()
            .into_iter()
            .filter(|&r| r > 0.0 && r < r_max),
    );
    cuts.push(r_max);
    let panels_total = (n_points / NODES_PER_PANEL).max(cuts.len() - 1);
    let mut sum = 0.0;
    for seg in cuts.windows(2) {
        let (a, b) = (seg[0], seg[1]);
        let panels = ((panels_total as f64 * (b - a) / r_max).ceil() as usize).max(1);
        let width = (b - a) / panels as f64;
        let mut f = |r: f64| profile.value(r) * j1_unchecked(q * r) * r;
        for i in 0..panels {
            let lo = a + width * i as f64;
            let hi = if i + 1 == panels { b } else { lo + width };
            sum += gauss_kronrod_15(&mut f, lo, hi).0;
        }
    }
    let tail = profile.inverse_r_tail();
    if tail != 0.0 {
        sum += tail * j0_unchecked(q * r_max) / q;
    }
    Ok(sum)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn born_is_even() {
        let setup = QuantumSetup::new(7.3, 2.1).unwrap();
        for i in 1..=300 {
            let t = 0.01 * i as f64;
            let t = t.min(PI);
            assert_eq!(
                quantum_dcs(&setup, t).unwrap(),
                quantum_dcs(&setup, -t).unwrap()
            );
            assert_eq!(ab_dcs(&setup, t).unwrap(), ab_dcs(&setup, -t).unwrap());
        }
    }

    #[test]
    fn born_fixture() {
        // 40-digit reference evaluation
        let setup = QuantumSetup::new(10.0, 2.0 * PI).unwrap();
        let v = quantum_dcs(&setup, PI / 2.0).unwrap();
        assert!((v - 1.505851611679784e-4).abs() < 1e-15);
        let amp = quantum_amplitude(&setup, PI / 2.0).unwrap();
        assert!((amp * amp - v).abs() < 1e-18);
    }

    #[test]
    fn forward_cone_is_rejected() {
        let setup = QuantumSetup::new(10.0, 1.0).unwrap();
        assert!(matches!(
            quantum_dcs(&setup, 1e-4),
            Err(Error::ForwardExclusion { .. })
        ));
        assert!(matches!(
            ab_dcs(&setup, 0.0),
            Err(Error::ForwardExclusion { .. })
        ));
        assert!(quantum_dcs(&setup, 4.0).is_err());
        assert!(QuantumSetup::with_forward_eps(1.0, 1.0, 0.2).is_err());
        assert!(QuantumSetup::new(0.0, 1.0).is_err());
    }

    #[test]
    fn forward_limit() {
        let setup = QuantumSetup::with_forward_eps(10.0, 3.0, 1e-4).unwrap();
        let theta = 1e-3;
        let s = (theta / 2.0_f64).sin();
        let got = quantum_dcs(&setup, theta).unwrap() * s * s;
        let want = 9.0 / (8.0 * PI * 10.0);
        assert!((got / want - 1.0).abs() < 1e-4);
    }

    #[test]
    fn first_zero_angle() {
        let angles = bessel_zero_angles(10.0).unwrap();
        assert!((angles[0] - 0.3855542231166328).abs() < 1e-12);
        // j_{1,6} = 19.616 <= 20 < j_{1,7}
        assert_eq!(angles.len(), 6);
        let setup = QuantumSetup::new(10.0, 1.0).unwrap();
        for &t in &angles {
            assert!(quantum_dcs(&setup, t).unwrap() < 1e-25);
        }
    }

    #[test]
    fn aharonov_bohm_examples() {
        let setup = QuantumSetup::new(1.0, PI).unwrap();
        assert!((ab_dcs(&setup, PI).unwrap() - 1.0 / (2.0 * PI)).abs() < 1e-15);
        for n in 1..4 {
            let s = QuantumSetup::new(1.0, 2.0 * PI * n as f64).unwrap();
            assert!(ab_dcs(&s, 1.0).unwrap() < 1e-30);
        }
        let a = QuantumSetup::new(2.0, 0.7).unwrap();
        let b = QuantumSetup::new(2.0, 0.7 + 2.0 * PI).unwrap();
        assert!((ab_dcs(&a, 0.4).unwrap() / ab_dcs(&b, 0.4).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn born_reduces_to_aharonov_bohm() {
        let setup = QuantumSetup::new(1e-3, 1e-3).unwrap();
        for i in 0..=200 {
            let t = (0.1 + (PI - 0.1) * i as f64 / 200.0).min(PI);
            for theta in [t, -t] {
                let born = quantum_dcs(&setup, theta).unwrap();
                let ab = ab_dcs(&setup, theta).unwrap();
                assert!(((born - ab) / ab).abs() <= 1e-5);
            }
        }
    }

    #[test]
    fn profiles() {
        assert_eq!(gauge_profile(1.0).unwrap(), 1.0);
        assert!((gauge_profile(1.0 - 1e-12).unwrap() - 1.0).abs() < 1e-11);
        assert_eq!(gauge_profile(0.5).unwrap(), 0.5);
        assert_eq!(gauge_profile(2.0).unwrap(), 0.5);
        assert!(gauge_profile(-1.0).is_err());
        assert!((vertex_profile(1.0).unwrap() - 0.4400505857449335).abs() < 1e-15);
        assert!(vertex_profile(bessel::j1_zero(1).unwrap()).unwrap().abs() < 1e-16);
        assert!((1e-6 * vertex_profile(1e-6).unwrap() - 0.5).abs() < 1e-12);
        assert!(vertex_profile(0.0).is_err());
    }

    fn closed_form(q: f64) -> f64 {
        2.0 * j1_unchecked(q) / (q * q)
    }

    fn standard(q: f64) -> (f64, usize) {
        let r_max = (50.0 / q).max(20.0);
        let n = (40.0 * q * r_max / (2.0 * PI)).ceil() as usize + 60;
        (r_max, n)
    }

    #[test]
    fn gauge_transform_matches_closed_form() {
        for i in 0..=39 {
            let q = 0.5 + 19.5 * i as f64 / 39.0;
            let (r_max, n) = standard(q);
            let got = hankel1_transform(&GaugeProfile, q, r_max, n).unwrap();
            let want = closed_form(q);
            assert!(
                ((got - want) / want).abs() <= 1e-8,
                "q = {q}: {got} vs {want}"
            );
        }
    }

    #[test]
    fn transform_is_linear() {
        let (r_max, n) = standard(3.0);
        assert_eq!(hankel1_transform(&ZeroProfile, 3.0, r_max, n).unwrap(), 0.0);
        let base = hankel1_transform(&GaugeProfile, 3.0, r_max, n).unwrap();
        let scaled = hankel1_transform(
            &Scaled {
                inner: GaugeProfile,
                factor: -2.5,
            },
            3.0,
            r_max,
            n,
        )
        .unwrap();
        assert!((scaled + 2.5 * base).abs() < 1e-14);
    }

    #[test]
    fn transform_preconditions() {
        assert!(hankel1_transform(&GaugeProfile, 2.0, 10.0, 10_000).is_err());
        let err = hankel1_transform(&GaugeProfile, 2.0, 30.0, 50).unwrap_err();
        assert!(err.is_numerical());
        assert!(hankel1_transform(&GaugeProfile, 0.0, 30.0, 50).is_err());
    }

    proptest! {
        #[test]
        fn even_in_angle(s_p in 1e-3f64..1e4, s_phi in 1e-3f64..1e3, theta in 1e-3f64..=PI) {
            let setup = QuantumSetup::new(s_p, s_phi).unwrap();
            prop_assert_eq!(
                quantum_dcs(&setup, theta).unwrap().to_bits(),
                quantum_dcs(&setup, -theta).unwrap().to_bits()
            );
            prop_assert_eq!(
                ab_dcs(&setup, theta).unwrap().to_bits(),
                ab_dcs(&setup, -theta).unwrap().to_bits()
            );
        }

        #[test]
        fn quadratic_in_coupling(s_p in 0.1f64..1e3, s_phi in 1e-2f64..1e2, k in 0.1f64..10.0, theta in 0.01f64..3.0) {
            let a = quantum_dcs(&QuantumSetup::new(s_p, s_phi).unwrap(), theta).unwrap();
            let b = quantum_dcs(&QuantumSetup::new(s_p, k * s_phi).unwrap(), theta).unwrap();
            if a > 0.0 {
                prop_assert!((b / (a * k * k) - 1.0).abs() < 1e-13);
            }
        }
    }
}
