//! Cylindrical Bessel functions of the first kind, orders 0 to 2.
//!
//! Below `series_cutoff` the ascending power series is summed in
//! double-double arithmetic, which absorbs the cancellation between its
//! large alternating terms. Above it the Hankel asymptotic expansion is
//! used in amplitude/phase form, with the phase reduction and both
//! trigonometric factors also carried in double-double so that values
//! stay accurate right up to the zeros.

pub mod reference;

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::dd::{cos_sin, Dd};
use crate::error::{Error, Result};

/// Tuning of the production kernels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BesselAccuracy {
    /// Arguments below this use the power series.
    pub series_cutoff: f64,
    pub target_rel_err: f64,
}

impl BesselAccuracy {
    pub const DEFAULT: BesselAccuracy = BesselAccuracy {
        series_cutoff: 25.0,
        target_rel_err: 1e-12,
    };

    pub fn validate(&self) -> Result<()> {
        if !(5.0..=30.0).contains(&self.series_cutoff) {
            return Err(Error::domain(format!(
                "series_cutoff must lie in [5, 30], got {}",
                self.series_cutoff
            )));
        }
        if !(self.target_rel_err > 0.0 && self.target_rel_err <= 1e-12) {
            return Err(Error::domain(format!(
                "target_rel_err must lie in (0, 1e-12], got {}",
                self.target_rel_err
            )));
        }
        Ok(())
    }
}

impl Default for BesselAccuracy {
    fn default() -> Self {
        Self::DEFAULT
    }
}

fn check_arg(x: f64) -> Result<()> {
    if x.is_finite() && x >= 0.0 {
        Ok(())
    } else {
        Err(Error::domain(format!(
            "Bessel argument must be finite and >= 0, got {x}"
        )))
    }
}

pub fn j0(x: f64) -> Result<f64> {
    check_arg(x)?;
    Ok(jn_unchecked(0, x))
}

pub fn j1(x: f64) -> Result<f64> {
    check_arg(x)?;
    Ok(jn_unchecked(1, x))
}

pub fn j2(x: f64) -> Result<f64> {
    check_arg(x)?;
    Ok(jn_unchecked(2, x))
}

/// `J_n(x)` with an explicit accuracy configuration.
pub fn jn_with(order: u32, x: f64, accuracy: &BesselAccuracy) -> Result<f64> {
    accuracy.validate()?;
    check_arg(x)?;
    if order > 2 {
        return Err(Error::domain(format!(
            "order {order} not supported (0..=2)"
        )));
    }
    Ok(if x < accuracy.series_cutoff {
        series_branch(order, x)
    } else {
        asymptotic_branch(order, x)
    })
}

/// `J1` for arguments already known to be finite and non-negative.
#[inline]
pub(crate) fn j1_unchecked(x: f64) -> f64 {
    jn_unchecked(1, x)
}

#[inline]
pub(crate) fn j0_unchecked(x: f64) -> f64 {
    jn_unchecked(0, x)
}

fn jn_unchecked(order: u32, x: f64) -> f64 {
    if x < BesselAccuracy::DEFAULT.series_cutoff {
        series_branch(order, x)
    } else {
        asymptotic_branch(order, x)
    }
}

/// Ascending series `Σ (-1)^k (x/2)^(2k+n) / (k! (k+n)!)` in double-double.
pub fn series_branch(order: u32, x: f64) -> f64 {
    let half = 0.5 * x;
    let q = Dd::square_of(half);
    let n = f64::from(order);
    let mut term = match order {
        0 => Dd::ONE,
        1 => Dd::from_f64(half),
        _ => q.div_f64(2.0),
    };
    let mut sum = term;
    let mut k = 1.0;
    while k < 500.0 {
        term = -(term * q).div_f64(k * (k + n));
        sum = sum + term;
        if term.hi == 0.0 || (k > half && term.hi.abs() <= 1e-33 * sum.hi.abs()) {
            break;
        }
        k += 1.0;
    }
    sum.to_f64()
}

/// Hankel expansion `sqrt(2/(πx)) (P cos χ - Q sin χ)`, `χ = x - (2n+1)π/4`,
/// truncated at its smallest term.
pub fn asymptotic_branch(order: u32, x: f64) -> f64 {
    let mu = 4.0 * f64::from(order * order);
    let mut p = Dd::ONE;
    let mut q = Dd::ZERO;
    let mut term = Dd::ONE;
    let mut last = f64::INFINITY;
    let mut k = 1u32;
    loop {
        let odd = f64::from(2 * k - 1);
        let next = term
            .mul_f64(mu - odd * odd)
            .div_f64(8.0 * f64::from(k))
            .div_f64(x);
        let size = next.hi.abs();
        if size >= last || next.hi == 0.0 {
            break;
        }
        // term_k enters P (k even) or Q (k odd) with alternating signs.
        let signed = if (k / 2).is_multiple_of(2) {
            next
        } else {
            -next
        };
        if k.is_multiple_of(2) {
            p = p + signed;
        } else {
            q = q + signed;
        }
        if size < 1e-33 {
            break;
        }
        term = next;
        last = size;
        k += 1;
    }
    let phase = Dd::from_f64(x) - Dd::FRAC_PI_4.mul_f64(f64::from(2 * order + 1));
    let (c, s) = cos_sin(phase);
    let oscillation = p * c - q * s;
    (2.0 / (PI * x)).sqrt() * oscillation.to_f64()
}

/// Leading asymptotic amplitude `sqrt(2/(πx))` of `|J1|`.
pub fn j1_envelope(x: f64) -> Result<f64> {
    if !(x.is_finite() && x > 0.0) {
        return Err(Error::domain(format!("envelope needs x > 0, got {x}")));
    }
    Ok((2.0 / (PI * x)).sqrt())
}

pub const MAX_ZERO_INDEX: u32 = 10_000;

/// The `k`-th positive zero of `J1`.
///
/// Starts from McMahon's estimate `β - 3/(8β)`, `β = (k + 1/4)π`, brackets
/// the sign change and polishes with Newton steps that never leave the
/// bracket.
pub fn j1_zero(k: u32) -> Result<f64> {
    if !(1..=MAX_ZERO_INDEX).contains(&k) {
        return Err(Error::domain(format!(
            "zero index must lie in [1, {MAX_ZERO_INDEX}], got {k}"
        )));
    }
    let beta = (f64::from(k) + 0.25) * PI;
    let guess = beta - 3.0 / (8.0 * beta);
    let (mut lo, mut hi) = (guess - 0.5, guess + 0.5);
    let mut f_lo = j1_unchecked(lo);
    let f_hi = j1_unchecked(hi);
    if f_lo.signum() == f_hi.signum() {
        return Err(Error::numerical(
            format!("failed to bracket zero {k} of J1"),
            guess,
        ));
    }
    let mut x = guess;
    for _ in 0..200 {
        let f = j1_unchecked(x);
        if f == 0.0 {
            return Ok(x);
        }
        if f.signum() == f_lo.signum() {
            lo = x;
            f_lo = f;
        } else {
            hi = x;
        }
        let slope = j0_unchecked(x) - f / x;
        let mut next = x - f / slope;
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - x).abs() <= 2.0 * f64::EPSILON * x || hi - lo <= 4.0 * f64::EPSILON * x {
            return Ok(next);
        }
        x = next;
    }
    Err(Error::numerical(
        format!("zero {k} of J1 did not converge"),
        x,
    ))
}

#[cfg(test)]
mod tests {
    use super::reference::{jn_series_exact, reference_zero};
    use super::*;

    #[test]
    fn values_at_origin() {
        assert_eq!(j0(0.0).unwrap(), 1.0);
        assert_eq!(j1(0.0).unwrap(), 0.0);
        assert_eq!(j2(0.0).unwrap(), 0.0);
    }

    #[test]
    fn fixture_values() {
        assert!((j1(1.0).unwrap() - 0.4400505857449335).abs() < 1e-16);
        assert!((j1(10.0).unwrap() - 0.04347274616886144).abs() < 1e-17);
        assert!((j0(1.0).unwrap() - 0.7651976865579666).abs() < 1e-16);
        assert!(j0(2.4048255577).unwrap().abs() < 1e-9);
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(j1(-1.0).is_err());
        assert!(j0(f64::NAN).is_err());
        assert!(j1(f64::INFINITY).is_err());
        assert!(j1_envelope(0.0).is_err());
        assert!(j1_zero(0).is_err());
        assert!(j1_zero(MAX_ZERO_INDEX + 1).is_err());
        let bad = BesselAccuracy {
            series_cutoff: 40.0,
            ..BesselAccuracy::DEFAULT
        };
        assert!(jn_with(1, 1.0, &bad).is_err());
        assert!(jn_with(3, 1.0, &BesselAccuracy::DEFAULT).is_err());
    }

    #[test]
    fn matches_reference_across_both_branches() {
        for i in 1..=400 {
            let x = 0.25 * i as f64;
            for n in 0..=2 {
                let want = jn_series_exact(n, x);
                let got = jn_unchecked(n, x);
                let err = (got - want).abs();
                assert!(
                    err <= 1e-12 * want.abs().max(1e-3),
                    "J{n}({x}): {got} vs {want}"
                );
            }
        }
    }

    #[test]
    fn branches_agree_in_overlap_window() {
        let cut = BesselAccuracy::DEFAULT.series_cutoff;
        for i in 0..=200 {
            let x = cut - 1.0 + 0.01 * i as f64;
            for n in 0..=2 {
                let s = series_branch(n, x);
                let a = asymptotic_branch(n, x);
                assert!(
                    (s - a).abs() <= 1e-11 * s.abs().max(1e-9) + 1e-16,
                    "J{n}({x}): series {s} asymptotic {a}"
                );
            }
        }
    }

    #[test]
    fn recurrence_residual() {
        for i in 0..=999 {
            let x = 0.1 + 0.1 * i as f64;
            let j2_rec = 2.0 * j1(x).unwrap() / x - j0(x).unwrap();
            assert!((j2_rec - jn_series_exact(2, x)).abs() <= 1e-10, "x = {x}");
            assert!((j0(x).unwrap() + j2(x).unwrap() - 2.0 * j1(x).unwrap() / x).abs() <= 1e-10);
        }
    }

    #[test]
    fn derivative_identity() {
        let h = 1e-5;
        for i in 0..=495 {
            let x = 0.5 + 0.1 * i as f64;
            let fd = (j1(x + h).unwrap() - j1(x - h).unwrap()) / (2.0 * h);
            let exact = j0(x).unwrap() - j1(x).unwrap() / x;
            assert!((fd - exact).abs() <= 1e-8, "x = {x}: {fd} vs {exact}");
        }
    }

    #[test]
    fn first_zeros_match_reference_root_finding() {
        let z1 = reference_zero(1, 3.5, 4.5);
        let z2 = reference_zero(1, 6.5, 7.5);
        assert!((z1 - 3.8317059702).abs() < 1e-10);
        assert!((z2 - 7.0155866698).abs() < 1e-10);
        assert!((j1_zero(1).unwrap() - z1).abs() < 1e-13);
        assert!((j1_zero(2).unwrap() - z2).abs() < 1e-13);
    }

    #[test]
    fn zeros_are_roots_and_ordered() {
        let mut prev = 0.0;
        for k in 1..=100 {
            let z = j1_zero(k).unwrap();
            assert!(z > prev);
            assert!(j1(z).unwrap().abs() <= 1e-10, "k = {k}");
            prev = z;
        }
        let spacing = j1_zero(101).unwrap() - j1_zero(100).unwrap();
        assert!((spacing - PI).abs() < 1e-3);
        // at x ~ 3e4 one ulp moves J1 by ~1e-14: demand a sign change across
        // the neighbouring floats instead of a tiny residual
        let far = j1_zero(MAX_ZERO_INDEX).unwrap();
        let below = j1(far - 2.0 * f64::EPSILON * far).unwrap();
        let above = j1(far + 2.0 * f64::EPSILON * far).unwrap();
        assert!(below * above <= 0.0);
    }

    #[test]
    fn envelope_examples() {
        assert!((j1_envelope(2.0 / PI).unwrap() - 1.0).abs() < 1e-15);
        assert!((j1_envelope(200.0).unwrap() - 0.05641895835477563).abs() < 1e-15);
    }

    #[test]
    fn local_maxima_hug_envelope() {
        // scan the reference series for local maxima of |J1| on [50, 100]
        let step = 1e-3;
        let xs: Vec<f64> = (0..=50_000).map(|i| 50.0 + step * i as f64).collect();
        let vals: Vec<f64> = xs.iter().map(|&x| jn_series_exact(1, x).abs()).collect();
        let mut peaks = 0;
        for i in 1..vals.len() - 1 {
            if vals[i] > vals[i - 1] && vals[i] >= vals[i + 1] {
                let env = j1_envelope(xs[i]).unwrap();
                assert!((vals[i] / env - 1.0).abs() < 0.01, "x = {}", xs[i]);
                peaks += 1;
            }
        }
        assert_eq!(peaks, 16);
    }
}
