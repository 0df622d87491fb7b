//! Double-double arithmetic built on error-free transforms.
//!
//! A value is the unevaluated sum `hi + lo` with `|lo| <= ulp(hi)/2`, giving
//! roughly 106 bits of significand.

use std::ops::{Add, Mul, Neg, Sub};

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Dd {
    pub hi: f64,
    pub lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let e = (a - (s - bb)) + (b - bb);
    (s, e)
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

impl Dd {
    pub const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };
    pub const ONE: Dd = Dd { hi: 1.0, lo: 0.0 };
    pub const FRAC_PI_2: Dd = Dd {
        hi: std::f64::consts::FRAC_PI_2,
        lo: 6.123233995736766e-17,
    };
    pub const FRAC_PI_4: Dd = Dd {
        hi: std::f64::consts::FRAC_PI_4,
        lo: 3.061616997868383e-17,
    };

    #[inline]
    pub fn from_f64(x: f64) -> Dd {
        Dd { hi: x, lo: 0.0 }
    }

    #[inline]
    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    /// Exact square of an `f64`.
    #[inline]
    pub fn square_of(x: f64) -> Dd {
        let (hi, lo) = two_prod(x, x);
        Dd { hi, lo }
    }

    #[inline]
    pub fn mul_f64(self, b: f64) -> Dd {
        let (p, e) = two_prod(self.hi, b);
        let e = e + self.lo * b;
        let (hi, lo) = quick_two_sum(p, e);
        Dd { hi, lo }
    }

    #[inline]
    pub fn div_f64(self, b: f64) -> Dd {
        let q1 = self.hi / b;
        let (p1, p2) = two_prod(q1, b);
        let (s, e) = two_sum(self.hi, -p1);
        let e = e - p2 + self.lo;
        let q2 = (s + e) / b;
        let (hi, lo) = quick_two_sum(q1, q2);
        Dd { hi, lo }
    }
}

impl Add for Dd {
    type Output = Dd;
    #[inline]
    fn add(self, b: Dd) -> Dd {
        let (s1, s2) = two_sum(self.hi, b.hi);
        let (t1, t2) = two_sum(self.lo, b.lo);
        let s2 = s2 + t1;
        let (s1, s2) = quick_two_sum(s1, s2);
        let s2 = s2 + t2;
        let (hi, lo) = quick_two_sum(s1, s2);
        Dd { hi, lo }
    }
}

impl Neg for Dd {
    type Output = Dd;
    #[inline]
    fn neg(self) -> Dd {
        Dd {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

impl Sub for Dd {
    type Output = Dd;
    #[inline]
    fn sub(self, b: Dd) -> Dd {
        self + (-b)
    }
}

impl Mul for Dd {
    type Output = Dd;
    #[inline]
    fn mul(self, b: Dd) -> Dd {
        let (p, e) = two_prod(self.hi, b.hi);
        let e = e + (self.hi * b.lo + self.lo * b.hi);
        let (hi, lo) = quick_two_sum(p, e);
        Dd { hi, lo }
    }
}

/// `(cos x, sin x)` in double-double precision for moderate `|x|`.
pub(crate) fn cos_sin(x: Dd) -> (Dd, Dd) {
    let k = (x.hi / Dd::FRAC_PI_2.hi).round();
    let r = x - Dd::FRAC_PI_2.mul_f64(k);
    let (c, s) = cos_sin_reduced(r);
    match (k as i64).rem_euclid(4) {
        0 => (c, s),
        1 => (-s, c),
        2 => (-c, -s),
        _ => (s, -c),
    }
}

/// Taylor series on `|r| <= π/4`.
fn cos_sin_reduced(r: Dd) -> (Dd, Dd) {
    let r2 = r * r;
    let mut sin = r;
    let mut cos = Dd::ONE;
    let mut s_term = r;
    let mut c_term = Dd::ONE;
    let mut n = 1.0;
    loop {
        // c_term: r^(n+1)/(n+1)!, s_term: r^(n+2)/(n+2)!
        c_term = -(c_term * r2).div_f64(n * (n + 1.0));
        s_term = -(s_term * r2).div_f64((n + 1.0) * (n + 2.0));
        cos = cos + c_term;
        sin = sin + s_term;
        if c_term.hi.abs() < 1e-34 && s_term.hi.abs() < 1e-34 {
            break;
        }
        n += 2.0;
    }
    (cos, sin)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn division_recovers_product() {
        let a = Dd::from_f64(1.0).div_f64(3.0);
        let back = a.mul_f64(3.0);
        assert!((back - Dd::ONE).to_f64().abs() < 1e-31);
    }

    #[test]
    fn trig_matches_libm() {
        for i in 0..2000 {
            let x = -50.0 + 0.0503 * i as f64;
            let (c, s) = cos_sin(Dd::from_f64(x));
            assert!((c.to_f64() - x.cos()).abs() < 2e-16, "cos {x}");
            assert!((s.to_f64() - x.sin()).abs() < 2e-16, "sin {x}");
            let unit = c * c + s * s - Dd::ONE;
            assert!(unit.to_f64().abs() < 1e-30);
        }
    }

    #[test]
    fn pi_is_a_zero_of_sine() {
        // sin(fl(π)) = π - fl(π) to first order
        let (_, s) = cos_sin(Dd::from_f64(std::f64::consts::PI));
        assert!((s.to_f64() - 1.2246467991473532e-16).abs() < 1e-31);
    }
}
