//! High-precision reference values of `J_n` from the ascending series.
//!
//! The series is summed exactly in big-integer fixed point, so cancellation
//! between large terms costs nothing. This is much slower than the
//! production kernels and is meant for verification only.

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};

/// Fractional bits carried below the binary point.
const BASE_PRECISION: i64 = 320;

/// Largest argument accepted by the reference series.
pub const MAX_REFERENCE_ARG: f64 = 1.0e4;

/// Reference `J_n(x)` for `n <= 2` and `0 <= x <= MAX_REFERENCE_ARG`.
///
/// # Panics
/// Panics outside that domain; this is test infrastructure, not a kernel.
pub fn jn_series_exact(n: u32, x: f64) -> f64 {
    assert!(n <= 2, "reference series covers orders 0..=2");
    assert!(
        (0.0..=MAX_REFERENCE_ARG).contains(&x),
        "reference series domain is [0, {MAX_REFERENCE_ARG}], got {x}"
    );
    if x == 0.0 {
        return if n == 0 { 1.0 } else { 0.0 };
    }

    // x/2 = m * 2^e exactly
    let (m, e) = decompose(x);
    let e = e - 1;
    let log2_half = e + 64 - i64::from(m.leading_zeros());
    let precision = BASE_PRECISION + (-(n as i64) * log2_half).max(0);

    let m_big = BigInt::from(m);
    let m_sq = &m_big * &m_big;

    let mut term = shift(m_big.pow(n), precision + n as i64 * e);
    if n == 2 {
        term /= 2;
    }
    let mut sum = term.clone();
    let half = x / 2.0;
    let mut k: u64 = 1;
    loop {
        term = shift(term * &m_sq, 2 * e);
        term /= BigInt::from(k * (k + u64::from(n)));
        term = -term;
        if term.is_zero() && (k as f64) > half {
            break;
        }
        sum += &term;
        k += 1;
    }
    fixed_to_f64(&sum, precision)
}

/// `x = m * 2^e` with integer `m`.
fn decompose(x: f64) -> (u64, i64) {
    let bits = x.to_bits();
    let exp_bits = ((bits >> 52) & 0x7ff) as i64;
    let frac = bits & ((1u64 << 52) - 1);
    if exp_bits == 0 {
        (frac, -1074)
    } else {
        (frac | (1u64 << 52), exp_bits - 1075)
    }
}

fn shift(v: BigInt, by: i64) -> BigInt {
    if by >= 0 {
        v << (by as usize)
    } else {
        v >> ((-by) as usize)
    }
}

fn fixed_to_f64(v: &BigInt, precision: i64) -> f64 {
    if v.is_zero() {
        return 0.0;
    }
    let bits = v.bits() as i64;
    let drop = (bits - 100).max(0);
    let top = shift(v.clone(), -drop);
    let mantissa = top.to_i128().expect("at most 100 bits") as f64;
    scale_by_pow2(mantissa, drop - precision)
}

fn scale_by_pow2(mut value: f64, mut exp: i64) -> f64 {
    while exp > 0 {
        let step = exp.min(1000);
        value *= f64::from_bits(((step + 1023) as u64) << 52);
        exp -= step;
    }
    while exp < 0 {
        let step = (-exp).min(1000);
        value *= f64::from_bits(((1023 - step) as u64) << 52);
        exp += step;
    }
    value
}

/// Bisection on the reference series; used to pin zeros independently of the
/// production kernels.
pub fn reference_zero(n: u32, mut lo: f64, mut hi: f64) -> f64 {
    let mut f_lo = jn_series_exact(n, lo);
    assert!(
        f_lo.signum() != jn_series_exact(n, hi).signum(),
        "no sign change on [{lo}, {hi}]"
    );
    while hi - lo > 4.0 * f64::EPSILON * hi {
        let mid = 0.5 * (lo + hi);
        let f_mid = jn_series_exact(n, mid);
        if f_mid == 0.0 {
            return mid;
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}
