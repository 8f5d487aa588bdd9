//! Exact arithmetic helpers for rationals viewed inside Q_p.
//!
//! Everything that is a power of p (absolute values, Haar measures, kernel
//! values) is kept as an exact `BigRational`; `f64` appears only at the
//! spectral layer.

use alloc::string::String;
use alloc::string::ToString;
use alloc::vec::Vec;
use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// p-adic valuation of a nonzero integer.
pub fn int_valuation(p: u64, n: &BigInt) -> i64 {
    debug_assert!(!n.is_zero());
    let p = BigInt::from(p);
    let mut v = 0i64;
    let mut m = n.abs();
    loop {
        let (q, r) = num_integer::Integer::div_rem(&m, &p);
        if r.is_zero() {
            v += 1;
            m = q;
        } else {
            return v;
        }
    }
}

/// p-adic valuation of a rational; `None` for zero.
pub fn valuation(p: u64, x: &BigRational) -> Option<i64> {
    if x.is_zero() {
        return None;
    }
    Some(int_valuation(p, x.numer()) - int_valuation(p, x.denom()))
}

/// p^e as an exact rational, e ∈ Z.
pub fn p_pow(p: u64, e: i64) -> BigRational {
    let b = BigUint::from(p);
    if e >= 0 {
        BigRational::from_integer(BigInt::from(b.pow(e as u32)))
    } else {
        BigRational::new(BigInt::one(), BigInt::from(b.pow((-e) as u32)))
    }
}

/// |x|_p as an exact rational: p^(−v_p(x)), with |0| = 0.
pub fn abs_p(p: u64, x: &BigRational) -> BigRational {
    match valuation(p, x) {
        None => BigRational::zero(),
        Some(v) => p_pow(p, -v),
    }
}

/// Rational power with integer exponent; x must be nonzero when e < 0.
pub fn rat_pow(x: &BigRational, e: i64) -> BigRational {
    if e == 0 {
        return BigRational::one();
    }
    let mut base = if e < 0 { x.recip() } else { x.clone() };
    let mut n = e.unsigned_abs();
    let mut acc = BigRational::one();
    while n > 0 {
        if n & 1 == 1 {
            acc *= &base;
        }
        base = &base * &base;
        n >>= 1;
    }
    acc
}

/// Exact rational → f64, via string round-trip safe for moderate sizes.
pub fn rat_to_f64(x: &BigRational) -> f64 {
    // num-rational's ToPrimitive can overflow for big numerators; split v_p-style
    // by scaling with powers of two.
    let num = x.numer();
    let den = x.denom();
    let nb = num.bits() as i64;
    let db = den.bits() as i64;
    // Shift both into f64-safe range.
    let shift_n = (nb - 52).max(0) as u64;
    let shift_d = (db - 52).max(0) as u64;
    let n2: BigInt = num >> shift_n;
    let d2: BigInt = den >> shift_d;
    let nf = bigint_to_f64(&n2);
    let df = bigint_to_f64(&d2);
    nf / df * libm::exp2((shift_n as f64) - (shift_d as f64))
}

fn bigint_to_f64(n: &BigInt) -> f64 {
    let digits: Vec<u64> = n.iter_u64_digits().collect();
    let mut acc = 0.0f64;
    for d in digits.iter().rev() {
        acc = acc * 1.8446744073709552e19 + (*d as f64);
    }
    if n.is_negative() {
        -acc
    } else {
        acc
    }
}

/// Parse "a/b" or "a" into an exact rational.
pub fn parse_rational(s: &str) -> Option<BigRational> {
    let s = s.trim();
    if let Some((a, b)) = s.split_once('/') {
        let num: BigInt = a.trim().parse().ok()?;
        let den: BigInt = b.trim().parse().ok()?;
        if den.is_zero() {
            return None;
        }
        Some(BigRational::new(num, den))
    } else {
        let num: BigInt = s.parse().ok()?;
        Some(BigRational::from_integer(num))
    }
}

/// Render as "a/b" (or "a" for integers).
pub fn format_rational(x: &BigRational) -> String {
    if x.denom().is_one() {
        x.numer().to_string()
    } else {
        let mut s = x.numer().to_string();
        s.push('/');
        s.push_str(&x.denom().to_string());
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn valuations() {
        assert_eq!(valuation(3, &r(9, 1)), Some(2));
        assert_eq!(valuation(3, &r(1, 3)), Some(-1));
        assert_eq!(valuation(5, &r(50, 7)), Some(2));
        assert_eq!(valuation(5, &BigRational::zero()), None);
    }

    #[test]
    fn abs_values() {
        assert_eq!(abs_p(3, &r(1, 1)), r(1, 1));
        assert_eq!(abs_p(3, &r(9, 1)), r(1, 9));
        assert_eq!(abs_p(3, &r(1, 3)), r(3, 1));
    }

    #[test]
    fn f64_roundtrip() {
        let x = r(3, 4);
        assert!((rat_to_f64(&x) - 0.75).abs() < 1e-15);
        let y = p_pow(5, -30);
        assert!((rat_to_f64(&y) - 5f64.powi(-30)).abs() < 1e-30);
    }

    #[test]
    fn parse_format() {
        let x = parse_rational("-7/45").unwrap();
        assert_eq!(format_rational(&x), "-7/45");
        assert_eq!(format_rational(&parse_rational("12").unwrap()), "12");
    }
}
