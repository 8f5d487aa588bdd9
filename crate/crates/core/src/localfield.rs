//! Exact arithmetic in Q_p with tracked precision.
//!
//! A [`PadicNumber`] is either an exact zero, a value known as
//! p^valuation · unit with the unit known modulo p^precision, or an
//! indistinguishable-from-zero element `O(p^bound)` left over from cancelling
//! additions. The ultrametric rules decide how much precision survives each
//! operation; no operation ever reports more digits than its operands justify.

use alloc::vec::Vec;
use core::fmt;
use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::rational::{int_valuation, p_pow};

/// Default number of known unit digits.
pub const DEFAULT_PRECISION: u32 = 64;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FieldError {
    /// All known digits are zero but the value is not an exact zero, so the
    /// valuation (hence the absolute value) is undecidable at this precision.
    #[error("precision exhausted: value is O(p^{bound}), valuation undecidable")]
    PrecisionExhausted { bound: i64 },
    #[error("division by zero (or by a value indistinguishable from zero)")]
    DivisionByZero,
    #[error("no square root in Q_p: {reason}")]
    NoSquareRoot { reason: &'static str },
    #[error("mixed primes: {0} vs {1}")]
    MixedPrimes(u64, u64),
    #[error("operation undefined at the point at infinity")]
    Infinity,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Repr {
    ExactZero,
    /// p^valuation · unit, unit ≢ 0 (mod p), known modulo p^precision.
    Known {
        valuation: i64,
        unit: BigUint,
        precision: u32,
    },
    /// Only |x| ≤ p^(−bound) is known.
    UnknownZero { bound: i64 },
}

/// An element of Q_p with tracked precision.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PadicNumber {
    p: u64,
    repr: Repr,
}

impl PadicNumber {
    pub fn zero(p: u64) -> Self {
        PadicNumber {
            p,
            repr: Repr::ExactZero,
        }
    }

    pub fn one(p: u64, precision: u32) -> Self {
        PadicNumber {
            p,
            repr: Repr::Known {
                valuation: 0,
                unit: BigUint::one(),
                precision,
            },
        }
    }

    pub fn from_integer(p: u64, precision: u32, n: i64) -> Self {
        Self::from_rational(p, precision, &BigRational::from_integer(BigInt::from(n)))
    }

    /// Truncate an exact rational to `precision` known unit digits.
    pub fn from_rational(p: u64, precision: u32, x: &BigRational) -> Self {
        if x.is_zero() {
            return Self::zero(p);
        }
        let vn = int_valuation(p, x.numer());
        let vd = int_valuation(p, x.denom());
        let valuation = vn - vd;
        let modulus = BigUint::from(p).pow(precision);
        let pn = BigInt::from(p).pow(vn as u32);
        let pd = BigInt::from(p).pow(vd as u32);
        let num_unit = x.numer() / pn;
        let den_unit = x.denom() / pd;
        let num_res = mod_reduce(&num_unit, &modulus);
        let den_res = mod_reduce(&den_unit, &modulus);
        let den_inv = mod_inverse(&den_res, &modulus, p);
        let unit = num_res * den_inv % &modulus;
        PadicNumber {
            p,
            repr: Repr::Known {
                valuation,
                unit,
                precision,
            },
        }
    }

    /// Assemble from a valuation and a unit residue mod p^precision; the unit
    /// must not be divisible by p (zero yields the exact zero).
    pub fn from_valuation_unit(p: u64, precision: u32, valuation: i64, unit: BigUint) -> Self {
        if unit.is_zero() {
            return Self::zero(p);
        }
        debug_assert!(!(&unit % BigUint::from(p)).is_zero(), "unit must be a p-unit");
        PadicNumber {
            p,
            repr: Repr::Known {
                valuation,
                unit,
                precision,
            },
        }
    }

    pub fn prime(&self) -> u64 {
        self.p
    }

    pub fn is_exact_zero(&self) -> bool {
        matches!(self.repr, Repr::ExactZero)
    }

    pub fn is_zeroish(&self) -> bool {
        !matches!(self.repr, Repr::Known { .. })
    }

    /// The tracked valuation. Errors when the value is indistinguishable from
    /// zero without being exactly zero; exact zero reports `None` inside `Ok`.
    pub fn valuation(&self) -> Result<Option<i64>, FieldError> {
        match &self.repr {
            Repr::ExactZero => Ok(None),
            Repr::Known { valuation, .. } => Ok(Some(*valuation)),
            Repr::UnknownZero { bound } => Err(FieldError::PrecisionExhausted { bound: *bound }),
        }
    }

    /// |x| = p^(−v) as an exact rational; exact zero gives 0.
    pub fn abs_rational(&self) -> Result<BigRational, FieldError> {
        match self.valuation()? {
            None => Ok(BigRational::zero()),
            Some(v) => Ok(p_pow(self.p, -v)),
        }
    }

    /// |x| as a float.
    pub fn abs_f64(&self) -> Result<f64, FieldError> {
        match self.valuation()? {
            None => Ok(0.0),
            Some(v) => Ok(libm::pow(self.p as f64, -(v as f64))),
        }
    }

    /// Known unit digits, least significant first.
    pub fn unit_digits(&self) -> Vec<u32> {
        match &self.repr {
            Repr::Known {
                unit, precision, ..
            } => {
                let mut out = Vec::with_capacity(*precision as usize);
                let p = BigUint::from(self.p);
                let mut u = unit.clone();
                for _ in 0..*precision {
                    let (q, r) = num_integer::Integer::div_rem(&u, &p);
                    out.push(r.to_u32().unwrap_or(0));
                    u = q;
                }
                out
            }
            _ => Vec::new(),
        }
    }

    pub fn precision(&self) -> Option<u32> {
        match &self.repr {
            Repr::Known { precision, .. } => Some(*precision),
            _ => None,
        }
    }

    fn known(&self) -> Option<(i64, &BigUint, u32)> {
        match &self.repr {
            Repr::Known {
                valuation,
                unit,
                precision,
            } => Some((*valuation, unit, *precision)),
            _ => None,
        }
    }

    /// Absolute precision: the value is known modulo p^(this).
    fn abs_precision(&self) -> Option<i64> {
        match &self.repr {
            Repr::ExactZero => None,
            Repr::Known {
                valuation,
                precision,
                ..
            } => Some(valuation + *precision as i64),
            Repr::UnknownZero { bound } => Some(*bound),
        }
    }

    fn check_prime(&self, other: &Self) -> Result<(), FieldError> {
        if self.p != other.p {
            Err(FieldError::MixedPrimes(self.p, other.p))
        } else {
            Ok(())
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self, FieldError> {
        self.check_prime(other)?;
        let p = self.p;
        match (&self.repr, &other.repr) {
            (Repr::ExactZero, _) => Ok(other.clone()),
            (_, Repr::ExactZero) => Ok(self.clone()),
            (Repr::UnknownZero { bound }, _) | (_, Repr::UnknownZero { bound }) => {
                // sum known modulo p^min(bound, other's abs precision)
                let (a, b) = if matches!(self.repr, Repr::UnknownZero { .. }) {
                    (*bound, other.abs_precision().unwrap_or(i64::MAX))
                } else {
                    (*bound, self.abs_precision().unwrap_or(i64::MAX))
                };
                let bnd = a.min(b);
                // If the known summand has valuation < bound it survives.
                let known = if matches!(self.repr, Repr::UnknownZero { .. }) {
                    other
                } else {
                    self
                };
                if let Some((v, unit, _)) = known.known() {
                    if v < bnd {
                        let prec = (bnd - v) as u32;
                        let modulus = BigUint::from(p).pow(prec);
                        return Ok(PadicNumber {
                            p,
                            repr: Repr::Known {
                                valuation: v,
                                unit: unit % &modulus,
                                precision: prec,
                            },
                        });
                    }
                }
                Ok(PadicNumber {
                    p,
                    repr: Repr::UnknownZero { bound: bnd },
                })
            }
            (
                Repr::Known {
                    valuation: v1,
                    unit: u1,
                    ..
                },
                Repr::Known {
                    valuation: v2,
                    unit: u2,
                    ..
                },
            ) => {
                let a1 = self.abs_precision().unwrap();
                let a2 = other.abs_precision().unwrap();
                let abs_prec = a1.min(a2);
                let v0 = (*v1).min(*v2);
                if v0 >= abs_prec {
                    return Ok(PadicNumber {
                        p,
                        repr: Repr::UnknownZero { bound: abs_prec },
                    });
                }
                let modulus = BigUint::from(p).pow((abs_prec - v0) as u32);
                let t1 = u1 * BigUint::from(p).pow((v1 - v0) as u32) % &modulus;
                let t2 = u2 * BigUint::from(p).pow((v2 - v0) as u32) % &modulus;
                let sum = (t1 + t2) % &modulus;
                Ok(Self::from_shifted(p, v0, sum, abs_prec))
            }
        }
    }

    pub fn neg(&self) -> Self {
        match &self.repr {
            Repr::Known {
                valuation,
                unit,
                precision,
            } => {
                let modulus = BigUint::from(self.p).pow(*precision);
                PadicNumber {
                    p: self.p,
                    repr: Repr::Known {
                        valuation: *valuation,
                        unit: (&modulus - unit % &modulus) % &modulus,
                        precision: *precision,
                    },
                }
            }
            _ => self.clone(),
        }
    }

    pub fn sub(&self, other: &Self) -> Result<Self, FieldError> {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Result<Self, FieldError> {
        self.check_prime(other)?;
        let p = self.p;
        match (&self.repr, &other.repr) {
            (Repr::ExactZero, _) | (_, Repr::ExactZero) => Ok(Self::zero(p)),
            (Repr::UnknownZero { bound }, Repr::UnknownZero { bound: b2 }) => Ok(PadicNumber {
                p,
                repr: Repr::UnknownZero { bound: bound + b2 },
            }),
            (Repr::UnknownZero { bound }, Repr::Known { valuation, .. })
            | (Repr::Known { valuation, .. }, Repr::UnknownZero { bound }) => Ok(PadicNumber {
                p,
                repr: Repr::UnknownZero {
                    bound: bound + valuation,
                },
            }),
            (
                Repr::Known {
                    valuation: v1,
                    unit: u1,
                    precision: n1,
                },
                Repr::Known {
                    valuation: v2,
                    unit: u2,
                    precision: n2,
                },
            ) => {
                let prec = (*n1).min(*n2);
                let modulus = BigUint::from(p).pow(prec);
                Ok(PadicNumber {
                    p,
                    repr: Repr::Known {
                        valuation: v1 + v2,
                        unit: u1 * u2 % &modulus,
                        precision: prec,
                    },
                })
            }
        }
    }

    pub fn inv(&self) -> Result<Self, FieldError> {
        match &self.repr {
            Repr::ExactZero | Repr::UnknownZero { .. } => Err(FieldError::DivisionByZero),
            Repr::Known {
                valuation,
                unit,
                precision,
            } => {
                let modulus = BigUint::from(self.p).pow(*precision);
                let inv = mod_inverse_u(unit, &modulus, self.p);
                Ok(PadicNumber {
                    p: self.p,
                    repr: Repr::Known {
                        valuation: -valuation,
                        unit: inv,
                        precision: *precision,
                    },
                })
            }
        }
    }

    pub fn div(&self, other: &Self) -> Result<Self, FieldError> {
        self.mul(&other.inv()?)
    }

    pub fn pow(&self, e: i64) -> Result<Self, FieldError> {
        if e == 0 {
            let prec = self.precision().unwrap_or(DEFAULT_PRECISION);
            return Ok(Self::one(self.p, prec));
        }
        let base = if e < 0 { self.inv()? } else { self.clone() };
        let mut acc: Option<Self> = None;
        let mut b = base;
        let mut n = e.unsigned_abs();
        while n > 0 {
            if n & 1 == 1 {
                acc = Some(match acc {
                    None => b.clone(),
                    Some(a) => a.mul(&b)?,
                });
            }
            n >>= 1;
            if n > 0 {
                b = b.mul(&b)?;
            }
        }
        Ok(acc.unwrap())
    }

    /// Square root in Q_p, if one exists. For odd p: the valuation must be
    /// even and the leading unit a quadratic residue (Hensel lifts the rest).
    /// For p = 2: valuation even and unit ≡ 1 (mod 8); one digit of precision
    /// is lost. The returned root has leading digit in {1..(p−1)/2} for odd p.
    pub fn sqrt(&self) -> Result<Self, FieldError> {
        let p = self.p;
        let (v, unit, prec) = match &self.repr {
            Repr::ExactZero => return Ok(Self::zero(p)),
            Repr::UnknownZero { bound } => {
                return Err(FieldError::PrecisionExhausted { bound: *bound })
            }
            Repr::Known {
                valuation,
                unit,
                precision,
            } => (*valuation, unit, *precision),
        };
        if v % 2 != 0 {
            return Err(FieldError::NoSquareRoot {
                reason: "odd valuation",
            });
        }
        let root_unit = if p == 2 {
            if unit % BigUint::from(8u32) != BigUint::one() {
                return Err(FieldError::NoSquareRoot {
                    reason: "unit not ≡ 1 mod 8",
                });
            }
            sqrt_unit_2adic(unit, prec)?
        } else {
            sqrt_unit_odd(p, unit, prec)?
        };
        let new_prec = if p == 2 { prec.saturating_sub(1) } else { prec };
        // normalize: leading digit in {1..(p−1)/2}
        let lead = (&root_unit % BigUint::from(p)).to_u64().unwrap();
        let modulus = BigUint::from(p).pow(new_prec);
        let unit = if p != 2 && lead > (p - 1) / 2 {
            (&modulus - &root_unit % &modulus) % &modulus
        } else {
            root_unit % &modulus
        };
        Ok(PadicNumber {
            p,
            repr: Repr::Known {
                valuation: v / 2,
                unit,
                precision: new_prec,
            },
        })
    }

    /// True when |self − other| ≤ p^(−(min valuation + digits)), i.e. the two
    /// values share at least `digits` leading digits.
    pub fn agrees_with(&self, other: &Self, digits: u32) -> bool {
        let diff = match self.sub(other) {
            Ok(d) => d,
            Err(_) => return false,
        };
        let vmin = match (self.known(), other.known()) {
            (Some((v1, _, _)), Some((v2, _, _))) => v1.min(v2),
            _ => 0,
        };
        match diff.repr {
            Repr::ExactZero => true,
            Repr::UnknownZero { bound } => bound >= vmin + digits as i64,
            Repr::Known { valuation, .. } => valuation >= vmin + digits as i64,
        }
    }

    fn from_shifted(p: u64, v0: i64, residue: BigUint, abs_prec: i64) -> Self {
        if residue.is_zero() {
            return PadicNumber {
                p,
                repr: Repr::UnknownZero { bound: abs_prec },
            };
        }
        let shift = int_valuation(p, &BigInt::from(residue.clone()));
        let v = v0 + shift;
        if v >= abs_prec {
            return PadicNumber {
                p,
                repr: Repr::UnknownZero { bound: abs_prec },
            };
        }
        let unit = residue / BigUint::from(p).pow(shift as u32);
        PadicNumber {
            p,
            repr: Repr::Known {
                valuation: v,
                unit,
                precision: (abs_prec - v) as u32,
            },
        }
    }
}

impl fmt::Display for PadicNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.repr {
            Repr::ExactZero => write!(f, "0"),
            Repr::UnknownZero { bound } => write!(f, "O({}^{})", self.p, bound),
            Repr::Known {
                valuation, unit, ..
            } => write!(f, "{}^{} * ({} + ...)", self.p, valuation, unit % self.p),
        }
    }
}

/// Reduce a (possibly negative) integer modulo `modulus` into [0, modulus).
fn mod_reduce(n: &BigInt, modulus: &BigUint) -> BigUint {
    let m = BigInt::from(modulus.clone());
    let r = ((n % &m) + &m) % &m;
    r.to_biguint().unwrap()
}

/// Inverse of `n` modulo p^k (n must be a p-unit).
fn mod_inverse(n: &BigUint, modulus: &BigUint, p: u64) -> BigUint {
    mod_inverse_u(n, modulus, p)
}

fn mod_inverse_u(n: &BigUint, modulus: &BigUint, _p: u64) -> BigUint {
    // extended Euclid on BigInt
    let a = BigInt::from(n.clone());
    let m = BigInt::from(modulus.clone());
    let (mut r0, mut r1) = (m.clone(), a);
    let (mut t0, mut t1) = (BigInt::zero(), BigInt::one());
    while !r1.is_zero() {
        let q = &r0 / &r1;
        let r2 = &r0 - &q * &r1;
        r0 = r1;
        r1 = r2;
        let t2 = &t0 - &q * &t1;
        t0 = t1;
        t1 = t2;
    }
    debug_assert!(r0.is_one(), "not invertible");
    mod_reduce(&t0, modulus)
}

/// Legendre symbol of a mod p (odd p): 1, p−1, or 0.
fn legendre(p: u64, a: &BigUint) -> u64 {
    let pb = BigUint::from(p);
    let e = (p - 1) / 2;
    a.modpow(&BigUint::from(e), &pb).to_u64().unwrap_or(0)
}

fn sqrt_unit_odd(p: u64, unit: &BigUint, prec: u32) -> Result<BigUint, FieldError> {
    let lead = unit % BigUint::from(p);
    if legendre(p, &lead) != 1 {
        return Err(FieldError::NoSquareRoot {
            reason: "leading unit is a non-residue",
        });
    }
    // root mod p by brute force (p is small in practice)
    let lead_u = lead.to_u64().unwrap();
    let mut r0 = 0u64;
    for r in 1..p {
        if (r * r) % p == lead_u {
            r0 = r;
            break;
        }
    }
    // Newton lifting: r ← (r + u/r)/2 doubles the number of correct digits.
    let modulus = BigUint::from(p).pow(prec);
    let mut r = BigUint::from(r0);
    let mut k = 1u32;
    let inv2 = mod_inverse_u(&BigUint::from(2u32), &modulus, p);
    while k < prec {
        k = (2 * k).min(prec);
        let m_k = BigUint::from(p).pow(k);
        let u_k = unit % &m_k;
        let r_inv = mod_inverse_u(&(&r % &m_k), &m_k, p);
        r = (&r + u_k * r_inv) % &m_k;
        r = r * (&inv2 % &m_k) % &m_k;
    }
    Ok(r % &modulus)
}

fn sqrt_unit_2adic(unit: &BigUint, prec: u32) -> Result<BigUint, FieldError> {
    // unit ≡ 1 mod 8; lift digit by digit: r_{k+1} = r_k or r_k + 2^(k−1).
    let target_prec = prec.saturating_sub(1).max(3);
    let mut r = BigUint::one();
    for k in 3..=target_prec {
        let m = BigUint::from(2u32).pow(k + 1);
        let sq = &r * &r % &m;
        let u = unit % &m;
        if sq != u {
            r += BigUint::from(2u32).pow(k - 1);
        }
    }
    Ok(r)
}

/// A point of P¹(Q_p).
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ProjPoint {
    Finite(PadicNumber),
    Infinity,
}

impl ProjPoint {
    pub fn finite(x: PadicNumber) -> Self {
        ProjPoint::Finite(x)
    }

    pub fn is_infinity(&self) -> bool {
        matches!(self, ProjPoint::Infinity)
    }

    pub fn as_finite(&self) -> Result<&PadicNumber, FieldError> {
        match self {
            ProjPoint::Finite(x) => Ok(x),
            ProjPoint::Infinity => Err(FieldError::Infinity),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;
    use proptest::prelude::*;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn abs_value_examples() {
        // unit has valuation 0
        let x = PadicNumber::from_integer(3, 32, 1);
        assert_eq!(x.abs_rational().unwrap(), rat(1, 1));
        // v(9) = 2 forces p^(−2)
        let x = PadicNumber::from_integer(3, 32, 9);
        assert_eq!(x.abs_rational().unwrap(), rat(1, 9));
        // v(1/3) = −1
        let x = PadicNumber::from_rational(3, 32, &rat(1, 3));
        assert_eq!(x.abs_rational().unwrap(), rat(3, 1));
        // exact zero
        assert_eq!(PadicNumber::zero(3).abs_rational().unwrap(), rat(0, 1));
    }

    #[test]
    fn precision_exhausted_error() {
        let a = PadicNumber::from_integer(5, 4, 7);
        let b = PadicNumber::from_integer(5, 4, 7);
        let d = a.sub(&b).unwrap();
        assert!(matches!(
            d.abs_rational(),
            Err(FieldError::PrecisionExhausted { .. })
        ));
    }

    #[test]
    fn one_plus_p_digits() {
        let one = PadicNumber::from_integer(5, 16, 1);
        let p = PadicNumber::from_integer(5, 16, 5);
        let s = one.add(&p).unwrap();
        assert_eq!(s.valuation().unwrap(), Some(0));
        let d = s.unit_digits();
        assert_eq!(&d[0..3], &[1, 1, 0]);
    }

    #[test]
    fn sqrt_examples() {
        // sqrt(4) in Q_5 = ±2
        let four = PadicNumber::from_integer(5, 24, 4);
        let r = four.sqrt().unwrap();
        let two = PadicNumber::from_integer(5, 24, 2);
        let m_two = two.neg();
        assert!(r.agrees_with(&two, 24) || r.agrees_with(&m_two, 24));
        assert!(r.mul(&r).unwrap().agrees_with(&four, 24));
        // sqrt(5) in Q_5: odd valuation
        let five = PadicNumber::from_integer(5, 24, 5);
        assert!(matches!(
            five.sqrt(),
            Err(FieldError::NoSquareRoot { reason: "odd valuation" })
        ));
        // non-residue: 2 is not a square mod 5
        let t = PadicNumber::from_integer(5, 24, 2);
        assert!(t.sqrt().is_err());
        // 2-adic: 17 ≡ 1 mod 8 is a square
        let x = PadicNumber::from_integer(2, 24, 17);
        let r = x.sqrt().unwrap();
        assert!(r.mul(&r).unwrap().agrees_with(&x, 20));
        // 2-adic: 3 is not
        assert!(PadicNumber::from_integer(2, 24, 3).sqrt().is_err());
    }

    #[test]
    fn division_round_trip() {
        let a = PadicNumber::from_rational(7, 40, &rat(22, 9));
        let b = PadicNumber::from_rational(7, 40, &rat(-5, 49));
        let c = a.mul(&b).unwrap().div(&b).unwrap();
        assert!(c.agrees_with(&a, 40));
    }

    proptest! {
        #[test]
        fn ultrametric_inequality(n1 in -200i64..200, d1 in 1i64..60, n2 in -200i64..200, d2 in 1i64..60) {
            prop_assume!(n1 != 0 && n2 != 0);
            let p = 5u64;
            let x = PadicNumber::from_rational(p, 32, &rat(n1, d1));
            let y = PadicNumber::from_rational(p, 32, &rat(n2, d2));
            let s = x.add(&y).unwrap();
            let ax = x.abs_rational().unwrap();
            let ay = y.abs_rational().unwrap();
            let mx = ax.clone().max(ay.clone());
            if let Ok(asum) = s.abs_rational() {
                prop_assert!(asum <= mx);
                if ax != ay {
                    prop_assert_eq!(asum, mx);
                }
            } else {
                // cancellation to below precision only possible when |x| = |y|
                prop_assert_eq!(ax, ay);
            }
        }

        #[test]
        fn abs_multiplicative(n1 in -500i64..500, d1 in 1i64..90, n2 in -500i64..500, d2 in 1i64..90) {
            prop_assume!(n1 != 0 && n2 != 0);
            let p = 3u64;
            let x = PadicNumber::from_rational(p, 32, &rat(n1, d1));
            let y = PadicNumber::from_rational(p, 32, &rat(n2, d2));
            let prod = x.mul(&y).unwrap();
            prop_assert_eq!(
                prod.abs_rational().unwrap(),
                x.abs_rational().unwrap() * y.abs_rational().unwrap()
            );
        }

        #[test]
        fn mul_div_round_trip(n1 in -300i64..300, d1 in 1i64..50, n2 in -300i64..300, d2 in 1i64..50) {
            prop_assume!(n1 != 0 && n2 != 0);
            let p = 5u64;
            let x = PadicNumber::from_rational(p, 48, &rat(n1, d1));
            let y = PadicNumber::from_rational(p, 48, &rat(n2, d2));
            let z = x.mul(&y).unwrap().div(&y).unwrap();
            prop_assert!(z.agrees_with(&x, 48));
        }
    }
}
