//! Closed balls {x : |x−c| ≤ p^(−k)} with exact rational centers, and the
//! closed balls of P¹ (finite balls and complements of open finite balls).
//!
//! Two balls are always nested or disjoint; membership is exact. Because
//! absolute values are powers of p, the open ball of level k equals the
//! closed ball of level k+1 as a set, so all open/closed bookkeeping turns
//! into level arithmetic.

use alloc::string::String;
use alloc::vec::Vec;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::rational::{format_rational, p_pow, valuation};

/// {x ∈ Q_p : |x − center| ≤ p^(−level)}.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ball {
    pub p: u64,
    pub center: BigRational,
    pub level: i64,
}

impl Ball {
    pub fn new(p: u64, center: BigRational, level: i64) -> Self {
        Ball { p, center, level }
    }

    pub fn new_int(p: u64, center: i64, level: i64) -> Self {
        Ball::new(p, BigRational::from_integer(BigInt::from(center)), level)
    }

    /// Haar measure, normalised so that μ(O_K) = 1.
    pub fn haar(&self) -> BigRational {
        p_pow(self.p, -self.level)
    }

    pub fn radius(&self) -> BigRational {
        p_pow(self.p, -self.level)
    }

    pub fn contains_point(&self, x: &BigRational) -> bool {
        let d = x - &self.center;
        match valuation(self.p, &d) {
            None => true,
            Some(v) => v >= self.level,
        }
    }

    /// |x − center| = p^(−level) exactly.
    pub fn on_boundary_sphere(&self, x: &BigRational) -> bool {
        let d = x - &self.center;
        matches!(valuation(self.p, &d), Some(v) if v == self.level)
    }

    pub fn contains_ball(&self, other: &Ball) -> bool {
        other.level >= self.level && self.contains_point(&other.center)
    }

    pub fn is_disjoint(&self, other: &Ball) -> bool {
        !self.contains_ball(other) && !other.contains_ball(self)
    }

    pub fn same_ball(&self, other: &Ball) -> bool {
        self.level == other.level && self.contains_point(&other.center)
    }

    /// The p children of one level deeper.
    pub fn children(&self) -> Vec<Ball> {
        let step = p_pow(self.p, self.level);
        (0..self.p)
            .map(|j| {
                Ball::new(
                    self.p,
                    &self.center + &step * BigRational::from_integer(BigInt::from(j)),
                    self.level + 1,
                )
            })
            .collect()
    }

    /// The child containing a given point of this ball.
    pub fn child_containing(&self, x: &BigRational) -> Ball {
        debug_assert!(self.contains_point(x));
        Ball::new(self.p, x.clone(), self.level + 1)
    }

    /// Canonical digits of the center modulo p^level: a stable dictionary key.
    pub fn canonical_key(&self) -> (i64, String) {
        (
            self.level,
            format_rational(&residue_mod_level(self.p, &self.center, self.level)),
        )
    }

    /// Canonical representative of center mod p^level (digits below `level`).
    pub fn canonical_center(&self) -> BigRational {
        residue_mod_level(self.p, &self.center, self.level)
    }
}

/// The canonical representative r = Σ_{j<k} a_j p^j of x mod p^k.
pub fn residue_mod_level(p: u64, x: &BigRational, k: i64) -> BigRational {
    if x.is_zero() {
        return BigRational::zero();
    }
    let m = valuation(p, x).unwrap();
    if m >= k {
        return BigRational::zero();
    }
    let digits = (k - m) as u32;
    // unit = x / p^m has valuation 0
    let unit = x * p_pow(p, -m);
    let modulus = BigInt::from(p).pow(digits);
    // numerator * denominator^{-1} mod p^digits
    let num = unit.numer() % &modulus;
    let den = unit.denom() % &modulus;
    let den_inv = mod_inverse(&den, &modulus);
    let r = ((num * den_inv) % &modulus + &modulus) % &modulus;
    BigRational::from_integer(r) * p_pow(p, m)
}

fn mod_inverse(a: &BigInt, m: &BigInt) -> BigInt {
    let (mut r0, mut r1) = (m.clone(), ((a % m) + m) % m);
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
    debug_assert!(r0.is_one());
    ((t0 % m) + m) % m
}

/// Decompose `outer ∖ ∪ holes` into disjoint balls. Holes must be inside
/// `outer` (holes equal to `outer` yield an empty region).
pub fn complement_decomposition(outer: &Ball, holes: &[Ball]) -> Vec<Ball> {
    let relevant: Vec<&Ball> = holes.iter().filter(|h| outer.contains_ball(h)).collect();
    if relevant.is_empty() {
        return alloc::vec![outer.clone()];
    }
    if relevant.iter().any(|h| h.same_ball(outer)) {
        return Vec::new();
    }
    let mut out = Vec::new();
    for child in outer.children() {
        let inner: Vec<Ball> = relevant
            .iter()
            .filter(|h| child.contains_ball(h))
            .map(|h| (*h).clone())
            .collect();
        if inner.is_empty() {
            out.push(child);
        } else {
            out.extend(complement_decomposition(&child, &inner));
        }
    }
    out
}

/// A closed ball of P¹(Q_p): a finite ball or the complement of an open
/// finite ball (a neighbourhood of ∞).
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum P1Ball {
    Finite(Ball),
    /// {x : |x − center| ≥ p^(−level)} ∪ {∞} = P¹ ∖ (open ball of level).
    Outside { p: u64, center: BigRational, level: i64 },
}

impl P1Ball {
    pub fn outside_int(p: u64, center: i64, level: i64) -> Self {
        P1Ball::Outside {
            p,
            center: BigRational::from_integer(BigInt::from(center)),
            level,
        }
    }

    /// The open interior, as a closed set of one level shifted.
    pub fn interior(&self) -> P1Ball {
        match self {
            P1Ball::Finite(b) => P1Ball::Finite(Ball::new(b.p, b.center.clone(), b.level + 1)),
            P1Ball::Outside { p, center, level } => P1Ball::Outside {
                p: *p,
                center: center.clone(),
                level: level - 1,
            },
        }
    }

    /// P¹ ∖ self (as a set; exact because values are p-powers).
    pub fn complement(&self) -> P1Ball {
        match self {
            P1Ball::Finite(b) => P1Ball::Outside {
                p: b.p,
                center: b.center.clone(),
                level: b.level - 1,
            },
            P1Ball::Outside { p, center, level } => {
                P1Ball::Finite(Ball::new(*p, center.clone(), level + 1))
            }
        }
    }

    pub fn contains_infinity(&self) -> bool {
        matches!(self, P1Ball::Outside { .. })
    }

    pub fn contains_point(&self, x: &BigRational) -> bool {
        match self {
            P1Ball::Finite(b) => b.contains_point(x),
            P1Ball::Outside { p, center, level } => {
                let d = x - center;
                match valuation(*p, &d) {
                    None => false,
                    Some(v) => v <= *level,
                }
            }
        }
    }

    pub fn same_set(&self, other: &P1Ball) -> bool {
        match (self, other) {
            (P1Ball::Finite(a), P1Ball::Finite(b)) => a.same_ball(b),
            (
                P1Ball::Outside { p, center, level },
                P1Ball::Outside {
                    center: c2,
                    level: l2,
                    ..
                },
            ) => {
                level == l2
                    && match valuation(*p, &(center - c2)) {
                        None => true,
                        Some(v) => v >= *level + 1,
                    }
            }
            _ => false,
        }
    }

    pub fn is_disjoint(&self, other: &P1Ball) -> bool {
        match (self, other) {
            (P1Ball::Finite(a), P1Ball::Finite(b)) => a.is_disjoint(b),
            (P1Ball::Outside { .. }, P1Ball::Outside { .. }) => false, // both contain ∞
            (P1Ball::Finite(b), out @ P1Ball::Outside { .. })
            | (out @ P1Ball::Outside { .. }, P1Ball::Finite(b)) => {
                // disjoint iff the finite ball is inside the complement of `out`
                if let P1Ball::Finite(comp) = out.complement() {
                    comp.contains_ball(b)
                } else {
                    unreachable!()
                }
            }
        }
    }
}

/// Exact image of a P¹-ball under a Möbius map.
pub fn moebius_image(m: &crate::moebius::MoebiusMap, ball: &P1Ball, p: u64) -> P1Ball {
    if m.c.is_zero() {
        // affine: x ↦ (a x + b)/d
        let alpha = BigRational::new(m.a.clone(), m.d.clone());
        let beta = BigRational::new(m.b.clone(), m.d.clone());
        return affine_image(&alpha, &beta, ball, p);
    }
    // m = A2 ∘ ι ∘ A1 with A1(x) = c x + d, ι(y) = 1/y, A2(y) = a/c − (det/c²)… :
    // (a x + b)/(c x + d) = a/c − det/(c(cx+d))
    let a1_alpha = BigRational::from_integer(m.c.clone());
    let a1_beta = BigRational::from_integer(m.d.clone());
    let det = m.det();
    let a2_alpha = -BigRational::new(det, m.c.clone());
    let a2_beta = BigRational::new(m.a.clone(), m.c.clone());
    let step1 = affine_image(&a1_alpha, &a1_beta, ball, p);
    let step2 = inversion_image(&step1, p);
    affine_image(&a2_alpha, &a2_beta, &step2, p)
}

fn affine_image(alpha: &BigRational, beta: &BigRational, ball: &P1Ball, p: u64) -> P1Ball {
    debug_assert!(!alpha.is_zero());
    let va = valuation(p, alpha).unwrap();
    match ball {
        P1Ball::Finite(b) => P1Ball::Finite(Ball::new(
            p,
            alpha * &b.center + beta,
            b.level + va,
        )),
        P1Ball::Outside { center, level, .. } => P1Ball::Outside {
            p,
            center: alpha * center + beta,
            level: level + va,
        },
    }
}

fn inversion_image(ball: &P1Ball, p: u64) -> P1Ball {
    match ball {
        P1Ball::Finite(b) => {
            let v0 = match valuation(p, &b.center) {
                None => i64::MAX,
                Some(v) => v,
            };
            if v0 >= b.level {
                // 0 ∈ ball: image is {|y| ≥ p^{level}} ∪ ∞
                P1Ball::Outside {
                    p,
                    center: BigRational::zero(),
                    level: -b.level,
                }
            } else {
                P1Ball::Finite(Ball::new(
                    p,
                    b.center.recip(),
                    b.level - 2 * v0,
                ))
            }
        }
        P1Ball::Outside { center, level, .. } => {
            let v0 = match valuation(p, center) {
                None => i64::MAX,
                Some(v) => v,
            };
            if v0 <= *level {
                // 0 ∈ the outside set: image is the outside set around 1/center
                P1Ball::Outside {
                    p,
                    center: center.recip(),
                    level: level - 2 * v0,
                }
            } else {
                // 0 not in the set: image is the finite ball {|y| ≤ p^{level}}
                P1Ball::Finite(Ball::new(p, BigRational::zero(), -level))
            }
        }
    }
}
