//! Projective linear fractional transformations over Q_p.
//!
//! A [`MoebiusMap`] is a 2×2 integer matrix up to scalar, kept with
//! content-free entries so long word products stay exact. Points come in two
//! flavours: exact rationals (used by the group machinery and the quadrature
//! engine) and tracked-precision [`PadicNumber`]s (used where square roots are
//! involved: fixed points and multipliers).

use alloc::vec::Vec;
use core::fmt;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::localfield::{FieldError, PadicNumber, ProjPoint};
use crate::rational::valuation;

/// A point of P¹(Q) with exact coordinates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ProjRat {
    Finite(BigRational),
    Infinity,
}

impl ProjRat {
    pub fn finite_i64(n: i64) -> Self {
        ProjRat::Finite(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn as_finite(&self) -> Option<&BigRational> {
        match self {
            ProjRat::Finite(x) => Some(x),
            ProjRat::Infinity => None,
        }
    }

    pub fn is_infinity(&self) -> bool {
        matches!(self, ProjRat::Infinity)
    }
}

impl fmt::Display for ProjRat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProjRat::Finite(x) => write!(f, "{}", x),
            ProjRat::Infinity => write!(f, "inf"),
        }
    }
}

/// Classification of a Möbius map over Q_p.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MapClass {
    Identity,
    /// Trace zero: an involution.
    EllipticOrderTwo,
    Elliptic,
    Parabolic,
    Hyperbolic,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MoebiusError {
    #[error("degenerate matrix: determinant is zero")]
    Degenerate,
    #[error("fixed points are not Q_p-rational: {0}")]
    IrrationalFixedPoints(FieldError),
    #[error("multiplier requires a hyperbolic map, got {0:?}")]
    NotHyperbolic(MapClass),
    #[error("map is the identity")]
    IsIdentity,
    #[error(transparent)]
    Field(#[from] FieldError),
}

/// A nondegenerate element of PGL₂(Q_p), stored as an integral matrix with
/// coprime entries (so the minimal p-valuation of the entries is 0 for
/// every p).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MoebiusMap {
    pub a: BigInt,
    pub b: BigInt,
    pub c: BigInt,
    pub d: BigInt,
}

impl MoebiusMap {
    pub fn identity() -> Self {
        MoebiusMap {
            a: BigInt::one(),
            b: BigInt::zero(),
            c: BigInt::zero(),
            d: BigInt::one(),
        }
    }

    pub fn from_rationals(
        a: &BigRational,
        b: &BigRational,
        c: &BigRational,
        d: &BigRational,
    ) -> Result<Self, MoebiusError> {
        // clear denominators
        let l = lcm4(a.denom(), b.denom(), c.denom(), d.denom());
        let m = MoebiusMap {
            a: a.numer() * (&l / a.denom()),
            b: b.numer() * (&l / b.denom()),
            c: c.numer() * (&l / c.denom()),
            d: d.numer() * (&l / d.denom()),
        };
        m.normalized()
    }

    pub fn from_ints(a: i64, b: i64, c: i64, d: i64) -> Result<Self, MoebiusError> {
        MoebiusMap {
            a: BigInt::from(a),
            b: BigInt::from(b),
            c: BigInt::from(c),
            d: BigInt::from(d),
        }
        .normalized()
    }

    /// Divide out the integer content; errors on determinant zero.
    pub fn normalized(mut self) -> Result<Self, MoebiusError> {
        if self.det().is_zero() {
            return Err(MoebiusError::Degenerate);
        }
        let g = gcd4(&self.a, &self.b, &self.c, &self.d);
        if !g.is_one() {
            self.a /= &g;
            self.b /= &g;
            self.c /= &g;
            self.d /= &g;
        }
        // canonical sign: first nonzero of (a, b, c, d) positive
        let lead = [&self.a, &self.b, &self.c, &self.d]
            .into_iter()
            .find(|x| !x.is_zero())
            .unwrap();
        if lead.is_negative() {
            self.a = -self.a;
            self.b = -self.b;
            self.c = -self.c;
            self.d = -self.d;
        }
        Ok(self)
    }

    pub fn det(&self) -> BigInt {
        &self.a * &self.d - &self.b * &self.c
    }

    pub fn trace(&self) -> BigInt {
        &self.a + &self.d
    }

    pub fn compose(&self, other: &Self) -> Self {
        MoebiusMap {
            a: &self.a * &other.a + &self.b * &other.c,
            b: &self.a * &other.b + &self.b * &other.d,
            c: &self.c * &other.a + &self.d * &other.c,
            d: &self.c * &other.b + &self.d * &other.d,
        }
        .normalized()
        .expect("product of nondegenerate maps is nondegenerate")
    }

    /// Inverse in PGL₂ (the adjugate).
    pub fn inverse(&self) -> Self {
        MoebiusMap {
            a: self.d.clone(),
            b: -self.b.clone(),
            c: -self.c.clone(),
            d: self.a.clone(),
        }
        .normalized()
        .expect("inverse of nondegenerate map")
    }

    pub fn is_identity(&self) -> bool {
        self.b.is_zero() && self.c.is_zero() && self.a == self.d
    }

    /// Projective equality (proportional matrices).
    pub fn proj_eq(&self, other: &Self) -> bool {
        // both are normalized with positive leading entry, so equality is literal
        self == other
    }

    /// Apply to an exact rational point of P¹.
    pub fn apply(&self, z: &ProjRat) -> ProjRat {
        match z {
            ProjRat::Infinity => {
                if self.c.is_zero() {
                    ProjRat::Infinity
                } else {
                    ProjRat::Finite(BigRational::new(self.a.clone(), self.c.clone()))
                }
            }
            ProjRat::Finite(z) => {
                let num = BigRational::from(self.a.clone()) * z + BigRational::from(self.b.clone());
                let den = BigRational::from(self.c.clone()) * z + BigRational::from(self.d.clone());
                if den.is_zero() {
                    ProjRat::Infinity
                } else {
                    ProjRat::Finite(num / den)
                }
            }
        }
    }

    /// Apply to a tracked-precision point.
    pub fn apply_padic(&self, z: &ProjPoint, p: u64, prec: u32) -> Result<ProjPoint, FieldError> {
        match z {
            ProjPoint::Infinity => {
                if self.c.is_zero() {
                    Ok(ProjPoint::Infinity)
                } else {
                    let a = PadicNumber::from_rational(
                        p,
                        prec,
                        &BigRational::new(self.a.clone(), self.c.clone()),
                    );
                    Ok(ProjPoint::Finite(a))
                }
            }
            ProjPoint::Finite(z) => {
                let conv = |n: &BigInt| {
                    PadicNumber::from_rational(p, prec, &BigRational::from_integer(n.clone()))
                };
                let num = conv(&self.a).mul(z)?.add(&conv(&self.b))?;
                let den = conv(&self.c).mul(z)?.add(&conv(&self.d))?;
                if den.is_zeroish() {
                    if num.is_zeroish() {
                        return Err(FieldError::PrecisionExhausted { bound: 0 });
                    }
                    return Ok(ProjPoint::Infinity);
                }
                Ok(ProjPoint::Finite(num.div(&den)?))
            }
        }
    }

    /// |trace|²/|det| > 1 detects hyperbolicity; trace 0 is an involution.
    pub fn classify(&self, p: u64) -> MapClass {
        if self.is_identity() {
            return MapClass::Identity;
        }
        let tr = self.trace();
        let det = self.det();
        if tr.is_zero() {
            return MapClass::EllipticOrderTwo;
        }
        let v_tr = valuation(p, &BigRational::from_integer(tr.clone())).unwrap();
        let v_det = valuation(p, &BigRational::from_integer(det.clone())).unwrap();
        if 2 * v_tr < v_det {
            return MapClass::Hyperbolic;
        }
        if &tr * &tr == BigInt::from(4) * &det {
            return MapClass::Parabolic;
        }
        MapClass::Elliptic
    }

    /// The two fixed points in P¹(Q_p), attracting first for hyperbolic maps;
    /// a parabolic map reports its double fixed point twice.
    pub fn fixed_points(&self, p: u64, prec: u32) -> Result<(ProjPoint, ProjPoint), MoebiusError> {
        if self.is_identity() {
            return Err(MoebiusError::IsIdentity);
        }
        let class = self.classify(p);
        if self.c.is_zero() {
            // fixed: ∞ and b/(a−d) (unless parabolic)
            if self.a == self.d {
                return Ok((ProjPoint::Infinity, ProjPoint::Infinity));
            }
            let z = BigRational::new(self.b.clone(), &self.d - &self.a);
            let fin = ProjPoint::Finite(PadicNumber::from_rational(p, prec, &z));
            if class == MapClass::Hyperbolic {
                // ∞ attracting iff |a| > |d|
                let va = valuation(p, &BigRational::from_integer(self.a.clone())).unwrap();
                let vd = valuation(p, &BigRational::from_integer(self.d.clone())).unwrap();
                if va < vd {
                    return Ok((ProjPoint::Infinity, fin));
                }
                return Ok((fin, ProjPoint::Infinity));
            }
            return Ok((fin, ProjPoint::Infinity));
        }
        // c z² + (d−a) z − b = 0
        let disc = {
            let t = self.trace();
            &t * &t - BigInt::from(4) * self.det()
        };
        if disc.is_zero() {
            let z = BigRational::new(&self.a - &self.d, BigInt::from(2) * &self.c);
            let pt = ProjPoint::Finite(PadicNumber::from_rational(p, prec, &z));
            return Ok((pt.clone(), pt));
        }
        let disc_p =
            PadicNumber::from_rational(p, prec, &BigRational::from_integer(disc));
        let s = disc_p
            .sqrt()
            .map_err(MoebiusError::IrrationalFixedPoints)?;
        let conv =
            |n: &BigInt| PadicNumber::from_rational(p, prec, &BigRational::from_integer(n.clone()));
        let a_minus_d = conv(&(&self.a - &self.d));
        let two_c = conv(&(BigInt::from(2) * &self.c));
        let z1 = a_minus_d.add(&s)?.div(&two_c)?;
        let z2 = a_minus_d.sub(&s)?.div(&two_c)?;
        if class == MapClass::Hyperbolic {
            // the attracting fixed point is the eigenvector of the larger
            // eigenvalue; λ± = (tr ± s)/2, pick by |c z + d| against |λ|
            let tr = conv(&self.trace());
            let lam_plus = tr.add(&s)?;
            let lam_minus = tr.sub(&s)?;
            let vp = lam_plus.valuation()?.unwrap();
            let vm = lam_minus.valuation()?.unwrap();
            // c z + d equals the eigenvalue on the eigenvector (z, 1):
            // for z1 = (a−d+s)/(2c): c z1 + d = (a + d + s)/2 = λ₊
            let (big, _small, z_big, z_small) = if vp < vm {
                (lam_plus, lam_minus, z1, z2)
            } else {
                (lam_minus, lam_plus, z2, z1)
            };
            let _ = big;
            return Ok((ProjPoint::Finite(z_big), ProjPoint::Finite(z_small)));
        }
        Ok((ProjPoint::Finite(z1), ProjPoint::Finite(z2)))
    }

    /// The multiplier μ with |μ| < 1: the ratio of the small to the large
    /// eigenvalue, i.e. the derivative at the attracting fixed point.
    pub fn multiplier(&self, p: u64, prec: u32) -> Result<PadicNumber, MoebiusError> {
        let class = self.classify(p);
        if class != MapClass::Hyperbolic {
            return Err(MoebiusError::NotHyperbolic(class));
        }
        let tr = self.trace();
        let disc = &tr * &tr - BigInt::from(4) * self.det();
        let disc_p = PadicNumber::from_rational(p, prec, &BigRational::from_integer(disc));
        let s = disc_p
            .sqrt()
            .map_err(MoebiusError::IrrationalFixedPoints)?;
        let tr_p = PadicNumber::from_rational(p, prec, &BigRational::from_integer(tr));
        let lam_plus = tr_p.add(&s)?;
        let lam_minus = tr_p.sub(&s)?;
        let vp = lam_plus.valuation()?.unwrap();
        let vm = lam_minus.valuation()?.unwrap();
        let mu = if vp < vm {
            lam_minus.div(&lam_plus)?
        } else {
            lam_plus.div(&lam_minus)?
        };
        Ok(mu)
    }

    /// Valuation of the multiplier, exactly: v(det) − 2·v(trace).
    pub fn multiplier_valuation(&self, p: u64) -> Result<i64, MoebiusError> {
        let class = self.classify(p);
        if class != MapClass::Hyperbolic {
            return Err(MoebiusError::NotHyperbolic(class));
        }
        let v_tr = valuation(p, &BigRational::from_integer(self.trace())).unwrap();
        let v_det = valuation(p, &BigRational::from_integer(self.det())).unwrap();
        Ok(v_det - 2 * v_tr)
    }
}

impl fmt::Display for MoebiusMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[[{}, {}], [{}, {}]]", self.a, self.b, self.c, self.d)
    }
}

fn gcd2(a: &BigInt, b: &BigInt) -> BigInt {
    num_integer::Integer::gcd(a, b)
}

fn gcd4(a: &BigInt, b: &BigInt, c: &BigInt, d: &BigInt) -> BigInt {
    gcd2(&gcd2(a, b), &gcd2(c, d))
}

fn lcm2(a: &BigInt, b: &BigInt) -> BigInt {
    num_integer::Integer::lcm(a, b)
}

fn lcm4(a: &BigInt, b: &BigInt, c: &BigInt, d: &BigInt) -> BigInt {
    lcm2(&lcm2(a, b), &lcm2(c, d))
}

/// Deterministic small-integer pseudo-random matrices for property tests.
pub fn pseudo_random_invertible(seed: u64, count: usize) -> Vec<MoebiusMap> {
    let mut out = Vec::with_capacity(count);
    let mut s = seed.wrapping_mul(0x9e3779b97f4a7c15).wrapping_add(1);
    let mut next = move || {
        s ^= s << 13;
        s ^= s >> 7;
        s ^= s << 17;
        s
    };
    while out.len() < count {
        let v: Vec<i64> = (0..4).map(|_| (next() % 19) as i64 - 9).collect();
        if let Ok(m) = MoebiusMap::from_ints(v[0], v[1], v[2], v[3]) {
            out.push(m);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(n: i64) -> ProjRat {
        ProjRat::finite_i64(n)
    }

    #[test]
    fn apply_examples() {
        let id = MoebiusMap::identity();
        assert_eq!(id.apply(&pt(7)), pt(7));
        // z ↦ 1/z sends p to 1/p
        let s = MoebiusMap::from_ints(0, 1, 1, 0).unwrap();
        assert_eq!(
            s.apply(&pt(5)),
            ProjRat::Finite(BigRational::new(BigInt::from(1), BigInt::from(5)))
        );
        // diagonal maps fix ∞
        let d = MoebiusMap::from_ints(5, 0, 0, 1).unwrap();
        assert_eq!(d.apply(&ProjRat::Infinity), ProjRat::Infinity);
    }

    #[test]
    fn classify_examples() {
        let p = 5;
        assert_eq!(
            MoebiusMap::from_ints(5, 0, 0, 1).unwrap().classify(p),
            MapClass::Hyperbolic
        );
        assert_eq!(
            MoebiusMap::from_ints(0, 1, 1, 0).unwrap().classify(p),
            MapClass::EllipticOrderTwo
        );
        assert_eq!(MoebiusMap::identity().classify(p), MapClass::Identity);
        assert_eq!(
            MoebiusMap::from_ints(1, 1, 0, 1).unwrap().classify(p),
            MapClass::Parabolic
        );
    }

    #[test]
    fn fixed_point_examples() {
        let p = 5;
        // diag(p, 1): fixed (0, ∞), 0 attracting
        let d = MoebiusMap::from_ints(5, 0, 0, 1).unwrap();
        let (att, rep) = d.fixed_points(p, 32).unwrap();
        let z = att.as_finite().unwrap();
        assert!(z.is_exact_zero() || z.valuation().unwrap().unwrap() >= 32);
        assert!(rep.is_infinity());
        // z ↦ 1/z: fixed ±1
        let s = MoebiusMap::from_ints(0, 1, 1, 0).unwrap();
        let (f1, f2) = s.fixed_points(p, 32).unwrap();
        let one = PadicNumber::from_integer(p, 32, 1);
        let m_one = PadicNumber::from_integer(p, 32, -1);
        let a = f1.as_finite().unwrap();
        let b = f2.as_finite().unwrap();
        assert!(
            (a.agrees_with(&one, 30) && b.agrees_with(&m_one, 30))
                || (a.agrees_with(&m_one, 30) && b.agrees_with(&one, 30))
        );
        // parabolic: double fixed point at ∞
        let par = MoebiusMap::from_ints(1, 1, 0, 1).unwrap();
        let (u, v) = par.fixed_points(p, 32).unwrap();
        assert!(u.is_infinity() && v.is_infinity());
    }

    #[test]
    fn fixed_points_are_fixed() {
        let p = 5;
        for m in pseudo_random_invertible(11, 40) {
            if m.classify(p) != MapClass::Hyperbolic {
                continue;
            }
            let Ok((f1, f2)) = m.fixed_points(p, 48) else {
                continue; // irrational fixed points are allowed for random maps
            };
            for f in [f1, f2] {
                let img = m.apply_padic(&f, p, 48).unwrap();
                match (&f, &img) {
                    (ProjPoint::Infinity, ProjPoint::Infinity) => {}
                    (ProjPoint::Finite(a), ProjPoint::Finite(b)) => {
                        assert!(a.agrees_with(b, 20), "fixed point moved");
                    }
                    _ => panic!("fixed point changed type"),
                }
            }
        }
    }

    #[test]
    fn multiplier_examples() {
        let p = 5;
        let d = MoebiusMap::from_ints(5, 0, 0, 1).unwrap();
        let mu = d.multiplier(p, 32).unwrap();
        assert!(mu.agrees_with(&PadicNumber::from_integer(p, 32, 5), 30));
        let d2 = MoebiusMap::from_ints(25, 0, 0, 1).unwrap();
        let mu2 = d2.multiplier(p, 32).unwrap();
        assert!(mu2.agrees_with(&PadicNumber::from_integer(p, 32, 25), 30));
        // conjugate of diag(5,1) by [[1,1],[0,1]] keeps multiplier 5
        let g = MoebiusMap::from_ints(1, 1, 0, 1).unwrap();
        let conj = g.compose(&d).compose(&g.inverse());
        let mu3 = conj.multiplier(p, 32).unwrap();
        assert!(mu3.agrees_with(&mu, 30));
    }

    #[test]
    fn multiplier_conjugation_invariant() {
        let p = 5;
        let base = MoebiusMap::from_ints(25, 0, 0, 1).unwrap();
        let mu = base.multiplier(p, 40).unwrap();
        for g in pseudo_random_invertible(7, 200) {
            let conj = g.compose(&base).compose(&g.inverse());
            assert_eq!(conj.classify(p), MapClass::Hyperbolic);
            let mu_c = conj.multiplier(p, 40).unwrap();
            assert_eq!(
                mu_c.valuation().unwrap(),
                mu.valuation().unwrap(),
                "valuation changed under conjugation"
            );
            assert!(mu_c.agrees_with(&mu, 38), "digits changed under conjugation");
        }
    }

    #[test]
    fn classify_conjugation_invariant() {
        let p = 5;
        let samples = pseudo_random_invertible(3, 60);
        let conjugators = pseudo_random_invertible(17, 10);
        for m in &samples {
            let class = m.classify(p);
            for g in &conjugators {
                let conj = g.compose(m).compose(&g.inverse());
                assert_eq!(conj.classify(p), class);
            }
        }
    }

    #[test]
    fn word_products_projective() {
        let a = MoebiusMap::from_ints(25, 0, 0, 1).unwrap();
        let b = MoebiusMap::from_ints(-28, 9, -9, 2).unwrap();
        let ab = a.compose(&b);
        let ba_inv = b.inverse().compose(&a.inverse());
        assert!(ab.compose(&ba_inv).is_identity());
    }
}
