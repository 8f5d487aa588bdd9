//! Truncated theta products θ(a,b;z), automorphy characters, the period
//! pairing Q, and the lattice theta series ϑ(c;z).
//!
//! Products run over all reduced words of length ≤ N; every value carries a
//! tail estimate (the largest |factor − 1| on the outermost word shell) so
//! downstream tolerances can be derived instead of guessed. Arithmetic is
//! p-adic with tracked precision; factors are exact rationals until the final
//! modular reduction, so no precision is lost across tens of thousands of
//! factors.

use alloc::vec;
use alloc::vec::Vec;
use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::localfield::{FieldError, PadicNumber};
use crate::moebius::ProjRat;
use crate::rational::{int_valuation, valuation};
use crate::schottky::{SchottkyGroup, Word};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ThetaError {
    #[error("pole hit: z is within working precision of an orbit point of b")]
    PoleHit,
    #[error("product does not converge: tail estimate ≥ 1")]
    NonConvergent,
    #[error("truncation too small: samples agree to only {got} digits, need {need}")]
    TruncationTooSmall { got: u32, need: u32 },
    #[error("theta series vanishes identically at the probes")]
    IdenticallyVanishing,
    #[error("square root of diagonal period not in Q_p")]
    PeriodSqrtMissing,
    #[error("argument must be finite")]
    InfiniteArgument,
    #[error(transparent)]
    Field(#[from] FieldError),
}

/// Word shells and matrices of a group, enumerated once and shared.
pub struct ThetaContext<'g> {
    pub group: &'g SchottkyGroup,
    pub words: Vec<(Word, crate::moebius::MoebiusMap)>,
    pub max_len: usize,
    pub precision: u32,
}

impl<'g> ThetaContext<'g> {
    pub fn new(group: &'g SchottkyGroup, max_len: usize) -> Self {
        ThetaContext {
            group,
            words: group.enumerate_words(max_len),
            max_len,
            precision: group.precision,
        }
    }
}

/// The theta product θ(a,b;z) in the cross-ratio normalisation
///
/// θ(a,b;z) = ∏_{|w| ≤ N} [(z − w(a))·(z₀ − w(b))] / [(z − w(b))·(z₀ − w(a))]
///
/// for a fixed reference point z₀. The plain product diverges whenever ∞ is a
/// limit point (which the (0,∞)-normalised first generator forces); the
/// cross-ratio factor tends to 1 along every end of the orbit. Zeros, poles
/// and all automorphy characters are unchanged, and θ(a,b;z₀) = 1 exactly.
pub struct ThetaProduct {
    pub a: BigRational,
    pub b: BigRational,
    pub reference: BigRational,
    /// (w(a), w(b), word length) per word.
    orbit: Vec<(BigRational, BigRational, usize)>,
    p: u64,
    precision: u32,
    max_len: usize,
}

impl ThetaProduct {
    pub fn new(
        ctx: &ThetaContext<'_>,
        a: &BigRational,
        b: &BigRational,
        reference: &BigRational,
    ) -> Self {
        let mut orbit = Vec::with_capacity(ctx.words.len());
        for (w, m) in &ctx.words {
            let ia = m.apply(&ProjRat::Finite(a.clone()));
            let ib = m.apply(&ProjRat::Finite(b.clone()));
            if let (ProjRat::Finite(ia), ProjRat::Finite(ib)) = (ia, ib) {
                orbit.push((ia, ib, w.len()));
            }
        }
        ThetaProduct {
            a: a.clone(),
            b: b.clone(),
            reference: reference.clone(),
            orbit,
            p: ctx.group.p,
            precision: ctx.precision,
            max_len: ctx.max_len,
        }
    }

    /// Evaluate at a finite rational point; returns the value and the tail
    /// estimate max_{|w| = N} |w(a) − w(b)|·|z − z₀| / (|z − w(b)|·|z₀ − w(a)|).
    pub fn eval(&self, z: &BigRational) -> Result<(PadicNumber, f64), ThetaError> {
        let p = self.p;
        let prec = self.precision;
        let z0 = &self.reference;
        let modulus = BigUint::from(p).pow(prec);
        let mut num_val: i64 = 0;
        let mut den_val: i64 = 0;
        let mut num_unit = BigUint::one();
        let mut den_unit = BigUint::one();
        // Vanishing factors are all the same linear form (z − z) and cancel
        // zero against pole; a surplus means z really is a zero or a pole.
        let mut zeros_hit = 0usize;
        let mut poles_hit = 0usize;
        let mut tail: f64 = 0.0;
        for (ga, gb, len) in &self.orbit {
            let dn = z - ga;
            let dd = z - gb;
            let rn = z0 - gb;
            let rd = z0 - ga;
            if rn.is_zero() || rd.is_zero() {
                return Err(ThetaError::PoleHit);
            }
            if *len == self.max_len && !dd.is_zero() {
                // |factor − 1| = |ga − gb|·|z − z₀| / (|z − gb|·|z₀ − ga|)
                let vd = valuation(p, &dd).unwrap();
                let vrd = valuation(p, &rd).unwrap();
                let dab = ga - gb;
                let dz = z - z0;
                let ratio = match (valuation(p, &dab), valuation(p, &dz)) {
                    (Some(vab), Some(vz)) => {
                        libm::pow(p as f64, (vd + vrd - vab - vz) as f64)
                    }
                    _ => 0.0,
                };
                if ratio > tail {
                    tail = ratio;
                }
            }
            // constant reference parts
            let (vrn, urn) = reduce_unit(p, &rn, &modulus);
            let (vrd, urd) = reduce_unit(p, &rd, &modulus);
            num_val += vrn;
            den_val += vrd;
            num_unit = num_unit * urn % &modulus;
            den_unit = den_unit * urd % &modulus;
            if dn.is_zero() {
                zeros_hit += 1;
            } else {
                let (vn, un) = reduce_unit(p, &dn, &modulus);
                num_val += vn;
                num_unit = num_unit * un % &modulus;
            }
            if dd.is_zero() {
                poles_hit += 1;
            } else {
                let (vd, ud) = reduce_unit(p, &dd, &modulus);
                den_val += vd;
                den_unit = den_unit * ud % &modulus;
            }
        }
        if poles_hit > zeros_hit {
            return Err(ThetaError::PoleHit);
        }
        if zeros_hit > poles_hit {
            return Ok((PadicNumber::zero(p), tail));
        }
        let den_inv = modinv(&den_unit, &modulus);
        let unit = num_unit * den_inv % &modulus;
        let value = PadicNumber::from_valuation_unit(p, prec, num_val - den_val, unit);
        Ok((value, tail))
    }

    /// Largest |factor − 1| per word length (a convergence diagnostic).
    pub fn shell_profile(&self, z: &BigRational) -> Vec<f64> {
        let p = self.p;
        let z0 = &self.reference;
        let mut out = vec![0.0f64; self.max_len + 1];
        for (ga, gb, len) in &self.orbit {
            let dd = z - gb;
            let rd = z0 - ga;
            let dab = ga - gb;
            let dz = z - z0;
            let ratio = match (
                valuation(p, &dab),
                valuation(p, &dz),
                valuation(p, &dd),
                valuation(p, &rd),
            ) {
                (None, _, _, _) | (_, None, _, _) => 0.0,
                (Some(vab), Some(vz), Some(vd), Some(vrd)) => {
                    libm::pow(p as f64, (vd + vrd - vab - vz) as f64)
                }
                _ => f64::INFINITY,
            };
            if ratio > out[*len] {
                out[*len] = ratio;
            }
        }
        out
    }
}

fn reduce_unit(p: u64, x: &BigRational, modulus: &BigUint) -> (i64, BigUint) {
    let vn = int_valuation(p, x.numer());
    let vd = int_valuation(p, x.denom());
    let pn = BigInt::from(p).pow(vn as u32);
    let pd = BigInt::from(p).pow(vd as u32);
    let nu = x.numer() / pn;
    let du = x.denom() / pd;
    let m = BigInt::from(modulus.clone());
    let nu_m = (((&nu % &m) + &m) % &m).to_biguint().unwrap();
    let du_m = (((&du % &m) + &m) % &m).to_biguint().unwrap();
    let du_inv = modinv(&du_m, modulus);
    (vn - vd, nu_m * du_inv % modulus)
}

fn modinv(a: &BigUint, modulus: &BigUint) -> BigUint {
    let a = BigInt::from(a.clone());
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
    (((t0 % &m) + &m) % &m).to_biguint().unwrap()
}

/// Leading digits on which two values agree: v(a−b) − min(v(a), v(b)).
pub fn agreement_digits(a: &PadicNumber, b: &PadicNumber) -> u32 {
    let Ok(d) = a.sub(b) else { return 0 };
    let va = a.valuation().ok().flatten();
    let vb = b.valuation().ok().flatten();
    let vmin = match (va, vb) {
        (Some(x), Some(y)) => x.min(y),
        _ => return 0,
    };
    match d.valuation() {
        Ok(None) => a.precision().unwrap_or(0),
        Ok(Some(vd)) => (vd - vmin).max(0) as u32,
        Err(FieldError::PrecisionExhausted { bound }) => (bound - vmin).max(0) as u32,
        Err(_) => 0,
    }
}

/// A Q_p^×-valued character of Γ, given by its values on the generators and
/// extended through the abelianisation.
#[derive(Debug, Clone)]
pub struct Character {
    pub values: Vec<PadicNumber>,
}

impl Character {
    pub fn trivial(p: u64, prec: u32, rank: usize) -> Self {
        Character {
            values: vec![PadicNumber::one(p, prec); rank],
        }
    }

    pub fn rank(&self) -> usize {
        self.values.len()
    }

    pub fn eval_exponents(&self, n: &[i64]) -> Result<PadicNumber, FieldError> {
        let p = self.values[0].prime();
        let prec = self.values[0]
            .precision()
            .unwrap_or(crate::localfield::DEFAULT_PRECISION);
        let mut acc = PadicNumber::one(p, prec);
        for (v, e) in self.values.iter().zip(n.iter()) {
            if *e != 0 {
                acc = acc.mul(&v.pow(*e)?)?;
            }
        }
        Ok(acc)
    }

    pub fn eval_word(&self, w: &Word) -> Result<PadicNumber, FieldError> {
        self.eval_exponents(&w.abelianization(self.rank()))
    }

    pub fn mul(&self, other: &Character) -> Result<Character, FieldError> {
        let values = self
            .values
            .iter()
            .zip(other.values.iter())
            .map(|(a, b)| a.mul(b))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Character { values })
    }

    pub fn inv(&self) -> Result<Character, FieldError> {
        let values = self
            .values
            .iter()
            .map(|a| a.inv())
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Character { values })
    }
}

/// u_α(z) = θ(x₀, α x₀; z), normalised so that u_α(x₀) = 1 exactly: the
/// cross-ratio product is divided by its own value at the base point (whose
/// vanishing zero/pole factor pair cancels).
pub struct UAlpha {
    theta: ThetaProduct,
    at_base: PadicNumber,
}

impl UAlpha {
    pub fn eval(&self, z: &BigRational) -> Result<(PadicNumber, f64), ThetaError> {
        let (v, tail) = self.theta.eval(z)?;
        Ok((v.div(&self.at_base)?, tail))
    }
}

/// The u_α family for a fixed base point x₀.
pub struct AutomorphicFamily<'g> {
    pub ctx: &'g ThetaContext<'g>,
    pub base_point: BigRational,
    pub reference: BigRational,
    /// u_{γ_i} for the generators.
    pub u_gens: Vec<UAlpha>,
}

impl<'g> AutomorphicFamily<'g> {
    /// `reference` is the cross-ratio normalisation point; it must avoid the
    /// orbits of the base point (any interior point of F distinct from x₀
    /// works).
    pub fn new(
        ctx: &'g ThetaContext<'g>,
        base_point: &BigRational,
        reference: &BigRational,
    ) -> Result<Self, ThetaError> {
        let mut fam = AutomorphicFamily {
            ctx,
            base_point: base_point.clone(),
            reference: reference.clone(),
            u_gens: Vec::new(),
        };
        for i in 0..ctx.group.rank() {
            let u = fam.u_word(&Word(vec![(i + 1) as i32]))?;
            fam.u_gens.push(u);
        }
        Ok(fam)
    }

    /// u_α for an arbitrary word.
    pub fn u_word(&self, alpha: &Word) -> Result<UAlpha, ThetaError> {
        let m = self.ctx.group.word_matrix(alpha);
        let image = m.apply(&ProjRat::Finite(self.base_point.clone()));
        let ProjRat::Finite(image) = image else {
            return Err(ThetaError::InfiniteArgument);
        };
        let theta = ThetaProduct::new(self.ctx, &self.base_point, &image, &self.reference);
        let (at_base, _) = theta.eval(&self.base_point)?;
        if at_base.is_zeroish() {
            return Err(ThetaError::IdenticallyVanishing);
        }
        Ok(UAlpha { theta, at_base })
    }

    /// The automorphy factor c(a,b;α) = θ(a,b;z)/θ(a,b;αz), verified at two
    /// sample points and required to agree to `need_digits`.
    pub fn automorphy_factor(
        &self,
        theta: &ThetaProduct,
        alpha: &Word,
        samples: &[BigRational; 2],
        need_digits: u32,
    ) -> Result<PadicNumber, ThetaError> {
        let m = self.ctx.group.word_matrix(alpha);
        let mut vals = Vec::new();
        for z in samples {
            let az = m.apply(&ProjRat::Finite(z.clone()));
            let ProjRat::Finite(az) = az else {
                return Err(ThetaError::InfiniteArgument);
            };
            let (v1, _) = theta.eval(z)?;
            let (v2, _) = theta.eval(&az)?;
            vals.push(v1.div(&v2)?);
        }
        let got = agreement_digits(&vals[0], &vals[1]);
        if got < need_digits {
            return Err(ThetaError::TruncationTooSmall {
                got,
                need: need_digits,
            });
        }
        Ok(vals[0].clone())
    }

    /// Q(c_α, c_β) = u_α(z)/u_α(βz), z-independence checked at two samples.
    pub fn period_pairing(
        &self,
        alpha: &Word,
        beta: &Word,
        samples: &[BigRational; 2],
        need_digits: u32,
    ) -> Result<PadicNumber, ThetaError> {
        let u_a = self.u_word(alpha)?;
        let m_b = self.ctx.group.word_matrix(beta);
        let mut vals = Vec::new();
        for z in samples {
            let bz = m_b.apply(&ProjRat::Finite(z.clone()));
            let ProjRat::Finite(bz) = bz else {
                return Err(ThetaError::InfiniteArgument);
            };
            let (v1, _) = u_a.eval(z)?;
            let (v2, _) = u_a.eval(&bz)?;
            vals.push(v1.div(&v2)?);
        }
        let got = agreement_digits(&vals[0], &vals[1]);
        if got < need_digits {
            return Err(ThetaError::TruncationTooSmall {
                got,
                need: need_digits,
            });
        }
        Ok(vals[0].clone())
    }

    /// t_Γ(z): the character γ ↦ c(z, x₀; γ), whose generator values are the
    /// u_i(z) themselves (u_γ(x₀) = 1 makes the normalisation exact).
    pub fn abel_jacobi(&self, z: &BigRational) -> Result<Character, ThetaError> {
        let mut values = Vec::new();
        for u in &self.u_gens {
            values.push(u.eval(z)?.0);
        }
        Ok(Character { values })
    }
}

/// The multiplicative period data: Q_ij on generators and chosen square roots
/// P_ii of the diagonal.
#[derive(Debug, Clone)]
pub struct PeriodMatrix {
    pub q: Vec<Vec<PadicNumber>>,
    pub p_diag: Vec<PadicNumber>,
}

impl PeriodMatrix {
    /// Build from the period pairing; P_ii by Hensel square root (refusing
    /// when the root is not in Q_p). Symmetry Q_ij = Q_ji is required to
    /// `need_digits`.
    pub fn from_family(
        fam: &AutomorphicFamily<'_>,
        samples: &[BigRational; 2],
        need_digits: u32,
    ) -> Result<Self, ThetaError> {
        let q = Self::pairing_matrix(fam, samples, need_digits)?;
        let mut p_diag = Vec::new();
        for (i, row) in q.iter().enumerate() {
            let root = row[i].sqrt().map_err(|_| ThetaError::PeriodSqrtMissing)?;
            p_diag.push(root);
        }
        Ok(PeriodMatrix { q, p_diag })
    }

    /// The pairing matrix alone (diagonal roots supplied separately).
    pub fn pairing_matrix(
        fam: &AutomorphicFamily<'_>,
        samples: &[BigRational; 2],
        need_digits: u32,
    ) -> Result<Vec<Vec<PadicNumber>>, ThetaError> {
        let g = fam.ctx.group.rank();
        let mut q: Vec<Vec<PadicNumber>> = Vec::new();
        for i in 0..g {
            let mut row = Vec::new();
            for j in 0..g {
                let wi = Word(vec![(i + 1) as i32]);
                let wj = Word(vec![(j + 1) as i32]);
                let v = fam.period_pairing(&wi, &wj, samples, need_digits)?;
                row.push(v);
            }
            q.push(row);
        }
        // symmetry check
        for i in 0..g {
            for j in (i + 1)..g {
                let got = agreement_digits(&q[i][j], &q[j][i]);
                if got < need_digits {
                    return Err(ThetaError::TruncationTooSmall {
                        got,
                        need: need_digits,
                    });
                }
            }
        }
        Ok(q)
    }

    pub fn with_p_diag(mut self, p_diag: Vec<PadicNumber>) -> Self {
        self.p_diag = p_diag;
        self
    }

    pub fn from_parts(q: Vec<Vec<PadicNumber>>, p_diag: Vec<PadicNumber>) -> Self {
        PeriodMatrix { q, p_diag }
    }

    pub fn rank(&self) -> usize {
        self.p_diag.len()
    }

    /// P(n,n) = ∏ P_ii^(n_i²) ∏_{i<j} Q_ij^(n_i n_j).
    pub fn p_of(&self, n: &[i64]) -> Result<PadicNumber, FieldError> {
        let g = self.rank();
        let p = self.p_diag[0].prime();
        let prec = self.p_diag[0]
            .precision()
            .unwrap_or(crate::localfield::DEFAULT_PRECISION);
        let mut acc = PadicNumber::one(p, prec);
        for i in 0..g {
            if n[i] != 0 {
                acc = acc.mul(&self.p_diag[i].pow(n[i] * n[i])?)?;
            }
            for j in (i + 1)..g {
                if n[i] != 0 && n[j] != 0 {
                    acc = acc.mul(&self.q[i][j].pow(n[i] * n[j])?)?;
                }
            }
        }
        Ok(acc)
    }

    /// The character c_α of a word α: its value on γ_j is Q(γ_j, α).
    pub fn word_character(&self, alpha: &Word) -> Result<Character, FieldError> {
        let g = self.rank();
        let n = alpha.abelianization(g);
        let p = self.p_diag[0].prime();
        let prec = self.p_diag[0]
            .precision()
            .unwrap_or(crate::localfield::DEFAULT_PRECISION);
        let mut values = Vec::new();
        for j in 0..g {
            let mut acc = PadicNumber::one(p, prec);
            for (i, e) in n.iter().enumerate() {
                if *e != 0 {
                    acc = acc.mul(&self.q[j][i].pow(*e)?)?;
                }
            }
            values.push(acc);
        }
        Ok(Character { values })
    }

    /// All diagonal periods must satisfy |Q_ii| < 1 for the series to
    /// converge.
    pub fn diagonal_contracting(&self) -> bool {
        self.q.iter().enumerate().all(|(i, row)| {
            row[i]
                .valuation()
                .map(|v| v.map(|x| x > 0).unwrap_or(false))
                .unwrap_or(false)
        })
    }
}

/// ϑ(c;z) = Σ_{n∈Z^g} P(n,n)(c₁u₁(z))^{n₁}…(c_g u_g(z))^{n_g}, truncated to
/// the box max|n_i| ≤ radius; θ_Γ(c) is the same sum without u-factors.
pub struct RiemannTheta<'a> {
    pub pm: &'a PeriodMatrix,
    pub box_radius: i64,
}

impl<'a> RiemannTheta<'a> {
    pub fn new(pm: &'a PeriodMatrix, box_radius: i64) -> Self {
        RiemannTheta { pm, box_radius }
    }

    fn enumerate_box(&self) -> Vec<Vec<i64>> {
        let g = self.pm.rank();
        let b = self.box_radius;
        let mut out = Vec::new();
        let mut cur = vec![-b; g];
        loop {
            out.push(cur.clone());
            let mut k = 0;
            loop {
                if k == g {
                    return out;
                }
                cur[k] += 1;
                if cur[k] <= b {
                    break;
                }
                cur[k] = -b;
                k += 1;
            }
        }
    }

    /// The sum with per-generator multipliers m_i = c_i·u_i(z) (or just c_i
    /// for θ_Γ). Returns the value and the largest boundary-shell |term| as
    /// the omitted-tail estimate.
    pub fn sum_with_multipliers(
        &self,
        multipliers: &[PadicNumber],
    ) -> Result<(PadicNumber, f64), ThetaError> {
        if !self.pm.diagonal_contracting() {
            return Err(ThetaError::NonConvergent);
        }
        let p = multipliers[0].prime();
        let mut acc = PadicNumber::zero(p);
        let mut tail: f64 = 0.0;
        for n in self.enumerate_box() {
            let mut term = self.pm.p_of(&n)?;
            for (m, e) in multipliers.iter().zip(n.iter()) {
                if *e != 0 {
                    term = term.mul(&m.pow(*e)?)?;
                }
            }
            if n.iter().any(|v| v.abs() == self.box_radius) {
                if let Ok(a) = term.abs_f64() {
                    if a > tail {
                        tail = a;
                    }
                }
            }
            acc = acc.add(&term)?;
        }
        Ok((acc, tail))
    }

    pub fn theta_gamma(&self, c: &Character) -> Result<(PadicNumber, f64), ThetaError> {
        self.sum_with_multipliers(&c.values)
    }

    pub fn vartheta(
        &self,
        c: &Character,
        u_values: &[PadicNumber],
    ) -> Result<(PadicNumber, f64), ThetaError> {
        let mult = c
            .values
            .iter()
            .zip(u_values.iter())
            .map(|(ci, ui)| ci.mul(ui))
            .collect::<Result<Vec<_>, _>>()?;
        self.sum_with_multipliers(&mult)
    }
}

/// f_Γ(z) = ϑ(c;z)·ϑ(c′c″;z) / (ϑ(cc′;z)·ϑ(c″;z)): Γ-invariant because the
/// functional-equation cofactors cancel.
pub fn invariant_function(
    rt: &RiemannTheta<'_>,
    c: &Character,
    c1: &Character,
    c2: &Character,
    u_values: &[PadicNumber],
) -> Result<PadicNumber, ThetaError> {
    let n1 = rt.vartheta(c, u_values)?.0;
    let n2 = rt.vartheta(&c1.mul(c2)?, u_values)?.0;
    let d1 = rt.vartheta(&c.mul(c1)?, u_values)?.0;
    let d2 = rt.vartheta(c2, u_values)?.0;
    if d1.is_zeroish() || d2.is_zeroish() {
        return Err(ThetaError::IdenticallyVanishing);
    }
    Ok(n1.mul(&n2)?.div(&d1.mul(&d2)?)?)
}
