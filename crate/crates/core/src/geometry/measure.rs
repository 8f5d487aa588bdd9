//! Exact integrals of factored absolute-value densities over balls.
//!
//! An [`AbsModel`] is C·∏|x−t_i|^(e_i): the absolute value of a rational
//! function with Q_p-rational zeros and poles. Its integral over a ball is an
//! exact rational: factors separated from the ball are constants, a single
//! enclosed zero has the closed-form shell sum
//! Σ_{ℓ≥k} p^(−ℓe)·p^(−ℓ)(1−1/p) = (1−1/p)·p^(−k(e+1))/(1−p^(−(e+1))),
//! and everything else is resolved by subdividing until points separate.

use alloc::vec::Vec;
use num_rational::BigRational;
use num_traits::{One, Zero};

use super::ball::Ball;
use crate::rational::{p_pow, rat_pow, valuation};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GeomError {
    #[error("integral diverges: pole of order {order} inside the region at {at}")]
    DivergentIntegral { order: i64, at: alloc::string::String },
    #[error("density vanishes identically")]
    ZeroDensity,
    #[error("evaluation at a zero/pole of the model")]
    EvalAtSingularPoint,
    #[error("inconsistent factored form: {0}")]
    InconsistentForm(alloc::string::String),
}

/// C·∏|x−t_i|^(e_i) with exact rational data.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AbsModel {
    pub p: u64,
    pub coeff: BigRational,
    /// (point, order): order > 0 is a zero, order < 0 a pole.
    pub factors: Vec<(BigRational, i64)>,
}

impl AbsModel {
    pub fn constant(p: u64, coeff: BigRational) -> Self {
        AbsModel {
            p,
            coeff,
            factors: Vec::new(),
        }
    }

    pub fn new(p: u64, coeff: BigRational, factors: Vec<(BigRational, i64)>) -> Self {
        let mut m = AbsModel { p, coeff, factors };
        m.normalize();
        m
    }

    /// Merge coincident points and drop zero orders.
    pub fn normalize(&mut self) {
        let mut merged: Vec<(BigRational, i64)> = Vec::new();
        for (t, e) in self.factors.drain(..) {
            if e == 0 {
                continue;
            }
            if let Some(slot) = merged.iter_mut().find(|(u, _)| *u == t) {
                slot.1 += e;
            } else {
                merged.push((t, e));
            }
        }
        merged.retain(|(_, e)| *e != 0);
        self.factors = merged;
    }

    /// Exact value C·∏ p^(−e·v(x−t)): zero at a zero of the model, error at
    /// a pole.
    pub fn eval(&self, x: &BigRational) -> Result<BigRational, GeomError> {
        let mut acc = self.coeff.clone();
        for (t, e) in &self.factors {
            match valuation(self.p, &(x - t)) {
                None if *e > 0 => return Ok(BigRational::zero()),
                None => return Err(GeomError::EvalAtSingularPoint),
                Some(v) => acc *= p_pow(self.p, -e * v),
            }
        }
        Ok(acc)
    }

    /// log_p of the value, as (constant valuation offset apart): −v_p(value).
    pub fn eval_valuation(&self, x: &BigRational) -> Result<i64, GeomError> {
        let mut acc = -valuation(self.p, &self.coeff).ok_or(GeomError::ZeroDensity)?;
        for (t, e) in &self.factors {
            match valuation(self.p, &(x - t)) {
                None => return Err(GeomError::EvalAtSingularPoint),
                Some(v) => acc -= e * v,
            }
        }
        Ok(acc)
    }

    /// ∫_ball C·∏|x−t_i|^(e_i) dx, exact.
    pub fn integral_ball(&self, ball: &Ball) -> Result<BigRational, GeomError> {
        let value = self.integral_inner(ball, &self.factors.iter().collect::<Vec<_>>())?;
        Ok(&self.coeff * value)
    }

    fn integral_inner(
        &self,
        ball: &Ball,
        factors: &[&(BigRational, i64)],
    ) -> Result<BigRational, GeomError> {
        let p = self.p;
        let mut const_part = BigRational::one();
        let mut inside: Vec<&(BigRational, i64)> = Vec::new();
        for f in factors {
            let (t, e) = f;
            match valuation(p, &(t - &ball.center)) {
                Some(v) if v < ball.level => {
                    const_part *= p_pow(p, -e * v);
                }
                _ => inside.push(f),
            }
        }
        if inside.is_empty() {
            return Ok(const_part * ball.haar());
        }
        if inside.len() == 1 {
            let (t, e) = inside[0];
            if *e <= -1 {
                return Err(GeomError::DivergentIntegral {
                    order: -e,
                    at: crate::rational::format_rational(t),
                });
            }
            // recenter at the zero; remaining factors are constant already
            let shell_sum = {
                // Σ_{ℓ≥k} p^(−ℓ(e+1)) (1 − 1/p)
                let k = ball.level;
                let one_minus = BigRational::one() - p_pow(p, -1);
                let head = p_pow(p, -k * (e + 1));
                let ratio = BigRational::one() - p_pow(p, -(e + 1));
                one_minus * head / ratio
            };
            return Ok(const_part * shell_sum);
        }
        // several points inside: subdivide
        let mut acc = BigRational::zero();
        for child in ball.children() {
            acc += self.integral_inner(&child, &inside)?;
        }
        Ok(const_part * acc)
    }

    /// ∫ over `ball ∖ ∪holes`, exact (holes may overlap zeros/poles).
    pub fn integral_ball_minus(
        &self,
        ball: &Ball,
        holes: &[Ball],
    ) -> Result<BigRational, GeomError> {
        let parts = super::ball::complement_decomposition(ball, holes);
        let mut acc = BigRational::zero();
        for part in parts {
            acc += self.integral_ball(&part)?;
        }
        Ok(acc)
    }

    /// ∫ over the sphere {|x − c| = p^(−k)} where c is `ball.center` and
    /// k = `ball.level`: the ball minus its center child.
    pub fn integral_sphere(&self, ball: &Ball) -> Result<BigRational, GeomError> {
        let inner = ball.child_containing(&ball.center.clone());
        self.integral_ball_minus(ball, &[inner])
    }

    /// Multiply by another model (orders add at coincident points).
    pub fn product(&self, other: &AbsModel) -> AbsModel {
        let mut factors = self.factors.clone();
        factors.extend(other.factors.iter().cloned());
        AbsModel::new(self.p, &self.coeff * &other.coeff, factors)
    }

    /// Scale points by a rational unit u: the model of x ↦ f(x/u)… used for
    /// the hole-escape rescaling; factors move t ↦ u·t, coefficient adjusts by
    /// |u|^{Σe} when evaluating f(u·x).
    pub fn total_order(&self) -> i64 {
        self.factors.iter().map(|(_, e)| e).sum()
    }
}

/// A regular-differential density |ω| = |w(z)|·|dz| on the fundamental
/// domain, in factored form. The zeros of positive order inside F are the
/// removed set S; factors at hole points (any sign) are carried along for
/// exactness.
#[derive(Debug, Clone)]
pub struct OmegaSpec {
    pub model: AbsModel,
    /// (point, order) with order ≥ 1: the set S = V(ω) inside F.
    pub curve_zeros: Vec<(BigRational, i64)>,
}

impl OmegaSpec {
    pub fn new(model: AbsModel, curve_zeros: Vec<(BigRational, i64)>) -> Self {
        OmegaSpec { model, curve_zeros }
    }

    /// Haar measure itself (no zeros): the degenerate g = 1 style density.
    pub fn haar(p: u64) -> Self {
        OmegaSpec {
            model: AbsModel::constant(p, BigRational::one()),
            curve_zeros: Vec::new(),
        }
    }

    pub fn degree_sum(&self) -> i64 {
        self.curve_zeros.iter().map(|(_, e)| e).sum()
    }
}

/// Independent shell-sum oracle used by tests: integrate C·∏|x−t|^e over a
/// ball by brute enumeration of sub-balls down to `depth`, treating the model
/// as constant on each smallest cell (exact when the cells separate all
/// points; used only on inputs where that holds, plus a closed tail bound).
pub fn brute_force_ball_integral(
    model: &AbsModel,
    ball: &Ball,
    depth: i64,
) -> Result<BigRational, GeomError> {
    fn rec(model: &AbsModel, ball: &Ball, depth: i64) -> Result<BigRational, GeomError> {
        let center_hit = model
            .factors
            .iter()
            .any(|(t, _)| ball.contains_point(t));
        if !center_hit {
            return Ok(model.eval(&ball.center)? * ball.haar());
        }
        if depth == 0 {
            // exact tail: single zero assumed separated at this depth
            let enclosed: Vec<&(BigRational, i64)> = model
                .factors
                .iter()
                .filter(|(t, _)| ball.contains_point(t))
                .collect();
            if enclosed.len() != 1 || enclosed[0].1 < 0 {
                return Err(GeomError::InconsistentForm(alloc::string::String::from(
                    "oracle tail needs one separated zero",
                )));
            }
            let (t, e) = enclosed[0];
            let p = model.p;
            let mut const_part = model.coeff.clone();
            for (u, eu) in &model.factors {
                if u != t {
                    const_part *= p_pow(p, -eu * valuation(p, &(u - &ball.center)).unwrap());
                }
            }
            let one_minus = BigRational::one() - p_pow(p, -1);
            let head = p_pow(p, -ball.level * (e + 1));
            let ratio = BigRational::one() - p_pow(p, -(e + 1));
            return Ok(const_part * one_minus * head / ratio);
        }
        let mut acc = BigRational::zero();
        for child in ball.children() {
            acc += rec(model, &child, depth - 1)?;
        }
        Ok(acc)
    }
    rec(model, ball, depth)
}

/// Closed-form ∫_{Ball(t,k)} |x−t|^e dx for tests.
pub fn single_zero_ball_integral(p: u64, k: i64, e: i64) -> BigRational {
    let one_minus = BigRational::one() - p_pow(p, -1);
    one_minus * p_pow(p, -k * (e + 1)) / (BigRational::one() - p_pow(p, -(e + 1)))
}

/// |u|^e helper for rescaling arguments.
pub fn abs_pow(p: u64, u: &BigRational, e: i64) -> BigRational {
    rat_pow(&crate::rational::abs_p(p, u), e)
}
