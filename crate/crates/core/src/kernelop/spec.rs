//! The factored kernel model Φ with hole-escape rescaling and pole clamping,
//! and its exact ball masses.
//!
//! H(x,y) = Φ(x−y) where Φ(w) = C·∏|u − t_i|^(e_i) evaluated at the reduced
//! representative u = w/μ₁^n whose valuation lies in the base band
//! [0, v(μ₁)); on the pole neighbourhoods (the clamp balls, checked after
//! reduction) the kernel is the constant 1. The model is kept symmetric under
//! negation so that H(x,y) = H(y,x) exactly.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::geometry::{complement_decomposition, AbsModel, Ball, GeomError};
use crate::rational::{p_pow, rat_pow, valuation};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum KernelError {
    #[error("kernel evaluated on a measure-zero input (x − y indistinguishable from a limit point)")]
    MeasureZeroInput,
    #[error("kernel model must have degree zero, got {0}")]
    NotDegreeZero(i64),
    #[error("kernel model must be symmetric under negation (point {0} unmatched)")]
    NotSymmetric(String),
    #[error("multiplier must have positive valuation")]
    BadMultiplier,
    #[error("clamp ball at {0} does not isolate a pole of the model")]
    BadClamp(String),
    #[error("model zero of order {order} at {at} lies inside a clamp ball")]
    ZeroInsideClamp { order: i64, at: String },
    #[error(transparent)]
    Geom(#[from] GeomError),
}

/// The kernel Φ with all data needed for exact integration.
#[derive(Debug, Clone)]
pub struct KernelSpec {
    pub p: u64,
    /// Symmetrised factored model C·∏|u − t_i|^(e_i) on the base band.
    pub model: AbsModel,
    /// Pole neighbourhoods: H = 1 on these balls (after reduction).
    pub clamp: Vec<Ball>,
    /// The exact multiplier of the first generator, |μ₁| < 1.
    pub mu1: BigRational,
    mu1_valuation: i64,
    /// Cached base-band sphere integrals J_r = ∫_{|u| = p^(−r)} Φ(u) du.
    band_integrals: Vec<BigRational>,
}

impl KernelSpec {
    /// Build from a divisor: the factors are symmetrised (each (t, e) is
    /// joined by (−t, e), with orders netted at coincident points), the model
    /// is checked degree-zero, and clamp balls are placed around every
    /// surviving pole at `clamp_level`.
    pub fn from_divisor(
        p: u64,
        coeff: BigRational,
        factors: &[(BigRational, i64)],
        mu1: BigRational,
        clamp_level: i64,
    ) -> Result<Self, KernelError> {
        let mut sym: Vec<(BigRational, i64)> = Vec::new();
        for (t, e) in factors {
            sym.push((t.clone(), *e));
            sym.push((-t.clone(), *e));
        }
        let model = AbsModel::new(p, coeff, sym);
        let clamp = model
            .factors
            .iter()
            .filter(|(_, e)| *e < 0)
            .map(|(t, _)| Ball::new(p, t.clone(), clamp_level))
            .collect();
        Self::new(p, model, clamp, mu1)
    }

    pub fn new(
        p: u64,
        model: AbsModel,
        clamp: Vec<Ball>,
        mu1: BigRational,
    ) -> Result<Self, KernelError> {
        let total = model.total_order();
        if total != 0 {
            return Err(KernelError::NotDegreeZero(total));
        }
        // negation symmetry
        for (t, e) in &model.factors {
            let neg = -t.clone();
            let matched = model.factors.iter().any(|(u, eu)| *u == neg && eu == e);
            if !matched {
                return Err(KernelError::NotSymmetric(crate::rational::format_rational(
                    t,
                )));
            }
        }
        let mu_val = valuation(p, &mu1).ok_or(KernelError::BadMultiplier)?;
        if mu_val <= 0 {
            return Err(KernelError::BadMultiplier);
        }
        // clamps isolate poles and avoid zeros
        for c in &clamp {
            let has_pole = model
                .factors
                .iter()
                .any(|(t, e)| *e < 0 && c.contains_point(t));
            if !has_pole {
                return Err(KernelError::BadClamp(crate::rational::format_rational(
                    &c.center,
                )));
            }
            for (t, e) in &model.factors {
                if *e > 0 && c.contains_point(t) {
                    return Err(KernelError::ZeroInsideClamp {
                        order: *e,
                        at: crate::rational::format_rational(t),
                    });
                }
            }
        }
        let mut spec = KernelSpec {
            p,
            model,
            clamp,
            mu1,
            mu1_valuation: mu_val,
            band_integrals: Vec::new(),
        };
        let mut band = Vec::new();
        for r in 0..mu_val {
            band.push(spec.band_sphere_integral(r)?);
        }
        spec.band_integrals = band;
        Ok(spec)
    }

    pub fn mu1_valuation(&self) -> i64 {
        self.mu1_valuation
    }

    /// Zeros of the kernel model (points with positive order).
    pub fn zero_set(&self) -> Vec<(BigRational, i64)> {
        self.model
            .factors
            .iter()
            .filter(|(_, e)| *e > 0)
            .cloned()
            .collect()
    }

    /// Reduce a valuation into the base band [0, v(μ₁)): returns (n, r) with
    /// v = n·v(μ₁) + r.
    fn reduce_valuation(&self, v: i64) -> (i64, i64) {
        let m = self.mu1_valuation;
        let r = v.rem_euclid(m);
        ((v - r) / m, r)
    }

    /// Pointwise kernel value H(w) for w = x − y ≠ 0, exact.
    pub fn eval(&self, w: &BigRational) -> Result<BigRational, KernelError> {
        if w.is_zero() {
            return Err(KernelError::MeasureZeroInput);
        }
        let v = valuation(self.p, w).unwrap();
        let (n, _) = self.reduce_valuation(v);
        let u = w / rat_pow(&self.mu1, n);
        if self.clamp.iter().any(|c| c.contains_point(&u)) {
            return Ok(BigRational::one());
        }
        Ok(self.model.eval(&u)?)
    }

    pub fn eval_points(&self, x: &BigRational, y: &BigRational) -> Result<BigRational, KernelError> {
        self.eval(&(x - y))
    }

    /// ∫ over a ball of the model with the clamp regions counted as 1.
    fn clamped_integral(&self, ball: &Ball) -> Result<BigRational, KernelError> {
        // whole ball inside a clamp?
        for c in &self.clamp {
            if c.contains_ball(ball) {
                return Ok(ball.haar());
            }
        }
        let inner: Vec<Ball> = self
            .clamp
            .iter()
            .filter(|c| ball.contains_ball(c))
            .cloned()
            .collect();
        let mut acc = BigRational::zero();
        for c in &inner {
            acc += c.haar();
        }
        for piece in complement_decomposition(ball, &inner) {
            acc += self.model.integral_ball(&piece)?;
        }
        Ok(acc)
    }

    /// J_r = ∫_{S_r(0)} Φ(u) du over a base-band sphere.
    fn band_sphere_integral(&self, r: i64) -> Result<BigRational, KernelError> {
        let sphere_ball = Ball::new(self.p, BigRational::zero(), r);
        let inner = Ball::new(self.p, BigRational::zero(), r + 1);
        let mut acc = BigRational::zero();
        for piece in complement_decomposition(&sphere_ball, &[inner]) {
            acc += self.clamped_integral(&piece)?;
        }
        Ok(acc)
    }

    /// Ψ: ∫_{Ball(c,k)} H(w) dw for a ball of offsets not containing 0
    /// (v_p(c) < k), exact.
    pub fn offset_ball_mass(&self, ball: &Ball) -> Result<BigRational, KernelError> {
        let v = valuation(self.p, &ball.center).ok_or(KernelError::MeasureZeroInput)?;
        debug_assert!(v < ball.level, "offset ball must not contain 0");
        let (n, _) = self.reduce_valuation(v);
        let scale = rat_pow(&self.mu1, n);
        let u_ball = Ball::new(
            self.p,
            &ball.center / &scale,
            ball.level - n * self.mu1_valuation,
        );
        Ok(p_pow(self.p, -n * self.mu1_valuation) * self.clamped_integral(&u_ball)?)
    }

    /// Ξ: ∫_{Ball(0,k)} H(w) dw — the mass of all small differences, as an
    /// exact two-parameter geometric sum over the base-band sphere integrals.
    pub fn centered_ball_mass(&self, k: i64) -> BigRational {
        let m = self.mu1_valuation;
        let mut acc = BigRational::zero();
        let denom = BigRational::one() - p_pow(self.p, -m);
        for r in 0..m {
            // smallest j ≥ k with j ≡ r (mod m)
            let j0 = k + (r - k).rem_euclid(m);
            acc += &self.band_integrals[r as usize] * p_pow(self.p, -(j0 - r)) / &denom;
        }
        acc
    }

    /// ∫ of H over the sphere {|w − c| = p^(−k)} around an offset c with
    /// v_p(c) < k.
    pub fn offset_sphere_mass(&self, center: &BigRational, k: i64) -> Result<BigRational, KernelError> {
        let outer = self.offset_ball_mass(&Ball::new(self.p, center.clone(), k))?;
        let inner = self.offset_ball_mass(&Ball::new(self.p, center.clone(), k + 1))?;
        Ok(outer - inner)
    }

    /// ∬_{Bx×By} H(x−y) dx dy for two disjoint balls, exact:
    /// μ(smaller)·Ψ(Ball(cx − cy, level of the larger)).
    pub fn pair_mass(&self, bx: &Ball, by: &Ball) -> Result<BigRational, KernelError> {
        debug_assert!(bx.is_disjoint(by));
        let k_big = bx.level.min(by.level);
        let small_haar = p_pow(self.p, -bx.level.max(by.level));
        let delta = &bx.center - &by.center;
        Ok(small_haar * self.offset_ball_mass(&Ball::new(self.p, delta, k_big))?)
    }

    /// ∬_{B×B} H(x−y) dx dy = μ(B)·Ξ(level).
    pub fn self_mass(&self, b: &Ball) -> BigRational {
        b.haar() * self.centered_ball_mass(b.level)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    /// The g = 2 style kernel: zeros at ±2, poles at ±7, all order 2.
    fn sample_kernel() -> KernelSpec {
        KernelSpec::from_divisor(
            5,
            rat(1, 1),
            &[(rat(2, 1), 2), (rat(7, 1), -2)],
            rat(25, 1),
            2,
        )
        .unwrap()
    }

    #[test]
    fn symmetrisation_nets_orders() {
        // zeros {5,2}, poles {−5,7} of order 2: the ±5 factors cancel
        let k = KernelSpec::from_divisor(
            5,
            rat(1, 1),
            &[(rat(5, 1), 2), (rat(2, 1), 2), (rat(-5, 1), -2), (rat(7, 1), -2)],
            rat(25, 1),
            2,
        )
        .unwrap();
        let pts: Vec<BigRational> = k.model.factors.iter().map(|(t, _)| t.clone()).collect();
        assert!(pts.contains(&rat(2, 1)));
        assert!(pts.contains(&rat(-2, 1)));
        assert!(!pts.contains(&rat(5, 1)));
        assert!(!pts.contains(&rat(-5, 1)));
        assert_eq!(k.model.total_order(), 0);
    }

    #[test]
    fn kernel_symmetry_exact() {
        let k = sample_kernel();
        // 1000 pseudo-random rational pairs
        let mut s = 99u64;
        let mut next = move || {
            s ^= s << 13;
            s ^= s >> 7;
            s ^= s << 17;
            s
        };
        for _ in 0..1000 {
            let x = rat((next() % 2000) as i64 - 1000, 1 + (next() % 40) as i64);
            let y = rat((next() % 2000) as i64 - 1000, 1 + (next() % 40) as i64);
            if x == y {
                continue;
            }
            let hxy = k.eval_points(&x, &y).unwrap();
            let hyx = k.eval_points(&y, &x).unwrap();
            assert_eq!(hxy, hyx, "kernel must be exactly symmetric");
        }
    }

    #[test]
    fn clamp_region_is_one() {
        let k = sample_kernel();
        // w deep inside the pole neighbourhood around 7
        let w = rat(7, 1) + rat(125, 1);
        assert_eq!(k.eval(&w).unwrap(), rat(1, 1));
        // and the rescaled copy 25·w reduces into the same clamp
        let w2 = rat(25, 1) * &w;
        assert_eq!(k.eval(&w2).unwrap(), rat(1, 1));
    }

    #[test]
    fn rescaling_is_pure_valuation_shift() {
        let k = sample_kernel();
        let w = rat(3, 1);
        let h = k.eval(&w).unwrap();
        for n in 1..4 {
            let scaled = crate::rational::rat_pow(&rat(25, 1), n) * &w;
            assert_eq!(k.eval(&scaled).unwrap(), h);
        }
    }

    #[test]
    fn centered_mass_matches_shell_sum() {
        let k = sample_kernel();
        // Ξ(k) = Σ_{j≥k} ∫_{S_j} H: check against explicitly summed spheres
        // plus the closed form for the remainder
        let xi2 = k.centered_ball_mass(2);
        let mut acc = BigRational::zero();
        for j in 2..8i64 {
            // sphere at level j around 0: rescale to the band
            let (n, r) = ((j - j.rem_euclid(2)) / 2, j.rem_euclid(2));
            acc += crate::rational::p_pow(5, -(2 * n)) * &k.band_integrals[r as usize];
        }
        acc += k.centered_ball_mass(8);
        assert_eq!(xi2, acc);
    }

    #[test]
    fn pair_mass_matches_brute_average() {
        let k = sample_kernel();
        // two small disjoint balls away from structure: H constant, so the
        // pair mass is H·μ(Bx)·μ(By)
        let bx = Ball::new_int(5, 1, 2);
        let by = Ball::new_int(5, 4, 2);
        let m = k.pair_mass(&bx, &by).unwrap();
        let h = k.eval(&(rat(1, 1) - rat(4, 1))).unwrap();
        assert_eq!(m, h * bx.haar() * by.haar());
    }

    #[test]
    fn pair_mass_brute_force_on_structured_cells() {
        // cells where H is NOT constant: compare against a subdivision sum
        let k = sample_kernel();
        let bx = Ball::new_int(5, 2, 1); // contains the zero 2 region offsets
        let by = Ball::new_int(5, 0, 1);
        let exact = k.pair_mass(&bx, &by).unwrap();
        // brute: subdivide both to level 4 and assume H constant per cell
        // pair (valid: offsets separate from ±2, ±7 at that depth except the
        // exactly-resonant cells, which we refine once more)
        let mut acc = BigRational::zero();
        fn cells(b: &Ball, depth: i64) -> Vec<Ball> {
            if b.level >= depth {
                return vec![b.clone()];
            }
            b.children()
                .into_iter()
                .flat_map(|c| cells(&c, depth))
                .collect()
        }
        for cx in cells(&bx, 4) {
            for cy in cells(&by, 4) {
                acc += k.pair_mass(&cx, &cy).unwrap();
            }
        }
        assert_eq!(exact, acc, "pair mass must be additive under refinement");
    }

    #[test]
    fn measure_zero_input_rejected() {
        let k = sample_kernel();
        assert!(matches!(
            k.eval_points(&rat(3, 1), &rat(3, 1)),
            Err(KernelError::MeasureZeroInput)
        ));
    }
}
