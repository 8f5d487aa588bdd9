//! Small dense linear algebra over f64: a cyclic Jacobi eigensolver for
//! symmetric matrices and a pivoted Gaussian solver. Deterministic sweep
//! order, no allocation tricks; matrices here have at most a few hundred rows.

use alloc::vec;
use alloc::vec::Vec;

/// Row-major square matrix.
#[derive(Debug, Clone)]
pub struct Mat {
    pub n: usize,
    pub a: Vec<f64>,
}

impl Mat {
    pub fn zeros(n: usize) -> Self {
        Mat {
            n,
            a: vec![0.0; n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Mat::zeros(n);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.a[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.a[i * self.n + j] = v;
    }

    pub fn matmul(&self, other: &Mat) -> Mat {
        let n = self.n;
        let mut out = Mat::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let aik = self.get(i, k);
                if aik == 0.0 {
                    continue;
                }
                for j in 0..n {
                    out.a[i * n + j] += aik * other.get(k, j);
                }
            }
        }
        out
    }

    pub fn transpose(&self) -> Mat {
        let n = self.n;
        let mut out = Mat::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out.set(j, i, self.get(i, j));
            }
        }
        out
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut out = vec![0.0; n];
        for i in 0..n {
            let mut acc = 0.0;
            for j in 0..n {
                acc += self.get(i, j) * x[j];
            }
            out[i] = acc;
        }
        out
    }

    pub fn max_off_diagonal(&self) -> f64 {
        let mut m = 0.0f64;
        for i in 0..self.n {
            for j in 0..self.n {
                if i != j {
                    let v = libm::fabs(self.get(i, j));
                    if v > m {
                        m = v;
                    }
                }
            }
        }
        m
    }
}

/// Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations.
/// Returns (eigenvalues ascending, eigenvectors as columns of V) with
/// A = V diag(λ) Vᵀ.
pub fn jacobi_eigh(sym: &Mat, tol: f64, max_sweeps: usize) -> (Vec<f64>, Mat) {
    let n = sym.n;
    let mut a = sym.clone();
    let mut v = Mat::identity(n);
    for _ in 0..max_sweeps {
        if a.max_off_diagonal() <= tol {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a.get(p, q);
                if libm::fabs(apq) <= tol * 1e-3 {
                    continue;
                }
                let app = a.get(p, p);
                let aqq = a.get(q, q);
                let theta = (aqq - app) / (2.0 * apq);
                let t = if theta >= 0.0 {
                    1.0 / (theta + libm::sqrt(1.0 + theta * theta))
                } else {
                    -1.0 / (-theta + libm::sqrt(1.0 + theta * theta))
                };
                let c = 1.0 / libm::sqrt(1.0 + t * t);
                let s = t * c;
                // rotate rows/cols p, q
                for k in 0..n {
                    let akp = a.get(k, p);
                    let akq = a.get(k, q);
                    a.set(k, p, c * akp - s * akq);
                    a.set(k, q, s * akp + c * akq);
                }
                for k in 0..n {
                    let apk = a.get(p, k);
                    let aqk = a.get(q, k);
                    a.set(p, k, c * apk - s * aqk);
                    a.set(q, k, s * apk + c * aqk);
                }
                for k in 0..n {
                    let vkp = v.get(k, p);
                    let vkq = v.get(k, q);
                    v.set(k, p, c * vkp - s * vkq);
                    v.set(k, q, s * vkp + c * vkq);
                }
            }
        }
    }
    // sort ascending
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&i, &j| {
        a.get(i, i)
            .partial_cmp(&a.get(j, j))
            .unwrap_or(core::cmp::Ordering::Equal)
    });
    let mut vals = Vec::with_capacity(n);
    let mut vecs = Mat::zeros(n);
    for (new_col, &old_col) in idx.iter().enumerate() {
        vals.push(a.get(old_col, old_col));
        for k in 0..n {
            vecs.set(k, new_col, v.get(k, old_col));
        }
    }
    (vals, vecs)
}

/// Solve A x = b by Gaussian elimination with partial pivoting.
pub fn solve(a: &Mat, b: &[f64]) -> Option<Vec<f64>> {
    let n = a.n;
    let mut m = a.clone();
    let mut rhs = b.to_vec();
    for col in 0..n {
        let mut piv = col;
        let mut best = libm::fabs(m.get(col, col));
        for r in (col + 1)..n {
            let v = libm::fabs(m.get(r, col));
            if v > best {
                best = v;
                piv = r;
            }
        }
        if best == 0.0 {
            return None;
        }
        if piv != col {
            for j in 0..n {
                let t = m.get(col, j);
                m.set(col, j, m.get(piv, j));
                m.set(piv, j, t);
            }
            rhs.swap(col, piv);
        }
        let d = m.get(col, col);
        for r in (col + 1)..n {
            let f = m.get(r, col) / d;
            if f == 0.0 {
                continue;
            }
            for j in col..n {
                let v = m.get(r, j) - f * m.get(col, j);
                m.set(r, j, v);
            }
            rhs[r] -= f * rhs[col];
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut acc = rhs[i];
        for j in (i + 1)..n {
            acc -= m.get(i, j) * x[j];
        }
        x[i] = acc / m.get(i, i);
    }
    Some(x)
}

/// Tiny complex number for wavelet character sums.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct C64 {
    pub re: f64,
    pub im: f64,
}

impl C64 {
    pub fn new(re: f64, im: f64) -> Self {
        C64 { re, im }
    }

    pub fn zero() -> Self {
        C64 { re: 0.0, im: 0.0 }
    }

    /// exp(2πi k/n).
    pub fn root_of_unity(k: u64, n: u64) -> Self {
        let ang = 2.0 * core::f64::consts::PI * (k % n) as f64 / n as f64;
        C64::new(libm::cos(ang), libm::sin(ang))
    }

    pub fn add(self, o: C64) -> C64 {
        C64::new(self.re + o.re, self.im + o.im)
    }

    pub fn sub(self, o: C64) -> C64 {
        C64::new(self.re - o.re, self.im - o.im)
    }

    pub fn mul(self, o: C64) -> C64 {
        C64::new(
            self.re * o.re - self.im * o.im,
            self.re * o.im + self.im * o.re,
        )
    }

    pub fn conj(self) -> C64 {
        C64::new(self.re, -self.im)
    }

    pub fn scale(self, s: f64) -> C64 {
        C64::new(self.re * s, self.im * s)
    }

    pub fn norm(self) -> f64 {
        libm::sqrt(self.re * self.re + self.im * self.im)
    }

    pub fn div(self, o: C64) -> C64 {
        let d = o.re * o.re + o.im * o.im;
        C64::new(
            (self.re * o.re + self.im * o.im) / d,
            (self.im * o.re - self.re * o.im) / d,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jacobi_small() {
        // [[2,1],[1,2]] has eigenvalues 1, 3
        let mut m = Mat::zeros(2);
        m.set(0, 0, 2.0);
        m.set(0, 1, 1.0);
        m.set(1, 0, 1.0);
        m.set(1, 1, 2.0);
        let (vals, vecs) = jacobi_eigh(&m, 1e-14, 50);
        assert!((vals[0] - 1.0).abs() < 1e-12);
        assert!((vals[1] - 3.0).abs() < 1e-12);
        // check A v = λ v for the first column
        let v0: Vec<f64> = (0..2).map(|k| vecs.get(k, 0)).collect();
        let av = m.apply(&v0);
        for k in 0..2 {
            assert!((av[k] - vals[0] * v0[k]).abs() < 1e-12);
        }
    }

    #[test]
    fn jacobi_reconstruction() {
        // pseudo-random symmetric 6×6
        let n = 6;
        let mut m = Mat::zeros(n);
        let mut s = 12345u64;
        let mut next = || {
            s ^= s << 13;
            s ^= s >> 7;
            s ^= s << 17;
            (s % 1000) as f64 / 500.0 - 1.0
        };
        for i in 0..n {
            for j in i..n {
                let v = next();
                m.set(i, j, v);
                m.set(j, i, v);
            }
        }
        let (vals, vecs) = jacobi_eigh(&m, 1e-14, 100);
        // A = V diag Vᵀ
        let mut d = Mat::zeros(n);
        for i in 0..n {
            d.set(i, i, vals[i]);
        }
        let rec = vecs.matmul(&d).matmul(&vecs.transpose());
        for i in 0..n {
            for j in 0..n {
                assert!((rec.get(i, j) - m.get(i, j)).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn gaussian_solve() {
        let mut a = Mat::zeros(3);
        let rows = [[2.0, 1.0, 0.0], [1.0, 3.0, 1.0], [0.0, 1.0, 4.0]];
        for i in 0..3 {
            for j in 0..3 {
                a.set(i, j, rows[i][j]);
            }
        }
        let b = [1.0, 2.0, 3.0];
        let x = solve(&a, &b).unwrap();
        let ax = a.apply(&x);
        for i in 0..3 {
            assert!((ax[i] - b[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn roots_of_unity_sum_to_zero() {
        let mut acc = C64::zero();
        for k in 0..5 {
            acc = acc.add(C64::root_of_unity(k, 5));
        }
        assert!(acc.norm() < 1e-14);
    }
}
