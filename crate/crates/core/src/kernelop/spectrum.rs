//! Spectrum of the vertex operator, the Hilbert–Schmidt diagnostic, and the
//! orthogonal-decomposition identity suite.

use alloc::vec;
use alloc::vec::Vec;
use num_rational::BigRational;
use num_traits::Zero;

use super::assemble::{degree_at, Assembled};
use super::spec::{KernelError, KernelSpec};
use super::wavelet::WaveletSpec;
use crate::geometry::{Ball, Tree};
use crate::linalg::{jacobi_eigh, C64};
use crate::rational::{rat_to_f64, valuation};

#[derive(Debug, Clone)]
pub struct EndReport {
    pub end: usize,
    pub point: BigRational,
    /// deg(v_k) along the ray, increasing level.
    pub deg_along_ray: Vec<BigRational>,
    /// The empirical limit candidate (deepest available value).
    pub limit: BigRational,
}

#[derive(Debug, Clone)]
pub struct SpectrumReport {
    /// Eigenvalues of the symmetrised ν-weighted generator, ascending.
    pub eigenvalues: Vec<f64>,
    pub zero_mode_multiplicity: usize,
    pub max_eigenvalue: f64,
    pub ends: Vec<EndReport>,
    /// Clustered −deg end limits: the accumulation-point candidates.
    pub accumulation_candidates: Vec<f64>,
    /// −deg(v) per vertex: the wavelet eigenvalue attached to each fiber.
    pub wavelet_eigenvalues: Vec<f64>,
}

/// Dense symmetric eigensolve of the vertex generator plus the end-limit
/// bookkeeping of the accumulation candidates.
pub fn spectrum(asm: &Assembled<'_>, tolerance: f64) -> SpectrumReport {
    let mat = asm.op.symmetrized();
    let (eigenvalues, _) = jacobi_eigh(&mat, 1e-14, 200);
    let zero_mode_multiplicity = eigenvalues.iter().filter(|l| l.abs() <= tolerance).count();
    let max_eigenvalue = eigenvalues.last().copied().unwrap_or(0.0);
    let mut ends = Vec::new();
    let mut candidates: Vec<f64> = Vec::new();
    for (i, (a, _)) in asm.tree.ends.iter().enumerate() {
        let ray = asm.tree.ray(i);
        let deg_along_ray: Vec<BigRational> =
            ray.iter().map(|&v| asm.op.deg[v].clone()).collect();
        let limit = deg_along_ray.last().cloned().unwrap_or_else(BigRational::zero);
        candidates.push(-rat_to_f64(&limit));
        ends.push(EndReport {
            end: i,
            point: a.clone(),
            deg_along_ray,
            limit,
        });
    }
    // cluster candidates within 10·tolerance
    candidates.sort_by(|a, b| a.partial_cmp(b).unwrap_or(core::cmp::Ordering::Equal));
    let mut accumulation_candidates: Vec<f64> = Vec::new();
    for c in candidates {
        match accumulation_candidates.last() {
            Some(last) if (c - last).abs() <= 10.0 * tolerance => {}
            _ => accumulation_candidates.push(c),
        }
    }
    let wavelet_eigenvalues = asm.op.deg.iter().map(|d| -rat_to_f64(d)).collect();
    SpectrumReport {
        eigenvalues,
        zero_mode_multiplicity,
        max_eigenvalue,
        ends,
        accumulation_candidates,
        wavelet_eigenvalues,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HsVerdict {
    Converging,
    Diverging,
}

#[derive(Debug, Clone)]
pub struct HsDiagnostic {
    /// Partial sums Σ_v ν(v)^(−1)⟨A_f η_v, A_f η_v⟩ per depth.
    pub partial_sums: Vec<BigRational>,
    /// Successive increments as floats.
    pub increments: Vec<f64>,
    pub verdict: HsVerdict,
    /// The exact divisor condition V(ω) ⊆ V(f).
    pub structural_inclusion: bool,
}

/// One Hilbert–Schmidt partial sum at a fixed depth: A_f η_v is evaluated
/// pointwise at fiber-ball representatives.
pub fn hs_partial_sum(asm: &Assembled<'_>) -> Result<BigRational, KernelError> {
    let tree = asm.tree;
    let kernel = asm.kernel;
    let p = tree.p;
    // all fiber balls with their ω-masses
    let mut cells: Vec<(&Ball, BigRational)> = Vec::new();
    for v in &tree.vertices {
        for b in &v.fiber {
            cells.push((b, tree.omega.model.integral_ball(b)?));
        }
    }
    let mut total = BigRational::zero();
    for v in &tree.vertices {
        // a(x) = ∫_{U(v)} H(x−y) dω(y) at each cell representative
        let mut norm_sq = BigRational::zero();
        for (bx, mass) in &cells {
            let x = &bx.center;
            let mut a_val = BigRational::zero();
            for by in &tree.vertices[v.id].fiber {
                let cy = tree.omega.model.eval(&by.center)?;
                let delta = x - &by.center;
                let m = match valuation(p, &delta) {
                    None => kernel.centered_ball_mass(by.level),
                    Some(vd) if vd >= by.level => kernel.centered_ball_mass(by.level),
                    _ => kernel.offset_ball_mass(&Ball::new(p, delta, by.level))?,
                };
                a_val += cy * m;
            }
            norm_sq += &a_val * &a_val * mass;
        }
        total += norm_sq / &v.nu;
    }
    Ok(total)
}

/// Classify the partial-sum sequence: converging when successive increments
/// decay geometrically, diverging when they stay bounded below.
pub fn hs_diagnostic(
    partial_sums: Vec<BigRational>,
    omega_zeros: &[(BigRational, i64)],
    kernel: &KernelSpec,
) -> HsDiagnostic {
    assert!(partial_sums.len() >= 3, "need at least 3 depths");
    let sums_f: Vec<f64> = partial_sums.iter().map(rat_to_f64).collect();
    let increments: Vec<f64> = sums_f.windows(2).map(|w| w[1] - w[0]).collect();
    let mut geometric = true;
    for w in increments.windows(2) {
        if w[0] <= 0.0 {
            continue;
        }
        let ratio = w[1] / w[0];
        if ratio > 0.9 {
            geometric = false;
        }
    }
    let verdict = if geometric {
        HsVerdict::Converging
    } else {
        HsVerdict::Diverging
    };
    let kernel_zeros = kernel.zero_set();
    let structural_inclusion = omega_zeros.iter().all(|(a, _)| {
        kernel_zeros.iter().any(|(t, _)| t == a)
    });
    HsDiagnostic {
        partial_sums,
        increments,
        verdict,
        structural_inclusion,
    }
}

#[derive(Debug, Clone)]
pub struct OrthogonalityReport {
    /// (1): ⟨H_f η_w, η_v⟩ = m(vw) − m(v)δ_vw, exact (checked with the weight
    /// matrix recomputed at one extra refinement level).
    pub matrix_identity_exact: bool,
    /// (2): max relative residual of ⟨H_f η_v, ψ⟩ = 0 over the sample set.
    pub eta_psi_residual: f64,
    /// (3): max relative residual of ⟨H_f ψ, η_w⟩ = 0.
    pub psi_eta_residual: f64,
    /// (4): max relative residual of ⟨H_f ψ_B, ψ_C⟩ = 0 for B ≠ C.
    pub psi_psi_residual: f64,
    pub combinations_checked: usize,
}

/// Verify the four orthogonal-decomposition identities by quadrature.
pub fn orthogonality_suite(
    asm: &Assembled<'_>,
    wavelets: &[WaveletSpec],
) -> Result<OrthogonalityReport, KernelError> {
    let tree = asm.tree;
    let kernel = asm.kernel;
    let p = tree.p;
    let n = asm.op.n;

    // (1): recompute m(vw) with every fiber ball split one level deeper; the
    // closed forms must be additive under refinement, and the diagonal term
    // must equal deg(v)·ν(v).
    let mut matrix_identity_exact = true;
    for v in 0..n {
        for w in 0..n {
            let mut refined = BigRational::zero();
            for bx in &tree.vertices[v].fiber {
                let cx = tree.omega.model.eval(&bx.center)?;
                for bxc in bx.children() {
                    for by in &tree.vertices[w].fiber {
                        let cy = tree.omega.model.eval(&by.center)?;
                        for byc in by.children() {
                            let mass = if bxc.same_ball(&byc) {
                                kernel.self_mass(&bxc)
                            } else {
                                kernel.pair_mass(&bxc, &byc)?
                            };
                            refined += &cx * &cy * mass;
                        }
                    }
                }
            }
            if refined != asm.op.m[v][w] {
                matrix_identity_exact = false;
            }
        }
        // diagonal law: Σ_w m(vw) + tail·ν = deg·ν
        let lhs = asm.op.row_sum(v) + &asm.op.deg_tail[v] * &asm.op.nu[v];
        let rhs = &asm.op.deg[v] * &asm.op.nu[v];
        if lhs != rhs {
            matrix_identity_exact = false;
        }
    }

    // scale for relative residuals: a typical deg·ν
    let scale: f64 = asm
        .op
        .deg
        .iter()
        .zip(asm.op.nu.iter())
        .map(|(d, nu)| rat_to_f64(&(d * nu)).abs())
        .fold(0.0, f64::max)
        .max(1e-300);

    let mut eta_psi_residual: f64 = 0.0;
    let mut psi_eta_residual: f64 = 0.0;
    let mut psi_psi_residual: f64 = 0.0;
    let mut combinations_checked = 0usize;

    for wspec in wavelets {
        let b = &wspec.ball;
        let children = b.children();
        let c_b = tree.omega.model.eval(&b.center)?;
        // host vertex of B
        let host = tree
            .vertices
            .iter()
            .find(|v| v.fiber.iter().any(|fb| fb.contains_ball(b)))
            .map(|v| v.id);
        let Some(host) = host else { continue };

        // per-child values of a_v(x) = ∫_{U(v)} H(x−y)dω(y) and deg(x)
        let mut a_host: Vec<BigRational> = Vec::new();
        let mut degs: Vec<BigRational> = Vec::new();
        for child in &children {
            let x = &child.center;
            let mut acc = BigRational::zero();
            for by in &tree.vertices[host].fiber {
                let cy = tree.omega.model.eval(&by.center)?;
                let delta = x - &by.center;
                let mass = match valuation(p, &delta) {
                    None => kernel.centered_ball_mass(by.level),
                    Some(vd) if vd >= by.level => kernel.centered_ball_mass(by.level),
                    _ => kernel.offset_ball_mass(&Ball::new(p, delta, by.level))?,
                };
                acc += cy * mass;
            }
            a_host.push(acc);
            degs.push(degree_at(tree, kernel, x)?);
        }
        // (2): ⟨H_f η_host, ψ⟩ = ∫_B (a(x) − deg(x))·conj(ψ(x)) dω(x)
        let mut ip2 = C64::zero();
        for (d, child) in children.iter().enumerate() {
            let mass = &c_b * child.haar();
            let val = rat_to_f64(&(&a_host[d] - &degs[d])) * rat_to_f64(&mass);
            ip2 = ip2.add(wspec.child_value(d as u64).conj().scale(val));
        }
        eta_psi_residual = eta_psi_residual.max(ip2.norm() / scale);
        combinations_checked += 1;

        // (3): ⟨H_f ψ, η_w⟩ for every vertex w:
        //   ∫_{U(w)} [∫_B H(x−y)ψ(y)dω(y)] dω(x) − δ_{B⊂U(w)} ∫_B ψ·deg dω
        for w_v in 0..n {
            let mut ip3 = C64::zero();
            for bx in &tree.vertices[w_v].fiber {
                let cx = tree.omega.model.eval(&bx.center)?;
                for (d, child) in children.iter().enumerate() {
                    // ∬_{child×bx} H(x−y) dy dω(x), exact
                    let mass = if child.same_ball(bx) {
                        kernel.self_mass(child)
                    } else if bx.contains_ball(child) {
                        // split bx to the child level for disjoint cells
                        let mut acc = BigRational::zero();
                        for cell in split_to_level(bx, child.level) {
                            if cell.same_ball(child) {
                                acc += kernel.self_mass(child);
                            } else {
                                acc += kernel.pair_mass(&cell, child)?;
                            }
                        }
                        acc
                    } else {
                        kernel.pair_mass(bx, child)?
                    };
                    let weighted = rat_to_f64(&(&cx * &c_b * mass));
                    ip3 = ip3.add(wspec.child_value(d as u64).scale(weighted));
                }
            }
            if w_v == host {
                for (d, child) in children.iter().enumerate() {
                    let mass = rat_to_f64(&(&c_b * child.haar() * &degs[d]));
                    ip3 = ip3.sub(wspec.child_value(d as u64).scale(mass));
                }
            }
            psi_eta_residual = psi_eta_residual.max(ip3.norm() / scale);
            combinations_checked += 1;
        }
    }

    // (4): distinct wavelet pairs on disjoint balls
    for (i, wa) in wavelets.iter().enumerate() {
        for wb in wavelets.iter().skip(i + 1) {
            if !wa.ball.is_disjoint(&wb.ball) {
                continue;
            }
            let ca = tree.omega.model.eval(&wa.ball.center)?;
            let cb = tree.omega.model.eval(&wb.ball.center)?;
            let mut ip4 = C64::zero();
            for (da, childa) in wa.ball.children().iter().enumerate() {
                for (db, childb) in wb.ball.children().iter().enumerate() {
                    let mass = kernel.pair_mass(childb, childa)?;
                    let weighted = rat_to_f64(&(&ca * &cb * mass));
                    let term = wa
                        .child_value(da as u64)
                        .mul(wb.child_value(db as u64).conj())
                        .scale(weighted);
                    ip4 = ip4.add(term);
                }
            }
            psi_psi_residual = psi_psi_residual.max(ip4.norm() / scale);
            combinations_checked += 1;
        }
    }

    Ok(OrthogonalityReport {
        matrix_identity_exact,
        eta_psi_residual,
        psi_eta_residual,
        psi_psi_residual,
        combinations_checked,
    })
}

fn split_to_level(b: &Ball, level: i64) -> Vec<Ball> {
    if b.level >= level {
        return vec![b.clone()];
    }
    b.children()
        .into_iter()
        .flat_map(|c| split_to_level(&c, level))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{AbsModel, OmegaSpec};
    use crate::schottky::FundamentalDomain;
    use num_bigint::BigInt;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    fn toy_setup(depth: i64) -> (Tree, KernelSpec) {
        let fd = FundamentalDomain {
            outer: Ball::new_int(5, 0, 0),
            holes: vec![Ball::new_int(5, 0, 3)],
        };
        let omega = OmegaSpec::new(
            AbsModel::new(5, rat(1, 1), vec![(rat(2, 1), 2)]),
            vec![(rat(2, 1), 2)],
        );
        let tree = Tree::build(&fd, &omega, depth).unwrap();
        let kernel = KernelSpec::from_divisor(
            5,
            rat(1, 1),
            &[(rat(2, 1), 2), (rat(7, 1), -2)],
            rat(25, 1),
            2,
        )
        .unwrap();
        (tree, kernel)
    }

    #[test]
    fn spectrum_nonpositive_with_zero_mode() {
        let (tree, kernel) = toy_setup(8);
        let asm = Assembled::new(&tree, &kernel).unwrap();
        let rep = spectrum(&asm, 1e-9);
        assert!(rep.max_eigenvalue <= 1e-9, "max eig {}", rep.max_eigenvalue);
        assert_eq!(rep.zero_mode_multiplicity, 1);
        assert_eq!(rep.ends.len(), 1);
        assert_eq!(rep.accumulation_candidates.len(), 1);
    }

    #[test]
    fn self_adjoint_vertex_pairing() {
        // ⟨φ, H_f ψ⟩_ω = ⟨H_f φ, ψ⟩_ω exactly for vertex functions: both
        // reduce to φᵀ(Q − diag(rowsum))ψ with the exact rational matrix
        let (tree, kernel) = toy_setup(6);
        let asm = Assembled::new(&tree, &kernel).unwrap();
        let n = asm.op.n;
        let mut s = 5u64;
        let mut next = move || {
            s ^= s << 13;
            s ^= s >> 7;
            s ^= s << 17;
            s
        };
        for _ in 0..50 {
            let phi: Vec<BigRational> =
                (0..n).map(|_| rat((next() % 19) as i64 - 9, 1 + (next() % 7) as i64)).collect();
            let psi: Vec<BigRational> =
                (0..n).map(|_| rat((next() % 19) as i64 - 9, 1 + (next() % 7) as i64)).collect();
            // ⟨φ, H_f ψ⟩_ω = Σ_v ν_v φ_v (Lψ)_v
            let mut lhs = BigRational::zero();
            let mut rhs = BigRational::zero();
            for v in 0..n {
                let mut lpsi = BigRational::zero();
                let mut lphi = BigRational::zero();
                for w in 0..n {
                    lpsi += asm.op.generator_entry(v, w) * &psi[w];
                    lphi += asm.op.generator_entry(v, w) * &phi[w];
                }
                lhs += &asm.op.nu[v] * &phi[v] * lpsi;
                rhs += &asm.op.nu[v] * lphi * &psi[v];
            }
            assert_eq!(lhs, rhs, "vertex self-adjointness must be exact");
        }
    }

    #[test]
    fn hs_partial_sums_converge_on_matching_fixture() {
        let fd = FundamentalDomain {
            outer: Ball::new_int(5, 0, 0),
            holes: vec![Ball::new_int(5, 0, 3)],
        };
        let omega = OmegaSpec::new(
            AbsModel::new(5, rat(1, 1), vec![(rat(2, 1), 2)]),
            vec![(rat(2, 1), 2)],
        );
        let kernel = KernelSpec::from_divisor(
            5,
            rat(1, 1),
            &[(rat(2, 1), 2), (rat(7, 1), -2)],
            rat(25, 1),
            2,
        )
        .unwrap();
        let mut sums = Vec::new();
        for depth in [5, 7, 9, 11] {
            let tree = Tree::build(&fd, &omega, depth).unwrap();
            let asm = Assembled::new(&tree, &kernel).unwrap();
            sums.push(hs_partial_sum(&asm).unwrap());
        }
        let diag = hs_diagnostic(sums, &omega.curve_zeros, &kernel);
        assert!(diag.structural_inclusion);
        assert_eq!(diag.verdict, HsVerdict::Converging);
    }

    #[test]
    fn orthogonality_identities() {
        let (tree, kernel) = toy_setup(7);
        let asm = Assembled::new(&tree, &kernel).unwrap();
        let wavelets = vec![
            WaveletSpec::new(Ball::new_int(5, 4, 2), 1).unwrap(),
            WaveletSpec::new(Ball::new_int(5, 4, 2), 2).unwrap(),
            WaveletSpec::new(Ball::new_int(5, 1, 1), 1).unwrap(),
        ];
        let rep = orthogonality_suite(&asm, &wavelets).unwrap();
        assert!(rep.matrix_identity_exact);
        assert!(rep.eta_psi_residual <= 1e-8, "got {}", rep.eta_psi_residual);
        assert!(rep.psi_eta_residual <= 1e-8, "got {}", rep.psi_eta_residual);
        assert!(rep.psi_psi_residual <= 1e-8, "got {}", rep.psi_psi_residual);
        assert!(rep.combinations_checked >= 10);
    }
}
