//! The truncated reduction tree T_S of a fundamental domain minus a finite
//! point set S, with exact fiber measures.
//!
//! Vertices are the integer-level balls along every path of the convex hull
//! spanned by the outer ball, the hole balls, and the points of S; rays
//! toward S are truncated at a configurable level. The fiber U(v) of a vertex
//! is its ball minus the deeper structure, stored as a disjoint list of balls
//! on which the ω-density is constant.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use num_rational::BigRational;
use num_traits::Zero;

use super::ball::{complement_decomposition, Ball};
use super::measure::{GeomError, OmegaSpec};
use crate::schottky::FundamentalDomain;

#[derive(Debug, Clone)]
pub struct TreeVertex {
    pub id: usize,
    pub ball: Ball,
    pub parent: Option<usize>,
    pub children: Vec<usize>,
    /// Disjoint balls covering the fiber U(v); ω-density is constant on each.
    pub fiber: Vec<Ball>,
    /// Exact ν(v) = ∫_{U(v)} |ω|.
    pub nu: BigRational,
    /// Set when the vertex ball contains the end point S[i].
    pub on_ray_to: Option<usize>,
    /// True when the fiber touches a hole boundary sphere.
    pub hole_boundary: bool,
}

impl TreeVertex {
    pub fn level(&self) -> i64 {
        self.ball.level
    }
}

#[derive(Debug, Clone)]
pub struct Tree {
    pub p: u64,
    pub vertices: Vec<TreeVertex>,
    pub root: usize,
    /// The removed points S = V(ω) with their orders.
    pub ends: Vec<(BigRational, i64)>,
    /// Rays toward S are truncated at this ball level.
    pub max_level: i64,
    pub omega: OmegaSpec,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TreeError {
    #[error("point {0} is not inside the fundamental domain")]
    PointOutsideDomain(String),
    #[error("ω has a pole of order {order} at {at} inside the domain")]
    PoleInDomain { order: i64, at: String },
    #[error("ω has a zero at {0} inside the domain that is not a listed end")]
    UnlistedZero(String),
    #[error("truncation level {0} is too shallow for the structure")]
    TooShallow(i64),
    #[error(transparent)]
    Geom(#[from] GeomError),
}

impl Tree {
    /// Build T_S(max_level) for the density ω on the domain.
    pub fn build(
        fd: &FundamentalDomain,
        omega: &OmegaSpec,
        max_level: i64,
    ) -> Result<Tree, TreeError> {
        let p = fd.outer.p;
        let root_level = fd.outer.level;

        // validate ω against the domain
        for (t, e) in &omega.model.factors {
            let in_f = fd.contains(t);
            if in_f {
                if *e < 0 {
                    return Err(TreeError::PoleInDomain {
                        order: -e,
                        at: crate::rational::format_rational(t),
                    });
                }
                if *e > 0 && !omega.curve_zeros.iter().any(|(a, _)| a == t) {
                    return Err(TreeError::UnlistedZero(crate::rational::format_rational(t)));
                }
            }
        }
        for (a, _) in &omega.curve_zeros {
            if !fd.contains(a) {
                return Err(TreeError::PointOutsideDomain(
                    crate::rational::format_rational(a),
                ));
            }
        }

        // directions: holes stop one level above their ball, rays at max_level
        struct Dir {
            target: BigRational,
            stop: i64,
            end: Option<usize>,
            hole_ball: Option<Ball>,
        }
        let mut dirs: Vec<Dir> = Vec::new();
        for hole in &fd.holes {
            if hole.level - 1 < root_level {
                return Err(TreeError::TooShallow(hole.level));
            }
            dirs.push(Dir {
                target: hole.center.clone(),
                stop: hole.level - 1,
                end: None,
                hole_ball: Some(hole.clone()),
            });
        }
        for (i, (a, _)) in omega.curve_zeros.iter().enumerate() {
            if max_level <= root_level + 1 {
                return Err(TreeError::TooShallow(max_level));
            }
            dirs.push(Dir {
                target: a.clone(),
                stop: max_level,
                end: Some(i),
                hole_ball: None,
            });
        }

        // collect path balls with canonical dedupe
        let mut key_to_id: BTreeMap<(i64, String), usize> = BTreeMap::new();
        let mut balls: Vec<Ball> = Vec::new();
        let mut cutouts: Vec<Vec<Ball>> = Vec::new();
        let mut ray_marks: Vec<Option<usize>> = Vec::new();
        let mut hole_marks: Vec<bool> = Vec::new();
        let touch = |b: Ball,
                         balls: &mut Vec<Ball>,
                         cutouts: &mut Vec<Vec<Ball>>,
                         ray_marks: &mut Vec<Option<usize>>,
                         hole_marks: &mut Vec<bool>,
                         key_to_id: &mut BTreeMap<(i64, String), usize>|
         -> usize {
            let key = b.canonical_key();
            *key_to_id.entry(key).or_insert_with(|| {
                balls.push(b);
                cutouts.push(Vec::new());
                ray_marks.push(None);
                hole_marks.push(false);
                balls.len() - 1
            })
        };

        for d in &dirs {
            for level in root_level..=d.stop {
                let b = Ball::new(p, d.target.clone(), level);
                let id = touch(
                    b,
                    &mut balls,
                    &mut cutouts,
                    &mut ray_marks,
                    &mut hole_marks,
                    &mut key_to_id,
                );
                if let Some(e) = d.end {
                    if ray_marks[id].is_none() {
                        ray_marks[id] = Some(e);
                    }
                }
                if level == d.stop {
                    match (&d.hole_ball, d.end) {
                        (Some(hole), _) => {
                            cutouts[id].push(hole.clone());
                            hole_marks[id] = true;
                        }
                        (None, Some(_)) => {
                            cutouts[id].push(Ball::new(p, d.target.clone(), max_level + 1));
                        }
                        _ => {}
                    }
                }
            }
        }

        // wire parents/children and add child balls to cutouts
        let n = balls.len();
        let mut parent: Vec<Option<usize>> = vec![None; n];
        let mut children: Vec<Vec<usize>> = vec![Vec::new(); n];
        let ids: Vec<usize> = (0..n).collect();
        for &id in &ids {
            if balls[id].level == root_level {
                continue;
            }
            let pb = Ball::new(p, balls[id].center.clone(), balls[id].level - 1);
            let pid = *key_to_id
                .get(&pb.canonical_key())
                .expect("parent ball must be a vertex");
            parent[id] = Some(pid);
            children[pid].push(id);
            cutouts[pid].push(balls[id].clone());
        }
        for ch in children.iter_mut() {
            ch.sort_by_key(|&c| balls[c].canonical_key());
        }

        // root
        let root = *key_to_id
            .get(&Ball::new(p, fd.outer.center.clone(), root_level).canonical_key())
            .ok_or(TreeError::TooShallow(root_level))?;

        // fibers and measures
        let mut vertices = Vec::with_capacity(n);
        for id in 0..n {
            let fiber = complement_decomposition(&balls[id], &cutouts[id]);
            // refine until ω-density is constant per ball
            let fiber = refine_for_constancy(&omega.model, fiber)?;
            let mut nu = BigRational::zero();
            for b in &fiber {
                nu += omega.model.integral_ball(b)?;
            }
            vertices.push(TreeVertex {
                id,
                ball: balls[id].clone(),
                parent: parent[id],
                children: children[id].clone(),
                fiber,
                nu,
                on_ray_to: ray_marks[id],
                hole_boundary: hole_marks[id],
            });
        }

        Ok(Tree {
            p,
            vertices,
            root,
            ends: omega.curve_zeros.clone(),
            max_level,
            omega: omega.clone(),
        })
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// The vertex whose fiber contains x (the retraction σ of x onto the
    /// tree). Errors for points in a hole, outside the outer ball, or deeper
    /// than the truncation toward an end.
    pub fn retraction_vertex(&self, x: &BigRational) -> Result<usize, TreeError> {
        for v in &self.vertices {
            if v.ball.contains_point(x) && v.fiber.iter().any(|b| b.contains_point(x)) {
                return Ok(v.id);
            }
        }
        Err(TreeError::PointOutsideDomain(
            crate::rational::format_rational(x),
        ))
    }

    /// Vertices on the ray toward end `i`, ordered by increasing level.
    pub fn ray(&self, end: usize) -> Vec<usize> {
        let a = &self.ends[end].0;
        let mut on: Vec<usize> = self
            .vertices
            .iter()
            .filter(|v| v.ball.contains_point(a))
            .map(|v| v.id)
            .collect();
        on.sort_by_key(|&id| self.vertices[id].level());
        on
    }

    /// Exact ∫ of |ω| over the un-truncated tail ball toward end `i`.
    pub fn tail_mass(&self, end: usize) -> Result<BigRational, TreeError> {
        let a = &self.ends[end].0;
        let tail = Ball::new(self.p, a.clone(), self.max_level + 1);
        Ok(self.omega.model.integral_ball(&tail)?)
    }

    /// Σ over fibers of ν plus closed-form tails: the total |ω|-mass of F.
    pub fn total_mass_with_tails(&self) -> Result<BigRational, TreeError> {
        let mut acc = BigRational::zero();
        for v in &self.vertices {
            acc += &v.nu;
        }
        for i in 0..self.ends.len() {
            acc += self.tail_mass(i)?;
        }
        Ok(acc)
    }
}

fn refine_for_constancy(
    model: &super::measure::AbsModel,
    fiber: Vec<Ball>,
) -> Result<Vec<Ball>, TreeError> {
    let mut out = Vec::new();
    let mut queue = fiber;
    let mut guard = 0usize;
    while let Some(b) = queue.pop() {
        guard += 1;
        if guard > 100_000 {
            return Err(TreeError::TooShallow(b.level));
        }
        let split = model.factors.iter().any(|(t, _)| b.contains_point(t));
        if split {
            queue.extend(b.children());
        } else {
            out.push(b);
        }
    }
    out.sort_by_key(|b| b.canonical_key());
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::measure::AbsModel;
    use num_bigint::BigInt;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    fn simple_domain() -> FundamentalDomain {
        // outer {|z| ≤ 1}, one hole {|z| ≤ 1/25} (the open interior of {|z| ≤ 1/5})
        FundamentalDomain {
            outer: Ball::new_int(5, 0, 0),
            holes: vec![Ball::new_int(5, 0, 2)],
        }
    }

    #[test]
    fn path_graph_for_single_end() {
        // one end, one hole: a path from the root down the ray
        let fd = simple_domain();
        let omega = OmegaSpec::new(
            AbsModel::new(5, rat(1, 1), vec![(rat(2, 1), 2)]),
            vec![(rat(2, 1), 2)],
        );
        let tree = Tree::build(&fd, &omega, 6).unwrap();
        // ray toward 2 has vertices at levels 0..=6
        let ray = tree.ray(0);
        assert_eq!(ray.len(), 7);
        // exactly |S| = 1 truncated ray
        let deepest: Vec<_> = tree
            .vertices
            .iter()
            .filter(|v| v.level() == 6)
            .collect();
        assert_eq!(deepest.len(), 1);
        assert_eq!(deepest[0].on_ray_to, Some(0));
    }

    #[test]
    fn fiber_partition_mass() {
        let fd = simple_domain();
        let omega = OmegaSpec::new(
            AbsModel::new(5, rat(3, 1), vec![(rat(2, 1), 2)]),
            vec![(rat(2, 1), 2)],
        );
        let tree = Tree::build(&fd, &omega, 9).unwrap();
        let total = tree.total_mass_with_tails().unwrap();
        let direct = omega
            .model
            .integral_ball_minus(&fd.outer, &fd.holes)
            .unwrap();
        assert_eq!(total, direct);
    }

    #[test]
    fn fibers_are_disjoint_and_nested_or_disjoint() {
        let fd = simple_domain();
        let omega = OmegaSpec::new(
            AbsModel::new(5, rat(1, 1), vec![(rat(2, 1), 1), (rat(7, 1), 1)]),
            vec![(rat(2, 1), 1), (rat(7, 1), 1)],
        );
        let tree = Tree::build(&fd, &omega, 5).unwrap();
        let mut all: Vec<&Ball> = Vec::new();
        for v in &tree.vertices {
            for b in &v.fiber {
                all.push(b);
            }
        }
        for (i, a) in all.iter().enumerate() {
            for (j, b) in all.iter().enumerate() {
                if i != j {
                    assert!(a.is_disjoint(b), "fiber balls overlap");
                }
            }
        }
    }

    #[test]
    fn retraction_consistency() {
        let fd = simple_domain();
        let omega = OmegaSpec::new(
            AbsModel::new(5, rat(1, 1), vec![(rat(2, 1), 2)]),
            vec![(rat(2, 1), 2)],
        );
        let tree = Tree::build(&fd, &omega, 8).unwrap();
        // x at distance 5^{-k} from the end lands on the ray vertex of level k
        for k in 1..=7 {
            let x = rat(2, 1) + crate::rational::p_pow(5, k);
            let v = tree.retraction_vertex(&x).unwrap();
            assert_eq!(tree.vertices[v].level(), k);
            assert_eq!(tree.vertices[v].on_ray_to, Some(0));
        }
        // points in a hole are rejected
        assert!(tree.retraction_vertex(&rat(25, 1)).is_err());
        // two points with the same kernel-relevant distances share a fiber
        let x = rat(1, 1);
        let y = rat(6, 1); // |x − y| = 1/5 but both are units away from 0, 2
        let vx = tree.retraction_vertex(&x).unwrap();
        let vy = tree.retraction_vertex(&y).unwrap();
        assert_eq!(vx, vy);
    }
}
