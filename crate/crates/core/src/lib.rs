//! Diffusion operators on the Q_p-rational points of Mumford curves.
//!
//! A Mumford curve X = Ω/Γ over Q_p is uniformised by a free Schottky group
//! Γ ⊂ PGL₂(Q_p) acting on the complement Ω of its limit set. This crate
//! computes, with exact rational arithmetic wherever values are powers of p:
//!
//! - truncated theta products θ(a,b;z), automorphy characters, the period
//!   pairing Q and the lattice theta series ϑ(c;z) ([`theta`]);
//! - the reduction tree T_S of a good fundamental domain with a finite set S
//!   removed, its fibers and their exact |ω|-measures ([`geometry`]);
//! - the integral kernel H(x,y) built from the absolute value of an invariant
//!   function, the exact weight matrix m(vw), the vertex Laplacian, Kozyrev
//!   wavelets and the operator spectrum ([`kernelop`]);
//! - the heat semigroup exp(tL), Feller-style certificates and the associated
//!   Markov jump process ([`heat`]);
//! - recovery of the curve's genus from the decay of the degree function along
//!   the tree's ends ([`genus`]);
//! - explicit hyperelliptic machinery: Whittaker groups, half-period
//!   characters, divisor steering, Gerritzen's uniformisation x(z) and
//!   differential forms with prescribed divisor ([`hyperelliptic`]).
//!
//! The crate is `no_std` (alloc required); IO, configuration files and the
//! command line live in the companion `mumford-cli` crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod genus;
pub mod geometry;
pub mod heat;
pub mod hyperelliptic;
pub mod kernelop;
pub mod linalg;
pub mod localfield;
pub mod moebius;
pub mod rational;
pub mod schottky;
pub mod theta;

pub use localfield::{PadicNumber, ProjPoint};
pub use moebius::{MapClass, MoebiusMap};
pub use schottky::{FundamentalDomain, SchottkyGroup, WhittakerGroup, Word};
