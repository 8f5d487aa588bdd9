//! Balls in Q_p, the truncated reduction tree of a fundamental domain, and
//! exact |ω|-measures of its fibers.

mod ball;
mod measure;
mod tree;

pub use ball::{complement_decomposition, moebius_image, residue_mod_level, Ball, P1Ball};
pub use measure::{AbsModel, GeomError, OmegaSpec};
pub use tree::{Tree, TreeVertex};
