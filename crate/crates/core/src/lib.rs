//! Symbolic Dirac-comb algebra and numerical diffraction for tempered distributions.

pub mod autocorr;
pub mod comb;
pub mod error;
pub mod jet;
pub mod lattice;
pub mod multi_index;
pub mod pairing;
pub mod poly;
pub mod quadrature;
pub mod schwartz;
pub mod spectrum;
pub mod stochastic;
mod serde_util;

pub use comb::{ContinuousTerm, DistExpr, LatticeTerm, PointAtom};
pub use error::{Error, Result};
pub use lattice::Lattice;
pub use multi_index::{MultiIndex, Point};
pub use poly::Poly;
