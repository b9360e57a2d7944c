//! Conformal torus metrics `f²(dx² + dy²)`: Gaussian curvature through
//! Liouville's equation, systoles of the torus, the variance of the
//! conformal factor, and numerical checks of the isosystolic defect chain.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod averaging;
pub mod config;
pub mod defect;
pub mod error;
pub mod field;
pub mod lattice;
pub mod liouville;
pub mod systole;
mod sum;

pub use error::{Error, Result};
pub use lattice::{Lattice2D, LatticeVector, TauParameter, Vec2};
