//! Numerical toolkit for Randers metrics, singular radial Poisson problems and
//! anisotropic Poisson solvers on Minkowski balls.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod checks;
pub mod error;
pub mod linalg;
pub mod model_spaces;
pub mod norm_numeric;
pub mod numeric;
pub mod poisson;
pub mod quadrature;
pub mod radial_ode;
pub mod randers;
pub mod special;

pub use error::{Error, Result};
pub use randers::{MinkowskiNorm, RandersStructure, StructureDescriptor, StructureKind};

#[cfg(test)]
mod proptests;
