//! Grid laboratory for degenerate fully nonlinear elliptic equations: Pucci
//! operators with gradient degeneracy, sliding `C^{1,alpha}` cones and their
//! contact sets, the stress map `|Du|^gamma Du`, and measure-decay studies.

// Parameter checks are written `!(x > 0.0)` so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cones;
pub mod contact;
pub mod error;
pub mod exec;
pub mod field;
pub mod lab;
pub mod linalg;
pub mod operators;
pub mod solver;

pub use error::{Error, Result};
pub use exec::Exec;
