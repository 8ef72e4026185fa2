//! Positive radial ground states of the planar Schrödinger–Newton equation
//! on a disc `D_R`:
//!
//! ```text
//! −Δu + u = (∫_{D_R} G(x, y) u(y)² dy) u   in D_R,    u = 0 on ∂D_R
//! ```
//!
//! where `G` is the Dirichlet Green's function of the disc.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod geometry;
pub mod io;
pub mod radial;
pub mod solver;
pub mod study;
pub mod variational;
pub mod verify;

pub use error::{Error, Result};
