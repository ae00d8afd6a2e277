//! Curvature invariants of Hamiltonian flows with respect to the vertical
//! Lagrange distribution, and numerical checks of the hyperbolicity they
//! imply.
//!
//! The crate is `no_std` (it needs `alloc`). Everything here is a pure
//! function of its inputs; file formats and the command line live in the
//! `hamcurv` crate.

#![no_std]
// `num_traits::Float` supplies f64 math only when std is absent from the
// crate graph; with std linked (tests, dev-dependencies) it goes unused.
#![allow(unused_imports)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod curvature;
pub mod error;
pub mod expr;
pub mod fd;
pub mod flow;
pub mod hyperbolicity;
pub mod linalg;
pub mod models;

pub use error::{Error, Result};
pub use models::{Family, HamiltonianModel, MetricField, PhasePoint, SurfaceOfRevolution};
