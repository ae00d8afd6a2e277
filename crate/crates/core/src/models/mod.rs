//! Phase space, Hamiltonian model families and Riemannian geometry.
//!
//! The manifold is a single canonical chart `ℝ²ⁿ ∋ (p, q)` with
//! `σ = Σ dpᵢ ∧ dqᵢ` and the vertical Lagrange distribution.

mod hamiltonian;
mod metric;
mod phase;
mod surface;

pub use hamiltonian::{Family, HamiltonianModel};
pub use metric::{Christoffel, MetricField, MetricJet, RiemannTensor, SectionalEstimate};
pub use phase::PhasePoint;
pub use surface::{SurfaceOfRevolution, SURFACE_COORDS};
