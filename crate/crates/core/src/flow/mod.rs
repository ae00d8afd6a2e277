//! Hamiltonian flow, its linearization, equilibria, periodic orbits and
//! Lyapunov exponents.

pub mod ode;

mod equilibrium;
mod lyapunov;
mod periodic;
mod trajectory;
mod variational;

pub use equilibrium::{find_equilibrium, Equilibrium};
pub use lyapunov::{lyapunov_exponents, LyapunovSpectrum};
pub use ode::{Controls, Stats};
pub use periodic::{find_periodic_orbit, floquet_reduced, FloquetData, PeriodicOrbit, Section, TRIVIAL_MULTIPLIER_TOL};
pub use trajectory::{integrate, integrate_at, Sample, Trajectory, ENERGY_DRIFT_TOL};
pub use variational::{propagate, variational_flow, VariationalFrame};

use alloc::vec::Vec;

use crate::error::Result;
use crate::models::{HamiltonianModel, PhasePoint};

/// `h⃗` evaluated on a stacked `(p, q)` slice, written into `out`.
pub(crate) fn field_into(model: &HamiltonianModel, y: &[f64], out: &mut [f64]) -> Result<()> {
    let x = PhasePoint::from_slice(y)?;
    let f = model.vector_field(&x)?;
    out.copy_from_slice(f.as_slice());
    Ok(())
}

pub(crate) fn stack(x: &PhasePoint) -> Vec<f64> {
    let mut y = x.p.clone();
    y.extend_from_slice(&x.q);
    y
}
