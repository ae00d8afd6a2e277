//! Checkers for the hyperbolicity consequences of negative curvature:
//! convergence to a hyperbolic equilibrium along a bounded semi-trajectory,
//! hyperbolicity of periodic orbits with negative reduced curvature, and
//! the energy domain on which a mechanical system on a negatively curved
//! surface is Anosov.
//!
//! Certificates record every hypothesis flag separately from the
//! conclusion, and never report a conclusion as established unless all
//! hypotheses hold.

mod domain;
mod theorem1;
mod theorem2;

pub use domain::{check_domain, inside_fraction_report, sweep_domain, DomainSweep, DomainVerdict, FractionReport};
pub use theorem1::{check_theorem1, Theorem1Certificate, Theorem1Config};
pub use theorem2::{
    check_theorem2_lyapunov, check_theorem2_orbit, LyapunovEvidence, SampledHypotheses, Theorem2Certificate, Theorem2Config,
};

use crate::curvature::{curvature_closed_form, curvature_schwartzian, CurvatureData};
use crate::error::Result;
use crate::models::{Family, HamiltonianModel, PhasePoint};

/// Closed form where the family has one, the Schwartzian otherwise.
pub(crate) fn curvature_at(model: &HamiltonianModel, x: &PhasePoint) -> Result<CurvatureData> {
    match model.family() {
        Family::Custom => curvature_schwartzian(model, x, &Default::default()),
        _ => curvature_closed_form(model, x),
    }
}

/// Human-readable yes/no for certificate text.
pub(crate) fn yes(flag: bool) -> &'static str {
    if flag {
        "yes"
    } else {
        "no"
    }
}
