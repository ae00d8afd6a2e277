use nalgebra::{DMatrix, DVector};

use super::{CurvatureData, Method};
use crate::error::{Error, Result};
use crate::expr::Jet;
use crate::models::{Family, HamiltonianModel, PhasePoint};

/// `R` from the per-family formulas: the Hessian of `U` for natural
/// systems, and for motion on a Riemannian manifold the Jacobi operator
/// `ξ' ↦ 𝓡(ξ', x')x'` of the velocity `x' = g⁻¹p` plus the covariant
/// Hessian of `U`, with indices moved by the metric. The curvature does
/// not depend on the sign of `h`.
pub fn curvature_closed_form(model: &HamiltonianModel, x: &PhasePoint) -> Result<CurvatureData> {
    let r = closed_operator(model, x)?;
    let g = model.fiber_hessian(x)?;
    Ok(CurvatureData::assemble(r, g, Method::ClosedForm))
}

pub(crate) fn closed_operator(model: &HamiltonianModel, x: &PhasePoint) -> Result<DMatrix<f64>> {
    if x.dim() != model.dim() {
        return Err(Error::Dimension { expected: model.dim(), found: x.dim() });
    }
    let n = model.dim();
    match model.family() {
        Family::Custom => Err(Error::UnsupportedFamily(Family::Custom.name())),
        Family::Natural => {
            let u = model.potential_jet(&x.q)?.expect("natural family has a potential");
            Ok(u.hessian())
        }
        Family::Geodesic | Family::MechanicalOnManifold => {
            let metric = model.metric().expect("metric family");
            let local = metric.local(&x.q)?;
            let p = DVector::from_column_slice(&x.p);
            let velocity = &local.ginv * p;
            let jacobi = local.riemann().jacobi_operator(velocity.as_slice());
            let mut r = &local.g * jacobi * &local.ginv;
            if let Some(u) = model.potential_jet(&x.q)? {
                r += local.covariant_hessian(&u) * &local.ginv;
            }
            debug_assert_eq!(r.nrows(), n);
            Ok(r)
        }
    }
}

/// `U` at `q` with derivatives, or the zero jet for geodesic flows.
pub(crate) fn potential_or_zero(model: &HamiltonianModel, q: &[f64]) -> Result<Jet> {
    Ok(model.potential_jet(q)?.unwrap_or_else(|| Jet::constant(0.0, q.len())))
}
