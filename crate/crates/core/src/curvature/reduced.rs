use nalgebra::{DMatrix, DVector};

use super::closed::{closed_operator, potential_or_zero};
use super::gform::GForm;
use super::schwartzian::{curvature_schwartzian, SchwartzianControls};
use super::{classify_sign, SignClass};
use crate::error::{Error, Result};
use crate::fd::directional;
use crate::linalg::{generalized_symmetric_eigenvalues, householder_complement, symmetrize};
use crate::models::{Family, HamiltonianModel, PhasePoint};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReducedMethod {
    /// Per-family specialization of the correction term.
    ClosedForm,
    /// Correction from the iterated Lie bracket `[h⃗, [h⃗, v]]`.
    Bracket,
}

impl ReducedMethod {
    pub fn name(self) -> &'static str {
        match self {
            ReducedMethod::ClosedForm => "closed_form",
            ReducedMethod::Bracket => "bracket",
        }
    }
}

/// `r̂` restricted to `Δ_x ∩ ker d_x h`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedCurvatureData {
    /// Orthonormal basis (columns, `n × (n−1)`) of the admissible subspace.
    pub basis: DMatrix<f64>,
    pub r_hat: DMatrix<f64>,
    /// The g-form restricted to the basis.
    pub g_hat: DMatrix<f64>,
    /// Eigenvalues of `ĝ⁻¹ r̂`, ascending.
    pub eigenvalues: alloc::vec::Vec<f64>,
    pub sign_class: SignClass,
    /// `∂/∂p` components of `v = G⁻¹Π h⃗` at `x`.
    pub v_section: DVector<f64>,
    /// The added term `3σ([h⃗,[h⃗,v]], ξ)² / (4 g(v, v))` as a form.
    pub correction: DMatrix<f64>,
    pub method: ReducedMethod,
}

/// Vertical section `v = −(∂²h/∂p²)⁻¹ ∂h/∂p` as a phase-space vector.
fn section_v(model: &HamiltonianModel, x: &DVector<f64>) -> Result<DVector<f64>> {
    let n = model.dim();
    let point = PhasePoint::from_vector(x)?;
    let jet = model.jet(&point)?;
    let gmat = DMatrix::from_fn(n, n, |i, j| jet.second(i, j));
    let hp = DVector::from_fn(n, |i, _| jet.gradient()[i]);
    let vp = gmat.lu().solve(&hp).ok_or(Error::NotRegular)?;
    let mut v = DVector::zeros(2 * n);
    v.rows_mut(0, n).copy_from(&(-vp));
    Ok(v)
}

/// `[h⃗, Y](x) = DY·h⃗ − Dh⃗·Y` with `DY·h⃗` by a central difference along
/// the flow direction.
fn bracket_with_field<F>(model: &HamiltonianModel, field: F, x: &DVector<f64>, delta: f64) -> Result<DVector<f64>>
where
    F: Fn(&DVector<f64>) -> Result<DVector<f64>>,
{
    let point = PhasePoint::from_vector(x)?;
    let (f, a) = model.field_and_jacobian(&point)?;
    let speed = f.norm();
    let along = directional(&field, x, &f, delta / speed)?;
    Ok(along - a * field(x)?)
}

fn correction_bracket(model: &HamiltonianModel, x: &PhasePoint, basis: &DMatrix<f64>) -> Result<(DVector<f64>, DMatrix<f64>)> {
    let n = model.dim();
    let xv = x.to_vector();
    let a = model.field_jacobian(x)?;
    let delta = 1e-2 / a.norm().max(1.0);
    let w1 = |y: &DVector<f64>| bracket_with_field(model, |z: &DVector<f64>| section_v(model, z), y, delta);
    let w2 = bracket_with_field(model, w1, &xv, delta)?;
    let v = section_v(model, &xv)?;
    let vp = v.rows(0, n).into_owned();
    let gvv = vp.dot(&(model.fiber_hessian(x)? * &vp));
    // σ(w, (ξ, 0)) = −⟨ξ, w_q⟩.
    let s = basis.transpose() * w2.rows(n, n);
    Ok((vp, &s * s.transpose() * (3.0 / (4.0 * gvv))))
}

fn correction_closed(model: &HamiltonianModel, x: &PhasePoint, basis: &DMatrix<f64>) -> Result<(DVector<f64>, DMatrix<f64>)> {
    let n = model.dim();
    let v = section_v(model, &x.to_vector())?;
    let vp = v.rows(0, n).into_owned();
    let du = potential_or_zero(model, &x.q)?.gradient_vector();
    let (w, kinetic2) = match model.family() {
        Family::Natural => (du, x.p.iter().map(|p| p * p).sum::<f64>()),
        Family::Geodesic | Family::MechanicalOnManifold => {
            let ginv = model.metric().expect("metric family").matrix(&x.q)?.try_inverse().ok_or(Error::NotRegular)?;
            let p = DVector::from_column_slice(&x.p);
            (&ginv * du, p.dot(&(&ginv * &p)))
        }
        Family::Custom => return Err(Error::UnsupportedFamily(Family::Custom.name())),
    };
    // Natural: 3⟨dU, ξ⟩²/|p|²; on a manifold: 3 g(dU, ξ)² / (2(h − U)).
    // Both flip sign with h.
    let s = basis.transpose() * w;
    Ok((vp, &s * s.transpose() * (3.0 * model.sign() / kinetic2)))
}

/// Reduced curvature form at `x`.
pub fn reduced_curvature(model: &HamiltonianModel, x: &PhasePoint, method: ReducedMethod) -> Result<ReducedCurvatureData> {
    let n = model.dim();
    if x.dim() != n {
        return Err(Error::Dimension { expected: n, found: x.dim() });
    }
    if n < 2 {
        return Err(Error::TrivialAdmissible);
    }
    let g = GForm::from_matrix(model.fiber_hessian(x)?);
    if !g.is_regular() {
        return Err(Error::NotRegular);
    }
    if !g.monotone.is_monotone() {
        return Err(Error::NotMonotone);
    }
    let jet = model.jet(x)?;
    let hp = DVector::from_fn(n, |i, _| jet.gradient()[i]);
    let scale = jet.gradient().iter().fold(0.0, |m: f64, v| m.max(v.abs())).max(1.0);
    if hp.norm() <= 1e-12 * scale {
        return Err(Error::VerticalField);
    }
    let basis = householder_complement(&hp);
    let r = match model.family() {
        Family::Custom => curvature_schwartzian(model, x, &SchwartzianControls::default())?.r,
        _ => closed_operator(model, x)?,
    };
    let r_form = symmetrize(&(&g.matrix * r));
    let (v_section, correction) = match method {
        ReducedMethod::ClosedForm => correction_closed(model, x, &basis)?,
        ReducedMethod::Bracket => correction_bracket(model, x, &basis)?,
    };
    let r_hat = symmetrize(&(basis.transpose() * r_form * &basis + &correction));
    let g_hat = symmetrize(&(basis.transpose() * &g.matrix * &basis));
    let eigenvalues = generalized_symmetric_eigenvalues(&r_hat, &g_hat).ok_or(Error::NotMonotone)?;
    let sign_class = classify_sign(&r_hat, &g_hat)?;
    Ok(ReducedCurvatureData { basis, r_hat, g_hat, eigenvalues, sign_class, v_section, correction, method })
}
