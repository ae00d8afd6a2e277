//! Curvature of a Hamiltonian field with respect to the vertical
//! distribution `Δ_x = T_x(T*_q N)`: the g-form, the curvature operator `R`,
//! the form `r(ξ) = g(Rξ, ξ)` and the reduced form `r̂`.
//!
//! Operators on `Δ_x` are matrices in the `∂/∂p` basis.

mod closed;
mod gform;
mod reduced;
mod schwartzian;

pub use closed::curvature_closed_form;
pub use gform::{classify_sign, g_form, GForm, Monotonicity, Regularity, SignClass};
pub use reduced::{reduced_curvature, ReducedCurvatureData, ReducedMethod};
pub use schwartzian::{curvature_schwartzian, jacobi_graph, SchwartzianControls, KAPPA_CAL};

use alloc::vec::Vec;
use nalgebra::DMatrix;

use crate::linalg::{generalized_symmetric_eigenvalues, symmetrize};

pub const REG_TOL: f64 = 1e-8;
/// Relative to the spectral radius of the form being classified.
pub const SIGN_TOL: f64 = 1e-9;
pub const CROSS_TOL: f64 = 1e-5;
pub const BRACKET_TOL: f64 = 1e-5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    ClosedForm,
    Schwartzian,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::ClosedForm => "closed_form",
            Method::Schwartzian => "schwartzian",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureData {
    /// The operator `R^h_x`.
    pub r: DMatrix<f64>,
    /// Symmetric matrix of `r(ξ) = g(Rξ, ξ)`.
    pub r_form: DMatrix<f64>,
    /// The g-form the curvature was measured against.
    pub g: DMatrix<f64>,
    /// Eigenvalues of `R`, ascending; present when `g` is sign-definite.
    pub eigenvalues: Option<Vec<f64>>,
    /// `None` when `g` is not sign-definite.
    pub sign_class: Option<SignClass>,
    /// `‖gR − (gR)ᵀ‖ / ‖gR‖`.
    pub self_adjoint_defect: f64,
    pub method: Method,
}

impl CurvatureData {
    pub(crate) fn assemble(r: DMatrix<f64>, g: DMatrix<f64>, method: Method) -> Self {
        let gr = &g * &r;
        let scale = gr.norm();
        let self_adjoint_defect = if scale == 0.0 { 0.0 } else { (&gr - gr.transpose()).norm() / scale };
        let r_form = symmetrize(&gr);
        let eigenvalues = generalized_symmetric_eigenvalues(&r_form, &g);
        let sign_class = classify_sign(&r_form, &g).ok();
        CurvatureData { r, r_form, g, eigenvalues, sign_class, self_adjoint_defect, method }
    }
}
