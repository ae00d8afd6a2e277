use alloc::vec::Vec;

use nalgebra::{Complex, DVector};

use crate::error::{Error, Result};
use crate::linalg::{complex_eigenvalues, modulus, singular_ratio};
use crate::models::{HamiltonianModel, PhasePoint};

const MAX_ITERATIONS: usize = 50;
const SINGULAR_RATIO: f64 = 1e-12;
/// Relative size of `min |Re λ|` against the spectral radius below which an
/// equilibrium is not counted as hyperbolic.
pub const SPECTRAL_TOL: f64 = 1e-6;

/// A zero of `h⃗` with the spectrum of its linearization.
#[derive(Debug, Clone, PartialEq)]
pub struct Equilibrium {
    pub x: PhasePoint,
    pub spectrum: Vec<Complex<f64>>,
    pub hyperbolic: bool,
    /// `min |Re λ|`.
    pub margin: f64,
    pub residual: f64,
    pub iterations: usize,
}

/// Newton iteration on `h⃗(x) = 0` starting from `guess`.
pub fn find_equilibrium(model: &HamiltonianModel, guess: &PhasePoint) -> Result<Equilibrium> {
    let mut x = guess.to_vector();
    let mut residual = f64::INFINITY;
    for iteration in 0..=MAX_ITERATIONS {
        let point = PhasePoint::from_vector(&x)?;
        let (f, a) = model.field_and_jacobian(&point)?;
        residual = f.norm();
        let scale = x.norm().max(1.0);
        let ratio = singular_ratio(&a);
        if ratio < SINGULAR_RATIO {
            return Err(Error::SingularJacobian { ratio });
        }
        if residual <= 1e-12 * scale {
            return Ok(classify(point, &a, residual, iteration));
        }
        if iteration == MAX_ITERATIONS {
            break;
        }
        let step: DVector<f64> = a
            .lu()
            .solve(&f)
            .ok_or(Error::SingularJacobian { ratio })?;
        x -= step;
    }
    Err(Error::NewtonDivergence { iterations: MAX_ITERATIONS, residual })
}

fn classify(x: PhasePoint, a: &nalgebra::DMatrix<f64>, residual: f64, iterations: usize) -> Equilibrium {
    let mut spectrum = complex_eigenvalues(a);
    spectrum.sort_by(|u, v| v.re.total_cmp(&u.re).then(v.im.total_cmp(&u.im)));
    let radius = spectrum.iter().fold(0.0, |m: f64, l| m.max(modulus(l)));
    let margin = spectrum.iter().fold(f64::INFINITY, |m: f64, l| m.min(l.re.abs()));
    Equilibrium {
        x,
        hyperbolic: radius > 0.0 && margin > SPECTRAL_TOL * radius,
        spectrum,
        margin,
        residual,
        iterations,
    }
}
