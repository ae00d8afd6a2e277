use nalgebra::DMatrix;

use super::{REG_TOL, SIGN_TOL};
use crate::error::{Error, Result};
use crate::linalg::{generalized_symmetric_eigenvalues, symmetric_eigenvalues, symmetrize};
use crate::models::{HamiltonianModel, PhasePoint};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regularity {
    Regular,
    Singular,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Monotonicity {
    Positive,
    Negative,
    Indefinite,
    Degenerate,
}

impl Monotonicity {
    pub fn is_monotone(self) -> bool {
        matches!(self, Monotonicity::Positive | Monotonicity::Negative)
    }

    pub fn name(self) -> &'static str {
        match self {
            Monotonicity::Positive => "positive",
            Monotonicity::Negative => "negative",
            Monotonicity::Indefinite => "indefinite",
            Monotonicity::Degenerate => "degenerate",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SignClass {
    Negative,
    Positive,
    Mixed,
    Degenerate,
}

impl SignClass {
    pub fn name(self) -> &'static str {
        match self {
            SignClass::Negative => "negative",
            SignClass::Positive => "positive",
            SignClass::Mixed => "mixed",
            SignClass::Degenerate => "degenerate",
        }
    }
}

/// `g^h_x`, the fibre Hessian of `h` at `x`.
#[derive(Debug, Clone, PartialEq)]
pub struct GForm {
    pub matrix: DMatrix<f64>,
    pub regularity: Regularity,
    pub monotone: Monotonicity,
    /// Largest over smallest singular value (infinite when singular).
    pub condition_number: f64,
}

impl GForm {
    pub fn from_matrix(m: DMatrix<f64>) -> Self {
        let asym = (&m - m.transpose()).norm();
        assert!(asym <= 1e-10 * m.norm().max(1.0), "g-form is not symmetric ({asym:e})");
        let matrix = symmetrize(&m);
        let sv = matrix.clone().singular_values();
        let max = sv.max();
        let min = sv.min();
        let regular = max > 0.0 && min > REG_TOL * max;
        let condition_number = if min > 0.0 { max / min } else { f64::INFINITY };
        let ev = symmetric_eigenvalues(&matrix);
        let tol = SIGN_TOL * ev.iter().fold(0.0, |m: f64, v| m.max(v.abs()));
        let monotone = if max == 0.0 || ev.iter().any(|v| v.abs() <= tol) {
            Monotonicity::Degenerate
        } else if ev.iter().all(|v| *v > 0.0) {
            Monotonicity::Positive
        } else if ev.iter().all(|v| *v < 0.0) {
            Monotonicity::Negative
        } else {
            Monotonicity::Indefinite
        };
        GForm {
            matrix,
            regularity: if regular { Regularity::Regular } else { Regularity::Singular },
            monotone,
            condition_number,
        }
    }

    pub fn is_regular(&self) -> bool {
        self.regularity == Regularity::Regular
    }
}

pub fn g_form(model: &HamiltonianModel, x: &PhasePoint) -> Result<GForm> {
    Ok(GForm::from_matrix(model.fiber_hessian(x)?))
}

/// Sign of `form(ξ)·g(ξ, ξ)` over `ξ ≠ 0`, read off the eigenvalues of
/// `g⁻¹·form`. `g` must be sign-definite.
pub fn classify_sign(form: &DMatrix<f64>, g: &DMatrix<f64>) -> Result<SignClass> {
    if form.shape() != g.shape() || !form.is_square() {
        return Err(Error::Dimension { expected: g.nrows(), found: form.nrows() });
    }
    let reference = GForm::from_matrix(g.clone());
    if !reference.monotone.is_monotone() {
        return Err(Error::IndefiniteReference);
    }
    let mu = generalized_symmetric_eigenvalues(&symmetrize(form), &reference.matrix)
        .ok_or(Error::IndefiniteReference)?;
    let tol = SIGN_TOL * mu.iter().fold(0.0, |m: f64, v| m.max(v.abs()));
    let neg = mu.iter().any(|v| *v < -tol);
    let pos = mu.iter().any(|v| *v > tol);
    let flat = mu.iter().any(|v| v.abs() <= tol);
    Ok(match (neg, pos, flat) {
        (true, true, _) => SignClass::Mixed,
        (_, _, true) => SignClass::Degenerate,
        (true, false, false) => SignClass::Negative,
        _ => SignClass::Positive,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::Expression;
    use crate::models::MetricField;
    use alloc::string::ToString;
    use alloc::vec;

    #[test]
    fn sign_examples() {
        let m = |v: &[f64]| DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(v));
        assert_eq!(classify_sign(&m(&[-1.0]), &m(&[1.0])).unwrap(), SignClass::Negative);
        assert_eq!(classify_sign(&m(&[-1.0, 2.0]), &m(&[1.0, 1.0])).unwrap(), SignClass::Mixed);
        assert_eq!(classify_sign(&m(&[-1e-14, -1.0]), &m(&[1.0, 1.0])).unwrap(), SignClass::Degenerate);
        assert_eq!(classify_sign(&m(&[1.0, 3.0]), &m(&[-1.0, -2.0])).unwrap(), SignClass::Negative);
        assert!(matches!(classify_sign(&m(&[1.0, 1.0]), &m(&[1.0, -1.0])), Err(Error::IndefiniteReference)));
    }

    #[test]
    fn natural_and_geodesic_forms() {
        let u = Expression::parse("cos(q)", &["q".to_string()]).unwrap();
        let x = PhasePoint::new(vec![0.4], vec![1.3]).unwrap();
        let g = g_form(&HamiltonianModel::natural(u), &x).unwrap();
        assert_eq!(g.matrix, DMatrix::identity(1, 1));
        assert_eq!((g.regularity, g.monotone), (Regularity::Regular, Monotonicity::Positive));

        let sphere = HamiltonianModel::geodesic(MetricField::round_sphere());
        let x = PhasePoint::new(vec![0.4, -0.2], vec![1.0, 0.3]).unwrap();
        let g = g_form(&sphere, &x).unwrap();
        let expected = MetricField::round_sphere().matrix(&x.q).unwrap().try_inverse().unwrap();
        assert!((&g.matrix - expected).norm() < 1e-14);
        assert_eq!(g_form(&sphere.reversed(), &x).unwrap().monotone, Monotonicity::Negative);
    }

    #[test]
    fn custom_degenerate() {
        let h = Expression::parse("p1*q1", &["p1".to_string(), "q1".to_string()]).unwrap();
        let g = g_form(&HamiltonianModel::custom(h).unwrap(), &PhasePoint::new(vec![1.0], vec![2.0]).unwrap()).unwrap();
        assert_eq!(g.matrix, DMatrix::zeros(1, 1));
        assert_eq!((g.regularity, g.monotone), (Regularity::Singular, Monotonicity::Degenerate));
        assert!(g.condition_number.is_infinite());
    }
}
