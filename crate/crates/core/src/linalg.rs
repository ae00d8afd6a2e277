//! Small dense linear-algebra helpers over `nalgebra`.

use alloc::vec::Vec;
use nalgebra::{Complex, DMatrix, DVector};
use num_traits::Float;


/// Matrix of the symplectic form in (p, q) ordering:
/// `σ(a, b) = aᵀ J b = <a_p, b_q> - <b_p, a_q>`.
pub fn symplectic_matrix(n: usize) -> DMatrix<f64> {
    let mut j = DMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        j[(i, n + i)] = 1.0;
        j[(n + i, i)] = -1.0;
    }
    j
}

pub fn sigma(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() / 2;
    (0..n).map(|i| a[i] * b[n + i] - b[i] * a[n + i]).sum()
}

/// `‖ΦᵀJΦ − J‖_F`.
pub fn symplectic_defect(phi: &DMatrix<f64>) -> f64 {
    let j = symplectic_matrix(phi.nrows() / 2);
    (phi.transpose() * &j * phi - j).norm()
}

pub fn symmetric_eigenvalues(m: &DMatrix<f64>) -> Vec<f64> {
    let mut ev: Vec<f64> = m.clone().symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// `|z|`, spelled out because `Complex::norm` needs std.
pub fn modulus(z: &Complex<f64>) -> f64 {
    z.re.hypot(z.im)
}

pub fn complex_eigenvalues(m: &DMatrix<f64>) -> Vec<Complex<f64>> {
    m.complex_eigenvalues().iter().copied().collect()
}

/// Eigenvalues of `B⁻¹A` for symmetric `A` and symmetric definite `B`
/// (either sign), sorted ascending. `None` when `B` is not definite.
pub fn generalized_symmetric_eigenvalues(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Option<Vec<f64>> {
    let (sign, bp) = if b.clone().cholesky().is_some() {
        (1.0, b.clone())
    } else {
        (-1.0, -b)
    };
    let chol = bp.cholesky()?;
    let l = chol.l();
    let linv = l.clone().try_inverse()?;
    let c = &linv * a * linv.transpose();
    let c = (&c + c.transpose()) * 0.5;
    let mut ev: Vec<f64> = symmetric_eigenvalues(&c).into_iter().map(|v| sign * v).collect();
    ev.sort_by(f64::total_cmp);
    Some(ev)
}

/// Orthonormal basis (as columns) of the Euclidean complement of `v`,
/// taken from the Householder reflection that maps `v` onto the first axis.
pub fn householder_complement(v: &DVector<f64>) -> DMatrix<f64> {
    let n = v.len();
    let norm = v.norm();
    let mut u = v.clone();
    let s = if v[0] >= 0.0 { 1.0 } else { -1.0 };
    u[0] += s * norm;
    let uu = u.dot(&u);
    let h = DMatrix::identity(n, n) - (&u * u.transpose()) * (2.0 / uu);
    h.columns(1, n - 1).into_owned()
}

/// Smallest over largest singular value (0 for the zero matrix).
pub fn singular_ratio(m: &DMatrix<f64>) -> f64 {
    let sv = m.clone().singular_values();
    let max = sv.iter().copied().fold(0.0, f64::max);
    let min = sv.iter().copied().fold(f64::INFINITY, f64::min);
    if max == 0.0 {
        0.0
    } else {
        min / max
    }
}

pub fn max_abs(values: &[f64]) -> f64 {
    values.iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// Symmetric part `(M + Mᵀ)/2`.
pub fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}
