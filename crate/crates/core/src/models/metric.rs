use num_traits::Float;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::expr::{Expression, Jet};

/// Riemannian metric `g_ij(q)` given by one expression per entry of the
/// upper triangle. Entries are shared between `(i, j)` and `(j, i)`, so the
/// evaluated matrix is symmetric exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricField {
    coords: Vec<String>,
    upper: Vec<Expression>,
}

fn upper_index(n: usize, i: usize, j: usize) -> usize {
    let (i, j) = if i <= j { (i, j) } else { (j, i) };
    i * n - i * i.saturating_sub(1) / 2 + (j - i)
}

impl MetricField {
    /// Builds a metric from a full matrix of expression sources over
    /// `coords`. Mirror entries must parse to the same tree.
    pub fn new<S: AsRef<str>>(coords: &[S], entries: &[Vec<String>]) -> Result<Self> {
        let n = coords.len();
        if entries.len() != n || entries.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidModel(format!("metric must be {n}x{n}")));
        }
        let mut upper = Vec::with_capacity(n * (n + 1) / 2);
        for i in 0..n {
            for j in i..n {
                let e = Expression::parse(&entries[i][j], coords)?;
                if i != j {
                    let mirror = Expression::parse(&entries[j][i], coords)?;
                    if mirror.ast() != e.ast() {
                        return Err(Error::InvalidModel(format!(
                            "metric entries ({i},{j}) and ({j},{i}) differ"
                        )));
                    }
                }
                upper.push(e);
            }
        }
        Ok(MetricField {
            coords: coords.iter().map(|c| String::from(c.as_ref())).collect(),
            upper,
        })
    }

    /// Builds a metric from upper-triangle expressions (row-major).
    pub fn from_upper(coords: Vec<String>, upper: Vec<Expression>) -> Result<Self> {
        let n = coords.len();
        if upper.len() != n * (n + 1) / 2 {
            return Err(Error::InvalidModel("wrong number of metric entries".into()));
        }
        if upper.iter().any(|e| e.variables() != coords.as_slice()) {
            return Err(Error::InvalidModel("metric entries must use the metric coordinates".into()));
        }
        Ok(MetricField { coords, upper })
    }

    pub fn euclidean(n: usize) -> Self {
        let coords: Vec<String> = (1..=n).map(|i| format!("q{i}")).collect();
        let mut upper = Vec::new();
        for i in 0..n {
            for j in i..n {
                upper.push(Expression::constant(if i == j { 1.0 } else { 0.0 }, coords.clone()));
            }
        }
        MetricField { coords, upper }
    }

    /// Unit sphere in colatitude/longitude coordinates `(q1, q2)`:
    /// `diag(1, sin²q1)`.
    pub fn round_sphere() -> Self {
        let coords = ["q1", "q2"];
        let rows = [vec!["1".into(), "0".into()], vec!["0".into(), "sin(q1)^2".into()]];
        MetricField::new(&coords, &rows).expect("valid sphere metric")
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[String] {
        &self.coords
    }

    pub fn entry(&self, i: usize, j: usize) -> &Expression {
        &self.upper[upper_index(self.dim(), i, j)]
    }

    fn check(&self, q: &[f64]) -> Result<()> {
        if q.len() != self.dim() {
            return Err(Error::Dimension { expected: self.dim(), found: q.len() });
        }
        Ok(())
    }

    pub fn matrix(&self, q: &[f64]) -> Result<DMatrix<f64>> {
        self.check(q)?;
        let n = self.dim();
        let mut g = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let v = self.entry(i, j).eval(q)?;
                g[(i, j)] = v;
                g[(j, i)] = v;
            }
        }
        if g.clone().cholesky().is_none() {
            return Err(Error::MetricNotPositiveDefinite(q.to_vec()));
        }
        Ok(g)
    }

    /// Entry jets with each coordinate bound to the given jet, packed upper
    /// triangle. Used to build Hamiltonians over the full phase space.
    pub fn composed_entries(&self, q: &[Jet]) -> Result<Vec<Jet>> {
        self.upper.iter().map(|e| e.eval_composed(q)).collect()
    }

    /// Metric with first and second coordinate derivatives at `q`.
    pub fn local(&self, q: &[f64]) -> Result<MetricJet> {
        self.check(q)?;
        let n = self.dim();
        let mut g = DMatrix::zeros(n, n);
        let mut dg = vec![DMatrix::zeros(n, n); n];
        let mut d2g = vec![DMatrix::zeros(n, n); n * n];
        for i in 0..n {
            for j in i..n {
                let jet = self.entry(i, j).eval_jet(q)?;
                for (a, b) in [(i, j), (j, i)] {
                    g[(a, b)] = jet.value();
                    for l in 0..n {
                        dg[l][(a, b)] = jet.gradient()[l];
                        for m in 0..n {
                            d2g[l * n + m][(a, b)] = jet.second(l, m);
                        }
                    }
                }
            }
        }
        let ginv = g
            .clone()
            .cholesky()
            .ok_or_else(|| Error::MetricNotPositiveDefinite(q.to_vec()))?
            .inverse();
        Ok(MetricJet { n, g, ginv, dg, d2g })
    }

    pub fn christoffel(&self, q: &[f64]) -> Result<Christoffel> {
        Ok(self.local(q)?.christoffel())
    }

    pub fn riemann(&self, q: &[f64]) -> Result<RiemannTensor> {
        Ok(self.local(q)?.riemann())
    }

    /// Sectional curvature of the plane spanned by `u` and `v` at `q`.
    pub fn sectional(&self, q: &[f64], u: &[f64], v: &[f64]) -> Result<f64> {
        let local = self.local(q)?;
        local.riemann().sectional(&local.g, u, v)
    }

    /// Maximal sectional curvature at `q`. Exact (Gaussian curvature) for
    /// `n = 2`; for `n ≥ 3` the maximum over the coordinate planes and
    /// `samples` seeded random planes, refined by coordinate ascent.
    pub fn max_sectional(&self, q: &[f64], samples: usize, seed: u64) -> Result<SectionalEstimate> {
        let n = self.dim();
        if n < 2 {
            return Err(Error::InvalidArgument("sectional curvature needs n >= 2".into()));
        }
        let local = self.local(q)?;
        let riem = local.riemann();
        let g = &local.g;
        if n == 2 {
            let k = riem.sectional(g, &[1.0, 0.0], &[0.0, 1.0])?;
            return Ok(SectionalEstimate { value: k, exact: true });
        }
        let mut best: Option<(f64, Vec<f64>, Vec<f64>)> = None;
        let consider = |u: Vec<f64>, v: Vec<f64>, best: &mut Option<(f64, Vec<f64>, Vec<f64>)>| {
            if let Ok(k) = riem.sectional(g, &u, &v) {
                if best.as_ref().is_none_or(|b| k > b.0) {
                    *best = Some((k, u, v));
                }
            }
        };
        for i in 0..n {
            for j in i + 1..n {
                let mut u = vec![0.0; n];
                let mut v = vec![0.0; n];
                u[i] = 1.0;
                v[j] = 1.0;
                consider(u, v, &mut best);
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..samples {
            let u: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            consider(u, v, &mut best);
        }
        let (mut kbest, mut u, mut v) = best.ok_or(Error::DegeneratePlane)?;
        let mut step = 0.25;
        while step > 1e-6 {
            let mut improved = false;
            for idx in 0..2 * n {
                for sgn in [1.0, -1.0] {
                    let (mut u2, mut v2) = (u.clone(), v.clone());
                    if idx < n {
                        u2[idx] += sgn * step;
                    } else {
                        v2[idx - n] += sgn * step;
                    }
                    if let Ok((e1, e2)) = orthonormal_pair(g, &u2, &v2) {
                        let (u2, v2) = (e1.as_slice().to_vec(), e2.as_slice().to_vec());
                        let k = riem.sectional(g, &u2, &v2)?;
                        if k > kbest + 1e-15 {
                            kbest = k;
                            u = u2;
                            v = v2;
                            improved = true;
                        }
                    }
                }
            }
            if !improved {
                step *= 0.5;
            }
        }
        Ok(SectionalEstimate { value: kbest, exact: false })
    }

    /// Covariant Hessian `∇²U = ∂²U − Γ·dU` of a scalar over the metric
    /// coordinates.
    pub fn covariant_hessian(&self, potential: &Expression, q: &[f64]) -> Result<DMatrix<f64>> {
        let local = self.local(q)?;
        let u = potential.eval_jet(q)?;
        Ok(local.covariant_hessian(&u))
    }

    /// Metric norm `|∇U|_g = sqrt(dUᵀ g⁻¹ dU)`.
    pub fn gradient_norm(&self, potential: &Expression, q: &[f64]) -> Result<f64> {
        let local = self.local(q)?;
        let du = potential.eval_jet(q)?.gradient_vector();
        Ok(local.covector_norm(&du))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SectionalEstimate {
    pub value: f64,
    /// False when the value comes from sampling planes (`n ≥ 3`).
    pub exact: bool,
}

/// Metric and its first two coordinate derivatives at one point.
#[derive(Debug, Clone)]
pub struct MetricJet {
    pub n: usize,
    pub g: DMatrix<f64>,
    pub ginv: DMatrix<f64>,
    /// `dg[l] = ∂_l g`.
    pub dg: Vec<DMatrix<f64>>,
    /// `d2g[l*n + m] = ∂_l ∂_m g`.
    pub d2g: Vec<DMatrix<f64>>,
}

impl MetricJet {
    pub fn christoffel(&self) -> Christoffel {
        let n = self.n;
        let mut data = vec![0.0; n * n * n];
        for k in 0..n {
            for i in 0..n {
                for j in i..n {
                    let mut s = 0.0;
                    for m in 0..n {
                        let t = self.dg[i][(j, m)] + self.dg[j][(i, m)] - self.dg[m][(i, j)];
                        s += self.ginv[(k, m)] * t;
                    }
                    data[(k * n + i) * n + j] = 0.5 * s;
                    data[(k * n + j) * n + i] = 0.5 * s;
                }
            }
        }
        Christoffel { n, data }
    }

    /// `∂_l Γ^k_ij`, exact from the metric jets.
    fn christoffel_derivative(&self) -> Vec<f64> {
        let n = self.n;
        let dginv: Vec<DMatrix<f64>> = (0..n).map(|l| -(&self.ginv * &self.dg[l] * &self.ginv)).collect();
        let mut out = vec![0.0; n * n * n * n];
        for l in 0..n {
            for k in 0..n {
                for i in 0..n {
                    for j in i..n {
                        let mut s = 0.0;
                        for m in 0..n {
                            let t = self.dg[i][(j, m)] + self.dg[j][(i, m)] - self.dg[m][(i, j)];
                            let dt = self.d2g[l * n + i][(j, m)] + self.d2g[l * n + j][(i, m)]
                                - self.d2g[l * n + m][(i, j)];
                            s += dginv[l][(k, m)] * t + self.ginv[(k, m)] * dt;
                        }
                        out[((l * n + k) * n + i) * n + j] = 0.5 * s;
                        out[((l * n + k) * n + j) * n + i] = 0.5 * s;
                    }
                }
            }
        }
        out
    }

    pub fn riemann(&self) -> RiemannTensor {
        let n = self.n;
        let gamma = self.christoffel();
        let dgamma = self.christoffel_derivative();
        let dg = |l: usize, k: usize, i: usize, j: usize| dgamma[((l * n + k) * n + i) * n + j];
        let mut data = vec![0.0; n * n * n * n];
        for l in 0..n {
            for i in 0..n {
                for j in 0..n {
                    for k in 0..n {
                        let mut r = dg(j, l, i, k) - dg(k, l, i, j);
                        for m in 0..n {
                            r += gamma.get(l, j, m) * gamma.get(m, i, k) - gamma.get(l, k, m) * gamma.get(m, i, j);
                        }
                        data[((l * n + i) * n + j) * n + k] = r;
                    }
                }
            }
        }
        RiemannTensor { n, data, g: self.g.clone() }
    }

    pub fn covariant_hessian(&self, u: &Jet) -> DMatrix<f64> {
        let n = self.n;
        let gamma = self.christoffel();
        DMatrix::from_fn(n, n, |i, j| {
            let mut h = u.second(i, j);
            for k in 0..n {
                h -= gamma.get(k, i, j) * u.gradient()[k];
            }
            h
        })
    }

    pub fn covector_norm(&self, w: &DVector<f64>) -> f64 {
        w.dot(&(&self.ginv * w)).max(0.0).sqrt()
    }

    /// Operator norm of the g-self-adjoint endomorphism `g⁻¹H` for a
    /// symmetric bilinear form `H`.
    pub fn form_operator_norm(&self, h: &DMatrix<f64>) -> f64 {
        crate::linalg::generalized_symmetric_eigenvalues(&crate::linalg::symmetrize(h), &self.g)
            .map(|ev| crate::linalg::max_abs(&ev))
            .unwrap_or(f64::NAN)
    }
}

/// Christoffel symbols `Γ^k_ij`.
#[derive(Debug, Clone, PartialEq)]
pub struct Christoffel {
    n: usize,
    data: Vec<f64>,
}

impl Christoffel {
    pub fn get(&self, k: usize, i: usize, j: usize) -> f64 {
        self.data[(k * self.n + i) * self.n + j]
    }

    pub fn dim(&self) -> usize {
        self.n
    }
}

/// Riemann tensor `R^l_ijk`, with `R(∂_j, ∂_k)∂_i = R^l_ijk ∂_l` and
/// `R(X,Y) = ∇_X∇_Y − ∇_Y∇_X − ∇_[X,Y]`.
#[derive(Debug, Clone)]
pub struct RiemannTensor {
    n: usize,
    data: Vec<f64>,
    g: DMatrix<f64>,
}

impl RiemannTensor {
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, l: usize, i: usize, j: usize, k: usize) -> f64 {
        let n = self.n;
        self.data[((l * n + i) * n + j) * n + k]
    }

    /// `R_lijk = g_lm R^m_ijk`.
    pub fn lowered(&self, l: usize, i: usize, j: usize, k: usize) -> f64 {
        (0..self.n).map(|m| self.g[(l, m)] * self.get(m, i, j, k)).sum()
    }

    /// `R(x, y) z`.
    pub fn apply(&self, x: &[f64], y: &[f64], z: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut out = vec![0.0; n];
        for (l, o) in out.iter_mut().enumerate() {
            for i in 0..n {
                for j in 0..n {
                    for k in 0..n {
                        *o += self.get(l, i, j, k) * z[i] * x[j] * y[k];
                    }
                }
            }
        }
        out
    }

    /// Matrix of `ξ ↦ R(ξ, x) x` on tangent vectors.
    pub fn jacobi_operator(&self, x: &[f64]) -> DMatrix<f64> {
        let n = self.n;
        DMatrix::from_fn(n, n, |l, j| {
            let mut s = 0.0;
            for i in 0..n {
                for k in 0..n {
                    s += self.get(l, i, j, k) * x[i] * x[k];
                }
            }
            s
        })
    }

    pub fn sectional(&self, g: &DMatrix<f64>, u: &[f64], v: &[f64]) -> Result<f64> {
        let (e1, e2) = orthonormal_pair(g, u, v)?;
        let r = DVector::from_vec(self.apply(e1.as_slice(), e2.as_slice(), e2.as_slice()));
        Ok(e1.dot(&(g * r)))
    }
}

/// g-orthonormal basis of span{u, v}; fails when the vectors are (nearly)
/// parallel.
fn orthonormal_pair(g: &DMatrix<f64>, u: &[f64], v: &[f64]) -> Result<(DVector<f64>, DVector<f64>)> {
    let u = DVector::from_column_slice(u);
    let v = DVector::from_column_slice(v);
    let ip = |a: &DVector<f64>, b: &DVector<f64>| a.dot(&(g * b));
    let nu = ip(&u, &u).sqrt();
    let nv = ip(&v, &v).sqrt();
    if !(nu > 0.0 && nv > 0.0) {
        return Err(Error::DegeneratePlane);
    }
    let e1 = u / nu;
    let w = &v - &e1 * ip(&e1, &v);
    let nw = ip(&w, &w).sqrt();
    if !(nw > 1e-7 * nv) {
        return Err(Error::DegeneratePlane);
    }
    Ok((e1, w / nw))
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::PI;

    fn polar() -> MetricField {
        MetricField::new(&["q1", "q2"], &[vec!["1".into(), "0".into()], vec!["0".into(), "q1^2".into()]]).unwrap()
    }

    #[test]
    fn flat_metric_has_no_curvature() {
        let m = MetricField::euclidean(3);
        let q = [0.3, -1.0, 2.0];
        let gamma = m.christoffel(&q).unwrap();
        let riem = m.riemann(&q).unwrap();
        for a in 0..3 {
            for b in 0..3 {
                for c in 0..3 {
                    assert_eq!(gamma.get(a, b, c), 0.0);
                    for d in 0..3 {
                        assert!(riem.get(a, b, c, d).abs() < 1e-8);
                    }
                }
            }
        }
        assert_eq!(m.sectional(&q, &[1.0, 0.0, 0.0], &[0.3, 1.0, 0.0]).unwrap(), 0.0);
    }

    #[test]
    fn polar_christoffels() {
        let gamma = polar().christoffel(&[2.0, 0.7]).unwrap();
        assert!((gamma.get(0, 1, 1) + 2.0).abs() < 1e-14);
        assert!((gamma.get(1, 0, 1) - 0.5).abs() < 1e-14);
        assert!((gamma.get(1, 1, 0) - 0.5).abs() < 1e-14);
        assert_eq!(gamma.get(0, 0, 0), 0.0);
        assert_eq!(gamma.get(1, 1, 1), 0.0);
        assert_eq!(gamma.get(0, 0, 1), 0.0);
        assert_eq!(gamma.get(1, 0, 0), 0.0);
    }

    #[test]
    fn polar_christoffels_match_finite_differences() {
        let m = polar();
        let q = [2.0, 0.7];
        let gamma = m.christoffel(&q).unwrap();
        let h = 1e-4;
        let dg = |l: usize| {
            let mut qp = q;
            let mut qm = q;
            qp[l] += h;
            qm[l] -= h;
            (m.matrix(&qp).unwrap() - m.matrix(&qm).unwrap()) / (2.0 * h)
        };
        let d = [dg(0), dg(1)];
        let ginv = m.matrix(&q).unwrap().try_inverse().unwrap();
        for k in 0..2 {
            for i in 0..2 {
                for j in 0..2 {
                    let mut s = 0.0;
                    for l in 0..2 {
                        s += 0.5 * ginv[(k, l)] * (d[i][(j, l)] + d[j][(i, l)] - d[l][(i, j)]);
                    }
                    assert!((s - gamma.get(k, i, j)).abs() < 1e-7);
                }
            }
        }
    }

    #[test]
    fn sphere_curvature_and_christoffel() {
        let m = MetricField::round_sphere();
        let gamma = m.christoffel(&[PI / 4.0, 0.0]).unwrap();
        assert!((gamma.get(0, 1, 1) + 0.5).abs() < 1e-14);
        let k = m.sectional(&[PI / 3.0, 0.2], &[1.0, 0.0], &[0.0, 1.0]).unwrap();
        assert!((k - 1.0).abs() < 1e-12);
        let est = m.max_sectional(&[PI / 3.0, 0.2], 0, 0).unwrap();
        assert!(est.exact && (est.value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn plane_independence_in_two_dimensions() {
        let m = MetricField::round_sphere();
        let q = [1.1, 0.0];
        let a = m.sectional(&q, &[1.0, 0.0], &[0.0, 1.0]).unwrap();
        let b = m.sectional(&q, &[0.3, 2.0], &[-1.0, 0.5]).unwrap();
        assert!((a - b).abs() < 1e-12);
        assert!(matches!(m.sectional(&q, &[1.0, 2.0], &[2.0, 4.0]), Err(Error::DegeneratePlane)));
    }

    #[test]
    fn non_positive_metric_is_rejected() {
        let m = MetricField::new(&["q1"], &[vec!["q1".into()]]).unwrap();
        assert!(matches!(m.matrix(&[-1.0]), Err(Error::MetricNotPositiveDefinite(_))));
        assert!(matches!(m.christoffel(&[0.0]), Err(Error::MetricNotPositiveDefinite(_))));
    }

    #[test]
    fn asymmetric_entries_rejected() {
        let r = MetricField::new(&["a", "b"], &[vec!["1".into(), "a".into()], vec!["b".into(), "1".into()]]);
        assert!(matches!(r, Err(Error::InvalidModel(_))));
    }

    #[test]
    fn three_sphere_sampled_maximum() {
        // S³ in hyperspherical coordinates has K ≡ 1.
        let rows = [
            vec!["1".into(), "0".into(), "0".into()],
            vec!["0".into(), "sin(a)^2".into(), "0".into()],
            vec!["0".into(), "0".into(), "sin(a)^2*sin(b)^2".into()],
        ];
        let m = MetricField::new(&["a", "b", "c"], &rows).unwrap();
        let est = m.max_sectional(&[1.0, 0.8, 0.1], 16, 7).unwrap();
        assert!(!est.exact);
        assert!((est.value - 1.0).abs() < 1e-9, "{est:?}");
    }

    #[test]
    fn covariant_hessian_flat_quadratic() {
        let m = MetricField::euclidean(2);
        let u = Expression::parse("(q1^2 + q2^2)/2", &["q1", "q2"]).unwrap();
        let h = m.covariant_hessian(&u, &[0.4, -1.2]).unwrap();
        assert!((h - DMatrix::identity(2, 2)).norm() < 1e-15);
        let norm = m.gradient_norm(&u, &[0.4, -1.2]).unwrap();
        assert!((norm - (0.16f64 + 1.44).sqrt()).abs() < 1e-15);
        let zero = Expression::parse("0", &["q1", "q2"]).unwrap();
        assert_eq!(m.covariant_hessian(&zero, &[0.4, -1.2]).unwrap().norm(), 0.0);
        assert_eq!(m.gradient_norm(&zero, &[0.4, -1.2]).unwrap(), 0.0);
    }
}
