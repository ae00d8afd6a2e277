//! Shared test fixtures and the brute-force projector oracle.
//!
//! The oracle deliberately avoids the production integrator and the
//! Schwartzian: it integrates the variational equations with fixed-step RK4
//! and differentiates the projector between two Jacobi-curve points.

#![allow(dead_code)]

use std::f64::consts::PI;

use hamcurv_core::expr::Expression;
use hamcurv_core::{HamiltonianModel, MetricField, PhasePoint, SurfaceOfRevolution};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn names(coords: &[&str]) -> Vec<String> {
    coords.iter().map(|c| c.to_string()).collect()
}

pub fn natural(u: &str, coords: &[&str]) -> HamiltonianModel {
    HamiltonianModel::natural(Expression::parse(u, &names(coords)).unwrap())
}

pub fn pendulum() -> HamiltonianModel {
    natural("cos(q)", &["q"])
}

pub fn sphere() -> HamiltonianModel {
    HamiltonianModel::geodesic(MetricField::round_sphere()).with_periods(vec![None, Some(2.0 * PI)]).unwrap()
}

pub fn hyperboloid() -> HamiltonianModel {
    HamiltonianModel::geodesic(SurfaceOfRevolution::hyperboloid().metric())
        .with_periods(vec![None, Some(2.0 * PI)])
        .unwrap()
}

pub fn tilted_hyperboloid() -> HamiltonianModel {
    let u = Expression::parse("0.1*z", &SurfaceOfRevolution::coords()).unwrap();
    HamiltonianModel::mechanical(SurfaceOfRevolution::hyperboloid().metric(), u)
        .unwrap()
        .with_periods(vec![None, Some(2.0 * PI)])
        .unwrap()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Point with `q` in `q_box` and momentum scaled to kinetic energy ½ (unit
/// speed) in the metric of the model, or uniform in `[-1, 1]` for natural
/// systems.
pub fn sample_point(model: &HamiltonianModel, rng: &mut ChaCha8Rng, q_box: &[(f64, f64)]) -> PhasePoint {
    let q: Vec<f64> = q_box.iter().map(|(a, b)| rng.gen_range(*a..*b)).collect();
    let n = q.len();
    let mut p: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    if let Some(metric) = model.metric() {
        let ginv = metric.matrix(&q).unwrap().try_inverse().unwrap();
        let pv = DVector::from_column_slice(&p);
        let speed = pv.dot(&(&ginv * &pv)).sqrt();
        p.iter_mut().for_each(|v| *v /= speed);
    }
    PhasePoint::new(p, q).unwrap()
}

/// `‖a − b‖ / ‖b‖` (absolute when `b = 0`).
pub fn rel_err(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    let scale = b.norm();
    if scale == 0.0 {
        (a - b).norm()
    } else {
        (a - b).norm() / scale
    }
}

/// Fixed-step RK4 for the variational equations `Φ̇ = A(x)Φ`, `ẋ = h⃗(x)`.
pub fn rk4_flow(model: &HamiltonianModel, x0: &PhasePoint, t: f64) -> DMatrix<f64> {
    let d = 2 * model.dim();
    if t == 0.0 {
        return DMatrix::identity(d, d);
    }
    let steps = ((t.abs() / 2e-4).ceil() as usize).max(1);
    let h = t / steps as f64;
    let rhs = |x: &DVector<f64>, phi: &DMatrix<f64>| {
        let pt = PhasePoint::from_vector(x).unwrap();
        let (f, a) = model.field_and_jacobian(&pt).unwrap();
        (f, a * phi)
    };
    let mut x = x0.to_vector();
    let mut phi = DMatrix::identity(d, d);
    for _ in 0..steps {
        let (k1x, k1p) = rhs(&x, &phi);
        let (k2x, k2p) = rhs(&(&x + &k1x * (h / 2.0)), &(&phi + &k1p * (h / 2.0)));
        let (k3x, k3p) = rhs(&(&x + &k2x * (h / 2.0)), &(&phi + &k2p * (h / 2.0)));
        let (k4x, k4p) = rhs(&(&x + &k3x * h), &(&phi + &k3p * h));
        x += (k1x + k2x * 2.0 + k3x * 2.0 + k4x) * (h / 6.0);
        phi += (k1p + k2p * 2.0 + k3p * 2.0 + k4p) * (h / 6.0);
    }
    phi
}

/// Scalar the oracle's constant term is multiplied by to give `R`.
pub const LEMMA_NORMALIZATION: f64 = 3.0;

/// Brute-force projector oracle at `x`.
///
/// `J(t) = (e^{th⃗})_*⁻¹ Δ` is spanned by the columns of `Φ(t)⁻¹ [I; 0]`.
/// `P(t, τ)` sends a vertical vector `(a, 0)` to the `p`-part of its
/// component along `J(τ)` in the splitting `J(t) ⊕ J(τ)`. The mixed
/// derivative `E(t) = −∂_t∂_τ P(t, τ)|_{τ=0}` behaves like `t⁻²·1 + c₀ + O(t)`;
/// `c₀` is recovered by a polynomial fit of `E(t) − t⁻²` on `t ∈ [0.1, 0.4]`.
pub struct ProjectorOracle<'a> {
    model: &'a HamiltonianModel,
    x: PhasePoint,
    cache: std::collections::HashMap<u64, DMatrix<f64>>,
}

impl<'a> ProjectorOracle<'a> {
    pub fn new(model: &'a HamiltonianModel, x: PhasePoint) -> Self {
        ProjectorOracle { model, x, cache: Default::default() }
    }

    fn curve(&mut self, t: f64) -> DMatrix<f64> {
        let key = t.to_bits();
        if let Some(j) = self.cache.get(&key) {
            return j.clone();
        }
        let n = self.model.dim();
        let phi = rk4_flow(self.model, &self.x, t);
        let mut vertical = DMatrix::zeros(2 * n, n);
        vertical.view_mut((0, 0), (n, n)).fill_with_identity();
        let j = phi.lu().solve(&vertical).expect("flow map is invertible");
        self.cache.insert(key, j.clone());
        j
    }

    fn projector(&mut self, t: f64, tau: f64) -> DMatrix<f64> {
        let n = self.model.dim();
        let jt = self.curve(t);
        let jtau = self.curve(tau);
        let mut b = DMatrix::zeros(2 * n, 2 * n);
        b.view_mut((0, 0), (2 * n, n)).copy_from(&jt);
        b.view_mut((0, n), (2 * n, n)).copy_from(&jtau);
        let mut rhs = DMatrix::zeros(2 * n, n);
        rhs.view_mut((0, 0), (n, n)).fill_with_identity();
        let c = b.lu().solve(&rhs).expect("transversal Jacobi-curve points");
        let along = &jtau * c.view((n, 0), (n, n));
        along.view((0, 0), (n, n)).into_owned()
    }

    /// `E(t)` by a tensor-product 4th-order central difference.
    pub fn mixed(&mut self, t: f64, d: f64) -> DMatrix<f64> {
        const W: [(f64, f64); 4] = [(-2.0, 1.0 / 12.0), (-1.0, -8.0 / 12.0), (1.0, 8.0 / 12.0), (2.0, -1.0 / 12.0)];
        let n = self.model.dim();
        let mut acc = DMatrix::zeros(n, n);
        for (a, wa) in W {
            for (b, wb) in W {
                acc += self.projector(t + a * d, b * d) * (wa * wb);
            }
        }
        -acc / (d * d)
    }

    /// Constant term `c₀` of `E(t) − t⁻²`.
    pub fn constant_term(&mut self) -> DMatrix<f64> {
        let n = self.model.dim();
        let ts: Vec<f64> = (0..13).map(|i| 0.1 + 0.3 * i as f64 / 12.0).collect();
        let values: Vec<DMatrix<f64>> = ts
            .iter()
            .map(|&t| {
                // Richardson on the 4th-order stencil removes the d⁴/t⁶ term.
                let fine = self.mixed(t, 5e-4);
                let coarse = self.mixed(t, 1e-3);
                (fine * 16.0 - coarse) / 15.0 - DMatrix::identity(n, n) / (t * t)
            })
            .collect();
        DMatrix::from_fn(n, n, |i, j| {
            let ys: Vec<f64> = values.iter().map(|v| v[(i, j)]).collect();
            polyfit_constant(&ts, &ys, 5)
        })
    }

    /// `R` according to the oracle.
    pub fn curvature(&mut self) -> DMatrix<f64> {
        self.constant_term() * LEMMA_NORMALIZATION
    }
}

/// Least-squares polynomial of the given degree; returns its value at 0.
pub fn polyfit_constant(ts: &[f64], ys: &[f64], degree: usize) -> f64 {
    let a = DMatrix::from_fn(ts.len(), degree + 1, |r, c| ts[r].powi(c as i32));
    let y = DVector::from_column_slice(ys);
    let sol = a.svd(true, true).solve(&y, 1e-14).unwrap();
    sol[0]
}
