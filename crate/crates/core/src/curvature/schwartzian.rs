use alloc::vec::Vec;

use nalgebra::DMatrix;

use super::{CurvatureData, Method, CROSS_TOL};
use crate::error::{Error, Result};
use crate::fd::{apply_seven, richardson, SEVEN_POINT, SEVEN_POINT_ORDER};
use crate::flow::{variational_flow, Controls, VariationalFrame};
use crate::models::{HamiltonianModel, PhasePoint};

use super::gform::GForm;

/// Factor between the matrix Schwartzian of the Jacobi-curve graph
/// [`jacobi_graph`] and `R`. Pinned by the projector oracle in the tests.
pub const KAPPA_CAL: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchwartzianControls {
    /// Sampling step; `None` picks `1e-2 / ‖D_x h⃗‖`.
    pub dt: Option<f64>,
    /// Number of grids (spacings `dt, 2dt, 4dt, …`) fed to Richardson
    /// extrapolation.
    pub richardson_levels: usize,
    pub integrator: Controls,
}

impl Default for SchwartzianControls {
    fn default() -> Self {
        SchwartzianControls {
            dt: None,
            richardson_levels: 2,
            integrator: Controls::with_tolerance(1e-13, 1e-15),
        }
    }
}

/// Graph of the Jacobi curve `t ↦ (e^{th⃗})_*⁻¹ Δ` over the vertical
/// subspace at `x`: the matrix `−Sᵀ D⁻ᵀ` with `S = ∂q/∂p₀` and
/// `D = ∂q/∂q₀`.
pub fn jacobi_graph(frame: &VariationalFrame) -> Result<DMatrix<f64>> {
    let d = frame.dq_dq0();
    let dinv = d.try_inverse().ok_or(Error::Domain("∂q/∂q₀ is singular".into()))?;
    Ok(-frame.s().transpose() * dinv.transpose())
}

fn schwartzian(d1: &DMatrix<f64>, d2: &DMatrix<f64>, d3: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let inv = d1.clone().try_inverse().ok_or(Error::NotRegular)?;
    let a = &inv * d2;
    Ok((&inv * d3 * 0.5 - &a * &a * 0.75) * KAPPA_CAL)
}

/// `R` by the matrix Schwartzian `½Ṡ⁻¹S⃛ − ¾(Ṡ⁻¹S̈)²` of the Jacobi-curve
/// graph, with derivatives at `t = 0` from 7-point stencils on nested grids
/// and Richardson extrapolation.
pub fn curvature_schwartzian(
    model: &HamiltonianModel,
    x: &PhasePoint,
    controls: &SchwartzianControls,
) -> Result<CurvatureData> {
    let g = GForm::from_matrix(model.fiber_hessian(x)?);
    if !g.is_regular() {
        return Err(Error::NotRegular);
    }
    let levels = controls.richardson_levels.max(1);
    let dt = match controls.dt {
        Some(dt) if dt > 0.0 && dt.is_finite() => dt,
        Some(_) => return Err(Error::InvalidArgument("Schwartzian step must be positive".into())),
        None => 1e-2 / model.field_jacobian(x)?.norm().clamp(1e-300, 1e300),
    };
    let m = 3 * (1usize << (levels - 1));
    let ks: Vec<i64> = (-(m as i64)..=m as i64).collect();
    let times: Vec<f64> = ks.iter().map(|&k| k as f64 * dt).collect();
    let frames = variational_flow(model, x, &times, &controls.integrator)?;
    let graphs = frames.iter().map(jacobi_graph).collect::<Result<Vec<_>>>()?;

    // est[level][order-1] = derivative on the grid with spacing 2^level·dt.
    let est: Vec<[DMatrix<f64>; 3]> = (0..levels)
        .map(|level| {
            let stride = 1usize << level;
            let h = dt * stride as f64;
            let samples: Vec<DMatrix<f64>> = (0..7).map(|j| graphs[m + (j * stride) - 3 * stride].clone()).collect();
            [
                apply_seven(&SEVEN_POINT[0], &samples) / h,
                apply_seven(&SEVEN_POINT[1], &samples) / (h * h),
                apply_seven(&SEVEN_POINT[2], &samples) / (h * h * h),
            ]
        })
        .collect();

    // Neville table over levels; `best[k]` uses k+1 grids.
    let mut table = est.clone();
    let mut best = alloc::vec![table[0].clone()];
    for round in 1..levels {
        let mut next = Vec::with_capacity(table.len() - 1);
        for j in 0..table.len() - 1 {
            let combined: [DMatrix<f64>; 3] = core::array::from_fn(|o| {
                let order = SEVEN_POINT_ORDER[o] + 2 * (round as i32 - 1);
                table[j][o].zip_map(&table[j + 1][o], |f, c| richardson(f, c, order))
            });
            next.push(combined);
        }
        table = next;
        best.push(table[0].clone());
    }
    let last = best.last().expect("at least one level");
    let r = schwartzian(&last[0], &last[1], &last[2])?;
    if best.len() >= 2 {
        let prev = &best[best.len() - 2];
        let r_prev = schwartzian(&prev[0], &prev[1], &prev[2])?;
        let spread = (&r - r_prev).norm() / r.norm().max(1.0);
        if spread > 10.0 * CROSS_TOL {
            return Err(Error::RichardsonFailed { spread });
        }
    }
    Ok(CurvatureData::assemble(r, g.matrix, Method::Schwartzian))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curvature::curvature_closed_form;
    use crate::expr::Expression;
    use crate::models::MetricField;
    use alloc::string::ToString;
    use alloc::vec;

    fn natural(u: &str) -> HamiltonianModel {
        HamiltonianModel::natural(Expression::parse(u, &["q".to_string()]).unwrap())
    }

    #[test]
    fn free_particle_is_flat() {
        let c = curvature_schwartzian(&natural("0"), &PhasePoint::new(vec![1.0], vec![0.0]).unwrap(), &Default::default())
            .unwrap();
        assert!(c.r[(0, 0)].abs() < 1e-8);
    }

    #[test]
    fn pendulum_matches_hessian() {
        let m = natural("cos(q)");
        for q in [-2.5, -0.7, 0.0, 0.9, 1.5, 3.0] {
            let x = PhasePoint::new(vec![0.8], vec![q]).unwrap();
            let c = curvature_schwartzian(&m, &x, &Default::default()).unwrap();
            assert!((c.r[(0, 0)] + q.cos()).abs() < 1e-7, "q = {q}: {}", c.r[(0, 0)]);
        }
    }

    #[test]
    fn sphere_unit_speed() {
        let m = HamiltonianModel::geodesic(MetricField::round_sphere());
        let q = [1.1, 0.3];
        let g = MetricField::round_sphere().matrix(&q).unwrap();
        let p = &g * nalgebra::DVector::from_column_slice(&[0.6, 0.8 / q[0].sin()]);
        let x = PhasePoint::new(p.as_slice().to_vec(), q.to_vec()).unwrap();
        let c = curvature_schwartzian(&m, &x, &Default::default()).unwrap();
        let ev = c.eigenvalues.unwrap();
        assert!(ev[0].abs() < 1e-5 && (ev[1] - 1.0).abs() < 1e-5, "{ev:?}");
        let closed = curvature_closed_form(&m, &x).unwrap();
        assert!((&c.r - &closed.r).norm() < 1e-5);
    }
}
