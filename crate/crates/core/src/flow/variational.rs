use alloc::vec::Vec;

use nalgebra::DMatrix;

use super::ode::{self, Controls, Flow};
use super::stack;
use crate::error::{Error, Result};
use crate::models::{HamiltonianModel, PhasePoint};

/// Linearized flow at time `t` along the trajectory through `x0`.
#[derive(Debug, Clone, PartialEq)]
pub struct VariationalFrame {
    pub t: f64,
    /// Base point `e^{th⃗}(x0)`.
    pub x: PhasePoint,
    /// Derivative of the time-`t` flow map at `x0`, rows and columns
    /// ordered `(p, q)`.
    pub phi: DMatrix<f64>,
}

impl VariationalFrame {
    fn n(&self) -> usize {
        self.phi.nrows() / 2
    }

    /// `S = ∂q(t)/∂p₀`.
    pub fn s(&self) -> DMatrix<f64> {
        let n = self.n();
        self.phi.view((n, 0), (n, n)).into_owned()
    }

    /// `∂q(t)/∂q₀`.
    pub fn dq_dq0(&self) -> DMatrix<f64> {
        let n = self.n();
        self.phi.view((n, n), (n, n)).into_owned()
    }
}

/// Right-hand side of the augmented system `(x, Φ)` with `Φ` stored column
/// major after the `2n` state entries.
fn augmented_rhs(model: &HamiltonianModel, y: &[f64], dy: &mut [f64]) -> Result<()> {
    let d = 2 * model.dim();
    let x = PhasePoint::from_slice(&y[..d])?;
    let (f, a) = model.field_and_jacobian(&x)?;
    dy[..d].copy_from_slice(f.as_slice());
    let cols = (y.len() - d) / d;
    for c in 0..cols {
        let col = &y[d + c * d..d + (c + 1) * d];
        for r in 0..d {
            let mut acc = 0.0;
            for k in 0..d {
                acc += a[(r, k)] * col[k];
            }
            dy[d + c * d + r] = acc;
        }
    }
    Ok(())
}

fn pack(x: &PhasePoint, phi: &DMatrix<f64>) -> Vec<f64> {
    let mut y = stack(x);
    y.extend_from_slice(phi.as_slice());
    y
}

fn unpack(y: &[f64], d: usize) -> Result<(PhasePoint, DMatrix<f64>)> {
    let cols = (y.len() - d) / d;
    Ok((PhasePoint::from_slice(&y[..d])?, DMatrix::from_column_slice(d, cols, &y[d..])))
}

/// Advances `(x, Φ)` by time `t`, where `Φ` is any `2n × k` block of
/// tangent vectors at `x`. Returns `e^{th⃗}(x)` and `D e^{th⃗} · Φ`.
pub fn propagate(
    model: &HamiltonianModel,
    x: &PhasePoint,
    phi: &DMatrix<f64>,
    t: f64,
    controls: &Controls,
) -> Result<(PhasePoint, DMatrix<f64>)> {
    let d = 2 * model.dim();
    if x.dim() != model.dim() {
        return Err(Error::Dimension { expected: model.dim(), found: x.dim() });
    }
    if phi.nrows() != d {
        return Err(Error::Dimension { expected: d, found: phi.nrows() });
    }
    let out = ode::integrate(
        |_, y, dy| augmented_rhs(model, y, dy),
        0.0,
        &pack(x, phi),
        t,
        &[],
        controls,
        |_, _| Ok(Flow::Continue),
    )?;
    unpack(&out.y, d)
}

/// Variational frames at the requested `times` (any order, either sign),
/// returned in the order given. Negative times are reached by a backward
/// run from `x0`.
pub fn variational_flow(
    model: &HamiltonianModel,
    x0: &PhasePoint,
    times: &[f64],
    controls: &Controls,
) -> Result<Vec<VariationalFrame>> {
    let d = 2 * model.dim();
    if x0.dim() != model.dim() {
        return Err(Error::Dimension { expected: model.dim(), found: x0.dim() });
    }
    if times.iter().any(|t| !t.is_finite()) {
        return Err(Error::InvalidArgument("non-finite frame time".into()));
    }
    let y0 = pack(x0, &DMatrix::identity(d, d));
    let mut frames: Vec<Option<VariationalFrame>> = times.iter().map(|_| None).collect();
    for dir in [1.0, -1.0] {
        let mut order: Vec<usize> = (0..times.len()).filter(|&i| dir * times[i] > 0.0).collect();
        order.sort_by(|&a, &b| (dir * times[a]).total_cmp(&(dir * times[b])));
        let Some(&last) = order.last() else { continue };
        let mut stops: Vec<f64> = order.iter().map(|&i| times[i]).collect();
        stops.dedup();
        let mut results: Vec<(f64, Vec<f64>)> = Vec::with_capacity(stops.len());
        ode::integrate(
            |_, y, dy| augmented_rhs(model, y, dy),
            0.0,
            &y0,
            times[last],
            &stops,
            controls,
            |step, y| {
                let t = step.t1();
                if stops.contains(&t) {
                    results.push((t, y.to_vec()));
                }
                Ok(Flow::Continue)
            },
        )?;
        for &i in &order {
            let (_, y) = results
                .iter()
                .find(|(t, _)| *t == times[i])
                .expect("every stop is hit exactly");
            let (x, phi) = unpack(y, d)?;
            frames[i] = Some(VariationalFrame { t: times[i], x, phi });
        }
    }
    Ok(frames
        .into_iter()
        .map(|f| f.unwrap_or_else(|| VariationalFrame { t: 0.0, x: x0.clone(), phi: DMatrix::identity(d, d) }))
        .collect())
}
