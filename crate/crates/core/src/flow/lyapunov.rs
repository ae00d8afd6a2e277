use alloc::vec::Vec;

use nalgebra::DMatrix;
use num_traits::Float;

use super::ode::Controls;
use super::variational::propagate;
use crate::error::{Error, Result};
use crate::models::{HamiltonianModel, PhasePoint};

const MIN_RENORMALIZATIONS: usize = 100;
/// `|Σλ|` above which the spectrum is flagged (the flow preserves volume).
pub const SUM_TOL: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq)]
pub struct LyapunovSpectrum {
    /// `2n` exponents, largest first.
    pub exponents: Vec<f64>,
    pub sum: f64,
    /// Set when `|sum|` exceeds [`SUM_TOL`].
    pub flagged: bool,
    pub renormalizations: usize,
}

/// Benettin's method: the tangent frame is advanced over intervals of
/// length `renorm_interval` and re-orthonormalized by QR, accumulating the
/// logarithms of the diagonal of `R`.
pub fn lyapunov_exponents(
    model: &HamiltonianModel,
    x0: &PhasePoint,
    horizon: f64,
    renorm_interval: f64,
    controls: &Controls,
) -> Result<LyapunovSpectrum> {
    if !(renorm_interval > 0.0 && horizon > 0.0) {
        return Err(Error::InvalidArgument("horizon and renormalization interval must be positive".into()));
    }
    let count = (horizon / renorm_interval).floor() as usize;
    if count < MIN_RENORMALIZATIONS {
        return Err(Error::HorizonTooShort { renormalizations: count });
    }
    let d = 2 * model.dim();
    let mut x = x0.clone();
    let mut frame = DMatrix::<f64>::identity(d, d);
    let mut sums = alloc::vec![0.0; d];
    for _ in 0..count {
        let (next, advanced) = propagate(model, &x, &frame, renorm_interval, controls)?;
        let qr = advanced.qr();
        let r = qr.r();
        let mut q = qr.q();
        for i in 0..d {
            let rii = r[(i, i)];
            if rii == 0.0 || !rii.is_finite() {
                return Err(Error::Domain("tangent frame collapsed".into()));
            }
            sums[i] += rii.abs().ln();
            if rii < 0.0 {
                q.column_mut(i).neg_mut();
            }
        }
        x = next;
        frame = q;
    }
    let total = count as f64 * renorm_interval;
    let mut exponents: Vec<f64> = sums.iter().map(|s| s / total).collect();
    exponents.sort_by(|a, b| b.total_cmp(a));
    let sum: f64 = exponents.iter().sum();
    Ok(LyapunovSpectrum { exponents, sum, flagged: sum.abs() > SUM_TOL, renormalizations: count })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::Expression;
    use crate::models::SurfaceOfRevolution;
    use alloc::string::ToString;
    use alloc::vec;
    use core::f64::consts::PI;

    fn natural(u: &str) -> HamiltonianModel {
        HamiltonianModel::natural(Expression::parse(u, &["q".to_string()]).unwrap())
    }

    fn pt(p: f64, q: f64) -> PhasePoint {
        PhasePoint::new(vec![p], vec![q]).unwrap()
    }

    #[test]
    fn integrable_flows_have_zero_exponents() {
        for (u, horizon) in [("0.5*q^2", 1000.0), ("0", 2000.0)] {
            let spec = lyapunov_exponents(&natural(u), &pt(1.0, 0.0), horizon, horizon / 200.0, &Controls::default()).unwrap();
            assert!(spec.exponents.iter().all(|l| l.abs() <= 5e-3), "{u}: {:?}", spec.exponents);
            assert!(!spec.flagged);
        }
    }

    #[test]
    fn saddle_exponents_pair_up() {
        let spec = lyapunov_exponents(&natural("-0.5*q^2"), &pt(-1.0, 1.0), 100.0, 0.5, &Controls::default()).unwrap();
        assert!((spec.exponents[0] - 1.0).abs() < 1e-2, "{:?}", spec.exponents);
        assert!((spec.exponents[0] + spec.exponents[1]).abs() < 1e-2);
    }

    #[test]
    fn hyperboloid_waist_rate() {
        let m = HamiltonianModel::geodesic(SurfaceOfRevolution::hyperboloid().metric())
            .with_periods(vec![None, Some(2.0 * PI)])
            .unwrap();
        let x0 = PhasePoint::new(vec![0.0, 1.0], vec![0.0, 0.0]).unwrap();
        let spec = lyapunov_exponents(&m, &x0, 40.0, 0.2, &Controls::default()).unwrap();
        assert!((spec.exponents[0] - 1.0).abs() < 0.1, "{:?}", spec.exponents);
        assert!((spec.exponents[0] + spec.exponents[3]).abs() < 1e-2);
        assert!((spec.exponents[1] + spec.exponents[2]).abs() < 1e-2);
    }

    #[test]
    fn short_horizon_is_rejected() {
        let err = lyapunov_exponents(&natural("0"), &pt(1.0, 0.0), 5.0, 0.1, &Controls::default()).unwrap_err();
        assert!(matches!(err, Error::HorizonTooShort { renormalizations: 50 }));
    }
}
