use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};
use crate::expr::Jet;
use crate::models::{Family, HamiltonianModel, MetricField};

/// Random planes tried per point when `n ≥ 3`.
const PLANE_SAMPLES: usize = 64;

/// The Anosov-domain inequality
/// `‖∇²U‖ + (3/(2(c−U)) + |κ|)‖∇U‖² < 2|κ|(c−U)` at one point, with `κ` the
/// largest sectional curvature.
#[derive(Debug, Clone, PartialEq)]
pub struct DomainVerdict {
    pub q: Vec<f64>,
    pub c: f64,
    pub kappa: f64,
    /// False when `κ` was estimated by sampling planes.
    pub kappa_exact: bool,
    pub potential: f64,
    pub hessian_norm: f64,
    pub gradient_norm: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub inside: bool,
}

fn metric_of(model: &HamiltonianModel) -> Result<MetricField> {
    match model.family() {
        Family::Geodesic | Family::MechanicalOnManifold => Ok(model.metric().expect("metric family").clone()),
        Family::Natural => Ok(MetricField::euclidean(model.dim())),
        Family::Custom => Err(Error::UnsupportedFamily(Family::Custom.name())),
    }
}

/// Evaluates the inequality at `q` for energy `c`. `seed` fixes the planes
/// sampled for `κ` when `n ≥ 3`.
pub fn check_domain(model: &HamiltonianModel, q: &[f64], c: f64, seed: u64) -> Result<DomainVerdict> {
    let metric = metric_of(model)?;
    let n = metric.dim();
    if q.len() != n {
        return Err(Error::Dimension { expected: n, found: q.len() });
    }
    if n < 2 {
        return Err(Error::InvalidArgument("sectional curvature needs n >= 2".into()));
    }
    let local = metric.local(q)?;
    let u = model.potential_jet(q)?.unwrap_or_else(|| Jet::constant(0.0, n));
    if c <= u.value() {
        return Err(Error::BelowPotential { c, potential: u.value() });
    }
    let estimate = metric.max_sectional(q, PLANE_SAMPLES, seed)?;
    let kappa = estimate.value;
    let hessian_norm = local.form_operator_norm(&local.covariant_hessian(&u));
    let gradient_norm = local.covector_norm(&u.gradient_vector());
    let kinetic = c - u.value();
    let lhs = hessian_norm + (3.0 / (2.0 * kinetic) + kappa.abs()) * gradient_norm * gradient_norm;
    let rhs = 2.0 * kappa.abs() * kinetic;
    Ok(DomainVerdict {
        q: q.to_vec(),
        c,
        kappa,
        kappa_exact: estimate.exact,
        potential: u.value(),
        hessian_norm,
        gradient_norm,
        lhs,
        rhs,
        inside: kappa < 0.0 && lhs < rhs,
    })
}

#[derive(Debug)]
pub struct DomainSweep {
    pub c: f64,
    /// One entry per grid point, in grid order.
    pub verdicts: Vec<Result<DomainVerdict>>,
}

impl DomainSweep {
    /// Fraction of grid points inside; points with errors count as outside.
    pub fn inside_fraction(&self) -> f64 {
        if self.verdicts.is_empty() {
            return 0.0;
        }
        let inside = self.verdicts.iter().filter(|v| v.as_ref().is_ok_and(|v| v.inside)).count();
        inside as f64 / self.verdicts.len() as f64
    }

    pub fn errors(&self) -> usize {
        self.verdicts.iter().filter(|v| v.is_err()).count()
    }
}

/// Verdicts over a configuration grid. Per-point failures are kept, not
/// propagated.
pub fn sweep_domain(model: &HamiltonianModel, grid: &[Vec<f64>], c: f64, seed: u64) -> DomainSweep {
    DomainSweep { c, verdicts: grid.iter().map(|q| check_domain(model, q, c, seed)).collect() }
}

/// Inside fraction as a function of the energy.
#[derive(Debug, Clone, PartialEq)]
pub struct FractionReport {
    /// `(c, fraction)` sorted by `c`.
    pub fractions: Vec<(f64, f64)>,
    pub non_decreasing: bool,
    /// Smallest tested `c` from which every tested energy has the whole grid
    /// inside. An empirical threshold on this grid only.
    pub full_from: Option<f64>,
}

pub fn inside_fraction_report(sweeps: &[DomainSweep]) -> FractionReport {
    let mut fractions: Vec<(f64, f64)> = sweeps.iter().map(|s| (s.c, s.inside_fraction())).collect();
    fractions.sort_by(|a, b| a.0.total_cmp(&b.0));
    let non_decreasing = fractions.windows(2).all(|w| w[1].1 >= w[0].1);
    let mut full_from = None;
    for (c, f) in fractions.iter().rev() {
        if *f < 1.0 {
            break;
        }
        full_from = Some(*c);
    }
    FractionReport { fractions, non_decreasing, full_from }
}

impl fmt::Display for DomainVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "q = {:?}, c = {}: kappa = {}{}, lhs = {}, rhs = {}, inside = {}",
            self.q,
            self.c,
            self.kappa,
            if self.kappa_exact { "" } else { " (sampled)" },
            self.lhs,
            self.rhs,
            super::yes(self.inside)
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::Expression;
    use crate::models::SurfaceOfRevolution;
    use alloc::string::ToString;
    use alloc::vec;

    fn hyperboloid(u: Option<&str>) -> HamiltonianModel {
        let metric = SurfaceOfRevolution::hyperboloid().metric();
        match u {
            None => HamiltonianModel::geodesic(metric),
            Some(u) => {
                let e = Expression::parse(u, &SurfaceOfRevolution::coords()).unwrap();
                HamiltonianModel::mechanical(metric, e).unwrap()
            }
        }
    }

    #[test]
    fn free_hyperboloid_waist() {
        let v = check_domain(&hyperboloid(None), &[0.0, 0.0], 1.0, 0).unwrap();
        assert!((v.kappa + 1.0).abs() < 1e-12);
        assert_eq!(v.lhs, 0.0);
        assert!((v.rhs - 2.0).abs() < 1e-12);
        assert!(v.inside && v.kappa_exact);
    }

    #[test]
    fn tilted_potential_by_hand() {
        let v = check_domain(&hyperboloid(Some("0.1*z")), &[0.0, 0.0], 1.0, 0).unwrap();
        // At the waist g = I, Γ = 0, so ∇U = (0.1, 0) and ∇²U = 0.
        let lhs = 0.0 + (3.0 / 2.0 + 1.0) * 0.01;
        assert!((v.lhs - lhs).abs() < 1e-12 && (v.rhs - 2.0).abs() < 1e-12 && v.inside);
    }

    #[test]
    fn sphere_and_flat_are_outside() {
        let sphere = HamiltonianModel::geodesic(MetricField::round_sphere());
        assert!(!check_domain(&sphere, &[1.0, 0.0], 1.0, 0).unwrap().inside);
        let coords = ["x".to_string(), "y".to_string()];
        let flat = HamiltonianModel::natural(Expression::parse("x^2+y", &coords).unwrap());
        assert!(!check_domain(&flat, &[0.3, 0.1], 5.0, 0).unwrap().inside);
    }

    #[test]
    fn below_potential() {
        let err = check_domain(&hyperboloid(Some("z^2")), &[2.0, 0.0], 1.0, 0).unwrap_err();
        assert!(matches!(err, Error::BelowPotential { .. }));
    }

    #[test]
    fn energy_sweep() {
        let m = hyperboloid(Some("z^2"));
        let grid: Vec<Vec<f64>> = crate::fd::linspace(-1.0, 1.0, 21).into_iter().map(|z| vec![z, 0.0]).collect();
        let sweeps: Vec<DomainSweep> = [2.0, 5.0, 10.0].iter().map(|&c| sweep_domain(&m, &grid, c, 0)).collect();
        let report = inside_fraction_report(&sweeps);
        assert!(report.non_decreasing, "{report:?}");
        assert!(report.fractions[2].1 >= report.fractions[0].1);
    }
}
