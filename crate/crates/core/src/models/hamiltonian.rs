use num_traits::Float;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

use super::{MetricField, PhasePoint};
use crate::error::{Error, Result};
use crate::expr::{Expression, Jet};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    /// `h = ½|p|² + U(q)`.
    Natural,
    /// `h = ½ pᵀ g⁻¹(q) p`.
    Geodesic,
    /// Geodesic kinetic energy plus `U(q)`.
    MechanicalOnManifold,
    /// Arbitrary `h(p, q)`.
    Custom,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::Natural => "natural",
            Family::Geodesic => "geodesic",
            Family::MechanicalOnManifold => "mechanical",
            Family::Custom => "custom",
        }
    }
}

/// A Hamiltonian on `ℝ²ⁿ` with the vertical distribution `span{∂/∂pᵢ}`.
#[derive(Debug, Clone, PartialEq)]
pub struct HamiltonianModel {
    family: Family,
    coords: Vec<String>,
    potential: Option<Expression>,
    metric: Option<MetricField>,
    custom: Option<Expression>,
    periods: Vec<Option<f64>>,
    reversed: bool,
}

impl HamiltonianModel {
    pub fn natural(potential: Expression) -> Self {
        let coords = potential.variables().to_vec();
        let n = coords.len();
        HamiltonianModel {
            family: Family::Natural,
            coords,
            potential: Some(potential),
            metric: None,
            custom: None,
            periods: vec![None; n],
            reversed: false,
        }
    }

    pub fn geodesic(metric: MetricField) -> Self {
        let coords = metric.coords().to_vec();
        let n = coords.len();
        HamiltonianModel {
            family: Family::Geodesic,
            coords,
            potential: None,
            metric: Some(metric),
            custom: None,
            periods: vec![None; n],
            reversed: false,
        }
    }

    pub fn mechanical(metric: MetricField, potential: Expression) -> Result<Self> {
        if potential.variables() != metric.coords() {
            return Err(Error::InvalidModel(format!(
                "potential variables {:?} differ from metric coordinates {:?}",
                potential.variables(),
                metric.coords()
            )));
        }
        let mut m = HamiltonianModel::geodesic(metric);
        m.family = Family::MechanicalOnManifold;
        m.potential = Some(potential);
        Ok(m)
    }

    /// `hamiltonian` must declare `2n` variables, momenta first.
    pub fn custom(hamiltonian: Expression) -> Result<Self> {
        let vars = hamiltonian.variables();
        if !vars.len().is_multiple_of(2) {
            return Err(Error::InvalidModel("custom Hamiltonian needs 2n variables (p..., q...)".into()));
        }
        let n = vars.len() / 2;
        Ok(HamiltonianModel {
            family: Family::Custom,
            coords: vars[n..].to_vec(),
            potential: None,
            metric: None,
            custom: Some(hamiltonian),
            periods: vec![None; n],
            reversed: false,
        })
    }

    /// Declares coordinates `qᵢ` that are angles with the given period.
    pub fn with_periods(mut self, periods: Vec<Option<f64>>) -> Result<Self> {
        if periods.len() != self.dim() {
            return Err(Error::Dimension { expected: self.dim(), found: periods.len() });
        }
        if periods.iter().flatten().any(|p| !(*p > 0.0 && p.is_finite())) {
            return Err(Error::InvalidModel("periods must be positive".into()));
        }
        self.periods = periods;
        Ok(self)
    }

    /// The same model with `h` replaced by `−h` (time reversal).
    pub fn reversed(&self) -> Self {
        let mut m = self.clone();
        m.reversed = !m.reversed;
        m
    }

    pub fn is_reversed(&self) -> bool {
        self.reversed
    }

    /// `+1` or `−1` according to time reversal.
    pub fn sign(&self) -> f64 {
        if self.reversed {
            -1.0
        } else {
            1.0
        }
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[String] {
        &self.coords
    }

    pub fn potential(&self) -> Option<&Expression> {
        self.potential.as_ref()
    }

    pub fn metric(&self) -> Option<&MetricField> {
        self.metric.as_ref()
    }

    pub fn periods(&self) -> &[Option<f64>] {
        &self.periods
    }

    fn check(&self, x: &PhasePoint) -> Result<()> {
        if x.dim() != self.dim() {
            return Err(Error::Dimension { expected: self.dim(), found: x.dim() });
        }
        Ok(())
    }

    /// Value, gradient and Hessian of `h` over `(p, q)` at `x`.
    pub fn jet(&self, x: &PhasePoint) -> Result<Jet> {
        self.check(x)?;
        let n = self.dim();
        let dim = 2 * n;
        let q_jets: Vec<Jet> = (0..n).map(|i| Jet::variable(x.q[i], n + i, dim)).collect();
        let mut h = match self.family {
            Family::Custom => {
                let e = self.custom.as_ref().expect("custom family has h");
                let mut point = x.p.clone();
                point.extend_from_slice(&x.q);
                e.eval_jet(&point)?
            }
            _ => {
                let p_jets: Vec<Jet> = (0..n).map(|i| Jet::variable(x.p[i], i, dim)).collect();
                let mut h = Jet::constant(0.0, dim);
                match &self.metric {
                    None => {
                        for pj in &p_jets {
                            h = &h + &(pj * pj).scale(0.5);
                        }
                    }
                    Some(metric) => {
                        metric.matrix(&x.q)?;
                        let ginv = invert_symmetric_jets(&metric.composed_entries(&q_jets)?, n)?;
                        for i in 0..n {
                            for j in 0..n {
                                let term = &(&p_jets[i] * &p_jets[j]) * &ginv[i * n + j];
                                h = &h + &term.scale(0.5);
                            }
                        }
                    }
                }
                if let Some(u) = &self.potential {
                    h = &h + &u.eval_composed(&q_jets)?;
                }
                h
            }
        };
        if self.reversed {
            h = -&h;
        }
        if !h.is_finite() {
            return Err(Error::Domain("Hamiltonian is not finite".into()));
        }
        Ok(h)
    }

    pub fn energy(&self, x: &PhasePoint) -> Result<f64> {
        Ok(self.jet(x)?.value())
    }

    /// `h⃗(x) = (ṗ, q̇) = (−∂h/∂q, ∂h/∂p)`.
    pub fn vector_field(&self, x: &PhasePoint) -> Result<DVector<f64>> {
        let n = self.dim();
        let jet = self.jet(x)?;
        let g = jet.gradient();
        Ok(DVector::from_fn(2 * n, |i, _| if i < n { -g[n + i] } else { g[i - n] }))
    }

    /// Linearization `D_x h⃗ = [[−h_qp, −h_qq], [h_pp, h_pq]]` (rows ṗ, q̇;
    /// columns p, q).
    pub fn field_jacobian(&self, x: &PhasePoint) -> Result<DMatrix<f64>> {
        Ok(jacobian_from_jet(&self.jet(x)?, self.dim()))
    }

    /// Field and linearization from a single jet evaluation.
    pub fn field_and_jacobian(&self, x: &PhasePoint) -> Result<(DVector<f64>, DMatrix<f64>)> {
        let n = self.dim();
        let jet = self.jet(x)?;
        let g = jet.gradient();
        let f = DVector::from_fn(2 * n, |i, _| if i < n { -g[n + i] } else { g[i - n] });
        Ok((f, jacobian_from_jet(&jet, n)))
    }

    /// Fibre Hessian `∂²h/∂p²`.
    pub fn fiber_hessian(&self, x: &PhasePoint) -> Result<DMatrix<f64>> {
        let n = self.dim();
        let jet = self.jet(x)?;
        Ok(DMatrix::from_fn(n, n, |i, j| jet.second(i, j)))
    }

    /// `U(q)` with derivatives over the configuration variables, when the
    /// family has a potential. Not affected by time reversal.
    pub fn potential_jet(&self, q: &[f64]) -> Result<Option<Jet>> {
        self.potential.as_ref().map(|u| u.eval_jet(q)).transpose()
    }

    /// Reduces the `q` components of a displacement modulo the declared
    /// periods into `(−P/2, P/2]`.
    pub fn wrap_displacement(&self, dx: &mut DVector<f64>) {
        let n = self.dim();
        for (i, period) in self.periods.iter().enumerate() {
            if let Some(p) = period {
                let v = dx[n + i];
                dx[n + i] = v - p * (v / p).round();
            }
        }
    }
}

fn jacobian_from_jet(jet: &Jet, n: usize) -> DMatrix<f64> {
    DMatrix::from_fn(2 * n, 2 * n, |r, c| {
        if r < n {
            -jet.second(n + r, c)
        } else {
            jet.second(r - n, c)
        }
    })
}

/// Inverse of a symmetric matrix of jets (given as a packed upper triangle)
/// by Gauss–Jordan elimination with partial pivoting on values.
fn invert_symmetric_jets(upper: &[Jet], n: usize) -> Result<Vec<Jet>> {
    let dim = upper[0].dim();
    let idx = |i: usize, j: usize| {
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        i * n - i * i.saturating_sub(1) / 2 + (j - i)
    };
    let mut a: Vec<Jet> = (0..n * n).map(|k| upper[idx(k / n, k % n)].clone()).collect();
    let mut inv: Vec<Jet> = (0..n * n)
        .map(|k| Jet::constant(if k / n == k % n { 1.0 } else { 0.0 }, dim))
        .collect();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&r, &s| a[r * n + col].value().abs().total_cmp(&a[s * n + col].value().abs()))
            .expect("non-empty range");
        if a[pivot * n + col].value() == 0.0 {
            return Err(Error::Domain("metric is singular".into()));
        }
        if pivot != col {
            for c in 0..n {
                a.swap(pivot * n + c, col * n + c);
                inv.swap(pivot * n + c, col * n + c);
            }
        }
        let rp = a[col * n + col].recip();
        for c in 0..n {
            a[col * n + c] = &a[col * n + c] * &rp;
            inv[col * n + c] = &inv[col * n + c] * &rp;
        }
        for r in 0..n {
            if r == col {
                continue;
            }
            let factor = a[r * n + col].clone();
            for c in 0..n {
                a[r * n + c] = &a[r * n + c] - &(&factor * &a[col * n + c]);
                inv[r * n + c] = &inv[r * n + c] - &(&factor * &inv[col * n + c]);
            }
        }
    }
    Ok(inv)
}
