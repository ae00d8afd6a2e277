use alloc::vec::Vec;

use nalgebra::{Complex, DMatrix, DVector};

use super::ode::{self, Controls, Flow};
use super::variational::propagate;
use super::{field_into, stack};
use crate::error::{Error, Result};
use crate::linalg::{complex_eigenvalues, modulus};
use crate::models::{HamiltonianModel, PhasePoint};

const MAX_ITERATIONS: usize = 40;
const RESIDUAL_TOL: f64 = 1e-10;
/// Largest `|λ − 1|` accepted for the two trivial Floquet multipliers.
pub const TRIVIAL_MULTIPLIER_TOL: f64 = 1e-4;

/// Affine hyperplane `⟨normal, x⟩ = offset` in `(p, q)` coordinates.
///
/// When the normal only involves a single periodic coordinate the section
/// is read modulo that period, so `θ = θ₀` is a proper section of a flow on
/// a cylinder.
#[derive(Debug, Clone, PartialEq)]
pub struct Section {
    pub normal: Vec<f64>,
    pub offset: f64,
}

impl Section {
    pub fn new(normal: Vec<f64>, offset: f64) -> Result<Self> {
        if normal.iter().all(|v| *v == 0.0) || normal.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("section normal must be finite and nonzero".into()));
        }
        Ok(Section { normal, offset })
    }

    /// The section `q_i = value`.
    pub fn coordinate(n: usize, i: usize, value: f64) -> Self {
        let mut normal = alloc::vec![0.0; 2 * n];
        normal[n + i] = 1.0;
        Section { normal, offset: value }
    }

    fn wrap_period(&self, model: &HamiltonianModel) -> Option<f64> {
        let n = model.dim();
        let support: Vec<usize> = (0..2 * n).filter(|&k| self.normal[k] != 0.0).collect();
        match support.as_slice() {
            [k] if *k >= n => model.periods()[*k - n].map(|p| p * self.normal[*k].abs()),
            _ => None,
        }
    }

    /// Signed distance-like value `⟨normal, x⟩ − offset`, wrapped when the
    /// section is periodic.
    pub fn value(&self, model: &HamiltonianModel, x: &[f64]) -> f64 {
        let raw: f64 = self.normal.iter().zip(x).map(|(a, b)| a * b).sum::<f64>() - self.offset;
        match self.wrap_period(model) {
            Some(p) => raw - p * libm_round(raw / p),
            None => raw,
        }
    }
}

fn libm_round(v: f64) -> f64 {
    use num_traits::Float;
    v.round()
}

#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicOrbit {
    pub x0: PhasePoint,
    pub period: f64,
    pub monodromy: DMatrix<f64>,
    /// `|x(T) − x0|`, periodic coordinates wrapped.
    pub residual: f64,
    pub energy: f64,
    pub iterations: usize,
}

struct Event {
    t: f64,
    y: Vec<f64>,
}

/// Upward crossings (in the direction `dir` of the field at the guess) of
/// the section over `[0, limit]`, stopping after `wanted` of them.
fn crossings(
    model: &HamiltonianModel,
    x: &PhasePoint,
    section: &Section,
    dir: f64,
    limit: f64,
    wanted: usize,
    controls: &Controls,
) -> Result<Vec<Event>> {
    let half_period = section.wrap_period(model).map(|p| 0.5 * p);
    // Long steps could carry a periodic coordinate across the section.
    let controls = Controls { max_step: controls.max_step.min(limit / 160.0), ..*controls };
    let mut events = Vec::new();
    let mut prev = stack(x);
    ode::integrate(
        |_, y, dy| field_into(model, y, dy),
        0.0,
        &prev.clone(),
        limit,
        &[],
        &controls,
        |step, y| {
            let s0 = dir * section.value(model, &prev);
            let s1 = dir * section.value(model, y);
            let jump = half_period.is_some_and(|hp| (s1 - s0).abs() > hp);
            if s0 < 0.0 && s1 >= 0.0 && !jump {
                let (mut a, mut b) = (step.t0, step.t1());
                for _ in 0..200 {
                    let m = 0.5 * (a + b);
                    if m == a || m == b {
                        break;
                    }
                    if dir * section.value(model, &step.eval(m)) < 0.0 {
                        a = m;
                    } else {
                        b = m;
                    }
                }
                let t = 0.5 * (a + b);
                events.push(Event { t, y: step.eval(t) });
            }
            prev.copy_from_slice(y);
            Ok(if events.len() >= wanted { Flow::Stop } else { Flow::Continue })
        },
    )?;
    Ok(events)
}

/// Locates a periodic orbit near `guess` by Newton's method on the return
/// to `section`, with the energy held at `h(guess)`.
pub fn find_periodic_orbit(
    model: &HamiltonianModel,
    guess: &PhasePoint,
    period_guess: f64,
    section: &Section,
    controls: &Controls,
) -> Result<PeriodicOrbit> {
    let n = model.dim();
    let d = 2 * n;
    if guess.dim() != n {
        return Err(Error::Dimension { expected: n, found: guess.dim() });
    }
    if section.normal.len() != d {
        return Err(Error::Dimension { expected: d, found: section.normal.len() });
    }
    if !(period_guess > 0.0 && period_guess.is_finite()) {
        return Err(Error::InvalidArgument("period guess must be positive".into()));
    }
    let a = DVector::from_column_slice(&section.normal);
    let f0 = model.vector_field(guess)?;
    let transversality = a.dot(&f0);
    if transversality.abs() <= 1e-12 * a.norm() * f0.norm().max(1.0) {
        return Err(Error::InvalidArgument("guess does not cross the section transversally".into()));
    }
    let dir = transversality.signum();
    let limit = 10.0 * period_guess;
    let before = dir * section.value(model, &stack(guess)) < 0.0;
    let wanted = if before { 2 } else { 1 };
    let events = crossings(model, guess, section, dir, limit, wanted, controls)?;
    if events.len() < wanted {
        return Err(Error::NoReturn { limit });
    }
    let (mut x, mut period) = if before {
        (DVector::from_column_slice(&events[0].y), events[1].t - events[0].t)
    } else {
        (guess.to_vector(), events[0].t)
    };
    let energy = model.energy(guess)?;

    let identity = DMatrix::<f64>::identity(d, d);
    let mut norm = f64::INFINITY;
    for iteration in 0..=MAX_ITERATIONS {
        let point = PhasePoint::from_vector(&x)?;
        let (end, phi) = propagate(model, &point, &identity, period, controls)?;
        let end_v = end.to_vector();
        let mut gap = &end_v - &x;
        model.wrap_displacement(&mut gap);
        let jet = model.jet(&point)?;
        let mut r = DVector::zeros(d + 2);
        r.rows_mut(0, d).copy_from(&gap);
        r[d] = section.value(model, x.as_slice());
        r[d + 1] = jet.value() - energy;
        norm = r.norm();
        if norm <= RESIDUAL_TOL {
            return Ok(PeriodicOrbit {
                x0: point,
                period,
                monodromy: phi,
                residual: gap.norm(),
                energy,
                iterations: iteration,
            });
        }
        if iteration == MAX_ITERATIONS {
            break;
        }
        let f_end = model.vector_field(&end)?;
        let grad = jet.gradient();
        let mut jac = DMatrix::zeros(d + 2, d + 1);
        jac.view_mut((0, 0), (d, d)).copy_from(&(&phi - &identity));
        jac.view_mut((0, d), (d, 1)).copy_from(&f_end);
        for k in 0..d {
            jac[(d, k)] = section.normal[k];
            jac[(d + 1, k)] = grad[k];
        }
        let svd = jac.svd(true, true);
        let smax = svd.singular_values.max();
        let step = svd
            .solve(&r, 1e-13 * smax)
            .map_err(|_| Error::NewtonDivergence { iterations: iteration, residual: norm })?;
        x -= step.rows(0, d);
        period -= step[d];
        if !(period > 0.0) || !period.is_finite() || period > limit {
            return Err(Error::NewtonDivergence { iterations: iteration + 1, residual: norm });
        }
    }
    Err(Error::NewtonDivergence { iterations: MAX_ITERATIONS, residual: norm })
}

#[derive(Debug, Clone, PartialEq)]
pub struct FloquetData {
    /// Nontrivial multipliers, `2n − 2` of them, by decreasing modulus.
    pub multipliers: Vec<Complex<f64>>,
    /// The two eigenvalues removed as trivial.
    pub trivial: [Complex<f64>; 2],
    pub hyperbolic: bool,
    /// `min |log|λ||` over the nontrivial multipliers.
    pub margin: f64,
}

/// Floquet multipliers with the flow-direction and energy multipliers
/// removed. `tol` bounds `|λ − 1|` for the trivial pair and is also the
/// width of the annulus around the unit circle counted as non-hyperbolic.
pub fn floquet_reduced(orbit: &PeriodicOrbit, tol: f64) -> Result<FloquetData> {
    let mut ev = complex_eigenvalues(&orbit.monodromy);
    let one = Complex::new(1.0, 0.0);
    ev.sort_by(|a, b| modulus(&(a - one)).total_cmp(&modulus(&(b - one))));
    if ev.len() < 2 {
        return Err(Error::DegenerateOrbit { distance: f64::INFINITY });
    }
    let distance = modulus(&(ev[1] - one));
    if distance > tol {
        return Err(Error::DegenerateOrbit { distance });
    }
    let trivial = [ev[0], ev[1]];
    let mut multipliers: Vec<Complex<f64>> = ev[2..].to_vec();
    multipliers.sort_by(|a, b| modulus(b).total_cmp(&modulus(a)).then(b.im.total_cmp(&a.im)));
    let hyperbolic = multipliers.iter().all(|l| (modulus(l) - 1.0).abs() > tol);
    let margin = multipliers
        .iter()
        .fold(f64::INFINITY, |m: f64, l| m.min(modulus(l).ln().abs()));
    Ok(FloquetData { multipliers, trivial, hyperbolic, margin })
}
