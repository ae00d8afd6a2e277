use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use nalgebra::Complex;

use super::{curvature_at, yes};
use crate::curvature::{g_form, SignClass};
use crate::error::{Error, Result};
use crate::flow::{find_equilibrium, integrate_at, Controls};
use crate::models::{HamiltonianModel, PhasePoint};

/// Fraction of the horizon, at its end, over which convergence is judged.
const WINDOW: f64 = 0.1;
/// Convergence threshold relative to the box diameter.
const CONVERGENCE_TOL: f64 = 1e-6;
const WINDOW_SAMPLES: usize = 20;

#[derive(Debug, Clone, PartialEq)]
pub struct Theorem1Config {
    pub horizon: f64,
    /// Time between curvature samples.
    pub sample_stride: f64,
    /// Compact box `[lo, hi]` in `(p, q)` that stands in for "compact
    /// closure": the trajectory must stay inside it over the horizon.
    pub box_lo: Vec<f64>,
    pub box_hi: Vec<f64>,
    pub controls: Controls,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Theorem1Certificate {
    pub x0: PhasePoint,
    pub horizon: f64,
    pub monotone_at_x0: bool,
    pub stayed_in_box: bool,
    /// First sample time found outside the box.
    pub box_exit_time: Option<f64>,
    pub curvature_samples: usize,
    pub curvature_negative: bool,
    /// Largest curvature eigenvalue seen (negative when every sample is).
    pub worst_margin: f64,
    pub energy_drift: f64,
    /// Largest `|x(t) − x(T)|` over the trailing window.
    pub window_motion: f64,
    pub converged: bool,
    pub limit_point: Option<PhasePoint>,
    pub spectrum: Vec<Complex<f64>>,
    pub hyperbolic: bool,
    pub convergence_residual: Option<f64>,
    /// Why a stage could not be completed.
    pub notes: Vec<String>,
}

impl Theorem1Certificate {
    pub fn hypotheses_hold(&self) -> bool {
        self.monotone_at_x0 && self.stayed_in_box && self.curvature_negative
    }

    pub fn conclusion_holds(&self) -> bool {
        self.converged && self.hyperbolic
    }

    /// All hypotheses hold but the conclusion was not observed.
    pub fn is_finding(&self) -> bool {
        self.hypotheses_hold() && !self.conclusion_holds()
    }
}

/// Integrates from `x0`, samples the curvature sign, detects convergence
/// and polishes the limit with Newton's method.
pub fn check_theorem1(model: &HamiltonianModel, x0: &PhasePoint, config: &Theorem1Config) -> Result<Theorem1Certificate> {
    let d = 2 * model.dim();
    if config.box_lo.len() != d || config.box_hi.len() != d {
        return Err(Error::Dimension { expected: d, found: config.box_lo.len().min(config.box_hi.len()) });
    }
    if !(config.horizon > 0.0 && config.sample_stride > 0.0) {
        return Err(Error::InvalidArgument("horizon and sample stride must be positive".into()));
    }
    let diameter = config
        .box_lo
        .iter()
        .zip(&config.box_hi)
        .map(|(a, b)| (b - a) * (b - a))
        .sum::<f64>()
        .sqrt();
    let monotone_at_x0 = g_form(model, x0)?.monotone.is_monotone();
    let mut notes = Vec::new();

    let t_end = config.horizon;
    let window_start = (1.0 - WINDOW) * t_end;
    let mut times: Vec<f64> = Vec::new();
    let mut k = 1;
    while (k as f64) * config.sample_stride < t_end {
        times.push(k as f64 * config.sample_stride);
        k += 1;
    }
    times.extend((0..WINDOW_SAMPLES).map(|i| window_start + (t_end - window_start) * i as f64 / WINDOW_SAMPLES as f64));
    times.push(t_end);
    times.sort_by(f64::total_cmp);
    times.dedup();
    times.retain(|t| *t > 0.0);

    let inside = |x: &PhasePoint| {
        x.p.iter().chain(&x.q).enumerate().all(|(i, v)| config.box_lo[i] <= *v && *v <= config.box_hi[i])
    };

    let mut cert = Theorem1Certificate {
        x0: x0.clone(),
        horizon: t_end,
        monotone_at_x0,
        stayed_in_box: inside(x0),
        box_exit_time: if inside(x0) { None } else { Some(0.0) },
        curvature_samples: 0,
        curvature_negative: true,
        worst_margin: f64::NEG_INFINITY,
        energy_drift: 0.0,
        window_motion: f64::INFINITY,
        converged: false,
        limit_point: None,
        spectrum: Vec::new(),
        hyperbolic: false,
        convergence_residual: None,
        notes: Vec::new(),
    };

    let trajectory = match integrate_at(model, x0, &times, &config.controls) {
        Ok(t) => t,
        Err(e) => {
            notes.push(alloc::format!("integration stopped: {e}"));
            cert.stayed_in_box = false;
            cert.curvature_negative = false;
            cert.notes = notes;
            return Ok(cert);
        }
    };
    cert.energy_drift = trajectory.energy_drift;

    for s in &trajectory.samples {
        if cert.stayed_in_box && !inside(&s.x) {
            cert.stayed_in_box = false;
            cert.box_exit_time = Some(s.t);
        }
        match curvature_at(model, &s.x) {
            Ok(c) => {
                cert.curvature_samples += 1;
                if c.sign_class != Some(SignClass::Negative) {
                    cert.curvature_negative = false;
                }
                if let Some(ev) = &c.eigenvalues {
                    // In the ∂/∂p basis with g of either sign the form sign is
                    // that of g⁻¹r, the eigenvalues of R.
                    if let Some(top) = ev.last() {
                        cert.worst_margin = cert.worst_margin.max(*top);
                    }
                }
            }
            Err(e) => {
                cert.curvature_negative = false;
                notes.push(alloc::format!("curvature unavailable at t = {}: {e}", s.t));
            }
        }
    }
    if !cert.stayed_in_box {
        notes.push(String::from("trajectory left the declared box; compact closure unverified"));
    }

    let last = trajectory.last().x.to_vector();
    let window_motion = trajectory
        .samples
        .iter()
        .filter(|s| s.t >= window_start)
        .map(|s| (s.x.to_vector() - &last).norm())
        .fold(0.0, f64::max);
    cert.window_motion = window_motion;
    let converged = window_motion <= CONVERGENCE_TOL * diameter;
    if converged {
        match find_equilibrium(model, &trajectory.last().x) {
            Ok(eq) => {
                let residual = (last - eq.x.to_vector()).norm();
                cert.convergence_residual = Some(residual);
                cert.converged = residual <= CONVERGENCE_TOL * diameter;
                cert.hyperbolic = eq.hyperbolic;
                cert.spectrum = eq.spectrum;
                cert.limit_point = Some(eq.x);
            }
            Err(e) => notes.push(alloc::format!("limit could not be polished: {e}")),
        }
    } else {
        notes.push(String::from("no convergence within the horizon"));
    }
    cert.notes = notes;
    Ok(cert)
}

impl fmt::Display for Theorem1Certificate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "convergence certificate (bounded semi-trajectory, negative curvature)")?;
        writeln!(f, "  x0 = p {:?}, q {:?}; horizon {}", self.x0.p, self.x0.q, self.horizon)?;
        writeln!(f, "  hypothesis: monotone at x0 ............ {}", yes(self.monotone_at_x0))?;
        writeln!(f, "  hypothesis: stays in declared box ..... {}", yes(self.stayed_in_box))?;
        writeln!(
            f,
            "  hypothesis: negative curvature ........ {} ({} samples, worst eigenvalue {:e})",
            yes(self.curvature_negative),
            self.curvature_samples,
            self.worst_margin
        )?;
        writeln!(f, "  converged ............................. {} (window motion {:e})", yes(self.converged), self.window_motion)?;
        if let Some(x) = &self.limit_point {
            writeln!(f, "  limit point = p {:?}, q {:?}", x.p, x.q)?;
        }
        if let Some(r) = self.convergence_residual {
            writeln!(f, "  |x(T) - x_inf| = {r:e}")?;
        }
        if !self.spectrum.is_empty() {
            let parts: Vec<String> = self.spectrum.iter().map(|l| alloc::format!("{}{:+}i", l.re, l.im)).collect();
            writeln!(f, "  spectrum at limit: {}", parts.join(", "))?;
        }
        writeln!(f, "  hyperbolic limit ...................... {}", yes(self.hyperbolic))?;
        writeln!(f, "  energy drift {:e}", self.energy_drift)?;
        let verdict = match (self.hypotheses_hold(), self.conclusion_holds()) {
            (true, true) => "hypotheses hold; conclusion observed",
            (true, false) => "FINDING: hypotheses hold but the conclusion was not observed",
            (false, _) => "hypotheses not established; no conclusion asserted",
        };
        writeln!(f, "  verdict: {verdict}")?;
        writeln!(f, "  note: compact closure is checked only as containment in the declared box over the horizon")?;
        for n in &self.notes {
            writeln!(f, "  note: {n}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::Expression;
    use alloc::string::ToString;
    use alloc::vec;

    fn config(n: usize) -> Theorem1Config {
        Theorem1Config {
            horizon: 20.0,
            sample_stride: 0.5,
            box_lo: vec![-2.0; 2 * n],
            box_hi: vec![2.0; 2 * n],
            controls: Controls::default(),
        }
    }

    fn natural(u: &str, coords: &[&str]) -> HamiltonianModel {
        let coords: Vec<String> = coords.iter().map(|c| c.to_string()).collect();
        HamiltonianModel::natural(Expression::parse(u, &coords).unwrap())
    }

    #[test]
    fn saddle_stable_manifold() {
        let m = natural("-0.5*q^2", &["q"]);
        let x0 = PhasePoint::new(vec![-0.5], vec![0.5]).unwrap();
        let cert = check_theorem1(&m, &x0, &config(1)).unwrap();
        assert!(cert.hypotheses_hold() && cert.conclusion_holds(), "{cert}");
        assert!(cert.convergence_residual.unwrap() <= 1e-6);
        assert!((cert.worst_margin + 1.0).abs() < 1e-12);
        assert!((cert.spectrum[0].re - 1.0).abs() < 1e-8 && (cert.spectrum[1].re + 1.0).abs() < 1e-8);
    }

    #[test]
    fn reversed_saddle_unstable_manifold() {
        let m = natural("-0.5*q^2", &["q"]).reversed();
        let x0 = PhasePoint::new(vec![0.5], vec![0.5]).unwrap();
        let cert = check_theorem1(&m, &x0, &config(1)).unwrap();
        assert!(cert.hypotheses_hold() && cert.conclusion_holds(), "{cert}");
    }

    #[test]
    fn two_degrees_of_freedom() {
        let m = natural("-0.5*(q1^2+q2^2) - 0.25*q1^2", &["q1", "q2"]);
        let x0 = PhasePoint::new(vec![-0.4 * 1.5f64.sqrt(), -0.3], vec![0.4, 0.3]).unwrap();
        let cert = check_theorem1(&m, &x0, &config(2)).unwrap();
        assert!(cert.hypotheses_hold() && cert.conclusion_holds(), "{cert}");
    }

    #[test]
    fn oscillator_fails_the_curvature_gate() {
        let m = natural("0.5*q^2", &["q"]);
        let x0 = PhasePoint::new(vec![0.0], vec![1.0]).unwrap();
        let cert = check_theorem1(&m, &x0, &config(1)).unwrap();
        assert!(!cert.curvature_negative && !cert.hypotheses_hold() && !cert.converged);
        assert!(!cert.is_finding());
    }
}
