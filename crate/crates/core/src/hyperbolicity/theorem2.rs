use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use nalgebra::DVector;

use super::yes;
use crate::curvature::{reduced_curvature, ReducedMethod, SignClass};
use crate::error::{Error, Result};
use crate::flow::{
    floquet_reduced, integrate_at, lyapunov_exponents, Controls, FloquetData, LyapunovSpectrum, PeriodicOrbit,
    TRIVIAL_MULTIPLIER_TOL,
};
use crate::models::{Family, HamiltonianModel, PhasePoint};

const MIN_SAMPLES: usize = 64;
const LEVEL_TOL: f64 = 1e-8;
const ORBIT_RESIDUAL_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct Theorem2Config {
    /// Points sampled along the set (at least 64).
    pub samples: usize,
    pub method: ReducedMethod,
    pub controls: Controls,
    /// `|λ − 1|` tolerance for the trivial multipliers and the hyperbolic
    /// annulus.
    pub floquet_tol: f64,
}

impl Default for Theorem2Config {
    fn default() -> Self {
        Theorem2Config {
            samples: MIN_SAMPLES,
            method: ReducedMethod::ClosedForm,
            controls: Controls::tight(),
            floquet_tol: TRIVIAL_MULTIPLIER_TOL,
        }
    }
}

/// Hypothesis checks shared by the periodic-orbit and Lyapunov variants.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledHypotheses {
    pub energy: f64,
    pub samples: usize,
    /// Largest `|h(x) − c|` over the samples.
    pub level_deviation: f64,
    pub on_level_set: bool,
    /// Smallest `|∂h/∂p|` over the samples.
    pub min_fibre_gradient: f64,
    pub field_not_vertical: bool,
    pub reduced_negative: bool,
    /// Largest eigenvalue of `ĝ⁻¹r̂` over the samples.
    pub worst_margin: f64,
    pub notes: Vec<String>,
}

impl SampledHypotheses {
    pub fn hold(&self) -> bool {
        self.on_level_set && self.field_not_vertical && self.reduced_negative
    }
}

fn sample_hypotheses(model: &HamiltonianModel, points: &[PhasePoint], energy: f64, method: ReducedMethod) -> SampledHypotheses {
    let method = if model.family() == Family::Custom { ReducedMethod::Bracket } else { method };
    let n = model.dim();
    let mut out = SampledHypotheses {
        energy,
        samples: points.len(),
        level_deviation: 0.0,
        on_level_set: true,
        min_fibre_gradient: f64::INFINITY,
        field_not_vertical: true,
        reduced_negative: true,
        worst_margin: f64::NEG_INFINITY,
        notes: Vec::new(),
    };
    for x in points {
        match model.jet(x) {
            Ok(jet) => {
                out.level_deviation = out.level_deviation.max((jet.value() - energy).abs());
                let hp = DVector::from_fn(n, |i, _| jet.gradient()[i]).norm();
                out.min_fibre_gradient = out.min_fibre_gradient.min(hp);
            }
            Err(e) => out.notes.push(alloc::format!("h undefined at a sample: {e}")),
        }
        match reduced_curvature(model, x, method) {
            Ok(r) => {
                if r.sign_class != SignClass::Negative {
                    out.reduced_negative = false;
                }
                if let Some(top) = r.eigenvalues.last() {
                    out.worst_margin = out.worst_margin.max(*top);
                }
            }
            Err(e) => {
                out.reduced_negative = false;
                if matches!(e, Error::VerticalField) {
                    out.field_not_vertical = false;
                }
                if out.notes.len() < 8 {
                    out.notes.push(alloc::format!("reduced curvature unavailable: {e}"));
                }
            }
        }
    }
    out.on_level_set = out.level_deviation <= LEVEL_TOL;
    out.field_not_vertical &= out.min_fibre_gradient > 0.0;
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct Theorem2Certificate {
    pub period: f64,
    pub orbit_residual: f64,
    pub hypotheses: SampledHypotheses,
    pub floquet: Option<FloquetData>,
    pub hyperbolic: bool,
}

impl Theorem2Certificate {
    pub fn hypotheses_hold(&self) -> bool {
        self.hypotheses.hold()
    }

    pub fn is_finding(&self) -> bool {
        self.hypotheses_hold() && !self.hyperbolic
    }
}

/// Samples the orbit, checks the level set, `h⃗ ∉ Δ` and the sign of the
/// reduced curvature, and reads hyperbolicity off the Floquet multipliers.
pub fn check_theorem2_orbit(model: &HamiltonianModel, orbit: &PeriodicOrbit, config: &Theorem2Config) -> Result<Theorem2Certificate> {
    if orbit.residual > ORBIT_RESIDUAL_TOL {
        return Err(Error::InvalidArgument(alloc::format!(
            "orbit residual {:e} exceeds {ORBIT_RESIDUAL_TOL:e}",
            orbit.residual
        )));
    }
    let count = config.samples.max(MIN_SAMPLES);
    let times: Vec<f64> = (1..count).map(|k| orbit.period * k as f64 / count as f64).collect();
    let trajectory = integrate_at(model, &orbit.x0, &times, &config.controls)?;
    let points: Vec<PhasePoint> = trajectory.samples.iter().map(|s| s.x.clone()).collect();
    let hypotheses = sample_hypotheses(model, &points, orbit.energy, config.method);
    let mut notes = Vec::new();
    let floquet = match floquet_reduced(orbit, config.floquet_tol) {
        Ok(f) => Some(f),
        Err(e) => {
            notes.push(alloc::format!("Floquet data unavailable: {e}"));
            None
        }
    };
    let hyperbolic = floquet.as_ref().is_some_and(|f| f.hyperbolic);
    let mut hypotheses = hypotheses;
    hypotheses.notes.extend(notes);
    Ok(Theorem2Certificate { period: orbit.period, orbit_residual: orbit.residual, hypotheses, floquet, hyperbolic })
}

/// Lyapunov spectrum along a trajectory together with the sampled
/// hypotheses. Evidence, not proof: finite-time exponents say nothing
/// rigorous about the invariant set.
#[derive(Debug, Clone, PartialEq)]
pub struct LyapunovEvidence {
    pub hypotheses: SampledHypotheses,
    pub spectrum: LyapunovSpectrum,
    /// Top exponent clearly positive and paired with its negative.
    pub hyperbolic_evidence: bool,
}

impl LyapunovEvidence {
    pub const LABEL: &'static str = "evidence, not proof";
}

pub fn check_theorem2_lyapunov(
    model: &HamiltonianModel,
    x0: &PhasePoint,
    horizon: f64,
    renorm_interval: f64,
    config: &Theorem2Config,
) -> Result<LyapunovEvidence> {
    let count = config.samples.max(MIN_SAMPLES);
    let times: Vec<f64> = (1..count).map(|k| horizon * k as f64 / count as f64).collect();
    let trajectory = integrate_at(model, x0, &times, &config.controls)?;
    let points: Vec<PhasePoint> = trajectory.samples.iter().map(|s| s.x.clone()).collect();
    let hypotheses = sample_hypotheses(model, &points, model.energy(x0)?, config.method);
    let spectrum = lyapunov_exponents(model, x0, horizon, renorm_interval, &config.controls)?;
    let top = spectrum.exponents[0];
    let bottom = *spectrum.exponents.last().expect("2n exponents");
    let hyperbolic_evidence = top > 1e-2 && (top + bottom).abs() < 1e-2 && !spectrum.flagged;
    Ok(LyapunovEvidence { hypotheses, spectrum, hyperbolic_evidence })
}

impl fmt::Display for SampledHypotheses {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "  energy c = {}; {} samples", self.energy, self.samples)?;
        writeln!(f, "  hypothesis: on the level set ......... {} (max |h - c| {:e})", yes(self.on_level_set), self.level_deviation)?;
        writeln!(
            f,
            "  hypothesis: field not vertical ........ {} (min |dh/dp| {:e})",
            yes(self.field_not_vertical),
            self.min_fibre_gradient
        )?;
        writeln!(
            f,
            "  hypothesis: negative reduced curvature  {} (worst eigenvalue {:e})",
            yes(self.reduced_negative),
            self.worst_margin
        )?;
        for n in &self.notes {
            writeln!(f, "  note: {n}")?;
        }
        Ok(())
    }
}

impl fmt::Display for Theorem2Certificate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "hyperbolic orbit certificate (negative reduced curvature)")?;
        writeln!(f, "  period {}; orbit residual {:e}", self.period, self.orbit_residual)?;
        write!(f, "{}", self.hypotheses)?;
        if let Some(fl) = &self.floquet {
            let parts: Vec<String> = fl.multipliers.iter().map(|l| alloc::format!("{}{:+}i", l.re, l.im)).collect();
            writeln!(f, "  nontrivial multipliers: {}", parts.join(", "))?;
            writeln!(f, "  margin min|log|lambda|| = {}", fl.margin)?;
        }
        writeln!(f, "  hyperbolic ............................ {}", yes(self.hyperbolic))?;
        let verdict = match (self.hypotheses_hold(), self.hyperbolic) {
            (true, true) => "hypotheses hold; hyperbolicity observed",
            (true, false) => "FINDING: hypotheses hold but the orbit is not hyperbolic",
            (false, _) => "hypotheses not established; no conclusion asserted",
        };
        writeln!(f, "  verdict: {verdict}")
    }
}

impl fmt::Display for LyapunovEvidence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Lyapunov evidence ({})", Self::LABEL)?;
        write!(f, "{}", self.hypotheses)?;
        writeln!(f, "  exponents: {:?} (sum {:e})", self.spectrum.exponents, self.spectrum.sum)?;
        writeln!(f, "  hyperbolic evidence ................... {}", yes(self.hyperbolic_evidence))
    }
}
