use alloc::string::String;
use alloc::vec::Vec;
use alloc::{format, vec};

use super::ode::{self, Controls, DenseStep, Flow, Stats};
use super::{field_into, stack};
use crate::error::{Error, Result};
use crate::models::{HamiltonianModel, PhasePoint};

/// Energy drift above which a trajectory is flagged as degraded.
pub const ENERGY_DRIFT_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub t: f64,
    pub x: PhasePoint,
    /// `h(x)` at the sample.
    pub h: f64,
}

/// Solution of `ẋ = h⃗(x)`. Samples are ordered in the direction of
/// integration (decreasing times for a backward run).
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub samples: Vec<Sample>,
    pub energy_drift: f64,
    pub stats: Stats,
    pub degraded: bool,
    steps: Vec<DenseStep>,
}

impl Trajectory {
    pub fn first(&self) -> &Sample {
        &self.samples[0]
    }

    pub fn last(&self) -> &Sample {
        self.samples.last().expect("trajectory has its initial sample")
    }

    /// State at any time covered by the run, from the continuous extension.
    pub fn at(&self, t: f64) -> Option<PhasePoint> {
        let step = self.steps.iter().find(|s| {
            let (a, b) = if s.h >= 0.0 { (s.t0, s.t1()) } else { (s.t1(), s.t0) };
            a <= t && t <= b
        })?;
        PhasePoint::from_slice(&step.eval(t)).ok()
    }

    /// Column names and rows `(t, p…, q…, h)` for tabular export.
    pub fn table(&self, coords: &[String]) -> (Vec<String>, Vec<Vec<f64>>) {
        let mut header = vec![String::from("t")];
        header.extend(coords.iter().map(|c| format!("p_{c}")));
        header.extend(coords.iter().cloned());
        header.push(String::from("h"));
        let rows = self
            .samples
            .iter()
            .map(|s| {
                let mut row = vec![s.t];
                row.extend_from_slice(&s.x.p);
                row.extend_from_slice(&s.x.q);
                row.push(s.h);
                row
            })
            .collect();
        (header, rows)
    }
}

fn run(
    model: &HamiltonianModel,
    x0: &PhasePoint,
    t_end: f64,
    times: Option<&[f64]>,
    controls: &Controls,
) -> Result<Trajectory> {
    if x0.dim() != model.dim() {
        return Err(Error::Dimension { expected: model.dim(), found: x0.dim() });
    }
    let h0 = model.energy(x0)?;
    let mut samples = vec![Sample { t: 0.0, x: x0.clone(), h: h0 }];
    let mut steps = Vec::new();
    let mut drift: f64 = 0.0;
    let stops = times.unwrap_or(&[]);
    let mut next = 0;
    while next < stops.len() && stops[next] == 0.0 {
        next += 1;
    }
    let outcome = ode::integrate(
        |_, y, dy| field_into(model, y, dy),
        0.0,
        &stack(x0),
        t_end,
        stops,
        controls,
        |step, y| {
            let x = PhasePoint::from_slice(y)?;
            let h = model.energy(&x)?;
            drift = drift.max((h - h0).abs());
            let t = step.t1();
            let record = match times {
                None => true,
                Some(ts) => next < ts.len() && ts[next] == t,
            };
            if record {
                samples.push(Sample { t, x, h });
                next += 1;
            }
            steps.push(step.clone());
            Ok(Flow::Continue)
        },
    )?;
    Ok(Trajectory {
        samples,
        energy_drift: drift,
        stats: outcome.stats,
        degraded: drift > ENERGY_DRIFT_TOL,
        steps,
    })
}

/// Integrates from `x0` over `[0, t_end]` (or `[t_end, 0]`), recording
/// every accepted step.
pub fn integrate(model: &HamiltonianModel, x0: &PhasePoint, t_end: f64, controls: &Controls) -> Result<Trajectory> {
    run(model, x0, t_end, None, controls)
}

/// Integrates from `x0` and records the state exactly at `times`, which must
/// be strictly monotone and start on the side of 0 they run towards.
pub fn integrate_at(model: &HamiltonianModel, x0: &PhasePoint, times: &[f64], controls: &Controls) -> Result<Trajectory> {
    let Some(&t_end) = times.last() else {
        return Err(Error::InvalidArgument("no sample times requested".into()));
    };
    let dir = if t_end >= 0.0 { 1.0 } else { -1.0 };
    let monotone = times.windows(2).all(|w| dir * (w[1] - w[0]) > 0.0) && dir * times[0] >= 0.0;
    if !monotone {
        return Err(Error::InvalidArgument("sample times must be strictly monotone away from 0".into()));
    }
    run(model, x0, t_end, Some(times), controls)
}
