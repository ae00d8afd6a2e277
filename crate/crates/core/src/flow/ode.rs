//! Dormand–Prince 5(4) with step rejection and continuous (dense) output.

use alloc::vec;
use alloc::vec::Vec;
use num_traits::Float;

use crate::error::{Error, Result};

/// Step-size controls for the adaptive integrator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Controls {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_step: f64,
    pub max_steps: usize,
}

impl Default for Controls {
    fn default() -> Self {
        Controls { rel_tol: 1e-10, abs_tol: 1e-12, max_step: f64::INFINITY, max_steps: 2_000_000 }
    }
}

impl Controls {
    pub fn tight() -> Self {
        Controls { rel_tol: 1e-12, abs_tol: 1e-14, ..Controls::default() }
    }

    pub fn with_tolerance(rel_tol: f64, abs_tol: f64) -> Self {
        Controls { rel_tol, abs_tol, ..Controls::default() }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Stats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

/// Continuous extension over one accepted step.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseStep {
    pub t0: f64,
    pub h: f64,
    t1: f64,
    coeffs: [Vec<f64>; 5],
}

impl DenseStep {
    /// End of the step; equals a requested stop exactly when one was hit.
    pub fn t1(&self) -> f64 {
        self.t1
    }

    /// State at `t`, 4th-order accurate inside the step.
    pub fn eval(&self, t: f64) -> Vec<f64> {
        let th = (t - self.t0) / self.h;
        let th1 = 1.0 - th;
        let [r1, r2, r3, r4, r5] = &self.coeffs;
        (0..r1.len())
            .map(|i| r1[i] + th * (r2[i] + th1 * (r3[i] + th * (r4[i] + th1 * r5[i]))))
            .collect()
    }
}

/// What the step observer wants the integrator to do next.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Flow {
    Continue,
    Stop,
}

/// Result of an integration run: the final state and statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub t: f64,
    pub y: Vec<f64>,
    pub stats: Stats,
    pub stopped_early: bool,
}

fn rms_norm(v: &[f64], scale: &[f64]) -> f64 {
    let s: f64 = v.iter().zip(scale).map(|(a, b)| (a / b) * (a / b)).sum();
    (s / v.len() as f64).sqrt()
}

/// Integrates `y' = f(t, y)` from `t0` to `t_end` (either direction).
///
/// Steps are shortened so that every time in `stops` (which must be
/// monotone in the direction of integration) is hit exactly. After every
/// accepted step `observer` receives the continuous extension and the new
/// state; returning [`Flow::Stop`] ends the run.
pub fn integrate<F, O>(
    mut f: F,
    t0: f64,
    y0: &[f64],
    t_end: f64,
    stops: &[f64],
    controls: &Controls,
    mut observer: O,
) -> Result<Outcome>
where
    F: FnMut(f64, &[f64], &mut [f64]) -> Result<()>,
    O: FnMut(&DenseStep, &[f64]) -> Result<Flow>,
{
    let n = y0.len();
    let dir = if t_end >= t0 { 1.0 } else { -1.0 };
    let mut stats = Stats::default();
    let mut t = t0;
    let mut y = y0.to_vec();
    if t_end == t0 {
        return Ok(Outcome { t, y, stats, stopped_early: false });
    }
    let span = (t_end - t0).abs();
    let max_step = controls.max_step.min(span);

    let mut k1 = vec![0.0; n];
    let (mut k2, mut k3, mut k4, mut k5, mut k6, mut k7) =
        (vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    let mut ytmp = vec![0.0; n];
    let mut ynew = vec![0.0; n];
    let mut err = vec![0.0; n];
    let mut scale = vec![0.0; n];

    f(t, &y, &mut k1)?;
    stats.evaluations += 1;

    // Initial step guess.
    for i in 0..n {
        scale[i] = controls.abs_tol + controls.rel_tol * y[i].abs();
    }
    let d0 = rms_norm(&y, &scale);
    let d1 = rms_norm(&k1, &scale);
    let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    let h0 = h0.min(max_step);
    for i in 0..n {
        ytmp[i] = y[i] + dir * h0 * k1[i];
    }
    f(t + dir * h0, &ytmp, &mut k2)?;
    stats.evaluations += 1;
    for i in 0..n {
        err[i] = k2[i] - k1[i];
    }
    let d2 = rms_norm(&err, &scale) / h0;
    let h1 = if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(0.2)
    };
    let mut h = (100.0 * h0).min(h1).min(max_step);

    let mut stop_idx = 0;
    while stop_idx < stops.len() && dir * (stops[stop_idx] - t) <= 0.0 {
        stop_idx += 1;
    }
    let mut rejected_last = false;

    loop {
        if stats.accepted + stats.rejected >= controls.max_steps {
            return Err(Error::StepUnderflow { t, state: y });
        }
        let remaining = dir * (t_end - t);
        let mut target = t_end;
        if stop_idx < stops.len() && dir * (stops[stop_idx] - t_end) < 0.0 {
            target = stops[stop_idx];
        }
        let to_target = dir * (target - t);
        let mut hit_target = false;
        if h >= to_target * (1.0 - 1e-12) {
            h = to_target;
            hit_target = true;
        } else if h > 0.5 * to_target && to_target <= max_step {
            // Avoid leaving a sliver before the target.
            h = 0.5 * to_target;
        }
        if h.abs() <= 1e-14 * t.abs().max(1.0) && remaining > 0.0 && !hit_target {
            return Err(Error::StepUnderflow { t, state: y });
        }
        let hs = dir * h;

        for i in 0..n {
            ytmp[i] = y[i] + hs * A21 * k1[i];
        }
        f(t + C2 * hs, &ytmp, &mut k2)?;
        for i in 0..n {
            ytmp[i] = y[i] + hs * (A31 * k1[i] + A32 * k2[i]);
        }
        f(t + C3 * hs, &ytmp, &mut k3)?;
        for i in 0..n {
            ytmp[i] = y[i] + hs * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]);
        }
        f(t + C4 * hs, &ytmp, &mut k4)?;
        for i in 0..n {
            ytmp[i] = y[i] + hs * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]);
        }
        f(t + C5 * hs, &ytmp, &mut k5)?;
        for i in 0..n {
            ytmp[i] = y[i] + hs * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]);
        }
        let t_new = if hit_target { target } else { t + hs };
        f(t + hs, &ytmp, &mut k6)?;
        for i in 0..n {
            ynew[i] = y[i] + hs * (A71 * k1[i] + A73 * k3[i] + A74 * k4[i] + A75 * k5[i] + A76 * k6[i]);
        }
        f(t_new, &ynew, &mut k7)?;
        stats.evaluations += 6;

        for i in 0..n {
            err[i] = hs * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            scale[i] = controls.abs_tol + controls.rel_tol * y[i].abs().max(ynew[i].abs());
        }
        let e = rms_norm(&err, &scale);
        if !e.is_finite() {
            stats.rejected += 1;
            h *= 0.2;
            rejected_last = true;
            continue;
        }
        if e <= 1.0 {
            stats.accepted += 1;
            let ydiff: Vec<f64> = (0..n).map(|i| ynew[i] - y[i]).collect();
            let bspl: Vec<f64> = (0..n).map(|i| hs * k1[i] - ydiff[i]).collect();
            let c4: Vec<f64> = (0..n).map(|i| ydiff[i] - hs * k7[i] - bspl[i]).collect();
            let c5: Vec<f64> = (0..n)
                .map(|i| hs * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i]))
                .collect();
            let step = DenseStep { t0: t, h: hs, t1: t_new, coeffs: [y.clone(), ydiff, bspl, c4, c5] };
            t = t_new;
            core::mem::swap(&mut y, &mut ynew);
            core::mem::swap(&mut k1, &mut k7);
            if hit_target && stop_idx < stops.len() && target == stops[stop_idx] {
                stop_idx += 1;
            }
            if observer(&step, &y)? == Flow::Stop {
                return Ok(Outcome { t, y, stats, stopped_early: true });
            }
            if hit_target && target == t_end {
                return Ok(Outcome { t, y, stats, stopped_early: false });
            }
            let mut fac = 0.9 * e.max(1e-10).powf(-0.2);
            fac = fac.clamp(0.2, 10.0);
            if rejected_last {
                fac = fac.min(1.0);
            }
            rejected_last = false;
            h = (h * fac).min(max_step);
        } else {
            stats.rejected += 1;
            let fac = (0.9 * e.powf(-0.2)).max(0.2);
            h *= fac;
            rejected_last = true;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_decay_and_stops() {
        let mut seen = Vec::new();
        let out = integrate(
            |_, y, dy| {
                dy[0] = -y[0];
                Ok(())
            },
            0.0,
            &[1.0],
            2.0,
            &[0.5, 1.0, 1.5],
            &Controls::tight(),
            |step, y| {
                seen.push((step.t1(), y[0]));
                Ok(Flow::Continue)
            },
        )
        .unwrap();
        assert!((out.y[0] - (-2.0f64).exp()).abs() < 1e-12);
        for s in [0.5, 1.0, 1.5] {
            let hit = seen.iter().find(|(t, _)| *t == s).expect("stop hit exactly");
            assert!((hit.1 - (-s).exp()).abs() < 1e-12);
        }
    }

    #[test]
    fn backward_and_dense_output() {
        let mut max_err: f64 = 0.0;
        integrate(
            |_, y, dy| {
                dy[0] = y[1];
                dy[1] = -y[0];
                Ok(())
            },
            0.0,
            &[0.0, 1.0],
            -3.0,
            &[],
            &Controls::default(),
            |step, _| {
                let tm = step.t0 + 0.37 * step.h;
                let y = step.eval(tm);
                max_err = max_err.max((y[0] - tm.sin()).abs());
                Ok(Flow::Continue)
            },
        )
        .unwrap();
        assert!(max_err < 1e-8, "{max_err}");
    }
}
