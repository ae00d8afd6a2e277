//! Task execution. Each runner returns the artifacts of its task; nothing
//! here touches the file system.

use hamcurv_core::curvature::{
    curvature_closed_form, curvature_schwartzian, reduced_curvature, CurvatureData, ReducedCurvatureData,
    ReducedMethod, SchwartzianControls,
};
use hamcurv_core::flow::{
    find_equilibrium, find_periodic_orbit, floquet_reduced, integrate, integrate_at, lyapunov_exponents, Controls,
    PeriodicOrbit, Section, Stats, ENERGY_DRIFT_TOL, TRIVIAL_MULTIPLIER_TOL,
};
use hamcurv_core::hyperbolicity::{
    check_domain, check_theorem1, check_theorem2_lyapunov, check_theorem2_orbit, inside_fraction_report,
    DomainSweep, DomainVerdict, Theorem1Config, Theorem2Config,
};
use hamcurv_core::linalg::symmetric_eigenvalues;
use hamcurv_core::{HamiltonianModel, PhasePoint};
use nalgebra::{Complex, DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::error::CliError;
use crate::output::{line, Artifacts, Cell, Series, Status, Table};
use crate::scenario::{
    Axis, CurvatureMethod, Evidence, Integrator, Point, RandomPoints, ReducedMethodName, Scenario, SectionSpec,
    SweepOver, Task,
};

fn matrix(m: &DMatrix<f64>) -> Value {
    json!((0..m.nrows()).map(|i| m.row(i).iter().copied().collect::<Vec<_>>()).collect::<Vec<_>>())
}

fn vector(v: &DVector<f64>) -> Value {
    json!(v.iter().copied().collect::<Vec<_>>())
}

fn complex(z: &[Complex<f64>]) -> Value {
    json!(z.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>())
}

fn phase(x: &PhasePoint) -> Value {
    json!({ "p": x.p, "q": x.q })
}

fn stats(s: &Stats) -> Value {
    json!({ "accepted": s.accepted, "rejected": s.rejected, "evaluations": s.evaluations })
}

fn point(p: &Point) -> Result<PhasePoint, CliError> {
    PhasePoint::new(p.p.clone(), p.q.clone()).map_err(CliError::task("point"))
}

fn controls(base: Controls, i: &Integrator) -> Controls {
    Controls {
        rel_tol: i.rel_tol.unwrap_or(base.rel_tol),
        abs_tol: i.abs_tol.unwrap_or(base.abs_tol),
        max_step: i.max_step.unwrap_or(base.max_step),
        ..base
    }
}

fn section(model: &HamiltonianModel, s: &SectionSpec) -> Result<Section, CliError> {
    let n = model.dim();
    match (&s.coordinate, &s.normal) {
        (Some(name), _) => {
            let i = model
                .coords()
                .iter()
                .position(|c| c == name)
                .ok_or_else(|| CliError::Config(format!("unknown section coordinate `{name}`")))?;
            Ok(Section::coordinate(n, i, s.value.unwrap_or(0.0)))
        }
        (None, Some(normal)) => {
            Section::new(normal.clone(), s.offset.unwrap_or(0.0)).map_err(CliError::task("section"))
        }
        (None, None) => Err(CliError::Config("section needs `coordinate` or `normal`".into())),
    }
}

fn reduced_method(m: ReducedMethodName) -> Vec<ReducedMethod> {
    match m {
        ReducedMethodName::ClosedForm => vec![ReducedMethod::ClosedForm],
        ReducedMethodName::Bracket => vec![ReducedMethod::Bracket],
        ReducedMethodName::Both => vec![ReducedMethod::ClosedForm, ReducedMethod::Bracket],
    }
}

fn single_reduced(m: Option<ReducedMethodName>) -> Result<ReducedMethod, CliError> {
    match m.unwrap_or_default() {
        ReducedMethodName::Both => Err(CliError::Config("task.method must be closed_form or bracket here".into())),
        other => Ok(reduced_method(other)[0]),
    }
}

fn curvature(
    model: &HamiltonianModel,
    x: &PhasePoint,
    method: CurvatureMethod,
    sc: &SchwartzianControls,
) -> hamcurv_core::Result<Vec<CurvatureData>> {
    let mut out = Vec::new();
    if method != CurvatureMethod::Schwartzian {
        out.push(curvature_closed_form(model, x)?);
    }
    if method != CurvatureMethod::ClosedForm {
        out.push(curvature_schwartzian(model, x, sc)?);
    }
    Ok(out)
}

fn sign_name(c: &CurvatureData) -> &'static str {
    c.sign_class.map_or("undefined", |s| s.name())
}

fn curvature_record(c: &CurvatureData) -> Value {
    json!({
        "method": c.method.name(),
        "R": matrix(&c.r),
        "r_form": matrix(&c.r_form),
        "g": matrix(&c.g),
        "eigenvalues": c.eigenvalues,
        "sign_class": sign_name(c),
        "self_adjoint_defect": c.self_adjoint_defect,
    })
}

fn reduced_record(r: &ReducedCurvatureData) -> Value {
    json!({
        "method": r.method.name(),
        "basis": matrix(&r.basis),
        "r_hat": matrix(&r.r_hat),
        "g_hat": matrix(&r.g_hat),
        "eigenvalues": r.eigenvalues,
        "sign_class": r.sign_class.name(),
        "v_section": vector(&r.v_section),
        "correction": matrix(&r.correction),
    })
}

fn relative_difference(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    let scale = b.norm();
    if scale == 0.0 {
        (a - b).norm()
    } else {
        (a - b).norm() / scale
    }
}

/// Runs the scenario's task with `seed` for any sampled choice.
pub fn run_task(s: &Scenario, model: &HamiltonianModel, seed: u64) -> Result<Artifacts, CliError> {
    let mut a = match &s.task {
        Task::Curvature { point: p, method, dt, richardson_levels } => {
            let x = point(p)?;
            let mut sc = SchwartzianControls { dt: *dt, ..Default::default() };
            if let Some(l) = richardson_levels {
                sc.richardson_levels = *l;
            }
            let results = curvature(model, &x, *method, &sc).map_err(CliError::task("curvature"))?;
            let mut log = String::new();
            let mut table = Table::new(curvature_header(model, false));
            for c in &results {
                line(&mut log, format!("{}: sign class {}, eigenvalues {:?}", c.method.name(), sign_name(c), c.eigenvalues));
                table.push(curvature_row(model, &x, c, None));
            }
            let mut record = json!({ "point": phase(&x), "results": results.iter().map(curvature_record).collect::<Vec<_>>() });
            if let [a, b] = results.as_slice() {
                let d = relative_difference(&b.r, &a.r);
                record["relative_difference"] = json!(d);
                line(&mut log, format!("relative difference between methods: {d:e}"));
            }
            let mut art = Artifacts::new(Status::Ok, record, log);
            art.table = Some(table);
            art
        }
        Task::Reduced { point: p, method } => {
            let x = point(p)?;
            let mut results = Vec::new();
            for m in reduced_method(*method) {
                results.push(reduced_curvature(model, &x, m).map_err(CliError::task("reduced curvature"))?);
            }
            let mut log = String::new();
            for r in &results {
                line(&mut log, format!("{}: sign class {}, eigenvalues {:?}", r.method.name(), r.sign_class.name(), r.eigenvalues));
            }
            let mut record = json!({ "point": phase(&x), "results": results.iter().map(reduced_record).collect::<Vec<_>>() });
            if let [a, b] = results.as_slice() {
                let d = relative_difference(&b.r_hat, &a.r_hat);
                record["relative_difference"] = json!(d);
                line(&mut log, format!("relative difference between methods: {d:e}"));
            }
            Artifacts::new(Status::Ok, record, log)
        }
        Task::Flow { point: p, t_end, samples, integrator } => flow(model, &point(p)?, *t_end, *samples, integrator)?,
        Task::Equilibrium { guess } => {
            let e = find_equilibrium(model, &point(guess)?).map_err(CliError::task("equilibrium"))?;
            let mut log = String::new();
            line(&mut log, format!("equilibrium at p = {:?}, q = {:?}", e.x.p, e.x.q));
            line(&mut log, format!("residual {:e} after {} iterations", e.residual, e.iterations));
            line(&mut log, format!("hyperbolic: {} (min |Re λ| = {:e})", e.hyperbolic, e.margin));
            let record = json!({
                "x": phase(&e.x),
                "spectrum": complex(&e.spectrum),
                "hyperbolic": e.hyperbolic,
                "margin": e.margin,
                "residual": e.residual,
                "iterations": e.iterations,
            });
            Artifacts::new(Status::Ok, record, log)
        }
        Task::Floquet { guess, period_guess, section: sec, floquet_tol, integrator } => {
            let ctl = controls(Controls::tight(), integrator);
            let orbit = find_periodic_orbit(model, &point(guess)?, *period_guess, &section(model, sec)?, &ctl)
                .map_err(CliError::task("periodic orbit"))?;
            let fl = floquet_reduced(&orbit, floquet_tol.unwrap_or(TRIVIAL_MULTIPLIER_TOL))
                .map_err(CliError::task("Floquet multipliers"))?;
            let mut log = String::new();
            line(&mut log, format!("period {} (residual {:e}, energy {})", orbit.period, orbit.residual, orbit.energy));
            for m in &fl.multipliers {
                line(&mut log, format!("multiplier {} {:+}i", m.re, m.im));
            }
            line(&mut log, format!("hyperbolic: {} (margin {:e})", fl.hyperbolic, fl.margin));
            let record = json!({
                "orbit": orbit_record(&orbit),
                "multipliers": complex(&fl.multipliers),
                "trivial": complex(&fl.trivial),
                "hyperbolic": fl.hyperbolic,
                "margin": fl.margin,
            });
            Artifacts::new(Status::Ok, record, log)
        }
        Task::Lyapunov { point: p, horizon, renorm_interval, integrator } => {
            let ctl = controls(Controls::default(), integrator);
            let l = lyapunov_exponents(model, &point(p)?, *horizon, *renorm_interval, &ctl)
                .map_err(CliError::task("Lyapunov exponents"))?;
            let mut log = String::new();
            line(&mut log, format!("exponents {:?}", l.exponents));
            line(&mut log, format!("sum {:e}{}", l.sum, if l.flagged { " (flagged: not close to zero)" } else { "" }));
            let mut table = Table::new(vec!["index".into(), "exponent".into()]);
            for (i, e) in l.exponents.iter().enumerate() {
                table.push(vec![Cell::Text(i.to_string()), (*e).into()]);
            }
            let record = json!({
                "exponents": l.exponents,
                "sum": l.sum,
                "flagged": l.flagged,
                "renormalizations": l.renormalizations,
            });
            let mut art = Artifacts::new(Status::Ok, record, log);
            art.table = Some(table);
            art
        }
        Task::Theorem1 { point: p, horizon, sample_stride, box_lo, box_hi, integrator } => {
            let config = Theorem1Config {
                horizon: *horizon,
                sample_stride: *sample_stride,
                box_lo: box_lo.clone(),
                box_hi: box_hi.clone(),
                controls: controls(Controls::tight(), integrator),
            };
            let c = check_theorem1(model, &point(p)?, &config).map_err(CliError::task("theorem1 certificate"))?;
            let ok = c.hypotheses_hold() && c.conclusion_holds();
            let record = json!({
                "certificate": "theorem1",
                "x0": phase(&c.x0),
                "horizon": c.horizon,
                "hypotheses": {
                    "monotone_at_x0": c.monotone_at_x0,
                    "stayed_in_box": c.stayed_in_box,
                    "box_exit_time": c.box_exit_time,
                    "curvature_samples": c.curvature_samples,
                    "curvature_negative": c.curvature_negative,
                    "worst_margin": c.worst_margin,
                },
                "energy_drift": c.energy_drift,
                "window_motion": c.window_motion,
                "converged": c.converged,
                "limit_point": c.limit_point.as_ref().map(phase),
                "spectrum": complex(&c.spectrum),
                "hyperbolic": c.hyperbolic,
                "convergence_residual": c.convergence_residual,
                "hypotheses_hold": c.hypotheses_hold(),
                "conclusion_holds": c.conclusion_holds(),
                "finding": c.is_finding(),
                "notes": c.notes,
            });
            Artifacts::new(if ok { Status::Ok } else { Status::HypothesisFailure }, record, c.to_string())
        }
        Task::Theorem2 {
            guess,
            evidence,
            period_guess,
            section: sec,
            horizon,
            renorm_interval,
            samples,
            method,
            floquet_tol,
            integrator,
        } => {
            let mut config = Theorem2Config {
                method: single_reduced(*method)?,
                controls: controls(Controls::tight(), integrator),
                ..Default::default()
            };
            if let Some(k) = samples {
                config.samples = *k;
            }
            if let Some(t) = floquet_tol {
                config.floquet_tol = *t;
            }
            let x0 = point(guess)?;
            match evidence {
                Evidence::Floquet => {
                    let (Some(t), Some(sec)) = (period_guess, sec) else {
                        return Err(CliError::Config("theorem2 with Floquet evidence needs period_guess and section".into()));
                    };
                    let orbit = find_periodic_orbit(model, &x0, *t, &section(model, sec)?, &config.controls)
                        .map_err(CliError::task("periodic orbit"))?;
                    let c = check_theorem2_orbit(model, &orbit, &config).map_err(CliError::task("theorem2 certificate"))?;
                    let ok = c.hypotheses_hold() && c.hyperbolic;
                    let record = json!({
                        "certificate": "theorem2",
                        "evidence": "floquet",
                        "orbit": orbit_record(&orbit),
                        "hypotheses": hypotheses_record(&c.hypotheses),
                        "floquet": c.floquet.as_ref().map(|f| json!({
                            "multipliers": complex(&f.multipliers),
                            "trivial": complex(&f.trivial),
                            "hyperbolic": f.hyperbolic,
                            "margin": f.margin,
                        })),
                        "hyperbolic": c.hyperbolic,
                        "hypotheses_hold": c.hypotheses_hold(),
                        "finding": c.is_finding(),
                    });
                    Artifacts::new(if ok { Status::Ok } else { Status::HypothesisFailure }, record, c.to_string())
                }
                Evidence::Lyapunov => {
                    let (Some(h), Some(r)) = (horizon, renorm_interval) else {
                        return Err(CliError::Config("theorem2 with Lyapunov evidence needs horizon and renorm_interval".into()));
                    };
                    let e = check_theorem2_lyapunov(model, &x0, *h, *r, &config)
                        .map_err(CliError::task("theorem2 evidence"))?;
                    let ok = e.hypotheses.hold() && e.hyperbolic_evidence;
                    let record = json!({
                        "certificate": "theorem2",
                        "evidence": "lyapunov",
                        "label": hamcurv_core::hyperbolicity::LyapunovEvidence::LABEL,
                        "hypotheses": hypotheses_record(&e.hypotheses),
                        "exponents": e.spectrum.exponents,
                        "exponent_sum": e.spectrum.sum,
                        "hyperbolic_evidence": e.hyperbolic_evidence,
                        "hypotheses_hold": e.hypotheses.hold(),
                    });
                    Artifacts::new(if ok { Status::Ok } else { Status::HypothesisFailure }, record, e.to_string())
                }
            }
        }
        Task::Domain { q, c } => {
            let v = check_domain(model, q, *c, seed).map_err(CliError::task("domain check"))?;
            Artifacts::new(Status::Ok, verdict_record(&v), v.to_string())
        }
        Task::Sweep { over: SweepOver::Curvature, grid, random, p, unit_speed, method, reduced, .. } => {
            let qs = positions(grid.as_deref(), random.as_ref(), seed)?;
            let p = p.clone().ok_or_else(|| CliError::Config("task.p is required".into()))?;
            curvature_sweep(model, &qs, &p, *unit_speed, method.unwrap_or_default(), *reduced)?
        }
        Task::Sweep { over: SweepOver::Domain, grid, random, energies, .. } => {
            let qs = positions(grid.as_deref(), random.as_ref(), seed)?;
            let energies = energies.clone().unwrap_or_default();
            domain_sweep(model, &qs, &energies, seed)
        }
    };
    let mut head = String::new();
    line(&mut head, format!("scenario: {}", s.name));
    line(&mut head, format!("family: {}", model.family().name()));
    line(&mut head, format!("task: {}", s.task.kind()));
    line(&mut head, format!("seed: {seed}"));
    a.log = head + &a.log;
    line(&mut a.log, format!("status: {}", a.status.name()));
    a.record = json!({
        "scenario": s.name,
        "task": s.task.kind(),
        "seed": seed,
        "status": a.status.name(),
        "result": a.record,
    });
    Ok(a)
}

fn orbit_record(o: &PeriodicOrbit) -> Value {
    json!({
        "x0": phase(&o.x0),
        "period": o.period,
        "residual": o.residual,
        "energy": o.energy,
        "iterations": o.iterations,
        "monodromy": matrix(&o.monodromy),
    })
}

fn hypotheses_record(h: &hamcurv_core::hyperbolicity::SampledHypotheses) -> Value {
    json!({
        "energy": h.energy,
        "samples": h.samples,
        "level_deviation": h.level_deviation,
        "on_level_set": h.on_level_set,
        "min_fibre_gradient": h.min_fibre_gradient,
        "field_not_vertical": h.field_not_vertical,
        "reduced_negative": h.reduced_negative,
        "worst_margin": h.worst_margin,
        "notes": h.notes,
    })
}

fn verdict_record(v: &DomainVerdict) -> Value {
    json!({
        "q": v.q,
        "c": v.c,
        "kappa": v.kappa,
        "kappa_exact": v.kappa_exact,
        "potential": v.potential,
        "hessian_norm": v.hessian_norm,
        "gradient_norm": v.gradient_norm,
        "lhs": v.lhs,
        "rhs": v.rhs,
        "inside": v.inside,
    })
}

fn flow(
    model: &HamiltonianModel,
    x0: &PhasePoint,
    t_end: f64,
    samples: Option<usize>,
    integrator: &Integrator,
) -> Result<Artifacts, CliError> {
    let ctl = controls(Controls::default(), integrator);
    let traj = match samples {
        Some(k) => {
            let times: Vec<f64> = (1..=k).map(|i| t_end * i as f64 / k as f64).collect();
            integrate_at(model, x0, &times, &ctl)
        }
        None => integrate(model, x0, t_end, &ctl),
    }
    .map_err(CliError::task("flow"))?;
    let (header, rows) = traj.table(model.coords());
    let mut table = Table::new(header);
    for r in rows {
        table.push(r.into_iter().map(Cell::Num).collect());
    }
    let last = traj.last();
    let mut log = String::new();
    line(&mut log, format!("integrated to t = {} in {} steps", last.t, traj.stats.accepted));
    line(&mut log, format!("energy drift {:e}", traj.energy_drift));
    if traj.energy_drift > ENERGY_DRIFT_TOL {
        line(&mut log, format!("warning: energy drift exceeds {ENERGY_DRIFT_TOL:e}"));
    }
    if traj.degraded {
        line(&mut log, "warning: integration degraded (tolerance could not be met)");
    }
    let n = model.dim();
    let mut series = Vec::new();
    for (i, c) in model.coords().iter().enumerate() {
        let pts = |f: &dyn Fn(&hamcurv_core::flow::Sample) -> (f64, f64)| traj.samples.iter().map(f).collect();
        series.push(Series { name: format!("t_{c}"), x: "t".into(), y: c.clone(), points: pts(&|s| (s.t, s.x.q[i])) });
        series.push(Series {
            name: format!("phase_{c}"),
            x: c.clone(),
            y: format!("p_{c}"),
            points: pts(&|s| (s.x.q[i], s.x.p[i])),
        });
    }
    debug_assert_eq!(series.len(), 2 * n);
    let record = json!({
        "t_end": t_end,
        "samples": traj.samples.len(),
        "final": phase(&last.x),
        "energy_drift": traj.energy_drift,
        "degraded": traj.degraded,
        "stats": stats(&traj.stats),
    });
    let mut a = Artifacts::new(Status::Ok, record, log);
    a.table = Some(table);
    a.series = series;
    Ok(a)
}

fn linspace(a: &Axis) -> Vec<f64> {
    if a.count == 1 {
        return vec![a.min];
    }
    (0..a.count).map(|k| a.min + (a.max - a.min) * k as f64 / (a.count - 1) as f64).collect()
}

/// Grid points in row-major order (last axis fastest), or seeded samples.
fn positions(grid: Option<&[Axis]>, random: Option<&RandomPoints>, seed: u64) -> Result<Vec<Vec<f64>>, CliError> {
    match (grid, random) {
        (Some(axes), None) => {
            let mut out = vec![Vec::new()];
            for axis in axes {
                let values = linspace(axis);
                out = out
                    .into_iter()
                    .flat_map(|prefix| {
                        values.iter().map(move |v| {
                            let mut q = prefix.clone();
                            q.push(*v);
                            q
                        })
                    })
                    .collect();
            }
            Ok(out)
        }
        (None, Some(r)) => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            Ok((0..r.count)
                .map(|_| r.q_min.iter().zip(&r.q_max).map(|(a, b)| if a < b { rng.gen_range(*a..*b) } else { *a }).collect())
                .collect())
        }
        _ => Err(CliError::Config("task needs exactly one of `grid` or `random`".into())),
    }
}

fn curvature_header(model: &HamiltonianModel, reduced: bool) -> Vec<String> {
    let n = model.dim();
    let coords = model.coords();
    let mut h: Vec<String> = coords.to_vec();
    h.extend(coords.iter().map(|c| format!("p_{c}")));
    let indexed = |name: &str| -> Vec<String> {
        if n == 1 {
            vec![name.to_string()]
        } else {
            (1..=n).map(|k| format!("{name}_eig{k}")).collect()
        }
    };
    h.extend(indexed("g"));
    h.extend(indexed("R"));
    h.push("sign_class".into());
    if reduced {
        h.extend((1..n).map(|k| format!("r_hat_eig{k}")));
        h.push("reduced_sign_class".into());
    }
    h
}

fn curvature_row(
    model: &HamiltonianModel,
    x: &PhasePoint,
    c: &CurvatureData,
    reduced: Option<Result<&ReducedCurvatureData, ()>>,
) -> Vec<Cell> {
    let n = model.dim();
    let mut row: Vec<Cell> = x.q.iter().chain(&x.p).map(|v| Cell::Num(*v)).collect();
    row.extend(symmetric_eigenvalues(&c.g).into_iter().map(Cell::Num));
    match &c.eigenvalues {
        Some(ev) => row.extend(ev.iter().map(|v| Cell::Num(*v))),
        None => row.extend((0..n).map(|_| Cell::Num(f64::NAN))),
    }
    row.push(sign_name(c).into());
    match reduced {
        None => {}
        Some(Ok(r)) => {
            row.extend(r.eigenvalues.iter().map(|v| Cell::Num(*v)));
            row.push(r.sign_class.name().into());
        }
        Some(Err(())) => {
            row.extend((1..n).map(|_| Cell::Num(f64::NAN)));
            row.push("error".into());
        }
    }
    row
}

fn unit_speed(model: &HamiltonianModel, q: &[f64], p: &[f64]) -> hamcurv_core::Result<Vec<f64>> {
    let x = PhasePoint::new(p.to_vec(), q.to_vec())?;
    let g = model.fiber_hessian(&x)?;
    let v = DVector::from_column_slice(p);
    let speed2 = v.dot(&(&g * &v)).abs();
    if speed2 == 0.0 {
        return Err(hamcurv_core::Error::InvalidArgument("cannot rescale a zero momentum".into()));
    }
    Ok(p.iter().map(|c| c / speed2.sqrt()).collect())
}

fn curvature_sweep(
    model: &HamiltonianModel,
    qs: &[Vec<f64>],
    p: &[f64],
    rescale: bool,
    method: CurvatureMethod,
    with_reduced: bool,
) -> Result<Artifacts, CliError> {
    let sc = SchwartzianControls::default();
    let method = if method == CurvatureMethod::Both { CurvatureMethod::ClosedForm } else { method };
    type Point = hamcurv_core::Result<(PhasePoint, CurvatureData, Option<Result<ReducedCurvatureData, String>>)>;
    // Custom systems have no closed-form r̂.
    let reduced_with = match model.family() {
        hamcurv_core::Family::Custom => ReducedMethod::Bracket,
        _ => ReducedMethod::ClosedForm,
    };
    let results: Vec<Point> = qs
        .par_iter()
        .map(|q| {
            let p = if rescale { unit_speed(model, q, p)? } else { p.to_vec() };
            let x = PhasePoint::new(p, q.clone())?;
            let c = curvature(model, &x, method, &sc)?.remove(0);
            let r = with_reduced
                .then(|| reduced_curvature(model, &x, reduced_with).map_err(|e| e.to_string()));
            Ok((x, c, r))
        })
        .collect();

    let mut table = Table::new(curvature_header(model, with_reduced));
    let mut log = String::new();
    let mut counts = std::collections::BTreeMap::<&str, usize>::new();
    let mut series = Vec::new();
    let mut errors = 0usize;
    for (q, res) in qs.iter().zip(&results) {
        match res {
            Ok((x, c, r)) => {
                *counts.entry(sign_name(c)).or_default() += 1;
                if let Some(Err(e)) = r {
                    line(&mut log, format!("reduced curvature failed at q = {q:?}: {e}"));
                }
                table.push(curvature_row(model, x, c, r.as_ref().map(|r| r.as_ref().map_err(|_| ()))));
                if model.dim() == 1 {
                    if let Some(ev) = &c.eigenvalues {
                        series.push((q[0], ev[0]));
                    }
                }
            }
            Err(e) => {
                errors += 1;
                line(&mut log, format!("curvature failed at q = {q:?}: {e}"));
                let n = model.dim();
                let mut row: Vec<Cell> = q.iter().chain(p).map(|v| Cell::Num(*v)).collect();
                row.extend((0..2 * n).map(|_| Cell::Num(f64::NAN)));
                row.push("error".into());
                if with_reduced {
                    row.extend((1..n).map(|_| Cell::Num(f64::NAN)));
                    row.push("error".into());
                }
                table.push(row);
            }
        }
    }
    line(&mut log, format!("{} points, {} errors", qs.len(), errors));
    for (k, v) in &counts {
        line(&mut log, format!("sign class {k}: {v}"));
    }
    let record = json!({
        "points": qs.len(),
        "errors": errors,
        "method": match method { CurvatureMethod::Schwartzian => "schwartzian", _ => "closed_form" },
        "sign_classes": counts,
    });
    let mut a = Artifacts::new(Status::Ok, record, log);
    a.table = Some(table);
    if !series.is_empty() {
        a.series.push(Series { name: "curvature".into(), x: model.coords()[0].clone(), y: "R".into(), points: series });
    }
    Ok(a)
}

fn domain_sweep(model: &HamiltonianModel, qs: &[Vec<f64>], energies: &[f64], seed: u64) -> Artifacts {
    let sweeps: Vec<DomainSweep> = energies
        .iter()
        .map(|&c| DomainSweep { c, verdicts: qs.par_iter().map(|q| check_domain(model, q, c, seed)).collect() })
        .collect();
    let report = inside_fraction_report(&sweeps);

    let coords = model.coords();
    let mut header = vec!["c".to_string()];
    header.extend(coords.iter().cloned());
    header.extend(["kappa", "kappa_exact", "potential", "lhs", "rhs", "inside"].map(String::from));
    let mut table = Table::new(header);
    let mut log = String::new();
    for sweep in &sweeps {
        for (q, v) in qs.iter().zip(&sweep.verdicts) {
            let mut row: Vec<Cell> = vec![sweep.c.into()];
            row.extend(q.iter().map(|v| Cell::Num(*v)));
            match v {
                Ok(v) => {
                    row.extend([v.kappa.into(), v.kappa_exact.to_string().into(), v.potential.into(), v.lhs.into(), v.rhs.into()]);
                    row.push(v.inside.to_string().into());
                }
                Err(e) => {
                    row.extend((0..5).map(|_| Cell::Num(f64::NAN)));
                    row.push("error".into());
                    if sweep.errors() <= 8 {
                        line(&mut log, format!("c = {}: q = {q:?}: {e}", sweep.c));
                    }
                }
            }
            table.push(row);
        }
        line(&mut log, format!("c = {}: inside fraction {} ({} errors)", sweep.c, sweep.inside_fraction(), sweep.errors()));
    }
    line(&mut log, format!("inside fraction non-decreasing in c: {}", report.non_decreasing));
    match report.full_from {
        Some(c) => line(&mut log, format!("whole grid inside from c = {c} on this grid")),
        None => line(&mut log, "whole grid inside at no tested energy"),
    }
    let record = json!({
        "points": qs.len(),
        "fractions": report.fractions.iter().map(|(c, f)| json!({ "c": c, "inside_fraction": f })).collect::<Vec<_>>(),
        "errors": sweeps.iter().map(|s| s.errors()).collect::<Vec<_>>(),
        "non_decreasing": report.non_decreasing,
        "full_from": report.full_from,
    });
    let mut a = Artifacts::new(Status::Ok, record, log);
    a.table = Some(table);
    a.series.push(Series { name: "inside_fraction".into(), x: "c".into(), y: "inside_fraction".into(), points: report.fractions.clone() });
    a
}
