//! Static checks: dimensions, expression variables and task/family
//! compatibility. Nothing is integrated or evaluated here.

use crate::model::{build_model, coordinates};
use crate::scenario::{
    CurvatureMethod, Evidence, FamilyName, Integrator, Point, ReducedMethodName, Scenario, SectionSpec, SweepOver, Task,
};

pub const TRIVIAL_ADMISSIBLE: &str = "admissible subspace trivial for n=1";

/// Ratio horizon / interval below which Lyapunov runs are refused.
const MIN_RENORMALIZATIONS: f64 = 100.0;

struct Checker {
    n: usize,
    family: FamilyName,
    diags: Vec<String>,
}

impl Checker {
    fn fail(&mut self, msg: impl Into<String>) {
        self.diags.push(msg.into());
    }

    fn require(&mut self, ok: bool, msg: impl FnOnce() -> String) {
        if !ok {
            self.diags.push(msg());
        }
    }

    fn vector(&mut self, key: &str, v: &[f64], len: usize) {
        self.require(v.len() == len, || format!("{key} has {} entries, expected {len}", v.len()));
        self.require(v.iter().all(|x| x.is_finite()), || format!("{key} has non-finite entries"));
    }

    fn point(&mut self, key: &str, p: &Point) {
        self.vector(&format!("{key}.p"), &p.p, self.n);
        self.vector(&format!("{key}.q"), &p.q, self.n);
    }

    fn positive(&mut self, key: &str, v: f64) {
        self.require(v > 0.0 && v.is_finite(), || format!("{key} must be positive, got {v}"));
    }

    fn integrator(&mut self, i: &Integrator) {
        for (key, v) in [("rel_tol", i.rel_tol), ("abs_tol", i.abs_tol), ("max_step", i.max_step)] {
            if let Some(v) = v {
                self.positive(&format!("task.integrator.{key}"), v);
            }
        }
    }

    fn needs_reduced(&mut self) {
        if self.n == 1 {
            self.fail(TRIVIAL_ADMISSIBLE);
        }
    }

    fn closed_form(&mut self, method: CurvatureMethod) {
        if self.family == FamilyName::Custom && method != CurvatureMethod::Schwartzian {
            self.fail("closed-form curvature is unavailable for the custom family; use method = \"schwartzian\"");
        }
    }

    fn reduced_closed_form(&mut self, method: Option<ReducedMethodName>) {
        if self.family == FamilyName::Custom && method != Some(ReducedMethodName::Bracket) {
            self.fail("closed-form reduced curvature is unavailable for the custom family; use method = \"bracket\"");
        }
    }

    fn needs_metric_or_natural(&mut self, what: &str) {
        if self.family == FamilyName::Custom {
            self.fail(format!("{what} is unavailable for the custom family"));
        }
    }

    fn section(&mut self, s: &SectionSpec, coords: &[String]) {
        match (&s.coordinate, &s.normal) {
            (Some(c), None) => {
                self.require(coords.contains(c), || format!("task.section.coordinate `{c}` is not a coordinate"));
                self.require(s.offset.is_none(), || "task.section.offset goes with `normal`; use `value`".into());
            }
            (None, Some(normal)) => {
                self.vector("task.section.normal", normal, 2 * self.n);
                self.require(normal.iter().any(|v| *v != 0.0), || "task.section.normal is zero".into());
                self.require(s.value.is_none(), || "task.section.value goes with `coordinate`; use `offset`".into());
            }
            _ => self.fail("task.section needs exactly one of `coordinate` or `normal`"),
        }
    }
}

/// Every problem found in the scenario; empty when it is runnable.
pub fn diagnostics(s: &Scenario) -> Vec<String> {
    let mut diags = Vec::new();
    if let Err(d) = build_model(&s.system) {
        diags.extend(d);
    }
    let coords = coordinates(&s.system).unwrap_or_default();
    let mut c = Checker { n: s.system.n, family: s.system.family, diags };

    if let Some(prefix) = &s.output.prefix {
        c.require(!prefix.is_empty() && !prefix.contains(['/', '\\']), || {
            "output.prefix must be a plain file stem".into()
        });
    }

    match &s.task {
        Task::Curvature { point, method, dt, richardson_levels } => {
            c.point("task.point", point);
            c.closed_form(*method);
            if let Some(dt) = dt {
                c.positive("task.dt", *dt);
            }
            if let Some(l) = richardson_levels {
                c.require(*l >= 1, || "task.richardson_levels must be at least 1".into());
            }
        }
        Task::Reduced { point, method } => {
            c.point("task.point", point);
            c.needs_reduced();
            c.reduced_closed_form(Some(*method));
        }
        Task::Flow { point, t_end, samples, integrator } => {
            c.point("task.point", point);
            c.require(t_end.is_finite() && *t_end != 0.0, || "task.t_end must be finite and nonzero".into());
            if let Some(k) = samples {
                c.require(*k >= 1, || "task.samples must be at least 1".into());
            }
            c.integrator(integrator);
        }
        Task::Equilibrium { guess } => c.point("task.guess", guess),
        Task::Floquet { guess, period_guess, section, floquet_tol, integrator } => {
            c.point("task.guess", guess);
            c.positive("task.period_guess", *period_guess);
            c.section(section, &coords);
            if let Some(t) = floquet_tol {
                c.positive("task.floquet_tol", *t);
            }
            c.integrator(integrator);
        }
        Task::Lyapunov { point, horizon, renorm_interval, integrator } => {
            c.point("task.point", point);
            lyapunov(&mut c, *horizon, *renorm_interval);
            c.integrator(integrator);
        }
        Task::Theorem1 { point, horizon, sample_stride, box_lo, box_hi, integrator } => {
            c.point("task.point", point);
            c.positive("task.horizon", *horizon);
            c.positive("task.sample_stride", *sample_stride);
            c.vector("task.box_lo", box_lo, 2 * c.n);
            c.vector("task.box_hi", box_hi, 2 * c.n);
            c.require(box_lo.iter().zip(box_hi).all(|(a, b)| a < b), || {
                "task.box_lo must be below task.box_hi in every entry".into()
            });
            c.integrator(integrator);
        }
        Task::Theorem2 {
            guess,
            evidence,
            period_guess,
            section,
            horizon,
            renorm_interval,
            samples,
            floquet_tol,
            method,
            integrator,
        } => {
            c.point("task.guess", guess);
            c.needs_reduced();
            match evidence {
                Evidence::Floquet => {
                    match period_guess {
                        Some(t) => c.positive("task.period_guess", *t),
                        None => c.fail("task.period_guess is required for evidence = \"floquet\""),
                    }
                    match section {
                        Some(s) => c.section(s, &coords),
                        None => c.fail("task.section is required for evidence = \"floquet\""),
                    }
                    if let Some(t) = floquet_tol {
                        c.positive("task.floquet_tol", *t);
                    }
                }
                Evidence::Lyapunov => match (horizon, renorm_interval) {
                    (Some(h), Some(r)) => lyapunov(&mut c, *h, *r),
                    _ => c.fail("task.horizon and task.renorm_interval are required for evidence = \"lyapunov\""),
                },
            }
            c.require(*method != Some(ReducedMethodName::Both), || {
                "task.method must be closed_form or bracket for theorem2".into()
            });
            c.reduced_closed_form(*method);
            if let Some(k) = samples {
                c.require(*k >= 64, || format!("task.samples must be at least 64, got {k}"));
            }
            c.integrator(integrator);
        }
        Task::Domain { q, c: energy } => {
            c.vector("task.q", q, c.n);
            c.require(energy.is_finite(), || "task.c must be finite".into());
            c.needs_metric_or_natural("the domain check");
        }
        Task::Sweep { over, grid, random, p, method, reduced, energies, .. } => {
            match (grid, random) {
                (Some(axes), None) => {
                    let n = c.n;
                    c.require(axes.len() == n, || format!("task.grid has {} axes, expected {n}", axes.len()));
                    for (i, a) in axes.iter().enumerate() {
                        c.require(a.count >= 1, || format!("task.grid[{i}].count must be at least 1"));
                        c.require(a.min.is_finite() && a.max.is_finite() && a.min <= a.max, || {
                            format!("task.grid[{i}] needs finite min <= max")
                        });
                    }
                }
                (None, Some(r)) => {
                    c.require(r.count >= 1, || "task.random.count must be at least 1".into());
                    c.vector("task.random.q_min", &r.q_min, c.n);
                    c.vector("task.random.q_max", &r.q_max, c.n);
                    c.require(r.q_min.iter().zip(&r.q_max).all(|(a, b)| a <= b), || {
                        "task.random.q_min must not exceed task.random.q_max".into()
                    });
                }
                _ => c.fail("task needs exactly one of `grid` or `random`"),
            }
            match over {
                SweepOver::Curvature => {
                    match p {
                        Some(p) => c.vector("task.p", p, c.n),
                        None => c.fail("task.p is required for a curvature sweep"),
                    }
                    c.closed_form(method.unwrap_or_default());
                    if *reduced {
                        c.needs_reduced();
                    }
                    c.require(energies.is_none(), || "task.energies only applies to domain sweeps".into());
                }
                SweepOver::Domain => {
                    c.needs_metric_or_natural("the domain check");
                    match energies {
                        Some(e) if !e.is_empty() => {
                            c.require(e.iter().all(|v| v.is_finite()), || "task.energies must be finite".into())
                        }
                        _ => c.fail("task.energies must list at least one energy for a domain sweep"),
                    }
                    c.require(p.is_none() && method.is_none() && !reduced, || {
                        "task.p, task.method and task.reduced only apply to curvature sweeps".into()
                    });
                }
            }
        }
    }
    c.diags
}

fn lyapunov(c: &mut Checker, horizon: f64, interval: f64) {
    c.positive("task.horizon", horizon);
    c.positive("task.renorm_interval", interval);
    if horizon > 0.0 && interval > 0.0 {
        let count = (horizon / interval).floor();
        c.require(count >= MIN_RENORMALIZATIONS, || {
            format!("horizon too short: {count} renormalizations, at least 100 required")
        });
    }
}
