//! Building a [`HamiltonianModel`] from the `[system]` block.

use std::f64::consts::TAU;

use hamcurv_core::expr::Expression;
use hamcurv_core::models::SURFACE_COORDS;
use hamcurv_core::{HamiltonianModel, MetricField, SurfaceOfRevolution};

use crate::scenario::{FamilyName, System};

/// Position names for the system, or a diagnostic.
pub fn coordinates(sys: &System) -> Result<Vec<String>, String> {
    if sys.n == 0 {
        return Err("system.n must be at least 1".into());
    }
    if sys.profile.is_some() {
        if sys.n != 2 {
            return Err(format!("system.profile describes a surface (n = 2) but n = {}", sys.n));
        }
        let surface: Vec<String> = SURFACE_COORDS.iter().map(|s| s.to_string()).collect();
        if let Some(c) = &sys.coords {
            if *c != surface {
                return Err(format!("system.coords must be {surface:?} when a profile is given"));
            }
        }
        return Ok(surface);
    }
    match &sys.coords {
        Some(c) if c.len() != sys.n => Err(format!("system.coords has {} names but n = {}", c.len(), sys.n)),
        Some(c) => Ok(c.clone()),
        None if sys.n == 1 => Ok(vec!["q".into()]),
        None => Ok((1..=sys.n).map(|i| format!("q{i}")).collect()),
    }
}

/// Name of the momentum conjugate to `coord` in custom Hamiltonians.
pub fn momentum_name(coord: &str) -> String {
    format!("p_{coord}")
}

fn metric(sys: &System, coords: &[String], diags: &mut Vec<String>) -> Option<MetricField> {
    match (&sys.metric, &sys.profile) {
        (Some(_), Some(_)) => {
            diags.push("system.metric and system.profile are mutually exclusive".into());
            None
        }
        (Some(rows), None) => {
            let n = coords.len();
            if rows.len() != n || rows.iter().any(|r| r.len() != n) {
                diags.push(format!("system.metric must be a {n}x{n} matrix"));
                return None;
            }
            let entries: Vec<Vec<String>> = rows.iter().map(|r| r.iter().map(|e| e.source()).collect()).collect();
            MetricField::new(coords, &entries).map_err(|e| diags.push(format!("system.metric: {e}"))).ok()
        }
        (None, Some(profile)) => SurfaceOfRevolution::new(profile)
            .map(|s| s.metric())
            .map_err(|e| diags.push(format!("system.profile: {e}")))
            .ok(),
        (None, None) => {
            diags.push(format!("{} family requires `metric` or `profile`", sys.family.name()));
            None
        }
    }
}

fn potential(sys: &System, coords: &[String], diags: &mut Vec<String>) -> Option<Expression> {
    match &sys.potential {
        Some(src) => Expression::parse(src, coords).map_err(|e| diags.push(format!("system.potential: {e}"))).ok(),
        None => {
            diags.push(format!("{} family requires `potential`", sys.family.name()));
            None
        }
    }
}

fn reject(sys: &System, diags: &mut Vec<String>) {
    let present = [
        ("potential", sys.potential.is_some()),
        ("metric", sys.metric.is_some()),
        ("profile", sys.profile.is_some()),
        ("hamiltonian", sys.hamiltonian.is_some()),
    ];
    let allowed: &[&str] = match sys.family {
        FamilyName::Natural => &["potential"],
        FamilyName::Geodesic => &["metric", "profile"],
        FamilyName::Mechanical => &["potential", "metric", "profile"],
        FamilyName::Custom => &["hamiltonian"],
    };
    for (key, set) in present {
        if set && !allowed.contains(&key) {
            diags.push(format!("system.{key} is not used by the {} family", sys.family.name()));
        }
    }
}

/// Builds the model, collecting every problem found.
pub fn build_model(sys: &System) -> Result<HamiltonianModel, Vec<String>> {
    let coords = coordinates(sys).map_err(|d| vec![d])?;
    let mut diags = Vec::new();
    reject(sys, &mut diags);
    let model = match sys.family {
        FamilyName::Natural => potential(sys, &coords, &mut diags).map(HamiltonianModel::natural),
        FamilyName::Geodesic => metric(sys, &coords, &mut diags).map(HamiltonianModel::geodesic),
        FamilyName::Mechanical => {
            let g = metric(sys, &coords, &mut diags);
            let u = potential(sys, &coords, &mut diags);
            match (g, u) {
                (Some(g), Some(u)) => {
                    HamiltonianModel::mechanical(g, u).map_err(|e| diags.push(format!("system: {e}"))).ok()
                }
                _ => None,
            }
        }
        FamilyName::Custom => match &sys.hamiltonian {
            Some(src) => {
                let mut vars: Vec<String> = coords.iter().map(|c| momentum_name(c)).collect();
                vars.extend(coords.iter().cloned());
                Expression::parse(src, &vars)
                    .and_then(HamiltonianModel::custom)
                    .map_err(|e| diags.push(format!("system.hamiltonian: {e}")))
                    .ok()
            }
            None => {
                diags.push("custom family requires `hamiltonian`".into());
                None
            }
        },
    };

    let mut periods: Vec<Option<f64>> = vec![None; coords.len()];
    if sys.profile.is_some() {
        periods[1] = Some(TAU);
    }
    for (name, period) in &sys.periodic {
        match coords.iter().position(|c| c == name) {
            Some(i) if *period > 0.0 && period.is_finite() => periods[i] = Some(*period),
            Some(_) => diags.push(format!("system.periodic.{name} must be positive")),
            None => diags.push(format!("system.periodic names unknown coordinate `{name}`")),
        }
    }

    match model {
        Some(m) if diags.is_empty() => {
            let m = m.with_periods(periods).map_err(|e| vec![format!("system.periodic: {e}")])?;
            Ok(if sys.time_reversed { m.reversed() } else { m })
        }
        _ => Err(diags),
    }
}
