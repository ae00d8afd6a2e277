//! Scenario files: TOML with a strict schema.
//!
//! ```toml
//! name = "pendulum-sweep"
//! seed = 7                 # optional, default 0
//!
//! [system]
//! family = "natural"       # natural | geodesic | mechanical | custom
//! n = 1
//! coords = ["q"]           # optional
//! potential = "cos(q)"
//!
//! [task]
//! kind = "sweep"
//! over = "curvature"
//! p = [0.5]
//! grid = [{ min = -3.0, max = 3.0, count = 100 }]
//!
//! [output]                 # optional
//! dir = "out"
//! ```
//!
//! Every table rejects keys it does not know.

use std::collections::BTreeMap;
use std::path::Path;

use serde::Deserialize;

use crate::error::CliError;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    #[serde(default)]
    pub seed: u64,
    pub system: System,
    pub task: Task,
    #[serde(default)]
    pub output: Output,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyName {
    Natural,
    Geodesic,
    #[serde(alias = "mechanical_on_manifold")]
    Mechanical,
    Custom,
}

impl FamilyName {
    pub fn name(self) -> &'static str {
        match self {
            FamilyName::Natural => "natural",
            FamilyName::Geodesic => "geodesic",
            FamilyName::Mechanical => "mechanical",
            FamilyName::Custom => "custom",
        }
    }
}

/// A metric entry may be written as a number or as an expression.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum Entry {
    Number(f64),
    Text(String),
}

impl Entry {
    pub fn source(&self) -> String {
        match self {
            Entry::Number(v) => format!("{v:?}"),
            Entry::Text(s) => s.clone(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct System {
    pub family: FamilyName,
    pub n: usize,
    /// Position names; default `q` for `n = 1`, else `q1 … qn`, and
    /// `z, theta` when a `profile` is given.
    pub coords: Option<Vec<String>>,
    pub potential: Option<String>,
    /// Full `n × n` matrix of entries in the position variables.
    pub metric: Option<Vec<Vec<Entry>>>,
    /// Profile `r(z)` of a surface of revolution; replaces `metric`.
    pub profile: Option<String>,
    /// `h(p, q)`; the momentum conjugate to coordinate `c` is `p_c`.
    pub hamiltonian: Option<String>,
    /// Coordinate name to period.
    #[serde(default)]
    pub periodic: BTreeMap<String, f64>,
    /// Use `−h` in place of `h`.
    #[serde(default)]
    pub time_reversed: bool,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Point {
    pub p: Vec<f64>,
    pub q: Vec<f64>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Integrator {
    pub rel_tol: Option<f64>,
    pub abs_tol: Option<f64>,
    pub max_step: Option<f64>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CurvatureMethod {
    #[default]
    ClosedForm,
    Schwartzian,
    Both,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReducedMethodName {
    #[default]
    ClosedForm,
    Bracket,
    Both,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Evidence {
    #[default]
    Floquet,
    Lyapunov,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepOver {
    Curvature,
    Domain,
}

/// Either `coordinate` + `value` or an explicit `normal` + `offset` in
/// `(p, q)`.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SectionSpec {
    pub coordinate: Option<String>,
    pub value: Option<f64>,
    pub normal: Option<Vec<f64>>,
    pub offset: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Axis {
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

/// Seeded uniform samples of positions in a box.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomPoints {
    pub count: usize,
    pub q_min: Vec<f64>,
    pub q_max: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Task {
    Curvature {
        point: Point,
        #[serde(default)]
        method: CurvatureMethod,
        dt: Option<f64>,
        richardson_levels: Option<usize>,
    },
    Reduced {
        point: Point,
        #[serde(default)]
        method: ReducedMethodName,
    },
    Flow {
        point: Point,
        t_end: f64,
        /// Uniform output times; every accepted step when absent.
        samples: Option<usize>,
        #[serde(default)]
        integrator: Integrator,
    },
    Equilibrium {
        guess: Point,
    },
    Floquet {
        guess: Point,
        period_guess: f64,
        section: SectionSpec,
        floquet_tol: Option<f64>,
        #[serde(default)]
        integrator: Integrator,
    },
    Lyapunov {
        point: Point,
        horizon: f64,
        renorm_interval: f64,
        #[serde(default)]
        integrator: Integrator,
    },
    Theorem1 {
        point: Point,
        horizon: f64,
        sample_stride: f64,
        box_lo: Vec<f64>,
        box_hi: Vec<f64>,
        #[serde(default)]
        integrator: Integrator,
    },
    Theorem2 {
        guess: Point,
        #[serde(default)]
        evidence: Evidence,
        period_guess: Option<f64>,
        section: Option<SectionSpec>,
        horizon: Option<f64>,
        renorm_interval: Option<f64>,
        samples: Option<usize>,
        method: Option<ReducedMethodName>,
        floquet_tol: Option<f64>,
        #[serde(default)]
        integrator: Integrator,
    },
    Domain {
        q: Vec<f64>,
        c: f64,
    },
    Sweep {
        over: SweepOver,
        /// One axis per coordinate; the grid is their product.
        grid: Option<Vec<Axis>>,
        random: Option<RandomPoints>,
        /// Momentum used at every point of a curvature sweep.
        p: Option<Vec<f64>>,
        /// Rescale `p` to `h_kinetic = ½` at each point.
        #[serde(default)]
        unit_speed: bool,
        method: Option<CurvatureMethod>,
        /// Add reduced-curvature columns (needs `n ≥ 2`).
        #[serde(default)]
        reduced: bool,
        energies: Option<Vec<f64>>,
    },
}

impl Task {
    pub fn kind(&self) -> &'static str {
        match self {
            Task::Curvature { .. } => "curvature",
            Task::Reduced { .. } => "reduced",
            Task::Flow { .. } => "flow",
            Task::Equilibrium { .. } => "equilibrium",
            Task::Floquet { .. } => "floquet",
            Task::Lyapunov { .. } => "lyapunov",
            Task::Theorem1 { .. } => "theorem1",
            Task::Theorem2 { .. } => "theorem2",
            Task::Domain { .. } => "domain",
            Task::Sweep { .. } => "sweep",
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Output {
    /// Directory for artifacts; `--out` takes precedence.
    pub dir: Option<String>,
    /// File stem; defaults to the scenario name.
    pub prefix: Option<String>,
}

/// Applies `key.path=value` overrides to the raw table. The value is read as
/// a TOML value when it parses as one, otherwise as a bare string.
pub fn apply_overrides(table: &mut toml::Table, overrides: &[String]) -> Result<(), CliError> {
    for item in overrides {
        let (key, raw) = item
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("override `{item}` is not of the form key=value")))?;
        let path: Vec<&str> = key.trim().split('.').collect();
        if path.iter().any(|k| k.is_empty()) {
            return Err(CliError::Config(format!("override key `{key}` is malformed")));
        }
        let value = parse_value(raw.trim());
        let (last, parents) = path.split_last().expect("split yields one piece");
        let mut cursor = &mut *table;
        for k in parents {
            let entry = cursor.entry(k.to_string()).or_insert_with(|| toml::Value::Table(toml::Table::new()));
            cursor = entry
                .as_table_mut()
                .ok_or_else(|| CliError::Config(format!("override `{key}`: `{k}` is not a table")))?;
        }
        cursor.insert(last.to_string(), value);
    }
    Ok(())
}

fn parse_value(raw: &str) -> toml::Value {
    let doc = format!("v = {raw}");
    match doc.parse::<toml::Table>() {
        Ok(mut t) => t.remove("v").expect("key present"),
        Err(_) => toml::Value::String(raw.to_string()),
    }
}

/// Parses scenario text, applying overrides between the raw parse and the
/// typed one. `origin` names the source in diagnostics.
pub fn parse_scenario(text: &str, overrides: &[String], origin: &str) -> Result<Scenario, CliError> {
    let mut table: toml::Table = text.parse().map_err(|e| CliError::Config(format!("{origin}: {e}")))?;
    apply_overrides(&mut table, overrides)?;
    if overrides.is_empty() {
        // Re-parse the text itself so that diagnostics carry line numbers.
        toml::from_str(text).map_err(|e| CliError::Config(format!("{origin}: {e}")))
    } else {
        Scenario::deserialize(toml::Value::Table(table))
            .map_err(|e| CliError::Config(format!("{origin} (after overrides): {e}")))
    }
}

pub fn load_scenario(path: &Path, overrides: &[String]) -> Result<Scenario, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    parse_scenario(&text, overrides, &path.display().to_string())
}
