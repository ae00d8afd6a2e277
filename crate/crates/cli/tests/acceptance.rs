//! Acceptance gate. Runs every criterion, prints one PASS/FAIL line each and
//! exits nonzero if any fails.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::f64::consts::PI;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use common::*;
use hamcurv_core::curvature::{
    curvature_closed_form, curvature_schwartzian, g_form, reduced_curvature, ReducedMethod, KAPPA_CAL,
};
use hamcurv_core::expr::Expression;
use hamcurv_core::flow::{
    find_periodic_orbit, integrate, lyapunov_exponents, variational_flow, Controls, Section,
};
use hamcurv_core::hyperbolicity::{
    check_domain, check_theorem1, check_theorem2_orbit, inside_fraction_report, sweep_domain, Theorem1Config,
    Theorem2Config,
};
use hamcurv_core::linalg::symplectic_defect;
use hamcurv_core::{HamiltonianModel, MetricField, PhasePoint, SurfaceOfRevolution};
use nalgebra::{DMatrix, DVector};

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

/// Scalar relative error `|a − b| / |b|`.
fn rel(a: f64, b: f64) -> f64 {
    if b == 0.0 {
        (a - b).abs()
    } else {
        ((a - b) / b).abs()
    }
}

fn max(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().fold(0.0, f64::max)
}

fn surface_box() -> [(f64, f64); 2] {
    [(-1.0, 1.0), (0.0, 2.0 * PI)]
}

/// 1. The oracle pins the normalization; the pinned Schwartzian then
///    reproduces `R = U''` on the pendulum.
fn calibration() -> Outcome {
    let start = Instant::now();
    let m = pendulum();
    let mut kappa_err: f64 = 0.0;
    for (p, q) in [(0.7, 0.3), (-0.4, 2.5)] {
        let x = PhasePoint::new(vec![p], vec![q]).unwrap();
        let oracle = ProjectorOracle::new(&m, x.clone()).curvature()[(0, 0)];
        let raw = curvature_schwartzian(&m, &x, &Default::default()).map_err(|e| e.to_string())?.r[(0, 0)] / KAPPA_CAL;
        kappa_err = kappa_err.max((oracle / raw - KAPPA_CAL).abs());
    }
    let mut rng = rng(1);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let x = sample_point(&m, &mut rng, &[(-3.0, 3.0)]);
        let r = curvature_schwartzian(&m, &x, &Default::default()).map_err(|e| e.to_string())?.r[(0, 0)];
        worst = worst.max(rel(r, -x.q[0].cos()));
    }
    let elapsed = start.elapsed();
    check(
        kappa_err < 1e-4 && worst <= 1e-6 && elapsed < Duration::from_secs(5),
        format!("|kappa_oracle - {KAPPA_CAL}| = {kappa_err:.1e}, max rel err {worst:.1e} over 100 points, {elapsed:.2?}"),
    )
}

/// 2. Schwartzian against closed forms on four systems.
fn method_agreement() -> Outcome {
    let start = Instant::now();
    let systems: [(&str, HamiltonianModel, Vec<(f64, f64)>); 4] = [
        ("pendulum", pendulum(), vec![(-3.0, 3.0)]),
        ("sphere", sphere(), vec![(0.3, 2.8), (0.0, 2.0 * PI)]),
        ("hyperboloid", hyperboloid(), surface_box().to_vec()),
        ("tilted hyperboloid", tilted_hyperboloid(), surface_box().to_vec()),
    ];
    let mut parts = Vec::new();
    let mut worst_all: f64 = 0.0;
    for (seed, (name, m, qb)) in systems.iter().enumerate() {
        let mut rng = rng(10 + seed as u64);
        let mut worst: f64 = 0.0;
        for _ in 0..50 {
            let x = sample_point(m, &mut rng, qb);
            let a = curvature_schwartzian(m, &x, &Default::default()).map_err(|e| format!("{name}: {e}"))?;
            let b = curvature_closed_form(m, &x).map_err(|e| format!("{name}: {e}"))?;
            worst = worst.max(rel_err(&a.r, &b.r));
        }
        worst_all = worst_all.max(worst);
        parts.push(format!("{name} {worst:.1e}"));
    }
    let elapsed = start.elapsed();
    check(
        worst_all <= 1e-5 && elapsed < Duration::from_secs(30),
        format!("max rel err: {}; {elapsed:.2?}", parts.join(", ")),
    )
}

/// Unit vector spanning `{ξ : ⟨∂h/∂p, ξ⟩ = 0}` for `n = 2`.
fn admissible(hp: &DVector<f64>) -> DVector<f64> {
    DVector::from_vec(vec![-hp[1], hp[0]]).normalize()
}

/// 3. Bracket method against the per-example closed expressions, written
///    out here independently of the library's specializations.
fn reduced_agreement() -> Outcome {
    let coords = ["q1", "q2"];
    let u_src = "cos(q1) + 0.3*q1*q2 - 0.2*q2^2";
    let natural_model = natural(u_src, &coords);
    let u = Expression::parse(u_src, &names(&coords)).unwrap();
    let tilted = tilted_hyperboloid();
    let hyper = hyperboloid();

    let mut parts = Vec::new();
    let mut worst_all: f64 = 0.0;

    // Natural: r̂(ξ) = ⟨∇²U ξ, ξ⟩ + 3⟨dU, ξ⟩² / |p|², ξ ⊥ p.
    let mut rng1 = rng(20);
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let x = sample_point(&natural_model, &mut rng1, &[(-2.0, 2.0), (-2.0, 2.0)]);
        let jet = u.eval_jet(&x.q).unwrap();
        let hess = DMatrix::from_fn(2, 2, |i, j| jet.second(i, j));
        let du = DVector::from_fn(2, |i, _| jet.gradient()[i]);
        let p = DVector::from_column_slice(&x.p);
        let xi = admissible(&p);
        let expected = xi.dot(&(&hess * &xi)) + 3.0 * du.dot(&xi).powi(2) / p.norm_squared();
        let got = reduced_curvature(&natural_model, &x, ReducedMethod::Bracket).map_err(|e| e.to_string())?;
        worst = worst.max(rel(got.eigenvalues[0], expected));
    }
    worst_all = worst_all.max(worst);
    parts.push(format!("natural {worst:.1e}"));

    // Geodesic: r̂ = r on the admissible line; on a unit-speed surface
    // geodesic that is the Gaussian curvature K = -1/(1+2z²)².
    let mut rng2 = rng(21);
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let x = sample_point(&hyper, &mut rng2, &surface_box());
        let z = x.q[0];
        let expected = -1.0 / (1.0 + 2.0 * z * z).powi(2);
        let got = reduced_curvature(&hyper, &x, ReducedMethod::Bracket).map_err(|e| e.to_string())?;
        worst = worst.max(rel(got.eigenvalues[0], expected));
    }
    worst_all = worst_all.max(worst);
    parts.push(format!("geodesic {worst:.1e}"));

    // Mechanical: r̂(ξ) = r(ξ) + 3 g(d_qU, ξ)² / (2(h − U)), with r from the
    // Schwartzian and g(d_qU, ξ) = dUᵀ g⁻¹ ξ.
    let mut rng3 = rng(22);
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let x = sample_point(&tilted, &mut rng3, &surface_box());
        let ginv = tilted.metric().unwrap().matrix(&x.q).unwrap().try_inverse().unwrap();
        let p = DVector::from_column_slice(&x.p);
        let hp = &ginv * &p;
        let xi = admissible(&hp);
        let du = DVector::from_vec(vec![0.1, 0.0]);
        let r = curvature_schwartzian(&tilted, &x, &Default::default()).map_err(|e| e.to_string())?.r;
        let form = xi.dot(&(&ginv * &r * &xi));
        let kinetic2 = p.dot(&hp);
        let expected = (form + 3.0 * du.dot(&(&ginv * &xi)).powi(2) / kinetic2) / xi.dot(&(&ginv * &xi));
        let got = reduced_curvature(&tilted, &x, ReducedMethod::Bracket).map_err(|e| e.to_string())?;
        worst = worst.max(rel(got.eigenvalues[0], expected));
    }
    worst_all = worst_all.max(worst);
    parts.push(format!("mechanical {worst:.1e}"));

    check(worst_all <= 1e-5, format!("max rel err: {}", parts.join(", ")))
}

/// 4. Structural properties of `g` and `R` at 100 points per family.
fn lemma_suite() -> Outcome {
    let families: [(&str, HamiltonianModel, Vec<(f64, f64)>, bool); 4] = [
        ("natural", natural("cos(q1) + 0.3*q1*q2 - 0.2*q2^2", &["q1", "q2"]), vec![(-2.0, 2.0), (-2.0, 2.0)], false),
        ("sphere", sphere(), vec![(0.3, 2.8), (0.0, 2.0 * PI)], true),
        ("hyperboloid", hyperboloid(), surface_box().to_vec(), true),
        ("tilted hyperboloid", tilted_hyperboloid(), surface_box().to_vec(), false),
    ];
    let (mut asym, mut adj, mut rev, mut euler) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for (seed, (name, m, qb, homogeneous)) in families.iter().enumerate() {
        let reversed = m.reversed();
        let mut rng = rng(30 + seed as u64);
        for _ in 0..100 {
            let x = sample_point(m, &mut rng, qb);
            let g = g_form(m, &x).map_err(|e| format!("{name}: {e}"))?.matrix;
            asym = asym.max((&g - g.transpose()).abs().max());
            let pairs = [
                (curvature_closed_form(m, &x), curvature_closed_form(&reversed, &x)),
                (
                    curvature_schwartzian(m, &x, &Default::default()),
                    curvature_schwartzian(&reversed, &x, &Default::default()),
                ),
            ];
            for (c, cr) in pairs {
                let (c, cr) = (c.map_err(|e| format!("{name}: {e}"))?, cr.map_err(|e| format!("{name}: {e}"))?);
                adj = adj.max(c.self_adjoint_defect);
                rev = rev.max(rel_err(&cr.r, &c.r));
                if *homogeneous {
                    let p = DVector::from_column_slice(&x.p);
                    euler = euler.max((&c.r * &p).norm() / (c.r.norm() * p.norm()));
                }
            }
        }
    }
    check(
        asym == 0.0 && adj <= 1e-6 && rev <= 1e-7 && euler <= 1e-6,
        format!("g asymmetry {asym:.1e}, gR self-adjoint defect {adj:.1e}, R(-h) vs R(h) {rev:.1e}, Euler kernel {euler:.1e}"),
    )
}

fn theorem1_config() -> Theorem1Config {
    Theorem1Config {
        horizon: 20.0,
        sample_stride: 0.5,
        box_lo: vec![-2.0; 2],
        box_hi: vec![2.0; 2],
        controls: Controls::default(),
    }
}

/// 5. Inverted oscillator on its stable manifold, and the reversed system on
///    the other branch. Returns the energy drifts for criterion 8.
fn theorem1(drifts: &mut Vec<f64>) -> Outcome {
    let m = natural("-0.5*q^2", &["q"]);
    let cases = [("forward", m.clone(), -0.5), ("reversed", m.reversed(), 0.5)];
    let mut parts = Vec::new();
    let mut ok = true;
    for (name, model, p) in cases {
        let x0 = PhasePoint::new(vec![p], vec![0.5]).unwrap();
        let c = check_theorem1(&model, &x0, &theorem1_config()).map_err(|e| e.to_string())?;
        drifts.push(c.energy_drift);
        let mut spectrum: Vec<f64> = c.spectrum.iter().map(|z| z.re).collect();
        spectrum.sort_by(f64::total_cmp);
        let spec_err = (spectrum[0] + 1.0).abs().max((spectrum[1] - 1.0).abs())
            + max(c.spectrum.iter().map(|z| z.im.abs()));
        let residual = c.convergence_residual.unwrap_or(f64::INFINITY);
        ok &= c.hypotheses_hold() && residual <= 1e-6 && spec_err <= 1e-8 && c.hyperbolic;
        parts.push(format!("{name}: residual {residual:.1e}, spectrum err {spec_err:.1e}, hyperbolic {}", c.hyperbolic));
    }
    check(ok, parts.join("; "))
}

/// 6. Hyperboloid waist against `e^{±2π}`, and the sphere equator control.
fn theorem2(drifts: &mut Vec<f64>) -> Outcome {
    let section = Section::coordinate(2, 1, 0.0);
    let controls = Controls::tight();
    let config = Theorem2Config::default();

    let waist = PhasePoint::new(vec![0.0, 1.0], vec![0.0, 0.0]).unwrap();
    let m = hyperboloid();
    let orbit = find_periodic_orbit(&m, &waist, 6.0, &section, &controls).map_err(|e| e.to_string())?;
    let c = check_theorem2_orbit(&m, &orbit, &config).map_err(|e| e.to_string())?;
    drifts.push(c.hypotheses.level_deviation);
    let fl = c.floquet.clone().ok_or("no multipliers")?;
    let big = (2.0 * PI).exp();
    let mult_err = rel(fl.multipliers[0].re, big).max(rel(fl.multipliers[1].re, 1.0 / big));
    let margin = c.hypotheses.worst_margin;
    let waist_ok = c.hypotheses_hold() && c.hyperbolic && mult_err <= 1e-4 && margin <= -0.9;

    let equator = PhasePoint::new(vec![0.0, 1.0], vec![PI / 2.0, 0.0]).unwrap();
    let s = sphere();
    let orbit = find_periodic_orbit(&s, &equator, 6.0, &section, &controls).map_err(|e| e.to_string())?;
    let cs = check_theorem2_orbit(&s, &orbit, &config).map_err(|e| e.to_string())?;
    drifts.push(cs.hypotheses.level_deviation);
    let unit = cs
        .floquet
        .as_ref()
        .map(|f| max(f.multipliers.iter().map(|l| (l.re.hypot(l.im) - 1.0).abs())))
        .unwrap_or(f64::INFINITY);
    let sphere_ok = !cs.hypotheses_hold() && !cs.hyperbolic && unit < 1e-3;

    check(
        waist_ok && sphere_ok,
        format!(
            "waist: multiplier rel err {mult_err:.1e}, margin {margin:.3}, hyperbolic {}; equator: hypotheses hold {}, max ||lambda|-1| {unit:.1e}",
            c.hyperbolic,
            cs.hypotheses_hold()
        ),
    )
}

/// 7. The Anosov-domain inequality on three configurations.
fn domain() -> Outcome {
    let strip: Vec<Vec<f64>> = (0..21)
        .flat_map(|i| (0..8).map(move |j| vec![-1.0 + 0.1 * i as f64, 2.0 * PI * j as f64 / 8.0]))
        .collect();
    let free = sweep_domain(&hyperboloid(), &strip, 1.0, 0);
    let free_fraction = free.inside_fraction();

    let plane: Vec<Vec<f64>> = strip.iter().map(|q| vec![q[0], q[1] - PI]).collect();
    let flat = HamiltonianModel::geodesic(MetricField::euclidean(2));
    let flat_sweep = sweep_domain(&flat, &plane, 1.0, 0);
    let flat_fraction = flat_sweep.inside_fraction();
    let flat_errors = flat_sweep.errors();

    let u = Expression::parse("z^2", &SurfaceOfRevolution::coords()).unwrap();
    let well = HamiltonianModel::mechanical(SurfaceOfRevolution::hyperboloid().metric(), u).unwrap();
    let sweeps: Vec<_> = [2.0, 5.0, 10.0].iter().map(|&c| sweep_domain(&well, &strip, c, 0)).collect();
    let report = inside_fraction_report(&sweeps);
    let fractions: Vec<String> = report.fractions.iter().map(|(c, f)| format!("{c}:{f:.3}")).collect();

    // A point check that the verdict carries through the single-point API.
    let single = check_domain(&hyperboloid(), &[0.0, 0.0], 1.0, 0).map_err(|e| e.to_string())?;

    check(
        free_fraction == 1.0 && free.errors() == 0 && flat_fraction == 0.0 && flat_errors == 0 && report.non_decreasing && single.inside,
        format!(
            "U=0 hyperboloid inside {free_fraction}, flat inside {flat_fraction}, U=z^2 fractions [{}] non-decreasing {}",
            fractions.join(", "),
            report.non_decreasing
        ),
    )
}

/// 8. Symplectic frames, oscillator exponents and energy drift. The natural
///    system here is confining so that its orbits stay bounded over the
///    horizon; on escaping orbits the absolute drift grows with `|x|²`.
fn hygiene(drifts: &mut Vec<f64>) -> Outcome {
    let families: [(HamiltonianModel, Vec<(f64, f64)>); 4] = [
        (natural("cos(q1) + 0.2*q1^2 + 0.3*q1*q2 + 0.2*q2^2", &["q1", "q2"]), vec![(-2.0, 2.0), (-2.0, 2.0)]),
        (sphere(), vec![(0.3, 2.8), (0.0, 2.0 * PI)]),
        (hyperboloid(), surface_box().to_vec()),
        (tilted_hyperboloid(), surface_box().to_vec()),
    ];
    let controls = Controls::default();
    let times: Vec<f64> = (1..=10).map(|k| 0.5 * k as f64).collect();
    let mut defect: f64 = 0.0;
    for (seed, (m, qb)) in families.iter().enumerate() {
        let mut rng = rng(40 + seed as u64);
        for _ in 0..10 {
            let x0 = sample_point(m, &mut rng, qb);
            for f in variational_flow(m, &x0, &times, &controls).map_err(|e| e.to_string())? {
                let norm = f.phi.norm();
                defect = defect.max(symplectic_defect(&f.phi) / (norm * norm));
            }
            let t = integrate(m, &x0, 20.0, &controls).map_err(|e| e.to_string())?;
            drifts.push(t.energy_drift);
        }
    }

    let oscillator = natural("0.5*(q1^2 + q2^2)", &["q1", "q2"]);
    let x0 = PhasePoint::new(vec![0.3, -0.2], vec![1.0, 0.5]).unwrap();
    let spectrum = lyapunov_exponents(&oscillator, &x0, 200.0, 1.0, &controls).map_err(|e| e.to_string())?;
    let lyap = max(spectrum.exponents.iter().map(|e| e.abs()));

    let drift = max(drifts.iter().copied());
    check(
        defect <= 1e-7 && lyap <= 5e-3 && drift <= 1e-8,
        format!(
            "symplectic defect {defect:.1e}, max |oscillator exponent| {lyap:.1e}, max energy drift {drift:.1e} over {} trajectories",
            drifts.len()
        ),
    )
}

/// 9. The command line: byte-identical sweeps and the validate diagnostics.
fn cli() -> Outcome {
    let bin = env!("CARGO_BIN_EXE_hamcurv");
    let manifest = Path::new(env!("CARGO_MANIFEST_DIR"));
    let sweep = manifest.join("../../scenarios/pendulum_sweep.toml");
    let out = std::env::temp_dir().join(format!("hamcurv-acceptance-{}", std::process::id()));
    let mut csvs = Vec::new();
    for run in ["a", "b"] {
        let dir = out.join(run);
        let o = Command::new(bin)
            .args(["run", sweep.to_str().unwrap(), "--out", dir.to_str().unwrap()])
            .output()
            .map_err(|e| e.to_string())?;
        if o.status.code() != Some(0) {
            return Err(format!("sweep run failed: {}", String::from_utf8_lossy(&o.stderr)));
        }
        csvs.push(std::fs::read(dir.join("pendulum-sweep.csv")).map_err(|e| e.to_string())?);
    }
    let _ = std::fs::remove_dir_all(&out);
    let identical = csvs[0] == csvs[1];
    let text = String::from_utf8_lossy(&csvs[0]);
    let header = text.lines().next().unwrap_or_default().to_string();
    let rows = text.lines().count() - 1;
    let columns = ["q", "R", "sign_class"].iter().all(|c| header.split(',').any(|h| h == *c));

    let cases = [
        ("reduced_n1.toml", "admissible subspace trivial for n=1"),
        ("geodesic_no_metric.toml", "geodesic family requires `metric` or `profile`"),
        ("misspelled_key.toml", "unknown field `familly`"),
    ];
    let mut caught = 0;
    for (file, needle) in cases {
        let o = Command::new(bin)
            .args(["validate", manifest.join("tests/fixtures").join(file).to_str().unwrap()])
            .output()
            .map_err(|e| e.to_string())?;
        if o.status.code() == Some(2) && String::from_utf8_lossy(&o.stdout).contains(needle) {
            caught += 1;
        }
    }
    check(
        identical && rows == 100 && columns && caught == 3,
        format!("byte-identical {identical}, {rows} rows, header `{header}`, validate caught {caught}/3"),
    )
}

fn main() {
    let mut drifts = Vec::new();
    let mut results: Vec<(u32, &str, Outcome, Duration)> = Vec::new();
    let mut record = |id, name, f: &mut dyn FnMut() -> Outcome| {
        let start = Instant::now();
        let outcome = f();
        results.push((id, name, outcome, start.elapsed()));
        let (id, name, outcome, elapsed) = results.last().unwrap();
        let (tag, detail) = match outcome {
            Ok(d) => ("PASS", d),
            Err(d) => ("FAIL", d),
        };
        println!("criterion {id}: {tag} {name}: {detail} [{elapsed:.2?}]");
    };
    record(1, "calibration pin", &mut calibration);
    record(2, "method agreement", &mut method_agreement);
    record(3, "reduced-curvature agreement", &mut reduced_agreement);
    record(4, "lemma suite", &mut lemma_suite);
    record(5, "trajectory certificate", &mut || theorem1(&mut drifts));
    record(6, "periodic-orbit certificate", &mut || theorem2(&mut drifts));
    record(7, "domain checker", &mut domain);
    record(8, "numerics hygiene", &mut || hygiene(&mut drifts));
    record(9, "cli determinism", &mut cli);
    let failed = results.iter().filter(|r| r.2.is_err()).count();
    println!("acceptance: {} of {} criteria passed", results.len() - failed, results.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
