use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn scenario(name: &str) -> PathBuf {
    root().join("scenarios").join(name)
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn hamcurv(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hamcurv")).args(args).output().expect("binary runs")
}

fn run(path: &Path, out: &Path, extra: &[&str]) -> Output {
    let mut args = vec!["run", path.to_str().unwrap(), "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    hamcurv(&args)
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn record(dir: &Path, stem: &str) -> serde_json::Value {
    let text = std::fs::read_to_string(dir.join(format!("{stem}.json"))).unwrap();
    serde_json::from_str(&text).unwrap()
}

#[test]
fn every_shipped_scenario_validates() {
    for entry in std::fs::read_dir(root().join("scenarios")).unwrap() {
        let path = entry.unwrap().path();
        let o = hamcurv(&["validate", path.to_str().unwrap()]);
        assert_eq!(stdout(&o), "ok\n", "{}", path.display());
        assert_eq!(o.status.code(), Some(0));
    }
}

#[test]
fn validate_reports_misconfigurations() {
    let cases = [
        ("reduced_n1.toml", "admissible subspace trivial for n=1"),
        ("geodesic_no_metric.toml", "geodesic family requires `metric` or `profile`"),
        ("misspelled_key.toml", "unknown field `familly`"),
    ];
    for (file, needle) in cases {
        let o = hamcurv(&["validate", fixture(file).to_str().unwrap()]);
        assert!(stdout(&o).contains(needle), "{file}: {}", stdout(&o));
        assert_eq!(o.status.code(), Some(2), "{file}");
    }
}

#[test]
fn unknown_keys_abort_a_run() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&fixture("misspelled_key.toml"), dir.path(), &[]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("familly") && err.contains("line 4"), "{err}");
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 0);
}

#[test]
fn pendulum_sweep_matches_the_second_derivative() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&scenario("pendulum_sweep.toml"), dir.path(), &[]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let mut reader = csv::Reader::from_path(dir.path().join("pendulum-sweep.csv")).unwrap();
    let header = reader.headers().unwrap().clone();
    let col = |name: &str| header.iter().position(|h| h == name).unwrap();
    let (iq, ir, is) = (col("q"), col("R"), col("sign_class"));
    let mut rows = 0;
    for row in reader.records() {
        let row = row.unwrap();
        let q: f64 = row[iq].parse().unwrap();
        let r: f64 = row[ir].parse().unwrap();
        // U = cos q, so R = U'' = -cos q.
        assert!((r + q.cos()).abs() <= 1e-6 * q.cos().abs(), "q = {q}: {r}");
        assert_eq!(&row[is], if q.cos() > 0.0 { "negative" } else { "positive" });
        rows += 1;
    }
    assert_eq!(rows, 100);
}

#[test]
fn hyperboloid_certificate_passes_and_sphere_fails() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&scenario("hyperboloid_theorem2.toml"), dir.path(), &[]);
    assert_eq!(o.status.code(), Some(0));
    let r = record(dir.path(), "hyperboloid-waist");
    assert_eq!(r["status"], "ok");
    assert_eq!(r["result"]["hyperbolic"], true);
    let big = r["result"]["floquet"]["multipliers"][0][0].as_f64().unwrap();
    assert!((big / (2.0 * std::f64::consts::PI).exp() - 1.0).abs() < 1e-4);

    let o = run(&scenario("sphere_theorem2.toml"), dir.path(), &[]);
    assert_eq!(o.status.code(), Some(1));
    let r = record(dir.path(), "sphere-equator");
    assert_eq!(r["result"]["hypotheses_hold"], false);
    assert_eq!(r["result"]["hyperbolic"], false);
    assert!(stdout(&o).contains("negative reduced curvature  no"));
}

#[test]
fn overrides_apply_before_validation() {
    let dir = tempfile::tempdir().unwrap();
    let path = scenario("saddle_theorem1.toml");
    let o = run(&path, dir.path(), &["--override", "system.time_reversed=true", "--override", "task.point.p=[0.5]"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    // The stable-manifold start point diverges under the reversed flow.
    let o = run(&path, dir.path(), &["--override", "system.time_reversed=true"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(record(dir.path(), "saddle")["result"]["hypotheses"]["stayed_in_box"], false);

    let o = hamcurv(&["validate", path.to_str().unwrap(), "--override", "task.box_lo=[-2.0]"]);
    assert!(stdout(&o).contains("task.box_lo has 1 entries, expected 2"));
}

#[test]
fn seeds_drive_random_sweeps() {
    let dir = tempfile::tempdir().unwrap();
    let path = scenario("pendulum_sweep.toml");
    let random = ["--override", "task.random={ count = 5, q_min = [-1.0], q_max = [1.0] }"];
    // Both a grid and random samples is a configuration error.
    assert_eq!(run(&path, dir.path(), &random).status.code(), Some(2));

    let text = std::fs::read_to_string(&path).unwrap().replace("grid = ", "# grid = ");
    let edited = dir.path().join("random.toml");
    std::fs::write(&edited, text).unwrap();
    let sweep = |seed: &str, out: &str| {
        let out = dir.path().join(out);
        let o = run(&edited, &out, &[random[0], random[1], "--seed", seed]);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
        assert_eq!(record(&out, "pendulum-sweep")["seed"], seed.parse::<u64>().unwrap());
        std::fs::read(out.join("pendulum-sweep.csv")).unwrap()
    };
    assert_eq!(sweep("3", "a"), sweep("3", "b"));
    assert_ne!(sweep("3", "a"), sweep("4", "c"));
}

#[test]
fn plot_series_only_on_request() {
    let dir = tempfile::tempdir().unwrap();
    let path = scenario("pendulum_flow.toml");
    run(&path, dir.path(), &[]);
    assert!(!dir.path().join("pendulum-flow.plot.phase_q.csv").exists());
    let o = run(&path, dir.path(), &["--emit-plot-data"]);
    assert_eq!(o.status.code(), Some(0));
    let phase = std::fs::read_to_string(dir.path().join("pendulum-flow.plot.phase_q.csv")).unwrap();
    assert!(phase.starts_with("q,p_q\n"));
    assert_eq!(phase.lines().count(), 402);
    let table = std::fs::read_to_string(dir.path().join("pendulum-flow.csv")).unwrap();
    assert!(table.starts_with("t,p_q,q,h\n"));
}

#[test]
fn task_errors_carry_module_context() {
    let dir = tempfile::tempdir().unwrap();
    let path = scenario("pendulum_curvature.toml");
    // log is undefined at q = -1.
    let o = run(&path, dir.path(), &["--override", "system.potential=log(q)", "--override", "task.point.q=[-1.0]"]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.starts_with("error: curvature: "), "{err}");
}
