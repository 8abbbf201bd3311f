use std::path::Path;
use std::process::{Command, Output};

use granot::emit::SERIES_CSV_HEADER;
use granot::report::REPORT_CSV_HEADER;
use granot_core::moments::MomentState;

fn granot(args: &[&str], out_dir: Option<&Path>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_granot"));
    cmd.args(args);
    if let Some(dir) = out_dir {
        cmd.env("GRANOT_OUT_DIR", dir);
    } else {
        cmd.env_remove("GRANOT_OUT_DIR");
    }
    cmd.output().expect("granot runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

const PAIRED: &str = "\
[experiment]
name = pair
family = homogeneous
n = 200
seed = 3
dtau = 0.005
schedule = 0, 0.5, 1

[physics]
e = 0.5
b = 1

[initial]
kind = gaussian
mean = 0, 0, 0
theta = 1

[initial_b]
kind = uniform-cube
mean = 0.5, 0, 0
theta = 2
";

#[test]
fn coeffs_prints_known_constants() {
    let o = granot(&["coeffs", "--e", "0.5", "--p", "1"], None);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.contains("lambda = 0.5390625"), "{text}");
    assert!(text.contains("kac beta(p=1) = 0.125"), "{text}");
    assert!(text.contains("4 - E lambda = -1.75"), "{text}");
}

#[test]
fn coeffs_elastic_has_infinite_rate_scale() {
    let o = granot(&["coeffs", "--e", "1"], None);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("E = inf"));
}

#[test]
fn unknown_suite_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.cfg", PAIRED);
    let o = granot(&["verify", "everything", &cfg], Some(dir.path()));
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("unknown suite"), "{}", stderr(&o));
}

#[test]
fn bad_config_reports_file_line_and_key() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "bad.cfg", &PAIRED.replace("e = 0.5", "e = 1.5"));
    let o = granot(&["simulate", &cfg], Some(dir.path()));
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.contains("bad.cfg") && err.contains(":10") && err.contains("`e`"), "{err}");
}

#[test]
fn missing_config_is_an_error() {
    let o = granot(&["simulate", "/nonexistent/granot.cfg"], None);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn paired_simulation_writes_series_plot_and_snapshots() {
    let dir = tempfile::tempdir().unwrap();
    let snap_a = dir.path().join("a.snap");
    let snap_b = dir.path().join("b.snap");
    let svg = dir.path().join("pair.svg");
    let text = format!(
        "{PAIRED}\n[output]\nsvg = {}\nsnapshot = {}\nsnapshot_b = {}\n",
        svg.display(),
        snap_a.display(),
        snap_b.display()
    );
    let cfg = write(dir.path(), "pair.cfg", &text);
    let o = granot(&["simulate", &cfg], Some(dir.path()));
    assert!(o.status.success(), "{}", stderr(&o));

    let csv = std::fs::read_to_string(dir.path().join("pair.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], SERIES_CSV_HEADER);
    assert_eq!(lines.len(), 4);
    let first: Vec<f64> = lines[1].split(',').map(|s| s.parse().unwrap()).collect();
    assert_eq!(first[0], 0.0);
    // the bound starts at the initial distance
    assert_eq!(first[1], first[2]);
    assert!(std::fs::read_to_string(&svg).unwrap().contains("<polyline id=\"w2\""));

    // the last row is the distance between the saved final states
    let last_w2 = lines[3].split(',').nth(1).unwrap();
    let o = granot(&["w2", snap_a.to_str().unwrap(), snap_b.to_str().unwrap()], None);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(stdout(&o).trim(), last_w2);
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "pair.cfg", PAIRED);
    let out = dir.path().join("pair.csv");
    assert!(granot(&["simulate", &cfg], Some(dir.path())).status.success());
    let first = std::fs::read(&out).unwrap();
    assert!(granot(&["simulate", &cfg], Some(dir.path())).status.success());
    assert_eq!(first, std::fs::read(&out).unwrap());
}

#[test]
fn single_run_writes_moments_per_scheduled_time() {
    let dir = tempfile::tempdir().unwrap();
    let text = PAIRED.split("[initial_b]").next().unwrap().replace("family = homogeneous", "family = selfsimilar");
    let cfg = write(dir.path(), "single.cfg", &text);
    let o = granot(&["simulate", &cfg], Some(dir.path()));
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = std::fs::read_to_string(dir.path().join("pair.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], format!("tau,{}", MomentState::CSV_HEADER));
    assert_eq!(lines.len(), 4);
}

#[test]
fn empty_schedule_gives_header_only_csv() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "empty.cfg", &PAIRED.replace("schedule = 0, 0.5, 1", "schedule ="));
    let o = granot(&["simulate", &cfg], Some(dir.path()));
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = std::fs::read_to_string(dir.path().join("pair.csv")).unwrap();
    assert_eq!(csv, format!("{SERIES_CSV_HEADER}\n"));
}

#[test]
fn relative_table_path_resolves_against_the_config() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "flat.table", "-1 1\n1 1\n");
    let text = PAIRED
        .replace("family = homogeneous", "family = cross-section")
        .replace("mean = 0.5, 0, 0", "mean = 0, 0, 0")
        .replace("[initial]", "[cross_section]\nkind = table\npath = flat.table\n\n[initial]");
    let cfg = write(dir.path(), "xs.cfg", &text);
    // run from elsewhere so a cwd-relative lookup would fail
    let o = Command::new(env!("CARGO_BIN_EXE_granot"))
        .args(["simulate", &cfg])
        .env("GRANOT_OUT_DIR", dir.path())
        .current_dir(std::env::temp_dir())
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(dir.path().join("pair.csv").exists());
}

#[test]
fn verify_writes_report_and_series() {
    let dir = tempfile::tempdir().unwrap();
    let text = format!("{PAIRED}\n[verify]\nscale = quick\n");
    let cfg = write(dir.path(), "v.cfg", &text);
    let o = granot(&["verify", "kac", &cfg], Some(dir.path()));
    assert!(matches!(o.status.code(), Some(0 | 1)), "{}", stderr(&o));
    let report = std::fs::read_to_string(dir.path().join("pair-kac-report.csv")).unwrap();
    assert_eq!(report.lines().next(), Some(REPORT_CSV_HEADER));
    assert!(stdout(&o).lines().any(|l| l.trim_start().starts_with("[PASS]") || l.trim_start().starts_with("[FAIL]")));
    assert!(dir.path().join("pair-kac-dirac.csv").exists());
}
