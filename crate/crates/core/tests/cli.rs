use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn scramble(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_scramble"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("binary runs")
}

fn repo_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

const SMALL: &str = r#"
name = "small"
dynamics = "unitary"
observables = ["otoc_unitary", "op_entanglement", "otoc_haar_mc"]
rng_seed = 7
mc_pairs = 20
output = "out/small.csv"

[model]
kind = "ising"
n_spins = 3
split = 1
theta = 1.2

[time_grid]
t_start = 0.0
t_end = 2.0
n_points = 5
"#;

fn write_small(dir: &Path, text: &str) -> PathBuf {
    let path = dir.join("small.toml");
    fs::write(&path, text).unwrap();
    path
}

fn data_rows(csv: &str) -> Vec<Vec<f64>> {
    csv.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect()
}

#[test]
fn run_writes_csv_with_metadata_and_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_small(dir.path(), SMALL);
    let out = dir.path().join("a");
    let first = scramble(&["run", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "--no-timestamp"], dir.path());
    assert!(first.status.success(), "{}", String::from_utf8_lossy(&first.stderr));
    let a = fs::read_to_string(out.join("small.csv")).unwrap();
    assert!(a.contains("# scenario: small"));
    assert!(a.contains("# config:"));
    let header = a.lines().find(|l| !l.starts_with('#')).unwrap();
    assert_eq!(header, "t,otoc_unitary,op_entanglement,otoc_haar_mc,otoc_haar_mc_stderr");
    let rows = data_rows(&a);
    assert_eq!(rows.len(), 5);
    for r in &rows {
        assert!((r[1] - r[2]).abs() < 1e-10);
    }

    let out_b = dir.path().join("b");
    let second = scramble(&["run", cfg.to_str().unwrap(), "--out", out_b.to_str().unwrap(), "--no-timestamp"], dir.path());
    assert!(second.status.success());
    assert_eq!(a, fs::read_to_string(out_b.join("small.csv")).unwrap());
}

#[test]
fn seed_override_changes_only_monte_carlo() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_small(dir.path(), SMALL);
    let out = dir.path().join("s");
    let run = |seed: &str| {
        let o = scramble(
            &["run", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "--no-timestamp", "--seed", seed],
            dir.path(),
        );
        assert!(o.status.success());
        data_rows(&fs::read_to_string(out.join("small.csv")).unwrap())
    };
    let a = run("1");
    let b = run("2");
    for (ra, rb) in a.iter().zip(&b).skip(1) {
        assert_eq!(ra[1], rb[1]);
        assert_ne!(ra[3], rb[3]);
    }
}

#[test]
fn sweep_writes_one_file_per_value() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_small(dir.path(), SMALL);
    let out = dir.path().join("sw");
    let o = scramble(
        &[
            "sweep",
            cfg.to_str().unwrap(),
            "--axis",
            "model.theta=0.0,1.5",
            "--out",
            out.to_str().unwrap(),
            "--no-timestamp",
        ],
        dir.path(),
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let mut names: Vec<String> = fs::read_dir(&out)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    assert_eq!(names, ["small_theta_0.csv", "small_theta_1.5.csv"]);
    let text = fs::read_to_string(out.join("small_theta_1.5.csv")).unwrap();
    assert!(text.contains("# sweep: model.theta=1.5"), "{text}");
}

#[test]
fn validation_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let bad_grid = SMALL.replace("n_points = 5", "n_points = 0");
    let cfg = write_small(dir.path(), &bad_grid);
    let o = scramble(&["run", cfg.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("n_points"));

    let unknown = SMALL.replace("theta = 1.2", "theta = 1.2\nspin = 3");
    let cfg = write_small(dir.path(), &unknown);
    assert_eq!(scramble(&["run", cfg.to_str().unwrap()], dir.path()).status.code(), Some(1));

    let open_in_unitary = SMALL.replace("\"otoc_unitary\",", "\"otoc_open\",");
    let cfg = write_small(dir.path(), &open_in_unitary);
    assert_eq!(scramble(&["run", cfg.to_str().unwrap()], dir.path()).status.code(), Some(1));

    let cfg = write_small(dir.path(), SMALL);
    let o = scramble(&["sweep", cfg.to_str().unwrap(), "--axis", "model.theta"], dir.path());
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn unwritable_output_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_small(dir.path(), SMALL);
    let blocker = dir.path().join("blocker");
    fs::write(&blocker, "not a directory").unwrap();
    let o = scramble(
        &["run", cfg.to_str().unwrap(), "--out", blocker.join("sub").to_str().unwrap()],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn list_scenarios_shows_every_shipped_file() {
    let root = repo_root();
    let o = scramble(&["list-scenarios"], &root);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let listed = String::from_utf8(o.stdout).unwrap();
    let shipped = fs::read_dir(root.join("scenarios"))
        .unwrap()
        .filter(|e| e.as_ref().unwrap().path().extension().is_some_and(|x| x == "toml"))
        .count();
    assert_eq!(listed.lines().count(), shipped);
    assert!(listed.contains("ising_open_tilt"));
}

#[test]
fn check_passes() {
    let o = scramble(&["check"], &repo_root());
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    assert_eq!(text.lines().filter(|l| l.starts_with("PASS")).count(), 8);
}
