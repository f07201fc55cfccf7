use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn freebound(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_freebound"))
        .args(args)
        .current_dir(cwd)
        .env_remove("FREEBOUND_OUT")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

const SMALL_RUN: &str = "# short run for tests\ngamma=0.5\neps=0.2\nt_end=0.2\ndx=0.05\nx_max=4\n";

#[test]
fn special_kummer_polynomial_case() {
    let dir = tempfile::tempdir().unwrap();
    let o = freebound(&["special", "--fn", "M", "--a", "-1", "--b", "2", "--s", "3"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "-0.5");
}

#[test]
fn special_gamma_and_missing_argument() {
    let dir = tempfile::tempdir().unwrap();
    let o = freebound(&["special", "--fn", "gamma", "--s", "5"], dir.path());
    assert_eq!(stdout(&o).trim().parse::<f64>().unwrap(), 24.0);
    let o = freebound(&["special", "--fn", "U", "--a", "1"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("--b"));
}

#[test]
fn gamma_one_shrinker_reports_nonexistence() {
    let dir = tempfile::tempdir().unwrap();
    let o = freebound(&["profile", "shrinker", "--gamma", "1", "--n", "1", "--out", "s"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("no shrinking profile"));
    let summary: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("s/summary.json")).unwrap()).unwrap();
    assert_eq!(summary["exists"], false);
    assert_eq!(summary["consistent"], true);
    let csv = fs::read_to_string(dir.path().join("s/scan.csv")).unwrap();
    assert!(csv.starts_with("ell,R,exponent,slope_near_fb\n"));
}

#[test]
fn out_of_range_gamma_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = freebound(&["profile", "forward", "--gamma", "1.5"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn forward_profile_writes_csv_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let o = freebound(&["profile", "forward", "--gamma", "0", "--n", "3", "--out", "f"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = fs::read_to_string(dir.path().join("f/profile.csv")).unwrap();
    assert!(csv.starts_with("r,U,dU\n"));
    let summary: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("f/summary.json")).unwrap()).unwrap();
    for key in ["R", "c", "fb_slope", "defects"] {
        assert!(!summary[key].is_null(), "{key}");
    }
}

#[test]
fn default_output_root_comes_from_the_environment() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_freebound"))
        .args(["tw", "--gamma", "0.5", "--c", "1"])
        .current_dir(dir.path())
        .env("FREEBOUND_OUT", dir.path().join("root"))
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(dir.path().join("root/tw/profile.csv").exists());
    assert!(dir.path().join("root/tw/summary.json").exists());
}

#[test]
fn collide_scene_json() {
    let dir = tempfile::tempdir().unwrap();
    let o = freebound(&["collide", "--out", "c", "--points", "11"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let scene: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("c/scene.json")).unwrap()).unwrap();
    for key in ["t_star", "x_star", "opening"] {
        assert!(scene[key].is_f64(), "{key}");
    }
    let rows = fs::read_to_string(dir.path().join("c/fields.csv")).unwrap().lines().count();
    assert_eq!(rows, 1 + 4 * 11);
}

#[test]
fn invalid_config_lists_every_error_and_the_schema() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("bad.cfg"), "gamma=1.5\ncolour=red\nstride=x\n").unwrap();
    let o = freebound(&["evolve", "--config", "bad.cfg"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.contains("line 1") && err.contains("line 2") && err.contains("line 3"), "{err}");
    assert!(err.contains("missing required key `eps`"));
    assert!(err.contains("schema for `evolve`"));
    assert!(!dir.path().join("freebound-out").exists());
}

#[test]
fn evolve_then_weiss_on_the_run_directory() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("run.cfg"), SMALL_RUN).unwrap();
    let o = freebound(&["evolve", "--config", "run.cfg", "--out", "a"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let run = dir.path().join("a");
    assert!(run.join("config").exists() && run.join("summary.json").exists());
    let summary: serde_json::Value = serde_json::from_str(&fs::read_to_string(run.join("summary.json")).unwrap()).unwrap();
    let snapshots = summary["snapshots"].as_u64().unwrap() as usize;
    assert_eq!(fs::read_dir(run.join("snapshots")).unwrap().count(), snapshots);
    assert_eq!(summary["energy"]["bound_holds"], true);
    assert!(summary["support_radii"].as_array().unwrap().len() == snapshots);
    let first = fs::read_to_string(run.join("snapshots/000000.csv")).unwrap();
    assert!(first.starts_with("x,u\n"));

    let o = freebound(&["weiss", "--run", "a", "--t0", "0.15", "--r-min", "0.03", "--r-max", "0.15", "--count", "9"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = fs::read_to_string(run.join("weiss.csv")).unwrap();
    assert!(csv.starts_with("r,W,z_term,h_term\n"));
    assert_eq!(csv.lines().count(), 10);
    let audit: serde_json::Value = serde_json::from_str(&fs::read_to_string(run.join("weiss.json")).unwrap()).unwrap();
    assert_eq!(audit["terms_nonnegative"], true);
    assert!(audit["relative_defect"].as_f64().unwrap() < 0.05);
}

#[test]
fn runs_are_byte_for_byte_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("run.cfg"), SMALL_RUN).unwrap();
    for out in ["a", "b"] {
        let o = freebound(&["evolve", "--config", "run.cfg", "--out", out], dir.path());
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    }
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for rel in ["config", "summary.json", "times.csv", "snapshots/000000.csv", "snapshots/000003.csv"] {
        assert_eq!(fs::read(a.join(rel)).unwrap(), fs::read(b.join(rel)).unwrap(), "{rel}");
    }
    // The stored config reproduces the run on its own.
    let o = freebound(&["evolve", "--config", "a/config", "--out", "c"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(fs::read(a.join("summary.json")).unwrap(), fs::read(dir.path().join("c/summary.json")).unwrap());
}

#[test]
fn verify_subset_prints_one_line_per_criterion() {
    let dir = tempfile::tempdir().unwrap();
    let o = freebound(&["verify", "--only", "1,6"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let out = stdout(&o);
    assert_eq!(out.lines().filter(|l| l.starts_with("[PASS] criterion")).count(), 2);
    assert!(out.contains("2/2 criteria passed"));
    let o = freebound(&["verify", "--only", "13"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn verify_fast_suite_passes() {
    let dir = tempfile::tempdir().unwrap();
    let o = freebound(&["verify", "--suite", "fast"], dir.path());
    let out = stdout(&o);
    println!("{out}");
    assert_eq!(out.lines().filter(|l| l.contains("] criterion")).count(), 12);
    assert_eq!(o.status.code(), Some(0), "{out}");
}
