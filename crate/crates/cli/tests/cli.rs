use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn scenarios() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../scenarios")
}

fn tess_sim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tess-sim")).args(args).output().unwrap()
}

fn cfg(name: &str) -> String {
    scenarios().join(name).to_string_lossy().into_owned()
}

fn scratch(tag: &str) -> PathBuf {
    let d = std::env::temp_dir().join(format!("tess-cli-{tag}-{}", std::process::id()));
    std::fs::create_dir_all(&d).unwrap();
    d
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn sorbents_export_writes_eight_rows() {
    let dir = scratch("sorbents");
    let file = dir.join("table3.csv");
    let o = tess_sim(&["sorbents", "--export", file.to_str().unwrap()]);
    assert!(o.status.success());
    let text = std::fs::read_to_string(&file).unwrap();
    assert_eq!(text.lines().count(), 9);
    assert!(text.contains("LiCl"));
    let printed = tess_sim(&["sorbents"]);
    assert_eq!(stdout(&printed), text);
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn run_writes_series_and_summary() {
    let dir = scratch("run");
    let o = tess_sim(&["run", &cfg("freezer_tess.cfg"), "--out", dir.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("sensor.TMP36.time_above_threshold_s"));
    let series = std::fs::read_to_string(dir.join("series.csv")).unwrap();
    assert!(series.starts_with("time_s,T_ambient_K"));
    assert_eq!(series.lines().count(), 4322);
    assert_eq!(std::fs::read_to_string(dir.join("summary.txt")).unwrap(), stdout(&o));
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn compare_labels_rows() {
    let dir = scratch("compare");
    let csv = dir.join("cmp.csv");
    let o = tess_sim(&[
        "compare",
        &cfg("freezer_passive.cfg"),
        &cfg("freezer_heater.cfg"),
        &cfg("freezer_tess.cfg"),
        "--labels",
        "A,B,C",
        "--csv",
        csv.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let table = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(table.lines().count(), 7);
    assert!(table.lines().nth(5).unwrap().starts_with("C,TMP36,"));
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn compare_rejects_label_count_mismatch() {
    let o = tess_sim(&["compare", &cfg("freezer_passive.cfg"), "--labels", "A,B"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn sweep_salt_mass() {
    let o = tess_sim(&["sweep", &cfg("freezer_tess.cfg"), "--param", "tess.salt_mass_g", "--values", "25,50,100"]);
    assert!(o.status.success());
    let out = stdout(&o);
    assert!(out.starts_with("tess.salt_mass_g,sensor,"));
    assert_eq!(out.lines().count(), 7);
}

#[test]
fn sweep_unknown_parameter_is_config_error() {
    let o = tess_sim(&["sweep", &cfg("freezer_tess.cfg"), "--param", "tess.nothing", "--values", "1"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn sweep_with_failing_point_is_partial() {
    // A large heat sink passes validation but drives the core below 0 K.
    let o = tess_sim(&[
        "sweep",
        &cfg("freezer_passive.cfg"),
        "--param",
        "run.dissipation_W",
        "--values",
        "0.09,-1000",
    ]);
    assert_eq!(o.status.code(), Some(3));
    let out = stdout(&o);
    assert!(out.contains("-1000,FAILED"), "{out}");
    assert!(out.lines().any(|l| l.starts_with("0.09,TMP36,")));
}

#[test]
fn geometry_report_favours_sphere() {
    let o = tess_sim(&["geometry", &cfg("freezer_passive.cfg")]);
    assert!(o.status.success());
    let out = stdout(&o);
    assert!(out.contains("sphere") && out.contains("cube"), "{out}");
}

#[test]
fn budget_flags_shell_rows() {
    let o = tess_sim(&["budget", &cfg("freezer_passive.cfg")]);
    assert!(o.status.success());
    let out = stdout(&o);
    assert!(out.contains("outer_sphere") && out.contains("inner_sphere"), "{out}");
}

fn write_cfg(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn bad_config_exits_with_one_and_names_the_line() {
    let dir = scratch("bad");
    let p = write_cfg(
        &dir,
        "typo.cfg",
        "geometry.shape = sphere\nenvironment.kind = constant\nenvironment.temperature_K = 241\nrun.duration_s = 60\ncontroller.mode = passive\nrun.duraton_s = 5\n",
    );
    let o = tess_sim(&["run", &p, "--out", dir.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("run.duraton_s") && err.contains("line 6"), "{err}");
    assert_eq!(tess_sim(&["run", "/nonexistent.cfg"]).status.code(), Some(1));
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn diverging_run_exits_with_two() {
    let dir = scratch("diverge");
    let p = write_cfg(
        &dir,
        "sink.cfg",
        "geometry.shape = sphere\nenvironment.kind = constant\nenvironment.temperature_K = 241\nrun.duration_s = 36000\ncontroller.mode = passive\nrun.dissipation_W = -1000\n",
    );
    let o = tess_sim(&["run", &p, "--out", dir.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2), "{}", String::from_utf8_lossy(&o.stderr));
    std::fs::remove_dir_all(dir).unwrap();
}
