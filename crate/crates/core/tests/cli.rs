use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn exe() -> &'static str {
    env!("CARGO_BIN_EXE_dshock")
}

fn scenario(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("scenarios")
        .join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(exe())
        .args(args)
        .output()
        .expect("spawn dshock")
}

fn write_cfg(dir: &Path, text: &str) -> PathBuf {
    let p = dir.join("s.cfg");
    std::fs::write(&p, text).unwrap();
    p
}

#[test]
fn run_writes_snapshots_and_plot() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("run");
    let o = run(&[
        "run",
        "--scenario",
        scenario("ps3_riemann_table.cfg").to_str().unwrap(),
        "--epsilon",
        "0.05",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    for f in [
        "snapshot_000.csv",
        "snapshot_001.csv",
        "index.csv",
        "plot.gp",
    ] {
        assert!(out.join(f).exists(), "{f}");
    }
    let golden = std::fs::read_to_string(
        Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden/ps3_riemann_table_eps0.05.gp"),
    )
    .unwrap();
    assert_eq!(
        std::fs::read_to_string(out.join("plot.gp")).unwrap(),
        golden
    );
}

#[test]
fn validation_error_exits_with_2() {
    let tmp = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(scenario("ps3_riemann_table.cfg"))
        .unwrap()
        .replace("scheme.alpha = 0.3", "scheme.alpha = 0.5");
    let cfg = write_cfg(tmp.path(), &text);
    let o = run(&["run", "--scenario", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("alpha"));
    let empty = write_cfg(tmp.path(), "");
    assert_eq!(
        run(&["run", "--scenario", empty.to_str().unwrap()])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn diverged_run_exits_with_3() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_cfg(
        tmp.path(),
        r#"
system.family = "ps3"
system.p = [0, 0, 0, 1]
scheme.epsilon = 0.05
scheme.alpha = 0.2
scheme.beta = 0.1
velocity.kind = "prescribed"
velocity.terms = [["const", 1.0]]
initial.density.kind = "analytic"
initial.density.terms = [["const", 1e20], ["sin", 1e19, 1]]
run.t_end = 0.1
"#,
    );
    let out = tmp.path().join("run");
    let o = run(&[
        "run",
        "--f32",
        "--scenario",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(
        o.status.code(),
        Some(3),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    assert!(out.join("diverged.txt").exists());
}

#[test]
fn missing_file_is_an_internal_error() {
    let o = run(&["run", "--scenario", "/nonexistent/scenario.cfg"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn scale_study_prints_report_csv() {
    let o = run(&[
        "scale-study",
        "--scenario",
        scenario("ps3_riemann_table.cfg").to_str().unwrap(),
        "--n",
        "2",
        "--eps-start",
        "0.02",
        "--levels",
        "3",
    ]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let text = String::from_utf8(o.stdout).unwrap();
    let table = dshock::output::parse_csv(&text).unwrap();
    assert_eq!(table.header, vec!["epsilon", "area", "ratio", "alpha_hat"]);
    assert_eq!(table.rows.len(), 3);
    assert!(text.contains("# alpha = 0.3"));
    let too_short = run(&[
        "scale-study",
        "--scenario",
        scenario("ps3_riemann_table.cfg").to_str().unwrap(),
        "--n",
        "2",
        "--levels",
        "2",
    ]);
    assert_eq!(too_short.status.code(), Some(2));
}

#[test]
fn residual_study_rejects_unknown_equation() {
    let o = run(&[
        "residual-study",
        "--scenario",
        scenario("ps4_riemann.cfg").to_str().unwrap(),
        "--equation",
        "q",
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn plot_on_empty_dir_fails() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(&["plot", "--dir", tmp.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("nothing to plot"));
}
