use std::path::Path;
use std::process::{Command, Output};

fn mfw(args: &[&str], env_out: Option<&Path>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_mfw"));
    cmd.args(args).env_remove("MFW_OUTPUT_DIR");
    if let Some(dir) = env_out {
        cmd.env("MFW_OUTPUT_DIR", dir);
    }
    cmd.output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn row(line: &str) -> Vec<f64> {
    line.split(',').skip(1).filter_map(|t| t.parse().ok()).collect()
}

#[test]
fn certify_midpoint_two_steps() {
    let o = mfw(&["certify", "midpoint", "--c", "2", "--k-max", "2"], None);
    assert!(o.status.success());
    let text = stdout(&o);
    let lines: Vec<_> = text.lines().collect();
    assert_eq!(lines[0], "k,z1,z2,z_inf,in_unit_interval");
    let (z1, z2) = (row(lines[1]), row(lines[2]));
    for (got, want) in z1.iter().zip([-0.3810, 1.1429]).chain(z2.iter().zip([-0.2222, 0.8889])) {
        assert!((got - want).abs() < 5e-5, "{got} vs {want}");
    }
}

#[test]
fn certify_rk5_and_euler() {
    let text = stdout(&mfw(&["certify", "rk5", "--k-max", "1"], None));
    let z = row(text.lines().nth(1).unwrap());
    for (got, want) in z.iter().zip([0.1821, 0.0068, 0.8416, 0.3657, 0.9956, 0.2333]) {
        assert!((got - want).abs() < 5e-5);
    }
    let text = stdout(&mfw(&["certify", "euler", "--k-max", "3"], None));
    let firsts: Vec<f64> = text.lines().skip(1).map(|l| row(l)[0]).collect();
    assert_eq!(firsts, [0.666667, 0.5, 0.4]);
}

#[test]
fn tableau_from_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("heun.json");
    std::fs::write(&path, r#"{"A": [[0, 0], [1, 0]], "beta": [0.5, 0.5], "omega": [0, 1]}"#).unwrap();
    let o = mfw(&["certify", path.to_str().unwrap(), "--k-max", "1"], None);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    std::fs::write(&path, r#"{"A": [[0, 0], [1, 0]], "beta": [0.5, 0.6], "omega": [0, 1]}"#).unwrap();
    assert_eq!(mfw(&["certify", path.to_str().unwrap()], None).status.code(), Some(2));
}

#[test]
fn config_errors_exit_two() {
    assert_eq!(mfw(&["certify", "rk9"], None).status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = mfw(&["run", "--method", "rk", "--tableau", "rk9", "--output", out], None);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("rk9"));
    assert_eq!(mfw(&["preset", "fig9"], None).status.code(), Some(2));
    assert_eq!(mfw(&["run", "--problem", "cube"], None).status.code(), Some(2));
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{").unwrap();
    assert_eq!(mfw(&["run", "--config", bad.to_str().unwrap()], None).status.code(), Some(2));
}

#[test]
fn runtime_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data.svm");
    std::fs::write(&data, "1 1:0.5\n-1 2:x\n").unwrap();
    let o = mfw(
        &["run", "--problem", "logistic", "--data-file", data.to_str().unwrap(), "--output", dir.path().to_str().unwrap()],
        None,
    );
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 2"));
}

#[test]
fn run_from_flags_writes_diagnostics() {
    let dir = tempfile::tempdir().unwrap();
    let o = mfw(
        &[
            "run", "--name", "box", "--problem", "scalar_box", "--max-iter", "1000", "--lower-bound", "10,100",
            "--bound-compare", "--save-points",
        ],
        Some(dir.path()),
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["box.csv", "box_points.csv", "box_bound.csv", "box_lower_bound.csv"] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
    let traj = std::fs::read_to_string(dir.path().join("box.csv")).unwrap();
    assert_eq!(traj.lines().next(), Some("iter,t,f,gap,feas_violation"));
    assert_eq!(traj.lines().count(), 1002);
}

#[test]
fn zigzag_subcommand_reads_saved_points() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = mfw(&["run", "--name", "t", "--max-iter", "100", "--save-points", "--output", out], None);
    assert!(o.status.success());
    let points = dir.path().join("t_points.csv");
    let o = mfw(&["zigzag", "--points", points.to_str().unwrap(), "--method", "fw"], None);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    let lines: Vec<_> = text.lines().collect();
    assert_eq!(lines[0], "method,delta,W,energy");
    assert!(lines[1].starts_with("fw,1,5,"));
    assert!(lines[2].starts_with("fw,1,20,"));
}

#[test]
fn bound_table_matches_closed_form() {
    let text = stdout(&mfw(&["bound", "--c", "2", "--t-max", "2", "--points", "3"], None));
    let last: Vec<f64> = text.lines().last().unwrap().split(',').map(|t| t.parse().unwrap()).collect();
    assert_eq!(last[0], 2.0);
    assert!((last[1] - 0.25).abs() < 1e-12 && (last[2] - 0.25).abs() < 1e-8);
    let text = stdout(&mfw(&["bound", "--tableau", "euler", "--h0", "0.5", "--k-max", "1"], None));
    assert!(text.contains("# D2 = 1.3333333333e0"));
}

#[test]
fn preset_fig1_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let o = mfw(&["preset", "fig1"], Some(dir.path()));
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let out = dir.path().join("fig1");
    for c in [1, 2, 4] {
        assert!(out.join(format!("fw_c{c}.csv")).exists());
        assert!(out.join(format!("fw_c{c}_bound.csv")).exists());
        for dt in ["0.1", "0.01", "0.001"] {
            assert!(out.join(format!("flow_c{c}_dt{dt}.csv")).exists());
            assert!(out.join(format!("flow_c{c}_dt{dt}_bound.csv")).exists());
        }
    }
    assert!(out.join("summary.csv").exists());
}

#[test]
fn preset_fig2_top_has_six_rows() {
    let dir = tempfile::tempdir().unwrap();
    let o = mfw(&["preset", "fig2-top", "--output", dir.path().to_str().unwrap()], None);
    assert!(o.status.success());
    let table = std::fs::read_to_string(dir.path().join("fig2-top/zigzag.csv")).unwrap();
    assert_eq!(table.lines().count(), 7);
    assert_eq!(table.lines().next(), Some("method,delta,W,energy"));
}

#[test]
fn sweep_from_file() {
    let dir = tempfile::tempdir().unwrap();
    let sweep = dir.path().join("s.json");
    std::fs::write(
        &sweep,
        r#"{"name": "mine", "configs": [
            {"name": "a", "problem": {"kind": "triangle", "target": [0.1, 0.3]}, "method": "fw", "max_iter": 50},
            {"name": "b", "problem": {"kind": "scalar_huber", "eps": 0.2}, "method": "rk", "tableau": "rk4", "max_iter": 50}
        ]}"#,
    )
    .unwrap();
    let o = mfw(&["sweep", sweep.to_str().unwrap(), "--output", dir.path().to_str().unwrap()], None);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let summary = std::fs::read_to_string(dir.path().join("mine/summary.csv")).unwrap();
    assert_eq!(summary.lines().count(), 3);
    assert!(summary.lines().nth(2).unwrap().starts_with("b,rk4,2,1,50,"));
}

#[test]
fn preset_listing() {
    let text = stdout(&mfw(&["preset", "--list"], None));
    assert_eq!(text.lines().collect::<Vec<_>>(), ["fig1", "fig2-top", "fig2-bottom", "fig3", "lower-bound", "sensing"]);
}
