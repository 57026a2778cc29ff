use std::path::Path;
use std::process::{Command, Output};

fn hexleg(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hexleg"))
        .args(args)
        .env_remove("HEXLEG_OUT_DIR")
        .current_dir(out)
        .output()
        .expect("spawn hexleg")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn read_csv(path: &Path) -> Vec<Vec<String>> {
    let mut r = csv::Reader::from_path(path).unwrap();
    let mut rows = vec![r.headers().unwrap().iter().map(String::from).collect()];
    for rec in r.records() {
        rows.push(rec.unwrap().iter().map(String::from).collect());
    }
    rows
}

#[test]
fn fk_prints_foot_position() {
    let dir = tempfile::tempdir().unwrap();
    let o = hexleg(
        &["fk", "--dims", "200,400,400", "--deg", "0,0,-90"],
        dir.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(stdout(&o).trim(), "(600, 0, -400)");
    let rows = read_csv(&dir.path().join("out/fk.csv"));
    assert_eq!(
        rows[0],
        [
            "theta1_deg",
            "theta2_deg",
            "theta3_deg",
            "x_mm",
            "y_mm",
            "z_mm"
        ]
    );
    assert_eq!(&rows[1][3..], ["600", "0", "-400"]);
}

#[test]
fn fk_accepts_radians() {
    let dir = tempfile::tempdir().unwrap();
    let o = hexleg(
        &[
            "fk",
            "--dims",
            "200,400,400",
            "--rad",
            "0,0,-1.5707963267948966",
            "--format",
            "csv",
        ],
        dir.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(stdout(&o).trim(), "(600, 0, -400)");
}

#[test]
fn ik_reports_angles_and_unreachable_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    let o = hexleg(
        &["ik", "--dims", "200,400,400", "--point", "600,0,-400"],
        dir.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(stdout(&o).trim(), "(0, 0, -90) deg");

    let o = hexleg(
        &["ik", "--dims", "200,400,400", "--point", "1500,0,0"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    assert!(stderr(&o).contains("unreachable"));
}

#[test]
fn manip_opt_matches_reference_row() {
    let dir = tempfile::tempdir().unwrap();
    let o = hexleg(&["manip-opt", "--dims", "200,400,400"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let rows = read_csv(&dir.path().join("out/manip_opt.csv"));
    assert_eq!(
        rows[0],
        [
            "l1_mm",
            "l2_mm",
            "l3_mm",
            "theta2_deg",
            "theta3_deg",
            "w_mm3",
            "iterations",
            "converged"
        ]
    );
    let v = |i: usize| rows[1][i].parse::<f64>().unwrap();
    assert!((v(3) - 36.9956).abs() < 0.5);
    assert!((v(4) + 73.9913).abs() < 1.0);
    assert!((v(5) / 1.2903e8 - 1.0).abs() < 1e-3);
    let report = std::fs::read_to_string(dir.path().join("out/manip_opt_report.txt")).unwrap();
    for key in [
        "experiment = manip-opt",
        "seed = ",
        "version = ",
        "duration_s = ",
        "dims_mm = 200,400,400",
    ] {
        assert!(report.contains(key), "missing {key}");
    }
}

#[test]
fn improved_area_against_oracle() {
    let dir = tempfile::tempdir().unwrap();
    let o = hexleg(
        &["workspace-area", "--dims", "200,400,400", "--improved"],
        dir.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let rows = read_csv(&dir.path().join("out/workspace_area.csv"));
    assert_eq!(
        rows[0],
        [
            "r1",
            "l1_mm",
            "l2_mm",
            "l3_mm",
            "area_analytic_mm2",
            "area_numeric_mm2",
            "gap"
        ]
    );
    let analytic: f64 = rows[1][4].parse().unwrap();
    let numeric: f64 = rows[1][5].parse().unwrap();
    assert!((analytic - 335103.2).abs() < 0.05);
    assert!((numeric / analytic - 1.0).abs() < 5e-3);
    let svg = std::fs::read_to_string(dir.path().join("out/workspace_area_boundary.svg")).unwrap();
    assert!(svg.starts_with("<?xml") && svg.contains("x [mm]") && svg.contains("z [mm]"));
}

#[test]
fn config_errors_exit_one_with_location() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "seed = 3\n\n[workspace]\nsamples = 10\ncells = 2.0\n").unwrap();
    let o = hexleg(
        &["workspace-cloud", "--config", cfg.to_str().unwrap()],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(1));
    let err = stderr(&o);
    assert!(err.contains("cells") && err.contains("line 5"), "{err}");

    let o = hexleg(&["fk", "--dims", "200,400", "--deg", "0,0,0"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    let o = hexleg(&["teleport"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    let o = hexleg(&["fk", "--deg", "0,0,0", "--rad", "0,0,0"], dir.path());
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn help_and_version_exit_zero() {
    let dir = tempfile::tempdir().unwrap();
    let o = hexleg(&["--help"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("sweep-all"));
    assert_eq!(hexleg(&["--version"], dir.path()).status.code(), Some(0));
}

#[test]
fn output_directory_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(
        &cfg,
        "[output]\ndir = \"from_config\"\nformats = [\"csv\"]\n",
    )
    .unwrap();
    let base = ["fk", "--deg", "0,10,-20", "--config", cfg.to_str().unwrap()];

    assert!(hexleg(&base, dir.path()).status.success());
    assert!(dir.path().join("from_config/fk.csv").exists());

    let with_env = Command::new(env!("CARGO_BIN_EXE_hexleg"))
        .args(base)
        .env("HEXLEG_OUT_DIR", dir.path().join("from_env"))
        .current_dir(dir.path())
        .output()
        .unwrap();
    assert!(with_env.status.success());
    assert!(dir.path().join("from_env/fk.csv").exists());

    let flag = dir.path().join("from_flag");
    let with_flag = Command::new(env!("CARGO_BIN_EXE_hexleg"))
        .args(base)
        .args(["--out", flag.to_str().unwrap()])
        .env("HEXLEG_OUT_DIR", dir.path().join("ignored"))
        .current_dir(dir.path())
        .output()
        .unwrap();
    assert!(with_flag.status.success());
    assert!(flag.join("fk.csv").exists());
    assert!(!dir.path().join("ignored").exists());
}

#[test]
fn cloud_is_reproducible_from_seed() {
    let dir = tempfile::tempdir().unwrap();
    let run = |sub: &str, seed: &str| {
        let o = hexleg(
            &[
                "workspace-cloud",
                "--samples",
                "5000",
                "--seed",
                seed,
                "--out",
                sub,
            ],
            dir.path(),
        );
        assert!(o.status.success(), "{}", stderr(&o));
        std::fs::read(dir.path().join(sub).join("workspace_cloud.csv")).unwrap()
    };
    let a = run("a", "11");
    let b = run("b", "11");
    let c = run("c", "12");
    assert_eq!(a, b);
    assert_ne!(a, c);
    assert_eq!(
        read_csv(&dir.path().join("a/workspace_cloud.csv")).len(),
        5001
    );
}

#[test]
fn sweep_flags_infeasible_cells_without_failing() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(
        &cfg,
        "[manipulability]\ngrid = [5, 5]\ncoxa_ratios = [0.45]\ntibia_ratio_range = [0.4, 0.6, 0.1]\n",
    )
    .unwrap();
    let o = hexleg(
        &["manip-average", "--config", cfg.to_str().unwrap()],
        dir.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stderr(&o).contains("flagged"));
    let rows = read_csv(&dir.path().join("out/manip_average_sweep.csv"));
    assert_eq!(rows[0], ["r1", "r3", "w_A_mm3"]);
    assert_eq!(rows[3][2], "");
}
