use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::tempdir;

fn underlay(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_underlay"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn unknown_sweep_key_is_a_config_error() {
    let dir = tempdir().unwrap();
    let o = underlay(
        &["--experiment", "fig2_eq_power_sweep", "--sweep", "antenna_gain=1,2"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("antenna_gain"), "{}", stderr(&o));
}

#[test]
fn bad_override_and_experiment_are_config_errors() {
    let dir = tempdir().unwrap();
    assert_eq!(underlay(&["--set", "k_su=ten"], dir.path()).status.code(), Some(2));
    assert_eq!(underlay(&["--set", "wavelength=3"], dir.path()).status.code(), Some(2));
    assert_eq!(underlay(&["--experiment", "fig9"], dir.path()).status.code(), Some(2));
}

#[test]
fn missing_files_are_io_errors() {
    let dir = tempdir().unwrap();
    assert_eq!(underlay(&["--config", "nope.cfg"], dir.path()).status.code(), Some(3));
    assert_eq!(underlay(&["plot-data", "nope.csv"], dir.path()).status.code(), Some(3));
}

#[test]
fn config_file_and_overrides_apply() {
    let dir = tempdir().unwrap();
    fs::write(dir.path().join("net.cfg"), "m_b = 32\nk_su = 3\n").unwrap();
    let o = underlay(&["--config", "net.cfg", "--set", "r0=0.5", "--out", "o"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = fs::read_to_string(dir.path().join("o/single_solve.csv")).unwrap();
    assert!(csv.contains("# m_b = 32"));
    assert!(csv.contains("# r0 = 5e-1"));
}

#[test]
fn single_solve_reports_powers_and_verdict() {
    let dir = tempdir().unwrap();
    let o = underlay(&["--out", "o", "--scheme", "ZFB", "--policy", "LF"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let out = String::from_utf8_lossy(&o.stdout);
    assert!(out.contains("ZFB LF: feasible="), "{out}");
    assert!(out.contains("powers=["));
}

#[test]
fn runs_are_byte_for_byte_reproducible() {
    let dir = tempdir().unwrap();
    let args = |out: &'static str| {
        vec![
            "--experiment",
            "fig2_eq_power_sweep",
            "--trials",
            "25",
            "--seed",
            "7",
            "--sweep",
            "p_eq_db=-14:-10:2",
            "--out",
            out,
        ]
    };
    assert!(underlay(&args("a"), dir.path()).status.success());
    assert!(underlay(&args("b"), dir.path()).status.success());
    let a = fs::read(dir.path().join("a/fig2_eq_power_sweep.csv")).unwrap();
    let b = fs::read(dir.path().join("b/fig2_eq_power_sweep.csv")).unwrap();
    assert_eq!(a, b);
    assert!(String::from_utf8_lossy(&a).starts_with("# schema=1\n"));
}

#[test]
fn plot_data_round_trips_csv_values() {
    let dir = tempdir().unwrap();
    let o = underlay(
        &[
            "--experiment",
            "fig2_eq_power_sweep",
            "--trials",
            "20",
            "--m-b",
            "64",
            "--sweep",
            "p_eq_db=-12,-6,0",
            "--out",
            "o",
        ],
        dir.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let csv_path = dir.path().join("o/fig2_eq_power_sweep.csv");
    assert!(underlay(&["plot-data", csv_path.to_str().unwrap()], dir.path())
        .status
        .success());
    let first = fs::read(dir.path().join("o/fig2_eq_power_sweep_zfb_equal_power.dat")).unwrap();
    // Idempotent.
    assert!(underlay(&["plot-data", csv_path.to_str().unwrap()], dir.path())
        .status
        .success());
    let dat = fs::read_to_string(dir.path().join("o/fig2_eq_power_sweep_zfb_equal_power.dat")).unwrap();
    assert_eq!(first, dat.as_bytes());
    assert!(dir.path().join("o/fig2_eq_power_sweep_meb_equal_power.dat").exists());

    let csv = fs::read_to_string(&csv_path).unwrap();
    let mut lines = csv.lines().filter(|l| !l.starts_with('#'));
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let col = |name: &str| header.iter().position(|h| *h == name).unwrap();
    let expected: Vec<Vec<String>> = lines
        .map(|l| l.split(',').collect::<Vec<_>>())
        .filter(|f| f[col("scheme")] == "ZFB")
        .map(|f| {
            ["m_b", "value", "p_eq_db", "p_served_analytical", "p_served_empirical"]
                .iter()
                .map(|c| f[col(c)].to_string())
                .collect()
        })
        .collect();
    let dat_header: Vec<&str> = dat
        .lines()
        .find(|l| l.starts_with("# m_b"))
        .unwrap()
        .trim_start_matches("# ")
        .split_whitespace()
        .collect();
    let dcol = |name: &str| dat_header.iter().position(|h| *h == name).unwrap();
    let got: Vec<Vec<String>> = dat
        .lines()
        .filter(|l| !l.starts_with('#') && !l.trim().is_empty())
        .map(|l| {
            let f: Vec<&str> = l.split_whitespace().collect();
            ["m_b", "value", "p_eq_db", "p_served_analytical", "p_served_empirical"]
                .iter()
                .map(|c| f[dcol(c)].to_string())
                .collect()
        })
        .collect();
    assert_eq!(expected.len(), 3);
    assert_eq!(got, expected);
}

#[test]
fn empty_csv_gives_header_only_dat() {
    let dir = tempdir().unwrap();
    let csv = dir.path().join("empty.csv");
    fs::write(&csv, "# schema=1\nm_b,axis,value,scheme,policy,p_served_empirical\n").unwrap();
    let o = underlay(&["plot-data", csv.to_str().unwrap()], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let dats: Vec<_> = fs::read_dir(dir.path())
        .unwrap()
        .filter_map(|e| e.ok())
        .filter(|e| e.path().extension().is_some_and(|x| x == "dat"))
        .collect();
    assert_eq!(dats.len(), 1);
    let text = fs::read_to_string(dats[0].path()).unwrap();
    assert!(!text.is_empty());
    assert!(text.lines().all(|l| l.starts_with('#')));
}
