use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_dynadmm");

fn dynadmm(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("spawn dynadmm")
}

fn write_config(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn lines(path: &Path) -> Vec<String> {
    fs::read_to_string(path).unwrap().lines().map(str::to_string).collect()
}

/// Every non-empty float cell carries 17 significant digits.
fn assert_float_format(rows: &[String]) {
    for row in &rows[1..] {
        for cell in row.split(',').skip(1).filter(|c| !c.is_empty()) {
            let mantissa = cell.split('e').next().unwrap().trim_start_matches('-').replace('.', "");
            assert_eq!(mantissa.len(), 17, "cell {cell}");
            cell.parse::<f64>().unwrap();
        }
    }
}

#[test]
fn sharing_single_step_single_trial() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "s.cfg", "n=4\np=3\n");
    let out = tmp.path().join("out");
    let o = dynadmm(&["sharing", "--config", &cfg, "--trials", "1", "--steps", "1", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = lines(&out.join("sharing.csv"));
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0], "k,err_x");
    assert!(rows[1].starts_with("1,"));
    assert_float_format(&rows);
}

#[test]
fn rho_sweep_writes_one_file_per_penalty() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "s.cfg", "n=3\np=2\ntrials=2\nsteps=5\n");
    let out = tmp.path().join("out");
    let o = dynadmm(&["sharing", "--config", &cfg, "--rho", "0.01,0.1,1", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for rho in ["0.01", "0.1", "1"] {
        let rows = lines(&out.join(format!("sharing_rho_{rho}.csv")));
        assert_eq!(rows.len(), 6);
        assert_eq!(rows[0], "k,err_x");
    }
    assert!(!out.join("sharing.csv").exists());
}

#[test]
fn lasso_schema_and_trajectory() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "l.cfg", "experiment=lasso\nm=6\np=12\nq=2\ntrials=3\nsteps=35\n");
    let out = tmp.path().join("out");
    let o = dynadmm(&["lasso", "--config", &cfg, "--plot", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = lines(&out.join("lasso.csv"));
    assert_eq!(rows[0], "k,err_x,err_x_truth,err_oracle_truth,sparsity_admm,sparsity_oracle");
    assert_eq!(rows.len(), 36);
    assert_float_format(&rows);
    let traj = lines(&out.join("lasso_trajectory.csv"));
    assert_eq!(traj[0], "k,admm_1,admm_2,oracle_1,oracle_2,truth_1,truth_2");
    let ks: Vec<&str> = traj[1..].iter().map(|r| r.split(',').next().unwrap()).collect();
    assert_eq!(ks, ["10", "20", "30"]);
    assert_float_format(&traj);
    assert!(fs::read_to_string(out.join("lasso.svg")).unwrap().starts_with("<svg"));
}

#[test]
fn bounds_schema_and_clean_exit() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "b.cfg", "p=3\nsteps=150\ntrials=2\n");
    let out = tmp.path().join("out");
    let o = dynadmm(&["bounds", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = lines(&out.join("bounds.csv"));
    assert_eq!(rows[0], "k,err_x,err_u_c,drift,prop1_margin,thm1_margin,thm2_x_margin");
    assert_eq!(rows.len(), 151);
    // two-step quantities are undefined at k = 1
    let first: Vec<&str> = rows[1].split(',').collect();
    assert_eq!((first[3], first[5], first[6]), ("", "", ""));
    assert!(!first[4].is_empty());
    assert_float_format(&rows);
    assert_eq!(lines(&out.join("bounds_summary.csv")).len(), 3);
}

#[test]
fn same_seed_same_bytes_and_overrides_apply() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "s.cfg", "n=3\np=2\ntrials=3\nsteps=8\nseed=5\n");
    let run = |name: &str, extra: &[&str]| {
        let out = tmp.path().join(name);
        let mut args = vec!["sharing", "--config", &cfg, "--out", out.to_str().unwrap()];
        args.extend_from_slice(extra);
        let o = dynadmm(&args);
        assert!(o.status.success());
        fs::read(out.join("sharing.csv")).unwrap()
    };
    let a = run("a", &[]);
    assert_eq!(a, run("b", &["--jobs", "2"]));
    assert_eq!(a, run("c", &["--seed", "5"]));
    assert_ne!(a, run("d", &["--seed", "6"]));
    assert_eq!(String::from_utf8(run("e", &["--steps", "3"])).unwrap().lines().count(), 4);
}

#[test]
fn config_errors_exit_with_2() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let out = out.to_str().unwrap();
    let cases = [
        ("unknown.cfg", "colour=blue\n", "sharing"),
        ("badnum.cfg", "steps=many\n", "sharing"),
        ("zero.cfg", "steps=0\n", "sharing"),
        ("mismatch.cfg", "experiment=lasso\n", "bounds"),
        ("sweep.cfg", "rho_sweep=0.1,1\n", "lasso"),
    ];
    for (name, text, exp) in cases {
        let cfg = write_config(tmp.path(), name, text);
        let o = dynadmm(&[exp, "--config", &cfg, "--out", out]);
        assert_eq!(o.status.code(), Some(2), "{name}: {}", String::from_utf8_lossy(&o.stderr));
        assert!(String::from_utf8_lossy(&o.stderr).contains("config error"), "{name}");
    }
    let missing = tmp.path().join("nope.cfg");
    let o = dynadmm(&["sharing", "--config", missing.to_str().unwrap(), "--out", out]);
    assert_eq!(o.status.code(), Some(2));
    // usage errors from the argument parser share the code
    assert_eq!(dynadmm(&["sharing"]).status.code(), Some(2));
    assert_eq!(dynadmm(&["other", "--config", "x", "--out", out]).status.code(), Some(2));
}
