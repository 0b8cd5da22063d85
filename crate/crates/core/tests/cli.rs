use std::fs;
use std::path::Path;
use std::process::Command;

fn clogsim() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_clogsim"));
    cmd.env("RUST_LOG", "error");
    cmd
}

fn write(path: &Path, text: &str) {
    fs::write(path, text).unwrap();
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<csv::StringRecord>) {
    let mut r = csv::ReaderBuilder::new().flexible(false).from_path(path).unwrap();
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r.records().map(Result::unwrap).collect();
    (header, rows)
}

#[test]
fn simulate_writes_all_files() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    write(&cfg, "[grid]\nn = 8\n[time]\nt_end = 2.0\nrecord_every = 50\n");
    let out = dir.path().join("out");
    let status = clogsim().args(["simulate", "--config"]).arg(&cfg).arg("--out").arg(&out).status().unwrap();
    assert_eq!(status.code(), Some(0));

    let (h, rows) = read_csv(&out.join("timeseries.csv"));
    assert_eq!(h, ["t", "avg_v1", "avg_v2", "sigma1", "sigma2", "c", "F"]);
    assert_eq!(rows.len(), 5);
    assert_eq!(&rows[4][0], "2");
    for name in ["heatmap_v1.csv", "heatmap_v2.csv"] {
        let (h, rows) = read_csv(&out.join(name));
        assert_eq!(h.len(), 9);
        assert_eq!(rows.len(), 5);
    }
    let (h, rows) = read_csv(&out.join("summary.csv"));
    assert_eq!(h[0], "final_growth_rate");
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0][4].len(), 64);
}

#[test]
fn simulate_output_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    write(&cfg, "[grid]\nn = 8\n[time]\nt_end = 1.0\nrecord_every = 10\n");
    for out in ["a", "b"] {
        let status = clogsim().args(["simulate", "--config"]).arg(&cfg).arg("--out").arg(dir.path().join(out)).status().unwrap();
        assert!(status.success());
    }
    for name in ["timeseries.csv", "heatmap_v1.csv", "heatmap_v2.csv"] {
        assert_eq!(
            fs::read(dir.path().join("a").join(name)).unwrap(),
            fs::read(dir.path().join("b").join(name)).unwrap()
        );
    }
}

#[test]
fn output_dir_from_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    let out = dir.path().join("from_config");
    write(&cfg, &format!("[time]\nt_end = 0.1\n[output]\ndir = {:?}\n", out.to_str().unwrap()));
    assert!(clogsim().args(["simulate", "--config"]).arg(&cfg).status().unwrap().success());
    assert!(out.join("summary.csv").exists());
}

#[test]
fn sweep_rows_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("sweep.toml");
    write(
        &cfg,
        "[grid]\nn = 8\n[time]\nt_end = 2.0\n[experiment]\nmode = \"sweep\"\nc_rho = [0.5, 1.0]\nf = [0.25, 0.5, 2.0]\n",
    );
    for out in ["a", "b"] {
        let status = clogsim().args(["sweep", "--config"]).arg(&cfg).arg("--out").arg(dir.path().join(out)).status().unwrap();
        assert_eq!(status.code(), Some(0));
    }
    let a = dir.path().join("a/sweep.csv");
    let (h, rows) = read_csv(&a);
    assert_eq!(h, ["c_rho", "f", "growth_rate", "classification"]);
    assert_eq!(rows.len(), 6);
    assert_eq!((&rows[0][0], &rows[0][1]), ("0.5", "0.25"));
    assert_eq!((&rows[3][0], &rows[3][1]), ("1", "0.25"));
    assert_eq!(fs::read(&a).unwrap(), fs::read(dir.path().join("b/sweep.csv")).unwrap());
}

#[test]
fn verify_suite_passes() {
    let dir = tempfile::tempdir().unwrap();
    let status = clogsim()
        .args(["verify", "--suite", "ghost", "--seed", "11", "--out"])
        .arg(dir.path())
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let (h, rows) = read_csv(&dir.path().join("verify.csv"));
    assert_eq!(h[0], "name");
    assert_eq!(rows.len(), 1);
    assert_eq!(&rows[0][5], "11");
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");

    let bad = dir.path().join("bad.toml");
    write(&bad, "[model]\nnu3 = 0.1\n");
    let o = clogsim().args(["simulate", "--config"]).arg(&bad).arg("--out").arg(&out).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("nu3"));

    let missing = dir.path().join("missing.toml");
    let s = clogsim().args(["simulate", "--config"]).arg(&missing).arg("--out").arg(&out).status().unwrap();
    assert_eq!(s.code(), Some(2));

    let blow = dir.path().join("blow.toml");
    write(&blow, "[model]\nf_tilde = 1e9\n[time]\ndt = 1.0\nt_end = 100.0\n");
    let s = clogsim().args(["simulate", "--config"]).arg(&blow).arg("--out").arg(&out).status().unwrap();
    assert_eq!(s.code(), Some(3));

    let s = clogsim().args(["verify", "--suite", "bogus", "--out"]).arg(&out).status().unwrap();
    assert_eq!(s.code(), Some(1));
}
