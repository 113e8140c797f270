use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tvsr::block::BlockImage;
use tvsr::torus::{Image, TorusGrid};
use tvsr_cli::experiments::{RESULTS_HEADER, SWEEP_HEADER};
use tvsr_cli::pgm::{read_pgm, write_pgm_plain};

fn tvsr(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tvsr"))
        .arg("--out")
        .arg(out)
        .args(args)
        .output()
        .expect("run tvsr")
}

fn write_block(dir: &Path, name: &str, block: &BlockImage) -> String {
    let path = dir.join(name);
    fs::write(&path, block.to_text()).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn certify_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let good = BlockImage::new(120, vec![0, 60], vec![30, 90], vec![vec![0.0, 1.0], vec![2.0, 4.0]]).unwrap();
    let bad = BlockImage::new(120, vec![0, 60], vec![0, 60], vec![vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
    let good = write_block(dir.path(), "good.txt", &good);
    let bad = write_block(dir.path(), "bad.txt", &bad);

    let out = tvsr(dir.path(), &["certify", "--block", &good]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report = fs::read_to_string(dir.path().join("certificate.txt")).unwrap();
    assert!(report.contains("[certificate I]\nstatus = pass"));

    assert_eq!(tvsr(dir.path(), &["certify", "--block", &bad]).status.code(), Some(4));
    let missing = dir.path().join("nope.txt");
    assert_eq!(tvsr(dir.path(), &["certify", "--block", missing.to_str().unwrap()]).status.code(), Some(3));
    assert_eq!(tvsr(dir.path(), &["certify"]).status.code(), Some(2));
}

#[test]
fn sweep_full_spectrum_and_mean() {
    let dir = tempfile::tempdir().unwrap();
    let grid = TorusGrid::new(9).unwrap();
    let img = Image::from_fn(grid, |i, j| if (2..6).contains(&i) && j < 4 { 200.0 / 255.0 } else { 40.0 / 255.0 });
    let path = dir.path().join("in.pgm");
    fs::write(&path, write_pgm_plain(&img)).unwrap();

    let out = tvsr(dir.path(), &["sweep", "--image", path.to_str().unwrap(), "--phi", "0,4"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), SWEEP_HEADER);
    assert_eq!(csv.lines().count(), 3);

    let flat = read_pgm(&fs::read(dir.path().join("sweep_phi00.pgm")).unwrap()).unwrap();
    let mean = img.mean();
    assert!(flat.values().iter().all(|v| (v - mean).abs() <= 0.5 / 255.0 + 1e-9));
    let full = read_pgm(&fs::read(dir.path().join("sweep_phi04.pgm")).unwrap()).unwrap();
    assert!(full.max_abs_diff(&img) <= 0.5 / 255.0 + 1e-9);

    // 2 phi + 1 > n aliases
    assert_eq!(tvsr(dir.path(), &["sweep", "--image", path.to_str().unwrap(), "--phi", "5"]).status.code(), Some(2));
}

#[test]
fn generate_then_recover() {
    let dir = tempfile::tempdir().unwrap();
    let out = tvsr(dir.path(), &["gen", "--per-bin", "1"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("digest"));
    let again = tvsr(dir.path(), &["gen", "--per-bin", "1"]);
    assert_eq!(String::from_utf8_lossy(&again.stdout), stdout);

    let out = tvsr(dir.path(), &["--max-iters", "100", "exact", "--phi", "6"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(dir.path().join("exact.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), RESULTS_HEADER);
    assert!(lines.count() >= 1);
}
