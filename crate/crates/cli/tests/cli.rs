use std::fs;
use std::path::Path;
use std::process::Command;

use hypercsi_cli::io::{decode_hsd, encode_hsd, read_matrix_csv, write_matrix_csv};
use hypercsi::SpectralDataset;
use nalgebra::DMatrix;
use tempfile::tempdir;

fn hypercsi(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_hypercsi"))
        .args(args)
        .env_remove("HYPERCSI_THREADS")
        .output()
        .expect("binary runs")
}

fn code(args: &[&str]) -> i32 {
    hypercsi(args).status.code().unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn formats_round_trip() {
    let dir = tempdir().unwrap();
    let m = DMatrix::from_fn(7, 3, |i, j| (i as f64 + 0.1) / (j as f64 + 3.0));
    let path = dir.path().join("m.csv");
    write_matrix_csv(&path, &m).unwrap();
    assert_eq!(read_matrix_csv(&path).unwrap(), m);

    let data = SpectralDataset::with_truth(m.clone(), 3);
    let back = decode_hsd(&encode_hsd(&data)).unwrap();
    assert_eq!(back, data);
}

#[test]
fn pure_pixel_scene_end_to_end() {
    let dir = tempdir().unwrap();
    let scene = dir.path().join("scene");
    let est = dir.path().join("est");
    // gamma far below 1 pushes most pixels to the corners
    let gen = hypercsi(&[
        "generate", "--bands", "60", "--pixels", "3000", "--endmembers", "4", "--seed", "9",
        "--gamma", "0.02,0.02,0.02,0.02", "-o", p(&scene),
    ]);
    assert!(gen.status.success(), "{}", String::from_utf8_lossy(&gen.stderr));
    for f in ["data.hsd", "spectra.csv", "abundances.csv", "scene.json"] {
        assert!(scene.join(f).exists(), "{f}");
    }
    let un = hypercsi(&["unmix", "--data", p(&scene.join("data.hsd")), "--no-shift", "-o", p(&est)]);
    assert!(un.status.success(), "{}", String::from_utf8_lossy(&un.stderr));
    let ev = hypercsi(&["eval", "--truth", p(&scene), "--est", p(&est)]);
    assert!(ev.status.success());
    let report: serde_json::Value = serde_json::from_slice(&fs::read(est.join("metrics.json")).unwrap()).unwrap();
    let err = report["phi_en_deg"].as_f64().unwrap();
    assert!(err < 1e-3, "phi_en {err}");

    let diag = fs::read_to_string(est.join("diagnostics.jsonl")).unwrap();
    let first: serde_json::Value = serde_json::from_str(diag.lines().next().unwrap()).unwrap();
    assert_eq!(first["record"], "summary");
}

#[test]
fn csv_data_is_accepted() {
    let dir = tempdir().unwrap();
    let scene = dir.path().join("scene");
    assert_eq!(
        code(&["generate", "--bands", "20", "--pixels", "500", "--endmembers", "3", "--format", "csv", "-o", p(&scene)]),
        0
    );
    let est = dir.path().join("est");
    assert_eq!(code(&["unmix", "--data", p(&scene.join("data.csv")), "--endmembers", "3", "-o", p(&est)]), 0);
    let spectra = read_matrix_csv(&est.join("spectra.csv")).unwrap();
    assert_eq!(spectra.shape(), (20, 3));
    let abundances = read_matrix_csv(&est.join("abundances.csv")).unwrap();
    assert_eq!(abundances.shape(), (500, 3));
}

#[test]
fn exit_codes() {
    let dir = tempdir().unwrap();
    let out = dir.path().join("x");
    assert_eq!(code(&["generate", "--pixels", "10", "--endmembers", "4", "--purity", "0.3", "-o", p(&out)]), 2);
    assert_eq!(code(&["unmix", "--data", "missing.hsd", "--eta", "0", "-o", p(&out)]), 2);
    assert_eq!(code(&["bogus"]), 2);
    assert_eq!(code(&["unmix", "--data", p(&dir.path().join("missing.hsd")), "--endmembers", "3", "-o", p(&out)]), 3);

    let garbage = dir.path().join("garbage.hsd");
    fs::write(&garbage, b"not a dataset").unwrap();
    assert_eq!(code(&["unmix", "--data", p(&garbage), "--endmembers", "3", "-o", p(&out)]), 3);

    // every pixel identical: the data cannot span a simplex
    let flat = dir.path().join("flat.csv");
    write_matrix_csv(&flat, &DMatrix::from_element(50, 10, 0.5)).unwrap();
    assert_ne!(code(&["unmix", "--data", p(&flat), "--endmembers", "3", "-o", p(&out)]), 0);

    let sweep = dir.path().join("bad.cfg");
    fs::write(&sweep, "endmembers = 3\npixels = 100\nfrobnicate = 1\n").unwrap();
    assert_eq!(code(&["mc", "--sweep", p(&sweep), "-o", p(&out)]), 2);
}

#[test]
fn mc_writes_grid_ordered_rows() {
    let dir = tempdir().unwrap();
    let sweep = dir.path().join("s.cfg");
    fs::write(&sweep, "bands = 30\nendmembers = 3\npixels = 400\nsnr_db = 30, inf\ntrials = 3\nmaster_seed = 5\n").unwrap();
    let out = dir.path().join("mc");
    assert_eq!(code(&["mc", "--sweep", p(&sweep), "--threads", "3", "-o", p(&out)]), 0);
    let results = fs::read_to_string(out.join("results.csv")).unwrap();
    let lines: Vec<&str> = results.lines().collect();
    assert_eq!(lines.len(), 7);
    assert!(lines[0].starts_with("n_endmembers,n_pixels,snr_db"));
    assert!(lines[1].contains(",30.0,") || lines[1].contains(",30,"));
    assert!(lines[4].contains(",inf,"));
    let seeds: Vec<&str> = lines[1..].iter().map(|l| l.split(',').nth(5).unwrap()).collect();
    assert_eq!(seeds, ["5", "6", "7", "5", "6", "7"]);
    let summary = fs::read_to_string(out.join("summary.csv")).unwrap();
    assert_eq!(summary.lines().count(), 3);
}
