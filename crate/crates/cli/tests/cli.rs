use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use lcac::bundled;
use lcac::ggd::{sample, ConstellationProfile};
use lcac::layout::{read_grid, Role};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

fn lcac(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lcac")).current_dir(dir).args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

/// Source file plus key in a fresh directory.
fn setup() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    let src: Vec<u8> = (0..110u32).map(|i| (i * 37 + 11) as u8).collect();
    fs::write(dir.path().join("src.bin"), src).unwrap();
    let o = lcac(dir.path(), &["keygen", "--source", "src.bin", "--out", "key.hex", "--seed", "5"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    dir
}

#[test]
fn generate_writes_47_square_pgm_and_decodes() {
    let dir = setup();
    let d = dir.path();
    assert_eq!(code(&lcac(d, &["generate", "--source", "src.bin", "--key", "key.hex", "--out", "b.pgm"])), 0);
    let img = fs::read(d.join("b.pgm")).unwrap();
    assert!(img.starts_with(b"P5\n47 47\n255\n"));
    assert_eq!(img.len(), b"P5\n47 47\n255\n".len() + 47 * 47);
    assert!(d.join("b.json").exists());

    assert_eq!(code(&lcac(d, &["decode", "--image", "b.pgm", "--out", "back.bin"])), 0);
    assert_eq!(fs::read(d.join("back.bin")).unwrap(), fs::read(d.join("src.bin")).unwrap());
    assert_eq!(code(&lcac(d, &["verify", "--image", "b.pgm", "--key", "key.hex"])), 0);

    // Same flags, same bytes.
    assert_eq!(code(&lcac(d, &["generate", "--source", "src.bin", "--key", "key.hex", "--out", "b2.pgm"])), 0);
    assert_eq!(img, fs::read(d.join("b2.pgm")).unwrap());
}

#[test]
fn strategies_differ_only_on_data_modules() {
    let dir = setup();
    let d = dir.path();
    for (s, out) in [("1", "s1.pgm"), ("2", "s2.pgm")] {
        let o = lcac(d, &["generate", "--source", "src.bin", "--key", "key.hex", "--strategy", s, "--out", out]);
        assert_eq!(code(&o), 0);
    }
    let (a, _) = read_grid(&d.join("s1.pgm")).unwrap();
    let (b, _) = read_grid(&d.join("s2.pgm")).unwrap();
    let diff: Vec<usize> = (0..a.intensities.len()).filter(|&i| a.intensities[i] != b.intensities[i]).collect();
    assert!(!diff.is_empty());
    assert!(diff.iter().all(|&i| a.roles[i] == Role::Data));
    // Each strategy writes at most 255 bits, so at most 2 * 255 modules move.
    assert!(diff.len() <= 510);
}

#[test]
fn missing_key_exits_2_without_output() {
    let dir = setup();
    let d = dir.path();
    let o = lcac(d, &["generate", "--source", "src.bin", "--key", "absent.hex", "--out", "x.pgm"]);
    assert_eq!(code(&o), 2);
    assert!(!d.join("x.pgm").exists() && !d.join("x.json").exists());
}

#[test]
fn usage_and_validation_errors_exit_2() {
    let dir = setup();
    let d = dir.path();
    assert_eq!(code(&lcac(d, &["generate", "--strategy", "3"])), 2);
    assert_eq!(code(&lcac(d, &["no-such-command"])), 2);
    fs::write(d.join("short.bin"), [0u8; 10]).unwrap();
    assert_eq!(code(&lcac(d, &["keygen", "--source", "short.bin", "--out", "k2.hex"])), 2);
    assert_eq!(code(&lcac(d, &["keygen", "--source", "src.bin", "--out", "k3.hex", "--ka", "100"])), 2);
}

#[test]
fn capture_is_legal_and_foreign_key_is_illegal() {
    let dir = setup();
    let d = dir.path();
    assert_eq!(code(&lcac(d, &["generate", "--source", "src.bin", "--key", "key.hex", "--out", "b.pgm"])), 0);
    assert_eq!(code(&lcac(d, &["channel", "--image", "b.pgm", "--out", "cap.pgm", "--seed", "3"])), 0);
    assert_eq!(code(&lcac(d, &["verify", "--image", "cap.pgm", "--key", "key.hex"])), 0);
    let o = lcac(d, &["attack", "--image", "b.pgm", "--ns", "2", "--out", "copy.pgm", "--seed", "3"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let o = lcac(d, &["verify", "--image", "copy.pgm", "--key", "key.hex"]);
    assert!(matches!(code(&o), 0 | 1));
    // A key issued separately for the same source never authenticates.
    assert_eq!(code(&lcac(d, &["keygen", "--source", "src.bin", "--out", "other.hex", "--seed", "6"])), 0);
    let o = lcac(d, &["verify", "--image", "b.pgm", "--key", "other.hex"]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stdout).contains("verdict=illegal"));
}

fn write_samples(path: &Path, profile: &ConstellationProfile<f64>, n: usize, seed: u64) {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut s = String::from("constellation,value\n");
    for _ in 0..n {
        for r in &profile.rows {
            s.push_str(&format!("{},{}\n", r.x, sample(&r.params(), &mut rng).unwrap()));
        }
    }
    fs::write(path, s).unwrap();
}

#[test]
fn estimate_recovers_table2p() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let truth = bundled::table2('p').unwrap();
    write_samples(&d.join("s.csv"), &truth, 40_000, 8);
    assert_eq!(code(&lcac(d, &["estimate", "--samples", "s.csv", "--out", "p.json"])), 0);
    let est = ConstellationProfile::load(&d.join("p.json")).unwrap();
    assert_eq!(est.points(), truth.points());
    for (e, t) in est.rows.iter().zip(&truth.rows) {
        assert!((e.mu - t.mu).abs() < 1.0);
        assert!((e.sigma2 / t.sigma2 - 1.0).abs() < 0.08);
        assert!((e.gamma - t.gamma).abs() < 0.15);
    }
    assert_eq!(code(&lcac(d, &["estimate", "--samples", "s.csv", "--out", "p2.json"])), 0);
    assert_eq!(fs::read(d.join("p.json")).unwrap(), fs::read(d.join("p2.json")).unwrap());
}

#[test]
fn estimate_rejects_single_constellation_and_malformed_csv() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(d.join("one.csv"), "constellation,value\n40,41\n40,39\n40,44\n").unwrap();
    let o = lcac(d, &["estimate", "--samples", "one.csv", "--out", "p.json"]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("insufficient data"));
    fs::write(d.join("bad.csv"), "constellation,value\n40,41\n100,x\n").unwrap();
    assert_eq!(code(&lcac(d, &["estimate", "--samples", "bad.csv", "--out", "p.json"])), 2);
    assert!(!d.join("p.json").exists());
}

#[test]
fn fit_predict_optimize() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(code(&lcac(d, &["fit", "--out", "m.json"])), 0);
    let o = lcac(d, &["predict", "--model", "m.json", "--ns", "8", "--out", "p8.json"]);
    assert_eq!(code(&o), 0);
    let p8 = ConstellationProfile::load(&d.join("p8.json")).unwrap();
    let r = p8.params_for(100.0).unwrap();
    assert!((r.mu / 110.30 - 1.0).abs() < 0.01 && (r.sigma2 / 393.58 - 1.0).abs() < 0.01);
    assert_eq!(code(&lcac(d, &["predict", "--ns", "40"])), 2);
    let o = lcac(d, &["optimize", "--model", "m.json", "--out", "opt.json"]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8_lossy(&o.stdout);
    assert!(text.contains("k_a=179"), "{text}");
}

#[test]
fn experiment_outputs_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    for (out, threads) in [("a", "1"), ("b", "3")] {
        let o = lcac(d, &["experiment", "fig17", "--trials", "6", "--out", out, "--threads", threads]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    }
    for f in ["fig17_trials.csv", "fig17_summary.csv", "fig17_plan.toml"] {
        assert_eq!(fs::read(d.join("a").join(f)).unwrap(), fs::read(d.join("b").join(f)).unwrap(), "{f}");
    }
    let summary = fs::read_to_string(d.join("a/fig17_summary.csv")).unwrap();
    let mut lines = summary.lines();
    assert!(lines.next().unwrap().starts_with("f,eps_a2_theory,"));
    assert_eq!(lines.count(), 16);
    assert!(fs::read_to_string(d.join("a/fig17_plan.toml")).unwrap().contains("seed = 20210817"));
}

#[test]
fn table6_plan_has_before_after_rows() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let o = lcac(d, &["experiment", "table6", "--trials", "4", "--out", "t"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let summary = fs::read_to_string(d.join("t/table6_summary.csv")).unwrap();
    let rows: Vec<&str> = summary.lines().collect();
    assert_eq!(rows.len(), 4);
    assert!(rows[0].contains("eps_a2_theory") && rows[0].contains("p_zero_sim") && rows[0].contains("ref_p_zero"));
    assert!(rows[1].starts_with("before,147,14"));
    assert!(rows[2].starts_with("after,179,10") && rows[3].starts_with("after,179,10"));
}

#[test]
fn invalid_plan_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(d.join("p.toml"), "name = \"x\"\nseed = 1\ntrials = 0\n[recipe]\nkind = \"fig17\"\n").unwrap();
    let o = lcac(d, &["experiment", "p.toml"]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("trial count"));
    assert_eq!(code(&lcac(d, &["experiment", "nonexistent"])), 2);
}
