//! End-to-end runs of the `opmult` binary.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data").join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_opmult")).args(args).output().expect("binary runs")
}

fn run_path(args: &[&str], path: &Path) -> Output {
    let mut all: Vec<&str> = args.to_vec();
    all.push(path.to_str().unwrap());
    run(&all)
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

// Standard output is the CSV followed by the pretty-printed JSON summary.
fn split(o: &Output) -> (Vec<Vec<String>>, Value) {
    let text = String::from_utf8(o.stdout.clone()).unwrap();
    let at = text.find("\n{").expect("JSON summary follows the CSV") + 1;
    let rows = text[..at].lines().map(|l| l.split(',').map(str::to_owned).collect()).collect();
    (rows, serde_json::from_str(&text[at..]).unwrap())
}

fn num(s: &str) -> f64 {
    s.parse().unwrap()
}

fn write_json(dir: &Path, name: &str, v: &Value) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, serde_json::to_string(v).unwrap()).unwrap();
    p
}

fn real_matrix(m: &[Vec<f64>]) -> Value {
    Value::Array(m.iter().map(|r| Value::Array(r.iter().map(|&x| json!([x, 0.0])).collect())).collect())
}

#[test]
fn all_ones_schur_norm_is_one() {
    let o = run_path(&["norm"], &data("all_ones_4.json"));
    assert_eq!(code(&o), 0);
    let (rows, summary) = split(&o);
    assert_eq!(rows[0], ["lower", "upper", "lower_method", "upper_method", "relative_width"]);
    assert!((num(&rows[1][0]) - 1.0).abs() <= 1e-9 && (num(&rows[1][1]) - 1.0).abs() <= 1e-9);
    assert_eq!(summary["status"], "tight");
}

#[test]
fn transposition_norm_is_its_dimension() {
    let o = run_path(&["norm"], &data("transposition_3.json"));
    assert_eq!(code(&o), 0);
    let (_, s) = split(&o);
    let (lo, hi) = (s["bracket"]["lower"].as_f64().unwrap(), s["bracket"]["upper"].as_f64().unwrap());
    assert!(lo >= 3.0 - 1e-3 && hi <= 3.0 + 1e-3, "[{lo}, {hi}]");
}

#[test]
fn input_errors_exit_one() {
    let o = run_path(&["norm"], &data("malformed_dims.json"));
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("values"));
    assert_eq!(code(&run(&["norm", "/nonexistent/file.json"])), 1);
    assert_eq!(code(&run(&["frobnicate"])), 1);
    assert_eq!(code(&run_path(&["--tol", "0", "norm"], &data("all_ones_4.json"))), 1);
    assert_eq!(code(&run_path(&["compact-test", "--schedule", "2,1"], &data("all_ones_4.json"))), 1);
    assert_eq!(code(&run_path(&["compact-test", "--schedule", "1,9"], &data("all_ones_4.json"))), 1);
    assert_eq!(code(&run(&["saar-demo", "--max-block", "13"])), 1);
    assert_eq!(code(&run(&["saar-demo", "--max-block", "1"])), 1);
}

#[test]
fn compact_test_verdicts() {
    let verdict = |file: &str, schedule: &str| {
        let o = run_path(&["compact-test", "--schedule", schedule], &data(file));
        assert_eq!(code(&o), 0, "{file}");
        split(&o)
    };
    let (rows, s) = verdict("finite_support_6.json", "1,2,3,4,5");
    assert_eq!(s["verdict"], "compact_evidence");
    assert_eq!(num(&rows.last().unwrap()[2]), 0.0);
    let (rows, s) = verdict("all_ones_4.json", "1,2,3");
    assert_eq!(s["verdict"], "non_compact_evidence");
    assert!(rows[1..].iter().all(|r| num(&r[1]) >= 1.0 - 1e-9), "{rows:?}");
    let (rows, s) = verdict("geometric_24.json", "1,4,8,12,16,20,23");
    assert_eq!(s["verdict"], "compact_evidence");
    assert!(s["decay_exponent"].as_f64().unwrap() > 0.0);
    let uppers: Vec<f64> = rows[1..].iter().map(|r| num(&r[2])).collect();
    assert!(uppers.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-6)), "{uppers:?}");
}

#[test]
fn saar_demo_reports_block_norms() {
    let o = run(&["saar-demo", "--max-block", "4"]);
    assert_eq!(code(&o), 0);
    let (rows, s) = split(&o);
    let blocks = s["blocks"].as_array().unwrap();
    assert_eq!(blocks.len(), 4);
    // block k is the transposition on k x k scaled by 1/k: level one norm
    // 1/k, completely bounded norm 1
    for b in blocks {
        let k = b["k"].as_f64().unwrap();
        assert!((b["level1_norm"].as_f64().unwrap() - 1.0 / k).abs() <= 1e-6, "{b}");
        assert!((b["cb"]["lower"].as_f64().unwrap() - 1.0).abs() <= 1e-6, "{b}");
        assert!(b["obstruction_bound"].as_f64().unwrap() >= 1.0 - 1e-6, "{b}");
    }
    assert_eq!(blocks[1]["k"], 2);
    assert!((blocks[1]["level1_norm"].as_f64().unwrap() - 0.5).abs() <= 1e-6);
    let tails: Vec<&Vec<String>> = rows.iter().filter(|r| r[0] == "tail").collect();
    assert_eq!(tails.len(), 5);
    assert_eq!(num(&tails[4][6]), 0.0);
}

// Naive triple sum `Σ_y φ(x, y, z) K_1(x, y) K_2(y, z)`.
fn schur_action(phi: &[Vec<Vec<f64>>], k1: &[Vec<f64>], k2: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let (d1, d2, d3) = (phi.len(), phi[0].len(), phi[0][0].len());
    (0..d1).map(|x| (0..d3).map(|z| (0..d2).map(|y| phi[x][y][z] * k1[x][y] * k2[y][z]).sum()).collect()).collect()
}

fn apply_matrix(o: &Output) -> Vec<Vec<f64>> {
    assert_eq!(code(o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let (rows, s) = split(o);
    let (r, c) = (s["rows"].as_u64().unwrap() as usize, s["cols"].as_u64().unwrap() as usize);
    let mut m = vec![vec![f64::NAN; c]; r];
    for row in &rows[1..] {
        assert_eq!(num(&row[3]), 0.0);
        m[row[0].parse::<usize>().unwrap()][row[1].parse::<usize>().unwrap()] = num(&row[2]);
    }
    m
}

fn random_matrix(r: usize, c: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    (0..r).map(|_| (0..c).map(|_| rng.gen_range(-2.0..2.0)).collect()).collect()
}

#[test]
fn apply_matches_naive_schur_action() {
    let dir = tempfile::tempdir().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (d1, d2, d3) = (3, 4, 2);
    let phi: Vec<Vec<Vec<f64>>> = (0..d1).map(|_| random_matrix(d2, d3, &mut rng)).collect();
    let (k1, k2) = (random_matrix(d1, d2, &mut rng), random_matrix(d2, d3, &mut rng));
    let values = Value::Array(phi.iter().map(|m| real_matrix(m)).collect());
    let input = write_json(dir.path(), "phi.json", &json!({"kind": "schur", "dims": [d1, d2, d3], "values": values}));
    let kernels = write_json(dir.path(), "k.json", &json!({"kernels": [real_matrix(&k1), real_matrix(&k2)]}));
    let got = apply_matrix(&run(&["apply", input.to_str().unwrap(), "--kernels", kernels.to_str().unwrap()]));
    let want = schur_action(&phi, &k1, &k2);
    for (g, w) in got.iter().flatten().zip(want.iter().flatten()) {
        assert!((g - w).abs() <= 1e-10 * w.abs().max(1.0), "{got:?} vs {want:?}");
    }
}

#[test]
fn apply_identity_echoes_and_empty_sum_vanishes() {
    let dir = tempfile::tempdir().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let k = random_matrix(3, 4, &mut rng);
    let kernels = write_json(dir.path(), "k.json", &json!({"kernels": [real_matrix(&k)]}));
    let ones = real_matrix(&vec![vec![1.0; 4]; 3]);
    let input = write_json(dir.path(), "ones.json", &json!({"kind": "schur", "dims": [3, 4], "values": ones}));
    let got = apply_matrix(&run(&["apply", input.to_str().unwrap(), "--kernels", kernels.to_str().unwrap()]));
    for (g, w) in got.iter().flatten().zip(k.iter().flatten()) {
        assert!((g - w).abs() <= 1e-11 * w.abs().max(1.0));
    }
    let empty = write_json(dir.path(), "empty.json", &json!({"kind": "tensor_sum", "dims": [3, 4], "terms": []}));
    let got = apply_matrix(&run(&["apply", empty.to_str().unwrap(), "--kernels", kernels.to_str().unwrap()]));
    assert_eq!((got.len(), got[0].len()), (4, 3));
    assert!(got.iter().flatten().all(|&x| x == 0.0));
}

#[test]
fn canonical_files_round_trip_byte_identically() {
    for f in ["all_ones_4.json", "transposition_3.json", "three_leg.json", "geometric_24.json"] {
        let text = std::fs::read_to_string(data(f)).unwrap();
        let once = opmult_cli::canonicalize(&text).unwrap();
        assert_eq!(opmult_cli::canonicalize(&once).unwrap(), once, "{f}");
    }
}

#[test]
fn same_seed_gives_identical_reports() {
    let a = run_path(&["--seed", "5", "norm"], &data("three_leg.json"));
    let b = run_path(&["--seed", "5", "norm"], &data("three_leg.json"));
    assert!(code(&a) == 0 || code(&a) == 2);
    assert_eq!(a.stdout, b.stdout);
    let a = run(&["saar-demo", "--max-block", "5"]);
    assert_eq!(a.stdout, run(&["saar-demo", "--max-block", "5"]).stdout);
}

#[test]
fn emit_writes_csv_and_json_side_by_side() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("profile.csv");
    let o = run(&["--emit", out.to_str().unwrap(), "compact-test", data("finite_support_6.json").to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    assert!(o.stdout.is_empty());
    let csv = std::fs::read_to_string(&out).unwrap();
    assert!(csv.starts_with("cutoff,tail_lower,tail_upper\n"));
    assert_eq!(csv.lines().count(), 6);
    let summary: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("profile.json")).unwrap()).unwrap();
    assert_eq!(summary["command"], "compact-test");
    // only the two reports remain: the temporaries were renamed into place
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 2);
}
