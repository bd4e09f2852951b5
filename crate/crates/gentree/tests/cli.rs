use std::path::PathBuf;
use std::process::{Command, Output};

fn gentree(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gentree"))
        .args(args)
        .env_remove("GENTREE_SEED")
        .output()
        .expect("binary runs")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("gentree-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn sampling_with_out_is_byte_identical() {
    let a = scratch("a.txt");
    let b = scratch("b.txt");
    for (path, threads) in [(&a, "1"), (&b, "3")] {
        let out = gentree(&[
            "--family", "av1423-4123", "--n", "25", "--reps", "40", "--seed", "9", "--threads", threads, "--out",
            path.to_str().unwrap(), "sample",
        ]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let text_a = std::fs::read_to_string(&a).unwrap();
    assert_eq!(text_a, std::fs::read_to_string(&b).unwrap());
    let mut lines = text_a.lines();
    let header = lines.next().unwrap();
    assert!(header.starts_with("# gentree ") && header.contains(" config "), "{header}");
    let body: Vec<&str> = lines.collect();
    assert_eq!(body.len(), 40);
    assert!(body.iter().all(|l| l.split_whitespace().count() == 25));
}

#[test]
fn seed_changes_the_header_and_samples() {
    let a = scratch("s1.txt");
    let b = scratch("s2.txt");
    for (path, seed) in [(&a, "1"), (&b, "2")] {
        let out = gentree(&["--family", "av123", "--n", "30", "--reps", "5", "--seed", seed, "--out", path.to_str().unwrap(), "sample"]);
        assert!(out.status.success());
    }
    let (ta, tb) = (std::fs::read_to_string(&a).unwrap(), std::fs::read_to_string(&b).unwrap());
    assert_ne!(ta.lines().next(), tb.lines().next());
    assert_ne!(ta, tb);
}

#[test]
fn pat_and_solve_pq() {
    let out = gentree(&["--family", "av1423-4123", "--jumps", "-2,+1B,+1B,+1T,+1T,-7", "pat"]);
    assert!(out.status.success());
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "421563");

    let out = gentree(&["--family", "av123", "solve-pq"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["meta"]["config"]["command"], "solve-pq");
    assert!((v["result"]["t"].as_f64().unwrap() - 0.5).abs() < 1e-12);
}

#[test]
fn gamma_reports_intervals() {
    let out = gentree(&["--family", "av123", "--pattern", "21", "gamma"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let g = &v["result"]["gamma2"];
    let (lo, hi) = (g["lo"].as_f64().unwrap(), g["hi"].as_f64().unwrap());
    assert!(lo <= 0.0625 && 0.0625 <= hi && hi - lo < 1e-6, "{g}");
}

#[test]
fn enumerate_csv_counts() {
    let out = gentree(&["--family", "famB", "--n", "6", "--format", "csv", "enumerate"]);
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.lines().any(|l| l == "6,famB,12"), "{text}");
}

#[test]
fn exit_codes() {
    assert_eq!(gentree(&["--family", "nope", "solve-pq"]).status.code(), Some(1));
    assert_eq!(gentree(&["--family", "famB", "--n", "5", "sample"]).status.code(), Some(1));
    assert_eq!(gentree(&["--family", "av123", "--n", "40", "enumerate"]).status.code(), Some(2));
    assert_eq!(gentree(&["bogus-subcommand"]).status.code(), Some(1));
    assert_eq!(gentree(&["--help"]).status.code(), Some(0));
}

#[test]
fn verify_passes_small_sizes() {
    let out = gentree(&["--family", "famA", "--n", "6", "verify"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stdout));
}
