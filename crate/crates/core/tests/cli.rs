use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

const BIN: &str = env!("CARGO_BIN_EXE_wsbmf");

fn run(args: &[&str], cwd: &Path) -> Output {
    Command::new(BIN).args(args).current_dir(cwd).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn write_bicliques(path: &Path, sizes: &[(usize, usize)]) {
    let mut text = String::new();
    for (k, &(nd, ng)) in sizes.iter().enumerate() {
        for d in 0..nd {
            for g in 0..ng {
                text.push_str(&format!("d{k}_{d}\tg{k}_{g}\n"));
            }
        }
    }
    fs::write(path, text).unwrap();
}

#[test]
fn detect_writes_cover_entropy_and_manifest() {
    let dir = TempDir::new().unwrap();
    fs::write(dir.path().join("women.tsv"), wsbmf::ingest::WOMEN_TSV).unwrap();
    let o = run(&["detect", "women.tsv", "--c", "2", "--seed", "7", "--out", "res"], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).starts_with("communities=2 "));
    let cover = fs::read_to_string(dir.path().join("res/cover.tsv")).unwrap();
    assert_eq!(cover.lines().filter(|l| !l.starts_with('#')).count(), 32);
    assert!(dir.path().join("res/entropy.tsv").exists());
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("res/manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["seed"], 7);
    assert_eq!(manifest["inputs"][0]["sha256"], wsbmf::ingest::WOMEN_SHA256);
}

#[test]
fn exit_codes() {
    let dir = TempDir::new().unwrap();
    fs::write(dir.path().join("empty.tsv"), "# no edges\n").unwrap();
    assert_eq!(run(&["detect", "empty.tsv", "--c", "2"], dir.path()).status.code(), Some(2));
    assert_eq!(run(&["detect", "missing.tsv", "--c", "2"], dir.path()).status.code(), Some(2));
    assert_eq!(run(&["detect", "empty.tsv", "--bogus"], dir.path()).status.code(), Some(1));
    assert_eq!(run(&["--help"], dir.path()).status.code(), Some(0));
}

#[test]
fn detect_then_evaluate_recovers_bicliques() {
    let dir = TempDir::new().unwrap();
    write_bicliques(&dir.path().join("g.tsv"), &[(4, 3), (3, 4)]);
    let o = run(&["detect", "g.tsv", "--c", "2", "--out", "a"], dir.path());
    assert!(o.status.success());
    assert!(stdout(&o).contains("objective=0 density=1.000000"));

    let o = run(&["detect", "g.tsv", "--c", "2", "--format", "json", "--out", "b"], dir.path());
    assert!(o.status.success());
    let o = run(&["evaluate", "a/cover.tsv", "b/cover.json", "--mode", "nmi"], dir.path());
    assert_eq!(stdout(&o).trim().parse::<f64>().unwrap(), 1.0);
    let o = run(&["evaluate", "a/cover.tsv", "b/cover.json", "--mode", "gnmi", "--part", "gamma"], dir.path());
    assert_eq!(stdout(&o).trim().parse::<f64>().unwrap(), 1.0);
}

#[test]
fn sweep_picks_the_number_of_blocks() {
    let dir = TempDir::new().unwrap();
    write_bicliques(&dir.path().join("two.tsv"), &[(4, 3), (3, 4)]);
    write_bicliques(&dir.path().join("one.tsv"), &[(4, 4)]);
    let o = run(&["sweep", "two.tsv", "--c-min", "1", "--c-max", "4", "--out", "s2"], dir.path());
    assert!(stdout(&o).lines().any(|l| l == "best_c=2"), "{}", stdout(&o));
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("s2/sweep.json")).unwrap()).unwrap();
    assert_eq!(report["best_c"], 2);
    let o = run(&["sweep", "one.tsv", "--c-min", "1", "--c-max", "3", "--out", "s1"], dir.path());
    assert!(stdout(&o).lines().any(|l| l == "best_c=1"), "{}", stdout(&o));
}

#[test]
fn generate_benchmarks() {
    let dir = TempDir::new().unwrap();
    let o = run(&["generate", "--out", "n", "nonoverlap", "--zout", "0"], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let truth = fs::read_to_string(dir.path().join("n/truth.tsv")).unwrap();
    assert_eq!(truth.lines().filter(|l| !l.starts_with('#')).count(), 256);

    let o = run(&["generate", "--out", "o", "--format", "json", "overlap", "--t", "8"], dir.path());
    assert!(o.status.success());
    let truth: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("o/truth.json")).unwrap()).unwrap();
    let duals = truth["nodes"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|n| n["communities"].as_array().unwrap().len() == 2)
        .count();
    assert_eq!(duals, 24);

    let o = run(
        &["generate", "--out", "c", "--prior-fraction", "0.1", "classic", "--pin", "1", "--alpha", "0"],
        dir.path(),
    );
    assert!(o.status.success());
    assert!(dir.path().join("c/priors.txt").exists());
    let edges = fs::read_to_string(dir.path().join("c/graph.tsv")).unwrap();
    assert_eq!(edges.lines().filter(|l| !l.starts_with('#')).count(), 5 * 10 * 10);
    let o = run(&["evaluate", "n/truth.tsv", "n/truth.tsv"], dir.path());
    assert_eq!(stdout(&o).trim(), "1");
}

#[test]
fn outputs_are_byte_identical_across_runs() {
    let dir = TempDir::new().unwrap();
    fs::write(dir.path().join("women.tsv"), wsbmf::ingest::WOMEN_TSV).unwrap();
    for out in ["r1", "r2"] {
        let o = run(&["detect", "women.tsv", "--c", "3", "--format", "json", "--out", out], dir.path());
        assert!(o.status.success());
    }
    for file in ["cover.json", "entropy.tsv"] {
        let a = fs::read(dir.path().join("r1").join(file)).unwrap();
        let b = fs::read(dir.path().join("r2").join(file)).unwrap();
        assert_eq!(a, b, "{file} differs");
    }
}
