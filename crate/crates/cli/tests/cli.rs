//! End-to-end runs of the `mted` binary.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use mted_cli::document::{Tree, TreeDocument};
use mted_core::simulation::peak_function;
use mted_core::{MergeTree, WeightedTree};
use tempfile::TempDir;

fn mted(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mted")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn write(dir: &Path, name: &str, content: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, content).unwrap();
    p
}

fn merge_doc(dir: &Path, name: &str, t: &MergeTree) -> PathBuf {
    write(dir, name, &TreeDocument::from_merge(t, Some(name.trim_end_matches(".json").into())).to_json())
}

fn weighted_doc(dir: &Path, name: &str, t: &WeightedTree) -> PathBuf {
    write(dir, name, &TreeDocument::from_weighted(t, None).to_json())
}

fn edge(w: f64) -> WeightedTree {
    WeightedTree::new(&[None, Some(0)], &[0.0, w]).unwrap()
}

fn cherry(b: f64, top: f64) -> MergeTree {
    MergeTree::new(&[Some(2), Some(2), None], &[0.0, b, top]).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn extract_v_shape_and_peak_function() {
    let dir = TempDir::new().unwrap();
    let v = write(dir.path(), "v.csv", "x,y\n0,1\n1,0\n2,1\n");
    let o = mted(&["extract", s(&v)]);
    assert!(o.status.success());
    let doc = TreeDocument::parse(&stdout(&o)).unwrap();
    assert_eq!(doc.nodes.len(), 1);

    let f = peak_function(11, 0);
    let mut csv = String::from("x,y\n");
    for k in 0..=1100 {
        let x = k as f64 / 100.0;
        csv.push_str(&format!("{x},{}\n", f.eval(x)));
    }
    let p = write(dir.path(), "f0.csv", &csv);
    let o = mted(&["extract", s(&p)]);
    let Tree::Merge(t) = TreeDocument::parse(&stdout(&o)).unwrap().to_tree().unwrap() else { panic!("kind") };
    assert_eq!(t.leaves().len(), 13);
}

#[test]
fn extract_rejects_bad_input() {
    let dir = TempDir::new().unwrap();
    let p = write(dir.path(), "bad.csv", "0,1\n2,0\n1,1\n");
    assert_eq!(mted(&["extract", s(&p)]).status.code(), Some(2));
    let p = write(dir.path(), "short.csv", "0,1\n");
    assert_eq!(mted(&["extract", s(&p)]).status.code(), Some(2));
    let p = write(dir.path(), "junk.csv", "0,1\nx,y\n");
    let o = mted(&["extract", s(&p)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!o.stderr.is_empty());
}

#[test]
fn dist_values_and_witness() {
    let dir = TempDir::new().unwrap();
    let a = merge_doc(dir.path(), "a.json", &cherry(0.5, 2.0));
    let b = merge_doc(dir.path(), "b.json", &cherry(0.5, 2.0).map_heights(|h| h + 0.3));
    assert_eq!(stdout(&mted(&["dist", s(&a), s(&a)])), "0\n");
    let w = dir.path().join("w.json");
    let o = mted(&["dist", s(&a), s(&b), "--witness", s(&w)]);
    assert_eq!(stdout(&o), "0.3\n");
    let witness: serde_json::Value = serde_json::from_str(&fs::read_to_string(&w).unwrap()).unwrap();
    assert!(witness["mapping"]["couples"].is_array());

    let star = weighted_doc(dir.path(), "star.json", &WeightedTree::single());
    let t = WeightedTree::new(&[None, Some(0), Some(0), Some(1)], &[0.0, 1.25, 0.5, 2.0]).unwrap();
    let tp = weighted_doc(dir.path(), "t.json", &t);
    assert_eq!(stdout(&mted(&["dist", s(&star), s(&tp)])), "3.75\n");
    assert_eq!(mted(&["dist", s(&star), s(&a)]).status.code(), Some(2));
}

#[test]
fn budget_exhaustion_exits_with_3() {
    let dir = TempDir::new().unwrap();
    let cfg = write(dir.path(), "c.toml", "node_budget = 1\n");
    let t = WeightedTree::new(&[None, Some(0), Some(0), Some(0)], &[0.0, 1.0, 2.0, 3.0]).unwrap();
    let g = WeightedTree::new(&[None, Some(0), Some(0)], &[0.0, 1.5, 2.5]).unwrap();
    let (a, b) = (weighted_doc(dir.path(), "a.json", &t), weighted_doc(dir.path(), "b.json", &g));
    assert_eq!(mted(&["--config", s(&cfg), "dist", s(&a), s(&b)]).status.code(), Some(3));
    let bad = write(dir.path(), "bad.toml", "node_budgett = 1\n");
    assert_eq!(mted(&["--config", s(&bad), "dist", s(&a), s(&b)]).status.code(), Some(2));
}

#[test]
fn matrix_csv() {
    let dir = TempDir::new().unwrap();
    let a = merge_doc(dir.path(), "name.json", &cherry(0.5, 2.0));
    assert_eq!(stdout(&mted(&["matrix", s(&a)])), "name\nname,0\n");
    let b = merge_doc(dir.path(), "other.json", &cherry(1.0, 2.0));
    assert_eq!(stdout(&mted(&["matrix", s(&a), s(&b)])), "name,other\nname,0,0.5\nother,0.5,0\n");
}

#[test]
fn geodesic_midpoint() {
    let dir = TempDir::new().unwrap();
    let (a, b) = (weighted_doc(dir.path(), "a.json", &edge(2.0)), weighted_doc(dir.path(), "b.json", &edge(4.0)));
    let o = mted(&["geodesic", s(&a), s(&b), "--t", "0,0.5,1"]);
    let docs: Vec<TreeDocument> = serde_json::from_str(&stdout(&o)).unwrap();
    let weights: Vec<f64> = docs.iter().map(|d| d.nodes[1].weight.unwrap()).collect();
    assert_eq!(weights, vec![2.0, 3.0, 4.0]);
    assert_eq!(mted(&["geodesic", s(&a), s(&b), "--t", "2"]).status.code(), Some(2));
}

#[test]
fn frechet_median() {
    let dir = TempDir::new().unwrap();
    let paths: Vec<PathBuf> =
        [1.0, 2.0, 6.0].iter().enumerate().map(|(i, &w)| weighted_doc(dir.path(), &format!("{i}.json"), &edge(w))).collect();
    let trace = dir.path().join("trace.csv");
    let o = mted(&["frechet", s(&paths[0]), s(&paths[1]), s(&paths[2]), "--trace", s(&trace)]);
    assert!(o.status.success());
    let Tree::Weighted(m) = TreeDocument::parse(&stdout(&o)).unwrap().to_tree().unwrap() else { panic!("kind") };
    assert_eq!(m.weight(1), 2.0);
    assert_eq!(fs::read_to_string(&trace).unwrap(), "iteration,objective\n0,5\n1,5\n");
}

#[test]
fn mds_of_a_matrix() {
    let dir = TempDir::new().unwrap();
    let m = write(dir.path(), "m.csv", "a,b\na,0,3\nb,3,0\n");
    let o = mted(&["mds", s(&m)]);
    let lines: Vec<String> = stdout(&o).lines().map(String::from).collect();
    assert_eq!(lines[0], "name,x,y");
    let x: Vec<f64> = lines[1..].iter().map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert!(((x[0] - x[1]).abs() - 3.0).abs() < 1e-9);
}

#[test]
fn simulate_writes_artifacts() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("sim");
    let o = mted(&["simulate", "--peaks", "5", "--out", s(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).lines().all(|l| l.starts_with("PASS")));
    for f in ["functions.csv", "diagrams.json", "matrix.csv", "mds.csv", "report.json", "trees/f_0.json"] {
        assert!(out.join(f).exists(), "{f}");
    }
}
