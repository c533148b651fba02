//! Subcommand implementations. Everything printed goes to `out`; diagnostics go to
//! standard error.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use mted_core::distance::{pairwise, truncation_level};
use mted_core::geometry::{frechet_mean, geodesic};
use mted_core::mds::{classical_mds, Embedding};
use mted_core::simulation;
use mted_core::{
    distance_matrix, edit_distance, merge_tree_distance, merge_tree_from_pl, truncate, untruncate, DistanceResult,
    MergeTree, PlFunction, SolverConfig, WeightedTree,
};
use serde::Serialize;

use crate::config::Config;
use crate::document::{Tree, TreeDocument};
use crate::{Cli, CliError, Command};

pub fn run(cli: Cli, out: &mut dyn Write) -> Result<(), CliError> {
    let cfg = Config::load(cli.config.as_deref())?;
    match cli.command {
        Command::Extract { input, output, name } => extract(&input, output.as_deref(), name, out),
        Command::Dist { a, b, witness } => dist(&a, &b, witness.as_deref(), &cfg, out),
        Command::Matrix { inputs, output } => matrix(&inputs, output.as_deref(), &cfg, out),
        Command::Geodesic { a, b, t, output } => geodesic_cmd(&a, &b, &t, output.as_deref(), &cfg, out),
        Command::Frechet { inputs, p, max_iters, tol, output, trace } => {
            let mut fc = cfg.frechet(p);
            fc.max_iters = max_iters.unwrap_or(fc.max_iters);
            fc.tol = tol.unwrap_or(fc.tol);
            frechet(&inputs, &fc, output.as_deref(), trace.as_deref(), out)
        }
        Command::Mds { input, output } => mds(&input, output.as_deref(), out),
        Command::Simulate { peaks, out: dir } => simulate(peaks, &dir, &cfg.solver(), out),
    }
}

// ---------------------------------------------------------------------------------
// helpers

fn emit(path: Option<&Path>, content: &str, out: &mut dyn Write) -> Result<(), CliError> {
    match path {
        Some(p) => fs::write(p, content).map_err(|e| CliError::Output(format!("cannot write {}: {e}", p.display()))),
        None => out.write_all(content.as_bytes()).map_err(|e| CliError::Output(e.to_string())),
    }
}

/// A value rounded to 12 significant digits, printed without trailing noise.
pub fn fmt_sig12(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let rounded: f64 = format!("{x:.11e}").parse().expect("formatted float parses");
    format!("{rounded}")
}

struct Named {
    name: String,
    tree: Tree,
}

fn load(paths: &[PathBuf]) -> Result<Vec<Named>, CliError> {
    paths
        .iter()
        .map(|p| {
            let doc = TreeDocument::read(p)?;
            let name = doc
                .name
                .clone()
                .unwrap_or_else(|| p.file_stem().map_or_else(|| p.display().to_string(), |s| s.to_string_lossy().into()));
            Ok(Named { name, tree: doc.to_tree()? })
        })
        .collect()
}

enum Trees {
    Merge(Vec<MergeTree>),
    Weighted(Vec<WeightedTree>),
}

fn same_kind(items: &[Named]) -> Result<Trees, CliError> {
    let merge: Vec<MergeTree> = items.iter().filter_map(|n| if let Tree::Merge(m) = &n.tree { Some(m.clone()) } else { None }).collect();
    let weighted: Vec<WeightedTree> =
        items.iter().filter_map(|n| if let Tree::Weighted(w) = &n.tree { Some(w.clone()) } else { None }).collect();
    match (merge.len(), weighted.len()) {
        (_, 0) => Ok(Trees::Merge(merge)),
        (0, _) => Ok(Trees::Weighted(weighted)),
        _ => Err(CliError::Input("all trees must be of the same kind".into())),
    }
}

/// Weighted trees to work with, and the level to map results back to merge trees.
fn as_weighted(trees: Trees) -> Result<(Vec<WeightedTree>, Option<f64>), CliError> {
    match trees {
        Trees::Weighted(w) => Ok((w, None)),
        Trees::Merge(m) => {
            let k = truncation_level(&m.iter().collect::<Vec<_>>());
            let w = m.iter().map(|t| truncate(t, k)).collect::<Result<_, _>>().map_err(|e| CliError::Input(e.to_string()))?;
            Ok((w, Some(k)))
        }
    }
}

fn document_of(t: &WeightedTree, level: Option<f64>, name: Option<String>) -> TreeDocument {
    match level {
        Some(k) => TreeDocument::from_merge(&untruncate(t, k), name),
        None => TreeDocument::from_weighted(t, name),
    }
}

fn matrix_csv(names: &[String], m: &[Vec<f64>]) -> Result<String, CliError> {
    let mut w = csv::WriterBuilder::new().flexible(true).from_writer(vec![]);
    let err = |e: csv::Error| CliError::Output(e.to_string());
    w.write_record(names).map_err(err)?;
    for (name, row) in names.iter().zip(m) {
        let mut rec = vec![name.clone()];
        rec.extend(row.iter().map(|x| x.to_string()));
        w.write_record(&rec).map_err(err)?;
    }
    String::from_utf8(w.into_inner().map_err(|e| CliError::Output(e.to_string()))?).map_err(|e| CliError::Output(e.to_string()))
}

fn collect_matrix(cells: Vec<Vec<Result<f64, mted_core::DistanceError>>>) -> Result<Vec<Vec<f64>>, CliError> {
    cells.into_iter().map(|row| row.into_iter().map(|c| c.map_err(CliError::from)).collect()).collect()
}

// ---------------------------------------------------------------------------------
// commands

fn extract(input: &Path, output: Option<&Path>, name: Option<String>, out: &mut dyn Write) -> Result<(), CliError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_path(input)
        .map_err(|e| CliError::Input(format!("cannot read {}: {e}", input.display())))?;
    let (mut xs, mut ys) = (vec![], vec![]);
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| CliError::Input(format!("malformed CSV: {e}")))?;
        let parsed: Option<(f64, f64)> = match (rec.get(0), rec.get(1), rec.len()) {
            (Some(x), Some(y), 2) => x.parse().ok().zip(y.parse().ok()),
            _ => None,
        };
        match parsed {
            Some((x, y)) => {
                xs.push(x);
                ys.push(y);
            }
            // a header line
            None if i == 0 => {}
            None => return Err(CliError::Input(format!("malformed CSV row {}: expected two numbers", i + 1))),
        }
    }
    if xs.len() < 2 {
        return Err(CliError::Input("need at least two samples".into()));
    }
    let f = PlFunction::new(xs, ys).map_err(|e| CliError::Input(format!("invalid samples: {e}")))?;
    let t = merge_tree_from_pl(&f).canonical_form();
    emit(output, &(TreeDocument::from_merge(&t, name).to_json() + "\n"), out)
}

#[derive(Serialize)]
struct Witness<'a> {
    value: f64,
    /// Level at which merge trees were truncated (ids of the extra root: one past the last vertex).
    truncation_level: Option<f64>,
    mapping: &'a mted_core::Mapping,
}

fn dist(a: &Path, b: &Path, witness: Option<&Path>, cfg: &Config, out: &mut dyn Write) -> Result<(), CliError> {
    let items = load(&[a.to_path_buf(), b.to_path_buf()])?;
    let solver = cfg.solver();
    let (r, level): (DistanceResult, Option<f64>) = match same_kind(&items)? {
        Trees::Merge(m) => (merge_tree_distance(&m[0], &m[1], &solver)?, Some(truncation_level(&[&m[0], &m[1]]))),
        Trees::Weighted(w) => (edit_distance(&w[0], &w[1], &solver)?, None),
    };
    if let Some(path) = witness {
        let w = Witness { value: r.value, truncation_level: level, mapping: &r.mapping };
        let json = serde_json::to_string_pretty(&w).map_err(|e| CliError::Output(e.to_string()))?;
        emit(Some(path), &(json + "\n"), out)?;
    }
    emit(None, &format!("{}\n", fmt_sig12(r.value)), out)
}

fn matrix(inputs: &[PathBuf], output: Option<&Path>, cfg: &Config, out: &mut dyn Write) -> Result<(), CliError> {
    let items = load(inputs)?;
    let names: Vec<String> = items.iter().map(|n| n.name.clone()).collect();
    let solver = cfg.solver();
    let cells = match same_kind(&items)? {
        Trees::Merge(m) => distance_matrix(&m, &solver),
        Trees::Weighted(w) => pairwise(&w, |a, b| edit_distance(a, b, &solver).map(|r| r.value)),
    };
    emit(output, &matrix_csv(&names, &collect_matrix(cells)?)?, out)
}

fn geodesic_cmd(a: &Path, b: &Path, ts: &[f64], output: Option<&Path>, cfg: &Config, out: &mut dyn Write) -> Result<(), CliError> {
    let items = load(&[a.to_path_buf(), b.to_path_buf()])?;
    let (w, level) = as_weighted(same_kind(&items)?)?;
    let g = geodesic(&w[0], &w[1], &cfg.solver())?;
    let docs = ts
        .iter()
        .map(|&t| Ok(document_of(&g.eval(t)?, level, Some(format!("t={t}")))))
        .collect::<Result<Vec<_>, CliError>>()?;
    let json = serde_json::to_string_pretty(&docs).map_err(|e| CliError::Output(e.to_string()))?;
    emit(output, &(json + "\n"), out)
}

fn frechet(
    inputs: &[PathBuf],
    fc: &mted_core::geometry::FrechetConfig,
    output: Option<&Path>,
    trace: Option<&Path>,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    let items = load(inputs)?;
    let (w, level) = as_weighted(same_kind(&items)?)?;
    let r = frechet_mean(&w, fc)?;
    let mut csv = String::from("iteration,objective\n");
    for (i, f) in r.trace.iter().enumerate() {
        csv.push_str(&format!("{i},{f}\n"));
    }
    match trace {
        Some(p) => emit(Some(p), &csv, out)?,
        None => eprint!("{csv}"),
    }
    emit(output, &(document_of(&r.mean, level, Some("mean".into())).to_json() + "\n"), out)
}

fn read_matrix(input: &Path) -> Result<(Vec<String>, Vec<Vec<f64>>), CliError> {
    let bad = |m: String| CliError::Input(format!("{}: {m}", input.display()));
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_path(input)
        .map_err(|e| bad(e.to_string()))?;
    let mut recs = rdr.records();
    let names: Vec<String> = recs.next().ok_or_else(|| bad("empty matrix".into()))?.map_err(|e| bad(e.to_string()))?.iter().map(String::from).collect();
    let mut rows = Vec::new();
    for rec in recs {
        let rec = rec.map_err(|e| bad(e.to_string()))?;
        if rec.len() != names.len() + 1 {
            return Err(bad(format!("row of length {} in a matrix of {} names", rec.len(), names.len())));
        }
        let row = rec.iter().skip(1).map(|x| x.trim().parse::<f64>()).collect::<Result<Vec<_>, _>>().map_err(|e| bad(e.to_string()))?;
        rows.push(row);
    }
    if rows.len() != names.len() {
        return Err(bad("matrix is not square".into()));
    }
    Ok((names, rows))
}

fn mds_csv(names: &[String], e: &Embedding) -> String {
    let mut s = String::from("name,x,y\n");
    for (n, (x, y)) in names.iter().zip(&e.coords) {
        s.push_str(&format!("{n},{x},{y}\n"));
    }
    s
}

fn mds(input: &Path, output: Option<&Path>, out: &mut dyn Write) -> Result<(), CliError> {
    let (names, m) = read_matrix(input)?;
    let e = classical_mds(&m);
    if e.degenerate {
        eprintln!("warning: fewer than two positive eigenvalues; missing axes are zero");
    }
    emit(output, &mds_csv(&names, &e), out)
}

fn simulate(peaks: usize, dir: &Path, solver: &SolverConfig, out: &mut dyn Write) -> Result<(), CliError> {
    if peaks < 2 {
        return Err(CliError::Input("the study needs at least two small peaks".into()));
    }
    let study = simulation::run(peaks, solver)?;
    let io = |e: std::io::Error| CliError::Output(format!("cannot write to {}: {e}", dir.display()));
    fs::create_dir_all(dir.join("trees")).map_err(io)?;
    let names: Vec<String> = (0..study.trees.len()).map(|i| format!("f_{i}")).collect();

    let mut functions = String::from("function,x,y\n");
    for (name, f) in names.iter().zip(&study.functions) {
        for (x, y) in f.xs().iter().zip(f.ys()) {
            functions.push_str(&format!("{name},{x},{y}\n"));
        }
    }
    fs::write(dir.join("functions.csv"), functions).map_err(io)?;
    for (name, t) in names.iter().zip(&study.trees) {
        let doc = TreeDocument::from_merge(t, Some(name.clone()));
        fs::write(dir.join("trees").join(format!("{name}.json")), doc.to_json() + "\n").map_err(io)?;
    }
    fs::write(dir.join("diagrams.json"), to_json(&study.diagrams)).map_err(io)?;
    fs::write(dir.join("matrix.csv"), matrix_csv(&names, &study.matrix)?).map_err(io)?;
    fs::write(dir.join("mds.csv"), mds_csv(&names, &study.embedding)).map_err(io)?;
    fs::write(dir.join("report.json"), to_json(&study)).map_err(io)?;

    let mut report = String::new();
    for c in &study.checks {
        report.push_str(&format!("{} {}: {}\n", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail));
    }
    emit(None, &report, out)?;
    if study.passed() {
        Ok(())
    } else {
        Err(CliError::Assertion("simulation checks failed".into()))
    }
}

fn to_json<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("plain data serialises") + "\n"
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(fmt_sig12(0.0), "0");
        assert_eq!(fmt_sig12(0.1), "0.1");
        assert_eq!(fmt_sig12(1.7272863561263188), "1.72728635613");
        assert_eq!(fmt_sig12(2.0000000000001), "2");
        assert_eq!(fmt_sig12(123456.0), "123456");
    }
}
