//! The peak-shift family: functions that share one persistence diagram but whose
//! merge trees differ in how the small minima split between the two sides of a tall peak.
//!
//! With `n` small peaks, `g_j` is a triangle of height 1 on `[j + 1/3, j + 2/3]` and
//! `G_i` a triangle of height 5 on `[i + 2/3, i + 1]`; `f_i = Σ_j g_j + G_i` on `[0, n]`
//! for `i = 0..n-1`.

use serde::Serialize;

use crate::distance::{distance_matrix, merge_tree_distance, SolverConfig};
use crate::error::DistanceError;
use crate::filtration::{merge_tree_from_pl, persistence_diagram, PersistenceDiagram, PlFunction};
use crate::mds::{classical_mds, Embedding};
use crate::tree::MergeTree;

pub const SMALL_PEAK: f64 = 1.0;
pub const BIG_PEAK: f64 = 5.0;

/// Breakpoints of `f_i` with `n` small peaks.
pub fn peak_function(n: usize, i: usize) -> PlFunction {
    assert!(i + 1 < n, "big peak index out of range");
    let (third, two_thirds) = (1.0 / 3.0, 2.0 / 3.0);
    let mut xs = vec![0.0];
    let mut ys = vec![0.0];
    for j in 0..n {
        let j = j as f64;
        xs.extend([j + third, j + 0.5, j + two_thirds]);
        ys.extend([0.0, SMALL_PEAK, 0.0]);
        if j as usize == i {
            xs.extend([j + 0.75, j + 1.0]);
            ys.extend([BIG_PEAK, 0.0]);
        }
    }
    xs.push(n as f64);
    ys.push(0.0);
    PlFunction::new(xs, ys).expect("breakpoints are increasing")
}

/// `f_0 … f_{n-2}`.
pub fn family(n: usize) -> Vec<PlFunction> {
    (0..n - 1).map(|i| peak_function(n, i)).collect()
}

/// Everything the experiment produces.
#[derive(Debug, Clone, Serialize)]
pub struct Study {
    pub peaks: usize,
    #[serde(skip)]
    pub functions: Vec<PlFunction>,
    #[serde(skip)]
    pub trees: Vec<MergeTree>,
    pub diagrams: Vec<PersistenceDiagram>,
    pub matrix: Vec<Vec<f64>>,
    pub embedding: Embedding,
    pub checks: Vec<Check>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Study {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// Builds trees, diagrams, the distance matrix and its embedding, and evaluates the
/// expected properties: equal diagrams, `n` small-peak points, a matrix that is not
/// identically zero, a symmetric matrix, mirror pairs at distance zero (and at the
/// same point of the embedding) and adjacent pairs at distance 2.
pub fn run(n: usize, cfg: &SolverConfig) -> Result<Study, DistanceError> {
    let functions = family(n);
    let trees: Vec<MergeTree> = functions.iter().map(merge_tree_from_pl).collect();
    let diagrams: Vec<PersistenceDiagram> = trees.iter().map(persistence_diagram).collect();
    let cells = distance_matrix(&trees, cfg);
    let mut matrix = Vec::with_capacity(cells.len());
    for row in cells {
        matrix.push(row.into_iter().collect::<Result<Vec<f64>, _>>()?);
    }
    let embedding = classical_mds(&matrix);
    let m = trees.len();
    let mut checks = Vec::new();

    let same = diagrams.iter().all(|d| d.approx_eq(&diagrams[0]));
    checks.push(Check { name: "diagrams identical".into(), passed: same, detail: format!("{} diagrams", m) });

    let small = diagrams[0].points.iter().filter(|p| (p.1 - SMALL_PEAK).abs() <= crate::TOL).count();
    checks.push(Check {
        name: "small-peak points".into(),
        passed: small == n,
        detail: format!("{small} points dying at {SMALL_PEAK}, expected {n}"),
    });

    let max = matrix.iter().flatten().fold(0.0f64, |a, &b| a.max(b));
    checks.push(Check { name: "matrix not zero".into(), passed: max > crate::TOL, detail: format!("max {max}") });

    let symmetric = (0..m).all(|i| (0..m).all(|j| matrix[i][j] == matrix[j][i]));
    checks.push(Check { name: "symmetric matrix".into(), passed: symmetric, detail: format!("{m}x{m}") });

    let mirror = (0..m).all(|i| matrix[i][m - 1 - i].abs() <= crate::TOL);
    checks.push(Check { name: "mirror pairs coincide".into(), passed: mirror, detail: "d(f_i, f_{n-2-i}) = 0".into() });

    let gap = (0..m)
        .map(|i| {
            let (a, b) = (embedding.coords[i], embedding.coords[m - 1 - i]);
            ((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt()
        })
        .fold(0.0f64, f64::max);
    checks.push(Check {
        name: "mirror pairs coincide in the embedding".into(),
        passed: gap <= 1e-6,
        detail: format!("largest gap {gap:.3e}"),
    });

    let adjacent: Vec<f64> = (0..m - 1).map(|i| matrix[i][i + 1]).collect();
    // the middle pair is a mirror pair
    let adj_ok = (0..m - 1).all(|i| {
        let d = adjacent[i];
        (d - 2.0).abs() <= crate::TOL || (i + 1 == m - 1 - i && d.abs() <= crate::TOL)
    });
    checks.push(Check { name: "adjacent pairs".into(), passed: adj_ok, detail: format!("{adjacent:?}") });

    Ok(Study { peaks: n, functions, trees, diagrams, matrix, embedding, checks })
}

/// Distance between two members, for callers that need a single pair.
pub fn member_distance(n: usize, i: usize, j: usize, cfg: &SolverConfig) -> Result<f64, DistanceError> {
    let a = merge_tree_from_pl(&peak_function(n, i));
    let b = merge_tree_from_pl(&peak_function(n, j));
    Ok(merge_tree_distance(&a, &b, cfg)?.value)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tree_shape() {
        let t = merge_tree_from_pl(&peak_function(11, 0));
        // 2 minima left of the big peak, 11 right of it
        assert_eq!(t.leaves().len(), 13);
        assert_eq!(t.max_height(), BIG_PEAK);
        let mut groups: Vec<usize> = t.children(t.top()).iter().map(|&c| t.children(c).len()).collect();
        groups.sort();
        assert_eq!(groups, vec![2, 11]);
        let pd = persistence_diagram(&t);
        assert_eq!(pd.points.len(), 12);
        assert_eq!(pd.points.iter().filter(|p| p.1 == BIG_PEAK).count(), 1);
    }

    #[test]
    fn full_study() {
        let s = run(11, &SolverConfig::default()).unwrap();
        assert!(s.passed(), "{:?}", s.checks);
        // the family is symmetric under reflection, so the distance only depends on
        // how far apart the two splits are, up to mirroring
        for i in 0..10 {
            for j in 0..10 {
                let expected = 2.0 * (i as f64 - j as f64).abs().min((9.0 - i as f64 - j as f64).abs());
                assert!((s.matrix[i][j] - expected).abs() < 1e-9, "({i}, {j})");
            }
        }
    }
}
