//! Classical multidimensional scaling into the plane.

use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Embedding {
    /// One `(x, y)` per input point.
    pub coords: Vec<(f64, f64)>,
    /// The two leading eigenvalues of the doubly-centred Gram matrix.
    pub eigenvalues: (f64, f64),
    /// Fewer than two positive eigenvalues were found; missing axes are zero.
    pub degenerate: bool,
}

/// Double centring of the squared distances, cyclic Jacobi eigendecomposition, and the
/// two leading non-negative eigenpairs scaled by `√λ`. Each axis is oriented so its
/// first non-zero coordinate is positive.
pub fn classical_mds(d: &[Vec<f64>]) -> Embedding {
    let n = d.len();
    if n == 0 {
        return Embedding { coords: vec![], eigenvalues: (0.0, 0.0), degenerate: true };
    }
    let sq: Vec<Vec<f64>> = d.iter().map(|r| r.iter().map(|x| x * x).collect()).collect();
    let row: Vec<f64> = sq.iter().map(|r| r.iter().sum::<f64>() / n as f64).collect();
    let all = row.iter().sum::<f64>() / n as f64;
    let mut b: Vec<Vec<f64>> =
        (0..n).map(|i| (0..n).map(|j| -0.5 * (sq[i][j] - row[i] - row[j] + all)).collect()).collect();
    let (vals, vecs) = jacobi(&mut b, 1e-12);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &c| vals[c].total_cmp(&vals[a]));
    let mut axes = [vec![0.0; n], vec![0.0; n]];
    let mut lambdas = [0.0; 2];
    let mut positive = 0;
    for (k, &idx) in order.iter().take(2).enumerate() {
        if vals[idx] <= 1e-12 {
            continue;
        }
        positive += 1;
        lambdas[k] = vals[idx];
        let s = vals[idx].sqrt();
        let mut axis: Vec<f64> = (0..n).map(|i| vecs[i][idx] * s).collect();
        if let Some(first) = axis.iter().find(|x| x.abs() > 1e-12) {
            if *first < 0.0 {
                axis.iter_mut().for_each(|x| *x = -*x);
            }
        }
        axes[k] = axis;
    }
    Embedding {
        coords: (0..n).map(|i| (axes[0][i], axes[1][i])).collect(),
        eigenvalues: (lambdas[0], lambdas[1]),
        degenerate: positive < 2,
    }
}

/// Eigenvalues and column eigenvectors of a symmetric matrix (destroyed in place).
fn jacobi(a: &mut [Vec<f64>], tol: f64) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = a.len();
    let mut v: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| f64::from(u8::from(i == j))).collect()).collect();
    for _sweep in 0..100 {
        let off: f64 = (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))).map(|(i, j)| a[i][j] * a[i][j]).sum();
        if off.sqrt() <= tol {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q].abs() <= f64::MIN_POSITIVE {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for row in v.iter_mut() {
                    let (vp, vq) = (row[p], row[q]);
                    row[p] = c * vp - s * vq;
                    row[q] = s * vp + c * vq;
                }
            }
        }
    }
    ((0..n).map(|i| a[i][i]).collect(), v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_planar_distances() {
        let pts = [(0.0, 0.0), (3.0, 0.0), (0.0, 4.0), (3.0, 4.0), (1.0, 1.0)];
        let d: Vec<Vec<f64>> = pts
            .iter()
            .map(|a| pts.iter().map(|b: &(f64, f64)| ((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt()).collect())
            .collect();
        let e = classical_mds(&d);
        assert!(!e.degenerate);
        for i in 0..5 {
            for j in 0..5 {
                let (a, b) = (e.coords[i], e.coords[j]);
                let dij = ((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt();
                assert!((dij - d[i][j]).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn zero_matrix_is_degenerate() {
        let e = classical_mds(&vec![vec![0.0; 3]; 3]);
        assert!(e.degenerate);
        assert!(e.coords.iter().all(|&(x, y)| x == 0.0 && y == 0.0));
    }
}
