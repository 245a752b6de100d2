//! The Krylov eigensolver against nalgebra's dense symmetric decomposition.

use dcd_core::detection::eigen::{AdjacencyOperator, DenseOperator, SymmetricOperator};
use dcd_core::detection::top_eigenpairs;
use dcd_core::Graph;
use nalgebra::{DMatrix, SymmetricEigen};
use proptest::prelude::*;

/// Reference eigenpairs sorted by decreasing `|lambda|`.
fn reference(dense: &[f64], n: usize) -> Vec<(f64, Vec<f64>)> {
    let eig = SymmetricEigen::new(DMatrix::from_row_slice(n, n, dense));
    let mut pairs: Vec<(f64, Vec<f64>)> =
        (0..n).map(|c| (eig.eigenvalues[c], eig.eigenvectors.column(c).iter().copied().collect())).collect();
    pairs.sort_by(|a, b| b.0.abs().total_cmp(&a.0.abs()).then(b.0.total_cmp(&a.0)));
    pairs
}

fn dense_of(g: &Graph) -> Vec<f64> {
    let n = g.node_count();
    let mut a = vec![0.0; n * n];
    for (i, j) in g.edges() {
        a[i * n + j] = 1.0;
        a[j * n + i] = 1.0;
    }
    a
}

fn check<A: SymmetricOperator>(op: &A, dense: &[f64], k: usize, seed: u64) -> Result<(), TestCaseError> {
    let n = op.dim();
    let got = top_eigenpairs(op, k, seed).unwrap();
    let want = reference(dense, n);
    let scale = want[0].0.abs().max(1e-300);
    for c in 0..k {
        let (lambda, v) = (got.values[c], &got.vectors[c]);
        prop_assert!((lambda - want[c].0).abs() <= 1e-8 * scale, "value {}: {} vs {}", c, lambda, want[c].0);
        // Residual and normalization.
        let mut av = vec![0.0; n];
        op.apply(v, &mut av);
        let residual = av.iter().zip(v).map(|(x, y)| (x - lambda * y).powi(2)).sum::<f64>().sqrt();
        prop_assert!(residual <= 1e-8 * scale, "residual {} of pair {}", residual, c);
        for (d, w) in got.vectors.iter().enumerate() {
            let dot: f64 = v.iter().zip(w).map(|(x, y)| x * y).sum();
            let expected = if d == c { 1.0 } else { 0.0 };
            prop_assert!((dot - expected).abs() <= 1e-8, "<v{}, v{}> = {}", c, d, dot);
        }
        // Sign convention: the largest-magnitude entry is positive.
        let top = v.iter().copied().fold(0.0f64, |m, x| if x.abs() > m.abs() { x } else { m });
        prop_assert!(top > 0.0);
        // Isolated eigenvalues pin the vector down up to sign.
        let gap = want
            .iter()
            .enumerate()
            .filter(|&(d, _)| d != c)
            .map(|(_, p)| (p.0 - want[c].0).abs())
            .fold(f64::INFINITY, f64::min);
        if gap > 1e-3 * scale {
            let dot: f64 = v.iter().zip(&want[c].1).map(|(x, y)| x * y).sum();
            prop_assert!(dot.abs() >= 1.0 - 1e-6, "vector {} overlap {}", c, dot);
        }
    }
    Ok(())
}

fn random_graph(n: usize, p: f64, seed: u64) -> Graph {
    let mut state = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            if ((state >> 11) as f64 / (1u64 << 53) as f64) < p {
                edges.push((i, j));
            }
        }
    }
    Graph::from_edges(n, &edges).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn dense_matrices(n in 1usize..40, entries in proptest::collection::vec(-1.0f64..1.0, 1600), k in 1usize..6, seed in any::<u64>()) {
        let k = k.min(n);
        let mut a = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..=i {
                a[i * n + j] = entries[i * 40 + j];
                a[j * n + i] = entries[i * 40 + j];
            }
        }
        check(&DenseOperator { n, data: &a }, &a, k, seed)?;
    }

    #[test]
    fn sparse_adjacency_beyond_dense_limit(n in 65usize..180, p in 0.03f64..0.3, k in 1usize..8, seed in any::<u64>()) {
        let g = random_graph(n, p, seed);
        check(&AdjacencyOperator(&g), &dense_of(&g), k, seed)?;
    }

    #[test]
    fn planted_blocks_beyond_dense_limit(blocks in 2usize..6, size in 20usize..50, seed in any::<u64>()) {
        // Dense blocks with sparse noise give a clear top-`blocks` spectrum.
        let n = blocks * size;
        let noise = random_graph(n, 0.02, seed);
        let mut edges: Vec<(usize, usize)> = noise.edges().collect();
        for b in 0..blocks {
            for i in 0..size {
                for j in i + 1..size {
                    if (i * 7 + j * 3 + b) % 3 != 0 {
                        edges.push((b * size + i, b * size + j));
                    }
                }
            }
        }
        let g = Graph::from_edges(n, &edges).unwrap();
        check(&AdjacencyOperator(&g), &dense_of(&g), blocks, seed)?;
    }
}

#[test]
fn documented_small_cases() {
    let id = [1.0, 0.0, 0.0, 1.0];
    assert_eq!(top_eigenpairs(&DenseOperator { n: 2, data: &id }, 2, 0).unwrap().values, vec![1.0, 1.0]);
    let diag = [3.0, 0.0, 0.0, 1.0];
    let e = top_eigenpairs(&DenseOperator { n: 2, data: &diag }, 1, 0).unwrap();
    assert_eq!(e.values, vec![3.0]);
    assert!((e.vectors[0][0] - 1.0).abs() < 1e-12 && e.vectors[0][1].abs() < 1e-12);
    let k3 = Graph::from_edges(3, &[(0, 1), (1, 2), (0, 2)]).unwrap();
    let e = top_eigenpairs(&AdjacencyOperator(&k3), 2, 0).unwrap();
    assert!((e.values[0] - 2.0).abs() < 1e-12 && (e.values[1] + 1.0).abs() < 1e-12);
}
