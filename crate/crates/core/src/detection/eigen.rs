//! Leading eigenpairs of symmetric operators.
//!
//! [`top_eigenpairs`] runs a thick-restart block Krylov iteration with an
//! explicit Rayleigh–Ritz step: the basis is grown a block at a time from
//! `A` applied to the most recent block, the projected matrix `V^T A V` is
//! diagonalized, and the wanted Ritz vectors (largest `|lambda|`) seed the
//! next cycle. Only matrix-vector products with the operator are needed.
//! Working with a block of `k` vectors resolves repeated eigenvalues, which a
//! single-vector Lanczos run cannot separate.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::math;
use crate::rng::{self, tag};

/// A symmetric linear operator `y = A x`.
pub trait SymmetricOperator {
    fn dim(&self) -> usize;
    fn apply(&self, x: &[f64], y: &mut [f64]);
}

/// Adjacency matrix of a graph.
pub struct AdjacencyOperator<'a>(pub &'a Graph);

impl SymmetricOperator for AdjacencyOperator<'_> {
    fn dim(&self) -> usize {
        self.0.node_count()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            *yi = self.0.neighbors(i).iter().map(|&j| x[j as usize]).sum();
        }
    }
}

/// `S A S` for a diagonal scaling `S`.
pub struct ScaledAdjacency<'a> {
    pub graph: &'a Graph,
    pub scale: Vec<f64>,
}

impl SymmetricOperator for ScaledAdjacency<'_> {
    fn dim(&self) -> usize {
        self.graph.node_count()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            let s: f64 = self.graph.neighbors(i).iter().map(|&j| self.scale[j as usize] * x[j as usize]).sum();
            *yi = self.scale[i] * s;
        }
    }
}

/// Dense symmetric matrix stored row-major.
pub struct DenseOperator<'a> {
    pub n: usize,
    pub data: &'a [f64],
}

impl SymmetricOperator for DenseOperator<'_> {
    fn dim(&self) -> usize {
        self.n
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            *yi = dot(&self.data[i * self.n..(i + 1) * self.n], x);
        }
    }
}

/// Eigenvalues ordered by decreasing `|lambda|` (ties: larger value first)
/// with matching unit eigenvectors.
#[derive(Debug, Clone)]
pub struct EigenPairs {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<f64>>,
}

const DENSE_LIMIT: usize = 64;
const MAX_RESTARTS: usize = 2000;
const RESIDUAL_TOL: f64 = 1e-10;

/// The `k` eigenpairs of largest magnitude.
///
/// Each vector is normalized and signed so that its largest-magnitude entry
/// (lowest index on ties) is positive. Residuals satisfy
/// `|A v - lambda v| <= 1e-10 * |lambda_max|` on return.
pub fn top_eigenpairs<A: SymmetricOperator + ?Sized>(op: &A, k: usize, seed: u64) -> Result<EigenPairs> {
    let n = op.dim();
    if k > n {
        return Err(Error::TooManyClusters { k, n });
    }
    if k == 0 {
        return Ok(EigenPairs { values: Vec::new(), vectors: Vec::new() });
    }
    let mut pairs = if n <= DENSE_LIMIT { dense_path(op, k) } else { block_krylov(op, k, seed)? };
    for v in &mut pairs.vectors {
        fix_sign(v);
    }
    Ok(pairs)
}

fn dense_path<A: SymmetricOperator + ?Sized>(op: &A, k: usize) -> EigenPairs {
    let n = op.dim();
    let mut a = vec![0.0; n * n];
    let mut e = vec![0.0; n];
    let mut col = vec![0.0; n];
    for j in 0..n {
        e[j] = 1.0;
        op.apply(&e, &mut col);
        e[j] = 0.0;
        for i in 0..n {
            a[i * n + j] = col[i];
        }
    }
    symmetrize(&mut a, n);
    let (values, vecs) = jacobi_eigen(&a, n);
    let order = magnitude_order(&values);
    EigenPairs {
        values: order[..k].iter().map(|&i| values[i]).collect(),
        vectors: order[..k].iter().map(|&i| (0..n).map(|r| vecs[r * n + i]).collect()).collect(),
    }
}

fn block_krylov<A: SymmetricOperator + ?Sized>(op: &A, k: usize, seed: u64) -> Result<EigenPairs> {
    let n = op.dim();
    let block = k;
    let max_basis = n.min((3 * k).max(k + 24));
    let mut rng = rng::stream(seed, &[tag::EIGEN]);

    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(max_basis);
    let mut images: Vec<Vec<f64>> = Vec::with_capacity(max_basis);
    // Columns whose images seed the next expansion.
    let mut frontier: Vec<usize> = Vec::new();
    let mut proj: Vec<f64> = Vec::new();

    let mut seeds: Vec<Vec<f64>> = (0..block).map(|_| random_vector(n, &mut rng)).collect();
    let mut scratch = vec![0.0; n];

    for _restart in 0..MAX_RESTARTS {
        // Grow the basis.
        while basis.len() < max_basis {
            let mut fresh: Vec<Vec<f64>> = if seeds.is_empty() {
                frontier.iter().map(|&c| images[c].clone()).collect()
            } else {
                core::mem::take(&mut seeds)
            };
            let mut added = Vec::new();
            for w in fresh.iter_mut() {
                if basis.len() + added.len() >= max_basis {
                    break;
                }
                if orthonormalize(w, &basis, &added) {
                    added.push(core::mem::take(w));
                }
            }
            if added.is_empty() {
                // Invariant subspace: continue from random directions.
                let mut tries = 0;
                while added.is_empty() && tries < 8 {
                    let mut w = random_vector(n, &mut rng);
                    if orthonormalize(&mut w, &basis, &[]) {
                        added.push(w);
                    }
                    tries += 1;
                }
                if added.is_empty() {
                    break;
                }
            }
            let start = basis.len();
            for v in added {
                op.apply(&v, &mut scratch);
                basis.push(v);
                images.push(scratch.clone());
            }
            frontier = (start..basis.len()).collect();
            extend_projection(&mut proj, &basis, &images, start);
        }

        // Rayleigh–Ritz.
        let m = basis.len();
        let mut h = proj_square(&proj, m);
        symmetrize(&mut h, m);
        let (theta, s) = jacobi_eigen(&h, m);
        let order = magnitude_order(&theta);
        let keep = m.min(k + block).min(max_basis.saturating_sub(block).max(k));
        let mut ritz = Vec::with_capacity(keep);
        let mut ritz_images = Vec::with_capacity(keep);
        for &c in &order[..keep] {
            ritz.push(combine(&basis, &s, m, c));
            ritz_images.push(combine(&images, &s, m, c));
        }
        let scale = theta.iter().fold(0.0f64, |a, t| a.max(t.abs()));
        let tol = RESIDUAL_TOL * scale.max(f64::MIN_POSITIVE);
        let residual = |i: usize| {
            let lam = theta[order[i]];
            let r: f64 = ritz_images[i].iter().zip(&ritz[i]).map(|(a, v)| (a - lam * v) * (a - lam * v)).sum();
            math::sqrt(r)
        };
        // Ritz values underestimate the outermost eigenvalues, so a guard
        // pair beyond the wanted ones must either be converged or be too
        // small, residual included, to overtake the k-th value.
        let kth = theta[order[k - 1]].abs();
        let converged = (0..k).all(|i| residual(i) <= tol)
            && (k..keep).all(|i| {
                let r = residual(i);
                r <= tol || theta[order[i]].abs() + r < kth
            });
        if converged || m == n {
            return Ok(EigenPairs {
                values: order[..k].iter().map(|&c| theta[c]).collect(),
                vectors: ritz.into_iter().take(k).collect(),
            });
        }
        // Thick restart: keep the leading Ritz vectors and expand from the
        // residual directions of the wanted ones.
        basis = ritz;
        images = ritz_images;
        let mut fresh_proj = vec![0.0; keep * keep];
        for (i, &c) in order[..keep].iter().enumerate() {
            fresh_proj[i * keep + i] = theta[c];
        }
        proj = fresh_proj;
        frontier = (0..block.min(keep)).collect();
    }
    Err(Error::NoConvergence(MAX_RESTARTS))
}

// `proj` holds V^T A V row-major for the current basis size; append the
// columns/rows for basis vectors `start..`.
fn extend_projection(proj: &mut Vec<f64>, basis: &[Vec<f64>], images: &[Vec<f64>], start: usize) {
    let m = basis.len();
    let mut out = vec![0.0; m * m];
    for i in 0..start {
        for j in 0..start {
            out[i * m + j] = proj[i * start + j];
        }
    }
    for j in start..m {
        for i in 0..m {
            let v = dot(&basis[i], &images[j]);
            out[i * m + j] = v;
            out[j * m + i] = v;
        }
    }
    *proj = out;
}

fn proj_square(proj: &[f64], m: usize) -> Vec<f64> {
    debug_assert_eq!(proj.len(), m * m);
    proj.to_vec()
}

fn combine(cols: &[Vec<f64>], s: &[f64], m: usize, c: usize) -> Vec<f64> {
    let n = cols[0].len();
    let mut out = vec![0.0; n];
    for (r, col) in cols.iter().enumerate() {
        let w = s[r * m + c];
        if w != 0.0 {
            for (o, x) in out.iter_mut().zip(col) {
                *o += w * x;
            }
        }
    }
    out
}

/// Orthogonalizes `w` against `basis` and `extra` (two Gram–Schmidt passes)
/// and normalizes it. Returns false when nothing independent is left.
fn orthonormalize(w: &mut [f64], basis: &[Vec<f64>], extra: &[Vec<f64>]) -> bool {
    let before = norm(w);
    if before == 0.0 || !before.is_finite() {
        return false;
    }
    for _ in 0..2 {
        for v in basis.iter().chain(extra) {
            let c = dot(v, w);
            for (x, y) in w.iter_mut().zip(v) {
                *x -= c * y;
            }
        }
    }
    let after = norm(w);
    if after <= 1e-10 * before {
        return false;
    }
    w.iter_mut().for_each(|x| *x /= after);
    true
}

fn random_vector<R: Rng>(n: usize, rng: &mut R) -> Vec<f64> {
    (0..n).map(|_| rng.random::<f64>() - 0.5).collect()
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub(crate) fn norm(a: &[f64]) -> f64 {
    math::sqrt(dot(a, a))
}

fn symmetrize(a: &mut [f64], n: usize) {
    for i in 0..n {
        for j in 0..i {
            let v = 0.5 * (a[i * n + j] + a[j * n + i]);
            a[i * n + j] = v;
            a[j * n + i] = v;
        }
    }
}

/// Indices sorted by decreasing `|value|`, ties by decreasing value.
fn magnitude_order(values: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| {
        let (x, y) = (values[a], values[b]);
        y.abs().total_cmp(&x.abs()).then(y.total_cmp(&x)).then(a.cmp(&b))
    });
    idx
}

fn fix_sign(v: &mut [f64]) {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if x.abs() > v[best].abs() + 1e-12 {
            best = i;
        }
    }
    if v.get(best).is_some_and(|&x| x < 0.0) {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

/// Full eigendecomposition of a dense symmetric matrix by cyclic Jacobi
/// rotations. Returns eigenvalues and the eigenvector matrix (columns,
/// row-major), both unsorted.
pub fn jacobi_eigen(a: &[f64], n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut a = a.to_vec();
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    let total: f64 = a.iter().map(|x| x * x).sum();
    for _sweep in 0..100 {
        let mut off = 0.0;
        for i in 0..n {
            for j in 0..i {
                off += a[i * n + j] * a[i * n + j];
            }
        }
        if off <= 1e-30 * total.max(f64::MIN_POSITIVE) || off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let (app, aqq) = (a[p * n + p], a[q * n + q]);
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + math::sqrt(theta * theta + 1.0));
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / math::sqrt(t * t + 1.0);
                let s = t * c;
                for r in 0..n {
                    let (arp, arq) = (a[r * n + p], a[r * n + q]);
                    a[r * n + p] = c * arp - s * arq;
                    a[r * n + q] = s * arp + c * arq;
                }
                for r in 0..n {
                    let (apr, aqr) = (a[p * n + r], a[q * n + r]);
                    a[p * n + r] = c * apr - s * aqr;
                    a[q * n + r] = s * apr + c * aqr;
                }
                for r in 0..n {
                    let (vrp, vrq) = (v[r * n + p], v[r * n + q]);
                    v[r * n + p] = c * vrp - s * vrq;
                    v[r * n + q] = s * vrp + c * vrq;
                }
            }
        }
    }
    ((0..n).map(|i| a[i * n + i]).collect(), v)
}
