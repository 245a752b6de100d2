use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::error::{Error, Result};
use crate::rng::{self, tag};

/// Result of [`kmeans`].
#[derive(Debug, Clone, PartialEq)]
pub struct KMeans {
    /// Cluster of every point, numbered by first appearance.
    pub labels: Vec<u32>,
    /// `k` centers, row-major `k x d`, in label order.
    pub centers: Vec<f64>,
    /// Sum of squared distances to the assigned centers.
    pub inertia: f64,
}

/// Lloyd's algorithm with k-means++ seeding, keeping the best of `restarts`
/// runs. `points` is row-major `n x d`.
///
/// Clusters that empty out during the iteration are reseeded with the point
/// farthest from its center. The result depends only on the inputs and
/// `seed`.
pub fn kmeans(points: &[f64], d: usize, k: usize, restarts: usize, max_iter: usize, seed: u64) -> Result<KMeans> {
    if d == 0 || !points.len().is_multiple_of(d) {
        return Err(Error::InvalidParameter("point dimension does not divide the data".into()));
    }
    let n = points.len() / d;
    if k == 0 {
        return Err(Error::InvalidParameter("k must be at least 1".into()));
    }
    if k > n {
        return Err(Error::TooManyClusters { k, n });
    }
    let mut best: Option<KMeans> = None;
    for r in 0..restarts.max(1) {
        let mut rng = rng::stream(seed, &[tag::KMEANS, r as u64]);
        let run = lloyd(points, n, d, k, max_iter, &mut rng);
        if best.as_ref().is_none_or(|b| run.inertia < b.inertia) {
            best = Some(run);
        }
    }
    Ok(canonical(best.expect("at least one restart"), d, k))
}

fn lloyd<R: Rng>(points: &[f64], n: usize, d: usize, k: usize, max_iter: usize, rng: &mut R) -> KMeans {
    let point = |i: usize| &points[i * d..(i + 1) * d];
    let mut centers = seed_centers(points, n, d, k, rng);
    let mut labels = vec![u32::MAX; n];
    let mut dist = vec![0.0; n];
    for _ in 0..max_iter.max(1) {
        let mut changed = false;
        for i in 0..n {
            let (c, dd) = nearest(point(i), &centers, d);
            dist[i] = dd;
            if labels[i] != c as u32 {
                labels[i] = c as u32;
                changed = true;
            }
        }
        if !changed {
            break;
        }
        update_centers(points, d, k, &mut labels, &mut dist, &mut centers);
    }
    let inertia = (0..n).map(|i| sq_dist(point(i), &centers[labels[i] as usize * d..][..d])).sum();
    KMeans { labels, centers, inertia }
}

fn seed_centers<R: Rng>(points: &[f64], n: usize, d: usize, k: usize, rng: &mut R) -> Vec<f64> {
    let point = |i: usize| &points[i * d..(i + 1) * d];
    let mut centers = Vec::with_capacity(k * d);
    centers.extend_from_slice(point(rng.random_range(0..n)));
    let mut d2: Vec<f64> = (0..n).map(|i| sq_dist(point(i), &centers[..d])).collect();
    for _ in 1..k {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let target = rng.random::<f64>() * total;
            let mut acc = 0.0;
            let mut pick = n - 1;
            for (i, &w) in d2.iter().enumerate() {
                acc += w;
                if acc > target && w > 0.0 {
                    pick = i;
                    break;
                }
            }
            pick
        } else {
            rng.random_range(0..n)
        };
        let start = centers.len();
        centers.extend_from_slice(point(pick));
        for i in 0..n {
            let dd = sq_dist(point(i), &centers[start..start + d]);
            if dd < d2[i] {
                d2[i] = dd;
            }
        }
    }
    centers
}

fn update_centers(points: &[f64], d: usize, k: usize, labels: &mut [u32], dist: &mut [f64], centers: &mut [f64]) {
    let n = labels.len();
    let mut counts = vec![0usize; k];
    centers.iter_mut().for_each(|c| *c = 0.0);
    for i in 0..n {
        let c = labels[i] as usize;
        counts[c] += 1;
        for (acc, x) in centers[c * d..(c + 1) * d].iter_mut().zip(&points[i * d..(i + 1) * d]) {
            *acc += x;
        }
    }
    for c in 0..k {
        if counts[c] > 0 {
            let inv = 1.0 / counts[c] as f64;
            centers[c * d..(c + 1) * d].iter_mut().for_each(|x| *x *= inv);
        }
    }
    for c in 0..k {
        if counts[c] != 0 {
            continue;
        }
        // Reseed with the worst-served point whose cluster can spare it.
        let mut far = None;
        for i in 0..n {
            if counts[labels[i] as usize] > 1 && far.is_none_or(|f: usize| dist[i] > dist[f]) {
                far = Some(i);
            }
        }
        let Some(i) = far else { continue };
        counts[labels[i] as usize] -= 1;
        counts[c] = 1;
        labels[i] = c as u32;
        dist[i] = 0.0;
        centers[c * d..(c + 1) * d].copy_from_slice(&points[i * d..(i + 1) * d]);
    }
}

#[inline]
fn nearest(p: &[f64], centers: &[f64], d: usize) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (c, center) in centers.chunks_exact(d).enumerate() {
        let dd = sq_dist(p, center);
        if dd < best.1 {
            best = (c, dd);
        }
    }
    best
}

#[inline]
fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

// Renumber clusters by first appearance so equal partitions get equal labels.
fn canonical(run: KMeans, d: usize, k: usize) -> KMeans {
    let mut map = vec![u32::MAX; k];
    let mut next = 0;
    for &l in &run.labels {
        if map[l as usize] == u32::MAX {
            map[l as usize] = next;
            next += 1;
        }
    }
    for m in map.iter_mut().filter(|m| **m == u32::MAX) {
        *m = next;
        next += 1;
    }
    let mut centers = vec![0.0; k * d];
    for (old, &new) in map.iter().enumerate() {
        centers[new as usize * d..(new as usize + 1) * d].copy_from_slice(&run.centers[old * d..(old + 1) * d]);
    }
    KMeans { labels: run.labels.iter().map(|&l| map[l as usize]).collect(), centers, inertia: run.inertia }
}
