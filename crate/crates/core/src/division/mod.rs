//! Group division: Erdős–Rényi and degree-corrected modularity, greedy
//! agglomeration into a dendrogram, and choosing where to cut it.
//!
//! Modularity values are normalized by the total degree `L`, so
//! `q_ER(e) = sum_t (O_tt / L - f_t^2)` and
//! `q_DC(e) = sum_t (O_tt / L - (O_t / L)^2)`, both at most 1.

mod dendrogram;
mod fast_greedy;

pub use dendrogram::{select_group_count, Dendrogram, GroupMode, Merge};
pub use fast_greedy::fast_greedy;

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::graph::{Graph, Labeling};

/// Null model used by the modularity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum ModularityKind {
    /// Erdős–Rényi null: expected fraction `f_t^2` per group.
    Er,
    /// Degree-corrected null: expected fraction `(O_t / L)^2` per group.
    Dc,
}

/// Ordered-pair edge counts between the labels of a partition.
#[derive(Debug, Clone, PartialEq)]
pub struct PartitionStats {
    groups: usize,
    /// `O_ts`: number of ordered pairs `(i, j)` with `A_ij = 1`, `e_i = t`, `e_j = s`.
    counts: Vec<u64>,
    sizes: Vec<u64>,
    n: usize,
    total_degree: u64,
}

impl PartitionStats {
    pub fn group_count(&self) -> usize {
        self.groups
    }

    #[inline]
    pub fn count(&self, t: usize, s: usize) -> u64 {
        self.counts[t * self.groups + s]
    }

    /// `O_t = sum_s O_ts`, the total degree of group `t`.
    pub fn row_sum(&self, t: usize) -> u64 {
        (0..self.groups).map(|s| self.count(t, s)).sum()
    }

    pub fn row_sums(&self) -> Vec<u64> {
        (0..self.groups).map(|t| self.row_sum(t)).collect()
    }

    pub fn size(&self, t: usize) -> u64 {
        self.sizes[t]
    }

    /// `f_t = n_t / n`.
    pub fn frequencies(&self) -> Vec<f64> {
        self.sizes.iter().map(|&s| s as f64 / self.n as f64).collect()
    }

    pub fn total_degree(&self) -> u64 {
        self.total_degree
    }

    pub fn node_count(&self) -> usize {
        self.n
    }
}

/// Tabulates `O(e)`, group sizes and `L` for a labeling.
pub fn partition_stats(g: &Graph, e: &Labeling) -> Result<PartitionStats> {
    if e.len() != g.node_count() {
        return Err(Error::LengthMismatch { left: e.len(), right: g.node_count() });
    }
    let k = e.count();
    let mut counts = vec![0u64; k * k];
    let mut sizes = vec![0u64; k];
    for i in 0..g.node_count() {
        let t = e.get(i);
        sizes[t] += 1;
        for &j in g.neighbors(i) {
            counts[t * k + e.get(j as usize)] += 1;
        }
    }
    Ok(PartitionStats { groups: k, counts, sizes, n: g.node_count(), total_degree: g.total_degree() as u64 })
}

/// Normalized Erdős–Rényi modularity of `e`.
///
/// Evaluated as the exact integer `n^2 sum_t O_tt - L sum_t n_t^2` over
/// `L n^2`, so the only rounding happens in the final division.
pub fn modularity_er(g: &Graph, e: &Labeling) -> Result<f64> {
    modularity(g, e, ModularityKind::Er)
}

/// Normalized degree-corrected modularity of `e`, evaluated as
/// `(L sum_t O_tt - sum_t O_t^2) / L^2` in exact integers.
pub fn modularity_dc(g: &Graph, e: &Labeling) -> Result<f64> {
    modularity(g, e, ModularityKind::Dc)
}

pub fn modularity(g: &Graph, e: &Labeling, kind: ModularityKind) -> Result<f64> {
    let stats = partition_stats(g, e)?;
    modularity_from_stats(&stats, kind)
}

pub fn modularity_from_stats(stats: &PartitionStats, kind: ModularityKind) -> Result<f64> {
    let l = stats.total_degree as i128;
    if l == 0 {
        return Err(Error::NoEdges);
    }
    let inside: i128 = (0..stats.groups).map(|t| stats.count(t, t) as i128).sum();
    let (num, den) = match kind {
        ModularityKind::Er => {
            let n = stats.n as i128;
            let sq: i128 = stats.sizes.iter().map(|&s| (s as i128) * (s as i128)).sum();
            (n * n * inside - l * sq, l * n * n)
        }
        ModularityKind::Dc => {
            let sq: i128 = stats.row_sums().iter().map(|&o| (o as i128) * (o as i128)).sum();
            (l * inside - sq, l * l)
        }
    };
    Ok(ratio(num, den))
}

// i128 -> f64 through an exact reduction when possible so small cases are
// correctly rounded.
fn ratio(num: i128, den: i128) -> f64 {
    let g = gcd(num.unsigned_abs(), den.unsigned_abs()) as i128;
    let (num, den) = if g > 1 { (num / g, den / g) } else { (num, den) };
    num as f64 / den as f64
}

fn gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}
