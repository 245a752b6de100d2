//! Sparse undirected simple graphs and node labelings.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Immutable undirected simple graph in compressed neighbor-list form.
///
/// Both directions of every edge are stored and each neighbor list is sorted,
/// so `neighbors(i)` contains `j` exactly when `neighbors(j)` contains `i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    offsets: Vec<usize>,
    targets: Vec<u32>,
}

impl Graph {
    /// Builds a graph on `n` nodes from an edge list.
    ///
    /// Pairs may be given in either orientation and may repeat; the result
    /// holds each undirected edge once. Self-loops and ids `>= n` are rejected.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        if n > u32::MAX as usize {
            return Err(Error::InvalidParameter(alloc::format!("{n} nodes exceeds u32 ids")));
        }
        let mut degree = vec![0usize; n + 1];
        for &(i, j) in edges {
            if i >= n {
                return Err(Error::NodeOutOfRange { id: i, n });
            }
            if j >= n {
                return Err(Error::NodeOutOfRange { id: j, n });
            }
            if i == j {
                return Err(Error::SelfLoop(i));
            }
            degree[i] += 1;
            degree[j] += 1;
        }
        let mut offsets = vec![0usize; n + 1];
        for i in 0..n {
            offsets[i + 1] = offsets[i] + degree[i];
        }
        let mut fill = offsets.clone();
        let mut targets = vec![0u32; offsets[n]];
        for &(i, j) in edges {
            targets[fill[i]] = j as u32;
            fill[i] += 1;
            targets[fill[j]] = i as u32;
            fill[j] += 1;
        }
        // Sort and deduplicate each row, compacting in place.
        let mut write = 0usize;
        let mut new_offsets = vec![0usize; n + 1];
        for i in 0..n {
            let (start, end) = (offsets[i], offsets[i + 1]);
            targets[start..end].sort_unstable();
            let mut last = None;
            for k in start..end {
                let t = targets[k];
                if last != Some(t) {
                    targets[write] = t;
                    write += 1;
                    last = Some(t);
                }
            }
            new_offsets[i + 1] = write;
        }
        targets.truncate(write);
        targets.shrink_to_fit();
        Ok(Graph { offsets: new_offsets, targets })
    }

    /// Graph with `n` nodes and no edges.
    pub fn empty(n: usize) -> Self {
        Graph { offsets: vec![0; n + 1], targets: Vec::new() }
    }

    #[inline]
    pub fn node_count(&self) -> usize {
        self.offsets.len() - 1
    }

    /// Number of undirected edges.
    #[inline]
    pub fn edge_count(&self) -> usize {
        self.targets.len() / 2
    }

    /// Total degree `L = sum_ij A_ij`; every edge counts twice.
    #[inline]
    pub fn total_degree(&self) -> usize {
        self.targets.len()
    }

    #[inline]
    pub fn degree(&self, i: usize) -> usize {
        self.offsets[i + 1] - self.offsets[i]
    }

    pub fn degrees(&self) -> Vec<usize> {
        (0..self.node_count()).map(|i| self.degree(i)).collect()
    }

    #[inline]
    pub fn neighbors(&self, i: usize) -> &[u32] {
        &self.targets[self.offsets[i]..self.offsets[i + 1]]
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        i < self.node_count() && j < self.node_count() && self.neighbors(i).binary_search(&(j as u32)).is_ok()
    }

    /// Undirected edges as `(i, j)` with `i < j`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.node_count()).flat_map(move |i| {
            self.neighbors(i).iter().map(|&j| j as usize).filter(move |&j| j > i).map(move |j| (i, j))
        })
    }

    /// Graph induced by `nodes`, relabeled `0..nodes.len()` in the given order.
    ///
    /// Returns the subgraph together with the map from new to original ids.
    pub fn induced_subgraph(&self, nodes: &[usize]) -> Result<(Graph, Vec<usize>)> {
        if nodes.is_empty() {
            return Err(Error::EmptySubset);
        }
        let n = self.node_count();
        let mut local = vec![u32::MAX; n];
        for (k, &v) in nodes.iter().enumerate() {
            if v >= n {
                return Err(Error::NodeOutOfRange { id: v, n });
            }
            if local[v] != u32::MAX {
                return Err(Error::DuplicateNode(v));
            }
            local[v] = k as u32;
        }
        let mut offsets = Vec::with_capacity(nodes.len() + 1);
        offsets.push(0);
        let mut targets = Vec::new();
        for &v in nodes {
            let start = targets.len();
            targets.extend(self.neighbors(v).iter().map(|&u| local[u as usize]).filter(|&u| u != u32::MAX));
            targets[start..].sort_unstable();
            offsets.push(targets.len());
        }
        Ok((Graph { offsets, targets }, nodes.to_vec()))
    }

    /// Copy of the graph with the given unordered pairs removed.
    pub fn without_pairs(&self, pairs: &[(u32, u32)]) -> Graph {
        let mut removed: Vec<(u32, u32)> = pairs.iter().flat_map(|&(a, b)| [(a, b), (b, a)]).collect();
        removed.sort_unstable();
        let mut offsets = Vec::with_capacity(self.offsets.len());
        offsets.push(0);
        let mut targets = Vec::with_capacity(self.targets.len());
        for i in 0..self.node_count() {
            for &j in self.neighbors(i) {
                if removed.binary_search(&(i as u32, j)).is_err() {
                    targets.push(j);
                }
            }
            offsets.push(targets.len());
        }
        Graph { offsets, targets }
    }
}

/// Assignment of every node to one of `count` labels `0..count`.
///
/// Labels are zero-based in memory; file formats present them one-based.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Labeling {
    labels: Vec<u32>,
    count: usize,
}

impl Labeling {
    /// Labeling with an explicit label count; every label must be `< count`.
    pub fn new(labels: Vec<u32>, count: usize) -> Result<Self> {
        if let Some(&bad) = labels.iter().find(|&&l| l as usize >= count) {
            return Err(Error::LabelOutOfRange { label: bad as usize, count });
        }
        Ok(Labeling { labels, count })
    }

    /// Every node carries label 0.
    pub fn constant(n: usize) -> Self {
        Labeling { labels: vec![0; n], count: usize::from(n > 0) }
    }

    /// Compacts arbitrary label values into `0..M`, numbered by first appearance.
    pub fn from_raw<T: Copy + Ord>(raw: &[T]) -> Self {
        let mut seen: alloc::collections::BTreeMap<T, u32> = alloc::collections::BTreeMap::new();
        let labels = raw
            .iter()
            .map(|&r| {
                let next = seen.len() as u32;
                *seen.entry(r).or_insert(next)
            })
            .collect();
        Labeling { labels, count: seen.len() }
    }

    /// Same partition with unused labels dropped, numbered by first appearance.
    pub fn compact(&self) -> Self {
        Labeling::from_raw(&self.labels)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Number of labels `M` (some may be unused before compaction).
    #[inline]
    pub fn count(&self) -> usize {
        self.count
    }

    #[inline]
    pub fn get(&self, i: usize) -> usize {
        self.labels[i] as usize
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.labels
    }

    /// Number of nodes per label.
    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0usize; self.count];
        for &l in &self.labels {
            sizes[l as usize] += 1;
        }
        sizes
    }

    /// Node lists per label, each in ascending node order.
    pub fn members(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.count];
        for (i, &l) in self.labels.iter().enumerate() {
            out[l as usize].push(i);
        }
        out
    }

    /// Number of labels actually used.
    pub fn used_count(&self) -> usize {
        self.sizes().iter().filter(|&&s| s > 0).count()
    }

    /// True when both labelings induce the same partition.
    pub fn same_partition(&self, other: &Labeling) -> bool {
        self.len() == other.len() && self.compact().labels == other.compact().labels
    }
}
