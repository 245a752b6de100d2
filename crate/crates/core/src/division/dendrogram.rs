use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write;

use super::ModularityKind;
use crate::error::{Error, Result};
use crate::graph::Labeling;

/// One join: cluster `absorbed` is folded into cluster `kept`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Merge {
    pub kept: usize,
    pub absorbed: usize,
    /// Modularity gain of the join.
    pub delta: f64,
}

/// Full merge history of a greedy agglomeration.
///
/// Cluster ids are node ids: the cluster created by a merge keeps the id of
/// its `kept` side. Level `j` is the partition with `j` clusters, reached
/// after the first `n - j` merges.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Dendrogram {
    n: usize,
    kind: ModularityKind,
    merges: Vec<Merge>,
    /// `q[j - 1]` is the modularity at level `j`.
    q: Vec<f64>,
}

impl Dendrogram {
    pub(crate) fn from_parts(n: usize, kind: ModularityKind, merges: Vec<Merge>, q: Vec<f64>) -> Self {
        debug_assert_eq!(q.len(), n);
        Dendrogram { n, kind, merges, q }
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn kind(&self) -> ModularityKind {
        self.kind
    }

    pub fn merges(&self) -> &[Merge] {
        &self.merges
    }

    /// Modularity of the partition with `j` clusters, `1 <= j <= n`.
    pub fn modularity_at(&self, j: usize) -> f64 {
        self.q[j - 1]
    }

    /// `(j, q_j)` for `j = n` down to 1.
    pub fn levels(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        (1..=self.n).rev().map(move |j| (j, self.q[j - 1]))
    }

    /// Level with the largest modularity; ties go to fewer clusters.
    pub fn best_level(&self) -> usize {
        let mut best = 1;
        for j in 2..=self.n {
            if self.q[j - 1] > self.q[best - 1] {
                best = j;
            }
        }
        best
    }

    /// Partition at level `j`, numbered by the first node of each cluster.
    pub fn labeling_at(&self, j: usize) -> Labeling {
        assert!(j >= 1 && j <= self.n, "level {j} outside 1..={}", self.n);
        let mut parent: Vec<usize> = (0..self.n).collect();
        for m in &self.merges[..self.n - j] {
            parent[m.absorbed] = m.kept;
        }
        let roots: Vec<usize> = (0..self.n).map(|i| find(&mut parent, i)).collect();
        Labeling::from_raw(&roots)
    }

    /// Merge-list text: a header line, then one `kept absorbed delta` line per merge.
    pub fn to_merge_list(&self) -> String {
        let kind = match self.kind {
            ModularityKind::Er => "er",
            ModularityKind::Dc => "dc",
        };
        let mut out = String::new();
        let _ = writeln!(out, "# nodes {} kind {} q0 {}", self.n, kind, self.q[self.n - 1]);
        for m in &self.merges {
            let _ = writeln!(out, "{} {} {}", m.kept, m.absorbed, m.delta);
        }
        out
    }

    /// Parses [`Dendrogram::to_merge_list`] output. Level modularities are
    /// rebuilt by accumulating the recorded gains.
    pub fn from_merge_list(text: &str) -> Result<Self> {
        let bad = |line: usize, msg: String| Error::MalformedMergeList { line, msg };
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (_, header) = lines.next().ok_or_else(|| bad(1, "missing header".into()))?;
        let h: Vec<&str> = header.split_whitespace().collect();
        if h.len() != 7 || h[0] != "#" || h[1] != "nodes" || h[3] != "kind" || h[5] != "q0" {
            return Err(bad(1, format!("unexpected header {header:?}")));
        }
        let n: usize = h[2].parse().map_err(|_| bad(1, "bad node count".into()))?;
        let kind = match h[4] {
            "er" => ModularityKind::Er,
            "dc" => ModularityKind::Dc,
            other => return Err(bad(1, format!("unknown kind {other:?}"))),
        };
        let q0: f64 = h[6].parse().map_err(|_| bad(1, "bad initial modularity".into()))?;
        let mut merges = Vec::new();
        for (idx, line) in lines {
            let f: Vec<&str> = line.split_whitespace().collect();
            let parse_id = |s: &str| s.parse::<usize>().ok().filter(|&v| v < n);
            match (f.as_slice(), f.get(2).and_then(|d| d.parse::<f64>().ok())) {
                ([a, b, _], Some(delta)) => {
                    let (kept, absorbed) = match (parse_id(a), parse_id(b)) {
                        (Some(x), Some(y)) => (x, y),
                        _ => return Err(bad(idx + 1, format!("cluster id out of range in {line:?}"))),
                    };
                    merges.push(Merge { kept, absorbed, delta });
                }
                _ => return Err(bad(idx + 1, format!("expected `kept absorbed delta`, got {line:?}"))),
            }
        }
        if n == 0 || merges.len() != n - 1 {
            return Err(bad(0, format!("expected {} merges, found {}", n.saturating_sub(1), merges.len())));
        }
        let mut q = alloc::vec![0.0; n];
        q[n - 1] = q0;
        for (m, merge) in merges.iter().enumerate() {
            q[n - 2 - m] = q[n - 1 - m] + merge.delta;
        }
        Ok(Dendrogram { n, kind, merges, q })
    }
}

fn find(parent: &mut [usize], mut i: usize) -> usize {
    let mut root = i;
    while parent[root] != root {
        root = parent[root];
    }
    while parent[i] != root {
        let next = parent[i];
        parent[i] = root;
        i = next;
    }
    root
}

/// How to pick the number of groups from a dendrogram.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum GroupMode {
    /// Cut at exactly this many groups.
    Fixed(usize),
    /// Cut at the level of largest modularity.
    Max,
    /// Walk `j = 2, 3, ...` accepting `j` while `q_j` beats the last
    /// accepted modularity (initially 0) by more than the threshold; stop at
    /// the first failure.
    Threshold(f64),
}

impl GroupMode {
    /// Threshold used when none is given.
    pub const DEFAULT_DELTA: f64 = 0.01;
}

/// Chooses the group count and returns the matching partition.
pub fn select_group_count(d: &Dendrogram, mode: GroupMode) -> Result<(usize, Labeling)> {
    let n = d.node_count();
    let count = match mode {
        GroupMode::Fixed(g) => {
            if g == 0 || g > n {
                return Err(Error::InvalidParameter(format!("group count {g} outside 1..={n}")));
            }
            g
        }
        GroupMode::Max => d.best_level(),
        GroupMode::Threshold(delta) => {
            let (mut current, mut count) = (0.0, 1);
            for j in 2..n {
                let qj = d.modularity_at(j);
                if qj - current > delta {
                    current = qj;
                    count = j;
                } else {
                    break;
                }
            }
            count
        }
    };
    Ok((count, d.labeling_at(count)))
}
