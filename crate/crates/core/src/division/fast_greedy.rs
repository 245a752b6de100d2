
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use dary_heap::QuaternaryHeap;
use hashbrown::HashMap;

use super::dendrogram::{Dendrogram, Merge};
use super::ModularityKind;
use crate::error::{Error, Result};
use crate::graph::Graph;

// Modularity changes share one denominator for the whole run (L n^2 for ER,
// L^2 for DC), so the agglomeration works on exact integer numerators.
#[derive(Clone, Copy)]
struct Scale {
    kind: ModularityKind,
    n: i128,
    l: i128,
}

impl Scale {
    fn denominator(&self) -> i128 {
        match self.kind {
            ModularityKind::Er => self.l * self.n * self.n,
            ModularityKind::Dc => self.l * self.l,
        }
    }

    /// Numerator of the gain from joining clusters `t` and `s`.
    #[inline]
    fn gain(&self, between: u32, t: &ClusterTotals, s: &ClusterTotals) -> i128 {
        match self.kind {
            ModularityKind::Er => 2 * between as i128 * self.n * self.n - 2 * self.l * t.size as i128 * s.size as i128,
            ModularityKind::Dc => 2 * between as i128 * self.l - 2 * t.degree as i128 * s.degree as i128,
        }
    }

    /// Numerator of the modularity of a single cluster.
    fn own(&self, c: &ClusterTotals) -> i128 {
        match self.kind {
            ModularityKind::Er => c.internal as i128 * self.n * self.n - self.l * (c.size as i128).pow(2),
            ModularityKind::Dc => c.internal as i128 * self.l - (c.degree as i128).pow(2),
        }
    }
}

#[derive(Clone, Copy, Default)]
struct ClusterTotals {
    size: u64,
    degree: u64,
    internal: u64,
}

// Heap keys: gains fit in 64 bits unless the graph is very large, and the
// smaller key keeps the heap cache-friendly.
trait Key: Copy + Ord + Into<i128> {
    fn from_gain(gain: i128) -> Self;
}

impl Key for i64 {
    #[inline]
    fn from_gain(gain: i128) -> Self {
        gain as i64
    }
}

impl Key for i128 {
    #[inline]
    fn from_gain(gain: i128) -> Self {
        gain
    }
}

#[derive(PartialEq, Eq)]
struct Candidate<K> {
    gain: K,
    a: u32,
    b: u32,
}

impl<K: Ord> Ord for Candidate<K> {
    // Largest gain first; ties go to the lexicographically smallest pair.
    fn cmp(&self, other: &Self) -> Ordering {
        self.gain.cmp(&other.gain).then_with(|| (other.a, other.b).cmp(&(self.a, self.b)))
    }
}

impl<K: Ord> PartialOrd for Candidate<K> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Greedy agglomerative modularity maximization.
///
/// Starts from singletons and repeatedly joins the pair of adjacent clusters
/// with the largest modularity gain. Ties go to the smallest `(id, id)` pair.
/// Once no adjacent pairs remain the leftover components are joined into the
/// lowest-id cluster in ascending id order. The full merge history is
/// returned.
///
/// Candidates live in one max-heap. Absorbing a cluster can only raise the
/// gain of pairs that touched the absorbed side, so only those are pushed
/// again; every other entry stays an upper bound and is re-evaluated when it
/// reaches the top.
pub fn fast_greedy(g: &Graph, kind: ModularityKind) -> Result<Dendrogram> {
    let n = g.node_count();
    let l = g.total_degree();
    if l == 0 {
        return Err(Error::NoEdges);
    }
    assert!(l <= u32::MAX as usize, "total degree {l} exceeds pair-count range");
    let scale = Scale { kind, n: n as i128, l: l as i128 };
    // Every gain numerator is bounded by twice the denominator.
    if 2 * scale.denominator() < i64::MAX as i128 {
        Ok(agglomerate::<i64>(g, scale))
    } else {
        Ok(agglomerate::<i128>(g, scale))
    }
}

fn agglomerate<K: Key>(g: &Graph, scale: Scale) -> Dendrogram {
    let n = g.node_count();
    let den = scale.denominator();

    let mut totals: Vec<ClusterTotals> =
        (0..n).map(|i| ClusterTotals { size: 1, degree: g.degree(i) as u64, internal: 0 }).collect();
    let mut links: Vec<HashMap<u32, u32>> =
        (0..n).map(|i| g.neighbors(i).iter().map(|&j| (j, 1u32)).collect()).collect();
    let mut alive = vec![true; n];

    let mut heap: QuaternaryHeap<Candidate<K>> = g
        .edges()
        .map(|(i, j)| Candidate { gain: K::from_gain(scale.gain(1, &totals[i], &totals[j])), a: i as u32, b: j as u32 })
        .collect::<Vec<_>>()
        .into();

    let mut q_num: i128 = totals.iter().map(|c| scale.own(c)).sum();
    let mut q = vec![0.0; n];
    q[n - 1] = super::ratio(q_num, den);
    let mut merges = Vec::with_capacity(n.saturating_sub(1));

    let mut record = |kept: usize, absorbed: usize, gain: i128, q_num: &mut i128, merges: &mut Vec<Merge>| {
        *q_num += gain;
        merges.push(Merge { kept, absorbed, delta: super::ratio(gain, den) });
        q[n - 1 - merges.len()] = super::ratio(*q_num, den);
    };

    while let Some(c) = heap.pop() {
        let (a, b) = (c.a as usize, c.b as usize);
        if !alive[a] || !alive[b] {
            continue;
        }
        let Some(&between) = links[a].get(&c.b) else { continue };
        let gain = scale.gain(between, &totals[a], &totals[b]);
        let stored: i128 = c.gain.into();
        if gain < stored {
            heap.push(Candidate { gain: K::from_gain(gain), ..c });
            continue;
        }
        if gain > stored {
            // A fresher entry for this pair is already queued.
            continue;
        }
        // The survivor keeps the larger neighbor map; ties keep the lower id.
        let (keep, gone) = if links[b].len() > links[a].len() { (b, a) } else { (a, b) };
        links[keep].remove(&(gone as u32));
        let moved = core::mem::take(&mut links[gone]);
        for (&u, &cnt) in &moved {
            if u as usize == keep {
                continue;
            }
            let um = &mut links[u as usize];
            um.remove(&(gone as u32));
            *um.entry(keep as u32).or_insert(0) += cnt;
            *links[keep].entry(u).or_insert(0) += cnt;
        }
        totals[keep] = ClusterTotals {
            size: totals[keep].size + totals[gone].size,
            degree: totals[keep].degree + totals[gone].degree,
            internal: totals[keep].internal + totals[gone].internal + 2 * between as u64,
        };
        alive[gone] = false;
        record(keep, gone, gain, &mut q_num, &mut merges);

        for &u in moved.keys() {
            let u = u as usize;
            if u == keep {
                continue;
            }
            let cnt = links[keep][&(u as u32)];
            let (x, y) = if keep < u { (keep, u) } else { (u, keep) };
            let gain = K::from_gain(scale.gain(cnt, &totals[keep], &totals[u]));
            heap.push(Candidate { gain, a: x as u32, b: y as u32 });
        }
    }

    // Components with no edges between them.
    let rest: Vec<usize> = (0..n).filter(|&i| alive[i]).collect();
    if let Some((&keep, others)) = rest.split_first() {
        for &gone in others {
            let gain = scale.gain(0, &totals[keep], &totals[gone]);
            totals[keep] = ClusterTotals {
                size: totals[keep].size + totals[gone].size,
                degree: totals[keep].degree + totals[gone].degree,
                internal: totals[keep].internal + totals[gone].internal,
            };
            alive[gone] = false;
            record(keep, gone, gain, &mut q_num, &mut merges);
        }
    }

    Dendrogram::from_parts(n, scale.kind, merges, q)
}
