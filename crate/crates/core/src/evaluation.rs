//! Scoring recovered partitions and fitted models: normalized mutual
//! information, the masked-pair link prediction protocol with its AUC, and
//! an exhaustive modularity oracle for tiny graphs.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use crate::division::ModularityKind;
use crate::error::{Error, Result};
use crate::generators::triangle_pair;
use crate::graph::{Graph, Labeling};
use crate::math;
use crate::pipeline::{run_pipeline_with, Clock, DetectionReport, Executor, PipelineConfig};
use crate::rng::{self, tag};

/// Normalized mutual information `2 I(a, b) / (H(a) + H(b))` with natural
/// logs and empirical distributions.
///
/// Identical partitions score exactly 1. When both labelings are constant
/// the result is 1 if they induce the same partition and 0 otherwise.
pub fn nmi(a: &Labeling, b: &Labeling) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch { left: a.len(), right: b.len() });
    }
    if a.same_partition(b) {
        return Ok(1.0);
    }
    let n = a.len() as f64;
    let mut joint: BTreeMap<(u32, u32), u64> = BTreeMap::new();
    for (&x, &y) in a.as_slice().iter().zip(b.as_slice()) {
        *joint.entry((x, y)).or_insert(0) += 1;
    }
    let entropy = |sizes: Vec<usize>| -> f64 { -sizes.iter().map(|&s| math::xlogx(s as f64 / n)).sum::<f64>() };
    let (sa, sb) = (a.sizes(), b.sizes());
    let (ha, hb) = (entropy(sa.clone()), entropy(sb.clone()));
    if ha + hb <= 0.0 {
        return Ok(0.0);
    }
    let mut info = 0.0;
    for (&(x, y), &c) in &joint {
        let p = c as f64 / n;
        let q = sa[x as usize] as f64 * sb[y as usize] as f64 / (n * n);
        info += p * math::ln(p / q);
    }
    Ok((2.0 * info / (ha + hb)).clamp(0.0, 1.0))
}

/// NMI between true and estimated group labels.
pub fn g_nmi(truth: &Labeling, estimate: &Labeling) -> Result<f64> {
    nmi(truth, estimate)
}

/// Node pairs hidden from the fit.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MaskSet {
    /// Distinct pairs `(i, j)` with `i < j`, sorted.
    pub pairs: Vec<(u32, u32)>,
    pub proportion: f64,
    pub seed: u64,
}

/// Samples `round(proportion * n(n-1)/2)` distinct unordered pairs
/// uniformly without replacement.
pub fn make_mask(n: usize, proportion: f64, seed: u64) -> Result<MaskSet> {
    if !(0.0..1.0).contains(&proportion) {
        return Err(Error::InvalidParameter("mask proportion must lie in [0, 1)".into()));
    }
    let total = n * n.saturating_sub(1) / 2;
    let count = math::round(proportion * total as f64) as usize;
    let mut r = rng::stream(seed, &[tag::MASK]);
    let mut pairs: Vec<(u32, u32)> = rand::seq::index::sample(&mut r, total, count)
        .into_iter()
        .map(|idx| {
            let (i, j) = triangle_pair(idx as u64);
            (i as u32, j as u32)
        })
        .collect();
    pairs.sort_unstable();
    Ok(MaskSet { pairs, proportion, seed })
}

/// Area under the ROC curve via the Mann–Whitney statistic, with tied
/// scores sharing their mean rank.
pub fn auc(scores: &[f64], truth: &[bool]) -> Result<f64> {
    if scores.len() != truth.len() {
        return Err(Error::LengthMismatch { left: scores.len(), right: truth.len() });
    }
    let positives = truth.iter().filter(|&&t| t).count();
    let negatives = truth.len() - positives;
    if positives == 0 || negatives == 0 {
        return Err(Error::DegenerateTruth);
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    let mut rank_sum = 0.0;
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && scores[order[end]] == scores[order[start]] {
            end += 1;
        }
        // Ranks start..end (1-based start+1..=end) share their mean.
        let mid = (start + 1 + end) as f64 / 2.0;
        rank_sum += mid * order[start..end].iter().filter(|&&i| truth[i]).count() as f64;
        start = end;
    }
    let p = positives as f64;
    Ok((rank_sum - p * (p + 1.0) / 2.0) / (p * negatives as f64))
}

/// Hides a random set of pairs, runs the pipeline on the remaining graph and
/// scores the hidden pairs with the fitted link probabilities.
pub fn masked_link_eval<E: Executor, C: Clock>(
    g: &Graph,
    cfg: &PipelineConfig,
    proportion: f64,
    seed: u64,
    exec: &E,
    clock: &C,
) -> Result<(f64, DetectionReport)> {
    if !(proportion > 0.0 && proportion < 1.0) {
        return Err(Error::InvalidParameter("mask proportion must lie in (0, 1)".into()));
    }
    let mask = make_mask(g.node_count(), proportion, seed)?;
    let report = run_pipeline_with(&g.without_pairs(&mask.pairs), cfg, exec, clock)?;
    let scores: Vec<f64> = mask.pairs.iter().map(|&(i, j)| report.link_score(i as usize, j as usize)).collect();
    let truth: Vec<bool> = mask.pairs.iter().map(|&(i, j)| g.has_edge(i as usize, j as usize)).collect();
    Ok((auc(&scores, &truth)?, report))
}

/// Largest graph [`oracle_best_partition`] accepts.
pub const ORACLE_MAX_NODES: usize = 12;

/// Exact modularity maximizer over all partitions into at most
/// `max_groups` parts, by enumeration.
///
/// Modularity is evaluated straight from the adjacency over ordered node
/// pairs in integer arithmetic. Among equal optima the first partition in
/// restricted-growth order is returned.
pub fn oracle_best_partition(g: &Graph, kind: ModularityKind, max_groups: usize) -> Result<(f64, Labeling)> {
    let n = g.node_count();
    if n > ORACLE_MAX_NODES {
        return Err(Error::OracleTooLarge { n, max: ORACLE_MAX_NODES });
    }
    if g.total_degree() == 0 {
        return Err(Error::NoEdges);
    }
    if n == 0 || max_groups == 0 {
        return Err(Error::InvalidParameter("need at least one node and one group".into()));
    }
    let adj: Vec<Vec<bool>> = (0..n).map(|i| (0..n).map(|j| g.has_edge(i, j)).collect()).collect();
    let deg: Vec<i128> = adj.iter().map(|r| r.iter().filter(|&&x| x).count() as i128).collect();
    let l: i128 = deg.iter().sum();
    let nn = n as i128;
    let score = |labels: &[usize]| -> i128 {
        let mut inside = 0i128;
        let mut null = 0i128;
        for i in 0..n {
            for j in 0..n {
                if labels[i] == labels[j] {
                    inside += adj[i][j] as i128;
                    null += match kind {
                        ModularityKind::Er => 1,
                        ModularityKind::Dc => deg[i] * deg[j],
                    };
                }
            }
        }
        match kind {
            ModularityKind::Er => nn * nn * inside - l * null,
            ModularityKind::Dc => l * inside - null,
        }
    };
    let den = match kind {
        ModularityKind::Er => l * nn * nn,
        ModularityKind::Dc => l * l,
    };

    let mut labels = vec![0usize; n];
    let mut best = (i128::MIN, labels.clone());
    enumerate(&mut labels, 1, 1, max_groups.min(n), &mut |e| {
        let s = score(e);
        if s > best.0 {
            best = (s, e.to_vec());
        }
    });
    let labels: Vec<u32> = best.1.iter().map(|&x| x as u32).collect();
    let count = best.1.iter().max().map_or(1, |m| m + 1);
    Ok((best.0 as f64 / den as f64, Labeling::new(labels, count)?))
}

// Restricted growth strings: position `i` takes any label up to one past the
// largest used so far.
fn enumerate(labels: &mut [usize], i: usize, used: usize, max: usize, visit: &mut impl FnMut(&[usize])) {
    if i == labels.len() {
        visit(labels);
        return;
    }
    for v in 0..(used + 1).min(max) {
        labels[i] = v;
        enumerate(labels, i + 1, used.max(v + 1), max, visit);
    }
}
