//! Choosing the number of communities inside a group with a penalized
//! profile likelihood.
//!
//! For every `K = 1..=K_max` the detector produces hard labels, the
//! Bernoulli SBM log-likelihood is profiled over the block matrix
//!
//! `l(K) = sum_{k <= l} [O'_kl ln B_kl + (n'_kl - O'_kl) ln(1 - B_kl)]`
//!
//! (`O'` and `n'` count unordered node pairs), and the score is
//! `l(K) - lambda * K(K+1)/2 * n ln n`. The largest score wins, ties going to
//! the smaller `K`.

use alloc::vec::Vec;

use crate::detection::{
    detect_vsbm, Detector, ScoreEmbedding, SpectralConfig, SspEmbedding, VemConfig,
};
use crate::division::partition_stats;
use crate::error::{Error, Result};
use crate::graph::{Graph, Labeling};
use crate::math;
use crate::rng::{self, tag};

/// Penalty weight used when none is given.
pub const DEFAULT_LAMBDA: f64 = 0.25;

#[derive(Debug, Clone, PartialEq)]
pub struct SelectionResult {
    pub k_hat: usize,
    /// `scores[K - 1]`; a fit that failed scores negative infinity.
    pub scores: Vec<f64>,
    /// `loglik[K - 1]`, the profile log-likelihood of the fitted labels.
    pub loglik: Vec<f64>,
    /// Labels fitted at `k_hat`.
    pub labels: Labeling,
    /// Nodes with a vanishing SSP embedding row at `k_hat`.
    pub zero_rows: Vec<usize>,
}

/// Profile Bernoulli SBM log-likelihood of a hard labeling.
///
/// Block probabilities are the pair-count MLEs clamped to
/// `[1/n^2, 1 - 1/n^2]`; blocks without node pairs contribute nothing.
pub fn profile_loglik(g: &Graph, labels: &Labeling) -> Result<f64> {
    let stats = partition_stats(g, labels)?;
    let n = g.node_count() as f64;
    let lo = 1.0 / (n * n);
    let k = labels.count();
    let mut total = 0.0;
    for a in 0..k {
        for b in a..k {
            let (na, nb) = (stats.size(a) as f64, stats.size(b) as f64);
            let (edges, pairs) = if a == b {
                (stats.count(a, a) as f64 / 2.0, na * (na - 1.0) / 2.0)
            } else {
                (stats.count(a, b) as f64, na * nb)
            };
            if pairs <= 0.0 {
                continue;
            }
            let p = (edges / pairs).clamp(lo, 1.0 - lo);
            total += edges * math::ln(p) + (pairs - edges) * math::ln_1p(-p);
        }
    }
    Ok(total)
}

/// `lambda * K(K+1)/2 * n ln n`.
pub fn penalty(k: usize, n: usize, lambda: f64) -> f64 {
    let n = n as f64;
    lambda * (k * (k + 1)) as f64 / 2.0 * n * math::ln(n)
}

/// Seed handed to the detector for a given `K`.
pub fn fit_seed(seed: u64, k: usize) -> u64 {
    rng::derive_path(seed, &[tag::SELECTION, k as u64])
}

/// Scores `K = 1..=k_max` and returns the best.
///
/// Spectral detectors compute their embedding once for `k_max` and reuse
/// its leading columns for smaller `K`.
pub fn select_k(g: &Graph, k_max: usize, detector: Detector, lambda: f64, seed: u64) -> Result<SelectionResult> {
    let n = g.node_count();
    if k_max == 0 {
        return Err(Error::InvalidParameter("k_max must be at least 1".into()));
    }
    if k_max > n {
        return Err(Error::TooManyClusters { k: k_max, n });
    }
    if !(lambda >= 0.0) {
        return Err(Error::InvalidParameter("lambda must be non-negative".into()));
    }
    let fitter = Fitter::new(g, k_max, detector, seed);
    let mut scores = Vec::with_capacity(k_max);
    let mut loglik = Vec::with_capacity(k_max);
    let mut best: Option<(usize, Labeling, Vec<usize>)> = None;
    let mut best_score = f64::NEG_INFINITY;
    for k in 1..=k_max {
        let (ll, fit) = match fitter.fit(g, k) {
            Ok((labels, zero_rows)) => {
                let ll = profile_loglik(g, &labels)?;
                (ll, Some((labels, zero_rows)))
            }
            Err(_) => (f64::NEG_INFINITY, None),
        };
        let score = ll - penalty(k, n, lambda);
        loglik.push(ll);
        scores.push(score);
        if let Some((labels, zero_rows)) = fit {
            if best.is_none() || score > best_score {
                best_score = score;
                best = Some((k, labels, zero_rows));
            }
        }
    }
    let (k_hat, labels, zero_rows) = best.ok_or(Error::DegenerateEmbedding)?;
    Ok(SelectionResult { k_hat, scores, loglik, labels, zero_rows })
}

enum Fitter {
    Ssp(Option<SspEmbedding>, u64),
    Score(Option<ScoreEmbedding>, u64),
    Vsbm(u64),
}

impl Fitter {
    fn new(g: &Graph, k_max: usize, detector: Detector, seed: u64) -> Self {
        match detector {
            Detector::Ssp => Fitter::Ssp(
                (k_max > 1).then(|| SspEmbedding::new(g, k_max, None, seed).ok()).flatten(),
                seed,
            ),
            Detector::Score => Fitter::Score(
                (k_max > 1).then(|| ScoreEmbedding::new(g, k_max, None, seed).ok()).flatten(),
                seed,
            ),
            Detector::Vsbm => Fitter::Vsbm(seed),
        }
    }

    fn fit(&self, g: &Graph, k: usize) -> Result<(Labeling, Vec<usize>)> {
        let n = g.node_count();
        if k == 1 {
            return Ok((Labeling::constant(n), Vec::new()));
        }
        match self {
            Fitter::Ssp(emb, seed) => {
                let emb = emb.as_ref().ok_or(Error::DegenerateEmbedding)?;
                let fit = emb.cluster(k, &SpectralConfig::new(k, fit_seed(*seed, k)))?;
                Ok((fit.labels, fit.zero_rows))
            }
            Fitter::Score(emb, seed) => {
                let emb = emb.as_ref().ok_or(Error::DegenerateEmbedding)?;
                Ok((emb.cluster(k, &SpectralConfig::new(k, fit_seed(*seed, k)))?, Vec::new()))
            }
            Fitter::Vsbm(seed) => {
                let fit = detect_vsbm(g, &VemConfig::new(k, fit_seed(*seed, k)))?;
                Ok((fit.labels, Vec::new()))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_candidate() {
        let g = Graph::from_edges(4, &[(0, 1), (2, 3)]).unwrap();
        let r = select_k(&g, 1, Detector::Ssp, DEFAULT_LAMBDA, 0).unwrap();
        assert_eq!(r.k_hat, 1);
        assert_eq!(r.scores.len(), 1);
    }

    #[test]
    fn edgeless_graph_picks_one() {
        let g = Graph::empty(10);
        for det in [Detector::Ssp, Detector::Score, Detector::Vsbm] {
            assert_eq!(select_k(&g, 4, det, DEFAULT_LAMBDA, 1).unwrap().k_hat, 1);
        }
    }

    #[test]
    fn loglik_of_perfect_blocks() {
        // Two disjoint triangles: blocks are exactly 0 or 1, clamped.
        let g = Graph::from_edges(6, &[(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)]).unwrap();
        let ll = profile_loglik(&g, &Labeling::from_raw(&[0, 0, 0, 1, 1, 1])).unwrap();
        let eps = 1.0 / 36.0;
        let expected = 6.0 * math::ln_1p(-eps) + 9.0 * math::ln_1p(-eps);
        assert!((ll - expected).abs() < 1e-12, "{ll} vs {expected}");
    }

    #[test]
    fn rejects_bad_bounds() {
        let g = Graph::empty(3);
        assert!(select_k(&g, 0, Detector::Ssp, 0.25, 0).is_err());
        assert!(select_k(&g, 4, Detector::Ssp, 0.25, 0).is_err());
    }
}
