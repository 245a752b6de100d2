use alloc::vec;
use alloc::vec::Vec;

use super::eigen::{top_eigenpairs, AdjacencyOperator, EigenPairs, ScaledAdjacency};
use super::kmeans::kmeans;
use crate::error::{Error, Result};
use crate::graph::{Graph, Labeling};
use crate::math;

/// Settings shared by [`detect_ssp`] and [`detect_score`].
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SpectralConfig {
    pub k: usize,
    /// Degree regularizer for SSP; `None` means the mean degree.
    pub tau: Option<f64>,
    pub restarts: usize,
    pub max_iter: usize,
    pub seed: u64,
    /// Ratio clipping threshold for SCORE; `None` means `ln n`.
    pub clip: Option<f64>,
}

impl SpectralConfig {
    pub fn new(k: usize, seed: u64) -> Self {
        SpectralConfig { k, tau: None, restarts: 10, max_iter: 100, seed, clip: None }
    }
}

/// Output of [`detect_ssp`].
#[derive(Debug, Clone, PartialEq)]
pub struct SspFit {
    pub labels: Labeling,
    /// Nodes whose embedding row vanished; they were put in the largest cluster.
    pub zero_rows: Vec<usize>,
}

/// Regularized spherical spectral clustering.
///
/// Embeds nodes with the top-`k` eigenvectors (by `|lambda|`) of
/// `D_tau^{-1/2} A D_tau^{-1/2}`, `D_tau = D + tau I`, scales every nonzero
/// row to unit length and runs k-means on those rows.
pub fn detect_ssp(g: &Graph, cfg: &SpectralConfig) -> Result<SspFit> {
    check(g, cfg.k)?;
    if cfg.k == 1 {
        return Ok(SspFit { labels: Labeling::constant(g.node_count()), zero_rows: Vec::new() });
    }
    SspEmbedding::new(g, cfg.k, cfg.tau, cfg.seed)?.cluster(cfg.k, cfg)
}

/// Spectral clustering on ratios of eigenvectors of `A`.
///
/// With `v_1..v_k` the leading eigenvectors, node `i` is embedded as
/// `v_{m+1}(i) / v_1(i)` for `m = 1..k-1`, clipped to `[-T, T]`; k-means
/// then clusters the rows. A zero denominator yields `T` with the sign of
/// the numerator (and 0 when the numerator vanishes too). The leading vector
/// may vanish on at most half of the nodes.
pub fn detect_score(g: &Graph, cfg: &SpectralConfig) -> Result<Labeling> {
    check(g, cfg.k)?;
    if cfg.k == 1 {
        return Ok(Labeling::constant(g.node_count()));
    }
    ScoreEmbedding::new(g, cfg.k, cfg.clip, cfg.seed)?.cluster(cfg.k, cfg)
}

fn check(g: &Graph, k: usize) -> Result<()> {
    if k == 0 {
        return Err(Error::InvalidParameter("k must be at least 1".into()));
    }
    if k > g.node_count() {
        return Err(Error::TooManyClusters { k, n: g.node_count() });
    }
    Ok(())
}

/// SSP eigenvectors for up to `k_max` clusters.
#[derive(Debug, Clone)]
pub struct SspEmbedding {
    n: usize,
    pairs: EigenPairs,
}

impl SspEmbedding {
    pub fn new(g: &Graph, k_max: usize, tau: Option<f64>, seed: u64) -> Result<Self> {
        check(g, k_max)?;
        let n = g.node_count();
        let tau = tau.unwrap_or(g.total_degree() as f64 / n as f64);
        if !(tau >= 0.0) || !tau.is_finite() {
            return Err(Error::InvalidParameter("tau must be finite and non-negative".into()));
        }
        let scale = (0..n)
            .map(|i| {
                let d = g.degree(i) as f64 + tau;
                if d > 0.0 {
                    1.0 / math::sqrt(d)
                } else {
                    0.0
                }
            })
            .collect();
        let pairs = top_eigenpairs(&ScaledAdjacency { graph: g, scale }, k_max, seed)?;
        if pairs.values.iter().all(|v| v.abs() <= 1e-12) {
            return Err(Error::DegenerateEmbedding);
        }
        Ok(SspEmbedding { n, pairs })
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.pairs.values
    }

    /// Clusters with the first `k` eigenvectors.
    pub fn cluster(&self, k: usize, cfg: &SpectralConfig) -> Result<SspFit> {
        let n = self.n;
        if k > self.pairs.vectors.len() {
            return Err(Error::InvalidParameter("embedding computed for fewer clusters".into()));
        }
        if k == 1 {
            return Ok(SspFit { labels: Labeling::constant(n), zero_rows: Vec::new() });
        }
        let mut rows = Vec::with_capacity(n * k);
        let mut kept = Vec::with_capacity(n);
        let mut zero_rows = Vec::new();
        for i in 0..n {
            let start = rows.len();
            rows.extend(self.pairs.vectors[..k].iter().map(|v| v[i]));
            let norm = math::sqrt(rows[start..].iter().map(|x| x * x).sum());
            if norm > 1e-12 {
                rows[start..].iter_mut().for_each(|x| *x /= norm);
                kept.push(i);
            } else {
                rows.truncate(start);
                zero_rows.push(i);
            }
        }
        if kept.is_empty() {
            return Err(Error::DegenerateEmbedding);
        }
        if kept.len() < k {
            return Err(Error::TooManyClusters { k, n: kept.len() });
        }
        let km = kmeans(&rows, k, k, cfg.restarts, cfg.max_iter, cfg.seed)?;
        let mut labels = vec![0u32; n];
        let mut sizes = vec![0usize; k];
        for (&i, &l) in kept.iter().zip(&km.labels) {
            labels[i] = l;
            sizes[l as usize] += 1;
        }
        let largest = (0..k).fold(0, |b, c| if sizes[c] > sizes[b] { c } else { b });
        for &i in &zero_rows {
            labels[i] = largest as u32;
        }
        Ok(SspFit { labels: Labeling::new(labels, k)?, zero_rows })
    }
}

/// SCORE ratio embedding for up to `k_max` clusters.
#[derive(Debug, Clone)]
pub struct ScoreEmbedding {
    n: usize,
    /// Ratio columns `v_{m+1} / v_1`, `m = 1..k_max-1`.
    ratios: Vec<Vec<f64>>,
}

impl ScoreEmbedding {
    pub fn new(g: &Graph, k_max: usize, clip: Option<f64>, seed: u64) -> Result<Self> {
        check(g, k_max)?;
        let n = g.node_count();
        if k_max == 1 {
            return Ok(ScoreEmbedding { n, ratios: Vec::new() });
        }
        let t = clip.unwrap_or_else(|| math::ln(n as f64));
        let pairs = top_eigenpairs(&AdjacencyOperator(g), k_max, seed)?;
        if pairs.values[0].abs() <= 1e-12 {
            return Err(Error::DegenerateEmbedding);
        }
        let lead = &pairs.vectors[0];
        let peak = lead.iter().fold(0.0f64, |a, x| a.max(x.abs()));
        if peak == 0.0 {
            return Err(Error::DegenerateEmbedding);
        }
        let is_zero = |x: f64| x.abs() <= 1e-12 * peak;
        let zeros = lead.iter().filter(|&&x| is_zero(x)).count();
        if 2 * zeros > n {
            return Err(Error::DegenerateLeadingVector { zeros, n });
        }
        let ratios = pairs.vectors[1..]
            .iter()
            .map(|v| {
                (0..n)
                    .map(|i| {
                        if is_zero(lead[i]) {
                            if v[i] == 0.0 {
                                0.0
                            } else {
                                t.copysign(v[i])
                            }
                        } else {
                            (v[i] / lead[i]).clamp(-t, t)
                        }
                    })
                    .collect()
            })
            .collect();
        Ok(ScoreEmbedding { n, ratios })
    }

    pub fn cluster(&self, k: usize, cfg: &SpectralConfig) -> Result<Labeling> {
        if k == 1 {
            return Ok(Labeling::constant(self.n));
        }
        if k - 1 > self.ratios.len() {
            return Err(Error::InvalidParameter("embedding computed for fewer clusters".into()));
        }
        let d = k - 1;
        let mut rows = Vec::with_capacity(self.n * d);
        for i in 0..self.n {
            rows.extend(self.ratios[..d].iter().map(|c| c[i]));
        }
        let km = kmeans(&rows, d, k, cfg.restarts, cfg.max_iter, cfg.seed)?;
        Labeling::new(km.labels, k)
    }
}
