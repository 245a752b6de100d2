//! Divide-and-conquer detection: split the network into groups by greedy
//! modularity agglomeration, choose and fit communities inside every group
//! independently, then concatenate the per-group labels and fit the block
//! matrix on the whole network.
//!
//! Community `k` (0-based) of group `t` becomes global community
//! `K_0 + ... + K_{t-1} + k`, so the communities of a group occupy a
//! contiguous label range.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::detection::{detect_score, detect_ssp, detect_vsbm, Detector, SpectralConfig, VemConfig};
use crate::division::{fast_greedy, select_group_count, GroupMode, ModularityKind};
use crate::error::{Error, Result};
use crate::graph::{Graph, Labeling};
use crate::matrix::Matrix;
use crate::rng::{self, tag};
use crate::selection::{fit_seed, select_k, DEFAULT_LAMBDA};

/// Network model the pipeline targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum ModelKind {
    Sbm,
    Dcsbm,
}

impl ModelKind {
    /// Modularity used for the group split.
    pub fn modularity(self) -> ModularityKind {
        match self {
            ModelKind::Sbm => ModularityKind::Er,
            ModelKind::Dcsbm => ModularityKind::Dc,
        }
    }

    pub fn default_detector(self) -> Detector {
        match self {
            ModelKind::Sbm => Detector::Ssp,
            ModelKind::Dcsbm => Detector::Score,
        }
    }
}

/// Per-group community cap used when none is given.
pub const DEFAULT_K_MAX: usize = 10;

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PipelineConfig {
    pub model: ModelKind,
    pub group_mode: GroupMode,
    pub detector: Detector,
    /// Largest community count tried inside a group.
    pub k_max: usize,
    pub lambda: f64,
    pub seed: u64,
    /// Upper bound on concurrently running group tasks.
    pub parallelism: usize,
}

impl PipelineConfig {
    pub fn new(model: ModelKind) -> Self {
        PipelineConfig {
            model,
            group_mode: GroupMode::Threshold(GroupMode::DEFAULT_DELTA),
            detector: model.default_detector(),
            k_max: DEFAULT_K_MAX,
            lambda: DEFAULT_LAMBDA,
            seed: 0,
            parallelism: 1,
        }
    }
}

/// Runs independent tasks `0..count` and returns their results in index
/// order.
pub trait Executor {
    fn map<R: Send>(&self, count: usize, limit: usize, task: &(dyn Fn(usize) -> R + Sync)) -> Vec<R>;
}

/// Runs tasks one after another on the calling thread.
#[derive(Debug, Clone, Copy, Default)]
pub struct Sequential;

impl Executor for Sequential {
    fn map<R: Send>(&self, count: usize, _limit: usize, task: &(dyn Fn(usize) -> R + Sync)) -> Vec<R> {
        (0..count).map(task).collect()
    }
}

/// Monotonic time source in milliseconds.
pub trait Clock: Sync {
    fn now_ms(&self) -> f64;
}

/// A clock that always reads zero.
#[derive(Debug, Clone, Copy, Default)]
pub struct NoClock;

impl Clock for NoClock {
    fn now_ms(&self) -> f64 {
        0.0
    }
}

/// Wall-clock milliseconds per phase. Selection and detection are summed
/// over groups; `communities_ms` is the wall time of the whole per-group
/// phase.
#[derive(Debug, Clone, Default, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Timings {
    pub division_ms: f64,
    pub selection_ms: f64,
    pub detection_ms: f64,
    pub communities_ms: f64,
    pub combination_ms: f64,
    pub total_ms: f64,
}

/// Outcome of detection inside one group.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GroupResult {
    /// Member nodes, ascending, as ids of the full graph.
    pub nodes: Vec<usize>,
    pub k_hat: usize,
    /// First global community label of the group.
    pub offset: usize,
    /// Local labels, aligned with `nodes`.
    pub labels: Labeling,
    /// Selection scores for `K = 1..`; empty when detection was skipped.
    pub scores: Vec<f64>,
    pub loglik: Vec<f64>,
    /// Nodes (full-graph ids) whose SSP embedding row vanished.
    pub zero_rows: Vec<usize>,
    pub selection_ms: f64,
    pub detection_ms: f64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DetectionReport {
    pub model: ModelKind,
    pub detector: Detector,
    pub group_count: usize,
    pub groups: Labeling,
    /// Modularity of the chosen group split.
    pub group_modularity: f64,
    pub group_results: Vec<GroupResult>,
    pub community_count: usize,
    pub communities: Labeling,
    pub b_hat: Matrix,
    /// Degree parameters, fitted for the degree-corrected model only.
    pub theta_hat: Option<Vec<f64>>,
    pub timings: Timings,
}

impl DetectionReport {
    /// Fitted probability of a link between `i` and `j`.
    ///
    /// The degree-corrected score `theta_i theta_j B_{c_i c_j}` is clipped
    /// to `[0, 1]`.
    pub fn link_score(&self, i: usize, j: usize) -> f64 {
        let b = self.b_hat[(self.communities.get(i), self.communities.get(j))];
        match &self.theta_hat {
            Some(theta) => (theta[i] * theta[j] * b).clamp(0.0, 1.0),
            None => b,
        }
    }
}

/// [`run_pipeline_with`] on the calling thread without timings.
pub fn run_pipeline(g: &Graph, cfg: &PipelineConfig) -> Result<DetectionReport> {
    run_pipeline_with(g, cfg, &Sequential, &NoClock)
}

/// Runs the three phases, spreading the per-group work over `exec`.
///
/// Every group derives its own seed from the configured seed and its
/// index, so the report does not depend on how tasks are scheduled.
pub fn run_pipeline_with<E: Executor, C: Clock>(
    g: &Graph,
    cfg: &PipelineConfig,
    exec: &E,
    clock: &C,
) -> Result<DetectionReport> {
    if g.total_degree() == 0 {
        return Err(Error::NoEdges);
    }
    if cfg.k_max == 0 {
        return Err(Error::InvalidParameter("k_max must be at least 1".into()));
    }
    let start = clock.now_ms();
    let dendrogram = fast_greedy(g, cfg.model.modularity())?;
    let (group_count, groups) = select_group_count(&dendrogram, cfg.group_mode)?;
    let group_modularity = dendrogram.modularity_at(group_count);
    let members = groups.members();
    let divided = clock.now_ms();

    let outcomes = exec.map(members.len(), cfg.parallelism.max(1), &|t| {
        detect_group(g, &members[t], cfg.detector, cfg.k_max, cfg.lambda, group_seed(cfg.seed, t), clock)
    });
    let mut group_results = Vec::with_capacity(outcomes.len());
    let mut offset = 0;
    for outcome in outcomes {
        let mut r = outcome?;
        r.offset = offset;
        offset += r.k_hat;
        group_results.push(r);
    }
    let detected = clock.now_ms();

    let communities = concatenate(g.node_count(), &group_results)?;
    let b_hat = estimate_b(g, &communities)?;
    let theta_hat = match cfg.model {
        ModelKind::Sbm => None,
        ModelKind::Dcsbm => Some(estimate_theta(g, &communities)?),
    };
    let done = clock.now_ms();

    let timings = Timings {
        division_ms: divided - start,
        selection_ms: group_results.iter().map(|r| r.selection_ms).sum(),
        detection_ms: group_results.iter().map(|r| r.detection_ms).sum(),
        communities_ms: detected - divided,
        combination_ms: done - detected,
        total_ms: done - start,
    };
    Ok(DetectionReport {
        model: cfg.model,
        detector: cfg.detector,
        group_count,
        groups,
        group_modularity,
        group_results,
        community_count: offset,
        communities,
        b_hat,
        theta_hat,
        timings,
    })
}

/// Seed of group `t`.
pub fn group_seed(seed: u64, t: usize) -> u64 {
    rng::derive_path(seed, &[tag::GROUP, t as u64])
}

/// Chooses `K` and fits labels on the subgraph induced by `nodes`.
///
/// Groups with fewer than two nodes or no internal edges become a single
/// community without running the detector.
pub fn detect_group<C: Clock + ?Sized>(
    g: &Graph,
    nodes: &[usize],
    detector: Detector,
    k_max: usize,
    lambda: f64,
    seed: u64,
    clock: &C,
) -> Result<GroupResult> {
    let (sub, _) = g.induced_subgraph(nodes)?;
    let single = |selection_ms, detection_ms| GroupResult {
        nodes: nodes.to_vec(),
        k_hat: 1,
        offset: 0,
        labels: Labeling::constant(nodes.len()),
        scores: Vec::new(),
        loglik: Vec::new(),
        zero_rows: Vec::new(),
        selection_ms,
        detection_ms,
    };
    if nodes.len() < 2 || sub.total_degree() == 0 {
        return Ok(single(0.0, 0.0));
    }
    let t0 = clock.now_ms();
    let sel = select_k(&sub, k_max.min(nodes.len()), detector, lambda, seed)?;
    let t1 = clock.now_ms();
    let (labels, zero_rows) = detect(&sub, detector, sel.k_hat, fit_seed(seed, sel.k_hat))?;
    let t2 = clock.now_ms();
    Ok(GroupResult {
        nodes: nodes.to_vec(),
        k_hat: sel.k_hat,
        offset: 0,
        labels,
        scores: sel.scores,
        loglik: sel.loglik,
        zero_rows: zero_rows.into_iter().map(|i| nodes[i]).collect(),
        selection_ms: t1 - t0,
        detection_ms: t2 - t1,
    })
}

/// Runs `detector` with exactly `k` communities.
pub fn detect(g: &Graph, detector: Detector, k: usize, seed: u64) -> Result<(Labeling, Vec<usize>)> {
    match detector {
        Detector::Ssp => {
            let fit = detect_ssp(g, &SpectralConfig::new(k, seed))?;
            Ok((fit.labels, fit.zero_rows))
        }
        Detector::Score => Ok((detect_score(g, &SpectralConfig::new(k, seed))?, Vec::new())),
        Detector::Vsbm => Ok((detect_vsbm(g, &VemConfig::new(k, seed))?.labels, Vec::new())),
    }
}

fn concatenate(n: usize, results: &[GroupResult]) -> Result<Labeling> {
    let mut labels = vec![u32::MAX; n];
    let mut total = 0;
    for r in results {
        for (&i, &l) in r.nodes.iter().zip(r.labels.as_slice()) {
            labels[i] = (r.offset + l as usize) as u32;
        }
        total += r.k_hat;
    }
    if labels.contains(&u32::MAX) {
        return Err(Error::InvalidParameter(format!("groups do not cover all {n} nodes")));
    }
    Labeling::new(labels, total)
}

/// Block probability MLE given labels: `O_kl / (n_k n_l)` off the diagonal
/// and `O_kk / (n_k (n_k - 1))` on it, with `O` counting ordered pairs.
/// Singleton communities get a zero diagonal.
pub fn estimate_b(g: &Graph, c: &Labeling) -> Result<Matrix> {
    let stats = crate::division::partition_stats(g, c)?;
    let k = c.count();
    Ok(Matrix::from_fn(k, k, |a, b| {
        let (na, nb) = (stats.size(a) as f64, stats.size(b) as f64);
        let pairs = if a == b { na * (na - 1.0) } else { na * nb };
        if pairs > 0.0 {
            stats.count(a, b) as f64 / pairs
        } else {
            0.0
        }
    }))
}

/// Degree parameters `theta_i = d_i n_c / sum_{j in c} d_j`, so each
/// community averages to one. Members of a community without edges get 1.
pub fn estimate_theta(g: &Graph, c: &Labeling) -> Result<Vec<f64>> {
    if c.len() != g.node_count() {
        return Err(Error::LengthMismatch { left: c.len(), right: g.node_count() });
    }
    let k = c.count();
    let mut degree = vec![0usize; k];
    for i in 0..g.node_count() {
        degree[c.get(i)] += g.degree(i);
    }
    let sizes = c.sizes();
    Ok((0..g.node_count())
        .map(|i| {
            let t = c.get(i);
            if degree[t] == 0 {
                1.0
            } else {
                g.degree(i) as f64 * sizes[t] as f64 / degree[t] as f64
            }
        })
        .collect())
}

/// Methods compared by the benchmark harness.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    /// Greedy ER modularity; the dendrogram's best level is the answer.
    Fg,
    /// Greedy degree-corrected modularity.
    FgDc,
    /// A detector on the whole network with `K` chosen by selection.
    Plain(Detector),
    /// The divide-and-conquer pipeline with the given detector.
    Distributed(Detector),
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Fg => "FG",
            Method::FgDc => "FG-DC",
            Method::Plain(Detector::Ssp) => "SSP",
            Method::Plain(Detector::Score) => "SCORE",
            Method::Plain(Detector::Vsbm) => "VSBM",
            Method::Distributed(Detector::Ssp) => "D-SSP",
            Method::Distributed(Detector::Score) => "D-SCORE",
            Method::Distributed(Detector::Vsbm) => "D-VSBM",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        [
            Method::Fg,
            Method::FgDc,
            Method::Plain(Detector::Ssp),
            Method::Plain(Detector::Score),
            Method::Plain(Detector::Vsbm),
            Method::Distributed(Detector::Ssp),
            Method::Distributed(Detector::Score),
            Method::Distributed(Detector::Vsbm),
        ]
        .into_iter()
        .find(|m| m.name().eq_ignore_ascii_case(name))
    }
}

/// Community labels of a method, plus group labels for the distributed ones.
#[derive(Debug, Clone, PartialEq)]
pub struct MethodOutput {
    pub communities: Labeling,
    pub groups: Option<Labeling>,
}

/// Runs one method. `cfg.k_max` caps `K` for the plain detectors and per
/// group for the distributed ones; the model kind and detector in `cfg` are
/// overridden by the method.
pub fn run_method<E: Executor, C: Clock>(
    g: &Graph,
    method: Method,
    cfg: &PipelineConfig,
    exec: &E,
    clock: &C,
) -> Result<MethodOutput> {
    match method {
        Method::Fg | Method::FgDc => {
            let kind = if method == Method::Fg { ModularityKind::Er } else { ModularityKind::Dc };
            let d = fast_greedy(g, kind)?;
            let (_, labels) = select_group_count(&d, GroupMode::Max)?;
            Ok(MethodOutput { communities: labels, groups: None })
        }
        Method::Plain(detector) => {
            let nodes: Vec<usize> = (0..g.node_count()).collect();
            let r = detect_group(g, &nodes, detector, cfg.k_max, cfg.lambda, group_seed(cfg.seed, 0), clock)?;
            Ok(MethodOutput { communities: r.labels, groups: None })
        }
        Method::Distributed(detector) => {
            let model = if detector == Detector::Score { ModelKind::Dcsbm } else { cfg.model };
            let cfg = PipelineConfig { model, detector, ..cfg.clone() };
            let report = run_pipeline_with(g, &cfg, exec, clock)?;
            Ok(MethodOutput { communities: report.communities, groups: Some(report.groups) })
        }
    }
}
