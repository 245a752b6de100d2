//! Grouped stochastic block models: parameter checks and samplers.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::{Graph, Labeling};
use crate::math;
use crate::matrix::Matrix;
use crate::rng::{self, tag};

/// Block probabilities, community frequencies and the community-to-group map.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockModel {
    probs: Matrix,
    pi: Vec<f64>,
    group_of: Vec<usize>,
    groups: usize,
}

impl BlockModel {
    /// Validates and builds a model. `group_of` is zero-based and must use
    /// every group index `0..G`.
    pub fn new(probs: Matrix, pi: Vec<f64>, group_of: Vec<usize>) -> Result<Self> {
        let k = probs.rows();
        if k == 0 || probs.cols() != k {
            return Err(Error::InvalidModel(format!("block matrix must be square and non-empty, got {}x{}", probs.rows(), probs.cols())));
        }
        if !probs.is_symmetric(1e-12) {
            return Err(Error::InvalidModel("block matrix is not symmetric".into()));
        }
        if let Some(p) = probs.as_slice().iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(Error::InvalidModel(format!("probability {p} outside [0, 1]")));
        }
        if pi.len() != k || group_of.len() != k {
            return Err(Error::InvalidModel(format!(
                "expected {k} community frequencies and group indices, got {} and {}",
                pi.len(),
                group_of.len()
            )));
        }
        if pi.iter().any(|p| !(*p >= 0.0)) || (pi.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidModel("community frequencies must be non-negative and sum to 1".into()));
        }
        let groups = group_of.iter().max().map_or(0, |g| g + 1);
        let mut used = vec![false; groups];
        for &g in &group_of {
            used[g] = true;
        }
        if used.iter().any(|u| !u) {
            return Err(Error::InvalidModel("group indices must cover 0..G".into()));
        }
        Ok(BlockModel { probs, pi, group_of, groups })
    }

    /// Equal-frequency model whose groups hold `group_sizes[t]` consecutive communities.
    pub fn grouped_uniform(probs: Matrix, group_sizes: &[usize]) -> Result<Self> {
        let group_of: Vec<usize> = group_sizes.iter().enumerate().flat_map(|(t, &s)| core::iter::repeat_n(t, s)).collect();
        let k = group_of.len();
        BlockModel::new(probs, vec![1.0 / k as f64; k], group_of)
    }

    pub fn community_count(&self) -> usize {
        self.pi.len()
    }

    pub fn group_count(&self) -> usize {
        self.groups
    }

    pub fn probs(&self) -> &Matrix {
        &self.probs
    }

    #[inline]
    pub fn prob(&self, a: usize, b: usize) -> f64 {
        self.probs[(a, b)]
    }

    pub fn pi(&self) -> &[f64] {
        &self.pi
    }

    pub fn group_of(&self) -> &[usize] {
        &self.group_of
    }

    /// Group frequencies `Pi_t = sum of pi_a over communities a in group t`.
    pub fn group_frequencies(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.groups];
        for (a, &g) in self.group_of.iter().enumerate() {
            out[g] += self.pi[a];
        }
        out
    }

    /// Average connection probability `B0 = sum_ab pi_a pi_b B_ab`.
    pub fn average_probability(&self) -> f64 {
        weighted_average(&self.probs, &self.pi)
    }

    /// Same structure with every block probability multiplied by `scale`.
    pub fn scaled(&self, scale: f64) -> Result<Self> {
        let k = self.community_count();
        let probs = Matrix::from_fn(k, k, |a, b| self.probs[(a, b)] * scale);
        BlockModel::new(probs, self.pi.clone(), self.group_of.clone())
    }
}

fn weighted_average(b: &Matrix, w: &[f64]) -> f64 {
    let k = w.len();
    let mut s = 0.0;
    for a in 0..k {
        for c in 0..k {
            s += w[a] * w[c] * b[(a, c)];
        }
    }
    s
}

/// Discrete law of the degree parameters: `theta = values[u]` with probability `probs[u]`.
#[derive(Debug, Clone, PartialEq)]
pub struct DegreeLaw {
    values: Vec<f64>,
    probs: Vec<f64>,
}

impl DegreeLaw {
    pub fn new(values: Vec<f64>, probs: Vec<f64>) -> Result<Self> {
        if values.is_empty() || values.len() != probs.len() {
            return Err(Error::InvalidDegreeLaw("values and probabilities must be non-empty and of equal length".into()));
        }
        if values.iter().any(|x| !(*x > 0.0) || !x.is_finite()) {
            return Err(Error::InvalidDegreeLaw("degree values must be positive".into()));
        }
        if probs.iter().any(|p| !(*p >= 0.0)) || (probs.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidDegreeLaw("probabilities must be non-negative and sum to 1".into()));
        }
        let mean: f64 = values.iter().zip(&probs).map(|(x, p)| x * p).sum();
        if (mean - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidDegreeLaw(format!("mean degree parameter must be 1, got {mean}")));
        }
        Ok(DegreeLaw { values, probs })
    }

    /// `theta = 1` for every node.
    pub fn constant() -> Self {
        DegreeLaw { values: vec![1.0], probs: vec![1.0] }
    }

    /// Two equiprobable values `x` and `m x` with `x = 2 / (m + 1)`, so the mean is 1.
    pub fn two_point(m: f64) -> Result<Self> {
        // Each value in a single rounding, so m = 3/2 gives exactly 0.8 and 1.2.
        DegreeLaw::new(vec![2.0 / (m + 1.0), 2.0 * m / (m + 1.0)], vec![0.5, 0.5])
    }

    /// The simulation law with `m = 3/2`: theta in {0.8, 1.2}.
    pub fn simulation_default() -> Self {
        DegreeLaw::two_point(1.5).expect("valid law")
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }
}

/// Outcome of checking the grouping condition on a plain SBM.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SbmCondition {
    pub holds: bool,
    pub b0: f64,
}

/// Checks that every same-group block probability (diagonal included) is
/// strictly above `B0` and every cross-group one strictly below it.
pub fn check_condition_sbm(model: &BlockModel) -> SbmCondition {
    let b0 = model.average_probability();
    let k = model.community_count();
    let g = model.group_of();
    let holds = (0..k).all(|a| {
        (0..k).all(|b| {
            let p = model.prob(a, b);
            if g[a] == g[b] {
                p > b0
            } else {
                p < b0
            }
        })
    });
    SbmCondition { holds, b0 }
}

/// Community grouping implied by the sign of `B_ab - B0`.
///
/// Returns `None` unless the relation `B_ab > B0` is an equivalence whose
/// classes separate strictly, which is exactly when some grouping satisfies
/// the condition. The result is numbered by first appearance.
pub fn implied_grouping(model: &BlockModel) -> Option<Vec<usize>> {
    let b0 = model.average_probability();
    let k = model.community_count();
    let mut group = vec![usize::MAX; k];
    let mut next = 0;
    for a in 0..k {
        if group[a] != usize::MAX {
            continue;
        }
        for b in a..k {
            if model.prob(a, b) > b0 {
                if group[b] != usize::MAX {
                    return None;
                }
                group[b] = next;
            }
        }
        if group[a] != next {
            return None;
        }
        next += 1;
    }
    let consistent = (0..k).all(|a| {
        (0..k).all(|b| {
            let p = model.prob(a, b);
            if group[a] == group[b] {
                p > b0
            } else {
                p < b0
            }
        })
    });
    consistent.then_some(group)
}

/// Outcome of checking the degree-corrected grouping condition.
#[derive(Debug, Clone, PartialEq)]
pub struct DcCondition {
    pub holds: bool,
    /// `Gamma = W - (W 1)(W 1)^T` for the normalized matrix `W`.
    pub gamma: Matrix,
}

/// Checks the sign pattern of the normalized matrix `Gamma` against the
/// model's grouping: positive for same-group pairs (diagonal included),
/// negative across groups.
///
/// The degree parameter is independent of the community label, so the joint
/// frequency of community `a` and degree value `u` is `pi_a * probs_u`.
pub fn check_condition_dcsbm(model: &BlockModel, law: &DegreeLaw) -> Result<DcCondition> {
    let k = model.community_count();
    let pi_tilde: Vec<f64> = (0..k).map(|a| law.probs().iter().map(|p| model.pi()[a] * p).sum()).collect();
    let b0 = weighted_average(model.probs(), &pi_tilde);
    if !(b0 > 0.0) {
        return Err(Error::ZeroAverageProbability);
    }
    let w = Matrix::from_fn(k, k, |a, b| pi_tilde[a] * pi_tilde[b] * model.prob(a, b) / b0);
    let row: Vec<f64> = (0..k).map(|a| w.row(a).iter().sum()).collect();
    let gamma = Matrix::from_fn(k, k, |a, b| w[(a, b)] - row[a] * row[b]);
    let g = model.group_of();
    let holds = (0..k).all(|a| (0..k).all(|b| if g[a] == g[b] { gamma[(a, b)] > 0.0 } else { gamma[(a, b)] < 0.0 }));
    Ok(DcCondition { holds, gamma })
}

/// A sampled network with its planted labels.
#[derive(Debug, Clone)]
pub struct NetworkSample {
    pub graph: Graph,
    pub communities: Labeling,
    pub groups: Labeling,
    /// Degree parameters, present for degree-corrected samples.
    pub theta: Option<Vec<f64>>,
}

/// Samples an SBM network: labels i.i.d. from `pi`, edges independent
/// Bernoulli(`B_{c_i c_j}`).
pub fn sample_sbm(model: &BlockModel, n: usize, seed: u64) -> NetworkSample {
    let mut s = sample_classes(model, &DegreeLaw::constant(), n, seed);
    s.theta = None;
    s
}

/// Samples a degree-corrected network: `theta_i` i.i.d. from `law`, edge
/// `i < j` present with probability `min(1, theta_i theta_j B_{c_i c_j})`.
pub fn sample_dcsbm(model: &BlockModel, law: &DegreeLaw, n: usize, seed: u64) -> NetworkSample {
    sample_classes(model, law, n, seed)
}

fn pick(cumulative: &[f64], u: f64) -> usize {
    cumulative.iter().position(|&c| u < c).unwrap_or(cumulative.len() - 1)
}

fn cumulative(p: &[f64]) -> Vec<f64> {
    let mut acc = 0.0;
    p.iter()
        .map(|x| {
            acc += x;
            acc
        })
        .collect()
}

// Nodes sharing (community, degree value) form a class; every class pair has
// one edge probability, so edges are drawn per class pair with geometric
// skipping in O(edges + classes^2).
fn sample_classes(model: &BlockModel, law: &DegreeLaw, n: usize, seed: u64) -> NetworkSample {
    let k = model.community_count();
    let m = law.values().len();
    let pi_cum = cumulative(model.pi());
    let law_cum = cumulative(law.probs());

    let mut label_rng = rng::stream(seed, &[tag::NODE_LABELS]);
    let mut comm = Vec::with_capacity(n);
    let mut degree_idx = Vec::with_capacity(n);
    for _ in 0..n {
        comm.push(pick(&pi_cum, label_rng.random::<f64>()));
        degree_idx.push(if m == 1 { 0 } else { pick(&law_cum, label_rng.random::<f64>()) });
    }

    let classes = k * m;
    let mut members: Vec<Vec<u32>> = vec![Vec::new(); classes];
    for i in 0..n {
        members[comm[i] * m + degree_idx[i]].push(i as u32);
    }

    let mut edges = Vec::new();
    for p in 0..classes {
        for q in p..classes {
            let (mp, mq) = (members[p].len() as u64, members[q].len() as u64);
            let pairs = if p == q { mp * mp.saturating_sub(1) / 2 } else { mp * mq };
            if pairs == 0 {
                continue;
            }
            let prob = (law.values()[p % m] * law.values()[q % m] * model.prob(p / m, q / m)).min(1.0);
            let mut r = rng::stream(seed, &[tag::EDGES, p as u64, q as u64]);
            for_each_success(prob, pairs, &mut r, |idx| {
                let (a, b) = if p == q {
                    let (i, j) = triangle_pair(idx);
                    (members[p][i as usize], members[p][j as usize])
                } else {
                    (members[p][(idx / mq) as usize], members[q][(idx % mq) as usize])
                };
                edges.push((a as usize, b as usize));
            });
        }
    }
    let graph = Graph::from_edges(n, &edges).expect("sampled edges are valid");
    let theta = degree_idx.iter().map(|&u| law.values()[u]).collect();
    let groups = comm.iter().map(|&a| model.group_of()[a] as u32).collect();
    NetworkSample {
        graph,
        communities: Labeling::new(comm.iter().map(|&a| a as u32).collect(), k).expect("labels in range"),
        groups: Labeling::new(groups, model.group_count()).expect("groups in range"),
        theta: Some(theta),
    }
}

/// Calls `emit` with the index of every success among `trials` independent
/// Bernoulli(`prob`) trials, in increasing order.
fn for_each_success<R: Rng>(prob: f64, trials: u64, rng: &mut R, mut emit: impl FnMut(u64)) {
    if prob <= 0.0 {
        return;
    }
    if prob >= 1.0 {
        (0..trials).for_each(emit);
        return;
    }
    let log_q = math::ln_1p(-prob);
    let mut idx: u64 = 0;
    loop {
        let u = 1.0 - rng.random::<f64>();
        let skip = math::floor(math::ln(u) / log_q);
        if skip >= (trials - idx) as f64 {
            return;
        }
        idx += skip as u64;
        emit(idx);
        idx += 1;
        if idx >= trials {
            return;
        }
    }
}

/// Maps `0..n(n-1)/2` onto pairs `(i, j)` with `i < j`, ordered by `j` then `i`.
pub(crate) fn triangle_pair(idx: u64) -> (u64, u64) {
    let mut j = math::floor((1.0 + math::sqrt(1.0 + 8.0 * idx as f64)) / 2.0) as u64;
    while j * (j - 1) / 2 > idx {
        j -= 1;
    }
    while (j + 1) * j / 2 <= idx {
        j += 1;
    }
    (idx - j * (j - 1) / 2, j)
}

/// Which model family a simulated instance comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum SimulationKind {
    Sbm,
    Dcsbm,
}

/// Group sizes of the four-group, twelve-community simulation design.
pub const SIMULATION_GROUP_SIZES: [usize; 4] = [2, 3, 3, 4];

/// Upper bound on whole-matrix redraws in [`draw_grouped_block_model`].
pub const MAX_BLOCK_DRAWS: usize = 100_000;

/// A generated simulation instance.
#[derive(Debug, Clone)]
pub struct SimulationInstance {
    pub model: BlockModel,
    pub law: Option<DegreeLaw>,
    pub sample: NetworkSample,
    /// Number of block matrices drawn before one satisfied the condition.
    pub draws: usize,
}

/// Draws a grouped block matrix: same-group entries ~ Unif(0.01, 1),
/// cross-group entries ~ Unif(0, 0.01), uniform community frequencies.
/// Whole matrices are redrawn until the SBM grouping condition holds.
pub fn draw_grouped_block_model(group_sizes: &[usize], seed: u64) -> Result<(BlockModel, usize)> {
    if group_sizes.is_empty() || group_sizes.contains(&0) {
        return Err(Error::InvalidParameter(format!("group sizes must be non-empty and positive, got {group_sizes:?}")));
    }
    let group_of: Vec<usize> = group_sizes.iter().enumerate().flat_map(|(t, &s)| core::iter::repeat_n(t, s)).collect();
    let k = group_of.len();
    let pi = vec![1.0 / k as f64; k];
    for draw in 0..MAX_BLOCK_DRAWS {
        let mut r = rng::stream(seed, &[tag::BLOCK_MATRIX, draw as u64]);
        let mut probs = Matrix::zeros(k, k);
        for a in 0..k {
            for b in a..k {
                let u: f64 = r.random();
                let p = if group_of[a] == group_of[b] { 0.01 + 0.99 * u } else { 0.01 * u };
                probs[(a, b)] = p;
                probs[(b, a)] = p;
            }
        }
        let model = BlockModel::new(probs, pi.clone(), group_of.clone())?;
        if check_condition_sbm(&model).holds {
            return Ok((model, draw + 1));
        }
    }
    Err(Error::ConditionNotMet(MAX_BLOCK_DRAWS))
}

/// Generates a full simulation instance of `n` nodes for the given group sizes.
pub fn sample_paper_simulation(kind: SimulationKind, n: usize, group_sizes: &[usize], seed: u64) -> Result<SimulationInstance> {
    let (model, draws) = draw_grouped_block_model(group_sizes, seed)?;
    let (law, sample) = match kind {
        SimulationKind::Sbm => (None, sample_sbm(&model, n, seed)),
        SimulationKind::Dcsbm => {
            let law = DegreeLaw::simulation_default();
            let sample = sample_dcsbm(&model, &law, n, seed);
            (Some(law), sample)
        }
    };
    Ok(SimulationInstance { model, law, sample, draws })
}
