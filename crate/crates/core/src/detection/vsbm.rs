use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use super::spectral::{detect_ssp, SpectralConfig};
use crate::error::{Error, Result};
use crate::graph::{Graph, Labeling};
use crate::math;
use crate::matrix::Matrix;
use crate::rng::{self, tag};

const PROB_FLOOR: f64 = 1e-10;
const MAX_RESTARTS: usize = 3;

/// Starting point of the variational iteration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum VemInit {
    /// SSP labels smoothed to 0.9 on the detected cluster.
    Spectral,
    /// Independent random rows.
    Random,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct VemConfig {
    pub k: usize,
    /// Stop when the relative change of the bound drops below this.
    pub tol: f64,
    pub max_sweeps: usize,
    pub init: VemInit,
    pub seed: u64,
}

impl VemConfig {
    pub fn new(k: usize, seed: u64) -> Self {
        VemConfig { k, tol: 1e-6, max_sweeps: 200, init: VemInit::Spectral, seed }
    }
}

/// Output of [`detect_vsbm`].
#[derive(Debug, Clone, PartialEq)]
pub struct VsbmFit {
    /// Row-wise argmax of `soft`.
    pub labels: Labeling,
    /// `n x k` variational posteriors; rows sum to one.
    pub soft: Matrix,
    pub pi: Vec<f64>,
    pub b: Matrix,
    /// Final evidence lower bound.
    pub elbo: f64,
    /// Bound after every sweep.
    pub elbo_trace: Vec<f64>,
    /// Number of collapse restarts used.
    pub restarts: usize,
}

/// Variational EM for the Bernoulli stochastic block model.
///
/// Each sweep updates the posterior rows one at a time (every update sees
/// the rows already refreshed in the sweep), then sets `pi` and `B` to their
/// exact maximizers given the posteriors. Both steps maximize the bound in
/// their own coordinates, so the bound never decreases. If a cluster loses
/// all its mass the fit restarts from a perturbed start, at most three
/// times.
pub fn detect_vsbm(g: &Graph, cfg: &VemConfig) -> Result<VsbmFit> {
    let n = g.node_count();
    let k = cfg.k;
    if k == 0 {
        return Err(Error::InvalidParameter("k must be at least 1".into()));
    }
    if k > n {
        return Err(Error::TooManyClusters { k, n });
    }
    if !(cfg.tol > 0.0) {
        return Err(Error::InvalidParameter("tol must be positive".into()));
    }
    let base = initial_posteriors(g, cfg)?;
    for attempt in 0..=MAX_RESTARTS {
        let mut tau = base.clone();
        if attempt > 0 {
            let mut rng = rng::stream(cfg.seed, &[tag::VEM, 1, attempt as u64]);
            let mix = 0.25 * attempt as f64;
            for row in tau.chunks_exact_mut(k) {
                let noise: Vec<f64> = (0..k).map(|_| rng.random::<f64>()).collect();
                let total: f64 = noise.iter().sum();
                for (t, z) in row.iter_mut().zip(&noise) {
                    *t = (1.0 - mix) * *t + mix * z / total;
                }
            }
        }
        if let Some(mut fit) = run(g, k, tau, cfg) {
            fit.restarts = attempt;
            return Ok(fit);
        }
    }
    Err(Error::ClusterCollapse(k))
}

/// Closed-form M-step: the `pi` and `B` that maximize the bound for fixed
/// `n x k` posteriors. `B` is clamped to `[1e-10, 1 - 1e-10]`.
pub fn vsbm_m_step(g: &Graph, soft: &Matrix) -> Result<(Vec<f64>, Matrix)> {
    let (n, k) = (g.node_count(), soft.cols());
    if soft.rows() != n {
        return Err(Error::LengthMismatch { left: soft.rows(), right: n });
    }
    if k == 0 {
        return Err(Error::InvalidParameter("posteriors need at least one column".into()));
    }
    let (pi, b) = m_step(&stats(g, soft.as_slice(), k), n, k);
    Ok((pi, Matrix::from_fn(k, k, |a, c| b[a * k + c])))
}

fn initial_posteriors(g: &Graph, cfg: &VemConfig) -> Result<Vec<f64>> {
    let (n, k) = (g.node_count(), cfg.k);
    if k == 1 {
        return Ok(vec![1.0; n]);
    }
    let mut tau = vec![0.0; n * k];
    match cfg.init {
        VemInit::Spectral => {
            let labels = match detect_ssp(g, &SpectralConfig::new(k, cfg.seed)) {
                Ok(fit) => fit.labels,
                Err(_) => return initial_posteriors(g, &VemConfig { init: VemInit::Random, ..cfg.clone() }),
            };
            let off = 0.1 / (k - 1) as f64;
            for i in 0..n {
                for c in 0..k {
                    tau[i * k + c] = if c == labels.get(i) { 0.9 } else { off };
                }
            }
        }
        VemInit::Random => {
            let mut rng = rng::stream(cfg.seed, &[tag::VEM, 0]);
            for row in tau.chunks_exact_mut(k) {
                row.iter_mut().for_each(|t| *t = rng.random::<f64>() + 1e-3);
                let total: f64 = row.iter().sum();
                row.iter_mut().for_each(|t| *t /= total);
            }
        }
    }
    Ok(tau)
}

// Sufficient statistics of the posteriors: column totals `S_l`, the ordered
// edge mass `E_kl = sum_{i != j} tau_ik tau_jl A_ij` and the ordered pair mass
// `P_kl = S_k S_l - sum_i tau_ik tau_il`.
struct Stats {
    col: Vec<f64>,
    edge: Vec<f64>,
    pair: Vec<f64>,
}

fn stats(g: &Graph, tau: &[f64], k: usize) -> Stats {
    let n = g.node_count();
    let mut col = vec![0.0; k];
    let mut self_pair = vec![0.0; k * k];
    let mut edge = vec![0.0; k * k];
    let mut nb = vec![0.0; k];
    for i in 0..n {
        let ti = &tau[i * k..(i + 1) * k];
        for a in 0..k {
            col[a] += ti[a];
            for b in 0..k {
                self_pair[a * k + b] += ti[a] * ti[b];
            }
        }
        nb.iter_mut().for_each(|x| *x = 0.0);
        for &j in g.neighbors(i) {
            let tj = &tau[j as usize * k..(j as usize + 1) * k];
            nb.iter_mut().zip(tj).for_each(|(x, t)| *x += t);
        }
        for a in 0..k {
            for b in 0..k {
                edge[a * k + b] += ti[a] * nb[b];
            }
        }
    }
    let pair = (0..k * k).map(|ab| col[ab / k] * col[ab % k] - self_pair[ab]).collect();
    Stats { col, edge, pair }
}

fn m_step(s: &Stats, n: usize, k: usize) -> (Vec<f64>, Vec<f64>) {
    let pi = s.col.iter().map(|c| c / n as f64).collect();
    let b = (0..k * k)
        .map(|ab| {
            let (a, c) = (ab / k, ab % k);
            // Average the two orientations so B stays exactly symmetric.
            let e = 0.5 * (s.edge[ab] + s.edge[c * k + a]);
            let p = 0.5 * (s.pair[ab] + s.pair[c * k + a]);
            if p > 0.0 {
                (e / p).clamp(PROB_FLOOR, 1.0 - PROB_FLOOR)
            } else {
                PROB_FLOOR
            }
        })
        .collect();
    (pi, b)
}

fn elbo(s: &Stats, tau: &[f64], pi: &[f64], b: &[f64], k: usize) -> f64 {
    let mut total = 0.0;
    for row in tau.chunks_exact(k) {
        for (t, p) in row.iter().zip(pi) {
            if *t > 0.0 {
                total += t * (math::ln(*p) - math::ln(*t));
            }
        }
    }
    for ab in 0..k * k {
        let (e, p) = (s.edge[ab], s.pair[ab]);
        total += 0.5 * (e * math::ln(b[ab]) + (p - e) * math::ln_1p(-b[ab]));
    }
    total
}

fn run(g: &Graph, k: usize, mut tau: Vec<f64>, cfg: &VemConfig) -> Option<VsbmFit> {
    let n = g.node_count();
    let mass_floor = 1e-9;
    let s = stats(g, &tau, k);
    let (mut pi, mut b) = m_step(&s, n, k);
    if s.col.iter().any(|&c| c < mass_floor) {
        return None;
    }
    let mut col = s.col;
    let mut trace = Vec::new();
    let mut nb = vec![0.0; k];
    let mut logit = vec![0.0; k * k];
    let mut log_q = vec![0.0; k * k];
    let mut row = vec![0.0; k];
    for _sweep in 0..cfg.max_sweeps.max(1) {
        for ab in 0..k * k {
            log_q[ab] = math::ln_1p(-b[ab]);
            logit[ab] = math::ln(b[ab]) - log_q[ab];
        }
        let log_pi: Vec<f64> = pi.iter().map(|&p| math::ln(p)).collect();
        for i in 0..n {
            nb.iter_mut().for_each(|x| *x = 0.0);
            for &j in g.neighbors(i) {
                let tj = &tau[j as usize * k..(j as usize + 1) * k];
                nb.iter_mut().zip(tj).for_each(|(x, t)| *x += t);
            }
            let ti = &tau[i * k..(i + 1) * k];
            for a in 0..k {
                let mut v = log_pi[a];
                for c in 0..k {
                    v += nb[c] * logit[a * k + c] + (col[c] - ti[c]) * log_q[a * k + c];
                }
                row[a] = v;
            }
            let top = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let mut total = 0.0;
            for r in row.iter_mut() {
                *r = math::exp(*r - top);
                total += *r;
            }
            let ti = &mut tau[i * k..(i + 1) * k];
            for c in 0..k {
                let new = row[c] / total;
                col[c] += new - ti[c];
                ti[c] = new;
            }
        }
        let s = stats(g, &tau, k);
        if s.col.iter().any(|&c| c < mass_floor) {
            return None;
        }
        col = s.col.clone();
        (pi, b) = m_step(&s, n, k);
        let value = elbo(&s, &tau, &pi, &b, k);
        let done = trace.last().is_some_and(|&prev: &f64| (value - prev).abs() <= cfg.tol * value.abs().max(1.0));
        trace.push(value);
        if done {
            break;
        }
    }
    let labels: Vec<u32> = tau
        .chunks_exact(k)
        .map(|r| (0..k).fold(0, |best, c| if r[c] > r[best] { c } else { best }) as u32)
        .collect();
    let labels = Labeling::new(labels, k).ok()?;
    if labels.used_count() < k {
        return None;
    }
    Some(VsbmFit {
        labels,
        soft: Matrix::from_fn(n, k, |i, c| tau[i * k + c]),
        pi,
        b: Matrix::from_fn(k, k, |a, c| b[a * k + c]),
        elbo: *trace.last()?,
        elbo_trace: trace,
        restarts: 0,
    })
}
