//! Simulation benchmark: generate replicates of a design, run each method
//! and summarize accuracy and time per network size.

use dcd_core::division::GroupMode;
use dcd_core::evaluation::nmi;
use dcd_core::generators::{sample_paper_simulation, SimulationInstance, SimulationKind, SIMULATION_GROUP_SIZES};
use dcd_core::pipeline::{run_method, Clock, Executor, Method, ModelKind, PipelineConfig};
use dcd_core::rng;
use dcd_core::detection::Detector;
use serde::Serialize;

use crate::error::{CliError, Result};

/// A family of simulated networks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Design {
    pub name: &'static str,
    pub kind: SimulationKind,
    pub default_n: usize,
    /// Fixed group sizes, or `None` for `n / 500` groups of five
    /// communities.
    fixed_groups: Option<&'static [usize]>,
}

/// Nodes per group in the growing designs.
pub const NODES_PER_GROUP: usize = 500;

const DESIGNS: [Design; 5] = [
    Design { name: "paper-sbm", kind: SimulationKind::Sbm, default_n: 1200, fixed_groups: Some(&SIMULATION_GROUP_SIZES) },
    Design { name: "paper-dcsbm", kind: SimulationKind::Dcsbm, default_n: 1200, fixed_groups: Some(&SIMULATION_GROUP_SIZES) },
    Design { name: "table1-small", kind: SimulationKind::Sbm, default_n: 5_000, fixed_groups: None },
    Design { name: "table1-medium", kind: SimulationKind::Sbm, default_n: 50_000, fixed_groups: None },
    Design { name: "table1-large", kind: SimulationKind::Sbm, default_n: 500_000, fixed_groups: None },
];

impl Design {
    pub fn from_name(name: &str) -> Option<Design> {
        DESIGNS.into_iter().find(|d| d.name == name)
    }

    pub fn names() -> impl Iterator<Item = &'static str> {
        DESIGNS.iter().map(|d| d.name)
    }

    pub fn with_kind(self, kind: SimulationKind) -> Design {
        Design { kind, ..self }
    }

    pub fn group_sizes(&self, n: usize) -> Vec<usize> {
        match self.fixed_groups {
            Some(sizes) => sizes.to_vec(),
            None => vec![5; (n / NODES_PER_GROUP).max(1)],
        }
    }

    pub fn model(&self) -> ModelKind {
        match self.kind {
            SimulationKind::Sbm => ModelKind::Sbm,
            SimulationKind::Dcsbm => ModelKind::Dcsbm,
        }
    }

    /// The distributed method, its plain counterpart and greedy modularity.
    pub fn default_methods(&self) -> Vec<Method> {
        match self.kind {
            SimulationKind::Sbm => vec![Method::Distributed(Detector::Ssp), Method::Plain(Detector::Ssp), Method::Fg],
            SimulationKind::Dcsbm => {
                vec![Method::Distributed(Detector::Score), Method::Plain(Detector::Score), Method::FgDc]
            }
        }
    }

    pub fn generate(&self, n: usize, seed: u64) -> Result<SimulationInstance> {
        Ok(sample_paper_simulation(self.kind, n, &self.group_sizes(n), seed)?)
    }
}

/// Seed of replicate `rep` at size `n`.
pub fn replicate_seed(seed: u64, n: usize, rep: usize) -> u64 {
    rng::derive_path(seed, &[n as u64, rep as u64])
}

#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub design: Design,
    pub sizes: Vec<usize>,
    pub reps: usize,
    pub methods: Vec<Method>,
    pub seed: u64,
    pub jobs: usize,
    /// Per-group cap for the distributed methods.
    pub k_max: usize,
    pub lambda: f64,
    pub group_mode: GroupMode,
}

impl BenchConfig {
    pub fn new(design: Design) -> Self {
        let defaults = PipelineConfig::new(design.model());
        BenchConfig {
            design,
            sizes: vec![design.default_n],
            reps: 1,
            methods: design.default_methods(),
            seed: 0,
            jobs: 1,
            k_max: defaults.k_max,
            lambda: defaults.lambda,
            group_mode: defaults.group_mode,
        }
    }
}

/// One method on one replicate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Record {
    pub n: usize,
    pub rep: usize,
    pub seed: u64,
    pub method: &'static str,
    /// `None` when the method failed.
    pub nmi: Option<f64>,
    pub g_nmi: Option<f64>,
    pub communities: Option<usize>,
    pub groups: Option<usize>,
    pub time_ms: Option<f64>,
}

/// Summary over the replicates of one method at one size.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Row {
    pub n: usize,
    #[serde(rename = "G")]
    pub g: usize,
    #[serde(rename = "K")]
    pub k: usize,
    pub method: &'static str,
    pub nmi_mean: Option<f64>,
    pub nmi_sd: Option<f64>,
    pub time_mean_ms: Option<f64>,
    pub g_nmi: Option<f64>,
    pub failed: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchResult {
    pub rows: Vec<Row>,
    pub records: Vec<Record>,
}

impl BenchResult {
    /// Same result with every wall-clock field cleared.
    pub fn without_timings(mut self) -> Self {
        self.rows.iter_mut().for_each(|r| r.time_mean_ms = None);
        self.records.iter_mut().for_each(|r| r.time_ms = None);
        self
    }
}

pub fn run_bench<E: Executor, C: Clock>(cfg: &BenchConfig, exec: &E, clock: &C) -> Result<BenchResult> {
    if cfg.reps == 0 {
        return Err(CliError::Usage("reps must be at least 1".into()));
    }
    if cfg.sizes.is_empty() || cfg.methods.is_empty() {
        return Err(CliError::Usage("need at least one size and one method".into()));
    }
    let mut rows = Vec::new();
    let mut records = Vec::new();
    for &n in &cfg.sizes {
        let sizes = cfg.design.group_sizes(n);
        let (g_true, k_true) = (sizes.len(), sizes.iter().sum::<usize>());
        let mut per_method: Vec<Vec<Record>> = vec![Vec::new(); cfg.methods.len()];
        for rep in 0..cfg.reps {
            let seed = replicate_seed(cfg.seed, n, rep);
            let inst = cfg.design.generate(n, seed)?;
            for (m, &method) in cfg.methods.iter().enumerate() {
                let k_max = match method {
                    // Plain detectors search `K` up to the true count over the whole network.
                    Method::Plain(_) => k_true.min(n),
                    _ => cfg.k_max,
                };
                let pcfg = PipelineConfig {
                    k_max,
                    lambda: cfg.lambda,
                    seed,
                    group_mode: cfg.group_mode,
                    parallelism: cfg.jobs,
                    ..PipelineConfig::new(cfg.design.model())
                };
                let start = clock.now_ms();
                let out = run_method(&inst.sample.graph, method, &pcfg, exec, clock);
                let time_ms = clock.now_ms() - start;
                let record = match out {
                    Ok(out) => Record {
                        n,
                        rep,
                        seed,
                        method: method.name(),
                        nmi: Some(nmi(&inst.sample.communities, &out.communities)?),
                        g_nmi: out.groups.as_ref().map(|g| nmi(&inst.sample.groups, g)).transpose()?,
                        communities: Some(out.communities.used_count()),
                        groups: out.groups.as_ref().map(|g| g.used_count()),
                        time_ms: Some(time_ms),
                    },
                    Err(_) => Record {
                        n,
                        rep,
                        seed,
                        method: method.name(),
                        nmi: None,
                        g_nmi: None,
                        communities: None,
                        groups: None,
                        time_ms: Some(time_ms),
                    },
                };
                per_method[m].push(record);
            }
        }
        for (m, recs) in per_method.into_iter().enumerate() {
            let nmis: Vec<f64> = recs.iter().filter_map(|r| r.nmi).collect();
            let g_nmis: Vec<f64> = recs.iter().filter_map(|r| r.g_nmi).collect();
            let times: Vec<f64> = recs.iter().filter_map(|r| r.time_ms).collect();
            rows.push(Row {
                n,
                g: g_true,
                k: k_true,
                method: cfg.methods[m].name(),
                nmi_mean: mean(&nmis),
                nmi_sd: sd(&nmis),
                time_mean_ms: mean(&times),
                g_nmi: mean(&g_nmis),
                failed: recs.len() - nmis.len(),
            });
            records.extend(recs);
        }
    }
    Ok(BenchResult { rows, records })
}

fn mean(xs: &[f64]) -> Option<f64> {
    (!xs.is_empty()).then(|| xs.iter().sum::<f64>() / xs.len() as f64)
}

/// Sample standard deviation; zero for a single value.
fn sd(xs: &[f64]) -> Option<f64> {
    let m = mean(xs)?;
    if xs.len() < 2 {
        return Some(0.0);
    }
    Some((xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64).sqrt())
}

/// Renders rows as CSV with a header taken from the field names.
pub fn to_csv<T: Serialize>(rows: &[T]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row).expect("CSV into memory");
    }
    String::from_utf8(w.into_inner().expect("CSV into memory")).expect("CSV is UTF-8")
}

#[cfg(test)]
mod tests {
    use super::*;
    use dcd_core::pipeline::{NoClock, Sequential};

    #[test]
    fn designs() {
        let t = Design::from_name("table1-small").unwrap();
        assert_eq!(t.group_sizes(5000), vec![5; 10]);
        assert_eq!(t.group_sizes(100), vec![5]);
        assert_eq!(Design::from_name("paper-sbm").unwrap().group_sizes(400), vec![2, 3, 3, 4]);
        assert!(Design::from_name("nope").is_none());
    }

    #[test]
    fn small_bench_is_deterministic() {
        let mut cfg = BenchConfig::new(Design::from_name("paper-sbm").unwrap());
        cfg.sizes = vec![200];
        cfg.reps = 2;
        let a = run_bench(&cfg, &Sequential, &NoClock).unwrap();
        let b = run_bench(&cfg, &Sequential, &NoClock).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.rows.len(), 3);
        assert_eq!(a.records.len(), 6);
        let csv = to_csv(&a.without_timings().rows);
        let header = csv.lines().next().unwrap();
        assert_eq!(header, "n,G,K,method,nmi_mean,nmi_sd,time_mean_ms,g_nmi,failed");
        assert!(csv.lines().nth(1).unwrap().starts_with("200,4,12,D-SSP,"));
    }
}
