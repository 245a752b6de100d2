//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Run a subset with `cargo test -p dcd --test acceptance -- 2 5`. The
//! process fails when any criterion fails, except for failures caused by
//! missing hardware (fewer cores than the speedup check needs), which are
//! reported but do not fail the run.

use std::fs;
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use dcd::bench::{run_bench, BenchConfig, Design, Record};
use dcd::{MonotonicClock, Threads};
use dcd_core::detection::{detect_ssp, detect_vsbm, Detector, SpectralConfig, VemConfig};
use dcd_core::division::{fast_greedy, modularity_dc, modularity_er, ModularityKind};
use dcd_core::evaluation::{masked_link_eval, nmi};
use dcd_core::generators::{
    check_condition_sbm, draw_grouped_block_model, sample_paper_simulation, sample_sbm, BlockModel, SimulationKind,
    SIMULATION_GROUP_SIZES,
};
use dcd_core::pipeline::{run_pipeline_with, Method, ModelKind, NoClock, PipelineConfig, Sequential};
use dcd_core::selection::{select_k, DEFAULT_LAMBDA};
use dcd_core::{Graph, Labeling, Matrix};

struct Outcome {
    pass: bool,
    detail: String,
    /// The failure comes from the machine, not the implementation.
    hardware_limited: bool,
}

impl Outcome {
    fn new(pass: bool, detail: String) -> Self {
        Outcome { pass, detail, hardware_limited: false }
    }
}

/// Runs a criterion and returns its labelled outcomes.
type Criterion = fn() -> Vec<(String, Outcome)>;

fn median(xs: &[f64]) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

fn bench(design: &str, sizes: &[usize], reps: usize, methods: &[Method], seed: u64) -> Vec<Record> {
    let cfg = BenchConfig {
        sizes: sizes.to_vec(),
        reps,
        methods: methods.to_vec(),
        seed,
        ..BenchConfig::new(Design::from_name(design).expect("known design"))
    };
    run_bench(&cfg, &Sequential, &MonotonicClock::new()).expect("bench runs").records
}

/// NMI values of one method at one size; failed runs count as zero.
fn nmis(records: &[Record], n: usize, method: Method) -> Vec<f64> {
    records.iter().filter(|r| r.n == n && r.method == method.name()).map(|r| r.nmi.unwrap_or(0.0)).collect()
}

fn criterion_1() -> Outcome {
    let records = bench("table1-small", &[5000], 5, &[Method::Distributed(Detector::Ssp)], 1);
    let nmi: Vec<f64> = records.iter().map(|r| r.nmi.unwrap_or(0.0)).collect();
    let g_nmi: Vec<f64> = records.iter().map(|r| r.g_nmi.unwrap_or(0.0)).collect();
    let slowest = records.iter().filter_map(|r| r.time_ms).fold(0.0, f64::max) / 1000.0;
    let (m, g) = (nmi.iter().sum::<f64>() / 5.0, g_nmi.iter().sum::<f64>() / 5.0);
    Outcome::new(
        m >= 0.80 && g >= 0.90 && slowest < 600.0 && records.len() == 5,
        format!("n=5000 G=10 K=50 D-SSP x5: mean NMI {m:.3} (>= 0.80), mean G-NMI {g:.3} (>= 0.90), slowest replicate {slowest:.1} s (< 600 s)"),
    )
}

fn criterion_2() -> Outcome {
    let (dssp, fg) = (Method::Distributed(Detector::Ssp), Method::Fg);
    let records = bench("paper-sbm", &[400, 800, 1600], 20, &[dssp, fg], 2);
    let med: Vec<f64> = [400, 800, 1600].iter().map(|&n| median(&nmis(&records, n, dssp))).collect();
    let fg_1600 = median(&nmis(&records, 1600, fg));
    let increasing = med.windows(2).all(|w| w[1] > w[0]);
    let margin = med[2] - fg_1600;
    Outcome::new(
        increasing && margin >= 0.2,
        format!(
            "D-SSP median NMI {:.3} / {:.3} / {:.3} at n=400/800/1600 (strictly increasing: {increasing}); FG median at 1600 {fg_1600:.3}, margin {margin:.3} (>= 0.2)",
            med[0], med[1], med[2]
        ),
    )
}

fn criterion_3() -> Outcome {
    let dscore = Method::Distributed(Detector::Score);
    let records = bench("paper-dcsbm", &[1600], 20, &[dscore], 3);
    let m = median(&nmis(&records, 1600, dscore));
    Outcome::new(m >= 0.8, format!("D-SCORE median NMI {m:.3} at n=1600 over 20 reps (>= 0.8)"))
}

fn criterion_4() -> Outcome {
    // Entries in hundredths so the average probability is an exact fraction.
    let b1 = [[30, 80, 1, 1], [80, 30, 2, 2], [1, 2, 30, 90], [1, 2, 90, 30]];
    let b2 = [[80, 30, 2, 2], [30, 70, 1, 1], [2, 1, 90, 30], [2, 1, 30, 90]];
    let partitions: Vec<Vec<usize>> = (0..4usize.pow(4))
        .map(|code| (0..4).map(|i| code / 4usize.pow(i) % 4).collect::<Vec<usize>>())
        .filter(|p| p[0] == 0 && (1..4).all(|i| p[i] <= p[..i].iter().max().unwrap() + 1))
        .collect();
    let mut ok = partitions.len() == 15;
    let mut details = Vec::new();
    for (name, b) in [("B1", b1), ("B2", b2)] {
        let rows: Vec<Vec<f64>> = b.iter().map(|r| r.iter().map(|&x| f64::from(x) / 100.0).collect()).collect();
        let probs = Matrix::from_rows(&rows);
        let model = |g: Vec<usize>| BlockModel::new(probs.clone(), vec![0.25; 4], g).unwrap();
        let c = check_condition_sbm(&model(vec![0, 0, 1, 1]));
        let exact = f64::from(b.iter().flatten().sum::<i32>()) / 1600.0;
        let passing: Vec<&Vec<usize>> = partitions.iter().filter(|p| check_condition_sbm(&model((*p).clone())).holds).collect();
        ok &= c.holds && (c.b0 - exact).abs() < 1e-12 && passing == [&vec![0, 0, 1, 1]];
        details.push(format!("{name}: holds {}, B0 {:.5} (exact {exact:.5}), {} of 15 groupings pass", c.holds, c.b0, passing.len()));
    }
    Outcome::new(ok, details.join("; "))
}

/// Modularity straight from the adjacency over ordered pairs, as one
/// integer fraction.
fn brute_force(g: &Graph, labels: &[u32], kind: ModularityKind) -> f64 {
    let n = g.node_count();
    let a = |i: usize, j: usize| i128::from(g.has_edge(i, j));
    let d: Vec<i128> = (0..n).map(|i| (0..n).map(|j| a(i, j)).sum()).collect();
    let (l, nn) = (d.iter().sum::<i128>(), n as i128);
    let mut num = 0;
    for i in 0..n {
        for j in 0..n {
            if labels[i] == labels[j] {
                num += match kind {
                    ModularityKind::Er => nn * nn * a(i, j) - l,
                    ModularityKind::Dc => l * a(i, j) - d[i] * d[j],
                };
            }
        }
    }
    let den = match kind {
        ModularityKind::Er => l * nn * nn,
        ModularityKind::Dc => l * l,
    };
    num as f64 / den as f64
}

fn criterion_5() -> Outcome {
    let mut state = 0x9e37_79b9_7f4a_7c15u64;
    let mut next = move || {
        state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        state >> 33
    };
    let (mut graphs, mut exact, mut levels, mut worst) = (0, 0, 0, 0.0f64);
    while graphs < 200 {
        let n = 1 + next() as usize % 8;
        let p = (1 + next() % 9) as f64 / 10.0;
        let edges: Vec<(usize, usize)> = (0..n)
            .flat_map(|j| (0..j).map(move |i| (i, j)))
            .filter(|_| (next() % 1000) as f64 / 1000.0 < p)
            .collect();
        let g = Graph::from_edges(n, &edges).unwrap();
        if g.edge_count() == 0 {
            continue;
        }
        graphs += 1;
        let raw: Vec<u32> = (0..n).map(|_| (next() % 4) as u32).collect();
        let e = Labeling::from_raw(&raw);
        let er = modularity_er(&g, &e).unwrap() == brute_force(&g, e.as_slice(), ModularityKind::Er);
        let dc = modularity_dc(&g, &e).unwrap() == brute_force(&g, e.as_slice(), ModularityKind::Dc);
        exact += usize::from(er && dc);
        let mut all = true;
        for kind in [ModularityKind::Er, ModularityKind::Dc] {
            let d = fast_greedy(&g, kind).unwrap();
            for j in 1..=n {
                let err = (d.modularity_at(j) - brute_force(&g, d.labeling_at(j).as_slice(), kind)).abs();
                worst = worst.max(err);
                all &= err <= 1e-12;
            }
        }
        levels += usize::from(all);
    }
    Outcome::new(
        exact == 200 && levels == 200,
        format!("exact modularity on {exact}/200 graphs; dendrogram levels within 1e-12 on {levels}/200 (worst {worst:.1e})"),
    )
}

fn criterion_6() -> Outcome {
    let model =
        BlockModel::grouped_uniform(Matrix::from_rows(&[[0.5, 0.05], [0.05, 0.5]]), &[1, 1]).unwrap();
    let (mut ssp, mut vsbm, mut monotone) = (0, 0, 0);
    for seed in 0..100 {
        let s = sample_sbm(&model, 200, seed);
        let truth = &s.communities;
        if let Ok(fit) = detect_ssp(&s.graph, &SpectralConfig::new(2, seed)) {
            ssp += usize::from(nmi(truth, &fit.labels).unwrap() == 1.0);
        }
        if let Ok(fit) = detect_vsbm(&s.graph, &VemConfig::new(2, seed)) {
            vsbm += usize::from(nmi(truth, &fit.labels).unwrap() == 1.0);
            // Allow only floating-point reassociation noise.
            monotone += usize::from(fit.elbo_trace.windows(2).all(|w| w[1] >= w[0] - 1e-12 * w[0].abs()));
        }
    }
    Outcome::new(
        ssp >= 95 && vsbm >= 95 && monotone == 100,
        format!("NMI = 1 for SSP {ssp}/100 and VSBM {vsbm}/100 (>= 95); bound non-decreasing on {monotone}/100 runs"),
    )
}

fn criterion_7() -> Outcome {
    let b = Matrix::from_fn(3, 3, |a, c| if a == c { 0.3 } else { 0.05 });
    let model = BlockModel::grouped_uniform(b, &[1, 1, 1]).unwrap();
    let mut hits = 0;
    for seed in 0..100 {
        let s = sample_sbm(&model, 600, seed);
        let r = select_k(&s.graph, 6, Detector::Ssp, DEFAULT_LAMBDA, seed);
        hits += usize::from(r.is_ok_and(|r| r.k_hat == 3));
    }
    Outcome::new(hits >= 90, format!("K = 3 selected in {hits}/100 runs at n=600, within 0.3, across 0.05, K_max 6 (>= 90)"))
}

fn criterion_8() -> Outcome {
    let masks = [0.1, 0.5, 0.9];
    let mut per_mask = vec![Vec::new(); masks.len()];
    let mut failed = 0;
    for rep in 0..10u64 {
        let inst = sample_paper_simulation(SimulationKind::Sbm, 1200, &SIMULATION_GROUP_SIZES, 800 + rep).unwrap();
        let cfg = PipelineConfig { seed: rep, ..PipelineConfig::new(ModelKind::Sbm) };
        for (m, &p) in masks.iter().enumerate() {
            match masked_link_eval(&inst.sample.graph, &cfg, p, rep, &Sequential, &NoClock) {
                Ok((auc, _)) => per_mask[m].push(auc),
                Err(_) => {
                    failed += 1;
                    per_mask[m].push(0.5);
                }
            }
        }
    }
    let med: Vec<f64> = per_mask.iter().map(|v| median(v)).collect();
    let nonincreasing = med.windows(2).all(|w| w[1] <= w[0]);
    Outcome::new(
        med[0] >= 0.9 && nonincreasing,
        format!(
            "median AUC {:.3} / {:.3} / {:.3} at mask 0.1/0.5/0.9 (first >= 0.9, nonincreasing: {nonincreasing}); {failed} failed fits scored 0.5",
            med[0], med[1], med[2]
        ),
    )
}

/// Simulation-design graph scaled to a fixed mean degree.
fn sparse_instance(n: usize, seed: u64) -> Graph {
    const MEAN_DEGREE: f64 = 20.0;
    let (model, _) = draw_grouped_block_model(&SIMULATION_GROUP_SIZES, seed).unwrap();
    let scale = MEAN_DEGREE / (n as f64 * model.average_probability());
    sample_sbm(&model.scaled(scale).unwrap(), n, seed).graph
}

fn best_of_three(g: &Graph) -> f64 {
    (0..3)
        .map(|_| {
            let t = Instant::now();
            fast_greedy(g, ModularityKind::Er).unwrap();
            t.elapsed().as_secs_f64()
        })
        .fold(f64::INFINITY, f64::min)
}

fn criterion_9() -> Vec<(String, Outcome)> {
    let (mut small, mut large) = (0.0, 0.0);
    for seed in 0..3 {
        small += best_of_three(&sparse_instance(10_000, seed));
        large += best_of_three(&sparse_instance(20_000, seed));
    }
    let ratio = large / small;
    let scaling = Outcome::new(
        ratio <= 3.0,
        format!("greedy modularity t(2n)/t(n) = {ratio:.2} for n = 1e4 -> 2e4, mean degree 20, 3 graphs (<= 3.0)"),
    );

    let cores = std::thread::available_parallelism().map_or(1, |c| c.get());
    let inst = Design::from_name("table1-small").unwrap().generate(5000, 9).unwrap();
    let g = &inst.sample.graph;
    let time = |jobs: usize| {
        let cfg = PipelineConfig { parallelism: jobs, group_mode: dcd_core::division::GroupMode::Fixed(10), ..PipelineConfig::new(ModelKind::Sbm) };
        let t = Instant::now();
        let report = run_pipeline_with(g, &cfg, &Threads, &NoClock).unwrap();
        (t.elapsed().as_secs_f64(), report)
    };
    // Warm caches and the allocator before timing either setting.
    time(1);
    let (t1, r1) = time(1);
    let (t4, r4) = time(4);
    let speedup = t1 / t4;
    let mut parallel = Outcome::new(
        speedup >= 2.0 && r1 == r4,
        format!("10-group pipeline at n=5000: jobs 1 {t1:.2} s, jobs 4 {t4:.2} s, speedup {speedup:.2}x (>= 2x), identical reports {}; {cores} core(s) available", r1 == r4),
    );
    if !parallel.pass && r1 == r4 && cores < 4 {
        parallel.hardware_limited = true;
        parallel.detail.push_str(", needs 4");
    }
    vec![("9a".into(), scaling), ("9b".into(), parallel)]
}

fn dcd(dir: &Path, args: &[&str]) -> Vec<u8> {
    let out = Command::new(env!("CARGO_BIN_EXE_dcd")).current_dir(dir).args(args).output().expect("binary runs");
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    out.stdout
}

fn criterion_10() -> Outcome {
    let (dir, other) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let d = dir.path();
    let mut checks: Vec<(&str, bool)> = Vec::new();
    let gen = |at: &Path| dcd(at, &["gen", "--design", "paper-dcsbm", "--n", "800", "--seed", "5", "--out", "a"]);
    let same_summary = gen(d) == gen(other.path());
    let same_files = [".edges", ".communities", ".groups", ".model.json", ".theta"]
        .iter()
        .all(|ext| fs::read(d.join(format!("a{ext}"))).unwrap() == fs::read(other.path().join(format!("a{ext}"))).unwrap());
    checks.push(("gen", same_summary && same_files));
    for model in ["sbm", "dcsbm"] {
        let run = |jobs: &str| dcd(d, &["detect", "a.edges", "--model", model, "--seed", "3", "--jobs", jobs, "--no-timings"]);
        let first = run("1");
        checks.push(("detect", first == run("1") && first == run("4")));
    }
    let eval = |jobs: &str| dcd(d, &["eval", "--graph", "a.edges", "--mask", "0.2", "--seed", "3", "--jobs", jobs]);
    let first = eval("1");
    checks.push(("eval", first == eval("1") && first == eval("4")));
    dcd(d, &["detect", "a.edges", "--model", "dcsbm", "--no-timings", "--out", "r.json"]);
    let truth = || dcd(d, &["eval", "--report", "r.json", "--communities", "a.communities", "--true-groups", "a.groups"]);
    checks.push(("eval truth", truth() == truth()));
    let bench = |jobs: &str| {
        dcd(d, &["bench", "--design", "paper-sbm", "--n", "300,400", "--reps", "2", "--seed", "8", "--jobs", jobs, "--no-timings"])
    };
    let first = bench("1");
    checks.push(("bench", first == bench("1") && first == bench("4")));
    let failing: Vec<&str> = checks.iter().filter(|c| !c.1).map(|c| c.0).collect();
    Outcome::new(
        failing.is_empty(),
        format!("{} byte-level comparisons of gen, detect, eval and bench across reruns and --jobs 1/4; differing: {failing:?}", checks.len()),
    )
}

fn main() {
    let wanted: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let selected = |id: &str| wanted.is_empty() || wanted.iter().any(|w| w == id);
    let criteria: [(&str, Criterion); 10] = [
        ("1", || vec![("1".into(), criterion_1())]),
        ("2", || vec![("2".into(), criterion_2())]),
        ("3", || vec![("3".into(), criterion_3())]),
        ("4", || vec![("4".into(), criterion_4())]),
        ("5", || vec![("5".into(), criterion_5())]),
        ("6", || vec![("6".into(), criterion_6())]),
        ("7", || vec![("7".into(), criterion_7())]),
        ("8", || vec![("8".into(), criterion_8())]),
        ("9", criterion_9),
        ("10", || vec![("10".into(), criterion_10())]),
    ];
    let mut genuine = 0;
    for (_, run) in criteria.into_iter().filter(|(id, _)| selected(id)) {
        let t = Instant::now();
        let outcomes = run();
        let secs = t.elapsed().as_secs_f64();
        for (sub, o) in outcomes {
            let status = if o.pass { "PASS" } else { "FAIL" };
            let note = if o.hardware_limited { " [hardware-limited]" } else { "" };
            println!("{status} criterion {sub}: {}{note} ({secs:.1} s)", o.detail);
            genuine += usize::from(!o.pass && !o.hardware_limited);
        }
    }
    if genuine > 0 {
        eprintln!("{genuine} criterion(s) failed");
        std::process::exit(1);
    }
}
