//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails. Run with `cargo test --test acceptance`.

use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use graphon_sample_cli::experiments::{
    run_consistency_experiment, run_reconstruction_experiment, ConsistencyConfig, ReconstructConfig,
};
use graphon_sample_cli::{NodeOrder, Strategy};
use graphon_sampling::graph::normalized_laplacian_dense;
use graphon_sampling::io::{format_edge_list, write_json};
use graphon_sampling::mixture::{difficulty, indivisibility, phi_from_parts, similarity_index, MixtureModel};
use graphon_sampling::models::{blockmodel_matrix, sample_graph, sbm_graphon};
use graphon_sampling::pipeline::{graphon_sample, NodeStrategy};
use graphon_sampling::poincare::{poincare_constant, verify_poincare};
use graphon_sampling::sampling::{ge_pivot_sample, greedy_sample, random_sample, reconstruct, uniqueness_rank};
use graphon_sampling::spectral::{gft, igft, synth_bandlimited};
use graphon_sampling::{eig_sym, normalized_laplacian, Graph};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = std::result::Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

/// Random graph with edge probability `p`, or a random spanning tree plus
/// such edges when `connected`.
fn random_graph(n: usize, p: f64, connected: bool, rng: &mut ChaCha8Rng) -> Graph {
    let mut edges = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            if rng.random::<f64>() < p {
                edges.push((i, j));
            }
        }
    }
    if connected {
        for v in 1..n {
            edges.push((rng.random_range(0..v), v));
        }
        edges.sort_unstable();
        edges.dedup();
    }
    Graph::from_edges(n, &edges).unwrap()
}

fn spectral_correctness() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (mut worst_range, mut worst_orth, mut worst_parseval) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..100 {
        let n = rng.random_range(2..=200);
        let g = random_graph(n, rng.random_range(0.01..0.3), false, &mut rng);
        let spec = eig_sym(&normalized_laplacian(&g), None).map_err(|e| e.to_string())?;
        for &l in &spec.eigenvalues {
            worst_range = worst_range.max((-l).max(l - 2.0));
        }
        let v = &spec.eigenvectors;
        worst_orth = worst_orth.max((v.transpose() * v - DMatrix::identity(n, n)).amax());
        let x: Vec<f64> = (0..n).map(|_| rng.random::<f64>() - 0.5).collect();
        let c = gft(&spec, &x).map_err(|e| e.to_string())?;
        let nx: f64 = x.iter().map(|a| a * a).sum();
        let nc: f64 = c.iter().map(|a| a * a).sum();
        worst_parseval = worst_parseval.max((nx - nc).abs());
        let back = igft(&spec, &c).map_err(|e| e.to_string())?;
        worst_parseval = worst_parseval.max(back.0.iter().zip(&x).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max));
    }
    let secs = start.elapsed().as_secs_f64();
    check(
        worst_range <= 1e-9 && worst_orth <= 1e-8 && worst_parseval <= 1e-10 && secs < 30.0,
        format!("range excess {worst_range:e}, orth {worst_orth:e}, parseval {worst_parseval:e}, {secs:.1}s"),
    )
}

fn round_trip() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (mut certified_sets, mut worst) = (0usize, 0.0f64);
    for trial in 0..20u64 {
        let n = rng.random_range(60..=500);
        let k = rng.random_range(1..=10usize);
        let sizes: Vec<f64> = {
            let raw: Vec<f64> = (0..k).map(|_| rng.random_range(0.5..1.5)).collect();
            let s: f64 = raw.iter().sum();
            raw.iter().map(|r| r / s).collect()
        };
        let mut block = DMatrix::from_element(k, k, 0.05);
        block.fill_diagonal(0.6);
        let w = sbm_graphon(&block, &sizes).map_err(|e| e.to_string())?;
        let g = sample_graph(&w, n, trial, true).map_err(|e| e.to_string())?.graph;
        let spec = eig_sym(&normalized_laplacian(&g), Some(k)).map_err(|e| e.to_string())?;
        let m = (2 * k).max(10);
        let mut sets = vec![
            ge_pivot_sample(&spec.band(k).unwrap()).map(|s| s.indices),
            greedy_sample(&g, m).map(|s| s.indices),
            random_sample(n, m, trial).map(|s| s.indices),
        ];
        sets.push(graphon_sample(&g, 20, 10, m, NodeStrategy::Uniform, trial).map(|s| s.samples.indices));
        for set in sets.into_iter().flatten() {
            if !uniqueness_rank(&spec, &set, k, None).map_err(|e| e.to_string())?.certified {
                continue;
            }
            certified_sets += 1;
            for s in 0..50 {
                let x = synth_bandlimited(&spec, k, 1000 * trial + s).unwrap().0;
                let y: Vec<f64> = set.iter().map(|&i| x[i]).collect();
                let r = reconstruct(&spec, k, &set, &y).map_err(|e| e.to_string())?;
                let err = r.0.iter().zip(&x).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
                worst = worst.max(err);
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    check(
        certified_sets > 0 && worst <= 1e-8 && secs < 60.0,
        format!("{certified_sets} certified sets, worst relative error {worst:e}, {secs:.1}s"),
    )
}

fn random_set(n: usize, size: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let mut s = rand::seq::index::sample(rng, n, size).into_vec();
    s.sort_unstable();
    s
}

fn poincare_suite() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst = 0.0f64;
    for i in 0..50u64 {
        let n = rng.random_range(10..=120);
        let g = random_graph(n, rng.random_range(0.02..0.2), true, &mut rng);
        let s = random_set(n, rng.random_range(1..n), &mut rng);
        let report = verify_poincare(&g, &s, 1000, i).map_err(|e| format!("instance {i}: {e}"))?;
        worst = worst.max(report.max_ratio / report.poincare_constant);
    }
    let secs = start.elapsed().as_secs_f64();
    check(secs < 60.0, format!("50 instances, 0 violations, max ratio/Lambda {worst:.6}, {secs:.1}s"))
}

fn bandwidth_cross_check() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (mut found, mut failures, mut attempts) = (0, 0, 0);
    while found < 20 && attempts < 10_000 {
        attempts += 1;
        let n = rng.random_range(20..=100);
        let g = random_graph(n, rng.random_range(0.05..0.3), true, &mut rng);
        let s = random_set(n, rng.random_range(1..=n / 5), &mut rng);
        let Ok(cert) = poincare_constant(&g, &s) else { continue };
        let spec = eig_sym(&normalized_laplacian(&g), None).map_err(|e| e.to_string())?;
        let k = spec.eigenvalues.iter().take_while(|&&l| l < cert.lambda1).count().min(n - s.len());
        if k == 0 {
            continue;
        }
        found += 1;
        let rest: Vec<usize> = (0..n).filter(|i| s.binary_search(i).is_err()).collect();
        if !uniqueness_rank(&spec, &rest, k, None).map_err(|e| e.to_string())?.certified {
            failures += 1;
        }
    }
    check(found == 20 && failures == 0, format!("{found} instances, {failures} failures"))
}

fn blockmodel_exactness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (mut exact, mut spread) = (0, 0.0f64);
    for _ in 0..100 {
        let k = rng.random_range(2..=4usize);
        let sizes: Vec<usize> = (0..k).map(|_| rng.random_range(1..=60)).collect();
        let mut block = DMatrix::from_fn(k, k, |_, _| 0.0);
        for a in 0..k {
            for b in a..k {
                let v = if a == b { rng.random_range(0.6..0.95) } else { rng.random_range(0.01..0.1) };
                block[(a, b)] = v;
                block[(b, a)] = v;
            }
        }
        let w = blockmodel_matrix(&block, &sizes).map_err(|e| e.to_string())?;
        let spec = eig_sym(&normalized_laplacian_dense(&w), Some(k)).map_err(|e| e.to_string())?;
        let labels: Vec<usize> = sizes.iter().enumerate().flat_map(|(b, &s)| std::iter::repeat_n(b, s)).collect();
        let set = ge_pivot_sample(&spec.band(k).unwrap()).map_err(|e| e.to_string())?;
        let mut hit: Vec<usize> = set.indices.iter().map(|&i| labels[i]).collect();
        hit.sort_unstable();
        hit.dedup();
        if hit.len() == k {
            exact += 1;
        }
        for col in 0..k {
            let v = spec.eigenvectors.column(col);
            for (i, &l) in labels.iter().enumerate() {
                let first = labels.iter().position(|&x| x == l).unwrap();
                spread = spread.max((v[i] - v[first]).abs());
            }
        }
    }
    check(
        exact == 100 && spread <= 1e-12,
        format!("{exact}/100 one pivot per block, within-block spread {spread:e}"),
    )
}

fn consistency_trend() -> Outcome {
    let start = Instant::now();
    let cfg = ConsistencyConfig {
        command: "consistency-exp",
        mixture: None,
        blocks: 3,
        intra: 0.9,
        inter: 0.05,
        ns: vec![100, 200, 400],
        trials: 100,
        seed: 6,
        noiseless: false,
    };
    let rows = run_consistency_experiment(&cfg).map_err(|e| e.to_string())?;
    let se = |r: f64| (r * (1.0 - r) / cfg.trials as f64).sqrt();
    let monotone = rows.windows(2).all(|w| {
        let (a, b) = (w[0].hit_rate, w[1].hit_rate);
        b >= a - 3.0 * (se(a).powi(2) + se(b).powi(2)).sqrt()
    });
    let last = rows.last().map_or(0.0, |r| r.hit_rate);
    let rates: Vec<String> = rows.iter().map(|r| format!("n={}: {}", r.n, r.hit_rate)).collect();
    let secs = start.elapsed().as_secs_f64();
    check(
        last >= 0.95 && monotone && secs < 300.0,
        format!("hit rates {}, {secs:.1}s", rates.join(", ")),
    )
}

fn pipeline_vs_random() -> Outcome {
    let cfg = ReconstructConfig {
        command: "reconstruct-exp",
        graph: None,
        nodes: None,
        n: 400,
        blocks: 3,
        intra: 0.9,
        inter: 0.05,
        order: NodeOrder::Given,
        k: 3,
        m: 10,
        q: 20,
        p: 10,
        strategy: Strategy::Uniform,
        c: 2,
        trials: 100,
        seed: 7,
        timing: false,
    };
    let rows = run_reconstruction_experiment(&cfg).map_err(|e| e.to_string())?;
    let rate = |method: &str| rows.iter().filter(|r| r.method.to_string() == method && r.certified).count();
    let (graphon, random) = (rate("graphon"), rate("random"));
    check(graphon >= random, format!("certified graphon {graphon}/100, random {random}/100 at m = {}", cfg.m))
}

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_graphon-sample")
}

fn run_cli(args: &[&str], threads: usize) -> std::result::Result<Duration, String> {
    let start = Instant::now();
    let out = Command::new(bin())
        .args(args)
        .env("GRAPHON_SAMPLE_THREADS", threads.to_string())
        .output()
        .map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(format!("{args:?}: {}", String::from_utf8_lossy(&out.stderr)));
    }
    Ok(start.elapsed())
}

fn sparse_graph_file(dir: &Path, n: usize, edges: usize, seed: u64) -> PathBuf {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut list: Vec<(usize, usize)> = (0..edges)
        .map(|_| {
            let (u, v) = (rng.random_range(0..n), rng.random_range(0..n));
            (u.min(v), u.max(v))
        })
        .filter(|(u, v)| u != v)
        .collect();
    list.sort_unstable();
    list.dedup();
    let g = Graph::from_edges(n, &list).unwrap();
    let path = dir.join(format!("g{edges}.txt"));
    std::fs::write(&path, format_edge_list(&g)).unwrap();
    path
}

fn pipeline_scaling() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let sizes = [200_000usize, 400_000, 800_000];
    let mut medians = Vec::new();
    for (i, &e) in sizes.iter().enumerate() {
        let graph = sparse_graph_file(dir.path(), e / 5, e, i as u64);
        let out = dir.path().join("s.json");
        let args = [
            "sample",
            "--graph",
            graph.to_str().unwrap(),
            "--q",
            "20",
            "--p",
            "10",
            "--m",
            "100",
            "--strategy",
            "uniform",
            "--out",
            out.to_str().unwrap(),
        ];
        let mut times: Vec<f64> = (0..5).map(|_| run_cli(&args, 1).map(|d| d.as_secs_f64())).collect::<Result<_, _>>()?;
        times.sort_by(f64::total_cmp);
        medians.push(times[2]);
    }
    let ratios: Vec<f64> = medians.windows(2).map(|w| w[1] / w[0]).collect();
    check(
        ratios.iter().all(|&r| r <= 2.5),
        format!("median times {medians:.3?} s over |E| = {sizes:?}, ratios {ratios:.2?}"),
    )
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let d = dir.path();
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let g = random_graph(80, 0.1, true, &mut rng);
    let graph = d.join("g.txt");
    std::fs::write(&graph, format_edge_list(&g)).unwrap();
    let mm = MixtureModel::new(
        vec![0.5, 0.5],
        vec![[0.0, 0.5], [0.5, 1.0]],
        vec![vec![0.8, 0.1], vec![0.1, 0.6]],
    )
    .unwrap();
    let mixture = d.join("mixture.json");
    write_json(&mixture, &mm).map_err(|e| e.to_string())?;
    let set = d.join("set.json");
    run_cli(&["sample", "--graph", graph.to_str().unwrap(), "--method", "ge", "--K", "3", "--out", set.to_str().unwrap()], 1)?;

    let g = graph.to_str().unwrap().to_string();
    let commands: Vec<Vec<String>> = [
        "sample --method graphon --m 12 --q 10 --p 4 --seed 3 --strategy community --intervals-out {iv}",
        "sample --method greedy --m 12",
        "sample --method ge --K 4 --format csv",
        "sample --method random --m 12 --seed 5",
        "verify --set {set} --K 3",
        "poincare --set {set} --trials 200 --seed 2",
        "reconstruct-exp --graph {g} --trials 20 --m 12 --q 10 --p 4 --seed 4 --strategy community",
        "reconstruct-exp --n 150 --trials 20 --seed 4",
        "consistency-exp --ns 60,120 --trials 20 --seed 8",
        "consistency-exp --ns 60,120 --trials 20 --seed 8 --noiseless --format json",
        "difficulty --mixture {mix} --check",
    ]
    .iter()
    .map(|c| {
        let mut args: Vec<String> = c.split(' ').map(String::from).collect();
        if args[0] != "reconstruct-exp" && args[0] != "consistency-exp" && args[0] != "difficulty" {
            args.insert(1, "--graph".into());
            args.insert(2, g.clone());
        }
        args
    })
    .collect();

    let mut differing = Vec::new();
    for (ci, template) in commands.iter().enumerate() {
        let mut outputs = Vec::new();
        for (run, threads) in [1usize, 1, 8, 8].into_iter().enumerate() {
            let out = d.join(format!("out{ci}_{run}"));
            let iv = d.join(format!("iv{ci}_{run}"));
            let args: Vec<String> = template
                .iter()
                .map(|a| match a.as_str() {
                    "{iv}" => iv.to_str().unwrap().to_string(),
                    "{set}" => set.to_str().unwrap().to_string(),
                    "{g}" => g.clone(),
                    "{mix}" => mixture.to_str().unwrap().to_string(),
                    other => other.to_string(),
                })
                .chain(["--out".to_string(), out.to_str().unwrap().to_string()])
                .collect();
            let refs: Vec<&str> = args.iter().map(String::as_str).collect();
            run_cli(&refs, threads)?;
            let mut bytes = std::fs::read(&out).map_err(|e| e.to_string())?;
            if let Ok(extra) = std::fs::read(&iv) {
                bytes.extend(extra);
            }
            outputs.push(bytes);
        }
        if outputs.windows(2).any(|w| w[0] != w[1]) {
            differing.push(template.join(" "));
        }
    }
    check(
        differing.is_empty(),
        format!("{} commands x 4 runs (threads 1, 1, 8, 8); differing: {differing:?}", commands.len()),
    )
}

fn difficulty_values() -> Outcome {
    let err = |e: graphon_sampling::Error| e.to_string();
    // Duplicated components: identical kernelized densities.
    let dup = MixtureModel::new(vec![0.5, 0.5], vec![[0.0, 0.5], [0.5, 1.0]], vec![vec![0.4, 0.4], vec![0.4, 0.4]])
        .map_err(err)?;
    let mut split = dup.clone();
    split.kernel = vec![vec![0.7]];
    split.kernel_breaks = Some(vec![0.0, 1.0]);
    let s_dup = difficulty(&dup, 16).map_err(err)?.s_max;
    let s_split = difficulty(&split, 16).map_err(err)?.s_max;

    // Constant kernel, one component: brute force over every subset of a grid.
    let single = MixtureModel::new(vec![1.0], vec![[0.0, 1.0]], vec![vec![0.3]]).map_err(err)?;
    let grid = 12;
    let kap = 0.3;
    let mut brute = f64::INFINITY;
    for mask in 1u32..(1 << grid) - 1 {
        let inside = mask.count_ones() as f64;
        let outside = grid as f64 - inside;
        let total = (grid * grid) as f64 * kap;
        let cut = inside * outside * kap;
        brute = brute.min(total * cut / ((inside * grid as f64 * kap) * (outside * grid as f64 * kap)));
    }
    let gamma = indivisibility(&single, 0, grid).map_err(err)?;

    // phi assembled from its parts.
    let mm = MixtureModel::new(
        vec![0.3, 0.7],
        vec![[0.0, 0.3], [0.3, 1.0]],
        vec![vec![0.8, 0.1], vec![0.1, 0.5]],
    )
    .map_err(err)?;
    let r = difficulty(&mm, 32).map_err(err)?;
    let s_max = (0..2).map(|l| similarity_index(&mm, l).unwrap()).fold(0.0, f64::max);
    let expected = (2.0 * (r.s_max + r.coupling)).sqrt() / (0.3 * r.gamma_min * r.gamma_min);
    let phi_ok = r.phi == expected && r.phi == phi_from_parts(2, 0.3, r.s_max, r.coupling, r.gamma_min) && r.s_max == s_max;
    check(
        s_dup == 1.0 && s_split == 1.0 && (gamma - 1.0).abs() <= 1e-9 && (brute - 1.0).abs() <= 1e-9 && phi_ok,
        format!("S_max {s_dup} / {s_split}, Gamma {gamma} (brute force {brute}), phi {} exact: {phi_ok}", r.phi),
    )
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 10] = [
        ("1 spectral correctness", spectral_correctness),
        ("2 sampling round trip", round_trip),
        ("3 poincare instances", poincare_suite),
        ("4 bandwidth cross-check", bandwidth_cross_check),
        ("5 blockmodel exactness", blockmodel_exactness),
        ("6 pivot consistency trend", consistency_trend),
        ("7 pipeline vs random", pipeline_vs_random),
        ("8 pipeline scaling", pipeline_scaling),
        ("9 difficulty values", difficulty_values),
        ("10 determinism", determinism),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (name, f) in criteria {
        if !filter.is_empty() && !filter.iter().any(|p| name.contains(p.as_str())) {
            continue;
        }
        match f() {
            Ok(detail) => println!("PASS {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL {name}: {detail}");
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
