//! Monte-Carlo experiments: reconstruction error of graphon versus random
//! samples, and hit rates of pivot sampling on mixture graphs.
//!
//! Trials run in parallel but every trial draws from its own seed stream and
//! rows are sorted before output, so results do not depend on the worker
//! count.

use std::path::PathBuf;
use std::time::Instant;

use graphon_sampling::graph::normalized_laplacian_dense;
use graphon_sampling::io::{read_edge_list, read_json};
use graphon_sampling::mixture::{expected_adjacency, sample_mixture_graph, sample_mixture_latents, MixtureModel};
use graphon_sampling::models::{sample_graph, sbm_graphon};
use graphon_sampling::pipeline::graphon_sample;
use graphon_sampling::sampling::{ge_pivot_sample, random_sample, reconstruct, reconstruct_pinv, uniqueness_rank};
use graphon_sampling::spectral::synth_bandlimited;
use graphon_sampling::{derive_seed, eig_sym, normalized_laplacian, Error, Graph, Result, SampleMethod, Spectrum};
use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::Serialize;

use crate::commands::{node_order, node_strategy};
use crate::output::{csv_document, emit, json_document};
use crate::{ConsistencyArgs, Format, NodeOrder, ReconstructArgs, Strategy};

/// Resolved configuration of a reconstruction experiment.
#[derive(Debug, Clone, Serialize)]
pub struct ReconstructConfig {
    pub command: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub graph: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nodes: Option<usize>,
    pub n: usize,
    pub blocks: usize,
    pub intra: f64,
    pub inter: f64,
    pub order: NodeOrder,
    #[serde(rename = "K")]
    pub k: usize,
    pub m: usize,
    pub q: usize,
    pub p: usize,
    pub strategy: Strategy,
    pub c: usize,
    pub trials: usize,
    pub seed: u64,
    pub timing: bool,
}

impl ReconstructConfig {
    pub fn from_args(a: &ReconstructArgs) -> Self {
        ReconstructConfig {
            command: "reconstruct-exp",
            graph: a.graph.clone(),
            nodes: a.nodes,
            n: a.generator.n as usize,
            blocks: a.generator.blocks as usize,
            intra: a.generator.intra,
            inter: a.generator.inter,
            order: a.order,
            k: a.k as usize,
            m: a.m as usize,
            q: a.q as usize,
            p: a.p as usize,
            strategy: a.strategy,
            c: a.c as usize,
            trials: a.trials as usize,
            seed: a.seed,
            timing: a.timing,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultRow {
    pub trial: usize,
    pub method: SampleMethod,
    pub n: usize,
    pub budget: usize,
    pub certified: bool,
    pub rel_error: f64,
    /// Wall time of sampling plus reconstruction; 0 without timing.
    pub ms: u64,
}

impl ResultRow {
    fn csv(&self) -> String {
        format!(
            "{},{},{},{},{},{:e},{}",
            self.trial, self.method, self.n, self.budget, self.certified, self.rel_error, self.ms
        )
    }
}

/// Equal-weight block kernel with `intra` on the diagonal.
fn block_kernel(blocks: usize, intra: f64, inter: f64) -> DMatrix<f64> {
    DMatrix::from_fn(blocks, blocks, |i, j| if i == j { intra } else { inter })
}

/// A graph in pipeline order with its low band. Errors are label invariant,
/// so the map back to input labels is not kept.
struct Prepared {
    graph: Graph,
    spec: Spectrum,
}

fn prepare(g: Graph, order: NodeOrder, k: usize) -> Result<Prepared> {
    let perm = node_order(&g, order);
    let graph = match order {
        NodeOrder::Given => g,
        NodeOrder::Degree => g.permuted(&perm)?,
    };
    let spec = eig_sym(&normalized_laplacian(&graph), Some(k))?;
    Ok(Prepared { graph, spec })
}

fn score(
    cfg: &ReconstructConfig,
    trial: usize,
    method: SampleMethod,
    spec: &Spectrum,
    x: &[f64],
    draw: impl FnOnce() -> Result<Vec<usize>>,
) -> Result<ResultRow> {
    let start = Instant::now();
    let set = draw()?;
    let y: Vec<f64> = set.iter().map(|&i| x[i]).collect();
    let rank = uniqueness_rank(spec, &set, cfg.k, None)?;
    let estimate = if rank.certified {
        reconstruct(spec, cfg.k, &set, &y)?
    } else {
        reconstruct_pinv(spec, cfg.k, &set, &y)?
    };
    let elapsed = start.elapsed();
    let diff: f64 = estimate.0.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
    let norm: f64 = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    Ok(ResultRow {
        trial,
        method,
        n: x.len(),
        budget: cfg.m,
        certified: rank.certified,
        rel_error: if norm > 0.0 { diff / norm } else { diff },
        ms: if cfg.timing { elapsed.as_millis() as u64 } else { 0 },
    })
}

fn reconstruction_trial(cfg: &ReconstructConfig, fixed: Option<&Prepared>, trial: usize) -> Result<Vec<ResultRow>> {
    let seed = derive_seed(cfg.seed, trial as u64);
    let generated;
    let prep = match fixed {
        Some(p) => p,
        None => {
            let sizes = vec![1.0 / cfg.blocks as f64; cfg.blocks];
            let w = sbm_graphon(&block_kernel(cfg.blocks, cfg.intra, cfg.inter), &sizes)?;
            let lg = sample_graph(&w, cfg.n, derive_seed(seed, 0), true)?;
            generated = prepare(lg.graph, cfg.order, cfg.k)?;
            &generated
        }
    };
    let n = prep.graph.n();
    if cfg.m > n {
        return Err(Error::InvalidParams(format!("budget m = {} exceeds n = {n}", cfg.m)));
    }
    let x = synth_bandlimited(&prep.spec, cfg.k, derive_seed(seed, 1))?.0;
    let strategy = node_strategy(cfg.strategy, cfg.c as u64);
    let graphon = score(cfg, trial, SampleMethod::Graphon, &prep.spec, &x, || {
        let run = graphon_sample(&prep.graph, cfg.q, cfg.p, cfg.m, strategy, derive_seed(seed, 2))?;
        Ok(run.samples.indices)
    })?;
    let random = score(cfg, trial, SampleMethod::Random, &prep.spec, &x, || {
        Ok(random_sample(n, cfg.m, derive_seed(seed, 3))?.indices)
    })?;
    Ok(vec![graphon, random])
}

/// One graphon row and one random row per trial, sorted by trial then method.
pub fn run_reconstruction_experiment(cfg: &ReconstructConfig) -> Result<Vec<ResultRow>> {
    if cfg.k > cfg.m {
        return Err(Error::InvalidParams(format!("band K = {} exceeds budget m = {}", cfg.k, cfg.m)));
    }
    let fixed = match &cfg.graph {
        Some(path) => Some(prepare(read_edge_list(path, cfg.nodes)?, cfg.order, cfg.k)?),
        None => None,
    };
    let per_trial: Vec<Vec<ResultRow>> = (0..cfg.trials)
        .into_par_iter()
        .map(|t| reconstruction_trial(cfg, fixed.as_ref(), t))
        .collect::<Result<_>>()?;
    let mut rows: Vec<ResultRow> = per_trial.into_iter().flatten().collect();
    rows.sort_by_key(|r| (r.trial, r.method.to_string()));
    Ok(rows)
}

pub fn reconstruct_command(a: ReconstructArgs) -> Result<()> {
    let cfg = ReconstructConfig::from_args(&a);
    let rows = run_reconstruction_experiment(&cfg)?;
    let text = match a.output.format.unwrap_or(Format::Csv) {
        Format::Csv => csv_document(
            &cfg,
            "trial,method,n,budget,certified,rel_error,ms",
            &rows.iter().map(ResultRow::csv).collect::<Vec<_>>(),
        )?,
        Format::Json => json_document(&cfg, &rows)?,
    };
    emit(&a.output, &text)
}

/// Resolved configuration of a consistency experiment.
#[derive(Debug, Clone, Serialize)]
pub struct ConsistencyConfig {
    pub command: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mixture: Option<PathBuf>,
    pub blocks: usize,
    pub intra: f64,
    pub inter: f64,
    pub ns: Vec<usize>,
    pub trials: usize,
    pub seed: u64,
    pub noiseless: bool,
}

impl ConsistencyConfig {
    pub fn from_args(a: &ConsistencyArgs) -> Self {
        ConsistencyConfig {
            command: "consistency-exp",
            mixture: a.mixture.clone(),
            blocks: a.blocks as usize,
            intra: a.intra,
            inter: a.inter,
            ns: a.ns.clone(),
            trials: a.trials as usize,
            seed: a.seed,
            noiseless: a.noiseless,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConsistencyRow {
    pub n: usize,
    pub trials: usize,
    /// Trials whose pivots landed in `K` distinct components.
    pub hits: usize,
    pub certified: usize,
    pub hit_rate: f64,
    pub certified_rate: f64,
}

impl ConsistencyRow {
    fn csv(&self) -> String {
        format!(
            "{},{},{},{},{},{}",
            self.n, self.trials, self.hits, self.certified, self.hit_rate, self.certified_rate
        )
    }
}

/// Equal-weight mixture with supports `[i/K, (i+1)/K)`.
pub fn block_mixture(blocks: usize, intra: f64, inter: f64) -> Result<MixtureModel> {
    let weights = vec![1.0 / blocks as f64; blocks];
    let supports = (0..blocks)
        .map(|i| [i as f64 / blocks as f64, (i + 1) as f64 / blocks as f64])
        .collect();
    let kernel = (0..blocks)
        .map(|i| (0..blocks).map(|j| if i == j { intra } else { inter }).collect())
        .collect();
    MixtureModel::new(weights, supports, kernel)
}

/// Whether one pivot draw hit every component, and whether it is certified.
fn consistency_trial(mm: &MixtureModel, n: usize, noiseless: bool, seed: u64) -> Result<(bool, bool)> {
    let k = mm.k;
    let (spec, components) = if noiseless {
        let draw = sample_mixture_latents(mm, n, seed)?;
        let lap = normalized_laplacian_dense(&expected_adjacency(mm, &draw));
        (eig_sym(&lap, Some(k))?, draw.components)
    } else {
        let lg = sample_mixture_graph(mm, n, seed)?;
        (eig_sym(&normalized_laplacian(&lg.graph), Some(k))?, lg.components)
    };
    let set = match ge_pivot_sample(&spec.band(k)?) {
        Ok(set) => set,
        Err(Error::RankDeficient { .. }) => return Ok((false, false)),
        Err(e) => return Err(e),
    };
    let mut hit: Vec<usize> = set.indices.iter().map(|&i| components[i]).collect();
    hit.sort_unstable();
    hit.dedup();
    let certified = uniqueness_rank(&spec, &set.indices, k, None)?.certified;
    Ok((hit.len() == k, certified))
}

/// One row per graph size.
pub fn run_consistency_experiment(cfg: &ConsistencyConfig) -> Result<Vec<ConsistencyRow>> {
    let mm = match &cfg.mixture {
        Some(path) => read_json::<MixtureModel>(path)?,
        None => block_mixture(cfg.blocks, cfg.intra, cfg.inter)?,
    };
    mm.validate()?;
    if let Some(&n) = cfg.ns.iter().find(|&&n| n < mm.k) {
        return Err(Error::InvalidParams(format!("graph size {n} is below K = {}", mm.k)));
    }
    let jobs: Vec<(usize, usize)> =
        cfg.ns.iter().flat_map(|&n| (0..cfg.trials).map(move |t| (n, t))).collect();
    let outcomes: Vec<(bool, bool)> = jobs
        .par_iter()
        .map(|&(n, t)| {
            let seed = derive_seed(derive_seed(cfg.seed, n as u64), t as u64);
            consistency_trial(&mm, n, cfg.noiseless, seed)
        })
        .collect::<Result<_>>()?;
    Ok(cfg
        .ns
        .iter()
        .enumerate()
        .map(|(i, &n)| {
            let chunk = &outcomes[i * cfg.trials..(i + 1) * cfg.trials];
            let hits = chunk.iter().filter(|o| o.0).count();
            let certified = chunk.iter().filter(|o| o.1).count();
            ConsistencyRow {
                n,
                trials: cfg.trials,
                hits,
                certified,
                hit_rate: hits as f64 / cfg.trials as f64,
                certified_rate: certified as f64 / cfg.trials as f64,
            }
        })
        .collect())
}

pub fn consistency_command(a: ConsistencyArgs) -> Result<()> {
    let cfg = ConsistencyConfig::from_args(&a);
    let rows = run_consistency_experiment(&cfg)?;
    let text = match a.output.format.unwrap_or(Format::Csv) {
        Format::Csv => csv_document(
            &cfg,
            "n,trials,hits,certified,hit_rate,certified_rate",
            &rows.iter().map(ConsistencyRow::csv).collect::<Vec<_>>(),
        )?,
        Format::Json => json_document(&cfg, &rows)?,
    };
    emit(&a.output, &text)
}
