//! Subcommand implementations other than the experiments.

use graphon_sampling::io::{read_edge_list, read_json, to_json_string, write_json};
use graphon_sampling::mixture::{
    check_component_uniqueness, difficulty, frame_mismatch, mixture_to_graphon, projection_bound,
    projection_distance, ComponentCheck, DifficultyReport, MixtureModel,
};
use graphon_sampling::pipeline::{graphon_sample, sample_nodes, IntervalSample, NodeStrategy};
use graphon_sampling::poincare::{poincare_constant, verify_poincare, PoincareCertificate, PoincareReport};
use graphon_sampling::sampling::{ge_pivot_sample, greedy_sample, random_sample, uniqueness_rank};
use graphon_sampling::{eig_sym, normalized_laplacian, Error, Graph, Result, SampleSet};
use serde::Serialize;

use crate::experiments;
use crate::output::{csv_document, emit};
use crate::{
    Command, DifficultyArgs, Format, GraphInput, Method, NodeOrder, PoincareArgs, SampleArgs, Strategy, VerifyArgs,
};

pub fn run(command: Command) -> Result<()> {
    match command {
        Command::Sample(a) => sample(a),
        Command::Verify(a) => verify(a),
        Command::ReconstructExp(a) => experiments::reconstruct_command(a),
        Command::Poincare(a) => poincare(a),
        Command::ConsistencyExp(a) => experiments::consistency_command(a),
        Command::Difficulty(a) => difficulty_command(a),
    }
}

fn load(input: &GraphInput) -> Result<Graph> {
    read_edge_list(&input.graph, input.nodes)
}

/// Node order for the pipeline; position `i` holds the original label.
pub fn node_order(g: &Graph, order: NodeOrder) -> Vec<usize> {
    match order {
        NodeOrder::Degree => g.degree_order(),
        NodeOrder::Given => (0..g.n()).collect(),
    }
}

pub fn node_strategy(strategy: Strategy, c: u64) -> NodeStrategy {
    match strategy {
        Strategy::Uniform => NodeStrategy::Uniform,
        Strategy::Community => NodeStrategy::Community { c: c as usize },
    }
}

fn required(v: Option<u64>, flag: &str) -> Result<usize> {
    v.map(|x| x as usize)
        .ok_or_else(|| Error::InvalidParams(format!("{flag} is required for this method")))
}

fn sample(a: SampleArgs) -> Result<()> {
    let g = load(&a.input)?;
    let set = match a.method {
        Method::Graphon => {
            let m = required(a.m, "--m")?;
            let perm = node_order(&g, a.order);
            let ordered = match a.order {
                NodeOrder::Given => g.clone(),
                NodeOrder::Degree => g.permuted(&perm)?,
            };
            let strategy = node_strategy(a.strategy, a.c);
            let (mut set, intervals) = match &a.intervals_in {
                Some(path) => {
                    let iv: IntervalSample = read_json(path)?;
                    (sample_nodes(&ordered, &iv, m, strategy, a.seed)?, iv)
                }
                None => {
                    let run = graphon_sample(&ordered, a.q as usize, a.p as usize, m, strategy, a.seed)?;
                    (run.samples, run.intervals)
                }
            };
            if let Some(path) = &a.intervals_out {
                write_json(path, &intervals)?;
            }
            set.indices.iter_mut().for_each(|i| *i = perm[*i]);
            set
        }
        Method::Greedy => greedy_sample(&g, required(a.m, "--m")?)?,
        Method::Ge => {
            let k = required(a.k, "--K")?;
            let spec = eig_sym(&normalized_laplacian(&g), Some(k))?;
            ge_pivot_sample(&spec.band(k)?)?
        }
        Method::Random => random_sample(g.n(), required(a.m, "--m")?, a.seed)?,
    };
    let text = match a.output.format.unwrap_or(Format::Json) {
        Format::Json => to_json_string(&set)?,
        Format::Csv => {
            let meta = serde_json::json!({
                "method": set.method,
                "seed": set.seed,
                "budget": set.budget,
                "budget_met": set.budget_met,
            });
            let rows: Vec<String> = set.indices.iter().map(|i| i.to_string()).collect();
            csv_document(&meta, "index", &rows)?
        }
    };
    emit(&a.output, &text)
}

#[derive(Debug, Serialize)]
struct VerifyOutput {
    #[serde(rename = "K")]
    k: usize,
    size: usize,
    rank: usize,
    certified: bool,
}

fn verify(a: VerifyArgs) -> Result<()> {
    let g = load(&a.input)?;
    let set: SampleSet = read_json(&a.set)?;
    set.validate(g.n())?;
    let k = a.k as usize;
    let spec = eig_sym(&normalized_laplacian(&g), Some(k))?;
    let r = uniqueness_rank(&spec, &set.indices, k, a.tol)?;
    let out = VerifyOutput { k, size: set.len(), rank: r.rank, certified: r.certified };
    let text = match a.output.format.unwrap_or(Format::Json) {
        Format::Json => to_json_string(&out)?,
        Format::Csv => csv_document(
            &serde_json::json!({"K": k, "set": a.set.display().to_string()}),
            "K,size,rank,certified",
            &[format!("{},{},{},{}", out.k, out.size, out.rank, out.certified)],
        )?,
    };
    emit(&a.output, &text)
}

#[derive(Debug, Serialize)]
struct PoincareOutput {
    certificate: PoincareCertificate,
    #[serde(skip_serializing_if = "Option::is_none")]
    verification: Option<PoincareReport>,
}

fn poincare(a: PoincareArgs) -> Result<()> {
    let g = load(&a.input)?;
    let members = match (&a.set, &a.members) {
        (Some(path), _) => read_json::<SampleSet>(path)?.indices,
        (None, Some(list)) => list.clone(),
        (None, None) => return Err(Error::EmptySet),
    };
    let certificate = poincare_constant(&g, &members)?;
    let verification = if a.trials > 0 {
        Some(verify_poincare(&g, &members, a.trials as usize, a.seed)?)
    } else {
        None
    };
    let text = match a.output.format.unwrap_or(Format::Json) {
        Format::Json => to_json_string(&PoincareOutput { certificate, verification })?,
        Format::Csv => {
            let (trials, max_ratio) = verification.map_or((0, 0.0), |v| (v.trials, v.max_ratio));
            csv_document(
                &serde_json::json!({"S": certificate.set, "trials": a.trials, "seed": a.seed}),
                "lambda1,Lambda,bandwidth,neighborhood_size,trials,max_ratio",
                &[format!(
                    "{:e},{:e},{:e},{},{},{:e}",
                    certificate.lambda1,
                    certificate.poincare_constant,
                    certificate.bandwidth,
                    certificate.neighborhood.len(),
                    trials,
                    max_ratio
                )],
            )?
        }
    };
    emit(&a.output, &text)
}

#[derive(Debug, Serialize)]
struct DifficultyOutput {
    #[serde(flatten)]
    report: DifficultyReport,
    projection_distance: f64,
    projection_bound: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    eps: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    component_check: Option<ComponentCheck>,
}

/// `A_i`: the image of support `i` in `[0, 1]`, as a union of graphon cells.
pub fn support_images(mm: &MixtureModel) -> Result<Vec<Vec<(f64, f64)>>> {
    let mg = mixture_to_graphon(mm)?;
    let b = mg.graphon.boundaries();
    let mut sets = vec![Vec::new(); mm.k];
    for (x, &comp) in mg.components.iter().enumerate() {
        sets[comp].push((b[x], b[x + 1]));
    }
    Ok(sets)
}

fn difficulty_command(a: DifficultyArgs) -> Result<()> {
    let mm: MixtureModel = read_json(&a.mixture)?;
    mm.validate()?;
    let report = difficulty(&mm, a.grid as usize)?;
    let (eps, component_check) = if a.check {
        let eps = match a.eps {
            Some(e) => e,
            None => frame_mismatch(&mm)?,
        };
        (Some(eps), Some(check_component_uniqueness(&mm, &support_images(&mm)?, eps)?))
    } else {
        (a.eps, None)
    };
    let out = DifficultyOutput {
        report,
        projection_distance: projection_distance(&mm)?,
        projection_bound: projection_bound(&mm, &report),
        eps,
        component_check,
    };
    let text = match a.output.format.unwrap_or(Format::Json) {
        Format::Json => to_json_string(&out)?,
        Format::Csv => csv_document(
            &serde_json::json!({"mixture": a.mixture.display().to_string(), "grid": a.grid}),
            "s_max,coupling,gamma_min,b_max,phi,projection_distance,projection_bound",
            &[format!(
                "{:e},{:e},{:e},{:e},{:e},{:e},{:e}",
                report.s_max,
                report.coupling,
                report.gamma_min,
                report.b_max,
                report.phi,
                out.projection_distance,
                out.projection_bound
            )],
        )?,
    };
    emit(&a.output, &text)
}
