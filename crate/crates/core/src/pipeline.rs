//! Graphon-based sampling: induced step graphon, coarse equipartition graph,
//! interval sampling on the coarse graph, then node sampling inside the chosen
//! intervals.
//!
//! Positions are measured in integer units of `1 / (n q)`: node `u` covers
//! `[u q, (u + 1) q)` and coarse interval `j` covers `[j n, (j + 1) n)`, so
//! overlaps are exact.

use nalgebra::DMatrix;
use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cluster::community_split;
use crate::derive_seed;
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::sampling::{greedy_sample_weighted, SampleMethod, SampleSet};

/// Integral of a step graphon over the cells of an equipartition into `q`
/// intervals. Diagonal entries hold within-interval mass.
#[derive(Debug, Clone, PartialEq)]
pub struct CoarseGraph {
    pub q: usize,
    pub weights: DMatrix<f64>,
    pub interval_bounds: Vec<f64>,
}

/// Selected coarse intervals, in selection order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntervalSample {
    pub q: usize,
    pub p: usize,
    pub interval_indices: Vec<usize>,
}

/// How nodes are drawn inside a selected interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeStrategy {
    Uniform,
    /// Split into `c` communities and draw equally from each.
    Community { c: usize },
}

/// Fraction-weighted spread of cell `u` (of `from` equal cells) over `to`
/// equal intervals: `(interval, overlap units)` with `from` units per cell
/// side being `to`.
fn spread(u: usize, from: usize, to: usize) -> impl Iterator<Item = (usize, u64)> {
    let (lo, hi) = ((u * to) as u64, ((u + 1) * to) as u64);
    let first = (u * to) / from;
    let last = ((u + 1) * to - 1) / from;
    (first..=last).map(move |j| {
        let (a, b) = ((j * from) as u64, ((j + 1) * from) as u64);
        (j, hi.min(b) - lo.max(a))
    })
}

fn aggregate(from: usize, to: usize, cells: impl Iterator<Item = (usize, usize, f64)>) -> DMatrix<f64> {
    let mut w = DMatrix::zeros(to, to);
    let unit = to as f64;
    for (u, v, mass) in cells {
        for (j, ou) in spread(u, from, to) {
            for (k, ov) in spread(v, from, to) {
                w[(j, k)] += mass * (ou as f64 / unit) * (ov as f64 / unit);
            }
        }
    }
    // Mirror halves agree up to summation order; average them so the result
    // is exactly symmetric.
    for j in 0..to {
        for k in (j + 1)..to {
            let mean = 0.5 * (w[(j, k)] + w[(k, j)]);
            w[(j, k)] = mean;
            w[(k, j)] = mean;
        }
    }
    w
}

fn equipartition(q: usize) -> Vec<f64> {
    (0..=q).map(|j| j as f64 / q as f64).collect()
}

/// Exact integral of the induced step graphon of `g` over each
/// `I'_j x I'_k` of the equipartition into `q` intervals.
pub fn coarsen(g: &Graph, q: usize) -> Result<CoarseGraph> {
    let n = g.n();
    if q == 0 || q > n {
        return Err(Error::InvalidPartition(format!("coarse count {q} must lie in 1..={n}")));
    }
    let cell = 1.0 / (n as f64 * n as f64);
    let cells = g.edges().flat_map(|(u, v, w)| [(u, v, w * cell), (v, u, w * cell)]);
    Ok(CoarseGraph { q, weights: aggregate(n, q, cells), interval_bounds: equipartition(q) })
}

impl CoarseGraph {
    /// Integrates this coarse graph further onto an equipartition into `q2`
    /// intervals.
    pub fn coarsen(&self, q2: usize) -> Result<CoarseGraph> {
        if q2 == 0 || q2 > self.q {
            return Err(Error::InvalidPartition(format!("coarse count {q2} must lie in 1..={}", self.q)));
        }
        let q = self.q;
        let cells = (0..q).flat_map(|a| (0..q).map(move |b| (a, b))).map(|(a, b)| (a, b, self.weights[(a, b)]));
        Ok(CoarseGraph { q: q2, weights: aggregate(q, q2, cells), interval_bounds: equipartition(q2) })
    }

    pub fn total_mass(&self) -> f64 {
        self.weights.sum()
    }
}

/// Greedy selection of `p` intervals on the coarse graph, in selection order.
pub fn sample_intervals(cg: &CoarseGraph, p: usize) -> Result<IntervalSample> {
    if p == 0 {
        return Err(Error::InvalidParams("interval count p must be at least 1".into()));
    }
    let interval_indices = greedy_sample_weighted(&cg.weights, p)?;
    Ok(IntervalSample { q: cg.q, p, interval_indices })
}

/// Interval of node `k` among `n`, `floor(k q / n)`.
pub fn interval_of(k: usize, n: usize, q: usize) -> usize {
    k * q / n
}

/// Nodes of `n` mapped to interval `j`, ascending.
pub fn interval_members(j: usize, n: usize, q: usize) -> Vec<usize> {
    let start = (j * n).div_ceil(q);
    let end = ((j + 1) * n).div_ceil(q).min(n);
    (start..end).collect()
}

/// Per-interval quotas: `r = floor(m / (p - 1))` for the first `p - 1`
/// intervals and the remainder for the last; all `m` when `p = 1`.
pub fn quotas(m: usize, p: usize) -> Vec<usize> {
    if p == 1 {
        return vec![m];
    }
    let r = m / (p - 1);
    let mut q = vec![r; p - 1];
    q.push(m - (p - 1) * r);
    q
}

/// Caps `want` at `supply` and hands the deficit out one node at a time,
/// cycling through entries in order, to those with spare supply.
fn redistribute(want: &[usize], supply: &[usize]) -> Vec<usize> {
    let mut take: Vec<usize> = want.iter().zip(supply).map(|(&w, &s)| w.min(s)).collect();
    let mut deficit: usize = want.iter().sum::<usize>() - take.iter().sum::<usize>();
    while deficit > 0 {
        let mut moved = false;
        for i in 0..take.len() {
            if deficit > 0 && take[i] < supply[i] {
                take[i] += 1;
                deficit -= 1;
                moved = true;
            }
        }
        if !moved {
            break;
        }
    }
    take
}

fn draw(members: &[usize], count: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    index::sample(rng, members.len(), count).into_iter().map(|i| members[i]).collect()
}

/// Draws `m` nodes from the selected intervals of `iv` under the node map
/// [`interval_of`]. Output lists intervals in selection order.
pub fn sample_nodes(g: &Graph, iv: &IntervalSample, m: usize, strategy: NodeStrategy, seed: u64) -> Result<SampleSet> {
    let n = g.n();
    let p = iv.interval_indices.len();
    if p == 0 || iv.p != p {
        return Err(Error::InvalidParams(format!("interval sample lists {p} intervals, p = {}", iv.p)));
    }
    if iv.q == 0 || iv.q > n {
        return Err(Error::InvalidPartition(format!("q = {} must lie in 1..={n}", iv.q)));
    }
    if let Some(&bad) = iv.interval_indices.iter().find(|&&j| j >= iv.q) {
        return Err(Error::InvalidParams(format!("interval {bad} out of range for q = {}", iv.q)));
    }
    if m < p {
        return Err(Error::InvalidParams(format!("budget m = {m} is below p = {p}")));
    }
    if let NodeStrategy::Community { c: 0 } = strategy {
        return Err(Error::InvalidParams("community count must be at least 1".into()));
    }
    let members: Vec<Vec<usize>> = iv.interval_indices.iter().map(|&j| interval_members(j, n, iv.q)).collect();
    let supply: Vec<usize> = members.iter().map(Vec::len).collect();
    let take = redistribute(&quotas(m, p), &supply);

    let mut indices = Vec::with_capacity(m);
    for (slot, (nodes, &count)) in members.iter().zip(&take).enumerate() {
        let stream = derive_seed(seed, slot as u64);
        let mut rng = ChaCha8Rng::seed_from_u64(stream);
        match strategy {
            NodeStrategy::Uniform => indices.extend(draw(nodes, count, &mut rng)),
            NodeStrategy::Community { c } => {
                if count == 0 {
                    continue;
                }
                let split = community_split(g, nodes, c, derive_seed(stream, u64::MAX))?;
                let sizes: Vec<usize> = split.groups.iter().map(Vec::len).collect();
                let per = fill_round_robin(count, &sizes, vec![0; sizes.len()]);
                for (group, &k) in split.groups.iter().zip(&per) {
                    indices.extend(draw(group, k, &mut rng));
                }
            }
        }
    }
    let mut out = SampleSet::new(SampleMethod::Graphon, Some(seed), m, indices);
    out.budget_met = out.len() == m;
    Ok(out)
}

/// Assigns `count` draws over groups one at a time in order, skipping
/// exhausted groups.
fn fill_round_robin(count: usize, sizes: &[usize], mut per: Vec<usize>) -> Vec<usize> {
    let mut left = count;
    while left > 0 {
        let mut moved = false;
        for i in 0..sizes.len() {
            if left > 0 && per[i] < sizes[i] {
                per[i] += 1;
                left -= 1;
                moved = true;
            }
        }
        if !moved {
            break;
        }
    }
    per
}

/// Result of the full pipeline; `intervals` can be reapplied to another
/// graph drawn from the same graphon with [`sample_nodes`].
#[derive(Debug, Clone)]
pub struct GraphonSample {
    pub samples: SampleSet,
    pub intervals: IntervalSample,
    pub coarse: CoarseGraph,
}

/// Coarsen to `q` intervals, pick `p` of them, then draw `m` nodes.
pub fn graphon_sample(
    g: &Graph,
    q: usize,
    p: usize,
    m: usize,
    strategy: NodeStrategy,
    seed: u64,
) -> Result<GraphonSample> {
    if p == 0 {
        return Err(Error::InvalidParams("interval count p must be at least 1".into()));
    }
    let coarse = coarsen(g, q)?;
    let intervals = sample_intervals(&coarse, p)?;
    let samples = sample_nodes(g, &intervals, m, strategy, seed)?;
    Ok(GraphonSample { samples, intervals, coarse })
}
