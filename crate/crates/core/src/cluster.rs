//! Heat-kernel PageRank by Monte-Carlo walks, sweep cuts, and recursive
//! community bisection.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};

use crate::derive_seed;
use crate::error::{Error, Result};
use crate::graph::Graph;

/// Default diffusion time for community splitting.
pub const DEFAULT_T: f64 = 5.0;
/// Default walk count per subset node for community splitting.
pub const WALKS_PER_NODE: usize = 100;

/// Endpoint distribution of heat-kernel random walks.
#[derive(Debug, Clone, PartialEq)]
pub struct HkprScores {
    pub scores: Vec<f64>,
    pub t: f64,
    pub walks: usize,
    pub seeds: Vec<usize>,
}

/// Walk-length cap `ceil(10 t) + 20`.
pub fn max_walk_len(t: f64) -> u64 {
    (10.0 * t).ceil() as u64 + 20
}

/// Monte-Carlo heat-kernel PageRank.
///
/// Each walk starts at a uniformly chosen seed, draws `k ~ Poisson(t)`
/// (capped by [`max_walk_len`]) and takes `k` steps to weight-proportional
/// neighbors; a walk at an isolated node stays there. Scores are endpoint
/// frequencies, so they sum to exactly 1 up to rounding.
pub fn heat_kernel_pagerank(g: &Graph, seeds: &[usize], t: f64, walks: usize, seed: u64) -> Result<HkprScores> {
    if seeds.is_empty() {
        return Err(Error::EmptySeeds);
    }
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::InvalidParams(format!("diffusion time {t} must be finite and >= 0")));
    }
    if walks == 0 {
        return Err(Error::InvalidParams("walks must be at least 1".into()));
    }
    let n = g.n();
    if let Some(&bad) = seeds.iter().find(|&&s| s >= n) {
        return Err(Error::InvalidParams(format!("seed node {bad} out of range for n = {n}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let poisson = if t > 0.0 { Some(Poisson::new(t).map_err(|e| Error::InvalidParams(e.to_string()))?) } else { None };
    let cap = max_walk_len(t);
    let mut counts = vec![0u64; n];
    for _ in 0..walks {
        let mut u = seeds[rng.random_range(0..seeds.len())];
        let steps = poisson.as_ref().map_or(0, |p| (p.sample(&mut rng) as u64).min(cap));
        for _ in 0..steps {
            let deg = g.degree(u);
            if deg <= 0.0 {
                break;
            }
            u = weighted_neighbor(g, u, rng.random::<f64>() * deg);
        }
        counts[u] += 1;
    }
    let scores = counts.iter().map(|&c| c as f64 / walks as f64).collect();
    Ok(HkprScores { scores, t, walks, seeds: seeds.to_vec() })
}

fn weighted_neighbor(g: &Graph, u: usize, target: f64) -> usize {
    let ids = g.neighbor_ids(u);
    let mut acc = 0.0;
    for (&v, &w) in ids.iter().zip(g.neighbor_weights(u)) {
        acc += w;
        if target < acc {
            return v;
        }
    }
    *ids.last().expect("positive degree implies a neighbor")
}

/// Sweep cut of `subset` by `scores[u] / max(deg(u), 1)`, descending with ties
/// by index. Returns the prefix of least conductance within the subgraph
/// induced on `subset` (smallest prefix on ties) and the rest of `subset`.
/// A cut with no volume on either side has conductance 1.
pub fn sweep_cut(g: &Graph, scores: &[f64], subset: &[usize]) -> Result<(Vec<usize>, Vec<usize>)> {
    if subset.is_empty() {
        return Err(Error::EmptySet);
    }
    if scores.len() != g.n() {
        return Err(Error::DimensionError { expected: g.n(), got: scores.len() });
    }
    if subset.len() == 1 {
        return Ok((subset.to_vec(), Vec::new()));
    }
    let sub = g.induced_subgraph(subset)?;
    let s = subset.len();
    let mut order: Vec<usize> = (0..s).collect();
    let key = |i: usize| scores[subset[i]] / g.degree(subset[i]).max(1.0);
    order.sort_by(|&a, &b| key(b).total_cmp(&key(a)).then(subset[a].cmp(&subset[b])));

    let total_vol = sub.total_weight();
    let mut in_prefix = vec![false; s];
    let (mut cut, mut vol) = (0.0, 0.0);
    let mut best = (f64::INFINITY, 1);
    for (len, &u) in order.iter().enumerate().take(s - 1).map(|(i, u)| (i + 1, u)) {
        in_prefix[u] = true;
        vol += sub.degree(u);
        for (v, w) in sub.neighbors(u) {
            cut += if in_prefix[v] { -w } else { w };
        }
        let denom = vol.min(total_vol - vol);
        let phi = if denom > 0.0 { cut / denom } else { 1.0 };
        if phi < best.0 - 1e-12 {
            best = (phi, len);
        }
    }
    let mut community: Vec<usize> = order[..best.1].iter().map(|&i| subset[i]).collect();
    let mut rest: Vec<usize> = order[best.1..].iter().map(|&i| subset[i]).collect();
    community.sort_unstable();
    rest.sort_unstable();
    Ok((community, rest))
}

/// Disjoint groups covering a subset, from [`community_split`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommunitySplit {
    pub groups: Vec<Vec<usize>>,
    /// Number of trailing empty groups (only when `c > |subset|`).
    pub empty_groups: usize,
}

/// Splits `subset` into `c` groups by repeatedly bisecting the largest group
/// (first on ties) with heat-kernel PageRank from its highest-degree node,
/// followed by a sweep cut, all within the induced subgraph.
pub fn community_split(g: &Graph, subset: &[usize], c: usize, seed: u64) -> Result<CommunitySplit> {
    if subset.is_empty() {
        return Err(Error::EmptySet);
    }
    if c == 0 {
        return Err(Error::InvalidParams("community count must be at least 1".into()));
    }
    let mut groups = vec![subset.to_vec()];
    let mut round = 0u64;
    while groups.len() < c {
        let (idx, largest) = groups
            .iter()
            .enumerate()
            .fold((0, 0), |best, (i, grp)| if grp.len() > best.1 { (i, grp.len()) } else { best });
        if largest < 2 {
            break;
        }
        let group = &groups[idx];
        let sub = g.induced_subgraph(group)?;
        let hub = (0..sub.n())
            .fold(0, |best, i| if sub.degree(i) > sub.degree(best) { i } else { best });
        let hk = heat_kernel_pagerank(&sub, &[hub], DEFAULT_T, WALKS_PER_NODE * sub.n(), derive_seed(seed, round))?;
        let all: Vec<usize> = (0..sub.n()).collect();
        let (left, right) = sweep_cut(&sub, &hk.scores, &all)?;
        let left: Vec<usize> = left.iter().map(|&i| group[i]).collect();
        let right: Vec<usize> = right.iter().map(|&i| group[i]).collect();
        groups[idx] = left;
        groups.push(right);
        round += 1;
    }
    let empty_groups = c - groups.len();
    groups.resize(c, Vec::new());
    Ok(CommunitySplit { groups, empty_groups })
}
