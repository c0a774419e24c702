//! Stochastic block models and random graphs drawn from step graphons.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::graphon::StepGraphon;

/// A graph together with the latent positions its nodes were drawn at.
#[derive(Debug, Clone)]
pub struct LatentGraph {
    pub graph: Graph,
    /// Positions in `[0, 1]`, ascending when sorted sampling was requested.
    pub latents: Vec<f64>,
    /// Block (or mixture component) label of each node.
    pub components: Vec<usize>,
}

/// Step graphon with blocks `b` over consecutive intervals of the given
/// measures.
pub fn sbm_graphon(b: &DMatrix<f64>, sizes: &[f64]) -> Result<StepGraphon> {
    if sizes.len() != b.nrows() {
        return Err(Error::DimensionError { expected: b.nrows(), got: sizes.len() });
    }
    if sizes.iter().any(|&s| !(s > 0.0 && s.is_finite())) {
        return Err(Error::InvalidPartition("block sizes must be positive".into()));
    }
    let total: f64 = sizes.iter().sum();
    if (total - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidPartition(format!("block sizes sum to {total}, not 1")));
    }
    let mut boundaries = Vec::with_capacity(sizes.len() + 1);
    boundaries.push(0.0);
    let mut acc = 0.0;
    for &s in &sizes[..sizes.len() - 1] {
        acc += s;
        boundaries.push(acc);
    }
    boundaries.push(1.0);
    StepGraphon::new(boundaries, b.clone())
}

/// Draws `n` i.i.d. uniform latents and independent Bernoulli edges with
/// probabilities `W(u_i, u_j)`.
pub fn sample_graph(w: &StepGraphon, n: usize, seed: u64, sort: bool) -> Result<LatentGraph> {
    if n == 0 {
        return Err(Error::EmptyGraph);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut latents: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
    if sort {
        latents.sort_by(f64::total_cmp);
    }
    let components: Vec<usize> = latents.iter().map(|&u| w.cell_of(u)).collect();
    let edges = bernoulli_edges(n, |i, j| w.block()[(components[i], components[j])], &mut rng);
    let graph = Graph::from_edges(n, &edges)?;
    Ok(LatentGraph { graph, latents, components })
}

pub(crate) fn bernoulli_edges(n: usize, prob: impl Fn(usize, usize) -> f64, rng: &mut ChaCha8Rng) -> Vec<(usize, usize)> {
    let mut edges = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            if rng.random::<f64>() < prob(i, j) {
                edges.push((i, j));
            }
        }
    }
    edges
}

/// Noiseless blockmodel matrix: `block[(a, b)]` on every entry (diagonal
/// included) between the `sizes[a]` nodes of block `a` and those of block `b`.
pub fn blockmodel_matrix(block: &DMatrix<f64>, sizes: &[usize]) -> Result<DMatrix<f64>> {
    if block.nrows() != block.ncols() || sizes.len() != block.nrows() {
        return Err(Error::DimensionError { expected: block.nrows(), got: sizes.len() });
    }
    let labels: Vec<usize> = sizes.iter().enumerate().flat_map(|(b, &s)| std::iter::repeat_n(b, s)).collect();
    let n = labels.len();
    if n == 0 {
        return Err(Error::EmptyGraph);
    }
    Ok(DMatrix::from_fn(n, n, |i, j| block[(labels[i], labels[j])]))
}
