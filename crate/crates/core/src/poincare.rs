//! Poincare constants of node sets through the doubled graph `Gamma(S)`, and
//! the bandwidth below which the complement of `S` is a uniqueness set.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{normalized_laplacian, Graph};
use crate::spectral::{eig_sym, norm, SymmetricOperator};

/// Eigenvalues at or below this are treated as zero.
pub const ZERO_EIGEN_TOL: f64 = 1e-9;
/// Slack allowed in the numerical check of the inequality.
pub const VERIFY_SLACK: f64 = 1e-9;

/// `Gamma(S)` with node order `S`, then `N(S)`, then the mirror `S'`.
#[derive(Debug, Clone)]
pub struct GammaGraph {
    pub graph: Graph,
    pub set: Vec<usize>,
    pub neighborhood: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoincareCertificate {
    #[serde(rename = "S")]
    pub set: Vec<usize>,
    pub neighborhood: Vec<usize>,
    pub lambda1: f64,
    #[serde(rename = "Lambda")]
    pub poincare_constant: f64,
    /// The complement of `S` is a uniqueness set for every bandwidth below
    /// this value.
    pub bandwidth: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PoincareReport {
    pub trials: usize,
    pub max_ratio: f64,
    #[serde(rename = "Lambda")]
    pub poincare_constant: f64,
}

fn membership(g: &Graph, s: &[usize]) -> Result<Vec<bool>> {
    let n = g.n();
    let mut inside = vec![false; n];
    for &u in s {
        if u >= n {
            return Err(Error::InvalidParams(format!("node {u} out of range for n = {n}")));
        }
        if std::mem::replace(&mut inside[u], true) {
            return Err(Error::InvalidParams(format!("node {u} listed twice")));
        }
    }
    Ok(inside)
}

/// Nodes outside `S` with positive edge weight into `S`, ascending.
pub fn neighborhood(g: &Graph, s: &[usize]) -> Result<Vec<usize>> {
    let inside = membership(g, s)?;
    let mut touched = vec![false; g.n()];
    for &u in s {
        for (v, w) in g.neighbors(u) {
            if !inside[v] && w > 0.0 {
                touched[v] = true;
            }
        }
    }
    Ok((0..g.n()).filter(|&v| touched[v]).collect())
}

/// Builds `Gamma(S)`: the subgraph on `S ∪ N(S)` glued along `N(S)` to a
/// mirror copy of itself, with no edges between `S` and `S'`.
pub fn gamma_graph(g: &Graph, s: &[usize]) -> Result<GammaGraph> {
    let nb = neighborhood(g, s)?;
    if nb.is_empty() {
        return Err(Error::DisconnectedSet);
    }
    let (k, m) = (s.len(), nb.len());
    let mut local = vec![usize::MAX; g.n()];
    for (i, &u) in s.iter().chain(&nb).enumerate() {
        local[u] = i;
    }
    let mirror = |i: usize| if i < k { k + m + i } else { i };
    let mut edges = Vec::new();
    for &u in s.iter().chain(&nb) {
        let i = local[u];
        for (v, w) in g.neighbors(u) {
            let j = local[v];
            if j == usize::MAX || j <= i {
                continue;
            }
            edges.push((i, j, w));
            if i < k || j < k {
                edges.push((mirror(i), mirror(j), w));
            }
        }
    }
    let graph = crate::graph::build_graph(&edges, 2 * k + m)?;
    Ok(GammaGraph { graph, set: s.to_vec(), neighborhood: nb })
}

/// Smallest nonzero normalized-Laplacian eigenvalue of `Gamma(S)` and the
/// resulting Poincare constant and bandwidth.
pub fn poincare_constant(g: &Graph, s: &[usize]) -> Result<PoincareCertificate> {
    poincare_constant_with(g, s, ZERO_EIGEN_TOL)
}

pub fn poincare_constant_with(g: &Graph, s: &[usize], zero_tol: f64) -> Result<PoincareCertificate> {
    if s.is_empty() {
        return Err(Error::EmptySet);
    }
    if s.len() >= g.n() {
        return Err(Error::InvalidParams("S must be a proper subset".into()));
    }
    let gamma = gamma_graph(g, s)?;
    let lap = normalized_laplacian(&gamma.graph);
    let dim = lap.dim();
    // The kernel has one dimension per connected component.
    let comps = gamma.graph.components().iter().max().map_or(0, |&c| c + 1);
    let want = (comps + 1).min(dim);
    let spec = eig_sym(&lap, Some(want))?;
    let lambda1 = spec
        .eigenvalues
        .iter()
        .copied()
        .find(|&l| l > zero_tol)
        .ok_or(Error::DegenerateSpectrum { threshold: zero_tol })?;
    Ok(PoincareCertificate {
        set: gamma.set,
        neighborhood: gamma.neighborhood,
        lambda1,
        poincare_constant: 1.0 / lambda1,
        bandwidth: lambda1,
    })
}

/// `||x|| / ||L x||` for a signal supported on `S` (0 for the zero signal).
pub fn poincare_ratio(g: &Graph, s: &[usize], x: &[f64]) -> Result<f64> {
    if x.len() != g.n() {
        return Err(Error::DimensionError { expected: g.n(), got: x.len() });
    }
    let inside = membership(g, s)?;
    if let Some(i) = (0..g.n()).find(|&i| !inside[i] && x[i] != 0.0) {
        return Err(Error::InvalidSupport(i));
    }
    let nx = norm(x);
    if nx == 0.0 {
        return Ok(0.0);
    }
    let mut y = vec![0.0; x.len()];
    normalized_laplacian(g).apply(x, &mut y);
    let ny = norm(&y);
    Ok(if ny == 0.0 { f64::INFINITY } else { nx / ny })
}

/// Draws `trials` Gaussian signals supported on `S` and checks
/// `||x|| <= Lambda ||L x|| + slack` for each.
pub fn verify_poincare(g: &Graph, s: &[usize], trials: usize, seed: u64) -> Result<PoincareReport> {
    let cert = poincare_constant(g, s)?;
    let lap = normalized_laplacian(g);
    let big = cert.poincare_constant;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x = vec![0.0; g.n()];
    let mut y = vec![0.0; g.n()];
    let mut max_ratio = 0.0f64;
    for _ in 0..trials {
        for &u in s {
            x[u] = StandardNormal.sample(&mut rng);
        }
        lap.apply(&x, &mut y);
        let (nx, ny) = (norm(&x), norm(&y));
        if nx > big * ny + VERIFY_SLACK {
            return Err(Error::TheoremViolation { ratio: nx / ny, bound: big });
        }
        if nx > 0.0 {
            max_ratio = max_ratio.max(nx / ny);
        }
    }
    Ok(PoincareReport { trials, max_ratio, poincare_constant: big })
}
