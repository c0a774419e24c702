//! Independent oracles shared by the integration tests.

#![allow(dead_code)]

use graphon_sampling::Graph;
use nalgebra::DMatrix;
use proptest::prelude::*;

/// Cyclic Jacobi eigenvalues of a symmetric matrix, ascending.
pub fn jacobi_eigenvalues(a: &DMatrix<f64>) -> Vec<f64> {
    let n = a.nrows();
    let mut m = a.clone();
    for _sweep in 0..100 {
        let off: f64 = (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))).map(|(i, j)| m[(i, j)].powi(2)).sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                if m[(p, q)].abs() < 1e-300 {
                    continue;
                }
                let theta = (m[(q, q)] - m[(p, p)]) / (2.0 * m[(p, q)]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (mkp, mkq) = (m[(k, p)], m[(k, q)]);
                    m[(k, p)] = c * mkp - s * mkq;
                    m[(k, q)] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let (mpk, mqk) = (m[(p, k)], m[(q, k)]);
                    m[(p, k)] = c * mpk - s * mqk;
                    m[(q, k)] = s * mpk + c * mqk;
                }
            }
        }
    }
    let mut d: Vec<f64> = (0..n).map(|i| m[(i, i)]).collect();
    d.sort_by(f64::total_cmp);
    d
}

/// Dense `I - D^{-1/2} A D^{-1/2}` built entry by entry.
pub fn dense_laplacian(g: &Graph) -> DMatrix<f64> {
    let n = g.n();
    let a = g.to_dense();
    let d: Vec<f64> = (0..n).map(|i| a.row(i).sum()).collect();
    DMatrix::from_fn(n, n, |i, j| {
        let id = if i == j { 1.0 } else { 0.0 };
        if d[i] > 0.0 && d[j] > 0.0 {
            id - a[(i, j)] / (d[i] * d[j]).sqrt()
        } else {
            id
        }
    })
}

/// Heat-kernel distribution `sum_k e^-t t^k / k! * s P^k` with the walk
/// length capped at `cap` (mass beyond the cap lands at step `cap`).
pub fn heat_kernel_series(g: &Graph, seeds: &[usize], t: f64, cap: usize) -> Vec<f64> {
    let n = g.n();
    let a = g.to_dense();
    let mut p = a.clone();
    for i in 0..n {
        let d: f64 = a.row(i).sum();
        for j in 0..n {
            p[(i, j)] = if d > 0.0 { a[(i, j)] / d } else if i == j { 1.0 } else { 0.0 };
        }
    }
    let mut dist = vec![0.0; n];
    for &s in seeds {
        dist[s] += 1.0 / seeds.len() as f64;
    }
    let mut out = vec![0.0; n];
    let mut weight = (-t).exp();
    let mut remaining = 1.0;
    for k in 0..=cap {
        let w = if k == cap { remaining } else { weight };
        for i in 0..n {
            out[i] += w * dist[i];
        }
        remaining -= weight;
        weight *= t / (k + 1) as f64;
        let next: Vec<f64> = (0..n).map(|j| (0..n).map(|i| dist[i] * p[(i, j)]).sum()).collect();
        dist = next;
    }
    out
}

/// Conductance of `set` within `g` (volume of the smaller side).
pub fn conductance(g: &Graph, set: &[usize]) -> f64 {
    let inside: Vec<bool> = (0..g.n()).map(|u| set.contains(&u)).collect();
    let cut: f64 = g.edges().filter(|&(u, v, _)| inside[u] != inside[v]).map(|(_, _, w)| w).sum();
    let vol: f64 = set.iter().map(|&u| g.degree(u)).sum();
    let rest = g.total_weight() - vol;
    let den = vol.min(rest);
    if den > 0.0 {
        cut / den
    } else {
        1.0
    }
}

/// Random simple graph on `2..=max_n` nodes.
pub fn arb_graph(max_n: usize) -> impl Strategy<Value = Graph> {
    (2..=max_n, 0.05f64..0.5, any::<u64>()).prop_map(|(n, p, seed)| random_graph(n, p, seed, false))
}

/// Random connected simple graph on `3..=max_n` nodes.
pub fn arb_connected_graph(max_n: usize) -> impl Strategy<Value = Graph> {
    (3..=max_n, 0.0f64..0.3, any::<u64>()).prop_map(|(n, p, seed)| random_graph(n, p, seed, true))
}

/// Deterministic random graph; `connected` adds a random spanning tree.
pub fn random_graph(n: usize, p: f64, seed: u64, connected: bool) -> Graph {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
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
    }
    Graph::from_edges(n, &edges).unwrap()
}

pub fn rel_error(a: &[f64], b: &[f64]) -> f64 {
    let diff: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|y| y * y).sum::<f64>().sqrt();
    diff / nb.max(f64::MIN_POSITIVE)
}
