//! Uniqueness-set certification, pivot and greedy samplers, and
//! least-squares reconstruction of bandlimited signals.

use nalgebra::{DMatrix, DVector};
use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{normalized_laplacian, normalized_laplacian_dense, Graph, Signal};
use crate::spectral::{norm, Spectrum, SymmetricOperator};

/// How a [`SampleSet`] was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SampleMethod {
    Ge,
    Greedy,
    Graphon,
    Random,
}

impl std::fmt::Display for SampleMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            SampleMethod::Ge => "ge",
            SampleMethod::Greedy => "greedy",
            SampleMethod::Graphon => "graphon",
            SampleMethod::Random => "random",
        };
        f.write_str(s)
    }
}

fn is_true(b: &bool) -> bool {
    *b
}

fn yes() -> bool {
    true
}

/// Ordered distinct node indices with provenance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleSet {
    pub method: SampleMethod,
    pub seed: Option<u64>,
    pub budget: usize,
    pub indices: Vec<usize>,
    /// False when fewer than `budget` nodes were available.
    #[serde(default = "yes", skip_serializing_if = "is_true")]
    pub budget_met: bool,
}

impl SampleSet {
    pub fn new(method: SampleMethod, seed: Option<u64>, budget: usize, indices: Vec<usize>) -> Self {
        SampleSet { method, seed, budget, indices, budget_met: true }
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    /// Checks distinctness, range and the budget bound.
    pub fn validate(&self, n: usize) -> Result<()> {
        if self.indices.len() > self.budget {
            return Err(Error::InvalidParams(format!(
                "{} indices exceed budget {}",
                self.indices.len(),
                self.budget
            )));
        }
        let mut seen = vec![false; n];
        for &i in &self.indices {
            if i >= n {
                return Err(Error::InvalidParams(format!("index {i} out of range for n = {n}")));
            }
            if std::mem::replace(&mut seen[i], true) {
                return Err(Error::InvalidParams(format!("duplicate index {i}")));
            }
        }
        Ok(())
    }
}

/// Numerical rank of the row restriction `Psi_S` of the first `k`
/// eigenvectors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankReport {
    pub rank: usize,
    pub certified: bool,
}

fn restrict_rows(vk: &DMatrix<f64>, set: &[usize]) -> Result<DMatrix<f64>> {
    let n = vk.nrows();
    if let Some(&bad) = set.iter().find(|&&i| i >= n) {
        return Err(Error::InvalidParams(format!("index {bad} out of range for n = {n}")));
    }
    Ok(DMatrix::from_fn(set.len(), vk.ncols(), |r, c| vk[(set[r], c)]))
}

/// Rank of `Psi_S` counting singular values above `rel_tol * sigma_max`.
///
/// `rel_tol` defaults to `max(|S|, k) * eps`. A set is certified when the
/// rank equals `k`, which makes it a uniqueness set for every `PW_lambda`
/// with `lambda <= lambda_k`.
pub fn uniqueness_rank(spec: &Spectrum, set: &[usize], k: usize, rel_tol: Option<f64>) -> Result<RankReport> {
    if set.is_empty() {
        return Err(Error::EmptySet);
    }
    let vk = spec.band(k)?;
    let psi = restrict_rows(&vk, set)?;
    let rank = numerical_rank(&psi, rel_tol);
    Ok(RankReport { rank, certified: rank == k })
}

fn numerical_rank(m: &DMatrix<f64>, rel_tol: Option<f64>) -> usize {
    let sv = m.clone().svd(false, false).singular_values;
    let smax = sv.iter().copied().fold(0.0, f64::max);
    if smax == 0.0 {
        return 0;
    }
    let rel = rel_tol.unwrap_or(m.nrows().max(m.ncols()) as f64 * f64::EPSILON);
    sv.iter().filter(|&&s| s > rel * smax).count()
}

/// Gaussian elimination with partial row pivoting over the columns of `vk`.
///
/// At step `j` the unvisited row with the largest absolute entry in the
/// (eliminated) column `j` becomes the pivot; ties within `1e-12` go to the
/// lowest row index. Returns the pivot rows in pivot order.
pub fn ge_pivot_sample(vk: &DMatrix<f64>) -> Result<SampleSet> {
    let (n, k) = (vk.nrows(), vk.ncols());
    if k == 0 {
        return Err(Error::InvalidParams("need at least one column".into()));
    }
    if n < k {
        return Err(Error::RankDeficient { rank: n, needed: k });
    }
    // Row-major copy so eliminations stream through memory.
    let mut rows: Vec<Vec<f64>> = (0..n).map(|r| vk.row(r).iter().copied().collect()).collect();
    let tol = n.max(k) as f64 * f64::EPSILON * vk.amax();
    let mut visited = vec![false; n];
    let mut pivots = Vec::with_capacity(k);
    for j in 0..k {
        let mut best: Option<(usize, f64)> = None;
        for (r, row) in rows.iter().enumerate() {
            if visited[r] {
                continue;
            }
            let a = row[j].abs();
            if best.is_none_or(|(_, b)| a > b + 1e-12) {
                best = Some((r, a));
            }
        }
        let (p, magnitude) = best.expect("n >= k leaves an unvisited row");
        if magnitude <= tol {
            return Err(Error::RankDeficient { rank: j, needed: k });
        }
        visited[p] = true;
        pivots.push(p);
        let pivot_row = rows[p].clone();
        for (r, row) in rows.iter_mut().enumerate() {
            if visited[r] || row[j] == 0.0 {
                continue;
            }
            let factor = row[j] / pivot_row[j];
            for c in j..k {
                row[c] -= factor * pivot_row[c];
            }
        }
    }
    Ok(SampleSet::new(SampleMethod::Ge, None, k, pivots))
}

/// Greedy sampling without a spectral decomposition.
///
/// Each round finds the smallest-eigenvalue eigenvector of the normalized
/// Laplacian restricted to the unselected nodes (the unit signal of least
/// total variation supported there) and selects its largest-magnitude entry,
/// lowest index on ties.
pub fn greedy_sample(g: &Graph, m: usize) -> Result<SampleSet> {
    let n = g.n();
    if m == 0 {
        return Err(Error::InvalidParams("budget must be at least 1".into()));
    }
    if m > n {
        return Err(Error::BudgetError { m, n });
    }
    let lap = normalized_laplacian(g);
    let picks = greedy_core(n, m, |x, y| lap.apply(x, y));
    Ok(SampleSet::new(SampleMethod::Greedy, None, m, picks))
}

/// Greedy sampling on a dense symmetric weight matrix whose diagonal may be
/// nonzero (coarse graphs keep within-interval mass there).
pub fn greedy_sample_weighted(w: &DMatrix<f64>, m: usize) -> Result<Vec<usize>> {
    let n = w.nrows();
    if m == 0 {
        return Err(Error::InvalidParams("budget must be at least 1".into()));
    }
    if m > n {
        return Err(Error::BudgetError { m, n });
    }
    let lap = normalized_laplacian_dense(w);
    Ok(greedy_core(n, m, |x, y| lap.apply(x, y)))
}

const POWER_TOL: f64 = 1e-8;
const POWER_MAX_ITER: usize = 5000;
const TIE_TOL: f64 = 1e-9;

fn greedy_core(n: usize, m: usize, apply_lap: impl Fn(&[f64], &mut [f64])) -> Vec<usize> {
    let mut selected = vec![false; n];
    let mut picks = Vec::with_capacity(m);
    let mut y = vec![0.0; n];
    while picks.len() < m {
        let free = n - picks.len();
        if free == 0 {
            break;
        }
        // Power iteration on 2I - L restricted to the complement; its top
        // eigenvector is the bottom eigenvector of the restricted Laplacian.
        let start = 1.0 / (free as f64).sqrt();
        let mut x: Vec<f64> = selected.iter().map(|&s| if s { 0.0 } else { start }).collect();
        for _ in 0..POWER_MAX_ITER {
            apply_lap(&x, &mut y);
            for i in 0..n {
                y[i] = if selected[i] { 0.0 } else { 2.0 * x[i] - y[i] };
            }
            let theta: f64 = x.iter().zip(&y).map(|(a, b)| a * b).sum();
            let resid = x
                .iter()
                .zip(&y)
                .map(|(a, b)| (b - theta * a).powi(2))
                .sum::<f64>()
                .sqrt();
            let ny = norm(&y);
            if ny == 0.0 {
                break;
            }
            for i in 0..n {
                x[i] = y[i] / ny;
            }
            if resid <= POWER_TOL {
                break;
            }
        }
        let peak = (0..n)
            .filter(|&i| !selected[i])
            .map(|i| x[i].abs())
            .fold(0.0, f64::max);
        let pick = (0..n)
            .find(|&i| !selected[i] && x[i].abs() >= peak - TIE_TOL * peak.max(1e-300))
            .expect("complement is nonempty");
        selected[pick] = true;
        picks.push(pick);
    }
    picks
}

/// `m` nodes uniformly at random without replacement.
pub fn random_sample(n: usize, m: usize, seed: u64) -> Result<SampleSet> {
    if m > n {
        return Err(Error::BudgetError { m, n });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let indices = index::sample(&mut rng, n, m).into_vec();
    Ok(SampleSet::new(SampleMethod::Random, Some(seed), m, indices))
}

/// Least-squares reconstruction of a signal in `PW_{lambda_k}` from its
/// values `y` on `set`, solved by QR. Fails when `Psi_S` has rank below `k`.
pub fn reconstruct(spec: &Spectrum, k: usize, set: &[usize], y: &[f64]) -> Result<Signal> {
    if set.is_empty() {
        return Err(Error::EmptySet);
    }
    if y.len() != set.len() {
        return Err(Error::DimensionError { expected: set.len(), got: y.len() });
    }
    let vk = spec.band(k)?;
    if set.len() < k {
        return Err(Error::RankDeficient { rank: set.len(), needed: k });
    }
    let psi = restrict_rows(&vk, set)?;
    let rank = numerical_rank(&psi, None);
    if rank < k {
        return Err(Error::RankDeficient { rank, needed: k });
    }
    let qr = psi.qr();
    let rhs = qr.q().transpose() * DVector::from_column_slice(y);
    let c = qr
        .r()
        .solve_upper_triangular(&rhs)
        .ok_or(Error::RankDeficient { rank, needed: k })?;
    Ok(Signal((vk * c).iter().copied().collect()))
}

/// Minimum-norm least-squares fit through the pseudoinverse of `Psi_S`;
/// defined for any rank, used to score rank-deficient sets.
pub fn reconstruct_pinv(spec: &Spectrum, k: usize, set: &[usize], y: &[f64]) -> Result<Signal> {
    if y.len() != set.len() {
        return Err(Error::DimensionError { expected: set.len(), got: y.len() });
    }
    let vk = spec.band(k)?;
    let psi = restrict_rows(&vk, set)?;
    let eps = set.len().max(k) as f64 * f64::EPSILON * psi.amax().max(f64::MIN_POSITIVE);
    let c = psi
        .svd(true, true)
        .solve(&DVector::from_column_slice(y), eps)
        .map_err(|e| Error::InvalidParams(e.to_string()))?;
    Ok(Signal((vk * c).iter().copied().collect()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::normalized_laplacian;
    use crate::spectral::eig_sym;

    fn spectrum(g: &Graph) -> Spectrum {
        eig_sym(&normalized_laplacian(g), None).unwrap()
    }

    fn two_cliques(size: usize) -> Graph {
        let mut edges = Vec::new();
        for base in [0, size] {
            for i in 0..size {
                for j in (i + 1)..size {
                    edges.push((base + i, base + j));
                }
            }
        }
        Graph::from_edges(2 * size, &edges).unwrap()
    }

    #[test]
    fn rank_of_same_clique_pair() {
        let g = two_cliques(5);
        let s = spectrum(&g);
        let r = uniqueness_rank(&s, &[0, 1], 2, None).unwrap();
        assert_eq!(r, RankReport { rank: 1, certified: false });
        let r = uniqueness_rank(&s, &[0, 5], 2, None).unwrap();
        assert!(r.certified);
    }

    #[test]
    fn full_set_certifies() {
        let g = two_cliques(3);
        let s = spectrum(&g);
        let all: Vec<usize> = (0..6).collect();
        for k in 1..=6 {
            assert!(uniqueness_rank(&s, &all, k, None).unwrap().certified);
        }
        assert!(matches!(uniqueness_rank(&s, &[], 1, None), Err(Error::EmptySet)));
    }

    #[test]
    fn ge_selects_unit_rows() {
        let mut vk = DMatrix::zeros(6, 3);
        vk[(4, 0)] = 1.0;
        vk[(1, 1)] = 1.0;
        vk[(3, 2)] = 1.0;
        let s = ge_pivot_sample(&vk).unwrap();
        assert_eq!(s.indices, vec![4, 1, 3]);
    }

    #[test]
    fn ge_rank_deficient() {
        let vk = DMatrix::from_row_slice(3, 2, &[1.0, 2.0, 1.0, 2.0, 2.0, 4.0]);
        assert!(matches!(ge_pivot_sample(&vk), Err(Error::RankDeficient { rank: 1, needed: 2 })));
    }

    #[test]
    fn ge_two_block_layout() {
        // Rows repeat within blocks of sizes 3 and 4.
        let a = [0.5, 0.7];
        let b = [0.6, -0.3];
        let vk = DMatrix::from_fn(7, 2, |r, c| if r < 3 { a[c] } else { b[c] });
        let s = ge_pivot_sample(&vk).unwrap();
        assert_eq!(s.indices, vec![3, 0]);
    }

    #[test]
    fn greedy_k2_tie_goes_low() {
        let g = Graph::from_edges(2, &[(0, 1)]).unwrap();
        assert_eq!(greedy_sample(&g, 1).unwrap().indices, vec![0]);
    }

    #[test]
    fn greedy_full_budget_and_errors() {
        let g = Graph::from_edges(3, &[(0, 1), (1, 2)]).unwrap();
        let mut all = greedy_sample(&g, 3).unwrap().indices;
        all.sort();
        assert_eq!(all, vec![0, 1, 2]);
        assert!(matches!(greedy_sample(&g, 4), Err(Error::BudgetError { m: 4, n: 3 })));
    }

    #[test]
    fn reconstruct_exact_and_deficient() {
        let g = two_cliques(4);
        let s = spectrum(&g);
        let x: Vec<f64> = (0..8).map(|i| s.eigenvectors[(i, 0)] - 2.0 * s.eigenvectors[(i, 1)]).collect();
        let set = [2, 6];
        let y: Vec<f64> = set.iter().map(|&i| x[i]).collect();
        let rec = reconstruct(&s, 2, &set, &y).unwrap();
        for i in 0..8 {
            assert!((rec[i] - x[i]).abs() < 1e-12);
        }
        let bad = [0, 1, 2];
        let y: Vec<f64> = bad.iter().map(|&i| x[i]).collect();
        assert!(matches!(reconstruct(&s, 2, &bad, &y), Err(Error::RankDeficient { rank: 1, needed: 2 })));
    }

    #[test]
    fn random_sample_is_seeded() {
        let a = random_sample(100, 10, 3).unwrap();
        assert_eq!(a, random_sample(100, 10, 3).unwrap());
        a.validate(100).unwrap();
        assert!(random_sample(5, 6, 0).is_err());
    }

    #[test]
    fn sample_set_json_shape() {
        let s = SampleSet::new(SampleMethod::Graphon, Some(7), 3, vec![2, 0, 1]);
        let v: serde_json::Value = serde_json::to_value(&s).unwrap();
        assert_eq!(v, serde_json::json!({"method": "graphon", "seed": 7, "budget": 3, "indices": [2, 0, 1]}));
        let mut short = s.clone();
        short.budget_met = false;
        let back: SampleSet = serde_json::from_str(&serde_json::to_string(&short).unwrap()).unwrap();
        assert!(!back.budget_met);
    }
}
