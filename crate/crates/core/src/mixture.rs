//! Mixture models for random graphs with uniform components on disjoint
//! intervals and a piecewise-constant kernel, their step-graphon form, and the
//! separation quantities that make up the difficulty function.
//!
//! Each component `P_m` is a probability measure, uniform on its support. The
//! kernel is constant on the cells of a partition of the domain: by default
//! one cell per support (in component order), or the cells between
//! `kernel_breaks` when given. Every integral then reduces to finite sums over
//! the occupancy matrix `mu[(m, c)] = |supp_m ∩ cell_c| / |supp_m|`.

use nalgebra::DMatrix;
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::graphon::StepGraphon;
use crate::models::{bernoulli_edges, LatentGraph};

/// Default grid resolution per support for the indivisibility search.
pub const DEFAULT_GRID: usize = 64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixtureModel {
    #[serde(rename = "K")]
    pub k: usize,
    pub weights: Vec<f64>,
    pub supports: Vec<[f64; 2]>,
    pub kernel: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kernel_breaks: Option<Vec<f64>>,
}

/// Piecewise-constant function on the kernel cells of the domain.
#[derive(Debug, Clone, PartialEq)]
pub struct StepFunction {
    pub cells: Vec<(f64, f64)>,
    pub values: Vec<f64>,
}

impl StepFunction {
    /// Value at `x`, or 0 outside every cell.
    pub fn eval(&self, x: f64) -> f64 {
        self.cells
            .iter()
            .position(|&(a, b)| a <= x && x < b)
            .or_else(|| self.cells.iter().position(|&(_, b)| x == b))
            .map_or(0.0, |c| self.values[c])
    }
}

/// Step graphon of a mixture with the provenance of each of its cells.
#[derive(Debug, Clone)]
pub struct MixtureGraphon {
    pub graphon: StepGraphon,
    /// Mixture component owning each graphon cell.
    pub components: Vec<usize>,
    /// Kernel cell each graphon cell maps to.
    pub kernel_cells: Vec<usize>,
}

fn overlap(a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.1.min(b.1) - a.0.max(b.0)).max(0.0)
}

impl MixtureModel {
    /// Block model with one kernel cell per support.
    pub fn new(weights: Vec<f64>, supports: Vec<[f64; 2]>, kernel: Vec<Vec<f64>>) -> Result<Self> {
        let mm = MixtureModel { k: weights.len(), weights, supports, kernel, kernel_breaks: None };
        mm.validate()?;
        Ok(mm)
    }

    pub fn validate(&self) -> Result<()> {
        let k = self.k;
        if k == 0 {
            return Err(Error::InvalidParams("mixture needs at least one component".into()));
        }
        if self.weights.len() != k {
            return Err(Error::DimensionError { expected: k, got: self.weights.len() });
        }
        if self.supports.len() != k {
            return Err(Error::DimensionError { expected: k, got: self.supports.len() });
        }
        if self.weights.iter().any(|&w| !(w >= 0.0 && w.is_finite())) {
            return Err(Error::InvalidParams("weights must be nonnegative".into()));
        }
        let total: f64 = self.weights.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParams(format!("weights sum to {total}, not 1")));
        }
        for (m, s) in self.supports.iter().enumerate() {
            if !(s[0].is_finite() && s[1].is_finite() && s[0] < s[1]) {
                return Err(Error::InvalidSupport(m));
            }
        }
        for a in 0..k {
            for b in (a + 1)..k {
                let (sa, sb) = (self.supports[a], self.supports[b]);
                if overlap((sa[0], sa[1]), (sb[0], sb[1])) > 0.0 {
                    return Err(Error::InvalidSupport(b));
                }
            }
        }
        let c = match &self.kernel_breaks {
            None => k,
            Some(br) => {
                if br.len() < 2 || br.windows(2).any(|w| w[1].partial_cmp(&w[0]) != Some(std::cmp::Ordering::Greater)) {
                    return Err(Error::InvalidPartition("kernel breaks must be strictly ascending".into()));
                }
                if let Some(m) = self
                    .supports
                    .iter()
                    .position(|s| s[0] < br[0] || s[1] > br[br.len() - 1])
                {
                    return Err(Error::InvalidSupport(m));
                }
                br.len() - 1
            }
        };
        if self.kernel.len() != c {
            return Err(Error::DimensionError { expected: c, got: self.kernel.len() });
        }
        for (i, row) in self.kernel.iter().enumerate() {
            if row.len() != c {
                return Err(Error::DimensionError { expected: c, got: row.len() });
            }
            for (j, &v) in row.iter().enumerate() {
                if !(0.0..=1.0).contains(&v) {
                    return Err(Error::InvalidParams(format!("kernel entry ({i}, {j}) = {v} outside [0, 1]")));
                }
                let defect = (v - self.kernel[j][i]).abs();
                if defect > 1e-12 {
                    return Err(Error::NotSymmetric { defect });
                }
            }
        }
        Ok(())
    }

    /// Kernel cells as intervals of the domain.
    pub fn cells(&self) -> Vec<(f64, f64)> {
        match &self.kernel_breaks {
            None => self.supports.iter().map(|s| (s[0], s[1])).collect(),
            Some(br) => br.windows(2).map(|w| (w[0], w[1])).collect(),
        }
    }

    pub fn kernel_matrix(&self) -> DMatrix<f64> {
        let c = self.kernel.len();
        DMatrix::from_fn(c, c, |i, j| self.kernel[i][j])
    }

    /// Supremum of the kernel.
    pub fn kernel_sup(&self) -> f64 {
        self.kernel.iter().flatten().copied().fold(0.0, f64::max)
    }

    /// Fraction of each component's mass in each kernel cell.
    pub fn occupancy(&self) -> DMatrix<f64> {
        let cells = self.cells();
        DMatrix::from_fn(self.k, cells.len(), |m, c| {
            if self.kernel_breaks.is_none() {
                return if m == c { 1.0 } else { 0.0 };
            }
            let s = (self.supports[m][0], self.supports[m][1]);
            overlap(s, cells[c]) / (s.1 - s.0)
        })
    }

    /// Kernelized densities `p_m(theta) = int k(omega, theta) dP_m(omega)`,
    /// one row per component, one column per kernel cell.
    pub fn kernelized_densities(&self) -> DMatrix<f64> {
        self.occupancy() * self.kernel_matrix()
    }

    /// CDF of the mixture at `x`.
    pub fn cdf(&self, x: f64) -> f64 {
        self.weights
            .iter()
            .zip(&self.supports)
            .map(|(&w, s)| w * ((x - s[0]) / (s[1] - s[0])).clamp(0.0, 1.0))
            .sum::<f64>()
            .min(1.0)
    }

    fn cell_of(&self, x: f64, cells: &[(f64, f64)]) -> usize {
        cells
            .iter()
            .position(|&(a, b)| a <= x && x < b)
            .unwrap_or_else(|| cells.iter().position(|&(_, b)| x == b).unwrap_or(cells.len() - 1))
    }
}

/// Square-root kernelized density `q_i = sqrt(p_i)` of component `i`.
pub fn sqrt_kernelized_density(mm: &MixtureModel, i: usize) -> Result<StepFunction> {
    mm.validate()?;
    if i >= mm.k {
        return Err(Error::InvalidParams(format!("component {i} out of range for K = {}", mm.k)));
    }
    let p = mm.kernelized_densities();
    Ok(StepFunction { cells: mm.cells(), values: p.row(i).iter().map(|v| v.max(0.0).sqrt()).collect() })
}

/// Pushes the kernel forward through the inverse CDF of the mixture. Cells
/// of the result follow the supports in domain order, subdivided at kernel
/// breaks, with widths equal to their probability mass.
pub fn mixture_to_graphon(mm: &MixtureModel) -> Result<MixtureGraphon> {
    mm.validate()?;
    if let Some(m) = mm.weights.iter().position(|&w| w == 0.0) {
        return Err(Error::DegenerateComponent(m));
    }
    let cells = mm.cells();
    let mut order: Vec<usize> = (0..mm.k).collect();
    order.sort_by(|&a, &b| mm.supports[a][0].total_cmp(&mm.supports[b][0]));
    let occ = mm.occupancy();
    let mut widths = Vec::new();
    let mut components = Vec::new();
    let mut kernel_cells = Vec::new();
    for &m in &order {
        let mut parts: Vec<(f64, usize)> = (0..cells.len())
            .filter(|&c| occ[(m, c)] > 0.0)
            .map(|c| (cells[c].0.max(mm.supports[m][0]), c))
            .collect();
        parts.sort_by(|a, b| a.0.total_cmp(&b.0));
        for (_, c) in parts {
            widths.push(mm.weights[m] * occ[(m, c)]);
            components.push(m);
            kernel_cells.push(c);
        }
    }
    let mut boundaries = Vec::with_capacity(widths.len() + 1);
    boundaries.push(0.0);
    let mut acc = 0.0;
    for w in &widths[..widths.len() - 1] {
        acc += w;
        boundaries.push(acc);
    }
    boundaries.push(1.0);
    let kernel = mm.kernel_matrix();
    let q = widths.len();
    let block = DMatrix::from_fn(q, q, |i, j| kernel[(kernel_cells[i], kernel_cells[j])]);
    let graphon = StepGraphon::new(boundaries, block)?;
    Ok(MixtureGraphon { graphon, components, kernel_cells })
}

/// Latent draw of a mixture: positions reported through the mixture CDF
/// (ascending) with their component labels.
#[derive(Debug, Clone, PartialEq)]
pub struct MixtureLatents {
    /// Raw positions in the domain, ascending.
    pub points: Vec<f64>,
    /// `F(points)`, positions in `[0, 1]`.
    pub latents: Vec<f64>,
    pub components: Vec<usize>,
}

/// First sampling stage: labels `z ~ weights`, positions uniform on the
/// label's support, sorted by position.
pub fn sample_mixture_latents(mm: &MixtureModel, n: usize, seed: u64) -> Result<MixtureLatents> {
    draw_latents(mm, n, &mut ChaCha8Rng::seed_from_u64(seed))
}

fn draw_latents(mm: &MixtureModel, n: usize, rng: &mut ChaCha8Rng) -> Result<MixtureLatents> {
    mm.validate()?;
    let pick = WeightedIndex::new(&mm.weights).map_err(|e| Error::InvalidParams(e.to_string()))?;
    let mut draws: Vec<(f64, usize)> = (0..n)
        .map(|_| {
            let z = pick.sample(rng);
            let [a, b] = mm.supports[z];
            (a + (b - a) * rng.random::<f64>(), z)
        })
        .collect();
    draws.sort_by(|x, y| x.0.total_cmp(&y.0));
    Ok(MixtureLatents {
        points: draws.iter().map(|&(x, _)| x).collect(),
        latents: draws.iter().map(|&(x, _)| mm.cdf(x)).collect(),
        components: draws.iter().map(|&(_, z)| z).collect(),
    })
}

/// Two-stage sampling: latents as in [`sample_mixture_latents`], then
/// Bernoulli edges in the kernel. Nodes are ordered by position.
pub fn sample_mixture_graph(mm: &MixtureModel, n: usize, seed: u64) -> Result<LatentGraph> {
    if n == 0 {
        return Err(Error::EmptyGraph);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draw = draw_latents(mm, n, &mut rng)?;
    let cells = mm.cells();
    let cell: Vec<usize> = draw.points.iter().map(|&x| mm.cell_of(x, &cells)).collect();
    let edges = bernoulli_edges(n, |i, j| mm.kernel[cell[i]][cell[j]], &mut rng);
    Ok(LatentGraph { graph: Graph::from_edges(n, &edges)?, latents: draw.latents, components: draw.components })
}

/// Expected adjacency `k(omega_i, omega_j)` of a latent draw, diagonal
/// included.
pub fn expected_adjacency(mm: &MixtureModel, draw: &MixtureLatents) -> DMatrix<f64> {
    let cells = mm.cells();
    let cell: Vec<usize> = draw.points.iter().map(|&x| mm.cell_of(x, &cells)).collect();
    let n = cell.len();
    DMatrix::from_fn(n, n, |i, j| mm.kernel[cell[i]][cell[j]])
}

/// Separation quantities of a mixture and the difficulty they combine into.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DifficultyReport {
    pub s_max: f64,
    pub coupling: f64,
    pub gamma_min: f64,
    pub b_max: f64,
    pub phi: f64,
}

/// `sqrt(K (s_max + coupling)) / (w_min gamma_min^2)`.
pub fn phi_from_parts(k: usize, w_min: f64, s_max: f64, coupling: f64, gamma_min: f64) -> f64 {
    (k as f64 * (s_max + coupling)).sqrt() / (w_min * gamma_min * gamma_min)
}

/// Similarity index `S(P_l, .)`, whose numerator involves only `P_l`.
pub fn similarity_index(mm: &MixtureModel, l: usize) -> Result<f64> {
    let occ = mm.occupancy();
    let p = mm.kernelized_densities();
    let num: f64 = (0..occ.ncols()).map(|c| p[(l, c)] * occ[(l, c)]).sum();
    let mixed: Vec<f64> = (0..occ.ncols()).map(|c| (0..mm.k).map(|m| mm.weights[m] * p[(m, c)]).sum()).collect();
    let den: f64 = (0..occ.ncols()).map(|c| mixed[c] * occ[(l, c)]).sum();
    if den <= 0.0 {
        return Err(Error::DegenerateComponent(l));
    }
    Ok(num / den)
}

/// Indivisibility of component `m`, minimized over threshold cuts of a
/// `grid`-cell discretization of its support.
pub fn indivisibility(mm: &MixtureModel, m: usize, grid: usize) -> Result<f64> {
    if grid < 2 {
        return Err(Error::InvalidParams("grid needs at least 2 cells".into()));
    }
    let cells = mm.cells();
    let [a, b] = mm.supports[m];
    let sub: Vec<usize> = (0..grid)
        .map(|i| mm.cell_of(a + (b - a) * (i as f64 + 0.5) / grid as f64, &cells))
        .collect();
    let kap = |i: usize, j: usize| mm.kernel[sub[i]][sub[j]];
    let row: Vec<f64> = (0..grid).map(|i| (0..grid).map(|j| kap(i, j)).sum()).collect();
    let total: f64 = row.iter().sum();
    if total <= 0.0 {
        return Err(Error::DegenerateComponent(m));
    }
    let mut best = f64::INFINITY;
    let mut p_s = 0.0;
    for t in 1..grid {
        p_s += row[t - 1];
        let p_c = total - p_s;
        if p_s <= 0.0 || p_c <= 0.0 {
            continue;
        }
        let cut: f64 = (0..t).map(|i| (t..grid).map(|j| kap(i, j)).sum::<f64>()).sum();
        // Grid normalizations 1/grid^2 cancel in the ratio.
        best = best.min(total * cut / (p_s * p_c));
    }
    if best.is_finite() {
        Ok(best)
    } else {
        Err(Error::DegenerateComponent(m))
    }
}

/// Computes the similarity, coupling, indivisibility and boundedness
/// parameters in closed form, and the difficulty `phi`.
pub fn difficulty(mm: &MixtureModel, grid: usize) -> Result<DifficultyReport> {
    mm.validate()?;
    if mm.k < 2 {
        return Err(Error::NeedsTwoComponents);
    }
    if let Some(m) = mm.weights.iter().position(|&w| w == 0.0) {
        return Err(Error::DegenerateComponent(m));
    }
    let occ = mm.occupancy();
    let p = mm.kernelized_densities();
    let ncell = occ.ncols();
    let kern = mm.kernel_matrix();
    let mixed: Vec<f64> = (0..ncell).map(|c| (0..mm.k).map(|m| mm.weights[m] * p[(m, c)]).sum()).collect();

    let mut s_max = 0.0f64;
    for l in 0..mm.k {
        s_max = s_max.max(similarity_index(mm, l)?);
    }
    let (mut coupling, mut b_max) = (0.0f64, 0.0f64);
    for m in 0..mm.k {
        let mut acc = 0.0;
        for c in 0..ncell {
            for d in 0..ncell {
                let mass = occ[(m, c)] * occ[(m, d)];
                let kv = kern[(c, d)];
                if mass == 0.0 || kv == 0.0 {
                    continue;
                }
                let own = kv / (p[(m, c)] * p[(m, d)]).sqrt();
                let mix = mm.weights[m] * kv / (mixed[c] * mixed[d]).sqrt();
                acc += mass * (own - mix).powi(2);
                b_max = b_max.max(own * own);
            }
        }
        coupling = coupling.max(acc);
    }
    let mut gamma_min = f64::INFINITY;
    for m in 0..mm.k {
        gamma_min = gamma_min.min(indivisibility(mm, m, grid)?);
    }
    let w_min = mm.weights.iter().copied().fold(f64::INFINITY, f64::min);
    let phi = phi_from_parts(mm.k, w_min, s_max, coupling, gamma_min);
    Ok(DifficultyReport { s_max, coupling, gamma_min, b_max, phi })
}

/// Outcome of the two alternative concentration conditions for
/// `A_1, ..., A_K` to form a uniqueness set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComponentCheck {
    pub concentration: bool,
    pub likelihood_ratio: bool,
}

impl ComponentCheck {
    pub fn holds(&self) -> bool {
        self.concentration || self.likelihood_ratio
    }
}

fn merged(set: &[(f64, f64)]) -> Result<Vec<(f64, f64)>> {
    let mut v = set.to_vec();
    if v.iter().any(|&(a, b)| !(0.0..=1.0).contains(&a) || !(0.0..=1.0).contains(&b) || a > b) {
        return Err(Error::InvalidParams("intervals must satisfy 0 <= a <= b <= 1".into()));
    }
    v.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut out: Vec<(f64, f64)> = Vec::new();
    for (a, b) in v {
        match out.last_mut() {
            Some(last) if a <= last.1 => last.1 = last.1.max(b),
            _ => out.push((a, b)),
        }
    }
    Ok(out)
}

/// `p_i(A_j) = int_{A_j} p_i(beta(u)) du` for every component `i` and set
/// `j`, with sets given as unions of intervals of `[0, 1]`.
pub fn kernelized_mass(mm: &MixtureModel, a_sets: &[Vec<(f64, f64)>]) -> Result<DMatrix<f64>> {
    let mg = mixture_to_graphon(mm)?;
    let p = mm.kernelized_densities();
    let bounds = mg.graphon.boundaries();
    let sets: Vec<Vec<(f64, f64)>> = a_sets.iter().map(|s| merged(s)).collect::<Result<_>>()?;
    Ok(DMatrix::from_fn(mm.k, sets.len(), |i, j| {
        let mut acc = 0.0;
        for (x, w) in bounds.windows(2).enumerate() {
            let len: f64 = sets[j].iter().map(|&iv| overlap(iv, (w[0], w[1]))).sum();
            acc += len * p[(i, mg.kernel_cells[x])];
        }
        acc
    }))
}

/// Tests the concentration and likelihood-ratio conditions for the sets
/// `A_i`, given the frame mismatch `eps`.
pub fn check_component_uniqueness(mm: &MixtureModel, a_sets: &[Vec<(f64, f64)>], eps: f64) -> Result<ComponentCheck> {
    mm.validate()?;
    let k = mm.k;
    if a_sets.len() != k {
        return Err(Error::DimensionError { expected: k, got: a_sets.len() });
    }
    let sets: Vec<Vec<(f64, f64)>> = a_sets.iter().map(|s| merged(s)).collect::<Result<_>>()?;
    for i in 0..k {
        for j in (i + 1)..k {
            let shared: f64 = sets[i].iter().flat_map(|&x| sets[j].iter().map(move |&y| overlap(x, y))).sum();
            if shared > 0.0 {
                return Err(Error::NotDisjoint);
            }
        }
    }
    let pm = kernelized_mass(mm, &sets)?;
    let penalty = (k * k) as f64 * eps * eps;
    let scale = if k > 1 { 1.0 / ((k - 1) * (k - 1)) as f64 } else { 0.0 };
    let concentration = (0..k).all(|i| {
        let others: f64 = (0..k).filter(|&j| j != i).map(|j| pm[(i, j)]).sum();
        pm[(i, i)] - penalty > others * scale
    });
    let likelihood_ratio = (0..k).all(|i| {
        let num = pm[(i, i)] - penalty;
        let den: f64 = (0..k).filter(|&m| m != i).map(|m| pm[(m, i)]).sum();
        if den == 0.0 {
            num > 0.0
        } else {
            num / den > scale
        }
    });
    Ok(ComponentCheck { concentration, likelihood_ratio })
}

/// Largest `L^2(P_i)` distance between the unit-normalized `q_i` and its
/// best-matching signed eigenfunction among the first `K` of the graphon.
pub fn frame_mismatch(mm: &MixtureModel) -> Result<f64> {
    let mg = mixture_to_graphon(mm)?;
    let spec = mg.graphon.laplacian_spectrum()?;
    let cells = mg.components.len();
    if cells < mm.k {
        return Err(Error::InsufficientSpectrum { available: cells, n: mm.k });
    }
    let h = mg.graphon.widths();
    let p = mm.kernelized_densities();
    let mut worst = 0.0f64;
    for i in 0..mm.k {
        let q: Vec<f64> = (0..cells).map(|x| p[(i, mg.kernel_cells[x])].max(0.0).sqrt()).collect();
        let nq = (0..cells).map(|x| h[x] * q[x] * q[x]).sum::<f64>().sqrt();
        if nq == 0.0 {
            return Err(Error::DegenerateComponent(i));
        }
        let mut best = f64::INFINITY;
        for j in 0..mm.k {
            for sign in [1.0, -1.0] {
                let d2: f64 = (0..cells)
                    .filter(|&x| mg.components[x] == i)
                    .map(|x| h[x] / mm.weights[i] * (q[x] / nq - sign * spec.values[(x, j)]).powi(2))
                    .sum();
                best = best.min(d2.sqrt());
            }
        }
        worst = worst.max(best);
    }
    Ok(worst)
}

/// Hilbert-Schmidt distance between the orthogonal projections onto the span
/// of the first `K` Laplacian eigenfunctions and onto the span of the `q_i`.
pub fn projection_distance(mm: &MixtureModel) -> Result<f64> {
    let mg = mixture_to_graphon(mm)?;
    let spec = mg.graphon.laplacian_spectrum()?;
    let cells = mg.components.len();
    if cells < mm.k {
        return Err(Error::InsufficientSpectrum { available: cells, n: mm.k });
    }
    let h = mg.graphon.widths();
    let p = mm.kernelized_densities();
    let u = DMatrix::from_fn(cells, mm.k, |x, j| spec.values[(x, j)] * h[x].sqrt());
    let qm = DMatrix::from_fn(cells, mm.k, |x, i| p[(i, mg.kernel_cells[x])].max(0.0).sqrt() * h[x].sqrt());
    let svd = qm.svd(true, false);
    let smax = svd.singular_values.max();
    let tol = cells.max(mm.k) as f64 * f64::EPSILON * smax;
    let basis = svd.u.expect("requested left vectors");
    let keep: Vec<usize> = (0..svd.singular_values.len()).filter(|&i| svd.singular_values[i] > tol).collect();
    let qo = basis.select_columns(&keep);
    let overlap = (u.transpose() * qo).norm_squared();
    Ok((mm.k as f64 + keep.len() as f64 - 2.0 * overlap).max(0.0).sqrt())
}

/// Right-hand side `16 sqrt(12 + b) phi` of the projection-distance bound,
/// with `b` the kernel supremum.
pub fn projection_bound(mm: &MixtureModel, report: &DifficultyReport) -> f64 {
    16.0 * (12.0 + mm.kernel_sup()).sqrt() * report.phi
}
