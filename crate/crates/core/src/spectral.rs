//! Symmetric eigendecomposition, graph Fourier transform and Paley-Wiener
//! spaces.
//!
//! Operators up to [`DENSE_LIMIT`] nodes are decomposed densely. Beyond that,
//! the k smallest eigenpairs come from a Lanczos iteration with full
//! reorthogonalization that locks one converged eigenpair per restart, which
//! keeps multiplicities intact.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::graph::Signal;
use crate::linalg::{canonicalize, symmetric_eigen, tridiagonal_eigen, CLUSTER_GAP};

/// Largest dimension decomposed with the dense solver.
pub const DENSE_LIMIT: usize = 2000;

/// Default tolerance for [`pw_membership`].
pub const DEFAULT_MEMBERSHIP_TOL: f64 = 1e-8;

const SYMMETRY_TOL: f64 = 1e-10;

/// A real symmetric linear operator.
pub trait SymmetricOperator {
    fn dim(&self) -> usize;

    /// `y = M x`.
    fn apply(&self, x: &[f64], y: &mut [f64]);

    fn to_dense(&self) -> DMatrix<f64>;

    /// `max |M - M^T|`.
    fn symmetry_defect(&self) -> f64;
}

impl SymmetricOperator for DMatrix<f64> {
    fn dim(&self) -> usize {
        self.nrows()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let n = self.nrows();
        y.iter_mut().for_each(|v| *v = 0.0);
        for (j, &xj) in x.iter().enumerate().take(n) {
            if xj == 0.0 {
                continue;
            }
            for (yi, &m) in y.iter_mut().zip(self.column(j).iter()) {
                *yi += m * xj;
            }
        }
    }

    fn to_dense(&self) -> DMatrix<f64> {
        self.clone()
    }

    fn symmetry_defect(&self) -> f64 {
        if self.nrows() != self.ncols() {
            return f64::INFINITY;
        }
        let n = self.nrows();
        let mut defect: f64 = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                defect = defect.max((self[(i, j)] - self[(j, i)]).abs());
            }
        }
        defect
    }
}

/// Ascending eigenvalues with column-orthonormal eigenvectors.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    /// `source_n x k`, column `i` pairs with `eigenvalues[i]`.
    pub eigenvectors: DMatrix<f64>,
    pub source_n: usize,
}

impl Spectrum {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.len() == self.source_n
    }

    /// The first `k` eigenvector columns.
    pub fn band(&self, k: usize) -> Result<DMatrix<f64>> {
        if k == 0 || k > self.len() {
            return Err(Error::BandError { k, available: self.len() });
        }
        Ok(self.eigenvectors.columns(0, k).into_owned())
    }

    pub fn vector(&self, i: usize) -> Signal {
        Signal(self.eigenvectors.column(i).iter().copied().collect())
    }
}

/// Options for the Lanczos solver.
#[derive(Debug, Clone, Copy)]
pub struct LanczosOptions {
    pub tol: f64,
    /// Total iteration cap; `None` means `10 * n`.
    pub max_iter: Option<usize>,
    pub seed: u64,
}

impl Default for LanczosOptions {
    fn default() -> Self {
        LanczosOptions { tol: 1e-10, max_iter: None, seed: 0x5eed }
    }
}

/// Which eigensolver [`eig_sym_with`] should use.
#[derive(Debug, Clone, Copy, Default)]
pub enum Solver {
    /// Dense up to [`DENSE_LIMIT`], Lanczos beyond when `k` is given.
    #[default]
    Auto,
    Dense,
    Lanczos(LanczosOptions),
}

/// Eigendecomposition of a symmetric operator: all eigenpairs when `k` is
/// `None`, otherwise the `k` smallest.
pub fn eig_sym<O: SymmetricOperator + ?Sized>(op: &O, k: Option<usize>) -> Result<Spectrum> {
    eig_sym_with(op, k, Solver::Auto)
}

pub fn eig_sym_with<O: SymmetricOperator + ?Sized>(
    op: &O,
    k: Option<usize>,
    solver: Solver,
) -> Result<Spectrum> {
    let n = op.dim();
    if let Some(k) = k {
        if k == 0 || k > n {
            return Err(Error::BandError { k, available: n });
        }
    }
    let defect = op.symmetry_defect();
    if defect > SYMMETRY_TOL {
        return Err(Error::NotSymmetric { defect });
    }
    match (solver, k) {
        (Solver::Lanczos(opts), Some(k)) => lanczos_smallest(op, k, &opts),
        (Solver::Auto, Some(k)) if n > DENSE_LIMIT => {
            lanczos_smallest(op, k, &LanczosOptions::default())
        }
        _ => dense_spectrum(&op.to_dense(), k),
    }
}

fn dense_spectrum(m: &DMatrix<f64>, k: Option<usize>) -> Result<Spectrum> {
    let n = m.nrows();
    let (mut values, mut vectors) = symmetric_eigen(m)?;
    canonicalize(&values, &mut vectors, CLUSTER_GAP);
    if let Some(k) = k {
        values.truncate(k);
        vectors = vectors.columns(0, k).into_owned();
    }
    Ok(Spectrum { eigenvalues: values, eigenvectors: vectors, source_n: n })
}

/// The `k` smallest eigenpairs by restarted Lanczos with locking.
pub fn lanczos_smallest<O: SymmetricOperator + ?Sized>(
    op: &O,
    k: usize,
    opts: &LanczosOptions,
) -> Result<Spectrum> {
    let n = op.dim();
    if k == 0 || k > n {
        return Err(Error::BandError { k, available: n });
    }
    let cap = opts.max_iter.unwrap_or(10 * n);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut locked: Vec<Vec<f64>> = Vec::with_capacity(k);
    let mut locked_vals: Vec<f64> = Vec::with_capacity(k);
    let mut iterations = 0usize;
    let mut w = vec![0.0; n];

    while locked.len() < k {
        let free_dim = n - locked.len();
        let mut q = random_unit_orthogonal(n, &locked, &mut rng);
        let mut basis: Vec<Vec<f64>> = Vec::new();
        let mut alphas: Vec<f64> = Vec::new();
        let mut betas: Vec<f64> = Vec::new();
        loop {
            op.apply(&q, &mut w);
            let alpha = dot(&q, &w);
            axpy(-alpha, &q, &mut w);
            if let (Some(prev), Some(&beta)) = (basis.last(), betas.last()) {
                axpy(-beta, prev, &mut w);
            }
            basis.push(q);
            alphas.push(alpha);
            for _ in 0..2 {
                for v in locked.iter().chain(basis.iter()) {
                    let c = dot(v, &w);
                    axpy(-c, v, &mut w);
                }
            }
            let beta = norm(&w);
            iterations += 1;

            let steps = basis.len();
            let exhausted = steps == free_dim || beta <= 1e-12;
            if steps.is_multiple_of(5) || exhausted || iterations >= cap {
                let (theta, last) = tridiagonal_eigen(&alphas, &betas, false)?;
                let resid = beta * last[0][0].abs();
                if exhausted || resid <= opts.tol * theta[0].abs().max(1.0) {
                    let (_, full) = tridiagonal_eigen(&alphas, &betas, true)?;
                    let s = &full[0];
                    let mut v = vec![0.0; n];
                    for (coef, b) in s.iter().zip(&basis) {
                        axpy(*coef, b, &mut v);
                    }
                    for _ in 0..2 {
                        for u in &locked {
                            let c = dot(u, &v);
                            axpy(-c, u, &mut v);
                        }
                    }
                    let nv = norm(&v);
                    v.iter_mut().for_each(|x| *x /= nv);
                    op.apply(&v, &mut w);
                    locked_vals.push(dot(&v, &w));
                    locked.push(v);
                    break;
                }
            }
            if iterations >= cap {
                return Err(Error::NoConvergence { iterations });
            }
            q = w.iter().map(|x| x / beta).collect();
            betas.push(beta);
        }
    }

    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| locked_vals[a].total_cmp(&locked_vals[b]).then(a.cmp(&b)));
    let values: Vec<f64> = order.iter().map(|&i| locked_vals[i]).collect();
    let mut vectors = DMatrix::from_fn(n, k, |r, c| locked[order[c]][r]);
    canonicalize(&values, &mut vectors, CLUSTER_GAP);
    Ok(Spectrum { eigenvalues: values, eigenvectors: vectors, source_n: n })
}

fn random_unit_orthogonal(n: usize, against: &[Vec<f64>], rng: &mut ChaCha8Rng) -> Vec<f64> {
    loop {
        let mut q: Vec<f64> = (0..n).map(|_| StandardNormal.sample(rng)).collect();
        for _ in 0..2 {
            for u in against {
                let c = dot(u, &q);
                axpy(-c, u, &mut q);
            }
        }
        let nq = norm(&q);
        if nq > 1e-8 {
            q.iter_mut().for_each(|x| *x /= nq);
            return q;
        }
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// Graph Fourier transform `V^T x`.
pub fn gft(spec: &Spectrum, x: &[f64]) -> Result<Vec<f64>> {
    if x.len() != spec.source_n {
        return Err(Error::DimensionError { expected: spec.source_n, got: x.len() });
    }
    let xv = DVector::from_column_slice(x);
    Ok((spec.eigenvectors.transpose() * xv).iter().copied().collect())
}

/// Inverse transform `V c`.
pub fn igft(spec: &Spectrum, c: &[f64]) -> Result<Signal> {
    if c.len() != spec.len() {
        return Err(Error::DimensionError { expected: spec.len(), got: c.len() });
    }
    let cv = DVector::from_column_slice(c);
    Ok(Signal((&spec.eigenvectors * cv).iter().copied().collect()))
}

/// A unit-norm random signal in the span of the first `k` eigenvectors,
/// with i.i.d. standard normal coefficients drawn from `seed`.
pub fn synth_bandlimited(spec: &Spectrum, k: usize, seed: u64) -> Result<Signal> {
    if k == 0 || k > spec.len() {
        return Err(Error::BandError { k, available: spec.len() });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let coeffs: Vec<f64> = (0..k).map(|_| StandardNormal.sample(&mut rng)).collect();
    let mut x = vec![0.0; spec.source_n];
    for (i, c) in coeffs.iter().enumerate() {
        for (xr, v) in x.iter_mut().zip(spec.eigenvectors.column(i).iter()) {
            *xr += c * v;
        }
    }
    let nx = norm(&x);
    x.iter_mut().for_each(|v| *v /= nx);
    Ok(Signal(x))
}

/// Whether `x` lies in `PW_lambda`: every coefficient on an eigenvalue above
/// `lambda` is at most `tol * ||x||`.
pub fn pw_membership(x: &[f64], spec: &Spectrum, lambda: f64, tol: f64) -> Result<bool> {
    if !spec.is_full() {
        return Err(Error::InsufficientSpectrum { available: spec.len(), n: spec.source_n });
    }
    let coeffs = gft(spec, x)?;
    let bound = tol * norm(x);
    Ok(spec
        .eigenvalues
        .iter()
        .zip(&coeffs)
        .all(|(&l, &c)| l <= lambda || c.abs() <= bound))
}
