//! Dense symmetric eigendecomposition and eigenbasis canonicalization.
//!
//! The decomposition is Householder tridiagonalization followed by the
//! implicit-shift QL iteration (the classic `tred2`/`tql2` pair).

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Eigenvalues closer than this are treated as one degenerate cluster.
pub const CLUSTER_GAP: f64 = 1e-8;

const QL_MAX_SWEEPS: usize = 64;

/// Full eigendecomposition of a symmetric matrix.
///
/// Returns ascending eigenvalues and a matrix whose columns are the
/// corresponding orthonormal eigenvectors (not yet canonicalized).
pub fn symmetric_eigen(a: &DMatrix<f64>) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let n = a.nrows();
    if n == 0 {
        return Ok((Vec::new(), DMatrix::zeros(0, 0)));
    }
    // Row-major working copy; V[i][j] = v[i * n + j].
    let mut v: Vec<f64> = (0..n * n).map(|k| a[(k / n, k % n)]).collect();
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    tred2(n, &mut v, &mut d, &mut e);

    // tql2 rotates columns of V; work on the transpose so rotations touch rows.
    let mut vt = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            vt[j * n + i] = v[i * n + j];
        }
    }
    tql2(n, &mut vt, n, &mut d, &mut e)?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| d[x].total_cmp(&d[y]).then(x.cmp(&y)));
    let values = order.iter().map(|&k| d[k]).collect();
    let vectors = DMatrix::from_fn(n, n, |row, col| vt[order[col] * n + row]);
    Ok((values, vectors))
}

#[allow(clippy::needless_range_loop)]
fn tred2(n: usize, v: &mut [f64], d: &mut [f64], e: &mut [f64]) {
    let at = |i: usize, j: usize| i * n + j;
    for j in 0..n {
        d[j] = v[at(n - 1, j)];
    }
    for i in (1..n).rev() {
        let mut scale = 0.0;
        let mut h = 0.0;
        for k in 0..i {
            scale += d[k].abs();
        }
        if scale == 0.0 {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = v[at(i - 1, j)];
                v[at(i, j)] = 0.0;
                v[at(j, i)] = 0.0;
            }
        } else {
            for k in 0..i {
                d[k] /= scale;
                h += d[k] * d[k];
            }
            let mut f = d[i - 1];
            let mut g = h.sqrt();
            if f > 0.0 {
                g = -g;
            }
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            for j in 0..i {
                e[j] = 0.0;
            }
            for j in 0..i {
                f = d[j];
                v[at(j, i)] = f;
                g = e[j] + v[at(j, j)] * f;
                for k in (j + 1)..i {
                    g += v[at(k, j)] * d[k];
                    e[k] += v[at(k, j)] * f;
                }
                e[j] = g;
            }
            f = 0.0;
            for j in 0..i {
                e[j] /= h;
                f += e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] -= hh * d[j];
            }
            for j in 0..i {
                f = d[j];
                g = e[j];
                for k in j..i {
                    v[at(k, j)] -= f * e[k] + g * d[k];
                }
                d[j] = v[at(i - 1, j)];
                v[at(i, j)] = 0.0;
            }
        }
        d[i] = h;
    }

    for i in 0..n - 1 {
        v[at(n - 1, i)] = v[at(i, i)];
        v[at(i, i)] = 1.0;
        let h = d[i + 1];
        if h != 0.0 {
            for k in 0..=i {
                d[k] = v[at(k, i + 1)] / h;
            }
            for j in 0..=i {
                let mut g = 0.0;
                for k in 0..=i {
                    g += v[at(k, i + 1)] * v[at(k, j)];
                }
                for k in 0..=i {
                    v[at(k, j)] -= g * d[k];
                }
            }
        }
        for k in 0..=i {
            v[at(k, i + 1)] = 0.0;
        }
    }
    for j in 0..n {
        d[j] = v[at(n - 1, j)];
        v[at(n - 1, j)] = 0.0;
    }
    v[at(n - 1, n - 1)] = 1.0;
    e[0] = 0.0;
}

/// Eigen-decomposition of a symmetric tridiagonal matrix with diagonal
/// `diag` and off-diagonal `off` (`off.len() + 1 == diag.len()`).
///
/// Returns ascending eigenvalues together with, for each eigenvalue, either
/// the full eigenvector (`full = true`) or only its last component.
pub fn tridiagonal_eigen(diag: &[f64], off: &[f64], full: bool) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let n = diag.len();
    if n == 0 {
        return Ok((Vec::new(), Vec::new()));
    }
    let width = if full { n } else { 1 };
    let mut vt = vec![0.0; n * width];
    for i in 0..n {
        if full {
            vt[i * width + i] = 1.0;
        } else if i == n - 1 {
            vt[i * width] = 1.0;
        }
    }
    let mut d = diag.to_vec();
    // tql2 expects the sub-diagonal in e[1..n].
    let mut e = vec![0.0; n];
    e[1..n].copy_from_slice(&off[..n - 1]);
    tql2(n, &mut vt, width, &mut d, &mut e)?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| d[x].total_cmp(&d[y]).then(x.cmp(&y)));
    let values = order.iter().map(|&k| d[k]).collect();
    let vectors = order
        .iter()
        .map(|&k| vt[k * width..(k + 1) * width].to_vec())
        .collect();
    Ok((values, vectors))
}

// Row k of `vt` (length `width`) holds the tracked components of eigenvector k.
fn tql2(n: usize, vt: &mut [f64], width: usize, d: &mut [f64], e: &mut [f64]) -> Result<()> {
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;

    let mut f = 0.0;
    let mut tst1: f64 = 0.0;
    let eps = f64::EPSILON;
    let mut total_iter = 0usize;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n {
            if e[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }
        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                total_iter += 1;
                if iter > QL_MAX_SWEEPS {
                    return Err(Error::NoConvergence { iterations: total_iter });
                }
                let mut g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().take(n).skip(l + 2) {
                    *di -= h;
                }
                f += h;

                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);

                    let (lo, hi) = vt.split_at_mut((i + 1) * width);
                    let row_i = &mut lo[i * width..];
                    let row_i1 = &mut hi[..width];
                    for k in 0..width {
                        let h = row_i1[k];
                        row_i1[k] = s * row_i[k] + c * h;
                        row_i[k] = c * row_i[k] - s * h;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
    Ok(())
}

/// Makes an eigenbasis deterministic.
///
/// Within each cluster of eigenvalues whose consecutive gaps are below
/// `gap`, the basis is replaced by Gram-Schmidt applied to the projections of
/// the standard basis vectors `e_0, e_1, ...` onto the cluster subspace.
/// Afterwards every column gets its first non-negligible entry positive.
pub fn canonicalize(values: &[f64], vectors: &mut DMatrix<f64>, gap: f64) {
    let k = values.len();
    let mut start = 0;
    while start < k {
        let mut end = start + 1;
        while end < k && values[end] - values[end - 1] < gap {
            end += 1;
        }
        if end - start > 1 {
            canonicalize_cluster(vectors, start, end);
        }
        start = end;
    }
    for j in 0..k {
        fix_sign(vectors, j);
    }
}

fn canonicalize_cluster(vectors: &mut DMatrix<f64>, start: usize, end: usize) {
    let n = vectors.nrows();
    let c = end - start;
    let basis = vectors.columns(start, c).into_owned();
    let mut chosen: Vec<Vec<f64>> = Vec::with_capacity(c);
    for i in 0..n {
        if chosen.len() == c {
            break;
        }
        // Projection of e_i onto span(basis) is basis * basis[i, :]^T.
        let coeffs: Vec<f64> = (0..c).map(|j| basis[(i, j)]).collect();
        let mut p: Vec<f64> = (0..n)
            .map(|r| (0..c).map(|j| basis[(r, j)] * coeffs[j]).sum())
            .collect();
        let before = norm(&p);
        if before < 1e-6 {
            continue;
        }
        for _ in 0..2 {
            for q in &chosen {
                let dot: f64 = p.iter().zip(q).map(|(a, b)| a * b).sum();
                for (pr, qr) in p.iter_mut().zip(q) {
                    *pr -= dot * qr;
                }
            }
        }
        let after = norm(&p);
        if after < 1e-6 {
            continue;
        }
        p.iter_mut().for_each(|x| *x /= after);
        chosen.push(p);
    }
    // The projections of all e_i span the cluster, so `chosen` is full unless
    // the input basis was not orthonormal; keep the original columns then.
    if chosen.len() == c {
        for (j, q) in chosen.iter().enumerate() {
            for r in 0..n {
                vectors[(r, start + j)] = q[r];
            }
        }
    }
}

fn fix_sign(vectors: &mut DMatrix<f64>, j: usize) {
    let col = vectors.column(j);
    let scale = col.amax();
    if scale == 0.0 {
        return;
    }
    if let Some(first) = col.iter().find(|v| v.abs() > 1e-10 * scale) {
        if *first < 0.0 {
            vectors.column_mut(j).neg_mut();
        }
    }
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}
