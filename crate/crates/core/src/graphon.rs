//! Piecewise-constant (step) graphons on `[0, 1]^2`.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::{canonicalize, symmetric_eigen, CLUSTER_GAP};

/// Symmetric kernel that is constant on the cells `I_i x I_j` of an interval
/// partition `0 = b_0 < b_1 < ... < b_q = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct StepGraphon {
    boundaries: Vec<f64>,
    block: DMatrix<f64>,
}

/// Finite part of the normalized-Laplacian spectrum of a step graphon.
///
/// Every eigenfunction is constant on the partition cells; `values[(i, k)]` is
/// the value of eigenfunction `k` on cell `i`. All remaining spectrum is the
/// eigenvalue 1 on functions orthogonal to the piecewise-constant ones.
#[derive(Debug, Clone)]
pub struct StepSpectrum {
    pub eigenvalues: Vec<f64>,
    pub values: DMatrix<f64>,
}

impl StepGraphon {
    pub fn new(boundaries: Vec<f64>, block: DMatrix<f64>) -> Result<Self> {
        let q = block.nrows();
        if q == 0 || block.ncols() != q {
            return Err(Error::InvalidPartition("block must be a nonempty square matrix".into()));
        }
        if boundaries.len() != q + 1 {
            return Err(Error::DimensionError { expected: q + 1, got: boundaries.len() });
        }
        if boundaries[0] != 0.0 || boundaries[q] != 1.0 {
            return Err(Error::InvalidPartition("boundaries must start at 0 and end at 1".into()));
        }
        if boundaries.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidPartition("boundaries must be strictly ascending".into()));
        }
        for i in 0..q {
            for j in 0..q {
                let v = block[(i, j)];
                if !(0.0..=1.0).contains(&v) {
                    return Err(Error::InvalidParams(format!(
                        "block entry ({i}, {j}) = {v} outside [0, 1]"
                    )));
                }
                if (v - block[(j, i)]).abs() > 1e-12 {
                    return Err(Error::NotSymmetric { defect: (v - block[(j, i)]).abs() });
                }
            }
        }
        Ok(StepGraphon { boundaries, block })
    }

    /// Constant graphon `W = p`.
    pub fn constant(p: f64) -> Result<Self> {
        StepGraphon::new(vec![0.0, 1.0], DMatrix::from_element(1, 1, p))
    }

    pub fn boundaries(&self) -> &[f64] {
        &self.boundaries
    }

    pub fn block(&self) -> &DMatrix<f64> {
        &self.block
    }

    pub fn num_cells(&self) -> usize {
        self.block.nrows()
    }

    pub fn widths(&self) -> Vec<f64> {
        self.boundaries.windows(2).map(|w| w[1] - w[0]).collect()
    }

    /// Cell containing `x`; cells are half-open `[b_i, b_{i+1})` except the
    /// last, which includes 1.
    pub fn cell_of(&self, x: f64) -> usize {
        let q = self.num_cells();
        let idx = self.boundaries.partition_point(|&b| b <= x);
        idx.saturating_sub(1).min(q - 1)
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        self.block[(self.cell_of(x), self.cell_of(y))]
    }

    /// Degree function value on each cell, `d_i = sum_j W_ij |I_j|`.
    pub fn cell_degrees(&self) -> Vec<f64> {
        let h = self.widths();
        (0..self.num_cells())
            .map(|i| (0..self.num_cells()).map(|j| self.block[(i, j)] * h[j]).sum())
            .collect()
    }

    /// Matrix of the normalized adjacency operator restricted to
    /// piecewise-constant functions, in the orthonormal coordinates
    /// `y_i = sqrt(|I_i|) x_i`.
    pub fn normalized_operator(&self) -> DMatrix<f64> {
        let h = self.widths();
        let d = self.cell_degrees();
        let q = self.num_cells();
        DMatrix::from_fn(q, q, |i, j| {
            if d[i] > 0.0 && d[j] > 0.0 {
                h[i].sqrt() * self.block[(i, j)] * h[j].sqrt() / (d[i] * d[j]).sqrt()
            } else {
                0.0
            }
        })
    }

    /// Squared Hilbert-Schmidt norm of the normalized kernel,
    /// `int int W(u,v)^2 / (d(u) d(v)) du dv`, integrated cell by cell.
    pub fn normalized_hs_norm_sq(&self) -> f64 {
        let h = self.widths();
        let d = self.cell_degrees();
        let q = self.num_cells();
        let mut acc = 0.0;
        for i in 0..q {
            for j in 0..q {
                if d[i] > 0.0 && d[j] > 0.0 {
                    acc += h[i] * h[j] * self.block[(i, j)].powi(2) / (d[i] * d[j]);
                }
            }
        }
        acc
    }

    /// Laplacian eigenvalues `1 - mu` for the eigenvalues `mu` of the
    /// normalized operator, with eigenfunctions as cell values.
    pub fn laplacian_spectrum(&self) -> Result<StepSpectrum> {
        let m = self.normalized_operator();
        let lap = DMatrix::identity(m.nrows(), m.ncols()) - m;
        let (values, mut vectors) = symmetric_eigen(&lap)?;
        canonicalize(&values, &mut vectors, CLUSTER_GAP);
        let h = self.widths();
        for (i, hi) in h.iter().enumerate() {
            let s = hi.sqrt();
            vectors.row_mut(i).iter_mut().for_each(|v| *v /= s);
        }
        Ok(StepSpectrum { eigenvalues: values, values: vectors })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation() {
        let b = DMatrix::from_element(1, 1, 0.5);
        assert!(StepGraphon::new(vec![0.0, 0.9], b.clone()).is_err());
        assert!(StepGraphon::new(vec![0.0, 1.0], DMatrix::from_element(1, 1, 1.5)).is_err());
        let asym = DMatrix::from_row_slice(2, 2, &[0.1, 0.2, 0.3, 0.1]);
        assert!(matches!(
            StepGraphon::new(vec![0.0, 0.5, 1.0], asym),
            Err(Error::NotSymmetric { .. })
        ));
        assert!(StepGraphon::new(vec![0.0, 0.5, 0.5, 1.0], DMatrix::zeros(3, 3)).is_err());
    }

    #[test]
    fn cell_lookup_edges() {
        let w = StepGraphon::new(vec![0.0, 0.25, 1.0], DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.5]))
            .unwrap();
        assert_eq!(w.cell_of(0.0), 0);
        assert_eq!(w.cell_of(0.25), 1);
        assert_eq!(w.cell_of(1.0), 1);
        assert_eq!(w.eval(0.1, 0.9), 0.0);
        assert_eq!(w.eval(0.9, 0.9), 0.5);
    }

    #[test]
    fn constant_graphon_spectrum() {
        let w = StepGraphon::constant(0.3).unwrap();
        let s = w.laplacian_spectrum().unwrap();
        assert_eq!(s.eigenvalues.len(), 1);
        assert!(s.eigenvalues[0].abs() < 1e-14);
        assert!((s.values[(0, 0)] - 1.0).abs() < 1e-14);
        assert!((w.normalized_hs_norm_sq() - 1.0).abs() < 1e-14);
    }
}
