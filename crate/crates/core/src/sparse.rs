//! Compressed sparse row matrices acting on lists of 3D points.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::mesh::Vec3;

#[derive(Clone, Debug, PartialEq)]
pub struct SparseMatrix {
    nrows: usize,
    ncols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    data: Vec<f64>,
}

impl SparseMatrix {
    /// Duplicate column entries within a row are summed; rows come out
    /// sorted by column.
    pub fn from_rows(ncols: usize, rows: impl IntoIterator<Item = Vec<(usize, f64)>>) -> Self {
        let mut indptr = vec![0];
        let mut indices = Vec::new();
        let mut data = Vec::new();
        for row in rows {
            let mut acc: BTreeMap<usize, f64> = BTreeMap::new();
            for (c, v) in row {
                assert!(c < ncols, "column {c} out of range {ncols}");
                *acc.entry(c).or_insert(0.0) += v;
            }
            for (c, v) in acc {
                indices.push(c);
                data.push(v);
            }
            indptr.push(indices.len());
        }
        SparseMatrix {
            nrows: indptr.len() - 1,
            ncols,
            indptr,
            indices,
            data,
        }
    }

    pub fn from_triplets(nrows: usize, ncols: usize, triplets: &[(usize, usize, f64)]) -> Result<Self> {
        let mut rows = vec![Vec::new(); nrows];
        for &(r, c, v) in triplets {
            if r >= nrows || c >= ncols {
                return Err(Error::DimensionMismatch {
                    expected: nrows.max(ncols),
                    got: r.max(c),
                });
            }
            rows[r].push((c, v));
        }
        Ok(Self::from_rows(ncols, rows))
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.data.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.indptr[i]..self.indptr[i + 1];
        self.indices[r.clone()].iter().copied().zip(self.data[r].iter().copied())
    }

    pub fn row_len(&self, i: usize) -> usize {
        self.indptr[i + 1] - self.indptr[i]
    }

    pub fn row_sum(&self, i: usize) -> f64 {
        self.row(i).map(|(_, v)| v).sum()
    }

    pub fn triplets(&self) -> Vec<(usize, usize, f64)> {
        (0..self.nrows)
            .flat_map(|r| self.row(r).map(move |(c, v)| (r, c, v)))
            .collect()
    }

    /// `y = A x` with `x` one point per column.
    pub fn apply(&self, x: &[Vec3]) -> Result<Vec<Vec3>> {
        if x.len() != self.ncols {
            return Err(Error::DimensionMismatch {
                expected: self.ncols,
                got: x.len(),
            });
        }
        Ok((0..self.nrows)
            .map(|i| self.row(i).fold(Vec3::zeros(), |acc, (c, v)| acc + x[c] * v))
            .collect())
    }

    /// `y = A^T x` with `x` one point per row.
    pub fn apply_transpose(&self, x: &[Vec3]) -> Result<Vec<Vec3>> {
        if x.len() != self.nrows {
            return Err(Error::DimensionMismatch {
                expected: self.nrows,
                got: x.len(),
            });
        }
        let mut y = vec![Vec3::zeros(); self.ncols];
        for (i, xi) in x.iter().enumerate() {
            for (c, v) in self.row(i) {
                y[c] += xi * v;
            }
        }
        Ok(y)
    }

    /// Product `self * rhs`.
    pub fn compose(&self, rhs: &SparseMatrix) -> Result<SparseMatrix> {
        if self.ncols != rhs.nrows {
            return Err(Error::DimensionMismatch {
                expected: self.ncols,
                got: rhs.nrows,
            });
        }
        let rows = (0..self.nrows).map(|i| {
            self.row(i)
                .flat_map(|(k, a)| rhs.row(k).map(move |(c, b)| (c, a * b)))
                .collect::<Vec<_>>()
        });
        Ok(SparseMatrix::from_rows(rhs.ncols, rows))
    }

    /// Combines rows of `self` with the given weights into one sparse row.
    pub fn combine_rows(&self, weights: &[(usize, f64)]) -> Vec<(usize, f64)> {
        let mut acc: BTreeMap<usize, f64> = BTreeMap::new();
        for &(r, w) in weights {
            for (c, v) in self.row(r) {
                *acc.entry(c).or_insert(0.0) += w * v;
            }
        }
        acc.into_iter().collect()
    }
}
