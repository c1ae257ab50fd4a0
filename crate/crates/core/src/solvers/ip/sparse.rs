use nalgebra::DVector;

/// Compressed sparse column matrix, just enough for LP constraint matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    nrows: usize,
    ncols: usize,
    col_ptr: Vec<usize>,
    row_idx: Vec<usize>,
    values: Vec<f64>,
}

impl SparseMatrix {
    /// Builds from `(row, col, value)` triplets; duplicates are summed and
    /// explicit zeros dropped.
    pub fn from_triplets(nrows: usize, ncols: usize, triplets: &[(usize, usize, f64)]) -> Self {
        let mut sorted: Vec<(usize, usize, f64)> = triplets.to_vec();
        sorted.sort_by(|a, b| (a.1, a.0).cmp(&(b.1, b.0)));
        let mut col_ptr = vec![0; ncols + 1];
        let mut row_idx = Vec::with_capacity(sorted.len());
        let mut values: Vec<f64> = Vec::with_capacity(sorted.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in sorted {
            assert!(r < nrows && c < ncols, "triplet ({r}, {c}) outside {nrows}x{ncols}");
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
            } else {
                row_idx.push(r);
                values.push(v);
                col_ptr[c + 1] += 1;
                last = Some((r, c));
            }
        }
        for c in 0..ncols {
            col_ptr[c + 1] += col_ptr[c];
        }
        let mut m = Self { nrows, ncols, col_ptr, row_idx, values };
        m.drop_zeros();
        m
    }

    fn drop_zeros(&mut self) {
        if self.values.iter().all(|v| *v != 0.0) {
            return;
        }
        let mut col_ptr = vec![0; self.ncols + 1];
        let mut row_idx = Vec::new();
        let mut values = Vec::new();
        for c in 0..self.ncols {
            for (r, v) in self.column(c) {
                if v != 0.0 {
                    row_idx.push(r);
                    values.push(v);
                }
            }
            col_ptr[c + 1] = values.len();
        }
        self.col_ptr = col_ptr;
        self.row_idx = row_idx;
        self.values = values;
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn column(&self, c: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let span = self.col_ptr[c]..self.col_ptr[c + 1];
        self.row_idx[span.clone()].iter().copied().zip(self.values[span].iter().copied())
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.column(c).find(|(i, _)| *i == r).map_or(0.0, |(_, v)| v)
    }

    /// `A x`
    pub fn mul_vec(&self, x: &[f64]) -> DVector<f64> {
        let mut out = DVector::zeros(self.nrows);
        for c in 0..self.ncols {
            let xc = x[c];
            if xc != 0.0 {
                for (r, v) in self.column(c) {
                    out[r] += v * xc;
                }
            }
        }
        out
    }

    /// `A' y`
    pub fn tr_mul_vec(&self, y: &[f64]) -> DVector<f64> {
        DVector::from_fn(self.ncols, |c, _| self.column(c).map(|(r, v)| v * y[r]).sum())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triplets_sum_and_multiply() {
        let a = SparseMatrix::from_triplets(2, 3, &[(0, 0, 1.0), (1, 2, 2.0), (0, 0, 1.0), (1, 1, 0.0)]);
        assert_eq!(a.nnz(), 2);
        assert_eq!(a.get(0, 0), 2.0);
        assert_eq!(a.mul_vec(&[1.0, 5.0, 3.0]).as_slice(), &[2.0, 6.0]);
        assert_eq!(a.tr_mul_vec(&[1.0, 1.0]).as_slice(), &[2.0, 0.0, 2.0]);
    }
}
