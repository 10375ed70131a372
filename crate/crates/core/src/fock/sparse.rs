use num_complex::Complex64;

use crate::par;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Square complex matrix in compressed sparse row form.
#[derive(Debug, Clone, PartialEq)]
pub struct FockOperator {
    dim: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<Complex64>,
}

impl FockOperator {
    /// Assembles from per-row `(column, value)` lists. Duplicate columns are
    /// summed and exact zeros dropped.
    pub fn from_rows(dim: usize, rows: Vec<Vec<(usize, Complex64)>>) -> Self {
        assert_eq!(rows.len(), dim);
        let mut row_ptr = Vec::with_capacity(dim + 1);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        row_ptr.push(0);
        for mut row in rows {
            row.sort_by_key(|e| e.0);
            let mut i = 0;
            while i < row.len() {
                let c = row[i].0;
                let mut v = ZERO;
                while i < row.len() && row[i].0 == c {
                    v += row[i].1;
                    i += 1;
                }
                if v != ZERO {
                    col_idx.push(c);
                    values.push(v);
                }
            }
            row_ptr.push(col_idx.len());
        }
        Self {
            dim,
            row_ptr,
            col_idx,
            values,
        }
    }

    pub fn diagonal(diag: &[Complex64]) -> Self {
        let rows = diag
            .iter()
            .enumerate()
            .map(|(i, &v)| vec![(i, v)])
            .collect();
        Self::from_rows(diag.len(), rows)
    }

    pub fn zeros(dim: usize) -> Self {
        Self::from_rows(dim, vec![Vec::new(); dim])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, Complex64)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.col_idx[r.clone()]
            .iter()
            .cloned()
            .zip(self.values[r].iter().cloned())
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        match self.col_idx[r.clone()].binary_search(&j) {
            Ok(pos) => self.values[r.start + pos],
            Err(_) => ZERO,
        }
    }

    pub fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(x.len(), self.dim);
        par::map_range(self.dim, |i| self.row(i).map(|(j, v)| v * x[j]).sum())
    }

    /// Sparse product `self * other` (row-by-row accumulation).
    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        let rows = par::map_range(self.dim, |i| {
            let mut acc: Vec<(usize, Complex64)> = Vec::new();
            for (k, a) in self.row(i) {
                acc.extend(other.row(k).map(|(j, b)| (j, a * b)));
            }
            acc
        });
        Self::from_rows(self.dim, rows)
    }

    pub fn adjoint(&self) -> Self {
        let mut rows = vec![Vec::new(); self.dim];
        for i in 0..self.dim {
            for (j, v) in self.row(i) {
                rows[j].push((i, v.conj()));
            }
        }
        Self::from_rows(self.dim, rows)
    }

    pub fn scaled(&self, s: Complex64) -> Self {
        Self {
            values: self.values.iter().map(|v| v * s).collect(),
            ..self.clone()
        }
    }

    /// `self + s * other`.
    pub fn add_scaled(&self, other: &Self, s: Complex64) -> Self {
        let rows = (0..self.dim)
            .map(|i| {
                self.row(i)
                    .chain(other.row(i).map(|(j, v)| (j, s * v)))
                    .collect()
            })
            .collect();
        Self::from_rows(self.dim, rows)
    }

    /// Largest entry magnitude of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let d = self.add_scaled(other, Complex64::new(-1.0, 0.0));
        d.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// `max |X - X^dag|` entrywise.
    pub fn hermiticity_error(&self) -> f64 {
        self.max_abs_diff(&self.adjoint())
    }

    /// `<x| self |x>` for a normalized `x`.
    pub fn expectation(&self, x: &[Complex64]) -> Complex64 {
        x.iter().zip(self.apply(x)).map(|(a, b)| a.conj() * b).sum()
    }
}

/// `max |XY - YX|` entrywise.
pub fn commutator_norm(x: &FockOperator, y: &FockOperator) -> f64 {
    x.matmul(y).max_abs_diff(&y.matmul(x))
}
