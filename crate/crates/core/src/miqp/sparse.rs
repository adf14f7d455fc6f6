//! Row-compressed sparse matrices used by the QP and MIQP layers.

use serde::{Deserialize, Serialize};

/// Sparse matrix stored as a list of rows; each row is a sorted list of
/// `(column, value)` pairs with no duplicates and no explicit zeros.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SparseMatrix {
    ncols: usize,
    rows: Vec<Vec<(usize, f64)>>,
}

impl SparseMatrix {
    pub fn new(ncols: usize) -> Self {
        Self {
            ncols,
            rows: Vec::new(),
        }
    }

    /// Square matrix with the given diagonal.
    pub fn diagonal(diag: &[f64]) -> Self {
        let mut m = Self::new(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m.push_row(vec![(i, d)]);
        }
        m
    }

    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Self {
            ncols,
            rows: vec![Vec::new(); nrows],
        }
    }

    pub fn from_dense(dense: &[Vec<f64>], ncols: usize) -> Self {
        let mut m = Self::new(ncols);
        for row in dense {
            m.push_row(row.iter().copied().enumerate().collect());
        }
        m
    }

    pub fn nrows(&self) -> usize {
        self.rows.len()
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn row(&self, i: usize) -> &[(usize, f64)] {
        &self.rows[i]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[(usize, f64)]> {
        self.rows.iter().map(|r| r.as_slice())
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(|r| r.len()).sum()
    }

    /// Appends a row; duplicate columns are summed and zeros dropped.
    pub fn push_row(&mut self, mut entries: Vec<(usize, f64)>) {
        entries.sort_by_key(|e| e.0);
        let mut merged: Vec<(usize, f64)> = Vec::with_capacity(entries.len());
        for (c, v) in entries {
            debug_assert!(c < self.ncols, "column {c} out of range {}", self.ncols);
            match merged.last_mut() {
                Some(last) if last.0 == c => last.1 += v,
                _ => merged.push((c, v)),
            }
        }
        merged.retain(|e| e.1 != 0.0);
        self.rows.push(merged);
    }

    /// Adds `value` at `(row, col)`, creating the entry if needed.
    pub fn add_entry(&mut self, row: usize, col: usize, value: f64) {
        if row >= self.rows.len() {
            self.rows.resize(row + 1, Vec::new());
        }
        let r = &mut self.rows[row];
        match r.binary_search_by_key(&col, |e| e.0) {
            Ok(k) => {
                r[k].1 += value;
                if r[k].1 == 0.0 {
                    r.remove(k);
                }
            }
            Err(k) => {
                if value != 0.0 {
                    r.insert(k, (col, value));
                }
            }
        }
    }

    /// Widens the matrix with empty columns.
    pub fn resize_cols(&mut self, ncols: usize) {
        assert!(ncols >= self.ncols);
        self.ncols = ncols;
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.rows[row]
            .binary_search_by_key(&col, |e| e.0)
            .map(|k| self.rows[row][k].1)
            .unwrap_or(0.0)
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        self.rows
            .iter()
            .map(|r| r.iter().map(|&(c, v)| v * x[c]).sum())
            .collect()
    }

    pub fn row_dot(&self, i: usize, x: &[f64]) -> f64 {
        self.rows[i].iter().map(|&(c, v)| v * x[c]).sum()
    }

    /// `out += Aᵀ y`.
    pub fn mul_transpose_add(&self, y: &[f64], out: &mut [f64]) {
        for (r, &yr) in self.rows.iter().zip(y) {
            if yr == 0.0 {
                continue;
            }
            for &(c, v) in r {
                out[c] += v * yr;
            }
        }
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        self.rows
            .iter()
            .map(|r| {
                let mut d = vec![0.0; self.ncols];
                for &(c, v) in r {
                    d[c] = v;
                }
                d
            })
            .collect()
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        if self.nrows() != self.ncols {
            return false;
        }
        self.rows.iter().enumerate().all(|(i, r)| {
            r.iter()
                .all(|&(j, v)| (self.get(j, i) - v).abs() <= tol * (1.0 + v.abs()))
        })
    }

    /// `xᵀ A x` for square `A`.
    pub fn quad_form(&self, x: &[f64]) -> f64 {
        self.rows
            .iter()
            .enumerate()
            .map(|(i, r)| x[i] * r.iter().map(|&(c, v)| v * x[c]).sum::<f64>())
            .sum()
    }

    pub fn is_finite(&self) -> bool {
        self.rows.iter().flatten().all(|e| e.1.is_finite())
    }
}

pub(crate) fn inf_norm(x: &[f64]) -> f64 {
    x.iter().fold(0.0, |m, v| m.max(v.abs()))
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
