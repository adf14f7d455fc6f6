//! Envelope (skyline) LDLᵀ factorization for symmetric quasi-definite
//! systems, with a reverse Cuthill-McKee ordering to keep the envelope small.

use std::collections::VecDeque;

/// Symmetric matrix in envelope storage under a fixed permutation.
///
/// Row `i` (permuted index) stores columns `first[i]..=i` contiguously.
#[derive(Clone, Debug)]
pub(crate) struct SkylineMatrix {
    n: usize,
    /// `perm[new] = old`.
    perm: Vec<usize>,
    /// `iperm[old] = new`.
    iperm: Vec<usize>,
    first: Vec<usize>,
    offset: Vec<usize>,
    data: Vec<f64>,
    diag: Vec<f64>,
    /// Expected pivot sign per permuted index (+1 primal, -1 dual).
    sign: Vec<f64>,
    work: Vec<f64>,
}

/// Reverse Cuthill-McKee ordering; nodes with degree above `dense_threshold`
/// are placed last.
pub(crate) fn rcm_order(adj: &[Vec<usize>], dense_threshold: usize) -> Vec<usize> {
    let n = adj.len();
    let degree: Vec<usize> = adj.iter().map(|a| a.len()).collect();
    let dense: Vec<bool> = degree.iter().map(|&d| d > dense_threshold).collect();
    let mut visited = dense.clone();
    let mut order = Vec::with_capacity(n);
    let mut by_degree: Vec<usize> = (0..n).filter(|&i| !dense[i]).collect();
    by_degree.sort_by_key(|&i| (degree[i], i));
    let mut queue = VecDeque::new();
    let mut nbrs = Vec::new();
    for &start in &by_degree {
        if visited[start] {
            continue;
        }
        visited[start] = true;
        queue.push_back(start);
        while let Some(u) = queue.pop_front() {
            order.push(u);
            nbrs.clear();
            nbrs.extend(adj[u].iter().copied().filter(|&v| !visited[v]));
            nbrs.sort_by_key(|&v| (degree[v], v));
            nbrs.dedup();
            for &v in &nbrs {
                visited[v] = true;
                queue.push_back(v);
            }
        }
    }
    order.reverse();
    order.extend((0..n).filter(|&i| dense[i]));
    order
}

impl SkylineMatrix {
    /// `adj` is the symmetric sparsity pattern (without diagonal) in original
    /// indices; `sign` gives the expected pivot sign per original index.
    pub(crate) fn new(adj: &[Vec<usize>], sign: &[f64]) -> Self {
        let n = adj.len();
        let threshold = 32.max(4 * (n as f64).sqrt() as usize);
        let perm = rcm_order(adj, threshold);
        let mut iperm = vec![0; n];
        for (new, &old) in perm.iter().enumerate() {
            iperm[old] = new;
        }
        let mut first: Vec<usize> = (0..n).collect();
        for (old_i, nbrs) in adj.iter().enumerate() {
            let i = iperm[old_i];
            for &old_j in nbrs {
                let j = iperm[old_j];
                if j < i {
                    first[i] = first[i].min(j);
                }
            }
        }
        let mut offset = Vec::with_capacity(n + 1);
        let mut total = 0;
        for (i, &f) in first.iter().enumerate() {
            offset.push(total);
            total += i - f + 1;
        }
        offset.push(total);
        let sign = perm.iter().map(|&old| sign[old]).collect();
        Self {
            n,
            perm,
            iperm,
            first,
            offset,
            data: vec![0.0; total],
            diag: vec![0.0; n],
            sign,
            work: vec![0.0; n],
        }
    }

    pub(crate) fn clear(&mut self) {
        self.data.iter_mut().for_each(|v| *v = 0.0);
    }

    /// Adds `value` to entry `(i, j)` given in original indices. Entries
    /// outside the envelope are a pattern bug.
    #[inline]
    pub(crate) fn add(&mut self, old_i: usize, old_j: usize, value: f64) {
        let (mut i, mut j) = (self.iperm[old_i], self.iperm[old_j]);
        if j > i {
            std::mem::swap(&mut i, &mut j);
        }
        debug_assert!(j >= self.first[i], "entry outside envelope");
        self.data[self.offset[i] + j - self.first[i]] += value;
    }

    /// In-place LDLᵀ. Pivots whose sign disagrees with the expected sign or
    /// whose magnitude falls below `min_pivot` are replaced (static pivoting).
    /// Returns the number of replaced pivots.
    pub(crate) fn factor(&mut self, min_pivot: f64) -> usize {
        let mut replaced = 0;
        for i in 0..self.n {
            let fi = self.first[i];
            let oi = self.offset[i];
            // t_j = A_ij - Σ_k t_k L_jk, stored in place, then scaled by 1/D_j.
            for j in fi..i {
                let fj = self.first[j];
                let oj = self.offset[j];
                let k0 = fi.max(fj);
                let mut s = self.data[oi + j - fi];
                if k0 < j {
                    let lhs = &self.work[k0..j];
                    let rhs = &self.data[oj + k0 - fj..oj + j - fj];
                    s -= lhs.iter().zip(rhs).map(|(a, b)| a * b).sum::<f64>();
                }
                self.work[j] = s;
            }
            let mut d = self.data[oi + i - fi];
            for j in fi..i {
                let l = self.work[j] / self.diag[j];
                d -= self.work[j] * l;
                self.data[oi + j - fi] = l;
            }
            // work holds this row's unscaled t values only.
            for j in fi..i {
                self.work[j] = 0.0;
            }
            let s = self.sign[i];
            if !(d * s >= min_pivot) {
                d = s * min_pivot.max(d.abs());
                replaced += 1;
            }
            self.diag[i] = d;
            self.data[oi + i - fi] = 1.0;
        }
        replaced
    }

    /// Solves `A x = b` in original indices after [`factor`](Self::factor).
    pub(crate) fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut y: Vec<f64> = (0..n).map(|i| b[self.perm[i]]).collect();
        for i in 0..n {
            let fi = self.first[i];
            let oi = self.offset[i];
            let row = &self.data[oi..oi + i - fi];
            let s: f64 = row.iter().zip(&y[fi..i]).map(|(l, v)| l * v).sum();
            y[i] -= s;
        }
        for i in 0..n {
            y[i] /= self.diag[i];
        }
        for i in (0..n).rev() {
            let fi = self.first[i];
            let oi = self.offset[i];
            let yi = y[i];
            if yi != 0.0 {
                for (k, l) in self.data[oi..oi + i - fi].iter().enumerate() {
                    y[fi + k] -= l * yi;
                }
            }
        }
        let mut x = vec![0.0; n];
        for i in 0..n {
            x[self.perm[i]] = y[i];
        }
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dense_matvec(a: &[Vec<f64>], x: &[f64]) -> Vec<f64> {
        a.iter()
            .map(|r| r.iter().zip(x).map(|(p, q)| p * q).sum())
            .collect()
    }

    #[test]
    fn solves_quasidefinite_system() {
        // [K Eᵀ; E -δ] with K SPD tridiagonal and two constraint rows.
        let n = 6;
        let m = 2;
        let mut a = vec![vec![0.0; n + m]; n + m];
        for i in 0..n {
            a[i][i] = 4.0;
            if i + 1 < n {
                a[i][i + 1] = -1.0;
                a[i + 1][i] = -1.0;
            }
        }
        let e = [
            [1.0, 1.0, 0.0, 0.0, 0.0, 0.0],
            [0.0, 0.0, 0.0, 1.0, 0.0, -1.0],
        ];
        for r in 0..m {
            for c in 0..n {
                a[n + r][c] = e[r][c];
                a[c][n + r] = e[r][c];
            }
            a[n + r][n + r] = -1e-10;
        }
        let adj: Vec<Vec<usize>> = (0..n + m)
            .map(|i| (0..n + m).filter(|&j| j != i && a[i][j] != 0.0).collect())
            .collect();
        let sign: Vec<f64> = (0..n + m).map(|i| if i < n { 1.0 } else { -1.0 }).collect();
        let mut sk = SkylineMatrix::new(&adj, &sign);
        for i in 0..n + m {
            for j in 0..=i {
                if a[i][j] != 0.0 {
                    sk.add(i, j, a[i][j]);
                }
            }
        }
        assert_eq!(sk.factor(1e-300), 0);
        let b: Vec<f64> = (0..n + m).map(|i| i as f64 - 2.5).collect();
        let x = sk.solve(&b);
        let r = dense_matvec(&a, &x);
        for (ri, bi) in r.iter().zip(&b) {
            assert!((ri - bi).abs() < 1e-8, "{ri} vs {bi}");
        }
    }

    #[test]
    fn rcm_puts_dense_nodes_last() {
        let mut adj = vec![Vec::new(); 50];
        for i in 0..49 {
            adj[i].push(49);
            adj[49].push(i);
        }
        let order = rcm_order(&adj, 32);
        assert_eq!(*order.last().unwrap(), 49);
        assert_eq!(order.len(), 50);
    }
}
