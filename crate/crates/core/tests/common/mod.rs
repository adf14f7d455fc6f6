#![allow(dead_code)]

pub mod mpc_fixtures;
use navplan::miqp::{solve_qp, MIQProblem, QpProblem, SparseMatrix};
use rand::Rng;

/// Dense Gaussian elimination with partial pivoting.
pub fn gauss_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-12 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in col + 1..n {
            let m = a[r][col] / a[col][col];
            if m != 0.0 {
                for c in col..n {
                    a[r][c] -= m * a[col][c];
                }
                b[r] -= m * b[col];
            }
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|c| a[r][c] * x[c]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    Some(x)
}

/// Exhaustive active-set oracle for small strictly convex QPs: solves the
/// KKT system for every subset of inequality rows and keeps the best
/// primal-dual feasible candidate.
pub fn active_set_oracle(qp: &QpProblem) -> Option<(Vec<f64>, f64)> {
    let n = qp.num_vars();
    let h = qp.hessian.to_dense();
    let e = qp.eq_matrix.to_dense();
    let g = qp.ineq_matrix.to_dense();
    let me = e.len();
    let mi = g.len();
    assert!(mi <= 14, "oracle is exponential in the row count");
    let mut best: Option<(Vec<f64>, f64)> = None;
    for mask in 0u32..(1 << mi) {
        let active: Vec<usize> = (0..mi).filter(|&r| mask & (1 << r) != 0).collect();
        let dim = n + me + active.len();
        if me + active.len() > n {
            continue;
        }
        let mut a = vec![vec![0.0; dim]; dim];
        let mut b = vec![0.0; dim];
        for i in 0..n {
            a[i][..n].copy_from_slice(&h[i]);
            b[i] = -qp.linear[i];
        }
        let rows = e
            .iter()
            .zip(&qp.eq_rhs)
            .chain(active.iter().map(|&r| (&g[r], &qp.ineq_rhs[r])));
        for (k, (row, &rhs)) in rows.enumerate() {
            for c in 0..n {
                a[n + k][c] = row[c];
                a[c][n + k] = row[c];
            }
            b[n + k] = rhs;
        }
        let Some(x) = gauss_solve(a, b) else { continue };
        let z = &x[..n];
        let lam = &x[n + me..];
        if lam.iter().any(|&l| l < -1e-9) {
            continue;
        }
        let primal_ok = (0..mi).all(|r| {
            let gz: f64 = g[r].iter().zip(z).map(|(p, q)| p * q).sum();
            gz <= qp.ineq_rhs[r] + 1e-9
        });
        if !primal_ok {
            continue;
        }
        let j = qp.objective(z);
        if best.as_ref().map_or(true, |b| j < b.1) {
            best = Some((z.to_vec(), j));
        }
    }
    best
}

pub fn dense_to_sparse(rows: &[Vec<f64>], ncols: usize) -> SparseMatrix {
    SparseMatrix::from_dense(rows, ncols)
}

/// Random convex MIQP with `nb` binaries (first indices) and `nc` continuous
/// variables that is feasible for at least one binary assignment.
pub fn random_miqp(rng: &mut impl Rng, nb: usize, nc: usize) -> MIQProblem {
    let n = nb + nc;
    let k = n + 2;
    let m: Vec<Vec<f64>> = (0..k)
        .map(|_| (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect())
        .collect();
    let mut h = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            h[i][j] = (0..k).map(|r| m[r][i] * m[r][j]).sum();
        }
        h[i][i] += 0.1;
    }
    let linear: Vec<f64> = (0..n).map(|_| rng.gen_range(-3.0..3.0)).collect();

    let mut z_feas: Vec<f64> = (0..nb).map(|_| rng.gen_range(0..2) as f64).collect();
    z_feas.extend((0..nc).map(|_| rng.gen_range(-1.0..1.0)));

    let mut ineq = Vec::new();
    let mut ineq_rhs = Vec::new();
    for _ in 0..rng.gen_range(1..=n) {
        let row: Vec<f64> = (0..n)
            .map(|_| {
                if rng.gen_bool(0.6) {
                    rng.gen_range(-2.0..2.0)
                } else {
                    0.0
                }
            })
            .collect();
        let gz: f64 = row.iter().zip(&z_feas).map(|(a, b)| a * b).sum();
        ineq_rhs.push(gz + rng.gen_range(0.0..0.5));
        ineq.push(row);
    }
    for i in nb..n {
        let mut up = vec![0.0; n];
        up[i] = 1.0;
        ineq.push(up);
        ineq_rhs.push(3.0);
        let mut lo = vec![0.0; n];
        lo[i] = -1.0;
        ineq.push(lo);
        ineq_rhs.push(3.0);
    }
    let mut eq = Vec::new();
    let mut eq_rhs = Vec::new();
    if nc >= 2 && rng.gen_bool(0.5) {
        let row: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        eq_rhs.push(row.iter().zip(&z_feas).map(|(a, b)| a * b).sum());
        eq.push(row);
    }
    MIQProblem {
        qp: QpProblem {
            hessian: SparseMatrix::from_dense(&h, n),
            linear,
            constant: rng.gen_range(-1.0..1.0),
            eq_matrix: SparseMatrix::from_dense(&eq, n),
            eq_rhs,
            ineq_matrix: SparseMatrix::from_dense(&ineq, n),
            ineq_rhs,
        },
        binaries: (0..nb).collect(),
    }
}

pub struct Enumeration {
    /// Best objective over all assignments (`+∞` if none is feasible).
    pub best: f64,
    pub best_z: Option<Vec<f64>>,
    /// QP solves used: one per assignment.
    pub solves: usize,
}

/// Brute-force oracle: fixes every binary assignment and solves the
/// remaining convex QP. `admissible` filters assignments before solving.
pub fn enumerate_binaries(p: &MIQProblem, admissible: impl Fn(&[bool]) -> bool) -> Enumeration {
    let nb = p.binaries.len();
    let n = p.num_vars();
    let mut out = Enumeration {
        best: f64::INFINITY,
        best_z: None,
        solves: 0,
    };
    for mask in 0u64..(1 << nb) {
        let bits: Vec<bool> = (0..nb).map(|k| mask & (1 << k) != 0).collect();
        if !admissible(&bits) {
            continue;
        }
        let mut fixed = vec![None; n];
        for (k, &b) in p.binaries.iter().enumerate() {
            fixed[b] = Some(if bits[k] { 1.0 } else { 0.0 });
        }
        let (sub, map) = p.qp.substitute(&fixed);
        out.solves += 1;
        let sol = solve_qp(&sub).expect("enumeration subproblem solves");
        if sol.feasible && sol.objective < out.best {
            out.best = sol.objective;
            let mut z: Vec<f64> = fixed.iter().map(|v| v.unwrap_or(0.0)).collect();
            for (k, &i) in map.iter().enumerate() {
                z[i] = sol.z[k];
            }
            out.best_z = Some(z);
        }
    }
    out
}
