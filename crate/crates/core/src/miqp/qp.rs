//! Convex quadratic programs
//!
//! ```text
//!     minimize     ½ zᵀ H z + fᵀ z + c
//!     subject to   E z  = e
//!                  G z <= g
//! ```
//!
//! solved with an infeasible-start primal-dual interior point method
//! (Mehrotra predictor-corrector). The Newton system is reduced in two
//! steps before factorization:
//!
//! 1. *separable* variables (diagonal Hessian, absent from equality rows, and
//!    never sharing an inequality row with another separable variable, e.g.
//!    constraint-softening slacks) are eliminated through their diagonal
//!    Schur complement;
//! 2. the remaining quasi-definite KKT matrix is factored with an envelope
//!    LDLᵀ under a reverse Cuthill-McKee ordering.
//!
//! When the interior point iteration fails to converge, a phase-1 program
//! (minimize the largest constraint violation) decides feasibility; an
//! infeasible problem is reported with objective `+∞`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::ldl::SkylineMatrix;
use super::sparse::{dot, inf_norm, SparseMatrix};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QpError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("Hessian is not symmetric")]
    NotSymmetric,
    #[error("Hessian is not positive semidefinite")]
    NotPsd,
    #[error("problem data contains non-finite values")]
    NonFinite,
    #[error("interior point method did not converge after {0} iterations")]
    NotConverged(usize),
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct QpProblem {
    pub hessian: SparseMatrix,
    pub linear: Vec<f64>,
    #[serde(default)]
    pub constant: f64,
    pub eq_matrix: SparseMatrix,
    pub eq_rhs: Vec<f64>,
    pub ineq_matrix: SparseMatrix,
    pub ineq_rhs: Vec<f64>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct KktResiduals {
    pub stationarity: f64,
    pub primal_eq: f64,
    pub primal_ineq: f64,
    pub dual: f64,
    pub complementarity: f64,
}

impl KktResiduals {
    pub fn max(&self) -> f64 {
        self.stationarity
            .max(self.primal_eq)
            .max(self.primal_ineq)
            .max(self.dual)
            .max(self.complementarity)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct QpSolution {
    pub feasible: bool,
    pub z: Vec<f64>,
    /// `+∞` when infeasible.
    pub objective: f64,
    pub eq_duals: Vec<f64>,
    pub ineq_duals: Vec<f64>,
    pub iterations: usize,
    pub residuals: KktResiduals,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QpSettings {
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Primal/dual static regularization of the KKT matrix.
    pub regularization: f64,
}

impl Default for QpSettings {
    fn default() -> Self {
        Self {
            tolerance: 1e-9,
            max_iterations: 100,
            regularization: 1e-9,
        }
    }
}

impl QpProblem {
    pub fn num_vars(&self) -> usize {
        self.linear.len()
    }

    pub fn objective(&self, z: &[f64]) -> f64 {
        0.5 * self.hessian.quad_form(z) + dot(&self.linear, z) + self.constant
    }

    pub fn validate(&self) -> Result<(), QpError> {
        let n = self.num_vars();
        if self.hessian.nrows() != n || self.hessian.ncols() != n {
            return Err(QpError::Dimension(format!(
                "Hessian is {}x{}, expected {n}x{n}",
                self.hessian.nrows(),
                self.hessian.ncols()
            )));
        }
        if self.eq_matrix.ncols() != n || self.eq_matrix.nrows() != self.eq_rhs.len() {
            return Err(QpError::Dimension("equality block".into()));
        }
        if self.ineq_matrix.ncols() != n || self.ineq_matrix.nrows() != self.ineq_rhs.len() {
            return Err(QpError::Dimension("inequality block".into()));
        }
        let finite = self.hessian.is_finite()
            && self.eq_matrix.is_finite()
            && self.ineq_matrix.is_finite()
            && self.linear.iter().all(|v| v.is_finite())
            && self.eq_rhs.iter().all(|v| v.is_finite())
            && self.ineq_rhs.iter().all(|v| !v.is_nan())
            && self.constant.is_finite();
        if !finite {
            return Err(QpError::NonFinite);
        }
        if !self.hessian.is_symmetric(1e-12) {
            return Err(QpError::NotSymmetric);
        }
        if !is_psd(&self.hessian) {
            return Err(QpError::NotPsd);
        }
        Ok(())
    }

    /// Substitutes `fixed[i] = Some(v)` variables. Returns the reduced problem
    /// and, for each reduced variable, its index in `self`.
    pub fn substitute(&self, fixed: &[Option<f64>]) -> (QpProblem, Vec<usize>) {
        let n = self.num_vars();
        let mut map = vec![usize::MAX; n];
        let mut free = Vec::new();
        for i in 0..n {
            if fixed[i].is_none() {
                map[i] = free.len();
                free.push(i);
            }
        }
        let nf = free.len();
        let val = |i: usize| fixed[i].unwrap_or(0.0);

        let mut constant = self.constant;
        let mut linear: Vec<f64> = free.iter().map(|&i| self.linear[i]).collect();
        let mut hessian = SparseMatrix::new(nf);
        for i in 0..n {
            let row = self.hessian.row(i);
            if let Some(vi) = fixed[i] {
                constant += self.linear[i] * vi;
                for &(j, h) in row {
                    match fixed[j] {
                        Some(vj) => constant += 0.5 * h * vi * vj,
                        // Hᵢⱼ zᵢ zⱼ appears twice (i,j) and (j,i) with ½.
                        None => linear[map[j]] += h * vi,
                    }
                }
            } else {
                hessian.push_row(
                    row.iter()
                        .filter(|e| fixed[e.0].is_none())
                        .map(|&(j, h)| (map[j], h))
                        .collect(),
                );
            }
        }
        let reduce = |m: &SparseMatrix, rhs: &[f64]| {
            let mut out = SparseMatrix::new(nf);
            let mut b = Vec::with_capacity(rhs.len());
            for (r, &br) in m.rows().zip(rhs) {
                let mut shift = 0.0;
                let mut entries = Vec::with_capacity(r.len());
                for &(c, v) in r {
                    if fixed[c].is_some() {
                        shift += v * val(c);
                    } else {
                        entries.push((map[c], v));
                    }
                }
                out.push_row(entries);
                b.push(br - shift);
            }
            (out, b)
        };
        let (eq_matrix, eq_rhs) = reduce(&self.eq_matrix, &self.eq_rhs);
        let (ineq_matrix, ineq_rhs) = reduce(&self.ineq_matrix, &self.ineq_rhs);
        (
            QpProblem {
                hessian,
                linear,
                constant,
                eq_matrix,
                eq_rhs,
                ineq_matrix,
                ineq_rhs,
            },
            free,
        )
    }

    pub fn kkt_residuals(&self, z: &[f64], y: &[f64], lam: &[f64]) -> KktResiduals {
        let mut grad = self.hessian.mul_vec(z);
        for (g, f) in grad.iter_mut().zip(&self.linear) {
            *g += f;
        }
        self.eq_matrix.mul_transpose_add(y, &mut grad);
        self.ineq_matrix.mul_transpose_add(lam, &mut grad);
        let eq = self.eq_matrix.mul_vec(z);
        let gz = self.ineq_matrix.mul_vec(z);
        let primal_eq = eq
            .iter()
            .zip(&self.eq_rhs)
            .fold(0.0, |m: f64, (a, b)| m.max((a - b).abs()));
        let primal_ineq = gz
            .iter()
            .zip(&self.ineq_rhs)
            .fold(0.0, |m: f64, (a, b)| m.max(a - b));
        let dual = lam.iter().fold(0.0, |m: f64, &l| m.max(-l));
        let complementarity =
            gz.iter()
                .zip(&self.ineq_rhs)
                .zip(lam)
                .fold(0.0, |m: f64, ((a, b), l)| {
                    if b.is_finite() {
                        m.max((l * (b - a)).abs())
                    } else {
                        m
                    }
                });
        KktResiduals {
            stationarity: inf_norm(&grad),
            primal_eq,
            primal_ineq,
            dual,
            complementarity,
        }
    }
}

fn is_psd(h: &SparseMatrix) -> bool {
    let n = h.nrows();
    let diagonal_only = (0..n).all(|i| h.row(i).iter().all(|e| e.0 == i));
    if diagonal_only {
        return (0..n).all(|i| h.get(i, i) >= -1e-12);
    }
    let mut a = h.to_dense();
    let scale = a
        .iter()
        .flatten()
        .fold(0.0f64, |m, v| m.max(v.abs()))
        .max(1.0);
    let shift = 1e-10 * scale;
    for (i, row) in a.iter_mut().enumerate() {
        row[i] += shift;
    }
    // Dense Cholesky of H + shift·I.
    for j in 0..n {
        let mut d = a[j][j];
        for k in 0..j {
            d -= a[j][k] * a[j][k];
        }
        if d <= 0.0 {
            return false;
        }
        let d = d.sqrt();
        a[j][j] = d;
        for i in j + 1..n {
            let mut s = a[i][j];
            for k in 0..j {
                s -= a[i][k] * a[j][k];
            }
            a[i][j] = s / d;
        }
    }
    true
}

/// Validates and solves a convex QP.
pub fn solve_qp(problem: &QpProblem) -> Result<QpSolution, QpError> {
    problem.validate()?;
    solve_unchecked(problem, &QpSettings::default())
}

pub fn solve_qp_with(problem: &QpProblem, settings: &QpSettings) -> Result<QpSolution, QpError> {
    problem.validate()?;
    solve_unchecked(problem, settings)
}

fn infeasible(problem: &QpProblem, iterations: usize) -> QpSolution {
    QpSolution {
        feasible: false,
        z: vec![0.0; problem.num_vars()],
        objective: f64::INFINITY,
        eq_duals: vec![0.0; problem.eq_rhs.len()],
        ineq_duals: vec![0.0; problem.ineq_rhs.len()],
        iterations,
        residuals: KktResiduals::default(),
    }
}

/// Solves without validating; the caller guarantees a well-formed convex
/// problem (branch-and-bound subproblems inherit validity from the root).
pub(crate) fn solve_unchecked(
    problem: &QpProblem,
    settings: &QpSettings,
) -> Result<QpSolution, QpError> {
    // Presolve: empty rows are either trivially satisfied or a certificate.
    let tol = 1e-9;
    let mut pre = QpProblem {
        hessian: problem.hessian.clone(),
        linear: problem.linear.clone(),
        constant: problem.constant,
        eq_matrix: SparseMatrix::new(problem.num_vars()),
        eq_rhs: Vec::new(),
        ineq_matrix: SparseMatrix::new(problem.num_vars()),
        ineq_rhs: Vec::new(),
    };
    let mut eq_keep = Vec::new();
    for (r, (row, &b)) in problem.eq_matrix.rows().zip(&problem.eq_rhs).enumerate() {
        if row.is_empty() {
            if b.abs() > tol * (1.0 + b.abs()) {
                return Ok(infeasible(problem, 0));
            }
        } else {
            pre.eq_matrix.push_row(row.to_vec());
            pre.eq_rhs.push(b);
            eq_keep.push(r);
        }
    }
    let mut in_keep = Vec::new();
    for (r, (row, &b)) in problem
        .ineq_matrix
        .rows()
        .zip(&problem.ineq_rhs)
        .enumerate()
    {
        if b == f64::INFINITY {
            continue;
        }
        if row.is_empty() {
            if b < -tol * (1.0 + b.abs()) {
                return Ok(infeasible(problem, 0));
            }
        } else {
            pre.ineq_matrix.push_row(row.to_vec());
            pre.ineq_rhs.push(b);
            in_keep.push(r);
        }
    }

    let scaling = Scaling::ruiz(&pre, 15);
    let pre = scaling.apply(&pre);
    let mut ipm = Ipm::new(&pre, settings);
    let mut result = ipm.run(None, settings.max_iterations);
    let mut iterations = result.iterations;
    if !result.converged {
        let (violation, start, p1_iters) = phase_one(&pre, settings)?;
        iterations += p1_iters;
        let scale = 1.0 + inf_norm(&pre.ineq_rhs).max(inf_norm(&pre.eq_rhs));
        if violation > 1e-7 * scale {
            return Ok(infeasible(problem, iterations));
        }
        result = ipm.run(Some(&start), 3 * settings.max_iterations);
        iterations += result.iterations;
        if !result.converged {
            return Err(QpError::NotConverged(iterations));
        }
    }

    scaling.unscale(&mut result);
    let mut eq_duals = vec![0.0; problem.eq_rhs.len()];
    for (k, &r) in eq_keep.iter().enumerate() {
        eq_duals[r] = result.y[k];
    }
    let mut ineq_duals = vec![0.0; problem.ineq_rhs.len()];
    for (k, &r) in in_keep.iter().enumerate() {
        ineq_duals[r] = result.lam[k];
    }
    let residuals = problem.kkt_residuals(&result.z, &eq_duals, &ineq_duals);
    Ok(QpSolution {
        feasible: true,
        objective: problem.objective(&result.z),
        z: result.z,
        eq_duals,
        ineq_duals,
        iterations,
        residuals,
    })
}

/// Diagonal scaling `z = D z̃` of the variables and `R` of the constraint
/// rows, chosen by Ruiz equilibration of the KKT matrix so every row and
/// column has unit infinity norm.
struct Scaling {
    col: Vec<f64>,
    eq: Vec<f64>,
    ineq: Vec<f64>,
}

impl Scaling {
    fn ruiz(p: &QpProblem, passes: usize) -> Self {
        let n = p.num_vars();
        let mut s = Scaling {
            col: vec![1.0; n],
            eq: vec![1.0; p.eq_rhs.len()],
            ineq: vec![1.0; p.ineq_rhs.len()],
        };
        let inv_sqrt = |v: f64| if v > 0.0 { 1.0 / v.sqrt() } else { 1.0 };
        for _ in 0..passes {
            let mut cn = vec![0.0f64; n];
            for (i, row) in p.hessian.rows().enumerate() {
                for &(j, v) in row {
                    cn[j] = cn[j].max((s.col[i] * v * s.col[j]).abs());
                }
            }
            let mut scan = |m: &SparseMatrix, rs: &mut Vec<f64>| {
                for (r, row) in m.rows().enumerate() {
                    let mut rn = 0.0f64;
                    for &(j, v) in row {
                        let a = (rs[r] * v * s.col[j]).abs();
                        rn = rn.max(a);
                        cn[j] = cn[j].max(a);
                    }
                    rs[r] *= inv_sqrt(rn);
                }
            };
            let (mut eq, mut ineq) = (std::mem::take(&mut s.eq), std::mem::take(&mut s.ineq));
            scan(&p.eq_matrix, &mut eq);
            scan(&p.ineq_matrix, &mut ineq);
            s.eq = eq;
            s.ineq = ineq;
            for j in 0..n {
                s.col[j] *= inv_sqrt(cn[j]);
            }
        }
        s
    }

    fn apply(&self, p: &QpProblem) -> QpProblem {
        let scale = |m: &SparseMatrix, rs: &[f64]| {
            let mut out = SparseMatrix::new(m.ncols());
            for (r, row) in m.rows().enumerate() {
                out.push_row(
                    row.iter()
                        .map(|&(j, v)| (j, rs[r] * v * self.col[j]))
                        .collect(),
                );
            }
            out
        };
        QpProblem {
            hessian: scale(&p.hessian, &self.col),
            linear: p.linear.iter().zip(&self.col).map(|(f, d)| f * d).collect(),
            constant: p.constant,
            eq_matrix: scale(&p.eq_matrix, &self.eq),
            eq_rhs: p.eq_rhs.iter().zip(&self.eq).map(|(b, r)| b * r).collect(),
            ineq_matrix: scale(&p.ineq_matrix, &self.ineq),
            ineq_rhs: p
                .ineq_rhs
                .iter()
                .zip(&self.ineq)
                .map(|(b, r)| b * r)
                .collect(),
        }
    }

    fn unscale(&self, r: &mut IpmResult) {
        r.z.iter_mut().zip(&self.col).for_each(|(z, d)| *z *= d);
        r.y.iter_mut().zip(&self.eq).for_each(|(y, s)| *y *= s);
        r.lam.iter_mut().zip(&self.ineq).for_each(|(l, s)| *l *= s);
    }
}

/// Minimizes the largest violation `ε` of all constraints (equalities as two
/// inequalities) with `ε >= -1`. Returns `(ε*, z*, iterations)`.
fn phase_one(p: &QpProblem, settings: &QpSettings) -> Result<(f64, Vec<f64>, usize), QpError> {
    let n = p.num_vars();
    let eps = n;
    let mut hess = SparseMatrix::new(n + 1);
    for i in 0..n {
        hess.push_row(vec![(i, 1e-8)]);
    }
    hess.push_row(Vec::new());
    let mut linear = vec![0.0; n + 1];
    linear[eps] = 1.0;
    let mut g = SparseMatrix::new(n + 1);
    let mut h = Vec::new();
    for (row, &b) in p.ineq_matrix.rows().zip(&p.ineq_rhs) {
        let mut e = row.to_vec();
        e.push((eps, -1.0));
        g.push_row(e);
        h.push(b);
    }
    for (row, &b) in p.eq_matrix.rows().zip(&p.eq_rhs) {
        let mut e = row.to_vec();
        e.push((eps, -1.0));
        g.push_row(e);
        h.push(b);
        let mut e: Vec<(usize, f64)> = row.iter().map(|&(c, v)| (c, -v)).collect();
        e.push((eps, -1.0));
        g.push_row(e);
        h.push(-b);
    }
    g.push_row(vec![(eps, -1.0)]);
    h.push(1.0);
    let p1 = QpProblem {
        hessian: hess,
        linear,
        constant: 0.0,
        eq_matrix: SparseMatrix::new(n + 1),
        eq_rhs: Vec::new(),
        ineq_matrix: g,
        ineq_rhs: h,
    };
    let mut ipm = Ipm::new(&p1, settings);
    let r = ipm.run(None, 2 * settings.max_iterations);
    if !r.converged {
        return Err(QpError::NotConverged(r.iterations));
    }
    let mut z = r.z;
    let violation = z.pop().unwrap();
    // Report the true worst violation at the phase-1 point.
    let gz = p.ineq_matrix.mul_vec(&z);
    let ez = p.eq_matrix.mul_vec(&z);
    let worst = gz
        .iter()
        .zip(&p.ineq_rhs)
        .map(|(a, b)| a - b)
        .chain(ez.iter().zip(&p.eq_rhs).map(|(a, b)| (a - b).abs()))
        .fold(violation.max(0.0), f64::max);
    Ok((worst, z, r.iterations))
}

struct IpmResult {
    z: Vec<f64>,
    y: Vec<f64>,
    lam: Vec<f64>,
    converged: bool,
    iterations: usize,
}

/// Best iterate seen, accepted at a looser tolerance when the iteration
/// fails to reach the target.
struct Best {
    merit: f64,
    z: Vec<f64>,
    y: Vec<f64>,
    lam: Vec<f64>,
}

impl Best {
    const ACCEPT: f64 = 1e-7;

    fn finish(self, iterations: usize) -> IpmResult {
        IpmResult {
            converged: self.merit <= Self::ACCEPT,
            z: self.z,
            y: self.y,
            lam: self.lam,
            iterations,
        }
    }
}

/// Reusable interior point workspace for one problem structure.
struct Ipm<'a> {
    p: &'a QpProblem,
    settings: QpSettings,
    n: usize,
    me: usize,
    mi: usize,
    /// KKT position of each non-separable variable (`usize::MAX` if separable).
    kkt_index: Vec<usize>,
    no: usize,
    /// Separable variables, each with at most one inequality row that also
    /// involves other variables (`(row, coefficient)`).
    sep_vars: Vec<usize>,
    coupling: Vec<Option<(usize, f64)>>,
    /// For each inequality row, the index into `sep_vars` it contains.
    row_sep: Vec<Option<usize>>,
    h_diag: Vec<f64>,
    sky: SkylineMatrix,
    k_ss: Vec<f64>,
    /// `k_ss` without the coupling row's contribution.
    k_rest: Vec<f64>,
    k_os: Vec<Vec<(usize, f64)>>,
    w: Vec<f64>,
    refine_steps: usize,
}

impl<'a> Ipm<'a> {
    fn new(p: &'a QpProblem, settings: &QpSettings) -> Self {
        let n = p.num_vars();
        let me = p.eq_rhs.len();
        let mi = p.ineq_rhs.len();

        let mut in_eq = vec![false; n];
        for row in p.eq_matrix.rows() {
            for &(c, _) in row {
                in_eq[c] = true;
            }
        }
        let mut col_rows: Vec<Vec<usize>> = vec![Vec::new(); n];
        for (r, row) in p.ineq_matrix.rows().enumerate() {
            for &(c, _) in row {
                col_rows[c].push(r);
            }
        }
        let h_diag: Vec<f64> = (0..n).map(|i| p.hessian.get(i, i)).collect();
        let mut row_sep: Vec<Option<usize>> = vec![None; mi];
        let mut sep_vars = Vec::new();
        let mut coupling = Vec::new();
        let mut kkt_index = vec![usize::MAX; n];
        let mut no = 0;
        for i in 0..n {
            let diag_only = p.hessian.row(i).iter().all(|e| e.0 == i);
            let shared: Vec<usize> = col_rows[i]
                .iter()
                .copied()
                .filter(|&r| p.ineq_matrix.row(r).len() > 1)
                .collect();
            let ok = diag_only
                && !in_eq[i]
                && !col_rows[i].is_empty()
                && shared.len() <= 1
                && col_rows[i].iter().all(|&r| row_sep[r].is_none());
            if ok {
                for &r in &col_rows[i] {
                    row_sep[r] = Some(sep_vars.len());
                }
                sep_vars.push(i);
                coupling.push(shared.first().map(|&r| (r, p.ineq_matrix.get(r, i))));
            } else {
                kkt_index[i] = no;
                no += 1;
            }
        }

        // Sparsity pattern of the reduced KKT matrix.
        let dim = no + me;
        let mut adj: Vec<Vec<usize>> = vec![Vec::new(); dim];
        let link = |a: usize, b: usize, adj: &mut Vec<Vec<usize>>| {
            if a != b {
                adj[a].push(b);
                adj[b].push(a);
            }
        };
        for i in 0..n {
            if kkt_index[i] == usize::MAX {
                continue;
            }
            for &(j, _) in p.hessian.row(i) {
                if kkt_index[j] != usize::MAX {
                    link(kkt_index[i], kkt_index[j], &mut adj);
                }
            }
        }
        for row in p.ineq_matrix.rows() {
            let o: Vec<usize> = row
                .iter()
                .filter(|e| kkt_index[e.0] != usize::MAX)
                .map(|e| kkt_index[e.0])
                .collect();
            for a in 0..o.len() {
                for b in 0..a {
                    link(o[a], o[b], &mut adj);
                }
            }
        }
        for (r, row) in p.eq_matrix.rows().enumerate() {
            for &(c, _) in row {
                if kkt_index[c] != usize::MAX {
                    link(no + r, kkt_index[c], &mut adj);
                }
            }
        }
        for a in &mut adj {
            a.sort_unstable();
            a.dedup();
        }
        let sign: Vec<f64> = (0..dim).map(|i| if i < no { 1.0 } else { -1.0 }).collect();
        let sky = SkylineMatrix::new(&adj, &sign);
        let ns = sep_vars.len();
        Self {
            p,
            settings: *settings,
            n,
            me,
            mi,
            kkt_index,
            no,
            sep_vars,
            coupling,
            row_sep,
            h_diag,
            sky,
            k_ss: vec![0.0; ns],
            k_rest: vec![0.0; ns],
            k_os: vec![Vec::new(); ns],
            w: vec![0.0; mi],
            refine_steps: 3,
        }
    }

    /// Factors the reduced KKT matrix, raising the regularization while
    /// pivots break down. Iterative refinement against the unregularized
    /// operator recovers the accuracy.
    fn assemble(&mut self) {
        let mut delta = self.settings.regularization;
        loop {
            let replaced = self.assemble_with(delta);
            if replaced == 0 || delta >= 1e-4 {
                break;
            }
            delta *= 100.0;
        }
        self.refine_steps = if delta > self.settings.regularization {
            20
        } else {
            3
        };
    }

    fn assemble_with(&mut self, delta: f64) -> usize {
        let p = self.p;
        self.sky.clear();
        for i in 0..self.n {
            let ki = self.kkt_index[i];
            if ki == usize::MAX {
                continue;
            }
            self.sky.add(ki, ki, delta);
            for &(j, h) in p.hessian.row(i) {
                let kj = self.kkt_index[j];
                if kj != usize::MAX && j <= i {
                    self.sky.add(ki, kj, h);
                }
            }
        }
        for (s, &var) in self.sep_vars.iter().enumerate() {
            self.k_rest[s] = self.h_diag[var] + delta;
        }
        for (r, row) in p.ineq_matrix.rows().enumerate() {
            let w = self.w[r];
            if let Some(s) = self.row_sep[r] {
                if self.coupling[s].map(|c| c.0) == Some(r) {
                    continue;
                }
                // Bound row on the separable variable alone.
                let c = row[0].1;
                self.k_rest[s] += w * c * c;
                continue;
            }
            for (a, &(ca, va)) in row.iter().enumerate() {
                let ka = self.kkt_index[ca];
                for &(cb, vb) in &row[..=a] {
                    self.sky.add(ka, self.kkt_index[cb], w * va * vb);
                }
            }
        }
        // Eliminating s from its coupling row a·z + c s <= g gives the
        // weight w·k_rest/(k_rest + w c²) on a aᵀ, formed without cancellation.
        for s in 0..self.sep_vars.len() {
            self.k_os[s].clear();
            let Some((r, c)) = self.coupling[s] else {
                self.k_ss[s] = self.k_rest[s];
                continue;
            };
            let w = self.w[r];
            let kss = self.k_rest[s] + w * c * c;
            self.k_ss[s] = kss;
            let w_eff = w * self.k_rest[s] / kss;
            let row = p.ineq_matrix.row(r);
            for (a, &(ca, va)) in row.iter().enumerate() {
                let ka = self.kkt_index[ca];
                if ka == usize::MAX {
                    continue;
                }
                self.k_os[s].push((ka, w * c * va));
                for &(cb, vb) in &row[..=a] {
                    let kb = self.kkt_index[cb];
                    if kb != usize::MAX {
                        self.sky.add(ka, kb, w_eff * va * vb);
                    }
                }
            }
        }
        for (r, row) in p.eq_matrix.rows().enumerate() {
            for &(c, v) in row {
                let k = self.kkt_index[c];
                if k != usize::MAX {
                    self.sky.add(self.no + r, k, v);
                }
            }
            self.sky.add(self.no + r, self.no + r, -delta);
        }
        self.sky.factor(1e-14)
    }

    /// Solves the regularized reduced system for the full Newton step.
    fn solve_reduced(&self, r1: &[f64], r2: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let mut rhs = vec![0.0; self.no + self.me];
        for i in 0..self.n {
            let k = self.kkt_index[i];
            if k != usize::MAX {
                rhs[k] = r1[i];
            }
        }
        for (s, &var) in self.sep_vars.iter().enumerate() {
            let scale = r1[var] / self.k_ss[s];
            for &(k, v) in &self.k_os[s] {
                rhs[k] -= v * scale;
            }
        }
        rhs[self.no..].copy_from_slice(r2);
        let x = self.sky.solve(&rhs);
        let mut dz = vec![0.0; self.n];
        for i in 0..self.n {
            let k = self.kkt_index[i];
            if k != usize::MAX {
                dz[i] = x[k];
            }
        }
        for (s, &var) in self.sep_vars.iter().enumerate() {
            let coupling: f64 = self.k_os[s].iter().map(|&(k, v)| v * x[k]).sum();
            dz[var] = (r1[var] - coupling) / self.k_ss[s];
        }
        (dz, x[self.no..].to_vec())
    }

    /// Applies the unregularized Newton operator.
    fn apply(&self, dz: &[f64], dy: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let p = self.p;
        let mut out1 = p.hessian.mul_vec(dz);
        let mut gdz = p.ineq_matrix.mul_vec(dz);
        for (v, w) in gdz.iter_mut().zip(&self.w) {
            *v *= w;
        }
        p.ineq_matrix.mul_transpose_add(&gdz, &mut out1);
        p.eq_matrix.mul_transpose_add(dy, &mut out1);
        (out1, p.eq_matrix.mul_vec(dz))
    }

    fn solve_newton(&self, r1: &[f64], r2: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let (mut dz, mut dy) = self.solve_reduced(r1, r2);
        let rhs_norm = inf_norm(r1).max(inf_norm(r2)).max(1e-300);
        for _ in 0..self.refine_steps {
            let (a1, a2) = self.apply(&dz, &dy);
            let e1: Vec<f64> = r1.iter().zip(&a1).map(|(a, b)| a - b).collect();
            let e2: Vec<f64> = r2.iter().zip(&a2).map(|(a, b)| a - b).collect();
            let err = inf_norm(&e1).max(inf_norm(&e2));
            if err <= 1e-10 * rhs_norm {
                break;
            }
            let (cz, cy) = self.solve_reduced(&e1, &e2);
            for (d, c) in dz.iter_mut().zip(&cz) {
                *d += c;
            }
            for (d, c) in dy.iter_mut().zip(&cy) {
                *d += c;
            }
        }
        (dz, dy)
    }

    fn run(&mut self, start: Option<&[f64]>, max_iterations: usize) -> IpmResult {
        let p = self.p;
        let (n, me, mi) = (self.n, self.me, self.mi);
        let tol = self.settings.tolerance;

        // Starting point: least-squares-like solve with unit scaling.
        self.w.iter_mut().for_each(|w| *w = 1.0);
        self.assemble();
        let (mut z, mut y) = match start {
            Some(s) => (s.to_vec(), vec![0.0; me]),
            None => {
                let mut r1: Vec<f64> = p.linear.iter().map(|v| -v).collect();
                p.ineq_matrix.mul_transpose_add(&p.ineq_rhs, &mut r1);
                self.solve_newton(&r1, &p.eq_rhs)
            }
        };
        // Mehrotra's starting point: the unit-weight solve gives slacks
        // t = b - Gz and multipliers λ = Gz - b, shifted to be positive and
        // then balanced.
        let gz = p.ineq_matrix.mul_vec(&z);
        let mut t: Vec<f64> = gz.iter().zip(&p.ineq_rhs).map(|(a, b)| b - a).collect();
        let mut lam: Vec<f64> = t.iter().map(|v| -v).collect();
        if mi > 0 {
            for v in [&mut t, &mut lam] {
                let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
                if lo <= 0.0 {
                    v.iter_mut().for_each(|x| *x += 1.0 - lo);
                }
            }
            let tl = dot(&t, &lam);
            let (st, sl) = (t.iter().sum::<f64>(), lam.iter().sum::<f64>());
            let (dt0, dl0) = (0.5 * tl / sl, 0.5 * tl / st);
            t.iter_mut().for_each(|x| *x += dt0);
            lam.iter_mut().for_each(|x| *x += dl0);
        }
        if start.is_some() {
            y.iter_mut().for_each(|v| *v = 0.0);
        }

        let e_scale = 1.0 + inf_norm(&p.eq_rhs);
        let g_scale = 1.0 + inf_norm(&p.ineq_rhs);
        let f_norm = inf_norm(&p.linear);
        let mut history: Vec<f64> = Vec::new();
        let mut mu_history: Vec<f64> = Vec::new();
        let mut safe = false;
        let mut best = Best {
            merit: f64::INFINITY,
            z: Vec::new(),
            y: Vec::new(),
            lam: Vec::new(),
        };

        for iter in 0..=max_iterations {
            let hz = p.hessian.mul_vec(&z);
            let mut r_d: Vec<f64> = hz.iter().zip(&p.linear).map(|(a, b)| a + b).collect();
            let mut ey = vec![0.0; n];
            p.eq_matrix.mul_transpose_add(&y, &mut ey);
            let mut gl = vec![0.0; n];
            p.ineq_matrix.mul_transpose_add(&lam, &mut gl);
            for i in 0..n {
                r_d[i] += ey[i] + gl[i];
            }
            let r_p: Vec<f64> = p
                .eq_matrix
                .mul_vec(&z)
                .iter()
                .zip(&p.eq_rhs)
                .map(|(a, b)| a - b)
                .collect();
            let gz = p.ineq_matrix.mul_vec(&z);
            let r_g: Vec<f64> = (0..mi).map(|i| gz[i] + t[i] - p.ineq_rhs[i]).collect();
            let gap = dot(&t, &lam);
            let mu = if mi > 0 { gap / mi as f64 } else { 0.0 };

            let obj = 0.5 * dot(&z, &hz) + dot(&p.linear, &z);
            let d_scale = 1.0
                + f_norm
                    .max(inf_norm(&hz))
                    .max(inf_norm(&ey))
                    .max(inf_norm(&gl));
            let pres = (inf_norm(&r_p) / e_scale).max(inf_norm(&r_g) / g_scale);
            let dres = inf_norm(&r_d) / d_scale;
            let cres = gap / (1.0 + 1e-3 * obj.abs());
            if !(pres.is_finite() && dres.is_finite() && cres.is_finite()) {
                return best.finish(iter);
            }
            if pres <= tol && dres <= tol && cres <= tol {
                return IpmResult {
                    z,
                    y,
                    lam,
                    converged: true,
                    iterations: iter,
                };
            }
            // The fallback merit measures the gap relative to |j|, which
            // matters for heavily penalized problems with j ~ 1e5.
            let total = pres.max(dres).max(gap / (1.0 + obj.abs()));
            if total < best.merit {
                best = Best {
                    merit: total,
                    z: z.clone(),
                    y: y.clone(),
                    lam: lam.clone(),
                };
            } else if best.merit < 1e-6 && total > 1e4 * best.merit {
                // Diverging after nearly converging: the KKT system has
                // become too ill-conditioned to make progress.
                return best.finish(iter);
            }
            if iter == max_iterations {
                break;
            }
            // Stall detection: infeasible problems keep a primal residual
            // while the duals grow.
            let merit = pres.max(dres);
            history.push(merit);
            let window = if mi == 0 { 2 } else { 10 };
            if iter >= 3 * window {
                let past = history[iter - window];
                if merit > 0.5 * past && pres > 1e-6 {
                    return best.finish(iter);
                }
            }

            for i in 0..mi {
                self.w[i] = lam[i] / t[i];
            }
            self.assemble();

            let direction = |this: &Self, r_c: &[f64]| {
                // dλ = W G dz + (λ∘r_g - r_c)/t ; dt = -r_g - G dz.
                let corr: Vec<f64> = (0..mi).map(|i| (lam[i] * r_g[i] - r_c[i]) / t[i]).collect();
                let mut r1: Vec<f64> = r_d.iter().map(|v| -v).collect();
                let mut gc = vec![0.0; n];
                p.ineq_matrix.mul_transpose_add(&corr, &mut gc);
                for i in 0..n {
                    r1[i] -= gc[i];
                }
                let r2: Vec<f64> = r_p.iter().map(|v| -v).collect();
                let (dz, dy) = this.solve_newton(&r1, &r2);
                let gdz = p.ineq_matrix.mul_vec(&dz);
                let dt: Vec<f64> = (0..mi).map(|i| -r_g[i] - gdz[i]).collect();
                let dl: Vec<f64> = (0..mi).map(|i| (-r_c[i] - lam[i] * dt[i]) / t[i]).collect();
                (dz, dy, dt, dl)
            };
            let max_step = |dt: &[f64], dl: &[f64]| {
                let mut a: f64 = 1.0;
                for i in 0..mi {
                    if dt[i] < 0.0 {
                        a = a.min(-t[i] / dt[i]);
                    }
                    if dl[i] < 0.0 {
                        a = a.min(-lam[i] / dl[i]);
                    }
                }
                a
            };

            // Mehrotra steps can cycle on degenerate problems; fall back to
            // plain path following once μ stops decreasing.
            mu_history.push(mu);
            if iter >= 8 && mu > 0.5 * mu_history[iter - 4] && pres < 1e-6 {
                safe = true;
            }
            let r_aff: Vec<f64> = (0..mi).map(|i| t[i] * lam[i]).collect();
            let (dz, dy, dt, dl) = if safe && mi > 0 {
                let r_c: Vec<f64> = r_aff.iter().map(|v| v - 0.2 * mu).collect();
                direction(self, &r_c)
            } else if mi > 0 {
                let (_, _, dt_a, dl_a) = direction(self, &r_aff);
                let a_aff = max_step(&dt_a, &dl_a);
                let mu_aff = (0..mi)
                    .map(|i| (t[i] + a_aff * dt_a[i]) * (lam[i] + a_aff * dl_a[i]))
                    .sum::<f64>()
                    / mi as f64;
                let sigma = (mu_aff / mu).clamp(0.0, 1.0).powi(3);
                let r_c: Vec<f64> = (0..mi)
                    .map(|i| t[i] * lam[i] + dt_a[i] * dl_a[i] - sigma * mu)
                    .collect();
                direction(self, &r_c)
            } else {
                direction(self, &r_aff)
            };
            let alpha = if mi > 0 {
                (0.99 * max_step(&dt, &dl)).min(1.0)
            } else {
                1.0
            };
            for i in 0..n {
                z[i] += alpha * dz[i];
            }
            for i in 0..me {
                y[i] += alpha * dy[i];
            }
            for i in 0..mi {
                t[i] = (t[i] + alpha * dt[i]).max(1e-300);
                lam[i] = (lam[i] + alpha * dl[i]).max(1e-300);
            }
        }
        best.finish(max_iterations)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn qp(h: Vec<Vec<f64>>, f: Vec<f64>) -> QpProblem {
        let n = f.len();
        QpProblem {
            hessian: SparseMatrix::from_dense(&h, n),
            linear: f,
            constant: 0.0,
            eq_matrix: SparseMatrix::new(n),
            eq_rhs: Vec::new(),
            ineq_matrix: SparseMatrix::new(n),
            ineq_rhs: Vec::new(),
        }
    }

    #[test]
    fn scalar_lower_bound() {
        // min z² s.t. z >= 3  (H = 2)
        let mut p = qp(vec![vec![2.0]], vec![0.0]);
        p.ineq_matrix.push_row(vec![(0, -1.0)]);
        p.ineq_rhs.push(-3.0);
        let s = solve_qp(&p).unwrap();
        assert!(s.feasible);
        assert_abs_diff_eq!(s.z[0], 3.0, epsilon = 1e-7);
        assert_abs_diff_eq!(s.objective, 9.0, epsilon = 1e-6);
        assert!(s.residuals.max() <= 1e-7, "{:?}", s.residuals);
    }

    #[test]
    fn projection_onto_line() {
        let mut p = qp(vec![vec![2.0, 0.0], vec![0.0, 2.0]], vec![0.0, 0.0]);
        p.eq_matrix.push_row(vec![(0, 1.0), (1, 1.0)]);
        p.eq_rhs.push(2.0);
        let s = solve_qp(&p).unwrap();
        assert_abs_diff_eq!(s.z[0], 1.0, epsilon = 1e-8);
        assert_abs_diff_eq!(s.z[1], 1.0, epsilon = 1e-8);
        assert_abs_diff_eq!(s.objective, 2.0, epsilon = 1e-8);
        assert!(s.residuals.max() <= 1e-7);
    }

    #[test]
    fn contradictory_bounds_are_infeasible() {
        let mut p = qp(vec![vec![2.0]], vec![0.0]);
        p.ineq_matrix.push_row(vec![(0, 1.0)]);
        p.ineq_rhs.push(0.0);
        p.ineq_matrix.push_row(vec![(0, -1.0)]);
        p.ineq_rhs.push(-1.0);
        let s = solve_qp(&p).unwrap();
        assert!(!s.feasible);
        assert_eq!(s.objective, f64::INFINITY);
    }

    #[test]
    fn rejects_non_psd_and_bad_dims() {
        let p = qp(vec![vec![1.0, 2.0], vec![2.0, 1.0]], vec![0.0, 0.0]);
        assert_eq!(solve_qp(&p), Err(QpError::NotPsd));
        let mut p = qp(vec![vec![1.0]], vec![0.0]);
        p.eq_rhs.push(1.0);
        assert!(matches!(solve_qp(&p), Err(QpError::Dimension(_))));
        let p = qp(vec![vec![1.0, 1.0], vec![0.0, 1.0]], vec![0.0, 0.0]);
        assert_eq!(solve_qp(&p), Err(QpError::NotSymmetric));
    }

    #[test]
    fn soft_constraint_slack_is_eliminated() {
        // min (z-2)² + 1e6 s² s.t. z - s <= 1, s >= 0: z ≈ 1 + 1/(1e6+1).
        let mut p = qp(vec![vec![2.0, 0.0], vec![0.0, 2e6]], vec![-4.0, 0.0]);
        p.constant = 4.0;
        p.ineq_matrix.push_row(vec![(0, 1.0), (1, -1.0)]);
        p.ineq_rhs.push(1.0);
        p.ineq_matrix.push_row(vec![(1, -1.0)]);
        p.ineq_rhs.push(0.0);
        let s = solve_qp(&p).unwrap();
        let expect_s = 1.0 / (1e6 + 1.0);
        assert_abs_diff_eq!(s.z[1], expect_s, epsilon = 1e-8);
        assert_abs_diff_eq!(s.z[0], 1.0 + expect_s, epsilon = 1e-8);
    }

    #[test]
    fn inconsistent_equalities_are_infeasible() {
        let mut p = qp(vec![vec![1.0, 0.0], vec![0.0, 1.0]], vec![0.0, 0.0]);
        p.eq_matrix.push_row(vec![(0, 1.0), (1, 1.0)]);
        p.eq_rhs.push(1.0);
        p.eq_matrix.push_row(vec![(0, 1.0), (1, 1.0)]);
        p.eq_rhs.push(2.0);
        let s = solve_qp(&p).unwrap();
        assert!(!s.feasible);
    }

    #[test]
    fn substitution_preserves_objective() {
        let h = vec![
            vec![2.0, 1.0, 0.0],
            vec![1.0, 3.0, 0.5],
            vec![0.0, 0.5, 1.0],
        ];
        let mut p = qp(h, vec![1.0, -1.0, 0.5]);
        p.constant = 0.25;
        p.ineq_matrix.push_row(vec![(0, 1.0), (2, 1.0)]);
        p.ineq_rhs.push(3.0);
        let fixed = [None, Some(0.7), None];
        let (r, map) = p.substitute(&fixed);
        assert_eq!(map, vec![0, 2]);
        let zr = [0.3, -0.4];
        let full = [0.3, 0.7, -0.4];
        assert_abs_diff_eq!(r.objective(&zr), p.objective(&full), epsilon = 1e-12);
        assert_abs_diff_eq!(r.ineq_rhs[0], 3.0, epsilon = 1e-12);
    }
}
