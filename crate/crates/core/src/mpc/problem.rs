//! Mixed-integer MPC transcription on the double integrator.
//!
//! Variable layout: states `x_0..x_N` (4 each: x, y, ẋ, ẏ), inputs
//! `u_0..u_{N-1}` (2 each), then one binary per (step 1..N, cell), then
//! slacks when softened.

use std::ops::Range;

use serde::{Deserialize, Serialize};

use super::{FlatState, MpcConfig, MpcError, TerminalSpec};
use crate::geometry::{ConvexPartition, Point2};
use crate::miqp::{MIQProblem, QpProblem, SparseMatrix};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Layout {
    pub horizon: usize,
    pub cells: usize,
    /// First slack column; equals the variable count when unsoftened.
    pub slack_start: usize,
    /// Inequality rows on the inputs (never softened).
    pub input_rows: Range<usize>,
    pub velocity_rows: Range<usize>,
    pub free_space_rows: Range<usize>,
    pub terminal_rows: Range<usize>,
    /// Softened row index per slack, in column order.
    pub slack_rows: Vec<usize>,
}

impl Layout {
    pub fn state(&self, k: usize) -> usize {
        4 * k
    }

    pub fn input(&self, k: usize) -> usize {
        4 * (self.horizon + 1) + 2 * k
    }

    /// Binary selecting `cell` at step `k` (1-based step).
    pub fn binary(&self, k: usize, cell: usize) -> usize {
        4 * (self.horizon + 1) + 2 * self.horizon + (k - 1) * self.cells + cell
    }

    pub fn num_binaries(&self) -> usize {
        self.horizon * self.cells
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MpcProblem {
    pub miqp: MIQProblem,
    pub layout: Layout,
    pub x0: FlatState,
    pub terminal: TerminalSpec,
}

/// Row-by-row builder for a QP in `a · z ≤ b` / `a · z = b` form.
struct Rows {
    n: usize,
    matrix: SparseMatrix,
    rhs: Vec<f64>,
}

impl Rows {
    fn new(n: usize) -> Self {
        Self {
            n,
            matrix: SparseMatrix::new(n),
            rhs: Vec::new(),
        }
    }

    fn push(&mut self, entries: Vec<(usize, f64)>, rhs: f64) {
        debug_assert!(entries.iter().all(|e| e.0 < self.n));
        self.matrix.push_row(entries);
        self.rhs.push(rhs);
    }

    fn len(&self) -> usize {
        self.rhs.len()
    }
}

/// Builds the hard-constrained problem; see [`soften`].
pub fn build_problem(
    x0: FlatState,
    terminal: &TerminalSpec,
    partition: &ConvexPartition,
    config: &MpcConfig,
) -> Result<MpcProblem, MpcError> {
    config.validate()?;
    if partition.is_empty() {
        return Err(MpcError::EmptyPartition);
    }
    let n_steps = config.horizon;
    let cells = partition.len();
    let n = 4 * (n_steps + 1) + 2 * n_steps + n_steps * cells;
    let mut layout = Layout {
        horizon: n_steps,
        cells,
        slack_start: n,
        input_rows: 0..0,
        velocity_rows: 0..0,
        free_space_rows: 0..0,
        terminal_rows: 0..0,
        slack_rows: Vec::new(),
    };
    let dt = config.dt;
    let r = terminal.reference;
    let reference = [r.x, r.y, 0.0, 0.0];

    let mut hess = vec![0.0; n];
    let mut linear = vec![0.0; n];
    let mut constant = 0.0;
    for k in 0..=n_steps {
        let w = if k == n_steps {
            &config.q_terminal
        } else {
            &config.q
        };
        for i in 0..4 {
            let c = layout.state(k) + i;
            hess[c] += 2.0 * w[i];
            linear[c] -= 2.0 * w[i] * reference[i];
            constant += w[i] * reference[i] * reference[i];
        }
    }
    for k in 0..n_steps {
        for j in 0..2 {
            hess[layout.input(k) + j] += 2.0 * config.r[j];
        }
    }

    let mut eq = Rows::new(n);
    let s0 = layout.state(0);
    for (i, v) in [x0.x, x0.y, x0.vx, x0.vy].into_iter().enumerate() {
        eq.push(vec![(s0 + i, 1.0)], v);
    }
    let half = 0.5 * dt * dt;
    for k in 0..n_steps {
        let (a, b, u) = (layout.state(k), layout.state(k + 1), layout.input(k));
        for axis in 0..2 {
            eq.push(
                vec![
                    (b + axis, 1.0),
                    (a + axis, -1.0),
                    (a + 2 + axis, -dt),
                    (u + axis, -half),
                ],
                0.0,
            );
            eq.push(
                vec![(b + 2 + axis, 1.0), (a + 2 + axis, -1.0), (u + axis, -dt)],
                0.0,
            );
        }
    }
    let sn = layout.state(n_steps);
    eq.push(vec![(sn + 2, 1.0)], 0.0);
    eq.push(vec![(sn + 3, 1.0)], 0.0);
    for k in 1..=n_steps {
        eq.push(
            (0..cells).map(|c| (layout.binary(k, c), 1.0)).collect(),
            1.0,
        );
    }

    let signs = [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)];
    let mut ineq = Rows::new(n);
    let input_limit = config.v_min * config.omega_max;
    for k in 0..n_steps {
        let u = layout.input(k);
        for &(sx, sy) in &signs {
            ineq.push(vec![(u, sx), (u + 1, sy)], input_limit);
        }
    }
    layout.input_rows = 0..ineq.len();

    // Velocity rows skip x_0, which is measured.
    let start = ineq.len();
    for k in 1..=n_steps {
        let s = layout.state(k);
        for &(sx, sy) in &signs {
            ineq.push(vec![(s + 2, sx), (s + 3, sy)], config.v_max);
        }
    }
    layout.velocity_rows = start..ineq.len();

    let start = ineq.len();
    let box_vertices = partition.bounding_box.vertices()?;
    let cell_rows: Vec<Vec<(Point2, f64, f64)>> = partition
        .cells
        .iter()
        .map(|cell| {
            let cell = cell.normalized()?;
            Ok(cell
                .halfspaces()
                .map(|(a, b)| {
                    let reach = box_vertices
                        .iter()
                        .map(|v| a.dot(*v))
                        .fold(f64::NEG_INFINITY, f64::max);
                    (a, b, (reach - b).max(0.0))
                })
                .collect())
        })
        .collect::<Result<_, MpcError>>()?;
    for k in 1..=n_steps {
        let s = layout.state(k);
        for (c, rows) in cell_rows.iter().enumerate() {
            let d = layout.binary(k, c);
            for &(a, b, big_m) in rows {
                ineq.push(vec![(s, a.x), (s + 1, a.y), (d, big_m)], b + big_m);
            }
        }
    }
    layout.free_space_rows = start..ineq.len();

    let start = ineq.len();
    let target = terminal.deviation.translated(r).to_hpolytope();
    for (a, b) in target.halfspaces() {
        ineq.push(vec![(sn, a.x), (sn + 1, a.y)], b);
    }
    layout.terminal_rows = start..ineq.len();

    let binaries = (0..layout.num_binaries())
        .map(|i| layout.binary(1 + i / cells, i % cells))
        .collect();
    Ok(MpcProblem {
        miqp: MIQProblem {
            qp: QpProblem {
                hessian: SparseMatrix::diagonal(&hess),
                linear,
                constant,
                eq_matrix: eq.matrix,
                eq_rhs: eq.rhs,
                ineq_matrix: ineq.matrix,
                ineq_rhs: ineq.rhs,
            },
            binaries,
        },
        layout,
        x0,
        terminal: terminal.clone(),
    })
}

/// Adds a slack `s_i ≥ 0` with cost `weight · s_i²` to every inequality row
/// except the input rows. Equality rows stay hard.
pub fn soften(problem: &MpcProblem, weight: f64) -> MpcProblem {
    let mut out = problem.clone();
    let qp = &mut out.miqp.qp;
    let rows: Vec<usize> = (0..qp.ineq_matrix.nrows())
        .filter(|r| !problem.layout.input_rows.contains(r))
        .collect();
    let n0 = qp.num_vars();
    let n = n0 + rows.len();
    let mut hess: Vec<Vec<(usize, f64)>> = qp.hessian.rows().map(|r| r.to_vec()).collect();
    hess.extend((n0..n).map(|c| vec![(c, 2.0 * weight)]));
    let mut h = SparseMatrix::new(n);
    for r in hess {
        h.push_row(r);
    }
    qp.hessian = h;
    qp.linear.resize(n, 0.0);
    qp.eq_matrix.resize_cols(n);
    qp.ineq_matrix.resize_cols(n);
    for (k, &r) in rows.iter().enumerate() {
        qp.ineq_matrix.add_entry(r, n0 + k, -1.0);
    }
    for k in 0..rows.len() {
        qp.ineq_matrix.push_row(vec![(n0 + k, -1.0)]);
        qp.ineq_rhs.push(0.0);
    }
    out.layout.slack_rows.extend(rows);
    out
}
