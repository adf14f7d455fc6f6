//! Best-first branch and bound over binary fixings.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BinaryHeap};

use super::qp::{solve_unchecked, QpSettings};
use super::{MIQProblem, MiqpError, SolveOptions, SolveOutcome, SolveStatus, TraceEntry};

/// Subproblem: the relaxation with some binaries fixed.
#[derive(Clone, Debug, PartialEq)]
pub struct BnbNode {
    pub fixings: BTreeMap<usize, bool>,
    /// Relaxation objective of the parent (`-∞` at the root).
    pub parent_bound: f64,
}

impl BnbNode {
    pub fn root() -> Self {
        Self {
            fixings: BTreeMap::new(),
            parent_bound: f64::NEG_INFINITY,
        }
    }
}

fn fractionality(v: f64) -> f64 {
    v.abs().min((v - 1.0).abs())
}

/// Splits `node` on the most fractional binary of `z` (ties to the lowest
/// index). `objective` is the node's relaxation value.
pub fn branch(
    node: &BnbNode,
    binaries: &[usize],
    z: &[f64],
    objective: f64,
    integrality: f64,
) -> Result<(BnbNode, BnbNode), MiqpError> {
    let mut best: Option<(usize, f64)> = None;
    let mut sorted: Vec<usize> = binaries.to_vec();
    sorted.sort_unstable();
    for &b in &sorted {
        if node.fixings.contains_key(&b) {
            continue;
        }
        let v = z[b];
        if fractionality(v) <= integrality {
            continue;
        }
        let score = (v - 0.5).abs();
        if best.map_or(true, |(_, s)| score < s) {
            best = Some((b, score));
        }
    }
    let (b, _) = best.ok_or(MiqpError::Integral)?;
    let bound = objective.max(node.parent_bound);
    let mut zero = node.clone();
    zero.fixings.insert(b, false);
    zero.parent_bound = bound;
    let mut one = node.clone();
    one.fixings.insert(b, true);
    one.parent_bound = bound;
    Ok((zero, one))
}

/// j⁻ = min(min over open parent bounds, j₊).
pub fn lower_bound<'a>(open: impl IntoIterator<Item = &'a BnbNode>, upper: f64) -> f64 {
    open.into_iter()
        .map(|n| n.parent_bound)
        .fold(upper, f64::min)
}

struct Open {
    bound: f64,
    seq: u64,
    node: BnbNode,
}

impl PartialEq for Open {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Open {}
impl PartialOrd for Open {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Open {
    // Max-heap: the smallest bound, then the earliest sequence, ranks highest.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .bound
            .total_cmp(&self.bound)
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

pub fn solve(problem: &MIQProblem, options: &SolveOptions) -> Result<SolveOutcome, MiqpError> {
    problem.validate()?;
    let relaxation = problem.relaxation();
    let settings = QpSettings::default();
    let tol = options.tolerances;
    let n = problem.num_vars();

    let mut open = BinaryHeap::new();
    let mut seq = 0u64;
    open.push(Open {
        bound: f64::NEG_INFINITY,
        seq,
        node: BnbNode::root(),
    });
    let mut upper = f64::INFINITY;
    let mut incumbent: Option<Vec<f64>> = None;
    let mut iterations = 0usize;
    let mut trace = Vec::new();
    let mut last_lower = f64::NEG_INFINITY;

    loop {
        // The heap minimum is the open-set minimum of parent bounds.
        let jl = open.peek().map_or(upper, |o| o.bound.min(upper));
        // Guard against round-off in the child bounds.
        let jl = jl.max(last_lower.min(upper));
        last_lower = jl;
        if options.record_trace {
            trace.push(TraceEntry {
                iteration: iterations,
                j_lower: jl,
                j_upper: upper,
                open: open.len(),
            });
        }
        let finish = |status, incumbent: Option<Vec<f64>>, trace| SolveOutcome {
            status,
            incumbent,
            upper_bound: upper,
            lower_bound: jl,
            iterations,
            trace,
        };
        if open.is_empty() && incumbent.is_none() {
            return Ok(finish(SolveStatus::InfeasibleCertified, None, trace));
        }
        if jl > options.j_max {
            return Ok(finish(SolveStatus::BoundExceeded, incumbent, trace));
        }
        let gap_ok =
            upper.is_finite() && upper - jl <= tol.absolute_gap.max(tol.relative_gap * upper.abs());
        if open.is_empty() || gap_ok {
            return Ok(finish(SolveStatus::Optimal, incumbent, trace));
        }
        if iterations >= options.iteration_limit {
            return Ok(finish(SolveStatus::IterationLimit, incumbent, trace));
        }

        let Open { node, .. } = open.pop().expect("open set is non-empty");
        if node.parent_bound >= upper {
            continue;
        }
        let fixed: Vec<Option<f64>> = {
            let mut f = vec![None; n];
            for (&b, &v) in &node.fixings {
                f[b] = Some(if v { 1.0 } else { 0.0 });
            }
            f
        };
        let (sub, map) = relaxation.substitute(&fixed);
        iterations += 1;
        let sol = solve_unchecked(&sub, &settings)?;
        if !sol.feasible || sol.objective >= upper {
            continue;
        }
        let mut z: Vec<f64> = fixed.iter().map(|v| v.unwrap_or(0.0)).collect();
        for (k, &i) in map.iter().enumerate() {
            z[i] = sol.z[k];
        }
        let integral = problem
            .binaries
            .iter()
            .all(|&b| fractionality(z[b]) <= tol.integrality);
        if integral {
            upper = sol.objective;
            incumbent = Some(z);
            continue;
        }
        let (zero, one) = branch(&node, &problem.binaries, &z, sol.objective, tol.integrality)?;
        for child in [zero, one] {
            seq += 1;
            open.push(Open {
                bound: child.parent_bound,
                seq,
                node: child,
            });
        }
    }
}
