//! Linear constraints on a joint distribution over `S × S'` and the
//! feasibility test that decides whether two bodies of evidence conflict.
//!
//! Marginals fix the row and column sums, dead pairs of the joint
//! compatibility force cells to zero, and supplied conditionals
//! `P(s'|s)` fix cells to `P(s)·P(s'|s)`. Fixed cells are subtracted from
//! the marginals, which leaves a transportation problem on the free cells.
//! It is feasible iff a max flow from rows to columns ships all residual
//! mass; otherwise the min cut yields a set of rows whose mass exceeds
//! everything they can reach.

use std::collections::VecDeque;
use std::fmt;

use crate::bpa::MASS_TOLERANCE;
use crate::error::{Error, Result};
use crate::evidence::{EvidenceBody, JointCompatibility};
use crate::frame::Frame;

/// Default feasibility tolerance on shipped mass.
pub const FEASIBILITY_TOLERANCE: f64 = 1e-9;

// Residual capacities at or below this are treated as exhausted.
const FLOW_EPS: f64 = 1e-14;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Cell {
    Free,
    Forbidden,
    Fixed(f64),
}

/// A supplied conditional probability `P(then | given)`, by element index.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Conditional {
    pub given: usize,
    pub then: usize,
    pub prob: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConstraintSystem {
    left: Frame,
    right: Frame,
    rows: Vec<f64>,
    cols: Vec<f64>,
    cells: Vec<Cell>,
}

impl ConstraintSystem {
    /// Validates marginals and cell constraints. A cell fixed to 0 becomes forbidden.
    pub fn new(
        left: &Frame,
        right: &Frame,
        rows: Vec<f64>,
        cols: Vec<f64>,
        forbidden: &[(usize, usize)],
        fixed: &[(usize, usize, f64)],
    ) -> Result<Self> {
        let (n, m) = (left.len(), right.len());
        if rows.len() != n || cols.len() != m {
            return Err(Error::DimensionMismatch(format!(
                "marginals of length {}×{} for frames of size {n}×{m}",
                rows.len(),
                cols.len()
            )));
        }
        for (name, v) in [("row", &rows), ("column", &cols)] {
            if v.iter().any(|p| !p.is_finite() || *p < 0.0) {
                return Err(Error::InvalidProbability(format!(
                    "negative {name} marginal"
                )));
            }
            let total: f64 = v.iter().sum();
            if (total - 1.0).abs() > MASS_TOLERANCE {
                return Err(Error::InvalidProbability(format!(
                    "{name} marginals sum to {total}"
                )));
            }
        }
        let mut cells = vec![Cell::Free; n * m];
        let check = |i: usize, j: usize| {
            if i >= n || j >= m {
                Err(Error::DimensionMismatch(format!(
                    "cell ({i}, {j}) outside {n}×{m}"
                )))
            } else {
                Ok(i * m + j)
            }
        };
        for &(i, j) in forbidden {
            cells[check(i, j)?] = Cell::Forbidden;
        }
        for &(i, j, v) in fixed {
            let k = check(i, j)?;
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InconsistentConditional(format!(
                    "cell ({}, {}) fixed to {v}",
                    left.label(i),
                    right.label(j)
                )));
            }
            match cells[k] {
                Cell::Forbidden if v > 0.0 => {
                    return Err(Error::InconsistentConditional(format!(
                        "cell ({}, {}) is forbidden but fixed to {v}",
                        left.label(i),
                        right.label(j)
                    )))
                }
                Cell::Fixed(_) => {
                    return Err(Error::InconsistentConditional(format!(
                        "cell ({}, {}) fixed twice",
                        left.label(i),
                        right.label(j)
                    )))
                }
                _ => {}
            }
            let bound = rows[i].min(cols[j]);
            if v > bound + MASS_TOLERANCE {
                return Err(Error::InconsistentConditional(format!(
                    "cell ({}, {}) fixed to {v} exceeds its marginal bound {bound}",
                    left.label(i),
                    right.label(j)
                )));
            }
            cells[k] = if v == 0.0 {
                Cell::Forbidden
            } else {
                Cell::Fixed(v)
            };
        }
        let cs = ConstraintSystem {
            left: left.clone(),
            right: right.clone(),
            rows,
            cols,
            cells,
        };
        for i in 0..n {
            let fixed: f64 = (0..m).map(|j| cs.fixed_value(i, j)).sum();
            if fixed > cs.rows[i] + MASS_TOLERANCE {
                return Err(Error::InconsistentConditional(format!(
                    "fixed cells in row {} total {fixed}, above its marginal {}",
                    left.label(i),
                    cs.rows[i]
                )));
            }
        }
        for j in 0..m {
            let fixed: f64 = (0..n).map(|i| cs.fixed_value(i, j)).sum();
            if fixed > cs.cols[j] + MASS_TOLERANCE {
                return Err(Error::InconsistentConditional(format!(
                    "fixed cells in column {} total {fixed}, above its marginal {}",
                    right.label(j),
                    cs.cols[j]
                )));
            }
        }
        Ok(cs)
    }

    /// Same as [`new`](Self::new) with frames named `r1..` and `c1..`.
    pub fn unlabeled(
        rows: Vec<f64>,
        cols: Vec<f64>,
        forbidden: &[(usize, usize)],
        fixed: &[(usize, usize, f64)],
    ) -> Result<Self> {
        let left = Frame::numbered("r", rows.len())?;
        let right = Frame::numbered("c", cols.len())?;
        ConstraintSystem::new(&left, &right, rows, cols, forbidden, fixed)
    }

    pub fn left(&self) -> &Frame {
        &self.left
    }

    pub fn right(&self) -> &Frame {
        &self.right
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_cols(&self) -> usize {
        self.cols.len()
    }

    pub fn rows(&self) -> &[f64] {
        &self.rows
    }

    pub fn cols(&self) -> &[f64] {
        &self.cols
    }

    pub fn cell(&self, i: usize, j: usize) -> Cell {
        self.cells[i * self.cols.len() + j]
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn forbidden(&self) -> Vec<(usize, usize)> {
        self.indices()
            .filter(|&(i, j)| self.cell(i, j) == Cell::Forbidden)
            .collect()
    }

    pub fn fixed(&self) -> Vec<(usize, usize, f64)> {
        self.indices()
            .filter_map(|(i, j)| match self.cell(i, j) {
                Cell::Fixed(v) => Some((i, j, v)),
                _ => None,
            })
            .collect()
    }

    pub fn free_cells(&self) -> usize {
        self.cells.iter().filter(|c| **c == Cell::Free).count()
    }

    fn indices(&self) -> impl Iterator<Item = (usize, usize)> {
        let m = self.cols.len();
        (0..self.rows.len()).flat_map(move |i| (0..m).map(move |j| (i, j)))
    }

    fn fixed_value(&self, i: usize, j: usize) -> f64 {
        match self.cell(i, j) {
            Cell::Fixed(v) => v,
            _ => 0.0,
        }
    }

    /// Row marginals minus fixed mass, clamped at zero.
    pub fn residual_rows(&self) -> Vec<f64> {
        (0..self.n_rows())
            .map(|i| {
                let fixed: f64 = (0..self.n_cols()).map(|j| self.fixed_value(i, j)).sum();
                (self.rows[i] - fixed).max(0.0)
            })
            .collect()
    }

    /// Column marginals minus fixed mass, clamped at zero.
    pub fn residual_cols(&self) -> Vec<f64> {
        (0..self.n_cols())
            .map(|j| {
                let fixed: f64 = (0..self.n_rows()).map(|i| self.fixed_value(i, j)).sum();
                (self.cols[j] - fixed).max(0.0)
            })
            .collect()
    }

    /// Swaps the roles of `S` and `S'`.
    pub fn transpose(&self) -> ConstraintSystem {
        let (n, m) = (self.n_rows(), self.n_cols());
        ConstraintSystem {
            left: self.right.clone(),
            right: self.left.clone(),
            rows: self.cols.clone(),
            cols: self.rows.clone(),
            cells: (0..m)
                .flat_map(|j| (0..n).map(move |i| (i, j)))
                .map(|(i, j)| self.cells[i * m + j])
                .collect(),
        }
    }

    /// Largest deviation of `cells` (row-major) from any constraint.
    pub fn max_violation(&self, cells: &[f64]) -> f64 {
        let (n, m) = (self.n_rows(), self.n_cols());
        let mut worst: f64 = 0.0;
        for i in 0..n {
            let s: f64 = cells[i * m..(i + 1) * m].iter().sum();
            worst = worst.max((s - self.rows[i]).abs());
        }
        for j in 0..m {
            let s: f64 = (0..n).map(|i| cells[i * m + j]).sum();
            worst = worst.max((s - self.cols[j]).abs());
        }
        for (k, c) in self.cells.iter().enumerate() {
            let dev = match c {
                Cell::Forbidden => cells[k].abs(),
                Cell::Fixed(v) => (cells[k] - v).abs(),
                Cell::Free => (-cells[k]).max(0.0),
            };
            worst = worst.max(dev);
        }
        worst
    }
}

/// Builds the constraint system for combining two evidence bodies.
///
/// Conditionals are `P(s'|s)` by index into the left and right frames. A row
/// whose conditionals already sum to 1 has its remaining cells forced to 0.
pub fn assemble(
    left: &EvidenceBody,
    right: &EvidenceBody,
    joint: &JointCompatibility,
    conditionals: &[Conditional],
) -> Result<ConstraintSystem> {
    if joint.left() != left.frame()
        || joint.right() != right.frame()
        || left.target() != right.target()
    {
        return Err(Error::FrameMismatch);
    }
    let (n, m) = (left.len(), right.len());
    let (lf, rf) = (left.frame(), right.frame());
    let mut given: Vec<Vec<Option<f64>>> = vec![vec![None; m]; n];
    for c in conditionals {
        if c.given >= n {
            return Err(Error::UnknownElement(format!("given index {}", c.given)));
        }
        if c.then >= m {
            return Err(Error::UnknownElement(format!("then index {}", c.then)));
        }
        let name = format!("P({} | {})", rf.label(c.then), lf.label(c.given));
        if !(0.0..=1.0).contains(&c.prob) {
            return Err(Error::InconsistentConditional(format!(
                "{name} = {} outside [0, 1]",
                c.prob
            )));
        }
        if given[c.given][c.then].replace(c.prob).is_some() {
            return Err(Error::InconsistentConditional(format!(
                "{name} given twice"
            )));
        }
        if c.prob > 0.0 && joint.is_dead(c.given, c.then) {
            return Err(Error::InconsistentConditional(format!(
                "{name} = {} but the pair is compatible with no target element",
                c.prob
            )));
        }
    }

    let mut forbidden = joint.dead_pairs();
    let mut fixed = Vec::new();
    for (i, row) in given.iter().enumerate() {
        let total: f64 = row.iter().flatten().sum();
        if total > 1.0 + MASS_TOLERANCE {
            return Err(Error::InconsistentConditional(format!(
                "conditionals given {} sum to {total}",
                lf.label(i)
            )));
        }
        let complete = total >= 1.0 - MASS_TOLERANCE;
        let p = left.prob().get(i);
        for (j, c) in row.iter().enumerate() {
            match c {
                Some(q) => {
                    let v = p * q;
                    let col = right.prob().get(j);
                    if v > col + MASS_TOLERANCE {
                        return Err(Error::InconsistentConditional(format!(
                            "P({}) · P({} | {}) = {p} · {q} = {v} exceeds P({}) = {col}",
                            lf.label(i),
                            rf.label(j),
                            lf.label(i),
                            rf.label(j)
                        )));
                    }
                    if v > 0.0 {
                        fixed.push((i, j, v));
                    } else if !joint.is_dead(i, j) {
                        forbidden.push((i, j));
                    }
                }
                None if complete && !joint.is_dead(i, j) => forbidden.push((i, j)),
                None => {}
            }
        }
    }
    ConstraintSystem::new(
        lf,
        rf,
        left.prob().probs().to_vec(),
        right.prob().probs().to_vec(),
        &forbidden,
        &fixed,
    )
}

/// A violated aggregate inequality: the residual mass of `rows` exceeds the
/// residual mass of every column they may send mass to.
#[derive(Clone, Debug, PartialEq)]
pub struct Certificate {
    pub rows: Vec<usize>,
    pub row_labels: Vec<String>,
    pub reachable_cols: Vec<usize>,
    pub col_labels: Vec<String>,
    pub row_mass: f64,
    pub reachable_mass: f64,
}

impl Certificate {
    pub fn shortfall(&self) -> f64 {
        self.row_mass - self.reachable_mass
    }

    /// Recomputes the inequality from `cs` alone and checks that it is
    /// violated by more than `tol`.
    pub fn verify(&self, cs: &ConstraintSystem, tol: f64) -> bool {
        let rr = cs.residual_rows();
        let rc = cs.residual_cols();
        let row_mass: f64 = self.rows.iter().map(|&i| rr[i]).sum();
        let reach: f64 = (0..cs.n_cols())
            .filter(|&j| self.rows.iter().any(|&i| cs.cell(i, j) == Cell::Free))
            .map(|j| rc[j])
            .sum();
        !self.rows.is_empty() && row_mass - reach > tol
    }
}

impl fmt::Display for Certificate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.col_labels.is_empty() {
            return write!(
                f,
                "elements {{{}}} carry mass {:.6} but are compatible with no element of the other body",
                self.row_labels.join(","),
                self.row_mass
            );
        }
        write!(
            f,
            "elements {{{}}} carry mass {:.6} but the compatible elements {{{}}} of the other body carry only {:.6}",
            self.row_labels.join(","),
            self.row_mass,
            self.col_labels.join(","),
            self.reachable_mass
        )
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Feasibility {
    /// A joint satisfying every constraint, row-major.
    Feasible {
        witness: Vec<f64>,
    },
    Conflict(Certificate),
}

impl Feasibility {
    pub fn is_feasible(&self) -> bool {
        matches!(self, Feasibility::Feasible { .. })
    }
}

/// Decides whether any joint distribution satisfies `cs`.
pub fn check_feasible(cs: &ConstraintSystem, tol: f64) -> Feasibility {
    let net = TransportFlow::solve(cs);
    if net.shortfall() <= tol {
        let mut witness = net.flow.clone();
        for (k, c) in cs.cells.iter().enumerate() {
            if let Cell::Fixed(v) = c {
                witness[k] = *v;
            }
        }
        return Feasibility::Feasible { witness };
    }
    let rows = net.source_side_rows();
    let m = cs.n_cols();
    let reachable_cols: Vec<usize> = (0..m)
        .filter(|&j| rows.iter().any(|&i| net.allowed[i * m + j]))
        .collect();
    Feasibility::Conflict(Certificate {
        row_labels: rows.iter().map(|&i| cs.left.label(i).to_string()).collect(),
        col_labels: reachable_cols
            .iter()
            .map(|&j| cs.right.label(j).to_string())
            .collect(),
        row_mass: rows.iter().map(|&i| net.supply[i]).sum::<f64>() + 0.0,
        reachable_mass: reachable_cols.iter().map(|&j| net.demand[j]).sum::<f64>() + 0.0,
        rows,
        reachable_cols,
    })
}

/// Max flow from residual row supplies to residual column demands over the
/// free cells.
pub(crate) struct TransportFlow {
    n: usize,
    m: usize,
    supply: Vec<f64>,
    demand: Vec<f64>,
    allowed: Vec<bool>,
    /// Shipped mass per cell, row-major.
    flow: Vec<f64>,
    // Dense residual capacities over source, rows, columns, sink.
    residual: Vec<f64>,
    shipped: f64,
}

impl TransportFlow {
    pub(crate) fn solve(cs: &ConstraintSystem) -> Self {
        let (n, m) = (cs.n_rows(), cs.n_cols());
        let supply = cs.residual_rows();
        let demand = cs.residual_cols();
        let allowed: Vec<bool> = cs.cells.iter().map(|c| *c == Cell::Free).collect();
        let v = n + m + 2;
        let (src, sink) = (0, n + m + 1);
        let mut residual = vec![0.0; v * v];
        for i in 0..n {
            residual[src * v + 1 + i] = supply[i];
            for j in 0..m {
                if allowed[i * m + j] {
                    residual[(1 + i) * v + 1 + n + j] = f64::INFINITY;
                }
            }
        }
        for j in 0..m {
            residual[(1 + n + j) * v + sink] = demand[j];
        }

        let mut shipped = 0.0;
        let mut parent = vec![usize::MAX; v];
        loop {
            // Edmonds-Karp: shortest augmenting path by BFS.
            parent.fill(usize::MAX);
            parent[src] = src;
            let mut queue = VecDeque::from([src]);
            while let Some(u) = queue.pop_front() {
                if u == sink {
                    break;
                }
                for w in 0..v {
                    if parent[w] == usize::MAX && residual[u * v + w] > FLOW_EPS {
                        parent[w] = u;
                        queue.push_back(w);
                    }
                }
            }
            if parent[sink] == usize::MAX {
                break;
            }
            let mut push = f64::INFINITY;
            let mut w = sink;
            while w != src {
                let u = parent[w];
                push = push.min(residual[u * v + w]);
                w = u;
            }
            let mut w = sink;
            while w != src {
                let u = parent[w];
                residual[u * v + w] -= push;
                residual[w * v + u] += push;
                w = u;
            }
            shipped += push;
        }

        let mut flow = vec![0.0; n * m];
        for i in 0..n {
            for j in 0..m {
                if allowed[i * m + j] {
                    // Reverse capacity on a cell edge equals the flow through it.
                    flow[i * m + j] = residual[(1 + n + j) * v + 1 + i];
                }
            }
        }
        TransportFlow {
            n,
            m,
            supply,
            demand,
            allowed,
            flow,
            residual,
            shipped,
        }
    }

    pub(crate) fn shortfall(&self) -> f64 {
        self.supply.iter().sum::<f64>() - self.shipped
    }

    /// Rows on the source side of a minimum cut.
    fn source_side_rows(&self) -> Vec<usize> {
        let v = self.n + self.m + 2;
        let mut seen = vec![false; v];
        seen[0] = true;
        let mut queue = VecDeque::from([0]);
        while let Some(u) = queue.pop_front() {
            for w in 0..v {
                if !seen[w] && self.residual[u * v + w] > FLOW_EPS {
                    seen[w] = true;
                    queue.push_back(w);
                }
            }
        }
        (0..self.n).filter(|&i| seen[1 + i]).collect()
    }

    /// Free cells that are positive in some feasible joint.
    ///
    /// With every supply shipped, a cell can be raised from zero iff its
    /// column can route back to its row through cells that may give up mass:
    /// a free cell `(a, b)` can always grow (edge `a -> b`) and can shrink
    /// only if it carries flow (edge `b -> a`).
    pub(crate) fn supportable(&self, eps: f64) -> Vec<bool> {
        let (n, m) = (self.n, self.m);
        let mut out = vec![false; n * m];
        for i in 0..n {
            for j in 0..m {
                let k = i * m + j;
                if !self.allowed[k] {
                    continue;
                }
                out[k] = self.flow[k] > eps || self.col_reaches_row(j, i, eps);
            }
        }
        out
    }

    fn col_reaches_row(&self, start_col: usize, target_row: usize, eps: f64) -> bool {
        let (n, m) = (self.n, self.m);
        // Nodes: rows 0..n, columns n..n+m.
        let mut seen = vec![false; n + m];
        seen[n + start_col] = true;
        let mut queue = VecDeque::from([n + start_col]);
        while let Some(u) = queue.pop_front() {
            if u < n {
                if u == target_row {
                    return true;
                }
                for j in 0..m {
                    if self.allowed[u * m + j] && !seen[n + j] {
                        seen[n + j] = true;
                        queue.push_back(n + j);
                    }
                }
            } else {
                let j = u - n;
                for i in 0..n {
                    if self.flow[i * m + j] > eps && !seen[i] {
                        seen[i] = true;
                        queue.push_back(i);
                    }
                }
            }
        }
        false
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bpa::Bpa;
    use crate::evidence::{abstract_evidence, default_joint_compatibility};

    fn pair_ab() -> (EvidenceBody, EvidenceBody, JointCompatibility) {
        let f = Frame::new(["t1", "t2", "t3"]).unwrap();
        let a =
            Bpa::from_labels(&f, [(vec!["t1", "t2"], 0.8), (vec!["t1", "t2", "t3"], 0.2)]).unwrap();
        let b = Bpa::from_labels(
            &f,
            [
                (vec!["t2", "t3"], 0.7),
                (vec!["t3"], 0.2),
                (vec!["t1", "t2", "t3"], 0.1),
            ],
        )
        .unwrap();
        let (l, r) = (abstract_evidence(&a), abstract_evidence(&b));
        let j = default_joint_compatibility(l.relation(), r.relation()).unwrap();
        (l, r, j)
    }

    #[test]
    fn assemble_pair_ab() {
        let (l, r, j) = pair_ab();
        let cs = assemble(&l, &r, &j, &[]).unwrap();
        assert_eq!(cs.rows(), &[0.8, 0.2]);
        assert_eq!(cs.cols(), &[0.7, 0.2, 0.1]);
        assert_eq!(cs.forbidden(), vec![(0, 1)]);
        assert!(cs.fixed().is_empty());
    }

    #[test]
    fn assemble_full_conditionals_fixes_every_live_cell() {
        let (l, r, j) = pair_ab();
        let conds = [
            Conditional {
                given: 0,
                then: 0,
                prob: 0.875,
            },
            Conditional {
                given: 0,
                then: 2,
                prob: 0.125,
            },
            Conditional {
                given: 1,
                then: 1,
                prob: 1.0,
            },
        ];
        let cs = assemble(&l, &r, &j, &conds).unwrap();
        assert_eq!(cs.free_cells(), 0);
        let want = [(0, 0, 0.7), (0, 2, 0.1), (1, 1, 0.2)];
        let got = cs.fixed();
        assert_eq!(got.len(), want.len());
        for ((i, j, v), (wi, wj, wv)) in got.into_iter().zip(want) {
            assert_eq!((i, j), (wi, wj));
            assert!((v - wv).abs() < 1e-15);
        }
    }

    #[test]
    fn assemble_rejects_conditional_above_column() {
        let (l, r, j) = pair_ab();
        let e = assemble(
            &l,
            &r,
            &j,
            &[Conditional {
                given: 0,
                then: 0,
                prob: 0.95,
            }],
        );
        assert!(matches!(e, Err(Error::InconsistentConditional(msg)) if msg.contains("0.76")));
    }

    #[test]
    fn assemble_rejects_bad_rows_and_dead_pairs() {
        let (l, r, j) = pair_ab();
        let over = [
            Conditional {
                given: 1,
                then: 0,
                prob: 0.6,
            },
            Conditional {
                given: 1,
                then: 2,
                prob: 0.6,
            },
        ];
        assert!(matches!(
            assemble(&l, &r, &j, &over),
            Err(Error::InconsistentConditional(_))
        ));
        let dead = [Conditional {
            given: 0,
            then: 1,
            prob: 0.1,
        }];
        assert!(matches!(
            assemble(&l, &r, &j, &dead),
            Err(Error::InconsistentConditional(_))
        ));
        let oob = [Conditional {
            given: 5,
            then: 1,
            prob: 0.1,
        }];
        assert!(matches!(
            assemble(&l, &r, &j, &oob),
            Err(Error::UnknownElement(_))
        ));
    }

    #[test]
    fn zero_conditional_becomes_forbidden() {
        let (l, r, j) = pair_ab();
        let cs = assemble(
            &l,
            &r,
            &j,
            &[Conditional {
                given: 1,
                then: 0,
                prob: 0.0,
            }],
        )
        .unwrap();
        assert_eq!(cs.forbidden(), vec![(0, 1), (1, 0)]);
    }

    #[test]
    fn pair_ab_is_feasible() {
        let (l, r, j) = pair_ab();
        let cs = assemble(&l, &r, &j, &[]).unwrap();
        match check_feasible(&cs, FEASIBILITY_TOLERANCE) {
            Feasibility::Feasible { witness } => assert!(cs.max_violation(&witness) <= 1e-9),
            other => panic!("expected feasible, got {other:?}"),
        }
    }

    #[test]
    fn disjoint_singletons_conflict() {
        let cs = ConstraintSystem::unlabeled(vec![1.0], vec![1.0], &[(0, 0)], &[]).unwrap();
        match check_feasible(&cs, FEASIBILITY_TOLERANCE) {
            Feasibility::Conflict(cert) => {
                assert_eq!(cert.rows, vec![0]);
                assert!(cert.reachable_cols.is_empty());
                assert_eq!(cert.row_mass, 1.0);
                assert!(cert.verify(&cs, FEASIBILITY_TOLERANCE));
            }
            other => panic!("expected conflict, got {other:?}"),
        }
    }

    #[test]
    fn unconstrained_is_feasible() {
        let cs =
            ConstraintSystem::unlabeled(vec![0.3, 0.7], vec![0.5, 0.25, 0.25], &[], &[]).unwrap();
        assert!(check_feasible(&cs, FEASIBILITY_TOLERANCE).is_feasible());
    }

    #[test]
    fn partial_conflict_certificate() {
        // r1 may only use c1 (mass 0.2) but holds 0.6.
        let cs =
            ConstraintSystem::unlabeled(vec![0.6, 0.4], vec![0.2, 0.8], &[(0, 1)], &[]).unwrap();
        let Feasibility::Conflict(cert) = check_feasible(&cs, FEASIBILITY_TOLERANCE) else {
            panic!("expected conflict");
        };
        assert_eq!(cert.rows, vec![0]);
        assert_eq!(cert.reachable_cols, vec![0]);
        assert!((cert.shortfall() - 0.4).abs() < 1e-12);
        assert!(cert.verify(&cs, FEASIBILITY_TOLERANCE));
        assert!(cert.to_string().contains("r1"));
    }

    #[test]
    fn new_rejects_inconsistent_fixed_cells() {
        let e =
            ConstraintSystem::unlabeled(vec![0.5, 0.5], vec![0.5, 0.5], &[(0, 0)], &[(0, 0, 0.1)]);
        assert!(matches!(e, Err(Error::InconsistentConditional(_))));
        let e = ConstraintSystem::unlabeled(
            vec![0.5, 0.5],
            vec![0.5, 0.5],
            &[],
            &[(0, 0, 0.4), (1, 0, 0.4)],
        );
        assert!(matches!(e, Err(Error::InconsistentConditional(_))));
        let e = ConstraintSystem::unlabeled(vec![0.5, 0.6], vec![0.5, 0.5], &[], &[]);
        assert!(matches!(e, Err(Error::InvalidProbability(_))));
    }

    #[test]
    fn support_detection_on_pair_ab() {
        let (l, r, j) = pair_ab();
        let cs = assemble(&l, &r, &j, &[]).unwrap();
        let net = TransportFlow::solve(&cs);
        let support = net.supportable(1e-12);
        assert_eq!(support, vec![true, false, true, false, true, false]);
    }

    #[test]
    fn support_detection_keeps_interior_cells() {
        let cs = ConstraintSystem::unlabeled(vec![0.5, 0.5], vec![0.5, 0.5], &[], &[]).unwrap();
        let support = TransportFlow::solve(&cs).supportable(1e-12);
        assert!(support.iter().all(|&s| s));
    }
}
