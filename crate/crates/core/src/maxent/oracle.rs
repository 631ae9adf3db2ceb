//! Brute-force verification oracle for small instances.
//!
//! Shares nothing with the scaling solver: feasibility and structural zeros
//! come from enumerating every row subset (Gale–Hoffman inequalities), the
//! polytope is parameterized by the cells outside a spanning forest of the
//! support graph, and entropy is maximized by grid search followed by a
//! shrinking pattern search.

use crate::constraints::{Cell, ConstraintSystem};
use crate::error::{Error, Result};
use crate::par;

use super::{entropy_of, JointDistribution};

pub const ORACLE_MAX_FREE_CELLS: usize = 12;

const GRID_BUDGET: f64 = 20_000.0;
const TIGHT_TOL: f64 = 1e-12;
const STEP_FLOOR: f64 = 1e-13;
const NEGATIVE_TOL: f64 = 1e-12;

fn residuals(cs: &ConstraintSystem) -> (Vec<f64>, Vec<f64>) {
    let (n, m) = (cs.n_rows(), cs.n_cols());
    let mut rows = cs.rows().to_vec();
    let mut cols = cs.cols().to_vec();
    for i in 0..n {
        for j in 0..m {
            if let Cell::Fixed(v) = cs.cell(i, j) {
                rows[i] -= v;
                cols[j] -= v;
            }
        }
    }
    (
        rows.into_iter().map(|x| x.max(0.0)).collect(),
        cols.into_iter().map(|x| x.max(0.0)).collect(),
    )
}

fn neighbourhood_mass(allowed: &[bool], m: usize, subset: u64, cols: &[f64]) -> f64 {
    (0..m)
        .filter(|&j| {
            (0..64)
                .filter(|i| subset >> i & 1 == 1)
                .any(|i| allowed[i * m + j])
        })
        .map(|j| cols[j])
        .sum()
}

/// Exhaustive feasibility check: every row subset's residual mass must fit
/// into the residual mass of the columns it can reach.
pub fn gale_hoffman_feasible(cs: &ConstraintSystem, tol: f64) -> bool {
    let (n, m) = (cs.n_rows(), cs.n_cols());
    assert!(n <= 20, "exhaustive check over 2^{n} subsets");
    let (rows, cols) = residuals(cs);
    let allowed: Vec<bool> = cs.cells().iter().map(|c| *c == Cell::Free).collect();
    (1u64..1 << n).all(|subset| {
        let mass: f64 = (0..n)
            .filter(|i| subset >> i & 1 == 1)
            .map(|i| rows[i])
            .sum();
        mass <= neighbourhood_mass(&allowed, m, subset, &cols) + tol
    })
}

/// Grid-search approximation of the maximum-entropy joint.
pub fn oracle_maxent(cs: &ConstraintSystem, grid_step: f64) -> Result<JointDistribution> {
    oracle_maxent_by(cs, grid_step, entropy_of)
}

/// Like [`oracle_maxent`] but maximizes an arbitrary score of the row-major cells.
pub fn oracle_maxent_by<F>(
    cs: &ConstraintSystem,
    grid_step: f64,
    score: F,
) -> Result<JointDistribution>
where
    F: Fn(&[f64]) -> f64 + Sync + Send,
{
    let free = cs.free_cells();
    if free > ORACLE_MAX_FREE_CELLS {
        return Err(Error::TooLarge {
            free_cells: free,
            limit: ORACLE_MAX_FREE_CELLS,
        });
    }
    if !gale_hoffman_feasible(cs, 1e-9) {
        return Err(Error::NotFeasible);
    }
    let space = Polytope::new(cs);
    let d = space.params.len();
    if d == 0 {
        let cells = space.decode(&[]).ok_or(Error::NotFeasible)?;
        return JointDistribution::new(cs.left(), cs.right(), cells);
    }

    let (lo, hi) = space.bounds();
    let per_dim = GRID_BUDGET.powf(1.0 / d as f64).floor() as usize;
    let g = ((1.0 / grid_step).ceil() as usize).min(per_dim).max(2);
    let point = |mut idx: usize| -> Vec<f64> {
        (0..d)
            .map(|k| {
                let c = idx % g;
                idx /= g;
                lo[k] + (c as f64 + 0.5) / g as f64 * (hi[k] - lo[k])
            })
            .collect()
    };
    let graded = par::map_range(g.pow(d as u32), |idx| {
        let x = point(idx);
        match space.decode(&x) {
            Some(cells) => (0.0, score(&cells)),
            None => (space.violation(&x), f64::NEG_INFINITY),
        }
    });
    let best_feasible = graded
        .iter()
        .enumerate()
        .filter(|(_, (v, _))| *v == 0.0)
        .fold(None::<(usize, f64)>, |acc, (idx, &(_, s))| match acc {
            Some((_, bs)) if bs >= s => acc,
            _ => Some((idx, s)),
        });
    let step: Vec<f64> = lo
        .iter()
        .zip(&hi)
        .map(|(l, h)| (h - l) / g as f64)
        .collect();

    let start = match best_feasible {
        Some((idx, _)) => point(idx),
        None => {
            // The feasible set slipped between grid points; walk to it.
            let (idx, _) =
                graded
                    .iter()
                    .enumerate()
                    .fold(
                        (0, f64::INFINITY),
                        |acc, (idx, &(v, _))| if v < acc.1 { (idx, v) } else { acc },
                    );
            let x = pattern_search(point(idx), &lo, &hi, step.clone(), |x| -space.violation(x));
            if space.decode(&x).is_none() {
                return Err(Error::NotFeasible);
            }
            x
        }
    };
    let best_x = pattern_search(start, &lo, &hi, step, |x| {
        space
            .decode(x)
            .map_or(f64::NEG_INFINITY, |cells| score(&cells))
    });
    let cells = space.decode(&best_x).ok_or(Error::NotFeasible)?;
    JointDistribution::new(cs.left(), cs.right(), cells)
}

/// Maximizes `f` over the box by polling [`directions`] and halving the
/// step whenever no poll improves.
fn pattern_search<F>(
    mut best_x: Vec<f64>,
    lo: &[f64],
    hi: &[f64],
    mut step: Vec<f64>,
    f: F,
) -> Vec<f64>
where
    F: Fn(&[f64]) -> f64,
{
    let d = best_x.len();
    let directions = directions(d);
    let mut best = f(&best_x);
    while step.iter().cloned().fold(0.0, f64::max) > STEP_FLOOR {
        let mut moved = false;
        for dir in &directions {
            let x: Vec<f64> = (0..d)
                .map(|k| best_x[k] + dir[k] as f64 * step[k])
                .collect();
            if (0..d).any(|k| x[k] < lo[k] || x[k] > hi[k]) {
                continue;
            }
            let s = f(&x);
            if s > best {
                best = s;
                best_x = x;
                moved = true;
            }
        }
        if !moved {
            for s in &mut step {
                *s *= 0.5;
            }
        }
    }
    best_x
}

/// Search directions: all of `{-1, 0, 1}^d` for small `d`, otherwise
/// coordinate and pairwise-diagonal moves.
fn directions(d: usize) -> Vec<Vec<i8>> {
    if d <= 6 {
        let total = 3usize.pow(d as u32);
        (0..total)
            .map(|mut idx| {
                (0..d)
                    .map(|_| {
                        let v = (idx % 3) as i8 - 1;
                        idx /= 3;
                        v
                    })
                    .collect::<Vec<i8>>()
            })
            .filter(|v| v.iter().any(|&x| x != 0))
            .collect()
    } else {
        let mut out = Vec::new();
        for a in 0..d {
            for sa in [-1, 1] {
                let mut v = vec![0; d];
                v[a] = sa;
                out.push(v.clone());
                for b in a + 1..d {
                    for sb in [-1, 1] {
                        let mut w = v.clone();
                        w[b] = sb;
                        out.push(w);
                    }
                }
            }
        }
        out
    }
}

/// The feasible set in coordinates: one parameter per support cell outside
/// a spanning forest; forest cells follow from the marginals.
struct Polytope {
    n: usize,
    m: usize,
    base: Vec<f64>,
    rows: Vec<f64>,
    cols: Vec<f64>,
    tree: Vec<(usize, usize)>,
    params: Vec<(usize, usize)>,
    upper: Vec<f64>,
}

impl Polytope {
    fn new(cs: &ConstraintSystem) -> Self {
        let (n, m) = (cs.n_rows(), cs.n_cols());
        let (rows, cols) = residuals(cs);
        let mut allowed: Vec<bool> = cs.cells().iter().map(|c| *c == Cell::Free).collect();

        // Structural zeros: empty marginals, then tight subsets. A tight row
        // set R must absorb all mass of the columns it reaches, so no other
        // row may send mass there.
        for i in 0..n {
            for j in 0..m {
                if rows[i] <= 1e-15 || cols[j] <= 1e-15 {
                    allowed[i * m + j] = false;
                }
            }
        }
        loop {
            let mut changed = false;
            for subset in 1u64..1 << n {
                let mass: f64 = (0..n)
                    .filter(|i| subset >> i & 1 == 1)
                    .map(|i| rows[i])
                    .sum();
                let reach = neighbourhood_mass(&allowed, m, subset, &cols);
                if (mass - reach).abs() > TIGHT_TOL {
                    continue;
                }
                let reached: Vec<usize> = (0..m)
                    .filter(|&j| (0..n).any(|i| subset >> i & 1 == 1 && allowed[i * m + j]))
                    .collect();
                for i in (0..n).filter(|i| subset >> i & 1 == 0) {
                    for &j in &reached {
                        if allowed[i * m + j] {
                            allowed[i * m + j] = false;
                            changed = true;
                        }
                    }
                }
            }
            if !changed {
                break;
            }
        }

        // Spanning forest over nodes rows 0..n, columns n..n+m.
        let mut parent: Vec<usize> = (0..n + m).collect();
        fn find(p: &mut [usize], x: usize) -> usize {
            let mut r = x;
            while p[r] != r {
                r = p[r];
            }
            let mut c = x;
            while p[c] != r {
                let next = p[c];
                p[c] = r;
                c = next;
            }
            r
        }
        let mut tree = Vec::new();
        let mut params = Vec::new();
        for i in 0..n {
            for j in 0..m {
                if !allowed[i * m + j] {
                    continue;
                }
                let (a, b) = (find(&mut parent, i), find(&mut parent, n + j));
                if a == b {
                    params.push((i, j));
                } else {
                    parent[a] = b;
                    tree.push((i, j));
                }
            }
        }
        let upper = params.iter().map(|&(i, j)| rows[i].min(cols[j])).collect();
        let mut base = vec![0.0; n * m];
        for i in 0..n {
            for j in 0..m {
                if let Cell::Fixed(v) = cs.cell(i, j) {
                    base[i * m + j] = v;
                }
            }
        }
        Polytope {
            n,
            m,
            base,
            rows,
            cols,
            tree,
            params,
            upper,
        }
    }

    /// Joint for parameter values `x` with forest cells solved from the
    /// marginals, possibly negative, and the largest leftover marginal.
    fn raw(&self, x: &[f64]) -> (Vec<f64>, f64) {
        let (n, m) = (self.n, self.m);
        let mut cells = self.base.clone();
        let mut need: Vec<f64> = self.rows.iter().chain(&self.cols).cloned().collect();
        for (&(i, j), &v) in self.params.iter().zip(x) {
            cells[i * m + j] += v;
            need[i] -= v;
            need[n + j] -= v;
        }
        // Peel leaves of the forest: a node with one remaining forest edge fixes it.
        let mut degree = vec![0usize; n + m];
        for &(i, j) in &self.tree {
            degree[i] += 1;
            degree[n + j] += 1;
        }
        let mut done = vec![false; self.tree.len()];
        let mut remaining = self.tree.len();
        while remaining > 0 {
            for (e, &(i, j)) in self.tree.iter().enumerate() {
                if done[e] {
                    continue;
                }
                let (leaf, other) = if degree[i] == 1 {
                    (i, n + j)
                } else if degree[n + j] == 1 {
                    (n + j, i)
                } else {
                    continue;
                };
                let v = need[leaf];
                cells[i * m + j] += v;
                need[leaf] -= v;
                need[other] -= v;
                degree[i] -= 1;
                degree[n + j] -= 1;
                done[e] = true;
                remaining -= 1;
            }
        }
        (cells, need.iter().fold(0.0, |a, r| a.max(r.abs())))
    }

    /// Total negativity of the forest cells at `x`.
    fn violation(&self, x: &[f64]) -> f64 {
        let (cells, _) = self.raw(x);
        self.tree
            .iter()
            .map(|&(i, j)| (-cells[i * self.m + j]).max(0.0))
            .sum()
    }

    /// Full joint for parameter values `x`, or `None` if a forest cell would be negative.
    fn decode(&self, x: &[f64]) -> Option<Vec<f64>> {
        let (mut cells, leftover) = self.raw(x);
        if leftover > 1e-9 {
            return None;
        }
        for &(i, j) in &self.tree {
            let c = &mut cells[i * self.m + j];
            if *c < -NEGATIVE_TOL {
                return None;
            }
            *c = c.max(0.0);
        }
        Some(cells)
    }

    /// A box around the feasible parameters. Every forest cell is affine in
    /// the parameters with coefficients in {-1, 0, 1}; requiring it to stay
    /// nonnegative tightens the bounds until nothing changes.
    fn bounds(&self) -> (Vec<f64>, Vec<f64>) {
        let d = self.params.len();
        let m = self.m;
        let zero = vec![0.0; d];
        let (c0, _) = self.raw(&zero);
        let offset: Vec<f64> = self.tree.iter().map(|&(i, j)| c0[i * m + j]).collect();
        let coef: Vec<Vec<f64>> = (0..d)
            .map(|k| {
                let mut e = zero.clone();
                e[k] = 1.0;
                let (ck, _) = self.raw(&e);
                self.tree
                    .iter()
                    .map(|&(i, j)| (ck[i * m + j] - c0[i * m + j]).round())
                    .collect()
            })
            .collect();
        let mut lo = vec![0.0; d];
        let mut hi = self.upper.clone();
        for _ in 0..1000 {
            let mut changed = false;
            for (e, &c) in offset.iter().enumerate() {
                let reach =
                    |k: usize, lo: &[f64], hi: &[f64]| (coef[k][e] * lo[k]).max(coef[k][e] * hi[k]);
                let total: f64 = (0..d).map(|k| reach(k, &lo, &hi)).sum();
                for k in 0..d {
                    let a = coef[k][e];
                    if a == 0.0 {
                        continue;
                    }
                    let rest = c + total - reach(k, &lo, &hi);
                    if a < 0.0 && rest / -a < hi[k] - 1e-15 {
                        hi[k] = (rest / -a).max(lo[k]);
                        changed = true;
                    } else if a > 0.0 && -rest / a > lo[k] + 1e-15 {
                        lo[k] = (-rest / a).min(hi[k]);
                        changed = true;
                    }
                }
            }
            if !changed {
                break;
            }
        }
        (lo, hi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pair_ab_has_no_free_dimensions() {
        let cs = ConstraintSystem::unlabeled(vec![0.8, 0.2], vec![0.7, 0.2, 0.1], &[(0, 1)], &[])
            .unwrap();
        let space = Polytope::new(&cs);
        assert!(space.params.is_empty());
        let j = oracle_maxent(&cs, 0.01).unwrap();
        let expected = [0.7, 0.0, 0.1, 0.0, 0.2, 0.0];
        for (a, b) in j.cells().iter().zip(expected) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn symmetric_2x2_is_uniform() {
        let cs = ConstraintSystem::unlabeled(vec![0.5, 0.5], vec![0.5, 0.5], &[], &[]).unwrap();
        let j = oracle_maxent(&cs, 0.01).unwrap();
        for c in j.cells() {
            assert!((c - 0.25).abs() < 1e-6);
        }
    }

    #[test]
    fn too_large_and_infeasible() {
        let cs = ConstraintSystem::unlabeled(vec![0.25; 4], vec![0.25; 4], &[], &[]).unwrap();
        assert!(matches!(
            oracle_maxent(&cs, 0.1),
            Err(Error::TooLarge { free_cells: 16, .. })
        ));
        let cs = ConstraintSystem::unlabeled(vec![1.0], vec![1.0], &[(0, 0)], &[]).unwrap();
        assert_eq!(oracle_maxent(&cs, 0.1).unwrap_err(), Error::NotFeasible);
    }

    #[test]
    fn gale_hoffman_examples() {
        let ok = ConstraintSystem::unlabeled(vec![0.8, 0.2], vec![0.7, 0.2, 0.1], &[(0, 1)], &[])
            .unwrap();
        assert!(gale_hoffman_feasible(&ok, 1e-9));
        let bad =
            ConstraintSystem::unlabeled(vec![0.6, 0.4], vec![0.2, 0.8], &[(0, 1)], &[]).unwrap();
        assert!(!gale_hoffman_feasible(&bad, 1e-9));
    }

    #[test]
    fn thin_feasible_set_is_found() {
        // Row 1 can only use column 3, leaving about 0.001 of it for the rest.
        let cs = ConstraintSystem::unlabeled(
            vec![0.44979826252580596, 0.3152112526274815, 0.23499048484671256],
            vec![0.2418458869957086, 0.307324929816254, 0.45082918318803744],
            &[(0, 0), (0, 1)],
            &[],
        )
        .unwrap();
        let j = oracle_maxent(&cs, 0.01).unwrap();
        assert!(cs.max_violation(j.cells()) < 1e-9);
        assert!(j.get(1, 2) + j.get(2, 2) < 0.0011);
    }

    #[test]
    fn directions_cover_the_cube() {
        assert_eq!(directions(2).len(), 8);
        assert_eq!(directions(7).len(), 2 * 7 + 4 * 21);
    }
}
