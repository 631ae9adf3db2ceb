//! Maximum-entropy joint distributions under a [`ConstraintSystem`].
//!
//! Maximizing `H(S × S')` subject to the marginals is the same as minimizing
//! the information gain of the combination, and the same as minimizing the
//! cross-entropy to the independent product. The optimum has product form
//! `p(s, s') = k_s · k_s'` on the cells that can carry mass, so it is found
//! by iterative proportional fitting of the row and column multipliers.
//!
//! Cells that are zero in every feasible joint are detected up front from
//! the max-flow witness. Scaling then runs on a support whose feasible set
//! has a strictly positive point, where it converges geometrically. If it
//! still stalls, a damped Newton method on the log-multipliers takes over.

mod oracle;

pub use oracle::{gale_hoffman_feasible, oracle_maxent, oracle_maxent_by, ORACLE_MAX_FREE_CELLS};

use crate::bpa::{ProbabilityFunction, MASS_TOLERANCE};
use crate::constraints::{Cell, ConstraintSystem, TransportFlow, FEASIBILITY_TOLERANCE};
use crate::error::{Error, Result};
use crate::frame::Frame;

/// Flow values at or below this are treated as zero when detecting support.
const SUPPORT_EPS: f64 = 1e-12;
/// Cells below this are dropped by the Newton fallback.
const STRUCTURAL_ZERO: f64 = 1e-15;

/// A nonnegative matrix over `S × S'` summing to 1, stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct JointDistribution {
    left: Frame,
    right: Frame,
    cells: Vec<f64>,
}

impl JointDistribution {
    pub fn new(left: &Frame, right: &Frame, cells: Vec<f64>) -> Result<Self> {
        if cells.len() != left.len() * right.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} cells for a {}×{} joint",
                cells.len(),
                left.len(),
                right.len()
            )));
        }
        if cells.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(Error::InvalidProbability(
                "joint has a negative cell".into(),
            ));
        }
        let total: f64 = cells.iter().sum();
        if (total - 1.0).abs() > MASS_TOLERANCE {
            return Err(Error::InvalidProbability(format!(
                "joint cells sum to {total}"
            )));
        }
        Ok(JointDistribution {
            left: left.clone(),
            right: right.clone(),
            cells,
        })
    }

    /// `P(s) · P(s')` in every cell.
    pub fn product(p: &ProbabilityFunction, q: &ProbabilityFunction) -> Self {
        let cells = p
            .probs()
            .iter()
            .flat_map(|a| q.probs().iter().map(move |b| a * b))
            .collect();
        JointDistribution {
            left: p.frame().clone(),
            right: q.frame().clone(),
            cells,
        }
    }

    pub fn left(&self) -> &Frame {
        &self.left
    }

    pub fn right(&self) -> &Frame {
        &self.right
    }

    pub fn n_rows(&self) -> usize {
        self.left.len()
    }

    pub fn n_cols(&self) -> usize {
        self.right.len()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.cells[i * self.n_cols() + j]
    }

    pub fn cells(&self) -> &[f64] {
        &self.cells
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let m = self.n_cols();
        &self.cells[i * m..(i + 1) * m]
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.n_rows())
            .map(|i| self.row(i).iter().sum())
            .collect()
    }

    pub fn col_sums(&self) -> Vec<f64> {
        (0..self.n_cols())
            .map(|j| (0..self.n_rows()).map(|i| self.get(i, j)).sum())
            .collect()
    }

    /// Own marginals as probability functions (renormalized within tolerance).
    pub fn marginals(&self) -> (ProbabilityFunction, ProbabilityFunction) {
        let p = ProbabilityFunction::new(&self.left, self.row_sums()).expect("joint sums to 1");
        let q = ProbabilityFunction::new(&self.right, self.col_sums()).expect("joint sums to 1");
        (p, q)
    }

    pub fn transpose(&self) -> JointDistribution {
        let (n, m) = (self.n_rows(), self.n_cols());
        JointDistribution {
            left: self.right.clone(),
            right: self.left.clone(),
            cells: (0..m)
                .flat_map(|j| (0..n).map(move |i| (i, j)))
                .map(|(i, j)| self.cells[i * m + j])
                .collect(),
        }
    }

    pub fn max_abs_diff(&self, other: &JointDistribution) -> f64 {
        self.cells
            .iter()
            .zip(&other.cells)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// `-Σ p ln p` in nats, with `0 ln 0 = 0`.
pub fn joint_entropy(j: &JointDistribution) -> f64 {
    entropy_of(j.cells())
}

pub(crate) fn entropy_of(probs: &[f64]) -> f64 {
    -probs
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| p * p.ln())
        .sum::<f64>()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolverMethod {
    IterativeScaling,
    DualAscentFallback,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolverReport {
    pub iterations: usize,
    /// Max absolute deviation of the free cells from the residual marginals.
    pub residual: f64,
    /// Entropy of the solution, nats.
    pub entropy: f64,
    pub method: SolverMethod,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverOptions {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tol: 1e-10,
            max_iter: 100_000,
        }
    }
}

/// The entropy-maximizing joint distribution satisfying `cs`.
///
/// Forbidden cells come out exactly 0 and fixed cells exactly at their value.
/// Output is deterministic: iteration order is fixed and nothing is randomized.
pub fn solve_maxent(
    cs: &ConstraintSystem,
    opts: &SolverOptions,
) -> Result<(JointDistribution, SolverReport)> {
    let net = TransportFlow::solve(cs);
    if net.shortfall() > FEASIBILITY_TOLERANCE {
        return Err(Error::NotFeasible);
    }
    let support = net.supportable(SUPPORT_EPS);
    let rows = cs.residual_rows();
    let cols = cs.residual_cols();

    let mut fit = Scaling::new(cs.n_rows(), cs.n_cols(), support, rows, cols);
    let (free, iterations, residual, method) = match fit.iterate(opts) {
        Ok((iters, res)) => (fit.cells(), iters, res, SolverMethod::IterativeScaling),
        Err(ipf_iters) => {
            let (iters, res) = fit.newton(opts)?;
            (
                fit.cells(),
                ipf_iters + iters,
                res,
                SolverMethod::DualAscentFallback,
            )
        }
    };

    let mut cells = free;
    for (k, c) in cs.cells().iter().enumerate() {
        match c {
            Cell::Fixed(v) => cells[k] = *v,
            Cell::Forbidden => cells[k] = 0.0,
            Cell::Free => {}
        }
    }
    let joint = JointDistribution::new(cs.left(), cs.right(), cells)?;
    let report = SolverReport {
        iterations,
        residual,
        entropy: joint_entropy(&joint),
        method,
    };
    Ok((joint, report))
}

/// Row and column multipliers over a fixed support: `cell = a_i · b_j`.
struct Scaling {
    n: usize,
    m: usize,
    support: Vec<bool>,
    rows: Vec<f64>,
    cols: Vec<f64>,
    a: Vec<f64>,
    b: Vec<f64>,
}

impl Scaling {
    fn new(n: usize, m: usize, support: Vec<bool>, rows: Vec<f64>, cols: Vec<f64>) -> Self {
        Scaling {
            n,
            m,
            support,
            rows,
            cols,
            a: vec![1.0; n],
            b: vec![1.0; m],
        }
    }

    fn cells(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.n * self.m];
        for i in 0..self.n {
            for j in 0..self.m {
                if self.support[i * self.m + j] {
                    out[i * self.m + j] = self.a[i] * self.b[j];
                }
            }
        }
        out
    }

    fn residual(&self) -> f64 {
        let cells = self.cells();
        let mut worst: f64 = 0.0;
        for i in 0..self.n {
            let s: f64 = cells[i * self.m..(i + 1) * self.m].iter().sum();
            worst = worst.max((s - self.rows[i]).abs());
        }
        for j in 0..self.m {
            let s: f64 = (0..self.n).map(|i| cells[i * self.m + j]).sum();
            worst = worst.max((s - self.cols[j]).abs());
        }
        worst
    }

    /// Alternating row/column rescaling. `Err` carries the iterations spent.
    fn iterate(&mut self, opts: &SolverOptions) -> Result<(usize, f64), usize> {
        let res = self.residual();
        if res <= opts.tol {
            return Ok((0, res));
        }
        for it in 1..=opts.max_iter {
            for i in 0..self.n {
                let s: f64 = (0..self.m)
                    .filter(|&j| self.support[i * self.m + j])
                    .map(|j| self.b[j])
                    .sum();
                self.a[i] = if s > 0.0 { self.rows[i] / s } else { 0.0 };
            }
            for j in 0..self.m {
                let s: f64 = (0..self.n)
                    .filter(|&i| self.support[i * self.m + j])
                    .map(|i| self.a[i])
                    .sum();
                self.b[j] = if s > 0.0 { self.cols[j] / s } else { 0.0 };
            }
            let res = self.residual();
            if res <= opts.tol {
                return Ok((it, res));
            }
        }
        Err(opts.max_iter)
    }

    /// Damped Newton on the convex dual
    /// `g(λ, μ) = Σ exp(λ_i + μ_j) − Σ r_i λ_i − Σ c_j μ_j` over the support,
    /// where `a = exp(λ)`, `b = exp(μ)`. Cells that fall below
    /// [`STRUCTURAL_ZERO`] leave the support.
    fn newton(&mut self, opts: &SolverOptions) -> Result<(usize, f64)> {
        let (n, m) = (self.n, self.m);
        // Start from the scaling iterate where it is usable.
        let mut lam: Vec<f64> = self
            .a
            .iter()
            .map(|&x| if x > 0.0 { x.ln() } else { 0.0 })
            .collect();
        let mut mu: Vec<f64> = self
            .b
            .iter()
            .map(|&x| if x > 0.0 { x.ln() } else { 0.0 })
            .collect();
        let active_rows: Vec<bool> = (0..n)
            .map(|i| (0..m).any(|j| self.support[i * m + j]))
            .collect();
        let active_cols: Vec<bool> = (0..m)
            .map(|j| (0..n).any(|i| self.support[i * m + j]))
            .collect();

        let dual = |s: &Scaling, lam: &[f64], mu: &[f64]| -> f64 {
            let mut g = 0.0;
            for i in 0..n {
                for j in 0..m {
                    if s.support[i * m + j] {
                        g += (lam[i] + mu[j]).exp();
                    }
                }
            }
            g - (0..n)
                .filter(|&i| active_rows[i])
                .map(|i| s.rows[i] * lam[i])
                .sum::<f64>()
                - (0..m)
                    .filter(|&j| active_cols[j])
                    .map(|j| s.cols[j] * mu[j])
                    .sum::<f64>()
        };

        let dim = n + m;
        let mut last = f64::INFINITY;
        for it in 1..=opts.max_iter {
            let mut p = vec![0.0; n * m];
            for i in 0..n {
                for j in 0..m {
                    if self.support[i * m + j] {
                        p[i * m + j] = (lam[i] + mu[j]).exp();
                    }
                }
            }
            let mut grad = vec![0.0; dim];
            let mut hess = vec![0.0; dim * dim];
            for i in 0..n {
                for j in 0..m {
                    let v = p[i * m + j];
                    if v == 0.0 {
                        continue;
                    }
                    grad[i] += v;
                    grad[n + j] += v;
                    hess[i * dim + i] += v;
                    hess[(n + j) * dim + n + j] += v;
                    hess[i * dim + n + j] += v;
                    hess[(n + j) * dim + i] += v;
                }
            }
            for i in 0..n {
                grad[i] -= if active_rows[i] { self.rows[i] } else { 0.0 };
            }
            for j in 0..m {
                grad[n + j] -= if active_cols[j] { self.cols[j] } else { 0.0 };
            }
            last = grad.iter().fold(0.0, |w, g| w.max(g.abs()));
            if last <= opts.tol {
                self.a = lam.iter().map(|x| x.exp()).collect();
                self.b = mu.iter().map(|x| x.exp()).collect();
                return Ok((it - 1, self.residual()));
            }

            // The Hessian is singular along (1, …, 1, −1, …, −1) per component; damp it.
            let scale = (0..dim)
                .map(|k| hess[k * dim + k])
                .fold(0.0, f64::max)
                .max(1.0);
            for k in 0..dim {
                hess[k * dim + k] +=
                    1e-12 * scale + if hess[k * dim + k] == 0.0 { 1.0 } else { 0.0 };
            }
            let step = solve_spd(&hess, &grad, dim).ok_or(Error::NoConvergence {
                iterations: it,
                residual: last,
            })?;

            let g0 = dual(self, &lam, &mu);
            let slope: f64 = -grad.iter().zip(&step).map(|(g, d)| g * d).sum::<f64>();
            let mut t = 1.0;
            loop {
                let nl: Vec<f64> = (0..n).map(|i| lam[i] - t * step[i]).collect();
                let nm: Vec<f64> = (0..m).map(|j| mu[j] - t * step[n + j]).collect();
                if dual(self, &nl, &nm) <= g0 + 1e-4 * t * slope || t < 1e-10 {
                    lam = nl;
                    mu = nm;
                    break;
                }
                t *= 0.5;
            }

            for i in 0..n {
                for j in 0..m {
                    let k = i * m + j;
                    if self.support[k] && (lam[i] + mu[j]).exp() < STRUCTURAL_ZERO {
                        self.support[k] = false;
                    }
                }
            }
        }
        Err(Error::NoConvergence {
            iterations: opts.max_iter,
            residual: last,
        })
    }
}

/// Solves `A x = b` for symmetric positive definite `A` by Cholesky.
fn solve_spd(a: &[f64], b: &[f64], n: usize) -> Option<Vec<f64>> {
    let mut l = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut s = a[i * n + j];
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k];
            }
            if i == j {
                if s <= 0.0 {
                    return None;
                }
                l[i * n + i] = s.sqrt();
            } else {
                l[i * n + j] = s / l[j * n + j];
            }
        }
    }
    let mut y = vec![0.0; n];
    for i in 0..n {
        let s: f64 = (0..i).map(|k| l[i * n + k] * y[k]).sum();
        y[i] = (b[i] - s) / l[i * n + i];
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|k| l[k * n + i] * x[k]).sum();
        x[i] = (y[i] - s) / l[i * n + i];
    }
    Some(x)
}
