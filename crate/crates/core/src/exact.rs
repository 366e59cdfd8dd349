//! Exact incremental least-squares solvers.
//!
//! [`OlsState`] keeps the running sums `A_n = sum x x'`, `b_n = sum y x` and,
//! once `A_n` reaches full rank, an incrementally maintained inverse. It is
//! the ground truth the SGD trackers are measured against. [`RlsState`] solves
//! the adaptively regularised problem `(A_n/n + lambda_n I) theta = b_n/n`.
//!
//! Regularisation convention: the regularised target is the root of
//! `A_bar theta - b_bar + lambda_n theta`, i.e. the penalty is
//! `(lambda_n / 2) ||theta||^2`. That is the fixed point of the fRLS-GD step
//! `theta += gamma ((y - theta'x) x - lambda_n theta)`.

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::linalg::{self, axpy, dot, norm2, Cholesky, Matrix};
use crate::schedule::RegSchedule;

/// Rank-1 updates between full refactorizations of the maintained inverse.
pub const REFACTOR_EVERY: usize = 1000;

/// Default ridge used when a caller needs an estimate before full rank.
pub const DEFAULT_RIDGE_EPS: f64 = 1e-8;

/// Relative residual below which a new feature is considered inside the span
/// of the ones already seen.
const SPAN_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub x: Vec<f64>,
    pub y: f64,
}

impl Sample {
    pub fn new(x: Vec<f64>, y: f64) -> Self {
        Self { x, y }
    }
}

/// Running sums of the normal equations.
#[derive(Debug, Clone)]
pub struct NormalEquations {
    n: usize,
    a_sum: Matrix,
    b_sum: Vec<f64>,
}

impl NormalEquations {
    pub fn new(dim: usize) -> Self {
        Self {
            n: 0,
            a_sum: Matrix::zeros(dim),
            b_sum: vec![0.0; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.b_sum.len()
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn a_sum(&self) -> &Matrix {
        &self.a_sum
    }

    pub fn b_sum(&self) -> &[f64] {
        &self.b_sum
    }

    pub fn append(&mut self, x: &[f64], y: f64) -> Result<()> {
        check_dim(self.dim(), x.len())?;
        if !linalg::all_finite(x) || !y.is_finite() {
            return Err(Error::Contract("sample has non-finite entries".into()));
        }
        self.a_sum.add_outer(x, 1.0);
        axpy(y, x, &mut self.b_sum);
        self.n += 1;
        Ok(())
    }

    /// `A_bar_n = A_n / n`
    pub fn a_bar(&self) -> Matrix {
        self.a_sum.scaled(1.0 / self.n.max(1) as f64)
    }

    /// Solves `(A_n + shift I) theta = b_n` by direct factorization.
    pub fn solve_shifted(&self, shift: f64) -> Result<Vec<f64>> {
        let mut a = self.a_sum.clone();
        a.add_diag(shift);
        linalg::solve_spd(&a, &self.b_sum)
    }
}

/// Debug snapshot of a solver state; not a stable format.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub n: usize,
    pub a_sum: Vec<Vec<f64>>,
    pub b_sum: Vec<f64>,
}

impl Snapshot {
    fn of(eq: &NormalEquations) -> Self {
        Self {
            n: eq.n,
            a_sum: eq.a_sum.to_rows(),
            b_sum: eq.b_sum.clone(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }
}

/// Incremental ordinary least squares with a Sherman-Morrison inverse.
#[derive(Debug, Clone)]
pub struct OlsState {
    eq: NormalEquations,
    inv: Option<Matrix>,
    ridge_eps: f64,
    /// Orthonormal basis of the features seen so far; only kept until full rank.
    span: Vec<Vec<f64>>,
    updates_since_refactor: usize,
    refactor_every: usize,
    last_refactor_drift: Option<f64>,
    scratch: Vec<f64>,
}

impl OlsState {
    pub fn new(dim: usize) -> Self {
        Self {
            eq: NormalEquations::new(dim),
            inv: None,
            ridge_eps: DEFAULT_RIDGE_EPS,
            span: Vec::new(),
            updates_since_refactor: 0,
            refactor_every: REFACTOR_EVERY,
            last_refactor_drift: None,
            scratch: vec![0.0; dim],
        }
    }

    pub fn with_refactor_every(mut self, every: usize) -> Self {
        self.refactor_every = every.max(1);
        self
    }

    pub fn with_ridge_eps(mut self, eps: f64) -> Self {
        self.ridge_eps = eps;
        self
    }

    pub fn dim(&self) -> usize {
        self.eq.dim()
    }

    pub fn len(&self) -> usize {
        self.eq.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eq.is_empty()
    }

    pub fn equations(&self) -> &NormalEquations {
        &self.eq
    }

    pub fn inverse(&self) -> Option<&Matrix> {
        self.inv.as_ref()
    }

    pub fn is_ready(&self) -> bool {
        self.inv.is_some()
    }

    /// Relative Frobenius gap between the incremental inverse and the fresh one,
    /// measured at the most recent refactorization.
    pub fn last_refactor_drift(&self) -> Option<f64> {
        self.last_refactor_drift
    }

    pub fn append(&mut self, s: &Sample) -> Result<()> {
        self.append_xy(&s.x, s.y)
    }

    pub fn append_xy(&mut self, x: &[f64], y: f64) -> Result<()> {
        self.eq.append(x, y)?;
        match self.inv.as_mut() {
            Some(inv) => {
                match linalg::sm_update_in_place(inv, x, &mut self.scratch) {
                    Ok(()) => self.updates_since_refactor += 1,
                    Err(Error::Degenerate { .. }) => return self.refactor(),
                    Err(e) => return Err(e),
                }
                if self.updates_since_refactor >= self.refactor_every {
                    self.refactor()?;
                }
            }
            None => {
                self.extend_span(x);
                if self.span.len() == self.dim() {
                    if let Ok(inv) = linalg::inverse_spd(self.eq.a_sum()) {
                        self.inv = Some(inv);
                        self.span = Vec::new();
                        self.updates_since_refactor = 0;
                    }
                }
            }
        }
        Ok(())
    }

    fn extend_span(&mut self, x: &[f64]) {
        if self.span.len() >= self.dim() {
            return;
        }
        let xn = norm2(x);
        if xn == 0.0 {
            return;
        }
        let mut r = x.to_vec();
        // two passes of classical Gram-Schmidt
        for _ in 0..2 {
            for q in &self.span {
                let c = dot(q, &r);
                axpy(-c, q, &mut r);
            }
        }
        let rn = norm2(&r);
        if rn > SPAN_TOL * xn {
            r.iter_mut().for_each(|v| *v /= rn);
            self.span.push(r);
        }
    }

    /// Recomputes the inverse from scratch.
    pub fn refactor(&mut self) -> Result<()> {
        let fresh = linalg::inverse_spd(self.eq.a_sum())?;
        if let Some(old) = &self.inv {
            self.last_refactor_drift = Some(old.frobenius_dist(&fresh) / fresh.frobenius());
        }
        self.inv = Some(fresh);
        self.updates_since_refactor = 0;
        Ok(())
    }

    /// `theta_hat_n = A_bar_n^{-1} b_bar_n`
    pub fn solution(&self) -> Result<Vec<f64>> {
        let inv = self
            .inv
            .as_ref()
            .ok_or(Error::NotReady("design matrix is rank deficient"))?;
        Ok(inv.mul_vec(self.eq.b_sum()))
    }

    /// Ridge estimate `(A_bar + eps I)^{-1} b_bar`, usable before full rank.
    pub fn ridge_solution(&self) -> Result<Vec<f64>> {
        if self.is_empty() {
            return Ok(vec![0.0; self.dim()]);
        }
        self.eq.solve_shifted(self.len() as f64 * self.ridge_eps)
    }

    /// `x' A_n^{-1} x`
    pub fn exact_confidence(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.dim(), x.len())?;
        let inv = self
            .inv
            .as_ref()
            .ok_or(Error::NotReady("design matrix is rank deficient"))?;
        Ok(inv.quad_form(x).max(0.0))
    }

    pub fn snapshot(&self) -> Snapshot {
        Snapshot::of(&self.eq)
    }
}

/// Adaptively regularised least squares.
#[derive(Debug, Clone)]
pub struct RlsState {
    eq: NormalEquations,
    reg: RegSchedule,
}

impl RlsState {
    pub fn new(dim: usize, reg: RegSchedule) -> Self {
        Self {
            eq: NormalEquations::new(dim),
            reg,
        }
    }

    pub fn dim(&self) -> usize {
        self.eq.dim()
    }

    pub fn len(&self) -> usize {
        self.eq.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eq.is_empty()
    }

    pub fn schedule(&self) -> RegSchedule {
        self.reg
    }

    pub fn equations(&self) -> &NormalEquations {
        &self.eq
    }

    pub fn append(&mut self, s: &Sample) -> Result<()> {
        self.eq.append(&s.x, s.y)
    }

    pub fn append_xy(&mut self, x: &[f64], y: f64) -> Result<()> {
        self.eq.append(x, y)
    }

    /// Current `lambda_n`.
    pub fn lambda(&self) -> f64 {
        self.reg.lambda(self.len())
    }

    /// Factorizes `A_n + n lambda_n I` once for repeated queries.
    pub fn factor(&self) -> Result<RlsSystem> {
        if self.is_empty() {
            return Err(Error::NotReady("no samples appended"));
        }
        let mut a = self.eq.a_sum().clone();
        a.add_diag(self.len() as f64 * self.lambda());
        Ok(RlsSystem {
            chol: Cholesky::factor(&a)?,
            b_sum: self.eq.b_sum().to_vec(),
        })
    }

    /// `theta_tilde_n` solving `(A_bar_n + lambda_n I) theta = b_bar_n`.
    pub fn solution(&self) -> Result<Vec<f64>> {
        Ok(self.factor()?.solution())
    }

    /// `x' (A_n + n lambda_n I)^{-1} x`
    pub fn exact_confidence(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.dim(), x.len())?;
        Ok(self.factor()?.confidence(x))
    }

    pub fn snapshot(&self) -> Snapshot {
        Snapshot::of(&self.eq)
    }
}

/// A factorized regularised system at a fixed sample count.
#[derive(Debug, Clone)]
pub struct RlsSystem {
    chol: Cholesky,
    b_sum: Vec<f64>,
}

impl RlsSystem {
    pub fn solution(&self) -> Vec<f64> {
        self.chol.solve(&self.b_sum)
    }

    pub fn confidence(&self, x: &[f64]) -> f64 {
        dot(x, &self.chol.solve(x)).max(0.0)
    }
}
