//! Baseline solvers for first-kind problems: Lavrentiev regularization,
//! the quasisolution, and the iterative family with a discrepancy-type
//! stopping rule.

mod diagnostics;
mod iterative;
mod regularization;

pub use diagnostics::{mode_diagnostic, perlin_deflate, ModeDiagnostic};
pub use iterative::{
    averaged_iterate, averaged_iterate_discrete, fridman_iterate, fridman_iterate_discrete, implicit_iterate,
    implicit_iterate_discrete, iterate, iterate_discrete, landweber_iterate, landweber_iterate_discrete,
    steepest_descent_iterate, steepest_descent_iterate_discrete,
};
pub use regularization::{
    lavrentiev_solve, lavrentiev_solve_discrete, quasisolution_solve, RegularizationParams, RegularizationVariant,
};

use std::fmt;

use crate::error::Result;
use crate::firstkind::FirstKindProblem;
use crate::grid::Grid;
use crate::linalg::{power_iteration, Matrix};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum IterationScheme {
    Fridman,
    Landweber,
    Averaged,
    Implicit,
    SteepestDescent,
}

impl IterationScheme {
    pub fn name(self) -> &'static str {
        match self {
            IterationScheme::Fridman => "fridman",
            IterationScheme::Landweber => "landweber",
            IterationScheme::Averaged => "averaged",
            IterationScheme::Implicit => "implicit",
            IterationScheme::SteepestDescent => "steepest_descent",
        }
    }
}

impl fmt::Display for IterationScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Stop at the first `n` with `‖ψₙ₊₁ − ψₙ‖ ≤ c₁δ + c₂γ`.
///
/// When neither error level is known, or both are zero, the threshold falls
/// back to `fallback_tol` on the same successive distance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StoppingRule {
    pub c1: f64,
    pub c2: f64,
    pub delta: Option<f64>,
    pub gamma: Option<f64>,
    pub fallback_tol: f64,
}

impl Default for StoppingRule {
    fn default() -> Self {
        Self {
            c1: 1.0,
            c2: 1.0,
            delta: None,
            gamma: None,
            fallback_tol: 1e-10,
        }
    }
}

impl StoppingRule {
    pub fn discrepancy(delta: f64, c1: f64) -> Self {
        Self {
            c1,
            delta: Some(delta),
            ..Self::default()
        }
    }

    pub fn threshold(&self) -> f64 {
        let t = self.c1 * self.delta.unwrap_or(0.0) + self.c2 * self.gamma.unwrap_or(0.0);
        if t > 0.0 {
            t
        } else {
            self.fallback_tol
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationParams<T> {
    pub scheme: IterationScheme,
    /// λ for Fridman and the averaged sequence, ν for Landweber, α for the
    /// implicit scheme; unused by steepest descent.
    pub step: T,
    pub max_iters: usize,
    pub stop: StoppingRule,
    /// Smallest characteristic number, when known analytically.
    pub lambda1: Option<T>,
}

impl<T: Real> IterationParams<T> {
    pub fn new(scheme: IterationScheme, step: T, max_iters: usize) -> Self {
        Self {
            scheme,
            step,
            max_iters,
            stop: StoppingRule::default(),
            lambda1: None,
        }
    }

    pub fn with_stop(mut self, stop: StoppingRule) -> Self {
        self.stop = stop;
        self
    }

    pub fn with_lambda1(mut self, lambda1: T) -> Self {
        self.lambda1 = Some(lambda1);
        self
    }

    pub fn summary(&self) -> String {
        let mut s = format!("scheme={} step={} max_iters={} threshold={:e}", self.scheme, self.step, self.max_iters, self.stop.threshold());
        if let Some(l) = self.lambda1 {
            s.push_str(&format!(" lambda1={l}"));
        }
        s
    }
}

/// Solution samples plus the residual trail `‖Aψₖ − f‖` for `k = 0..=iterations_used`.
#[derive(Debug, Clone, PartialEq)]
pub struct MethodResult<T> {
    pub solution: Vec<T>,
    pub residual_history: Vec<T>,
    pub iterations_used: usize,
    pub converged: bool,
    pub params_echo: String,
}

impl<T: Real> MethodResult<T> {
    pub fn final_residual(&self) -> T {
        *self.residual_history.last().unwrap_or(&T::nan())
    }
}

/// Nyström form of a first-kind problem: `A = K W`, its adjoint in the
/// weighted inner product `A* = Kᵀ W`, and right-hand-side samples.
#[derive(Debug, Clone)]
pub struct DiscreteSystem<T> {
    pub grid: Grid<T>,
    pub a: Matrix<T>,
    pub a_adj: Matrix<T>,
    pub f: Vec<T>,
}

impl<T: Real> DiscreteSystem<T> {
    pub fn new(p: &FirstKindProblem<T>, grid: &Grid<T>) -> Result<Self> {
        let op = p.operator(grid)?;
        let f = p.rhs_samples(grid)?;
        Ok(Self::from_kernel_values(&op.kernel_values(), grid, f))
    }

    pub fn from_kernel_values(k: &Matrix<T>, grid: &Grid<T>, f: Vec<T>) -> Self {
        let a = k.scale_columns(grid.weights());
        let a_adj = k.transpose().scale_columns(grid.weights());
        Self {
            grid: grid.clone(),
            a,
            a_adj,
            f,
        }
    }

    /// Same operator with new right-hand-side samples.
    pub fn with_rhs(&self, f: Vec<T>) -> Result<Self> {
        self.grid.check_len(f.len())?;
        Ok(Self {
            f,
            ..self.clone()
        })
    }

    pub fn residual_vec(&self, psi: &[T]) -> Vec<T> {
        self.a
            .matvec(psi)
            .iter()
            .zip(&self.f)
            .map(|(&a, &b)| a - b)
            .collect()
    }

    pub fn residual(&self, psi: &[T]) -> T {
        self.grid.l2_norm(&self.residual_vec(psi))
    }

    /// `‖A*A‖` by power iteration in the weighted inner product.
    pub fn normal_operator_norm(&self) -> T {
        let g = &self.grid;
        power_iteration(
            |x| self.a_adj.matvec(&self.a.matvec(x)),
            |u, v| g.inner(u, v),
            g.len(),
            5000,
            T::lit(1e-13),
        )
    }

    /// Largest eigenvalue magnitude of `A`; its reciprocal estimates λ₁.
    pub fn operator_norm_estimate(&self) -> T {
        let g = &self.grid;
        power_iteration(|x| self.a.matvec(x), |u, v| g.inner(u, v), g.len(), 5000, T::lit(1e-13))
    }
}
