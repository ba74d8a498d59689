//! Fredholm equations of the second kind, `χ = μ∫Kχ + F`, possibly split into
//! blocks that each live on their own grid.

use log::warn;

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::linalg::{solve_checked, Lu, Matrix};
use crate::scalar::Real;

pub const RCOND_MIN: f64 = 1e-12;
pub const DIVERGENCE_STREAK: usize = 20;

/// Block system `χᵢ = μ Σⱼ ∫ Kᵢⱼ χⱼ + Fᵢ`. `blocks[i][j]` holds kernel values
/// with rows on `grids[i]` and columns on `grids[j]`.
#[derive(Debug, Clone)]
pub struct SecondKindProblem<T> {
    pub grids: Vec<Grid<T>>,
    pub blocks: Vec<Vec<Matrix<T>>>,
    pub mu: T,
    pub rhs: Vec<Vec<T>>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContractionReport<T> {
    /// `M = (Σᵢⱼ ∫∫ |Kᵢⱼ|²)^{1/2}`.
    pub m: T,
    pub mu_times_m: T,
    pub contractive: bool,
    /// Every row integral `∫|Kᵢⱼ(x, ξ)|² dξ` is finite.
    pub regular: bool,
    /// Largest row integral over all blocks.
    pub max_row_bound: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SecondKindSolution<T> {
    pub blocks: Vec<Vec<T>>,
    /// `‖(I − μKW)χ − F‖ / ‖F‖` in the stacked discrete system (absolute when `F = 0`).
    pub residual: T,
    pub rcond: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterationOutcome<T> {
    pub blocks: Vec<Vec<T>>,
    /// Weighted distance between successive iterates.
    pub distances: Vec<T>,
    pub iterations: usize,
    pub converged: bool,
}

impl<T: Real> IterationOutcome<T> {
    /// Ratios of successive distances.
    pub fn distance_ratios(&self) -> Vec<T> {
        self.distances
            .windows(2)
            .filter(|w| w[0] > T::zero())
            .map(|w| w[1] / w[0])
            .collect()
    }
}

impl<T: Real> SecondKindProblem<T> {
    pub fn new(grids: Vec<Grid<T>>, blocks: Vec<Vec<Matrix<T>>>, mu: T, rhs: Vec<Vec<T>>) -> Result<Self> {
        let b = grids.len();
        if blocks.len() != b || rhs.len() != b {
            return Err(Error::LengthMismatch {
                expected: b,
                got: blocks.len().min(rhs.len()),
            });
        }
        for i in 0..b {
            if blocks[i].len() != b {
                return Err(Error::LengthMismatch {
                    expected: b,
                    got: blocks[i].len(),
                });
            }
            grids[i].check_len(rhs[i].len())?;
            for j in 0..b {
                let k = &blocks[i][j];
                if k.rows() != grids[i].len() || k.cols() != grids[j].len() {
                    return Err(Error::LengthMismatch {
                        expected: grids[i].len() * grids[j].len(),
                        got: k.rows() * k.cols(),
                    });
                }
            }
        }
        Ok(Self { grids, blocks, mu, rhs })
    }

    /// One-block problem `χ = μ∫Kχ + F`.
    pub fn single(grid: Grid<T>, kernel_values: Matrix<T>, mu: T, rhs: Vec<T>) -> Result<Self> {
        Self::new(vec![grid], vec![vec![kernel_values]], mu, vec![rhs])
    }

    pub fn block_count(&self) -> usize {
        self.grids.len()
    }

    fn offsets(&self) -> Vec<usize> {
        let mut off = vec![0];
        for g in &self.grids {
            off.push(off.last().unwrap() + g.len());
        }
        off
    }

    pub fn total_len(&self) -> usize {
        self.grids.iter().map(|g| g.len()).sum()
    }

    /// Stacked weights, block after block.
    pub fn stacked_weights(&self) -> Vec<T> {
        self.grids.iter().flat_map(|g| g.weights().iter().copied()).collect()
    }

    pub fn stacked_rhs(&self) -> Vec<T> {
        self.rhs.iter().flatten().copied().collect()
    }

    pub fn split(&self, stacked: &[T]) -> Vec<Vec<T>> {
        let off = self.offsets();
        (0..self.block_count())
            .map(|i| stacked[off[i]..off[i + 1]].to_vec())
            .collect()
    }

    /// `μ Σⱼ Kᵢⱼ Wⱼ χⱼ` for every block row.
    pub fn apply(&self, chi: &[Vec<T>]) -> Vec<Vec<T>> {
        let b = self.block_count();
        (0..b)
            .map(|i| {
                let mut acc = vec![T::zero(); self.grids[i].len()];
                for j in 0..b {
                    let wc: Vec<T> = chi[j]
                        .iter()
                        .zip(self.grids[j].weights())
                        .map(|(&c, &w)| c * w)
                        .collect();
                    for (a, v) in acc.iter_mut().zip(self.blocks[i][j].matvec(&wc)) {
                        *a += self.mu * v;
                    }
                }
                acc
            })
            .collect()
    }

    /// `I − μ K W` assembled block by block.
    pub fn system_matrix(&self) -> Matrix<T> {
        let off = self.offsets();
        let n = self.total_len();
        let mut m = Matrix::identity(n);
        for i in 0..self.block_count() {
            for j in 0..self.block_count() {
                let k = &self.blocks[i][j];
                let w = self.grids[j].weights();
                for r in 0..k.rows() {
                    for c in 0..k.cols() {
                        m[(off[i] + r, off[j] + c)] -= self.mu * k[(r, c)] * w[c];
                    }
                }
            }
        }
        m
    }

    fn stacked_norm(&self, v: &[T]) -> T {
        self.stacked_weights()
            .iter()
            .zip(v)
            .fold(T::zero(), |s, (&w, &x)| s + w * x * x)
            .sqrt()
    }

    fn relative_residual(&self, m: &Matrix<T>, x: &[T], f: &[T]) -> T {
        let r: Vec<T> = m.matvec(x).iter().zip(f).map(|(&a, &b)| a - b).collect();
        let rn = self.stacked_norm(&r);
        let fnorm = self.stacked_norm(f);
        if fnorm > T::zero() {
            rn / fnorm
        } else {
            rn
        }
    }
}

pub fn norm_m<T: Real>(problem: &SecondKindProblem<T>) -> ContractionReport<T> {
    let b = problem.block_count();
    let mut m2 = T::zero();
    let mut max_row = T::zero();
    let mut regular = true;
    for i in 0..b {
        let wi = problem.grids[i].weights();
        for j in 0..b {
            let wj = problem.grids[j].weights();
            let k = &problem.blocks[i][j];
            for r in 0..k.rows() {
                let row_int = k
                    .row(r)
                    .iter()
                    .zip(wj)
                    .fold(T::zero(), |s, (&v, &w)| s + w * v * v);
                if !row_int.is_finite() {
                    regular = false;
                }
                max_row = max_row.max(row_int);
                m2 += wi[r] * row_int;
            }
        }
    }
    let m = m2.sqrt();
    let mu_times_m = problem.mu.abs() * m;
    ContractionReport {
        m,
        mu_times_m,
        contractive: mu_times_m < T::one(),
        regular: regular && m.is_finite(),
        max_row_bound: max_row,
    }
}

/// Same measure for an already weighted operator `O` (acting as `v ↦ Ov`) on
/// nodes with quadrature weights `w`: `M² = Σ w_r O_rc² / w_c`, the
/// discrete Hilbert–Schmidt norm, which bounds the operator norm.
pub fn operator_report<T: Real>(op: &Matrix<T>, weights: &[T], mu: T) -> ContractionReport<T> {
    let mut m2 = T::zero();
    let mut max_row = T::zero();
    for r in 0..op.rows() {
        let row_int = op
            .row(r)
            .iter()
            .zip(weights)
            .fold(T::zero(), |s, (&o, &w)| s + o * o / w);
        if row_int > max_row {
            max_row = row_int;
        }
        m2 += weights[r] * row_int;
    }
    let m = m2.sqrt();
    let mu_times_m = mu.abs() * m;
    ContractionReport {
        m,
        mu_times_m,
        contractive: mu_times_m < T::one(),
        regular: m.is_finite(),
        max_row_bound: max_row,
    }
}

/// Dense Nyström solve of the block system.
pub fn nystrom_solve<T: Real>(problem: &SecondKindProblem<T>) -> Result<SecondKindSolution<T>> {
    solve_assembled(problem, &problem.system_matrix())
}

fn solve_assembled<T: Real>(problem: &SecondKindProblem<T>, m: &Matrix<T>) -> Result<SecondKindSolution<T>> {
    let f = problem.stacked_rhs();
    let lu = Lu::factor(m)?;
    let rcond = lu.rcond();
    if rcond.to_f64_lossy() < RCOND_MIN {
        return Err(Error::Singular {
            rcond: rcond.to_f64_lossy(),
        });
    }
    let x = lu.solve(&f);
    let residual = problem.relative_residual(m, &x, &f);
    Ok(SecondKindSolution {
        blocks: problem.split(&x),
        residual,
        rcond,
    })
}

/// The block system rewritten as one equation on a concatenated interval:
/// block `i` occupies `[oᵢ + a, oᵢ + b]` with `oᵢ` the total length of the
/// preceding block intervals, and the kernel is piecewise by index.
#[derive(Debug, Clone)]
pub struct StackedEquation<T> {
    pub nodes: Vec<T>,
    pub weights: Vec<T>,
    pub kernel: Matrix<T>,
    pub rhs: Vec<T>,
    pub mu: T,
}

pub fn stack<T: Real>(problem: &SecondKindProblem<T>) -> StackedEquation<T> {
    let mut nodes = Vec::with_capacity(problem.total_len());
    let mut shift = T::zero();
    for g in &problem.grids {
        nodes.extend(g.nodes().iter().map(|&x| x - g.a() + shift));
        shift += g.b() - g.a();
    }
    let off = problem.offsets();
    let locate = |idx: usize| -> (usize, usize) {
        let blk = off.iter().rposition(|&o| o <= idx).unwrap().min(problem.block_count() - 1);
        (blk, idx - off[blk])
    };
    let n = problem.total_len();
    let kernel = Matrix::from_fn(n, n, |r, c| {
        let (bi, ri) = locate(r);
        let (bj, cj) = locate(c);
        problem.blocks[bi][bj][(ri, cj)]
    });
    StackedEquation {
        nodes,
        weights: problem.stacked_weights(),
        kernel,
        rhs: problem.stacked_rhs(),
        mu: problem.mu,
    }
}

impl<T: Real> StackedEquation<T> {
    pub fn system_matrix(&self) -> Matrix<T> {
        let n = self.nodes.len();
        let mut m = Matrix::identity(n);
        for r in 0..n {
            for c in 0..n {
                m[(r, c)] -= self.mu * self.kernel[(r, c)] * self.weights[c];
            }
        }
        m
    }

    pub fn solve(&self) -> Result<Vec<T>> {
        solve_checked(&self.system_matrix(), &self.rhs, RCOND_MIN)
    }
}

/// `χₙ₊₁ = μ∫Kχₙ + F` until the successive distance drops below `tol`.
///
/// Fails with [`Error::Divergence`] after 20 consecutive growing distances.
pub fn simple_iteration<T: Real>(
    problem: &SecondKindProblem<T>,
    chi0: &[Vec<T>],
    tol: T,
    max_iters: usize,
) -> Result<IterationOutcome<T>> {
    if chi0.len() != problem.block_count() {
        return Err(Error::LengthMismatch {
            expected: problem.block_count(),
            got: chi0.len(),
        });
    }
    for (g, c) in problem.grids.iter().zip(chi0) {
        g.check_len(c.len())?;
    }
    let report = norm_m(problem);
    if !report.contractive {
        warn!(
            "|mu| M = {} >= 1: simple iteration is not guaranteed to converge",
            report.mu_times_m
        );
    }
    let mut chi: Vec<Vec<T>> = chi0.to_vec();
    let mut distances = Vec::new();
    let mut streak = 0usize;
    for it in 1..=max_iters {
        let kchi = problem.apply(&chi);
        let next: Vec<Vec<T>> = kchi
            .into_iter()
            .zip(&problem.rhs)
            .map(|(k, f)| k.iter().zip(f).map(|(&a, &b)| a + b).collect())
            .collect();
        let diff: Vec<T> = next
            .iter()
            .flatten()
            .zip(chi.iter().flatten())
            .map(|(&a, &b)| a - b)
            .collect();
        let d = problem.stacked_norm(&diff);
        if let Some(&prev) = distances.last() {
            if d > prev {
                streak += 1;
            } else {
                streak = 0;
            }
        }
        distances.push(d);
        chi = next;
        if !d.is_finite() || streak >= DIVERGENCE_STREAK {
            return Err(Error::Divergence { iterations: it, streak });
        }
        if d <= tol {
            return Ok(IterationOutcome {
                blocks: chi,
                distances,
                iterations: it,
                converged: true,
            });
        }
    }
    Ok(IterationOutcome {
        blocks: chi,
        distances,
        iterations: max_iters,
        converged: false,
    })
}

/// Truncated resolvent `Γ = Σ_{n=1}^{N} μⁿ⁻¹ Kₙ` (kernel values, unweighted)
/// with iterated kernels `Kₙ₊₁ = ∫ Kₙ K`.
pub fn neumann_resolvent<T: Real>(kernel_values: &Matrix<T>, mu: T, n_terms: usize, grid: &Grid<T>) -> Result<Matrix<T>> {
    if kernel_values.rows() != grid.len() || kernel_values.cols() != grid.len() {
        return Err(Error::LengthMismatch {
            expected: grid.len() * grid.len(),
            got: kernel_values.rows() * kernel_values.cols(),
        });
    }
    let kw = kernel_values.scale_rows(grid.weights());
    let mut term = kernel_values.clone();
    let mut gamma = kernel_values.clone();
    let mut coef = T::one();
    let mut prev = term.max_abs();
    let mut streak = 0usize;
    for n in 2..=n_terms {
        term = term.matmul(&kw);
        coef *= mu;
        let scaled = term.scaled(coef);
        let size = scaled.max_abs();
        if size > prev {
            streak += 1;
        } else {
            streak = 0;
        }
        if !size.is_finite() || streak >= DIVERGENCE_STREAK {
            return Err(Error::Divergence { iterations: n, streak });
        }
        prev = size;
        gamma = gamma.add(&scaled);
    }
    Ok(gamma)
}

/// `χ = F + μ∫ΓF`.
pub fn apply_resolvent<T: Real>(gamma: &Matrix<T>, mu: T, rhs: &[T], grid: &Grid<T>) -> Vec<T> {
    let wf: Vec<T> = rhs.iter().zip(grid.weights()).map(|(&f, &w)| f * w).collect();
    gamma
        .matvec(&wf)
        .iter()
        .zip(rhs)
        .map(|(&g, &f)| f + mu * g)
        .collect()
}
