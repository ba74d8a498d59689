//! Reformulation of a first-kind problem on `[0, 1]` as a coupled pair of
//! second-kind equations built from the Poisson kernel `h` and its resolvent
//! `H`, followed by recovery of the first-kind solution.
//!
//! The unknowns are `χ₁` (the free term that separates `ψ` from its smoothed
//! image) and `χ₂`, the periodic continuation of the auxiliary field on
//! `[−1, 0)`. With `λ = μ` the system reads
//!
//! ```text
//! χ₁ = μ∫(K₁₁χ₁ + K₁₂χ₂) + μf
//! χ₂ = μ∫(K₂₁χ₁ + K₂₂χ₂)
//! K₁₁ = −[H + k + μ∫k·H]   K₁₂ = −(μ/2)(h + H)
//! K₂₁ = H                  K₂₂ = μ∫H·k
//! ```
//!
//! and the solution is recovered as `ψ₁ = χ₁ + μ∫Hχ₁`.

use log::debug;

use crate::error::{Error, Result};
use crate::firstkind::{residual_with, FirstKindProblem};
use crate::grid::{sample_kernel, Grid, QuadRule};
use crate::kernels::{poisson_h_r, resolvent_dh_dlambda, resolvent_h, ResolventSpec, DEFAULT_RESOLVENT_TERMS};
use crate::linalg::{solve_checked, Lu, Matrix};
use crate::scalar::Real;
use crate::secondkind::{
    nystrom_solve, norm_m, operator_report, simple_iteration, ContractionReport, SecondKindProblem, RCOND_MIN,
};
use crate::tensor::{along_x_dense, TensorGrid, TensorOperator};

pub const DEFAULT_ADMISSIBILITY_TOL: f64 = 1e-8;

#[derive(Debug, Clone)]
pub struct TransformConfig<T> {
    pub r: T,
    /// Shared value of the coupling parameter and the resolvent parameter.
    pub mu: T,
    pub n_resolvent_terms: usize,
    pub grid: Grid<T>,
    pub admissibility_tol: T,
}

impl<T: Real> TransformConfig<T> {
    pub fn new(r: T, mu: T, n_resolvent_terms: usize, grid: Grid<T>) -> Result<Self> {
        if !(r.abs() > T::zero() && r.abs() < T::one()) {
            return Err(Error::InvalidParameter(format!("r = {r} must satisfy 0 < |r| < 1")));
        }
        if grid.a() != T::zero() || grid.b() != T::one() {
            return Err(Error::InvalidInterval {
                a: grid.a().to_f64_lossy(),
                b: grid.b().to_f64_lossy(),
            });
        }
        if n_resolvent_terms == 0 {
            return Err(Error::InvalidParameter("at least one resolvent term is required".into()));
        }
        Ok(Self {
            r,
            mu,
            n_resolvent_terms,
            grid,
            admissibility_tol: T::lit(DEFAULT_ADMISSIBILITY_TOL),
        })
    }

    /// `r = 0.5`, `μ = 0.3`, 60 resolvent terms, 129-point Simpson grid.
    pub fn standard() -> Self {
        let grid = Grid::new(T::zero(), T::one(), QuadRule::Simpson, 129).expect("valid grid");
        Self::new(T::lit(0.5), T::lit(0.3), DEFAULT_RESOLVENT_TERMS, grid).expect("valid config")
    }

    pub fn with_mu(mut self, mu: T) -> Self {
        self.mu = mu;
        self
    }

    pub fn with_grid(mut self, grid: Grid<T>) -> Result<Self> {
        Self::new(self.r, self.mu, self.n_resolvent_terms, grid).map(|mut c| {
            c.admissibility_tol = self.admissibility_tol;
            self = c;
            self
        })
    }

    pub fn resolvent(&self) -> Result<ResolventSpec<T>> {
        ResolventSpec::new(self.r, self.mu, self.n_resolvent_terms)
    }

    /// Resolvent values `H(xᵢ, xⱼ, μ)` on the grid.
    pub fn resolvent_matrix(&self) -> Result<Matrix<T>> {
        let spec = self.resolvent()?;
        sample_kernel(|x, xi| resolvent_h(x, xi, &spec), &self.grid, &self.grid)
    }

    /// Poisson kernel values `h(xᵢ, xⱼ)` on the grid.
    pub fn poisson_matrix(&self) -> Result<Matrix<T>> {
        let r = self.r;
        sample_kernel(|x, xi| poisson_h_r(x, xi, r), &self.grid, &self.grid)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Admissibility<T> {
    pub admissible: bool,
    /// Closest member of `{0.5·r⁻ⁿ} ∪ {r⁻ⁿ}`, `n = 0..=N`.
    pub nearest: T,
}

pub fn check_mu_admissible<T: Real>(config: &TransformConfig<T>) -> Admissibility<T> {
    let mut nearest = T::one();
    let mut best = (config.mu - nearest).abs();
    let mut inv_pow = T::one();
    for _ in 0..=config.n_resolvent_terms {
        for cand in [inv_pow, inv_pow / T::lit(2.0)] {
            let d = (config.mu - cand).abs();
            if d < best {
                best = d;
                nearest = cand;
            }
        }
        inv_pow /= config.r;
        if !inv_pow.is_finite() {
            break;
        }
    }
    Admissibility {
        admissible: best > config.admissibility_tol,
        nearest,
    }
}

fn require_admissible<T: Real>(config: &TransformConfig<T>) -> Result<()> {
    let adm = check_mu_admissible(config);
    if !adm.admissible {
        return Err(Error::InadmissibleMu {
            mu: config.mu.to_f64_lossy(),
            nearest: adm.nearest.to_f64_lossy(),
        });
    }
    Ok(())
}

fn require_unit_domain<T: Real>(p: &FirstKindProblem<T>) -> Result<()> {
    if p.domain != (T::zero(), T::one()) {
        return Err(Error::InvalidInterval {
            a: p.domain.0.to_f64_lossy(),
            b: p.domain.1.to_f64_lossy(),
        });
    }
    Ok(())
}

/// `∫ a(x, ζ) b(ζ, ξ) dζ` for kernel-value matrices under the grid quadrature.
fn compose<T: Real>(a: &Matrix<T>, b: &Matrix<T>, grid: &Grid<T>) -> Matrix<T> {
    a.scale_columns(grid.weights()).matmul(b)
}

/// `∫ a(x, ξ) v(ξ) dξ` at the grid nodes.
fn integrate_against<T: Real>(a: &Matrix<T>, v: &[T], grid: &Grid<T>) -> Vec<T> {
    let wv: Vec<T> = v.iter().zip(grid.weights()).map(|(&x, &w)| x * w).collect();
    a.matvec(&wv)
}

#[derive(Debug, Clone)]
pub struct AssembledSystem<T> {
    pub k11: Matrix<T>,
    pub k12: Matrix<T>,
    pub k21: Matrix<T>,
    pub k22: Matrix<T>,
    /// `μf` at the nodes.
    pub f1: Vec<T>,
    pub grid: Grid<T>,
    pub mu: T,
    /// Sampled `h` and `H`, kept for recovery and diagnostics.
    pub poisson: Matrix<T>,
    pub resolvent: Matrix<T>,
    /// Sampled data kernel `k`.
    pub data_kernel: Matrix<T>,
}

impl<T: Real> AssembledSystem<T> {
    pub fn as_problem(&self) -> Result<SecondKindProblem<T>> {
        SecondKindProblem::new(
            vec![self.grid.clone(), self.grid.clone()],
            vec![
                vec![self.k11.clone(), self.k12.clone()],
                vec![self.k21.clone(), self.k22.clone()],
            ],
            self.mu,
            vec![self.f1.clone(), vec![T::zero(); self.grid.len()]],
        )
    }
}

pub fn build_kernels<T: Real>(p: &FirstKindProblem<T>, config: &TransformConfig<T>) -> Result<AssembledSystem<T>> {
    require_unit_domain(p)?;
    require_admissible(config)?;
    let g = &config.grid;
    let mu = config.mu;
    let h = config.poisson_matrix()?;
    let big_h = config.resolvent_matrix()?;
    let k = sample_kernel(|x, xi| (p.kernel)(x, xi), g, g)?;
    let kh = compose(&k, &big_h, g);
    let hk = compose(&big_h, &k, g);
    let half_mu = mu / T::lit(2.0);
    let k11 = big_h.add(&k).add(&kh.scaled(mu)).scaled(-T::one());
    let k12 = h.add(&big_h).scaled(-half_mu);
    let k22 = hk.scaled(mu);
    let f1: Vec<T> = p.rhs_samples(g)?.iter().map(|&v| mu * v).collect();
    Ok(AssembledSystem {
        k11,
        k12,
        k21: big_h.clone(),
        k22,
        f1,
        grid: g.clone(),
        mu,
        poisson: h,
        resolvent: big_h,
        data_kernel: k,
    })
}

/// `l(x, ξ) = ∫₀¹ H(x, ζ, μ) k(ζ, ξ) dζ`, which equals `K₂₂ / μ`.
pub fn build_l_kernel<T: Real>(p: &FirstKindProblem<T>, config: &TransformConfig<T>) -> Result<Matrix<T>> {
    require_unit_domain(p)?;
    require_admissible(config)?;
    let g = &config.grid;
    let big_h = config.resolvent_matrix()?;
    let k = sample_kernel(|x, xi| (p.kernel)(x, xi), g, g)?;
    Ok(compose(&big_h, &k, g))
}

/// `ψ₁ = χ₁ + μ∫₀¹ H(x, ξ, μ) χ₁(ξ) dξ`.
pub fn recover_psi<T: Real>(chi1: &[T], config: &TransformConfig<T>) -> Result<Vec<T>> {
    config.grid.check_len(chi1.len())?;
    let big_h = config.resolvent_matrix()?;
    Ok(recover_with(&big_h, chi1, config.mu, &config.grid))
}

fn recover_with<T: Real>(big_h: &Matrix<T>, chi1: &[T], mu: T, grid: &Grid<T>) -> Vec<T> {
    integrate_against(big_h, chi1, grid)
        .iter()
        .zip(chi1)
        .map(|(&hc, &c)| c + mu * hc)
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TransformMethod<T> {
    Direct,
    Iterate { tol: T, max_iters: usize },
}

impl<T: Real> TransformMethod<T> {
    pub fn iterate() -> Self {
        TransformMethod::Iterate {
            tol: T::lit(1e-13),
            max_iters: 20_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransformResult<T> {
    pub chi1: Vec<T>,
    /// Periodic continuation of the auxiliary field on `[−1, 0)`.
    pub chi2: Vec<T>,
    pub psi1: Vec<T>,
    /// `‖Aψ₁ − f‖` under the grid quadrature.
    pub residual: T,
    /// Relative residual of the discrete second-kind system.
    pub system_residual: T,
    pub report: ContractionReport<T>,
    pub iterations: usize,
}

impl<T: Real> TransformResult<T> {
    /// `‖Aψ₁ − f‖ / ‖f‖`, or the absolute residual when `f = 0`.
    pub fn relative_residual(&self, f_norm: T) -> T {
        if f_norm > T::zero() {
            self.residual / f_norm
        } else {
            self.residual
        }
    }
}

pub fn solve_transform<T: Real>(
    p: &FirstKindProblem<T>,
    config: &TransformConfig<T>,
    method: TransformMethod<T>,
) -> Result<TransformResult<T>> {
    let sys = build_kernels(p, config)?;
    let problem = sys.as_problem()?;
    let report = norm_m(&problem);
    debug!(
        "transform system: M = {}, |mu| M = {}, contractive = {}",
        report.m, report.mu_times_m, report.contractive
    );
    let (blocks, iterations) = match method {
        TransformMethod::Direct => (nystrom_solve(&problem)?.blocks, 0),
        TransformMethod::Iterate { tol, max_iters } => {
            let zero = vec![vec![T::zero(); config.grid.len()]; 2];
            let out = simple_iteration(&problem, &zero, tol, max_iters)?;
            if !out.converged {
                return Err(Error::Divergence {
                    iterations: out.iterations,
                    streak: 0,
                });
            }
            (out.blocks, out.iterations)
        }
    };
    let system_residual = block_system_residual(&problem, &blocks);
    let chi1 = blocks[0].clone();
    let chi2 = blocks[1].clone();
    let psi1 = recover_with(&sys.resolvent, &chi1, config.mu, &config.grid);
    let op = p.operator(&config.grid)?;
    let f = p.rhs_samples(&config.grid)?;
    let residual = residual_with(&op, &f, &psi1, &config.grid);
    Ok(TransformResult {
        chi1,
        chi2,
        psi1,
        residual,
        system_residual,
        report,
        iterations,
    })
}

fn block_system_residual<T: Real>(problem: &SecondKindProblem<T>, blocks: &[Vec<T>]) -> T {
    let kx = problem.apply(blocks);
    let mut r2 = T::zero();
    let mut f2 = T::zero();
    for (b, g) in problem.grids.iter().enumerate() {
        for (idx, &w) in g.weights().iter().enumerate() {
            let r = blocks[b][idx] - kx[b][idx] - problem.rhs[b][idx];
            r2 += w * r * r;
            f2 += w * problem.rhs[b][idx] * problem.rhs[b][idx];
        }
    }
    if f2 > T::zero() {
        (r2 / f2).sqrt()
    } else {
        r2.sqrt()
    }
}

/// Which printed form of the single-equation route to solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AlternativeForm {
    /// `χ = μ∫(Q + k)χ − μf`.
    Body,
    /// `χ = μ∫(Q − k′)χ + μf` with `k′ = k + μ∫k·H`.
    Conclusions,
}

/// Resolvent-type kernel of `l` normalized so that
/// `(I − μ²·l)⁻¹ = I + μ·L`, i.e. `L = μ (I − μ² l)⁻¹ l` in operator form.
fn l_resolvent<T: Real>(l: &Matrix<T>, mu: T, grid: &Grid<T>) -> Result<Matrix<T>> {
    let n = grid.len();
    let mut m = Matrix::<T>::identity(n);
    let lw = l.scale_columns(grid.weights());
    let mu2 = mu * mu;
    for i in 0..n {
        for j in 0..n {
            m[(i, j)] -= mu2 * lw[(i, j)];
        }
    }
    let lu = Lu::factor(&m)?;
    let rcond = lu.rcond().to_f64_lossy();
    if rcond < RCOND_MIN {
        return Err(Error::Singular { rcond });
    }
    let mut out = Matrix::zeros(n, n);
    for j in 0..n {
        let col: Vec<T> = (0..n).map(|i| l[(i, j)]).collect();
        let s = lu.solve(&col);
        for i in 0..n {
            out[(i, j)] = mu * s[i];
        }
    }
    Ok(out)
}

/// `Q = −H − (μ/2)∫(h + H)(x, ζ)[H(ζ, ξ) + ∫L(ζ, θ)H(θ, ξ)dθ]dζ`.
pub fn build_q_kernel<T: Real>(p: &FirstKindProblem<T>, config: &TransformConfig<T>) -> Result<Matrix<T>> {
    let g = &config.grid;
    let mu = config.mu;
    let l = build_l_kernel(p, config)?;
    let big_l = l_resolvent(&l, mu, g)?;
    let big_h = config.resolvent_matrix()?;
    let h = config.poisson_matrix()?;
    let inner = big_h.add(&compose(&big_l, &big_h, g));
    let outer = compose(&h.add(&big_h), &inner, g);
    Ok(big_h.add(&outer.scaled(mu / T::lit(2.0))).scaled(-T::one()))
}

/// Single second-kind equation for `χ` with `Q` assembled from the resolvent
/// of `l`; `ψ` is recovered as in [`recover_psi`].
pub fn solve_alternative<T: Real>(
    p: &FirstKindProblem<T>,
    config: &TransformConfig<T>,
    form: AlternativeForm,
) -> Result<TransformResult<T>> {
    require_unit_domain(p)?;
    require_admissible(config)?;
    let g = &config.grid;
    let mu = config.mu;
    let q = build_q_kernel(p, config)?;
    let k = sample_kernel(|x, xi| (p.kernel)(x, xi), g, g)?;
    let big_h = config.resolvent_matrix()?;
    let f = p.rhs_samples(g)?;
    let (kernel, rhs): (Matrix<T>, Vec<T>) = match form {
        AlternativeForm::Body => (q.add(&k), f.iter().map(|&v| -mu * v).collect()),
        AlternativeForm::Conclusions => {
            let k_prime = k.add(&compose(&k, &big_h, g).scaled(mu));
            (q.sub(&k_prime), f.iter().map(|&v| mu * v).collect())
        }
    };
    let problem = SecondKindProblem::single(g.clone(), kernel, mu, rhs)?;
    let report = norm_m(&problem);
    let sol = nystrom_solve(&problem)?;
    let chi = sol.blocks[0].clone();
    let psi1 = recover_with(&big_h, &chi, mu, g);
    // auxiliary field φ₀ = μ∫[H + μ∫L·H]χ
    let l = build_l_kernel(p, config)?;
    let big_l = l_resolvent(&l, mu, g)?;
    let phi_kernel = big_h.add(&compose(&big_l, &big_h, g).scaled(mu));
    let chi2: Vec<T> = integrate_against(&phi_kernel, &chi, g).iter().map(|&v| mu * v).collect();
    let op = p.operator(g)?;
    let residual = residual_with(&op, &f, &psi1, g);
    Ok(TransformResult {
        chi1: chi,
        chi2,
        psi1,
        residual,
        system_residual: sol.residual,
        report,
        iterations: 0,
    })
}

/// `q(x) = μ[f − μ∫k ψ₁]`, the free term of the single-equation form
/// evaluated at a candidate solution. At `Aψ₁ = f` it equals `μ(1 − μ)f`.
pub fn exact_data_defect<T: Real>(p: &FirstKindProblem<T>, config: &TransformConfig<T>, psi1: &[T]) -> Result<Vec<T>> {
    config.grid.check_len(psi1.len())?;
    let op = p.operator(&config.grid)?;
    let f = p.rhs_samples(&config.grid)?;
    let mu = config.mu;
    Ok(op
        .matrix
        .matvec(psi1)
        .iter()
        .zip(&f)
        .map(|(&a, &fv)| mu * (fv - mu * a))
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorrectionTerms<T> {
    pub delta_phi0: Vec<T>,
    pub delta_kappa: Vec<T>,
    pub delta_psi: Vec<T>,
}

/// `t(x, ξ) = (μ²/4)[h − H − ∂H/∂λ]` at the grid nodes.
pub fn correction_kernel<T: Real>(config: &TransformConfig<T>) -> Result<Matrix<T>> {
    let spec = config.resolvent()?;
    let r = config.r;
    let c = config.mu * config.mu / T::lit(4.0);
    sample_kernel(
        |x, xi| c * (poisson_h_r(x, xi, r) - resolvent_h(x, xi, &spec) - resolvent_dh_dlambda(x, xi, &spec)),
        &config.grid,
        &config.grid,
    )
}

/// Fields induced by a data error `δf`: `δφ₀ = μ∫Hδf`,
/// `δκ = −(μ²/2)∫(h + H)δf` and `δψ = μ∫t·δf`.
pub fn error_correction_terms<T: Real>(delta_f: &[T], config: &TransformConfig<T>) -> Result<CorrectionTerms<T>> {
    let g = &config.grid;
    g.check_len(delta_f.len())?;
    let mu = config.mu;
    let big_h = config.resolvent_matrix()?;
    let h = config.poisson_matrix()?;
    let t = correction_kernel(config)?;
    let delta_phi0 = integrate_against(&big_h, delta_f, g).iter().map(|&v| mu * v).collect();
    let half = -mu * mu / T::lit(2.0);
    let delta_kappa = integrate_against(&h.add(&big_h), delta_f, g)
        .iter()
        .map(|&v| half * v)
        .collect();
    let delta_psi = integrate_against(&t, delta_f, g).iter().map(|&v| mu * v).collect();
    Ok(CorrectionTerms {
        delta_phi0,
        delta_kappa,
        delta_psi,
    })
}

/// Two-dimensional first-kind problem discretized on a tensor grid whose
/// x-direction is `[0, 1]`.
#[derive(Debug, Clone)]
pub struct TensorProblem<T> {
    pub grid: TensorGrid<T>,
    pub operator: TensorOperator<T>,
    pub rhs: Vec<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransformResult2d<T> {
    pub chi1: Vec<T>,
    pub chi2: Vec<T>,
    pub psi: Vec<T>,
    /// `‖Aψ − f‖` over the tensor grid.
    pub residual: T,
    /// `‖Aψ − f‖` along each x-line, one entry per y-node.
    pub line_residuals: Vec<T>,
    pub system_residual: T,
    pub report: ContractionReport<T>,
}

/// Weighted operator blocks of the two-dimensional system, with `H` and `h`
/// acting along x.
#[derive(Debug, Clone)]
pub struct OperatorBlocks<T> {
    pub b11: Matrix<T>,
    pub b12: Matrix<T>,
    pub b21: Matrix<T>,
    pub b22: Matrix<T>,
}

impl<T: Real> OperatorBlocks<T> {
    pub(crate) fn stacked(&self) -> Matrix<T> {
        let n = self.b11.rows();
        let mut m = Matrix::zeros(2 * n, 2 * n);
        m.set_block(0, 0, &self.b11);
        m.set_block(0, n, &self.b12);
        m.set_block(n, 0, &self.b21);
        m.set_block(n, n, &self.b22);
        m
    }
}

pub(crate) struct AlongX<T> {
    pub resolvent: Matrix<T>,
    pub poisson: Matrix<T>,
}

pub(crate) fn along_x_operators<T: Real>(config: &TransformConfig<T>, grid: &TensorGrid<T>) -> Result<AlongX<T>> {
    let w = config.grid.weights();
    Ok(AlongX {
        resolvent: along_x_dense(&config.resolvent_matrix()?.scale_columns(w), grid.ny()),
        poisson: along_x_dense(&config.poisson_matrix()?.scale_columns(w), grid.ny()),
    })
}

/// Blocks that do not involve the data operator.
pub(crate) fn data_free_blocks<T: Real>(ops: &AlongX<T>, mu: T) -> OperatorBlocks<T> {
    let n = ops.resolvent.rows();
    OperatorBlocks {
        b11: ops.resolvent.scaled(-T::one()),
        b12: ops.poisson.add(&ops.resolvent).scaled(-mu / T::lit(2.0)),
        b21: ops.resolvent.clone(),
        b22: Matrix::zeros(n, n),
    }
}

/// Blocks linear in the data operator `A`.
pub(crate) fn data_blocks<T: Real>(ops: &AlongX<T>, a: &Matrix<T>, mu: T) -> OperatorBlocks<T> {
    let n = a.rows();
    OperatorBlocks {
        b11: a.add(&a.matmul(&ops.resolvent).scaled(mu)).scaled(-T::one()),
        b12: Matrix::zeros(n, n),
        b21: Matrix::zeros(n, n),
        b22: ops.resolvent.matmul(a).scaled(mu),
    }
}

pub(crate) fn sum_blocks<T: Real>(a: &OperatorBlocks<T>, b: &OperatorBlocks<T>) -> OperatorBlocks<T> {
    OperatorBlocks {
        b11: a.b11.add(&b.b11),
        b12: a.b12.add(&b.b12),
        b21: a.b21.add(&b.b21),
        b22: a.b22.add(&b.b22),
    }
}

pub(crate) fn solve_blocks<T: Real>(blocks: &OperatorBlocks<T>, mu: T, rhs: &[T], weights: &[T]) -> Result<(Vec<T>, T)> {
    let op = blocks.stacked();
    let n2 = op.rows();
    let mut m = op.scaled(-mu);
    for i in 0..n2 {
        m[(i, i)] += T::one();
    }
    let x = solve_checked(&m, rhs, RCOND_MIN)?;
    let r: Vec<T> = m.matvec(&x).iter().zip(rhs).map(|(&a, &b)| a - b).collect();
    let wn = |v: &[T]| {
        v.iter()
            .zip(weights.iter().chain(weights.iter()))
            .fold(T::zero(), |s, (&a, &w)| s + w * a * a)
            .sqrt()
    };
    let fnorm = wn(rhs);
    let rel = if fnorm > T::zero() { wn(&r) / fnorm } else { wn(&r) };
    Ok((x, rel))
}

/// Transformed solve of `∫τ₁(x,y,ξ)ψ(ξ,y)dξ + ∫τ₂(x,y,η)ψ(x,η)dη = f`.
///
/// The resolvent acts along x. When the y-direction operator vanishes the
/// system decouples into the one-dimensional system on every y-line.
pub fn solve_transform_2d<T: Real>(problem: &TensorProblem<T>, config: &TransformConfig<T>) -> Result<TransformResult2d<T>> {
    require_admissible(config)?;
    let grid = &problem.grid;
    if grid.x.nodes() != config.grid.nodes() {
        return Err(Error::IncompatibleData(
            "tensor x-grid must coincide with the transform grid".into(),
        ));
    }
    grid.check_len(problem.rhs.len())?;
    let mu = config.mu;
    let ops = along_x_operators(config, grid)?;
    let a = problem.operator.dense();
    let blocks = sum_blocks(&data_free_blocks(&ops, mu), &data_blocks(&ops, &a, mu));
    let n = grid.len();
    let weights = grid.weights();
    let mut rhs: Vec<T> = problem.rhs.iter().map(|&v| mu * v).collect();
    rhs.extend(std::iter::repeat_n(T::zero(), n));
    let report = operator_report(&blocks.stacked(), &[weights.clone(), weights.clone()].concat(), mu);
    let (x, system_residual) = solve_blocks(&blocks, mu, &rhs, &weights)?;
    let chi1 = x[..n].to_vec();
    let chi2 = x[n..].to_vec();
    let hc = ops.resolvent.matvec(&chi1);
    let psi: Vec<T> = chi1.iter().zip(&hc).map(|(&c, &h)| c + mu * h).collect();
    let ap = problem.operator.apply(&psi);
    let res: Vec<T> = ap.iter().zip(&problem.rhs).map(|(&a, &b)| a - b).collect();
    let line_residuals = (0..grid.ny()).map(|j| grid.x.l2_norm(&grid.x_line(&res, j))).collect();
    Ok(TransformResult2d {
        chi1,
        chi2,
        psi,
        residual: grid.l2_norm(&res),
        line_residuals,
        system_residual,
        report,
    })
}
