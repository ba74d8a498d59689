//! First-kind problems `∫ₐᵇ k(x, ξ) ψ(ξ) dξ = f(x)` and the tools that act on
//! them directly: Picard series, symmetrization, residuals and noise.

use std::fmt;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::grid::{discretize_kernel, DiscreteOperator, Grid};
use crate::kernels::{triangular_kernel_value, Func, Func2, SpectralBasis};
use crate::linalg::Matrix;
use crate::scalar::Real;

#[derive(Clone)]
pub struct FirstKindProblem<T> {
    pub kernel: Func2<T>,
    pub f: Func<T>,
    pub domain: (T, T),
    pub exact_solution: Option<Func<T>>,
}

impl<T: fmt::Debug> fmt::Debug for FirstKindProblem<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FirstKindProblem")
            .field("domain", &self.domain)
            .field("has_exact_solution", &self.exact_solution.is_some())
            .finish()
    }
}

impl<T: Real> FirstKindProblem<T> {
    pub fn new(
        kernel: impl Fn(T, T) -> T + Send + Sync + 'static,
        f: impl Fn(T) -> T + Send + Sync + 'static,
        domain: (T, T),
    ) -> Self {
        Self {
            kernel: Arc::new(kernel),
            f: Arc::new(f),
            domain,
            exact_solution: None,
        }
    }

    pub fn with_exact(mut self, exact: impl Fn(T) -> T + Send + Sync + 'static) -> Self {
        self.exact_solution = Some(Arc::new(exact));
        self
    }

    /// Triangular kernel on `[0, 1]` with `f = sin(mπx)/(mπ)²`, whose solution
    /// is `sin(mπx)`.
    pub fn eigen_test(m: usize) -> Self {
        let w = T::PI() * T::from_usize_lossy(m);
        Self::new(triangular_kernel_value, move |x: T| (w * x).sin() / (w * w), (T::zero(), T::one()))
            .with_exact(move |x: T| (w * x).sin())
    }

    /// Same problem with a different right-hand side.
    pub fn with_rhs(&self, f: impl Fn(T) -> T + Send + Sync + 'static) -> Self {
        Self {
            kernel: self.kernel.clone(),
            f: Arc::new(f),
            domain: self.domain,
            exact_solution: None,
        }
    }

    pub fn operator(&self, grid: &Grid<T>) -> Result<DiscreteOperator<T>> {
        let k = self.kernel.clone();
        discretize_kernel(move |x, xi| k(x, xi), grid, grid)
    }

    pub fn rhs_samples(&self, grid: &Grid<T>) -> Result<Vec<T>> {
        let v = grid.sample(|x| (self.f)(x));
        if let Some(i) = v.iter().position(|y| !y.is_finite()) {
            return Err(Error::IncompatibleData(format!(
                "right-hand side is not finite at x = {}",
                grid.nodes()[i]
            )));
        }
        Ok(v)
    }

    pub fn exact_samples(&self, grid: &Grid<T>) -> Option<Vec<T>> {
        self.exact_solution.as_ref().map(|e| grid.sample(|x| e(x)))
    }
}

/// Truncated Picard series `ψ = Σ αₙλₙφₙ`, evaluated on demand.
#[derive(Debug, Clone)]
pub struct PicardSeries<T> {
    basis: SpectralBasis<T>,
    /// `αₙλₙ` for each retained mode.
    pub coefficients: Vec<T>,
}

impl<T: Real> PicardSeries<T> {
    pub fn eval(&self, x: T) -> T {
        self.coefficients
            .iter()
            .enumerate()
            .map(|(n, &c)| c * self.basis.eval(n, x))
            .sum()
    }

    pub fn sample(&self, grid: &Grid<T>) -> Vec<T> {
        grid.sample(|x| self.eval(x))
    }
}

fn fourier_coefficients<T: Real>(basis: &SpectralBasis<T>, f: &dyn Fn(T) -> T, n_terms: usize, grid: &Grid<T>) -> Vec<T> {
    let fs = grid.sample(f);
    (0..n_terms.min(basis.len()))
        .map(|n| grid.inner(&fs, &basis.sample_mode(n, grid)))
        .collect()
}

/// Picard solution with `αₙ = ∫ f φₙ` taken by `grid`'s quadrature.
pub fn picard_solve<T: Real>(
    basis: &SpectralBasis<T>,
    f: &dyn Fn(T) -> T,
    n_terms: usize,
    grid: &Grid<T>,
) -> PicardSeries<T> {
    let alpha = fourier_coefficients(basis, f, n_terms, grid);
    let coefficients = alpha
        .iter()
        .enumerate()
        .map(|(n, &a)| a * basis.char_number(n))
        .collect();
    PicardSeries {
        basis: basis.clone(),
        coefficients,
    }
}

/// Partial sums of `Σ αₙ²λₙ²`.
///
/// `last_decade_growth` is `S_N / S_{⌊0.9N⌋}`: close to 1 when the sums have
/// levelled off, visibly above 1 when they keep growing. It is a diagnostic
/// only; finitely many terms cannot decide convergence.
#[derive(Debug, Clone, PartialEq)]
pub struct PicardDiagnostic<T> {
    pub partial_sums: Vec<T>,
    pub coefficients: Vec<T>,
    pub last_decade_growth: T,
}

pub fn picard_condition<T: Real>(
    basis: &SpectralBasis<T>,
    f: &dyn Fn(T) -> T,
    n_terms: usize,
    grid: &Grid<T>,
) -> PicardDiagnostic<T> {
    let coefficients = fourier_coefficients(basis, f, n_terms, grid);
    picard_diagnostic_from(basis, coefficients)
}

/// Diagnostic for externally supplied coefficients `αₙ`.
pub fn picard_diagnostic_from<T: Real>(basis: &SpectralBasis<T>, coefficients: Vec<T>) -> PicardDiagnostic<T> {
    let mut partial_sums = Vec::with_capacity(coefficients.len());
    let mut s = T::zero();
    for (n, &a) in coefficients.iter().enumerate() {
        let t = a * basis.char_number(n);
        s += t * t;
        partial_sums.push(s);
    }
    let last_decade_growth = match partial_sums.len() {
        0 => T::one(),
        len => {
            let last = partial_sums[len - 1];
            let earlier_idx = ((len as f64) * 0.9).floor() as usize;
            let earlier = partial_sums[earlier_idx.saturating_sub(1).min(len - 1)];
            if earlier > T::zero() {
                last / earlier
            } else if last == T::zero() {
                T::one()
            } else {
                T::infinity()
            }
        }
    };
    PicardDiagnostic {
        partial_sums,
        coefficients,
        last_decade_growth,
    }
}

/// Multiplies through by the adjoint: `k′(x,ξ) = ∫k(ζ,x)k(ζ,ξ)dζ`,
/// `f′(x) = ∫k(ξ,x)f(ξ)dξ`, with integrals over `grid`.
pub fn symmetrize<T: Real>(p: &FirstKindProblem<T>, grid: &Grid<T>) -> FirstKindProblem<T> {
    let nodes: Arc<[T]> = grid.nodes().into();
    let weights: Arc<[T]> = grid.weights().into();
    let k = p.kernel.clone();
    let f = p.f.clone();
    let (kn, kw, kk) = (nodes.clone(), weights.clone(), k.clone());
    let kernel = move |x: T, xi: T| {
        kn.iter()
            .zip(kw.iter())
            .fold(T::zero(), |s, (&z, &w)| s + w * kk(z, x) * kk(z, xi))
    };
    let rhs = move |x: T| {
        nodes
            .iter()
            .zip(weights.iter())
            .fold(T::zero(), |s, (&z, &w)| s + w * k(z, x) * f(z))
    };
    FirstKindProblem {
        kernel: Arc::new(kernel),
        f: Arc::new(rhs),
        domain: p.domain,
        exact_solution: p.exact_solution.clone(),
    }
}

/// `W^{1/2} K W^{1/2}` for a kernel-value matrix `K` on `grid`: symmetric when
/// `K` is, with the same spectrum as the Nyström matrix `K W`.
pub fn weight_symmetrized<T: Real>(kernel_values: &Matrix<T>, grid: &Grid<T>) -> Matrix<T> {
    let s: Vec<T> = grid.weights().iter().map(|w| w.sqrt()).collect();
    kernel_values.scale_rows(&s).scale_columns(&s)
}

/// `‖Aψ − f‖` in `L₂(a, b)` under `grid`'s quadrature.
pub fn residual_norm<T: Real>(p: &FirstKindProblem<T>, psi: &[T], grid: &Grid<T>) -> Result<T> {
    grid.check_len(psi.len())?;
    let op = p.operator(grid)?;
    let f = p.rhs_samples(grid)?;
    Ok(residual_with(&op, &f, psi, grid))
}

pub(crate) fn residual_with<T: Real>(op: &DiscreteOperator<T>, f: &[T], psi: &[T], grid: &Grid<T>) -> T {
    let r: Vec<T> = op
        .matrix
        .matvec(psi)
        .iter()
        .zip(f)
        .map(|(&a, &b)| a - b)
        .collect();
    grid.l2_norm(&r)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoiseShape {
    /// Standard-normal coefficients on the first `n_modes` sine modes.
    WhiteFourier { n_modes: usize },
    /// The single sine mode `m`.
    SingleMode { m: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    pub target_l2_norm: f64,
    pub seed: u64,
    pub shape: NoiseShape,
}

/// Adds a sine-series perturbation `e` rescaled so that `‖e‖ = target` under
/// `grid`'s quadrature. Deterministic for a given seed.
pub fn inject_noise<T: Real>(f: &[T], spec: &NoiseSpec, grid: &Grid<T>) -> Result<Vec<T>> {
    if f.is_empty() {
        return Err(Error::InvalidParameter("cannot perturb an empty sample vector".into()));
    }
    grid.check_len(f.len())?;
    if !(spec.target_l2_norm >= 0.0) || !spec.target_l2_norm.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "noise norm {} must be finite and non-negative",
            spec.target_l2_norm
        )));
    }
    if spec.target_l2_norm == 0.0 {
        return Ok(f.to_vec());
    }
    let e = noise_shape_samples(spec, grid);
    let norm = grid.l2_norm(&e);
    if !(norm > T::zero()) {
        return Err(Error::DegenerateVector);
    }
    let scale = T::lit(spec.target_l2_norm) / norm;
    Ok(f.iter().zip(&e).map(|(&fv, &ev)| fv + scale * ev).collect())
}

fn noise_shape_samples<T: Real>(spec: &NoiseSpec, grid: &Grid<T>) -> Vec<T> {
    let (a, b) = (grid.a(), grid.b());
    let mode = move |m: usize, x: T| {
        T::SQRT_2() * (T::PI() * T::from_usize_lossy(m) * (x - a) / (b - a)).sin()
    };
    match spec.shape {
        NoiseShape::SingleMode { m } => grid.sample(|x| mode(m, x)),
        NoiseShape::WhiteFourier { n_modes } => {
            let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
            let coeffs: Vec<T> = (0..n_modes)
                .map(|_| {
                    let c: f64 = StandardNormal.sample(&mut rng);
                    T::lit(c)
                })
                .collect();
            grid.sample(|x| {
                coeffs
                    .iter()
                    .enumerate()
                    .fold(T::zero(), |s, (i, &c)| s + c * mode(i + 1, x))
            })
        }
    }
}

/// Differentiated Volterra equation
/// `ψ(x) + ∫ₐˣ [∂ₓk(x,ξ)/k(x,x)] ψ(ξ) dξ = f′(x)/k(x,x)` on a grid.
#[derive(Debug, Clone)]
pub struct VolterraProblem<T> {
    pub grid: Grid<T>,
    /// Lower-triangular operator with cumulative weights folded in.
    pub matrix: Matrix<T>,
    pub rhs: Vec<T>,
}

impl<T: Real> VolterraProblem<T> {
    /// Forward substitution.
    pub fn solve(&self) -> Vec<T> {
        let n = self.rhs.len();
        let mut psi = vec![T::zero(); n];
        for i in 0..n {
            let row = self.matrix.row(i);
            let mut s = self.rhs[i];
            for j in 0..i {
                s -= row[j] * psi[j];
            }
            psi[i] = s / (T::one() + row[i]);
        }
        psi
    }
}

/// Builds the differentiated second-kind Volterra problem. `dk_dx` overrides
/// the central-difference approximation of `∂ₓk`.
pub fn volterra_differentiate<T: Real>(
    k: &dyn Fn(T, T) -> T,
    f_prime: &dyn Fn(T) -> T,
    grid: &Grid<T>,
    dk_dx: Option<&dyn Fn(T, T) -> T>,
) -> Result<VolterraProblem<T>> {
    let c = grid.cumulative_weights()?;
    let x = grid.nodes();
    let n = x.len();
    let step_base = T::epsilon().cbrt();
    let deriv = |xx: T, xi: T| -> T {
        match dk_dx {
            Some(d) => d(xx, xi),
            None => {
                let h = step_base * xx.abs().max(T::one());
                (k(xx + h, xi) - k(xx - h, xi)) / (h + h)
            }
        }
    };
    let mut diag = Vec::with_capacity(n);
    for &xi in x {
        let d = k(xi, xi);
        if !d.is_finite() || d.abs() < T::lit(1e-12) {
            return Err(Error::IncompatibleData(format!(
                "k(x, x) = {d} vanishes or is not finite at x = {xi}"
            )));
        }
        diag.push(d);
    }
    let mut m = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            if c[(i, j)] != T::zero() {
                m[(i, j)] = c[(i, j)] * deriv(x[i], x[j]) / diag[i];
            }
        }
    }
    let rhs = x.iter().zip(&diag).map(|(&xi, &d)| f_prime(xi) / d).collect();
    Ok(VolterraProblem {
        grid: grid.clone(),
        matrix: m,
        rhs,
    })
}
