//! The Poisson kernel, its truncated resolvent series, and canonical spectra.
//!
//! Two normalizations of the periodic family show up here. The resolvent
//! series is written in the unnormalized modes `1/√2, cos 2nπx, sin 2nπx`,
//! whose squared norm on `[0, 1]` is `1/2` (and `1` on `[-1, 1]`); the factor 2
//! in front of the series compensates. [`SpectralBasis`] always holds modes
//! that are orthonormal on its own interval, which is what the Picard
//! machinery needs.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::scalar::Real;

pub const DEFAULT_RESOLVENT_TERMS: usize = 60;
pub const SINGULAR_TERM_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoissonKernelSpec<T> {
    r: T,
}

impl<T: Real> PoissonKernelSpec<T> {
    pub fn new(r: T) -> Result<Self> {
        validate_r(r)?;
        Ok(Self { r })
    }

    pub fn r(&self) -> T {
        self.r
    }
}

fn validate_r<T: Real>(r: T) -> Result<()> {
    if !(r.abs() > T::zero() && r.abs() < T::one()) {
        return Err(Error::InvalidParameter(format!(
            "Poisson parameter r = {r} must satisfy 0 < |r| < 1"
        )));
    }
    Ok(())
}

/// `h(x, ξ) = (1 − r²) / (1 − 2r cos 2π(x − ξ) + r²)`.
pub fn poisson_h<T: Real>(x: T, xi: T, spec: &PoissonKernelSpec<T>) -> T {
    poisson_h_r(x, xi, spec.r)
}

pub(crate) fn poisson_h_r<T: Real>(x: T, xi: T, r: T) -> T {
    let c = (T::TAU() * (x - xi)).cos();
    (T::one() - r * r) / (T::one() - T::lit(2.0) * r * c + r * r)
}

/// Truncated resolvent `H(x, ξ, λ)` of the Poisson operator.
///
/// Construction fails when any retained term has `|1 − 2λrⁿ| < 1e-9`.
#[derive(Debug, Clone, PartialEq)]
pub struct ResolventSpec<T> {
    r: T,
    lambda: T,
    n_terms: usize,
    gains: Vec<T>,
    dgains: Vec<T>,
}

impl<T: Real> ResolventSpec<T> {
    pub fn new(r: T, lambda: T, n_terms: usize) -> Result<Self> {
        validate_r(r)?;
        if n_terms == 0 {
            return Err(Error::InvalidParameter("resolvent needs at least one term".into()));
        }
        if !lambda.is_finite() {
            return Err(Error::InvalidParameter(format!("lambda = {lambda} is not finite")));
        }
        let two = T::lit(2.0);
        let mut gains = Vec::with_capacity(n_terms);
        let mut dgains = Vec::with_capacity(n_terms);
        let mut rn = T::one();
        for n in 0..n_terms {
            let denom = T::one() - two * lambda * rn;
            if denom.abs() < T::lit(SINGULAR_TERM_TOL) {
                return Err(Error::SingularResolventTerm {
                    n,
                    lambda: lambda.to_f64_lossy(),
                    r: r.to_f64_lossy(),
                    denominator: denom.to_f64_lossy(),
                });
            }
            gains.push(rn / denom);
            dgains.push(rn * rn / (denom * denom));
            rn *= r;
        }
        Ok(Self {
            r,
            lambda,
            n_terms,
            gains,
            dgains,
        })
    }

    pub fn with_default_terms(r: T, lambda: T) -> Result<Self> {
        Self::new(r, lambda, DEFAULT_RESOLVENT_TERMS)
    }

    pub fn r(&self) -> T {
        self.r
    }

    pub fn lambda(&self) -> T {
        self.lambda
    }

    pub fn n_terms(&self) -> usize {
        self.n_terms
    }

    pub fn poisson(&self) -> PoissonKernelSpec<T> {
        PoissonKernelSpec { r: self.r }
    }

    /// `rⁿ / (1 − 2λrⁿ)`: the action of `∫₀¹ H(·, ξ) dξ` on the n-th periodic mode.
    pub fn mode_gain(&self, n: usize) -> T {
        if n < self.n_terms {
            self.gains[n]
        } else {
            T::zero()
        }
    }

    /// Evaluates `c₀ + 2 Σ_{n≥1} cₙ cos 2πn(x − ξ)` for coefficients `c`.
    fn cosine_series(coeffs: &[T], x: T, xi: T) -> T {
        let theta = T::TAU() * (x - xi);
        let c1 = theta.cos();
        let two = T::lit(2.0);
        let mut sum = coeffs[0];
        let mut prev = T::one();
        let mut cur = c1;
        for &c in &coeffs[1..] {
            sum += two * c * cur;
            let next = two * c1 * cur - prev;
            prev = cur;
            cur = next;
        }
        sum
    }
}

/// `H(x, ξ, λ) = 2 Σₙ rⁿ/(1 − 2λrⁿ) ψ̄ₙ(x)ψ̄ₙ(ξ)` truncated to the spec's terms.
pub fn resolvent_h<T: Real>(x: T, xi: T, spec: &ResolventSpec<T>) -> T {
    ResolventSpec::cosine_series(&spec.gains, x, xi)
}

/// `∂H/∂λ`, differentiated term by term.
pub fn resolvent_dh_dlambda<T: Real>(x: T, xi: T, spec: &ResolventSpec<T>) -> T {
    T::lit(2.0) * ResolventSpec::cosine_series(&spec.dgains, x, xi)
}

/// Largest defect of `λ∫₋₁¹ h(x,ζ)H(ζ,ξ,λ)dζ = H(x,ξ,λ) − h(x,ξ)` over all node
/// pairs of `grid`, which must cover `[-1, 1]`. The ζ-integral uses the same
/// grid; the integrand is periodic, so an endpoint-inclusive trapezoid grid is
/// spectrally accurate.
pub fn resolvent_identity_residual<T: Real>(spec: &ResolventSpec<T>, grid: &Grid<T>) -> Result<T> {
    let tol = T::lit(1e-12);
    if (grid.a() + T::one()).abs() > tol || (grid.b() - T::one()).abs() > tol {
        return Err(Error::InvalidParameter(
            "identity check needs a grid on [-1, 1]".into(),
        ));
    }
    let nodes = grid.nodes();
    let w = grid.weights();
    let n = nodes.len();
    let r = spec.r();
    let hmat: Vec<T> = (0..n * n).map(|k| poisson_h_r(nodes[k / n], nodes[k % n], r)).collect();
    let hres: Vec<T> = (0..n * n).map(|k| resolvent_h(nodes[k / n], nodes[k % n], spec)).collect();
    let mut worst = T::zero();
    for i in 0..n {
        for j in 0..n {
            let mut acc = T::zero();
            for z in 0..n {
                acc += w[z] * hmat[i * n + z] * hres[z * n + j];
            }
            let defect = spec.lambda() * acc - (hres[i * n + j] - hmat[i * n + j]);
            worst = worst.max(defect.abs());
        }
    }
    Ok(worst)
}

/// `k(x, ξ) = (1 − x)ξ` for `ξ ≤ x`, `x(1 − ξ)` otherwise, on `[0, 1]²`.
pub fn triangular_kernel<T: Real>(x: T, xi: T) -> Result<T> {
    let inside = |v: T| v >= T::zero() && v <= T::one();
    if !inside(x) || !inside(xi) {
        return Err(Error::InvalidParameter(format!(
            "triangular kernel arguments ({x}, {xi}) outside [0, 1]"
        )));
    }
    Ok(triangular_kernel_value(x, xi))
}

/// [`triangular_kernel`] without the domain check.
#[inline]
pub fn triangular_kernel_value<T: Real>(x: T, xi: T) -> T {
    if xi <= x {
        (T::one() - x) * xi
    } else {
        x * (T::one() - xi)
    }
}

/// Shared, thread-safe real function of one variable.
pub type Func<T> = Arc<dyn Fn(T) -> T + Send + Sync>;
/// Shared, thread-safe real function of two variables.
pub type Func2<T> = Arc<dyn Fn(T, T) -> T + Send + Sync>;

/// Characteristic numbers with eigenfunctions orthonormal on `interval`.
#[derive(Clone)]
pub struct SpectralBasis<T> {
    char_numbers: Vec<T>,
    eigenfunctions: Vec<Func<T>>,
    interval: (T, T),
}

impl<T: fmt::Debug> fmt::Debug for SpectralBasis<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SpectralBasis")
            .field("modes", &self.char_numbers.len())
            .field("interval", &self.interval)
            .finish()
    }
}

impl<T: Real> SpectralBasis<T> {
    pub fn new(char_numbers: Vec<T>, eigenfunctions: Vec<Func<T>>, interval: (T, T)) -> Result<Self> {
        if char_numbers.len() != eigenfunctions.len() {
            return Err(Error::LengthMismatch {
                expected: char_numbers.len(),
                got: eigenfunctions.len(),
            });
        }
        Ok(Self {
            char_numbers,
            eigenfunctions,
            interval,
        })
    }

    pub fn len(&self) -> usize {
        self.char_numbers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.char_numbers.is_empty()
    }

    pub fn interval(&self) -> (T, T) {
        self.interval
    }

    pub fn char_numbers(&self) -> &[T] {
        &self.char_numbers
    }

    pub fn char_number(&self, n: usize) -> T {
        self.char_numbers[n]
    }

    pub fn eigenfunction(&self, n: usize) -> &Func<T> {
        &self.eigenfunctions[n]
    }

    pub fn eval(&self, n: usize, x: T) -> T {
        (self.eigenfunctions[n])(x)
    }

    /// Characteristic numbers with repeats removed, in order of appearance.
    pub fn distinct_char_numbers(&self) -> Vec<T> {
        let mut out: Vec<T> = Vec::new();
        for &l in &self.char_numbers {
            let seen = out
                .iter()
                .any(|&m| (m - l).abs() <= T::lit(1e-12) * l.abs().max(T::one()));
            if !seen {
                out.push(l);
            }
        }
        out
    }

    /// Largest entry of `|G − I|` for the Gram matrix of the first `n_modes`
    /// eigenfunctions under `grid`'s quadrature.
    pub fn orthonormality_defect(&self, n_modes: usize, grid: &Grid<T>) -> T {
        let m = n_modes.min(self.len());
        let samples: Vec<Vec<T>> = (0..m).map(|k| grid.sample(|x| self.eval(k, x))).collect();
        let mut worst = T::zero();
        for i in 0..m {
            for j in i..m {
                let g = grid.inner(&samples[i], &samples[j]);
                let target = if i == j { T::one() } else { T::zero() };
                worst = worst.max((g - target).abs());
            }
        }
        worst
    }

    /// Samples of mode `n` on `grid`.
    pub fn sample_mode(&self, n: usize, grid: &Grid<T>) -> Vec<T> {
        grid.sample(|x| self.eval(n, x))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CanonicalKernel<T> {
    /// Kernel `(1 − x)ξ / x(1 − ξ)` on `[0, 1]`: λₙ = (nπ)², φₙ = √2 sin nπx.
    TriangularUnit,
    /// `(1/2π)(1 − r²)/(1 − 2r cos(x − ξ) + r²)` on `[-π, π]`: λ = r⁻ⁿ,
    /// each n ≥ 1 listed twice (cosine then sine).
    PoissonR(T),
    /// `h(x, ξ)` on `[-1, 1]`: λ = r⁻ⁿ/2, modes `1/√2, cos 2nπx, sin 2nπx`.
    PoissonOperator433(T),
}

/// The first `n_modes` modes of a kernel with a closed-form spectrum.
pub fn canonical_spectrum<T: Real>(which: CanonicalKernel<T>, n_modes: usize) -> Result<SpectralBasis<T>> {
    let mut lambdas = Vec::with_capacity(n_modes);
    let mut funcs: Vec<Func<T>> = Vec::with_capacity(n_modes);
    match which {
        CanonicalKernel::TriangularUnit => {
            let s2 = T::SQRT_2();
            for n in 1..=n_modes {
                let w = T::PI() * T::from_usize_lossy(n);
                lambdas.push(w * w);
                funcs.push(Arc::new(move |x: T| s2 * (w * x).sin()));
            }
            SpectralBasis::new(lambdas, funcs, (T::zero(), T::one()))
        }
        CanonicalKernel::PoissonR(r) => {
            validate_r(r)?;
            let c0 = T::one() / T::TAU().sqrt();
            let c = T::one() / T::PI().sqrt();
            push_periodic(&mut lambdas, &mut funcs, n_modes, T::one(), r, T::one(), c0, c);
            SpectralBasis::new(lambdas, funcs, (-T::PI(), T::PI()))
        }
        CanonicalKernel::PoissonOperator433(r) => {
            validate_r(r)?;
            let c0 = T::FRAC_1_SQRT_2();
            push_periodic(&mut lambdas, &mut funcs, n_modes, T::lit(0.5), r, T::TAU(), c0, T::one());
            SpectralBasis::new(lambdas, funcs, (-T::one(), T::one()))
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn push_periodic<T: Real>(
    lambdas: &mut Vec<T>,
    funcs: &mut Vec<Func<T>>,
    n_modes: usize,
    scale: T,
    r: T,
    freq: T,
    c0: T,
    c: T,
) {
    if n_modes == 0 {
        return;
    }
    lambdas.push(scale);
    funcs.push(Arc::new(move |_x: T| c0));
    let mut n = 1usize;
    while lambdas.len() < n_modes {
        let lam = scale / r.powi(n as i32);
        let w = freq * T::from_usize_lossy(n);
        lambdas.push(lam);
        funcs.push(Arc::new(move |x: T| c * (w * x).cos()));
        if lambdas.len() < n_modes {
            lambdas.push(lam);
            funcs.push(Arc::new(move |x: T| c * (w * x).sin()));
        }
        n += 1;
    }
}

/// Mercer partial sum `Σ_{n < n_terms} φₙ(x)φₙ(ξ)/λₙ`.
pub fn mercer_reconstruct<T: Real>(basis: &SpectralBasis<T>, n_terms: usize, x: T, xi: T) -> T {
    (0..n_terms.min(basis.len()))
        .map(|n| basis.eval(n, x) * basis.eval(n, xi) / basis.char_number(n))
        .sum()
}

/// Unnormalized periodic modes used by the resolvent series.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PeriodicMode {
    /// `1/√2`
    Constant,
    /// `cos 2nπx`
    Cos(usize),
    /// `sin 2nπx`
    Sin(usize),
}

impl PeriodicMode {
    pub fn index(self) -> usize {
        match self {
            PeriodicMode::Constant => 0,
            PeriodicMode::Cos(n) | PeriodicMode::Sin(n) => n,
        }
    }

    pub fn eval<T: Real>(self, x: T) -> T {
        match self {
            PeriodicMode::Constant => T::FRAC_1_SQRT_2(),
            PeriodicMode::Cos(n) => (T::TAU() * T::from_usize_lossy(n) * x).cos(),
            PeriodicMode::Sin(n) => (T::TAU() * T::from_usize_lossy(n) * x).sin(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{build_grid, QuadRule};
    use approx::assert_relative_eq;

    #[test]
    fn poisson_h_diagonal_and_period() {
        let spec = PoissonKernelSpec::new(0.5).unwrap();
        assert_relative_eq!(poisson_h(0.3, 0.3, &spec), 3.0, epsilon = 1e-14);
        for &(x, xi) in &[(0.1, 0.7), (0.45, -0.2), (0.9, 0.05)] {
            assert_relative_eq!(poisson_h(x + 1.0, xi, &spec), poisson_h(x, xi, &spec), epsilon = 1e-13);
            assert_relative_eq!(poisson_h(xi, x, &spec), poisson_h(x, xi, &spec), epsilon = 1e-15);
        }
        assert!(PoissonKernelSpec::new(1.0).is_err());
        assert!(PoissonKernelSpec::new(0.0).is_err());
    }

    #[test]
    fn resolvent_at_zero_lambda_is_poisson() {
        let spec = ResolventSpec::new(0.5f64, 0.0, 60).unwrap();
        let p = spec.poisson();
        let tail = 4.0 * 0.5f64.powi(60) / 0.5;
        for &(x, xi) in &[(0.0, 0.0), (0.2, 0.7), (0.5, 0.1)] {
            assert!((resolvent_h(x, xi, &spec) - poisson_h(x, xi, &p)).abs() <= tail.max(1e-14));
        }
    }

    #[test]
    fn resolvent_symmetry_exact() {
        let spec = ResolventSpec::new(0.5f64, 0.3, 60).unwrap();
        let a = resolvent_h(0.2, 0.7, &spec);
        assert!(a.is_finite());
        assert_eq!(a, resolvent_h(0.7, 0.2, &spec));
        assert_eq!(resolvent_dh_dlambda(0.2, 0.7, &spec), resolvent_dh_dlambda(0.7, 0.2, &spec));
    }

    #[test]
    fn singular_term_rejected() {
        // 1 - 2*0.5*1 = 0 at n = 0
        assert!(matches!(
            ResolventSpec::new(0.5, 0.5, 10),
            Err(Error::SingularResolventTerm { n: 0, .. })
        ));
        // n = 2: 2*lambda*r^2 = 1 => lambda = 2
        assert!(matches!(
            ResolventSpec::new(0.5, 2.0, 10),
            Err(Error::SingularResolventTerm { n: 2, .. })
        ));
    }

    #[test]
    fn derivative_at_zero_is_doubled_poisson_of_r_squared() {
        let spec = ResolventSpec::new(0.5, 0.0, 60).unwrap();
        let p2 = PoissonKernelSpec::new(0.25).unwrap();
        for &(x, xi) in &[(0.1, 0.3), (0.8, 0.25)] {
            assert_relative_eq!(
                resolvent_dh_dlambda(x, xi, &spec),
                2.0 * poisson_h(x, xi, &p2),
                epsilon = 1e-13
            );
        }
    }

    #[test]
    fn identity_residual_small_and_truncation_visible() {
        let g = build_grid(-1.0, 1.0, QuadRule::Trapezoid, 64).unwrap();
        let full = ResolventSpec::new(0.5, 0.3, 60).unwrap();
        let short = ResolventSpec::new(0.5, 0.3, 5).unwrap();
        let rf = resolvent_identity_residual(&full, &g).unwrap();
        let rs = resolvent_identity_residual(&short, &g).unwrap();
        assert!(rf <= 1e-8, "{rf}");
        assert!(rs > rf);
        let zero = ResolventSpec::new(0.5, 0.0, 60).unwrap();
        assert!(resolvent_identity_residual(&zero, &g).unwrap() <= 1e-13);
    }

    #[test]
    fn triangular_values() {
        assert_eq!(triangular_kernel(0.5, 0.5).unwrap(), 0.25);
        assert_eq!(triangular_kernel(0.4, 0.0).unwrap(), 0.0);
        assert_eq!(triangular_kernel(0.4, 1.0).unwrap(), 0.0);
        assert_relative_eq!(triangular_kernel(0.3, 0.7).unwrap(), 0.09, epsilon = 1e-16);
        assert_relative_eq!(triangular_kernel(0.7, 0.3).unwrap(), 0.09, epsilon = 1e-16);
        assert!(triangular_kernel(1.2, 0.3).is_err());
    }

    #[test]
    fn canonical_char_numbers() {
        let t = canonical_spectrum::<f64>(CanonicalKernel::TriangularUnit, 3).unwrap();
        let pi2 = std::f64::consts::PI.powi(2);
        assert_relative_eq!(t.char_number(0), pi2);
        assert_relative_eq!(t.char_number(2), 9.0 * pi2);
        let p = canonical_spectrum(CanonicalKernel::PoissonR(0.5), 7).unwrap();
        assert_eq!(p.distinct_char_numbers(), vec![1.0, 2.0, 4.0, 8.0]);
        let q = canonical_spectrum(CanonicalKernel::PoissonOperator433(0.5), 7).unwrap();
        assert_eq!(q.distinct_char_numbers(), vec![0.5, 1.0, 2.0, 4.0]);
        assert!(canonical_spectrum(CanonicalKernel::PoissonR(1.5), 3).is_err());
    }

    #[test]
    fn mercer_single_term_value() {
        let t = canonical_spectrum::<f64>(CanonicalKernel::TriangularUnit, 1).unwrap();
        let v = mercer_reconstruct(&t, 1, 0.5, 0.5);
        assert_relative_eq!(v, 2.0 / std::f64::consts::PI.powi(2), epsilon = 1e-15);
    }

    #[test]
    fn mercer_of_operator_spectrum_is_poisson() {
        let q = canonical_spectrum(CanonicalKernel::PoissonOperator433(0.5), 121).unwrap();
        let p = PoissonKernelSpec::new(0.5).unwrap();
        for &(x, xi) in &[(0.1, 0.4), (-0.3, 0.6), (0.0, 0.0)] {
            assert_relative_eq!(mercer_reconstruct(&q, 121, x, xi), poisson_h(x, xi, &p), epsilon = 1e-13);
        }
    }
}
