use std::fmt;

use crate::classical::{DiscreteSystem, MethodResult};
use crate::error::{Error, Result};
use crate::firstkind::FirstKindProblem;
use crate::grid::Grid;
use crate::kernels::{Func, SpectralBasis};
use crate::linalg::{solve_checked, Matrix};
use crate::scalar::Real;

pub(crate) const RCOND_MIN: f64 = 1e-12;

#[derive(Clone)]
pub enum RegularizationVariant<T> {
    /// `αψ + Aψ = f`
    Lavrentiev,
    /// `α p₀(x) ψ + Aψ = f` with a non-negative weight `p₀`.
    StabilizedP0(Func<T>),
}

impl<T> fmt::Debug for RegularizationVariant<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RegularizationVariant::Lavrentiev => f.write_str("Lavrentiev"),
            RegularizationVariant::StabilizedP0(_) => f.write_str("StabilizedP0(..)"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct RegularizationParams<T> {
    pub alpha: T,
    pub variant: RegularizationVariant<T>,
}

impl<T: Real> RegularizationParams<T> {
    pub fn lavrentiev(alpha: T) -> Self {
        Self {
            alpha,
            variant: RegularizationVariant::Lavrentiev,
        }
    }

    pub fn summary(&self) -> String {
        match self.variant {
            RegularizationVariant::Lavrentiev => format!("alpha={} variant=lavrentiev", self.alpha),
            RegularizationVariant::StabilizedP0(_) => format!("alpha={} variant=stabilized_p0", self.alpha),
        }
    }
}

pub fn lavrentiev_solve<T: Real>(
    p: &FirstKindProblem<T>,
    grid: &Grid<T>,
    params: &RegularizationParams<T>,
) -> Result<MethodResult<T>> {
    lavrentiev_solve_discrete(&DiscreteSystem::new(p, grid)?, params)
}

/// Dense solve of `(α P₀ + A) ψ = f`.
pub fn lavrentiev_solve_discrete<T: Real>(
    sys: &DiscreteSystem<T>,
    params: &RegularizationParams<T>,
) -> Result<MethodResult<T>> {
    if !(params.alpha > T::zero()) {
        return Err(Error::InvalidParameter(format!("alpha = {} must be positive", params.alpha)));
    }
    let n = sys.grid.len();
    let diag: Vec<T> = match &params.variant {
        RegularizationVariant::Lavrentiev => vec![params.alpha; n],
        RegularizationVariant::StabilizedP0(p0) => {
            let mut d = Vec::with_capacity(n);
            for &x in sys.grid.nodes() {
                let v = p0(x);
                if !(v >= T::zero()) || !v.is_finite() {
                    return Err(Error::InvalidParameter(format!("p0({x}) = {v} must be finite and non-negative")));
                }
                d.push(params.alpha * v);
            }
            d
        }
    };
    let mut m: Matrix<T> = sys.a.clone();
    for (i, &d) in diag.iter().enumerate() {
        m[(i, i)] += d;
    }
    let psi = solve_checked(&m, &sys.f, RCOND_MIN)?;
    let res = sys.residual(&psi);
    Ok(MethodResult {
        solution: psi,
        residual_history: vec![res],
        iterations_used: 0,
        converged: true,
        params_echo: params.summary(),
    })
}

const BISECTION_STEPS: usize = 60;

/// Minimizes `‖Aψ − f‖` over `‖ψ‖ ≤ R` in the span of the first `n_terms`
/// modes of `basis`.
///
/// With `cₙ = ∫ f φₙ`, the unconstrained Picard coefficients are `cₙλₙ`. When
/// their norm exceeds `R`, the constrained minimizer has coefficients
/// `cₙλₙ / (1 + νλₙ²)`, and the multiplier `ν > 0` is found by 60 bisection
/// steps on the decreasing map `ν ↦ ‖ψ(ν)‖`, returning the midpoint.
pub fn quasisolution_solve<T: Real>(
    basis: &SpectralBasis<T>,
    f: &dyn Fn(T) -> T,
    radius: T,
    n_terms: usize,
    grid: &Grid<T>,
) -> Result<MethodResult<T>> {
    if !(radius > T::zero()) {
        return Err(Error::InvalidParameter(format!("radius {radius} must be positive")));
    }
    let m = n_terms.min(basis.len());
    let fs = grid.sample(f);
    let modes: Vec<Vec<T>> = (0..m).map(|k| basis.sample_mode(k, grid)).collect();
    let c: Vec<T> = modes.iter().map(|phi| grid.inner(&fs, phi)).collect();
    let lam: Vec<T> = (0..m).map(|k| basis.char_number(k)).collect();
    let coeffs_at = |nu: T| -> Vec<T> {
        c.iter()
            .zip(&lam)
            .map(|(&ck, &lk)| ck * lk / (T::one() + nu * lk * lk))
            .collect()
    };
    let norm_of = |a: &[T]| a.iter().fold(T::zero(), |s, &v| s + v * v).sqrt();

    let picard = coeffs_at(T::zero());
    let (coeffs, nu, iterations) = if norm_of(&picard) <= radius {
        (picard, T::zero(), 0)
    } else {
        let cnorm = norm_of(&c);
        let lmin = lam.iter().fold(T::infinity(), |a, &b| a.min(b.abs()));
        if !(lmin > T::zero()) {
            return Err(Error::BracketFailure("basis has a zero characteristic number".into()));
        }
        let mut hi = T::lit(2.0) * cnorm / (radius * lmin);
        let mut grow = 0;
        while norm_of(&coeffs_at(hi)) > radius {
            hi *= T::lit(2.0);
            grow += 1;
            if grow > 200 || !hi.is_finite() {
                return Err(Error::BracketFailure(format!(
                    "no multiplier up to {hi} brings the norm below {radius}"
                )));
            }
        }
        let mut lo = T::zero();
        for _ in 0..BISECTION_STEPS {
            let mid = (lo + hi) / T::lit(2.0);
            if norm_of(&coeffs_at(mid)) > radius {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let mid = (lo + hi) / T::lit(2.0);
        (coeffs_at(mid), mid, BISECTION_STEPS)
    };

    let mut psi = vec![T::zero(); grid.len()];
    for (a, phi) in coeffs.iter().zip(&modes) {
        for (p, &v) in psi.iter_mut().zip(phi) {
            *p += *a * v;
        }
    }
    // residual in the spectral model: Aφₙ = φₙ/λₙ
    let mut model = vec![T::zero(); grid.len()];
    for ((a, phi), &l) in coeffs.iter().zip(&modes).zip(&lam) {
        for (r, &v) in model.iter_mut().zip(phi) {
            *r += *a / l * v;
        }
    }
    let resid: Vec<T> = model.iter().zip(&fs).map(|(&a, &b)| a - b).collect();
    Ok(MethodResult {
        solution: psi,
        residual_history: vec![grid.l2_norm(&resid)],
        iterations_used: iterations,
        converged: true,
        params_echo: format!("radius={radius} n_terms={m} multiplier={nu}"),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{build_grid, QuadRule};
    use crate::kernels::{canonical_spectrum, CanonicalKernel};
    use crate::linalg::max_abs_diff;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;
    use std::sync::Arc;

    #[test]
    fn lavrentiev_mode_one_coefficient() {
        let g = build_grid(0.0, 1.0, QuadRule::Simpson, 257).unwrap();
        let p = FirstKindProblem::<f64>::eigen_test(1);
        let r = lavrentiev_solve(&p, &g, &RegularizationParams::lavrentiev(1e-3)).unwrap();
        let phi = g.sample(|x| (PI * x).sin());
        let coef = g.inner(&r.solution, &phi) / g.inner(&phi, &phi);
        assert_relative_eq!(coef, 1.0 / (1.0 + 1e-3 * PI * PI), max_relative = 1e-3);
        assert_relative_eq!(coef, 0.99023, epsilon = 1e-4);
    }

    #[test]
    fn lavrentiev_zero_and_large_alpha() {
        let g = build_grid(0.0, 1.0, QuadRule::Simpson, 65).unwrap();
        let p = FirstKindProblem::<f64>::eigen_test(1);
        let zero = lavrentiev_solve(&p.with_rhs(|_| 0.0), &g, &RegularizationParams::lavrentiev(1e-3)).unwrap();
        assert!(zero.solution.iter().all(|&v| v == 0.0));
        let big = lavrentiev_solve(&p, &g, &RegularizationParams::lavrentiev(1e6)).unwrap();
        let fnorm = g.l2_norm(&p.rhs_samples(&g).unwrap());
        assert!(g.l2_norm(&big.solution) <= fnorm / 1e6 * (1.0 + 1e-9));
        assert!(lavrentiev_solve(&p, &g, &RegularizationParams::lavrentiev(0.0)).is_err());
    }

    #[test]
    fn stabilized_with_unit_weight_matches_lavrentiev() {
        let g = build_grid(0.0, 1.0, QuadRule::Simpson, 65).unwrap();
        let p = FirstKindProblem::<f64>::eigen_test(2);
        let a = lavrentiev_solve(&p, &g, &RegularizationParams::lavrentiev(1e-2)).unwrap();
        let params = RegularizationParams {
            alpha: 1e-2,
            variant: RegularizationVariant::StabilizedP0(Arc::new(|_| 1.0)),
        };
        let b = lavrentiev_solve(&p, &g, &params).unwrap();
        assert!(max_abs_diff(&a.solution, &b.solution) < 1e-14);
    }

    #[test]
    fn quasisolution_branches() {
        let g = build_grid(0.0, 1.0, QuadRule::Simpson, 129).unwrap();
        let basis = canonical_spectrum(CanonicalKernel::TriangularUnit, 8).unwrap();
        let l1 = PI * PI;
        let beta = 0.8;
        let f = move |x: f64| beta * 2f64.sqrt() * (PI * x).sin() / l1;
        let inside = quasisolution_solve(&basis, &f, 1.0, 8, &g).unwrap();
        let target = g.sample(|x| beta * 2f64.sqrt() * (PI * x).sin());
        assert!(max_abs_diff(&inside.solution, &target) < 1e-10);
        assert_eq!(inside.iterations_used, 0);

        let bound = quasisolution_solve(&basis, &f, 0.5, 8, &g).unwrap();
        assert!((g.l2_norm(&bound.solution) - 0.5).abs() < 1e-8);
        assert!(g.l2_norm(&bound.solution) <= 0.5 + 1e-8);
    }
}
