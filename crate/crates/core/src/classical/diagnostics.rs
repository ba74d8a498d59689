use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::kernels::SpectralBasis;
use crate::scalar::Real;

/// Per-mode Fourier coefficients of an iterate history and their fitted
/// contraction ratios.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeDiagnostic<T> {
    /// `trajectories[m][k]` is the coefficient of mode `m` in iterate `k`.
    pub trajectories: Vec<Vec<T>>,
    /// Least-squares ratio of successive coefficient increments per mode;
    /// 1 when a mode does not move at all.
    pub ratios: Vec<T>,
}

pub fn mode_diagnostic<T: Real>(
    basis: &SpectralBasis<T>,
    history: &[Vec<T>],
    grid: &Grid<T>,
    n_modes: usize,
) -> ModeDiagnostic<T> {
    let m = n_modes.min(basis.len());
    let mut trajectories = Vec::with_capacity(m);
    let mut ratios = Vec::with_capacity(m);
    for k in 0..m {
        let phi = basis.sample_mode(k, grid);
        let traj: Vec<T> = history.iter().map(|psi| grid.inner(psi, &phi)).collect();
        ratios.push(increment_ratio(&traj));
        trajectories.push(traj);
    }
    ModeDiagnostic { trajectories, ratios }
}

/// With `dₙ = cₙ₊₁ − cₙ`, returns `Σ dₙ₊₁dₙ / Σ dₙ²` over consecutive pairs.
fn increment_ratio<T: Real>(c: &[T]) -> T {
    if c.len() < 3 {
        return T::one();
    }
    let d: Vec<T> = c.windows(2).map(|w| w[1] - w[0]).collect();
    let mut num = T::zero();
    let mut den = T::zero();
    for w in d.windows(2) {
        num += w[1] * w[0];
        den += w[0] * w[0];
    }
    let scale = c.iter().fold(T::zero(), |a, v| a.max(v.abs())).max(T::min_positive_value());
    if den.sqrt() <= T::epsilon() * scale {
        T::one()
    } else {
        num / den
    }
}

/// Removes the component of `f` along `eigfun`: `f − φ⟨f, φ⟩/⟨φ, φ⟩`.
pub fn perlin_deflate<T: Real>(f: &[T], eigfun: &[T], grid: &Grid<T>) -> Result<Vec<T>> {
    grid.check_len(f.len())?;
    grid.check_len(eigfun.len())?;
    let nn = grid.inner(eigfun, eigfun);
    let scale = grid.b() - grid.a();
    if !(nn > T::epsilon() * T::epsilon() * scale) {
        return Err(Error::DegenerateVector);
    }
    let c = grid.inner(f, eigfun) / nn;
    Ok(f.iter().zip(eigfun).map(|(&a, &e)| a - c * e).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{build_grid, QuadRule};
    use crate::kernels::{canonical_spectrum, CanonicalKernel};
    use crate::linalg::max_abs;
    use std::f64::consts::PI;

    #[test]
    fn constant_history_gives_unit_ratios() {
        let g = build_grid(0.0, 1.0, QuadRule::Simpson, 33).unwrap();
        let basis = canonical_spectrum(CanonicalKernel::TriangularUnit, 3).unwrap();
        let psi = g.sample(|x| (PI * x).sin() + 0.3 * (2.0 * PI * x).sin());
        let d = mode_diagnostic(&basis, &vec![psi; 6], &g, 3);
        assert!(d.ratios.iter().all(|&r| r == 1.0));
    }

    #[test]
    fn geometric_trajectory_ratio() {
        let c: Vec<f64> = (0..10).map(|k| 1.0 - 0.75f64.powi(k)).collect();
        assert!((increment_ratio(&c) - 0.75).abs() < 1e-14);
    }

    #[test]
    fn deflation_projector() {
        let g = build_grid(0.0, 1.0, QuadRule::Simpson, 65).unwrap();
        let e = g.sample(|x| 2f64.sqrt() * (PI * x).sin());
        let other = g.sample(|x| (3.0 * PI * x).sin());
        assert!(max_abs(&perlin_deflate(&e, &e, &g).unwrap()) < 1e-14);
        let same = perlin_deflate(&other, &e, &g).unwrap();
        assert!(same.iter().zip(&other).all(|(a, b)| (a - b).abs() < 1e-14));
        let mix: Vec<f64> = e.iter().zip(&other).map(|(a, b)| a + b).collect();
        let out = perlin_deflate(&mix, &e, &g).unwrap();
        assert!(out.iter().zip(&other).all(|(a, b)| (a - b).abs() < 1e-12));
        assert!(perlin_deflate(&mix, &vec![0.0; 65], &g).is_err());
    }
}
