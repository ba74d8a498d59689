use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::kernels::Func;
use crate::linalg::{solve_checked, Matrix};
use crate::scalar::Real;
use crate::secondkind::RCOND_MIN;

/// `α·u(e) + β·u′(e) = γ` at one end of `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EndCondition<T> {
    pub value: T,
    pub slope: T,
    pub target: T,
}

impl<T: Real> EndCondition<T> {
    pub fn dirichlet(target: T) -> Self {
        Self {
            value: T::one(),
            slope: T::zero(),
            target,
        }
    }

    pub fn neumann(target: T) -> Self {
        Self {
            value: T::zero(),
            slope: T::one(),
            target,
        }
    }

    fn apply(&self, u: T, du: T) -> T {
        self.value * u + self.slope * du
    }
}

/// `u″ − a(x)u = f(x)` on `[0, 1]` with separated linear end conditions.
#[derive(Clone)]
pub struct OdeBvp<T> {
    pub a: Func<T>,
    pub f: Func<T>,
    pub left: EndCondition<T>,
    pub right: EndCondition<T>,
}

impl<T> fmt::Debug for OdeBvp<T>
where
    T: fmt::Debug,
{
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("OdeBvp")
            .field("left", &self.left)
            .field("right", &self.right)
            .finish_non_exhaustive()
    }
}

impl<T: Real> OdeBvp<T> {
    /// `u′(0) = 0`, `u(1) = 0`.
    pub fn new(a: impl Fn(T) -> T + Send + Sync + 'static, f: impl Fn(T) -> T + Send + Sync + 'static) -> Self {
        Self {
            a: Arc::new(a),
            f: Arc::new(f),
            left: EndCondition::neumann(T::zero()),
            right: EndCondition::dirichlet(T::zero()),
        }
    }

    pub fn with_conditions(mut self, left: EndCondition<T>, right: EndCondition<T>) -> Self {
        self.left = left;
        self.right = right;
        self
    }
}

/// Basis of the representation `u = ∫₀ˣ G(x − ξ)ψ(ξ)dξ + c₀φ₀(x) + c₁φ₁(x)`.
///
/// Without the shift `ψ = u″`, `G(s) = s`, `φ = (1, x)`. With the shift
/// `ψ = u″ + u`, `G(s) = sin s`, `φ = (cos x, sin x)`, which keeps
/// Neumann–Neumann conditions solvable.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Basis {
    shifted: bool,
}

impl Basis {
    fn green<T: Real>(self, s: T) -> T {
        if self.shifted {
            s.sin()
        } else {
            s
        }
    }

    fn green_slope<T: Real>(self, s: T) -> T {
        if self.shifted {
            s.cos()
        } else {
            T::one()
        }
    }

    fn phi<T: Real>(self, m: usize, x: T) -> T {
        match (self.shifted, m) {
            (false, 0) => T::one(),
            (false, _) => x,
            (true, 0) => x.cos(),
            (true, _) => x.sin(),
        }
    }

    fn phi_slope<T: Real>(self, m: usize, x: T) -> T {
        match (self.shifted, m) {
            (false, 0) => T::zero(),
            (false, _) => T::one(),
            (true, 0) => -x.sin(),
            (true, _) => x.cos(),
        }
    }

    fn shift<T: Real>(self) -> T {
        if self.shifted {
            T::one()
        } else {
            T::zero()
        }
    }
}

/// Second-kind equation `ψ = Kψ + F` on the grid nodes, where `K` already
/// carries the quadrature weights, together with the data needed to map `ψ`
/// back to `u`.
#[derive(Debug, Clone)]
pub struct OdeReduction<T> {
    pub grid: Grid<T>,
    pub operator: Matrix<T>,
    pub rhs: Vec<T>,
    basis: Basis,
    cumulative: Matrix<T>,
    /// `[B_k(φ_m)]`, the end conditions applied to the homogeneous basis.
    ends: [[T; 2]; 2],
    targets: [T; 2],
    left: EndCondition<T>,
    right: EndCondition<T>,
    /// `a + shift` at the nodes.
    coupling: Vec<T>,
    forcing: Vec<T>,
}

/// Reduces the problem to a second-kind equation for `ψ = u″` (or `u″ + u`
/// with `shifted`).
///
/// For `u′(0) = 0`, `u(1) = 0` and no shift the equation is
/// `ψ = a(x)[∫₀ˣ(x − ξ) − ∫₀¹(1 − ξ)]ψ dξ + f`.
pub fn ode_bvp_reduce<T: Real>(p: &OdeBvp<T>, grid: &Grid<T>, shifted: bool) -> Result<OdeReduction<T>> {
    if grid.a() != T::zero() || grid.b() != T::one() {
        return Err(Error::InvalidInterval {
            a: grid.a().to_f64_lossy(),
            b: grid.b().to_f64_lossy(),
        });
    }
    let basis = Basis { shifted };
    let cumulative = grid.cumulative_weights()?;
    let mut ends = [[T::zero(); 2]; 2];
    for m in 0..2 {
        ends[0][m] = p.left.apply(basis.phi(m, T::zero()), basis.phi_slope(m, T::zero()));
        ends[1][m] = p.right.apply(basis.phi(m, T::one()), basis.phi_slope(m, T::one()));
    }
    let det = ends[0][0] * ends[1][1] - ends[0][1] * ends[1][0];
    if det.abs() <= T::epsilon() {
        return Err(Error::UnsupportedBoundary(format!(
            "end conditions {:?} / {:?} do not determine the free constants{}",
            (p.left.value.to_f64_lossy(), p.left.slope.to_f64_lossy()),
            (p.right.value.to_f64_lossy(), p.right.slope.to_f64_lossy()),
            if shifted { "" } else { "; try the shifted form" }
        )));
    }
    let xs = grid.nodes();
    let w = grid.weights();
    let n = grid.len();
    let coupling: Vec<T> = xs.iter().map(|&x| (p.a)(x) + basis.shift()).collect();
    let forcing = grid.sample(|x| (p.f)(x));
    if coupling.iter().chain(&forcing).any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter("a or f is not finite on [0, 1]".into()));
    }
    let inv = [[ends[1][1] / det, -ends[0][1] / det], [-ends[1][0] / det, ends[0][0] / det]];
    let targets = [p.left.target, p.right.target];
    // u = Vψ + Σₘ φₘ [P⁻¹(γ − (0, g(ψ)))]ₘ, g the right-end functional of Vψ
    let right_functional: Vec<T> = xs
        .iter()
        .zip(w)
        .map(|(&xi, &wj)| wj * p.right.apply(basis.green(T::one() - xi), basis.green_slope(T::one() - xi)))
        .collect();
    let mut operator = Matrix::zeros(n, n);
    let mut rhs = forcing.clone();
    for i in 0..n {
        let x = xs[i];
        let phi_inv = basis.phi(0, x) * inv[0][1] + basis.phi(1, x) * inv[1][1];
        for j in 0..n {
            let vol = cumulative[(i, j)] * basis.green(x - xs[j]);
            operator[(i, j)] = coupling[i] * (vol - phi_inv * right_functional[j]);
        }
        let free = (0..2).fold(T::zero(), |s, m| {
            s + basis.phi(m, x) * (inv[m][0] * targets[0] + inv[m][1] * targets[1])
        });
        rhs[i] += coupling[i] * free;
    }
    Ok(OdeReduction {
        grid: grid.clone(),
        operator,
        rhs,
        basis,
        cumulative,
        ends,
        targets,
        left: p.left,
        right: p.right,
        coupling,
        forcing,
    })
}

/// Samples of `u` and `u′` on the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct OdeSolution<T> {
    pub psi: Vec<T>,
    pub u: Vec<T>,
    pub du: Vec<T>,
}

impl<T: Real> OdeReduction<T> {
    /// Dense solve of the kernel-absorbed equation.
    pub fn solve(&self) -> Result<OdeSolution<T>> {
        let n = self.grid.len();
        let mut m = self.operator.scaled(-T::one());
        for i in 0..n {
            m[(i, i)] += T::one();
        }
        let psi = solve_checked(&m, &self.rhs, RCOND_MIN)?;
        self.reconstruct(&psi)
    }

    /// Constants-first route: two Volterra equations solved by forward
    /// substitution, then the end conditions fix `c₀, c₁`.
    pub fn solve_constants_first(&self) -> Result<OdeSolution<T>> {
        let xs = self.grid.nodes();
        let n = xs.len();
        let forward = |src: &[T]| -> Result<Vec<T>> {
            let mut psi = vec![T::zero(); n];
            for i in 0..n {
                let mut s = src[i];
                for j in 0..i {
                    s += self.coupling[i] * self.cumulative[(i, j)] * self.basis.green(xs[i] - xs[j]) * psi[j];
                }
                let diag = T::one() - self.coupling[i] * self.cumulative[(i, i)] * self.basis.green(T::zero());
                if diag == T::zero() {
                    return Err(Error::Singular { rcond: 0.0 });
                }
                psi[i] = s / diag;
            }
            Ok(psi)
        };
        let psi_f = forward(&self.forcing)?;
        let homogeneous: Vec<Vec<T>> = (0..2)
            .map(|m| {
                let src: Vec<T> = xs.iter().zip(&self.coupling).map(|(&x, &c)| c * self.basis.phi(m, x)).collect();
                forward(&src)
            })
            .collect::<Result<_>>()?;
        let g_f = self.right_volterra(&psi_f);
        let g = [self.right_volterra(&homogeneous[0]), self.right_volterra(&homogeneous[1])];
        let sys = Matrix::from_fn(2, 2, |k, m| self.ends[k][m] + if k == 1 { g[m] } else { T::zero() });
        let c = solve_checked(&sys, &[self.targets[0], self.targets[1] - g_f], RCOND_MIN)?;
        let psi: Vec<T> = (0..n)
            .map(|i| psi_f[i] + c[0] * homogeneous[0][i] + c[1] * homogeneous[1][i])
            .collect();
        self.reconstruct_with(&psi, [c[0], c[1]])
    }

    /// `B₁` applied to `∫₀ˣG(x − ξ)ψ` at `x = 1`.
    fn right_volterra(&self, psi: &[T]) -> T {
        let xs = self.grid.nodes();
        xs.iter()
            .zip(self.grid.weights())
            .zip(psi)
            .fold(T::zero(), |s, ((&xi, &w), &p)| {
                s + w * p * self.right.apply(self.basis.green(T::one() - xi), self.basis.green_slope(T::one() - xi))
            })
    }

    /// Maps `ψ` samples to `u`; the end conditions hold whatever `ψ` is.
    pub fn reconstruct(&self, psi: &[T]) -> Result<OdeSolution<T>> {
        self.grid.check_len(psi.len())?;
        let (e, t) = (&self.ends, &self.targets);
        let rhs = [t[0], t[1] - self.right_volterra(psi)];
        let det = e[0][0] * e[1][1] - e[0][1] * e[1][0];
        let c = [
            (e[1][1] * rhs[0] - e[0][1] * rhs[1]) / det,
            (e[0][0] * rhs[1] - e[1][0] * rhs[0]) / det,
        ];
        self.reconstruct_with(psi, c)
    }

    fn reconstruct_with(&self, psi: &[T], c: [T; 2]) -> Result<OdeSolution<T>> {
        let xs = self.grid.nodes();
        let n = xs.len();
        let mut u = vec![T::zero(); n];
        let mut du = vec![T::zero(); n];
        for i in 0..n {
            let x = xs[i];
            let (mut v, mut dv) = (T::zero(), T::zero());
            for j in 0..=i {
                let cij = self.cumulative[(i, j)];
                v += cij * self.basis.green(x - xs[j]) * psi[j];
                dv += cij * self.basis.green_slope(x - xs[j]) * psi[j];
            }
            u[i] = v + c[0] * self.basis.phi(0, x) + c[1] * self.basis.phi(1, x);
            du[i] = dv + c[0] * self.basis.phi_slope(0, x) + c[1] * self.basis.phi_slope(1, x);
        }
        Ok(OdeSolution {
            psi: psi.to_vec(),
            u,
            du,
        })
    }

    /// `|B₀(u) − γ₀|` and `|B₁(u) − γ₁|` for a reconstructed solution.
    pub fn boundary_defects(&self, sol: &OdeSolution<T>) -> [T; 2] {
        let last = sol.u.len() - 1;
        [
            (self.left.apply(sol.u[0], sol.du[0]) - self.left.target).abs(),
            (self.right.apply(sol.u[last], sol.du[last]) - self.right.target).abs(),
        ]
    }
}
