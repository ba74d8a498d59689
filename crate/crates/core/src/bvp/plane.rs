use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::grid::{Grid, QuadRule};
use crate::kernels::{Func, Func2};
use crate::linalg::Lu;
use crate::scalar::Real;
use crate::secondkind::{operator_report, ContractionReport, RCOND_MIN};
use crate::tensor::{LineKernel, ProductTerm, TensorGrid, TensorOperator};
use crate::transform::{
    along_x_operators, data_blocks, data_free_blocks, sum_blocks, TensorProblem, TransformConfig,
};

/// `∫τ₁(x,y,ξ)ψ(ξ,y)dξ + ∫τ₂(x,y,η)ψ(x,η)dη + Σ c∫∫p·q·ψ = f(x,y)`.
#[derive(Clone)]
pub struct ReducedFirstKind2D<T> {
    pub tau1: LineKernel<T>,
    pub tau2: LineKernel<T>,
    pub products: Vec<ProductTerm<T>>,
    pub f: Func2<T>,
    pub x_domain: (T, T),
    pub y_domain: (T, T),
}

impl<T: fmt::Debug> fmt::Debug for ReducedFirstKind2D<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ReducedFirstKind2D")
            .field("tau1", &self.tau1)
            .field("tau2", &self.tau2)
            .field("products", &self.products.len())
            .field("x_domain", &self.x_domain)
            .field("y_domain", &self.y_domain)
            .finish()
    }
}

impl<T: Real> ReducedFirstKind2D<T> {
    pub fn grid(&self, rule: QuadRule, nx: usize, ny: usize) -> Result<TensorGrid<T>> {
        Ok(TensorGrid::new(
            Grid::new(self.x_domain.0, self.x_domain.1, rule, nx)?,
            Grid::new(self.y_domain.0, self.y_domain.1, rule, ny)?,
        ))
    }

    fn check_grid(&self, grid: &TensorGrid<T>) -> Result<()> {
        for (g, d) in [(&grid.x, self.x_domain), (&grid.y, self.y_domain)] {
            if (g.a(), g.b()) != d {
                return Err(Error::InvalidInterval {
                    a: g.a().to_f64_lossy(),
                    b: g.b().to_f64_lossy(),
                });
            }
        }
        Ok(())
    }

    pub fn operator(&self, grid: &TensorGrid<T>) -> Result<TensorOperator<T>> {
        self.check_grid(grid)?;
        TensorOperator::build(grid, &self.tau1, &self.tau2, &self.products)
    }

    pub fn rhs(&self, grid: &TensorGrid<T>) -> Vec<T> {
        grid.sample(|x, y| (self.f)(x, y))
    }

    /// `‖Aψ − f‖` over the tensor grid.
    pub fn residual(&self, psi: &[T], grid: &TensorGrid<T>) -> Result<T> {
        grid.check_len(psi.len())?;
        let ap = self.operator(grid)?.apply(psi);
        let r: Vec<T> = ap.iter().zip(self.rhs(grid)).map(|(&a, b)| a - b).collect();
        Ok(grid.l2_norm(&r))
    }

    pub fn tensor_problem(&self, grid: &TensorGrid<T>) -> Result<TensorProblem<T>> {
        Ok(TensorProblem {
            grid: grid.clone(),
            operator: self.operator(grid)?,
            rhs: self.rhs(grid),
        })
    }
}

/// `u = (line and product integrals of ψ) + free(x, y)`.
#[derive(Clone)]
pub struct Representation<T> {
    pub along_x: LineKernel<T>,
    pub along_y: LineKernel<T>,
    pub products: Vec<ProductTerm<T>>,
    pub free: Func2<T>,
}

impl<T: fmt::Debug> fmt::Debug for Representation<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Representation")
            .field("along_x", &self.along_x)
            .field("along_y", &self.along_y)
            .field("products", &self.products.len())
            .finish_non_exhaustive()
    }
}

impl<T: Real> Representation<T> {
    pub fn reconstruct(&self, psi: &[T], grid: &TensorGrid<T>) -> Result<Vec<T>> {
        grid.check_len(psi.len())?;
        let op = TensorOperator::build(grid, &self.along_x, &self.along_y, &self.products)?;
        let free = grid.sample(|x, y| (self.free)(x, y));
        Ok(op.apply(psi).iter().zip(free).map(|(&a, b)| a + b).collect())
    }
}

/// A reduced equation together with the two representations of `u` it was
/// built from: one integrating in x, one integrating in y (or t).
#[derive(Debug, Clone)]
pub struct PlaneReduction<T> {
    pub equation: ReducedFirstKind2D<T>,
    pub from_x: Representation<T>,
    pub from_y: Representation<T>,
}

fn zero2<T: Real>() -> Func2<T> {
    Arc::new(|_, _| T::zero())
}

/// `[∫₀ˢ(s − σ) − s∫₀¹(1 − σ)]` along x.
fn clamped_x<T: Real>() -> LineKernel<T> {
    LineKernel::new(
        Some(|x: T, _y: T, xi: T| x - xi),
        Some(|x: T, _y: T, xi: T| -x * (T::one() - xi)),
    )
}

/// `[∫₀ˢ(s − σ) − s∫₀¹(1 − σ)]` along y, scaled by `sign`.
fn clamped_y<T: Real>(sign: T) -> LineKernel<T> {
    LineKernel::new(
        Some(move |_x: T, y: T, eta: T| sign * (y - eta)),
        Some(move |_x: T, y: T, eta: T| -sign * y * (T::one() - eta)),
    )
}

/// `∫₀ᵗ g` by composite Gauss–Legendre, used for free terms given as closures.
fn running_integral<T: Real>(g: &Func<T>, t: T) -> T {
    if t == T::zero() {
        return T::zero();
    }
    let (a, b) = if t > T::zero() { (T::zero(), t) } else { (t, T::zero()) };
    let grid = Grid::new(a, b, QuadRule::GaussLegendre { order: 8 }, 64).expect("non-empty interval");
    let v = grid.integrate(&grid.sample(|s| g(s))).expect("matching length");
    if t > T::zero() {
        v
    } else {
        -v
    }
}

/// `−Δu = g` on the unit square with `u = 0` on the boundary, for the unknown
/// `ψ = ∂ₓ²u`.
///
/// The equation is `[∫₀ˣ(x−ξ) − x∫₀¹(1−ξ)]ψ dξ + [∫₀ʸ(y−η) − y∫₀¹(1−η)]ψ dη = f`
/// with `f = y∫₀¹(1−η)g dη − ∫₀ʸ(y−η)g dη`, which is `y(1−y)/2` for `g ≡ 1`.
/// The second representation reads the subtracted y-integral over `[0, 1]`.
pub fn poisson2d_reduce<T: Real>(load: Option<Func2<T>>) -> PlaneReduction<T> {
    let f: Func2<T> = match load {
        None => Arc::new(|_x, y| y * (T::one() - y) / T::lit(2.0)),
        Some(g) => Arc::new(move |x, y| {
            let gx: Func<T> = {
                let g = g.clone();
                Arc::new(move |eta| g(x, eta))
            };
            let weighted: Func<T> = {
                let g = g.clone();
                Arc::new(move |eta| (T::one() - eta) * g(x, eta))
            };
            let lever: Func<T> = {
                let g = g.clone();
                Arc::new(move |eta| eta * g(x, eta))
            };
            // ∫₀ʸ(y − η)g = y∫₀ʸg − ∫₀ʸηg
            let inner = y * running_integral(&gx, y) - running_integral(&lever, y);
            y * running_integral(&weighted, T::one()) - inner
        }),
    };
    let equation = ReducedFirstKind2D {
        tau1: clamped_x(),
        tau2: clamped_y(T::one()),
        products: Vec::new(),
        f: f.clone(),
        x_domain: (T::zero(), T::one()),
        y_domain: (T::zero(), T::one()),
    };
    PlaneReduction {
        equation,
        from_x: Representation {
            along_x: clamped_x(),
            along_y: LineKernel::zero(),
            products: Vec::new(),
            free: zero2(),
        },
        from_y: Representation {
            along_x: LineKernel::zero(),
            along_y: clamped_y(-T::one()),
            products: Vec::new(),
            free: f,
        },
    }
}

/// `∂ₜu = ∂ₓ²u` on `[0, 1] × [0, t_end]` with `u(0,t) = u(1,t) = 0` and
/// `u(x,0) = u₀(x)`, for `ψ = ∂ₓ²u`:
/// `[∫₀ˣ(x−ξ) − x∫₀¹(1−ξ)]ψ dξ − ∫₀ᵗψ dη = u₀(x)`.
pub fn heat_reduce<T: Real>(u0: Func<T>, t_end: T) -> Result<PlaneReduction<T>> {
    if !(t_end > T::zero()) {
        return Err(Error::InvalidInterval {
            a: 0.0,
            b: t_end.to_f64_lossy(),
        });
    }
    let tol = T::lit(1e-12);
    if u0(T::zero()).abs() > tol || u0(T::one()).abs() > tol {
        return Err(Error::IncompatibleData("u0 must vanish at x = 0 and x = 1".into()));
    }
    let f: Func2<T> = {
        let u0 = u0.clone();
        Arc::new(move |x, _t| u0(x))
    };
    let volterra_t = |sign: T| LineKernel::new(Some(move |_x: T, _t: T, _eta: T| sign), None::<fn(T, T, T) -> T>);
    Ok(PlaneReduction {
        equation: ReducedFirstKind2D {
            tau1: clamped_x(),
            tau2: volterra_t(-T::one()),
            products: Vec::new(),
            f: f.clone(),
            x_domain: (T::zero(), T::one()),
            y_domain: (T::zero(), t_end),
        },
        from_x: Representation {
            along_x: clamped_x(),
            along_y: LineKernel::zero(),
            products: Vec::new(),
            free: zero2(),
        },
        from_y: Representation {
            along_x: LineKernel::zero(),
            along_y: volterra_t(T::one()),
            products: Vec::new(),
            free: f,
        },
    })
}

/// `y∂ₓ²u + ∂ᵧ²u = 0` on `[0, 1] × [−1, 1]` with `u = 0` on `x = 0, 1` and
/// `y = −1`, `u(x, 1) = ν(x)`, for `ψ = ∂ₓ²u`.
#[derive(Debug, Clone)]
pub struct TricomiReduction<T> {
    pub plane: PlaneReduction<T>,
    /// `∂ᵧu` from the y-representation.
    pub slope_y: Representation<T>,
}

pub fn tricomi_reduce<T: Real>(nu: Func<T>) -> Result<TricomiReduction<T>> {
    let tol = T::lit(1e-12);
    if nu(T::zero()).abs() > tol || nu(T::one()).abs() > tol {
        return Err(Error::IncompatibleData("nu must vanish at x = 0 and x = 1".into()));
    }
    let half = T::lit(0.5);
    // [∫₋₁ʸ(y−η) − ((1+y)/2)∫₋₁¹(1−η)] η·
    let weighted = |sign: T| {
        LineKernel::new(
            Some(move |_x: T, y: T, eta: T| sign * (y - eta) * eta),
            Some(move |_x: T, y: T, eta: T| -sign * half * (T::one() + y) * (T::one() - eta) * eta),
        )
    };
    let f: Func2<T> = {
        let nu = nu.clone();
        Arc::new(move |x, y| half * (T::one() + y) * nu(x))
    };
    let slope_free: Func2<T> = {
        let nu = nu.clone();
        Arc::new(move |x, _y| half * nu(x))
    };
    let plane = PlaneReduction {
        equation: ReducedFirstKind2D {
            tau1: clamped_x(),
            tau2: weighted(T::one()),
            products: Vec::new(),
            f: f.clone(),
            x_domain: (T::zero(), T::one()),
            y_domain: (-T::one(), T::one()),
        },
        from_x: Representation {
            along_x: clamped_x(),
            along_y: LineKernel::zero(),
            products: Vec::new(),
            free: zero2(),
        },
        from_y: Representation {
            along_x: LineKernel::zero(),
            along_y: weighted(-T::one()),
            products: Vec::new(),
            free: f,
        },
    };
    let slope_y = Representation {
        along_x: LineKernel::zero(),
        along_y: LineKernel::new(
            Some(|_x: T, _y: T, eta: T| -eta),
            Some(move |_x: T, _y: T, eta: T| half * (T::one() - eta) * eta),
        ),
        products: Vec::new(),
        free: slope_free,
    };
    Ok(TricomiReduction { plane, slope_y })
}

impl<T: Real> TricomiReduction<T> {
    /// Largest jump of `u` and `∂ᵧu` across `y = 0` over the x-nodes, each side
    /// extrapolated to `y = 0` by a cubic through its four nearest nodes.
    /// The grid must contain `y = 0` as a node.
    pub fn matching_defect(&self, psi: &[T], grid: &TensorGrid<T>) -> Result<(T, T)> {
        let ys = grid.y.nodes();
        let k = ys
            .iter()
            .position(|&y| y == T::zero())
            .ok_or_else(|| Error::InvalidParameter("y-grid must contain 0".into()))?;
        if k < 4 || k + 4 >= ys.len() {
            return Err(Error::InvalidParameter("need four y-nodes on each side of 0".into()));
        }
        let u = self.plane.from_y.reconstruct(psi, grid)?;
        let du = self.slope_y.reconstruct(psi, grid)?;
        let extrapolate = |line: &[T], idx: [usize; 4]| -> T {
            let mut s = T::zero();
            for a in 0..4 {
                let mut l = T::one();
                for b in 0..4 {
                    if a != b {
                        l *= -ys[idx[b]] / (ys[idx[a]] - ys[idx[b]]);
                    }
                }
                s += l * line[idx[a]];
            }
            s
        };
        let below = [k - 4, k - 3, k - 2, k - 1];
        let above = [k + 1, k + 2, k + 3, k + 4];
        let mut ju = T::zero();
        let mut jd = T::zero();
        for i in 0..grid.nx() {
            let lu = grid.y_line(&u, i);
            let ld = grid.y_line(&du, i);
            ju = ju.max((extrapolate(lu, below) - extrapolate(lu, above)).abs());
            jd = jd.max((extrapolate(ld, below) - extrapolate(ld, above)).abs());
        }
        Ok((ju, jd))
    }
}

/// `∂ₜu = ε∂ₓ²u + β∂ₓu` on `[0, 1]²` with `u(x,0) = 0`, `u(0,t) = 0`,
/// `u(1,t) = u₁(t)`, for `ψ = ∂ₓ²u`.
///
/// With `u = [∫₀ˣ(x−ξ) − x∫₀¹(1−ξ)]ψ + x·u₁(t)` the problem becomes
/// `(εA₁ + A₂)ψ = f` where `A₁ = ∫₀ᵗ·dη`,
/// `A₂ = β[∫₀ˣ − ∫₀¹(1−ξ)]∫₀ᵗ − [∫₀ˣ(x−ξ) − x∫₀¹(1−ξ)]` and
/// `f = x·u₁(t) − β∫₀ᵗu₁`.
#[derive(Debug, Clone)]
pub struct ConvectionDiffusion<T> {
    pub epsilon: T,
    pub beta: T,
    /// `A₁ψ = 0` form (its free term is unused).
    pub diffusion: ReducedFirstKind2D<T>,
    /// `A₂ψ = f`.
    pub convection: ReducedFirstKind2D<T>,
    pub plane: PlaneReduction<T>,
}

pub fn convection_diffusion_reduce<T: Real>(epsilon: T, beta: T, u1: Func<T>) -> Result<ConvectionDiffusion<T>> {
    if !(beta > T::zero()) || !(epsilon >= T::zero()) {
        return Err(Error::InvalidParameter(format!(
            "need beta > 0 and epsilon >= 0, got beta = {beta}, epsilon = {epsilon}"
        )));
    }
    let unit = (T::zero(), T::one());
    let flux = |scale: T| ProductTerm {
        along_x: LineKernel::new(Some(|_x: T, _y: T, _xi: T| T::one()), Some(|_x: T, _y: T, xi: T| -(T::one() - xi))),
        along_y: LineKernel::new(Some(|_x: T, _y: T, _eta: T| T::one()), None::<fn(T, T, T) -> T>),
        scale,
    };
    let time = |scale: T| LineKernel::new(Some(move |_x: T, _t: T, _eta: T| scale), None::<fn(T, T, T) -> T>);
    let neg_clamped = LineKernel::new(
        Some(|x: T, _y: T, xi: T| xi - x),
        Some(|x: T, _y: T, xi: T| x * (T::one() - xi)),
    );
    let f: Func2<T> = {
        let u1 = u1.clone();
        Arc::new(move |x, t| x * u1(t) - beta * running_integral(&u1, t))
    };
    let diffusion = ReducedFirstKind2D {
        tau1: LineKernel::zero(),
        tau2: time(T::one()),
        products: Vec::new(),
        f: zero2(),
        x_domain: unit,
        y_domain: unit,
    };
    let convection = ReducedFirstKind2D {
        tau1: neg_clamped.clone(),
        tau2: LineKernel::zero(),
        products: vec![flux(beta)],
        f: f.clone(),
        x_domain: unit,
        y_domain: unit,
    };
    let full = ReducedFirstKind2D {
        tau1: neg_clamped,
        tau2: time(epsilon),
        products: vec![flux(beta)],
        f,
        x_domain: unit,
        y_domain: unit,
    };
    let boundary: Func2<T> = {
        let u1 = u1.clone();
        Arc::new(move |x, t| x * u1(t))
    };
    let history: Func2<T> = {
        let u1 = u1.clone();
        Arc::new(move |_x, t| beta * running_integral(&u1, t))
    };
    Ok(ConvectionDiffusion {
        epsilon,
        beta,
        diffusion,
        convection,
        plane: PlaneReduction {
            equation: full,
            from_x: Representation {
                along_x: clamped_x(),
                along_y: LineKernel::zero(),
                products: Vec::new(),
                free: boundary,
            },
            from_y: Representation {
                along_x: LineKernel::zero(),
                along_y: time(epsilon),
                products: vec![flux(beta)],
                free: history,
            },
        },
    })
}

/// Terms of `χ = Σ εᵐχₘ` for the transformed convection–diffusion system
/// `χ = μ(εR₁ + R₂)χ + F`, from `χ₀ = μR₂χ₀ + F` and
/// `χₘ₊₁ = μR₂χₘ₊₁ + μR₁χₘ`. Each `χₘ` stacks both transform unknowns.
#[derive(Debug, Clone, PartialEq)]
pub struct EpsilonExpansion<T> {
    pub terms: Vec<Vec<T>>,
    pub sum: Vec<T>,
    /// Relative defect of `sum − μ(εR₁ + R₂)sum − F + εᴹ⁺¹μR₁χ_M`, which
    /// vanishes identically for the recursion.
    pub telescoped_residual: T,
    /// Relative residual of the truncated sum in the full system.
    pub truncation_residual: T,
    pub report: ContractionReport<T>,
}

impl<T: Real> ConvectionDiffusion<T> {
    pub fn epsilon_expansion(
        &self,
        grid: &TensorGrid<T>,
        config: &TransformConfig<T>,
        n_terms: usize,
    ) -> Result<EpsilonExpansion<T>> {
        if n_terms == 0 {
            return Err(Error::InvalidParameter("need at least one expansion term".into()));
        }
        if grid.x.nodes() != config.grid.nodes() {
            return Err(Error::IncompatibleData(
                "tensor x-grid must coincide with the transform grid".into(),
            ));
        }
        let mu = config.mu;
        let eps = self.epsilon;
        let ops = along_x_operators(config, grid)?;
        let a1 = self.diffusion.operator(grid)?.dense();
        let a2 = self.convection.operator(grid)?.dense();
        let r2 = sum_blocks(&data_free_blocks(&ops, mu), &data_blocks(&ops, &a2, mu)).stacked();
        let r1 = data_blocks(&ops, &a1, mu).stacked();
        let n2 = r2.rows();
        let mut m = r2.scaled(-mu);
        for i in 0..n2 {
            m[(i, i)] += T::one();
        }
        let lu = Lu::factor(&m)?;
        let rcond = lu.rcond().to_f64_lossy();
        if rcond < RCOND_MIN {
            return Err(Error::Singular { rcond });
        }
        let n = grid.len();
        let mut rhs: Vec<T> = self.convection.rhs(grid).iter().map(|&v| mu * v).collect();
        rhs.extend(std::iter::repeat_n(T::zero(), n));
        let mut terms = vec![lu.solve(&rhs)];
        for _ in 1..n_terms {
            let src: Vec<T> = r1.matvec(terms.last().expect("non-empty")).iter().map(|&v| mu * v).collect();
            terms.push(lu.solve(&src));
        }
        let mut sum = vec![T::zero(); n2];
        let mut scale = T::one();
        for t in &terms {
            for (s, &v) in sum.iter_mut().zip(t) {
                *s += scale * v;
            }
            scale *= eps;
        }
        // scale is now ε^n_terms
        let full = r2.add(&r1.scaled(eps));
        let weights = grid.weights();
        let stacked_w: Vec<T> = weights.iter().chain(weights.iter()).copied().collect();
        let wnorm = |v: &[T]| v.iter().zip(&stacked_w).fold(T::zero(), |s, (&a, &w)| s + w * a * a).sqrt();
        let fs = full.matvec(&sum);
        let tail = r1.matvec(terms.last().expect("non-empty"));
        let truncation: Vec<T> = (0..n2).map(|i| sum[i] - mu * fs[i] - rhs[i]).collect();
        let telescoped: Vec<T> = (0..n2).map(|i| truncation[i] + scale * mu * tail[i]).collect();
        let fnorm = wnorm(&rhs);
        let rel = |v: &[T]| if fnorm > T::zero() { wnorm(v) / fnorm } else { wnorm(v) };
        Ok(EpsilonExpansion {
            telescoped_residual: rel(&telescoped),
            truncation_residual: rel(&truncation),
            terms,
            sum,
            report: operator_report(&full, &stacked_w, mu),
        })
    }
}

/// Two boundary-corrected reconstructions and the closure estimate
/// `δ = 2‖U₁ − U₂‖ / ‖U₁ + U₂‖`.
#[derive(Debug, Clone, PartialEq)]
pub struct ClosureEstimate<T> {
    pub delta: T,
    pub u1_samples: Vec<T>,
    pub u2_samples: Vec<T>,
}

impl<T: Real> ClosureEstimate<T> {
    pub fn recompute(&self, grid: &TensorGrid<T>) -> Result<T> {
        closure_delta(&self.u1_samples, &self.u2_samples, grid)
    }
}

fn closure_delta<T: Real>(u1: &[T], u2: &[T], grid: &TensorGrid<T>) -> Result<T> {
    let d: Vec<T> = u1.iter().zip(u2).map(|(&a, &b)| a - b).collect();
    let s: Vec<T> = u1.iter().zip(u2).map(|(&a, &b)| a + b).collect();
    let (dn, sn) = (grid.l2_norm(&d), grid.l2_norm(&s));
    if sn == T::zero() {
        if dn == T::zero() {
            return Ok(T::zero());
        }
        return Err(Error::DegenerateVector);
    }
    Ok(T::lit(2.0) * dn / sn)
}

/// Forces homogeneous Dirichlet values on both fields:
/// `U₁ = u₁ − (1−y)u₁(x,0) − y·u₁(x,1)`, `U₂ = u₂ − (1−x)u₂(0,y) − x·u₂(1,y)`
/// (with the interval ends in place of 0 and 1 on other domains). Boundary
/// nodes are set to exactly zero.
pub fn boundary_symmetrize<T: Real>(u1: &[T], u2: &[T], grid: &TensorGrid<T>) -> Result<ClosureEstimate<T>> {
    grid.check_len(u1.len())?;
    grid.check_len(u2.len())?;
    let (nx, ny) = (grid.nx(), grid.ny());
    let (xa, xb) = (grid.x.a(), grid.x.b());
    let (ya, yb) = (grid.y.a(), grid.y.b());
    let xs = grid.x.nodes();
    let ys = grid.y.nodes();
    let mut big1 = u1.to_vec();
    let mut big2 = u2.to_vec();
    for i in 0..nx {
        for j in 0..ny {
            let k = grid.index(i, j);
            let ty = (ys[j] - ya) / (yb - ya);
            let tx = (xs[i] - xa) / (xb - xa);
            if i == 0 || i == nx - 1 || j == 0 || j == ny - 1 {
                big1[k] = T::zero();
                big2[k] = T::zero();
                continue;
            }
            big1[k] = u1[k] - (T::one() - ty) * u1[grid.index(i, 0)] - ty * u1[grid.index(i, ny - 1)];
            big2[k] = u2[k] - (T::one() - tx) * u2[grid.index(0, j)] - tx * u2[grid.index(nx - 1, j)];
        }
    }
    Ok(ClosureEstimate {
        delta: closure_delta(&big1, &big2, grid)?,
        u1_samples: big1,
        u2_samples: big2,
    })
}

/// Reconstructs `u` both ways and returns the boundary-corrected closure.
pub fn closure_estimate<T: Real>(
    reduction: &PlaneReduction<T>,
    psi: &[T],
    grid: &TensorGrid<T>,
) -> Result<ClosureEstimate<T>> {
    let u1 = reduction.from_x.reconstruct(psi, grid)?;
    let u2 = reduction.from_y.reconstruct(psi, grid)?;
    boundary_symmetrize(&u1, &u2, grid)
}
