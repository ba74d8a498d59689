//! Quadrature grids and Nyström discretization of integral operators.

use std::fmt;

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum QuadRule {
    Trapezoid,
    /// Composite Simpson; needs an odd node count.
    Simpson,
    /// Composite Gauss-Legendre with `order` points per panel; the node
    /// count must be a multiple of `order`.
    GaussLegendre { order: usize },
}

impl QuadRule {
    pub fn name(self) -> &'static str {
        match self {
            QuadRule::Trapezoid => "trapezoid",
            QuadRule::Simpson => "simpson",
            QuadRule::GaussLegendre { .. } => "gauss_legendre",
        }
    }
}

impl fmt::Display for QuadRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Nodes and positive weights of a quadrature rule on `[a, b]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid<T> {
    a: T,
    b: T,
    rule: QuadRule,
    nodes: Vec<T>,
    weights: Vec<T>,
}

pub fn build_grid<T: Real>(a: T, b: T, rule: QuadRule, n: usize) -> Result<Grid<T>> {
    Grid::new(a, b, rule, n)
}

impl<T: Real> Grid<T> {
    pub fn new(a: T, b: T, rule: QuadRule, n: usize) -> Result<Self> {
        if !(b > a) || !a.is_finite() || !b.is_finite() {
            return Err(Error::InvalidInterval {
                a: a.to_f64_lossy(),
                b: b.to_f64_lossy(),
            });
        }
        if n < 2 {
            return Err(Error::InvalidNodeCount {
                rule: rule.name(),
                n,
                reason: "at least two nodes are required",
            });
        }
        let (nodes, weights) = match rule {
            QuadRule::Trapezoid => {
                let h = (b - a) / T::from_usize_lossy(n - 1);
                let nodes = equispaced(a, b, n);
                let mut w = vec![h; n];
                w[0] = h / T::lit(2.0);
                w[n - 1] = h / T::lit(2.0);
                (nodes, w)
            }
            QuadRule::Simpson => {
                if n.is_multiple_of(2) {
                    return Err(Error::InvalidNodeCount {
                        rule: rule.name(),
                        n,
                        reason: "simpson requires an odd node count",
                    });
                }
                let h = (b - a) / T::from_usize_lossy(n - 1);
                let third = h / T::lit(3.0);
                let w = (0..n)
                    .map(|i| {
                        if i == 0 || i == n - 1 {
                            third
                        } else if i % 2 == 1 {
                            T::lit(4.0) * third
                        } else {
                            T::lit(2.0) * third
                        }
                    })
                    .collect();
                (equispaced(a, b, n), w)
            }
            QuadRule::GaussLegendre { order } => {
                if order == 0 || !n.is_multiple_of(order) {
                    return Err(Error::InvalidNodeCount {
                        rule: rule.name(),
                        n,
                        reason: "gauss_legendre node count must be a positive multiple of the order",
                    });
                }
                let (x, w) = gauss_legendre_reference(order);
                let panels = n / order;
                let width = (b - a) / T::from_usize_lossy(panels);
                let half = width / T::lit(2.0);
                let mut nodes = Vec::with_capacity(n);
                let mut weights = Vec::with_capacity(n);
                for p in 0..panels {
                    let mid = a + width * (T::from_usize_lossy(p) + T::lit(0.5));
                    nodes.extend(x.iter().map(|&t| mid + half * T::lit(t)));
                    weights.extend(w.iter().map(|&v| half * T::lit(v)));
                }
                (nodes, weights)
            }
        };
        Ok(Self {
            a,
            b,
            rule,
            nodes,
            weights,
        })
    }

    #[inline]
    pub fn a(&self) -> T {
        self.a
    }

    #[inline]
    pub fn b(&self) -> T {
        self.b
    }

    #[inline]
    pub fn rule(&self) -> QuadRule {
        self.rule
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    #[inline]
    pub fn nodes(&self) -> &[T] {
        &self.nodes
    }

    #[inline]
    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    /// Same rule and node count mapped onto `[a, b]`.
    pub fn remapped(&self, a: T, b: T) -> Result<Self> {
        Self::new(a, b, self.rule, self.len())
    }

    pub fn sample(&self, f: impl Fn(T) -> T) -> Vec<T> {
        self.nodes.iter().map(|&x| f(x)).collect()
    }

    pub fn integrate(&self, values: &[T]) -> Result<T> {
        self.check_len(values.len())?;
        Ok(self.integrate_unchecked(values))
    }

    pub(crate) fn integrate_unchecked(&self, values: &[T]) -> T {
        self.weights
            .iter()
            .zip(values)
            .fold(T::zero(), |s, (&w, &v)| s + w * v)
    }

    /// Quadrature inner product `Σ wᵢ uᵢ vᵢ`.
    pub fn inner(&self, u: &[T], v: &[T]) -> T {
        debug_assert_eq!(u.len(), self.len());
        debug_assert_eq!(v.len(), self.len());
        self.weights
            .iter()
            .zip(u.iter().zip(v))
            .fold(T::zero(), |s, (&w, (&a, &b))| s + w * a * b)
    }

    pub fn l2_norm(&self, values: &[T]) -> T {
        self.inner(values, values).sqrt()
    }

    pub(crate) fn check_len(&self, got: usize) -> Result<()> {
        if got != self.len() {
            return Err(Error::LengthMismatch {
                expected: self.len(),
                got,
            });
        }
        Ok(())
    }

    /// Lower-triangular weights `C` with `∫ₐ^{xᵢ} g ≈ Σⱼ C[i,j] g(xⱼ)`.
    ///
    /// Trapezoid grids use the cumulative trapezoid rule. Simpson grids use
    /// composite Simpson up to even nodes and close odd nodes with a 3/8 panel,
    /// so every row keeps fourth order except the first interior row, which is a
    /// trapezoid step.
    pub fn cumulative_weights(&self) -> Result<Matrix<T>> {
        let n = self.len();
        let h = (self.b - self.a) / T::from_usize_lossy(n - 1);
        let mut c = Matrix::zeros(n, n);
        match self.rule {
            QuadRule::Trapezoid => {
                for i in 1..n {
                    for j in 0..=i {
                        c[(i, j)] = if j == 0 || j == i { h / T::lit(2.0) } else { h };
                    }
                }
            }
            QuadRule::Simpson => {
                let third = h / T::lit(3.0);
                let simpson_to = |c: &mut Matrix<T>, i: usize, m: usize| {
                    // composite Simpson on [x0, xm], m even
                    if m == 0 {
                        return;
                    }
                    for j in 0..=m {
                        let w = if j == 0 || j == m {
                            third
                        } else if j % 2 == 1 {
                            T::lit(4.0) * third
                        } else {
                            T::lit(2.0) * third
                        };
                        c[(i, j)] += w;
                    }
                };
                for i in 1..n {
                    if i == 1 {
                        c[(1, 0)] = h / T::lit(2.0);
                        c[(1, 1)] = h / T::lit(2.0);
                    } else if i % 2 == 0 {
                        simpson_to(&mut c, i, i);
                    } else {
                        simpson_to(&mut c, i, i - 3);
                        let e = T::lit(3.0) * h / T::lit(8.0);
                        let coeffs = [1.0, 3.0, 3.0, 1.0];
                        for (k, &cf) in coeffs.iter().enumerate() {
                            c[(i, i - 3 + k)] += e * T::lit(cf);
                        }
                    }
                }
            }
            QuadRule::GaussLegendre { .. } => return Err(Error::CumulativeUnsupported),
        }
        Ok(c)
    }
}

fn equispaced<T: Real>(a: T, b: T, n: usize) -> Vec<T> {
    let h = (b - a) / T::from_usize_lossy(n - 1);
    (0..n)
        .map(|i| {
            if i == n - 1 {
                b
            } else {
                a + h * T::from_usize_lossy(i)
            }
        })
        .collect()
}

/// Gauss-Legendre nodes (ascending) and weights on `[-1, 1]`, by Newton
/// iteration on the Legendre recurrence.
fn gauss_legendre_reference(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    let nf = n as f64;
    for i in 0..m {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, z);
        dp = if d != 0.0 { d } else { dp };
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    (x, w)
}

fn legendre_with_derivative(n: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}

/// Integral operator sampled at row nodes, with column quadrature weights
/// folded into the matrix: `matrix[i, j] = k(xᵢ, ξⱼ)·wⱼ`.
#[derive(Debug, Clone)]
pub struct DiscreteOperator<T> {
    pub matrix: Matrix<T>,
    pub row_grid: Grid<T>,
    pub col_grid: Grid<T>,
}

impl<T: Real> DiscreteOperator<T> {
    pub fn apply(&self, v: &[T]) -> Result<Vec<T>> {
        self.col_grid.check_len(v.len())?;
        Ok(self.matrix.matvec(v))
    }

    /// Kernel values without the column weights.
    pub fn kernel_values(&self) -> Matrix<T> {
        let inv: Vec<T> = self.col_grid.weights().iter().map(|&w| T::one() / w).collect();
        self.matrix.scale_columns(&inv)
    }
}

pub fn sample_kernel<T: Real>(
    k: impl Fn(T, T) -> T,
    row_grid: &Grid<T>,
    col_grid: &Grid<T>,
) -> Result<Matrix<T>> {
    let mut m = Matrix::zeros(row_grid.len(), col_grid.len());
    for (i, &x) in row_grid.nodes().iter().enumerate() {
        for (j, &xi) in col_grid.nodes().iter().enumerate() {
            let v = k(x, xi);
            if !v.is_finite() {
                return Err(Error::NonFiniteKernel {
                    x: x.to_f64_lossy(),
                    xi: xi.to_f64_lossy(),
                });
            }
            m[(i, j)] = v;
        }
    }
    Ok(m)
}

pub fn discretize_kernel<T: Real>(
    k: impl Fn(T, T) -> T,
    row_grid: &Grid<T>,
    col_grid: &Grid<T>,
) -> Result<DiscreteOperator<T>> {
    let values = sample_kernel(k, row_grid, col_grid)?;
    Ok(DiscreteOperator {
        matrix: values.scale_columns(col_grid.weights()),
        row_grid: row_grid.clone(),
        col_grid: col_grid.clone(),
    })
}

/// Volterra operator `∫ₐˣ k(x, ξ) g(ξ) dξ` on one grid, lower-triangular.
pub fn discretize_volterra<T: Real>(
    k: impl Fn(T, T) -> T,
    grid: &Grid<T>,
) -> Result<DiscreteOperator<T>> {
    let c = grid.cumulative_weights()?;
    let n = grid.len();
    let x = grid.nodes();
    let mut m = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            if c[(i, j)] == T::zero() {
                continue;
            }
            let v = k(x[i], x[j]);
            if !v.is_finite() {
                return Err(Error::NonFiniteKernel {
                    x: x[i].to_f64_lossy(),
                    xi: x[j].to_f64_lossy(),
                });
            }
            m[(i, j)] = c[(i, j)] * v;
        }
    }
    Ok(DiscreteOperator {
        matrix: m,
        row_grid: grid.clone(),
        col_grid: grid.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn trapezoid_three_nodes() {
        let g = build_grid(0.0, 1.0, QuadRule::Trapezoid, 3).unwrap();
        assert_eq!(g.nodes(), &[0.0, 0.5, 1.0]);
        assert_eq!(g.weights(), &[0.25, 0.5, 0.25]);
        let g = build_grid(-1.0, 0.0, QuadRule::Trapezoid, 3).unwrap();
        assert_eq!(g.nodes(), &[-1.0, -0.5, 0.0]);
        assert_relative_eq!(g.weights().iter().sum::<f64>(), 1.0);
    }

    #[test]
    fn simpson_three_nodes() {
        let g = build_grid(0.0, 1.0, QuadRule::Simpson, 3).unwrap();
        for (w, e) in g.weights().iter().zip([1.0 / 6.0, 4.0 / 6.0, 1.0 / 6.0]) {
            assert_relative_eq!(*w, e, epsilon = 1e-15);
        }
        assert!(build_grid(0.0, 1.0, QuadRule::Simpson, 4).is_err());
    }

    #[test]
    fn rejects_bad_interval_and_count() {
        assert!(matches!(
            build_grid(1.0, 1.0, QuadRule::Trapezoid, 5),
            Err(Error::InvalidInterval { .. })
        ));
        assert!(build_grid(0.0, 1.0, QuadRule::GaussLegendre { order: 1 }, 1).is_err());
        assert!(build_grid(0.0, 1.0, QuadRule::GaussLegendre { order: 4 }, 10).is_err());
    }

    #[test]
    fn exactness() {
        for rule in [QuadRule::Trapezoid, QuadRule::Simpson, QuadRule::GaussLegendre { order: 5 }] {
            let g = build_grid(0.0, 1.0, rule, 5).unwrap();
            assert_relative_eq!(g.integrate(&g.sample(|x| x)).unwrap(), 0.5, epsilon = 1e-14);
        }
        let g = build_grid(0.0, 1.0, QuadRule::Simpson, 3).unwrap();
        assert_relative_eq!(g.integrate(&g.sample(|x| x * x * x)).unwrap(), 0.25, epsilon = 1e-15);
        // two panels of order 5; a single 5-point panel is only good to ~4e-8
        let g = build_grid(0.0, 1.0, QuadRule::GaussLegendre { order: 5 }, 10).unwrap();
        let v = g.integrate(&g.sample(|x: f64| (std::f64::consts::PI * x).sin())).unwrap();
        assert!((v - 2.0 / std::f64::consts::PI).abs() < 1e-9);
        let g = build_grid(0.0, 1.0, QuadRule::GaussLegendre { order: 5 }, 5).unwrap();
        let v = g.integrate(&g.sample(|x: f64| (std::f64::consts::PI * x).sin())).unwrap();
        assert!((v - 2.0 / std::f64::consts::PI).abs() < 4e-8);
    }

    #[test]
    fn integrate_length_mismatch() {
        let g = build_grid(0.0, 1.0, QuadRule::Trapezoid, 4).unwrap();
        assert_eq!(
            g.integrate(&[1.0, 2.0]),
            Err(Error::LengthMismatch { expected: 4, got: 2 })
        );
    }

    #[test]
    fn gauss_legendre_high_order() {
        let g = build_grid(-1.0, 1.0, QuadRule::GaussLegendre { order: 10 }, 10).unwrap();
        // exact for degree 19
        let v = g.integrate(&g.sample(|x: f64| x.powi(18))).unwrap();
        assert_relative_eq!(v, 2.0 / 19.0, epsilon = 1e-14);
        assert!(g.nodes().windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn constant_kernel_rows() {
        let g = build_grid(0.0, 1.0, QuadRule::Trapezoid, 3).unwrap();
        let op = discretize_kernel(|_, _| 1.0, &g, &g).unwrap();
        for i in 0..3 {
            assert_eq!(op.matrix.row(i), &[0.25, 0.5, 0.25]);
        }
        assert!(discretize_kernel(|x, _| 1.0 / x, &g, &g).is_err());
    }

    #[test]
    fn cumulative_weights_integrate_polynomials() {
        for rule in [QuadRule::Trapezoid, QuadRule::Simpson] {
            let g = build_grid(0.0, 2.0, rule, 9).unwrap();
            let c = g.cumulative_weights().unwrap();
            let vals = g.sample(|x| x);
            let cum = c.matvec(&vals);
            for (i, &x) in g.nodes().iter().enumerate() {
                assert_relative_eq!(cum[i], x * x / 2.0, epsilon = 1e-13);
                for j in i + 1..g.len() {
                    assert_eq!(c[(i, j)], 0.0);
                }
            }
        }
        let g = build_grid(0.0f64, 1.0, QuadRule::Simpson, 9).unwrap();
        let cum = g.cumulative_weights().unwrap().matvec(&g.sample(|x| x * x * x));
        for (i, &x) in g.nodes().iter().enumerate().skip(2) {
            assert_relative_eq!(cum[i], x.powi(4) / 4.0, epsilon = 1e-14);
        }
        let gl = build_grid(0.0, 1.0, QuadRule::GaussLegendre { order: 4 }, 4).unwrap();
        assert_eq!(gl.cumulative_weights().unwrap_err(), Error::CumulativeUnsupported);
    }

    #[test]
    fn works_in_f32() {
        let g = build_grid(0.0f32, 1.0, QuadRule::Simpson, 33).unwrap();
        let v = g.integrate(&g.sample(|x| x.exp())).unwrap();
        assert!((v - (std::f32::consts::E - 1.0)).abs() < 1e-5);
    }
}
