//! Tensor-product grids and operators built from integrals along one
//! coordinate at a time.
//!
//! Samples on a [`TensorGrid`] are stored x-major: the value at `(xᵢ, yⱼ)` sits
//! at index `i·ny + j`.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::linalg::Matrix;
use crate::scalar::Real;

pub type Func3<T> = Arc<dyn Fn(T, T, T) -> T + Send + Sync>;

#[derive(Debug, Clone)]
pub struct TensorGrid<T> {
    pub x: Grid<T>,
    pub y: Grid<T>,
}

impl<T: Real> TensorGrid<T> {
    pub fn new(x: Grid<T>, y: Grid<T>) -> Self {
        Self { x, y }
    }

    pub fn nx(&self) -> usize {
        self.x.len()
    }

    pub fn ny(&self) -> usize {
        self.y.len()
    }

    pub fn len(&self) -> usize {
        self.nx() * self.ny()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        i * self.ny() + j
    }

    pub fn sample(&self, f: impl Fn(T, T) -> T) -> Vec<T> {
        let mut out = Vec::with_capacity(self.len());
        for &x in self.x.nodes() {
            for &y in self.y.nodes() {
                out.push(f(x, y));
            }
        }
        out
    }

    pub fn weights(&self) -> Vec<T> {
        let mut out = Vec::with_capacity(self.len());
        for &wx in self.x.weights() {
            for &wy in self.y.weights() {
                out.push(wx * wy);
            }
        }
        out
    }

    pub fn inner(&self, u: &[T], v: &[T]) -> T {
        self.weights()
            .iter()
            .zip(u.iter().zip(v))
            .fold(T::zero(), |s, (&w, (&a, &b))| s + w * a * b)
    }

    pub fn l2_norm(&self, v: &[T]) -> T {
        self.inner(v, v).sqrt()
    }

    pub fn check_len(&self, got: usize) -> Result<()> {
        if got != self.len() {
            return Err(Error::LengthMismatch {
                expected: self.len(),
                got,
            });
        }
        Ok(())
    }

    /// Values along the x-line at `y = yⱼ`.
    pub fn x_line(&self, v: &[T], j: usize) -> Vec<T> {
        (0..self.nx()).map(|i| v[self.index(i, j)]).collect()
    }

    /// Values along the y-line at `x = xᵢ`.
    pub fn y_line<'a>(&self, v: &'a [T], i: usize) -> &'a [T] {
        &v[i * self.ny()..(i + 1) * self.ny()]
    }
}

/// `∫ₐ^s v(s, t, σ) g(σ) dσ + ∫ₐᵇ w(s, t, σ) g(σ) dσ` along one coordinate,
/// where `s` is the running coordinate of that direction and `t` the other one.
///
/// For x-lines the closures receive `(x, y, ξ)`. For y-lines they receive
/// `(x, y, η)` as well, so both directions share the same argument order as
/// the operator they describe.
#[derive(Clone, Default)]
pub struct LineKernel<T> {
    pub volterra: Option<Func3<T>>,
    pub fredholm: Option<Func3<T>>,
}

impl<T> fmt::Debug for LineKernel<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LineKernel")
            .field("volterra", &self.volterra.is_some())
            .field("fredholm", &self.fredholm.is_some())
            .finish()
    }
}

impl<T: Real> LineKernel<T> {
    pub fn zero() -> Self {
        Self {
            volterra: None,
            fredholm: None,
        }
    }

    pub fn new(
        volterra: Option<impl Fn(T, T, T) -> T + Send + Sync + 'static>,
        fredholm: Option<impl Fn(T, T, T) -> T + Send + Sync + 'static>,
    ) -> Self {
        Self {
            volterra: volterra.map(|f| Arc::new(f) as Func3<T>),
            fredholm: fredholm.map(|f| Arc::new(f) as Func3<T>),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.volterra.is_none() && self.fredholm.is_none()
    }

    /// Point value of the combined kernel. The Volterra part contributes only
    /// for `σ ≤ s`.
    pub fn value(&self, s_is_x: bool, x: T, y: T, sigma: T) -> T {
        let s = if s_is_x { x } else { y };
        let mut v = T::zero();
        if let Some(k) = &self.volterra {
            if sigma <= s {
                v += k(x, y, sigma);
            }
        }
        if let Some(k) = &self.fredholm {
            v += k(x, y, sigma);
        }
        v
    }

    /// Weighted matrix of the x-line operator at fixed `y`.
    fn x_matrix(&self, g: &Grid<T>, cumulative: Option<&Matrix<T>>, y: T) -> Result<Matrix<T>> {
        let n = g.len();
        let xs = g.nodes();
        let w = g.weights();
        let mut m = Matrix::zeros(n, n);
        if let Some(k) = &self.volterra {
            let c = cumulative.ok_or(Error::CumulativeUnsupported)?;
            for i in 0..n {
                for j in 0..n {
                    let cij = c[(i, j)];
                    if cij != T::zero() {
                        m[(i, j)] += cij * k(xs[i], y, xs[j]);
                    }
                }
            }
        }
        if let Some(k) = &self.fredholm {
            for i in 0..n {
                for j in 0..n {
                    m[(i, j)] += w[j] * k(xs[i], y, xs[j]);
                }
            }
        }
        check_finite(&m)?;
        Ok(m)
    }

    /// Weighted matrix of the y-line operator at fixed `x`.
    fn y_matrix(&self, g: &Grid<T>, cumulative: Option<&Matrix<T>>, x: T) -> Result<Matrix<T>> {
        let n = g.len();
        let ys = g.nodes();
        let w = g.weights();
        let mut m = Matrix::zeros(n, n);
        if let Some(k) = &self.volterra {
            let c = cumulative.ok_or(Error::CumulativeUnsupported)?;
            for i in 0..n {
                for j in 0..n {
                    let cij = c[(i, j)];
                    if cij != T::zero() {
                        m[(i, j)] += cij * k(x, ys[i], ys[j]);
                    }
                }
            }
        }
        if let Some(k) = &self.fredholm {
            for i in 0..n {
                for j in 0..n {
                    m[(i, j)] += w[j] * k(x, ys[i], ys[j]);
                }
            }
        }
        check_finite(&m)?;
        Ok(m)
    }
}

fn check_finite<T: Real>(m: &Matrix<T>) -> Result<()> {
    if !m.is_finite() {
        return Err(Error::InvalidParameter("line kernel produced a non-finite value".into()));
    }
    Ok(())
}

/// Separable double integral `c · ∫∫ p(x, ξ) q(y, η) g(ξ, η) dξ dη`, each factor
/// given as a line kernel whose `other` argument is ignored.
#[derive(Clone, Debug)]
pub struct ProductTerm<T> {
    pub along_x: LineKernel<T>,
    pub along_y: LineKernel<T>,
    pub scale: T,
}

/// Discretized sum of x-line, y-line and separable product operators.
#[derive(Debug, Clone)]
pub struct TensorOperator<T> {
    nx: usize,
    ny: usize,
    /// One `nx × nx` matrix per y-node, or empty.
    x_lines: Vec<Matrix<T>>,
    /// One `ny × ny` matrix per x-node, or empty.
    y_lines: Vec<Matrix<T>>,
    products: Vec<(Matrix<T>, Matrix<T>)>,
}

impl<T: Real> TensorOperator<T> {
    pub fn zero(nx: usize, ny: usize) -> Self {
        Self {
            nx,
            ny,
            x_lines: Vec::new(),
            y_lines: Vec::new(),
            products: Vec::new(),
        }
    }

    pub fn build(
        grid: &TensorGrid<T>,
        along_x: &LineKernel<T>,
        along_y: &LineKernel<T>,
        products: &[ProductTerm<T>],
    ) -> Result<Self> {
        let cx = grid.x.cumulative_weights().ok();
        let cy = grid.y.cumulative_weights().ok();
        let mut op = Self::zero(grid.nx(), grid.ny());
        if !along_x.is_zero() {
            op.x_lines = grid
                .y
                .nodes()
                .iter()
                .map(|&y| along_x.x_matrix(&grid.x, cx.as_ref(), y))
                .collect::<Result<_>>()?;
        }
        if !along_y.is_zero() {
            op.y_lines = grid
                .x
                .nodes()
                .iter()
                .map(|&x| along_y.y_matrix(&grid.y, cy.as_ref(), x))
                .collect::<Result<_>>()?;
        }
        for term in products {
            let p = term.along_x.x_matrix(&grid.x, cx.as_ref(), T::zero())?;
            let q = term.along_y.y_matrix(&grid.y, cy.as_ref(), T::zero())?;
            op.products.push((p.scaled(term.scale), q));
        }
        Ok(op)
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn apply(&self, v: &[T]) -> Vec<T> {
        let (nx, ny) = (self.nx, self.ny);
        let mut out = vec![T::zero(); nx * ny];
        if !self.x_lines.is_empty() {
            for j in 0..ny {
                let line: Vec<T> = (0..nx).map(|i| v[i * ny + j]).collect();
                let r = self.x_lines[j].matvec(&line);
                for i in 0..nx {
                    out[i * ny + j] += r[i];
                }
            }
        }
        if !self.y_lines.is_empty() {
            for i in 0..nx {
                let r = self.y_lines[i].matvec(&v[i * ny..(i + 1) * ny]);
                for j in 0..ny {
                    out[i * ny + j] += r[j];
                }
            }
        }
        for (p, q) in &self.products {
            // (P V Qᵀ) with V the nx × ny sample array
            let mut vq = vec![T::zero(); nx * ny];
            for k in 0..nx {
                let r = q.matvec(&v[k * ny..(k + 1) * ny]);
                vq[k * ny..(k + 1) * ny].copy_from_slice(&r);
            }
            for i in 0..nx {
                for k in 0..nx {
                    let pik = p[(i, k)];
                    if pik == T::zero() {
                        continue;
                    }
                    for j in 0..ny {
                        out[i * ny + j] += pik * vq[k * ny + j];
                    }
                }
            }
        }
        out
    }

    /// Dense `N × N` matrix, `N = nx·ny`.
    pub fn dense(&self) -> Matrix<T> {
        let (nx, ny) = (self.nx, self.ny);
        let mut m = Matrix::zeros(nx * ny, nx * ny);
        for (j, xm) in self.x_lines.iter().enumerate() {
            for i in 0..nx {
                for k in 0..nx {
                    m[(i * ny + j, k * ny + j)] += xm[(i, k)];
                }
            }
        }
        for (i, ym) in self.y_lines.iter().enumerate() {
            for j in 0..ny {
                for l in 0..ny {
                    m[(i * ny + j, i * ny + l)] += ym[(j, l)];
                }
            }
        }
        for (p, q) in &self.products {
            for i in 0..nx {
                for k in 0..nx {
                    let pik = p[(i, k)];
                    if pik == T::zero() {
                        continue;
                    }
                    for j in 0..ny {
                        for l in 0..ny {
                            m[(i * ny + j, k * ny + l)] += pik * q[(j, l)];
                        }
                    }
                }
            }
        }
        m
    }
}

/// Dense matrix of `(B ⊗ I_y)`: the weighted 1D operator `b` acting along x
/// on every y-line.
pub fn along_x_dense<T: Real>(b: &Matrix<T>, ny: usize) -> Matrix<T> {
    let nx = b.rows();
    let mut m = Matrix::zeros(nx * ny, nx * ny);
    for i in 0..nx {
        for k in 0..nx {
            let v = b[(i, k)];
            for j in 0..ny {
                m[(i * ny + j, k * ny + j)] = v;
            }
        }
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{build_grid, QuadRule};
    use crate::linalg::max_abs_diff;

    fn grid(n: usize) -> TensorGrid<f64> {
        let g = build_grid(0.0, 1.0, QuadRule::Simpson, n).unwrap();
        TensorGrid::new(g.clone(), g)
    }

    #[test]
    fn indexing_and_sampling() {
        let g = grid(5);
        let v = g.sample(|x, y| 10.0 * x + y);
        assert_eq!(v[g.index(2, 3)], 10.0 * 0.5 + 0.75);
        assert_eq!(g.x_line(&v, 0), vec![0.0, 2.5, 5.0, 7.5, 10.0]);
        assert!((g.l2_norm(&[1.0; 25]) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn line_integrals_of_polynomials() {
        let g = grid(9);
        let tau1 = LineKernel::new(Some(|x: f64, _y, xi: f64| x - xi), None::<fn(f64, f64, f64) -> f64>);
        let tau2 = LineKernel::new(None::<fn(f64, f64, f64) -> f64>, Some(|_x, _y, _eta| 1.0));
        let op = TensorOperator::build(&g, &tau1, &tau2, &[]).unwrap();
        let ones = vec![1.0; g.len()];
        let got = op.apply(&ones);
        let expect = g.sample(|x, _| x * x / 2.0 + 1.0);
        assert!(max_abs_diff(&got, &expect) < 1e-14);
        let dense = op.dense().matvec(&ones);
        assert!(max_abs_diff(&got, &dense) < 1e-14);
    }

    #[test]
    fn product_term_matches_dense() {
        let g = grid(7);
        let cum = LineKernel::new(Some(|_: f64, _: f64, _: f64| 1.0), None::<fn(f64, f64, f64) -> f64>);
        let full = LineKernel::new(None::<fn(f64, f64, f64) -> f64>, Some(|_: f64, _: f64, s: f64| s));
        let term = ProductTerm {
            along_x: cum,
            along_y: full,
            scale: 2.0,
        };
        let op = TensorOperator::build(&g, &LineKernel::zero(), &LineKernel::zero(), &[term]).unwrap();
        let v = g.sample(|x, y| x + y * y);
        let a = op.apply(&v);
        let b = op.dense().matvec(&v);
        assert!(max_abs_diff(&a, &b) < 1e-13);
        // at x = 1: 2 ∫₀¹∫₀¹ η (ξ + η²) dη dξ = 1
        let at = a[g.index(6, 0)];
        assert!((at - 1.0).abs() < 1e-12);
    }

    #[test]
    fn along_x_matches_line_operator() {
        let g = grid(5);
        let b = Matrix::from_fn(5, 5, |i, k| (i + 2 * k) as f64);
        let d = along_x_dense(&b, 5);
        let v = g.sample(|x, y| x - y);
        let direct = d.matvec(&v);
        for j in 0..5 {
            let line = b.matvec(&g.x_line(&v, j));
            assert_eq!(g.x_line(&direct, j), line);
        }
    }
}
