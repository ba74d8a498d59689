//! Numerical tools for Fredholm integral equations of the first kind:
//! quadrature grids, kernel discretization, classical regularizing methods,
//! a reformulation into well-posed second-kind systems, and reductions of
//! boundary-value problems to integral equations.
//!
//! Everything is generic over the scalar through [`Real`]. The `*64` and
//! `*32` aliases fix the common types to `f64` and `f32`.

pub mod bvp;
pub mod classical;
pub mod error;
pub mod firstkind;
pub mod grid;
pub mod kernels;
pub mod linalg;
pub mod scalar;
pub mod secondkind;
pub mod tensor;
pub mod transform;

pub use error::{Error, Result};
pub use firstkind::{FirstKindProblem, NoiseSpec};
pub use grid::{build_grid, Grid, QuadRule};
pub use linalg::Matrix;
pub use scalar::Real;
pub use secondkind::{ContractionReport, SecondKindProblem};
pub use tensor::{TensorGrid, TensorOperator};
pub use transform::{TransformConfig, TransformResult};

pub type Grid64 = Grid<f64>;
pub type Grid32 = Grid<f32>;
pub type Matrix64 = Matrix<f64>;
pub type Matrix32 = Matrix<f32>;
pub type FirstKindProblem64 = FirstKindProblem<f64>;
pub type FirstKindProblem32 = FirstKindProblem<f32>;
pub type SecondKindProblem64 = SecondKindProblem<f64>;
pub type SecondKindProblem32 = SecondKindProblem<f32>;
pub type TensorGrid64 = TensorGrid<f64>;
pub type TensorGrid32 = TensorGrid<f32>;
pub type TransformConfig64 = TransformConfig<f64>;
pub type TransformConfig32 = TransformConfig<f32>;
