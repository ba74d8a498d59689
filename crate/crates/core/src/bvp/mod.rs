//! Reductions of boundary-value problems to integral equations for the
//! highest derivative, with reconstruction of the original unknown.

mod ode;
mod plane;

pub use ode::{ode_bvp_reduce, EndCondition, OdeBvp, OdeReduction, OdeSolution};
pub use plane::{
    boundary_symmetrize, closure_estimate, convection_diffusion_reduce, heat_reduce, poisson2d_reduce,
    tricomi_reduce, ClosureEstimate, ConvectionDiffusion, EpsilonExpansion, PlaneReduction, ReducedFirstKind2D,
    Representation, TricomiReduction,
};
