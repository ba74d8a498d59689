use thiserror::Error;

/// Errors raised by grid construction, operator assembly and the solvers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid interval: end {b} must exceed start {a}")]
    InvalidInterval { a: f64, b: f64 },

    #[error("rule {rule} cannot use {n} nodes: {reason}")]
    InvalidNodeCount {
        rule: &'static str,
        n: usize,
        reason: &'static str,
    },

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("kernel is not finite at node pair ({x}, {xi})")]
    NonFiniteKernel { x: f64, xi: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("resolvent term {n} is singular: 1 - 2*lambda*r^n = {denominator:e} (lambda = {lambda}, r = {r})")]
    SingularResolventTerm {
        n: usize,
        lambda: f64,
        r: f64,
        denominator: f64,
    },

    #[error("mu = {mu} is inadmissible: within tolerance of forbidden value {nearest}")]
    InadmissibleMu { mu: f64, nearest: f64 },

    #[error("linear system is singular or near-singular (reciprocal condition {rcond:e})")]
    Singular { rcond: f64 },

    #[error("iteration diverged after {iterations} steps (successive distances grew for {streak} consecutive steps)")]
    Divergence { iterations: usize, streak: usize },

    #[error("step {step} outside admissible interval (0, {limit})")]
    StepOutOfRange { step: f64, limit: f64 },

    #[error("bisection failed to bracket the root: {0}")]
    BracketFailure(String),

    #[error("unsupported boundary conditions: {0}")]
    UnsupportedBoundary(String),

    #[error("incompatible data: {0}")]
    IncompatibleData(String),

    #[error("vector norm is numerically zero")]
    DegenerateVector,

    #[error("cumulative quadrature requires an endpoint-inclusive equispaced grid (trapezoid or simpson)")]
    CumulativeUnsupported,
}

pub type Result<T> = std::result::Result<T, Error>;
