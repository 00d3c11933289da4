//! Error types shared across the library.

use num_complex::Complex64;
use thiserror::Error;

/// Errors produced by series arithmetic and the coefficient recurrences.
#[derive(Debug, Clone, Error)]
pub enum SeriesError {
    #[error("division by a series with vanishing constant term")]
    SingularSeries,
    #[error("p-th root of a series with zero constant term (branch point)")]
    BranchPoint,
    #[error("radius estimation needs at least {needed} nonzero coefficients, got {got}")]
    TooFewCoefficients { needed: usize, got: usize },
    #[error("non-finite coefficient produced at index {index}")]
    NonFinite { index: usize },
}

/// Errors produced while integrating rays or tracing trajectories.
#[derive(Debug, Clone, Error)]
pub enum TraceError {
    #[error("trajectory passed within pole tolerance of b = {pole} at z = {z}")]
    NearPole { pole: Complex64, z: Complex64 },
    #[error("step budget of {budget} exceeded before reaching the target")]
    NoConvergence { budget: usize },
    #[error("step size collapsed below {min_step} at t = {t}")]
    StepCollapse { min_step: f64, t: f64 },
    #[error("start point {start} is not near a zero or pole of the quadratic differential")]
    BadStart { start: Complex64 },
    #[error("start lies on a zero with several emanating arcs; a direction index is required")]
    AmbiguousStart,
    #[error("direction index {index} out of range ({count} critical directions)")]
    BadDirection { index: usize, count: usize },
    #[error("orbit failed to reach the stop condition within the arc-length budget")]
    StopNotReached,
    #[error(transparent)]
    Series(#[from] SeriesError),
}

/// Errors from the nonlinear solver.
#[derive(Debug, Clone, Error)]
pub enum SolverError {
    #[error("trust region collapsed below 1e-14 (stagnation); best residual norm {best_norm:.3e}")]
    Stagnation { best: Vec<f64>, best_norm: f64 },
    #[error("residual evaluation failed at the initial point: {message}")]
    InitialEvaluation { message: String },
    #[error("residual returned a non-finite value at {point:?}")]
    NonFinite { point: Vec<f64> },
    #[error("no convergence within {max_iterations} iterations; best residual norm {best_norm:.3e}")]
    MaxIterations {
        max_iterations: usize,
        best: Vec<f64>,
        best_norm: f64,
    },
    #[error("continuation failed at t = {t}; {solved} of {steps} steps solved")]
    PathFailure { t: f64, solved: usize, steps: usize },
}

/// Errors from configuration-level solves and validation.
#[derive(Debug, Clone, Error)]
pub enum PtError {
    #[error("anchor set invalid: {0}")]
    BadAnchors(String),
    #[error("configuration {config} expects {expected} unknowns, got {got}")]
    BadDimension {
        config: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("solved angles collapse or leave the configuration's cyclic order; try the other configuration")]
    TopologyMismatch,
    #[error("verification at doubled series order failed: residual {residual:.3e} > {allowed:.3e}")]
    VerificationFailed { residual: f64, allowed: f64 },
    #[error("critical-orbit residual mode rejected: {0}")]
    OrbitModeInvalid(String),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Trace(#[from] TraceError),
}

/// Errors from domain geometry and the constants pipeline.
#[derive(Debug, Clone, Error)]
pub enum DomainError {
    #[error("infeasible geometry: {0}")]
    Infeasible(String),
    #[error("evaluation at an excluded point (pole) of the map")]
    MapPole,
    #[error("parallel curves do not intersect within the sector")]
    NoIntersection,
    #[error("bisection bracket invalid for x = {x}: {message}")]
    BisectionFailure { x: f64, message: String },
    #[error("coefficient cross-validation disagreement: max deviation {deviation:.3e}")]
    CoefficientMismatch { deviation: f64 },
    #[error("coefficient tail failed to converge: tail estimate {tail:.3e}")]
    TailUnconverged { tail: f64 },
    #[error("degenerate map: zero linear coefficient")]
    DegenerateMap,
    #[error("pipeline stage '{stage}' failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<PtError>,
    },
    #[error(transparent)]
    Pt(#[from] PtError),
    #[error(transparent)]
    Series(#[from] SeriesError),
}
