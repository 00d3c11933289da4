//! Numerical machinery for the Pólya–Tchebotarëv minimal-capacity problem and
//! the extremal constants derived from it.
//!
//! The crate is organised bottom-up:
//!
//! * [`series`] — truncated complex series arithmetic, roots, radius estimates;
//! * [`recurrence`] — Taylor-jet recurrences for the extremal-map ODE;
//! * [`tracer`] — ray integration and quadratic-differential trajectories;
//! * [`solver`] — a dogleg trust-region solver for square nonlinear systems;
//! * [`partition`] — nested circle partitions and planar-tree boundary words;
//! * [`problems`] — the supported critical configurations and their solves;
//! * [`domain`] — the one-parameter family of inradius-constrained domains;
//! * [`bessel`] — Bessel `J0`/`J1`, the first zero, and the `delta_n` moments;
//! * [`bounds`] — coefficient extraction and the three constants.

pub mod bessel;
pub mod bounds;
pub mod domain;
pub mod error;
pub mod partition;
pub mod problems;
pub mod recurrence;
pub mod series;
pub mod solver;
pub mod tracer;

pub use error::{DomainError, PtError, SeriesError, SolverError, TraceError};
pub use problems::{solve_pt, ConfigId, PTProblem, PTSolution, SolveSettings};
pub use series::ComplexSeries;
