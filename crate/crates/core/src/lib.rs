//! Invariant-domain-preserving approximation of the compressible Euler
//! equations with an arbitrary pressure oracle.
//!
//! The solver combines a first-order graph-viscosity update (provably
//! admissibility-preserving for any nonnegative pressure oracle), a
//! provisional high-order update driven by an entropy commutator, and a
//! convex limiter built on a surrogate entropy functional. Continuous
//! piecewise-linear elements on uniform 1D intervals and bilinear elements
//! on 2D Cartesian grids are supported.

pub mod discretization;
pub mod eos;
pub mod error;
pub mod limiter;
pub mod presets;
pub mod riemann;
pub mod state;
pub mod timeloop;
pub mod update;
pub mod verification;

pub use timeloop::{run, RunConfig, RunSeries};
pub use update::FieldSnapshot;

pub use discretization::GraphCoefficients;
pub use eos::{EosSpec, EosTable};
pub use error::{Error, Result};
pub use riemann::{SurrogateParams, WaveSpeedEstimate};
pub use state::{ConservedState, ProjectedState};
