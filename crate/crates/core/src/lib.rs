//! Faedo–Galerkin solver and verification toolkit for two-dimensional
//! incompressible Navier–Stokes flow whose boundary total pressure obeys a
//! multivalued, nonmonotone law in the normal velocity.
//!
//! The crate is organised bottom-up:
//!
//! * [`boundary_law`]: scalar laws θ, envelopes θ̂, mollification, primitives
//!   and the tail-sign check.
//! * [`galerkin`]: divergence-free stream-function basis on the unit square
//!   and the assembled mass/stiffness/trilinear/trace data.
//! * [`evolve`]: semi-implicit time stepping of the regularised Galerkin
//!   system, producing trajectories and boundary multiplier fields.
//! * [`verify`]: energy bounds, inclusion and equi-integrability checks.
//! * [`control`]: tracking-type optimal control over the solution map.
//! * [`directional_growth`]: x-dependent superpotentials and their
//!   directional growth hypotheses.
//! * [`cli`] and [`io`]: config-driven orchestration, CSV and SVG output.

pub mod boundary_law;
pub mod check;
pub mod cli;
pub mod control;
pub mod directional_growth;
pub mod error;
pub mod evolve;
pub mod fixtures;
pub mod galerkin;
pub mod io;
pub mod quadrature;
pub mod verify;

pub use check::{CheckResult, Witness};
pub use error::{Error, Result};
