//! A 2D finite element solver for time-dependent convection-diffusion
//! equations whose discrete solutions respect prescribed nodal bounds.
//!
//! The solver combines a θ-scheme in time with conforming Lagrange elements
//! (P1/P2 on triangles, Q1 on rectangles), continuous interior penalty
//! stabilization of the convective term, and a per-step nodal projection
//! onto the admissible set. The resulting nonlinear system is solved by a
//! damped Richardson iteration with a reused sparse factorization. A small
//! benchmark harness drives convergence studies and the rotating-bodies
//! transport test.

pub mod analysis;
pub mod bounds;
pub mod cli;
pub mod error;
pub mod fe_space;
pub mod forms;
pub mod linalg;
pub mod mesh;
pub mod problems;
pub mod stepper;

pub use error::{Error, Result};
