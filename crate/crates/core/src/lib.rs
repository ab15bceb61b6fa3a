//! framekit: numerical toolkit for finite frames, Riesz frames and the
//! projection method for approximating frame coefficients.
//!
//! The modules mirror the workflow: [`linalg`] supplies the dense kernels,
//! [`frame`] the frame objects and bounds, [`subframe`] subset certification
//! and structural decompositions, [`constructions`] seeded families with
//! guaranteed bounds, [`projection`] truncated-operator diagnostics, and
//! [`verify`] the property batteries driven by the `framekit` binary.

pub mod cli;
pub mod constructions;
pub mod error;
pub mod frame;
pub mod linalg;
pub mod projection;
pub mod rng;
pub mod subframe;
pub mod verify;

pub use error::{FrameError, Result};
pub use frame::{
    combine_bounds, dual_frame, frame_coefficients, frame_operator, optimal_bounds, project_family,
    projected_energy, BoundsKind, FrameBounds, FrameFamily, IndexSet, OrthoProjector, ProjectionSide,
};
pub use linalg::{gram, orthonormalize, sym_eigenvalues, Matrix, TolerancePolicy};
