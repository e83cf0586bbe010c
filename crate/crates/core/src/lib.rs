//! Spectral laboratory for the flat torus perturbed by two point scatterers.
//!
//! The crate enumerates the Laplace spectrum, evaluates the regularized
//! Green's-function sums, solves the secular equation of every self-adjoint
//! extension, and runs the Diophantine filters and equidistribution
//! experiments built on top of them.

// `!(x >= lo)` deliberately rejects NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod equidist;
pub mod error;
pub mod greens;
pub mod lattice;
pub mod linalg;
pub mod scattering;
pub mod sieve;
pub mod verify;

pub use equidist::{Mode, Observable, TruncatedState};
pub use error::{Error, Result};
pub use greens::{Bounded, DeficiencyConstants, MixingMatrix, SecularKernel, TorusGeometry};
pub use lattice::{Aspect, LatticePoint, NormTable};
pub use linalg::{Mat2, C64};
pub use scattering::{ExtensionU, NewEigenpair, Preset, SecularMatrix, SecularProblem};
pub use sieve::{DiophantineReport, FilterParams};
pub use verify::InterlaceReport;
