//! Exceptional points (EPs) of small non-Hermitian matrix families and the
//! holonomy of eigenmodes transported around closed parameter loops.
//!
//! The crate is organised bottom-up:
//!
//! * [`matrix`] and [`eigen`]: closed-form spectra of 2×2 and 3×3 complex
//!   matrices (quadratic formula and Cardano), discriminants and
//!   biorthogonal eigenvector pairs.
//! * [`family`]: two-parameter affine matrix families, including the
//!   single-EP 2×2 model, the three-mode model and a triple-EP family.
//! * [`locator`]: grid scans and Newton refinement of the discriminant.
//! * [`tracker`]: eigenvalue/eigenvector continuation around loops and the
//!   measured signed permutation.
//! * [`algebra`]: exact signed-permutation algebra of the exchange
//!   generators, their products, spectra and orders.
//! * [`verify`]: the acceptance checks shared by the test suite and the CLI.
//!
//! Grid-shaped work (scans, surfaces, property batches) goes through
//! [`exec`], which uses rayon when the `parallel` feature is enabled and a
//! plain loop otherwise.

pub mod algebra;
pub mod eigen;
mod error;
pub mod exec;
pub mod family;
pub mod io;
pub mod locator;
pub mod matrix;
pub mod tracker;
pub mod verify;

pub use algebra::SignedPermutation;
pub use eigen::{char_poly, discriminant, discriminant3, eigenvalues, eigs2, eigs3, eigvec_pair, EigenSet};
pub use error::{Error, Result};
pub use exec::Exec;
pub use family::{FamilyKind, HamiltonianFamily, Params};
pub use locator::{gap_field, locate, refine_ep, scan_seeds, EPRecord, Region};
pub use matrix::{Complex, SmallMatrix};
pub use tracker::{holonomy_of, sheet_surface, track, HolonomySignature, ParameterLoop, TrackOptions, TrackResult};
