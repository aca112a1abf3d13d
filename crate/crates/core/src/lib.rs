//! Finite-truncation diagnostics for weakly `U(d)`-homogeneous weighted
//! multishifts on spaces of formal power series `H²(β)`.
//!
//! The crate evaluates the level quantity `b_n`, norms of composition
//! operators `C_u f = f(u·z)` on homogeneous levels, the Haar-averaged
//! homogenization of a weight family, and the spherically balanced /
//! similar-to-Szegő checks for Reinhardt measures on the sphere.

pub mod balanced;
pub mod cli;
pub mod combinatorics;
pub mod criteria;
pub mod error;
pub mod polyspace;
pub mod renorm;
pub mod unitary;
pub mod weights;

pub use balanced::{
    Density, MeasureDescriptor, RadialWeights, ReinhardtMeasure, SliceRepresentation,
};
pub use combinatorics::{enumerate_level, unit, LevelBasis, MultiIndex, MAX_DEGREE, MAX_DIM};
pub use error::{Error, Result};
pub use polyspace::{composition_matrix, multiplication_matrix, CompositionMatrix, HomPoly};
pub use unitary::{haar_batch, haar_sample, UnitaryDescriptor, UnitaryMatrix};
pub use weights::{fock_norm, WeightDescriptor, WeightFamily};
