//! Caustics of flat and spherical wavefronts reflected by parametric mirrors.
//!
//! The pipeline evaluates a surface `r(u, v)` as second-order jets
//! ([`jet`], [`lang`]), derives its fundamental forms ([`diffgeo`]), and
//! from them the two focal sheets of the reflected front ([`caustic`]).
//! [`oracle`] recomputes the same sheets by brute force from finite
//! differences of the reflected ray family; [`meshio`] writes the results.

pub mod builtins;
pub mod caustic;
pub mod cli;
pub mod diffgeo;
pub mod flags;
pub mod jet;
pub mod lang;
pub mod meshio;
pub mod oracle;
pub mod scene;
pub mod surface;

pub use flags::Flags;
pub use jet::{Jet2, Jet2Vec3, Vec3};
