//! Exact computation with affine monoids and the local models built on them:
//! toric charts `ℂ(P)`, the monoid `ℂ̄(P)`, Kato-Nakayama points and fibers of
//! root stacks, with pointwise verification suites for their comparison maps.

pub mod cli;
pub mod cone;
pub mod error;
pub mod exec;
pub mod intlattice;
pub mod kn;
pub mod monoid;
pub mod points;
pub mod report;
pub mod rootstack;
mod vec_ops;

pub use error::{Error, Result};
pub use vec_ops::IVec;
