//! Exact computations on polarized tropical affine tori: tropical theta
//! functions and their corner loci, regularity and transversality checks,
//! randomized δ-perturbation search with replayable certificates, and the
//! formal algebra of fibered cobordism classes with the symbolic Fourier
//! exchange between Pontryagin product and fiberwise addition.

pub mod cli;
pub mod cobordism;
pub mod complex;
pub mod error;
pub mod exact;
pub mod geometry;
pub mod intersect;
pub mod theta;
pub mod torus;

pub use error::{Error, Result};
