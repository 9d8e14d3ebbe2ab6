//! Exact rational linear algebra and integer lattice normal forms.

pub mod lattice;
pub mod matrix;
pub mod normal_form;
pub mod rational;

pub use lattice::{positive_definite, IntLattice};
pub use matrix::{QMatrix, ZMatrix};
pub use normal_form::{hermite_normal_form, smith_normal_form};
pub use rational::{QVector, Rational};
