//! Finite spectral triples over triangulated spaces.
//!
//! A triangulation is refined by barycentric subdivision into a tower of
//! finite posets. Functions sampled on the vertices form a commutative
//! algebra represented on a graded Hilbert space, and a Dirac operator built
//! from the vertex graph turns commutators `[D, a]` into finite-difference
//! operators whose spectra converge to classical derivatives.

pub mod algebra;
pub mod cli;
pub mod complex;
pub mod convergence;
pub mod error;
pub mod expr;
pub mod linalg;
pub mod models;
pub mod poset;
pub mod spectral;

pub use error::{Error, Result};
