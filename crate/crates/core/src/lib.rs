//! Numerical toolkit for one-parameter semigroups of holomorphic self-maps
//! of the unit disk.
//!
//! Generators are assembled in Berkson–Porta form `G(z) = (τ - z)(1 - conj(τ) z) p(z)`
//! from rational atom sums or from positive boundary measures, integrated into
//! flows, linearized by their Koenigs functions, and probed at boundary points
//! for regular poles and regular null points.

pub mod error;
pub mod flow;
pub mod generator;
pub mod herglotz;
pub mod koenigs;
pub mod multislit;
pub mod quadrature;
pub mod scenarios;
pub mod unitdisc;

pub use error::{Error, Result};
pub use num_complex::Complex64;
