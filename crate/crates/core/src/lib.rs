//! Genus 1 and 2 theta constants in arbitrary precision, Borchardt means
//! with good sign choices, and recovery of period matrices from theta
//! quotients.
//!
//! Module map:
//! - [`numerics`]: scalar plumbing, error radii, angular spans.
//! - [`siegel`]: period matrices and the domain F'.
//! - [`symplectic`]: `Sp_4(Z)` action and the transformation formula.
//! - [`theta`]: certified series and explicit bounds near the cusp.
//! - [`borchardt`]: AGM and Borchardt sequences.
//! - [`inversion`]: theta quotients to `tau`, and genus-1 Newton.
//! - [`certifier`]: sweeps and threshold checks for good position.

pub mod error;
pub mod numerics;
pub mod text;
pub mod siegel;
pub mod symplectic;
pub mod theta;
pub mod borchardt;
pub mod inversion;
pub mod certifier;

pub use error::{Error, Result};
pub use numerics::{BigComplex, ErrRadius};
pub use siegel::{Tau1, Tau2};
