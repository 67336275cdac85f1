//! Numerical verification of neutral-signature anti-self-dual geometry.
//!
//! Module map:
//! - [`jets`]: expressions and exact second-order jets.
//! - [`geometry`]: metrics, curvature, Hodge star, SD/ASD split, Petrov type.
//! - [`spinor`]: null tetrads, Σ forms, spin connection, Lax pairs.
//! - [`zoo`]: explicit metric families.
//! - [`einstein_weyl`]: 3D Einstein-Weyl structures, monopoles, Jones-Tod.
//! - [`xray`]: the line-integral transform and its range equation.
//! - [`topology`]: arithmetic admissibility of neutral metrics.

#![allow(clippy::needless_range_loop)]

pub mod einstein_weyl;
pub mod error;
pub mod geometry;
pub mod jets;
pub mod report;
pub mod sampling;
pub mod spinor;
pub mod topology;
pub mod xray;
pub mod zoo;

pub use error::{GeomError, Result};
