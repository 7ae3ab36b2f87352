//! Extension operators for convex and delta-convex (d.c.) functions on ℝⁿ, with
//! sampled certificates for every property the constructions promise.
//!
//! * [`geometry`]: convex sets given by generators, oracles or halfspaces.
//! * [`dc_calculus`]: convex expression trees, d.c. mappings with control functions, and the rules combining them.
//! * [`extension_ops`]: inf-convolution and radial-projection extensions.
//! * [`counterexamples`]: the strip function and the truncated ℓ₂ example.
//! * [`subspace_ext`]: extending convex functions from a subspace.

pub mod certificate;
pub mod counterexamples;
pub mod dc_calculus;
pub mod error;
pub mod extension_ops;
pub mod geometry;
pub mod sampling;
pub mod subspace_ext;
pub mod tolerance;
pub mod vector;

pub use certificate::{Certificate, CertificateKind, Verdict};
pub use error::{Error, Result};
pub use tolerance::Tolerances;
pub use vector::{Matrix, Vector};
