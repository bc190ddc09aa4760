//! Forward and inverse solvers for the two-photon-absorption radiative
//! transport equation on convex domains.
//!
//! The crate provides:
//! - closed-form ray geometry on disks, balls and rectangles (`geometry`),
//! - coefficient fields, boundary sources and the admissibility check
//!   (`coefficients`),
//! - the nonlinear transport solver, its frozen-coefficient linear solver,
//!   the collimated Riccati ray solver and the albedo trace (`transport`),
//! - X-ray / attenuated X-ray transforms with a matrix-free least-squares
//!   inverter (`transforms`),
//! - the reconstruction pipelines recovering the absorption coefficients and
//!   the scattering kernel from synthetic boundary measurements
//!   (`reconstruction`).
//!
//! All numerics are generic over the scalar type via [`scalar::Real`]
//! (`f32` or `f64`); the `*64` aliases below pin the common double-precision
//! instantiations.

pub mod coefficients;
pub mod error;
pub mod geometry;
pub mod io;
pub mod metrics;
pub mod reconstruction;
pub mod scalar;
pub mod transforms;
pub mod transport;
pub mod vec3;

pub use error::{Error, Result};
pub use scalar::Real;
pub use vec3::Vec3;

/// Double-precision aliases for the main types.
pub type Vec64 = Vec3<f64>;
pub type Domain64 = geometry::Domain<f64>;
pub type AngularGrid64 = geometry::AngularGrid<f64>;
pub type ScalarField64 = coefficients::ScalarField<f64>;
pub type PhaseFunction64 = coefficients::PhaseFunction<f64>;
pub type BoundarySource64 = coefficients::BoundarySource<f64>;
pub type RadianceField64 = transport::RadianceField<f64>;
pub type BoundaryTrace64 = transport::BoundaryTrace<f64>;
pub type Sinogram64 = transforms::Sinogram<f64>;
pub type LineSet64 = transforms::LineSet<f64>;
