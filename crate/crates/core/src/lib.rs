//! Numerical spectral geometry of simply connected spherical domains.
//!
//! The crate verifies, at desk scale, that among such domains of fixed area
//! the geodesic cap maximizes the first positive Neumann eigenvalue. The
//! verification runs through a chain of computable quantities:
//!
//!   μ₂(Ω) ≤ κ₁(Ω, q̄) ≤ κ₁(Ω*) = μ₂(Ω*),
//!
//! where μ₂ is the first positive Neumann eigenvalue (computed by a weighted
//! finite-element solver on the conformal disk model), κ₁ is the lowest
//! eigenvalue of a radial Sturm–Liouville reduction taken at the balanced
//! pole q̄ (where the density barycenter vanishes), and Ω* is the cap of the
//! same area, whose spectrum is computed independently on the sphere.

pub mod barycenter;
pub mod cap;
pub mod domain;
pub mod error;
pub mod interp;
pub mod neumann2d;
pub mod quad;
pub mod radial;
pub mod tridiag;
pub mod verify;

pub use barycenter::{BalancedPoleResult, SteklovLimitRow, SteklovSpectrum};
pub use cap::CapModeSpectrum;
pub use domain::{AnalyticMap, ConformalDomain, ProfileFunction, RecenteredDensity};
pub use error::{Error, Result};
pub use neumann2d::{DiskMesh, MeshEigenResult};
pub use radial::SlSolution;
pub use verify::{Resolutions, VerificationReport, VerifyConfig};
