//! Optimal polynomial admissible meshes on compact planar and 3D domains.
//!
//! Two constructions are provided:
//!
//! * [`meshgen_star`]: star-shaped domains whose complement has positive
//!   reach. Geodesic boundary meshes are replicated on `2n + 1` radial layers
//!   placed at Chebyshev fractions; norming constant `2(sqrt 2 + 1)`.
//! * [`meshgen_c11`]: `C^{1,1}` domains. Distance level sets equispaced in the
//!   image of an arccos potential carry transported boundary meshes, and a
//!   cubic grid covers the inner core.
//!
//! [`verify`] certifies the norming inequality numerically (sampled ratios and
//! an exact-on-grid LP), the polynomial inequalities the constructions rest
//! on, cardinality growth, and the least-squares pipeline.

pub mod error;
pub mod geometry;
pub mod io;
pub mod meshgen_c11;
pub mod meshgen_star;
pub mod polyspace;
pub mod quadrature;
pub mod verify;

pub use error::{Error, Result};
