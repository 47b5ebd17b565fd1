//! Hybrid mixed domain decomposition (HMDD) finite elements for the
//! generalized Poisson problem on 2D curved quadrilateral meshes.
//!
//! The domain is split into patches; inside each patch a mixed
//! Raviart-Thomas / piecewise-polynomial pair approximates the flux
//! q = kappa grad u and the primal variable u, and the patches are coupled
//! through a hybrid trace variable mu on the skeleton with a
//! Lehrenfeld-Schoberl stabilization of strength tau >= 0. tau = 0 recovers
//! the hybrid mixed (Raviart-Thomas hybrid) method; large tau approaches a
//! continuous coupling.
//!
//! Crate layout. [`mesh`] builds and refines curved quad meshes with exact
//! geometry; [`quadrature`] and [`legendre`] provide the 1D/2D rules and the
//! shifted Legendre basis everything is expressed in; [`spaces`] holds the
//! reference elements, dof maps, and physical transforms; [`trace`] the
//! facet projection of one-sided traces; [`assembly`] the block saddle-point
//! system; [`solver`] the sparse direct solve and per-patch static
//! condensation; [`analysis`] reference solutions, error norms, and
//! convergence rates; [`study`] the batch runner behind the CLI and
//! [`plot`] its SVG output.

pub mod analysis;
pub mod assembly;
pub mod error;
pub mod legendre;
pub mod mesh;
pub mod plot;
pub mod quadrature;
pub mod solver;
pub mod spaces;
pub mod sparse;
pub mod study;
pub mod trace;

pub use error::{Error, Result};
