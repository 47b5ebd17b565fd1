//! Reference elements, physical transforms, and global dof maps.
//!
//! Flux functions live in the quad Raviart-Thomas space RT^q =
//! Q_{q+1,q} x Q_{q,q+1} on the reference square and map to the mesh by the
//! contravariant Piola transform w = (grad Phi) w_hat / det(grad Phi), which
//! preserves edge fluxes and divergence structure. Scalar cell functions map
//! as v = v_hat / det(grad Phi), so cell integrals of v equal reference
//! integrals of v_hat. Facet functions are degree-q polynomials in the facet
//! parameter, stored in the shifted Legendre basis.
//!
//! All flux degrees of freedom are Legendre moments of normal traces, so
//! gluing two cells across a shared edge only needs a sign per mode: the
//! parity of the Legendre index under t -> 1-t.

mod dofmap;
pub mod interp;
mod reference;
mod solution;

pub use dofmap::{build_dofmap, DofMap, FluxDof};
pub use reference::{FacetReferenceBasis, QReferenceBasis, RTReferenceBasis};
pub use solution::{locate, FieldEvaluator, Solution};

use crate::mesh::{CellMapping, Point};

/// Piola transform of a reference flux value at a reference point:
/// w(x) = J w_hat / det J. The physical divergence is div w_hat / det J.
pub fn piola_value(cell: &CellMapping, xh: [f64; 2], w_hat: [f64; 2]) -> Point {
    let j = cell.jacobian(xh);
    let det = j.determinant();
    (j * Point::new(w_hat[0], w_hat[1])) / det
}

/// Scalar transform of a reference value at a reference point:
/// v(x) = v_hat / det J.
pub fn scalar_value(cell: &CellMapping, xh: [f64; 2], v_hat: f64) -> f64 {
    v_hat / cell.jacobian(xh).determinant()
}
