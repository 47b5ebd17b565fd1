//! Global numbering for the flux, scalar, and hybrid spaces.
//!
//! Flux dofs are physical Legendre moments of normal traces taken against
//! the facet parametrization and the facet normal (minus -> plus). Facets
//! interior to a patch carry one shared set of q+1 moments, which makes the
//! normal jump of every discrete flux vanish identically there; skeleton
//! facets carry two independent sets (plus side first); boundary facets one.
//! Cell-interior flux dofs, scalar dofs, and hybrid dofs are never shared.
//!
//! Numbering is deterministic: facet flux blocks in facet-id order, then
//! cell-interior flux blocks in cell-id order, then scalar blocks in cell-id
//! order, then hybrid blocks in skeleton-facet-id order. The three spaces
//! are indexed independently from zero; the assembled system places them in
//! flux / scalar / hybrid block order.

use super::reference::RTReferenceBasis;
use crate::error::{Error, Result};
use crate::mesh::{FacetKind, Mesh, Orientation};

/// One local flux dof's global index and gluing sign.
#[derive(Debug, Clone, Copy)]
pub struct FluxDof {
    pub global: usize,
    pub sign: f64,
}

#[derive(Debug, Clone)]
pub struct DofMap {
    pub order: usize,
    pub n_flux: usize,
    pub n_scalar: usize,
    pub n_hybrid: usize,
    /// Per cell: global flux dof and sign for each local RT dof.
    pub cell_flux: Vec<Vec<FluxDof>>,
    /// Per cell: first scalar index of the cell's (q+1)^2 block.
    pub cell_scalar: Vec<usize>,
    /// Per facet: first flux index of the plus-side facet block.
    pub facet_flux_plus: Vec<usize>,
    /// Per facet: first flux index of the minus-side block (skeleton only;
    /// other two-sided facets share the plus block).
    pub facet_flux_minus: Vec<Option<usize>>,
    /// Per facet: first hybrid index of the facet's block (skeleton only).
    pub facet_hybrid: Vec<Option<usize>>,
}

impl DofMap {
    pub fn total(&self) -> usize {
        self.n_flux + self.n_scalar + self.n_hybrid
    }

    /// Scalar block of a cell: indices `base..base + (q+1)^2`.
    pub fn scalar_block(&self, cell: usize) -> std::ops::Range<usize> {
        let n = (self.order + 1) * (self.order + 1);
        self.cell_scalar[cell]..self.cell_scalar[cell] + n
    }

    /// Hybrid block of a skeleton facet.
    pub fn hybrid_block(&self, facet: usize) -> std::ops::Range<usize> {
        let base = self.facet_hybrid[facet].expect("facet carries no hybrid dofs");
        base..base + self.order + 1
    }

    /// Flux facet block of one side of a facet (side 0 = plus, 1 = minus).
    pub fn facet_flux_block(&self, facet: usize, side: usize) -> std::ops::Range<usize> {
        let base = if side == 0 {
            self.facet_flux_plus[facet]
        } else {
            self.facet_flux_minus[facet].unwrap_or(self.facet_flux_plus[facet])
        };
        base..base + self.order + 1
    }
}

/// Build the global numbering for order q on a mesh.
pub fn build_dofmap(mesh: &Mesh, q: usize) -> Result<DofMap> {
    let per_edge = q + 1;
    let n_interior = 2 * q * (q + 1);
    let n_scalar_cell = (q + 1) * (q + 1);

    let mut facet_flux_plus = vec![0usize; mesh.facets.len()];
    let mut facet_flux_minus = vec![None; mesh.facets.len()];
    let mut facet_hybrid = vec![None; mesh.facets.len()];

    let mut next = 0usize;
    for (fid, facet) in mesh.facets.iter().enumerate() {
        facet_flux_plus[fid] = next;
        next += per_edge;
        if facet.kind == FacetKind::Skeleton {
            facet_flux_minus[fid] = Some(next);
            next += per_edge;
        }
    }
    let mut cell_interior = vec![0usize; mesh.cells.len()];
    for base in cell_interior.iter_mut() {
        *base = next;
        next += n_interior;
    }
    let n_flux = next;

    let mut cell_scalar = vec![0usize; mesh.cells.len()];
    let mut s = 0usize;
    for base in cell_scalar.iter_mut() {
        *base = s;
        s += n_scalar_cell;
    }
    let n_scalar = s;

    let mut h = 0usize;
    for (fid, facet) in mesh.facets.iter().enumerate() {
        if facet.kind == FacetKind::Skeleton {
            facet_hybrid[fid] = Some(h);
            h += per_edge;
        }
    }
    let n_hybrid = h;

    // (cell, local edge) -> (facet, side)
    let mut edge_to_facet = vec![[usize::MAX; 4]; mesh.cells.len()];
    let mut edge_side = vec![[0usize; 4]; mesh.cells.len()];
    for (fid, facet) in mesh.facets.iter().enumerate() {
        let p = facet.plus;
        if edge_to_facet[p.cell][p.local_edge] != usize::MAX {
            return Err(Error::Construction(format!(
                "cell {} edge {} appears on two facets",
                p.cell, p.local_edge
            )));
        }
        edge_to_facet[p.cell][p.local_edge] = fid;
        edge_side[p.cell][p.local_edge] = 0;
        if let Some(m) = facet.minus {
            if edge_to_facet[m.cell][m.local_edge] != usize::MAX {
                return Err(Error::Construction(format!(
                    "cell {} edge {} appears on two facets",
                    m.cell, m.local_edge
                )));
            }
            edge_to_facet[m.cell][m.local_edge] = fid;
            edge_side[m.cell][m.local_edge] = 1;
        }
    }

    let rt_dim = RTReferenceBasis::dimension(q);
    let mut cell_flux = Vec::with_capacity(mesh.cells.len());
    for cid in 0..mesh.cells.len() {
        let mut dofs = Vec::with_capacity(rt_dim);
        for edge in 0..4 {
            let fid = edge_to_facet[cid][edge];
            if fid == usize::MAX {
                return Err(Error::Construction(format!(
                    "cell {cid} edge {edge} matched no facet"
                )));
            }
            let facet = &mesh.facets[fid];
            let side = edge_side[cid][edge];
            let base = if side == 0 {
                facet_flux_plus[fid]
            } else {
                facet_flux_minus[fid].unwrap_or(facet_flux_plus[fid])
            };
            // sign of the facet normal relative to this cell's outward normal
            let normal_sign = if facet.kind == FacetKind::Boundary || side == 1 {
                1.0
            } else {
                -1.0
            };
            let orientation = if side == 0 {
                facet.plus.orientation
            } else {
                facet.minus.expect("two-sided facet").orientation
            };
            for k in 0..per_edge {
                let parity = match orientation {
                    Orientation::Same => 1.0,
                    Orientation::Reversed => {
                        if k % 2 == 0 {
                            1.0
                        } else {
                            -1.0
                        }
                    }
                };
                dofs.push(FluxDof {
                    global: base + k,
                    sign: normal_sign * parity,
                });
            }
        }
        for k in 0..n_interior {
            dofs.push(FluxDof {
                global: cell_interior[cid] + k,
                sign: 1.0,
            });
        }
        cell_flux.push(dofs);
    }

    Ok(DofMap {
        order: q,
        n_flux,
        n_scalar,
        n_hybrid,
        cell_flux,
        cell_scalar,
        facet_flux_plus,
        facet_flux_minus,
        facet_hybrid,
    })
}
