//! Projected one-sided traces onto the facet polynomial space.
//!
//! A scalar cell function transforms as v = v_hat / det(grad Phi), so its
//! trace composed with the facet parametrization is in general not a
//! polynomial. Per skeleton facet and side, the projector realizes the
//! L2(0,1) projection of that composed trace onto P^q:
//!
//!   (PItr v o Phi_F, nu)_{L2(0,1)} = (tr v o Phi_F, nu)_{L2(0,1)}
//!   for all nu in P^q,
//!
//! whose Gram matrix in the Legendre basis is exactly diagonal. Facet
//! polynomials are represented by their Legendre coefficients in the facet
//! parameter; physical integrals over a facet carry the arc factor |Phi_F'|
//! through the weighted facet mass stored alongside.

use crate::error::{Error, Result};
use crate::legendre;
use crate::mesh::{edge_point, FacetKind, Mesh, Orientation};
use crate::quadrature::gauss_rule;
use crate::spaces::DofMap;
use nalgebra::DMatrix;

/// Per-side projection matrices and facet masses for every skeleton facet.
#[derive(Debug, Clone)]
pub struct TraceProjector {
    pub order: usize,
    pub quad_points: usize,
    /// (q+1) x (q+1)^2 matrices per skeleton facet, plus then minus side,
    /// indexed by facet id.
    sides: Vec<Option<[DMatrix<f64>; 2]>>,
    /// Weighted facet mass int L[k] L[l] |Phi_F'| dt per skeleton facet.
    masses: Vec<Option<DMatrix<f64>>>,
}

/// Side selector matching the +/- notation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Plus,
    Minus,
}

impl Side {
    pub const BOTH: [Side; 2] = [Side::Plus, Side::Minus];

    pub fn index(self) -> usize {
        match self {
            Side::Plus => 0,
            Side::Minus => 1,
        }
    }
}

/// Build the projector for all skeleton facets. `quad_points` is the number
/// of Gauss points for the trace moments; the integrand contains the
/// non-polynomial factor 1/det(grad Phi), so at least q+2 points are
/// required.
pub fn build_trace_projector(
    mesh: &Mesh,
    dofmap: &DofMap,
    quad_points: usize,
) -> Result<TraceProjector> {
    let q = dofmap.order;
    if quad_points < q + 2 {
        return Err(Error::Config(format!(
            "trace moments need at least q+2 = {} quadrature points, got {quad_points}",
            q + 2
        )));
    }
    let rule = gauss_rule(quad_points);
    let dim_facet = q + 1;
    let dim_cell = (q + 1) * (q + 1);

    let mut sides = vec![None; mesh.facets.len()];
    let mut masses = vec![None; mesh.facets.len()];

    for (fid, facet) in mesh.facets.iter().enumerate() {
        if facet.kind != FacetKind::Skeleton {
            continue;
        }
        let fm = mesh.facet_mapping(fid);
        let mut mats = [
            DMatrix::<f64>::zeros(dim_facet, dim_cell),
            DMatrix::<f64>::zeros(dim_facet, dim_cell),
        ];
        let mut mass = DMatrix::<f64>::zeros(dim_facet, dim_facet);
        for (&t, &wt) in rule.nodes.iter().zip(&rule.weights) {
            let arc = fm.arc_factor(t);
            if arc <= 0.0 {
                return Err(Error::InvalidGeometry(format!(
                    "facet {fid}: degenerate arc factor at t = {t}"
                )));
            }
            let lt = legendre::eval(q, t);
            for k in 0..dim_facet {
                for l in 0..dim_facet {
                    mass[(k, l)] += wt * lt[k] * lt[l] * arc;
                }
            }
            for side in Side::BOTH {
                let fs = match side {
                    Side::Plus => facet.plus,
                    Side::Minus => facet.minus.expect("skeleton facet has two sides"),
                };
                let tt = match fs.orientation {
                    Orientation::Same => t,
                    Orientation::Reversed => 1.0 - t,
                };
                let xh = edge_point(fs.local_edge, tt);
                let det = mesh.cells[fs.cell].mapping.jacobian(xh).determinant();
                let px = legendre::eval(q, xh[0]);
                let py = legendre::eval(q, xh[1]);
                let mat = &mut mats[side.index()];
                for k in 0..dim_facet {
                    // diagonal Gram: coefficient k is the moment / norm_sq(k)
                    let scale = wt * lt[k] / (legendre::norm_sq(k) * det);
                    for i in 0..=q {
                        for j in 0..=q {
                            mat[(k, i * (q + 1) + j)] += scale * px[i] * py[j];
                        }
                    }
                }
            }
        }
        sides[fid] = Some(mats);
        masses[fid] = Some(mass);
    }

    Ok(TraceProjector {
        order: q,
        quad_points,
        sides,
        masses,
    })
}

impl TraceProjector {
    /// Projection matrix of one side of a skeleton facet,
    /// (q+1) x (q+1)^2 over the side cell's reference coefficients.
    pub fn side_matrix(&self, facet: usize, side: Side) -> &DMatrix<f64> {
        &self.sides[facet].as_ref().expect("skeleton facet")[side.index()]
    }

    /// Weighted facet mass int L[k] L[l] |Phi_F'| dt.
    pub fn facet_mass(&self, facet: usize) -> &DMatrix<f64> {
        self.masses[facet].as_ref().expect("skeleton facet")
    }

    /// Apply one side's projection to a cell coefficient block.
    pub fn apply_block(&self, facet: usize, side: Side, cell_coeffs: &[f64]) -> Vec<f64> {
        let mat = self.side_matrix(facet, side);
        let mut out = vec![0.0; mat.nrows()];
        for k in 0..mat.nrows() {
            let mut acc = 0.0;
            for (c, v) in cell_coeffs.iter().enumerate() {
                acc += mat[(k, c)] * v;
            }
            out[k] = acc;
        }
        out
    }
}

/// One-sided trace value tr(+-) u_h at facet parameter t, evaluated through
/// the side cell's scalar transform.
pub fn one_sided_trace_value(
    mesh: &Mesh,
    dofmap: &DofMap,
    facet: usize,
    side: Side,
    scalar_coeffs: &[f64],
    t: f64,
) -> f64 {
    let f = &mesh.facets[facet];
    let fs = match side {
        Side::Plus => f.plus,
        Side::Minus => f.minus.expect("skeleton facet has two sides"),
    };
    let tt = match fs.orientation {
        Orientation::Same => t,
        Orientation::Reversed => 1.0 - t,
    };
    let xh = edge_point(fs.local_edge, tt);
    let det = mesh.cells[fs.cell].mapping.jacobian(xh).determinant();
    let q = dofmap.order;
    let px = legendre::eval(q, xh[0]);
    let py = legendre::eval(q, xh[1]);
    let block = dofmap.scalar_block(fs.cell);
    let mut v = 0.0;
    for i in 0..=q {
        for j in 0..=q {
            v += scalar_coeffs[block.start + i * (q + 1) + j] * px[i] * py[j];
        }
    }
    v / det
}

/// Legendre coefficients of PItr(+-) u_h composed with the facet
/// parametrization, from a full scalar coefficient vector sized per dofmap.
pub fn project_trace(
    projector: &TraceProjector,
    mesh: &Mesh,
    dofmap: &DofMap,
    side: Side,
    facet: usize,
    scalar_coeffs: &[f64],
) -> Vec<f64> {
    assert_eq!(scalar_coeffs.len(), dofmap.n_scalar);
    let f = &mesh.facets[facet];
    let cell = match side {
        Side::Plus => f.plus.cell,
        Side::Minus => f.minus.expect("skeleton facet has two sides").cell,
    };
    let block = dofmap.scalar_block(cell);
    projector.apply_block(facet, side, &scalar_coeffs[block])
}
