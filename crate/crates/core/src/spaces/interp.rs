//! Interpolation into the discrete spaces, used by the rate studies and as
//! an independent route in tests.

use super::{DofMap, QReferenceBasis, RTReferenceBasis};
use crate::legendre;
use crate::mesh::{FacetKind, Mesh, Point};
use crate::quadrature::{gauss_rule, tensor_rule};
use nalgebra::{DMatrix, DVector};

/// Canonical interpolation into the flux space: facet dofs are Legendre
/// moments of w . n against the facet parametrization, interior dofs are
/// tensor moments of the Piola pullback. Exact on fields whose pullback
/// lies in RT^q.
pub fn interpolate_flux(
    mesh: &Mesh,
    dofmap: &DofMap,
    quad_points: usize,
    w: impl Fn(Point) -> Point,
) -> Vec<f64> {
    let q = dofmap.order;
    let rule = gauss_rule(quad_points.max(q + 2));
    let mut flux = vec![0.0; dofmap.n_flux];

    for (fid, facet) in mesh.facets.iter().enumerate() {
        let fm = mesh.facet_mapping(fid);
        let mut moments = vec![0.0; q + 1];
        for (&t, &wt) in rule.nodes.iter().zip(&rule.weights) {
            let x = fm.point(t);
            let n = fm.unit_normal(t);
            let arc = fm.arc_factor(t);
            let vals = legendre::eval(q, t);
            let wn = w(x).dot(&n);
            for k in 0..=q {
                moments[k] += wt * wn * vals[k] * arc;
            }
        }
        let plus = dofmap.facet_flux_block(fid, 0);
        flux[plus].copy_from_slice(&moments);
        if facet.kind == FacetKind::Skeleton {
            let minus = dofmap.facet_flux_block(fid, 1);
            flux[minus].copy_from_slice(&moments);
        }
    }

    if q > 0 {
        let rule2 = tensor_rule(quad_points.max(q + 2));
        let n_edge = 4 * (q + 1);
        for (cid, cell) in mesh.cells.iter().enumerate() {
            let mut mx = vec![0.0; q * (q + 1)];
            let mut my = vec![0.0; (q + 1) * q];
            for (&p, &wt) in rule2.nodes.iter().zip(&rule2.weights) {
                let j = cell.mapping.jacobian(p);
                let det = j.determinant();
                let pull = det * j.try_inverse().expect("valid cell") * w(cell.mapping.eval(p));
                let px = legendre::eval(q, p[0]);
                let py = legendre::eval(q, p[1]);
                for a in 0..q {
                    for b in 0..=q {
                        mx[a * (q + 1) + b] += wt * pull.x * px[a] * py[b];
                    }
                }
                for a in 0..=q {
                    for b in 0..q {
                        my[a * q + b] += wt * pull.y * px[a] * py[b];
                    }
                }
            }
            for (k, dof) in dofmap.cell_flux[cid][n_edge..].iter().enumerate() {
                debug_assert_eq!(dof.sign, 1.0);
                flux[dof.global] = if k < mx.len() { mx[k] } else { my[k - mx.len()] };
            }
        }
    }
    flux
}

/// Cellwise L2 projection onto the scalar space Q^q (the interpolation I_h).
/// The reference Gram carries the 1/det J weight of the scalar transform;
/// the right-hand side reduces to plain reference moments of u o Phi.
pub fn project_scalar(
    mesh: &Mesh,
    dofmap: &DofMap,
    quad_points: usize,
    u: impl Fn(Point) -> f64,
) -> Vec<f64> {
    let q = dofmap.order;
    let basis = QReferenceBasis::new(q);
    let dim = basis.dim();
    let rule = tensor_rule(quad_points.max(q + 2));
    let tab = basis.tabulate(&rule.nodes);
    let mut scalar = vec![0.0; dofmap.n_scalar];

    for (cid, cell) in mesh.cells.iter().enumerate() {
        let mut gram = DMatrix::<f64>::zeros(dim, dim);
        let mut rhs = DVector::<f64>::zeros(dim);
        for (pi, (&p, &wt)) in rule.nodes.iter().zip(&rule.weights).enumerate() {
            let det = cell.mapping.jacobian(p).determinant();
            let uval = u(cell.mapping.eval(p));
            let row = &tab[pi];
            for i in 0..dim {
                rhs[i] += wt * uval * row[i];
                for j in 0..dim {
                    gram[(i, j)] += wt * row[i] * row[j] / det;
                }
            }
        }
        let coeffs = gram
            .lu()
            .solve(&rhs)
            .expect("cell Gram matrix is positive definite");
        let block = dofmap.scalar_block(cid);
        scalar[block].copy_from_slice(coeffs.as_slice());
    }
    scalar
}

/// Moments of a function against the Legendre basis per skeleton facet:
/// the L2(0,1) projection of t -> g(facet, t) onto P^q, one block per facet
/// in hybrid numbering. Used to build discrete hybrid data from traces.
pub fn project_facet_values(
    mesh: &Mesh,
    dofmap: &DofMap,
    quad_points: usize,
    g: impl Fn(usize, f64) -> f64,
) -> Vec<f64> {
    let q = dofmap.order;
    let rule = gauss_rule(quad_points.max(q + 2));
    let mut hybrid = vec![0.0; dofmap.n_hybrid];
    for (fid, facet) in mesh.facets.iter().enumerate() {
        if facet.kind != FacetKind::Skeleton {
            continue;
        }
        let block = dofmap.hybrid_block(fid);
        for (&t, &wt) in rule.nodes.iter().zip(&rule.weights) {
            let vals = legendre::eval(q, t);
            let gv = g(fid, t);
            for k in 0..=q {
                hybrid[block.start + k] += wt * gv * vals[k] / legendre::norm_sq(k);
            }
        }
    }
    hybrid
}

pub use super::reference::RTTabulation;

/// Tabulation of the RT basis reused across cells in assembly.
pub fn tabulate_rt(rt: &RTReferenceBasis, points: &[[f64; 2]]) -> RTTabulation {
    rt.tabulate(points)
}
