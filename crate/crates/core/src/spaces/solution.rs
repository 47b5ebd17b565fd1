//! Discrete solution triple and point evaluation.

use super::{DofMap, QReferenceBasis, RTReferenceBasis};
use crate::legendre;
use crate::mesh::{Mesh, Point};

/// Coefficients of (q_h, u_h, mu_h) against a [`DofMap`].
#[derive(Debug, Clone)]
pub struct Solution {
    pub flux: Vec<f64>,
    pub scalar: Vec<f64>,
    pub hybrid: Vec<f64>,
}

impl Solution {
    pub fn zeros(dofmap: &DofMap) -> Self {
        Self {
            flux: vec![0.0; dofmap.n_flux],
            scalar: vec![0.0; dofmap.n_scalar],
            hybrid: vec![0.0; dofmap.n_hybrid],
        }
    }

    /// Split a stacked [flux | scalar | hybrid] vector.
    pub fn from_stacked(dofmap: &DofMap, x: &[f64]) -> Self {
        assert_eq!(x.len(), dofmap.total());
        let (f, rest) = x.split_at(dofmap.n_flux);
        let (s, h) = rest.split_at(dofmap.n_scalar);
        Self {
            flux: f.to_vec(),
            scalar: s.to_vec(),
            hybrid: h.to_vec(),
        }
    }

    pub fn to_stacked(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.flux.len() + self.scalar.len() + self.hybrid.len());
        out.extend_from_slice(&self.flux);
        out.extend_from_slice(&self.scalar);
        out.extend_from_slice(&self.hybrid);
        out
    }
}

/// Evaluates discrete fields in reference or world coordinates.
pub struct FieldEvaluator<'a> {
    pub mesh: &'a Mesh,
    pub dofmap: &'a DofMap,
    pub rt: RTReferenceBasis,
    pub scalar_basis: QReferenceBasis,
}

impl<'a> FieldEvaluator<'a> {
    pub fn new(mesh: &'a Mesh, dofmap: &'a DofMap) -> Self {
        Self {
            mesh,
            dofmap,
            rt: RTReferenceBasis::new(dofmap.order),
            scalar_basis: QReferenceBasis::new(dofmap.order),
        }
    }

    /// Reference scalar value v_hat (before the 1/det J weight).
    pub fn u_hat(&self, sol: &Solution, cell: usize, xh: [f64; 2]) -> f64 {
        let block = self.dofmap.scalar_block(cell);
        let q = self.dofmap.order;
        let px = legendre::eval(q, xh[0]);
        let py = legendre::eval(q, xh[1]);
        let mut v = 0.0;
        for i in 0..=q {
            for j in 0..=q {
                v += sol.scalar[block.start + i * (q + 1) + j] * px[i] * py[j];
            }
        }
        v
    }

    /// Physical value of u_h on a cell.
    pub fn u(&self, sol: &Solution, cell: usize, xh: [f64; 2]) -> f64 {
        let det = self.mesh.cells[cell].mapping.jacobian(xh).determinant();
        self.u_hat(sol, cell, xh) / det
    }

    /// Physical flux value on a cell (Piola transform of the local
    /// combination with gluing signs).
    pub fn flux(&self, sol: &Solution, cell: usize, xh: [f64; 2]) -> Point {
        let j = self.mesh.cells[cell].mapping.jacobian(xh);
        let det = j.determinant();
        let mut w = [0.0; 2];
        for (local, dof) in self.dofmap.cell_flux[cell].iter().enumerate() {
            let c = dof.sign * sol.flux[dof.global];
            if c != 0.0 {
                let (v, _) = self.rt.eval(local, xh);
                w[0] += c * v[0];
                w[1] += c * v[1];
            }
        }
        (j * Point::new(w[0], w[1])) / det
    }

    /// Physical divergence of the flux on a cell.
    pub fn div_flux(&self, sol: &Solution, cell: usize, xh: [f64; 2]) -> f64 {
        let det = self.mesh.cells[cell].mapping.jacobian(xh).determinant();
        let mut d = 0.0;
        for (local, dof) in self.dofmap.cell_flux[cell].iter().enumerate() {
            let c = dof.sign * sol.flux[dof.global];
            if c != 0.0 {
                let (_, dv) = self.rt.eval(local, xh);
                d += c * dv;
            }
        }
        d / det
    }

    /// Hybrid value on a skeleton facet at facet parameter t.
    pub fn mu(&self, sol: &Solution, facet: usize, t: f64) -> f64 {
        let block = self.dofmap.hybrid_block(facet);
        let vals = legendre::eval(self.dofmap.order, t);
        sol.hybrid[block]
            .iter()
            .zip(&vals)
            .map(|(c, v)| c * v)
            .sum()
    }

    /// Physical u_h at a world point, searching for the containing cell.
    pub fn u_at(&self, sol: &Solution, p: Point) -> Option<f64> {
        let (cell, xh) = locate(self.mesh, p)?;
        Some(self.u(sol, cell, xh))
    }
}

/// Find the cell containing a world point via per-cell Newton inversion of
/// the mapping. Returns the reference coordinates alongside.
pub fn locate(mesh: &Mesh, p: Point) -> Option<(usize, [f64; 2])> {
    let pad = 1e-9;
    for (cid, cell) in mesh.cells.iter().enumerate() {
        // cheap reject on a sampled bounding box
        let mut lo = Point::new(f64::INFINITY, f64::INFINITY);
        let mut hi = Point::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for &x in &[0.0, 0.5, 1.0] {
            for &y in &[0.0, 0.5, 1.0] {
                let q = cell.mapping.eval([x, y]);
                lo = lo.inf(&q);
                hi = hi.sup(&q);
            }
        }
        let margin = 0.3 * (hi - lo).norm() + pad;
        if p.x < lo.x - margin || p.x > hi.x + margin || p.y < lo.y - margin || p.y > hi.y + margin
        {
            continue;
        }
        let mut xh = Point::new(0.5, 0.5);
        let mut converged = false;
        for _ in 0..30 {
            let r = cell.mapping.eval([xh.x, xh.y]) - p;
            if r.norm() < 1e-13 {
                converged = true;
                break;
            }
            let j = cell.mapping.jacobian([xh.x, xh.y]);
            let Some(jinv) = j.try_inverse() else { break };
            xh -= jinv * r;
            if xh.x < -1.0 || xh.x > 2.0 || xh.y < -1.0 || xh.y > 2.0 {
                break;
            }
        }
        if converged
            && xh.x >= -1e-10
            && xh.x <= 1.0 + 1e-10
            && xh.y >= -1e-10
            && xh.y <= 1.0 + 1e-10
        {
            return Some((cid, [xh.x.clamp(0.0, 1.0), xh.y.clamp(0.0, 1.0)]));
        }
    }
    None
}
