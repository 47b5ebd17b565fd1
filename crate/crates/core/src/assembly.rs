//! Assembly of the stabilized hybrid mixed block system.
//!
//! Unknown order is [flux | scalar | hybrid]. The assembled saddle matrix is
//! the symmetrized form
//!
//! ```text
//!   [ A    B    C  ] [q ]   [  0 ]
//!   [ B^T -D    E  ] [u ] = [ -F ]
//!   [ C^T  E^T -G  ] [mu]   [  0 ]
//! ```
//!
//! with A the 1/kappa-weighted flux mass, B the u-div coupling, C the
//! hybrid-jump coupling, D/E/G the tau-weighted stabilization blocks built
//! from projected traces, and F_i = int f v_i dx. The scalar and hybrid
//! equations of the formulation are multiplied by -1, which is why the
//! scalar block of the right-hand side carries -F and the matrix is
//! symmetric.
//!
//! Because flux dofs are facet moments in the Legendre basis, the C block is
//! exact with entries +-1: the moment k of the normal jump against the
//! hybrid mode k is the plus-side dof minus the minus-side dof.

use crate::error::{Error, Result};
use crate::mesh::{FacetKind, Mesh, Point};
use crate::quadrature::tensor_rule;
use crate::sparse::{Csc, Triplets};
use crate::spaces::{DofMap, QReferenceBasis, RTReferenceBasis};
use crate::trace::{Side, TraceProjector};
use nalgebra::DMatrix;
use rayon::prelude::*;
use std::fmt::Write as _;
use std::sync::Arc;

/// Coefficient, source, and stabilization parameter of one problem.
#[derive(Clone)]
pub struct ProblemData {
    pub kappa: Arc<dyn Fn(Point) -> f64 + Send + Sync>,
    pub source: Arc<dyn Fn(Point) -> f64 + Send + Sync>,
    pub tau: f64,
}

impl ProblemData {
    pub fn new(
        kappa: impl Fn(Point) -> f64 + Send + Sync + 'static,
        source: impl Fn(Point) -> f64 + Send + Sync + 'static,
        tau: f64,
    ) -> Self {
        Self {
            kappa: Arc::new(kappa),
            source: Arc::new(source),
            tau,
        }
    }

    /// Unit coefficient with the given source.
    pub fn with_unit_kappa(
        source: impl Fn(Point) -> f64 + Send + Sync + 'static,
        tau: f64,
    ) -> Self {
        Self::new(|_| 1.0, source, tau)
    }
}

/// Quadrature knobs: points per direction are `order + offset`.
#[derive(Debug, Clone, Copy)]
pub struct QuadratureSettings {
    /// Cell rule offset; curved cells make integrands rational, the default
    /// of 3 over-integrates enough that quadrature error stays below
    /// discretization error.
    pub volume_offset: usize,
    /// Facet moment rule offset for the trace projector.
    pub trace_offset: usize,
    /// Extra points for error norms on top of the volume rule.
    pub error_extra: usize,
}

impl Default for QuadratureSettings {
    fn default() -> Self {
        Self {
            volume_offset: 3,
            trace_offset: 3,
            error_extra: 4,
        }
    }
}

impl QuadratureSettings {
    pub fn volume_points(&self, q: usize) -> usize {
        q + self.volume_offset
    }

    pub fn trace_points(&self, q: usize) -> usize {
        q + self.trace_offset
    }

    pub fn error_points(&self, q: usize) -> usize {
        self.volume_points(q) + self.error_extra
    }
}

/// Sparse blocks of the assembled system.
#[derive(Debug, Clone)]
pub struct BlockSystem {
    pub n_flux: usize,
    pub n_scalar: usize,
    pub n_hybrid: usize,
    pub tau: f64,
    /// flux mass with weight 1/kappa (flux x flux), symmetric positive definite
    pub a: Csc,
    /// u / div-w coupling (flux x scalar)
    pub b: Csc,
    /// hybrid / normal-jump coupling (flux x hybrid), entries +-1
    pub c: Csc,
    /// tau-weighted projected-trace mass (scalar x scalar), PSD
    pub d: Csc,
    /// tau-weighted trace-hybrid coupling (scalar x hybrid)
    pub e: Csc,
    /// 2 tau-weighted hybrid mass (hybrid x hybrid), PSD
    pub g: Csc,
    /// F_i = int f v_i dx on the scalar block (before symmetrization)
    pub rhs_scalar: Vec<f64>,
}

impl BlockSystem {
    pub fn total(&self) -> usize {
        self.n_flux + self.n_scalar + self.n_hybrid
    }

    pub fn scalar_offset(&self) -> usize {
        self.n_flux
    }

    pub fn hybrid_offset(&self) -> usize {
        self.n_flux + self.n_scalar
    }

    /// Symmetrized full matrix [[A, B, C], [B^T, -D, E], [C^T, E^T, -G]].
    pub fn full_matrix(&self) -> Csc {
        let n = self.total();
        let (ou, om) = (self.scalar_offset(), self.hybrid_offset());
        let nnz = self.a.nnz()
            + 2 * (self.b.nnz() + self.c.nnz() + self.e.nnz())
            + self.d.nnz()
            + self.g.nnz();
        let mut trip = Triplets::new(n, n);
        trip.entries.reserve(nnz);
        for j in 0..self.n_flux {
            for (i, v) in self.a.col(j) {
                trip.push(i, j, v);
            }
        }
        for j in 0..self.n_scalar {
            for (i, v) in self.b.col(j) {
                trip.push(i, ou + j, v);
                trip.push(ou + j, i, v);
            }
            for (i, v) in self.d.col(j) {
                trip.push(ou + i, ou + j, -v);
            }
        }
        for j in 0..self.n_hybrid {
            for (i, v) in self.c.col(j) {
                trip.push(i, om + j, v);
                trip.push(om + j, i, v);
            }
            for (i, v) in self.e.col(j) {
                trip.push(ou + i, om + j, v);
                trip.push(om + j, ou + i, v);
            }
            for (i, v) in self.g.col(j) {
                trip.push(om + i, om + j, -v);
            }
        }
        trip.to_csc()
    }

    /// Right-hand side of the symmetrized system: (0, -F, 0).
    pub fn full_rhs(&self) -> Vec<f64> {
        let mut rhs = vec![0.0; self.total()];
        for (i, v) in self.rhs_scalar.iter().enumerate() {
            rhs[self.scalar_offset() + i] = -v;
        }
        rhs
    }

    /// Coordinate-format dump of the symmetrized matrix and right-hand
    /// side, for golden-file comparisons: `row col value` per line.
    pub fn to_triplet_text(&self) -> String {
        let m = self.full_matrix();
        let rhs = self.full_rhs();
        let mut out = String::new();
        let _ = writeln!(out, "matrix {} {} {}", m.nrows, m.ncols, m.nnz());
        for j in 0..m.ncols {
            for (i, v) in m.col(j) {
                let _ = writeln!(out, "{i} {j} {v:.16e}");
            }
        }
        let _ = writeln!(out, "rhs {}", rhs.len());
        for v in &rhs {
            let _ = writeln!(out, "{v:.16e}");
        }
        out
    }
}

/// Assemble the full block system for a problem.
pub fn assemble(
    mesh: &Mesh,
    dofmap: &DofMap,
    projector: &TraceProjector,
    data: &ProblemData,
    quad: &QuadratureSettings,
) -> Result<BlockSystem> {
    if data.tau < 0.0 {
        return Err(Error::ProblemData(format!(
            "stabilization parameter tau must be nonnegative, got {}",
            data.tau
        )));
    }
    let q = dofmap.order;
    let rt = RTReferenceBasis::new(q);
    let scalar = QReferenceBasis::new(q);
    let rule = tensor_rule(quad.volume_points(q));
    let rt_tab = rt.tabulate(&rule.nodes);
    let s_tab = scalar.tabulate(&rule.nodes);
    let n_rt = rt.dim();
    let n_sc = scalar.dim();

    // cell contributions to A, B, F in parallel with a deterministic merge
    let cell_parts: Vec<Result<(Triplets, Triplets, Vec<f64>)>> = (0..mesh.n_cells())
        .into_par_iter()
        .map(|cid| {
            let cell = &mesh.cells[cid];
            let mut a_loc = DMatrix::<f64>::zeros(n_rt, n_rt);
            let mut b_loc = DMatrix::<f64>::zeros(n_rt, n_sc);
            let mut f_loc = vec![0.0; n_sc];
            let mut piola = vec![Point::new(0.0, 0.0); n_rt];
            for (pi, (&p, &w)) in rule.nodes.iter().zip(&rule.weights).enumerate() {
                let jac = cell.mapping.jacobian(p);
                let det = jac.determinant();
                let x = cell.mapping.eval(p);
                let kappa = (data.kappa)(x);
                if kappa <= 0.0 {
                    return Err(Error::ProblemData(format!(
                        "kappa = {kappa:.3e} at quadrature point ({:.6}, {:.6})",
                        x.x, x.y
                    )));
                }
                let f = (data.source)(x);
                for (i, val) in rt_tab.values[pi].iter().enumerate() {
                    piola[i] = jac * Point::new(val[0], val[1]);
                }
                let wk = w / (kappa * det);
                for i in 0..n_rt {
                    let pi_i = piola[i];
                    for j in 0..=i {
                        let m = wk * pi_i.dot(&piola[j]);
                        a_loc[(i, j)] += m;
                        if i != j {
                            a_loc[(j, i)] += m;
                        }
                    }
                }
                let wd = w / det;
                for i in 0..n_rt {
                    let div_i = rt_tab.divergences[pi][i];
                    if div_i != 0.0 {
                        for u in 0..n_sc {
                            b_loc[(i, u)] += wd * div_i * s_tab[pi][u];
                        }
                    }
                }
                for u in 0..n_sc {
                    f_loc[u] += w * f * s_tab[pi][u];
                }
            }

            let dofs = &dofmap.cell_flux[cid];
            let ublock = dofmap.scalar_block(cid);
            let mut a_trip = Triplets::new(dofmap.n_flux, dofmap.n_flux);
            let mut b_trip = Triplets::new(dofmap.n_flux, dofmap.n_scalar);
            for i in 0..n_rt {
                let di = dofs[i];
                for j in 0..n_rt {
                    let dj = dofs[j];
                    a_trip.push(di.global, dj.global, di.sign * dj.sign * a_loc[(i, j)]);
                }
                for u in 0..n_sc {
                    b_trip.push(di.global, ublock.start + u, di.sign * b_loc[(i, u)]);
                }
            }
            Ok((a_trip, b_trip, f_loc))
        })
        .collect();

    let mut a = Triplets::new(dofmap.n_flux, dofmap.n_flux);
    let mut b = Triplets::new(dofmap.n_flux, dofmap.n_scalar);
    let mut rhs_scalar = vec![0.0; dofmap.n_scalar];
    for (cid, part) in cell_parts.into_iter().enumerate() {
        let (a_trip, b_trip, f_loc) = part?;
        a.extend(&a_trip);
        b.extend(&b_trip);
        let ublock = dofmap.scalar_block(cid);
        for (k, v) in f_loc.into_iter().enumerate() {
            rhs_scalar[ublock.start + k] += v;
        }
    }

    // facet contributions: exact +-1 jump coupling and stabilization blocks
    let mut c = Triplets::new(dofmap.n_flux, dofmap.n_hybrid);
    let mut d = Triplets::new(dofmap.n_scalar, dofmap.n_scalar);
    let mut e = Triplets::new(dofmap.n_scalar, dofmap.n_hybrid);
    let mut g = Triplets::new(dofmap.n_hybrid, dofmap.n_hybrid);
    let tau = data.tau;
    for (fid, facet) in mesh.facets.iter().enumerate() {
        if facet.kind != FacetKind::Skeleton {
            continue;
        }
        let hyb = dofmap.hybrid_block(fid);
        let plus = dofmap.facet_flux_block(fid, 0);
        let minus = dofmap.facet_flux_block(fid, 1);
        for k in 0..=q {
            c.push(plus.start + k, hyb.start + k, 1.0);
            c.push(minus.start + k, hyb.start + k, -1.0);
        }
        if tau > 0.0 {
            let w = projector.facet_mass(fid);
            for side in Side::BOTH {
                let cell = match side {
                    Side::Plus => facet.plus.cell,
                    Side::Minus => facet.minus.expect("skeleton facet").cell,
                };
                let p = projector.side_matrix(fid, side);
                let ptw = p.transpose() * w;
                let dloc = &ptw * p;
                let ublock = dofmap.scalar_block(cell);
                for i in 0..n_sc {
                    for j in 0..n_sc {
                        d.push(ublock.start + i, ublock.start + j, tau * dloc[(i, j)]);
                    }
                    for k in 0..=q {
                        e.push(ublock.start + i, hyb.start + k, tau * ptw[(i, k)]);
                    }
                }
            }
            for k in 0..=q {
                for l in 0..=q {
                    g.push(hyb.start + k, hyb.start + l, 2.0 * tau * w[(k, l)]);
                }
            }
        }
    }

    Ok(BlockSystem {
        n_flux: dofmap.n_flux,
        n_scalar: dofmap.n_scalar,
        n_hybrid: dofmap.n_hybrid,
        tau,
        a: a.to_csc(),
        b: b.to_csc(),
        c: c.to_csc(),
        d: d.to_csc(),
        e: e.to_csc(),
        g: g.to_csc(),
        rhs_scalar,
    })
}

/// F_i = int f v_i dx on the scalar block; the determinant of the scalar
/// transform cancels against the volume element, leaving plain reference
/// moments weighted by f.
pub fn assemble_rhs(
    mesh: &Mesh,
    dofmap: &DofMap,
    f: &(dyn Fn(Point) -> f64 + Sync),
    quad: &QuadratureSettings,
) -> Vec<f64> {
    let q = dofmap.order;
    let scalar = QReferenceBasis::new(q);
    let rule = tensor_rule(quad.volume_points(q));
    let s_tab = scalar.tabulate(&rule.nodes);
    let mut rhs = vec![0.0; dofmap.n_scalar];
    for (cid, cell) in mesh.cells.iter().enumerate() {
        let block = dofmap.scalar_block(cid);
        for (pi, (&p, &w)) in rule.nodes.iter().zip(&rule.weights).enumerate() {
            let fv = f(cell.mapping.eval(p));
            for u in 0..scalar.dim() {
                rhs[block.start + u] += w * fv * s_tab[pi][u];
            }
        }
    }
    rhs
}

/// Representative world coordinates per unknown of the stacked system,
/// used by the fill-reducing ordering: facet dofs sit at facet midpoints,
/// cell dofs at cell centers.
pub fn dof_coordinates(mesh: &Mesh, dofmap: &DofMap) -> Vec<[f64; 2]> {
    let n = dofmap.total();
    let mut coords = vec![[0.0; 2]; n];
    let q = dofmap.order;
    for (fid, facet) in mesh.facets.iter().enumerate() {
        let mid = mesh.facet_mapping(fid).point(0.5);
        let p = [mid.x, mid.y];
        for k in dofmap.facet_flux_block(fid, 0) {
            coords[k] = p;
        }
        if facet.kind == FacetKind::Skeleton {
            for k in dofmap.facet_flux_block(fid, 1) {
                coords[k] = p;
            }
            for k in dofmap.hybrid_block(fid) {
                coords[dofmap.n_flux + dofmap.n_scalar + k] = p;
            }
        }
    }
    let n_interior = 2 * q * (q + 1);
    for (cid, cell) in mesh.cells.iter().enumerate() {
        let c = cell.mapping.eval([0.5, 0.5]);
        let p = [c.x, c.y];
        let dofs = &dofmap.cell_flux[cid];
        for dof in &dofs[dofs.len() - n_interior..] {
            coords[dof.global] = p;
        }
        for k in dofmap.scalar_block(cid) {
            coords[dofmap.n_flux + k] = p;
        }
    }
    coords
}
