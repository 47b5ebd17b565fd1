//! Error norms against reference solutions and convergence-rate fitting.

pub mod radial;
mod reference;

pub use radial::{annulus_oracle_deviation, solve_radial_mode, RadialSolution};
pub use reference::{
    annulus_kappa, annulus_profiles, annulus_reference, annulus_source,
    manufactured_square_reference, RadialProfile, ReferenceSolution,
};

use crate::assembly::QuadratureSettings;
use crate::legendre;
use crate::mesh::{FacetKind, Mesh};
use crate::quadrature::{gauss_rule, tensor_rule};
use crate::spaces::{DofMap, QReferenceBasis, RTReferenceBasis, Solution};
use crate::trace::{Side, TraceProjector};
use rayon::prelude::*;

/// Error norms of one run. The mean columns are
/// `e_mean_mu` = ||{PItr u_h} - mu_h|| and `e_mean_u` = ||{u - PItr u_h}||,
/// both on the skeleton.
#[derive(Debug, Clone)]
pub struct ErrorReport {
    pub level: usize,
    pub order: usize,
    pub tau: f64,
    pub h: f64,
    pub n_dofs: usize,
    /// relative residual of the linear solve that produced the solution
    pub residual: f64,
    pub e_u: f64,
    pub e_q: f64,
    pub e_div: f64,
    pub j_qn: f64,
    pub j_u: f64,
    pub e_mu: f64,
    pub e_mean_mu: f64,
    pub e_mean_u: f64,
    /// L2 norm of the discrete flux, the normalization for j_qn
    pub norm_q: f64,
}

impl ErrorReport {
    pub const COLUMNS: [&'static str; 8] = [
        "e_u", "e_q", "e_div", "j_qn", "j_u", "e_mu", "e_mean_mu", "e_mean_u",
    ];

    pub fn column(&self, name: &str) -> f64 {
        match name {
            "e_u" => self.e_u,
            "e_q" => self.e_q,
            "e_div" => self.e_div,
            "j_qn" => self.j_qn,
            "j_u" => self.j_u,
            "e_mu" => self.e_mu,
            "e_mean_mu" => self.e_mean_mu,
            "e_mean_u" => self.e_mean_u,
            "norm_q" => self.norm_q,
            other => panic!("unknown error column '{other}'"),
        }
    }
}

/// All error norms of a solution against a reference, integrated with the
/// elevated error rule (error integrands are not members of the discrete
/// spaces). Cell contributions are computed in parallel and reduced in cell
/// order, so results are reproducible.
pub fn compute_errors(
    mesh: &Mesh,
    dofmap: &DofMap,
    projector: &TraceProjector,
    solution: &Solution,
    reference: &ReferenceSolution,
    tau: f64,
    quad: &QuadratureSettings,
) -> ErrorReport {
    let q = dofmap.order;
    let rule = tensor_rule(quad.error_points(q));
    let rt = RTReferenceBasis::new(q);
    let scalar = QReferenceBasis::new(q);
    let rt_tab = rt.tabulate(&rule.nodes);
    let s_tab = scalar.tabulate(&rule.nodes);
    let n_rt = rt.dim();
    let n_sc = scalar.dim();

    // per-cell squared contributions: (e_u, e_q, e_div, norm_q)
    let cell_sums: Vec<[f64; 4]> = (0..mesh.n_cells())
        .into_par_iter()
        .map(|cid| {
            let cell = &mesh.cells[cid];
            let dofs = &dofmap.cell_flux[cid];
            let ublock = dofmap.scalar_block(cid);
            let mut acc = [0.0; 4];
            for (pi, (&p, &w)) in rule.nodes.iter().zip(&rule.weights).enumerate() {
                let jac = cell.mapping.jacobian(p);
                let det = jac.determinant();
                let x = cell.mapping.eval(p);

                let mut u_hat = 0.0;
                for i in 0..n_sc {
                    u_hat += solution.scalar[ublock.start + i] * s_tab[pi][i];
                }
                let u_h = u_hat / det;

                let mut w_hat = [0.0; 2];
                let mut div_hat = 0.0;
                for i in 0..n_rt {
                    let c = dofs[i].sign * solution.flux[dofs[i].global];
                    if c != 0.0 {
                        w_hat[0] += c * rt_tab.values[pi][i][0];
                        w_hat[1] += c * rt_tab.values[pi][i][1];
                        div_hat += c * rt_tab.divergences[pi][i];
                    }
                }
                let q_h = jac * crate::mesh::Point::new(w_hat[0], w_hat[1]) / det;
                let div_h = div_hat / det;

                let dv = w * det;
                let du = (reference.u)(x) - u_h;
                let dq = reference.flux(x) - q_h;
                // div q = -f for the reference
                let dd = div_h + (reference.source)(x);
                acc[0] += dv * du * du;
                acc[1] += dv * dq.norm_squared();
                acc[2] += dv * dd * dd;
                acc[3] += dv * q_h.norm_squared();
            }
            acc
        })
        .collect();
    let mut e_u = 0.0;
    let mut e_q = 0.0;
    let mut e_div = 0.0;
    let mut norm_q = 0.0;
    for acc in cell_sums {
        e_u += acc[0];
        e_q += acc[1];
        e_div += acc[2];
        norm_q += acc[3];
    }

    // facet quantities on the skeleton
    let frule = gauss_rule(quad.error_points(q));
    let mut j_qn = 0.0;
    let mut j_u = 0.0;
    let mut e_mu = 0.0;
    let mut e_mean_mu = 0.0;
    let mut e_mean_u = 0.0;
    for (fid, facet) in mesh.facets.iter().enumerate() {
        if facet.kind != FacetKind::Skeleton {
            continue;
        }
        let fm = mesh.facet_mapping(fid);
        let hyb = dofmap.hybrid_block(fid);
        let plus = dofmap.facet_flux_block(fid, 0);
        let minus = dofmap.facet_flux_block(fid, 1);
        // Legendre coefficients of the normal-jump polynomial
        // [q_h . n] o Phi_F |Phi_F'|: moments are dof differences
        let jump_flux: Vec<f64> = (0..=q)
            .map(|k| {
                (solution.flux[plus.start + k] - solution.flux[minus.start + k])
                    / legendre::norm_sq(k)
            })
            .collect();
        let p_plus = projector.apply_block(
            fid,
            Side::Plus,
            &solution.scalar[dofmap.scalar_block(facet.plus.cell)],
        );
        let p_minus = projector.apply_block(
            fid,
            Side::Minus,
            &solution.scalar[dofmap.scalar_block(facet.minus.expect("skeleton").cell)],
        );
        for (&t, &w) in frule.nodes.iter().zip(&frule.weights) {
            let arc = fm.arc_factor(t);
            let x = fm.point(t);
            let lt = legendre::eval(q, t);
            let mut jf = 0.0;
            let mut pp = 0.0;
            let mut pm = 0.0;
            let mut mu_h = 0.0;
            for k in 0..=q {
                jf += jump_flux[k] * lt[k];
                pp += p_plus[k] * lt[k];
                pm += p_minus[k] * lt[k];
                mu_h += solution.hybrid[hyb.start + k] * lt[k];
            }
            let u_exact = (reference.u)(x);
            j_qn += w * jf * jf / arc;
            j_u += w * arc * (pp - pm) * (pp - pm);
            e_mu += w * arc * (u_exact - mu_h) * (u_exact - mu_h);
            let mean = 0.5 * (pp + pm);
            e_mean_mu += w * arc * (mean - mu_h) * (mean - mu_h);
            e_mean_u += w * arc * (u_exact - mean) * (u_exact - mean);
        }
    }

    ErrorReport {
        level: mesh.refinement_level,
        order: q,
        tau,
        h: mesh.mesh_width,
        n_dofs: dofmap.total(),
        residual: 0.0,
        e_u: e_u.sqrt(),
        e_q: e_q.sqrt(),
        e_div: e_div.sqrt(),
        j_qn: j_qn.sqrt(),
        j_u: j_u.sqrt(),
        e_mu: e_mu.sqrt(),
        e_mean_mu: e_mean_mu.sqrt(),
        e_mean_u: e_mean_u.sqrt(),
        norm_q: norm_q.sqrt(),
    }
}

/// L2(skeleton) distance between one-sided traces and their projections for
/// a scalar coefficient vector (both sides summed in quadrature). This is
/// the quantity whose rate checks the projection-error bound.
pub fn projection_gap(
    mesh: &Mesh,
    dofmap: &DofMap,
    projector: &TraceProjector,
    scalar_coeffs: &[f64],
    quad_points: usize,
) -> f64 {
    let q = dofmap.order;
    let rule = gauss_rule(quad_points);
    let mut acc = 0.0;
    for fid in mesh.skeleton_facets() {
        let fm = mesh.facet_mapping(fid);
        for side in Side::BOTH {
            let p = crate::trace::project_trace(projector, mesh, dofmap, side, fid, scalar_coeffs);
            acc += rule.integrate(|t| {
                let lt = legendre::eval(q, t);
                let proj: f64 = p.iter().zip(&lt).map(|(c, v)| c * v).sum();
                let tr =
                    crate::trace::one_sided_trace_value(mesh, dofmap, fid, side, scalar_coeffs, t);
                (tr - proj) * (tr - proj) * fm.arc_factor(t)
            });
        }
    }
    acc.sqrt()
}

/// Least-squares slope of log(y) against log(x). Pairs with a nonpositive
/// entry are excluded; fewer than two valid pairs give None.
pub fn fit_loglog(xs: &[f64], ys: &[f64]) -> Option<f64> {
    assert_eq!(xs.len(), ys.len());
    let pts: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys)
        .filter(|(&x, &y)| x > 0.0 && y > 0.0)
        .map(|(&x, &y)| (x.ln(), y.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    let denom = n * sxx - sx * sx;
    if denom.abs() < 1e-300 {
        return None;
    }
    Some((n * sxy - sx * sy) / denom)
}

/// Rows of error reports over refinement levels at fixed (order, tau).
#[derive(Debug, Clone, Default)]
pub struct ConvergenceTable {
    pub rows: Vec<ErrorReport>,
}

impl ConvergenceTable {
    pub fn push(&mut self, row: ErrorReport) {
        self.rows.push(row);
    }

    /// Fitted slope of one error column against h over the last `window`
    /// rows (all rows when window is larger than the table).
    pub fn rate(&self, column: &str, window: usize) -> Option<f64> {
        let n = self.rows.len();
        let start = n.saturating_sub(window);
        let hs: Vec<f64> = self.rows[start..].iter().map(|r| r.h).collect();
        let es: Vec<f64> = self.rows[start..].iter().map(|r| r.column(column)).collect();
        fit_loglog(&hs, &es)
    }

    /// Fitted slopes of every error column over the last `window` rows.
    pub fn rates(&self, window: usize) -> Vec<(&'static str, Option<f64>)> {
        ErrorReport::COLUMNS
            .iter()
            .map(|&c| (c, self.rate(c, window)))
            .collect()
    }
}

#[cfg(test)]
mod tests;
