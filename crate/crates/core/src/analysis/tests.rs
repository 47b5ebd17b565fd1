use super::*;
use crate::assembly::{assemble, QuadratureSettings};
use crate::mesh::{build_square_mesh, Point, SquareSplit};
use crate::solver::solve_full;
use crate::spaces::{build_dofmap, interp};
use crate::trace::build_trace_projector;
use std::sync::Arc;

fn report_with(h: f64, e: f64) -> ErrorReport {
    ErrorReport {
        level: 0,
        order: 0,
        tau: 0.0,
        h,
        n_dofs: 0,
        residual: 0.0,
        e_u: e,
        e_q: e,
        e_div: e,
        j_qn: e,
        j_u: e,
        e_mu: e,
        e_mean_mu: e,
        e_mean_u: e,
        norm_q: 1.0,
    }
}

#[test]
fn fit_rates_examples() {
    // {1, 0.25, 0.0625} at h {1, 0.5, 0.25} -> slope 2
    let slope = fit_loglog(&[1.0, 0.5, 0.25], &[1.0, 0.25, 0.0625]).unwrap();
    assert!((slope - 2.0).abs() < 1e-10);

    // constant errors -> slope 0
    let slope = fit_loglog(&[1.0, 0.5, 0.25], &[0.7, 0.7, 0.7]).unwrap();
    assert!(slope.abs() < 1e-12);

    // exact h^p sequences recover p
    for p in [0.5, 1.0, 3.25] {
        let hs = [1.0, 0.5, 0.25, 0.125];
        let es: Vec<f64> = hs.iter().map(|&h: &f64| h.powf(p)).collect();
        assert!((fit_loglog(&hs, &es).unwrap() - p).abs() < 1e-10);
    }

    // nonpositive errors are excluded; fewer than two points -> None
    assert!(fit_loglog(&[1.0, 0.5], &[0.3, 0.0]).is_none());
    let filtered = fit_loglog(&[1.0, 0.5, 0.25], &[1.0, 0.0, 0.25]).unwrap();
    assert!((filtered - 1.0).abs() < 1e-12);
}

#[test]
fn convergence_table_window() {
    let mut table = ConvergenceTable::default();
    // first row off-trend; last three exactly h^2
    table.push(report_with(2.0, 17.0));
    for &h in &[1.0, 0.5, 0.25] {
        table.push(report_with(h, h * h));
    }
    let r = table.rate("e_u", 3).unwrap();
    assert!((r - 2.0).abs() < 1e-10);
    let all = table.rates(3);
    assert_eq!(all.len(), ErrorReport::COLUMNS.len());
    for (_, slope) in all {
        assert!((slope.unwrap() - 2.0).abs() < 1e-10);
    }
}

/// A discrete triple that represents a polynomial solution exactly must
/// produce vanishing errors in every column.
#[test]
fn errors_vanish_when_reference_equals_the_discrete_solution() {
    let mesh = build_square_mesh(2, &SquareSplit::vertical(0.5)).unwrap();
    let q = 1;
    let dofmap = build_dofmap(&mesh, q).unwrap();
    let quad = QuadratureSettings::default();
    let projector = build_trace_projector(&mesh, &dofmap, quad.trace_points(q)).unwrap();

    // u and its flux are in the discrete spaces on affine meshes at q = 1
    let u = |p: Point| 1.0 + 2.0 * p.x - p.y + 3.0 * p.x * p.y;
    let grad = |p: Point| Point::new(2.0 + 3.0 * p.y, -1.0 + 3.0 * p.x);
    let reference = ReferenceSolution {
        name: "poly",
        u: Arc::new(u),
        grad_u: Arc::new(grad),
        kappa: Arc::new(|_| 1.0),
        source: Arc::new(|_| 0.0),
    };
    let solution = crate::spaces::Solution {
        flux: interp::interpolate_flux(&mesh, &dofmap, q + 4, |p| reference.flux(p)),
        scalar: interp::project_scalar(&mesh, &dofmap, q + 4, u),
        hybrid: interp::project_facet_values(&mesh, &dofmap, q + 4, |fid, t| {
            u(mesh.facet_mapping(fid).point(t))
        }),
    };
    let report = compute_errors(&mesh, &dofmap, &projector, &solution, &reference, 1.0, &quad);
    for col in ErrorReport::COLUMNS {
        assert!(
            report.column(col) < 1e-12,
            "{col} = {:.3e} should vanish",
            report.column(col)
        );
    }
    assert!(report.norm_q > 1.0);
}

/// tau = 0 yields exact normal flux continuity up to solver accuracy.
#[test]
fn tau_zero_solve_has_negligible_flux_jump() {
    let reference = manufactured_square_reference();
    let mesh = build_square_mesh(4, &SquareSplit::vertical(0.5)).unwrap();
    let q = 1;
    let dofmap = build_dofmap(&mesh, q).unwrap();
    let quad = QuadratureSettings::default();
    let projector = build_trace_projector(&mesh, &dofmap, quad.trace_points(q)).unwrap();
    let system = assemble(
        &mesh,
        &dofmap,
        &projector,
        &reference.problem_data(0.0),
        &quad,
    )
    .unwrap();
    let (solution, report) = solve_full(&mesh, &dofmap, &system).unwrap();
    assert!(report.residual <= 1e-10);
    let errors = compute_errors(&mesh, &dofmap, &projector, &solution, &reference, 0.0, &quad);
    assert!(
        errors.j_qn / errors.norm_q <= 1e-10,
        "relative flux jump {:.3e}",
        errors.j_qn / errors.norm_q
    );
}

/// First-order convergence of e_u at q = 0: the error roughly halves from
/// one level to the next.
#[test]
fn manufactured_error_halves_at_lowest_order() {
    let reference = manufactured_square_reference();
    let quad = QuadratureSettings::default();
    let mut errs = Vec::new();
    for n in [4, 8] {
        let mesh = build_square_mesh(n, &SquareSplit::vertical(0.5)).unwrap();
        let dofmap = build_dofmap(&mesh, 0).unwrap();
        let projector = build_trace_projector(&mesh, &dofmap, quad.trace_points(0)).unwrap();
        let system = assemble(
            &mesh,
            &dofmap,
            &projector,
            &reference.problem_data(1.0),
            &quad,
        )
        .unwrap();
        let (solution, _) = solve_full(&mesh, &dofmap, &system).unwrap();
        let report = compute_errors(&mesh, &dofmap, &projector, &solution, &reference, 1.0, &quad);
        errs.push(report.e_u);
    }
    let ratio = errs[0] / errs[1];
    assert!(
        (1.7..=2.3).contains(&ratio),
        "e_u ratio across one refinement: {ratio}"
    );
}

/// Norm monotonicity under refinement for the manufactured case.
#[test]
fn errors_decrease_under_refinement() {
    let reference = manufactured_square_reference();
    let quad = QuadratureSettings::default();
    let mut rows = Vec::new();
    for n in [2, 4, 8] {
        let mesh = build_square_mesh(n, &SquareSplit::vertical(0.5)).unwrap();
        let dofmap = build_dofmap(&mesh, 1).unwrap();
        let projector = build_trace_projector(&mesh, &dofmap, quad.trace_points(1)).unwrap();
        let system = assemble(
            &mesh,
            &dofmap,
            &projector,
            &reference.problem_data(1.0),
            &quad,
        )
        .unwrap();
        let (solution, _) = solve_full(&mesh, &dofmap, &system).unwrap();
        rows.push(compute_errors(
            &mesh, &dofmap, &projector, &solution, &reference, 1.0, &quad,
        ));
    }
    for pair in rows.windows(2) {
        assert!(pair[1].e_u < pair[0].e_u);
        assert!(pair[1].e_q < pair[0].e_q);
        assert!(pair[1].e_div < pair[0].e_div);
    }
}
