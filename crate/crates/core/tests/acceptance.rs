//! Acceptance suite: the convergence and equivalence gates of the method,
//! one pass/fail line per criterion. Run with
//! `cargo test --test acceptance -- --nocapture` to see the lines.

use hmdd::analysis::{annulus_oracle_deviation, fit_loglog, projection_gap, ErrorReport};
use hmdd::assembly::{assemble, QuadratureSettings};
use hmdd::legendre;
use hmdd::mesh::FacetKind;
use hmdd::quadrature::gauss_rule;
use hmdd::solver::{condense_skeleton, solve_full};
use hmdd::spaces::{build_dofmap, interp, FieldEvaluator, RTReferenceBasis, Solution};
use hmdd::study::{run_case, Geometry};
use hmdd::trace::build_trace_projector;
use rayon::prelude::*;
use std::collections::BTreeMap;
use std::sync::Mutex;

/// Cache of solved cases shared between criteria.
struct Runner {
    quad: QuadratureSettings,
    cache: Mutex<BTreeMap<(u8, usize, usize, u64), ErrorReport>>,
}

impl Runner {
    fn new() -> Self {
        Self {
            quad: QuadratureSettings::default(),
            cache: Mutex::new(BTreeMap::new()),
        }
    }

    fn case(&self, geometry: Geometry, level: usize, order: usize, tau: f64) -> ErrorReport {
        let key = (
            matches!(geometry, Geometry::Annulus) as u8,
            level,
            order,
            tau.to_bits(),
        );
        if let Some(hit) = self.cache.lock().unwrap().get(&key) {
            return hit.clone();
        }
        let report = run_case(
            geometry,
            level,
            order,
            tau,
            hmdd::solver::SolverChoice::Full,
            &self.quad,
        )
        .unwrap_or_else(|e| panic!("run {geometry:?} level={level} q={order} tau={tau}: {e}"));
        self.cache.lock().unwrap().insert(key, report.clone());
        report
    }

    fn prefetch(&self, cases: &[(Geometry, usize, usize, f64)]) {
        cases.par_iter().for_each(|&(g, l, q, t)| {
            self.case(g, l, q, t);
        });
    }
}

struct Gate {
    lines: Vec<(String, bool)>,
}

impl Gate {
    fn new() -> Self {
        Self { lines: Vec::new() }
    }

    fn record(&mut self, name: &str, pass: bool, detail: String) {
        let verdict = if pass { "PASS" } else { "FAIL" };
        println!("criterion {name}: {verdict} - {detail}");
        self.lines.push((name.to_string(), pass));
    }

    fn finish(self) {
        let failed: Vec<String> = self
            .lines
            .iter()
            .filter(|(_, pass)| !pass)
            .map(|(name, _)| name.clone())
            .collect();
        assert!(failed.is_empty(), "failed criteria: {}", failed.join(", "));
    }
}

fn slope_over(reports: &[ErrorReport], column: &str, window: usize) -> f64 {
    let start = reports.len().saturating_sub(window);
    let hs: Vec<f64> = reports[start..].iter().map(|r| r.h).collect();
    let es: Vec<f64> = reports[start..].iter().map(|r| r.column(column)).collect();
    fit_loglog(&hs, &es).expect("fit needs two positive points")
}

#[test]
fn acceptance() {
    let runner = Runner::new();
    let mut gate = Gate::new();
    let levels: Vec<usize> = (0..=4).collect();

    // warm the cache in parallel for the expensive sweeps
    let mut prefetch = Vec::new();
    for q in 0..=2usize {
        for &tau in &[0.0, 1.0, 10.0] {
            for &l in &levels {
                prefetch.push((Geometry::Square, l, q, tau));
            }
        }
    }
    for &tau in &[10.0, 400.0] {
        for &l in &levels {
            prefetch.push((Geometry::Annulus, l, 1, tau));
        }
    }
    for &tau in &[1e-2, 1e-3, 1e-4, 1e2, 1e3, 1e4, 1.0, 0.0] {
        prefetch.push((Geometry::Annulus, 2, 1, tau));
    }
    for &tau in &[1e2, 1e3, 1e4] {
        prefetch.push((Geometry::Annulus, 0, 1, tau));
    }
    runner.prefetch(&prefetch);

    criterion_1(&runner, &mut gate, &levels);
    criterion_2(&runner, &mut gate, &levels);
    criterion_3(&runner, &mut gate);
    criterion_4(&runner, &mut gate);
    criterion_5(&runner, &mut gate);
    criterion_7(&runner, &mut gate);
    criterion_8(&mut gate);
    criterion_9(&mut gate);
    criterion_10(&mut gate);

    gate.finish();
}

/// Large-tau flux rate: e_q at q = 1, tau = 400 reduced towards q+1/2 on
/// the coarse window and trending upward on the fine one.
///
/// Known red. On this mesh family the criterion's premise does not
/// materialize: facet traces composed with the arclength-proportional facet
/// parametrizations deviate from polynomials only through the Jacobian
/// determinant along each facet, whose variation shrinks another order
/// under every exact-geometry refinement. The trace-projection consistency
/// error therefore decays at h^(q+1) instead of the generic h^(q+1/2)
/// bound (measured: slope 2.03 at q = 1, criterion 9), and the reduced e_q
/// regime at q = 1 is invisible at desk scale: measured e_q slopes stay at
/// 1.96..1.88 over levels 0..5 (111k unknowns at level 5) for every
/// window, on the symmetric and on a skewed generator alike. The same
/// mechanism IS reproduced where the constants allow it: at q = 0 the e_q
/// slope is reduced to 0.80..0.85 on coarse levels and rises to 1.16, and
/// div q at q = 1, tau = 400 shows 0.62 -> 1.08 (the q-1/2 regime with
/// q+1/2 recovery). The criterion is kept as stated rather than loosened.
#[test]
fn acceptance_criterion_6_large_tau_reduced_flux_rate() {
    let runner = Runner::new();
    let mut gate = Gate::new();
    let levels: Vec<usize> = (0..=4).collect();
    let cases: Vec<(Geometry, usize, usize, f64)> = levels
        .iter()
        .map(|&l| (Geometry::Annulus, l, 1, 400.0))
        .collect();
    runner.prefetch(&cases);
    criterion_6(&runner, &mut gate, &levels);
    gate.finish();
}

/// Manufactured square: e_u and e_mu converge at q+1 for every tau,
/// slopes over the last 3 of 5 levels within [q+0.8, q+1.3].
fn criterion_1(runner: &Runner, gate: &mut Gate, levels: &[usize]) {
    let mut pass = true;
    let mut worst = String::new();
    let mut worst_gap = 0.0;
    for q in 0..=2usize {
        for &tau in &[0.0, 1.0, 10.0] {
            let rows: Vec<ErrorReport> = levels
                .iter()
                .map(|&l| runner.case(Geometry::Square, l, q, tau))
                .collect();
            for column in ["e_u", "e_mu"] {
                let slope = slope_over(&rows, column, 3);
                let (lo, hi) = (q as f64 + 0.8, q as f64 + 1.3);
                let ok = slope >= lo && slope <= hi;
                pass &= ok;
                let gap = (slope - (q as f64 + 1.0)).abs();
                if gap > worst_gap {
                    worst_gap = gap;
                    worst = format!("{column} q={q} tau={tau}: slope {slope:.3}");
                }
            }
        }
    }
    gate.record(
        "1 (square rates q+1, tau-uniform)",
        pass,
        format!("worst deviation: {worst}"),
    );
}

/// Annulus benchmark at q = 1, tau = 10: e_u, e_mu slopes at least 1.8 over
/// the last 3 of 5 levels, after the reference passes the independent
/// radial-oracle validation at 1e-6.
fn criterion_2(runner: &Runner, gate: &mut Gate, levels: &[usize]) {
    let deviation = annulus_oracle_deviation(64).expect("oracle solve");
    let rows: Vec<ErrorReport> = levels
        .iter()
        .map(|&l| runner.case(Geometry::Annulus, l, 1, 10.0))
        .collect();
    let s_u = slope_over(&rows, "e_u", 3);
    let s_mu = slope_over(&rows, "e_mu", 3);
    let pass = deviation < 1e-6 && s_u >= 1.8 && s_mu >= 1.8;
    gate.record(
        "2 (annulus benchmark rates)",
        pass,
        format!("oracle deviation {deviation:.2e}, e_u slope {s_u:.3}, e_mu slope {s_mu:.3}"),
    );
}

/// tau = 0 gives exact normal-flux continuity: j_qn relative to ||q_h|| at
/// most 1e-10 on every tested mesh and order.
fn criterion_3(runner: &Runner, gate: &mut Gate) {
    let mut cases = Vec::new();
    for q in 0..=2usize {
        for level in 0..=2usize {
            cases.push((Geometry::Square, level, q));
        }
    }
    for level in 0..=1usize {
        cases.push((Geometry::Annulus, level, 1));
    }
    let mut pass = true;
    let mut worst = 0.0f64;
    for (g, l, q) in cases {
        let r = runner.case(g, l, q, 0.0);
        let rel = r.j_qn / r.norm_q.max(1e-300);
        worst = worst.max(rel);
        pass &= rel <= 1e-10;
    }
    gate.record(
        "3 (tau=0 exact flux continuity)",
        pass,
        format!("worst j_qn/|q_h| = {worst:.2e}"),
    );
}

/// Small-tau scaling on a fixed mesh: the flux jump decays like tau.
fn criterion_4(runner: &Runner, gate: &mut Gate) {
    let taus = [1e-2, 1e-3, 1e-4];
    let js: Vec<f64> = taus
        .iter()
        .map(|&t| runner.case(Geometry::Annulus, 2, 1, t).j_qn)
        .collect();
    let slope = fit_loglog(&taus, &js).expect("fit");
    let pass = (slope - 1.0).abs() <= 0.15;
    gate.record(
        "4 (j_qn ~ tau for small tau)",
        pass,
        format!("slope vs tau = {slope:.3}"),
    );
}

/// Large-tau scaling on a fixed mesh: the projected-trace jump decays like
/// 1/tau. The 1/tau asymptote sets in once h tau clears the transition
/// constant, so the fixed mesh is the base annulus, whose h puts the whole
/// tested tau range into the asymptotic regime (finer fixed meshes shift
/// the transition into the middle of the range).
fn criterion_5(runner: &Runner, gate: &mut Gate) {
    let taus = [1e2, 1e3, 1e4];
    let js: Vec<f64> = taus
        .iter()
        .map(|&t| runner.case(Geometry::Annulus, 0, 1, t).j_u)
        .collect();
    let slope = fit_loglog(&taus, &js).expect("fit");
    let pass = (slope + 1.0).abs() <= 0.15;
    gate.record(
        "5 (j_u ~ 1/tau for large tau)",
        pass,
        format!("slope vs tau = {slope:.3}"),
    );
}

/// Large-tau flux rate: reduced toward q+1/2 on coarse levels and trending
/// upward on the finest window.
fn criterion_6(runner: &Runner, gate: &mut Gate, levels: &[usize]) {
    let rows: Vec<ErrorReport> = levels
        .iter()
        .map(|&l| runner.case(Geometry::Annulus, l, 1, 400.0))
        .collect();
    let coarse = {
        let hs: Vec<f64> = rows[..3].iter().map(|r| r.h).collect();
        let es: Vec<f64> = rows[..3].iter().map(|r| r.e_q).collect();
        fit_loglog(&hs, &es).expect("fit")
    };
    let fine = slope_over(&rows, "e_q", 3);
    let pass = (1.3..=1.8).contains(&coarse) && fine >= coarse;
    gate.record(
        "6 (large-tau reduced flux rate)",
        pass,
        format!("coarse slope {coarse:.3}, fine slope {fine:.3}"),
    );
}

/// Errors stay bounded in tau on a fixed mesh.
fn criterion_7(runner: &Runner, gate: &mut Gate) {
    let e_large = runner.case(Geometry::Annulus, 2, 1, 1e4).e_u;
    let e_one = runner.case(Geometry::Annulus, 2, 1, 1.0).e_u;
    let ratio = e_large / e_one;
    let pass = ratio <= 2.0;
    gate.record(
        "7 (e_u bounded in tau)",
        pass,
        format!("e_u(tau=1e4)/e_u(tau=1) = {ratio:.3}"),
    );
}

/// Full and condensed solves agree coefficient-wise to 1e-9 relative.
fn criterion_8(gate: &mut Gate) {
    let quad = QuadratureSettings::default();
    let mut cases = Vec::new();
    for geometry in [Geometry::Square, Geometry::Annulus] {
        for q in 0..=2usize {
            for &tau in &[0.0, 1.0, 400.0] {
                for level in 0..=2usize {
                    cases.push((geometry, q, tau, level));
                }
            }
        }
    }
    let results: Vec<(String, f64)> = cases
        .par_iter()
        .map(|&(geometry, q, tau, level)| {
            let reference = geometry.reference().unwrap();
            let mesh = geometry.mesh(level).unwrap();
            let dofmap = build_dofmap(&mesh, q).unwrap();
            let projector =
                build_trace_projector(&mesh, &dofmap, quad.trace_points(q)).unwrap();
            let system = assemble(
                &mesh,
                &dofmap,
                &projector,
                &reference.problem_data(tau),
                &quad,
            )
            .unwrap();
            let (full, _) = solve_full(&mesh, &dofmap, &system).unwrap();
            let (cond, _) = condense_skeleton(&mesh, &dofmap, &system)
                .unwrap()
                .solve(&dofmap, &system)
                .unwrap();
            let fx = full.to_stacked();
            let cx = cond.to_stacked();
            let scale = fx.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);
            let dev = fx
                .iter()
                .zip(&cx)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0f64, f64::max)
                / scale;
            (
                format!("{} q={q} tau={tau} level={level}", geometry.name()),
                dev,
            )
        })
        .collect();
    let (worst_case, worst) = results
        .into_iter()
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .unwrap();
    let pass = worst <= 1e-9;
    gate.record(
        "8 (condensation equivalence)",
        pass,
        format!("worst relative coefficient deviation {worst:.2e} ({worst_case})"),
    );
}

/// Projected-trace error of the interpolant decays at least like h^(q+0.3)
/// on the skeleton (expected q+1/2).
fn criterion_9(gate: &mut Gate) {
    let quad = QuadratureSettings::default();
    let reference = Geometry::Annulus.reference().unwrap();
    let mut pass = true;
    let mut detail = Vec::new();
    for q in 0..=1usize {
        let mut hs = Vec::new();
        let mut gaps = Vec::new();
        for level in 0..=4usize {
            let mesh = Geometry::Annulus.mesh(level).unwrap();
            let dofmap = build_dofmap(&mesh, q).unwrap();
            let projector =
                build_trace_projector(&mesh, &dofmap, quad.trace_points(q)).unwrap();
            let u = reference.u.clone();
            let ih_u = interp::project_scalar(&mesh, &dofmap, quad.error_points(q), move |p| {
                u(p)
            });
            let gap = projection_gap(&mesh, &dofmap, &projector, &ih_u, quad.error_points(q));
            hs.push(mesh.mesh_width);
            gaps.push(gap);
        }
        let slope = fit_loglog(&hs, &gaps).expect("fit");
        pass &= slope >= q as f64 + 0.3;
        detail.push(format!("q={q}: slope {slope:.3}"));
    }
    gate.record(
        "9 (trace projection rate)",
        pass,
        detail.join(", "),
    );
}

/// Property suites: quadrature exactness, Legendre orthogonality, RT
/// unisolvence, the de Rham inclusion, interior normal continuity,
/// assembled symmetry, solver linearity, zero right-hand side, and the
/// solver identity.
fn criterion_10(gate: &mut Gate) {
    let mut pass = true;
    let mut notes = Vec::new();

    // quadrature exactness to degree 2n-1 for n <= 10
    let mut worst = 0.0f64;
    for n in 1..=10usize {
        let rule = gauss_rule(n);
        for k in 0..=(2 * n - 1) {
            let v = rule.integrate(|t| t.powi(k as i32));
            worst = worst.max((v - 1.0 / (k as f64 + 1.0)).abs());
        }
    }
    pass &= worst < 1e-13;
    notes.push(format!("quadrature {worst:.1e}"));

    // Legendre orthogonality for q <= 10
    let mut worst = 0.0f64;
    for q in 0..=10usize {
        let rule = gauss_rule(q + 1);
        for i in 0..=q {
            for j in 0..=q {
                let v = rule.integrate(|t| legendre::eval(q, t)[i] * legendre::eval(q, t)[j]);
                let expect = if i == j { legendre::norm_sq(i) } else { 0.0 };
                worst = worst.max((v - expect).abs());
            }
        }
    }
    pass &= worst < 1e-13;
    notes.push(format!("orthogonality {worst:.1e}"));

    // RT unisolvence via the edge-trace tables for q <= 4
    let mut worst = 0.0f64;
    for q in 0..=4usize {
        let rt = RTReferenceBasis::new(q);
        for shape in 0..rt.dim() {
            for edge in 0..4 {
                let coeffs = rt.edge_normal_trace(shape, edge);
                for (k, &c) in coeffs.iter().enumerate() {
                    let expect = if shape == rt.edge_dof(edge, k) {
                        (2 * k + 1) as f64
                    } else {
                        0.0
                    };
                    worst = worst.max((c - expect).abs());
                }
            }
        }
    }
    pass &= worst < 1e-12;
    notes.push(format!("unisolvence {worst:.1e}"));

    // de Rham inclusion and normal continuity on a curved mesh
    let mesh = Geometry::Annulus.mesh(1).unwrap();
    let q = 1usize;
    let dofmap = build_dofmap(&mesh, q).unwrap();
    let eval = FieldEvaluator::new(&mesh, &dofmap);
    let mut sol = Solution::zeros(&dofmap);
    let mut state = 0x9e3779b97f4a7c15u64;
    for v in sol.flux.iter_mut() {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        *v = (state as f64 / u64::MAX as f64) * 2.0 - 1.0;
    }
    let rule = gauss_rule(q + 3);
    let mut worst_jump = 0.0f64;
    for (fid, facet) in mesh.facets.iter().enumerate() {
        if facet.kind != FacetKind::InteriorPatch {
            continue;
        }
        let fm = mesh.facet_mapping(fid);
        let jump_sq = rule.integrate(|t| {
            let n = fm.unit_normal(t);
            let arc = fm.arc_factor(t);
            let side_pt = |side: usize| {
                let fs = if side == 0 {
                    facet.plus
                } else {
                    facet.minus.unwrap()
                };
                let tt = match fs.orientation {
                    hmdd::mesh::Orientation::Same => t,
                    hmdd::mesh::Orientation::Reversed => 1.0 - t,
                };
                (fs.cell, hmdd::mesh::edge_point(fs.local_edge, tt))
            };
            let (cp, xp) = side_pt(0);
            let (cm, xm) = side_pt(1);
            let wp = eval.flux(&sol, cp, xp);
            let wm = eval.flux(&sol, cm, xm);
            (wp - wm).dot(&n).powi(2) * arc
        });
        worst_jump = worst_jump.max(jump_sq);
    }
    pass &= worst_jump < 1e-24;
    notes.push(format!("normal continuity {worst_jump:.1e}"));

    // the divergence of a random flux lies in the scalar space: project the
    // reference divergence onto Q^q and compare pointwise
    let rt = RTReferenceBasis::new(2);
    let cell_rule = hmdd::quadrature::tensor_rule(5);
    let mut worst_derham = 0.0f64;
    for shape in 0..rt.dim() {
        let mut coeffs = vec![0.0; 9];
        for (&p, &w) in cell_rule.nodes.iter().zip(&cell_rule.weights) {
            let (_, d) = rt.eval(shape, p);
            let px = legendre::eval(2, p[0]);
            let py = legendre::eval(2, p[1]);
            for i in 0..3 {
                for j in 0..3 {
                    coeffs[i * 3 + j] +=
                        w * d * px[i] * py[j] / (legendre::norm_sq(i) * legendre::norm_sq(j));
                }
            }
        }
        for &p in &[[0.21, 0.67], [0.83, 0.35]] {
            let (_, d) = rt.eval(shape, p);
            let px = legendre::eval(2, p[0]);
            let py = legendre::eval(2, p[1]);
            let mut rec = 0.0;
            for i in 0..3 {
                for j in 0..3 {
                    rec += coeffs[i * 3 + j] * px[i] * py[j];
                }
            }
            worst_derham = worst_derham.max((rec - d).abs());
        }
    }
    pass &= worst_derham < 1e-12;
    notes.push(format!("de Rham {worst_derham:.1e}"));

    // assembled symmetry on the annulus with jumping coefficient
    let quad = QuadratureSettings::default();
    let reference = Geometry::Annulus.reference().unwrap();
    let projector = build_trace_projector(&mesh, &dofmap, quad.trace_points(q)).unwrap();
    let system = assemble(
        &mesh,
        &dofmap,
        &projector,
        &reference.problem_data(3.0),
        &quad,
    )
    .unwrap();
    let m = system.full_matrix();
    let mut dense = vec![vec![0.0f64; m.ncols]; m.nrows];
    for j in 0..m.ncols {
        for (i, v) in m.col(j) {
            dense[i][j] += v;
        }
    }
    let mut asym = 0.0f64;
    let mut scale = 0.0f64;
    for i in 0..m.nrows {
        for j in 0..m.ncols {
            asym = asym.max((dense[i][j] - dense[j][i]).abs());
            scale = scale.max(dense[i][j].abs());
        }
    }
    pass &= asym < 1e-13 * scale.max(1.0);
    notes.push(format!("symmetry {asym:.1e}"));

    // solver: zero rhs -> zero, linearity, identity replay
    let (zero_sol, _) = {
        let mut zsys = system.clone();
        zsys.rhs_scalar.iter_mut().for_each(|v| *v = 0.0);
        solve_full(&mesh, &dofmap, &zsys).unwrap()
    };
    let zmax = zero_sol
        .to_stacked()
        .iter()
        .fold(0.0f64, |m, v| m.max(v.abs()));
    pass &= zmax < 1e-12;
    notes.push(format!("zero-rhs {zmax:.1e}"));

    let (sol1, _) = solve_full(&mesh, &dofmap, &system).unwrap();
    let mut sys2 = system.clone();
    sys2.rhs_scalar.iter_mut().for_each(|v| *v *= 2.0);
    let (sol2, _) = solve_full(&mesh, &dofmap, &sys2).unwrap();
    let mut lin = 0.0f64;
    for (a, b) in sol1.to_stacked().iter().zip(&sol2.to_stacked()) {
        lin = lin.max((2.0 * a - b).abs());
    }
    let lscale = sol2
        .to_stacked()
        .iter()
        .fold(0.0f64, |m, v| m.max(v.abs()))
        .max(1.0);
    pass &= lin < 1e-10 * lscale;
    notes.push(format!("linearity {lin:.1e}"));

    // solver identity: rhs rebuilt from a discrete solution reproduces it
    let b2 = m.matvec(&sol1.to_stacked());
    let mut replay = system.clone();
    for (i, v) in replay.rhs_scalar.iter_mut().enumerate() {
        *v = -b2[system.scalar_offset() + i];
    }
    let (sol3, _) = solve_full(&mesh, &dofmap, &replay).unwrap();
    let mut ident = 0.0f64;
    for (a, b) in sol1.to_stacked().iter().zip(&sol3.to_stacked()) {
        ident = ident.max((a - b).abs());
    }
    pass &= ident < 1e-10 * lscale;
    notes.push(format!("identity {ident:.1e}"));

    gate.record("10 (property suites)", pass, notes.join(", "));
}
