//! Batch study runner behind the CLI: sweeps over refinement levels,
//! polynomial orders, and stabilization parameters, writing CSV tables,
//! convergence summaries, and SVG plots.

use crate::analysis::{
    annulus_reference, compute_errors, manufactured_square_reference, ConvergenceTable,
    ErrorReport, ReferenceSolution,
};
use crate::assembly::{assemble, QuadratureSettings};
use crate::error::{Error, Result};
use crate::mesh::{build_annulus_mesh, build_square_mesh, refine, Mesh, SquareSplit};
use crate::plot::{loglog_svg, Series};
use crate::solver::{solve, SolverChoice};
use crate::spaces::build_dofmap;
use crate::trace::build_trace_projector;
use rayon::prelude::*;
use serde::Deserialize;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

/// Benchmark geometry of a study.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Geometry {
    /// Unit square, two patches split at x = 0.5, kappa = 1, smooth
    /// manufactured solution. Level l is a 2^(l+1) x 2^(l+1) grid.
    Square,
    /// Disk of radius 2 with the interface on the unit circle and
    /// kappa = 16 / 1.
    Annulus,
}

impl Geometry {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "square" => Ok(Geometry::Square),
            "annulus" => Ok(Geometry::Annulus),
            other => Err(Error::Config(format!(
                "unknown geometry '{other}' (expected 'square' or 'annulus')"
            ))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Geometry::Square => "square",
            Geometry::Annulus => "annulus",
        }
    }

    pub fn mesh(&self, level: usize) -> Result<Mesh> {
        match self {
            Geometry::Square => {
                let mut mesh = build_square_mesh(2, &SquareSplit::vertical(0.5))?;
                for _ in 0..level {
                    mesh = refine(&mesh);
                }
                Ok(mesh)
            }
            Geometry::Annulus => build_annulus_mesh(level),
        }
    }

    pub fn reference(&self) -> Result<ReferenceSolution> {
        match self {
            Geometry::Square => Ok(manufactured_square_reference()),
            Geometry::Annulus => annulus_reference(),
        }
    }
}

/// One study: geometry, sweeps, solver, and output destination.
#[derive(Debug, Clone)]
pub struct StudyConfig {
    pub geometry: Geometry,
    pub orders: Vec<usize>,
    pub taus: Vec<f64>,
    /// inclusive refinement range
    pub levels: (usize, usize),
    pub solver: SolverChoice,
    pub output_dir: PathBuf,
    pub quadrature: QuadratureSettings,
    /// levels in the fitted-rate window of the summary
    pub rate_window: usize,
}

impl Default for StudyConfig {
    /// The benchmark setup: annulus, q = 1, tau = 10, five levels.
    fn default() -> Self {
        Self {
            geometry: Geometry::Annulus,
            orders: vec![1],
            taus: vec![10.0],
            levels: (0, 4),
            solver: SolverChoice::Full,
            output_dir: PathBuf::from("out"),
            quadrature: QuadratureSettings::default(),
            rate_window: 3,
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    geometry: Option<String>,
    orders: Option<Vec<usize>>,
    taus: Option<Vec<f64>>,
    levels: Option<[usize; 2]>,
    solver: Option<String>,
    output_dir: Option<String>,
    rate_window: Option<usize>,
    quadrature: Option<RawQuadrature>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawQuadrature {
    volume_offset: Option<usize>,
    trace_offset: Option<usize>,
    error_extra: Option<usize>,
}

impl StudyConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let raw: RawConfig =
            toml::from_str(text).map_err(|e| Error::Config(format!("config parse: {e}")))?;
        let mut config = StudyConfig::default();
        if let Some(g) = raw.geometry {
            config.geometry = Geometry::parse(&g)?;
        }
        if let Some(orders) = raw.orders {
            config.orders = orders;
        }
        if let Some(taus) = raw.taus {
            config.taus = taus;
        }
        if let Some([a, b]) = raw.levels {
            config.levels = (a, b);
        }
        if let Some(s) = raw.solver {
            config.solver = match s.as_str() {
                "full" => SolverChoice::Full,
                "condensed" => SolverChoice::Condensed,
                other => {
                    return Err(Error::Config(format!(
                        "unknown solver '{other}' (expected 'full' or 'condensed')"
                    )))
                }
            };
        }
        if let Some(dir) = raw.output_dir {
            config.output_dir = PathBuf::from(dir);
        }
        if let Some(w) = raw.rate_window {
            config.rate_window = w;
        }
        if let Some(quad) = raw.quadrature {
            if let Some(v) = quad.volume_offset {
                config.quadrature.volume_offset = v;
            }
            if let Some(v) = quad.trace_offset {
                config.quadrature.trace_offset = v;
            }
            if let Some(v) = quad.error_extra {
                config.quadrature.error_extra = v;
            }
        }
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if self.orders.is_empty() {
            return Err(Error::Config("orders list must not be empty".into()));
        }
        if self.taus.is_empty() {
            return Err(Error::Config("taus list must not be empty".into()));
        }
        for &tau in &self.taus {
            if !tau.is_finite() || tau < 0.0 {
                return Err(Error::Config(format!(
                    "tau entries must be finite and nonnegative, got {tau}"
                )));
            }
        }
        if self.levels.0 > self.levels.1 {
            return Err(Error::Config(format!(
                "empty level range {:?}",
                self.levels
            )));
        }
        if self.rate_window < 2 {
            return Err(Error::Config("rate_window must be at least 2".into()));
        }
        Ok(())
    }
}

/// Assemble, solve, and measure one (geometry, level, order, tau) case.
pub fn run_case(
    geometry: Geometry,
    level: usize,
    order: usize,
    tau: f64,
    solver: SolverChoice,
    quad: &QuadratureSettings,
) -> Result<ErrorReport> {
    let reference = geometry.reference()?;
    let mesh = geometry.mesh(level)?;
    let dofmap = build_dofmap(&mesh, order)?;
    let projector = build_trace_projector(&mesh, &dofmap, quad.trace_points(order))?;
    let system = assemble(&mesh, &dofmap, &projector, &reference.problem_data(tau), quad)?;
    let (solution, solve_report) = solve(&mesh, &dofmap, &system, solver)?;
    let mut report = compute_errors(
        &mesh, &dofmap, &projector, &solution, &reference, tau, quad,
    );
    report.residual = solve_report.residual;
    Ok(report)
}

/// One row of a study: either a measured report or the failure message.
#[derive(Debug, Clone)]
pub struct RunRecord {
    pub level: usize,
    pub order: usize,
    pub tau: f64,
    pub outcome: std::result::Result<ErrorReport, String>,
}

/// Everything a finished study produced.
#[derive(Debug)]
pub struct StudySummary {
    pub records: Vec<RunRecord>,
    pub n_failures: usize,
    pub summary_text: String,
    pub files: Vec<PathBuf>,
}

/// Fixed-format float for reproducible output files: 17 significant digits.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// CSV of the study records; the column order is part of the format.
pub fn records_to_csv(geometry: Geometry, records: &[RunRecord]) -> String {
    let mut out = String::from(
        "geometry,level,order,tau,h,n_dofs,residual,e_u,e_q,e_div,j_qn,j_u,e_mu,e_mean_mu,e_mean_u,norm_q,status\n",
    );
    for rec in records {
        match &rec.outcome {
            Ok(r) => {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
                    geometry.name(),
                    r.level,
                    r.order,
                    fmt_float(r.tau),
                    fmt_float(r.h),
                    r.n_dofs,
                    fmt_float(r.residual),
                    fmt_float(r.e_u),
                    fmt_float(r.e_q),
                    fmt_float(r.e_div),
                    fmt_float(r.j_qn),
                    fmt_float(r.j_u),
                    fmt_float(r.e_mu),
                    fmt_float(r.e_mean_mu),
                    fmt_float(r.e_mean_u),
                    fmt_float(r.norm_q),
                    if r.residual > 1e-10 {
                        "residual-flagged"
                    } else {
                        "ok"
                    },
                );
            }
            Err(msg) => {
                let _ = writeln!(
                    out,
                    "{},{},{},{},,,,,,,,,,,,,failed: {}",
                    geometry.name(),
                    rec.level,
                    rec.order,
                    fmt_float(rec.tau),
                    msg.replace(',', ";"),
                );
            }
        }
    }
    out
}

/// Observed-rate bands for the summary's pass/fail column; the binding
/// gates live in the acceptance suite. u and the hybrid trace converge at
/// q+1 uniformly in tau; the flux sits between q+1/2 and q+1; its
/// divergence can drop below q on coarse meshes at large tau; the jumps
/// move between q and q+1 with tau.
fn rate_band(column: &str, q: usize) -> Option<(f64, f64)> {
    let qf = q as f64;
    match column {
        "e_u" | "e_mu" | "e_mean_mu" | "e_mean_u" => Some((qf + 0.8, qf + 1.3)),
        "e_q" => Some((qf + 0.45, qf + 1.35)),
        "e_div" => Some((qf - 0.6, qf + 1.35)),
        "j_qn" | "j_u" => Some((qf - 0.4, qf + 1.4)),
        _ => None,
    }
}

/// Run the whole sweep. Failed runs are recorded and the study continues.
pub fn run_study(config: &StudyConfig) -> Result<StudySummary> {
    config.validate()?;
    // fail early on an invalid reference (the annulus validates itself)
    config.geometry.reference()?;

    std::fs::create_dir_all(&config.output_dir)?;
    let mut cases = Vec::new();
    for &order in &config.orders {
        for &tau in &config.taus {
            for level in config.levels.0..=config.levels.1 {
                cases.push((order, tau, level));
            }
        }
    }
    let records: Vec<RunRecord> = cases
        .par_iter()
        .map(|&(order, tau, level)| RunRecord {
            level,
            order,
            tau,
            outcome: run_case(
                config.geometry,
                level,
                order,
                tau,
                config.solver,
                &config.quadrature,
            )
            .map_err(|e| e.to_string()),
        })
        .collect();
    let n_failures = records.iter().filter(|r| r.outcome.is_err()).count();

    let mut files = Vec::new();
    let csv = records_to_csv(config.geometry, &records);
    let csv_path = config
        .output_dir
        .join(format!("study_{}.csv", config.geometry.name()));
    std::fs::write(&csv_path, &csv)?;
    files.push(csv_path);

    // fitted-rate summary per (order, tau)
    let mut summary = String::new();
    let _ = writeln!(
        summary,
        "study: geometry={} levels={}..{} solver={:?}",
        config.geometry.name(),
        config.levels.0,
        config.levels.1,
        config.solver
    );
    let _ = writeln!(
        summary,
        "fitted log-log slopes vs h over the last {} levels",
        config.rate_window
    );
    for &order in &config.orders {
        for &tau in &config.taus {
            let mut table = ConvergenceTable::default();
            for rec in &records {
                if rec.order == order && rec.tau == tau {
                    if let Ok(r) = &rec.outcome {
                        table.push(r.clone());
                    }
                }
            }
            let _ = writeln!(summary, "order q={order} tau={tau}:");
            for (column, slope) in table.rates(config.rate_window) {
                match slope {
                    Some(s) => {
                        let verdict = match rate_band(column, order) {
                            Some((lo, hi)) if s >= lo && s <= hi => "pass",
                            Some(_) => "FAIL",
                            None => "-",
                        };
                        let _ = writeln!(summary, "  {column:<10} {s:+.3}  [{verdict}]");
                    }
                    None => {
                        let _ = writeln!(summary, "  {column:<10} (not fitted)");
                    }
                }
            }
        }
    }
    if n_failures > 0 {
        let _ = writeln!(summary, "{n_failures} run(s) failed");
        for rec in &records {
            if let Err(msg) = &rec.outcome {
                let _ = writeln!(
                    summary,
                    "  level={} q={} tau={}: {msg}",
                    rec.level, rec.order, rec.tau
                );
            }
        }
    }
    let summary_path = config.output_dir.join("summary.txt");
    std::fs::write(&summary_path, &summary)?;
    files.push(summary_path);

    files.extend(emit_plots(config, &records)?);

    Ok(StudySummary {
        records,
        n_failures,
        summary_text: summary,
        files,
    })
}

/// Write the study's SVG plots: per error column, error vs h (one series
/// per order/tau combination) and, when several taus are present, error vs
/// tau (one series per order/level).
pub fn emit_plots(config: &StudyConfig, records: &[RunRecord]) -> Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    let guides: Vec<f64> = {
        let mut g = Vec::new();
        for &q in &config.orders {
            g.push(q as f64 + 0.5);
            g.push(q as f64 + 1.0);
        }
        g.sort_by(f64::total_cmp);
        g.dedup();
        g
    };

    for column in ErrorReport::COLUMNS {
        let mut series = Vec::new();
        for &order in &config.orders {
            for &tau in &config.taus {
                let mut xs = Vec::new();
                let mut ys = Vec::new();
                for rec in records {
                    if rec.order == order && rec.tau == tau {
                        if let Ok(r) = &rec.outcome {
                            xs.push(r.h);
                            ys.push(r.column(column));
                        }
                    }
                }
                if !xs.is_empty() {
                    series.push(Series {
                        label: format!("q={order} tau={tau}"),
                        xs,
                        ys,
                    });
                }
            }
        }
        if series.is_empty() {
            continue;
        }
        let svg = loglog_svg(
            &format!("{} vs h ({})", column, config.geometry.name()),
            "h",
            column,
            &series,
            &guides,
        );
        let path = config.output_dir.join(format!("err_h_{column}.svg"));
        std::fs::write(&path, svg)?;
        files.push(path);
    }

    if config.taus.len() >= 2 {
        for column in ErrorReport::COLUMNS {
            let mut series = Vec::new();
            for &order in &config.orders {
                for level in config.levels.0..=config.levels.1 {
                    let mut xs = Vec::new();
                    let mut ys = Vec::new();
                    for rec in records {
                        if rec.order == order && rec.level == level {
                            if let Ok(r) = &rec.outcome {
                                xs.push(r.tau);
                                ys.push(r.column(column));
                            }
                        }
                    }
                    if !xs.is_empty() {
                        series.push(Series {
                            label: format!("q={order} level={level}"),
                            xs,
                            ys,
                        });
                    }
                }
            }
            if series.is_empty() {
                continue;
            }
            let svg = loglog_svg(
                &format!("{} vs tau ({})", column, config.geometry.name()),
                "tau",
                column,
                &series,
                &[],
            );
            let path = config.output_dir.join(format!("err_tau_{column}.svg"));
            std::fs::write(&path, svg)?;
            files.push(path);
        }
    }
    Ok(files)
}
