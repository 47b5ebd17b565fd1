//! Mesh generators: the unit square split into axis-aligned patches, and the
//! disk-of-radius-2 benchmark whose skeleton is exactly the unit circle.

use super::{refine, Cell, CellMapping, Curve, Mesh, Point};
use crate::error::{Error, Result};

/// Axis-aligned patch splitting of the unit square. Split lines must
/// coincide with mesh lines.
#[derive(Debug, Clone, Default)]
pub struct SquareSplit {
    pub x_lines: Vec<f64>,
    pub y_lines: Vec<f64>,
}

impl SquareSplit {
    pub fn vertical(x: f64) -> Self {
        Self {
            x_lines: vec![x],
            y_lines: Vec::new(),
        }
    }

    pub fn none() -> Self {
        Self::default()
    }
}

/// Uniform affine mesh of the unit square with n x n cells; patch ids follow
/// the split regions and the skeleton is the union of the split lines.
pub fn build_square_mesh(n_per_side: usize, split: &SquareSplit) -> Result<Mesh> {
    if n_per_side == 0 {
        return Err(Error::Config("n_per_side must be at least 1".into()));
    }
    let n = n_per_side;
    let h = 1.0 / n as f64;
    for &line in split.x_lines.iter().chain(&split.y_lines) {
        let scaled = line * n as f64;
        if (scaled - scaled.round()).abs() > 1e-12 || !(0.0..=1.0).contains(&line) {
            return Err(Error::Config(format!(
                "split line {line} does not coincide with a mesh line of the {n}x{n} grid"
            )));
        }
    }
    let mut xs = split.x_lines.clone();
    xs.sort_by(f64::total_cmp);
    let mut ys = split.y_lines.clone();
    ys.sort_by(f64::total_cmp);
    let region = |lines: &[f64], c: f64| lines.iter().filter(|&&l| l < c).count();

    let mut cells = Vec::with_capacity(n * n);
    for j in 0..n {
        for i in 0..n {
            let origin = Point::new(i as f64 * h, j as f64 * h);
            let center = (i as f64 + 0.5) * h;
            let middle = (j as f64 + 0.5) * h;
            let patch = region(&ys, middle) * (xs.len() + 1) + region(&xs, center);
            cells.push(Cell {
                mapping: CellMapping::affine(origin, Point::new(h, 0.0), Point::new(0.0, h)),
                patch,
            });
        }
    }
    Mesh::from_cells(cells, 0)
}

/// Base pattern of the radius-2 disk: a central square, four transfinite
/// quads filling the unit disk, and four 90-degree annular sectors outside.
/// All interface facets lie exactly on the unit circle and carry an
/// arclength-proportional parametrization. `level` applies that many uniform
/// refinements.
pub fn build_annulus_mesh(level: usize) -> Result<Mesh> {
    let a = 0.5; // half-side of the central square
    let mut cells = Vec::with_capacity(9);

    cells.push(Cell {
        mapping: CellMapping::affine(
            Point::new(-a, -a),
            Point::new(2.0 * a, 0.0),
            Point::new(0.0, 2.0 * a),
        ),
        patch: 0,
    });

    let quarter = std::f64::consts::FRAC_PI_2;
    let eighth = std::f64::consts::FRAC_PI_4;
    for k in 0..4 {
        let alpha = k as f64 * quarter;
        let rot = |p: Point| {
            Point::new(
                p.x * alpha.cos() - p.y * alpha.sin(),
                p.x * alpha.sin() + p.y * alpha.cos(),
            )
        };
        let p00 = rot(Point::new(a, -a));
        let p01 = rot(Point::new(a, a));
        let q0 = rot(Point::new(eighth.cos(), -eighth.sin()));
        let q1 = rot(Point::new(eighth.cos(), eighth.sin()));
        cells.push(Cell {
            mapping: CellMapping::transfinite([
                Curve::Line { a: p00, b: q0 },
                Curve::Arc {
                    center: Point::new(0.0, 0.0),
                    radius: 1.0,
                    theta0: alpha - eighth,
                    theta1: alpha + eighth,
                },
                Curve::Line { a: p01, b: q1 },
                Curve::Line { a: p00, b: p01 },
            ]),
            patch: 0,
        });
    }

    for k in 0..4 {
        let alpha = k as f64 * quarter;
        cells.push(Cell {
            mapping: CellMapping::annular_sector(
                Point::new(0.0, 0.0),
                1.0,
                2.0,
                alpha - eighth,
                alpha + eighth,
            ),
            patch: 1,
        });
    }

    let mut mesh = Mesh::from_cells(cells, 0)?;
    for _ in 0..level {
        mesh = refine(&mesh);
    }
    Ok(mesh)
}
