//! Cell mappings from the reference square, with analytic Jacobians.

use super::{Mat2, Point};
use nalgebra::Vector2;

/// Boundary curve of a transfinite (Coons) cell.
#[derive(Debug, Clone)]
pub enum Curve {
    Line {
        a: Point,
        b: Point,
    },
    /// Circular arc with constant angular speed, so |Phi'| is constant.
    Arc {
        center: Point,
        radius: f64,
        theta0: f64,
        theta1: f64,
    },
}

impl Curve {
    pub fn eval(&self, t: f64) -> Point {
        match self {
            Curve::Line { a, b } => a + t * (b - a),
            Curve::Arc {
                center,
                radius,
                theta0,
                theta1,
            } => {
                let th = theta0 + t * (theta1 - theta0);
                center + *radius * Vector2::new(th.cos(), th.sin())
            }
        }
    }

    pub fn deriv(&self, t: f64) -> Point {
        match self {
            Curve::Line { a, b } => b - a,
            Curve::Arc {
                center: _,
                radius,
                theta0,
                theta1,
            } => {
                let dth = theta1 - theta0;
                let th = theta0 + t * dth;
                *radius * dth * Vector2::new(-th.sin(), th.cos())
            }
        }
    }
}

#[derive(Debug, Clone)]
pub enum MapKind {
    /// x -> origin + xh e1 + yh e2.
    Affine { origin: Point, e1: Point, e2: Point },
    /// Corners at reference (0,0), (1,0), (1,1), (0,1).
    Bilinear { corners: [Point; 4] },
    /// Polar map; the first reference coordinate runs over the radius,
    /// the second over the angle (counterclockwise), so det J > 0 when
    /// r_out > r_in and theta1 > theta0.
    AnnularSector {
        center: Point,
        r_in: f64,
        r_out: f64,
        theta0: f64,
        theta1: f64,
    },
    /// Coons patch of four boundary curves, evaluated through an affine
    /// window into the parent parameter domain so that refinement is exact.
    /// curves[0] = bottom (u, 0), curves[1] = right (1, v),
    /// curves[2] = top (u, 1), curves[3] = left (0, v).
    Transfinite {
        curves: std::sync::Arc<[Curve; 4]>,
        /// (u, v) = (offset_u + scale * xh, offset_v + scale * yh)
        window: [f64; 3],
    },
}

#[derive(Debug, Clone)]
pub struct CellMapping {
    pub kind: MapKind,
}

impl CellMapping {
    pub fn affine(origin: Point, e1: Point, e2: Point) -> Self {
        Self {
            kind: MapKind::Affine { origin, e1, e2 },
        }
    }

    pub fn bilinear(corners: [Point; 4]) -> Self {
        Self {
            kind: MapKind::Bilinear { corners },
        }
    }

    pub fn annular_sector(center: Point, r_in: f64, r_out: f64, theta0: f64, theta1: f64) -> Self {
        Self {
            kind: MapKind::AnnularSector {
                center,
                r_in,
                r_out,
                theta0,
                theta1,
            },
        }
    }

    pub fn transfinite(curves: [Curve; 4]) -> Self {
        Self {
            kind: MapKind::Transfinite {
                curves: std::sync::Arc::new(curves),
                window: [0.0, 0.0, 1.0],
            },
        }
    }

    pub fn eval(&self, xh: [f64; 2]) -> Point {
        let [x, y] = xh;
        match &self.kind {
            MapKind::Affine { origin, e1, e2 } => origin + x * e1 + y * e2,
            MapKind::Bilinear { corners } => {
                let [c00, c10, c11, c01] = corners;
                (1.0 - x) * (1.0 - y) * c00 + x * (1.0 - y) * c10 + x * y * c11 + (1.0 - x) * y * c01
            }
            MapKind::AnnularSector {
                center,
                r_in,
                r_out,
                theta0,
                theta1,
            } => {
                let r = r_in + x * (r_out - r_in);
                let th = theta0 + y * (theta1 - theta0);
                center + r * Vector2::new(th.cos(), th.sin())
            }
            MapKind::Transfinite { curves, window } => {
                let (u, v) = (window[0] + window[2] * x, window[1] + window[2] * y);
                coons_eval(curves, u, v)
            }
        }
    }

    pub fn jacobian(&self, xh: [f64; 2]) -> Mat2 {
        let [x, y] = xh;
        match &self.kind {
            MapKind::Affine { e1, e2, .. } => Mat2::from_columns(&[*e1, *e2]),
            MapKind::Bilinear { corners } => {
                let [c00, c10, c11, c01] = corners;
                let dx = (1.0 - y) * (c10 - c00) + y * (c11 - c01);
                let dy = (1.0 - x) * (c01 - c00) + x * (c11 - c10);
                Mat2::from_columns(&[dx, dy])
            }
            MapKind::AnnularSector {
                r_in,
                r_out,
                theta0,
                theta1,
                ..
            } => {
                let r = r_in + x * (r_out - r_in);
                let th = theta0 + y * (theta1 - theta0);
                let dr = r_out - r_in;
                let dth = theta1 - theta0;
                let dx = dr * Vector2::new(th.cos(), th.sin());
                let dy = r * dth * Vector2::new(-th.sin(), th.cos());
                Mat2::from_columns(&[dx, dy])
            }
            MapKind::Transfinite { curves, window } => {
                let (u, v) = (window[0] + window[2] * x, window[1] + window[2] * y);
                let (du, dv) = coons_jacobian(curves, u, v);
                Mat2::from_columns(&[window[2] * du, window[2] * dv])
            }
        }
    }

    /// Exact mapping of the child occupying reference quadrant (i, j).
    pub fn child(&self, i: usize, j: usize) -> CellMapping {
        let (fi, fj) = (i as f64 * 0.5, j as f64 * 0.5);
        match &self.kind {
            MapKind::Affine { origin, e1, e2 } => CellMapping::affine(
                origin + fi * e1 + fj * e2,
                0.5 * e1,
                0.5 * e2,
            ),
            MapKind::Bilinear { .. } => {
                // a bilinear map restricted to a subrectangle is bilinear
                let c = |x: f64, y: f64| self.eval([x, y]);
                CellMapping::bilinear([
                    c(fi, fj),
                    c(fi + 0.5, fj),
                    c(fi + 0.5, fj + 0.5),
                    c(fi, fj + 0.5),
                ])
            }
            MapKind::AnnularSector {
                center,
                r_in,
                r_out,
                theta0,
                theta1,
            } => {
                let r = |s: f64| r_in + s * (r_out - r_in);
                let th = |s: f64| theta0 + s * (theta1 - theta0);
                CellMapping::annular_sector(*center, r(fi), r(fi + 0.5), th(fj), th(fj + 0.5))
            }
            MapKind::Transfinite { curves, window } => CellMapping {
                kind: MapKind::Transfinite {
                    curves: curves.clone(),
                    window: [
                        window[0] + window[2] * fi,
                        window[1] + window[2] * fj,
                        window[2] * 0.5,
                    ],
                },
            },
        }
    }
}

fn coons_eval(curves: &[Curve; 4], u: f64, v: f64) -> Point {
    let p00 = curves[0].eval(0.0);
    let p10 = curves[0].eval(1.0);
    let p01 = curves[2].eval(0.0);
    let p11 = curves[2].eval(1.0);
    (1.0 - v) * curves[0].eval(u) + v * curves[2].eval(u) + (1.0 - u) * curves[3].eval(v)
        + u * curves[1].eval(v)
        - ((1.0 - u) * (1.0 - v) * p00 + u * (1.0 - v) * p10 + u * v * p11 + (1.0 - u) * v * p01)
}

fn coons_jacobian(curves: &[Curve; 4], u: f64, v: f64) -> (Point, Point) {
    let p00 = curves[0].eval(0.0);
    let p10 = curves[0].eval(1.0);
    let p01 = curves[2].eval(0.0);
    let p11 = curves[2].eval(1.0);
    let du = (1.0 - v) * curves[0].deriv(u) + v * curves[2].deriv(u) - curves[3].eval(v)
        + curves[1].eval(v)
        - (-(1.0 - v) * p00 + (1.0 - v) * p10 + v * p11 - v * p01);
    let dv = -curves[0].eval(u) + curves[2].eval(u) + (1.0 - u) * curves[3].deriv(v)
        + u * curves[1].deriv(v)
        - (-(1.0 - u) * p00 - u * p10 + u * p11 + (1.0 - u) * p01);
    (du, dv)
}
