//! Curved quadrilateral meshes partitioned into patches.
//!
//! Every cell is the image of the reference square [0,1]^2 under an exactly
//! evaluable mapping (affine, bilinear, annular sector, or transfinite/Coons
//! patch), so geometry never carries a polynomial approximation error.
//!
//! Local edge convention on the reference square:
//!
//! * edge 0 (bottom): t -> (t, 0), reference outward normal (0, -1)
//! * edge 1 (right):  t -> (1, t), reference outward normal (1, 0)
//! * edge 2 (top):    t -> (t, 1), reference outward normal (0, 1)
//! * edge 3 (left):   t -> (0, t), reference outward normal (-1, 0)
//!
//! Facets store a plus and a minus side. The facet parametrization is the
//! plus side's canonical edge parametrization, and the facet normal points
//! from the minus side towards the plus side (for boundary facets it is the
//! domain-outward normal of the only cell). On skeleton facets the plus side
//! is the cell in the patch with the smaller id, which keeps the sign
//! assignment stable under refinement. Jumps are [a] = a(+) - a(-) and means
//! {a} = (a(+) + a(-)) / 2 throughout the crate.

mod generators;
mod io;
mod mapping;

pub use generators::{build_annulus_mesh, build_square_mesh, SquareSplit};
pub use io::{read_mesh, write_mesh};
pub use mapping::{CellMapping, Curve, MapKind};

use crate::error::{Error, Result};
use nalgebra::{Matrix2, Vector2};
use std::collections::BTreeMap;

pub type Point = Vector2<f64>;
pub type Mat2 = Matrix2<f64>;

/// Reference-edge parametrization point.
pub fn edge_point(edge: usize, t: f64) -> [f64; 2] {
    match edge {
        0 => [t, 0.0],
        1 => [1.0, t],
        2 => [t, 1.0],
        3 => [0.0, t],
        _ => panic!("local edge index out of range: {edge}"),
    }
}

/// Tangent of the reference-edge parametrization (constant per edge).
pub fn edge_tangent(edge: usize) -> [f64; 2] {
    match edge {
        0 | 2 => [1.0, 0.0],
        1 | 3 => [0.0, 1.0],
        _ => panic!("local edge index out of range: {edge}"),
    }
}

/// Reference outward normal of an edge.
pub fn edge_normal(edge: usize) -> [f64; 2] {
    match edge {
        0 => [0.0, -1.0],
        1 => [1.0, 0.0],
        2 => [0.0, 1.0],
        3 => [-1.0, 0.0],
        _ => panic!("local edge index out of range: {edge}"),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FacetKind {
    /// Shared by two cells of the same patch.
    InteriorPatch,
    /// Shared by two cells of different patches; carries hybrid dofs.
    Skeleton,
    /// On the domain boundary.
    Boundary,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orientation {
    /// The side's canonical edge parameter runs with the facet parameter.
    Same,
    /// The side's canonical edge parameter runs against it (t -> 1-t).
    Reversed,
}

#[derive(Debug, Clone, Copy)]
pub struct FacetSide {
    pub cell: usize,
    pub local_edge: usize,
    pub orientation: Orientation,
}

#[derive(Debug, Clone)]
pub struct Facet {
    pub kind: FacetKind,
    pub plus: FacetSide,
    pub minus: Option<FacetSide>,
}

#[derive(Debug, Clone)]
pub struct Cell {
    pub mapping: CellMapping,
    pub patch: usize,
}

#[derive(Debug, Clone)]
pub struct Mesh {
    pub cells: Vec<Cell>,
    pub facets: Vec<Facet>,
    pub n_patches: usize,
    /// Largest edge arc length over all cells (h for the square mesh of
    /// n cells per side is exactly 1/n).
    pub mesh_width: f64,
    pub refinement_level: usize,
}

/// Lightweight view of one facet's mapping Phi_F: [0,1] -> F.
#[derive(Clone, Copy)]
pub struct FacetMapping<'a> {
    mesh: &'a Mesh,
    facet: usize,
}

impl Mesh {
    /// Build a mesh from cells, matching facets by shared edge endpoints.
    /// Verifies pairwise facet compatibility and positive Jacobians.
    pub fn from_cells(cells: Vec<Cell>, refinement_level: usize) -> Result<Mesh> {
        let n_patches = cells.iter().map(|c| c.patch + 1).max().unwrap_or(0);
        let facets = match_facets(&cells)?;
        let mut mesh = Mesh {
            cells,
            facets,
            n_patches,
            mesh_width: 0.0,
            refinement_level,
        };
        mesh.mesh_width = mesh.compute_mesh_width();
        mesh.validate()?;
        Ok(mesh)
    }

    pub fn n_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn skeleton_facets(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.facets.len()).filter(|&f| self.facets[f].kind == FacetKind::Skeleton)
    }

    pub fn facet_mapping(&self, facet: usize) -> FacetMapping<'_> {
        FacetMapping { mesh: self, facet }
    }

    /// Point on a facet through one of its sides; `side` 0 is plus, 1 is minus.
    pub fn facet_side_point(&self, facet: usize, side: usize, t: f64) -> Point {
        let f = &self.facets[facet];
        let fs = if side == 0 {
            f.plus
        } else {
            f.minus.expect("facet has no minus side")
        };
        let tt = match fs.orientation {
            Orientation::Same => t,
            Orientation::Reversed => 1.0 - t,
        };
        self.cells[fs.cell]
            .mapping
            .eval(edge_point(fs.local_edge, tt))
    }

    fn compute_mesh_width(&self) -> f64 {
        let rule = crate::quadrature::gauss_rule(8);
        let mut h: f64 = 0.0;
        for cell in &self.cells {
            for edge in 0..4 {
                let te = edge_tangent(edge);
                let len = rule.integrate(|t| {
                    let j = cell.mapping.jacobian(edge_point(edge, t));
                    (j * Vector2::new(te[0], te[1])).norm()
                });
                h = h.max(len);
            }
        }
        h
    }

    /// Sampled invariants: positive Jacobians, facet compatibility, unit
    /// normals orthogonal to tangents.
    pub fn validate(&self) -> Result<()> {
        let samples = [0.0, 0.25, 0.5, 0.75, 1.0];
        for (id, cell) in self.cells.iter().enumerate() {
            for &x in &samples {
                for &y in &samples {
                    let det = cell.mapping.jacobian([x, y]).determinant();
                    if det <= 0.0 {
                        return Err(Error::InvalidGeometry(format!(
                            "cell {id}: det J = {det:.3e} at ({x}, {y})"
                        )));
                    }
                }
            }
        }
        for fid in 0..self.facets.len() {
            let fm = self.facet_mapping(fid);
            for &t in &samples {
                if self.facets[fid].minus.is_some() {
                    let a = self.facet_side_point(fid, 0, t);
                    let b = self.facet_side_point(fid, 1, t);
                    if (a - b).norm() > 1e-12 {
                        return Err(Error::Construction(format!(
                            "facet {fid}: sides disagree by {:.3e} at t = {t}",
                            (a - b).norm()
                        )));
                    }
                }
                let arc = fm.arc_factor(t);
                if arc <= 0.0 {
                    return Err(Error::InvalidGeometry(format!(
                        "facet {fid}: arc factor {arc:.3e} at t = {t}"
                    )));
                }
                let n = fm.unit_normal(t);
                let tang = fm.tangent(t);
                if (n.norm() - 1.0).abs() > 1e-12 || n.dot(&tang).abs() > 1e-12 * tang.norm() {
                    return Err(Error::Construction(format!(
                        "facet {fid}: normal not unit-orthogonal at t = {t}"
                    )));
                }
            }
        }
        Ok(())
    }
}

impl<'a> FacetMapping<'a> {
    fn plus_side(&self) -> FacetSide {
        self.mesh.facets[self.facet].plus
    }

    /// Phi_F(t).
    pub fn point(&self, t: f64) -> Point {
        self.mesh.facet_side_point(self.facet, 0, t)
    }

    /// d Phi_F / dt.
    pub fn tangent(&self, t: f64) -> Point {
        let fs = self.plus_side();
        let (tt, sign) = match fs.orientation {
            Orientation::Same => (t, 1.0),
            Orientation::Reversed => (1.0 - t, -1.0),
        };
        let j = self.mesh.cells[fs.cell]
            .mapping
            .jacobian(edge_point(fs.local_edge, tt));
        let te = edge_tangent(fs.local_edge);
        sign * (j * Vector2::new(te[0], te[1]))
    }

    /// |Phi_F'(t)|.
    pub fn arc_factor(&self, t: f64) -> f64 {
        self.tangent(t).norm()
    }

    /// Unit normal pointing from the minus side to the plus side (outward of
    /// the domain on boundary facets).
    pub fn unit_normal(&self, t: f64) -> Point {
        let fs = self.plus_side();
        let tt = match fs.orientation {
            Orientation::Same => t,
            Orientation::Reversed => 1.0 - t,
        };
        let j = self.mesh.cells[fs.cell]
            .mapping
            .jacobian(edge_point(fs.local_edge, tt));
        let nref = edge_normal(fs.local_edge);
        // covariant transform of the reference outward normal of the plus cell
        let n = j
            .transpose()
            .try_inverse()
            .expect("jacobian is invertible on valid meshes")
            * Vector2::new(nref[0], nref[1]);
        let outward_plus = n / n.norm();
        if self.mesh.facets[self.facet].kind == FacetKind::Boundary {
            outward_plus
        } else {
            -outward_plus
        }
    }
}

/// Quantized endpoint key for edge matching.
fn vertex_key(p: Point) -> (i64, i64) {
    let scale = 1e10;
    ((p.x * scale).round() as i64, (p.y * scale).round() as i64)
}

fn match_facets(cells: &[Cell]) -> Result<Vec<Facet>> {
    type EdgeRef = (usize, usize, bool); // cell, local edge, endpoints swapped in key
    let mut table: BTreeMap<((i64, i64), (i64, i64)), Vec<EdgeRef>> = BTreeMap::new();
    for (cid, cell) in cells.iter().enumerate() {
        for edge in 0..4 {
            let p0 = cell.mapping.eval(edge_point(edge, 0.0));
            let p1 = cell.mapping.eval(edge_point(edge, 1.0));
            let (k0, k1) = (vertex_key(p0), vertex_key(p1));
            if k0 == k1 {
                return Err(Error::InvalidGeometry(format!(
                    "cell {cid} edge {edge} is degenerate"
                )));
            }
            let (key, swapped) = if k0 < k1 {
                ((k0, k1), false)
            } else {
                ((k1, k0), true)
            };
            table.entry(key).or_default().push((cid, edge, swapped));
        }
    }

    let mut facets = Vec::new();
    for (key, entries) in table {
        match entries.len() {
            1 => {
                let (cell, local_edge, _) = entries[0];
                facets.push(Facet {
                    kind: FacetKind::Boundary,
                    plus: FacetSide {
                        cell,
                        local_edge,
                        orientation: Orientation::Same,
                    },
                    minus: None,
                });
            }
            2 => {
                let (c0, _, _) = entries[0];
                let (c1, _, _) = entries[1];
                let (pa, pb) = (cells[c0].patch, cells[c1].patch);
                let kind = if pa == pb {
                    FacetKind::InteriorPatch
                } else {
                    FacetKind::Skeleton
                };
                // plus side: smaller patch id on the skeleton (stable under
                // refinement), smaller cell id otherwise
                let first_is_plus = match kind {
                    FacetKind::Skeleton => pa < pb,
                    _ => c0 < c1,
                };
                let ((pc, pe, ps), (mc, me, ms)) = if first_is_plus {
                    (entries[0], entries[1])
                } else {
                    (entries[1], entries[0])
                };
                // the two sides run the same way iff their swap flags agree
                let orientation = if ps == ms {
                    Orientation::Same
                } else {
                    Orientation::Reversed
                };
                facets.push(Facet {
                    kind,
                    plus: FacetSide {
                        cell: pc,
                        local_edge: pe,
                        orientation: Orientation::Same,
                    },
                    minus: Some(FacetSide {
                        cell: mc,
                        local_edge: me,
                        orientation,
                    }),
                });
            }
            n => {
                return Err(Error::Construction(format!(
                    "edge at {key:?} shared by {n} cells (non-conforming mesh)"
                )));
            }
        }
    }
    Ok(facets)
}

/// Uniform refinement: each cell splits into 4 children by reference-space
/// bisection, with mappings re-derived exactly per kind. Patch ids are
/// inherited and the skeleton stays geometrically identical.
pub fn refine(mesh: &Mesh) -> Mesh {
    let mut cells = Vec::with_capacity(mesh.cells.len() * 4);
    for cell in &mesh.cells {
        for j in 0..2 {
            for i in 0..2 {
                cells.push(Cell {
                    mapping: cell.mapping.child(i, j),
                    patch: cell.patch,
                });
            }
        }
    }
    Mesh::from_cells(cells, mesh.refinement_level + 1)
        .expect("refinement of a valid mesh stays valid")
}

/// map_eval: world point, Jacobian, and determinant at a reference point.
pub fn map_eval(cell: &CellMapping, xh: [f64; 2]) -> Result<(Point, Mat2, f64)> {
    let x = cell.eval(xh);
    let j = cell.jacobian(xh);
    let det = j.determinant();
    if det <= 0.0 {
        return Err(Error::InvalidGeometry(format!(
            "det J = {det:.3e} at ({}, {})",
            xh[0], xh[1]
        )));
    }
    Ok((x, j, det))
}

#[cfg(test)]
mod tests;
