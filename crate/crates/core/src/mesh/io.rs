//! Plain text mesh format.
//!
//! ```text
//! hmdd mesh v1
//! patches <n_patches>
//! level <refinement_level>
//! cells <n_cells>
//! cell <patch> affine <ox> <oy> <e1x> <e1y> <e2x> <e2y>
//! cell <patch> bilinear <x00> <y00> <x10> <y10> <x11> <y11> <x01> <y01>
//! cell <patch> annular_sector <cx> <cy> <r_in> <r_out> <theta0> <theta1>
//! cell <patch> transfinite <off_u> <off_v> <scale> | <curve> | <curve> | <curve> | <curve>
//! facets <n_facets>
//! facet <kind> <plus_cell> <plus_edge> <minus_cell> <minus_edge> <minus_orientation>
//! ```
//!
//! A curve is `line <ax> <ay> <bx> <by>` or `arc <cx> <cy> <r> <theta0> <theta1>`.
//! Facet fields for boundary facets are `-`. Floats are written with 17
//! significant digits so a written mesh reloads bit-identically. The facet
//! section is redundant: facets are reconstructed from the cells on import
//! and the file content is cross-checked against the reconstruction.

use super::{Cell, CellMapping, Curve, Facet, FacetKind, MapKind, Mesh, Orientation, Point};
use crate::error::{Error, Result};
use std::fmt::Write as _;

fn fmt_f(x: f64) -> String {
    format!("{x:.16e}")
}

fn curve_text(c: &Curve) -> String {
    match c {
        Curve::Line { a, b } => format!(
            "line {} {} {} {}",
            fmt_f(a.x),
            fmt_f(a.y),
            fmt_f(b.x),
            fmt_f(b.y)
        ),
        Curve::Arc {
            center,
            radius,
            theta0,
            theta1,
        } => format!(
            "arc {} {} {} {} {}",
            fmt_f(center.x),
            fmt_f(center.y),
            fmt_f(*radius),
            fmt_f(*theta0),
            fmt_f(*theta1)
        ),
    }
}

fn facet_text(f: &Facet) -> String {
    let kind = match f.kind {
        FacetKind::InteriorPatch => "interior_patch",
        FacetKind::Skeleton => "skeleton",
        FacetKind::Boundary => "boundary",
    };
    match &f.minus {
        Some(m) => {
            let orient = match m.orientation {
                Orientation::Same => "same",
                Orientation::Reversed => "reversed",
            };
            format!(
                "facet {kind} {} {} {} {} {orient}",
                f.plus.cell, f.plus.local_edge, m.cell, m.local_edge
            )
        }
        None => format!("facet {kind} {} {} - - -", f.plus.cell, f.plus.local_edge),
    }
}

pub fn write_mesh(mesh: &Mesh) -> String {
    let mut out = String::new();
    out.push_str("hmdd mesh v1\n");
    let _ = writeln!(out, "patches {}", mesh.n_patches);
    let _ = writeln!(out, "level {}", mesh.refinement_level);
    let _ = writeln!(out, "cells {}", mesh.cells.len());
    for cell in &mesh.cells {
        match &cell.mapping.kind {
            MapKind::Affine { origin, e1, e2 } => {
                let _ = writeln!(
                    out,
                    "cell {} affine {} {} {} {} {} {}",
                    cell.patch,
                    fmt_f(origin.x),
                    fmt_f(origin.y),
                    fmt_f(e1.x),
                    fmt_f(e1.y),
                    fmt_f(e2.x),
                    fmt_f(e2.y)
                );
            }
            MapKind::Bilinear { corners } => {
                let c: Vec<String> = corners
                    .iter()
                    .flat_map(|p| [fmt_f(p.x), fmt_f(p.y)])
                    .collect();
                let _ = writeln!(out, "cell {} bilinear {}", cell.patch, c.join(" "));
            }
            MapKind::AnnularSector {
                center,
                r_in,
                r_out,
                theta0,
                theta1,
            } => {
                let _ = writeln!(
                    out,
                    "cell {} annular_sector {} {} {} {} {} {}",
                    cell.patch,
                    fmt_f(center.x),
                    fmt_f(center.y),
                    fmt_f(*r_in),
                    fmt_f(*r_out),
                    fmt_f(*theta0),
                    fmt_f(*theta1)
                );
            }
            MapKind::Transfinite { curves, window } => {
                let _ = writeln!(
                    out,
                    "cell {} transfinite {} {} {} | {} | {} | {} | {}",
                    cell.patch,
                    fmt_f(window[0]),
                    fmt_f(window[1]),
                    fmt_f(window[2]),
                    curve_text(&curves[0]),
                    curve_text(&curves[1]),
                    curve_text(&curves[2]),
                    curve_text(&curves[3])
                );
            }
        }
    }
    let _ = writeln!(out, "facets {}", mesh.facets.len());
    for f in &mesh.facets {
        let _ = writeln!(out, "{}", facet_text(f));
    }
    out
}

struct Tokens<'a> {
    parts: std::str::SplitWhitespace<'a>,
    line: usize,
}

impl<'a> Tokens<'a> {
    fn next(&mut self) -> Result<&'a str> {
        self.parts
            .next()
            .ok_or_else(|| Error::Parse(format!("line {}: unexpected end of line", self.line)))
    }

    fn next_f64(&mut self) -> Result<f64> {
        let tok = self.next()?;
        tok.parse()
            .map_err(|_| Error::Parse(format!("line {}: bad float '{tok}'", self.line)))
    }

    fn next_usize(&mut self) -> Result<usize> {
        let tok = self.next()?;
        tok.parse()
            .map_err(|_| Error::Parse(format!("line {}: bad integer '{tok}'", self.line)))
    }
}

fn parse_curve(toks: &mut Tokens) -> Result<Curve> {
    match toks.next()? {
        "line" => Ok(Curve::Line {
            a: Point::new(toks.next_f64()?, toks.next_f64()?),
            b: Point::new(toks.next_f64()?, toks.next_f64()?),
        }),
        "arc" => Ok(Curve::Arc {
            center: Point::new(toks.next_f64()?, toks.next_f64()?),
            radius: toks.next_f64()?,
            theta0: toks.next_f64()?,
            theta1: toks.next_f64()?,
        }),
        other => Err(Error::Parse(format!("unknown curve kind '{other}'"))),
    }
}

pub fn read_mesh(text: &str) -> Result<Mesh> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
    let mut next_line = || -> Result<(usize, &str)> {
        for (no, l) in lines.by_ref() {
            if !l.is_empty() {
                return Ok((no, l));
            }
        }
        Err(Error::Parse("unexpected end of file".into()))
    };

    let (_, header) = next_line()?;
    if header != "hmdd mesh v1" {
        return Err(Error::Parse(format!("bad header '{header}'")));
    }
    let expect_kv = |line: (usize, &str), key: &str| -> Result<usize> {
        let mut toks = Tokens {
            parts: line.1.split_whitespace(),
            line: line.0,
        };
        let k = toks.next()?;
        if k != key {
            return Err(Error::Parse(format!("line {}: expected '{key}'", line.0)));
        }
        toks.next_usize()
    };
    let _patches = expect_kv(next_line()?, "patches")?;
    let level = expect_kv(next_line()?, "level")?;
    let n_cells = expect_kv(next_line()?, "cells")?;

    let mut cells = Vec::with_capacity(n_cells);
    for _ in 0..n_cells {
        let (no, line) = next_line()?;
        let (head, tail) = match line.split_once('|') {
            Some((h, t)) => (h, Some(t)),
            None => (line, None),
        };
        let mut toks = Tokens {
            parts: head.split_whitespace(),
            line: no,
        };
        let tag = toks.next()?;
        if tag != "cell" {
            return Err(Error::Parse(format!("line {no}: expected 'cell'")));
        }
        let patch = toks.next_usize()?;
        let kind = toks.next()?;
        let mapping = match kind {
            "affine" => CellMapping::affine(
                Point::new(toks.next_f64()?, toks.next_f64()?),
                Point::new(toks.next_f64()?, toks.next_f64()?),
                Point::new(toks.next_f64()?, toks.next_f64()?),
            ),
            "bilinear" => {
                let mut corners = [Point::new(0.0, 0.0); 4];
                for c in corners.iter_mut() {
                    *c = Point::new(toks.next_f64()?, toks.next_f64()?);
                }
                CellMapping::bilinear(corners)
            }
            "annular_sector" => CellMapping::annular_sector(
                Point::new(toks.next_f64()?, toks.next_f64()?),
                toks.next_f64()?,
                toks.next_f64()?,
                toks.next_f64()?,
                toks.next_f64()?,
            ),
            "transfinite" => {
                let window = [toks.next_f64()?, toks.next_f64()?, toks.next_f64()?];
                let tail =
                    tail.ok_or_else(|| Error::Parse(format!("line {no}: missing curves")))?;
                let specs: Vec<&str> = tail.split('|').collect();
                if specs.len() != 4 {
                    return Err(Error::Parse(format!(
                        "line {no}: transfinite cell needs 4 curves, got {}",
                        specs.len()
                    )));
                }
                let mut curves = Vec::with_capacity(4);
                for spec in specs {
                    let mut ct = Tokens {
                        parts: spec.split_whitespace(),
                        line: no,
                    };
                    curves.push(parse_curve(&mut ct)?);
                }
                let curves: [Curve; 4] = curves.try_into().expect("length checked");
                CellMapping {
                    kind: MapKind::Transfinite {
                        curves: std::sync::Arc::new(curves),
                        window,
                    },
                }
            }
            other => return Err(Error::Parse(format!("line {no}: unknown kind '{other}'"))),
        };
        cells.push(Cell { mapping, patch });
    }

    let mesh = Mesh::from_cells(cells, level)?;

    // The facet section must agree with the reconstruction.
    let n_facets = expect_kv(next_line()?, "facets")?;
    if n_facets != mesh.facets.len() {
        return Err(Error::Parse(format!(
            "file declares {n_facets} facets, cells produce {}",
            mesh.facets.len()
        )));
    }
    for f in &mesh.facets {
        let (no, line) = next_line()?;
        if line != facet_text(f).as_str() {
            return Err(Error::Parse(format!(
                "line {no}: facet record '{line}' does not match reconstruction '{}'",
                facet_text(f)
            )));
        }
    }
    Ok(mesh)
}
