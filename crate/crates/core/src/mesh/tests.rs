use super::*;
use crate::quadrature::tensor_rule;
use approx::assert_relative_eq;

#[test]
fn square_mesh_counts() {
    // 2x2 grid split at x = 0.5: two patches, two skeleton facets
    let mesh = build_square_mesh(2, &SquareSplit::vertical(0.5)).unwrap();
    assert_eq!(mesh.n_cells(), 4);
    assert_eq!(mesh.n_patches, 2);
    assert_eq!(mesh.skeleton_facets().count(), 2);
    assert_relative_eq!(mesh.mesh_width, 0.5, epsilon = 1e-14);

    // degenerate case: one cell, empty skeleton
    let mesh = build_square_mesh(1, &SquareSplit::none()).unwrap();
    assert_eq!(mesh.n_cells(), 1);
    assert_eq!(mesh.skeleton_facets().count(), 0);
    assert_eq!(
        mesh.facets
            .iter()
            .filter(|f| f.kind == FacetKind::Boundary)
            .count(),
        4
    );
}

#[test]
fn square_mesh_skeleton_edge_enumeration() {
    // oracle: on an n x n grid the split line x = 0.5 crosses one vertical
    // edge per cell row
    let n = 4;
    let mesh = build_square_mesh(n, &SquareSplit::vertical(0.5)).unwrap();
    assert_eq!(mesh.n_cells(), 16);
    let expected = (0..n)
        .map(|row| {
            let y_mid = (row as f64 + 0.5) / n as f64;
            (0.5, y_mid)
        })
        .count();
    assert_eq!(mesh.skeleton_facets().count(), expected);
    for f in mesh.skeleton_facets() {
        let mid = mesh.facet_mapping(f).point(0.5);
        assert_relative_eq!(mid.x, 0.5, epsilon = 1e-14);
    }
}

#[test]
fn square_mesh_rejects_misaligned_split() {
    let err = build_square_mesh(4, &SquareSplit::vertical(0.3)).unwrap_err();
    assert!(matches!(err, Error::Config(_)));
}

#[test]
fn annulus_base_mesh() {
    let mesh = build_annulus_mesh(0).unwrap();
    // documented generator pattern: central square + 4 transfinite quads
    // inside, 4 sectors outside
    assert_eq!(mesh.n_cells(), 9);
    assert_eq!(mesh.n_patches, 2);
    assert_eq!(mesh.skeleton_facets().count(), 4);
    for f in mesh.skeleton_facets() {
        let fm = mesh.facet_mapping(f);
        for k in 0..=8 {
            let t = k as f64 / 8.0;
            assert!(
                (fm.point(t).norm() - 1.0).abs() < 1e-14,
                "skeleton point off the unit circle"
            );
        }
    }
}

#[test]
fn annulus_refinement() {
    let base = build_annulus_mesh(0).unwrap();
    let fine = build_annulus_mesh(1).unwrap();
    assert_eq!(fine.n_cells(), 4 * base.n_cells());
    assert_eq!(fine.skeleton_facets().count(), 2 * base.skeleton_facets().count());
    assert_relative_eq!(fine.mesh_width, 0.5 * base.mesh_width, epsilon = 1e-13);

    let finer = refine(&fine);
    assert_eq!(finer.refinement_level, 2);
    for f in finer.skeleton_facets() {
        let fm = finer.facet_mapping(f);
        for k in 0..=4 {
            let t = k as f64 / 4.0;
            assert!((fm.point(t).norm() - 1.0).abs() < 1e-14);
        }
    }
}

#[test]
fn refine_square_halves_h() {
    let mesh = build_square_mesh(1, &SquareSplit::none()).unwrap();
    let fine = refine(&mesh);
    assert_eq!(fine.n_cells(), 4);
    assert_relative_eq!(fine.mesh_width, 0.5 * mesh.mesh_width, epsilon = 1e-15);
}

#[test]
fn map_eval_affine_identity() {
    let m = CellMapping::affine(Point::new(0.0, 0.0), Point::new(1.0, 0.0), Point::new(0.0, 1.0));
    let (x, j, det) = map_eval(&m, [0.3, 0.7]).unwrap();
    assert_relative_eq!(x.x, 0.3);
    assert_relative_eq!(x.y, 0.7);
    assert_relative_eq!(j[(0, 0)], 1.0);
    assert_relative_eq!(j[(1, 1)], 1.0);
    assert_relative_eq!(det, 1.0);
}

#[test]
fn map_eval_annular_sector_determinant() {
    // r in [1,2], theta in [0, pi/2]: det J = r * (r_out - r_in) * dtheta
    let m = CellMapping::annular_sector(
        Point::new(0.0, 0.0),
        1.0,
        2.0,
        0.0,
        std::f64::consts::FRAC_PI_2,
    );
    let (_, _, det) = map_eval(&m, [0.5, 0.5]).unwrap();
    assert_relative_eq!(det, std::f64::consts::FRAC_PI_2 * 1.5, epsilon = 1e-14);

    // cross-check the Jacobian by central differences of the map
    let eps = 1e-6;
    let j = m.jacobian([0.5, 0.5]);
    for dim in 0..2 {
        let mut plus = [0.5, 0.5];
        let mut minus = [0.5, 0.5];
        plus[dim] += eps;
        minus[dim] -= eps;
        let fd = (m.eval(plus) - m.eval(minus)) / (2.0 * eps);
        assert!((fd - j.column(dim)).norm() < 1e-7);
    }
}

#[test]
fn bilinear_parallelogram_has_constant_jacobian() {
    let m = CellMapping::bilinear([
        Point::new(0.0, 0.0),
        Point::new(2.0, 1.0),
        Point::new(3.0, 3.0),
        Point::new(1.0, 2.0),
    ]);
    let j0 = m.jacobian([0.1, 0.1]);
    let j1 = m.jacobian([0.9, 0.4]);
    assert!((j0 - j1).norm() < 1e-14);
}

#[test]
fn jacobians_match_finite_differences_everywhere() {
    let mesh = build_annulus_mesh(1).unwrap();
    let eps = 1e-6;
    for cell in &mesh.cells {
        for &x in &[0.2, 0.5, 0.8] {
            for &y in &[0.3, 0.6] {
                let j = cell.mapping.jacobian([x, y]);
                for dim in 0..2 {
                    let mut p = [x, y];
                    let mut m2 = [x, y];
                    p[dim] += eps;
                    m2[dim] -= eps;
                    let fd = (cell.mapping.eval(p) - cell.mapping.eval(m2)) / (2.0 * eps);
                    assert!(
                        (fd - j.column(dim)).norm() < 1e-7 * (1.0 + j.column(dim).norm()),
                        "finite differences disagree with the analytic Jacobian"
                    );
                }
            }
        }
    }
}

#[test]
fn cell_areas_sum_to_domain_measure() {
    let rule = tensor_rule(12);
    let area = |mesh: &Mesh| -> f64 {
        mesh.cells
            .iter()
            .map(|c| rule.integrate(|p| c.mapping.jacobian(p).determinant()))
            .sum()
    };
    let square = build_square_mesh(3, &SquareSplit::vertical(1.0 / 3.0)).unwrap();
    assert_relative_eq!(area(&square), 1.0, epsilon = 1e-12);
    for level in 0..2 {
        let annulus = build_annulus_mesh(level).unwrap();
        assert_relative_eq!(
            area(&annulus),
            4.0 * std::f64::consts::PI,
            epsilon = 1e-10
        );
    }
}

#[test]
fn facet_sides_agree_pointwise() {
    let mesh = build_annulus_mesh(1).unwrap();
    for (fid, facet) in mesh.facets.iter().enumerate() {
        if facet.minus.is_none() {
            continue;
        }
        for k in 0..=10 {
            let t = k as f64 / 10.0;
            let a = mesh.facet_side_point(fid, 0, t);
            let b = mesh.facet_side_point(fid, 1, t);
            assert!((a - b).norm() < 1e-12);
        }
    }
}

#[test]
fn skeleton_normal_direction_is_stable_under_refinement() {
    // inner patch is the plus side, so the normal (minus -> plus) points
    // towards the origin on the unit circle; refinement must not flip it
    for level in 0..3 {
        let mesh = build_annulus_mesh(level).unwrap();
        for f in mesh.skeleton_facets() {
            let fm = mesh.facet_mapping(f);
            let x = fm.point(0.5);
            let n = fm.unit_normal(0.5);
            let radial = x / x.norm();
            assert!(
                n.dot(&radial) < -0.99,
                "level {level}: skeleton normal flipped"
            );
        }
    }
}

#[test]
fn mesh_io_roundtrip() {
    let mesh = build_annulus_mesh(1).unwrap();
    let text = write_mesh(&mesh);
    let back = read_mesh(&text).unwrap();
    assert_eq!(write_mesh(&back), text);
    assert_eq!(back.n_cells(), mesh.n_cells());
    assert_eq!(back.refinement_level, 1);

    // bilinear cells survive the roundtrip too
    let cells = vec![
        Cell {
            mapping: CellMapping::bilinear([
                Point::new(0.0, 0.0),
                Point::new(1.0, 0.1),
                Point::new(1.1, 1.0),
                Point::new(-0.1, 0.9),
            ]),
            patch: 0,
        },
        Cell {
            mapping: CellMapping::bilinear([
                Point::new(1.0, 0.1),
                Point::new(2.0, 0.0),
                Point::new(2.0, 1.0),
                Point::new(1.1, 1.0),
            ]),
            patch: 1,
        },
    ];
    let mesh = Mesh::from_cells(cells, 0).unwrap();
    assert_eq!(mesh.skeleton_facets().count(), 1);
    let text = write_mesh(&mesh);
    assert_eq!(write_mesh(&read_mesh(&text).unwrap()), text);
}

#[test]
fn mesh_io_rejects_tampered_facets() {
    let mesh = build_square_mesh(2, &SquareSplit::vertical(0.5)).unwrap();
    let text = write_mesh(&mesh);
    let tampered = text.replace("facet skeleton", "facet interior_patch");
    assert!(read_mesh(&tampered).is_err());
}
