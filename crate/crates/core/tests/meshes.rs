use hrvem::mesh::{generate_mesh, mean_edge_length, read_mesh, validate_mesh, write_mesh, MeshFamily, MeshSpec, PolygonMesh};
use hrvem::Point;

fn point_in_polygon(poly: &[Point], x: Point) -> bool {
    let mut inside = false;
    let n = poly.len();
    for i in 0..n {
        let (a, b) = (poly[i], poly[(i + 1) % n]);
        if (a.y > x.y) != (b.y > x.y) && x.x < a.x + (x.y - a.y) / (b.y - a.y) * (b.x - a.x) {
            inside = !inside;
        }
    }
    inside
}

fn segment_inside(poly: &[Point], a: Point, b: Point) -> bool {
    (1..40).all(|i| {
        let t = i as f64 / 40.0;
        point_in_polygon(poly, a + (b - a) * t)
    })
}

#[test]
fn every_family_tiles_the_unit_square() {
    for family in MeshFamily::ALL {
        for n in [2, 4, 8, 16] {
            let m = generate_mesh(&MeshSpec::new(family, n)).unwrap();
            assert!((m.total_area() - 1.0).abs() < 1e-12, "{family} n={n}: {}", m.total_area());
            let boundary_length: f64 = (0..m.n_edges())
                .filter(|&e| m.edges()[e].boundary)
                .map(|e| m.edge_length(e))
                .sum();
            assert!((boundary_length - 4.0).abs() < 1e-12, "{family} n={n}");
            for (e, edge) in m.edges().iter().enumerate() {
                let [a, b] = edge.vertices;
                assert!(a < b);
                if edge.boundary {
                    let mid = (m.vertices()[a] + m.vertices()[b].coords) * 0.5;
                    let on_side = [mid.x, mid.y, 1.0 - mid.x, 1.0 - mid.y].iter().any(|c| c.abs() < 1e-12);
                    assert!(on_side, "{family} n={n}: boundary edge {e} not on the boundary");
                }
            }
            // each interior edge is seen with opposite signs by its two cells
            let mut sum = vec![0.0; m.n_edges()];
            let mut count = vec![0; m.n_edges()];
            for c in m.cells() {
                for (&e, &s) in c.edges.iter().zip(&c.signs) {
                    sum[e] += s;
                    count[e] += 1;
                }
            }
            for (e, edge) in m.edges().iter().enumerate() {
                assert_eq!(count[e], if edge.boundary { 1 } else { 2 });
                if !edge.boundary {
                    assert_eq!(sum[e], 0.0);
                }
            }
        }
    }
}

#[test]
fn generation_is_deterministic() {
    for family in MeshFamily::ALL {
        let a = generate_mesh(&MeshSpec::new(family, 6).with_seed(9)).unwrap();
        let b = generate_mesh(&MeshSpec::new(family, 6).with_seed(9)).unwrap();
        assert_eq!(a, b, "{family}");
    }
    let a = generate_mesh(&MeshSpec::new(MeshFamily::PolyU, 6).with_seed(1)).unwrap();
    let b = generate_mesh(&MeshSpec::new(MeshFamily::PolyU, 6).with_seed(2)).unwrap();
    assert_ne!(a, b);
}

#[test]
fn mean_edge_length_halves_under_refinement() {
    for family in MeshFamily::ALL {
        for n in [4, 8] {
            let coarse = mean_edge_length(&generate_mesh(&MeshSpec::new(family, n)).unwrap());
            let fine = mean_edge_length(&generate_mesh(&MeshSpec::new(family, 2 * n)).unwrap());
            let ratio = coarse / fine;
            assert!((ratio - 2.0).abs() < 0.4, "{family} n={n}: ratio {ratio}");
        }
    }
}

#[test]
fn polyu_cells_are_star_shaped_about_their_centroid() {
    let m = generate_mesh(&MeshSpec::new(MeshFamily::PolyU, 8).with_seed(42)).unwrap();
    assert!((m.total_area() - 1.0).abs() < 1e-12);
    for c in 0..m.n_cells() {
        let pts = m.cell_points(c);
        let g = m.cell_geometry(c).unwrap();
        for &v in &pts {
            let towards = g.centroid + (v - g.centroid) * 0.999;
            assert!(segment_inside(&pts, g.centroid, towards), "cell {c}");
        }
    }
}

#[test]
fn concave_families_contain_reflex_vertices() {
    for family in [MeshFamily::ConcQuadS, MeshFamily::ConcHexU] {
        let m = generate_mesh(&MeshSpec::new(family, 4)).unwrap();
        let concave = (0..m.n_cells())
            .filter(|&c| {
                let p = m.cell_points(c);
                let n = p.len();
                (0..n).any(|i| {
                    let (a, b, d) = (p[(i + n - 1) % n], p[i], p[(i + 1) % n]);
                    (b - a).perp(&(d - b)) < 0.0
                })
            })
            .count();
        assert!(concave > 0, "{family}");
        let report = validate_mesh(&m, 0.01, 0.01);
        assert!(report.min_ball_ratio() > 0.0);
    }
}

#[test]
fn file_round_trip_preserves_the_mesh() {
    let dir = tempfile::tempdir().unwrap();
    for family in MeshFamily::ALL {
        let m = generate_mesh(&MeshSpec::new(family, 3)).unwrap();
        let path = dir.path().join(format!("{family}.json"));
        write_mesh(&m, &path).unwrap();
        let back: PolygonMesh = read_mesh(&path).unwrap();
        assert_eq!(back, m, "{family}");
    }
}
