use hrvem::analysis::{errors, reference_norms, solve_manufactured, ManufacturedSolution, TestCase};
use hrvem::assembly::{assemble, zero, Problem};
use hrvem::element::ElementOptions;
use hrvem::material::plane_strain_isotropic;
use hrvem::mesh::{generate_mesh, MeshFamily, MeshSpec};

#[test]
fn test_a_divergence_is_exact_for_k1_on_every_family() {
    let ms = ManufacturedSolution::new(TestCase::A);
    for family in MeshFamily::ALL {
        let m = generate_mesh(&MeshSpec::new(family, 4)).unwrap();
        let (sys, sol) = solve_manufactured(&m, 1, &ms, 1e-10).unwrap();
        let e = errors(&m, &sys, &sol, &ms).unwrap();
        assert!(e.sigma_div < 1e-11, "{family}: {e:?}");
    }
}

#[test]
fn test_a_stress_is_exact_for_k2_on_concave_meshes() {
    let ms = ManufacturedSolution::new(TestCase::A);
    for family in [MeshFamily::ConcQuadS, MeshFamily::ConcHexU, MeshFamily::PolyU] {
        let m = generate_mesh(&MeshSpec::new(family, 4)).unwrap();
        let (sys, sol) = solve_manufactured(&m, 2, &ms, 1e-10).unwrap();
        let e = errors(&m, &sys, &sol, &ms).unwrap();
        let r = reference_norms(&m, 2, &ms).unwrap();
        assert!(e.sigma <= 1e-9 * r.sigma, "{family}: {e:?}");
        assert!(e.sigma_div <= 1e-9, "{family}: {e:?}");
    }
}

#[test]
fn errors_shrink_by_about_four_for_k1() {
    let ms = ManufacturedSolution::new(TestCase::A);
    let solve = |n| {
        let m = generate_mesh(&MeshSpec::new(MeshFamily::QuadS, n)).unwrap();
        let (sys, sol) = solve_manufactured(&m, 1, &ms, 1e-10).unwrap();
        errors(&m, &sys, &sol, &ms).unwrap()
    };
    let (a, b) = (solve(8), solve(16));
    assert!(a.u / b.u > 3.5 && a.u / b.u < 4.5, "{}", a.u / b.u);
    assert!(a.sigma / b.sigma > 3.5, "{}", a.sigma / b.sigma);
}

#[test]
fn assembled_matrix_is_symmetric_and_reproducible() {
    let field = plane_strain_isotropic(1.0, 1.0).unwrap();
    let problem = Problem {
        field: &field,
        body_force: &zero,
        boundary: &zero,
    };
    let m = generate_mesh(&MeshSpec::new(MeshFamily::PolyU, 5)).unwrap();
    let a = assemble(&m, 2, &problem, ElementOptions::default()).unwrap();
    let b = assemble(&m, 2, &problem, ElementOptions::default()).unwrap();
    assert_eq!(a.matrix, b.matrix);
    let dense = a.matrix.to_dense();
    assert_eq!(dense, dense.transpose());
    let mut out = Vec::new();
    a.matrix.write_matrix_market(&mut out).unwrap();
    let text = String::from_utf8(out).unwrap();
    let header: Vec<usize> = text.lines().nth(1).unwrap().split(' ').map(|v| v.parse().unwrap()).collect();
    assert_eq!(header[0], a.dofs.total());
    assert_eq!(header[2], text.lines().count() - 2);
}

#[test]
fn scaling_the_material_scales_the_stress() {
    // Doubling C leaves u unchanged for a displacement problem and doubles σ.
    let m = generate_mesh(&MeshSpec::new(MeshFamily::HexS, 3)).unwrap();
    let g = |x: hrvem::Point| hrvem::Vec2::new(x.x * x.y, x.x - x.y * x.y);
    let solve = |scale: f64| {
        let field = plane_strain_isotropic(1.0, 1.0).unwrap().scaled(scale);
        let f = |_: hrvem::Point| hrvem::Vec2::new(scale, -scale);
        let problem = Problem {
            field: &field,
            body_force: &f,
            boundary: &g,
        };
        assemble(&m, 1, &problem, ElementOptions::default()).unwrap().solve(1e-10).unwrap()
    };
    let (one, two) = (solve(1.0), solve(2.0));
    for (a, b) in one.u.iter().zip(&two.u) {
        assert!((a - b).abs() < 1e-10 * (1.0 + a.abs()));
    }
    for (a, b) in one.sigma.iter().zip(&two.sigma) {
        assert!((2.0 * a - b).abs() < 1e-9 * (1.0 + b.abs()));
    }
}
