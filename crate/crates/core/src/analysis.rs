//! Manufactured solutions, discrete error norms, convergence rates and
//! verification checks.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use nalgebra::{DVector, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::assembly::{assemble, Problem, SaddleSystem, Solution};
use crate::element::{ElementOptions, ElementSpace, PolynomialStress};
use crate::material::{plane_strain_isotropic, variable_field_test_c, ElasticityField};
use crate::mesh::{mean_edge_length, PolygonMesh};
use crate::polybasis::{edge_monomials, edge_coordinate, l2_project_pk, vector_dim};
use crate::quadrature::{gauss_1d, polygon_rule, MAX_TRIANGLE_DEGREE};
use crate::{Error, Point, Result, Vec2};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TestCase {
    /// Harmonic cubic displacement, unit moduli, no load.
    A,
    /// `u1 = u2 = sin(πx) sin(πy)`, unit moduli.
    B,
    /// The displacement of `A` with `λ = μ = 1 - |x - c|^2`.
    C,
}

impl TestCase {
    pub const ALL: [TestCase; 3] = [TestCase::A, TestCase::B, TestCase::C];

    pub fn name(self) -> &'static str {
        match self {
            TestCase::A => "a",
            TestCase::B => "b",
            TestCase::C => "c",
        }
    }
}

impl fmt::Display for TestCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TestCase {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "a" => Ok(TestCase::A),
            "b" => Ok(TestCase::B),
            "c" => Ok(TestCase::C),
            other => Err(Error::Assembly(format!("unknown test case `{other}`"))),
        }
    }
}

/// Displacement gradient `[[∂x u1, ∂y u1], [∂x u2, ∂y u2]]`.
type Grad = [[f64; 2]; 2];

/// Exact solution of a model problem on the unit square.
#[derive(Debug, Clone)]
pub struct ManufacturedSolution {
    pub case: TestCase,
    pub field: ElasticityField,
}

fn cubic_u(x: Point) -> Vec2 {
    Vec2::new(x.x.powi(3) - 3.0 * x.x * x.y * x.y, x.y.powi(3) - 3.0 * x.x * x.x * x.y)
}

fn cubic_grad(x: Point) -> Grad {
    let a = 3.0 * x.x * x.x - 3.0 * x.y * x.y;
    let b = -6.0 * x.x * x.y;
    [[a, b], [b, -a]]
}

impl ManufacturedSolution {
    pub fn new(case: TestCase) -> Self {
        let field = match case {
            TestCase::A | TestCase::B => plane_strain_isotropic(1.0, 1.0).expect("valid moduli"),
            TestCase::C => variable_field_test_c(),
        };
        ManufacturedSolution { case, field }
    }

    pub fn displacement(&self, x: Point) -> Vec2 {
        match self.case {
            TestCase::A | TestCase::C => cubic_u(x),
            TestCase::B => {
                let s = (PI * x.x).sin() * (PI * x.y).sin();
                Vec2::new(s, s)
            }
        }
    }

    fn gradient(&self, x: Point) -> Grad {
        match self.case {
            TestCase::A | TestCase::C => cubic_grad(x),
            TestCase::B => {
                let gx = PI * (PI * x.x).cos() * (PI * x.y).sin();
                let gy = PI * (PI * x.x).sin() * (PI * x.y).cos();
                [[gx, gy], [gx, gy]]
            }
        }
    }

    /// Voigt strain `(ε11, ε22, 2ε12)`.
    pub fn strain(&self, x: Point) -> Vector3<f64> {
        let g = self.gradient(x);
        Vector3::new(g[0][0], g[1][1], g[0][1] + g[1][0])
    }

    /// Voigt stress `(σ11, σ22, σ12)`.
    pub fn stress(&self, x: Point) -> Vector3<f64> {
        self.field.stress(x, &self.strain(x))
    }

    /// `f = -div σ`.
    pub fn body_force(&self, x: Point) -> Vec2 {
        match self.case {
            TestCase::A => Vec2::zeros(),
            TestCase::B => {
                let (lambda, mu) = (1.0, 1.0);
                let ss = (PI * x.x).sin() * (PI * x.y).sin();
                let cc = (PI * x.x).cos() * (PI * x.y).cos();
                let v = -PI * PI * (-(3.0 * mu + lambda) * ss + (mu + lambda) * cc);
                Vec2::new(v, v)
            }
            TestCase::C => {
                let e = self.strain(x);
                let (dx, dy) = (x.x - 0.5, x.y - 0.5);
                let exy = 0.5 * e[2];
                4.0 * Vec2::new(e[0] * dx + exy * dy, exy * dx + e[1] * dy)
            }
        }
    }

    pub fn div_stress(&self, x: Point) -> Vec2 {
        -self.body_force(x)
    }

    /// Largest mismatch between `-f` and a fourth-order central difference of
    /// `div σ` at 200 seeded random interior points, relative to `1 + max |f|`.
    pub fn self_check(&self) -> f64 {
        let h = 1e-3;
        let d = |x: Point, e: Vec2| {
            let at = |t: f64| self.stress(x + e * t);
            (8.0 * (at(h) - at(-h)) - (at(2.0 * h) - at(-2.0 * h))) / (12.0 * h)
        };
        let mut rng = ChaCha8Rng::seed_from_u64(200);
        let (mut worst, mut fmax) = (0.0f64, 0.0f64);
        for _ in 0..200 {
            let x = Point::new(rng.random_range(0.01..0.99), rng.random_range(0.01..0.99));
            let sx = d(x, Vec2::x());
            let sy = d(x, Vec2::y());
            let div = Vec2::new(sx[0] + sy[2], sx[2] + sy[1]);
            worst = worst.max((div - self.div_stress(x)).amax());
            fmax = fmax.max(self.body_force(x).amax());
        }
        worst / (1.0 + fmax)
    }
}

/// Solves the model problem on `mesh`.
pub fn solve_manufactured(
    mesh: &PolygonMesh,
    k: usize,
    ms: &ManufacturedSolution,
    tol: f64,
) -> Result<(SaddleSystem, Solution)> {
    let f = |x: Point| ms.body_force(x);
    let g = |x: Point| ms.displacement(x);
    let problem = Problem {
        field: &ms.field,
        body_force: &f,
        boundary: &g,
    };
    let sys = assemble(mesh, k, &problem, ElementOptions::default())?;
    let sol = sys.solve(tol)?;
    Ok((sys, sol))
}

/// The three error norms of one discrete solution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Errors {
    pub sigma: f64,
    pub sigma_div: f64,
    pub u: f64,
}

/// Edge-based stress error `sqrt(Σ_e |e| ∫_e κ |σ n - σ_h n|^2)`, with
/// `k + 4` Gauss points per edge.
pub fn error_sigma(
    mesh: &PolygonMesh,
    sys: &SaddleSystem,
    sol: &Solution,
    sigma: impl Fn(Point) -> Vector3<f64> + Sync,
    field: &ElasticityField,
) -> Result<f64> {
    let k = sys.dofs.k;
    let rule = gauss_1d(k + 4)?;
    let per_edge: Vec<f64> = (0..mesh.n_edges())
        .into_par_iter()
        .map(|e| {
            let [a, b] = mesh.edges()[e].vertices;
            let (pa, pb) = (mesh.vertices()[a], mesh.vertices()[b]);
            let n = mesh.edge_normal(e);
            let off = sys.dofs.edge_offset(e);
            let len = (pb - pa).norm();
            let mut acc = 0.0;
            for (s, x, w) in rule.on_segment(pa, pb) {
                let st = sigma(x);
                let exact = Vec2::new(st[0] * n.x + st[2] * n.y, st[2] * n.x + st[1] * n.y);
                let mono = edge_monomials(k, s);
                let mut th = Vec2::zeros();
                for comp in 0..2 {
                    for (j, m) in mono.iter().enumerate() {
                        th[comp] += sol.sigma[off + comp * (k + 1) + j] * m;
                    }
                }
                acc += w * field.kappa(x) * (exact - th).norm_squared();
            }
            len * acc
        })
        .collect();
    Ok(per_edge.iter().sum::<f64>().sqrt())
}

fn volume_degree(k: usize) -> usize {
    2 * k + 6
}

/// `‖div σ - div σ_h‖_{L2}`.
pub fn error_sigma_div(
    mesh: &PolygonMesh,
    sys: &SaddleSystem,
    sol: &Solution,
    div: impl Fn(Point) -> Vec2 + Sync,
) -> Result<f64> {
    let per_cell: Vec<f64> = (0..mesh.n_cells())
        .into_par_iter()
        .map(|c| {
            let space = &sys.elements[c];
            let coeffs = space.divergence_from_dofs(&sys.cell_stress(mesh, c, &sol.sigma));
            let rule = polygon_rule(&space.geom, volume_degree(space.k))?;
            Ok(rule.integrate(|x| (div(x) - space.basis.eval_vector(&coeffs, x)).norm_squared()))
        })
        .collect::<Result<_>>()?;
    Ok(per_cell.iter().sum::<f64>().sqrt())
}

/// `‖u - u_h‖_{L2}`.
pub fn error_u(
    mesh: &PolygonMesh,
    sys: &SaddleSystem,
    sol: &Solution,
    u: impl Fn(Point) -> Vec2 + Sync,
) -> Result<f64> {
    let per_cell: Vec<f64> = (0..mesh.n_cells())
        .into_par_iter()
        .map(|c| {
            let space = &sys.elements[c];
            let coeffs = sys.cell_displacement(c, &sol.u);
            let rule = polygon_rule(&space.geom, volume_degree(space.k))?;
            Ok(rule.integrate(|x| (u(x) - space.basis.eval_vector(&coeffs, x)).norm_squared()))
        })
        .collect::<Result<_>>()?;
    Ok(per_cell.iter().sum::<f64>().sqrt())
}

pub fn errors(mesh: &PolygonMesh, sys: &SaddleSystem, sol: &Solution, ms: &ManufacturedSolution) -> Result<Errors> {
    Ok(Errors {
        sigma: error_sigma(mesh, sys, sol, |x| ms.stress(x), &ms.field)?,
        sigma_div: error_sigma_div(mesh, sys, sol, |x| ms.div_stress(x))?,
        u: error_u(mesh, sys, sol, |x| ms.displacement(x))?,
    })
}

/// Norms of the exact solution measured like the errors, used to decide
/// whether an error is zero up to round-off.
pub fn reference_norms(mesh: &PolygonMesh, k: usize, ms: &ManufacturedSolution) -> Result<Errors> {
    let rule = gauss_1d(k + 4)?;
    let mut sigma = 0.0;
    for e in 0..mesh.n_edges() {
        let [a, b] = mesh.edges()[e].vertices;
        let (pa, pb) = (mesh.vertices()[a], mesh.vertices()[b]);
        let n = mesh.edge_normal(e);
        let mut acc = 0.0;
        for (_, x, w) in rule.on_segment(pa, pb) {
            let st = ms.stress(x);
            let t = Vec2::new(st[0] * n.x + st[2] * n.y, st[2] * n.x + st[1] * n.y);
            acc += w * ms.field.kappa(x) * t.norm_squared();
        }
        sigma += (pb - pa).norm() * acc;
    }
    let (mut div, mut u) = (0.0, 0.0);
    for c in 0..mesh.n_cells() {
        let geom = mesh.cell_geometry(c)?;
        let r = polygon_rule(&geom, volume_degree(k))?;
        div += r.integrate(|x| ms.div_stress(x).norm_squared());
        u += r.integrate(|x| ms.displacement(x).norm_squared());
    }
    Ok(Errors {
        sigma: sigma.sqrt(),
        sigma_div: div.sqrt(),
        u: u.sqrt(),
    })
}

/// Relative threshold below which an error counts as exact.
pub const EXACT_TOL: f64 = 1e-10;

/// Observed convergence order of one error norm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Rate {
    Slope(f64),
    /// The error on the finest level is at round-off.
    Exact,
    /// Fewer than two usable levels.
    Insufficient,
}

impl fmt::Display for Rate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rate::Slope(s) => write!(f, "{s:.2}"),
            Rate::Exact => f.write_str("exact"),
            Rate::Insufficient => f.write_str("n/a"),
        }
    }
}

/// Least-squares slope of `log e` against `log h` over the (at most) three
/// finest levels whose error exceeds `exact_tol * (1 + norm)`. Levels with
/// non-finite values are skipped. `h` must be ordered coarse to fine.
pub fn fit_rate(h: &[f64], e: &[f64], norm: f64, exact_tol: f64) -> Rate {
    let threshold = exact_tol * (1.0 + norm);
    let usable: Vec<(f64, f64)> = h
        .iter()
        .zip(e)
        .filter(|(h, e)| h.is_finite() && e.is_finite() && **h > 0.0)
        .map(|(&h, &e)| (h, e))
        .collect();
    match usable.last() {
        None => return Rate::Insufficient,
        Some(&(_, e)) if e <= threshold => return Rate::Exact,
        _ => {}
    }
    let pts: Vec<(f64, f64)> = usable
        .iter()
        .filter(|(_, e)| *e > threshold)
        .map(|&(h, e)| (h.ln(), e.ln()))
        .collect();
    let pts = &pts[pts.len().saturating_sub(3)..];
    if pts.len() < 2 {
        return Rate::Insufficient;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx <= 0.0 {
        return Rate::Insufficient;
    }
    Rate::Slope(sxy / sxx)
}

/// Global stress DOFs of the interpolant of a stress field. Edge values come
/// from the first cell containing the edge.
pub fn interpolate_global(
    mesh: &PolygonMesh,
    sys: &SaddleSystem,
    sigma: impl Fn(Point) -> Vector3<f64> + Sync,
    div: impl Fn(Point) -> Vec2 + Sync,
) -> Result<Vec<f64>> {
    let k = sys.dofs.k;
    let local: Vec<DVector<f64>> = (0..mesh.n_cells())
        .into_par_iter()
        .map(|c| sys.elements[c].interpolate_stress(&sigma, &div, volume_degree(k)))
        .collect::<Result<_>>()?;
    let mut out = vec![f64::NAN; sys.dofs.n_stress()];
    for (c, dofs) in local.iter().enumerate() {
        for (i, g) in sys.dofs.local_stress_dofs(mesh, c).into_iter().enumerate() {
            if out[g].is_nan() {
                out[g] = dofs[i];
            }
        }
    }
    Ok(out)
}

/// Largest cell discrepancy `‖div(I σ) - Π_k div σ‖_{L2(E)}`, where `I` is
/// the stress interpolant and `Π_k` the L2 projection onto `P_k(E)^2`,
/// divided by `‖div σ‖_{L2(Ω)}` (absolute when `div σ = 0`). Cell integrals use
/// the highest available rule so that the check is not limited by quadrature
/// of non-polynomial data.
pub fn check_commuting_diagram(mesh: &PolygonMesh, k: usize, ms: &ManufacturedSolution) -> Result<f64> {
    let per_cell: Vec<(f64, f64)> = (0..mesh.n_cells())
        .into_par_iter()
        .map(|c| {
            let space = ElementSpace::new(mesh, c, k)?;
            let dofs = space.interpolate_stress(|x| ms.stress(x), |x| ms.div_stress(x), MAX_TRIANGLE_DEGREE)?;
            let div_h = space.divergence_from_dofs(&dofs);
            let rule = polygon_rule(&space.geom, MAX_TRIANGLE_DEGREE)?;
            let proj = l2_project_pk(|x| ms.div_stress(x), &space.basis, &rule)
                .map_err(|_| Error::SingularLocal { cell: c, what: "L2 projection".into() })?;
            let diff = &div_h - &proj;
            let err = diff.dot(&(&space.mass * &diff)).max(0.0).sqrt();
            Ok((err, rule.integrate(|x| ms.div_stress(x).norm_squared())))
        })
        .collect::<Result<_>>()?;
    let worst = per_cell.iter().fold(0.0f64, |m, p| m.max(p.0));
    let norm = per_cell.iter().map(|p| p.1).sum::<f64>().sqrt();
    Ok(if norm > 0.0 { worst / norm } else { worst })
}

/// Outcome of the patch test with a linear displacement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PatchTest {
    /// Largest stress DOF error relative to the largest DOF magnitude.
    pub stress: f64,
    /// `‖u - u_h‖_{L2}`.
    pub displacement: f64,
}

/// Linear displacement with constant unit moduli: the discrete solution
/// must reproduce the constant stress and the displacement.
pub fn patch_test(mesh: &PolygonMesh, k: usize, tol: f64) -> Result<PatchTest> {
    let field = plane_strain_isotropic(1.0, 1.0)?;
    let u = |x: Point| Vec2::new(0.3 + 1.1 * x.x - 0.4 * x.y, -0.2 + 0.7 * x.x + 0.5 * x.y);
    let strain = Vector3::new(1.1, 0.5, 0.3);
    let stress = field.stress(Point::origin(), &strain);
    let f = |_: Point| Vec2::zeros();
    let problem = Problem {
        field: &field,
        body_force: &f,
        boundary: &u,
    };
    let sys = assemble(mesh, k, &problem, ElementOptions::default())?;
    let sol = sys.solve(tol)?;
    let exact = interpolate_global(mesh, &sys, |_| stress, |_| Vec2::zeros())?;
    let scale = exact.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let stress_err = exact
        .iter()
        .zip(&sol.sigma)
        .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()))
        / scale;
    Ok(PatchTest {
        stress: stress_err,
        displacement: error_u(mesh, &sys, &sol, u)?,
    })
}

/// Applies the projector to the interpolant of `C ε(p)` for random
/// `p ∈ P_{k+1}(E)^2` on randomly chosen cells and returns the largest
/// relative error of the reconstructed strain at the cell quadrature points.
pub fn projector_consistency(mesh: &PolygonMesh, k: usize, samples: usize, seed: u64) -> Result<f64> {
    let (lambda, mu) = (1.0, 1.0);
    let field = plane_strain_isotropic(lambda, mu)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let cell = rng.random_range(0..mesh.n_cells());
        let space = ElementSpace::new(mesh, cell, k)?;
        let p = DVector::from_fn(vector_dim(k + 1), |_, _| rng.random_range(-1.0..1.0));
        let st = PolynomialStress::new(&space, lambda, mu, &p);
        let dofs = space.interpolate_stress(|x| st.stress(x), |x| st.divergence(x), volume_degree(k))?;
        let (pi, _) = space.projector(&field)?;
        let rec = &pi * &dofs;
        for (x, _) in space.rule.iter() {
            let exact = space.projected_strain(&p, x);
            let got = space.projected_strain(&rec, x);
            worst = worst.max((exact - got).amax() / (1.0 + exact.amax()));
        }
    }
    Ok(worst)
}

/// Mean edge length used as the mesh size in rate fits.
pub fn mesh_size(mesh: &PolygonMesh) -> f64 {
    mean_edge_length(mesh)
}

/// Coordinate of `x` on global edge `e` (`-1` at the lower-id vertex).
pub fn edge_parameter(mesh: &PolygonMesh, e: usize, x: Point) -> f64 {
    let [a, b] = mesh.edges()[e].vertices;
    edge_coordinate(mesh.vertices()[a], mesh.vertices()[b], x)
}
