//! Local virtual element spaces and matrices.
//!
//! Stress degrees of freedom of a cell with `n_E` edges, in this order:
//!
//! * for every local edge, the `2(k+1)` coefficients of the traction
//!   `τ_h n` (global edge normal) in the edge monomials `1, s, ..., s^k`,
//!   first component first;
//! * the `m_k` coefficients `γ_i` of `div τ_h` along an L2-orthonormal basis
//!   of `RM_k^⊥(E)`, which are also its moments against that basis.
//!
//! The rigid-motion part of `div τ_h` is not a degree of freedom: it follows
//! from the boundary tractions through the compatibility condition
//! `∫_E div τ_h · r = ∮ τ_h n · r`.

use nalgebra::{DMatrix, DVector, Matrix3, Vector3};

use crate::material::ElasticityField;
use crate::mesh::{CellGeometry, PolygonMesh};
use crate::polybasis::{
    block_diag2, build_rm_perp, edge_monomials, rm_perp_dim, scalar_dim, RmPerpBasis, ScalarBasis,
};
use crate::quadrature::{gauss_1d, polygon_rule, QuadratureRule, Rule1d, MAX_GAUSS_POINTS, MAX_TRIANGLE_DEGREE};
use crate::{Error, Point, Result, Vec2};

/// Number of stress degrees of freedom of a cell: `2(k+1) n_E + m_k`.
pub fn stress_dof_count(k: usize, n_edges: usize) -> usize {
    2 * (k + 1) * n_edges + rm_perp_dim(k)
}

/// Number of displacement degrees of freedom of a cell: `(k+1)(k+2)`.
pub fn displacement_dof_count(k: usize) -> usize {
    (k + 1) * (k + 2)
}

/// An edge seen from a cell.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalEdge {
    pub global: usize,
    /// Endpoint with the lower vertex id (`s = -1`).
    pub start: Point,
    /// Endpoint with the higher vertex id (`s = +1`).
    pub end: Point,
    pub length: f64,
    /// Global unit normal.
    pub normal: Vec2,
    /// `+1` if the global normal points out of this cell.
    pub sign: f64,
    pub boundary: bool,
}

impl LocalEdge {
    pub fn outward_normal(&self) -> Vec2 {
        self.normal * self.sign
    }
}

/// Quadrature settings; `None` selects the defaults (`2k + 4` on cells,
/// `k + 3` Gauss points on edges).
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ElementOptions {
    pub volume_degree: Option<usize>,
    pub edge_points: Option<usize>,
}

/// Local matrices of one cell.
#[derive(Debug, Clone)]
pub struct LocalElementMatrices {
    /// Stress DOFs to coefficients of `p_{k+1}` in `P_{k+1}(E)^2`.
    pub pi: DMatrix<f64>,
    /// `∫ C ε(p) : ε(q)` over the basis of `P_{k+1}(E)^2`.
    pub energy_gram: DMatrix<f64>,
    /// Consistency plus stabilization, symmetrized.
    pub ah: DMatrix<f64>,
    pub se: DMatrix<f64>,
    /// `B[i][j] = ∫_E div τ_i · v_j`.
    pub b: DMatrix<f64>,
    /// Relative asymmetry of `ah` before symmetrization.
    pub asymmetry: f64,
}

/// Per-cell data shared by all local computations.
#[derive(Debug, Clone)]
pub struct ElementSpace {
    pub cell: usize,
    pub k: usize,
    pub geom: CellGeometry,
    pub edges: Vec<LocalEdge>,
    /// Scalar monomials of degree `k`.
    pub basis: ScalarBasis,
    /// Scalar monomials of degree `k + 1`.
    pub basis_up: ScalarBasis,
    pub rm_perp: RmPerpBasis,
    pub rule: QuadratureRule,
    pub edge_rule: Rule1d,
    /// Vector mass matrix of `P_k(E)^2`.
    pub mass: DMatrix<f64>,
    div_map: DMatrix<f64>,
    /// Derivatives from degree `k + 1` to degree `k` coefficients.
    dx_up: DMatrix<f64>,
    dy_up: DMatrix<f64>,
}

impl ElementSpace {
    pub fn new(mesh: &PolygonMesh, cell: usize, k: usize) -> Result<Self> {
        Self::with_options(mesh, cell, k, ElementOptions::default())
    }

    pub fn with_options(mesh: &PolygonMesh, cell: usize, k: usize, options: ElementOptions) -> Result<Self> {
        if k == 0 {
            return Err(Error::SingularLocal {
                cell,
                what: "polynomial degree must be at least 1".into(),
            });
        }
        let geom = mesh.cell_geometry(cell)?;
        let c = &mesh.cells()[cell];
        let edges = c
            .edges
            .iter()
            .zip(&c.signs)
            .map(|(&e, &sign)| {
                let [a, b] = mesh.edges()[e].vertices;
                let (start, end) = (mesh.vertices()[a], mesh.vertices()[b]);
                LocalEdge {
                    global: e,
                    start,
                    end,
                    length: (end - start).norm(),
                    normal: mesh.edge_normal(e),
                    sign,
                    boundary: mesh.edges()[e].boundary,
                }
            })
            .collect();

        let volume_degree = options.volume_degree.unwrap_or(2 * k + 4).min(MAX_TRIANGLE_DEGREE);
        let edge_points = options.edge_points.unwrap_or(k + 3).min(MAX_GAUSS_POINTS);
        let rule = polygon_rule(&geom, volume_degree)?;
        let edge_rule = gauss_1d(edge_points)?;
        let basis = ScalarBasis::on_cell(k, &geom);
        let basis_up = ScalarBasis::on_cell(k + 1, &geom);
        let mass = block_diag2(&basis.mass(&rule));
        let rm_perp = build_rm_perp(&basis, &mass).map_err(|e| relabel(e, cell))?;
        let (dx_up, dy_up) = basis_up.derivative_matrices();

        let mut space = ElementSpace {
            cell,
            k,
            geom,
            edges,
            basis,
            basis_up,
            rm_perp,
            rule,
            edge_rule,
            mass,
            div_map: DMatrix::zeros(0, 0),
            dx_up,
            dy_up,
        };
        space.div_map = space.build_div_map();
        Ok(space)
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn n_stress_dofs(&self) -> usize {
        stress_dof_count(self.k, self.n_edges())
    }

    pub fn n_displacement_dofs(&self) -> usize {
        displacement_dof_count(self.k)
    }

    /// Index of the traction coefficient of `s^j`, component `comp`, on local edge `edge`.
    pub fn edge_dof(&self, edge: usize, comp: usize, j: usize) -> usize {
        edge * 2 * (self.k + 1) + comp * (self.k + 1) + j
    }

    /// Index of the `i`-th divergence coefficient.
    pub fn div_dof(&self, i: usize) -> usize {
        2 * (self.k + 1) * self.n_edges() + i
    }

    /// Matrix from stress DOFs to the coefficients of `div τ_h` in `P_k(E)^2`.
    pub fn divergence_map(&self) -> &DMatrix<f64> {
        &self.div_map
    }

    /// Coefficients of `div τ_h` in the vector basis of `P_k(E)^2`.
    pub fn divergence_from_dofs(&self, dofs: &DVector<f64>) -> DVector<f64> {
        &self.div_map * dofs
    }

    fn build_div_map(&self) -> DMatrix<f64> {
        let k = self.k;
        let nk = self.basis.len();
        let mut d = DMatrix::zeros(2 * nk, self.n_stress_dofs());
        let rot = self.basis.rigid_motions().column(2).into_owned();
        let xc = self.geom.centroid;
        for (le, e) in self.edges.iter().enumerate() {
            for (s, x, w) in self.edge_rule.on_segment(e.start, e.end) {
                let mono = edge_monomials(k, s);
                let perp = Vec2::new(x.y - xc.y, -(x.x - xc.x));
                for comp in 0..2 {
                    for (j, &m) in mono.iter().enumerate() {
                        let col = self.edge_dof(le, comp, j);
                        let phi = w * e.sign * m;
                        // translation part α
                        d[(comp * nk, col)] += phi / self.geom.area;
                        // rotation part β
                        let beta = phi * perp[comp] / self.geom.second_moment;
                        d.column_mut(col).axpy(beta, &rot, 1.0);
                    }
                }
            }
        }
        for i in 0..self.rm_perp.len() {
            d.column_mut(self.div_dof(i)).copy_from(&self.rm_perp.coeffs.column(i));
        }
        d
    }

    /// Voigt strains `(ε11, ε22, 2ε12)` at `x` of every field of the vector
    /// basis of `P_{k+1}(E)^2`, as a `3 x 2 n_{k+1}` matrix.
    pub fn strain_matrix(&self, x: Point) -> DMatrix<f64> {
        let n1 = self.basis_up.len();
        let vals = nalgebra::DVector::from_vec(self.basis.eval(x));
        let gx = self.dx_up.tr_mul(&vals);
        let gy = self.dy_up.tr_mul(&vals);
        let mut e = DMatrix::zeros(3, 2 * n1);
        for a in 0..n1 {
            e[(0, a)] = gx[a];
            e[(2, a)] = gy[a];
            e[(1, n1 + a)] = gy[a];
            e[(2, n1 + a)] = gx[a];
        }
        e
    }

    /// Energy Gram matrix `∫ C ε(p_j) : ε(p_i)` over `P_{k+1}(E)^2`.
    pub fn energy_gram(&self, field: &ElasticityField) -> DMatrix<f64> {
        let n = 2 * self.basis_up.len();
        let mut g = DMatrix::zeros(n, n);
        for (x, w) in self.rule.iter() {
            let e = self.strain_matrix(x);
            let ce = to_dyn(&field.stiffness(x)) * &e;
            g.gemm_tr(w, &e, &ce, 1.0);
        }
        0.5 * (&g + g.transpose())
    }

    /// Right-hand side of the projector system:
    /// `∫_E τ_h : ε(q) = ∮ τ_h n · q - ∫_E div τ_h · q` for every basis `q`.
    fn projector_rhs(&self) -> DMatrix<f64> {
        let k = self.k;
        let n1 = self.basis_up.len();
        let nk = self.basis.len();
        let mut r = DMatrix::zeros(2 * n1, self.n_stress_dofs());
        for (le, e) in self.edges.iter().enumerate() {
            for (s, x, w) in self.edge_rule.on_segment(e.start, e.end) {
                let mono = edge_monomials(k, s);
                let q = self.basis_up.eval(x);
                for comp in 0..2 {
                    for (j, &m) in mono.iter().enumerate() {
                        let col = self.edge_dof(le, comp, j);
                        let phi = w * e.sign * m;
                        for (a, &qa) in q.iter().enumerate() {
                            r[(comp * n1 + a, col)] += phi * qa;
                        }
                    }
                }
            }
        }
        // mixed mass between P_k and P_{k+1}
        let mut mixed = DMatrix::zeros(nk, n1);
        for (x, w) in self.rule.iter() {
            let p = self.basis.eval(x);
            let q = self.basis_up.eval(x);
            for i in 0..nk {
                for a in 0..n1 {
                    mixed[(i, a)] += w * p[i] * q[a];
                }
            }
        }
        let mixed = block_diag2(&mixed);
        r -= mixed.tr_mul(&self.div_map);
        r
    }

    /// Projector onto `C ε(P_{k+1}(E)^2)`: columns are the coefficients of
    /// `p_{k+1}` for each stress DOF, normalized by `∫ p · r = 0` for all
    /// rigid motions `r`.
    pub fn projector(&self, field: &ElasticityField) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
        let gram = self.energy_gram(field);
        let n = gram.nrows();
        let mass_up = block_diag2(&self.basis_up.mass(&self.rule));
        let mut constraints = self.basis_up.rigid_motions().transpose() * mass_up;
        for mut row in constraints.row_iter_mut() {
            let scale = row.amax();
            row /= scale;
        }
        let scale = gram.amax();
        let mut aug = DMatrix::zeros(n + 3, n + 3);
        aug.view_mut((0, 0), (n, n)).copy_from(&gram);
        aug.view_mut((n, 0), (3, n)).copy_from(&(&constraints * scale));
        aug.view_mut((0, n), (n, 3)).copy_from(&(constraints.transpose() * scale));
        let mut rhs = DMatrix::zeros(n + 3, self.n_stress_dofs());
        rhs.view_mut((0, 0), (n, self.n_stress_dofs())).copy_from(&self.projector_rhs());
        let sol = aug.lu().solve(&rhs).ok_or_else(|| Error::SingularLocal {
            cell: self.cell,
            what: "projector system".into(),
        })?;
        Ok((sol.rows(0, n).into_owned(), gram))
    }

    /// Boundary stabilization `κ_E h_E ∮ [(I-Π)σ] n · [(I-Π)τ] n`.
    pub fn stabilization(&self, field: &ElasticityField, pi: &DMatrix<f64>) -> DMatrix<f64> {
        let k = self.k;
        let nd = self.n_stress_dofs();
        let factor = field.kappa(self.geom.centroid) * self.geom.diameter;
        let mut se = DMatrix::zeros(nd, nd);
        let mut diff = DMatrix::zeros(2, nd);
        for (le, e) in self.edges.iter().enumerate() {
            let n = e.outward_normal();
            let traction = DMatrix::from_row_slice(2, 3, &[n.x, 0.0, n.y, 0.0, n.y, n.x]);
            for (s, x, w) in self.edge_rule.on_segment(e.start, e.end) {
                let c = to_dyn(&field.stiffness(x));
                let projected = &traction * c * self.strain_matrix(x) * pi;
                diff.copy_from(&(-projected));
                let mono = edge_monomials(k, s);
                for comp in 0..2 {
                    for (j, &m) in mono.iter().enumerate() {
                        diff[(comp, self.edge_dof(le, comp, j))] += e.sign * m;
                    }
                }
                se.gemm_tr(factor * w, &diff, &diff, 1.0);
            }
        }
        0.5 * (&se + se.transpose())
    }

    /// `B[i][j] = ∫_E div τ_i · v_j`, exact for polynomial integrands.
    pub fn divergence_matrix(&self) -> DMatrix<f64> {
        self.div_map.tr_mul(&self.mass)
    }

    /// All local matrices. Fails if the stabilized stress matrix is not
    /// positive definite.
    pub fn local_matrices(&self, field: &ElasticityField) -> Result<LocalElementMatrices> {
        let (pi, gram) = self.projector(field)?;
        let se = self.stabilization(field, &pi);
        let consistency = pi.tr_mul(&(&gram * &pi));
        let raw = consistency + &se;
        let asymmetry = (&raw - raw.transpose()).amax() / raw.amax().max(f64::MIN_POSITIVE);
        let ah = 0.5 * (&raw + raw.transpose());
        if ah.clone().cholesky().is_none() {
            let min_eig = ah.clone().symmetric_eigenvalues().min();
            return Err(Error::Indefinite {
                cell: self.cell,
                min_eig,
            });
        }
        Ok(LocalElementMatrices {
            pi,
            energy_gram: gram,
            ah,
            se,
            b: self.divergence_matrix(),
            asymmetry,
        })
    }

    /// `∫_E f · v_j` for every displacement basis field.
    pub fn load(&self, f: impl Fn(Point) -> Vec2) -> DVector<f64> {
        let nk = self.basis.len();
        let mut out = DVector::zeros(2 * nk);
        let mut vals = vec![0.0; nk];
        for (x, w) in self.rule.iter() {
            let fx = f(x);
            self.basis.eval_into(x, &mut vals);
            for i in 0..nk {
                out[i] += w * fx.x * vals[i];
                out[nk + i] += w * fx.y * vals[i];
            }
        }
        out
    }

    /// Contribution `∮_e (τ n) · g` of a prescribed boundary displacement on
    /// local edge `edge` (outward normal), one entry per stress DOF.
    pub fn dirichlet(&self, edge: usize, g: impl Fn(Point) -> Vec2) -> DVector<f64> {
        let e = &self.edges[edge];
        let mut out = DVector::zeros(self.n_stress_dofs());
        for (s, x, w) in self.edge_rule.on_segment(e.start, e.end) {
            let gx = g(x);
            let mono = edge_monomials(self.k, s);
            for comp in 0..2 {
                for (j, &m) in mono.iter().enumerate() {
                    out[self.edge_dof(edge, comp, j)] += w * e.sign * m * gx[comp];
                }
            }
        }
        out
    }

    /// Degrees of freedom of the interpolant of a stress field (Voigt
    /// `(σ11, σ22, σ12)`) with known divergence. Edge moments use a
    /// 12-point Gauss rule at least, divergence moments a cell rule of `degree`.
    pub fn interpolate_stress(
        &self,
        sigma: impl Fn(Point) -> Vector3<f64>,
        div_sigma: impl Fn(Point) -> Vec2,
        degree: usize,
    ) -> Result<DVector<f64>> {
        let k = self.k;
        let mut dofs = DVector::zeros(self.n_stress_dofs());
        let g = gauss_1d((k + 8).clamp(12, MAX_GAUSS_POINTS))?;
        for (le, e) in self.edges.iter().enumerate() {
            let n = e.normal;
            let mut mass = DMatrix::zeros(k + 1, k + 1);
            let mut rhs = DMatrix::zeros(k + 1, 2);
            for (s, x, w) in g.on_segment(e.start, e.end) {
                let st = sigma(x);
                let t = Vec2::new(st[0] * n.x + st[2] * n.y, st[2] * n.x + st[1] * n.y);
                let mono = edge_monomials(k, s);
                for i in 0..=k {
                    for j in 0..=k {
                        mass[(i, j)] += w * mono[i] * mono[j];
                    }
                    rhs[(i, 0)] += w * t.x * mono[i];
                    rhs[(i, 1)] += w * t.y * mono[i];
                }
            }
            let sol = mass.cholesky().ok_or_else(|| Error::SingularLocal {
                cell: self.cell,
                what: "edge mass matrix".into(),
            })?;
            let coeffs = sol.solve(&rhs);
            for comp in 0..2 {
                for j in 0..=k {
                    dofs[self.edge_dof(le, comp, j)] = coeffs[(j, comp)];
                }
            }
        }
        let rule = polygon_rule(&self.geom, degree.min(MAX_TRIANGLE_DEGREE))?;
        let nk = self.basis.len();
        let mut moments = DVector::zeros(2 * nk);
        let mut vals = vec![0.0; nk];
        for (x, w) in rule.iter() {
            let d = div_sigma(x);
            self.basis.eval_into(x, &mut vals);
            for i in 0..nk {
                moments[i] += w * d.x * vals[i];
                moments[nk + i] += w * d.y * vals[i];
            }
        }
        let gamma = self.rm_perp.coeffs.tr_mul(&moments);
        for i in 0..gamma.len() {
            dofs[self.div_dof(i)] = gamma[i];
        }
        Ok(dofs)
    }

    /// Edge traction `τ_h n` (global normal) at coordinate `s` of local edge `edge`.
    pub fn traction(&self, dofs: &DVector<f64>, edge: usize, s: f64) -> Vec2 {
        let mono = edge_monomials(self.k, s);
        let mut t = Vec2::zeros();
        for comp in 0..2 {
            for (j, &m) in mono.iter().enumerate() {
                t[comp] += dofs[self.edge_dof(edge, comp, j)] * m;
            }
        }
        t
    }

    /// Voigt strain of the projected displacement `p_{k+1}` with coefficients `p`.
    pub fn projected_strain(&self, p: &DVector<f64>, x: Point) -> Vector3<f64> {
        let e = self.strain_matrix(x) * p;
        Vector3::new(e[0], e[1], e[2])
    }
}

fn relabel(e: Error, cell: usize) -> Error {
    match e {
        Error::SingularLocal { what, .. } => Error::SingularLocal { cell, what },
        other => other,
    }
}

fn to_dyn(m: &Matrix3<f64>) -> DMatrix<f64> {
    DMatrix::from_column_slice(3, 3, m.as_slice())
}

/// Stress `C ε(p)` of a displacement `p ∈ P_{k+1}(E)^2` for a constant
/// isotropic material, with its exact divergence.
#[derive(Debug, Clone)]
pub struct PolynomialStress {
    basis: ScalarBasis,
    lower: ScalarBasis,
    sigma: [DVector<f64>; 3],
    div: [DVector<f64>; 2],
}

impl PolynomialStress {
    /// `p` holds coefficients in the vector basis of degree `space.k + 1`.
    pub fn new(space: &ElementSpace, lambda: f64, mu: f64, p: &DVector<f64>) -> Self {
        let eps = crate::polybasis::strain_of(&space.basis_up, p);
        let a = 2.0 * mu + lambda;
        let s11 = &eps.xx * a + &eps.yy * lambda;
        let s22 = &eps.xx * lambda + &eps.yy * a;
        let s12 = &eps.xy * (2.0 * mu);
        let (dx, dy) = space.basis.derivative_matrices();
        let div = [&dx * &s11 + &dy * &s12, &dx * &s12 + &dy * &s22];
        let lower = ScalarBasis::new(space.k - 1, space.basis.center, space.basis.h);
        debug_assert_eq!(div[0].len(), scalar_dim(space.k - 1));
        PolynomialStress {
            basis: space.basis.clone(),
            lower,
            sigma: [s11, s22, s12],
            div,
        }
    }

    pub fn stress(&self, x: Point) -> Vector3<f64> {
        Vector3::new(
            self.basis.eval_scalar(&self.sigma[0], x),
            self.basis.eval_scalar(&self.sigma[1], x),
            self.basis.eval_scalar(&self.sigma[2], x),
        )
    }

    pub fn divergence(&self, x: Point) -> Vec2 {
        Vec2::new(
            self.lower.eval_scalar(&self.div[0], x),
            self.lower.eval_scalar(&self.div[1], x),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::material::plane_strain_isotropic;
    use crate::polybasis::vector_dim;

    fn square_mesh(size: f64) -> PolygonMesh {
        PolygonMesh::single_cell(vec![
            Point::new(0., 0.),
            Point::new(size, 0.),
            Point::new(size, size),
            Point::new(0., size),
        ])
        .unwrap()
    }

    fn pentagon_mesh() -> PolygonMesh {
        PolygonMesh::single_cell(vec![
            Point::new(0.1, 0.0),
            Point::new(0.9, 0.1),
            Point::new(1.0, 0.7),
            Point::new(0.5, 1.1),
            Point::new(-0.1, 0.6),
        ])
        .unwrap()
    }

    fn random_coeffs(n: usize, seed: u64) -> DVector<f64> {
        DVector::from_fn(n, |i, _| ((i as f64 + 1.0) * 12.9898 + seed as f64 * 78.233).sin())
    }

    #[test]
    fn dof_counts() {
        assert_eq!(stress_dof_count(1, 4), 19);
        assert_eq!(stress_dof_count(2, 3), 27);
        assert_eq!(displacement_dof_count(2), 12);
        let s = ElementSpace::new(&square_mesh(1.0), 0, 1).unwrap();
        assert_eq!(s.n_stress_dofs(), 19);
        assert_eq!(s.n_displacement_dofs(), 6);
    }

    #[test]
    fn identity_stress_has_zero_divergence() {
        // τ = I: traction equals the normal on every edge.
        for k in 1..=3 {
            let s = ElementSpace::new(&pentagon_mesh(), 0, k).unwrap();
            let dofs = s
                .interpolate_stress(|_| Vector3::new(1.0, 1.0, 0.0), |_| Vec2::zeros(), 10)
                .unwrap();
            assert!(s.divergence_from_dofs(&dofs).amax() < 1e-13);
        }
    }

    #[test]
    fn constant_traction_on_unit_square() {
        // φ = (1, 0) in outward sense on all four edges: α = perimeter / area = (4, 0), β = 0.
        let s = ElementSpace::new(&square_mesh(1.0), 0, 1).unwrap();
        let mut dofs = DVector::zeros(s.n_stress_dofs());
        for (le, e) in s.edges.iter().enumerate() {
            dofs[s.edge_dof(le, 0, 0)] = e.sign;
        }
        let div = s.divergence_from_dofs(&dofs);
        let nk = s.basis.len();
        assert!((div[0] - 4.0).abs() < 1e-14);
        for i in 1..div.len() {
            assert!(div[i].abs() < 1e-14, "entry {i} (nk={nk}): {}", div[i]);
        }
    }

    #[test]
    fn projector_reproduces_its_range() {
        let field = plane_strain_isotropic(1.0, 1.0).unwrap();
        for k in 1..=3 {
            let s = ElementSpace::new(&pentagon_mesh(), 0, k).unwrap();
            let (pi, _) = s.projector(&field).unwrap();
            let p = random_coeffs(vector_dim(k + 1), k as u64);
            let stress = PolynomialStress::new(&s, 1.0, 1.0, &p);
            let dofs = s
                .interpolate_stress(|x| stress.stress(x), |x| stress.divergence(x), 2 * k + 6)
                .unwrap();
            let rec = &pi * &dofs;
            for &x in &[Point::new(0.4, 0.5), Point::new(0.8, 0.3), Point::new(0.2, 0.7)] {
                let exact = s.projected_strain(&p, x);
                let got = s.projected_strain(&rec, x);
                assert!((exact - got).amax() < 1e-11 * (1.0 + exact.amax()), "k={k}");
            }
            let zero = &pi * DVector::zeros(s.n_stress_dofs());
            assert_eq!(zero.amax(), 0.0);
        }
    }

    #[test]
    fn t1_spans_symmetric_linear_tensors_for_constant_c() {
        let field = plane_strain_isotropic(1.0, 1.0).unwrap();
        let s = ElementSpace::new(&pentagon_mesh(), 0, 1).unwrap();
        // Range of p ↦ C ε(p) over P_2^2, sampled at the three linear monomials.
        let n = vector_dim(2);
        let mut rows = Vec::new();
        for j in 0..n {
            let mut p = DVector::zeros(n);
            p[j] = 1.0;
            let st = PolynomialStress::new(&s, 1.0, 1.0, &p);
            let mut col: Vec<f64> = Vec::new();
            for x in [Point::new(0.3, 0.2), Point::new(0.7, 0.4), Point::new(0.4, 0.9)] {
                col.extend(st.stress(x).iter());
            }
            rows.push(col);
        }
        let m = DMatrix::from_fn(n, 9, |i, j| rows[i][j]);
        // P_1(E)^4_s has dimension 3 * 3 = 9.
        assert_eq!(m.rank(1e-10), 9);
        let _ = field;
    }

    #[test]
    fn stabilization_vanishes_on_projector_range_and_is_psd() {
        let field = plane_strain_isotropic(1.0, 1.0).unwrap();
        for k in 1..=2 {
            let s = ElementSpace::new(&pentagon_mesh(), 0, k).unwrap();
            let m = s.local_matrices(&field).unwrap();
            let p = random_coeffs(vector_dim(k + 1), 3);
            let st = PolynomialStress::new(&s, 1.0, 1.0, &p);
            let dofs = s.interpolate_stress(|x| st.stress(x), |x| st.divergence(x), 12).unwrap();
            assert!((&m.se * &dofs).amax() < 1e-11 * (1.0 + dofs.amax()));
            let eig = m.se.clone().symmetric_eigenvalues();
            assert!(eig.min() > -1e-12 * eig.max());
            assert!(m.ah.clone().symmetric_eigenvalues().min() > 0.0);
            assert!(m.asymmetry < 1e-12);
        }
    }

    #[test]
    fn ah_is_consistent_on_polynomial_stresses() {
        let field = plane_strain_isotropic(1.0, 1.0).unwrap();
        let s = ElementSpace::new(&square_mesh(1.0), 0, 1).unwrap();
        let m = s.local_matrices(&field).unwrap();
        assert_eq!(m.ah.nrows(), 19);
        let p = random_coeffs(12, 1);
        let q = random_coeffs(12, 2);
        let sp = PolynomialStress::new(&s, 1.0, 1.0, &p);
        let sq = PolynomialStress::new(&s, 1.0, 1.0, &q);
        let dp = s.interpolate_stress(|x| sp.stress(x), |x| sp.divergence(x), 8).unwrap();
        let dq = s.interpolate_stress(|x| sq.stress(x), |x| sq.divergence(x), 8).unwrap();
        let discrete = dp.dot(&(&m.ah * &dq));
        let exact = s.rule.integrate(|x| {
            let a = sp.stress(x);
            let b = sq.stress(x);
            (field.compliance(x) * a).dot(&b)
        });
        assert!((discrete - exact).abs() < 1e-10 * (1.0 + exact.abs()));
    }

    #[test]
    fn divergence_matrix_properties() {
        let s = ElementSpace::new(&square_mesh(1.0), 0, 1).unwrap();
        let b = s.divergence_matrix();
        assert_eq!(b.rank(1e-10), 6);
        // Pure-γ DOFs are orthogonal to rigid motions.
        let rm = s.basis.rigid_motions();
        for i in 0..s.rm_perp.len() {
            let row = b.row(s.div_dof(i));
            for j in 0..3 {
                assert!((row * rm.column(j)).x.abs() < 1e-13);
            }
        }
    }

    #[test]
    fn load_and_dirichlet_terms() {
        let s = ElementSpace::new(&pentagon_mesh(), 0, 2).unwrap();
        assert_eq!(s.load(|_| Vec2::zeros()).amax(), 0.0);
        let f = s.load(|_| Vec2::new(2.0, -1.0));
        let nk = s.basis.len();
        assert!((f[0] - 2.0 * s.geom.area).abs() < 1e-14);
        assert!((f[nk] + s.geom.area).abs() < 1e-14);

        let edge = 1;
        let e = &s.edges[edge];
        assert_eq!(s.dirichlet(edge, |_| Vec2::zeros()).amax(), 0.0);
        let d = s.dirichlet(edge, |_| Vec2::new(0.5, 3.0));
        assert!((d[s.edge_dof(edge, 0, 0)] - e.sign * 0.5 * e.length).abs() < 1e-14);
        assert!((d[s.edge_dof(edge, 1, 0)] - e.sign * 3.0 * e.length).abs() < 1e-14);
    }

    #[test]
    fn dirichlet_moments_match_fine_quadrature() {
        // Edge y = 0, x in [0, 1/4], g = (x^3, 0).
        let m = PolygonMesh::single_cell(vec![
            Point::new(0.0, 0.0),
            Point::new(0.25, 0.0),
            Point::new(0.25, 0.25),
            Point::new(0.0, 0.25),
        ])
        .unwrap();
        let s = ElementSpace::new(&m, 0, 2).unwrap();
        let d = s.dirichlet(0, |x| Vec2::new(x.x.powi(3), 0.0));
        let fine = gauss_1d(20).unwrap();
        for j in 0..=2 {
            let oracle: f64 = fine
                .points
                .iter()
                .zip(&fine.weights)
                .map(|(&s, &w)| {
                    let x = 0.125 * (s + 1.0);
                    0.125 * w * s.powi(j as i32) * x.powi(3)
                })
                .sum();
            assert!((d[s.edge_dof(0, 0, j)] - oracle).abs() < 1e-15);
        }
    }

    #[test]
    fn singular_degree_rejected() {
        assert!(ElementSpace::new(&square_mesh(1.0), 0, 0).is_err());
    }

    #[test]
    fn interpolation_of_constant_stress_is_exact() {
        let s = ElementSpace::new(&pentagon_mesh(), 0, 1).unwrap();
        let sig = Vector3::new(1.5, -0.5, 0.25);
        let dofs = s.interpolate_stress(|_| sig, |_| Vec2::zeros(), 6).unwrap();
        for (le, e) in s.edges.iter().enumerate() {
            let t = s.traction(&dofs, le, 0.37);
            let n = e.normal;
            let exact = Vec2::new(sig[0] * n.x + sig[2] * n.y, sig[2] * n.x + sig[1] * n.y);
            assert!((t - exact).norm() < 1e-14);
        }
        assert!(s.divergence_from_dofs(&dofs).amax() < 1e-13);
    }
}
