//! Scaled monomial bases, rigid body motions and their L2 complement.
//!
//! Scalar monomials on a cell are `m_a(x) = ((x - x_C) / h_E)^a` for
//! multi-indices `|a| <= k`, ordered by total degree and then by decreasing
//! power of `x`. Vector polynomials in `P_k(E)^2` use the basis
//! `(m_0, 0), ..., (m_last, 0), (0, m_0), ..., (0, m_last)`.

use nalgebra::{DMatrix, DVector};

use crate::mesh::CellGeometry;
use crate::quadrature::QuadratureRule;
use crate::{Error, Point, Result, Vec2};

/// Number of scalar monomials of total degree `<= k`.
pub fn scalar_dim(k: usize) -> usize {
    (k + 1) * (k + 2) / 2
}

/// `dim P_k(E)^2`.
pub fn vector_dim(k: usize) -> usize {
    2 * scalar_dim(k)
}

/// `dim RM_k^⊥(E) = (k+1)(k+2) - 3`.
pub fn rm_perp_dim(k: usize) -> usize {
    (k + 1) * (k + 2) - 3
}

/// Exponents `(a_x, a_y)` in basis order.
pub fn exponents(k: usize) -> Vec<(usize, usize)> {
    let mut e = Vec::with_capacity(scalar_dim(k));
    for d in 0..=k {
        for j in 0..=d {
            e.push((d - j, j));
        }
    }
    e
}

fn index_of(ax: usize, ay: usize) -> usize {
    let d = ax + ay;
    d * (d + 1) / 2 + ay
}

/// Scaled monomials of degree `<= k` centered at `center` with scale `h`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarBasis {
    pub k: usize,
    pub center: Point,
    pub h: f64,
    exps: Vec<(usize, usize)>,
}

impl ScalarBasis {
    pub fn new(k: usize, center: Point, h: f64) -> Self {
        ScalarBasis {
            k,
            center,
            h,
            exps: exponents(k),
        }
    }

    pub fn on_cell(k: usize, geom: &CellGeometry) -> Self {
        Self::new(k, geom.centroid, geom.diameter)
    }

    pub fn len(&self) -> usize {
        self.exps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exps.is_empty()
    }

    pub fn exponents(&self) -> &[(usize, usize)] {
        &self.exps
    }

    /// Values of all monomials at `x`, written into `out`.
    pub fn eval_into(&self, x: Point, out: &mut [f64]) {
        let u = (x.x - self.center.x) / self.h;
        let v = (x.y - self.center.y) / self.h;
        let k = self.k;
        // powers of u and v
        let mut pu = [1.0; 32];
        let mut pv = [1.0; 32];
        for i in 1..=k {
            pu[i] = pu[i - 1] * u;
            pv[i] = pv[i - 1] * v;
        }
        for (o, &(a, b)) in out.iter_mut().zip(&self.exps) {
            *o = pu[a] * pv[b];
        }
    }

    pub fn eval(&self, x: Point) -> Vec<f64> {
        let mut out = vec![0.0; self.len()];
        self.eval_into(x, &mut out);
        out
    }

    /// Matrices mapping coefficients in this basis to coefficients of the
    /// `x` and `y` derivatives in the degree `k - 1` basis of the same cell.
    pub fn derivative_matrices(&self) -> (DMatrix<f64>, DMatrix<f64>) {
        let lower = scalar_dim(self.k.saturating_sub(1));
        let (mut dx, mut dy) = (DMatrix::zeros(lower, self.len()), DMatrix::zeros(lower, self.len()));
        if self.k == 0 {
            return (DMatrix::zeros(0, 1), DMatrix::zeros(0, 1));
        }
        for (col, &(a, b)) in self.exps.iter().enumerate() {
            if a > 0 {
                dx[(index_of(a - 1, b), col)] = a as f64 / self.h;
            }
            if b > 0 {
                dy[(index_of(a, b - 1), col)] = b as f64 / self.h;
            }
        }
        (dx, dy)
    }

    /// Mass matrix `∫ m_a m_b` with the given rule.
    pub fn mass(&self, rule: &QuadratureRule) -> DMatrix<f64> {
        let n = self.len();
        let mut m = DMatrix::zeros(n, n);
        let mut vals = vec![0.0; n];
        for (x, w) in rule.iter() {
            self.eval_into(x, &mut vals);
            for i in 0..n {
                let wi = w * vals[i];
                for j in i..n {
                    m[(i, j)] += wi * vals[j];
                }
            }
        }
        m.fill_lower_triangle_with_upper_triangle();
        m
    }

    /// Coefficients of the rigid body motions `(1,0)`, `(0,1)` and
    /// `(x - x_C)^⊥ = (y - y_C, -(x - x_C))` in the vector basis; requires `k >= 1`.
    pub fn rigid_motions(&self) -> DMatrix<f64> {
        assert!(self.k >= 1, "rigid rotations need degree >= 1");
        let n = self.len();
        let mut r = DMatrix::zeros(2 * n, 3);
        r[(0, 0)] = 1.0;
        r[(n, 1)] = 1.0;
        r[(index_of(0, 1), 2)] = self.h;
        r[(n + index_of(1, 0), 2)] = -self.h;
        r
    }

    /// Evaluates a vector polynomial given by coefficients in the vector basis.
    pub fn eval_vector(&self, coeffs: &DVector<f64>, x: Point) -> Vec2 {
        let vals = self.eval(x);
        let n = self.len();
        let mut out = Vec2::zeros();
        for i in 0..n {
            out.x += coeffs[i] * vals[i];
            out.y += coeffs[n + i] * vals[i];
        }
        out
    }

    pub fn eval_scalar(&self, coeffs: &DVector<f64>, x: Point) -> f64 {
        self.eval(x).iter().zip(coeffs.iter()).map(|(a, b)| a * b).sum()
    }
}

/// Vector basis of `P_k(E)^2` on a cell: `(k+1)(k+2)` fields.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorBasis {
    pub scalar: ScalarBasis,
}

impl VectorBasis {
    pub fn len(&self) -> usize {
        2 * self.scalar.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Field `i` evaluated at `x`.
    pub fn field(&self, i: usize, x: Point) -> Vec2 {
        let n = self.scalar.len();
        let v = self.scalar.eval(x);
        if i < n {
            Vec2::new(v[i], 0.0)
        } else {
            Vec2::new(0.0, v[i - n])
        }
    }

    /// Block-diagonal vector mass matrix.
    pub fn mass(&self, rule: &QuadratureRule) -> DMatrix<f64> {
        block_diag2(&self.scalar.mass(rule))
    }
}

pub fn vector_poly_basis(k: usize, geom: &CellGeometry) -> VectorBasis {
    VectorBasis {
        scalar: ScalarBasis::on_cell(k, geom),
    }
}

pub(crate) fn block_diag2(m: &DMatrix<f64>) -> DMatrix<f64> {
    let (r, c) = m.shape();
    let mut out = DMatrix::zeros(2 * r, 2 * c);
    out.view_mut((0, 0), (r, c)).copy_from(m);
    out.view_mut((r, c), (r, c)).copy_from(m);
    out
}

/// L2(E)-orthonormal basis of `RM_k^⊥(E)`, as coefficient columns in the
/// vector basis of `P_k(E)^2`.
#[derive(Debug, Clone, PartialEq)]
pub struct RmPerpBasis {
    pub k: usize,
    pub coeffs: DMatrix<f64>,
}

impl RmPerpBasis {
    pub fn len(&self) -> usize {
        self.coeffs.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.ncols() == 0
    }
}

/// Builds `RM_k^⊥(E)` by Gram-Schmidt in the L2(E) inner product: the rigid
/// motions go first, then every vector monomial is orthogonalized against
/// everything accepted so far and kept unless it is numerically dependent.
///
/// `mass` is the vector mass matrix of `P_k(E)^2` (rule exact to degree `2k`).
pub fn build_rm_perp(basis: &ScalarBasis, mass: &DMatrix<f64>) -> Result<RmPerpBasis> {
    let k = basis.k;
    let n = 2 * basis.len();
    let inner = |a: &DVector<f64>, b: &DVector<f64>| a.dot(&(mass * b));
    let mut accepted: Vec<DVector<f64>> = Vec::with_capacity(n);
    let rm = basis.rigid_motions();
    let push = |v: DVector<f64>, accepted: &mut Vec<DVector<f64>>| -> bool {
        let scale = inner(&v, &v).sqrt();
        let mut w = v;
        for _ in 0..2 {
            for q in accepted.iter() {
                let c = inner(q, &w);
                w.axpy(-c, q, 1.0);
            }
        }
        let norm = inner(&w, &w).sqrt();
        if norm > 1e-8 * scale {
            accepted.push(w / norm);
            true
        } else {
            false
        }
    };
    for j in 0..3 {
        if !push(rm.column(j).into_owned(), &mut accepted) {
            return Err(Error::SingularLocal {
                cell: usize::MAX,
                what: "rigid body motions are linearly dependent".into(),
            });
        }
    }
    for i in 0..n {
        let mut e = DVector::zeros(n);
        e[i] = 1.0;
        push(e, &mut accepted);
    }
    let m = rm_perp_dim(k);
    if accepted.len() != 3 + m {
        return Err(Error::SingularLocal {
            cell: usize::MAX,
            what: format!("RM complement has dimension {} instead of {m}", accepted.len() - 3),
        });
    }
    let coeffs = DMatrix::from_columns(&accepted[3..]);
    Ok(RmPerpBasis { k, coeffs })
}

/// Edge monomials `1, s, ..., s^k`.
pub fn edge_monomials(k: usize, s: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(k + 1);
    let mut p = 1.0;
    for _ in 0..=k {
        out.push(p);
        p *= s;
    }
    out
}

/// Normalized coordinate of `x` on the edge `a -> b` (a is the lower vertex id):
/// `s = 2 (t - 1/2)` with `t` the arc-length fraction from `a`.
pub fn edge_coordinate(a: Point, b: Point, x: Point) -> f64 {
    let d = b - a;
    let t = (x - a).dot(&d) / d.norm_squared();
    2.0 * (t - 0.5)
}

/// Symmetric tensor polynomial with components in a scalar basis.
#[derive(Debug, Clone, PartialEq)]
pub struct SymTensorPoly {
    pub xx: DVector<f64>,
    pub yy: DVector<f64>,
    pub xy: DVector<f64>,
}

/// Strain of a displacement given in the vector basis of degree `k + 1`;
/// the components are returned in the degree `k` scalar basis of the same cell.
pub fn strain_of(basis_k1: &ScalarBasis, coeffs: &DVector<f64>) -> SymTensorPoly {
    let n = basis_k1.len();
    let (dx, dy) = basis_k1.derivative_matrices();
    let u = coeffs.rows(0, n);
    let v = coeffs.rows(n, n);
    SymTensorPoly {
        xx: &dx * u,
        yy: &dy * v,
        xy: 0.5 * (&dy * u + &dx * v),
    }
}

/// L2 projection of a vector field onto `P_k(E)^2`.
pub fn l2_project_pk(
    f: impl Fn(Point) -> Vec2,
    basis: &ScalarBasis,
    rule: &QuadratureRule,
) -> Result<DVector<f64>> {
    let n = basis.len();
    let chol = basis.mass(rule).cholesky().ok_or_else(|| Error::SingularLocal {
        cell: usize::MAX,
        what: "singular monomial mass matrix".into(),
    })?;
    let mut rhs = nalgebra::DMatrix::zeros(n, 2);
    let mut vals = vec![0.0; n];
    for (x, w) in rule.iter() {
        basis.eval_into(x, &mut vals);
        let fx = f(x);
        for i in 0..n {
            rhs[(i, 0)] += w * fx.x * vals[i];
            rhs[(i, 1)] += w * fx.y * vals[i];
        }
    }
    let sol = chol.solve(&rhs);
    let mut out = DVector::zeros(2 * n);
    out.rows_mut(0, n).copy_from(&sol.column(0));
    out.rows_mut(n, n).copy_from(&sol.column(1));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::polygon_rule;

    fn square() -> CellGeometry {
        CellGeometry::new(&[
            Point::new(0., 0.),
            Point::new(1., 0.),
            Point::new(1., 1.),
            Point::new(0., 1.),
        ])
        .unwrap()
    }

    fn pentagon() -> CellGeometry {
        CellGeometry::new(&[
            Point::new(0.1, 0.0),
            Point::new(0.9, 0.1),
            Point::new(1.0, 0.7),
            Point::new(0.5, 1.1),
            Point::new(-0.1, 0.6),
        ])
        .unwrap()
    }

    #[test]
    fn dimensions() {
        assert_eq!(vector_poly_basis(0, &square()).len(), 2);
        assert_eq!(vector_poly_basis(1, &square()).len(), 6);
        assert_eq!(vector_poly_basis(2, &square()).len(), 12);
        for k in 1..=4 {
            assert_eq!(3 + rm_perp_dim(k), vector_dim(k));
        }
        let b = ScalarBasis::on_cell(3, &square());
        let v = b.eval(square().centroid);
        assert_eq!(v[0], 1.0);
        assert!(v[1..].iter().all(|&x| x == 0.0));
    }

    #[test]
    fn rm_perp_counts_and_orthogonality() {
        for (k, expected) in [(1, 3), (2, 9), (3, 17)] {
            for g in [square(), pentagon()] {
                let rule = polygon_rule(&g, 2 * k + 2).unwrap();
                let b = ScalarBasis::on_cell(k, &g);
                let mass = block_diag2(&b.mass(&rule));
                let perp = build_rm_perp(&b, &mass).unwrap();
                assert_eq!(perp.len(), expected);
                let rm = b.rigid_motions();
                let cross = rm.transpose() * &mass * &perp.coeffs;
                assert!(cross.amax() < 1e-12, "k={k}: {}", cross.amax());
                let gram = perp.coeffs.transpose() * &mass * &perp.coeffs;
                assert!((gram - DMatrix::identity(expected, expected)).amax() < 1e-12);
            }
        }
    }

    #[test]
    fn rotation_has_zero_mean() {
        let g = pentagon();
        let rule = polygon_rule(&g, 4).unwrap();
        let b = ScalarBasis::on_cell(1, &g);
        let r3 = b.rigid_motions().column(2).into_owned();
        let mean = rule.iter().fold(Vec2::zeros(), |acc, (x, w)| acc + b.eval_vector(&r3, x) * w);
        assert!(mean.norm() < 1e-15);
    }

    #[test]
    fn strain_of_rigid_motion_vanishes() {
        let g = pentagon();
        let b1 = ScalarBasis::on_cell(2, &g);
        let rm = b1.rigid_motions();
        for j in 0..3 {
            let e = strain_of(&b1, &rm.column(j).into_owned());
            assert!(e.xx.amax() < 1e-15 && e.yy.amax() < 1e-15 && e.xy.amax() < 1e-15);
        }
    }

    #[test]
    fn strain_of_linear_field() {
        let g = square();
        let b1 = ScalarBasis::on_cell(1, &g);
        // p = ((x - x_C) / h, 0) is the monomial (1, 0) in the first component.
        let mut c = DVector::zeros(6);
        c[1] = 1.0;
        let e = strain_of(&b1, &c);
        assert!((e.xx[0] - 1.0 / g.diameter).abs() < 1e-15);
        assert_eq!(e.yy[0], 0.0);
        assert_eq!(e.xy[0], 0.0);
    }

    #[test]
    fn strain_matches_central_differences() {
        let g = pentagon();
        let bk1 = ScalarBasis::on_cell(2, &g);
        let bk = ScalarBasis::on_cell(1, &g);
        // p = (0, (x - x_C)^2 / h^2): monomial (2,0) of the second component.
        let mut c = DVector::zeros(12);
        c[6 + index_of(2, 0)] = 1.0;
        c[index_of(1, 1)] = 0.7;
        c[6 + index_of(0, 1)] = -0.3;
        let e = strain_of(&bk1, &c);
        let eval = |x: Point| bk1.eval_vector(&c, x);
        let step = 1e-5;
        for x in [
            Point::new(0.3, 0.4),
            Point::new(0.8, 0.2),
            Point::new(0.5, 0.9),
            Point::new(0.1, 0.5),
            Point::new(0.6, 0.6),
        ] {
            let dx = (eval(x + Vec2::new(step, 0.)) - eval(x - Vec2::new(step, 0.))) / (2.0 * step);
            let dy = (eval(x + Vec2::new(0., step)) - eval(x - Vec2::new(0., step))) / (2.0 * step);
            assert!((bk.eval_scalar(&e.xx, x) - dx.x).abs() < 1e-8);
            assert!((bk.eval_scalar(&e.yy, x) - dy.y).abs() < 1e-8);
            assert!((bk.eval_scalar(&e.xy, x) - 0.5 * (dy.x + dx.y)).abs() < 1e-8);
        }
    }

    #[test]
    fn projection_reproduces_polynomials_and_orthogonality() {
        let g = pentagon();
        let rule = polygon_rule(&g, 10).unwrap();
        let b = ScalarBasis::on_cell(2, &g);
        let mut c = DVector::zeros(12);
        for (i, v) in c.iter_mut().enumerate() {
            *v = (i as f64 * 0.37).sin();
        }
        let p = l2_project_pk(|x| b.eval_vector(&c, x), &b, &rule).unwrap();
        assert!((p - &c).amax() < 1e-12);

        let zero = l2_project_pk(|_| Vec2::zeros(), &b, &rule).unwrap();
        assert_eq!(zero.amax(), 0.0);

        let small = CellGeometry::new(&[
            Point::new(0.0, 0.0),
            Point::new(0.1, 0.0),
            Point::new(0.1, 0.1),
            Point::new(0.0, 0.1),
        ])
        .unwrap();
        let rule = polygon_rule(&small, 12).unwrap();
        let b1 = ScalarBasis::on_cell(1, &small);
        let f = |x: Point| Vec2::new(x.x.sin(), 0.0);
        let p = l2_project_pk(f, &b1, &rule).unwrap();
        for i in 0..6 {
            let resid: f64 = rule.integrate(|x| (f(x) - b1.eval_vector(&p, x)).dot(&VectorBasis { scalar: b1.clone() }.field(i, x)));
            assert!(resid.abs() < 1e-12);
        }
    }

    #[test]
    fn edge_coordinate_basics() {
        assert_eq!(edge_monomials(0, 0.3), vec![1.0]);
        let (a, b) = (Point::new(1.0, 1.0), Point::new(3.0, 2.0));
        assert!(edge_coordinate(a, b, nalgebra::center(&a, &b)).abs() < 1e-15);
        assert!((edge_coordinate(a, b, b) - 1.0).abs() < 1e-15);
        let g = crate::quadrature::gauss_1d(3).unwrap();
        let int: f64 = g.on_segment(a, b).map(|(s, _, w)| w * s * s).sum();
        assert!((int - (b - a).norm() / 3.0).abs() < 1e-14);
    }
}
