//! Quadrature on intervals, triangles and star-shaped polygons.

use crate::mesh::{triangle_area, CellGeometry};
use crate::{Error, Point, Result};

/// Gauss-Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Rule1d {
    pub points: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Rule1d {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Points and weights mapped onto the segment `a -> b`, as
    /// `(s, x(s), weight)` with `s` the coordinate in `[-1, 1]`.
    pub fn on_segment(&self, a: Point, b: Point) -> impl Iterator<Item = (f64, Point, f64)> + '_ {
        let half = 0.5 * (b - a).norm();
        let mid = nalgebra::center(&a, &b);
        let d = 0.5 * (b - a);
        self.points
            .iter()
            .zip(&self.weights)
            .map(move |(&s, &w)| (s, mid + d * s, w * half))
    }
}

/// Two-dimensional rule.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    pub points: Vec<Point>,
    pub weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (Point, f64)> + '_ {
        self.points.iter().copied().zip(self.weights.iter().copied())
    }

    pub fn integrate(&self, f: impl Fn(Point) -> f64) -> f64 {
        self.iter().map(|(x, w)| w * f(x)).sum()
    }
}

pub const MAX_GAUSS_POINTS: usize = 20;
pub const MAX_TRIANGLE_DEGREE: usize = 20;

/// `n`-point Gauss-Legendre rule, exact up to degree `2n - 1`.
pub fn gauss_1d(n: usize) -> Result<Rule1d> {
    if n == 0 || n > MAX_GAUSS_POINTS {
        return Err(Error::Quadrature(format!(
            "Gauss rule with {n} points (supported: 1..={MAX_GAUSS_POINTS})"
        )));
    }
    let mut points = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Chebyshev-like initial guess, then Newton on P_n.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        points[i] = -x;
        points[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        points[n / 2] = 0.0;
    }
    Ok(Rule1d { points, weights })
}

/// Legendre polynomial `P_n(x)` and its derivative.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let nf = n as f64;
    (p1, nf * (x * p1 - p0) / (x * x - 1.0))
}

/// Rule on the reference triangle `(0,0), (1,0), (0,1)` exact up to `degree`,
/// built from a collapsed (Duffy) tensor product of Gauss rules.
pub fn triangle_rule(degree: usize) -> Result<QuadratureRule> {
    if degree > MAX_TRIANGLE_DEGREE {
        return Err(Error::Quadrature(format!(
            "triangle rule of degree {degree} (supported: 0..={MAX_TRIANGLE_DEGREE})"
        )));
    }
    // The Jacobian (1 - u) adds one degree in the collapsed direction.
    let gu = gauss_1d((degree + 2).div_ceil(2))?;
    let gv = gauss_1d((degree + 1).div_ceil(2).max(1))?;
    let mut points = Vec::with_capacity(gu.len() * gv.len());
    let mut weights = Vec::with_capacity(gu.len() * gv.len());
    for (&su, &wu) in gu.points.iter().zip(&gu.weights) {
        let u = 0.5 * (su + 1.0);
        for (&sv, &wv) in gv.points.iter().zip(&gv.weights) {
            let v = 0.5 * (sv + 1.0);
            points.push(Point::new(u, v * (1.0 - u)));
            weights.push(0.25 * wu * wv * (1.0 - u));
        }
    }
    Ok(QuadratureRule { points, weights })
}

/// Union of triangle rules mapped onto the fan triangulation of the cell.
pub fn polygon_rule(geom: &CellGeometry, degree: usize) -> Result<QuadratureRule> {
    let reference = triangle_rule(degree)?;
    let fan = geom.fan_triangles();
    let mut points = Vec::with_capacity(reference.len() * fan.len());
    let mut weights = Vec::with_capacity(reference.len() * fan.len());
    for tri in &fan {
        let area = triangle_area(tri);
        if !(area > 0.0) {
            return Err(Error::Quadrature(format!("degenerate fan triangle (area {area:e})")));
        }
        let (e1, e2) = (tri[1] - tri[0], tri[2] - tri[0]);
        for (x, w) in reference.iter() {
            points.push(tri[0] + e1 * x.x + e2 * x.y);
            weights.push(2.0 * area * w);
        }
    }
    Ok(QuadratureRule { points, weights })
}

/// `∫_E x^a y^b` via the divergence theorem: `∮ x^(a+1) y^b / (a+1) n_x`.
/// Independent of the fan triangulation; used to cross-check [`polygon_rule`].
#[cfg(test)]
pub(crate) fn monomial_moment(vertices: &[Point], a: u32, b: u32) -> f64 {
    let g = gauss_1d(((a + b + 2) as usize).div_ceil(2) + 1).unwrap();
    let n = vertices.len();
    let mut total = 0.0;
    for i in 0..n {
        let (p, q) = (vertices[i], vertices[(i + 1) % n]);
        // Outward normal times length: (dy, -dx).
        let nx = q.y - p.y;
        for (&s, &w) in g.points.iter().zip(&g.weights) {
            let x = p + (q - p) * (0.5 * (s + 1.0));
            total += 0.5 * w * nx * x.x.powi(a as i32 + 1) * x.y.powi(b as i32) / (a as f64 + 1.0);
        }
    }
    total
}
