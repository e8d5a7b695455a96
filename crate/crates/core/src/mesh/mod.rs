//! Polygonal meshes of the unit square.
//!
//! Cells are stored as counter-clockwise vertex loops. Edges are derived from
//! the loops: every edge carries a global orientation (from its lower to its
//! higher vertex id) and a global unit normal obtained by rotating that
//! tangent clockwise. A cell refers to each of its edges with a sign that is
//! `+1` when the cell's outward normal agrees with the global normal.

mod generate;
mod io;
mod validate;
mod voronoi;

pub use generate::{generate_mesh, MeshFamily, MeshSpec};
pub use io::{read_mesh, write_mesh, MeshDocument};
pub use validate::{validate_mesh, CellShapeReport, ValidationReport};

use std::collections::BTreeMap;

use crate::{Error, Point, Result, Vec2};

/// An edge shared by one (boundary) or two (interior) cells.
#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    /// Vertex ids, lower id first.
    pub vertices: [usize; 2],
    pub boundary: bool,
}

/// A polygonal cell: counter-clockwise vertex loop plus signed edge references.
///
/// Local edge `i` joins `vertices[i]` and `vertices[(i + 1) % n]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub vertices: Vec<usize>,
    pub edges: Vec<usize>,
    pub signs: Vec<f64>,
}

impl Cell {
    pub fn n_edges(&self) -> usize {
        self.vertices.len()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolygonMesh {
    vertices: Vec<Point>,
    edges: Vec<Edge>,
    cells: Vec<Cell>,
}

impl PolygonMesh {
    /// Builds a mesh from vertex coordinates and counter-clockwise cell loops.
    ///
    /// Edges are numbered in order of first appearance. Fails on dangling
    /// vertex ids, non-simple or clockwise loops, and edges shared by more
    /// than two cells or twice with the same orientation.
    pub fn from_cells(vertices: Vec<Point>, cells: Vec<Vec<usize>>) -> Result<Self> {
        if cells.is_empty() {
            return Err(Error::InvalidMesh("mesh has no cells".into()));
        }
        for (c, loop_) in cells.iter().enumerate() {
            if loop_.len() < 3 {
                return Err(Error::InvalidMesh(format!("cell {c} has fewer than 3 vertices")));
            }
            if let Some(&v) = loop_.iter().find(|&&v| v >= vertices.len()) {
                return Err(Error::InvalidMesh(format!("cell {c} references missing vertex {v}")));
            }
            let pts: Vec<Point> = loop_.iter().map(|&v| vertices[v]).collect();
            if !is_simple_polygon(&pts) {
                return Err(Error::InvalidMesh(format!("cell {c} is not a simple polygon")));
            }
            if signed_area(&pts) <= 0.0 {
                return Err(Error::InvalidMesh(format!("cell {c} is not counter-clockwise")));
            }
        }

        let mut edge_ids: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        let mut edges: Vec<Edge> = Vec::new();
        let mut uses: Vec<Vec<f64>> = Vec::new();
        let mut out_cells = Vec::with_capacity(cells.len());
        for loop_ in cells {
            let n = loop_.len();
            let mut cell_edges = Vec::with_capacity(n);
            let mut signs = Vec::with_capacity(n);
            for i in 0..n {
                let (a, b) = (loop_[i], loop_[(i + 1) % n]);
                if a == b {
                    return Err(Error::InvalidMesh(format!("repeated vertex {a} in a cell loop")));
                }
                let key = (a.min(b), a.max(b));
                let id = *edge_ids.entry(key).or_insert_with(|| {
                    edges.push(Edge {
                        vertices: [key.0, key.1],
                        boundary: false,
                    });
                    uses.push(Vec::new());
                    edges.len() - 1
                });
                let sign = if a < b { 1.0 } else { -1.0 };
                uses[id].push(sign);
                cell_edges.push(id);
                signs.push(sign);
            }
            out_cells.push(Cell {
                vertices: loop_,
                edges: cell_edges,
                signs,
            });
        }
        for (id, signs) in uses.iter().enumerate() {
            match signs.as_slice() {
                [_] => edges[id].boundary = true,
                [a, b] if a * b < 0.0 => {}
                _ => {
                    return Err(Error::InvalidMesh(format!(
                        "edge {:?} is used {} times with signs {:?}",
                        edges[id].vertices,
                        signs.len(),
                        signs
                    )))
                }
            }
        }
        Ok(PolygonMesh {
            vertices,
            edges,
            cells: out_cells,
        })
    }

    /// Single-cell mesh made of one counter-clockwise polygon.
    pub fn single_cell(vertices: Vec<Point>) -> Result<Self> {
        let loop_ = (0..vertices.len()).collect();
        Self::from_cells(vertices, vec![loop_])
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn n_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn cell_points(&self, cell: usize) -> Vec<Point> {
        self.cells[cell].vertices.iter().map(|&v| self.vertices[v]).collect()
    }

    pub fn edge_length(&self, edge: usize) -> f64 {
        let [a, b] = self.edges[edge].vertices;
        (self.vertices[b] - self.vertices[a]).norm()
    }

    /// Unit normal of an edge: the tangent from lower to higher vertex id,
    /// rotated clockwise.
    pub fn edge_normal(&self, edge: usize) -> Vec2 {
        let [a, b] = self.edges[edge].vertices;
        let t = (self.vertices[b] - self.vertices[a]).normalize();
        Vec2::new(t.y, -t.x)
    }

    pub fn total_area(&self) -> f64 {
        (0..self.n_cells())
            .map(|c| signed_area(&self.cell_points(c)))
            .sum()
    }

    /// Cached geometric quantities of one cell.
    pub fn cell_geometry(&self, cell: usize) -> Result<CellGeometry> {
        CellGeometry::new(&self.cell_points(cell)).map_err(|reason| Error::DegenerateCell { cell, reason })
    }
}

/// Arithmetic mean of all edge lengths.
pub fn mean_edge_length(mesh: &PolygonMesh) -> f64 {
    let total: f64 = (0..mesh.n_edges()).map(|e| mesh.edge_length(e)).sum();
    total / mesh.n_edges() as f64
}

/// Geometry of a single polygon.
#[derive(Debug, Clone, PartialEq)]
pub struct CellGeometry {
    pub vertices: Vec<Point>,
    pub area: f64,
    pub centroid: Point,
    pub diameter: f64,
    /// `∫_E |x - x_C|^2`.
    pub second_moment: f64,
    /// Point of the kernel used as apex of the fan triangulation.
    pub star_center: Point,
}

impl CellGeometry {
    pub fn new(vertices: &[Point]) -> std::result::Result<Self, String> {
        let area = signed_area(vertices);
        if !(area > 0.0) {
            return Err(format!("non-positive area {area:e}"));
        }
        let centroid = polygon_centroid(vertices, area);
        let diameter = polygon_diameter(vertices);
        let star_center = star_center(vertices, centroid, diameter)
            .ok_or_else(|| "polygon is not star-shaped".to_string())?;

        let mut second_moment = 0.0;
        for tri in fan(vertices, star_center) {
            let tri_area = triangle_area(&tri);
            // Midpoint rule: exact for quadratics.
            let f = |p: Point| (p - centroid).norm_squared();
            let m = [
                nalgebra::center(&tri[0], &tri[1]),
                nalgebra::center(&tri[1], &tri[2]),
                nalgebra::center(&tri[2], &tri[0]),
            ];
            second_moment += tri_area / 3.0 * (f(m[0]) + f(m[1]) + f(m[2]));
        }

        Ok(CellGeometry {
            vertices: vertices.to_vec(),
            area,
            centroid,
            diameter,
            second_moment,
            star_center,
        })
    }

    /// Fan triangles `(star_center, v_i, v_{i+1})`.
    pub fn fan_triangles(&self) -> Vec<[Point; 3]> {
        fan(&self.vertices, self.star_center)
    }
}

fn fan(vertices: &[Point], apex: Point) -> Vec<[Point; 3]> {
    let n = vertices.len();
    (0..n)
        .map(|i| [apex, vertices[i], vertices[(i + 1) % n]])
        .collect()
}

pub(crate) fn triangle_area(t: &[Point; 3]) -> f64 {
    let a = t[1] - t[0];
    let b = t[2] - t[0];
    0.5 * (a.x * b.y - a.y * b.x)
}

/// Shoelace area, positive for counter-clockwise loops.
pub fn signed_area(pts: &[Point]) -> f64 {
    let n = pts.len();
    let mut s = 0.0;
    for i in 0..n {
        let (p, q) = (pts[i], pts[(i + 1) % n]);
        s += p.x * q.y - q.x * p.y;
    }
    0.5 * s
}

fn polygon_centroid(pts: &[Point], area: f64) -> Point {
    let n = pts.len();
    // Shift to the first vertex to limit cancellation.
    let o = pts[0];
    let (mut cx, mut cy) = (0.0, 0.0);
    for i in 0..n {
        let p = pts[i] - o;
        let q = pts[(i + 1) % n] - o;
        let cross = p.x * q.y - q.x * p.y;
        cx += (p.x + q.x) * cross;
        cy += (p.y + q.y) * cross;
    }
    Point::new(o.x + cx / (6.0 * area), o.y + cy / (6.0 * area))
}

fn polygon_diameter(pts: &[Point]) -> f64 {
    let mut d: f64 = 0.0;
    for (i, p) in pts.iter().enumerate() {
        for q in &pts[i + 1..] {
            d = d.max((q - p).norm());
        }
    }
    d
}

/// Signed distances from `x` to the supporting lines of all edges, positive
/// on the interior side. The kernel of the polygon is where all are `>= 0`.
pub(crate) fn min_edge_line_distance(pts: &[Point], x: Point) -> f64 {
    let n = pts.len();
    let mut m = f64::INFINITY;
    for i in 0..n {
        let (p, q) = (pts[i], pts[(i + 1) % n]);
        let t = q - p;
        let len = t.norm();
        let d = (t.x * (x.y - p.y) - t.y * (x.x - p.x)) / len;
        m = m.min(d);
    }
    m
}

/// Approximate Chebyshev center of the kernel: maximizes the distance to the
/// nearest edge line by grid search with successive zooming.
pub(crate) fn kernel_chebyshev_center(pts: &[Point]) -> (Point, f64) {
    let (mut lo, mut hi) = bounding_box(pts);
    let mut best = (nalgebra::center(&lo, &hi), f64::NEG_INFINITY);
    const N: usize = 24;
    for _ in 0..12 {
        for i in 0..=N {
            for j in 0..=N {
                let x = Point::new(
                    lo.x + (hi.x - lo.x) * i as f64 / N as f64,
                    lo.y + (hi.y - lo.y) * j as f64 / N as f64,
                );
                let r = min_edge_line_distance(pts, x);
                if r > best.1 {
                    best = (x, r);
                }
            }
        }
        let half = (hi - lo) / 4.0;
        lo = best.0 - half;
        hi = best.0 + half;
    }
    best
}

fn star_center(pts: &[Point], centroid: Point, diameter: f64) -> Option<Point> {
    if min_edge_line_distance(pts, centroid) > 1e-10 * diameter {
        return Some(centroid);
    }
    let (x, r) = kernel_chebyshev_center(pts);
    (r > 1e-12 * diameter).then_some(x)
}

fn bounding_box(pts: &[Point]) -> (Point, Point) {
    let mut lo = pts[0];
    let mut hi = pts[0];
    for p in pts {
        lo.x = lo.x.min(p.x);
        lo.y = lo.y.min(p.y);
        hi.x = hi.x.max(p.x);
        hi.y = hi.y.max(p.y);
    }
    (lo, hi)
}

/// O(n^2) check that no two non-adjacent edges intersect.
pub(crate) fn is_simple_polygon(pts: &[Point]) -> bool {
    let n = pts.len();
    for i in 0..n {
        for j in i + 1..n {
            if j == i + 1 || (i == 0 && j == n - 1) {
                continue;
            }
            if segments_intersect(pts[i], pts[(i + 1) % n], pts[j], pts[(j + 1) % n]) {
                return false;
            }
        }
    }
    // Adjacent edges folding back onto each other.
    for i in 0..n {
        let a = pts[(i + n - 1) % n];
        let b = pts[i];
        let c = pts[(i + 1) % n];
        let u = b - a;
        let v = c - b;
        if (u.x * v.y - u.y * v.x).abs() <= 1e-14 * u.norm() * v.norm() && u.dot(&v) < 0.0 {
            return false;
        }
    }
    true
}

fn orient(a: Point, b: Point, c: Point) -> f64 {
    (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x)
}

fn segments_intersect(p1: Point, p2: Point, q1: Point, q2: Point) -> bool {
    let d1 = orient(q1, q2, p1);
    let d2 = orient(q1, q2, p2);
    let d3 = orient(p1, p2, q1);
    let d4 = orient(p1, p2, q2);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0)) && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0)) {
        return true;
    }
    let on = |a: Point, b: Point, c: Point, d: f64| {
        d == 0.0 && c.x >= a.x.min(b.x) && c.x <= a.x.max(b.x) && c.y >= a.y.min(b.y) && c.y <= a.y.max(b.y)
    };
    on(q1, q2, p1, d1) || on(q1, q2, p2, d2) || on(p1, p2, q1, d3) || on(p1, p2, q2, d4)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + b.abs())
    }

    fn pts(v: &[(f64, f64)]) -> Vec<Point> {
        v.iter().map(|&(x, y)| Point::new(x, y)).collect()
    }

    #[test]
    fn unit_square_geometry() {
        let g = CellGeometry::new(&pts(&[(0., 0.), (1., 0.), (1., 1.), (0., 1.)])).unwrap();
        assert!(close(g.area, 1.0, 1e-15));
        assert!(close(g.centroid.x, 0.5, 1e-15) && close(g.centroid.y, 0.5, 1e-15));
        assert!(close(g.diameter, 2f64.sqrt(), 1e-15));
        assert!(close(g.second_moment, 1.0 / 6.0, 1e-14));
    }

    #[test]
    fn triangle_geometry() {
        let g = CellGeometry::new(&pts(&[(0., 0.), (1., 0.), (0., 1.)])).unwrap();
        assert!(close(g.area, 0.5, 1e-15));
        assert!(close(g.centroid.x, 1.0 / 3.0, 1e-15));
        assert!(close(g.centroid.y, 1.0 / 3.0, 1e-15));
    }

    #[test]
    fn l_shape_is_star_shaped_about_its_center() {
        let l = pts(&[(0., 0.), (2., 0.), (2., 1.), (1., 1.), (1., 2.), (0., 2.)]);
        let g = CellGeometry::new(&l).unwrap();
        assert!(close(g.area, 3.0, 1e-15));
        // Brute-force visibility: every sampled boundary point is visible from (0.5, 0.5).
        let c = Point::new(0.5, 0.5);
        for i in 0..l.len() {
            let (p, q) = (l[i], l[(i + 1) % l.len()]);
            for s in 0..=50 {
                let b = p + (q - p) * (s as f64 / 50.0);
                for t in 1..50 {
                    let x = c + (b - c) * (t as f64 / 50.0);
                    assert!(point_in_polygon(&l, x), "segment leaves the polygon at {x:?}");
                }
            }
        }
        assert!(min_edge_line_distance(&l, c) > 0.0);
        // Fan apex is in the kernel, so every fan triangle is positively oriented.
        assert!(g.fan_triangles().iter().all(|t| triangle_area(t) > 0.0));
    }

    pub(crate) fn point_in_polygon(poly: &[Point], x: Point) -> bool {
        let n = poly.len();
        let mut inside = false;
        for i in 0..n {
            let (a, b) = (poly[i], poly[(i + 1) % n]);
            if (a.y > x.y) != (b.y > x.y) {
                let xc = a.x + (x.y - a.y) / (b.y - a.y) * (b.x - a.x);
                if x.x < xc {
                    inside = !inside;
                }
            }
        }
        inside
    }

    #[test]
    fn degenerate_cell_is_rejected() {
        assert!(CellGeometry::new(&pts(&[(0., 0.), (1., 0.), (2., 0.)])).is_err());
        assert!(CellGeometry::new(&pts(&[(0., 0.), (0., 1.), (1., 0.)])).is_err());
    }

    #[test]
    fn two_cell_edge_signs() {
        let v = pts(&[(0., 0.), (1., 0.), (2., 0.), (2., 1.), (1., 1.), (0., 1.)]);
        let m = PolygonMesh::from_cells(v, vec![vec![0, 1, 4, 5], vec![1, 2, 3, 4]]).unwrap();
        assert_eq!(m.n_edges(), 7);
        let shared = m.edges().iter().position(|e| e.vertices == [1, 4]).unwrap();
        assert!(!m.edges()[shared].boundary);
        let s0 = m.cells()[0].signs[m.cells()[0].edges.iter().position(|&e| e == shared).unwrap()];
        let s1 = m.cells()[1].signs[m.cells()[1].edges.iter().position(|&e| e == shared).unwrap()];
        assert_eq!(s0 * s1, -1.0);
        assert_eq!(m.edges().iter().filter(|e| e.boundary).count(), 6);
        // Global normal of the vertical shared edge points to +x (tangent +y rotated clockwise).
        let n = m.edge_normal(shared);
        assert!(close(n.x, 1.0, 1e-15) && n.y.abs() < 1e-15);
    }

    #[test]
    fn self_intersecting_and_clockwise_cells_are_rejected() {
        let v = pts(&[(0., 0.), (1., 0.), (1., 1.), (0., 1.)]);
        assert!(PolygonMesh::from_cells(v.clone(), vec![vec![0, 2, 1, 3]]).is_err());
        assert!(PolygonMesh::from_cells(v.clone(), vec![vec![0, 3, 2, 1]]).is_err());
        assert!(PolygonMesh::from_cells(v, vec![vec![0, 1, 7]]).is_err());
    }

    #[test]
    fn single_unit_square_mean_edge() {
        let m = PolygonMesh::single_cell(pts(&[(0., 0.), (1., 0.), (1., 1.), (0., 1.)])).unwrap();
        assert!(close(mean_edge_length(&m), 1.0, 1e-15));
    }
}
