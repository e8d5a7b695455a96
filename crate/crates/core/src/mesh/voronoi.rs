//! Voronoi tessellations of the unit square by half-plane clipping.

use std::collections::HashMap;

use crate::{Error, Point, Result, Vec2};

use super::{signed_area, PolygonMesh};

/// Voronoi cell of `seeds[i]`, clipped to the unit square, counter-clockwise.
fn voronoi_cell(seeds: &[Point], i: usize, order: &mut Vec<(f64, usize)>) -> Vec<Point> {
    let s = seeds[i];
    let mut poly = vec![
        Point::new(0.0, 0.0),
        Point::new(1.0, 0.0),
        Point::new(1.0, 1.0),
        Point::new(0.0, 1.0),
    ];
    order.clear();
    order.extend(
        seeds
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(j, q)| ((q - s).norm_squared(), j)),
    );
    order.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    for &(d2, j) in order.iter() {
        // A seed farther than twice the cell radius cannot cut the cell.
        let r2 = poly.iter().map(|p| (p - s).norm_squared()).fold(0.0, f64::max);
        if d2 > 4.0 * r2 {
            break;
        }
        let q = seeds[j];
        let normal = q - s;
        let offset = 0.5 * (q.coords.norm_squared() - s.coords.norm_squared());
        poly = clip_half_plane(&poly, normal, offset);
    }
    poly
}

/// Sutherland-Hodgman step keeping `{x : normal·x <= offset}`.
fn clip_half_plane(poly: &[Point], normal: Vec2, offset: f64) -> Vec<Point> {
    let side = |p: &Point| offset - normal.dot(&p.coords);
    let n = poly.len();
    let mut out = Vec::with_capacity(n + 2);
    for k in 0..n {
        let (p, q) = (poly[k], poly[(k + 1) % n]);
        let (sp, sq) = (side(&p), side(&q));
        if sp >= 0.0 {
            out.push(p);
        }
        if (sp >= 0.0) != (sq >= 0.0) {
            let d = q - p;
            let t = (offset - normal.dot(&p.coords)) / normal.dot(&d);
            out.push(p + d * t.clamp(0.0, 1.0));
        }
    }
    out
}

pub(crate) fn voronoi_cells(seeds: &[Point]) -> Vec<Vec<Point>> {
    let mut order = Vec::with_capacity(seeds.len());
    (0..seeds.len()).map(|i| voronoi_cell(seeds, i, &mut order)).collect()
}

pub(crate) fn polygon_centroid(poly: &[Point]) -> Point {
    let area = signed_area(poly);
    super::polygon_centroid(poly, area)
}

/// Lloyd relaxation: move each seed to the centroid of its clipped cell.
pub(crate) fn lloyd(seeds: &[Point], iterations: usize) -> Vec<Point> {
    let mut seeds = seeds.to_vec();
    for _ in 0..iterations {
        seeds = voronoi_cells(&seeds).iter().map(|c| polygon_centroid(c)).collect();
    }
    seeds
}

/// Turns independently clipped polygons into a conforming mesh by merging
/// coincident vertices (within `tol`).
pub(crate) fn mesh_from_polygons(polys: &[Vec<Point>], tol: f64) -> Result<PolygonMesh> {
    let mut vertices: Vec<Point> = Vec::new();
    let mut buckets: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
    let key = |p: &Point| ((p.x / tol).floor() as i64, (p.y / tol).floor() as i64);
    let mut cells = Vec::with_capacity(polys.len());
    for poly in polys {
        let mut ids: Vec<usize> = Vec::with_capacity(poly.len());
        for p in poly {
            let (kx, ky) = key(p);
            let mut found = None;
            'search: for dx in -1..=1 {
                for dy in -1..=1 {
                    if let Some(list) = buckets.get(&(kx + dx, ky + dy)) {
                        for &v in list {
                            if (vertices[v] - p).norm() <= tol {
                                found = Some(v);
                                break 'search;
                            }
                        }
                    }
                }
            }
            let id = found.unwrap_or_else(|| {
                vertices.push(snap_to_boundary(*p));
                buckets.entry((kx, ky)).or_default().push(vertices.len() - 1);
                vertices.len() - 1
            });
            if ids.last() != Some(&id) {
                ids.push(id);
            }
        }
        while ids.len() > 1 && ids.first() == ids.last() {
            ids.pop();
        }
        if ids.len() < 3 {
            return Err(Error::InvalidMesh("Voronoi cell collapsed while merging vertices".into()));
        }
        cells.push(ids);
    }
    PolygonMesh::from_cells(vertices, cells)
}

fn snap_to_boundary(mut p: Point) -> Point {
    for c in p.coords.iter_mut() {
        if c.abs() < 1e-13 {
            *c = 0.0;
        } else if (*c - 1.0).abs() < 1e-13 {
            *c = 1.0;
        }
    }
    p
}
