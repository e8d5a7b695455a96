//! Shape-regularity diagnostics: star-shapedness with respect to a ball and
//! minimal vertex separation, both relative to the cell diameter.

use super::{kernel_chebyshev_center, CellGeometry, PolygonMesh};

#[derive(Debug, Clone, PartialEq)]
pub struct CellShapeReport {
    pub cell: usize,
    /// Radius of the largest ball inside the kernel found by sampling, over `h_E`.
    pub ball_ratio: f64,
    /// Smallest distance between two vertices, over `h_E`.
    pub vertex_ratio: f64,
    pub star_shaped_ok: bool,
    pub vertex_distance_ok: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub gamma: f64,
    pub c: f64,
    pub cells: Vec<CellShapeReport>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.cells.iter().all(|c| c.star_shaped_ok && c.vertex_distance_ok)
    }

    pub fn violations(&self) -> impl Iterator<Item = &CellShapeReport> {
        self.cells.iter().filter(|c| !(c.star_shaped_ok && c.vertex_distance_ok))
    }

    pub fn min_ball_ratio(&self) -> f64 {
        self.cells.iter().map(|c| c.ball_ratio).fold(f64::INFINITY, f64::min)
    }

    pub fn min_vertex_ratio(&self) -> f64 {
        self.cells.iter().map(|c| c.vertex_ratio).fold(f64::INFINITY, f64::min)
    }
}

/// Reports, never fails: degenerate cells get ratios of zero.
pub fn validate_mesh(mesh: &PolygonMesh, gamma: f64, c: f64) -> ValidationReport {
    let cells = (0..mesh.n_cells())
        .map(|id| {
            let pts = mesh.cell_points(id);
            let diameter = CellGeometry::new(&pts)
                .map(|g| g.diameter)
                .unwrap_or_else(|_| super::polygon_diameter(&pts));
            let (_, radius) = kernel_chebyshev_center(&pts);
            let ball_ratio = (radius / diameter).max(0.0);
            let mut dmin = f64::INFINITY;
            for (i, p) in pts.iter().enumerate() {
                for q in &pts[i + 1..] {
                    dmin = dmin.min((q - p).norm());
                }
            }
            let vertex_ratio = dmin / diameter;
            CellShapeReport {
                cell: id,
                ball_ratio,
                vertex_ratio,
                star_shaped_ok: ball_ratio >= gamma,
                vertex_distance_ok: vertex_ratio >= c,
            }
        })
        .collect();
    ValidationReport { gamma, c, cells }
}
