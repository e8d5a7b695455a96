//! The eight mesh families of the unit square used in the convergence studies.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::voronoi::{lloyd, mesh_from_polygons, voronoi_cells};
use super::PolygonMesh;
use crate::{Error, Point, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MeshFamily {
    /// Squares split along alternating diagonals.
    TriS,
    /// Uniform squares.
    QuadS,
    /// Voronoi cells of a staggered lattice: hexagons inside, clipped at the boundary.
    HexS,
    /// Squares split into one convex and one concave (dart) quadrilateral.
    ConcQuadS,
    /// `TriS` with randomly jittered vertices.
    TriU,
    /// `QuadS` with randomly jittered vertices.
    QuadU,
    /// Lloyd-relaxed Voronoi cells of random seeds.
    PolyU,
    /// Hexagons with displaced mid-edge vertices, alternating convex and concave, jittered.
    ConcHexU,
}

impl MeshFamily {
    pub const ALL: [MeshFamily; 8] = [
        MeshFamily::TriS,
        MeshFamily::QuadS,
        MeshFamily::HexS,
        MeshFamily::ConcQuadS,
        MeshFamily::TriU,
        MeshFamily::QuadU,
        MeshFamily::PolyU,
        MeshFamily::ConcHexU,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MeshFamily::TriS => "TriS",
            MeshFamily::QuadS => "QuadS",
            MeshFamily::HexS => "HexS",
            MeshFamily::ConcQuadS => "ConcQuadS",
            MeshFamily::TriU => "TriU",
            MeshFamily::QuadU => "QuadU",
            MeshFamily::PolyU => "PolyU",
            MeshFamily::ConcHexU => "ConcHexU",
        }
    }

    pub fn is_structured(self) -> bool {
        matches!(
            self,
            MeshFamily::TriS | MeshFamily::QuadS | MeshFamily::HexS | MeshFamily::ConcQuadS
        )
    }

    fn min_resolution(self) -> usize {
        2
    }
}

impl fmt::Display for MeshFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MeshFamily {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        MeshFamily::ALL
            .iter()
            .copied()
            .find(|f| f.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| {
                let names: Vec<_> = MeshFamily::ALL.iter().map(|f| f.name()).collect();
                format!("unknown mesh family '{s}' (expected one of {})", names.join(", "))
            })
    }
}

/// Family, resolution and seed; the seed only matters for unstructured families.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MeshSpec {
    pub family: MeshFamily,
    pub n: usize,
    pub seed: u64,
}

impl MeshSpec {
    pub fn new(family: MeshFamily, n: usize) -> Self {
        MeshSpec { family, n, seed: 42 }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

/// Generates a mesh of `[0,1]^2`. Pure function of the spec.
pub fn generate_mesh(spec: &MeshSpec) -> Result<PolygonMesh> {
    let n = spec.n;
    if n < spec.family.min_resolution() {
        return Err(Error::ResolutionTooSmall {
            family: spec.family.to_string(),
            n,
        });
    }
    // Mixing the resolution into the seed keeps levels of a study independent.
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed ^ (n as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    match spec.family {
        MeshFamily::QuadS => Ok(quads(n, None)?),
        MeshFamily::QuadU => Ok(quads(n, Some((&mut rng, 0.2)))?),
        MeshFamily::TriS => triangles(n, None),
        MeshFamily::TriU => triangles(n, Some((&mut rng, 0.15))),
        MeshFamily::ConcQuadS => concave_quads(n),
        MeshFamily::HexS => staggered_voronoi(n),
        MeshFamily::PolyU => random_voronoi(n, &mut rng),
        MeshFamily::ConcHexU => concave_hexagons(n, &mut rng),
    }
}

struct Grid {
    n: usize,
    points: Vec<Point>,
}

impl Grid {
    fn new(n: usize) -> Self {
        let h = 1.0 / n as f64;
        let mut points = Vec::with_capacity((n + 1) * (n + 1));
        for j in 0..=n {
            for i in 0..=n {
                points.push(Point::new(i as f64 * h, j as f64 * h));
            }
        }
        Grid { n, points }
    }

    fn id(&self, i: usize, j: usize) -> usize {
        j * (self.n + 1) + i
    }

    /// Moves every grid point by at most `amplitude * h` per coordinate;
    /// boundary points slide along their side, corners stay fixed.
    fn jitter(&mut self, rng: &mut ChaCha8Rng, amplitude: f64) {
        let n = self.n;
        let h = 1.0 / n as f64;
        for j in 0..=n {
            for i in 0..=n {
                let dx: f64 = rng.random_range(-1.0..1.0) * amplitude * h;
                let dy: f64 = rng.random_range(-1.0..1.0) * amplitude * h;
                let id = self.id(i, j);
                if i != 0 && i != n {
                    self.points[id].x += dx;
                }
                if j != 0 && j != n {
                    self.points[id].y += dy;
                }
            }
        }
    }
}

fn quads(n: usize, jitter: Option<(&mut ChaCha8Rng, f64)>) -> Result<PolygonMesh> {
    let mut grid = Grid::new(n);
    if let Some((rng, a)) = jitter {
        grid.jitter(rng, a);
    }
    let mut cells = Vec::with_capacity(n * n);
    for j in 0..n {
        for i in 0..n {
            cells.push(vec![
                grid.id(i, j),
                grid.id(i + 1, j),
                grid.id(i + 1, j + 1),
                grid.id(i, j + 1),
            ]);
        }
    }
    PolygonMesh::from_cells(grid.points, cells)
}

fn triangles(n: usize, jitter: Option<(&mut ChaCha8Rng, f64)>) -> Result<PolygonMesh> {
    let mut grid = Grid::new(n);
    if let Some((rng, a)) = jitter {
        grid.jitter(rng, a);
    }
    let mut cells = Vec::with_capacity(2 * n * n);
    for j in 0..n {
        for i in 0..n {
            let (v00, v10, v11, v01) = (
                grid.id(i, j),
                grid.id(i + 1, j),
                grid.id(i + 1, j + 1),
                grid.id(i, j + 1),
            );
            if (i + j) % 2 == 0 {
                cells.push(vec![v00, v10, v11]);
                cells.push(vec![v00, v11, v01]);
            } else {
                cells.push(vec![v00, v10, v01]);
                cells.push(vec![v10, v11, v01]);
            }
        }
    }
    PolygonMesh::from_cells(grid.points, cells)
}

/// Each square is cut along a diagonal broken at an interior point pushed
/// off the diagonal by `0.3 h / sqrt(2)`, giving one convex quadrilateral and
/// one dart with a single reflex vertex. The diagonal alternates per cell.
fn concave_quads(n: usize) -> Result<PolygonMesh> {
    let grid = Grid::new(n);
    let h = 1.0 / n as f64;
    let shift = 0.15 * h;
    let mut points = grid.points.clone();
    let mut cells = Vec::with_capacity(2 * n * n);
    for j in 0..n {
        for i in 0..n {
            let (v00, v10, v11, v01) = (
                grid.id(i, j),
                grid.id(i + 1, j),
                grid.id(i + 1, j + 1),
                grid.id(i, j + 1),
            );
            let c = Point::new((i as f64 + 0.5) * h, (j as f64 + 0.5) * h);
            let p = points.len();
            if (i + j) % 2 == 0 {
                points.push(Point::new(c.x - shift, c.y + shift));
                cells.push(vec![v00, v10, v11, p]);
                cells.push(vec![v00, p, v11, v01]);
            } else {
                points.push(Point::new(c.x + shift, c.y + shift));
                cells.push(vec![v00, v10, p, v01]);
                cells.push(vec![v10, v11, v01, p]);
            }
        }
    }
    PolygonMesh::from_cells(points, cells)
}

/// Voronoi diagram of a lattice with rows staggered by half a spacing.
fn staggered_voronoi(n: usize) -> Result<PolygonMesh> {
    let h = 1.0 / n as f64;
    let mut seeds = Vec::new();
    for j in 0..n {
        let y = (j as f64 + 0.5) * h;
        if j % 2 == 0 {
            seeds.extend((0..n).map(|i| Point::new((i as f64 + 0.5) * h, y)));
        } else {
            seeds.extend((0..=n).map(|i| Point::new(i as f64 * h, y)));
        }
    }
    mesh_from_polygons(&voronoi_cells(&seeds), 1e-9 * h)
}

fn random_voronoi(n: usize, rng: &mut ChaCha8Rng) -> Result<PolygonMesh> {
    let seeds: Vec<Point> = (0..n * n)
        .map(|_| Point::new(rng.random_range(0.0..1.0), rng.random_range(0.0..1.0)))
        .collect();
    let seeds = lloyd(&seeds, 2);
    mesh_from_polygons(&voronoi_cells(&seeds), 1e-9 / n as f64)
}

/// Grid cells with an extra vertex at the middle of their bottom and top
/// sides. Interior mid-edge vertices are displaced vertically by `0.3 h`,
/// alternating up and down in a checkerboard, so cells alternate between
/// convex hexagons and hexagons with two reflex vertices. Corners and mid-edge
/// vertices are then jittered by up to `0.1 h`.
fn concave_hexagons(n: usize, rng: &mut ChaCha8Rng) -> Result<PolygonMesh> {
    let mut grid = Grid::new(n);
    grid.jitter(rng, 0.1);
    let h = 1.0 / n as f64;
    let mut points = grid.points.clone();
    let mid_base = points.len();
    let mid = |i: usize, j: usize| mid_base + j * n + i;
    for j in 0..=n {
        for i in 0..n {
            let a = grid.points[grid.id(i, j)];
            let b = grid.points[grid.id(i + 1, j)];
            let mut p = nalgebra::center(&a, &b);
            let dx: f64 = rng.random_range(-1.0..1.0) * 0.1 * h;
            if j != 0 && j != n {
                let up = (i + j) % 2 == 0;
                p.y += if up { 0.3 * h } else { -0.3 * h };
                p.x += dx;
            }
            points.push(p);
        }
    }
    let mut cells = Vec::with_capacity(n * n);
    for j in 0..n {
        for i in 0..n {
            cells.push(vec![
                grid.id(i, j),
                mid(i, j),
                grid.id(i + 1, j),
                grid.id(i + 1, j + 1),
                mid(i, j + 1),
                grid.id(i, j + 1),
            ]);
        }
    }
    PolygonMesh::from_cells(points, cells)
}
