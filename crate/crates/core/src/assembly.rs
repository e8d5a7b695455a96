//! Global numbering, assembly and solution of the saddle-point system
//!
//! ```text
//! [ A   B ] [σ]   [ ∮ τ n · g      ]
//! [ Bᵀ  0 ] [u] = [ -(f, v)        ]
//! ```
//!
//! Unknowns are numbered edge tractions first (edge by edge), then the
//! divergence coefficients of each cell, then the displacement coefficients
//! of each cell.

use std::io::Write;

use faer::linalg::solvers::Solve;
use faer::sparse::{SparseColMat, SymbolicSparseColMat};
use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::element::{displacement_dof_count, ElementOptions, ElementSpace};
use crate::material::ElasticityField;
use crate::mesh::PolygonMesh;
use crate::polybasis::rm_perp_dim;
use crate::{Error, Point, Result, Vec2};

/// Largest tolerated relative asymmetry of a local stress matrix.
pub const SYMMETRY_TOL: f64 = 1e-12;

/// Global numbering of stress and displacement unknowns.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DofMap {
    pub k: usize,
    pub n_edges: usize,
    pub n_cells: usize,
}

impl DofMap {
    pub fn per_edge(&self) -> usize {
        2 * (self.k + 1)
    }

    pub fn per_cell_div(&self) -> usize {
        rm_perp_dim(self.k)
    }

    pub fn per_cell_u(&self) -> usize {
        displacement_dof_count(self.k)
    }

    pub fn edge_offset(&self, edge: usize) -> usize {
        edge * self.per_edge()
    }

    pub fn div_offset(&self, cell: usize) -> usize {
        self.n_edges * self.per_edge() + cell * self.per_cell_div()
    }

    pub fn u_offset(&self, cell: usize) -> usize {
        self.n_stress() + cell * self.per_cell_u()
    }

    pub fn n_stress(&self) -> usize {
        self.n_edges * self.per_edge() + self.n_cells * self.per_cell_div()
    }

    pub fn n_displacement(&self) -> usize {
        self.n_cells * self.per_cell_u()
    }

    pub fn total(&self) -> usize {
        self.n_stress() + self.n_displacement()
    }

    /// Global index of every local stress DOF of `cell`.
    pub fn local_stress_dofs(&self, mesh: &PolygonMesh, cell: usize) -> Vec<usize> {
        let mut out = Vec::new();
        for &e in &mesh.cells()[cell].edges {
            out.extend(self.edge_offset(e)..self.edge_offset(e) + self.per_edge());
        }
        let d = self.div_offset(cell);
        out.extend(d..d + self.per_cell_div());
        out
    }

    pub fn local_displacement_dofs(&self, cell: usize) -> std::ops::Range<usize> {
        let o = self.u_offset(cell);
        o..o + self.per_cell_u()
    }
}

pub fn number_dofs(mesh: &PolygonMesh, k: usize) -> DofMap {
    DofMap {
        k,
        n_edges: mesh.n_edges(),
        n_cells: mesh.n_cells(),
    }
}

/// Material, load and boundary displacement.
pub struct Problem<'a> {
    pub field: &'a ElasticityField,
    pub body_force: &'a (dyn Fn(Point) -> Vec2 + Sync),
    pub boundary: &'a (dyn Fn(Point) -> Vec2 + Sync),
}

/// Square sparse matrix in compressed-column form with sorted, unique rows.
#[derive(Debug, Clone, PartialEq)]
pub struct CscMatrix {
    pub n: usize,
    pub col_ptr: Vec<usize>,
    pub row_idx: Vec<usize>,
    pub values: Vec<f64>,
}

impl CscMatrix {
    /// Sums duplicate entries in input order, so the result depends only on
    /// the order of `triplets`.
    pub fn from_triplets(n: usize, mut triplets: Vec<(usize, usize, f64)>) -> Self {
        triplets.sort_by_key(|&(r, c, _)| (c, r));
        let mut col_ptr = vec![0; n + 1];
        let mut row_idx = Vec::with_capacity(triplets.len());
        let mut values: Vec<f64> = Vec::with_capacity(triplets.len());
        let mut last = None;
        for (r, c, v) in triplets {
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
            } else {
                row_idx.push(r);
                values.push(v);
                col_ptr[c + 1] += 1;
                last = Some((r, c));
            }
        }
        for c in 0..n {
            col_ptr[c + 1] += col_ptr[c];
        }
        CscMatrix {
            n,
            col_ptr,
            row_idx,
            values,
        }
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        for c in 0..self.n {
            for p in self.col_ptr[c]..self.col_ptr[c + 1] {
                y[self.row_idx[p]] += self.values[p] * x[c];
            }
        }
        y
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        let rows = &self.row_idx[self.col_ptr[c]..self.col_ptr[c + 1]];
        match rows.binary_search(&r) {
            Ok(p) => self.values[self.col_ptr[c] + p],
            Err(_) => 0.0,
        }
    }

    /// Largest column sum of absolute values.
    pub fn norm_1(&self) -> f64 {
        (0..self.n)
            .map(|c| self.values[self.col_ptr[c]..self.col_ptr[c + 1]].iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.n, self.n);
        for c in 0..self.n {
            for p in self.col_ptr[c]..self.col_ptr[c + 1] {
                m[(self.row_idx[p], c)] = self.values[p];
            }
        }
        m
    }

    fn to_faer(&self) -> SparseColMat<usize, f64> {
        let symbolic =
            SymbolicSparseColMat::new_checked(self.n, self.n, self.col_ptr.clone(), None, self.row_idx.clone());
        SparseColMat::new(symbolic, self.values.clone())
    }

    /// Matrix Market file of the lower triangle (1-based, symmetric).
    pub fn write_matrix_market(&self, mut w: impl Write) -> std::io::Result<()> {
        let lower: Vec<(usize, usize, f64)> = (0..self.n)
            .flat_map(|c| {
                (self.col_ptr[c]..self.col_ptr[c + 1])
                    .filter(move |&p| self.row_idx[p] >= c)
                    .map(move |p| (self.row_idx[p], c, self.values[p]))
            })
            .collect();
        writeln!(w, "%%MatrixMarket matrix coordinate real symmetric")?;
        writeln!(w, "{} {} {}", self.n, self.n, lower.len())?;
        for (r, c, v) in lower {
            writeln!(w, "{} {} {:.16e}", r + 1, c + 1, v)?;
        }
        Ok(())
    }
}

/// Assembled system with the per-cell data needed for post-processing.
#[derive(Debug, Clone)]
pub struct SaddleSystem {
    pub dofs: DofMap,
    pub matrix: CscMatrix,
    pub rhs: Vec<f64>,
    pub elements: Vec<ElementSpace>,
    /// Projector matrix of every cell.
    pub projectors: Vec<DMatrix<f64>>,
}

struct CellContribution {
    space: ElementSpace,
    pi: DMatrix<f64>,
    ah: DMatrix<f64>,
    b: DMatrix<f64>,
    load: DVector<f64>,
    dirichlet: DVector<f64>,
}

fn cell_contribution(
    mesh: &PolygonMesh,
    cell: usize,
    k: usize,
    problem: &Problem,
    options: ElementOptions,
) -> Result<CellContribution> {
    let space = ElementSpace::with_options(mesh, cell, k, options)?;
    let m = space.local_matrices(problem.field)?;
    if m.asymmetry > SYMMETRY_TOL {
        return Err(Error::Assembly(format!(
            "cell {cell}: local stress matrix asymmetry {:.3e}",
            m.asymmetry
        )));
    }
    let load = space.load(problem.body_force);
    let mut dirichlet = DVector::zeros(space.n_stress_dofs());
    for (le, e) in space.edges.iter().enumerate() {
        if e.boundary {
            dirichlet += space.dirichlet(le, problem.boundary);
        }
    }
    Ok(CellContribution {
        pi: m.pi,
        ah: m.ah,
        b: m.b,
        load,
        dirichlet,
        space,
    })
}

/// Builds the global system. Cells are processed in parallel; the result
/// does not depend on the number of threads.
pub fn assemble(mesh: &PolygonMesh, k: usize, problem: &Problem, options: ElementOptions) -> Result<SaddleSystem> {
    let dofs = number_dofs(mesh, k);
    let cells: Vec<CellContribution> = (0..mesh.n_cells())
        .into_par_iter()
        .map(|c| cell_contribution(mesh, c, k, problem, options))
        .collect::<Result<_>>()?;

    let n = dofs.total();
    let mut rhs = vec![0.0; n];
    let mut triplets = Vec::new();
    let mut elements = Vec::with_capacity(cells.len());
    let mut projectors = Vec::with_capacity(cells.len());
    for (cell, c) in cells.into_iter().enumerate() {
        let s = dofs.local_stress_dofs(mesh, cell);
        let u = dofs.local_displacement_dofs(cell);
        for (i, &gi) in s.iter().enumerate() {
            for (j, &gj) in s.iter().enumerate() {
                triplets.push((gi, gj, c.ah[(i, j)]));
            }
            for (j, gj) in u.clone().enumerate() {
                let v = c.b[(i, j)];
                if v != 0.0 {
                    triplets.push((gi, gj, v));
                    triplets.push((gj, gi, v));
                }
            }
            rhs[gi] += c.dirichlet[i];
        }
        for (j, gj) in u.enumerate() {
            rhs[gj] -= c.load[j];
        }
        elements.push(c.space);
        projectors.push(c.pi);
    }
    Ok(SaddleSystem {
        matrix: CscMatrix::from_triplets(n, triplets),
        rhs,
        dofs,
        elements,
        projectors,
    })
}

/// Discrete solution and the achieved relative residual.
#[derive(Debug, Clone)]
pub struct Solution {
    pub sigma: Vec<f64>,
    pub u: Vec<f64>,
    pub residual: f64,
}

impl SaddleSystem {
    /// Sparse LU solve followed by up to three steps of iterative refinement.
    /// Fails if `‖Ax - b‖ / ‖b‖` stays above `tol` (absolute when `b = 0`).
    pub fn solve(&self, tol: f64) -> Result<Solution> {
        let a = self.matrix.to_faer();
        let lu = a.sp_lu().map_err(|e| Error::Solve(format!("{e:?}")))?;
        let n = self.matrix.n;
        let rhs_norm = norm(&self.rhs);
        let scale = if rhs_norm > 0.0 { rhs_norm } else { 1.0 };
        let tol = if rhs_norm > 0.0 { tol } else { tol.max(1e-12) };

        let mut x = vec![0.0; n];
        let mut r = self.rhs.clone();
        let mut residual = norm(&r) / scale;
        for _ in 0..4 {
            if residual <= tol && x.iter().any(|&v| v != 0.0) || rhs_norm == 0.0 {
                break;
            }
            let mut dx = faer::Mat::from_fn(n, 1, |i, _| r[i]);
            lu.solve_in_place(dx.as_mut());
            for i in 0..n {
                x[i] += dx[(i, 0)];
            }
            let ax = self.matrix.mul_vec(&x);
            r = self.rhs.iter().zip(&ax).map(|(b, y)| b - y).collect();
            let next = norm(&r) / scale;
            if x.iter().any(|v| !v.is_finite()) {
                return Err(Error::Solve("non-finite solution".into()));
            }
            if next >= residual && residual <= tol {
                break;
            }
            residual = next;
        }
        if !(residual <= tol) {
            let x1: f64 = x.iter().map(|v| v.abs()).sum();
            let b1: f64 = self.rhs.iter().map(|v| v.abs()).sum();
            return Err(Error::Residual {
                residual,
                tol,
                condition: self.matrix.norm_1() * x1 / b1.max(f64::MIN_POSITIVE),
            });
        }
        let ns = self.dofs.n_stress();
        Ok(Solution {
            u: x[ns..].to_vec(),
            sigma: x[..ns].to_vec(),
            residual,
        })
    }

    /// Local stress DOFs of `cell` extracted from a global stress vector.
    pub fn cell_stress(&self, mesh: &PolygonMesh, cell: usize, sigma: &[f64]) -> DVector<f64> {
        let idx = self.dofs.local_stress_dofs(mesh, cell);
        DVector::from_iterator(idx.len(), idx.iter().map(|&i| sigma[i]))
    }

    /// Local displacement coefficients of `cell`.
    pub fn cell_displacement(&self, cell: usize, u: &[f64]) -> DVector<f64> {
        let r = self.dofs.local_displacement_dofs(cell);
        let off = self.dofs.n_stress();
        DVector::from_iterator(r.len(), r.map(|i| u[i - off]))
    }

    /// Global `B` block (stress rows, displacement columns), dense.
    pub fn divergence_block(&self) -> DMatrix<f64> {
        let ns = self.dofs.n_stress();
        let nu = self.dofs.n_displacement();
        let mut b = DMatrix::zeros(ns, nu);
        for c in 0..nu {
            let col = ns + c;
            for p in self.matrix.col_ptr[col]..self.matrix.col_ptr[col + 1] {
                let r = self.matrix.row_idx[p];
                if r < ns {
                    b[(r, c)] = self.matrix.values[p];
                }
            }
        }
        b
    }

    /// Smallest eigenvalue of `BᵀB` relative to the largest; positive iff
    /// `B` has full column rank.
    pub fn divergence_rank_ratio(&self) -> f64 {
        let b = self.divergence_block();
        let eig = b.tr_mul(&b).symmetric_eigenvalues();
        eig.min() / eig.max()
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Displacement prescribed to be zero, no load.
pub fn zero(_: Point) -> Vec2 {
    Vec2::zeros()
}
