//! Property suite run by `hrvem check`.

use hrvem::analysis::{check_commuting_diagram, patch_test, projector_consistency, ManufacturedSolution, TestCase};
use hrvem::assembly::{assemble, zero, Problem};
use hrvem::element::{displacement_dof_count, ElementOptions, ElementSpace};
use hrvem::material::plane_strain_isotropic;
use hrvem::mesh::{generate_mesh, MeshFamily, MeshSpec, PolygonMesh};
use hrvem::polybasis::rm_perp_dim;

/// Smallest accepted `λ_min / λ_max` of `BᵀB` (squared singular value ratio).
pub const RANK_TOL: f64 = 1e-12;
pub const PATCH_STRESS_TOL: f64 = 1e-9;
pub const PATCH_DISPLACEMENT_TOL: f64 = 1e-10;
pub const COMMUTING_TOL: f64 = 1e-10;
pub const PROJECTOR_TOL: f64 = 1e-10;
/// Negative eigenvalues of the stabilization above `-PSD_TOL * λ_max` count as round-off.
pub const PSD_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl CheckOutcome {
    fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        CheckOutcome {
            name: name.into(),
            passed,
            detail: detail.into(),
        }
    }

    fn from_result(name: String, r: hrvem::Result<(bool, String)>) -> Self {
        match r {
            Ok((passed, detail)) => CheckOutcome::new(name, passed, detail),
            Err(e) => CheckOutcome::new(name, false, format!("error: {e}")),
        }
    }
}

/// Per-cell structural facts of one mesh and degree.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellStructure {
    pub dof_counts_ok: bool,
    /// Smallest eigenvalue of any local stress matrix.
    pub min_ah_eig: f64,
    /// Smallest `λ_min / λ_max` of any local stabilization matrix.
    pub min_se_ratio: f64,
}

pub fn cell_structure(mesh: &PolygonMesh, k: usize) -> hrvem::Result<CellStructure> {
    let field = plane_strain_isotropic(1.0, 1.0)?;
    let mut out = CellStructure {
        dof_counts_ok: true,
        min_ah_eig: f64::INFINITY,
        min_se_ratio: f64::INFINITY,
    };
    for c in 0..mesh.n_cells() {
        let space = ElementSpace::new(mesh, c, k)?;
        let n_e = mesh.cells()[c].n_edges();
        out.dof_counts_ok &= space.n_stress_dofs() == 2 * (k + 1) * n_e + rm_perp_dim(k)
            && space.rm_perp.len() == (k + 1) * (k + 2) - 3
            && 2 * space.basis.len() == displacement_dof_count(k)
            && space.divergence_matrix().shape() == (space.n_stress_dofs(), (k + 1) * (k + 2));
        let m = space.local_matrices(&field)?;
        out.min_ah_eig = out.min_ah_eig.min(m.ah.symmetric_eigenvalues().min());
        let se = m.se.symmetric_eigenvalues();
        out.min_se_ratio = out.min_se_ratio.min(se.min() / se.max());
    }
    Ok(out)
}

/// `λ_min / λ_max` of `BᵀB` for the assembled divergence block.
pub fn divergence_rank_ratio(mesh: &PolygonMesh, k: usize) -> hrvem::Result<f64> {
    let field = plane_strain_isotropic(1.0, 1.0)?;
    let problem = Problem {
        field: &field,
        body_force: &zero,
        boundary: &zero,
    };
    Ok(assemble(mesh, k, &problem, ElementOptions::default())?.divergence_rank_ratio())
}

pub fn structural_check(family: MeshFamily, n: usize, k: usize, seed: u64) -> CheckOutcome {
    let name = format!("structure {} n={n} k={k}", family.name());
    let r = (|| {
        let mesh = generate_mesh(&MeshSpec::new(family, n).with_seed(seed))?;
        let s = cell_structure(&mesh, k)?;
        let rank = divergence_rank_ratio(&mesh, k)?;
        let passed = s.dof_counts_ok && s.min_ah_eig > 0.0 && s.min_se_ratio > -PSD_TOL && rank > RANK_TOL;
        Ok((
            passed,
            format!(
                "dof counts {}, min eig(Ah) {:.3e}, min eig(Se)/max {:.3e}, eig ratio(BᵀB) {:.3e}",
                if s.dof_counts_ok { "ok" } else { "WRONG" },
                s.min_ah_eig,
                s.min_se_ratio,
                rank
            ),
        ))
    })();
    CheckOutcome::from_result(name, r)
}

pub fn patch_check(family: MeshFamily, n: usize, seed: u64) -> CheckOutcome {
    let name = format!("patch test {} n={n} k=1", family.name());
    let r = (|| {
        let mesh = generate_mesh(&MeshSpec::new(family, n).with_seed(seed))?;
        let p = patch_test(&mesh, 1, 1e-12)?;
        Ok((
            p.stress <= PATCH_STRESS_TOL && p.displacement <= PATCH_DISPLACEMENT_TOL,
            format!("stress DOF rel. error {:.3e}, displacement L2 error {:.3e}", p.stress, p.displacement),
        ))
    })();
    CheckOutcome::from_result(name, r)
}

pub fn commuting_check(family: MeshFamily, n: usize, k: usize, seed: u64) -> CheckOutcome {
    let name = format!("commuting diagram {} n={n} k={k} (test b)", family.name());
    let r = (|| {
        let mesh = generate_mesh(&MeshSpec::new(family, n).with_seed(seed))?;
        let d = check_commuting_diagram(&mesh, k, &ManufacturedSolution::new(TestCase::B))?;
        Ok((d <= COMMUTING_TOL, format!("relative discrepancy {d:.3e}")))
    })();
    CheckOutcome::from_result(name, r)
}

pub fn projector_check(family: MeshFamily, n: usize, k: usize, samples: usize, seed: u64) -> CheckOutcome {
    let name = format!("projector consistency {} n={n} k={k}", family.name());
    let r = (|| {
        let mesh = generate_mesh(&MeshSpec::new(family, n).with_seed(seed))?;
        let e = projector_consistency(&mesh, k, samples, seed)?;
        Ok((e <= PROJECTOR_TOL, format!("{samples} samples, max rel. error {e:.3e}")))
    })();
    CheckOutcome::from_result(name, r)
}

/// The default suite: structure, patch test and projector consistency on
/// every family at `n = 4`, commuting diagram on `PolyU` at `n = 8`.
pub fn run_checks(seed: u64) -> Vec<CheckOutcome> {
    let mut out = Vec::new();
    for family in MeshFamily::ALL {
        for k in 1..=2 {
            out.push(structural_check(family, 4, k, seed));
        }
        out.push(patch_check(family, 4, seed));
        for k in 1..=2 {
            out.push(projector_check(family, 4, k, 20, seed));
        }
    }
    for k in 1..=2 {
        out.push(commuting_check(MeshFamily::PolyU, 8, k, seed));
    }
    out
}
