//! Convergence studies.

use std::time::Instant;

use hrvem::analysis::{errors, fit_rate, mesh_size, reference_norms, solve_manufactured, Errors, ManufacturedSolution, Rate};
use hrvem::mesh::{generate_mesh, MeshFamily, MeshSpec};
use rayon::prelude::*;

use crate::config::{Norm, StudyConfig};

/// One refinement level. Failed levels carry NaN errors and the reason.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelResult {
    pub n: usize,
    pub h_bar_e: f64,
    pub errors: Errors,
    /// Same norms of the exact solution, for exactness thresholds.
    pub reference: Errors,
    pub n_dofs: usize,
    pub seconds: f64,
    pub failure: Option<String>,
}

impl LevelResult {
    pub fn error(&self, norm: Norm) -> f64 {
        pick(&self.errors, norm)
    }

    pub fn reference(&self, norm: Norm) -> f64 {
        pick(&self.reference, norm)
    }
}

pub fn pick(e: &Errors, norm: Norm) -> f64 {
    match norm {
        Norm::Sigma => e.sigma,
        Norm::SigmaDiv => e.sigma_div,
        Norm::U => e.u,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FamilyResult {
    pub family: MeshFamily,
    pub levels: Vec<LevelResult>,
    /// Fitted rate per norm, in the order of [`Norm::ALL`].
    pub rates: [Rate; 3],
}

impl FamilyResult {
    pub fn failure(&self) -> Option<&str> {
        self.levels.iter().find_map(|l| l.failure.as_deref())
    }

    pub fn rate(&self, norm: Norm) -> Rate {
        self.rates[Norm::ALL.iter().position(|&n| n == norm).unwrap()]
    }
}

/// A configured expectation and whether it held.
#[derive(Debug, Clone, PartialEq)]
pub struct Expectation {
    pub description: String,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudyReport {
    pub config: StudyConfig,
    pub families: Vec<FamilyResult>,
    pub expectations: Vec<Expectation>,
}

impl StudyReport {
    pub fn passed(&self) -> bool {
        self.expectations.iter().all(|e| e.passed)
    }
}

fn nan_errors() -> Errors {
    Errors {
        sigma: f64::NAN,
        sigma_div: f64::NAN,
        u: f64::NAN,
    }
}

fn run_level(config: &StudyConfig, family: MeshFamily, n: usize, ms: &ManufacturedSolution) -> LevelResult {
    let start = Instant::now();
    let mut level = LevelResult {
        n,
        h_bar_e: f64::NAN,
        errors: nan_errors(),
        reference: nan_errors(),
        n_dofs: 0,
        seconds: 0.0,
        failure: None,
    };
    let outcome = (|| -> hrvem::Result<()> {
        let mesh = generate_mesh(&MeshSpec::new(family, n).with_seed(config.seed))?;
        level.h_bar_e = mesh_size(&mesh);
        let (sys, sol) = solve_manufactured(&mesh, config.k, ms, config.solver_tol)?;
        level.n_dofs = sys.dofs.total();
        level.errors = errors(&mesh, &sys, &sol, ms)?;
        level.reference = reference_norms(&mesh, config.k, ms)?;
        Ok(())
    })();
    if let Err(e) = outcome {
        level.errors = nan_errors();
        level.failure = Some(e.to_string());
    }
    if config.timing {
        level.seconds = start.elapsed().as_secs_f64();
    }
    level
}

fn run_family(config: &StudyConfig, family: MeshFamily, ms: &ManufacturedSolution) -> FamilyResult {
    let mut levels = Vec::new();
    for &n in &config.levels {
        let level = run_level(config, family, n, ms);
        let failed = level.failure.is_some();
        levels.push(level);
        if failed {
            break;
        }
    }
    let ok: Vec<&LevelResult> = levels.iter().filter(|l| l.failure.is_none()).collect();
    let h: Vec<f64> = ok.iter().map(|l| l.h_bar_e).collect();
    let rates = Norm::ALL.map(|norm| {
        let e: Vec<f64> = ok.iter().map(|l| l.error(norm)).collect();
        let reference = ok.last().map_or(0.0, |l| l.reference(norm));
        fit_rate(&h, &e, reference, config.exact_tol)
    });
    FamilyResult { family, levels, rates }
}

fn expectations(config: &StudyConfig, families: &[FamilyResult]) -> Vec<Expectation> {
    let mut out = Vec::new();
    for fam in families {
        let name = fam.family.name();
        if let Some(reason) = fam.failure() {
            out.push(Expectation {
                description: format!("{name}: all levels solved ({reason})"),
                passed: false,
            });
        }
        for &norm in &config.expect_exact {
            let worst = fam
                .levels
                .iter()
                .map(|l| l.error(norm) / (1.0 + l.reference(norm)))
                .fold(0.0f64, |m, v| if v.is_nan() { f64::NAN } else { m.max(v) });
            out.push(Expectation {
                description: format!(
                    "{name}: {} <= {:e} (1 + norm) on every level (worst {worst:.3e})",
                    norm.column(),
                    config.exact_tol
                ),
                passed: worst <= config.exact_tol,
            });
        }
        if let Some(min) = config.min_rate {
            for norm in Norm::ALL {
                if config.expect_exact.contains(&norm) {
                    continue;
                }
                let rate = fam.rate(norm);
                let passed = match rate {
                    Rate::Slope(s) => s >= min,
                    Rate::Exact => true,
                    Rate::Insufficient => false,
                };
                out.push(Expectation {
                    description: format!("{name}: rate of {} = {rate} >= {min}", norm.column()),
                    passed,
                });
            }
        }
    }
    out
}

/// Runs every (family, level) pair of the study. Families are processed in
/// parallel; results are returned in configuration order.
pub fn run_study(config: &StudyConfig) -> StudyReport {
    let ms = ManufacturedSolution::new(config.test);
    let families: Vec<FamilyResult> = config
        .families
        .par_iter()
        .map(|&f| run_family(config, f, &ms))
        .collect();
    StudyReport {
        expectations: expectations(config, &families),
        config: config.clone(),
        families,
    }
}
