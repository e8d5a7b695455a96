//! Study configuration files.
//!
//! ```toml
//! test = "a"
//! families = ["QuadS", "TriS", "PolyU", "ConcQuadS"]
//! k = 1
//! levels = [4, 8, 16, 32]
//! seed = 42
//! out_dir = "results/test_a_k1"
//! solver_tol = 1e-10
//! exact_tol = 1e-10
//! min_rate = 1.8
//! expect_exact = ["E_sigma_div"]
//! ```

use std::path::{Path, PathBuf};
use std::str::FromStr;

use hrvem::analysis::TestCase;
use hrvem::mesh::MeshFamily;
use serde::Deserialize;

use crate::CliError;

/// One of the three reported error norms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Norm {
    Sigma,
    SigmaDiv,
    U,
}

impl Norm {
    pub const ALL: [Norm; 3] = [Norm::Sigma, Norm::SigmaDiv, Norm::U];

    /// Column name in the CSV output.
    pub fn column(self) -> &'static str {
        match self {
            Norm::Sigma => "E_sigma",
            Norm::SigmaDiv => "E_sigma_div",
            Norm::U => "E_u",
        }
    }
}

impl FromStr for Norm {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        Norm::ALL
            .into_iter()
            .find(|n| n.column().eq_ignore_ascii_case(s) || n.column()[2..].eq_ignore_ascii_case(s))
            .ok_or_else(|| CliError::Config(format!("unknown norm `{s}`")))
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    test: String,
    families: Vec<String>,
    k: usize,
    levels: Vec<usize>,
    #[serde(default = "default_seed")]
    seed: u64,
    #[serde(default = "default_out_dir")]
    out_dir: PathBuf,
    #[serde(default = "default_solver_tol")]
    solver_tol: f64,
    #[serde(default = "default_exact_tol")]
    exact_tol: f64,
    min_rate: Option<f64>,
    #[serde(default)]
    expect_exact: Vec<String>,
    #[serde(default)]
    timing: bool,
}

fn default_seed() -> u64 {
    42
}

fn default_out_dir() -> PathBuf {
    PathBuf::from("results")
}

fn default_solver_tol() -> f64 {
    1e-10
}

fn default_exact_tol() -> f64 {
    hrvem::analysis::EXACT_TOL
}

/// Convergence study: one test case, several mesh families, one degree.
#[derive(Debug, Clone, PartialEq)]
pub struct StudyConfig {
    pub test: TestCase,
    pub families: Vec<MeshFamily>,
    pub k: usize,
    /// Mesh resolutions, coarse to fine.
    pub levels: Vec<usize>,
    pub seed: u64,
    pub out_dir: PathBuf,
    pub solver_tol: f64,
    pub exact_tol: f64,
    /// Every fitted slope of a norm not listed in `expect_exact` must reach this.
    pub min_rate: Option<f64>,
    /// Norms that must be zero up to `exact_tol` on every level.
    pub expect_exact: Vec<Norm>,
    /// Record wall time; off by default so that outputs are reproducible.
    pub timing: bool,
}

impl StudyConfig {
    pub fn new(test: TestCase, families: Vec<MeshFamily>, k: usize, levels: Vec<usize>) -> Self {
        StudyConfig {
            test,
            families,
            k,
            levels,
            seed: default_seed(),
            out_dir: default_out_dir(),
            solver_tol: default_solver_tol(),
            exact_tol: default_exact_tol(),
            min_rate: None,
            expect_exact: Vec::new(),
            timing: false,
        }
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        let families = raw
            .families
            .iter()
            .map(|f| f.parse::<MeshFamily>().map_err(CliError::Config))
            .collect::<Result<_, _>>()?;
        let test = raw.test.parse::<TestCase>().map_err(|e| CliError::Config(e.to_string()))?;
        let expect_exact = raw.expect_exact.iter().map(|s| s.parse()).collect::<Result<_, _>>()?;
        let config = StudyConfig {
            test,
            families,
            k: raw.k,
            levels: raw.levels,
            seed: raw.seed,
            out_dir: raw.out_dir,
            solver_tol: raw.solver_tol,
            exact_tol: raw.exact_tol,
            min_rate: raw.min_rate,
            expect_exact,
            timing: raw.timing,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let fail = |m: &str| Err(CliError::Config(m.to_string()));
        if self.families.is_empty() {
            return fail("`families` must not be empty");
        }
        if self.levels.is_empty() {
            return fail("`levels` must not be empty");
        }
        if self.k == 0 {
            return fail("`k` must be at least 1");
        }
        if self.levels.iter().any(|&n| n < 2) {
            return fail("every level must be at least 2");
        }
        if self.levels.windows(2).any(|w| w[0] >= w[1]) {
            return fail("`levels` must be strictly increasing");
        }
        let mut seen = self.families.clone();
        seen.sort_by_key(|f| f.name());
        seen.dedup();
        if seen.len() != self.families.len() {
            return fail("`families` contains duplicates");
        }
        if !(self.solver_tol > 0.0) || !(self.exact_tol > 0.0) {
            return fail("tolerances must be positive");
        }
        Ok(())
    }
}
