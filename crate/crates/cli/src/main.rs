use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use hrvem::analysis::TestCase;
use hrvem::mesh::{generate_mesh, mean_edge_length, MeshDocument, MeshFamily, MeshSpec};
use hrvem_cli::checks::run_checks;
use hrvem_cli::output::write_report;
use hrvem_cli::{run_study, CliError, StudyConfig};

/// Mixed virtual element convergence studies for plane elasticity.
#[derive(Parser, Debug)]
#[command(name = "hrvem", version)]
struct Cli {
    /// Polynomial degree (overrides the config file).
    #[arg(long, global = true)]
    k: Option<usize>,
    /// Test case a, b or c (overrides the config file).
    #[arg(long, global = true)]
    test: Option<String>,
    /// Comma-separated mesh resolutions (overrides the config file).
    #[arg(long, global = true, value_delimiter = ',')]
    levels: Option<Vec<usize>>,
    /// Output directory (overrides the config file).
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    /// Seed for the unstructured mesh families.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Relative residual tolerance of the linear solve.
    #[arg(long, global = true)]
    tol: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run the convergence study described by a config file.
    Run { config: PathBuf },
    /// Generate a mesh and write it as JSON.
    Mesh {
        family: String,
        n: usize,
        /// Output file; the mesh is printed when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the property suite.
    Check,
}

fn apply_overrides(cli: &Cli, config: &mut StudyConfig) -> Result<(), CliError> {
    if let Some(k) = cli.k {
        config.k = k;
    }
    if let Some(t) = &cli.test {
        config.test = t.parse::<TestCase>().map_err(|e| CliError::Config(e.to_string()))?;
    }
    if let Some(levels) = &cli.levels {
        config.levels = levels.clone();
    }
    if let Some(dir) = &cli.out_dir {
        config.out_dir = dir.clone();
    }
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    if let Some(tol) = cli.tol {
        config.solver_tol = tol;
    }
    config.validate()
}

fn run(cli: &Cli) -> Result<bool, CliError> {
    match &cli.command {
        Command::Run { config } => {
            let mut config = StudyConfig::load(config)?;
            apply_overrides(cli, &mut config)?;
            let report = run_study(&config);
            for fam in &report.families {
                let rates: Vec<String> = fam.rates.iter().map(|r| r.to_string()).collect();
                println!("{:<10} rates (E_sigma, E_sigma_div, E_u): {}", fam.family.name(), rates.join(", "));
                if let Some(reason) = fam.failure() {
                    println!("{:<10} failed: {reason}", fam.family.name());
                }
            }
            for e in &report.expectations {
                println!("{} {}", if e.passed { "PASS" } else { "FAIL" }, e.description);
            }
            for path in write_report(&report)? {
                println!("wrote {}", path.display());
            }
            Ok(report.passed())
        }
        Command::Mesh { family, n, out } => {
            let family = family.parse::<MeshFamily>().map_err(CliError::Config)?;
            let mut spec = MeshSpec::new(family, *n);
            if let Some(seed) = cli.seed {
                spec = spec.with_seed(seed);
            }
            let mesh = generate_mesh(&spec)?;
            let text = MeshDocument::from_mesh(&mesh).to_text();
            match out {
                Some(path) => {
                    std::fs::write(path, text)?;
                    eprintln!(
                        "{} n={}: {} vertices, {} edges, {} cells, mean edge length {:.6e}",
                        family.name(),
                        n,
                        mesh.vertices().len(),
                        mesh.n_edges(),
                        mesh.n_cells(),
                        mean_edge_length(&mesh)
                    );
                }
                None => print!("{text}"),
            }
            Ok(true)
        }
        Command::Check => {
            let outcomes = run_checks(cli.seed.unwrap_or(42));
            for c in &outcomes {
                println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
            }
            Ok(outcomes.iter().all(|c| c.passed))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
