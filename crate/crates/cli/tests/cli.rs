use std::path::Path;
use std::process::{Command, Output};

use hrvem::mesh::read_mesh;

fn hrvem(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hrvem")).args(args).output().unwrap()
}

fn write_config(dir: &Path, body: &str) -> String {
    let path = dir.join("study.toml");
    std::fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn run_writes_all_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let cfg = write_config(
        dir.path(),
        &format!(
            "test = \"a\"\nfamilies = [\"QuadS\", \"HexS\"]\nk = 1\nlevels = [2, 4]\nout_dir = {:?}\nexpect_exact = [\"E_sigma_div\"]\n",
            out.to_str().unwrap()
        ),
    );
    let o = hrvem(&["run", &cfg]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    for f in [
        "test_a_k1_QuadS.csv",
        "test_a_k1_HexS.csv",
        "test_a_k1_E_sigma.svg",
        "test_a_k1_E_sigma_div.svg",
        "test_a_k1_E_u.svg",
        "summary_test_a_k1.md",
    ] {
        assert!(out.join(f).exists(), "{f}");
    }
    let csv = std::fs::read_to_string(out.join("test_a_k1_QuadS.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().collect();
    assert_eq!(rows.len(), 3);
    let e_div: f64 = rows[2].split(',').nth(3).unwrap().parse().unwrap();
    assert!(e_div <= 1e-10);
}

#[test]
fn flags_override_the_config() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o");
    let cfg = write_config(dir.path(), "test = \"a\"\nfamilies = [\"TriS\"]\nk = 1\nlevels = [2, 4]\n");
    let o = hrvem(&["run", &cfg, "--k", "2", "--test", "b", "--levels", "2,3", "--out-dir", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(out.join("test_b_k2_TriS.csv")).unwrap();
    assert!(csv.lines().nth(2).unwrap().starts_with("3,"));
}

#[test]
fn failed_expectation_exits_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o");
    let cfg = write_config(
        dir.path(),
        &format!(
            "test = \"b\"\nfamilies = [\"QuadS\"]\nk = 1\nlevels = [2, 4]\nmin_rate = 9.0\nout_dir = {:?}\n",
            out.to_str().unwrap()
        ),
    );
    assert_eq!(hrvem(&["run", &cfg]).status.code(), Some(1));
    assert!(out.join("test_b_k1_QuadS.csv").exists());
}

#[test]
fn usage_and_config_errors_exit_with_two() {
    assert_eq!(hrvem(&[]).status.code(), Some(2));
    assert_eq!(hrvem(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(hrvem(&["check", "--bogus"]).status.code(), Some(2));
    assert_eq!(hrvem(&["run", "/nonexistent/study.toml"]).status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "test = \"a\"\nfamilies = []\nk = 1\nlevels = [2]\n");
    let o = hrvem(&["run", &cfg]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("families"));
    assert_eq!(hrvem(&["mesh", "Pentagons", "4"]).status.code(), Some(2));
}

#[test]
fn mesh_subcommand_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.json");
    let o = hrvem(&["mesh", "HexS", "8", "--out", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let m = read_mesh(&path).unwrap();
    assert!((m.total_area() - 1.0).abs() < 1e-12);
    let printed = hrvem(&["mesh", "PolyU", "3", "--seed", "5"]);
    assert_eq!(printed.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&printed.stdout).contains("\"cells\""));
}

#[test]
fn shipped_configs_are_valid() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut count = 0;
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        let cfg = hrvem_cli::config::StudyConfig::load(&path).unwrap();
        cfg.validate().unwrap();
        assert_eq!(cfg.families.len(), 8, "{}", path.display());
        count += 1;
    }
    assert_eq!(count, 6);
}
