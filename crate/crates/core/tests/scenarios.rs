//! The scenario files shipped in `scenarios/` parse, validate and run.

use std::path::PathBuf;

use stenoflow::scenario::{load_config, run};

fn scenario_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../scenarios")
}

fn scenario_files() -> Vec<PathBuf> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(scenario_dir())
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "cfg"))
        .collect();
    files.sort();
    files
}

#[test]
fn shipped_scenarios_parse() {
    let files = scenario_files();
    assert!(files.len() >= 4);
    for f in files {
        load_config(&f).unwrap_or_else(|e| panic!("{}: {e}", f.display()));
    }
}

#[test]
fn shipped_scenarios_run() {
    for f in scenario_files() {
        let mut cfg = load_config(&f).unwrap();
        cfg.time.t_end = cfg.time.t_end.min(0.2);
        let out = run(&cfg).unwrap_or_else(|e| panic!("{}: {e}", f.display()));
        assert!(out.steps() > 0);
        assert!(out
            .diagnostics
            .iter()
            .all(|d| d.mass_residual.abs() <= 1e-12));
    }
}
