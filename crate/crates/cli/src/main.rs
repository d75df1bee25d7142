//! `stenoflow`: run arterial-stenosis scenarios from the command line.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use stenoflow::scenario::output::write_run;
use stenoflow::scenario::studies::{compare_bc, convergence, sweep, write_sweep_table};
use stenoflow::scenario::{load_config, run, RunOutput, ScenarioConfig};

#[derive(Parser)]
#[command(
    name = "stenoflow",
    version,
    about = "1-D blood flow through a segment with an outlet stenosis"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario and write its CSV files.
    Run {
        #[command(flatten)]
        scenario: ScenarioArgs,
        /// Output directory (created if missing).
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the scenario under every outlet closure and tabulate the traces.
    CompareBc {
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Self-convergence study on successively doubled grids.
    Convergence {
        #[command(flatten)]
        scenario: ScenarioArgs,
        /// Number of grid levels (at least 3).
        #[arg(long, default_value_t = 4)]
        levels: usize,
        /// Optional CSV file for the table (printed to stdout regardless).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// One run per parameter value, executed concurrently.
    Sweep {
        #[command(flatten)]
        scenario: ScenarioArgs,
        /// Parameter name, e.g. `R_T` or `stenosis.A_s`.
        #[arg(long)]
        param: String,
        /// Comma-separated values.
        #[arg(long, value_delimiter = ',', num_args = 1..)]
        values: Vec<f64>,
        /// Optional directory for per-value run files and `sweep.csv`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct ScenarioArgs {
    /// Scenario file.
    #[arg(long)]
    config: PathBuf,
    /// Override the number of grid cells.
    #[arg(long)]
    cells: Option<usize>,
    /// Override the CFL number.
    #[arg(long)]
    cfl: Option<f64>,
    /// Override the final time.
    #[arg(long)]
    t_end: Option<f64>,
}

impl ScenarioArgs {
    fn load(&self) -> Result<ScenarioConfig> {
        let mut cfg = load_config(&self.config)
            .with_context(|| format!("loading {}", self.config.display()))?;
        if let Some(n) = self.cells {
            cfg.n_cells = n;
        }
        if let Some(c) = self.cfl {
            cfg.time.cfl = c;
        }
        if let Some(t) = self.t_end {
            cfg.time.t_end = t;
        }
        cfg.validate()
            .with_context(|| format!("{} with command-line overrides", self.config.display()))?;
        Ok(cfg)
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(
        File::create(path).with_context(|| format!("creating {}", path.display()))?,
    ))
}

fn summarize(label: &str, out: &RunOutput) -> String {
    let worst_mass = out
        .diagnostics
        .iter()
        .map(|d| d.mass_residual.abs())
        .fold(0.0, f64::max);
    let min_l2 = out
        .diagnostics
        .iter()
        .map(|d| d.min_lambda2)
        .fold(f64::NEG_INFINITY, f64::max);
    let halvings: u32 = out.diagnostics.iter().map(|d| d.halvings).sum();
    format!(
        "{label}: {} steps to t = {}, max |mass residual| {worst_mass:.2e}, largest min lambda_2 {min_l2:.4e}, dt halvings {halvings}",
        out.steps(),
        out.final_state.t
    )
}

fn cmd_run(scenario: &ScenarioArgs, out: &Path) -> Result<()> {
    let cfg = scenario.load()?;
    let result = run(&cfg)?;
    write_run(out, &result).with_context(|| format!("writing {}", out.display()))?;
    println!("{}", summarize(cfg.outlet().name(), &result));
    println!("wrote {}", out.display());
    Ok(())
}

fn cmd_compare(scenario: &ScenarioArgs, out: &Path) -> Result<()> {
    let cfg = scenario.load()?;
    let cmp = compare_bc(&cfg)?;
    std::fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let mut failed = Vec::new();
    for (model, result) in &cmp.runs {
        match result {
            Ok(o) => {
                let dir = out.join(model.name());
                write_run(&dir, o).with_context(|| format!("writing {}", dir.display()))?;
                println!("{}", summarize(model.name(), o));
            }
            Err(e) => {
                eprintln!("{}: failed: {e}", model.name());
                failed.push(model.name());
            }
        }
    }
    let table = out.join("compare_bc.csv");
    let mut w = create(&table)?;
    cmp.write_table(&mut w)?;
    w.flush()?;
    println!("wrote {}", table.display());
    if !failed.is_empty() {
        bail!("outlet model(s) failed: {}", failed.join(", "));
    }
    Ok(())
}

fn cmd_convergence(scenario: &ScenarioArgs, levels: usize, out: Option<&Path>) -> Result<()> {
    let cfg = scenario.load()?;
    let report = convergence(&cfg, levels)?;
    report.write_table(&mut io::stdout().lock())?;
    if let Some(path) = out {
        let mut w = create(path)?;
        report.write_table(&mut w)?;
        w.flush()?;
    }
    Ok(())
}

fn cmd_sweep(
    scenario: &ScenarioArgs,
    param: &str,
    values: &[f64],
    out: Option<&Path>,
) -> Result<()> {
    if values.is_empty() {
        bail!("--values needs at least one value");
    }
    let cfg = scenario.load()?;
    let points = sweep(&cfg, param, values)?;
    write_sweep_table(&mut io::stdout().lock(), param, &points)?;
    if let Some(dir) = out {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        for p in &points {
            if let Ok(o) = &p.result {
                let sub = dir.join(format!("{param}={}", p.value));
                write_run(&sub, o).with_context(|| format!("writing {}", sub.display()))?;
            }
        }
        let mut w = create(&dir.join("sweep.csv"))?;
        write_sweep_table(&mut w, param, &points)?;
        w.flush()?;
    }
    let failed: Vec<String> = points
        .iter()
        .filter_map(|p| {
            p.result
                .as_ref()
                .err()
                .map(|e| format!("{param} = {}: {e}", p.value))
        })
        .collect();
    if !failed.is_empty() {
        bail!(
            "{} of {} sweep runs failed:\n  {}",
            failed.len(),
            points.len(),
            failed.join("\n  ")
        );
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run { scenario, out } => cmd_run(scenario, out),
        Command::CompareBc { scenario, out } => cmd_compare(scenario, out),
        Command::Convergence {
            scenario,
            levels,
            out,
        } => cmd_convergence(scenario, *levels, out.as_deref()),
        Command::Sweep {
            scenario,
            param,
            values,
            out,
        } => cmd_sweep(scenario, param, values, out.as_deref()),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
