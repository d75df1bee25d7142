//! Scenario description, initial data, inlet sensor readout and the
//! time loop that drives the solver.

pub mod config;
pub mod output;
pub mod studies;
pub mod waveform;

use std::path::Path;

use thiserror::Error;

use crate::model::{
    area_from_pressure, from_riemann, pressure, FlowState, ModelError, RiemannPair, VesselParams,
};
use crate::solver::{
    self, cfl_dt, probe_boundaries, step, BoundaryTrace, FlowField, Grid, SolverConfig,
    SolverError, SolverState,
};

pub use config::{
    parse_config, serialize_config, ConfigError, ConfigIssue, InitialCondition, ScenarioConfig,
    TimeConfig,
};
pub use waveform::InletWaveform;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error("initial profile: {0}")]
    Profile(String),
    #[error("{0}")]
    Study(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, ScenarioError>;

/// What the inlet sensor reports: pressure and the area/speed recovered
/// from it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SensorReading {
    /// `y = P(A(0, t))`.
    pub pressure: f64,
    /// `A(0, t)` recovered by inverting the pressure law.
    pub area: f64,
    /// `V(0, t) = Q_in / A(0, t)`.
    pub velocity: f64,
}

pub fn sensor_readout(
    inlet: &FlowState,
    q_in: f64,
    vp: &VesselParams,
) -> std::result::Result<SensorReading, ModelError> {
    let y = pressure(inlet.area, vp)?;
    let area = area_from_pressure(y, vp)?;
    Ok(SensorReading {
        pressure: y,
        area,
        velocity: q_in / area,
    })
}

/// Builds the cell values the run starts from.
pub fn initial_field(cfg: &ScenarioConfig, grid: &Grid) -> Result<FlowField> {
    let vp = &cfg.vessel;
    let n = grid.n_cells();
    let v_rest = cfg.inlet.eval(0.0) / vp.area0;
    match &cfg.initial {
        InitialCondition::AtRest => Ok(FlowField::uniform(n, vp.area0, v_rest)),
        InitialCondition::Pulse {
            amplitude,
            center,
            width,
        } => {
            let k = vp.invariant_coefficient();
            let v_bg = v_rest - k * vp.area0.sqrt().sqrt();
            let area: Vec<f64> = grid
                .centers()
                .map(|x| {
                    let z = (x - center) / width;
                    vp.area0 * (1.0 + amplitude * (-z * z).exp())
                })
                .collect();
            let velocity = area.iter().map(|a| v_bg + k * a.sqrt().sqrt()).collect();
            Ok(FlowField { area, velocity })
        }
        InitialCondition::ProfileFile(path) => {
            let text = std::fs::read_to_string(path).map_err(|source| ScenarioError::Io {
                path: path.display().to_string(),
                source,
            })?;
            let table = parse_profile(&text)?;
            let area = grid.centers().map(|x| interpolate(&table, x, 1)).collect();
            let velocity = grid.centers().map(|x| interpolate(&table, x, 2)).collect();
            Ok(FlowField { area, velocity })
        }
        InitialCondition::Cells(field) => {
            if field.len() != n {
                return Err(SolverError::FieldSize {
                    expected: n,
                    got: field.len(),
                }
                .into());
            }
            Ok(field.clone())
        }
    }
}

fn parse_profile(text: &str) -> Result<Vec<[f64; 3]>> {
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let cols: Vec<&str> = line.split(',').map(str::trim).collect();
        let nums: Option<Vec<f64>> = cols.iter().map(|c| c.parse().ok()).collect();
        match nums {
            Some(v) if v.len() == 3 => rows.push([v[0], v[1], v[2]]),
            None if rows.is_empty() => continue, // header
            _ => {
                return Err(ScenarioError::Profile(format!(
                    "line {}: expected `x, A, V`",
                    i + 1
                )))
            }
        }
    }
    if rows.len() < 2 {
        return Err(ScenarioError::Profile("need at least two rows".into()));
    }
    if rows.windows(2).any(|w| !(w[1][0] > w[0][0])) {
        return Err(ScenarioError::Profile(
            "x must be strictly increasing".into(),
        ));
    }
    Ok(rows)
}

fn interpolate(table: &[[f64; 3]], x: f64, col: usize) -> f64 {
    let k = table.partition_point(|r| r[0] <= x);
    if k == 0 {
        return table[0][col];
    }
    if k == table.len() {
        return table[k - 1][col];
    }
    let (a, b) = (&table[k - 1], &table[k]);
    a[col] + (b[col] - a[col]) * (x - a[0]) / (b[0] - a[0])
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub t: f64,
    pub field: FlowField,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SensorSample {
    pub t: f64,
    pub q_in: f64,
    pub reading: SensorReading,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundarySample {
    pub t: f64,
    pub trace: BoundaryTrace,
}

impl BoundarySample {
    /// Primitive state at the outlet.
    pub fn outlet_state(&self, vp: &VesselParams) -> Option<FlowState> {
        from_riemann(&self.trace.outlet, vp).ok()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagnosticsSample {
    pub t: f64,
    pub dt: f64,
    pub mass_residual: f64,
    pub min_lambda2: f64,
    pub supercritical_fraction: f64,
    pub halvings: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub config: SolverConfig,
    pub snapshots: Vec<Snapshot>,
    pub sensor: Vec<SensorSample>,
    pub boundary: Vec<BoundarySample>,
    pub diagnostics: Vec<DiagnosticsSample>,
    /// `|V_end - V_0 - sum dt (F_in - F_out)| / V_0`.
    pub cumulative_mass_residual: f64,
    pub final_state: SolverState,
}

impl RunOutput {
    pub fn grid(&self) -> &Grid {
        &self.config.grid
    }

    pub fn final_field(&self) -> FlowField {
        self.snapshots
            .last()
            .expect("runs record the initial snapshot")
            .field
            .clone()
    }

    pub fn steps(&self) -> usize {
        self.diagnostics.len()
    }
}

pub fn solver_config(cfg: &ScenarioConfig) -> Result<SolverConfig> {
    cfg.validate()?;
    let solver = SolverConfig {
        vessel: cfg.vessel,
        stenosis: cfg.stenosis,
        outlet: cfg.outlet(),
        grid: Grid::new(cfg.n_cells, cfg.vessel.length)?,
        cfl: cfg.time.cfl,
        strict_subcritical: cfg.strict_subcritical,
    };
    solver.validate()?;
    Ok(solver)
}

/// Advances the scenario from `t = 0` to `t_end`.
///
/// Steps are clipped so that every snapshot time `k * snapshot_every`
/// (and `t_end`) is hit exactly; sensor and boundary traces are sampled
/// at those same instants. Deterministic for a given scenario.
pub fn run(cfg: &ScenarioConfig) -> Result<RunOutput> {
    let solver = solver_config(cfg)?;
    let field = initial_field(cfg, &solver.grid)?;
    let mut state = SolverState::new(field, &solver)?;
    let dx = solver.grid.dx();
    let t_end = cfg.time.t_end;
    let cadence = cfg.time.snapshot_every;

    let mut out = RunOutput {
        config: solver,
        snapshots: Vec::new(),
        sensor: Vec::new(),
        boundary: Vec::new(),
        diagnostics: Vec::new(),
        cumulative_mass_residual: 0.0,
        final_state: state.clone(),
    };
    record(&mut out, &state, cfg)?;

    let volume0 = state.field.volume(dx);
    let mut boundary_volume = 0.0;
    let mut k = 1u64;
    while state.t < t_end {
        let target = if cadence > 0.0 {
            (k as f64 * cadence).min(t_end)
        } else {
            t_end
        };
        let remaining = target - state.t;
        let dt_cfl = cfl_dt(&state.field, &solver.grid, &solver.vessel, solver.cfl)?;
        let landing = dt_cfl >= remaining;
        let dt = if landing { remaining } else { dt_cfl };
        let q_in = cfg.inlet.eval(state.t);
        let outcome = step(&state, dt, q_in, &solver)?;
        let d = outcome.diagnostics;
        boundary_volume += d.dt * (outcome.boundary_mass_flux.0 - outcome.boundary_mass_flux.1);
        state = outcome.state;
        let landed = landing && d.halvings == 0;
        if landed {
            state.t = target;
        }
        out.diagnostics.push(DiagnosticsSample {
            t: state.t,
            dt: d.dt,
            mass_residual: d.mass_residual,
            min_lambda2: d.min_lambda2,
            supercritical_fraction: d.supercritical_fraction,
            halvings: d.halvings,
        });
        if landed {
            record(&mut out, &state, cfg)?;
            if target < t_end {
                k += 1;
            }
        }
    }
    out.cumulative_mass_residual =
        (state.field.volume(dx) - volume0 - boundary_volume).abs() / volume0;
    out.final_state = state;
    Ok(out)
}

fn record(out: &mut RunOutput, state: &SolverState, cfg: &ScenarioConfig) -> Result<()> {
    let solver = &out.config;
    let q_in = cfg.inlet.eval(state.t);
    let trace = probe_boundaries(state, q_in, solver)?;
    let inlet = from_riemann(&trace.inlet, &solver.vessel).map_err(SolverError::from)?;
    let reading = sensor_readout(&inlet, q_in, &solver.vessel).map_err(SolverError::from)?;
    out.snapshots.push(Snapshot {
        t: state.t,
        field: state.field.to_flow()?,
    });
    out.sensor.push(SensorSample {
        t: state.t,
        q_in,
        reading,
    });
    out.boundary.push(BoundarySample { t: state.t, trace });
    Ok(())
}

/// Inlet pair at the current state, for callers that only need the sensor.
pub fn inlet_state(
    state: &SolverState,
    q_in: f64,
    cfg: &SolverConfig,
) -> std::result::Result<RiemannPair, SolverError> {
    Ok(solver::inlet_pair(state, q_in, cfg)?.0)
}

/// Loads a scenario file, resolving a relative profile path against the
/// file's directory.
pub fn load_config(path: &Path) -> Result<ScenarioConfig> {
    let text = std::fs::read_to_string(path).map_err(|source| ScenarioError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let mut cfg = parse_config(&text)?;
    if let InitialCondition::ProfileFile(p) = &mut cfg.initial {
        if p.is_relative() {
            if let Some(dir) = path.parent() {
                *p = dir.join(&*p);
            }
        }
    }
    Ok(cfg)
}
