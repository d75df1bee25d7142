//! Scalar reduction `A_t + (A F(A))_x = 0` along the fundamental diagram
//! `V = F(A) = F0 - coef A^(1/4)`, solved with the exact Godunov flux of
//! the strictly concave `Q(A) = A F(A)` on `[0, A1]`.

use thiserror::Error;

use crate::model::{
    fd_capacity_area, fd_critical_area, fd_flow, fd_flow_derivative, fd_speed, ModelError,
    VesselParams,
};
use crate::scenario::{initial_field, run, InitialCondition, ScenarioConfig, ScenarioError};
use crate::solver::{FlowField, Grid};

#[derive(Debug, Error)]
pub enum LwrError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("time step {dt} exceeds the CFL limit {limit}")]
    Cfl { dt: f64, limit: f64 },
    #[error("inflow must be finite and >= 0, got {0}")]
    Inflow(f64),
    #[error("reduction precondition: {0}")]
    Precondition(String),
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
}

pub type Result<T> = std::result::Result<T, LwrError>;

/// Cell areas of the scalar model, each in `[0, A1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    pub area: Vec<f64>,
}

impl ScalarField {
    pub fn new(area: Vec<f64>, f0: f64, vp: &VesselParams) -> Result<Self> {
        let critical = fd_critical_area(f0, vp);
        if let Some(&a) = area.iter().find(|a| !(0.0..=critical).contains(*a)) {
            return Err(ModelError::OutsideDiagram { area: a, critical }.into());
        }
        Ok(Self { area })
    }

    pub fn uniform(n: usize, area: f64, f0: f64, vp: &VesselParams) -> Result<Self> {
        Self::new(vec![area; n], f0, vp)
    }

    pub fn len(&self) -> usize {
        self.area.len()
    }

    pub fn is_empty(&self) -> bool {
        self.area.is_empty()
    }

    pub fn mass(&self, dx: f64) -> f64 {
        self.area.iter().sum::<f64>() * dx
    }

    /// The matching full-model field with `V = F(A)`.
    pub fn to_flow_field(&self, f0: f64, vp: &VesselParams) -> FlowField {
        FlowField {
            velocity: self.area.iter().map(|a| fd_speed(*a, f0, vp)).collect(),
            area: self.area.clone(),
        }
    }
}

/// Exact Riemann flux of the concave diagram flow.
pub fn godunov_flux(left: f64, right: f64, f0: f64, vp: &VesselParams) -> Result<f64> {
    let ql = fd_flow(left, f0, vp)?;
    let qr = fd_flow(right, f0, vp)?;
    if left <= right {
        return Ok(ql.min(qr));
    }
    let peak = fd_capacity_area(f0, vp);
    if right <= peak && peak <= left {
        fd_flow(peak, f0, vp).map_err(Into::into)
    } else {
        Ok(ql.max(qr))
    }
}

/// Largest flow the first cell can accept (its supply).
pub fn supply(area: f64, f0: f64, vp: &VesselParams) -> Result<f64> {
    let peak = fd_capacity_area(f0, vp);
    Ok(fd_flow(area.max(peak), f0, vp)?)
}

/// Largest stable time step, `cfl dx / max |Q'|` over the cells and the
/// inflow ghost state.
pub fn lwr_cfl_dt(field: &ScalarField, dx: f64, f0: f64, vp: &VesselParams, cfl: f64) -> f64 {
    // The inflow ghost state can sit anywhere on [0, A*], so the fastest
    // wave at the inlet is Q'(0); leaving it out lets the first cell go
    // negative when the inflow is small.
    let speed = field
        .area
        .iter()
        .map(|a| fd_flow_derivative(*a, f0, vp).abs())
        .fold(fd_flow_derivative(0.0, f0, vp).abs(), f64::max);
    if speed > 0.0 {
        cfl * dx / speed
    } else {
        f64::INFINITY
    }
}

/// Interface fluxes of one step, `n + 1` values from inlet to outlet.
pub fn lwr_fluxes(
    field: &ScalarField,
    inflow: f64,
    f0: f64,
    vp: &VesselParams,
) -> Result<Vec<f64>> {
    if !(inflow >= 0.0) || !inflow.is_finite() {
        return Err(LwrError::Inflow(inflow));
    }
    let a = &field.area;
    let n = a.len();
    let mut flux = Vec::with_capacity(n + 1);
    flux.push(inflow.min(supply(a[0], f0, vp)?));
    for i in 0..n - 1 {
        flux.push(godunov_flux(a[i], a[i + 1], f0, vp)?);
    }
    // free outflow: the ghost copies the last cell
    flux.push(fd_flow(a[n - 1], f0, vp)?);
    Ok(flux)
}

/// One Godunov step with demand/supply inflow and free outflow.
pub fn lwr_step(
    field: &ScalarField,
    dt: f64,
    inflow: f64,
    dx: f64,
    f0: f64,
    vp: &VesselParams,
) -> Result<ScalarField> {
    let limit = lwr_cfl_dt(field, dx, f0, vp, 1.0);
    if !(dt > 0.0) || dt > limit * (1.0 + 1e-12) {
        return Err(LwrError::Cfl { dt, limit });
    }
    let flux = lwr_fluxes(field, inflow, f0, vp)?;
    let critical = fd_critical_area(f0, vp);
    let area = field
        .area
        .iter()
        .enumerate()
        .map(|(i, a)| {
            let next = a - dt / dx * (flux[i + 1] - flux[i]);
            // the scheme is monotone; only rounding can leave [0, A1]
            next.clamp(0.0, critical)
        })
        .collect();
    Ok(ScalarField { area })
}

/// Advances to `t_end` with CFL-limited steps, the last one clipped.
pub fn lwr_run(
    field: &ScalarField,
    grid: &Grid,
    f0: f64,
    vp: &VesselParams,
    t_end: f64,
    cfl: f64,
    inflow: impl Fn(f64) -> f64,
) -> Result<(ScalarField, usize)> {
    let dx = grid.dx();
    let mut field = field.clone();
    let mut t = 0.0;
    let mut steps = 0;
    while t < t_end {
        let dt = lwr_cfl_dt(&field, dx, f0, vp, cfl).min(t_end - t);
        field = lwr_step(&field, dt, inflow(t), dx, f0, vp)?;
        t = if dt == t_end - t { t_end } else { t + dt };
        steps += 1;
    }
    Ok((field, steps))
}

/// `F0` such that `V = F(A)` holds for the given state (`F0 = u`).
pub fn diagram_offset(area: f64, velocity: f64, vp: &VesselParams) -> f64 {
    velocity + vp.invariant_coefficient() * area.sqrt().sqrt()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConsistencyReport {
    pub f0: f64,
    /// `sum |A_full - A_lwr| dx / (D A0)` at the final time.
    pub l1_difference: f64,
    pub full_steps: usize,
    pub lwr_steps: usize,
}

/// Runs the full model and the scalar reduction from the same initial
/// data and reports the final L1 gap in area.
///
/// The scenario must be frictionless and start on a single diagram
/// `V = F(A)`; `F0` is read off the initial field. The reduction uses the
/// scenario's inflow waveform through the demand/supply limiter.
pub fn reduction_consistency(cfg: &ScenarioConfig) -> Result<ConsistencyReport> {
    let vp = &cfg.vessel;
    if vp.friction != 0.0 {
        return Err(LwrError::Precondition(format!(
            "needs K_r = 0, got {}",
            vp.friction
        )));
    }
    let grid = Grid::new(cfg.n_cells, vp.length).map_err(ScenarioError::from)?;
    let init = initial_field(cfg, &grid)?;
    let f0 = diagram_offset(init.area[0], init.velocity[0], vp);
    for i in 0..init.len() {
        let fi = diagram_offset(init.area[i], init.velocity[i], vp);
        if (fi - f0).abs() > 1e-10 * f0.abs().max(1.0) {
            return Err(LwrError::Precondition(format!(
                "initial data leaves the diagram in cell {i}: F0 = {fi} vs {f0}"
            )));
        }
    }
    let scalar = ScalarField::new(init.area.clone(), f0, vp)?;
    let mut full_cfg = cfg.clone();
    full_cfg.initial = InitialCondition::Cells(init);
    full_cfg.time.snapshot_every = 0.0;
    let full = run(&full_cfg)?;
    let (reduced, lwr_steps) =
        lwr_run(&scalar, &grid, f0, vp, cfg.time.t_end, cfg.time.cfl, |t| {
            cfg.inlet.eval(t)
        })?;
    let end = full.final_field();
    let dx = grid.dx();
    let l1 = end
        .area
        .iter()
        .zip(&reduced.area)
        .map(|(a, b)| (a - b).abs() * dx)
        .sum::<f64>()
        / (vp.length * vp.area0);
    Ok(ConsistencyReport {
        f0,
        l1_difference: l1,
        full_steps: full.steps(),
        lwr_steps,
    })
}
