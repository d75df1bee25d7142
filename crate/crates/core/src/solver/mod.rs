//! First-order finite-volume integrator for the interior system in
//! conservative variables `(A, Q = A V)`:
//!
//! ```text
//! A_t + Q_x = 0
//! Q_t + (Q²/A + beta A^(3/2) / (3 rho A0))_x = -K_r Q / A
//! ```
//!
//! Interface fluxes use HLL with Davis wave-speed bounds. Each boundary has
//! one ghost cell built from the Riemann pair (incoming invariant from the
//! closure, outgoing invariant copied from the adjacent cell). Friction is
//! applied after transport by Lie splitting.

use thiserror::Error;

use crate::boundary::{
    solve_inlet, solve_outlet_static, static_residual, step_outlet_dynamic,
    step_outlet_nonreflecting, BoundaryError, OutletState,
};
use crate::model::{
    eigenvalues, from_riemann, to_riemann, FlowState, ModelError, OutletModel, RiemannPair,
    StenosisParams, VesselParams,
};

pub const MIN_CELLS: usize = 16;
pub const DEFAULT_CFL: f64 = 0.9;
pub const MAX_HALVINGS: u32 = 10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Boundary(#[from] BoundaryError),
    #[error("grid needs at least {MIN_CELLS} cells and a positive length (got {n_cells} cells over {length})")]
    InvalidGrid { n_cells: usize, length: f64 },
    #[error("CFL number must lie in (0, 1], got {0}")]
    InvalidCfl(f64),
    #[error("non-finite wave speed in cell {0}")]
    NonFiniteSpeed(usize),
    #[error("area lost positivity in cell {cell} after {halvings} dt halvings")]
    Positivity { cell: usize, halvings: u32 },
    #[error("{count} cells reached lambda_2 >= 0 at t = {t} (min lambda_2 = {min_lambda2}) with strict_subcritical set")]
    RegimeViolation {
        t: f64,
        count: usize,
        min_lambda2: f64,
    },
    #[error("field length {got} does not match grid of {expected} cells")]
    FieldSize { expected: usize, got: usize },
    #[error("{0}")]
    Setup(String),
}

pub type Result<T> = std::result::Result<T, SolverError>;

/// Uniform cell-centred grid on `[0, D]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    n_cells: usize,
    dx: f64,
}

impl Grid {
    pub fn new(n_cells: usize, length: f64) -> Result<Self> {
        if n_cells < MIN_CELLS || !(length > 0.0) || !length.is_finite() {
            return Err(SolverError::InvalidGrid { n_cells, length });
        }
        Ok(Self {
            n_cells,
            dx: length / n_cells as f64,
        })
    }

    pub fn n_cells(&self) -> usize {
        self.n_cells
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn length(&self) -> f64 {
        self.dx * self.n_cells as f64
    }

    pub fn center(&self, i: usize) -> f64 {
        (i as f64 + 0.5) * self.dx
    }

    pub fn centers(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_cells).map(|i| self.center(i))
    }
}

/// Cell averages in primitive variables.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowField {
    pub area: Vec<f64>,
    pub velocity: Vec<f64>,
}

/// Cell averages in conservative variables.
#[derive(Debug, Clone, PartialEq)]
pub struct ConservedField {
    pub area: Vec<f64>,
    pub flow: Vec<f64>,
}

impl FlowField {
    pub fn uniform(n: usize, area: f64, velocity: f64) -> Self {
        Self {
            area: vec![area; n],
            velocity: vec![velocity; n],
        }
    }

    pub fn len(&self) -> usize {
        self.area.len()
    }

    pub fn is_empty(&self) -> bool {
        self.area.is_empty()
    }

    pub fn state(&self, i: usize) -> FlowState {
        FlowState {
            area: self.area[i],
            velocity: self.velocity[i],
        }
    }

    pub fn to_conserved(&self) -> Result<ConservedField> {
        if let Some(&a) = self.area.iter().find(|a| !(**a > 0.0)) {
            return Err(ModelError::NonPositiveArea(a).into());
        }
        Ok(ConservedField {
            area: self.area.clone(),
            flow: self
                .area
                .iter()
                .zip(&self.velocity)
                .map(|(a, v)| a * v)
                .collect(),
        })
    }
}

impl ConservedField {
    pub fn len(&self) -> usize {
        self.area.len()
    }

    pub fn is_empty(&self) -> bool {
        self.area.is_empty()
    }

    pub fn state(&self, i: usize) -> FlowState {
        FlowState {
            area: self.area[i],
            velocity: self.flow[i] / self.area[i],
        }
    }

    pub fn to_flow(&self) -> Result<FlowField> {
        if let Some(&a) = self.area.iter().find(|a| !(**a > 0.0)) {
            return Err(ModelError::NonPositiveArea(a).into());
        }
        Ok(FlowField {
            area: self.area.clone(),
            velocity: self
                .flow
                .iter()
                .zip(&self.area)
                .map(|(q, a)| q / a)
                .collect(),
        })
    }

    /// `sum A_i dx`.
    pub fn volume(&self, dx: f64) -> f64 {
        self.area.iter().sum::<f64>() * dx
    }
}

/// Conservative flux `(Q, Q²/A + beta A^(3/2) / (3 rho A0))`.
pub fn physical_flux(area: f64, flow: f64, vp: &VesselParams) -> [f64; 2] {
    let pressure_integral = vp.beta * area * area.sqrt() / (3.0 * vp.density * vp.area0);
    [flow, flow * flow / area + pressure_integral]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HllBranch {
    Left,
    Middle,
    Right,
}

/// HLL flux with the branch it took.
pub fn hll_flux(left: (f64, f64), right: (f64, f64), vp: &VesselParams) -> ([f64; 2], HllBranch) {
    let (al, ql) = left;
    let (ar, qr) = right;
    let (l1l, l2l) = eigenvalues(
        &FlowState {
            area: al,
            velocity: ql / al,
        },
        vp,
    );
    let (l1r, l2r) = eigenvalues(
        &FlowState {
            area: ar,
            velocity: qr / ar,
        },
        vp,
    );
    let sl = l2l.min(l2r);
    let sr = l1l.max(l1r);
    let fl = physical_flux(al, ql, vp);
    if sl >= 0.0 {
        return (fl, HllBranch::Left);
    }
    let fr = physical_flux(ar, qr, vp);
    if sr <= 0.0 {
        return (fr, HllBranch::Right);
    }
    let inv = 1.0 / (sr - sl);
    let ul = [al, ql];
    let ur = [ar, qr];
    let mut f = [0.0; 2];
    for k in 0..2 {
        f[k] = (sr * fl[k] - sl * fr[k] + sl * sr * (ur[k] - ul[k])) * inv;
    }
    (f, HllBranch::Middle)
}

pub fn numerical_flux(left: (f64, f64), right: (f64, f64), vp: &VesselParams) -> [f64; 2] {
    hll_flux(left, right, vp).0
}

/// Largest stable step: `cfl dx / max_i max(|lambda_1|, |lambda_2|)`.
pub fn cfl_dt(field: &ConservedField, grid: &Grid, vp: &VesselParams, cfl: f64) -> Result<f64> {
    if !(cfl > 0.0 && cfl <= 1.0) {
        return Err(SolverError::InvalidCfl(cfl));
    }
    let mut max_speed: f64 = 0.0;
    for i in 0..field.len() {
        let (l1, l2) = eigenvalues(&field.state(i), vp);
        let s = l1.abs().max(l2.abs());
        if !s.is_finite() {
            return Err(SolverError::NonFiniteSpeed(i));
        }
        max_speed = max_speed.max(s);
    }
    if max_speed == 0.0 {
        return Err(SolverError::NonFiniteSpeed(0));
    }
    Ok(cfl * grid.dx() / max_speed)
}

/// Interior transport with given ghost states. Returns the updated field
/// and the `N + 1` interface fluxes.
pub fn transport(
    field: &ConservedField,
    ghost_left: (f64, f64),
    ghost_right: (f64, f64),
    dt: f64,
    dx: f64,
    vp: &VesselParams,
) -> (ConservedField, Vec<[f64; 2]>) {
    let n = field.len();
    let cell = |i: usize| (field.area[i], field.flow[i]);
    let mut fluxes = Vec::with_capacity(n + 1);
    fluxes.push(numerical_flux(ghost_left, cell(0), vp));
    for i in 1..n {
        fluxes.push(numerical_flux(cell(i - 1), cell(i), vp));
    }
    fluxes.push(numerical_flux(cell(n - 1), ghost_right, vp));
    let r = dt / dx;
    let mut out = field.clone();
    for i in 0..n {
        out.area[i] -= r * (fluxes[i + 1][0] - fluxes[i][0]);
        out.flow[i] -= r * (fluxes[i + 1][1] - fluxes[i][1]);
    }
    (out, fluxes)
}

/// Static parameters of a simulation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    pub vessel: VesselParams,
    /// Required for the static and dynamic outlets.
    pub stenosis: Option<StenosisParams>,
    pub outlet: OutletModel,
    pub grid: Grid,
    pub cfl: f64,
    pub strict_subcritical: bool,
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        self.vessel.validate()?;
        if !(self.cfl > 0.0 && self.cfl <= 1.0) {
            return Err(SolverError::InvalidCfl(self.cfl));
        }
        if (self.grid.length() - self.vessel.length).abs() > 1e-12 * self.vessel.length {
            return Err(SolverError::Setup(
                "grid length differs from vessel length D".into(),
            ));
        }
        if self.outlet != OutletModel::NonReflecting {
            let sp = self.stenosis.ok_or_else(|| {
                SolverError::Setup(format!(
                    "{} outlet needs stenosis parameters",
                    self.outlet.name()
                ))
            })?;
            let sp = StenosisParams {
                outlet_model: self.outlet,
                ..sp
            };
            sp.validate(&self.vessel)?;
            if self.outlet == OutletModel::Static && sp.is_degenerate_static(&self.vessel) {
                return Err(SolverError::Setup(
                    "static outlet with A_s = A0, R_T = 0 and L_s = 0 determines nothing".into(),
                ));
            }
        }
        Ok(())
    }

    fn stenosis(&self) -> Result<StenosisParams> {
        self.stenosis.ok_or_else(|| {
            SolverError::Setup(format!(
                "{} outlet needs stenosis parameters",
                self.outlet.name()
            ))
        })
    }
}

/// Evolving state of one simulation instance.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverState {
    pub t: f64,
    pub field: ConservedField,
    pub outlet: OutletState,
    /// Previous inlet forward invariant, seeds the next inlet solve.
    pub inlet_guess: f64,
}

impl SolverState {
    /// Initial state with the outlet closure seeded from the last cell
    /// (`X(0) = V` there for the dynamic outlet).
    pub fn new(field: FlowField, cfg: &SolverConfig) -> Result<Self> {
        if field.len() != cfg.grid.n_cells() {
            return Err(SolverError::FieldSize {
                expected: cfg.grid.n_cells(),
                got: field.len(),
            });
        }
        let field = field.to_conserved()?;
        let n = field.len();
        let last = to_riemann(&field.state(n - 1), &cfg.vessel);
        let outlet = match cfg.outlet {
            OutletModel::Static => OutletState::Static { v: last.v },
            OutletModel::Dynamic => OutletState::Dynamic {
                x: field.state(n - 1).velocity,
            },
            OutletModel::NonReflecting => OutletState::NonReflecting { v: last.v },
        };
        let inlet_guess = to_riemann(&field.state(0), &cfg.vessel).u;
        Ok(Self {
            t: 0.0,
            field,
            outlet,
            inlet_guess,
        })
    }
}

/// Boundary Riemann pairs at the current time level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryTrace {
    pub inlet: RiemannPair,
    pub outlet: RiemannPair,
    /// Stenosis speed state, dynamic outlet only.
    pub x: Option<f64>,
    /// `G(u_D, v_D)`, stenosed outlets only.
    pub residual: Option<f64>,
    pub inlet_iterations: usize,
    pub outlet_iterations: usize,
}

/// Inlet closure: `v` from the first cell, `u` from `g(u, v) = Q_in`.
pub fn inlet_pair(
    state: &SolverState,
    q_in: f64,
    cfg: &SolverConfig,
) -> Result<(RiemannPair, usize)> {
    let v0 = to_riemann(&state.field.state(0), &cfg.vessel).v;
    let sol = solve_inlet(v0, q_in, &cfg.vessel, state.inlet_guess)?;
    Ok((RiemannPair::new(sol.value, v0), sol.iterations))
}

/// Outlet pair at the current time level together with the outlet state
/// after `dt` (for the dynamic outlet the pair already uses `X(t + dt)`).
fn outlet_update(
    state: &SolverState,
    dt: Option<f64>,
    cfg: &SolverConfig,
) -> Result<(RiemannPair, OutletState, usize)> {
    let n = state.field.len();
    let u_d = to_riemann(&state.field.state(n - 1), &cfg.vessel).u;
    let vp = &cfg.vessel;
    Ok(match state.outlet {
        OutletState::Static { v } => {
            let sol =
                solve_outlet_static(u_d, &cfg.stenosis()?, vp, v.min(u_d - boundary_gap(u_d, v)))?;
            (
                RiemannPair::new(u_d, sol.value),
                OutletState::Static { v: sol.value },
                sol.iterations,
            )
        }
        OutletState::Dynamic { x } => match dt {
            Some(dt) => {
                let step = step_outlet_dynamic(x, u_d, dt, &cfg.stenosis()?, vp)?;
                (
                    RiemannPair::new(u_d, step.v),
                    OutletState::Dynamic { x: step.x },
                    step.substeps,
                )
            }
            None => (RiemannPair::new(u_d, 2.0 * x - u_d), state.outlet, 0),
        },
        OutletState::NonReflecting { v } => {
            let pair = RiemannPair::new(u_d, v);
            let next = match dt {
                Some(dt) => step_outlet_nonreflecting(&pair, dt, vp)?,
                None => v,
            };
            (pair, OutletState::NonReflecting { v: next }, 0)
        }
    })
}

// keeps a stale static guess strictly below u_D
fn boundary_gap(u_d: f64, v: f64) -> f64 {
    1e-3 * (u_d - v).abs().max(1e-6)
}

/// Boundary pairs at the state's current time without advancing anything.
pub fn probe_boundaries(
    state: &SolverState,
    q_in: f64,
    cfg: &SolverConfig,
) -> Result<BoundaryTrace> {
    let (inlet, inlet_iterations) = inlet_pair(state, q_in, cfg)?;
    let (outlet, _, outlet_iterations) = outlet_update(state, None, cfg)?;
    Ok(trace(
        inlet,
        outlet,
        state.outlet,
        inlet_iterations,
        outlet_iterations,
        cfg,
    ))
}

fn trace(
    inlet: RiemannPair,
    outlet: RiemannPair,
    outlet_state: OutletState,
    inlet_iterations: usize,
    outlet_iterations: usize,
    cfg: &SolverConfig,
) -> BoundaryTrace {
    let residual = match (cfg.outlet, cfg.stenosis) {
        (OutletModel::Static | OutletModel::Dynamic, Some(sp)) => {
            static_residual(&outlet, &sp, &cfg.vessel).ok()
        }
        _ => None,
    };
    let x = match outlet_state {
        OutletState::Dynamic { x } => Some(x),
        _ => None,
    };
    BoundaryTrace {
        inlet,
        outlet,
        x,
        residual,
        inlet_iterations,
        outlet_iterations,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepDiagnostics {
    pub dt: f64,
    /// `dt max|lambda| / dx` over the pre-step field.
    pub max_cfl: f64,
    /// Smallest `lambda_bar_2` over the post-step field.
    pub min_lambda2: f64,
    /// Fraction of cells with `lambda_bar_2 >= 0` after the step.
    pub supercritical_fraction: f64,
    /// `(V' - V - dt (F_in - F_out)) / V` with `V = sum A dx`.
    pub mass_residual: f64,
    pub inlet_iterations: usize,
    pub outlet_iterations: usize,
    pub halvings: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    pub state: SolverState,
    pub diagnostics: StepDiagnostics,
    pub boundary: BoundaryTrace,
    /// Mass flux through the inlet and outlet interfaces.
    pub boundary_mass_flux: (f64, f64),
}

fn retryable(e: &SolverError) -> bool {
    matches!(
        e,
        SolverError::Positivity { .. }
            | SolverError::Model(_)
            | SolverError::Boundary(BoundaryError::Solve { .. } | BoundaryError::Model(_))
    )
}

/// One explicit step of at most `dt`, halving on positivity or boundary
/// solve failures up to [`MAX_HALVINGS`] times.
pub fn step(state: &SolverState, dt: f64, q_in: f64, cfg: &SolverConfig) -> Result<StepOutcome> {
    let mut dt = dt;
    let mut halvings = 0;
    loop {
        match try_step(state, dt, q_in, cfg, halvings) {
            Ok(out) => return Ok(out),
            Err(e) if retryable(&e) && halvings < MAX_HALVINGS => {
                halvings += 1;
                dt *= 0.5;
            }
            Err(SolverError::Positivity { cell, .. }) => {
                return Err(SolverError::Positivity { cell, halvings })
            }
            Err(e) => return Err(e),
        }
    }
}

fn try_step(
    state: &SolverState,
    dt: f64,
    q_in: f64,
    cfg: &SolverConfig,
    halvings: u32,
) -> Result<StepOutcome> {
    let vp = &cfg.vessel;
    let dx = cfg.grid.dx();
    let field = &state.field;
    let n = field.len();

    let (inlet, inlet_iterations) = inlet_pair(state, q_in, cfg)?;
    let (outlet, outlet_state, outlet_iterations) = outlet_update(state, Some(dt), cfg)?;
    let gl = from_riemann(&inlet, vp)?;
    let gr = from_riemann(&outlet, vp)?;

    let mut max_speed: f64 = 0.0;
    for i in 0..n {
        let (l1, l2) = eigenvalues(&field.state(i), vp);
        max_speed = max_speed.max(l1.abs()).max(l2.abs());
    }

    let (mut next, fluxes) = transport(
        field,
        (gl.area, gl.flow()),
        (gr.area, gr.flow()),
        dt,
        dx,
        vp,
    );
    if let Some(cell) = next.area.iter().position(|a| !(*a > 0.0) || !a.is_finite()) {
        return Err(SolverError::Positivity { cell, halvings });
    }
    if vp.friction > 0.0 {
        for i in 0..n {
            next.flow[i] -= dt * vp.friction * next.flow[i] / next.area[i];
        }
    }
    if let Some(cell) = next.flow.iter().position(|q| !q.is_finite()) {
        return Err(SolverError::Positivity { cell, halvings });
    }

    let t = state.t + dt;
    let mut min_lambda2 = f64::INFINITY;
    let mut critical = 0;
    for i in 0..n {
        let (_, l2) = eigenvalues(&next.state(i), vp);
        min_lambda2 = min_lambda2.min(l2);
        if l2 >= 0.0 {
            critical += 1;
        }
    }
    if cfg.strict_subcritical && critical > 0 {
        return Err(SolverError::RegimeViolation {
            t,
            count: critical,
            min_lambda2,
        });
    }

    let before = field.volume(dx);
    let after = next.volume(dx);
    let (f_in, f_out) = (fluxes[0][0], fluxes[n][0]);
    let mass_residual = (after - before - dt * (f_in - f_out)) / before;

    let boundary = trace(
        inlet,
        outlet,
        state.outlet,
        inlet_iterations,
        outlet_iterations,
        cfg,
    );
    Ok(StepOutcome {
        state: SolverState {
            t,
            field: next,
            outlet: outlet_state,
            inlet_guess: inlet.u,
        },
        diagnostics: StepDiagnostics {
            dt,
            max_cfl: dt * max_speed / dx,
            min_lambda2,
            supercritical_fraction: critical as f64 / n as f64,
            mass_residual,
            inlet_iterations,
            outlet_iterations,
            halvings,
        },
        boundary,
        boundary_mass_flux: (f_in, f_out),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_cfg(n: usize, outlet: OutletModel) -> SolverConfig {
        SolverConfig {
            vessel: VesselParams::unit(),
            stenosis: None,
            outlet,
            grid: Grid::new(n, 1.0).unwrap(),
            cfl: DEFAULT_CFL,
            strict_subcritical: true,
        }
    }

    #[test]
    fn conservative_round_trip() {
        let f = FlowField {
            area: vec![1.0, 2.0, 0.3],
            velocity: vec![0.0, 3.0, -0.7],
        };
        let c = f.to_conserved().unwrap();
        assert_eq!(c.flow[0], 0.0);
        assert_eq!(c.flow[1], 6.0);
        let back = c.to_flow().unwrap();
        for i in 0..3 {
            assert!(
                (back.velocity[i] - f.velocity[i]).abs() <= 1e-14 * f.velocity[i].abs().max(1.0)
            );
        }
        let bad = FlowField {
            area: vec![1.0, 0.0],
            velocity: vec![0.0, 0.0],
        };
        assert!(bad.to_conserved().is_err());
    }

    #[test]
    fn flux_examples() {
        let vp = VesselParams::unit();
        let f = physical_flux(1.0, 0.0, &vp);
        assert_eq!(f[0], 0.0);
        assert!((f[1] - 1.0 / 3.0).abs() < 1e-15);
        let f = physical_flux(2.0, 4.0, &vp);
        let advective = f[1] - physical_flux(2.0, 0.0, &vp)[1];
        assert!((advective - 8.0).abs() < 1e-14);
    }

    #[test]
    fn pressure_integral_derivative() {
        // d/dA [beta A^(3/2) / (3 rho A0)] = (A / rho) dP/dA, checked by central differences
        let vp = VesselParams::new(2.3, 0.7, 1.4, 0.0, 1.0).unwrap();
        for a in [0.2, 0.7, 1.9] {
            let h = 1e-6 * a;
            let lhs =
                (physical_flux(a + h, 0.0, &vp)[1] - physical_flux(a - h, 0.0, &vp)[1]) / (2.0 * h);
            let dp = (crate::model::pressure(a + h, &vp).unwrap()
                - crate::model::pressure(a - h, &vp).unwrap())
                / (2.0 * h);
            assert!((lhs - a / vp.density * dp).abs() < 1e-8);
        }
    }

    #[test]
    fn hll_consistency_and_branch() {
        let vp = VesselParams::unit();
        let s = (1.2, 0.3);
        let (f, branch) = hll_flux(s, s, &vp);
        let p = physical_flux(s.0, s.1, &vp);
        assert_eq!(branch, HllBranch::Middle);
        assert!((f[0] - p[0]).abs() < 1e-15 && (f[1] - p[1]).abs() < 1e-15);
        // supersonic to the right
        let fast = (1.0, 3.0);
        assert_eq!(hll_flux(fast, fast, &vp).1, HllBranch::Left);
        let back = (1.0, -3.0);
        assert_eq!(hll_flux(back, back, &vp).1, HllBranch::Right);
    }

    #[test]
    fn cfl_examples() {
        let vp = VesselParams::unit();
        let field = FlowField::uniform(100, 1.0, 0.0).to_conserved().unwrap();
        let g = Grid::new(100, 1.0).unwrap();
        let dt = cfl_dt(&field, &g, &vp, 0.9).unwrap();
        assert!((dt - 0.9 * 0.01 / 0.5f64.sqrt()).abs() < 1e-15);
        assert!((dt - 0.012728).abs() < 1e-6);
        let g2 = Grid::new(100, 2.0).unwrap();
        assert!((cfl_dt(&field, &g2, &vp, 0.9).unwrap() - 2.0 * dt).abs() < 1e-15);
        assert!(matches!(
            cfl_dt(&field, &g, &vp, 0.0),
            Err(SolverError::InvalidCfl(_))
        ));
        assert!(cfl_dt(&field, &g, &vp, 1.5).is_err());
    }

    #[test]
    fn grid_validation() {
        assert!(Grid::new(8, 1.0).is_err());
        assert!(Grid::new(16, 0.0).is_err());
        let g = Grid::new(16, 2.0).unwrap();
        assert!((g.center(0) - 0.0625).abs() < 1e-15);
    }

    #[test]
    fn flat_state_is_preserved() {
        let cfg = unit_cfg(64, OutletModel::NonReflecting);
        let (a, v) = (1.0, 0.2);
        let state = SolverState::new(FlowField::uniform(64, a, v), &cfg).unwrap();
        let dt = cfl_dt(&state.field, &cfg.grid, &cfg.vessel, cfg.cfl).unwrap();
        let out = step(&state, dt, a * v, &cfg).unwrap();
        for i in 0..64 {
            assert!((out.state.field.area[i] - a).abs() <= 1e-12);
            assert!((out.state.field.flow[i] - a * v).abs() <= 1e-12);
        }
        assert!(out.diagnostics.mass_residual.abs() <= 1e-14);
    }

    #[test]
    fn strict_guard_trips_on_supercritical_cells() {
        let cfg = unit_cfg(32, OutletModel::NonReflecting);
        let mut field = FlowField::uniform(32, 1.0, 0.1);
        for v in field.velocity[10..20].iter_mut() {
            *v = 1.5;
        }
        let state = SolverState::new(field.clone(), &cfg).unwrap();
        let dt = cfl_dt(&state.field, &cfg.grid, &cfg.vessel, cfg.cfl).unwrap();
        assert!(matches!(
            step(&state, dt, 0.1, &cfg),
            Err(SolverError::RegimeViolation { .. })
        ));
        let relaxed = SolverConfig {
            strict_subcritical: false,
            ..cfg
        };
        let out = step(&state, dt, 0.1, &relaxed).unwrap();
        assert!(out.diagnostics.supercritical_fraction > 0.0);
    }

    #[test]
    fn degenerate_static_closure_rejected() {
        let mut cfg = unit_cfg(32, OutletModel::Static);
        cfg.stenosis = Some(StenosisParams {
            loss_coefficient: 1.0,
            area: 1.0,
            length: 0.0,
            terminal_resistance: 0.0,
            viscosity: 0.004,
            outlet_model: OutletModel::Static,
        });
        assert!(cfg.validate().is_err());
        cfg.stenosis.as_mut().unwrap().terminal_resistance = 0.5;
        assert!(cfg.validate().is_ok());
    }
}
