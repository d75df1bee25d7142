//! Closed-form physics of the 1-D arterial segment.
//!
//! The segment obeys
//!
//! ```text
//! A_t + (A V)_x = 0
//! V_t + V V_x + P(A)_x / rho = -K_r V / A
//! P(A) = (beta / A0) (sqrt(A) - sqrt(A0))
//! ```
//!
//! The wall stiffness `beta` is taken as a direct input. Its usual
//! constitutive form is `beta = h E sqrt(pi) b` with wall thickness `h`,
//! Young's modulus `E` and a positive shape factor `b`; none of those
//! appear anywhere else in the model so they are not carried.
//!
//! All relations are dimensional (SI). [`VesselParams::unit`] gives the
//! nondimensional preset `beta = rho = A0 = 1` used throughout the tests.

use thiserror::Error;

/// Default lower bound on `u - v` guarding the quartic denominators.
pub const DEFAULT_GAP_FLOOR: f64 = 1e-9;

/// Default absolute tolerance (speed units) for the critical line.
pub const DEFAULT_CRITICAL_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },
    #[error("section area must be positive, got {0}")]
    NonPositiveArea(f64),
    #[error("Riemann invariants out of order: u = {u} must exceed v = {v}")]
    InvariantOrder { u: f64, v: f64 },
    #[error("invariant gap u - v = {gap} is below the floor {floor}")]
    SingularSource { gap: f64, floor: f64 },
    #[error("area {area} is outside the fundamental diagram range [0, {critical}]")]
    OutsideDiagram { area: f64, critical: f64 },
}

pub type Result<T> = std::result::Result<T, ModelError>;

fn require(name: &'static str, value: f64, ok: bool, reason: &'static str) -> Result<()> {
    if ok && value.is_finite() {
        Ok(())
    } else {
        Err(ModelError::InvalidParameter {
            name,
            value,
            reason,
        })
    }
}

/// Geometry, material and friction constants of the segment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VesselParams {
    /// Wall stiffness coefficient `beta`.
    pub beta: f64,
    /// Reference section area at rest `A0` (m²).
    pub area0: f64,
    /// Blood density (kg/m³).
    pub density: f64,
    /// Friction parameter `K_r` (m²/s).
    pub friction: f64,
    /// Segment length `D` (m).
    pub length: f64,
}

impl VesselParams {
    pub fn new(beta: f64, area0: f64, density: f64, friction: f64, length: f64) -> Result<Self> {
        let p = Self {
            beta,
            area0,
            density,
            friction,
            length,
        };
        p.validate()?;
        Ok(p)
    }

    /// Nondimensional preset `beta = rho = A0 = 1`, frictionless, unit length.
    pub fn unit() -> Self {
        Self {
            beta: 1.0,
            area0: 1.0,
            density: 1.0,
            friction: 0.0,
            length: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        require("beta", self.beta, self.beta > 0.0, "must be > 0")?;
        require("A0", self.area0, self.area0 > 0.0, "must be > 0")?;
        require("rho", self.density, self.density > 0.0, "must be > 0")?;
        require("K_r", self.friction, self.friction >= 0.0, "must be >= 0")?;
        require("D", self.length, self.length > 0.0, "must be > 0")
    }

    /// `sqrt(beta / (2 rho A0))`: wave speed is this times `A^(1/4)`.
    pub fn wave_coefficient(&self) -> f64 {
        (self.beta / (2.0 * self.density * self.area0)).sqrt()
    }

    /// `2 sqrt(2 beta / (rho A0))`: the invariants are `V ± this · A^(1/4)`.
    pub fn invariant_coefficient(&self) -> f64 {
        2.0 * (2.0 * self.beta / (self.density * self.area0)).sqrt()
    }

    /// `rho² A0² / beta²`, the factor shared by the inverse map, `g` and the static residual.
    pub(crate) fn inverse_factor(&self) -> f64 {
        let r = self.density * self.area0 / self.beta;
        r * r
    }

    /// Wave speed `sqrt(beta/(2 rho A0)) A^(1/4)`.
    pub fn wave_speed(&self, area: f64) -> f64 {
        self.wave_coefficient() * area.sqrt().sqrt()
    }
}

/// Which outlet closure is active.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OutletModel {
    Static,
    Dynamic,
    NonReflecting,
}

impl OutletModel {
    pub const ALL: [OutletModel; 3] = [Self::Static, Self::Dynamic, Self::NonReflecting];

    pub fn name(self) -> &'static str {
        match self {
            Self::Static => "static",
            Self::Dynamic => "dynamic",
            Self::NonReflecting => "nonreflecting",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "static" => Some(Self::Static),
            "dynamic" => Some(Self::Dynamic),
            "nonreflecting" | "non-reflecting" | "non_reflecting" => Some(Self::NonReflecting),
            _ => None,
        }
    }
}

/// Stenosis (outlet bottleneck) description.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StenosisParams {
    /// Empirical loss coefficient `K_s`.
    pub loss_coefficient: f64,
    /// Effective stenosis area `A_s` (m²).
    pub area: f64,
    /// Stenosis length `L_s` (m); zero selects the zero-length pressure drop.
    pub length: f64,
    /// Terminal resistance `R_T` (Pa·s/m³).
    pub terminal_resistance: f64,
    /// Blood viscosity `mu` (Pa·s).
    pub viscosity: f64,
    pub outlet_model: OutletModel,
}

impl StenosisParams {
    /// Checks the stenosis invariants against the vessel it sits in.
    ///
    /// Collects every violation instead of stopping at the first one.
    pub fn violations(&self, vessel: &VesselParams) -> Vec<ModelError> {
        let checks = [
            require(
                "K_s",
                self.loss_coefficient,
                self.loss_coefficient > 0.0,
                "must be > 0",
            ),
            require("A_s", self.area, self.area > 0.0, "must be > 0"),
            require("mu", self.viscosity, self.viscosity > 0.0, "must be > 0"),
            require(
                "R_T",
                self.terminal_resistance,
                self.terminal_resistance >= 0.0,
                "must be >= 0",
            ),
            match self.outlet_model {
                OutletModel::Dynamic => require(
                    "L_s",
                    self.length,
                    self.length > 0.0,
                    "must be > 0 for the dynamic outlet",
                ),
                _ => require("L_s", self.length, self.length >= 0.0, "must be >= 0"),
            },
            require(
                "A_s",
                self.area,
                self.area <= vessel.area0,
                "must not exceed A0 (a stenosis cannot widen the vessel)",
            ),
        ];
        checks.into_iter().filter_map(|c| c.err()).collect()
    }

    pub fn validate(&self, vessel: &VesselParams) -> Result<()> {
        match self.violations(vessel).into_iter().next() {
            Some(e) => Err(e),
            None => Ok(()),
        }
    }

    /// The static closure degenerates to `0 = 0` with no stenosis, no
    /// terminal resistance and zero length.
    pub fn is_degenerate_static(&self, vessel: &VesselParams) -> bool {
        self.area == vessel.area0 && self.terminal_resistance == 0.0 && self.length == 0.0
    }

    /// Poiseuille resistance of the stenosed segment, `8 pi mu L_s / A_s²`.
    pub fn viscous_resistance(&self) -> f64 {
        8.0 * std::f64::consts::PI * self.viscosity * self.length / (self.area * self.area)
    }
}

/// Primitive state `(A, V)` at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowState {
    pub area: f64,
    pub velocity: f64,
}

impl FlowState {
    pub fn new(area: f64, velocity: f64) -> Result<Self> {
        if area > 0.0 && area.is_finite() && velocity.is_finite() {
            Ok(Self { area, velocity })
        } else {
            Err(ModelError::NonPositiveArea(area))
        }
    }

    pub fn flow(&self) -> f64 {
        self.area * self.velocity
    }
}

/// Characteristic variables: `u` travels forward, `v` backward.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RiemannPair {
    pub u: f64,
    pub v: f64,
}

impl RiemannPair {
    pub fn new(u: f64, v: f64) -> Self {
        Self { u, v }
    }

    pub fn gap(&self) -> f64 {
        self.u - self.v
    }

    fn ordered(&self) -> Result<()> {
        if self.u > self.v {
            Ok(())
        } else {
            Err(ModelError::InvariantOrder {
                u: self.u,
                v: self.v,
            })
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Regime {
    Subcritical,
    Critical,
    Supercritical,
}

pub fn pressure(area: f64, p: &VesselParams) -> Result<f64> {
    if !(area > 0.0) {
        return Err(ModelError::NonPositiveArea(area));
    }
    Ok(p.beta / p.area0 * (area.sqrt() - p.area0.sqrt()))
}

/// Inverse of [`pressure`]: `A = (A0 y / beta + sqrt(A0))²`.
pub fn area_from_pressure(y: f64, p: &VesselParams) -> Result<f64> {
    let root = p.area0 * y / p.beta + p.area0.sqrt();
    if root > 0.0 {
        Ok(root * root)
    } else {
        Err(ModelError::NonPositiveArea(0.0))
    }
}

/// `(lambda_bar_1, lambda_bar_2)` of the hyperbolic system.
pub fn eigenvalues(s: &FlowState, p: &VesselParams) -> (f64, f64) {
    let c = p.wave_speed(s.area);
    (s.velocity + c, s.velocity - c)
}

pub fn classify_regime(s: &FlowState, p: &VesselParams, tol: f64) -> Regime {
    let (_, l2) = eigenvalues(s, p);
    if l2 < -tol {
        Regime::Subcritical
    } else if l2 > tol {
        Regime::Supercritical
    } else {
        Regime::Critical
    }
}

pub fn to_riemann(s: &FlowState, p: &VesselParams) -> RiemannPair {
    let w = p.invariant_coefficient() * s.area.sqrt().sqrt();
    RiemannPair {
        u: s.velocity + w,
        v: s.velocity - w,
    }
}

pub fn from_riemann(r: &RiemannPair, p: &VesselParams) -> Result<FlowState> {
    r.ordered()?;
    let gap = r.gap();
    let g2 = gap * gap;
    let area = p.inverse_factor() / 1024.0 * g2 * g2;
    if !(area > 0.0) {
        return Err(ModelError::NonPositiveArea(area));
    }
    Ok(FlowState {
        area,
        velocity: 0.5 * (r.u + r.v),
    })
}

/// `(lambda_1, lambda_2)` in Riemann variables.
pub fn char_speeds(r: &RiemannPair) -> (f64, f64) {
    ((5.0 * r.u + 3.0 * r.v) / 8.0, (3.0 * r.u + 5.0 * r.v) / 8.0)
}

/// Friction source `f1(u, v)`, shared by both characteristic equations.
pub fn friction_source(r: &RiemannPair, p: &VesselParams) -> Result<f64> {
    friction_source_with_floor(r, p, DEFAULT_GAP_FLOOR)
}

pub fn friction_source_with_floor(r: &RiemannPair, p: &VesselParams, floor: f64) -> Result<f64> {
    let gap = r.gap();
    if !(gap >= floor) {
        return Err(ModelError::SingularSource { gap, floor });
    }
    let g2 = gap * gap;
    // 4^(9/2) = 512
    Ok(-512.0 * p.friction / p.inverse_factor() * (r.u + r.v) / (g2 * g2))
}

/// Flow `g(u, v) = A V` written in Riemann variables.
pub fn inlet_flux(r: &RiemannPair, p: &VesselParams) -> f64 {
    let g2 = r.gap() * r.gap();
    // 4^(11/2) = 2048
    p.inverse_factor() / 2048.0 * (r.u + r.v) * g2 * g2
}

/// Fundamental-diagram speed `F(A) = F0 - 2 sqrt(2 beta/(rho A0)) A^(1/4)`.
pub fn fd_speed(area: f64, f0: f64, p: &VesselParams) -> f64 {
    f0 - p.invariant_coefficient() * area.max(0.0).sqrt().sqrt()
}

/// Area `A1` at which the diagram speed vanishes.
pub fn fd_critical_area(f0: f64, p: &VesselParams) -> f64 {
    let f2 = f0 * f0;
    f2 * f2 * p.inverse_factor() / 64.0
}

/// Area maximizing `A F(A)`; `(4/5)^4 A1`.
pub fn fd_capacity_area(f0: f64, p: &VesselParams) -> f64 {
    0.4096 * fd_critical_area(f0, p)
}

/// Diagram flow `A F(A)` on `[0, A1]`.
pub fn fd_flow(area: f64, f0: f64, p: &VesselParams) -> Result<f64> {
    let critical = fd_critical_area(f0, p);
    if !(0.0..=critical).contains(&area) {
        return Err(ModelError::OutsideDiagram { area, critical });
    }
    if area == critical {
        return Ok(0.0);
    }
    Ok(area * fd_speed(area, f0, p))
}

/// `dQ/dA = F0 - (5/4) coef A^(1/4)`, which equals `lambda_bar_2` on `u = F0`.
pub fn fd_flow_derivative(area: f64, f0: f64, p: &VesselParams) -> f64 {
    f0 - 1.25 * p.invariant_coefficient() * area.max(0.0).sqrt().sqrt()
}
