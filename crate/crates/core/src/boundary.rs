//! Inlet and outlet closures in Riemann variables.
//!
//! Every closure takes the invariant leaving the domain (extrapolated
//! from the interior) and returns the one entering it:
//!
//! * inlet: prescribed flow `g(u, v) = Q_in`, solved for `u`;
//! * static stenosis: `G(u, v) = 0`, solved for `v`;
//! * dynamic stenosis: `v = 2X - u` with `X' = G(u, 2X - u) / (32 rho L_s)`;
//! * non-reflecting: `v_t = f1(u, v)` at the outlet.
//!
//! `G` is 32 times the residual of the physical static relation
//!
//! ```text
//! P(A) - (R_T + 8 pi mu L_s / A_s²) A V - V² (K_s rho / 2) (A / A_s - 1)² = 0
//! ```
//!
//! and `G / (32 rho L_s)` is exactly the right-hand side of the
//! stenosis speed ODE, which is why the dynamic closure's steady states
//! are the static closure's roots.

use thiserror::Error;

use crate::model::{
    char_speeds, friction_source, from_riemann, inlet_flux, pressure, FlowState, ModelError,
    RiemannPair, StenosisParams, VesselParams, DEFAULT_GAP_FLOOR,
};
use crate::roots::{expand_bracket, safeguarded_newton, RootError};

/// Ratio between `G(u, v)` and the physical static residual.
pub const STATIC_RESIDUAL_SCALE: f64 = 32.0;

/// Relative residual tolerance for the boundary root solves.
pub const SOLVE_RTOL: f64 = 1e-10;

/// Explicit-Euler sub-cycling threshold on `dt · |dX'/dX|`.
pub const DYNAMIC_STIFFNESS_LIMIT: f64 = 0.5;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BoundaryError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("{side} solve failed: {source}")]
    Solve {
        side: &'static str,
        #[source]
        source: RootError,
    },
    #[error("{side} boundary state left the subcritical region (lambda_2 = {lambda2})")]
    Regime { side: &'static str, lambda2: f64 },
    #[error("{0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, BoundaryError>;

/// Which static pressure-drop relation applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PressureDropModel {
    ZeroLength,
    FiniteLength,
}

impl PressureDropModel {
    /// Zero-length when `L_s = 0`, otherwise the relation with the viscous term.
    pub fn for_stenosis(sp: &StenosisParams) -> Self {
        if sp.length > 0.0 {
            Self::FiniteLength
        } else {
            Self::ZeroLength
        }
    }
}

/// Pressure drop across the stenosis.
pub fn pressure_drop(
    area: f64,
    velocity: f64,
    sp: &StenosisParams,
    vp: &VesselParams,
    model: PressureDropModel,
) -> Result<f64> {
    if !(area > 0.0) {
        return Err(ModelError::NonPositiveArea(area).into());
    }
    let mismatch = area / sp.area - 1.0;
    let inertial =
        velocity * velocity * 0.5 * sp.loss_coefficient * vp.density * mismatch * mismatch;
    Ok(match model {
        PressureDropModel::ZeroLength => inertial,
        PressureDropModel::FiniteLength => {
            if !(sp.length > 0.0) {
                return Err(BoundaryError::Config(
                    "finite-length pressure drop requires L_s > 0".into(),
                ));
            }
            inertial + sp.viscous_resistance() * area * velocity
        }
    })
}

/// Residual of the static outlet relation in physical variables.
pub fn physical_static_residual(
    s: &FlowState,
    sp: &StenosisParams,
    vp: &VesselParams,
) -> Result<f64> {
    let model = PressureDropModel::for_stenosis(sp);
    let drop = pressure_drop(s.area, s.velocity, sp, vp, model)?;
    Ok(pressure(s.area, vp)? - sp.terminal_resistance * s.flow() - drop)
}

/// Right-hand side of the stenosis speed ODE in physical variables.
pub fn physical_dynamic_rate(s: &FlowState, sp: &StenosisParams, vp: &VesselParams) -> Result<f64> {
    let mismatch = s.area / sp.area - 1.0;
    let rho = vp.density;
    let pi = std::f64::consts::PI;
    Ok(
        vp.beta / (rho * vp.area0 * sp.length) * (s.area.sqrt() - vp.area0.sqrt())
            - mismatch * mismatch * sp.loss_coefficient / (2.0 * sp.length)
                * s.velocity
                * s.velocity
            - (8.0 * pi * sp.viscosity / (rho * sp.area * sp.area)
                + sp.terminal_resistance / (rho * sp.length))
                * s.area
                * s.velocity,
    )
}

struct StaticCoefficients {
    rho: f64,
    offset: f64,
    d1: f64,
    d2: f64,
    ks: f64,
}

impl StaticCoefficients {
    fn new(sp: &StenosisParams, vp: &VesselParams) -> Self {
        let f = vp.inverse_factor();
        Self {
            rho: vp.density,
            offset: 32.0 * vp.beta / vp.area0.sqrt(),
            d1: (sp.terminal_resistance + sp.viscous_resistance()) * f / 64.0,
            d2: f / (1024.0 * sp.area),
            ks: sp.loss_coefficient,
        }
    }

    /// `(G, dG/du, dG/dv)`.
    fn eval(&self, u: f64, v: f64) -> (f64, f64, f64) {
        let w = u - v;
        let s = u + v;
        let w2 = w * w;
        let w3 = w2 * w;
        let w4 = w2 * w2;
        let m = self.d2 * w4 - 1.0;
        let g = self.rho * w2
            - self.offset
            - self.d1 * w4 * s
            - 4.0 * self.ks * self.rho * s * s * m * m;
        let dg_dw = 2.0 * self.rho * w
            - 4.0 * self.d1 * w3 * s
            - 32.0 * self.ks * self.rho * s * s * m * self.d2 * w3;
        let dg_ds = -self.d1 * w4 - 8.0 * self.ks * self.rho * s * m * m;
        (g, dg_dw + dg_ds, dg_ds - dg_dw)
    }

    fn scale(&self, u: f64, v: f64) -> f64 {
        self.offset + self.rho * (u - v) * (u - v)
    }
}

/// Static outlet residual `G(u, v)`.
pub fn static_residual(r: &RiemannPair, sp: &StenosisParams, vp: &VesselParams) -> Result<f64> {
    if !(r.u > r.v) {
        return Err(ModelError::InvariantOrder { u: r.u, v: r.v }.into());
    }
    Ok(StaticCoefficients::new(sp, vp).eval(r.u, r.v).0)
}

/// `dG/dv` at fixed `u`.
pub fn static_residual_dv(r: &RiemannPair, sp: &StenosisParams, vp: &VesselParams) -> f64 {
    StaticCoefficients::new(sp, vp).eval(r.u, r.v).2
}

/// Result of a boundary root solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundarySolve {
    /// The incoming invariant.
    pub value: f64,
    pub residual: f64,
    pub iterations: usize,
}

fn check_subcritical(side: &'static str, r: &RiemannPair) -> Result<()> {
    let (_, l2) = char_speeds(r);
    if l2 < 0.0 {
        Ok(())
    } else {
        Err(BoundaryError::Regime { side, lambda2: l2 })
    }
}

/// Solves `G(u_D, v) = 0` for the incoming invariant, taking the root
/// closest to `guess`.
pub fn solve_outlet_static(
    u_d: f64,
    sp: &StenosisParams,
    vp: &VesselParams,
    guess: f64,
) -> Result<BoundarySolve> {
    const SIDE: &str = "static outlet";
    if !u_d.is_finite() || !(u_d > guess) {
        return Err(ModelError::InvariantOrder { u: u_d, v: guess }.into());
    }
    let c = StaticCoefficients::new(sp, vp);
    let gap = u_d - guess;
    let hi = u_d - DEFAULT_GAP_FLOOR.max(1e-9 * gap);
    let lo = u_d - 16.0 * gap.max(u_d.abs());
    let f = |v: f64| c.eval(u_d, v).0;
    let (a, b) = expand_bracket(&f, guess, lo, hi, 1e-4 * gap)
        .map_err(|source| BoundaryError::Solve { side: SIDE, source })?;
    let x0 = if (a..=b).contains(&guess) {
        guess
    } else {
        0.5 * (a + b)
    };
    let ftol = SOLVE_RTOL * c.scale(u_d, guess);
    let root = safeguarded_newton(
        |v| {
            let (g, _, dv) = c.eval(u_d, v);
            (g, dv)
        },
        a,
        b,
        x0,
        ftol,
    )
    .map_err(|source| BoundaryError::Solve { side: SIDE, source })?;
    check_subcritical(SIDE, &RiemannPair::new(u_d, root.x))?;
    Ok(BoundarySolve {
        value: root.x,
        residual: root.residual,
        iterations: root.iterations,
    })
}

/// `X' = G(u_D, 2X - u_D) / (32 rho L_s)`.
pub fn dynamic_rate(x: f64, u_d: f64, sp: &StenosisParams, vp: &VesselParams) -> f64 {
    StaticCoefficients::new(sp, vp).eval(u_d, 2.0 * x - u_d).0 / (32.0 * vp.density * sp.length)
}

/// Result of advancing the dynamic outlet.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DynamicStep {
    pub x: f64,
    pub v: f64,
    pub substeps: usize,
}

/// Advances the stenosis speed `X` by explicit Euler over `dt` with `u_D`
/// frozen, sub-cycling whenever `h · |dX'/dX|` would exceed the stiffness
/// limit.
pub fn step_outlet_dynamic(
    x: f64,
    u_d: f64,
    dt: f64,
    sp: &StenosisParams,
    vp: &VesselParams,
) -> Result<DynamicStep> {
    const SIDE: &str = "dynamic outlet";
    if !(sp.length > 0.0) {
        return Err(BoundaryError::Config(
            "dynamic outlet requires L_s > 0".into(),
        ));
    }
    if !(dt > 0.0) {
        return Err(BoundaryError::Config(format!(
            "time step must be positive, got {dt}"
        )));
    }
    let c = StaticCoefficients::new(sp, vp);
    let k = 1.0 / (32.0 * vp.density * sp.length);
    let mut x = x;
    let mut remaining = dt;
    let mut substeps = 0;
    while remaining > 0.0 {
        let (g, _, dv) = c.eval(u_d, 2.0 * x - u_d);
        let stiffness = (2.0 * k * dv).abs();
        let h = if remaining * stiffness > DYNAMIC_STIFFNESS_LIMIT {
            DYNAMIC_STIFFNESS_LIMIT / stiffness
        } else {
            remaining
        };
        x += h * k * g;
        remaining -= h;
        substeps += 1;
        if !x.is_finite() || !(u_d > 2.0 * x - u_d) {
            break;
        }
        if substeps > 1_000_000 {
            return Err(BoundaryError::Config(
                "dynamic outlet sub-cycling did not terminate".into(),
            ));
        }
    }
    let v = 2.0 * x - u_d;
    if !x.is_finite() || !(u_d > v) {
        return Err(ModelError::InvariantOrder { u: u_d, v }.into());
    }
    check_subcritical(SIDE, &RiemannPair::new(u_d, v))?;
    Ok(DynamicStep { x, v, substeps })
}

/// One explicit step of `v_t = f1(u, v)` at the outlet.
pub fn step_outlet_nonreflecting(r: &RiemannPair, dt: f64, vp: &VesselParams) -> Result<f64> {
    if !(dt > 0.0) {
        return Err(BoundaryError::Config(format!(
            "time step must be positive, got {dt}"
        )));
    }
    Ok(r.v + dt * friction_source(r, vp)?)
}

/// Solves `g(u, v_0) = Q_in` for the forward invariant entering at the inlet.
pub fn solve_inlet(v0: f64, q_in: f64, vp: &VesselParams, guess: f64) -> Result<BoundarySolve> {
    const SIDE: &str = "inlet";
    if !(q_in > 0.0) || !v0.is_finite() {
        return Err(BoundaryError::Config(format!(
            "inlet flow must be positive, got {q_in}"
        )));
    }
    let lo = (v0 + DEFAULT_GAP_FLOOR).max(-v0);
    let span = 2.0 * (v0.abs() + (guess - v0).abs()) + 1.0;
    let hi = lo + 64.0 * span;
    let f = |u: f64| inlet_flux(&RiemannPair::new(u, v0), vp) - q_in;
    let start = if guess > lo { guess } else { lo + 0.5 * span };
    let (a, b) = expand_bracket(&f, start, lo, hi, 1e-4 * span)
        .map_err(|source| BoundaryError::Solve { side: SIDE, source })?;
    let factor = vp.inverse_factor() / 2048.0;
    // g cancels in u + v near zero flow, so the attainable residual is
    // bounded below by rounding in that sum.
    let w0 = b - v0;
    let rounding = 8.0 * f64::EPSILON * factor * w0.powi(4) * (b.abs() + v0.abs());
    let root = safeguarded_newton(
        |u| {
            let w = u - v0;
            let w3 = w * w * w;
            let g = factor * (u + v0) * w3 * w - q_in;
            // d/du [(u+v) w^4] = w^3 (5u + 3v)
            (g, factor * w3 * (5.0 * u + 3.0 * v0))
        },
        a,
        b,
        start.clamp(a, b),
        SOLVE_RTOL * q_in + rounding,
    )
    .map_err(|source| BoundaryError::Solve { side: SIDE, source })?;
    let pair = RiemannPair::new(root.x, v0);
    from_riemann(&pair, vp)?;
    check_subcritical(SIDE, &pair)?;
    Ok(BoundarySolve {
        value: root.x,
        residual: root.residual,
        iterations: root.iterations,
    })
}

/// Outlet closure state carried between steps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OutletState {
    /// Last accepted `v_D`, used to seed the next root solve.
    Static { v: f64 },
    /// Stenosis speed `X = V(D, t)`.
    Dynamic { x: f64 },
    /// Incoming invariant `v_D`, evolved by the friction source only.
    NonReflecting { v: f64 },
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{to_riemann, OutletModel};
    use crate::roots::bisect;

    fn unit_stenosis() -> StenosisParams {
        StenosisParams {
            loss_coefficient: 1.0,
            area: 0.5,
            length: 0.0,
            terminal_resistance: 1.0,
            viscosity: 0.004,
            outlet_model: OutletModel::Static,
        }
    }

    #[test]
    fn pressure_drop_examples() {
        let vp = VesselParams::unit();
        let mut sp = unit_stenosis();
        sp.length = 0.1;
        let zl = PressureDropModel::ZeroLength;
        let fl = PressureDropModel::FiniteLength;
        assert_eq!(pressure_drop(0.5, 3.0, &sp, &vp, zl).unwrap(), 0.0);
        assert_eq!(pressure_drop(0.8, 0.0, &sp, &vp, zl).unwrap(), 0.0);
        assert!((pressure_drop(1.0, 1.0, &sp, &vp, zl).unwrap() - 0.5).abs() < 1e-15);
        let expected = 0.5 + 8.0 * std::f64::consts::PI * 0.004 * 0.1 / 0.25;
        let total = pressure_drop(1.0, 1.0, &sp, &vp, fl).unwrap();
        assert!((total - expected).abs() < 1e-15);
        assert!((total - 0.5402).abs() < 1e-4);
        sp.length = 0.0;
        assert!(pressure_drop(1.0, 1.0, &sp, &vp, fl).is_err());
    }

    #[test]
    fn residual_is_32_times_physical_relation() {
        let vp = VesselParams::new(2.5, 1.3, 0.9, 0.1, 1.0).unwrap();
        let mut sp = unit_stenosis();
        sp.length = 0.05;
        sp.area = 0.7;
        for (a, v) in [(1.0, 0.2), (1.7, 0.05), (0.9, 0.4), (2.2, -0.1)] {
            let s = FlowState::new(a, v).unwrap();
            let g = static_residual(&to_riemann(&s, &vp), &sp, &vp).unwrap();
            let phys = physical_static_residual(&s, &sp, &vp).unwrap();
            assert!(
                (g - 32.0 * phys).abs() <= 1e-12 * g.abs().max(1.0),
                "{g} vs {phys}"
            );
        }
    }

    #[test]
    fn constructed_root_at_stenosis_area() {
        // A = A_s removes the loss term; R_T chosen so P(A) = R_T A V. The
        // residual does not check A_s <= A0, which this construction needs.
        let vp = VesselParams::new(1.0, 1.0, 1.0, 0.0, 1.0).unwrap();
        let s = FlowState::new(1.44, 0.1).unwrap();
        let sp = StenosisParams {
            area: 1.44,
            terminal_resistance: pressure(1.44, &vp).unwrap() / s.flow(),
            ..unit_stenosis()
        };
        let r = to_riemann(&s, &vp);
        assert!(physical_static_residual(&s, &sp, &vp).unwrap().abs() < 1e-15);
        assert!(static_residual(&r, &sp, &vp).unwrap().abs() < 1e-10);
        let sol = solve_outlet_static(r.u, &sp, &vp, r.v - 0.05).unwrap();
        assert!((sol.value - r.v).abs() < 1e-12);
        assert!(sol.residual <= 1e-10);
    }

    #[test]
    fn analytic_derivative_matches_finite_difference() {
        let vp = VesselParams::unit();
        let sp = StenosisParams {
            length: 0.2,
            ..unit_stenosis()
        };
        let c = StaticCoefficients::new(&sp, &vp);
        let (u, v) = (2.9, -2.7);
        let h = 1e-6;
        let (_, du, dv) = c.eval(u, v);
        let fdu = (c.eval(u + h, v).0 - c.eval(u - h, v).0) / (2.0 * h);
        let fdv = (c.eval(u, v + h).0 - c.eval(u, v - h).0) / (2.0 * h);
        assert!((du - fdu).abs() < 1e-6 * du.abs().max(1.0));
        assert!((dv - fdv).abs() < 1e-6 * dv.abs().max(1.0));
    }

    #[test]
    fn static_solve_matches_bisection() {
        let vp = VesselParams::unit();
        let sp = unit_stenosis();
        let u_d = 2.9;
        let sol = solve_outlet_static(u_d, &sp, &vp, -2.9).unwrap();
        let g = |v: f64| static_residual(&RiemannPair::new(u_d, v), &sp, &vp).unwrap();
        // G has a second root near v = -3.98 (negative speed); bisect on the
        // sub-window around the positive-speed root.
        let reference = bisect(g, -3.5, u_d - 1e-6, 200);
        assert!(
            (sol.value - reference).abs() < 1e-8,
            "{} vs {reference}",
            sol.value
        );
        let s = from_riemann(&RiemannPair::new(u_d, sol.value), &vp).unwrap();
        assert!(s.velocity > 0.0);
    }

    #[test]
    fn static_solve_tends_to_unstenosed_closure() {
        let vp = VesselParams::unit();
        let rt = 1.0;
        let u_d = 2.9;
        // oracle: bisection on the physical relation with A_s = A0 along fixed u_D
        let limit = |ks: f64| {
            move |v: f64| {
                let s = from_riemann(&RiemannPair::new(u_d, v), &vp).unwrap();
                let m = s.area / vp.area0 - 1.0;
                pressure(s.area, &vp).unwrap()
                    - rt * s.flow()
                    - 0.5 * ks * s.velocity * s.velocity * m * m
            }
        };
        let reference = bisect(limit(1.0), -3.5, u_d - 1e-6, 200);
        let mut last = f64::INFINITY;
        for eps in [1e-1, 1e-2, 1e-3, 1e-4] {
            let sp = StenosisParams {
                area: 1.0 - eps,
                terminal_resistance: rt,
                ..unit_stenosis()
            };
            let v = solve_outlet_static(u_d, &sp, &vp, -2.9).unwrap().value;
            let err = (v - reference).abs();
            assert!(err < last);
            last = err;
        }
        assert!(last < 1e-5, "{last}");

        // with a vanishing loss coefficient only the terminal resistance remains
        let reference = bisect(limit(0.0), -3.5, u_d - 1e-6, 200);
        let sp = StenosisParams {
            loss_coefficient: 1e-12,
            area: 1.0 - 1e-4,
            terminal_resistance: rt,
            ..unit_stenosis()
        };
        let v = solve_outlet_static(u_d, &sp, &vp, -2.9).unwrap().value;
        assert!((v - reference).abs() < 1e-10);
    }

    #[test]
    fn static_solve_reports_regime_violation() {
        // Root exists only at supercritical speeds: huge forward invariant.
        let vp = VesselParams::unit();
        let sp = StenosisParams {
            terminal_resistance: 0.0,
            area: 1.0,
            ..unit_stenosis()
        };
        let err = solve_outlet_static(40.0, &sp, &vp, 35.0).unwrap_err();
        assert!(
            matches!(
                err,
                BoundaryError::Regime { .. } | BoundaryError::Solve { .. }
            ),
            "{err}"
        );
    }

    #[test]
    fn dynamic_equilibrium_is_fixed_point() {
        let vp = VesselParams::unit();
        let sp = StenosisParams {
            length: 0.1,
            ..unit_stenosis()
        };
        let u_d = 2.9;
        let v = solve_outlet_static(u_d, &sp, &vp, -2.9).unwrap().value;
        let x = 0.5 * (u_d + v);
        let step = step_outlet_dynamic(x, u_d, 1e-3, &sp, &vp).unwrap();
        assert!((step.x - x).abs() < 1e-12);
        assert!((step.v - v).abs() < 1e-12);
    }

    #[test]
    fn dynamic_step_is_euler_on_physical_ode() {
        let vp = VesselParams::new(1.2, 0.8, 1.1, 0.0, 1.0).unwrap();
        let sp = StenosisParams {
            length: 0.3,
            area: 0.5,
            ..unit_stenosis()
        };
        let s = FlowState::new(0.8, 0.4).unwrap();
        let r = to_riemann(&s, &vp);
        let dt = 1e-4;
        let step = step_outlet_dynamic(s.velocity, r.u, dt, &sp, &vp).unwrap();
        assert_eq!(step.substeps, 1);
        let expected = s.velocity + dt * physical_dynamic_rate(&s, &sp, &vp).unwrap();
        assert!((step.x - expected).abs() < 1e-10);
        assert!((step.v - (2.0 * step.x - r.u)).abs() < 1e-15);
    }

    #[test]
    fn dynamic_rate_scales_with_inverse_length() {
        let vp = VesselParams::unit();
        let s = FlowState::new(1.3, 0.0).unwrap();
        let r = to_riemann(&s, &vp);
        // V = 0 leaves only the pressure-imbalance term
        let base = StenosisParams {
            length: 0.1,
            ..unit_stenosis()
        };
        let long = StenosisParams {
            length: 1.0,
            ..unit_stenosis()
        };
        let a = dynamic_rate(0.0, r.u, &base, &vp);
        let b = dynamic_rate(0.0, r.u, &long, &vp);
        assert!((a / b - 10.0).abs() < 1e-12);
    }

    #[test]
    fn dynamic_subcycles_when_stiff() {
        let vp = VesselParams::unit();
        let sp = StenosisParams {
            length: 1e-4,
            ..unit_stenosis()
        };
        let s = FlowState::new(1.0, 0.2).unwrap();
        let r = to_riemann(&s, &vp);
        let step = step_outlet_dynamic(0.2, r.u, 1e-2, &sp, &vp).unwrap();
        assert!(step.substeps > 1);
        // the stiff ODE relaxes to the static root
        let v_static = solve_outlet_static(r.u, &StenosisParams { length: 1e-4, ..sp }, &vp, r.v)
            .unwrap()
            .value;
        assert!((step.v - v_static).abs() < 1e-6);
    }

    #[test]
    fn dynamic_requires_positive_length() {
        let vp = VesselParams::unit();
        assert!(step_outlet_dynamic(0.1, 2.9, 1e-3, &unit_stenosis(), &vp).is_err());
    }

    #[test]
    fn nonreflecting_examples() {
        let vp = VesselParams::unit();
        let r = RiemannPair::new(3.0, -2.5);
        assert_eq!(step_outlet_nonreflecting(&r, 0.1, &vp).unwrap(), -2.5);
        let vf = VesselParams {
            friction: 0.5,
            ..vp
        };
        let r = RiemannPair::new(2.0, -2.0);
        assert_eq!(step_outlet_nonreflecting(&r, 0.1, &vf).unwrap(), -2.0);
        let r = to_riemann(&FlowState::new(1.0, 1.0).unwrap(), &vf);
        let dt = 0.01;
        let v = step_outlet_nonreflecting(&r, dt, &vf).unwrap();
        assert!((v - (r.v - 0.5 * dt)).abs() < 1e-14);
        assert!(step_outlet_nonreflecting(&r, 0.0, &vf).is_err());
    }

    #[test]
    fn inlet_examples() {
        let vp = VesselParams::unit();
        let s = FlowState::new(1.1, 0.3).unwrap();
        let r = to_riemann(&s, &vp);
        let sol = solve_inlet(r.v, s.flow(), &vp, r.u + 0.3).unwrap();
        assert!((sol.value - r.u).abs() < 1e-12);

        let v0 = -8f64.sqrt();
        let tiny = solve_inlet(v0, 1e-12, &vp, 3.0).unwrap();
        assert!((tiny.value + v0).abs() < 1e-9);

        let sol = solve_inlet(v0, 0.5, &vp, -v0).unwrap();
        let reference = bisect(
            |u| inlet_flux(&RiemannPair::new(u, v0), &vp) - 0.5,
            -v0,
            -v0 + 10.0,
            200,
        );
        assert!((sol.value - reference).abs() < 1e-8);
        assert!((inlet_flux(&RiemannPair::new(sol.value, v0), &vp) - 0.5).abs() <= 1e-10 * 0.5);

        assert!(solve_inlet(v0, 0.0, &vp, 3.0).is_err());
        // more flow than any subcritical state can carry
        assert!(matches!(
            solve_inlet(v0, 10.0, &vp, 3.0),
            Err(BoundaryError::Regime { .. })
        ));
    }
}
