//! Property tests over randomly drawn parameters and states.

use proptest::prelude::*;

use stenoflow::boundary::{solve_inlet, solve_outlet_static, static_residual};
use stenoflow::model::{
    area_from_pressure, eigenvalues, from_riemann, inlet_flux, pressure, to_riemann,
};
use stenoflow::scenario::{
    parse_config, serialize_config, InitialCondition, InletWaveform, ScenarioConfig, TimeConfig,
};
use stenoflow::solver::{
    hll_flux, physical_flux, step, FlowField, Grid, SolverConfig, SolverState,
};
use stenoflow::{FlowState, OutletModel, StenosisParams, VesselParams};

fn vessel() -> impl Strategy<Value = VesselParams> {
    (0.3..3.0f64, 0.3..3.0f64, 0.5..2.0f64, 0.0..0.5f64)
        .prop_map(|(beta, a0, rho, kr)| VesselParams::new(beta, a0, rho, kr, 1.0).unwrap())
}

/// A subcritical state for `vp`, from unit-interval seeds.
fn state(vp: &VesselParams, a: f64, v: f64) -> FlowState {
    let area = vp.area0 * (0.3 + 2.7 * a);
    FlowState::new(area, vp.wave_speed(area) * (1.9 * v - 0.95)).unwrap()
}

fn stenosis(outlet: OutletModel) -> impl Strategy<Value = StenosisParams> {
    (0.1..3.0f64, 0.2..1.0f64, 0.01..0.2f64, 0.1..3.0f64).prop_map(move |(ks, frac, ls, rt)| {
        StenosisParams {
            loss_coefficient: ks,
            area: frac,
            length: ls,
            terminal_resistance: rt,
            viscosity: 0.004,
            outlet_model: outlet,
        }
    })
}

proptest! {
    #[test]
    fn riemann_round_trip(vp in vessel(), a in 0.0..1.0f64, v in 0.0..1.0f64) {
        let s = state(&vp, a, v);
        let back = from_riemann(&to_riemann(&s, &vp), &vp).unwrap();
        prop_assert!((back.area - s.area).abs() <= 1e-12 * s.area);
        prop_assert!((back.velocity - s.velocity).abs() <= 1e-12 * vp.wave_speed(s.area));
    }

    #[test]
    fn pressure_law_inverts(vp in vessel(), a in 0.0..1.0f64) {
        let area = vp.area0 * (0.3 + 2.7 * a);
        let back = area_from_pressure(pressure(area, &vp).unwrap(), &vp).unwrap();
        prop_assert!((back - area).abs() <= 1e-12 * area);
    }

    #[test]
    fn subcritical_states_have_split_eigenvalues(vp in vessel(), a in 0.0..1.0f64, v in 0.0..1.0f64) {
        let (l1, l2) = eigenvalues(&state(&vp, a, v), &vp);
        prop_assert!(l1 > 0.0 && l2 < 0.0);
    }

    #[test]
    fn hll_is_consistent(vp in vessel(), a in 0.0..1.0f64, v in 0.0..1.0f64) {
        let s = state(&vp, a, v);
        let (f, _) = hll_flux((s.area, s.flow()), (s.area, s.flow()), &vp);
        let exact = physical_flux(s.area, s.flow(), &vp);
        for k in 0..2 {
            prop_assert!((f[k] - exact[k]).abs() <= 1e-13 * exact[k].abs().max(1.0));
        }
    }

    #[test]
    fn inlet_solve_recovers_subcritical_state(vp in vessel(), a in 0.0..1.0f64, v in 0.52..1.0f64, g in 0.0..1.0f64) {
        // g is increasing in u wherever lambda_1 > 0, so the root is unique
        let s = state(&vp, a, v);
        let r = to_riemann(&s, &vp);
        let guess = r.u + (g - 0.5) * r.gap();
        let sol = solve_inlet(r.v, s.flow(), &vp, guess).unwrap();
        prop_assert!((sol.value - r.u).abs() <= 1e-9 * r.gap());
        let pair = stenoflow::RiemannPair::new(sol.value, r.v);
        prop_assert!((inlet_flux(&pair, &vp) - s.flow()).abs() <= 1e-9 * s.flow());
    }

    #[test]
    fn static_solve_zeroes_residual(vp in vessel(), sp in stenosis(OutletModel::Static), a in 0.0..1.0f64) {
        let mut sp = sp;
        sp.area *= vp.area0;
        let s = FlowState::new(vp.area0 * (1.0 + a), 0.2 * vp.wave_speed(vp.area0)).unwrap();
        let r = to_riemann(&s, &vp);
        if let Ok(sol) = solve_outlet_static(r.u, &sp, &vp, r.v) {
            let g = static_residual(&stenoflow::RiemannPair::new(r.u, sol.value), &sp, &vp).unwrap();
            prop_assert!(sol.value < r.u);
            prop_assert!(g.abs() <= 1e-9 * (32.0 * vp.beta / vp.area0.sqrt() + vp.density * r.gap() * r.gap()));
        }
    }

    #[test]
    fn step_conserves_mass(
        seeds in prop::collection::vec((0.0..1.0f64, 0.3..0.7f64), 16..48),
        sp in stenosis(OutletModel::Static),
        outlet in prop::sample::select(OutletModel::ALL.to_vec()),
        q in 0.05..0.3f64,
    ) {
        let vp = VesselParams::new(1.0, 1.0, 1.0, 0.1, 1.0).unwrap();
        let n = seeds.len();
        let area: Vec<f64> = seeds.iter().map(|(a, _)| 0.9 + 0.3 * a).collect();
        let velocity = seeds.iter().zip(&area).map(|((_, v), a)| vp.wave_speed(*a) * (v - 0.5)).collect();
        let cfg = SolverConfig {
            vessel: vp,
            stenosis: Some(StenosisParams { outlet_model: outlet, ..sp }),
            outlet,
            grid: Grid::new(n, 1.0).unwrap(),
            cfl: 0.9,
            strict_subcritical: false,
        };
        let st = SolverState::new(FlowField { area, velocity }, &cfg).unwrap();
        let dt = stenoflow::solver::cfl_dt(&st.field, &cfg.grid, &vp, 0.9).unwrap();
        if let Ok(out) = step(&st, dt, q, &cfg) {
            prop_assert!(out.diagnostics.mass_residual.abs() <= 1e-12);
            prop_assert!(out.state.field.area.iter().all(|a| *a > 0.0));
        }
    }

    #[test]
    fn config_round_trips(
        beta in 0.5..2.0f64, kr in 0.0..0.2f64, cells in 16usize..400,
        t_end in 0.1..5.0f64, base in 0.05..0.2f64, amp in 0.0..0.1f64,
        outlet in prop::sample::select(OutletModel::ALL.to_vec()),
    ) {
        let cfg = ScenarioConfig {
            vessel: VesselParams::new(beta, 1.0, 1.0, kr, 1.0).unwrap(),
            stenosis: Some(StenosisParams {
                loss_coefficient: 1.0,
                area: 0.5,
                length: 0.02,
                terminal_resistance: 1.0,
                viscosity: 0.004,
                outlet_model: outlet,
            }),
            n_cells: cells,
            time: TimeConfig { t_end, cfl: 0.8, snapshot_every: 0.1 },
            inlet: InletWaveform::HalfSine { base, amplitude: amp, period: 1.0, systolic_fraction: 0.4 },
            initial: InitialCondition::Pulse { amplitude: 0.02, center: 0.4, width: 0.1 },
            strict_subcritical: true,
        };
        let text = serialize_config(&cfg);
        prop_assert_eq!(parse_config(&text).unwrap(), cfg);
    }
}
