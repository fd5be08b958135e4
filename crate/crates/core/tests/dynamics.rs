use simvar_core::analysis::{convergence_order, energy_error_series, momentum_error_series, sup_norm};
use simvar_core::baseline::{hamiltonian_field, midpoint_integrate, rk4_integrate};
use simvar_core::elliptic::{nutation_cubic, nutation_period};
use simvar_core::model::{LagrangianModel, PhasePoint};
use simvar_core::simpson::{integrate, StepConfig, Trajectory};
use simvar_core::systems::{preset, Preset};

fn energy_norm(model: &dyn LagrangianModel, points: &[PhasePoint]) -> f64 {
    sup_norm(&energy_error_series(points, model).unwrap()).unwrap()
}

fn pendulum() -> (Preset, PhasePoint) {
    let p = preset("double-pendulum-table1").unwrap();
    let x0 = p.initial_point().unwrap();
    (p, x0)
}

type Integrator = fn(&dyn LagrangianModel, &PhasePoint, f64, f64) -> Trajectory;

fn simpson(m: &dyn LagrangianModel, x0: &PhasePoint, h: f64, t: f64) -> Trajectory {
    integrate(m, x0, h, t, &StepConfig::default()).unwrap()
}

fn midpoint(m: &dyn LagrangianModel, x0: &PhasePoint, h: f64, t: f64) -> Trajectory {
    midpoint_integrate(m, x0, h, t, &StepConfig::default()).unwrap()
}

fn energy_order(method: Integrator, horizon: f64) -> f64 {
    let (p, x0) = pendulum();
    let hs: Vec<f64> = (0..5).map(|k| 0.1 / 2f64.powi(k)).collect();
    let norms: Vec<f64> = hs.iter().map(|&h| energy_norm(&p.system, &method(&p.system, &x0, h, horizon).points)).collect();
    convergence_order(&hs, &norms).unwrap().slope.unwrap()
}

#[test]
fn energy_orders_hold_over_longer_runs() {
    for horizon in [1.0, 10.0, 100.0] {
        let s = energy_order(simpson, horizon);
        let m = energy_order(midpoint, horizon);
        assert!((s - 4.0).abs() <= 0.5, "Simpson slope {s} at T = {horizon}");
        assert!((m - 2.0).abs() <= 0.5, "midpoint slope {m} at T = {horizon}");
    }
}

#[test]
fn rk4_energy_error_grows() {
    let (p, x0) = pendulum();
    let y0: Vec<f64> = x0.q.iter().chain(&x0.p).copied().collect();
    let field = hamiltonian_field(&p.system);
    let run = |t: f64| {
        let sol = rk4_integrate(&field, 0.0, &y0, 0.1, t).map_err(|e| e.1).unwrap();
        energy_norm(&p.system, &sol.to_phase_points())
    };
    let (short, long) = (run(1.0), run(10.0));
    assert!(long > short, "{short:e} vs {long:e}");
}

#[test]
fn top_momenta_are_conserved_to_solver_tolerance() {
    let p = preset("lagrange-top-table3").unwrap();
    let top = p.system.as_top().unwrap();
    let period = nutation_period(&nutation_cubic(&top.params, &p.q0, &p.qdot0).unwrap()).unwrap();
    let x0 = p.initial_point().unwrap();
    let cfg = StepConfig::default();
    let h = 0.05 * period;
    for traj in [
        integrate(&p.system, &x0, h, 10.0 * period, &cfg).unwrap(),
        midpoint_integrate(&p.system, &x0, h, 10.0 * period, &cfg).unwrap(),
    ] {
        for k in [0, 2] {
            let drift = traj.points.iter().map(|pt| (pt.p[k] - x0.p[k]).abs()).fold(0.0, f64::max);
            assert!(drift <= 10.0 * cfg.newton.tolerance, "p[{k}] drift {drift:e}");
            let rel = sup_norm(&momentum_error_series(&traj.points, &p.system, k).unwrap()).unwrap();
            assert!(rel <= 1e-10);
        }
    }
}

#[test]
fn pendulum_preset_row_count() {
    let (p, x0) = pendulum();
    let t = simpson(&p.system, &x0, 0.1, 10.0);
    assert_eq!(t.points.len(), 101);
    for s in &t.stats {
        assert!(s.final_residual_norm <= StepConfig::default().newton.tolerance);
    }
}

#[test]
fn simpson_versus_midpoint_difference_is_second_order() {
    let (p, x0) = pendulum();
    let hs: Vec<f64> = (0..4).map(|k| 0.1 / 2f64.powi(k)).collect();
    let norms: Vec<f64> = hs
        .iter()
        .map(|&h| {
            let a = simpson(&p.system, &x0, h, 1.0);
            let b = midpoint(&p.system, &x0, h, 1.0);
            a.points.iter().zip(&b.points).map(|(x, y)| (x.q[0] - y.q[0]).abs()).fold(0.0, f64::max)
        })
        .collect();
    let slope = convergence_order(&hs, &norms).unwrap().slope.unwrap();
    assert!((slope - 2.0).abs() <= 0.5, "slope {slope}");
}

#[test]
fn time_reversal_on_double_pendulum() {
    let (p, x0) = pendulum();
    let fwd = simpson(&p.system, &x0, 0.01, 1.0);
    let end = fwd.points.last().unwrap();
    let back = PhasePoint::new(0.0, end.q.clone(), end.p.iter().map(|v| -v).collect());
    let ret = simpson(&p.system, &back, 0.01, 1.0);
    let last = ret.points.last().unwrap();
    for i in 0..2 {
        assert!((last.q[i] - x0.q[i]).abs() <= 1e-8);
        assert!((last.p[i] + x0.p[i]).abs() <= 1e-8);
    }
}
