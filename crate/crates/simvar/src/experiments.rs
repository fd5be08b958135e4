//! Simulation runs, convergence sweeps, the reduced-system comparison and
//! model validation.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use simvar_core::analysis::{
    convergence_order, cross_method_difference, energy_error_series, momentum_error_series, nutation_error_series,
    sup_norm, ConvergenceReport, ErrorKind, ErrorSeries,
};
use simvar_core::baseline::{
    hamiltonian_field, midpoint_integrate, midpoint_jacobian, midpoint_jacobian_fd, reduced_top_field,
    rk4_integrate, FirstOrderField, MidpointUnknowns, ReducedTopParams,
};
use simvar_core::elliptic::{carlson_rf, exact_nutation, jacobi_sn, nutation_cubic, nutation_period, NutationCubic};
use simvar_core::linalg::{condition_inf, Lu};
use simvar_core::model::{energy, validate_model, LagrangianModel, PhasePoint};
use simvar_core::simpson::{
    block_deviation, integrate, jacobian_analytic, jacobian_fd, IntegrationError, JacobianSource, StepConfig,
    StepStats, StepUnknowns,
};
use simvar_core::systems::{top_conserved_momenta, Preset};

use crate::config::Integrator;
use crate::csv_io::Table;
use crate::error::{AppError, Result};

/// Samples of one run on the uniform grid `t₀ + k·h`.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub points: Vec<PhasePoint>,
    /// Newton statistics per step; empty for RK4.
    pub stats: Vec<StepStats>,
}

/// A run that stopped early, with the samples computed before the failure.
#[derive(Debug, Clone)]
pub struct RunFailure {
    pub step: usize,
    pub cause: simvar_core::Error,
    pub points: Vec<PhasePoint>,
}

impl From<IntegrationError> for RunFailure {
    fn from(e: IntegrationError) -> Self {
        Self {
            step: e.step,
            cause: e.cause,
            points: e.partial.points,
        }
    }
}

impl From<RunFailure> for AppError {
    fn from(f: RunFailure) -> Self {
        AppError::Integration {
            step: f.step,
            cause: f.cause,
            partial: None,
        }
    }
}

pub fn run_integrator<M: LagrangianModel + ?Sized>(
    model: &M,
    x0: &PhasePoint,
    integrator: Integrator,
    h: f64,
    t_end: f64,
    cfg: &StepConfig,
) -> std::result::Result<RunOutput, RunFailure> {
    match integrator {
        Integrator::Simpson => integrate(model, x0, h, t_end, cfg)
            .map(|t| RunOutput {
                points: t.points,
                stats: t.stats,
            })
            .map_err(Into::into),
        Integrator::Midpoint => midpoint_integrate(model, x0, h, t_end, cfg)
            .map(|t| RunOutput {
                points: t.points,
                stats: t.stats,
            })
            .map_err(Into::into),
        Integrator::Rk4 => {
            let y0: Vec<f64> = x0.q.iter().chain(&x0.p).copied().collect();
            rk4_integrate(&hamiltonian_field(model), x0.t, &y0, h, t_end)
                .map(|s| RunOutput {
                    points: s.to_phase_points(),
                    stats: Vec::new(),
                })
                .map_err(|(step, cause, s)| RunFailure {
                    step,
                    cause,
                    points: s.to_phase_points(),
                })
        }
    }
}

/// Nutation cubic of a top preset, `None` for other systems.
pub fn preset_cubic(p: &Preset) -> Result<Option<NutationCubic>> {
    match p.system.as_top() {
        Some(top) => Ok(Some(nutation_cubic(&top.params, &p.q0, &p.qdot0)?)),
        None => Ok(None),
    }
}

/// `t, q₁..qₙ, p₁..pₙ, H`, plus `p_phi, p_psi` for a top.
pub fn trajectory_table(preset: &Preset, points: &[PhasePoint]) -> Result<Table> {
    let model = &preset.system;
    let n = model.dof();
    let mut header = vec!["t".to_string()];
    header.extend((1..=n).map(|i| format!("q{i}")));
    header.extend((1..=n).map(|i| format!("p{i}")));
    header.push("H".into());
    let top = model.as_top();
    if top.is_some() {
        header.extend(["p_phi".to_string(), "p_psi".to_string()]);
    }
    let mut table = Table::new(header);
    for pt in points {
        let mut row = vec![pt.t];
        row.extend(&pt.q);
        row.extend(&pt.p);
        row.push(energy(model, pt)?);
        if top.is_some() {
            row.extend([pt.p[0], pt.p[2]]);
        }
        table.push(row);
    }
    Ok(table)
}

fn series_table(name: &str, s: &ErrorSeries) -> Table {
    let mut t = Table::new(["t", name]);
    for (time, v) in s.times.iter().zip(&s.values) {
        t.push(vec![*time, *v]);
    }
    t
}

pub fn energy_error_table(preset: &Preset, points: &[PhasePoint]) -> Result<Table> {
    Ok(series_table("e_H", &energy_error_series(points, &preset.system)?))
}

/// `t, e_p<k>` for every cyclic coordinate, or `None` when there is none.
pub fn momentum_error_table(preset: &Preset, points: &[PhasePoint]) -> Result<Option<Table>> {
    let cyclic = preset.system.cyclic_coordinates();
    if cyclic.is_empty() {
        return Ok(None);
    }
    let series = cyclic
        .iter()
        .map(|&k| momentum_error_series(points, &preset.system, k))
        .collect::<simvar_core::Result<Vec<_>>>()?;
    let mut t = Table::new(std::iter::once("t".to_string()).chain(cyclic.iter().map(|k| format!("e_p{}", k + 1))));
    for (i, pt) in points.iter().enumerate() {
        t.push(std::iter::once(pt.t).chain(series.iter().map(|s| s.values[i])).collect());
    }
    Ok(Some(t))
}

/// `t, theta, theta_exact, e_theta`.
pub fn nutation_table(points: &[PhasePoint], cubic: &NutationCubic) -> Result<Table> {
    let mut t = Table::new(["t", "theta", "theta_exact", "e_theta"]);
    for pt in points {
        let exact = exact_nutation(cubic, pt.t)?;
        t.push(vec![pt.t, pt.q[1], exact, (pt.q[1] - exact) / exact]);
    }
    Ok(t)
}

/// Trace of the symmetry axis on the unit sphere, `t, x, y, z, phi_dot, cusp`.
/// `cusp` is 1 at local minima of `|φ̇|` below 5 % of its maximum.
pub fn tip_path_table(preset: &Preset, points: &[PhasePoint]) -> Result<Table> {
    let model = &preset.system;
    let mut phi_dot = Vec::with_capacity(points.len());
    for pt in points {
        let v = Lu::factor(&model.mass(&pt.q))?.solve(&pt.p);
        phi_dot.push(v[0]);
    }
    let peak = phi_dot.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut t = Table::new(["t", "x", "y", "z", "phi_dot", "cusp"]);
    for (i, pt) in points.iter().enumerate() {
        let (phi, theta) = (pt.q[0], pt.q[1]);
        let w = phi_dot[i].abs();
        let left = i.checked_sub(1).map_or(f64::INFINITY, |j| phi_dot[j].abs());
        let right = phi_dot.get(i + 1).map_or(f64::INFINITY, |v| v.abs());
        let cusp = w <= left && w <= right && w < 0.05 * peak;
        t.push(vec![
            pt.t,
            theta.sin() * phi.cos(),
            theta.sin() * phi.sin(),
            theta.cos(),
            phi_dot[i],
            if cusp { 1.0 } else { 0.0 },
        ]);
    }
    Ok(t)
}

#[derive(Debug, Clone, Serialize)]
pub struct NewtonSummary {
    pub mean_iterations: f64,
    pub max_iterations: usize,
    pub max_residual: f64,
    pub finite_difference_steps: usize,
}

pub fn newton_summary(stats: &[StepStats]) -> Option<NewtonSummary> {
    if stats.is_empty() {
        return None;
    }
    Some(NewtonSummary {
        mean_iterations: stats.iter().map(|s| s.newton_iterations as f64).sum::<f64>() / stats.len() as f64,
        max_iterations: stats.iter().map(|s| s.newton_iterations).max().unwrap_or(0),
        max_residual: stats.iter().fold(0.0, |m, s| m.max(s.final_residual_norm)),
        finite_difference_steps: stats
            .iter()
            .filter(|s| s.jacobian_source == JacobianSource::FiniteDifference)
            .count(),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct MomentumSummary {
    pub index: usize,
    pub max_error: f64,
    pub relative: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct SimulationSummary {
    pub preset: String,
    pub integrator: String,
    pub h: f64,
    pub t_end: f64,
    pub steps: usize,
    pub nutation_period: Option<f64>,
    pub max_energy_error: f64,
    pub energy_error_relative: bool,
    pub momenta: Vec<MomentumSummary>,
    pub max_nutation_error: Option<f64>,
    pub newton: Option<NewtonSummary>,
}

pub fn summarize(
    preset: &Preset,
    integrator: Integrator,
    h: f64,
    t_end: f64,
    period: Option<f64>,
    out: &RunOutput,
) -> Result<SimulationSummary> {
    let e = energy_error_series(&out.points, &preset.system)?;
    let momenta = preset
        .system
        .cyclic_coordinates()
        .iter()
        .map(|&k| {
            let s = momentum_error_series(&out.points, &preset.system, k)?;
            Ok(MomentumSummary {
                index: k,
                max_error: sup_norm(&s)?,
                relative: s.kind == ErrorKind::Relative,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let max_nutation_error = match preset_cubic(preset)? {
        Some(c) => Some(sup_norm(&nutation_error_series(&out.points, &c)?)?),
        None => None,
    };
    Ok(SimulationSummary {
        preset: preset.name.to_string(),
        integrator: integrator.as_str().to_string(),
        h,
        t_end,
        steps: out.points.len() - 1,
        nutation_period: period,
        max_energy_error: sup_norm(&e)?,
        energy_error_relative: e.kind == ErrorKind::Relative,
        momenta,
        max_nutation_error,
        newton: newton_summary(&out.stats),
    })
}

/// Every figure-class table for a finished run, keyed by file stem.
pub fn figure_tables(preset: &Preset, points: &[PhasePoint]) -> Result<Vec<(&'static str, Table)>> {
    let mut out = vec![
        ("trajectory", trajectory_table(preset, points)?),
        ("energy_error", energy_error_table(preset, points)?),
    ];
    if let Some(t) = momentum_error_table(preset, points)? {
        out.push(("momentum_error", t));
    }
    if let Some(c) = preset_cubic(preset)? {
        out.push(("nutation", nutation_table(points, &c)?));
        out.push(("tip_path", tip_path_table(preset, points)?));
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Metric {
    /// Relative energy error.
    Energy,
    /// Relative error of θ against the elliptic solution.
    Nutation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Reference {
    Exact,
    None,
}

/// A step-halving sweep `h₀, h₀/2, …, h₀/2^halvings` over `[0, t_end]`.
#[derive(Debug, Clone)]
pub struct Sweep {
    pub preset: Preset,
    pub integrator: Integrator,
    pub h0: f64,
    pub halvings: usize,
    pub t_end: f64,
    pub step: StepConfig,
    pub metric: Metric,
    pub reference: Reference,
}

pub fn halved_steps(h0: f64, halvings: usize) -> Vec<f64> {
    (0..=halvings).map(|k| h0 / 2f64.powi(k as i32)).collect()
}

pub fn converge(sweep: &Sweep) -> Result<ConvergenceReport> {
    let cubic = preset_cubic(&sweep.preset)?;
    if sweep.reference == Reference::Exact && cubic.is_none() {
        return Err(AppError::Usage(format!(
            "an exact reference exists only for top presets, not `{}`",
            sweep.preset.name
        )));
    }
    let cubic = match sweep.metric {
        Metric::Nutation => match (cubic, sweep.reference) {
            (Some(c), Reference::Exact) => Some(c),
            _ => return Err(AppError::Usage("the nutation metric needs a top preset and --reference exact".into())),
        },
        Metric::Energy => None,
    };
    let x0 = sweep.preset.initial_point()?;
    let hs = halved_steps(sweep.h0, sweep.halvings);
    let norms = hs
        .par_iter()
        .map(|&h| {
            let out = run_integrator(&sweep.preset.system, &x0, sweep.integrator, h, sweep.t_end, &sweep.step)?;
            let series = match &cubic {
                Some(c) => nutation_error_series(&out.points, c)?,
                None => energy_error_series(&out.points, &sweep.preset.system)?,
            };
            Ok(sup_norm(&series)?)
        })
        .collect::<Result<Vec<f64>>>()?;
    let metric = match sweep.metric {
        Metric::Energy => "energy",
        Metric::Nutation => "nutation",
    };
    Ok(convergence_order(&hs, &norms)?.labelled(sweep.integrator.as_str(), metric))
}

/// `h, norm, order` with `order` empty (NaN) on the first row.
pub fn convergence_table(r: &ConvergenceReport) -> Table {
    let mut t = Table::new(["h", "norm", "order"]);
    for (k, (h, n)) in r.step_sizes.iter().zip(&r.norms).enumerate() {
        let order = k.checked_sub(1).and_then(|j| r.orders[j]).unwrap_or(f64::NAN);
        t.push(vec![*h, *n, order]);
    }
    t
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceSummary {
    pub preset: String,
    pub method: String,
    pub metric: String,
    pub t_end: f64,
    pub step_sizes: Vec<f64>,
    pub norms: Vec<f64>,
    pub orders: Vec<Option<f64>>,
    pub slope: Option<f64>,
    pub excluded: Vec<usize>,
}

impl ConvergenceSummary {
    pub fn new(preset: &str, t_end: f64, r: &ConvergenceReport) -> Self {
        Self {
            preset: preset.to_string(),
            method: r.method.clone(),
            metric: r.metric.clone(),
            t_end,
            step_sizes: r.step_sizes.clone(),
            norms: r.norms.clone(),
            orders: r.orders.clone(),
            slope: r.slope,
            excluded: r.excluded.clone(),
        }
    }
}

/// Reduced first-order system `(φ, θ, θ̇)` matching a top preset.
pub fn reduced_params(preset: &Preset) -> Result<ReducedTopParams> {
    let top = preset
        .system
        .as_top()
        .ok_or_else(|| AppError::Usage(format!("`{}` is not a top preset", preset.name)))?;
    let (p_phi, p_psi) = top_conserved_momenta(&top.params, &preset.q0, &preset.qdot0);
    Ok(ReducedTopParams {
        p_phi,
        p_psi,
        inertia: top.params.inertia,
        a: top.params.m(),
        ..ReducedTopParams::default()
    })
}

/// `sup |θ_Simpson − θ_RK4|` with Simpson on the complete top and RK4 on the
/// reduced system, for each halved step.
pub fn compare_reduced(preset: &Preset, h0: f64, halvings: usize, horizon: f64, step: &StepConfig) -> Result<ConvergenceReport> {
    let field = reduced_top_field(reduced_params(preset)?);
    let x0 = preset.initial_point()?;
    let y0 = [preset.q0[0], preset.q0[1], preset.qdot0[1]];
    let hs = halved_steps(h0, halvings);
    let norms = hs
        .par_iter()
        .map(|&h| {
            let full = integrate(&preset.system, &x0, h, horizon, step).map_err(RunFailure::from)?;
            let reduced = rk4_integrate(&field, 0.0, &y0, h, horizon).map_err(|(step, cause, _)| {
                AppError::Integration {
                    step,
                    cause,
                    partial: None,
                }
            })?;
            let times: Vec<f64> = full.points.iter().map(|p| p.t).collect();
            let theta: Vec<f64> = full.points.iter().map(|p| p.q[1]).collect();
            let theta_r: Vec<f64> = reduced.states.iter().map(|y| y[1]).collect();
            Ok(cross_method_difference(&times, &theta, &reduced.times, &theta_r)?)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(convergence_order(&hs, &norms)?.labelled("simpson-vs-rk4-reduced", "nutation"))
}

/// Tolerance on Jacobian blocks against finite differences.
pub const JACOBIAN_TOLERANCE: f64 = 1e-5;
/// Tolerance on model derivatives against finite differences.
pub const MODEL_TOLERANCE: f64 = 1e-6;
/// Tolerance on the sampled elliptic identities.
pub const ELLIPTIC_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl Check {
    fn new(name: impl Into<String>, value: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            value,
            tolerance,
            passed: value <= tolerance,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ValidationSummary {
    pub model: String,
    pub samples: usize,
    pub checks: Vec<Check>,
}

impl ValidationSummary {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> Vec<&str> {
        self.checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect()
    }
}

const SIMPSON_ROWS: [&str; 3] = ["F_qm", "F_p", "F_q"];
const SIMPSON_COLS: [&str; 3] = ["q_m", "p", "q"];
const MIDPOINT_ROWS: [&str; 2] = ["F_p", "F_q"];
const MIDPOINT_COLS: [&str; 2] = ["p", "q"];

/// Admissible configurations drawn from a fixed seed, starting with `q0`.
fn sample_configurations<M: LagrangianModel + ?Sized>(model: &M, q0: &[f64], count: usize) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut out = vec![q0.to_vec()];
    while out.len() < count {
        let q: Vec<f64> = q0.iter().map(|x| x + rng.random_range(-1.0..1.0)).collect();
        if model.check_admissible(&q).is_ok() && condition_inf(&model.mass(&q)) < 1e6 {
            out.push(q);
        }
    }
    out
}

/// Runs the derivative, Jacobian and elliptic checks on `model`.
pub fn validate<M: LagrangianModel + ?Sized>(model: &M, q0: &[f64], samples: usize) -> Result<ValidationSummary> {
    let n = model.dof();
    let qs = sample_configurations(model, q0, samples.max(1));
    let mut checks = Vec::new();

    let report = validate_model(model, &qs, 1e-5)?;
    let failed = report.failures(MODEL_TOLERANCE);
    for (name, value) in [
        ("dmass", report.dmass_deviation),
        ("d2mass", report.d2mass_deviation),
        ("grad_potential", report.grad_potential_deviation),
        ("hess_potential", report.hess_potential_deviation),
        ("hess_potential symmetry", report.max_hess_asymmetry),
    ] {
        checks.push(Check::new(format!("model {name}"), value, MODEL_TOLERANCE));
    }
    checks.push(Check {
        name: "model mass symmetry".into(),
        value: report.max_mass_asymmetry,
        tolerance: 0.0,
        passed: !failed.contains(&"mass symmetry"),
    });
    checks.push(Check {
        name: "model mass positive-definiteness".into(),
        value: report.min_mass_eigenvalue,
        tolerance: 0.0,
        passed: report.positive_definite(),
    });

    let mut rng = ChaCha8Rng::seed_from_u64(0x7ac0);
    let mut simpson_worst = [[0.0f64; 3]; 3];
    let mut midpoint_worst = [[0.0f64; 2]; 2];
    for q in &qs {
        let p: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let d: Vec<f64> = (0..2 * n).map(|_| rng.random_range(-0.05..0.05)).collect();
        let h = rng.random_range(0.005..0.05);
        let prev = PhasePoint::new(0.0, q.clone(), p.clone());
        let u = StepUnknowns {
            q_mid: (0..n).map(|i| q[i] + 0.5 * d[i]).collect(),
            p: p.iter().map(|v| 1.1 * v).collect(),
            q: (0..n).map(|i| q[i] + d[n + i]).collect(),
        };
        let dev = block_deviation(
            &jacobian_analytic(model, &prev, &u, h)?,
            &jacobian_fd(model, &prev, &u, h, 1e-7)?,
            3,
        );
        for (r, row) in dev.iter().enumerate() {
            for (c, v) in row.iter().enumerate() {
                simpson_worst[r][c] = simpson_worst[r][c].max(*v);
            }
        }
        let mu = MidpointUnknowns {
            p: u.p.clone(),
            q: u.q.clone(),
        };
        let dev = block_deviation(
            &midpoint_jacobian(model, &prev, &mu, h)?,
            &midpoint_jacobian_fd(model, &prev, &mu, h, 1e-7)?,
            2,
        );
        for (r, row) in dev.iter().enumerate() {
            for (c, v) in row.iter().enumerate() {
                midpoint_worst[r][c] = midpoint_worst[r][c].max(*v);
            }
        }
    }
    for (r, row) in simpson_worst.iter().enumerate() {
        for (c, v) in row.iter().enumerate() {
            let name = format!("simpson jacobian d{}/d{}", SIMPSON_ROWS[r], SIMPSON_COLS[c]);
            checks.push(Check::new(name, *v, JACOBIAN_TOLERANCE));
        }
    }
    for (r, row) in midpoint_worst.iter().enumerate() {
        for (c, v) in row.iter().enumerate() {
            let name = format!("midpoint jacobian d{}/d{}", MIDPOINT_ROWS[r], MIDPOINT_COLS[c]);
            checks.push(Check::new(name, *v, JACOBIAN_TOLERANCE));
        }
    }

    checks.extend(elliptic_checks()?);
    Ok(ValidationSummary {
        model: model.name().to_string(),
        samples: qs.len(),
        checks,
    })
}

/// `R_F(x,x,x) = x^(−1/2)`, `sn(u,0) = sin u`, `sn(u,1) = tanh u` on fixed samples.
pub fn elliptic_checks() -> Result<Vec<Check>> {
    let (mut rf, mut sn0, mut sn1) = (0.0f64, 0.0f64, 0.0f64);
    for k in 0..64 {
        let x = 10f64.powf(-6.0 + 12.0 * k as f64 / 63.0);
        rf = rf.max((carlson_rf(x, x, x)? * x.sqrt() - 1.0).abs());
        let u = -20.0 + 40.0 * k as f64 / 63.0;
        sn0 = sn0.max((jacobi_sn(u, 0.0)? - u.sin()).abs());
        sn1 = sn1.max((jacobi_sn(u, 1.0)? - u.tanh()).abs());
    }
    Ok(vec![
        Check::new("elliptic R_F(x,x,x)", rf, ELLIPTIC_TOLERANCE),
        Check::new("elliptic sn(u,0)", sn0, ELLIPTIC_TOLERANCE),
        Check::new("elliptic sn(u,1)", sn1, ELLIPTIC_TOLERANCE),
    ])
}

/// Checks `u̇² = f(u)` for the exact nutation of a top preset.
pub fn nutation_identity_check(preset: &Preset) -> Result<Option<Check>> {
    let Some(c) = preset_cubic(preset)? else {
        return Ok(None);
    };
    let t = nutation_period(&c)?;
    let u = |s: f64| exact_nutation(&c, s).map(f64::cos);
    let e = 1e-5 * t;
    let mut worst: f64 = 0.0;
    for k in 0..64 {
        let s = t * k as f64 / 64.0;
        let du = (-u(s + 2.0 * e)? + 8.0 * u(s + e)? - 8.0 * u(s - e)? + u(s - 2.0 * e)?) / (12.0 * e);
        let scale = c.coefficients.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        worst = worst.max((du * du - c.eval(u(s)?)).abs() / scale);
    }
    Ok(Some(Check::new("elliptic nutation identity", worst, 1e-6)))
}

/// Evaluates the reduced field once to surface a `sin θ` guard trip early.
pub fn check_reduced_start(preset: &Preset) -> Result<()> {
    let field = reduced_top_field(reduced_params(preset)?);
    field.eval(0.0, &[preset.q0[0], preset.q0[1], preset.qdot0[1]])?;
    Ok(())
}
