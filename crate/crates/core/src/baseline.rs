//! Reference integrators: the implicit midpoint variational scheme and
//! classical RK4 on first-order fields.

use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::{Lu, Matrix};
use crate::math::{abs, cos, sin, sqrt};
use crate::model::{check_len, LagrangianModel, PhasePoint};
use crate::newton::{self, finite_difference_jacobian};
use crate::simpson::{
    integrate_with, step_count, IntegrationError, JacobianMode, JacobianSource, StepConfig, StepResult, StepStats,
    Trajectory,
};

/// Unknowns `(p, q)` of one midpoint step, packed as `[p; q]`.
#[derive(Debug, Clone, PartialEq)]
pub struct MidpointUnknowns {
    pub p: Vec<f64>,
    pub q: Vec<f64>,
}

impl MidpointUnknowns {
    pub fn to_vec(&self) -> Vec<f64> {
        let mut x = Vec::with_capacity(2 * self.q.len());
        x.extend_from_slice(&self.p);
        x.extend_from_slice(&self.q);
        x
    }

    pub fn from_slice(x: &[f64]) -> Self {
        let n = x.len() / 2;
        Self {
            p: x[..n].to_vec(),
            q: x[n..].to_vec(),
        }
    }
}

fn check_inputs<M: LagrangianModel + ?Sized>(
    model: &M,
    prev: &PhasePoint,
    u: &MidpointUnknowns,
    h: f64,
) -> Result<()> {
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::Domain {
            what: "step size",
            value: h,
        });
    }
    let n = model.dof();
    check_len("previous q", n, &prev.q)?;
    check_len("previous p", n, &prev.p)?;
    check_len("unknown p", n, &u.p)?;
    check_len("unknown q", n, &u.q)?;
    model.check_admissible(&prev.q)
}

fn mid_and_velocity(q_l: &[f64], q: &[f64], h: f64) -> (Vec<f64>, Vec<f64>) {
    let q_m = q_l.iter().zip(q).map(|(a, b)| 0.5 * (a + b)).collect();
    let g = q_l.iter().zip(q).map(|(a, b)| (b - a) / h).collect();
    (q_m, g)
}

/// Midpoint residual `[F_p; F_q]`:
///
/// ```text
/// F_p = p − p_j − (h/2) ∂M(q_m)[g, g] + h ∇V(q_m)
/// F_q = h M(q_m) g − (h/2)(p + p_j)
/// ```
pub fn midpoint_residual<M: LagrangianModel + ?Sized>(
    model: &M,
    prev: &PhasePoint,
    u: &MidpointUnknowns,
    h: f64,
) -> Result<Vec<f64>> {
    check_inputs(model, prev, u, h)?;
    let r = residual_unchecked(model, prev, u, h);
    if r.iter().all(|v| v.is_finite()) {
        Ok(r)
    } else {
        Err(Error::NonFinite {
            context: "midpoint residual",
        })
    }
}

fn residual_unchecked<M: LagrangianModel + ?Sized>(
    model: &M,
    prev: &PhasePoint,
    u: &MidpointUnknowns,
    h: f64,
) -> Vec<f64> {
    let n = model.dof();
    let (q_m, g) = mid_and_velocity(&prev.q, &u.q, h);
    let c = model.mass_gradient(&q_m).quadratic(&g);
    let dv = model.potential_gradient(&q_m);
    let mg = model.mass(&q_m).mul_vec(&g);
    let mut out = Vec::with_capacity(2 * n);
    for i in 0..n {
        out.push(u.p[i] - prev.p[i] - 0.5 * h * c[i] + h * dv[i]);
    }
    for i in 0..n {
        out.push(h * mg[i] - 0.5 * h * (u.p[i] + prev.p[i]));
    }
    out
}

/// Analytic Jacobian `∂[F_p; F_q]/∂[p; q]`.
pub fn midpoint_jacobian<M: LagrangianModel + ?Sized>(
    model: &M,
    prev: &PhasePoint,
    u: &MidpointUnknowns,
    h: f64,
) -> Result<Matrix> {
    check_inputs(model, prev, u, h)?;
    Ok(jacobian_unchecked(model, prev, u, h))
}

fn jacobian_unchecked<M: LagrangianModel + ?Sized>(
    model: &M,
    prev: &PhasePoint,
    u: &MidpointUnknowns,
    h: f64,
) -> Matrix {
    let n = model.dof();
    let (q_m, g) = mid_and_velocity(&prev.q, &u.q, h);
    let a = model.mass_gradient(&q_m).contract_last(&g);
    let q2 = model.mass_hessian(&q_m).quadratic(&g);
    let k = model.potential_hessian(&q_m);
    let id = Matrix::identity(n);

    let mut jac = Matrix::zeros(2 * n, 2 * n);
    jac.set_block(0, 0, &id);
    let mut b = k.scaled(0.5 * h);
    b.add_scaled(-0.25 * h, &q2);
    b.add_scaled(-1.0, &a);
    jac.set_block(0, n, &b);
    jac.set_block(n, 0, &id.scaled(-0.5 * h));
    let mut b = model.mass(&q_m);
    b.add_scaled(0.5 * h, &a.transpose());
    jac.set_block(n, n, &b);
    jac
}

/// Central finite-difference Jacobian of [`midpoint_residual`].
pub fn midpoint_jacobian_fd<M: LagrangianModel + ?Sized>(
    model: &M,
    prev: &PhasePoint,
    u: &MidpointUnknowns,
    h: f64,
    fd_step: f64,
) -> Result<Matrix> {
    check_inputs(model, prev, u, h)?;
    finite_difference_jacobian(
        |x| Ok(residual_unchecked(model, prev, &MidpointUnknowns::from_slice(x), h)),
        &u.to_vec(),
        fd_step,
    )
}

/// One implicit midpoint step, started from `(p, q) = (p_j, q_j)`.
///
/// The returned `midpoint` is `(q_j + q_{j+1})/2`. The predictor setting of
/// `cfg` is ignored.
pub fn midpoint_step<M: LagrangianModel + ?Sized>(
    model: &M,
    prev: &PhasePoint,
    h: f64,
    cfg: &StepConfig,
) -> Result<StepResult> {
    let guess = MidpointUnknowns {
        p: prev.p.clone(),
        q: prev.q.clone(),
    };
    check_inputs(model, prev, &guess, h)?;
    let fd_step = cfg.newton.fd_step;
    let res = |x: &[f64]| Ok(residual_unchecked(model, prev, &MidpointUnknowns::from_slice(x), h));
    let outcome = newton::solve(
        res,
        |x| match cfg.jacobian {
            JacobianMode::Analytic => Ok(jacobian_unchecked(model, prev, &MidpointUnknowns::from_slice(x), h)),
            JacobianMode::FiniteDifference => finite_difference_jacobian(res, x, fd_step),
        },
        &guess.to_vec(),
        &cfg.newton,
    )?;
    if !outcome.converged {
        return Err(Error::StepFailed {
            iterations: outcome.iterations,
            residual_norm: outcome.residual_norm,
        });
    }
    let u = MidpointUnknowns::from_slice(&outcome.solution);
    let (q_m, _) = mid_and_velocity(&prev.q, &u.q, h);
    Ok(StepResult {
        next: PhasePoint::new(prev.t + h, u.q, u.p),
        midpoint: q_m,
        stats: StepStats {
            newton_iterations: outcome.iterations,
            final_residual_norm: outcome.residual_norm,
            jacobian_source: if cfg.jacobian == JacobianMode::FiniteDifference || outcome.fd_fallbacks > 0 {
                JacobianSource::FiniteDifference
            } else {
                JacobianSource::Analytic
            },
        },
    })
}

pub fn midpoint_integrate<M: LagrangianModel + ?Sized>(
    model: &M,
    initial: &PhasePoint,
    h: f64,
    t_end: f64,
    cfg: &StepConfig,
) -> core::result::Result<Trajectory, IntegrationError> {
    integrate_with(model, initial, h, t_end, |prev| midpoint_step(model, prev, h, cfg))
}

/// Autonomous or time-dependent first-order system `ẏ = f(t, y)`.
pub trait FirstOrderField {
    fn name(&self) -> &str;
    fn dimension(&self) -> usize;
    fn eval(&self, t: f64, y: &[f64]) -> Result<Vec<f64>>;
}

/// Canonical equations of a Lagrangian model on `y = [q; p]`.
pub struct HamiltonianField<'a, M: LagrangianModel + ?Sized> {
    model: &'a M,
    name: String,
}

pub fn hamiltonian_field<M: LagrangianModel + ?Sized>(model: &M) -> HamiltonianField<'_, M> {
    let mut name = String::from(model.name());
    name.push_str(" (canonical)");
    HamiltonianField { model, name }
}

impl<M: LagrangianModel + ?Sized> FirstOrderField for HamiltonianField<'_, M> {
    fn name(&self) -> &str {
        &self.name
    }

    fn dimension(&self) -> usize {
        2 * self.model.dof()
    }

    fn eval(&self, _t: f64, y: &[f64]) -> Result<Vec<f64>> {
        let n = self.model.dof();
        check_len("canonical state", 2 * n, y)?;
        let (q, p) = y.split_at(n);
        let lu = Lu::factor(&self.model.mass(q)).map_err(|_| Error::SingularMass {
            condition: f64::INFINITY,
        })?;
        let v = lu.solve(p);
        let dm = self.model.mass_gradient(q).quadratic(&v);
        let dv = self.model.potential_gradient(q);
        let mut out = v;
        out.extend(dm.iter().zip(&dv).map(|(a, b)| 0.5 * a - b));
        Ok(out)
    }
}

/// Constants of the reduced symmetric-top system in `(φ, θ, ξ = θ̇)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReducedTopParams {
    pub p_phi: f64,
    pub p_psi: f64,
    /// Transverse moment of inertia `I`.
    pub inertia: f64,
    /// Squared frequency `A = m_top g ℓ / I`.
    pub a: f64,
    /// Smallest `|sin θ|` accepted.
    pub sin_guard: f64,
}

impl Default for ReducedTopParams {
    /// The cusp motion: `p_φ = 2π√3`, `p_ψ = 4π`, `I = 1`, `A = 4π²`.
    fn default() -> Self {
        let tau = 2.0 * core::f64::consts::PI;
        Self {
            p_phi: tau * sqrt(3.0),
            p_psi: 2.0 * tau,
            inertia: 1.0,
            a: tau * tau,
            sin_guard: 1e-10,
        }
    }
}

pub struct ReducedTopField {
    pub params: ReducedTopParams,
}

pub fn reduced_top_field(params: ReducedTopParams) -> ReducedTopField {
    ReducedTopField { params }
}

impl ReducedTopField {
    /// Precession rate `φ̇ = (p_φ − p_ψ cos θ)/(I sin²θ)`.
    pub fn phi_dot(&self, theta: f64) -> Result<f64> {
        let s = sin(theta);
        if abs(s) < self.params.sin_guard {
            return Err(Error::Inadmissible {
                reason: "reduced top field evaluated at sin θ = 0",
            });
        }
        let p = &self.params;
        Ok((p.p_phi - p.p_psi * cos(theta)) / (p.inertia * s * s))
    }
}

impl FirstOrderField for ReducedTopField {
    fn name(&self) -> &str {
        "reduced Lagrange top"
    }

    fn dimension(&self) -> usize {
        3
    }

    fn eval(&self, _t: f64, y: &[f64]) -> Result<Vec<f64>> {
        check_len("reduced top state", 3, y)?;
        let theta = y[1];
        let phi_dot = self.phi_dot(theta)?;
        let p = &self.params;
        let xi_dot = (p.a + phi_dot * phi_dot * cos(theta) - p.p_psi / p.inertia * phi_dot) * sin(theta);
        Ok(alloc::vec![phi_dot, y[2], xi_dot])
    }
}

/// Classical four-stage Runge–Kutta step.
pub fn rk4_step<F: FirstOrderField + ?Sized>(field: &F, t: f64, y: &[f64], h: f64) -> Result<Vec<f64>> {
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::Domain {
            what: "step size",
            value: h,
        });
    }
    check_len("RK4 state", field.dimension(), y)?;
    let shifted = |k: &[f64], s: f64| -> Vec<f64> { y.iter().zip(k).map(|(a, b)| a + s * b).collect() };
    let k1 = field.eval(t, y)?;
    let k2 = field.eval(t + 0.5 * h, &shifted(&k1, 0.5 * h))?;
    let k3 = field.eval(t + 0.5 * h, &shifted(&k2, 0.5 * h))?;
    let k4 = field.eval(t + h, &shifted(&k3, h))?;
    let out: Vec<f64> = (0..y.len())
        .map(|i| y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
        .collect();
    if out.iter().all(|v| v.is_finite()) {
        Ok(out)
    } else {
        Err(Error::NonFinite { context: "RK4 step" })
    }
}

/// Samples of a first-order solution on a uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldSolution {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
}

impl FieldSolution {
    /// Splits `[q; p]` states of a canonical field into phase points.
    pub fn to_phase_points(&self) -> Vec<PhasePoint> {
        self.times
            .iter()
            .zip(&self.states)
            .map(|(t, y)| {
                let n = y.len() / 2;
                PhasePoint::new(*t, y[..n].to_vec(), y[n..].to_vec())
            })
            .collect()
    }
}

/// Fixed-step RK4 over a whole number of steps. On failure returns the
/// failing step index, the error and the solution computed so far.
pub fn rk4_integrate<F: FirstOrderField + ?Sized>(
    field: &F,
    t0: f64,
    y0: &[f64],
    h: f64,
    t_end: f64,
) -> core::result::Result<FieldSolution, (usize, Error, FieldSolution)> {
    let mut sol = FieldSolution {
        times: Vec::new(),
        states: Vec::new(),
    };
    let steps = match step_count(t0, t_end, h).and_then(|s| check_len("RK4 state", field.dimension(), y0).map(|_| s)) {
        Ok(s) => s,
        Err(e) => return Err((0, e, sol)),
    };
    sol.times.reserve(steps + 1);
    sol.states.reserve(steps + 1);
    sol.times.push(t0);
    sol.states.push(y0.to_vec());
    for k in 1..=steps {
        let t = sol.times[k - 1];
        match rk4_step(field, t, &sol.states[k - 1], h) {
            Ok(y) => {
                sol.times.push(t0 + k as f64 * h);
                sol.states.push(y);
            }
            Err(e) => return Err((k, e, sol)),
        }
    }
    Ok(sol)
}
