//! Fourth-order Simpson variational integrator.
//!
//! On each interval `[t_j, t_j + h]` the configuration is interpolated by
//! quadratic Lagrange elements through `(q_ℓ, q_m, q)` and the action is
//! approximated with Simpson's rule. Stationarity of the discrete action
//! with respect to the midpoint, combined with the left and right discrete
//! momenta, gives an implicit map `(q_j, p_j) ↦ (q_{j+1}, p_{j+1})` whose
//! unknowns `(q_m, p, q)` are found by Newton's method.
//!
//! The residual is the `3n` vector `[F_qm; F_p; F_q]`:
//!
//! ```text
//! F_qm = h M(q) g − h M(q_ℓ) g_ℓ + h² ∇V(q_m) − (h²/2) ∂M(q_m)[g_m, g_m]
//! F_p  = h (p − p_j) + h² [⅙ ∇V(q_ℓ) + ⅔ ∇V(q_m) + ⅙ ∇V(q)]
//!        − (h²/2) [⅙ ∂M(q_ℓ)[g_ℓ, g_ℓ] + ⅔ ∂M(q_m)[g_m, g_m] + ⅙ ∂M(q)[g, g]]
//! F_q  = h [⅙ M(q_ℓ) g_ℓ + ⅔ M(q_m) g_m + ⅙ M(q) g] − (h/2)(p + p_j)
//!        − (h²/24) ∂M(q_ℓ)[g_ℓ, g_ℓ] + (h²/24) ∂M(q)[g, g]
//!        + (h²/12) ∇V(q_ℓ) − (h²/12) ∇V(q)
//! ```
//!
//! `F_qm` is `−3h ∂L_d/∂q_m`, `F_p` is `h` times the difference of the right
//! and left discrete momenta, and `F_q` is `h` times half their sum, with
//! `p_j = −∂L_d/∂q_ℓ` and `p = ∂L_d/∂q`. Summing the two momentum formulas
//! gives the Mg weights (⅓, 4/3, ⅓) with correction weights `h/12` and
//! `h/6`, hence `h²/24` and `h²/12` after halving and scaling by `h`.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::math::{abs, norm_inf, round};
use crate::model::{check_len, velocity_from_momentum, Coordinates, LagrangianModel, Momentum, PhasePoint};
use crate::newton::{self, finite_difference_jacobian, NewtonConfig};

/// Quadratic Lagrange basis `(φ₀, φ_½, φ₁)` on `[0, 1]`.
pub fn basis_p2(theta: f64) -> Result<[f64; 3]> {
    if !(0.0..=1.0).contains(&theta) {
        return Err(Error::Domain {
            what: "basis parameter",
            value: theta,
        });
    }
    Ok([
        (1.0 - theta) * (1.0 - 2.0 * theta),
        4.0 * theta * (1.0 - theta),
        theta * (2.0 * theta - 1.0),
    ])
}

/// Discrete velocities at the left node, midpoint and right node of the
/// quadratic interpolant (Gear's formulas).
#[derive(Debug, Clone, PartialEq)]
pub struct GearVelocities {
    pub left: Vec<f64>,
    pub mid: Vec<f64>,
    pub right: Vec<f64>,
}

pub fn gear_velocities(q_l: &[f64], q_m: &[f64], q: &[f64], h: f64) -> Result<GearVelocities> {
    check_step(h)?;
    let n = q_l.len();
    check_len("gear_velocities q_m", n, q_m)?;
    check_len("gear_velocities q", n, q)?;
    Ok(gear_unchecked(q_l, q_m, q, h))
}

fn gear_unchecked(q_l: &[f64], q_m: &[f64], q: &[f64], h: f64) -> GearVelocities {
    let n = q_l.len();
    let mut g = GearVelocities {
        left: Vec::with_capacity(n),
        mid: Vec::with_capacity(n),
        right: Vec::with_capacity(n),
    };
    for i in 0..n {
        g.left.push((-3.0 * q_l[i] + 4.0 * q_m[i] - q[i]) / h);
        g.mid.push((q[i] - q_l[i]) / h);
        g.right.push((q_l[i] - 4.0 * q_m[i] + 3.0 * q[i]) / h);
    }
    g
}

fn check_step(h: f64) -> Result<()> {
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::Domain {
            what: "step size",
            value: h,
        });
    }
    Ok(())
}

/// Simpson-rule discrete Lagrangian over one interval.
pub fn discrete_lagrangian<M: LagrangianModel + ?Sized>(
    model: &M,
    q_l: &[f64],
    q_m: &[f64],
    q: &[f64],
    h: f64,
) -> Result<f64> {
    let n = model.dof();
    check_len("discrete_lagrangian q_l", n, q_l)?;
    let g = gear_velocities(q_l, q_m, q, h)?;
    let kinetic = model.mass(q_l).bilinear(&g.left, &g.left) / 6.0
        + 2.0 * model.mass(q_m).bilinear(&g.mid, &g.mid) / 3.0
        + model.mass(q).bilinear(&g.right, &g.right) / 6.0;
    let potential =
        model.potential(q_l) / 6.0 + 2.0 * model.potential(q_m) / 3.0 + model.potential(q) / 6.0;
    Ok(0.5 * h * kinetic - h * potential)
}

/// The unknowns of one implicit step, packed as `[q_m; p; q]`.
#[derive(Debug, Clone, PartialEq)]
pub struct StepUnknowns {
    pub q_mid: Coordinates,
    pub p: Momentum,
    pub q: Coordinates,
}

impl StepUnknowns {
    pub fn to_vec(&self) -> Vec<f64> {
        let mut x = Vec::with_capacity(3 * self.q.len());
        x.extend_from_slice(&self.q_mid);
        x.extend_from_slice(&self.p);
        x.extend_from_slice(&self.q);
        x
    }

    pub fn from_slice(x: &[f64]) -> Self {
        let n = x.len() / 3;
        Self {
            q_mid: x[..n].to_vec(),
            p: x[n..2 * n].to_vec(),
            q: x[2 * n..].to_vec(),
        }
    }
}

fn check_step_inputs<M: LagrangianModel + ?Sized>(
    model: &M,
    prev: &PhasePoint,
    u: &StepUnknowns,
    h: f64,
) -> Result<()> {
    check_step(h)?;
    let n = model.dof();
    check_len("previous q", n, &prev.q)?;
    check_len("previous p", n, &prev.p)?;
    check_len("unknown q_m", n, &u.q_mid)?;
    check_len("unknown p", n, &u.p)?;
    check_len("unknown q", n, &u.q)?;
    model.check_admissible(&prev.q)
}

/// Simpson residual `[F_qm; F_p; F_q]` with `q_ℓ = prev.q`, `p_j = prev.p`.
pub fn residual<M: LagrangianModel + ?Sized>(
    model: &M,
    prev: &PhasePoint,
    u: &StepUnknowns,
    h: f64,
) -> Result<Vec<f64>> {
    check_step_inputs(model, prev, u, h)?;
    let r = residual_unchecked(model, prev, u, h);
    if r.iter().all(|v| v.is_finite()) {
        Ok(r)
    } else {
        Err(Error::NonFinite {
            context: "Simpson residual",
        })
    }
}

fn residual_unchecked<M: LagrangianModel + ?Sized>(
    model: &M,
    prev: &PhasePoint,
    u: &StepUnknowns,
    h: f64,
) -> Vec<f64> {
    let n = model.dof();
    let (q_l, q_m, q) = (&prev.q[..], &u.q_mid[..], &u.q[..]);
    let g = gear_unchecked(q_l, q_m, q, h);

    let (m_l, m_m, m_r) = (model.mass(q_l), model.mass(q_m), model.mass(q));
    let (dm_l, dm_m, dm_r) = (
        model.mass_gradient(q_l),
        model.mass_gradient(q_m),
        model.mass_gradient(q),
    );
    let (dv_l, dv_m, dv_r) = (
        model.potential_gradient(q_l),
        model.potential_gradient(q_m),
        model.potential_gradient(q),
    );
    let (mg_l, mg_m, mg_r) = (m_l.mul_vec(&g.left), m_m.mul_vec(&g.mid), m_r.mul_vec(&g.right));
    let (c_l, c_m, c_r) = (
        dm_l.quadratic(&g.left),
        dm_m.quadratic(&g.mid),
        dm_r.quadratic(&g.right),
    );
    let h2 = h * h;

    let mut out = Vec::with_capacity(3 * n);
    for i in 0..n {
        out.push(h * mg_r[i] - h * mg_l[i] + h2 * dv_m[i] - 0.5 * h2 * c_m[i]);
    }
    for i in 0..n {
        out.push(
            h * (u.p[i] - prev.p[i]) + h2 * (dv_l[i] / 6.0 + 2.0 * dv_m[i] / 3.0 + dv_r[i] / 6.0)
                - 0.5 * h2 * (c_l[i] / 6.0 + 2.0 * c_m[i] / 3.0 + c_r[i] / 6.0),
        );
    }
    for i in 0..n {
        out.push(
            h * (mg_l[i] / 6.0 + 2.0 * mg_m[i] / 3.0 + mg_r[i] / 6.0) - 0.5 * h * (u.p[i] + prev.p[i])
                - h2 / 24.0 * c_l[i]
                + h2 / 24.0 * c_r[i]
                + h2 / 12.0 * dv_l[i]
                - h2 / 12.0 * dv_r[i],
        );
    }
    out
}

/// Analytic Jacobian `∂[F_qm; F_p; F_q]/∂[q_m; p; q]`.
pub fn jacobian_analytic<M: LagrangianModel + ?Sized>(
    model: &M,
    prev: &PhasePoint,
    u: &StepUnknowns,
    h: f64,
) -> Result<Matrix> {
    check_step_inputs(model, prev, u, h)?;
    let j = jacobian_unchecked(model, prev, u, h);
    if j.is_finite() {
        Ok(j)
    } else {
        Err(Error::NonFinite {
            context: "Simpson Jacobian",
        })
    }
}

fn jacobian_unchecked<M: LagrangianModel + ?Sized>(
    model: &M,
    prev: &PhasePoint,
    u: &StepUnknowns,
    h: f64,
) -> Matrix {
    let n = model.dof();
    let (q_l, q_m, q) = (&prev.q[..], &u.q_mid[..], &u.q[..]);
    let g = gear_unchecked(q_l, q_m, q, h);
    let (m_l, m_m, m_r) = (model.mass(q_l), model.mass(q_m), model.mass(q));
    let (dm_l, dm_m, dm_r) = (
        model.mass_gradient(q_l),
        model.mass_gradient(q_m),
        model.mass_gradient(q),
    );
    let (d2_m, d2_r) = (model.mass_hessian(q_m), model.mass_hessian(q));
    let (k_m, k_r) = (model.potential_hessian(q_m), model.potential_hessian(q));

    // A[γ][δ] = Σ_β ∂_γ M_δβ g^β; its transpose is Σ_β ∂_δ M_γβ g^β.
    let a_l = dm_l.contract_last(&g.left);
    let a_m = dm_m.contract_last(&g.mid);
    let a_r = dm_r.contract_last(&g.right);
    let (a_m_t, a_r_t) = (a_m.transpose(), a_r.transpose());
    let (q2_m, q2_r) = (d2_m.quadratic(&g.mid), d2_r.quadratic(&g.right));
    let h2 = h * h;

    let mut jac = Matrix::zeros(3 * n, 3 * n);
    let mut block = |r: usize, c: usize, terms: &[(f64, &Matrix)]| {
        let mut b = Matrix::zeros(n, n);
        for (s, m) in terms {
            b.add_scaled(*s, m);
        }
        jac.set_block(r * n, c * n, &b);
    };
    let id = Matrix::identity(n);

    // ∂F_qm
    block(0, 0, &[(-4.0, &m_r), (-4.0, &m_l), (h2, &k_m), (-0.5 * h2, &q2_m)]);
    block(0, 2, &[(1.0, &m_l), (3.0, &m_r), (h, &a_r_t), (-h, &a_m)]);
    // ∂F_p
    block(
        1,
        0,
        &[(-2.0 * h / 3.0, &a_l), (2.0 * h / 3.0, &a_r), (-h2 / 3.0, &q2_m), (2.0 * h2 / 3.0, &k_m)],
    );
    block(1, 1, &[(h, &id)]);
    block(
        1,
        2,
        &[
            (h / 6.0, &a_l),
            (-2.0 * h / 3.0, &a_m),
            (-0.5 * h, &a_r),
            (-h2 / 12.0, &q2_r),
            (h2 / 6.0, &k_r),
        ],
    );
    // ∂F_q
    block(
        2,
        0,
        &[
            (2.0 / 3.0, &m_l),
            (-2.0 / 3.0, &m_r),
            (2.0 * h / 3.0, &a_m_t),
            (-h / 3.0, &a_l),
            (-h / 3.0, &a_r),
        ],
    );
    block(2, 1, &[(-0.5 * h, &id)]);
    block(
        2,
        2,
        &[
            (-1.0 / 6.0, &m_l),
            (2.0 / 3.0, &m_m),
            (0.5, &m_r),
            (h2 / 24.0, &q2_r),
            (-h2 / 12.0, &k_r),
            (h / 6.0, &a_r_t),
            (h / 12.0, &a_l),
            (h / 4.0, &a_r),
        ],
    );
    jac
}

/// Central finite-difference Jacobian of [`residual`].
pub fn jacobian_fd<M: LagrangianModel + ?Sized>(
    model: &M,
    prev: &PhasePoint,
    u: &StepUnknowns,
    h: f64,
    fd_step: f64,
) -> Result<Matrix> {
    check_step_inputs(model, prev, u, h)?;
    finite_difference_jacobian(
        |x| Ok(residual_unchecked(model, prev, &StepUnknowns::from_slice(x), h)),
        &u.to_vec(),
        fd_step,
    )
}

/// Per-block relative deviation between two `3n × 3n` Jacobians, each block
/// normalized by the largest entry of `reference`.
pub fn block_deviation(analytic: &Matrix, reference: &Matrix, blocks: usize) -> Vec<Vec<f64>> {
    let n = analytic.rows() / blocks;
    let scale = reference.max_abs().max(f64::MIN_POSITIVE);
    (0..blocks)
        .map(|r| {
            (0..blocks)
                .map(|c| {
                    let mut worst: f64 = 0.0;
                    for i in 0..n {
                        for j in 0..n {
                            let (a, b) = (analytic[(r * n + i, c * n + j)], reference[(r * n + i, c * n + j)]);
                            worst = worst.max(abs(a - b));
                        }
                    }
                    worst / scale
                })
                .collect()
        })
        .collect()
}

/// Which Jacobian Newton uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum JacobianMode {
    #[default]
    Analytic,
    FiniteDifference,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JacobianSource {
    Analytic,
    FiniteDifference,
}

impl JacobianSource {
    pub fn as_str(self) -> &'static str {
        match self {
            JacobianSource::Analytic => "analytic",
            JacobianSource::FiniteDifference => "finite-difference",
        }
    }
}

/// Initial guess for the Newton unknowns.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Predictor {
    /// `(q_m, p, q) = (q_j, p_j, q_j)`.
    #[default]
    Hold,
    /// Straight-line motion with velocity `M(q_j)⁻¹ p_j`.
    ConstantVelocity,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StepConfig {
    pub newton: NewtonConfig,
    pub jacobian: JacobianMode,
    pub predictor: Predictor,
}

impl From<NewtonConfig> for StepConfig {
    fn from(newton: NewtonConfig) -> Self {
        Self {
            newton,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepStats {
    pub newton_iterations: usize,
    pub final_residual_norm: f64,
    pub jacobian_source: JacobianSource,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepResult {
    pub next: PhasePoint,
    /// Converged interior configuration (Simpson) or `(q_j + q_{j+1})/2` (midpoint rule).
    pub midpoint: Coordinates,
    pub stats: StepStats,
}

fn initial_guess<M: LagrangianModel + ?Sized>(
    model: &M,
    prev: &PhasePoint,
    h: f64,
    predictor: Predictor,
) -> Result<StepUnknowns> {
    Ok(match predictor {
        Predictor::Hold => StepUnknowns {
            q_mid: prev.q.clone(),
            p: prev.p.clone(),
            q: prev.q.clone(),
        },
        Predictor::ConstantVelocity => {
            let v = velocity_from_momentum(model, &prev.q, &prev.p)?;
            StepUnknowns {
                q_mid: prev.q.iter().zip(&v).map(|(x, v)| x + 0.5 * h * v).collect(),
                p: prev.p.clone(),
                q: prev.q.iter().zip(&v).map(|(x, v)| x + h * v).collect(),
            }
        }
    })
}

/// One Simpson step from `prev`.
pub fn step<M: LagrangianModel + ?Sized>(
    model: &M,
    prev: &PhasePoint,
    h: f64,
    cfg: &StepConfig,
) -> Result<StepResult> {
    let guess = initial_guess(model, prev, h, cfg.predictor)?;
    check_step_inputs(model, prev, &guess, h)?;
    let fd_step = cfg.newton.fd_step;
    let outcome = newton::solve(
        |x| Ok(residual_unchecked(model, prev, &StepUnknowns::from_slice(x), h)),
        |x| {
            let u = StepUnknowns::from_slice(x);
            match cfg.jacobian {
                JacobianMode::Analytic => Ok(jacobian_unchecked(model, prev, &u, h)),
                JacobianMode::FiniteDifference => finite_difference_jacobian(
                    |y| Ok(residual_unchecked(model, prev, &StepUnknowns::from_slice(y), h)),
                    x,
                    fd_step,
                ),
            }
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
    let u = StepUnknowns::from_slice(&outcome.solution);
    Ok(StepResult {
        next: PhasePoint::new(prev.t + h, u.q, u.p),
        midpoint: u.q_mid,
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

/// A fixed-step discrete trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    /// Samples at `t₀ + k·h`.
    pub points: Vec<PhasePoint>,
    /// Interior configuration of each interval; one fewer than `points`.
    pub midpoints: Vec<Coordinates>,
    pub stats: Vec<StepStats>,
    pub h: f64,
    pub model_name: String,
}

impl Trajectory {
    pub fn steps(&self) -> usize {
        self.points.len() - 1
    }

    pub fn last(&self) -> &PhasePoint {
        self.points.last().expect("trajectory holds at least the initial point")
    }
}

/// Failure of [`integrate`] with everything computed before the failing step.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("step {step} failed: {cause}")]
pub struct IntegrationError {
    pub step: usize,
    #[source]
    pub cause: Error,
    pub partial: Trajectory,
}

/// Number of whole steps of size `h` in `[t0, t_end]`.
pub fn step_count(t0: f64, t_end: f64, h: f64) -> Result<usize> {
    check_step(h)?;
    let span = t_end - t0;
    if !(span >= 0.0) {
        return Err(Error::Domain {
            what: "integration interval",
            value: span,
        });
    }
    let ratio = span / h;
    let steps = round(ratio);
    if abs(ratio - steps) > 1e-9 * steps.max(1.0) {
        return Err(Error::IncommensurateStep { h, span });
    }
    Ok(steps as usize)
}

/// Drives a one-step map over `[initial.t, t_end]`.
pub(crate) fn integrate_with<M, S>(
    model: &M,
    initial: &PhasePoint,
    h: f64,
    t_end: f64,
    mut stepper: S,
) -> core::result::Result<Trajectory, IntegrationError>
where
    M: LagrangianModel + ?Sized,
    S: FnMut(&PhasePoint) -> Result<StepResult>,
{
    let mut traj = Trajectory {
        points: Vec::new(),
        midpoints: Vec::new(),
        stats: Vec::new(),
        h,
        model_name: model.name().to_string(),
    };
    let fail = |step, cause, traj| IntegrationError {
        step,
        cause,
        partial: traj,
    };
    let n = model.dof();
    if let Err(e) = check_len("initial q", n, &initial.q).and(check_len("initial p", n, &initial.p)) {
        return Err(fail(0, e, traj));
    }
    let steps = match step_count(initial.t, t_end, h) {
        Ok(s) => s,
        Err(e) => return Err(fail(0, e, traj)),
    };
    traj.points.reserve(steps + 1);
    traj.points.push(initial.clone());
    for k in 1..=steps {
        let prev = traj.last();
        match stepper(prev).and_then(|r| model.check_admissible(&r.next.q).map(|_| r)) {
            Ok(mut r) => {
                r.next.t = initial.t + k as f64 * h;
                traj.points.push(r.next);
                traj.midpoints.push(r.midpoint);
                traj.stats.push(r.stats);
            }
            Err(e) => return Err(fail(k, e, traj)),
        }
    }
    Ok(traj)
}

/// Integrates with the Simpson scheme over a whole number of steps.
pub fn integrate<M: LagrangianModel + ?Sized>(
    model: &M,
    initial: &PhasePoint,
    h: f64,
    t_end: f64,
    cfg: &StepConfig,
) -> core::result::Result<Trajectory, IntegrationError> {
    integrate_with(model, initial, h, t_end, |prev| step(model, prev, h, cfg))
}

/// Largest Newton residual over a trajectory, or 0 when it has no steps.
pub fn max_residual(traj: &Trajectory) -> f64 {
    norm_inf(&traj.stats.iter().map(|s| s.final_residual_norm).collect::<Vec<_>>())
}
