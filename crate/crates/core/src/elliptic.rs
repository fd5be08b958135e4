//! Closed-form nutation of the symmetric heavy top.
//!
//! With `u = cos θ`, energy and the two cyclic momenta reduce the nutation
//! to `u̇² = f(u)` with the cubic
//!
//! ```text
//! f(u) = (1 − u²)(2E − 2m u) − (b − a u)²,   a = p_ψ/I,  b = p_φ/I,
//! ```
//!
//! whose roots `u₁ ≤ u₂ ≤ 1 ≤ u₃` bound the motion to `u₁ ≤ u ≤ u₂`. The
//! solution is `u(t) = u₁ + (u₂ − u₁) sn²(κ t + δ | k²)` with
//! `k² = (u₂ − u₁)/(u₃ − u₁)` and `κ = ½√(c₃(u₃ − u₁))`. This is the real
//! branch `℘(t + ω₃)` of the Weierstrass form, mapped affinely onto `u`.

use crate::error::{Error, Result};
use crate::math::{abs, acos, asin, cos, cosh, sin, sqrt, tanh};
use crate::systems::{top_conserved_momenta, LagrangeTopParams};

/// Carlson's symmetric integral `R_F(x, y, z)` by duplication.
pub fn carlson_rf(x: f64, y: f64, z: f64) -> Result<f64> {
    for v in [x, y, z] {
        if !(v >= 0.0) || !v.is_finite() {
            return Err(Error::Domain {
                what: "carlson_rf argument",
                value: v,
            });
        }
    }
    let zeros = [x, y, z].iter().filter(|v| **v == 0.0).count();
    if zeros > 1 {
        return Err(Error::Domain {
            what: "carlson_rf zero arguments",
            value: zeros as f64,
        });
    }
    let (mut x, mut y, mut z) = (x, y, z);
    loop {
        let mu = (x + y + z) / 3.0;
        let (dx, dy, dz) = (1.0 - x / mu, 1.0 - y / mu, 1.0 - z / mu);
        if abs(dx).max(abs(dy)).max(abs(dz)) < 1e-3 {
            let e2 = dx * dy - dz * dz;
            let e3 = dx * dy * dz;
            return Ok((1.0 - e2 / 10.0 + e3 / 14.0 + e2 * e2 / 24.0 - 3.0 * e2 * e3 / 44.0) / sqrt(mu));
        }
        let (sx, sy, sz) = (sqrt(x), sqrt(y), sqrt(z));
        let lambda = sx * sy + sy * sz + sz * sx;
        x = 0.25 * (x + lambda);
        y = 0.25 * (y + lambda);
        z = 0.25 * (z + lambda);
    }
}

fn check_parameter(m: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&m) {
        return Err(Error::Domain {
            what: "elliptic parameter k²",
            value: m,
        });
    }
    Ok(())
}

/// Complete integral `K(m) = R_F(0, 1 − m, 1)` for `0 ≤ m < 1`.
pub fn complete_k(m: f64) -> Result<f64> {
    check_parameter(m)?;
    if m == 1.0 {
        return Err(Error::Domain {
            what: "complete K at k² = 1",
            value: m,
        });
    }
    carlson_rf(0.0, 1.0 - m, 1.0)
}

/// Incomplete integral `F(φ | m)` for `|φ| ≤ π/2`.
pub fn incomplete_f(phi: f64, m: f64) -> Result<f64> {
    check_parameter(m)?;
    if abs(phi) > core::f64::consts::FRAC_PI_2 * (1.0 + 1e-15) {
        return Err(Error::Domain {
            what: "amplitude outside [−π/2, π/2]",
            value: phi,
        });
    }
    let (s, c) = (sin(phi), cos(phi));
    if s == 0.0 {
        return Ok(0.0);
    }
    Ok(s * carlson_rf(c * c, 1.0 - m * s * s, 1.0)?)
}

/// Jacobi `(sn, cn, dn)(u | m)` by the descending Landen (AGM) scheme.
pub fn jacobi_elliptic(u: f64, m: f64) -> Result<(f64, f64, f64)> {
    check_parameter(m)?;
    if !u.is_finite() {
        return Err(Error::Domain {
            what: "Jacobi argument",
            value: u,
        });
    }
    if m == 0.0 {
        return Ok((sin(u), cos(u), 1.0));
    }
    if m == 1.0 {
        let sech = 1.0 / cosh(u);
        return Ok((tanh(u), sech, sech));
    }
    const LEVELS: usize = 16;
    let mut a = [0.0; LEVELS];
    let mut c = [0.0; LEVELS];
    a[0] = 1.0;
    let mut b = sqrt(1.0 - m);
    c[0] = sqrt(m);
    let mut n = 0;
    while abs(c[n]) > f64::EPSILON && n + 1 < LEVELS {
        a[n + 1] = 0.5 * (a[n] + b);
        c[n + 1] = 0.5 * (a[n] - b);
        b = sqrt(a[n] * b);
        n += 1;
    }
    let mut phi = libm::ldexp(a[n] * u, n as i32);
    while n > 0 {
        phi = 0.5 * (phi + asin(c[n] * sin(phi) / a[n]));
        n -= 1;
    }
    let (s, co) = (sin(phi), cos(phi));
    Ok((s, co, sqrt(1.0 - m * s * s)))
}

pub fn jacobi_sn(u: f64, m: f64) -> Result<f64> {
    Ok(jacobi_elliptic(u, m)?.0)
}

/// Constants of the reduced nutation problem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TopMotionConstants {
    pub p_phi: f64,
    pub p_psi: f64,
    /// `a = p_ψ/I`.
    pub a: f64,
    /// `b = p_φ/I`.
    pub b: f64,
    /// `m = m_top g ℓ / I`.
    pub m: f64,
    /// Energy per unit `I`: `E = ½θ̇₀² + (b − a u₀)²/(2 sin²θ₀) + m u₀`.
    pub energy: f64,
}

impl TopMotionConstants {
    /// The energy-like constant `c = I·E`.
    pub fn c(&self, inertia: f64) -> f64 {
        inertia * self.energy
    }
}

/// `f(u) = c₃u³ + c₂u² + c₁u + c₀` with its ordered real roots.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NutationCubic {
    /// `[c₃, c₂, c₁, c₀]`.
    pub coefficients: [f64; 4],
    pub roots: [f64; 3],
    pub u0: f64,
    pub u_dot0: f64,
}

/// The Weierstrass normal form `ż² = 4z³ − g₂z − g₃` with `u = scale·z + shift`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeierstrassForm {
    pub g2: f64,
    pub g3: f64,
    pub scale: f64,
    pub shift: f64,
    /// Roots `e₁ ≥ e₂ ≥ e₃` of `4z³ − g₂z − g₃`.
    pub e: [f64; 3],
}

fn polish(c: &[f64; 4], mut x: f64) -> f64 {
    for _ in 0..8 {
        let f = ((c[0] * x + c[1]) * x + c[2]) * x + c[3];
        let df = (3.0 * c[0] * x + 2.0 * c[1]) * x + c[2];
        if df == 0.0 {
            break;
        }
        let dx = f / df;
        x -= dx;
        if abs(dx) <= f64::EPSILON * abs(x).max(1.0) {
            break;
        }
    }
    x
}

fn trig_roots(c: &[f64; 4]) -> [f64; 3] {
    let (a, b, cc) = (c[1] / c[0], c[2] / c[0], c[3] / c[0]);
    let p = b - a * a / 3.0;
    let q = 2.0 * a * a * a / 27.0 - a * b / 3.0 + cc;
    let shift = -a / 3.0;
    if p >= 0.0 {
        // one real root; the others collapse onto it for the physical case
        let r = libm::cbrt(-q / 2.0 + sqrt(q * q / 4.0 + p * p * p / 27.0))
            + libm::cbrt(-q / 2.0 - sqrt(q * q / 4.0 + p * p * p / 27.0));
        return [r + shift; 3];
    }
    let r = 2.0 * sqrt(-p / 3.0);
    let arg = (3.0 * q / (p * r)).clamp(-1.0, 1.0);
    let theta = acos(arg) / 3.0;
    let tau = 2.0 * core::f64::consts::PI / 3.0;
    let mut roots = [
        r * cos(theta) + shift,
        r * cos(theta - tau) + shift,
        r * cos(theta - 2.0 * tau) + shift,
    ];
    roots.sort_by(|x, y| x.total_cmp(y));
    roots
}

/// Roots of `a x² + b x + c` without cancellation.
fn quadratic_roots(a: f64, b: f64, c: f64) -> Option<(f64, f64)> {
    let disc = b * b - 4.0 * a * c;
    if disc < -1e-12 * b * b {
        return None;
    }
    let q = -0.5 * (b + libm::copysign(sqrt(disc.max(0.0)), b));
    let (r1, r2) = (q / a, if q != 0.0 { c / q } else { q / a });
    Some(if r1 <= r2 { (r1, r2) } else { (r2, r1) })
}

impl NutationCubic {
    /// Builds the cubic and its roots. When `u_dot0 == 0`, `u0` is snapped
    /// in as an exact root and the remaining two come from deflation.
    pub fn new(coefficients: [f64; 4], u0: f64, u_dot0: f64) -> Result<Self> {
        let c = coefficients;
        if !(c[0] > 0.0) || c.iter().any(|v| !v.is_finite()) {
            return Err(Error::ModelInconsistency("nutation polynomial must be a cubic with positive leading term"));
        }
        let roots = if u_dot0 == 0.0 {
            // f(u) = (u − u₀)(c₃u² + βu + γ)
            let beta = c[1] + c[0] * u0;
            let gamma = c[2] + beta * u0;
            let (r1, r2) = quadratic_roots(c[0], beta, gamma)
                .ok_or(Error::ModelInconsistency("nutation cubic has complex roots"))?;
            let mut r = [u0, polish(&c, r1), polish(&c, r2)];
            r.sort_by(|x, y| x.total_cmp(y));
            r
        } else {
            let r = trig_roots(&c);
            let mut r = [polish(&c, r[0]), polish(&c, r[1]), polish(&c, r[2])];
            r.sort_by(|x, y| x.total_cmp(y));
            r
        };
        let cubic = Self {
            coefficients: c,
            roots,
            u0,
            u_dot0,
        };
        let scale = c.iter().fold(0.0f64, |s, v| s.max(abs(*v)));
        for r in roots {
            if abs(cubic.eval(r)) > 1e-10 * scale.max(1.0) {
                return Err(Error::ModelInconsistency("nutation cubic root did not converge"));
            }
        }
        let tol = 1e-9;
        if roots[0] < -1.0 - tol || roots[1] > 1.0 + tol || roots[2] < 1.0 - tol {
            return Err(Error::ModelInconsistency("nutation band not inside [−1, 1]"));
        }
        if u0 < roots[0] - tol || u0 > roots[1] + tol {
            return Err(Error::ModelInconsistency("initial state outside the nutation band"));
        }
        Ok(cubic)
    }

    pub fn eval(&self, u: f64) -> f64 {
        let c = &self.coefficients;
        ((c[0] * u + c[1]) * u + c[2]) * u + c[3]
    }

    /// `[u₁, u₂]`, the range of `cos θ`.
    pub fn oscillation_band(&self) -> (f64, f64) {
        (self.roots[0], self.roots[1])
    }

    pub fn is_degenerate(&self) -> bool {
        self.roots[1] - self.roots[0] <= 1e-12 * (self.roots[2] - self.roots[0])
    }

    /// `k²` and `κ` of the Jacobi form.
    pub fn modulus(&self) -> (f64, f64) {
        let [u1, u2, u3] = self.roots;
        ((u2 - u1) / (u3 - u1), 0.5 * sqrt(self.coefficients[0] * (u3 - u1)))
    }

    /// Initial phase `δ` with `u(0) = u₀` and the sign of `u̇(0)`.
    pub fn phase(&self) -> Result<f64> {
        let [u1, u2, _] = self.roots;
        let (k2, _) = self.modulus();
        let s = sqrt(((self.u0 - u1) / (u2 - u1)).clamp(0.0, 1.0));
        let delta = incomplete_f(asin(s), k2)?;
        Ok(if self.u_dot0 < 0.0 { -delta } else { delta })
    }

    pub fn weierstrass(&self) -> WeierstrassForm {
        let c = &self.coefficients;
        let scale = 4.0 / c[0];
        let shift = -c[1] / (3.0 * c[0]);
        let e = [
            (self.roots[2] - shift) / scale,
            (self.roots[1] - shift) / scale,
            (self.roots[0] - shift) / scale,
        ];
        WeierstrassForm {
            g2: -4.0 * (e[0] * e[1] + e[1] * e[2] + e[2] * e[0]),
            g3: 4.0 * e[0] * e[1] * e[2],
            scale,
            shift,
            e,
        }
    }
}

/// Reduced constants for a top started at `q0` with velocity `qdot0`.
pub fn top_motion_constants(params: &LagrangeTopParams, q0: &[f64], qdot0: &[f64]) -> Result<TopMotionConstants> {
    let (s, u0) = (sin(q0[1]), cos(q0[1]));
    if abs(s) < crate::systems::TOP_SIN_GUARD {
        return Err(Error::Inadmissible {
            reason: "nutation constants need sin θ₀ ≠ 0",
        });
    }
    let (p_phi, p_psi) = top_conserved_momenta(params, q0, qdot0);
    let (a, b, m) = (p_psi / params.inertia, p_phi / params.inertia, params.m());
    let energy = 0.5 * qdot0[1] * qdot0[1] + (b - a * u0) * (b - a * u0) / (2.0 * s * s) + m * u0;
    Ok(TopMotionConstants {
        p_phi,
        p_psi,
        a,
        b,
        m,
        energy,
    })
}

/// Cubic `f(u) = u̇²` for a top started at `q0` with velocity `qdot0`.
pub fn nutation_cubic(params: &LagrangeTopParams, q0: &[f64], qdot0: &[f64]) -> Result<NutationCubic> {
    let k = top_motion_constants(params, q0, qdot0)?;
    let coefficients = [
        2.0 * k.m,
        -2.0 * k.energy - k.a * k.a,
        2.0 * k.a * k.b - 2.0 * k.m,
        2.0 * k.energy - k.b * k.b,
    ];
    NutationCubic::new(coefficients, cos(q0[1]), -sin(q0[1]) * qdot0[1])
}

/// Exact `θ(t)`. A degenerate band yields the constant `θ₀`.
pub fn exact_nutation(cubic: &NutationCubic, t: f64) -> Result<f64> {
    if !t.is_finite() {
        return Err(Error::Domain {
            what: "nutation time",
            value: t,
        });
    }
    if cubic.is_degenerate() {
        return Ok(acos(cubic.u0.clamp(-1.0, 1.0)));
    }
    let [u1, u2, _] = cubic.roots;
    let (k2, kappa) = cubic.modulus();
    let sn = jacobi_sn(kappa * t + cubic.phase()?, k2)?;
    Ok(acos((u1 + (u2 - u1) * sn * sn).clamp(-1.0, 1.0)))
}

/// Nutation period `2K(k²)/κ`.
pub fn nutation_period(cubic: &NutationCubic) -> Result<f64> {
    if cubic.is_degenerate() {
        return Err(Error::DegenerateBand);
    }
    let (k2, kappa) = cubic.modulus();
    Ok(2.0 * complete_k(k2)? / kappa)
}
