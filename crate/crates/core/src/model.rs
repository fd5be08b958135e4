//! Lagrangian systems of the form `L(q, q̇) = ½ q̇ᵀ M(q) q̇ − V(q)`.
//!
//! Every integrator in this crate consumes a [`LagrangianModel`]. Models supply
//! the mass matrix and potential together with their first and second
//! derivatives in closed form; [`validate_model`] cross-checks those
//! derivatives against central finite differences.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::{condition_inf, symmetric_eigenvalues, Lu, Matrix, Tensor3, Tensor4};
use crate::math::{abs, norm_inf};

/// Generalized coordinates `q`, length `n`.
pub type Coordinates = Vec<f64>;

/// Generalized momenta `p`, length `n`.
pub type Momentum = Vec<f64>;

/// One sample of the discrete flow.
#[derive(Debug, Clone, PartialEq)]
pub struct PhasePoint {
    pub t: f64,
    pub q: Coordinates,
    pub p: Momentum,
}

impl PhasePoint {
    pub fn new(t: f64, q: Coordinates, p: Momentum) -> Self {
        debug_assert_eq!(q.len(), p.len());
        Self { t, q, p }
    }
}

/// `M(q)` with its first and second coordinate derivatives.
#[derive(Debug, Clone, PartialEq)]
pub struct MassTensorBundle {
    pub mass: Matrix,
    pub dmass: Tensor3,
    pub d2mass: Tensor4,
}

/// A mechanical system with configuration-dependent mass matrix.
///
/// Implementations must be pure: the same `q` always yields the same output.
pub trait LagrangianModel: Send + Sync {
    fn name(&self) -> &str;

    /// Degree-of-freedom count `n`.
    fn dof(&self) -> usize;

    fn mass(&self, q: &[f64]) -> Matrix;

    /// `∂_γ M_αβ`, indexed `[γ][α][β]`.
    fn mass_gradient(&self, q: &[f64]) -> Tensor3;

    /// `∂_γ ∂_δ M_αβ`, indexed `[γ][δ][α][β]`.
    fn mass_hessian(&self, q: &[f64]) -> Tensor4;

    fn potential(&self, q: &[f64]) -> f64;

    fn potential_gradient(&self, q: &[f64]) -> Vec<f64>;

    /// `K_γδ = ∂_γ ∂_δ V`.
    fn potential_hessian(&self, q: &[f64]) -> Matrix;

    /// Rejects configurations on excluded submanifolds (e.g. Euler-angle
    /// gimbal lock).
    fn check_admissible(&self, _q: &[f64]) -> Result<()> {
        Ok(())
    }

    /// Indices of cyclic coordinates, whose momenta are conserved.
    fn cyclic_coordinates(&self) -> &[usize] {
        &[]
    }

    fn mass_bundle(&self, q: &[f64]) -> MassTensorBundle {
        MassTensorBundle {
            mass: self.mass(q),
            dmass: self.mass_gradient(q),
            d2mass: self.mass_hessian(q),
        }
    }
}

pub(crate) fn check_len(context: &'static str, expected: usize, v: &[f64]) -> Result<()> {
    if v.len() != expected {
        return Err(Error::DimensionMismatch {
            context,
            expected,
            found: v.len(),
        });
    }
    Ok(())
}

/// `½ q̇ᵀ M(q) q̇ − V(q)`.
pub fn lagrangian<M: LagrangianModel + ?Sized>(model: &M, q: &[f64], qdot: &[f64]) -> Result<f64> {
    let n = model.dof();
    check_len("lagrangian q", n, q)?;
    check_len("lagrangian qdot", n, qdot)?;
    Ok(0.5 * model.mass(q).bilinear(qdot, qdot) - model.potential(q))
}

/// Solves `M(q) v = p`, mapping a singular mass matrix to [`Error::SingularMass`].
pub(crate) fn velocity_from_momentum<M: LagrangianModel + ?Sized>(
    model: &M,
    q: &[f64],
    p: &[f64],
) -> Result<Vec<f64>> {
    let mass = model.mass(q);
    let lu = Lu::factor(&mass).map_err(|_| Error::SingularMass {
        condition: condition_inf(&mass),
    })?;
    Ok(lu.solve(p))
}

/// Hamiltonian `½ pᵀ M(q)⁻¹ p + V(q)`.
pub fn energy<M: LagrangianModel + ?Sized>(model: &M, point: &PhasePoint) -> Result<f64> {
    let n = model.dof();
    check_len("energy q", n, &point.q)?;
    check_len("energy p", n, &point.p)?;
    let v = velocity_from_momentum(model, &point.q, &point.p)?;
    let kinetic: f64 = 0.5 * point.p.iter().zip(&v).map(|(a, b)| a * b).sum::<f64>();
    Ok(kinetic + model.potential(&point.q))
}

/// `p = M(q₀) q̇₀`.
pub fn initial_momentum<M: LagrangianModel + ?Sized>(
    model: &M,
    q0: &[f64],
    qdot0: &[f64],
) -> Result<Momentum> {
    let n = model.dof();
    check_len("initial_momentum q", n, q0)?;
    check_len("initial_momentum qdot", n, qdot0)?;
    Ok(model.mass(q0).mul_vec(qdot0))
}

/// Findings of [`validate_model`]. Deviations are relative to the largest
/// entry of the analytic quantity being checked.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub samples: usize,
    pub max_mass_asymmetry: f64,
    pub min_mass_eigenvalue: f64,
    pub max_mass_condition: f64,
    pub dmass_deviation: f64,
    pub d2mass_deviation: f64,
    pub grad_potential_deviation: f64,
    pub hess_potential_deviation: f64,
    pub max_hess_asymmetry: f64,
}

impl ValidationReport {
    /// Condition number beyond which a sample is reported as near-singular.
    pub const NEAR_SINGULAR_CONDITION: f64 = 1e12;

    pub fn positive_definite(&self) -> bool {
        self.min_mass_eigenvalue > 0.0 && self.max_mass_condition < Self::NEAR_SINGULAR_CONDITION
    }

    pub fn near_singular(&self) -> bool {
        !(self.max_mass_condition < Self::NEAR_SINGULAR_CONDITION)
    }

    /// Names of the checks whose deviation exceeds `tolerance`.
    pub fn failures(&self, tolerance: f64) -> Vec<&'static str> {
        let mut failed = Vec::new();
        if self.max_mass_asymmetry != 0.0 {
            failed.push("mass symmetry");
        }
        if !self.positive_definite() {
            failed.push("mass positive-definiteness");
        }
        for (name, dev) in [
            ("dmass", self.dmass_deviation),
            ("d2mass", self.d2mass_deviation),
            ("grad_potential", self.grad_potential_deviation),
            ("hess_potential", self.hess_potential_deviation),
        ] {
            if !(dev <= tolerance) {
                failed.push(name);
            }
        }
        if !(self.max_hess_asymmetry <= tolerance) {
            failed.push("hess_potential symmetry");
        }
        failed
    }

    pub fn passes(&self, tolerance: f64) -> bool {
        self.failures(tolerance).is_empty()
    }
}

/// `‖a − b‖∞ / ‖a‖∞`, with `0/0 = 0` and an absolute fallback when `a ≡ 0`.
pub(crate) fn relative_deviation(analytic: &[f64], approx: &[f64]) -> f64 {
    let diff = analytic
        .iter()
        .zip(approx)
        .fold(0.0_f64, |acc, (a, b)| acc.max(abs(a - b)));
    if diff == 0.0 {
        return 0.0;
    }
    let scale = norm_inf(analytic);
    if scale == 0.0 {
        diff
    } else {
        diff / scale
    }
}

fn perturbed(q: &[f64], i: usize, delta: f64) -> Vec<f64> {
    let mut x = q.to_vec();
    x[i] += delta;
    x
}

/// Checks symmetry and definiteness of `M` and compares every analytic
/// derivative with a central finite difference of step `fd_step`.
pub fn validate_model<M: LagrangianModel + ?Sized>(
    model: &M,
    samples: &[Coordinates],
    fd_step: f64,
) -> Result<ValidationReport> {
    if !(fd_step > 0.0) {
        return Err(Error::Domain {
            what: "fd_step",
            value: fd_step,
        });
    }
    let n = model.dof();
    let mut report = ValidationReport {
        samples: samples.len(),
        max_mass_asymmetry: 0.0,
        min_mass_eigenvalue: f64::INFINITY,
        max_mass_condition: 0.0,
        dmass_deviation: 0.0,
        d2mass_deviation: 0.0,
        grad_potential_deviation: 0.0,
        hess_potential_deviation: 0.0,
        max_hess_asymmetry: 0.0,
    };
    let two_h = 2.0 * fd_step;

    for q in samples {
        check_len("validate_model sample", n, q)?;
        let mass = model.mass(q);
        report.max_mass_asymmetry = report.max_mass_asymmetry.max(mass.asymmetry());
        let ev = symmetric_eigenvalues(&mass);
        report.min_mass_eigenvalue = report.min_mass_eigenvalue.min(ev[0]);
        report.max_mass_condition = report.max_mass_condition.max(condition_inf(&mass));

        let dmass = model.mass_gradient(q);
        let d2mass = model.mass_hessian(q);
        let mut dmass_fd = Tensor3::zeros(n);
        let mut d2mass_fd = Tensor4::zeros(n);
        let grad = model.potential_gradient(q);
        let hess = model.potential_hessian(q);
        let mut grad_fd = Vec::with_capacity(n);
        let mut hess_fd = Matrix::zeros(n, n);

        for g in 0..n {
            let qp = perturbed(q, g, fd_step);
            let qm = perturbed(q, g, -fd_step);

            let (mp, mm) = (model.mass(&qp), model.mass(&qm));
            for a in 0..n {
                for b in 0..n {
                    dmass_fd.set(g, a, b, (mp[(a, b)] - mm[(a, b)]) / two_h);
                }
            }
            let (dp, dm) = (model.mass_gradient(&qp), model.mass_gradient(&qm));
            for d in 0..n {
                for a in 0..n {
                    for b in 0..n {
                        d2mass_fd.set(g, d, a, b, (dp.get(d, a, b) - dm.get(d, a, b)) / two_h);
                    }
                }
            }
            grad_fd.push((model.potential(&qp) - model.potential(&qm)) / two_h);
            let (gp, gm) = (model.potential_gradient(&qp), model.potential_gradient(&qm));
            for d in 0..n {
                hess_fd[(g, d)] = (gp[d] - gm[d]) / two_h;
            }
        }

        report.dmass_deviation = report
            .dmass_deviation
            .max(relative_deviation(dmass.as_slice(), dmass_fd.as_slice()));
        report.d2mass_deviation = report
            .d2mass_deviation
            .max(relative_deviation(d2mass.as_slice(), d2mass_fd.as_slice()));
        report.grad_potential_deviation = report
            .grad_potential_deviation
            .max(relative_deviation(&grad, &grad_fd));
        report.hess_potential_deviation = report
            .hess_potential_deviation
            .max(relative_deviation(hess.as_slice(), hess_fd.as_slice()));
        report.max_hess_asymmetry = report.max_hess_asymmetry.max(hess.asymmetry());
    }
    Ok(report)
}


#[cfg(test)]
mod tests {
    use super::test_models::Quadratic;
    use super::*;
    use alloc::vec;

    #[test]
    fn lagrangian_kinetic_only() {
        let m = Quadratic::free(&[1.0]);
        assert_eq!(lagrangian(&m, &[0.0], &[2.0]).unwrap(), 2.0);
    }

    #[test]
    fn lagrangian_at_rest_is_minus_potential() {
        let m = Quadratic::oscillator(1.0, 3.0);
        assert_eq!(lagrangian(&m, &[2.0], &[0.0]).unwrap(), -6.0);
    }

    #[test]
    fn lagrangian_rejects_wrong_length() {
        let m = Quadratic::free(&[1.0]);
        assert!(matches!(
            lagrangian(&m, &[0.0, 1.0], &[2.0]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn energy_identity_mass() {
        let m = Quadratic::free(&[1.0]);
        let e = energy(&m, &PhasePoint::new(0.0, vec![0.3], vec![2.0])).unwrap();
        assert_eq!(e, 2.0);
    }

    #[test]
    fn energy_reports_singular_mass() {
        let m = Quadratic::free(&[0.0]);
        let err = energy(&m, &PhasePoint::new(0.0, vec![0.0], vec![1.0])).unwrap_err();
        assert!(matches!(err, Error::SingularMass { .. }));
    }

    #[test]
    fn initial_momentum_cases() {
        let m = Quadratic::free(&[3.0]);
        assert_eq!(initial_momentum(&m, &[0.0], &[2.0]).unwrap(), vec![6.0]);
        assert_eq!(initial_momentum(&m, &[0.0], &[0.0]).unwrap(), vec![0.0]);
    }

    #[test]
    fn constant_mass_has_exactly_zero_dmass_deviation() {
        let m = Quadratic::oscillator(2.0, 1.0);
        let r = validate_model(&m, &[vec![0.1], vec![-1.2]], 1e-6).unwrap();
        assert_eq!(r.dmass_deviation, 0.0);
        assert_eq!(r.d2mass_deviation, 0.0);
        assert!(r.passes(1e-6));
    }

    #[test]
    fn validate_rejects_nonpositive_step() {
        let m = Quadratic::free(&[1.0]);
        assert!(validate_model(&m, &[vec![0.0]], 0.0).is_err());
    }
}
