//! Concrete models: the planar double pendulum and the symmetric heavy top.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::{Matrix, Tensor3, Tensor4};
use crate::math::{abs, cos, sin, sin_cos, sqrt};
use crate::model::{initial_momentum, LagrangianModel, PhasePoint};

const PI: f64 = core::f64::consts::PI;

fn check_positive(values: &[(&'static str, f64)]) -> Result<()> {
    for &(what, value) in values {
        if !(value > 0.0) || !value.is_finite() {
            return Err(Error::Domain { what, value });
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DoublePendulumParams {
    pub m1: f64,
    pub m2: f64,
    pub l1: f64,
    pub l2: f64,
    pub g: f64,
}

impl DoublePendulumParams {
    /// Unit masses with `ℓ₁ = ℓ₂ = g/ω₀`, `ω₀ = 2π s⁻¹`, `g = 9.81`.
    ///
    /// The length is `g/ω₀`, not the dimensionally natural `g/ω₀²`,
    /// giving `ℓ ≈ 1.5613 m`.
    pub fn table1() -> Self {
        let g = 9.81;
        let l = g / (2.0 * PI);
        Self {
            m1: 1.0,
            m2: 1.0,
            l1: l,
            l2: l,
            g,
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_positive(&[
            ("m1", self.m1),
            ("m2", self.m2),
            ("l1", self.l1),
            ("l2", self.l2),
            ("g", self.g),
        ])
    }
}

/// Two point masses on massless rods, `q = (q₁, q₂)` measured from the
/// downward vertical.
#[derive(Debug, Clone, PartialEq)]
pub struct DoublePendulum {
    pub params: DoublePendulumParams,
}

pub fn double_pendulum(params: DoublePendulumParams) -> Result<DoublePendulum> {
    params.validate()?;
    Ok(DoublePendulum { params })
}

impl DoublePendulum {
    fn coupling(&self) -> f64 {
        let p = &self.params;
        p.m2 * p.l1 * p.l2
    }
}

impl LagrangianModel for DoublePendulum {
    fn name(&self) -> &str {
        "double pendulum"
    }

    fn dof(&self) -> usize {
        2
    }

    fn mass(&self, q: &[f64]) -> Matrix {
        let p = &self.params;
        let off = self.coupling() * cos(q[0] - q[1]);
        Matrix::from_rows(&[&[(p.m1 + p.m2) * p.l1 * p.l1, off], &[off, p.m2 * p.l2 * p.l2]])
    }

    fn mass_gradient(&self, q: &[f64]) -> Tensor3 {
        let s = self.coupling() * sin(q[0] - q[1]);
        let mut d = Tensor3::zeros(2);
        d.set_sym(0, 0, 1, -s);
        d.set_sym(1, 0, 1, s);
        d
    }

    fn mass_hessian(&self, q: &[f64]) -> Tensor4 {
        let c = self.coupling() * cos(q[0] - q[1]);
        let mut d = Tensor4::zeros(2);
        d.set_sym(0, 0, 0, 1, -c);
        d.set_sym(0, 1, 0, 1, c);
        d.set_sym(1, 1, 0, 1, -c);
        d
    }

    fn potential(&self, q: &[f64]) -> f64 {
        let p = &self.params;
        -(p.m1 + p.m2) * p.g * p.l1 * cos(q[0]) - p.m2 * p.g * p.l2 * cos(q[1])
    }

    fn potential_gradient(&self, q: &[f64]) -> Vec<f64> {
        let p = &self.params;
        vec![(p.m1 + p.m2) * p.g * p.l1 * sin(q[0]), p.m2 * p.g * p.l2 * sin(q[1])]
    }

    fn potential_hessian(&self, q: &[f64]) -> Matrix {
        let p = &self.params;
        Matrix::from_diagonal(&[(p.m1 + p.m2) * p.g * p.l1 * cos(q[0]), p.m2 * p.g * p.l2 * cos(q[1])])
    }
}

/// Symmetric heavy top with `I₁ = I₂ = I`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LagrangeTopParams {
    pub m_top: f64,
    /// Transverse moment of inertia `I`.
    pub inertia: f64,
    /// Axial moment of inertia `I₃`.
    pub i3: f64,
    /// Distance from the fixed point to the centre of mass.
    pub l: f64,
    pub g: f64,
}

impl LagrangeTopParams {
    /// The looping motion. `I = 2.33e-3` gives the nutation period `1.84671 s`.
    pub fn table3() -> Self {
        Self {
            m_top: 0.1,
            inertia: 2.33e-3,
            i3: 1.25e-4,
            l: 0.15,
            g: 9.81,
        }
    }

    /// The cusp motion, scaled so that `m = 4π²` with `I = 1`, `I₃ = 2`.
    pub fn table4() -> Self {
        let g = 9.81;
        Self {
            m_top: 1.0,
            inertia: 1.0,
            i3: 2.0,
            l: 4.0 * PI * PI / g,
            g,
        }
    }

    /// `m = m_top g ℓ / I`, in 1/s².
    pub fn m(&self) -> f64 {
        self.m_top * self.g * self.l / self.inertia
    }

    pub fn validate(&self) -> Result<()> {
        check_positive(&[
            ("m_top", self.m_top),
            ("inertia", self.inertia),
            ("i3", self.i3),
            ("l", self.l),
            ("g", self.g),
        ])
    }
}

/// Euler angles `q = (φ, θ, ψ)`: precession, nutation, spin.
#[derive(Debug, Clone, PartialEq)]
pub struct LagrangeTop {
    pub params: LagrangeTopParams,
}

/// Configurations closer than this to `sin θ = 0` are rejected.
pub const TOP_SIN_GUARD: f64 = 1e-10;

pub fn lagrange_top(params: LagrangeTopParams) -> Result<LagrangeTop> {
    params.validate()?;
    Ok(LagrangeTop { params })
}

impl LagrangianModel for LagrangeTop {
    fn name(&self) -> &str {
        "Lagrange top"
    }

    fn dof(&self) -> usize {
        3
    }

    fn mass(&self, q: &[f64]) -> Matrix {
        let (i, i3) = (self.params.inertia, self.params.i3);
        let (s, c) = sin_cos(q[1]);
        Matrix::from_rows(&[
            &[i * s * s + i3 * c * c, 0.0, i3 * c],
            &[0.0, i, 0.0],
            &[i3 * c, 0.0, i3],
        ])
    }

    fn mass_gradient(&self, q: &[f64]) -> Tensor3 {
        let (i, i3) = (self.params.inertia, self.params.i3);
        let mut d = Tensor3::zeros(3);
        d.set(1, 0, 0, (i - i3) * sin(2.0 * q[1]));
        d.set_sym(1, 0, 2, -i3 * sin(q[1]));
        d
    }

    fn mass_hessian(&self, q: &[f64]) -> Tensor4 {
        let (i, i3) = (self.params.inertia, self.params.i3);
        let mut d = Tensor4::zeros(3);
        d.set(1, 1, 0, 0, 2.0 * (i - i3) * cos(2.0 * q[1]));
        d.set_sym(1, 1, 0, 2, -i3 * cos(q[1]));
        d
    }

    fn potential(&self, q: &[f64]) -> f64 {
        self.params.inertia * self.params.m() * cos(q[1])
    }

    fn potential_gradient(&self, q: &[f64]) -> Vec<f64> {
        vec![0.0, -self.params.inertia * self.params.m() * sin(q[1]), 0.0]
    }

    fn potential_hessian(&self, q: &[f64]) -> Matrix {
        Matrix::from_diagonal(&[0.0, -self.params.inertia * self.params.m() * cos(q[1]), 0.0])
    }

    fn check_admissible(&self, q: &[f64]) -> Result<()> {
        if q.len() == 3 && abs(sin(q[1])) < TOP_SIN_GUARD {
            return Err(Error::Inadmissible {
                reason: "Euler angles degenerate at sin θ = 0",
            });
        }
        Ok(())
    }

    fn cyclic_coordinates(&self) -> &[usize] {
        &[0, 2]
    }
}

/// `(p_φ, p_ψ)` from angles and angular velocities.
pub fn top_conserved_momenta(params: &LagrangeTopParams, q: &[f64], qdot: &[f64]) -> (f64, f64) {
    let (s, c) = sin_cos(q[1]);
    let p_psi = params.i3 * (qdot[2] + qdot[0] * c);
    (p_psi * c + params.inertia * qdot[0] * s * s, p_psi)
}

/// Either bundled model, for registry lookups.
#[derive(Debug, Clone, PartialEq)]
pub enum System {
    DoublePendulum(DoublePendulum),
    LagrangeTop(LagrangeTop),
}

impl System {
    fn inner(&self) -> &dyn LagrangianModel {
        match self {
            System::DoublePendulum(m) => m,
            System::LagrangeTop(m) => m,
        }
    }

    pub fn as_top(&self) -> Option<&LagrangeTop> {
        match self {
            System::LagrangeTop(t) => Some(t),
            System::DoublePendulum(_) => None,
        }
    }
}

impl LagrangianModel for System {
    fn name(&self) -> &str {
        self.inner().name()
    }
    fn dof(&self) -> usize {
        self.inner().dof()
    }
    fn mass(&self, q: &[f64]) -> Matrix {
        self.inner().mass(q)
    }
    fn mass_gradient(&self, q: &[f64]) -> Tensor3 {
        self.inner().mass_gradient(q)
    }
    fn mass_hessian(&self, q: &[f64]) -> Tensor4 {
        self.inner().mass_hessian(q)
    }
    fn potential(&self, q: &[f64]) -> f64 {
        self.inner().potential(q)
    }
    fn potential_gradient(&self, q: &[f64]) -> Vec<f64> {
        self.inner().potential_gradient(q)
    }
    fn potential_hessian(&self, q: &[f64]) -> Matrix {
        self.inner().potential_hessian(q)
    }
    fn check_admissible(&self, q: &[f64]) -> Result<()> {
        self.inner().check_admissible(q)
    }
    fn cyclic_coordinates(&self) -> &[usize] {
        match self {
            System::DoublePendulum(m) => m.cyclic_coordinates(),
            System::LagrangeTop(m) => m.cyclic_coordinates(),
        }
    }
}

/// A named model together with its initial configuration and velocity.
#[derive(Debug, Clone, PartialEq)]
pub struct Preset {
    pub name: &'static str,
    pub system: System,
    pub q0: Vec<f64>,
    pub qdot0: Vec<f64>,
}

impl Preset {
    /// Phase point at `t = 0` with `p₀ = M(q₀) q̇₀`.
    pub fn initial_point(&self) -> Result<PhasePoint> {
        let p0 = initial_momentum(&self.system, &self.q0, &self.qdot0)?;
        Ok(PhasePoint::new(0.0, self.q0.clone(), p0))
    }
}

pub const PRESET_NAMES: [&str; 3] = ["double-pendulum-table1", "lagrange-top-table3", "lagrange-top-table4"];

pub fn preset(name: &str) -> Option<Preset> {
    let (system, q0, qdot0) = match name {
        "double-pendulum-table1" => (
            System::DoublePendulum(DoublePendulum {
                params: DoublePendulumParams::table1(),
            }),
            vec![PI / 4.0, PI / 3.0],
            vec![0.0, 0.0],
        ),
        "lagrange-top-table3" => (
            System::LagrangeTop(LagrangeTop {
                params: LagrangeTopParams::table3(),
            }),
            vec![0.0, PI / 3.0, 0.0],
            vec![9.2, 0.0, 252.0],
        ),
        "lagrange-top-table4" => (
            System::LagrangeTop(LagrangeTop {
                params: LagrangeTopParams::table4(),
            }),
            vec![0.0, PI / 6.0, 0.0],
            vec![0.0, 0.0, 2.0 * PI],
        ),
        _ => return None,
    };
    let name = PRESET_NAMES.iter().find(|n| **n == name).copied()?;
    Some(Preset {
        name,
        system,
        q0,
        qdot0,
    })
}

/// `p_φ = 2π√3`, `p_ψ = 4π` of the cusp motion.
pub fn table4_momenta() -> (f64, f64) {
    (2.0 * PI * sqrt(3.0), 4.0 * PI)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{validate_model, energy};

    #[test]
    fn pendulum_coupling_cases() {
        let dp = double_pendulum(DoublePendulumParams::table1()).unwrap();
        let l = 9.81 / (2.0 * PI);
        let m = dp.mass(&[0.4, 0.4]);
        assert!((m[(0, 1)] - l * l).abs() < 1e-14);
        assert!((m[(0, 0)] - 2.0 * l * l).abs() < 1e-14);
        let m = dp.mass(&[PI / 2.0, 0.0]);
        assert!(m[(0, 1)].abs() < 1e-15);
    }

    #[test]
    fn rejects_nonpositive_parameters() {
        let mut p = DoublePendulumParams::table1();
        p.l2 = 0.0;
        assert!(double_pendulum(p).is_err());
        let mut t = LagrangeTopParams::table3();
        t.i3 = -1.0;
        assert!(lagrange_top(t).is_err());
    }

    #[test]
    fn top_mass_at_horizontal_axis() {
        let top = lagrange_top(LagrangeTopParams::table3()).unwrap();
        let m = top.mass(&[0.3, PI / 2.0, 1.0]);
        let p = top.params;
        assert!((m[(0, 0)] - p.inertia).abs() < 1e-18);
        assert!(m[(0, 2)].abs() < 1e-19);
        assert_eq!(m[(1, 1)], p.inertia);
        assert_eq!(m[(2, 2)], p.i3);
    }

    #[test]
    fn top_is_flagged_near_singular_at_vertical() {
        let top = lagrange_top(LagrangeTopParams::table4()).unwrap();
        let m = top.mass(&[0.0, 0.0, 0.0]);
        assert_eq!(m[(0, 0)], 2.0);
        assert_eq!(m[(0, 2)], 2.0);
        let r = validate_model(&top, &[vec![0.0, 0.0, 0.0]], 1e-6).unwrap();
        assert!(r.near_singular());
        assert!(top.check_admissible(&[0.0, 0.0, 0.0]).is_err());
        assert!(top.check_admissible(&[0.0, 0.1, 0.0]).is_ok());
    }

    #[test]
    fn table3_potential() {
        let top = lagrange_top(LagrangeTopParams::table3()).unwrap();
        let v = top.potential(&[0.0, PI / 3.0, 0.0]);
        assert!((v - 0.5 * 0.1 * 9.81 * 0.15).abs() < 1e-15);
    }

    #[test]
    fn table4_conserved_momenta() {
        let p = LagrangeTopParams::table4();
        let (pf, ps) = top_conserved_momenta(&p, &[0.0, PI / 6.0, 0.0], &[0.0, 0.0, 2.0 * PI]);
        let (ef, es) = table4_momenta();
        assert!((pf - ef).abs() <= 1e-14 * ef);
        assert!((ps - es).abs() <= 1e-14 * es);
        assert!((p.m() - 4.0 * PI * PI).abs() < 1e-12);
    }

    #[test]
    fn momenta_trivial_cases() {
        let p = LagrangeTopParams::table3();
        assert_eq!(top_conserved_momenta(&p, &[0.0, 1.0, 0.0], &[0.0, 0.7, 0.0]), (0.0, 0.0));
        let (pf, ps) = top_conserved_momenta(&p, &[0.0, PI / 2.0, 0.0], &[2.0, 0.0, 3.0]);
        assert!((pf - 2.0 * p.inertia).abs() < 1e-15);
        assert!((ps - 3.0 * p.i3).abs() < 1e-15);
    }

    #[test]
    fn registry_lookup() {
        for name in PRESET_NAMES {
            let p = preset(name).unwrap();
            assert_eq!(p.name, name);
            let x0 = p.initial_point().unwrap();
            assert!(energy(&p.system, &x0).unwrap().is_finite());
        }
        assert!(preset("triple-pendulum").is_none());
    }

    #[test]
    fn table1_initial_state() {
        let p = preset("double-pendulum-table1").unwrap();
        let x0 = p.initial_point().unwrap();
        assert_eq!(x0.p, vec![0.0, 0.0]);
        assert_eq!(x0.q, vec![PI / 4.0, PI / 3.0]);
    }
}
