//! Damped Newton iteration for square nonlinear systems `F(x) = 0`.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::{Lu, Matrix};
use crate::math::{abs, norm_inf};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonConfig {
    /// Convergence threshold on `‖F(x)‖∞`.
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Step fraction in `(0, 1]`. Values below 1 engage the monotone safeguard.
    pub damping: f64,
    /// Retry once with a finite-difference Jacobian when the supplied one is singular.
    pub fd_fallback: bool,
    pub fd_step: f64,
    /// Extra undamped updates taken once the tolerance is met, each kept only
    /// if the residual stays within tolerance. An absolute tolerance is loose
    /// when the residual is small in scale (tiny `h` or inertia), and one more
    /// quadratically convergent update removes that slack.
    pub polish_iterations: usize,
}

impl Default for NewtonConfig {
    fn default() -> Self {
        Self {
            tolerance: 1e-12,
            max_iterations: 50,
            damping: 1.0,
            fd_fallback: true,
            fd_step: 1e-7,
            polish_iterations: 1,
        }
    }
}

impl NewtonConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tolerance > 0.0) {
            return Err(Error::InvalidConfig("tolerance must be positive"));
        }
        if !(self.fd_step > 0.0) {
            return Err(Error::InvalidConfig("fd_step must be positive"));
        }
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return Err(Error::InvalidConfig("damping must lie in (0, 1]"));
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidConfig("max_iterations must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NewtonOutcome {
    pub solution: Vec<f64>,
    pub iterations: usize,
    pub residual_norm: f64,
    pub converged: bool,
    /// Number of iterations that fell back to a finite-difference Jacobian.
    pub fd_fallbacks: usize,
}

/// Central-difference Jacobian, column `j` perturbed by `step·max(1, |x_j|)`.
pub fn finite_difference_jacobian<F>(mut residual: F, x: &[f64], step: f64) -> Result<Matrix>
where
    F: FnMut(&[f64]) -> Result<Vec<f64>>,
{
    let n = x.len();
    let mut jac: Option<Matrix> = None;
    let mut xp = x.to_vec();
    for j in 0..n {
        let dx = step * abs(x[j]).max(1.0);
        xp[j] = x[j] + dx;
        let fp = residual(&xp)?;
        xp[j] = x[j] - dx;
        let fm = residual(&xp)?;
        xp[j] = x[j];
        let m = jac.get_or_insert_with(|| Matrix::zeros(fp.len(), n));
        for i in 0..fp.len() {
            m[(i, j)] = (fp[i] - fm[i]) / (2.0 * dx);
        }
    }
    Ok(jac.unwrap_or_else(|| Matrix::zeros(0, 0)))
}

/// Runs Newton's method from `x0`.
///
/// Returns `Ok` with `converged == false` when the iteration budget runs out;
/// errors are reserved for singular Jacobians and failing callbacks.
pub fn solve<R, J>(
    mut residual: R,
    mut jacobian: J,
    x0: &[f64],
    cfg: &NewtonConfig,
) -> Result<NewtonOutcome>
where
    R: FnMut(&[f64]) -> Result<Vec<f64>>,
    J: FnMut(&[f64]) -> Result<Matrix>,
{
    cfg.validate()?;
    let mut x = x0.to_vec();
    let mut f = residual(&x)?;
    let mut norm = norm_inf(&f);
    let mut iterations = 0;
    let mut fd_fallbacks = 0;
    let mut polished = 0;

    loop {
        if norm <= cfg.tolerance {
            if polished >= cfg.polish_iterations {
                break;
            }
            polished += 1;
            let lu = match factor(&mut residual, &mut jacobian, &x, cfg) {
                Ok((lu, fd)) => {
                    fd_fallbacks += fd;
                    lu
                }
                Err(_) => break,
            };
            let neg_f: Vec<f64> = f.iter().map(|v| -v).collect();
            let trial: Vec<f64> = x.iter().zip(lu.solve(&neg_f)).map(|(a, d)| a + d).collect();
            let ft = residual(&trial)?;
            let nt = norm_inf(&ft);
            if !(nt <= cfg.tolerance) {
                break;
            }
            x = trial;
            f = ft;
            norm = nt;
            continue;
        }
        if iterations >= cfg.max_iterations {
            break;
        }
        if !norm.is_finite() {
            return Err(Error::NonFinite {
                context: "Newton residual",
            });
        }
        let (lu, fd) = factor(&mut residual, &mut jacobian, &x, cfg)?;
        fd_fallbacks += fd;
        let neg_f: Vec<f64> = f.iter().map(|v| -v).collect();
        let delta = lu.solve(&neg_f);

        if cfg.damping < 1.0 {
            // Monotone safeguard: halve the step until the residual does not grow.
            let mut lambda = cfg.damping;
            let mut accepted = None;
            for _ in 0..32 {
                let trial: Vec<f64> = x.iter().zip(&delta).map(|(a, d)| a + lambda * d).collect();
                let ft = residual(&trial)?;
                let nt = norm_inf(&ft);
                if nt <= norm {
                    accepted = Some((trial, ft, nt));
                    break;
                }
                lambda *= 0.5;
            }
            match accepted {
                Some((xt, ft, nt)) => {
                    x = xt;
                    f = ft;
                    norm = nt;
                }
                None => break,
            }
        } else {
            for (a, d) in x.iter_mut().zip(&delta) {
                *a += d;
            }
            f = residual(&x)?;
            norm = norm_inf(&f);
        }
        iterations += 1;
    }

    Ok(NewtonOutcome {
        converged: norm <= cfg.tolerance,
        solution: x,
        iterations,
        residual_norm: norm,
        fd_fallbacks,
    })
}

/// Factors the Jacobian at `x`, falling back to finite differences when it
/// is singular and the config allows. Returns the number of fallbacks used.
fn factor<R, J>(residual: &mut R, jacobian: &mut J, x: &[f64], cfg: &NewtonConfig) -> Result<(Lu, usize)>
where
    R: FnMut(&[f64]) -> Result<Vec<f64>>,
    J: FnMut(&[f64]) -> Result<Matrix>,
{
    match Lu::factor(&jacobian(x)?) {
        Ok(lu) => Ok((lu, 0)),
        Err(err) if cfg.fd_fallback => {
            let fd = finite_difference_jacobian(residual, x, cfg.fd_step)?;
            Lu::factor(&fd).map(|lu| (lu, 1)).map_err(|_| err)
        }
        Err(err) => Err(err),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn scalar(f: fn(f64) -> f64, df: fn(f64) -> f64, x0: f64, cfg: &NewtonConfig) -> NewtonOutcome {
        solve(
            |x| Ok(vec![f(x[0])]),
            |x| Ok(Matrix::from_rows(&[&[df(x[0])]])),
            &[x0],
            cfg,
        )
        .unwrap()
    }

    #[test]
    fn affine_system_converges_in_one_iteration() {
        let a = Matrix::from_rows(&[&[3.0, 1.0], &[1.0, 2.0]]);
        let b = [1.0, -4.0];
        let out = solve(
            |x| Ok(a.mul_vec(x).iter().zip(&b).map(|(u, v)| u - v).collect()),
            |_| Ok(a.clone()),
            &[10.0, -7.0],
            &NewtonConfig::default(),
        )
        .unwrap();
        assert!(out.converged);
        assert_eq!(out.iterations, 1);
    }

    #[test]
    fn square_root_of_four() {
        let out = scalar(|x| x * x - 4.0, |x| 2.0 * x, 3.0, &NewtonConfig::default());
        assert!(out.converged);
        assert!(out.iterations <= 7);
        assert!((out.solution[0] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn no_real_root_reports_non_convergence() {
        let cfg = NewtonConfig {
            max_iterations: 20,
            ..NewtonConfig::default()
        };
        let out = scalar(|x| x * x + 1.0, |x| 2.0 * x, 0.7, &cfg);
        assert!(!out.converged);
        assert_eq!(out.iterations, 20);
    }

    #[test]
    fn singular_jacobian_without_fallback_is_an_error() {
        let cfg = NewtonConfig {
            fd_fallback: false,
            ..NewtonConfig::default()
        };
        let r = solve(
            |x| Ok(vec![x[0] - 1.0]),
            |_| Ok(Matrix::from_rows(&[&[0.0]])),
            &[0.0],
            &cfg,
        );
        assert!(matches!(r, Err(Error::SingularMatrix { .. })));
    }

    #[test]
    fn singular_jacobian_falls_back_to_finite_differences() {
        let out = solve(
            |x| Ok(vec![x[0] - 1.0]),
            |_| Ok(Matrix::from_rows(&[&[0.0]])),
            &[0.0],
            &NewtonConfig::default(),
        )
        .unwrap();
        assert!(out.converged);
        assert!(out.fd_fallbacks >= 1);
        assert!((out.solution[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn damped_iteration_is_monotone() {
        let cfg = NewtonConfig {
            damping: 0.5,
            max_iterations: 200,
            ..NewtonConfig::default()
        };
        let out = solve(
            |x| Ok(vec![libm::atan(x[0])]),
            |x| Ok(Matrix::from_rows(&[&[1.0 / (1.0 + x[0] * x[0])]])),
            &[3.0],
            &cfg,
        )
        .unwrap();
        assert!(out.converged);
        assert!(out.solution[0].abs() < 1e-11);
    }

    #[test]
    fn rejects_bad_config() {
        for cfg in [
            NewtonConfig { tolerance: 0.0, ..NewtonConfig::default() },
            NewtonConfig { damping: 1.5, ..NewtonConfig::default() },
            NewtonConfig { fd_step: -1.0, ..NewtonConfig::default() },
        ] {
            assert!(matches!(cfg.validate(), Err(Error::InvalidConfig(_))));
        }
    }

    #[test]
    fn deterministic() {
        let run = || scalar(|x| x * x * x - 2.0, |x| 3.0 * x * x, 1.3, &NewtonConfig::default());
        assert_eq!(run().solution[0].to_bits(), run().solution[0].to_bits());
    }
}
