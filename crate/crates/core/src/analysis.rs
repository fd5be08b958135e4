//! Error series, conservation diagnostics and convergence orders.

use alloc::string::String;
use alloc::vec::Vec;

use crate::elliptic::{exact_nutation, NutationCubic};
use crate::error::{Error, Result};
use crate::math::{abs, ln, log2};
use crate::model::{energy, LagrangianModel, PhasePoint};

/// Norms below this are treated as roundoff and left out of order fits.
pub const ROUNDOFF_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Relative,
    /// The reference value was zero, so plain differences are reported.
    Absolute,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ErrorSeries {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    pub kind: ErrorKind,
    /// Sample indices dropped because the reference vanished there.
    pub excluded: Vec<usize>,
}

fn relative_series(points: &[PhasePoint], reference: f64, mut value: impl FnMut(&PhasePoint) -> Result<f64>) -> Result<ErrorSeries> {
    let kind = if reference == 0.0 {
        ErrorKind::Absolute
    } else {
        ErrorKind::Relative
    };
    let mut values = Vec::with_capacity(points.len());
    for p in points {
        let d = value(p)? - reference;
        values.push(if kind == ErrorKind::Relative { d / reference } else { d });
    }
    Ok(ErrorSeries {
        times: points.iter().map(|p| p.t).collect(),
        values,
        kind,
        excluded: Vec::new(),
    })
}

/// `e_H = (H − H₀)/H₀` along `points`, `H₀` taken from the first point.
pub fn energy_error_series<M: LagrangianModel + ?Sized>(points: &[PhasePoint], model: &M) -> Result<ErrorSeries> {
    let first = points.first().ok_or(Error::EmptySeries)?;
    let h0 = energy(model, first)?;
    relative_series(points, h0, |p| energy(model, p))
}

/// `(p_k − p_k(0))/p_k(0)` for a cyclic coordinate `k`.
pub fn momentum_error_series<M: LagrangianModel + ?Sized>(
    points: &[PhasePoint],
    model: &M,
    index: usize,
) -> Result<ErrorSeries> {
    if !model.cyclic_coordinates().contains(&index) {
        return Err(Error::NotConserved { index });
    }
    let first = points.first().ok_or(Error::EmptySeries)?;
    relative_series(points, first.p[index], |p| Ok(p.p[index]))
}

/// `e_θ = (θ − θ_ex)/θ_ex` with `θ` the second coordinate.
pub fn nutation_error_series(points: &[PhasePoint], cubic: &NutationCubic) -> Result<ErrorSeries> {
    if points.is_empty() {
        return Err(Error::EmptySeries);
    }
    let mut series = ErrorSeries {
        times: Vec::with_capacity(points.len()),
        values: Vec::with_capacity(points.len()),
        kind: ErrorKind::Relative,
        excluded: Vec::new(),
    };
    for (k, p) in points.iter().enumerate() {
        let exact = exact_nutation(cubic, p.t)?;
        if exact == 0.0 {
            series.excluded.push(k);
            continue;
        }
        series.times.push(p.t);
        series.values.push((p.q[1] - exact) / exact);
    }
    Ok(series)
}

/// `max |values|`.
pub fn sup_norm(series: &ErrorSeries) -> Result<f64> {
    if series.values.is_empty() {
        return Err(Error::EmptySeries);
    }
    Ok(series.values.iter().fold(0.0, |m, v| m.max(abs(*v))))
}

/// Maximum of `|values|` over samples with `t` in `[from, to]`.
pub fn sup_norm_window(series: &ErrorSeries, from: f64, to: f64) -> Result<f64> {
    let mut any = false;
    let mut best: f64 = 0.0;
    for (t, v) in series.times.iter().zip(&series.values) {
        if *t >= from && *t <= to {
            any = true;
            best = best.max(abs(*v));
        }
    }
    if any {
        Ok(best)
    } else {
        Err(Error::EmptySeries)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub method: String,
    pub metric: String,
    pub step_sizes: Vec<f64>,
    pub norms: Vec<f64>,
    /// `log₂(normₖ/normₖ₊₁)`, `None` when either row is excluded.
    pub orders: Vec<Option<f64>>,
    /// Least-squares slope of `ln norm` against `ln h` over retained rows.
    pub slope: Option<f64>,
    /// Rows below [`ROUNDOFF_FLOOR`] or not positive.
    pub excluded: Vec<usize>,
}

pub fn convergence_order(step_sizes: &[f64], norms: &[f64]) -> Result<ConvergenceReport> {
    if step_sizes.len() != norms.len() {
        return Err(Error::DimensionMismatch {
            context: "convergence norms",
            expected: step_sizes.len(),
            found: norms.len(),
        });
    }
    if norms.is_empty() {
        return Err(Error::EmptySeries);
    }
    for (k, w) in step_sizes.windows(2).enumerate() {
        if !(w[1] < w[0]) || !(w[1] > 0.0) {
            return Err(Error::GridMismatch { index: k + 1 });
        }
    }
    let usable = |v: f64| v.is_finite() && v > ROUNDOFF_FLOOR;
    let excluded: Vec<usize> = (0..norms.len()).filter(|&k| !usable(norms[k])).collect();
    let orders = norms
        .windows(2)
        .zip(step_sizes.windows(2))
        .map(|(n, h)| (usable(n[0]) && usable(n[1])).then(|| log2(n[0] / n[1]) / log2(h[0] / h[1])))
        .collect();
    let pts: Vec<(f64, f64)> = step_sizes
        .iter()
        .zip(norms)
        .filter(|(_, n)| usable(**n))
        .map(|(h, n)| (ln(*h), ln(*n)))
        .collect();
    let slope = (pts.len() >= 2).then(|| {
        let k = pts.len() as f64;
        let (mx, my) = (
            pts.iter().map(|p| p.0).sum::<f64>() / k,
            pts.iter().map(|p| p.1).sum::<f64>() / k,
        );
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
        sxy / sxx
    });
    Ok(ConvergenceReport {
        method: String::new(),
        metric: String::new(),
        step_sizes: step_sizes.to_vec(),
        norms: norms.to_vec(),
        orders,
        slope,
        excluded,
    })
}

impl ConvergenceReport {
    pub fn labelled(mut self, method: &str, metric: &str) -> Self {
        self.method = String::from(method);
        self.metric = String::from(metric);
        self
    }
}

/// `sup |a − b|` over two sample sequences on the same time grid.
pub fn cross_method_difference(times_a: &[f64], a: &[f64], times_b: &[f64], b: &[f64]) -> Result<f64> {
    if times_a.len() != a.len() || times_b.len() != b.len() {
        return Err(Error::DimensionMismatch {
            context: "cross-method samples",
            expected: times_a.len(),
            found: a.len(),
        });
    }
    if times_a.len() != times_b.len() {
        return Err(Error::GridMismatch {
            index: times_a.len().min(times_b.len()),
        });
    }
    if a.is_empty() {
        return Err(Error::EmptySeries);
    }
    let mut worst: f64 = 0.0;
    for k in 0..a.len() {
        let scale = abs(times_a[k]).max(1.0);
        if abs(times_a[k] - times_b[k]) > 1e-9 * scale {
            return Err(Error::GridMismatch { index: k });
        }
        worst = worst.max(abs(a[k] - b[k]));
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::test_models::Quadratic;
    use alloc::vec;

    fn series(values: Vec<f64>) -> ErrorSeries {
        ErrorSeries {
            times: (0..values.len()).map(|k| k as f64).collect(),
            values,
            kind: ErrorKind::Relative,
            excluded: Vec::new(),
        }
    }

    #[test]
    fn sup_norm_cases() {
        assert_eq!(sup_norm(&series(vec![0.0, -3.0, 2.0])).unwrap(), 3.0);
        assert_eq!(sup_norm(&series(vec![0.0; 4])).unwrap(), 0.0);
        assert_eq!(sup_norm(&series(vec![-0.5])).unwrap(), 0.5);
        assert!(matches!(sup_norm(&series(vec![])), Err(Error::EmptySeries)));
    }

    #[test]
    fn windowed_sup_norm() {
        let s = series(vec![1.0, -4.0, 2.0, 0.5]);
        assert_eq!(sup_norm_window(&s, 2.0, 3.0).unwrap(), 2.0);
        assert!(sup_norm_window(&s, 10.0, 11.0).is_err());
    }

    #[test]
    fn order_cases() {
        let r = convergence_order(&[0.1, 0.05], &[16.0, 1.0]).unwrap();
        assert_eq!(r.orders, vec![Some(4.0)]);
        assert!((r.slope.unwrap() - 4.0).abs() < 1e-12);
        let r = convergence_order(&[0.1, 0.05], &[1.0, 1.0]).unwrap();
        assert_eq!(r.orders, vec![Some(0.0)]);
    }

    #[test]
    fn roundoff_rows_are_flagged() {
        let r = convergence_order(&[0.4, 0.2, 0.1, 0.05], &[1e-8, 6.25e-10, 1e-13, 0.0]).unwrap();
        assert_eq!(r.excluded, vec![2, 3]);
        assert_eq!(r.orders[1], None);
        assert_eq!(r.orders[2], None);
        assert!((r.slope.unwrap() - 4.0).abs() < 1e-12);
    }

    #[test]
    fn single_row_has_no_orders() {
        let r = convergence_order(&[0.1], &[1e-3]).unwrap();
        assert!(r.orders.is_empty());
        assert!(r.slope.is_none());
    }

    #[test]
    fn rejects_non_decreasing_steps() {
        assert!(convergence_order(&[0.1, 0.1], &[1.0, 1.0]).is_err());
    }

    #[test]
    fn free_particle_series_vanish() {
        let m = Quadratic::free(&[1.0]);
        let pts: Vec<PhasePoint> = (0..5).map(|k| PhasePoint::new(k as f64, vec![k as f64 * 2.0], vec![2.0])).collect();
        let e = energy_error_series(&pts, &m).unwrap();
        assert_eq!(sup_norm(&e).unwrap(), 0.0);
        let p = momentum_error_series(&pts, &m, 0).unwrap();
        assert_eq!(sup_norm(&p).unwrap(), 0.0);
    }

    #[test]
    fn zero_reference_falls_back_to_absolute() {
        let m = Quadratic::free(&[1.0]);
        let pts = vec![PhasePoint::new(0.0, vec![0.0], vec![0.0]), PhasePoint::new(1.0, vec![0.0], vec![0.5])];
        let p = momentum_error_series(&pts, &m, 0).unwrap();
        assert_eq!(p.kind, ErrorKind::Absolute);
        assert_eq!(p.values, vec![0.0, 0.5]);
    }

    #[test]
    fn non_cyclic_index_is_rejected() {
        let m = Quadratic::oscillator(1.0, 1.0);
        let pts = vec![PhasePoint::new(0.0, vec![1.0], vec![0.0])];
        assert!(matches!(momentum_error_series(&pts, &m, 0), Err(Error::NotConserved { index: 0 })));
    }

    #[test]
    fn cross_difference_cases() {
        let t = [0.0, 0.1, 0.2];
        assert_eq!(cross_method_difference(&t, &[1.0, 2.0, 3.0], &t, &[1.0, 2.0, 3.0]).unwrap(), 0.0);
        assert_eq!(cross_method_difference(&t, &[1.0, 2.0, 3.0], &t, &[1.0, 2.5, 3.0]).unwrap(), 0.5);
        assert!(cross_method_difference(&t, &[1.0, 2.0, 3.0], &[0.0, 0.1], &[1.0, 2.0]).is_err());
        assert!(cross_method_difference(&t, &[1.0; 3], &[0.0, 0.1, 0.3], &[1.0; 3]).is_err());
    }
}
