//! Experiment settings from TOML files and command-line overrides.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use simvar_core::elliptic::{nutation_cubic, nutation_period};
use simvar_core::newton::NewtonConfig;
use simvar_core::simpson::{JacobianMode, Predictor, StepConfig};
use simvar_core::systems::{preset, Preset};

use crate::error::{AppError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Integrator {
    Simpson,
    Midpoint,
    Rk4,
}

impl Integrator {
    pub fn as_str(self) -> &'static str {
        match self {
            Integrator::Simpson => "simpson",
            Integrator::Midpoint => "midpoint",
            Integrator::Rk4 => "rk4",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum JacobianChoice {
    Analytic,
    FiniteDifference,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum PredictorChoice {
    Hold,
    ConstantVelocity,
}

/// Flat experiment description. Every field is optional so that a file and
/// flag overrides can be layered with [`ExperimentConfig::merge`].
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize, clap::Args)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct ExperimentConfig {
    /// System preset (see `simvar presets`).
    #[arg(long)]
    pub preset: Option<String>,
    /// Time stepper [default: simpson].
    #[arg(long, value_enum)]
    pub integrator: Option<Integrator>,
    /// Step size in seconds.
    #[arg(long, conflicts_with = "h_frac")]
    pub h: Option<f64>,
    /// Step size as a fraction of the nutation period (top presets).
    #[arg(long)]
    pub h_frac: Option<f64>,
    /// Final time in seconds.
    #[arg(long, conflicts_with = "periods")]
    pub t_end: Option<f64>,
    /// Final time in nutation periods (top presets).
    #[arg(long)]
    pub periods: Option<f64>,
    /// Newton residual tolerance (∞-norm) [default: 1e-12].
    #[arg(long)]
    pub tolerance: Option<f64>,
    /// Newton iteration cap [default: 50].
    #[arg(long)]
    pub max_iterations: Option<usize>,
    /// Newton step fraction in (0, 1] [default: 1].
    #[arg(long)]
    pub damping: Option<f64>,
    /// Retry singular Jacobians with finite differences [default: true].
    #[arg(long)]
    pub fd_fallback: Option<bool>,
    /// Relative finite-difference step [default: 1e-7].
    #[arg(long)]
    pub fd_step: Option<f64>,
    /// Newton updates taken after the tolerance is met [default: 1].
    #[arg(long)]
    pub polish_iterations: Option<usize>,
    /// Jacobian used by Newton [default: analytic].
    #[arg(long, value_enum)]
    pub jacobian: Option<JacobianChoice>,
    /// Newton starting guess [default: hold].
    #[arg(long, value_enum)]
    pub predictor: Option<PredictorChoice>,
    /// Output directory [default: .].
    #[arg(long)]
    pub output: Option<PathBuf>,
}

macro_rules! layer {
    ($base:ident, $top:ident; $($f:ident),*) => {
        ExperimentConfig { $($f: $top.$f.or($base.$f)),* }
    };
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| AppError::io(path, e))?;
        Ok(toml::from_str(&text)?)
    }

    /// Fields set in `over` win.
    pub fn merge(self, over: ExperimentConfig) -> Self {
        let base = self;
        layer!(base, over; preset, integrator, h, h_frac, t_end, periods, tolerance, max_iterations,
            damping, fd_fallback, fd_step, polish_iterations, jacobian, predictor, output)
    }

    pub fn step_config(&self) -> Result<StepConfig> {
        let d = NewtonConfig::default();
        let newton = NewtonConfig {
            tolerance: self.tolerance.unwrap_or(d.tolerance),
            max_iterations: self.max_iterations.unwrap_or(d.max_iterations),
            damping: self.damping.unwrap_or(d.damping),
            fd_fallback: self.fd_fallback.unwrap_or(d.fd_fallback),
            fd_step: self.fd_step.unwrap_or(d.fd_step),
            polish_iterations: self.polish_iterations.unwrap_or(d.polish_iterations),
        };
        newton.validate().map_err(|e| AppError::Usage(e.to_string()))?;
        Ok(StepConfig {
            newton,
            jacobian: match self.jacobian {
                Some(JacobianChoice::FiniteDifference) => JacobianMode::FiniteDifference,
                _ => JacobianMode::Analytic,
            },
            predictor: match self.predictor {
                Some(PredictorChoice::ConstantVelocity) => Predictor::ConstantVelocity,
                _ => Predictor::Hold,
            },
        })
    }

    pub fn resolve(&self) -> Result<Run> {
        let name = self
            .preset
            .as_deref()
            .ok_or_else(|| AppError::Usage("a preset is required".into()))?;
        let preset = lookup_preset(name)?;
        let period = preset_period(&preset)?;
        let need_period = |what: &str| {
            period.ok_or_else(|| AppError::Usage(format!("{what} needs a preset with a nutation period")))
        };
        let h = match (self.h, self.h_frac) {
            (Some(h), None) => h,
            (None, Some(f)) => f * need_period("--h-frac")?,
            (None, None) => return Err(AppError::Usage("one of h or h-frac is required".into())),
            (Some(_), Some(_)) => return Err(AppError::Usage("h and h-frac are mutually exclusive".into())),
        };
        let t_end = match (self.t_end, self.periods) {
            (Some(t), None) => t,
            (None, Some(n)) => n * need_period("--periods")?,
            (None, None) => return Err(AppError::Usage("one of t-end or periods is required".into())),
            (Some(_), Some(_)) => return Err(AppError::Usage("t-end and periods are mutually exclusive".into())),
        };
        if !(h > 0.0) || !h.is_finite() {
            return Err(AppError::Usage(format!("step size must be positive, got {h}")));
        }
        if !(t_end >= 0.0) || !t_end.is_finite() {
            return Err(AppError::Usage(format!("final time must be non-negative, got {t_end}")));
        }
        Ok(Run {
            preset,
            integrator: self.integrator.unwrap_or(Integrator::Simpson),
            h,
            t_end,
            period,
            step: self.step_config()?,
            output: self.output.clone().unwrap_or_else(|| PathBuf::from(".")),
        })
    }
}

/// A fully resolved simulation request.
#[derive(Debug, Clone)]
pub struct Run {
    pub preset: Preset,
    pub integrator: Integrator,
    pub h: f64,
    pub t_end: f64,
    /// Nutation period for top presets.
    pub period: Option<f64>,
    pub step: StepConfig,
    pub output: PathBuf,
}

pub fn lookup_preset(name: &str) -> Result<Preset> {
    preset(name).ok_or_else(|| AppError::UnknownPreset(name.to_string()))
}

/// Nutation period of a top preset, `None` for other systems.
pub fn preset_period(p: &Preset) -> Result<Option<f64>> {
    match p.system.as_top() {
        Some(top) => Ok(Some(nutation_period(&nutation_cubic(&top.params, &p.q0, &p.qdot0)?)?)),
        None => Ok(None),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_flat_toml() {
        let c: ExperimentConfig = toml::from_str(
            "preset = \"lagrange-top-table3\"\nintegrator = \"midpoint\"\nh-frac = 0.05\nperiods = 2\njacobian = \"finite-difference\"\n",
        )
        .unwrap();
        assert_eq!(c.integrator, Some(Integrator::Midpoint));
        assert_eq!(c.periods, Some(2.0));
        assert_eq!(c.step_config().unwrap().jacobian, JacobianMode::FiniteDifference);
    }

    #[test]
    fn rejects_unknown_keys() {
        assert!(toml::from_str::<ExperimentConfig>("stepsize = 0.1\n").is_err());
    }

    #[test]
    fn overrides_win() {
        let base = ExperimentConfig {
            preset: Some("a".into()),
            h: Some(0.1),
            ..Default::default()
        };
        let over = ExperimentConfig {
            h: Some(0.2),
            ..Default::default()
        };
        let m = base.merge(over);
        assert_eq!(m.h, Some(0.2));
        assert_eq!(m.preset.as_deref(), Some("a"));
    }

    #[test]
    fn period_units_need_a_top() {
        let c = ExperimentConfig {
            preset: Some("double-pendulum-table1".into()),
            h_frac: Some(0.05),
            t_end: Some(1.0),
            ..Default::default()
        };
        assert!(matches!(c.resolve(), Err(AppError::Usage(_))));
    }

    #[test]
    fn resolves_period_fractions() {
        let c = ExperimentConfig {
            preset: Some("lagrange-top-table3".into()),
            h_frac: Some(0.05),
            periods: Some(1.0),
            ..Default::default()
        };
        let r = c.resolve().unwrap();
        assert!((r.t_end / r.h - 20.0).abs() < 1e-9);
        assert!((r.period.unwrap() - 1.84671).abs() < 5e-5);
    }

    #[test]
    fn unknown_preset_is_a_usage_error() {
        let c = ExperimentConfig {
            preset: Some("pendulum".into()),
            ..Default::default()
        };
        let e = c.resolve().unwrap_err();
        assert_eq!(e.exit_code(), 2);
        assert!(e.to_string().contains("lagrange-top-table4"));
    }
}
