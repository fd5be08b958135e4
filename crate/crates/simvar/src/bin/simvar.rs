use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use simvar::config::{lookup_preset, ExperimentConfig, Integrator};
use simvar::experiments::{
    check_reduced_start, compare_reduced, converge, nutation_identity_check, validate, Metric, Reference, Sweep,
};
use simvar::report::{simulate, write_convergence, write_validation};
use simvar::{AppError, Result};
use simvar_core::systems::PRESET_NAMES;

#[derive(Parser)]
#[command(name = "simvar", version, about = "Simpson variational integrator experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate one preset and write trajectory, error and summary files.
    Simulate(WithConfig),
    /// Error norms over a step-halving sweep.
    Converge(ConvergeArgs),
    /// Simpson on the complete top against RK4 on the reduced system.
    CompareReduced(CompareArgs),
    /// Check model derivatives, Jacobians and elliptic identities.
    Validate(ValidateArgs),
    /// List the available presets.
    Presets,
}

#[derive(Args)]
struct WithConfig {
    /// TOML file with the same keys as the flags; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    flags: ExperimentConfig,
}

impl WithConfig {
    fn merged(&self, defaults: ExperimentConfig) -> Result<ExperimentConfig> {
        let file = match &self.config {
            Some(p) => ExperimentConfig::load(p)?,
            None => ExperimentConfig::default(),
        };
        Ok(defaults.merge(file).merge(self.flags.clone()))
    }
}

#[derive(Args)]
struct ConvergeArgs {
    #[command(flatten)]
    base: WithConfig,
    /// Number of step halvings after the base step.
    #[arg(long, default_value_t = 4)]
    halvings: usize,
    #[arg(long, value_enum, default_value_t = Metric::Energy)]
    metric: Metric,
    /// Reference solution [default: exact for nutation, none for energy].
    #[arg(long, value_enum)]
    reference: Option<Reference>,
}

#[derive(Args)]
struct CompareArgs {
    /// Defaults: lagrange-top-table4, h = 0.1, t-end = 1.
    #[command(flatten)]
    base: WithConfig,
    /// Number of step halvings after the base step.
    #[arg(long, default_value_t = 4)]
    halvings: usize,
}

#[derive(Args)]
struct ValidateArgs {
    /// Preset to check; all presets when omitted.
    #[arg(long)]
    preset: Option<String>,
    /// Number of sampled configurations per preset.
    #[arg(long, default_value_t = 8)]
    samples: usize,
    /// Directory for the JSON reports [default: .].
    #[arg(long)]
    output: Option<PathBuf>,
}

fn run_simulate(args: &WithConfig) -> Result<()> {
    let run = args.merged(ExperimentConfig::default())?.resolve()?;
    let s = simulate(&run)?;
    println!(
        "{} {}: {} steps of h = {:e}, max |e_H| = {:e}",
        s.preset, s.integrator, s.steps, s.h, s.max_energy_error
    );
    if let Some(e) = s.max_nutation_error {
        println!("max |e_theta| = {e:e}");
    }
    Ok(())
}

fn run_converge(args: &ConvergeArgs) -> Result<()> {
    let cfg = args.base.merged(ExperimentConfig::default())?;
    let run = cfg.resolve()?;
    let reference = args.reference.unwrap_or(match args.metric {
        Metric::Nutation => Reference::Exact,
        Metric::Energy => Reference::None,
    });
    let sweep = Sweep {
        preset: run.preset,
        integrator: run.integrator,
        h0: run.h,
        halvings: args.halvings,
        t_end: run.t_end,
        step: run.step,
        metric: args.metric,
        reference,
    };
    let report = converge(&sweep)?;
    let stem = format!("convergence-{}-{}", report.method, report.metric);
    write_convergence(&run.output, &stem, sweep.preset.name, sweep.t_end, &report)?;
    print_report(&report.step_sizes, &report.norms, report.slope);
    Ok(())
}

fn run_compare(args: &CompareArgs) -> Result<()> {
    let defaults = ExperimentConfig {
        preset: Some("lagrange-top-table4".into()),
        h: Some(0.1),
        t_end: Some(1.0),
        ..Default::default()
    };
    let mut cfg = args.base.merged(defaults)?;
    if cfg.h_frac.is_some() {
        cfg.h = None;
    }
    if cfg.periods.is_some() {
        cfg.t_end = None;
    }
    let run = cfg.resolve()?;
    if run.preset.name != "lagrange-top-table4" {
        return Err(AppError::Usage("compare-reduced supports only lagrange-top-table4".into()));
    }
    if run.integrator != Integrator::Simpson {
        return Err(AppError::Usage("compare-reduced always integrates the complete system with simpson".into()));
    }
    check_reduced_start(&run.preset)?;
    let report = compare_reduced(&run.preset, run.h, args.halvings, run.t_end, &run.step)?;
    write_convergence(&run.output, "compare-reduced", run.preset.name, run.t_end, &report)?;
    print_report(&report.step_sizes, &report.norms, report.slope);
    Ok(())
}

fn run_validate(args: &ValidateArgs) -> Result<()> {
    let names: Vec<&str> = match &args.preset {
        Some(n) => vec![lookup_preset(n)?.name],
        None => PRESET_NAMES.to_vec(),
    };
    let dir = args.output.clone().unwrap_or_else(|| PathBuf::from("."));
    let mut failed = Vec::new();
    for name in names {
        let p = lookup_preset(name)?;
        let mut v = validate(&p.system, &p.q0, args.samples)?;
        v.checks.extend(nutation_identity_check(&p)?);
        write_validation(&dir, name, &v)?;
        if v.passed() {
            println!("{name}: pass ({} checks)", v.checks.len());
        } else {
            println!("{name}: FAIL {}", v.failures().join(", "));
            failed.push(name);
        }
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(AppError::ValidationFailed(failed.join(", ")))
    }
}

fn print_report(hs: &[f64], norms: &[f64], slope: Option<f64>) {
    for (h, n) in hs.iter().zip(norms) {
        println!("h = {h:.6e}  norm = {n:.6e}");
    }
    match slope {
        Some(s) => println!("slope = {s:.4}"),
        None => println!("slope = n/a"),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Simulate(a) => run_simulate(a),
        Command::Converge(a) => run_converge(a),
        Command::CompareReduced(a) => run_compare(a),
        Command::Validate(a) => run_validate(a),
        Command::Presets => {
            for name in PRESET_NAMES {
                println!("{name}");
            }
            Ok(())
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if let AppError::Integration {
                partial: Some(path), ..
            } = &e
            {
                eprintln!("partial output written to {}", path.display());
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
