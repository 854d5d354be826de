use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use fotf_core::analysis::{frequency_response, internal_stability, margins, matignon_stable, FrequencyGrid};
use fotf_core::approx::{fit_rational, fractional_response_of, FitConfig};
use fotf_core::timedomain::{step_of_fractional, StepConfig, DEFAULT_SETTLING_BAND};
use fotf_core::{make_canceller, make_ratio_canceller, CancellerSpec};

use crate::bundles::{reproduce_example, ExampleId};
use crate::io::{self, FitConfigDoc};
use crate::CliError;

/// Fractional-order pole-zero cancellation toolkit.
///
/// Transfer functions are JSON objects {"base_v": v, "num": [...], "den": [...]}
/// with coefficients ascending in w = s^(1/v). Wherever a transfer function is
/// expected, pass either a file path or the JSON text itself.
#[derive(Debug, Parser)]
#[command(name = "fotf", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Frequency response as CSV (omega_rad_s,mag_db,phase_deg).
    Bode {
        #[arg(long)]
        tf: String,
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Phase and gain margins of an open loop.
    Margins {
        #[arg(long)]
        tf: String,
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Sector stability test of the denominator.
    Stability {
        #[arg(long)]
        tf: String,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Stability of all four closed-loop maps of a unity feedback loop.
    InternalStability {
        #[arg(long)]
        plant: String,
        #[arg(long)]
        controller: String,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Canceller Q_{lambda,v}, or Q_{pole,v}/Q_{zero,v} when --pole and --zero are given.
    Cancel {
        #[arg(long, conflicts_with_all = ["pole", "zero"], required_unless_present_all = ["pole", "zero"])]
        lambda: Option<f64>,
        #[arg(long, requires = "zero")]
        pole: Option<f64>,
        #[arg(long, requires = "pole")]
        zero: Option<f64>,
        #[arg(long)]
        v: u32,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Integer-order rational fit; writes the model as a transfer function.
    Fit {
        #[arg(long)]
        tf: String,
        #[command(flatten)]
        fit: FitArgs,
        /// Also write the full fit report JSON here.
        #[arg(long)]
        report: Option<PathBuf>,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Step response metrics, realizing fractional systems by a rational fit.
    Step {
        #[arg(long)]
        tf: String,
        #[arg(long, default_value_t = 40.0)]
        t_max: f64,
        #[arg(long, default_value_t = 1e-3)]
        dt: f64,
        /// Zero location for the undershoot lower bound.
        #[arg(long)]
        lambda: Option<f64>,
        /// Relative settling band.
        #[arg(long, default_value_t = DEFAULT_SETTLING_BAND)]
        band: f64,
        /// Write the step trace CSV (t_s,y) here.
        #[arg(long)]
        trace: Option<PathBuf>,
        #[command(flatten)]
        fit: FitArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Reproduce a worked example.
    Example {
        #[arg(value_enum)]
        id: ExampleId,
        /// Directory for the bundle's CSV and JSON artifacts.
        #[arg(long)]
        out_dir: Option<PathBuf>,
        #[command(flatten)]
        out: OutArgs,
    },
}

#[derive(Debug, Args)]
pub struct OutArgs {
    /// Output file; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GridArgs {
    #[arg(long, default_value_t = 1e-3)]
    pub omega_min: f64,
    #[arg(long, default_value_t = 1e3)]
    pub omega_max: f64,
    #[arg(long, default_value_t = 1000)]
    pub points: usize,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// JSON document with any FitConfig fields; flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub omega_min: Option<f64>,
    #[arg(long)]
    pub omega_max: Option<f64>,
    #[arg(long)]
    pub points: Option<usize>,
    #[arg(long)]
    pub num_order: Option<usize>,
    #[arg(long)]
    pub den_order: Option<usize>,
    #[arg(long)]
    pub sk_iterations: Option<usize>,
    #[arg(long)]
    pub minimax_iterations: Option<usize>,
    /// relative or absolute
    #[arg(long)]
    pub error_measure: Option<String>,
}

impl FitArgs {
    /// Defaults: [1e-3, 1e3] rad/s, orders 8/8, then the config file, then flags.
    pub fn resolve(&self) -> Result<FitConfig, CliError> {
        let mut cfg = FitConfig::new(1e-3, 1e3, 8, 8);
        if let Some(path) = &self.config {
            FitConfigDoc::parse(&io::read_file(path)?)?.apply(&mut cfg)?;
        }
        let flags = FitConfigDoc {
            omega_min: self.omega_min,
            omega_max: self.omega_max,
            n_points: self.points,
            num_order: self.num_order,
            den_order: self.den_order,
            sk_iterations: self.sk_iterations,
            minimax_iterations: self.minimax_iterations,
            error_measure: self.error_measure.clone(),
            ..FitConfigDoc::default()
        };
        flags.apply(&mut cfg)?;
        Ok(cfg)
    }
}

fn emit(out: &OutArgs, stdout: &mut dyn Write, text: &str) -> Result<(), CliError> {
    match &out.out {
        Some(path) => io::write_file(path, text),
        None => stdout.write_all(text.as_bytes()).map_err(|e| CliError::io("<stdout>", e)),
    }
}

/// Executes one parsed command, writing its primary artifact to `--out` or `stdout`.
pub fn run(cli: Cli, stdout: &mut dyn Write) -> Result<(), CliError> {
    match cli.command {
        Command::Bode { tf, grid, out } => {
            let tf = io::read_tf_arg(&tf)?;
            let grid = FrequencyGrid::log_space(grid.omega_min, grid.omega_max, grid.points)?;
            emit(&out, stdout, &io::bode_csv(&frequency_response(&tf, &grid)))
        }
        Command::Margins { tf, grid, out } => {
            let tf = io::read_tf_arg(&tf)?;
            let grid = FrequencyGrid::log_space(grid.omega_min, grid.omega_max, grid.points)?;
            let report = margins(&frequency_response(&tf, &grid))?;
            emit(&out, stdout, &io::to_pretty(&io::margins_json(&report)))
        }
        Command::Stability { tf, out } => {
            let report = matignon_stable(&io::read_tf_arg(&tf)?)?;
            emit(&out, stdout, &io::to_pretty(&io::stability_json(&report)))
        }
        Command::InternalStability { plant, controller, out } => {
            let report = internal_stability(&io::read_tf_arg(&plant)?, &io::read_tf_arg(&controller)?)?;
            emit(&out, stdout, &io::to_pretty(&io::internal_stability_json(&report)))
        }
        Command::Cancel { lambda, pole, zero, v, out } => {
            let tf = match (lambda, pole, zero) {
                (Some(lambda), _, _) => make_canceller(CancellerSpec::new(lambda, v)?)?,
                (None, Some(p), Some(z)) => make_ratio_canceller(p, z, v)?,
                _ => return Err(CliError::Parse("give --lambda, or both --pole and --zero".into())),
            };
            emit(&out, stdout, &io::to_line(&io::tf_to_json(&tf)))
        }
        Command::Fit { tf, fit, report, out } => {
            let tf = io::read_tf_arg(&tf)?;
            let cfg = fit.resolve()?;
            let rep = fit_rational(&fractional_response_of(&tf, &cfg)?, &cfg)?;
            if let Some(path) = report {
                io::write_file(&path, &io::to_pretty(&io::fit_json(&rep, &cfg)))?;
            }
            emit(&out, stdout, &io::to_line(&io::rational_to_json(&rep.model)))
        }
        Command::Step { tf, t_max, dt, lambda, band, trace, fit, out } => {
            let tf = io::read_tf_arg(&tf)?;
            let cfg = fit.resolve()?;
            let result = step_of_fractional(&tf, &cfg, &StepConfig { t_max, dt, band, lambda })?;
            if let Some(path) = trace {
                io::write_file(&path, &io::trace_csv(&result.response))?;
            }
            emit(&out, stdout, &io::to_pretty(&io::metrics_json(&result.metrics)))
        }
        Command::Example { id, out_dir, out } => {
            let bundle = reproduce_example(id)?;
            if let Some(dir) = out_dir {
                std::fs::create_dir_all(&dir).map_err(|e| CliError::io(dir.display().to_string(), e))?;
                for (name, contents) in &bundle.files {
                    io::write_file(&Path::new(&dir).join(name), contents)?;
                }
            }
            emit(&out, stdout, &io::to_pretty(&bundle.summary))
        }
    }
}
