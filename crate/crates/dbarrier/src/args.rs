use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::config::Overrides;
use crate::output::Format;

pub const SPECTRUM_COLUMNS: [&str; 3] = ["k", "inv_norm_even", "inv_norm_odd"];
pub const POLE_COLUMNS: [&str; 8] = ["parity", "index", "re_q", "im_q", "gamma", "beta", "lambda_decay", "source"];
pub const PROJECT_COLUMNS: [&str; 4] = ["k", "b_even_raw", "b_even_norm", "b_odd"];
pub const EVOLVE_COLUMNS: [&str; 5] = ["t", "inner", "outer", "total", "pole_model"];
pub const DRIVE_COLUMNS: [&str; 4] = ["t", "inner_driven", "inner_undriven", "odd_norm"];
pub const COMPARE_COLUMNS: [&str; 4] = ["column", "max_abs", "l2", "rows"];

/// Text appended to `--help`; built from the same constants the writers use.
pub fn schema_help() -> String {
    let j = |c: &[&str]| c.join(",");
    format!(
        "Output schemas:\n  \
         spectrum  CSV  {}  (inv_norm = pi/(k^2 n^2); --parity drops the other column)\n  \
         poles     JSON array of objects with keys {}\n  \
         project   CSV  {}\n  \
         evolve    CSV  {}\n  \
         drive     CSV  {}\n  \
         oracle    CSV  {} (undriven) or {} (driven, mu > 0)\n  \
         compare   CSV  {}  (l2 = root mean square difference)\n  \
         report    JSON object: params, first_even_pole, decay_ratio, pole_weights, discrepancies, breakdown_time\n\n\
         Numbers are written with 17 significant digits. Units: fm for lengths and times, fm^-1 for m, k, omega.\n\
         Config files hold `key = value` lines with keys m, lambda, x0, delta, mu, mu_tilde, omega; flags win.\n\
         Exit codes: 0 success, 2 configuration error, 3 numerical accuracy error.",
        j(&SPECTRUM_COLUMNS),
        j(&POLE_COLUMNS),
        j(&PROJECT_COLUMNS),
        j(&EVOLVE_COLUMNS),
        j(&DRIVE_COLUMNS),
        j(&EVOLVE_COLUMNS),
        j(&DRIVE_COLUMNS),
        j(&COMPARE_COLUMNS),
    )
}

#[derive(Debug, Parser)]
#[command(name = "dbarrier", version, about = "Metastable state between two delta barriers: spectra, poles, decay and drive")]
#[command(arg_required_else_help = true, after_help = schema_help())]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Particle mass (fm⁻¹)
    #[arg(long)]
    pub m: Option<f64>,
    /// Delta strength λ
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Barrier half separation (fm)
    #[arg(long)]
    pub x0: Option<f64>,
    /// Gaussian packet width Δ (fm)
    #[arg(long)]
    pub delta: Option<f64>,
    /// Drive strength μ
    #[arg(long)]
    pub mu: Option<f64>,
    /// Dimensionless drive strength μ/√(ω³m), instead of --mu
    #[arg(long)]
    pub mu_tilde: Option<f64>,
    /// Drive frequency ω (fm⁻¹)
    #[arg(long)]
    pub omega: Option<f64>,
    /// Flat `key = value` parameter file
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output file (default: standard output)
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

impl Common {
    pub fn overrides(&self) -> Overrides {
        Overrides {
            m: self.m,
            lambda: self.lambda,
            x0: self.x0,
            delta: self.delta,
            mu: self.mu,
            mu_tilde: self.mu_tilde,
            omega: self.omega,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ParityArg {
    Even,
    Odd,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SourceArg {
    Newton,
    Fit,
    Analytic,
    All,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Tabulate the spike functions pi/(k² n²) (defaults: opacity 400)
    Spectrum {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value = "both")]
        parity: ParityArg,
        #[arg(long, default_value_t = 0.01)]
        kmin: f64,
        #[arg(long, default_value_t = 1.0)]
        kmax: f64,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
    },
    /// Locate resonance poles (defaults: opacity 400)
    Poles {
        #[command(flatten)]
        common: Common,
        /// Poles per parity
        #[arg(long, default_value_t = 3)]
        count: usize,
        #[arg(long, value_enum, default_value = "both")]
        parity: ParityArg,
        #[arg(long, value_enum, default_value = "newton")]
        source: SourceArg,
    },
    /// Overlaps of the Gaussian packet with the modes (defaults: opacity 400)
    Project {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 0.01)]
        kmin: f64,
        #[arg(long, default_value_t = 2.0)]
        kmax: f64,
        #[arg(long, default_value_t = 400)]
        samples: usize,
    },
    /// Undriven spectral evolution (defaults: opacity 20)
    Evolve {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        time: TimeArgs,
        #[command(flatten)]
        spectral: SpectralArgs,
    },
    /// Perturbative driven evolution (defaults: opacity 20)
    Drive {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 20.0)]
        periods: f64,
        /// Perturbative order kept in μ̃
        #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u8).range(1..=2))]
        order: u8,
        /// Samples per drive period (1: whole periods only)
        #[arg(long, default_value_t = 1)]
        samples_per_period: usize,
        #[command(flatten)]
        spectral: SpectralArgs,
    },
    /// Crank–Nicolson grid solver (defaults: opacity 20)
    Oracle {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        time: TimeArgs,
        /// Drive periods; sets the end time of driven runs
        #[arg(long, default_value_t = 20.0)]
        periods: f64,
        /// Samples per drive period (1: whole periods only)
        #[arg(long, default_value_t = 1)]
        samples_per_period: usize,
        /// Cells across [-L, L]; overrides the default spacing 0.05 fm
        #[arg(long)]
        nx: Option<usize>,
        /// Time step (fm); default 0.5, or period/400 when driven
        #[arg(long)]
        dt: Option<f64>,
        /// Half length of the domain (fm); default: hard wall beyond the outgoing front
        #[arg(long = "L")]
        half_length: Option<f64>,
        /// Width of each regularized barrier (fm); default one cell
        #[arg(long)]
        reg_width: Option<f64>,
        /// Strength of a quadratic absorber on the outer quarter of the domain
        #[arg(long)]
        absorber: Option<f64>,
        /// Compact fourth-order stencil with the Padé step (undriven only)
        #[arg(long)]
        high_order: bool,
        /// Do not use the mirror half line for undriven runs
        #[arg(long)]
        full_domain: bool,
    },
    /// Column-wise deviations between two CSV files sharing a `t` column
    Compare {
        a: PathBuf,
        b: PathBuf,
        /// Comma-separated columns (default: all shared columns except t)
        #[arg(long)]
        columns: Option<String>,
        /// Exit with code 3 when a max deviation exceeds this
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum)]
        format: Option<Format>,
    },
    /// JSON summary of quoted numbers against computed ones (defaults: opacity 400)
    Report {
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Debug, Clone, Args)]
pub struct TimeArgs {
    /// End time (fm); default one lifetime 1/Λ of the first even pole
    #[arg(long)]
    pub t_end: Option<f64>,
    /// Number of sample intervals
    #[arg(long, default_value_t = 100)]
    pub samples: usize,
}

#[derive(Debug, Clone, Args)]
pub struct SpectralArgs {
    /// Momentum cut-off; default from --tail
    #[arg(long)]
    pub kmax: Option<f64>,
    /// Packet probability allowed above the cut-off
    #[arg(long, default_value_t = 1e-5)]
    pub tail: f64,
}
