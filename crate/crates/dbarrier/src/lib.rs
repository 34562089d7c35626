//! Command-line front end for `dbarrier-core`.
//!
//! [`run`] parses the arguments, merges parameters (defaults, `--config`
//! file, flags), dispatches one subcommand and writes its table.

pub mod args;
pub mod compare;
pub mod config;
pub mod output;
pub mod report;
pub mod scenarios;

use std::ffi::OsString;
use std::fmt;
use std::io::Write;

use clap::Parser;
use dbarrier_core::error::Error;
use dbarrier_core::model::BarrierParams;
use dbarrier_core::packet::ProjectionTable;
use dbarrier_core::poles::{analytic_pole, decay_constant, find_pole, fit_quadratic, Pole};
use dbarrier_core::spectrum::{spike_profile, Parity};

use args::{Cli, Command, Common, ParityArg, SourceArg};
use config::Physics;
use output::{Format, Table};
use scenarios::OracleSetup;

#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    Config(String),
    Accuracy(String),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Accuracy(_) => 3,
            CliError::Io(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) | CliError::Accuracy(m) | CliError::Io(m) => f.write_str(m),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        if e.is_input_error() {
            CliError::Config(e.to_string())
        } else {
            CliError::Accuracy(e.to_string())
        }
    }
}

/// A rendered result plus an optional failure to report after writing it.
struct Outcome {
    text: String,
    out: Option<std::path::PathBuf>,
    failure: Option<CliError>,
}

/// Runs the CLI, writing data to `stdout` (unless `--out` is given) and
/// diagnostics to `stderr`. Returns the process exit code.
pub fn run_with<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(stderr, "{text}");
                2
            } else {
                let _ = write!(stdout, "{text}");
                0
            };
        }
    };
    let mut warn = |msg: &str| {
        let _ = writeln!(stderr, "warning: {msg}");
    };
    match dispatch(cli.command, &mut warn) {
        Ok(outcome) => {
            let written = match &outcome.out {
                Some(path) => std::fs::write(path, &outcome.text)
                    .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display()))),
                None => stdout.write_all(outcome.text.as_bytes()).map_err(|e| CliError::Io(e.to_string())),
            };
            match written.err().or(outcome.failure) {
                None => 0,
                Some(e) => {
                    let _ = writeln!(stderr, "error: {e}");
                    e.exit_code()
                }
            }
        }
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}

pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    run_with(argv, &mut std::io::stdout().lock(), &mut std::io::stderr().lock())
}

fn physics(common: &Common, base: Physics) -> Result<Physics, CliError> {
    let file = match &common.config {
        Some(path) => config::read_config(path)?,
        None => Default::default(),
    };
    base.merge(&file, &common.overrides())
}

fn table_outcome(table: Table, common_out: Option<std::path::PathBuf>, format: Option<Format>, default: Format) -> Outcome {
    Outcome { text: table.render(format.unwrap_or(default)), out: common_out, failure: None }
}

fn opacity_warning(params: &BarrierParams, warn: &mut dyn FnMut(&str)) {
    if params.lambda > 0.0 && !params.is_large_opacity() {
        warn(&format!(
            "opacity {} is below {}: closed-form pole values are outside their regime",
            params.opacity(),
            dbarrier_core::model::LARGE_OPACITY
        ));
    }
}

fn positive(key: &str, v: f64) -> Result<f64, CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(CliError::Config(format!("--{key} must be positive (got {v})")))
    }
}

fn end_time(t_end: Option<f64>, params: &BarrierParams) -> Result<f64, CliError> {
    match t_end {
        Some(t) => positive("t-end", t),
        None if params.lambda == 0.0 => Err(CliError::Config("--t-end is required when lambda = 0".into())),
        None => Ok(scenarios::lifetime(params)?),
    }
}

fn pole_row(table: &mut Table, pole: &Pole, m: f64) {
    let lambda = decay_constant(pole, m).unwrap_or(f64::NAN);
    table.push(vec![
        pole.parity.name().into(),
        pole.index.into(),
        pole.q.re.into(),
        pole.q.im.into(),
        pole.gamma.into(),
        pole.beta.into(),
        lambda.into(),
        pole.source.name().into(),
    ]);
}

fn dispatch(command: Command, warn: &mut dyn FnMut(&str)) -> Result<Outcome, CliError> {
    match command {
        Command::Spectrum { common, parity, kmin, kmax, samples } => {
            let p = physics(&common, Physics::STATIC)?.barrier();
            let even = spike_profile(Parity::Even, kmin, kmax, samples, &p)?;
            let odd = spike_profile(Parity::Odd, kmin, kmax, samples, &p)?;
            let cols = &args::SPECTRUM_COLUMNS;
            let mut table = match parity {
                ParityArg::Both => Table::new(cols),
                ParityArg::Even => Table::new(&[cols[0], cols[1]]),
                ParityArg::Odd => Table::new(&[cols[0], cols[2]]),
            };
            for (e, o) in even.iter().zip(&odd) {
                table.push(match parity {
                    ParityArg::Both => vec![e.0.into(), e.1.into(), o.1.into()],
                    ParityArg::Even => vec![e.0.into(), e.1.into()],
                    ParityArg::Odd => vec![o.0.into(), o.1.into()],
                });
            }
            Ok(table_outcome(table, common.out, common.format, Format::Csv))
        }
        Command::Poles { common, count, parity, source } => {
            let p = physics(&common, Physics::STATIC)?.barrier();
            if count == 0 {
                return Err(CliError::Config("--count must be at least 1".into()));
            }
            opacity_warning(&p, warn);
            let mut table = Table::new(&args::POLE_COLUMNS);
            let parities: &[Parity] = match parity {
                ParityArg::Both => &[Parity::Even, Parity::Odd],
                ParityArg::Even => &[Parity::Even],
                ParityArg::Odd => &[Parity::Odd],
            };
            for &par in parities {
                let first = if par == Parity::Even { 0 } else { 1 };
                for n in first..first + count {
                    let analytic = analytic_pole(par, n, &p)?;
                    let want = |s: SourceArg| source == s || source == SourceArg::All;
                    if want(SourceArg::Analytic) {
                        pole_row(&mut table, &analytic, p.m);
                    }
                    if want(SourceArg::Fit) {
                        let mut fit = fit_quadratic(par, analytic.k_center, &p)?;
                        fit.index = n;
                        pole_row(&mut table, &fit, p.m);
                    }
                    if want(SourceArg::Newton) {
                        pole_row(&mut table, &find_pole(par, n, &p)?, p.m);
                    }
                }
            }
            Ok(table_outcome(table, common.out, common.format, Format::Json))
        }
        Command::Project { common, kmin, kmax, samples } => {
            let ph = physics(&common, Physics::STATIC)?;
            let (p, packet) = (ph.barrier(), ph.packet());
            if !(kmin > 0.0 && kmax > kmin && samples >= 2) {
                return Err(CliError::Config("project needs 0 < --kmin < --kmax and --samples >= 2".into()));
            }
            let k: Vec<f64> = (0..samples).map(|i| kmin + (kmax - kmin) * i as f64 / (samples - 1) as f64).collect();
            let t = ProjectionTable::build(&k, &vec![0.0; samples], &packet, &p)?;
            let mut table = Table::new(&args::PROJECT_COLUMNS);
            for i in 0..samples {
                table.push(vec![t.k[i].into(), t.b_even_raw[i].into(), t.b_even_norm[i].into(), t.b_odd[i].into()]);
            }
            Ok(table_outcome(table, common.out, common.format, Format::Csv))
        }
        Command::Evolve { common, time, spectral } => {
            let ph = physics(&common, Physics::DESK)?;
            let (p, packet) = (ph.barrier(), ph.packet());
            let t_end = end_time(time.t_end, &p)?;
            if time.samples == 0 {
                return Err(CliError::Config("--samples must be at least 1".into()));
            }
            let k_max = match spectral.kmax {
                Some(k) => positive("kmax", k)?,
                None => scenarios::cutoff(spectral.tail, &packet, &p)?,
            };
            let times: Vec<f64> = (0..=time.samples).map(|i| t_end * i as f64 / time.samples as f64).collect();
            let rows = scenarios::spectral_survival(&p, &packet, k_max, &times)?;
            let mut table = Table::new(&args::EVOLVE_COLUMNS);
            for r in rows {
                table.push(vec![r.t.into(), r.inner.into(), r.outer.into(), r.total.into(), r.pole_model.into()]);
            }
            Ok(table_outcome(table, common.out, common.format, Format::Csv))
        }
        Command::Drive { common, periods, order, samples_per_period, spectral } => {
            let ph = physics(&common, Physics::DESK)?;
            let (p, packet, drive) = (ph.barrier(), ph.packet(), ph.drive());
            positive("periods", periods)?;
            if samples_per_period == 0 {
                return Err(CliError::Config("--samples-per-period must be at least 1".into()));
            }
            if !drive.is_perturbative() {
                warn(&format!("mu_tilde = {} >= 1: the perturbative expansion does not apply", drive.mu_tilde));
            }
            if p.lambda > 0.0 {
                let secular = scenarios::secular_estimate(&p, &drive, periods)?;
                if secular > 1.0 {
                    warn(&format!("mu_tilde k_tilde t_tilde = {secular} at the first even pole: secular terms dominate"));
                }
            }
            let kick = scenarios::kick_ratio(&p, &packet, &drive);
            if samples_per_period > 1 && kick > 1.0 {
                warn(&format!(
                    "momentum kick is {kick} packet widths: samples between whole periods are outside the expansion"
                ));
            }
            let k_max = match spectral.kmax {
                Some(k) => positive("kmax", k)?,
                None => scenarios::cutoff(spectral.tail, &packet, &p)?,
            };
            let intervals = (periods * samples_per_period as f64).round().max(1.0) as usize;
            let (_, samples) = scenarios::driven_spectral(&p, &packet, &drive, k_max, periods, intervals, order)?;
            let mut table = Table::new(&args::DRIVE_COLUMNS);
            for s in samples {
                table.push(vec![s.t.into(), s.inner_driven.into(), s.inner_undriven.into(), s.odd_norm.into()]);
            }
            Ok(table_outcome(table, common.out, common.format, Format::Csv))
        }
        Command::Oracle {
            common,
            time,
            periods,
            samples_per_period,
            nx,
            dt,
            half_length,
            reg_width,
            absorber,
            high_order,
            full_domain,
        } => {
            let ph = physics(&common, Physics::DESK)?;
            let (p, packet, drive) = (ph.barrier(), ph.packet(), ph.drive());
            let driven = drive.mu > 0.0;
            let dx = match (nx, half_length) {
                (Some(n), Some(l)) if n > 0 => 2.0 * positive("L", l)? / n as f64,
                (Some(_), None) => return Err(CliError::Config("--nx needs --L".into())),
                (Some(_), Some(_)) => return Err(CliError::Config("--nx must be positive".into())),
                (None, _) => 0.05,
            };
            let cells = match reg_width {
                Some(w) => (positive("reg-width", w)? / dx).round().max(1.0) as usize,
                None => 1,
            };
            let dt = match dt {
                Some(v) => positive("dt", v)?,
                None if driven => drive.period() / 400.0,
                None => 0.5,
            };
            let setup = OracleSetup {
                dx,
                dt,
                half_length,
                barrier_cells: cells,
                absorber,
                high_order,
                mirror: !full_domain,
            };
            if driven {
                if !drive.is_perturbative() {
                    warn(&format!("mu_tilde = {} >= 1: outside the perturbative regime", drive.mu_tilde));
                }
                let (t_end, intervals) = match time.t_end {
                    Some(t) => (positive("t-end", t)?, time.samples.max(1)),
                    None => (
                        positive("periods", periods)? * drive.period(),
                        (periods * samples_per_period as f64).round().max(1.0) as usize,
                    ),
                };
                let (on, _) = scenarios::oracle_samples(&p, &packet, Some(drive), &setup, t_end, intervals)?;
                let off_setup = OracleSetup { mirror: false, ..setup };
                let off_spec = off_setup.spec(&p, &packet, Some(&drive), t_end);
                let off_setup = OracleSetup { half_length: Some(off_spec.half_length), ..off_setup };
                let (off, _) = scenarios::oracle_samples(&p, &packet, None, &off_setup, t_end, intervals)?;
                let mut table = Table::new(&args::DRIVE_COLUMNS);
                for (a, b) in on.iter().zip(&off) {
                    table.push(vec![a.t.into(), a.inner.into(), b.inner.into(), a.odd_weight.into()]);
                }
                Ok(table_outcome(table, common.out, common.format, Format::Csv))
            } else {
                let t_end = end_time(time.t_end, &p)?;
                let (samples, _) = scenarios::oracle_samples(&p, &packet, None, &setup, t_end, time.samples)?;
                let times: Vec<f64> = samples.iter().map(|s| s.t).collect();
                let k_model = scenarios::cutoff(scenarios::DEFAULT_TAIL, &packet, &p)?;
                let model = scenarios::pole_model(&p, &packet, k_model, &times)?;
                let mut table = Table::new(&args::EVOLVE_COLUMNS);
                let p0 = samples[0].inner;
                for (s, m) in samples.iter().zip(model) {
                    table.push(vec![s.t.into(), s.inner.into(), s.outer.into(), s.total.into(), (p0 * m).into()]);
                }
                Ok(table_outcome(table, common.out, common.format, Format::Csv))
            }
        }
        Command::Compare { a, b, columns, tol, out, format } => {
            let read = |path: &std::path::Path| {
                std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))
            };
            let (ta, tb) = (read(&a)?, read(&b)?);
            let cols: Option<Vec<String>> = columns.map(|c| c.split(',').map(|s| s.trim().to_string()).collect());
            let result = compare::compare(&ta, &tb, cols.as_deref())?;
            let table = compare::to_table(&result);
            let failure = tol.and_then(|tol| {
                result.iter().find(|d| !(d.max_abs <= tol)).map(|d| {
                    CliError::Accuracy(format!("column {} deviates by {} (tolerance {tol})", d.column, d.max_abs))
                })
            });
            Ok(Outcome { text: table.render(format.unwrap_or(Format::Csv)), out, failure })
        }
        Command::Report { common } => {
            let p = physics(&common, Physics::STATIC)?.barrier();
            if common.format == Some(Format::Csv) {
                return Err(CliError::Config("report is JSON only".into()));
            }
            opacity_warning(&p, warn);
            let r = report::build(&p)?;
            Ok(Outcome { text: report::to_json(&r), out: common.out, failure: None })
        }
    }
}
