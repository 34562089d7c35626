//! Runs shared by the subcommands, the report and the acceptance suite.

use dbarrier_core::drive::{perturbed_survival, AmplitudeSeries, DrivenSample};
use dbarrier_core::error::{Error, Result};
use dbarrier_core::evolve::{pole_refined_grid, pole_survival, KGrid, Propagator};
use dbarrier_core::model::{BarrierParams, DriveParams, PacketParams};
use dbarrier_core::oracle::{Absorber, GridSpec, Oracle, OracleSample};
use dbarrier_core::packet::{residue, truncation_momentum, ProjectionTable};
use dbarrier_core::poles::{decay_constant, find_pole, poles_below, Pole};
use dbarrier_core::spectrum::Parity;
use num_complex::Complex64;

/// Opacity 20: a lifetime of about 2.5e5 fm.
pub fn desk_params() -> BarrierParams {
    BarrierParams::new(20.0, 0.1, 10.0).expect("valid")
}

/// Opacity 400.
pub fn alpha_params() -> BarrierParams {
    BarrierParams::new(20.0, 2.0, 10.0).expect("valid")
}

/// Packet width for the dynamics. A packet as wide as the well leaves too
/// much weight in the `1/k²` tail for the unitarity and oracle checks.
pub const DESK_DELTA: f64 = 5.0;

/// Tail mass left above the default spectral cut-off.
pub const DEFAULT_TAIL: f64 = 1e-5;

/// Tail mass above the momentum that the oracle time step must resolve.
pub const ORACLE_RESOLVE_TAIL: f64 = 1e-3;

/// Node budget of a spectral grid (about 1 GB of working storage).
pub const MAX_NODES: usize = 4_000_000;

/// `1/Λ` of the first even pole.
pub fn lifetime(params: &BarrierParams) -> Result<f64> {
    let pole = find_pole(Parity::Even, 0, params)?;
    Ok(1.0 / decay_constant(&pole, params.m)?)
}

/// Momentum cut-off leaving `tail` of the packet's probability above it.
pub fn cutoff(tail: f64, packet: &PacketParams, params: &BarrierParams) -> Result<f64> {
    truncation_momentum(tail, packet, params)
}

/// Even poles below `k_max` and their residue weights.
pub fn pole_model_terms(params: &BarrierParams, packet: &PacketParams, k_max: f64) -> Result<(Vec<Pole>, Vec<f64>)> {
    let poles = poles_below(Parity::Even, k_max, params)?;
    let weights = poles.iter().map(|p| residue(p, packet, params)).collect();
    Ok((poles, weights))
}

/// The multi-exponential model at `times`, normalised to 1 at t = 0.
/// Without poles (free particle) the model is undefined and NaN is returned.
pub fn pole_model(params: &BarrierParams, packet: &PacketParams, k_max: f64, times: &[f64]) -> Result<Vec<f64>> {
    let (poles, weights) = pole_model_terms(params, packet, k_max)?;
    if poles.is_empty() {
        return Ok(vec![f64::NAN; times.len()]);
    }
    times.iter().map(|&t| pole_survival(t, &poles, &weights, params)).collect()
}

/// A spectral propagator for the even packet, resolved for `|x| ≤ x_extent`
/// up to `t_max`.
pub struct SpectralSetup {
    pub grid: KGrid,
    pub table: ProjectionTable,
    pub propagator: Propagator,
    pub k_max: f64,
}

pub fn spectral_setup(
    params: &BarrierParams,
    packet: &PacketParams,
    k_max: f64,
    x_extent: f64,
    t_max: f64,
) -> Result<SpectralSetup> {
    let grid = pole_refined_grid(params, k_max, x_extent, t_max, 0.05)?;
    if grid.len() > MAX_NODES {
        return Err(Error::accuracy("momentum grid for this horizon exceeds the node budget", grid.len() as f64));
    }
    let table = ProjectionTable::build(&grid.nodes, &grid.weights, packet, params)?;
    let propagator = Propagator::new(&table, params)?;
    Ok(SpectralSetup { grid, table, propagator, k_max })
}

/// One row of the `evolve` table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurvivalRow {
    pub t: f64,
    pub inner: f64,
    pub outer: f64,
    pub total: f64,
    pub pole_model: f64,
}

/// Inner survival at `times`. The total is the grid's Parseval sum (exactly
/// conserved by the spectral propagator) and the outer part is the rest.
pub fn spectral_survival(
    params: &BarrierParams,
    packet: &PacketParams,
    k_max: f64,
    times: &[f64],
) -> Result<Vec<SurvivalRow>> {
    let t_max = times.iter().copied().fold(0.0, f64::max);
    let setup = spectral_setup(params, packet, k_max, params.x0 + 4.0 * packet.delta, t_max)?;
    let total = setup.table.parseval();
    let model = pole_model(params, packet, k_max, times)?;
    let p0 = setup.propagator.inner_probability(0.0);
    let mut rows = Vec::with_capacity(times.len());
    for (i, &t) in times.iter().enumerate() {
        dbarrier_core::evolve::check_phase_resolution(&setup.grid, t, params.m)?;
        let inner = setup.propagator.inner_probability(t);
        rows.push(SurvivalRow { t, inner, outer: total - inner, total, pole_model: p0 * model[i] });
    }
    Ok(rows)
}

/// Momentum of the Gaussian envelope `e^{-k²Δ²/4}` at `10⁻⁸`.
pub fn envelope_cutoff(packet: &PacketParams) -> f64 {
    2.0 * (1e8f64).ln().sqrt() / packet.delta
}

/// Half length keeping the hard wall out of causal contact with the well
/// until `t_end`, as a whole number of cells.
pub fn hard_wall_length(params: &BarrierParams, packet: &PacketParams, drive: Option<&DriveParams>, t_end: f64, dx: f64) -> f64 {
    let sway = drive.map_or(0.0, |d| 2.0 * d.mu / (params.m * d.omega * d.omega));
    let l = params.x0 + 4.0 * packet.delta + envelope_cutoff(packet) * t_end / params.m + sway;
    (l / dx).ceil() * dx
}

/// Grid oracle settings as exposed on the command line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleSetup {
    pub dx: f64,
    pub dt: f64,
    pub half_length: Option<f64>,
    /// Barrier width in cells.
    pub barrier_cells: usize,
    /// Absorber strength; the absorber covers the outer quarter of the domain.
    pub absorber: Option<f64>,
    pub high_order: bool,
    pub mirror: bool,
}

impl OracleSetup {
    pub fn spec(&self, params: &BarrierParams, packet: &PacketParams, drive: Option<&DriveParams>, t_end: f64) -> GridSpec {
        let l = self.half_length.unwrap_or_else(|| hard_wall_length(params, packet, drive, t_end, self.dx));
        let mut spec = GridSpec::new(l, self.dx, self.dt);
        if self.high_order {
            spec = spec.high_order();
        }
        spec.mirror = self.mirror && drive.is_none();
        spec.barrier_cells = self.barrier_cells;
        spec.absorber = self.absorber.map(|w| Absorber { start: 0.75 * l, strength: w, power: 2 });
        spec
    }
}

/// Grid evolution sampled at `t_end·i/intervals`, `i = 0..=intervals`.
pub fn oracle_samples(
    params: &BarrierParams,
    packet: &PacketParams,
    drive: Option<DriveParams>,
    setup: &OracleSetup,
    t_end: f64,
    intervals: usize,
) -> Result<(Vec<OracleSample>, Oracle)> {
    if !(t_end > 0.0) || intervals == 0 {
        return Err(Error::config("oracle needs t_end > 0 and at least one sample interval"));
    }
    let drive = drive.filter(|d| d.mu > 0.0);
    let mut spec = setup.spec(params, packet, drive.as_ref(), t_end);
    let span = t_end / intervals as f64;
    let per = (span / spec.dt).ceil().max(1.0) as usize;
    spec.dt = span / per as f64;
    let k_resolve = truncation_momentum(ORACLE_RESOLVE_TAIL, packet, params)?;
    spec.validate(params, k_resolve)?;
    let p = *packet;
    let init = move |x: f64| Complex64::new(p.value(x), 0.0);
    let mut oracle = Oracle::new(&init, params, drive, spec)?;
    let mut samples = Vec::with_capacity(intervals + 1);
    samples.push(oracle.sample());
    for i in 1..=intervals {
        for _ in 0..per {
            oracle.step();
        }
        let mut s = oracle.sample();
        s.t = span * i as f64;
        samples.push(s);
    }
    Ok((samples, oracle))
}

/// Perturbative driven survival at `t̃ = 2π·periods·i/intervals`.
pub fn driven_spectral(
    params: &BarrierParams,
    packet: &PacketParams,
    drive: &DriveParams,
    k_max: f64,
    periods: f64,
    intervals: usize,
    order: u8,
) -> Result<(AmplitudeSeries, Vec<DrivenSample>)> {
    if !(periods > 0.0) || intervals == 0 {
        return Err(Error::config("drive needs periods > 0 and at least one sample interval"));
    }
    let t_end = periods * drive.period();
    let grid = pole_refined_grid(params, k_max, params.x0 + 4.0 * packet.delta, t_end, 0.01)?;
    if grid.len() > MAX_NODES {
        return Err(Error::accuracy("momentum grid for this horizon exceeds the node budget", grid.len() as f64));
    }
    let series = AmplitudeSeries::new(&grid.nodes, &grid.weights, packet, params, drive)?;
    let tt: Vec<f64> = (0..=intervals).map(|i| drive.omega * t_end * i as f64 / intervals as f64).collect();
    let samples = perturbed_survival(&series, &tt, order)?;
    Ok((series, samples))
}

/// Largest first-order momentum kick `2μ̃` over the packet's momentum
/// width `1/(Δ√(mω))`. Above 1 the expansion only tracks whole periods,
/// where the kick `μ̃(1 - cos t̃)` returns to zero.
pub fn kick_ratio(params: &BarrierParams, packet: &PacketParams, drive: &DriveParams) -> f64 {
    2.0 * drive.mu_tilde * packet.delta * (params.m * drive.omega).sqrt()
}

/// `μ̃ k̃ t̃` at the first even pole after `periods` drive periods.
pub fn secular_estimate(params: &BarrierParams, drive: &DriveParams, periods: f64) -> Result<f64> {
    let pole = find_pole(Parity::Even, 0, params)?;
    let kt = pole.k_center / (params.m * drive.omega).sqrt();
    Ok(dbarrier_core::drive::secular_parameter(drive.mu_tilde, kt, 2.0 * std::f64::consts::PI * periods))
}
