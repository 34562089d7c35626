//! Undriven time evolution by direct quadrature of the mode expansion,
//! probability bookkeeping, and the multi-exponential pole model.

// only needed when std is absent from the build
#[cfg(not(test))]
#[allow(unused_imports)]
use num_traits::Float;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::FRAC_PI_4;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::ModeBasis;
use crate::model::BarrierParams;
use crate::packet::ProjectionTable;
use crate::poles::Pole;
use crate::quad::GaussLegendre;
use crate::spectrum::Parity;

pub const PANEL_ORDER: usize = 16;
/// Refined region around each pole, in spike half-widths.
pub const CORE_HALF_WIDTHS: f64 = 10.0;
/// Largest admissible phase step between adjacent nodes.
pub const MAX_PHASE_STEP: f64 = FRAC_PI_4;

/// Graded panels around one pole.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PanelRefinement {
    pub center: f64,
    /// `|Im q|/(2k_c)`.
    pub half_width: f64,
    /// Nodes within `±CORE_HALF_WIDTHS` half-widths of the centre.
    pub core_nodes: usize,
}

/// Composite Gauss–Legendre grid on `(0, k_max)`.
///
/// Away from poles the panels have a uniform background width; towards each
/// pole centre panel edges are placed at `c ± w·2^j`, so panel widths shrink
/// geometrically down to the spike half-width `w`.
#[derive(Debug, Clone)]
pub struct KGrid {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub breakpoints: Vec<f64>,
    pub refinement_map: Vec<PanelRefinement>,
    pub background_width: f64,
}

impl KGrid {
    pub fn k_max(&self) -> f64 {
        *self.breakpoints.last().unwrap_or(&0.0)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Largest `|Δ(k²t/2m)|` between adjacent nodes.
    pub fn max_phase_step(&self, t: f64, m: f64) -> f64 {
        self.nodes
            .windows(2)
            .map(|w| (w[1] * w[1] - w[0] * w[0]) * t / (2.0 * m))
            .fold(0.0, f64::max)
    }
}

/// Builds a grid with `base_nodes` background nodes (rounded up to whole
/// panels) plus graded refinement around `poles` below `k_max`.
pub fn build_kgrid(poles: &[Pole], k_max: f64, base_nodes: usize) -> Result<KGrid> {
    if base_nodes < 32 {
        return Err(Error::domain("base_nodes must be at least 32"));
    }
    let panels = base_nodes.div_ceil(PANEL_ORDER);
    build_kgrid_with_width(poles, k_max, k_max / panels as f64)
}

/// As [`build_kgrid`], with the background panel width given directly.
pub fn build_kgrid_with_width(poles: &[Pole], k_max: f64, width: f64) -> Result<KGrid> {
    if !(k_max > 0.0 && k_max.is_finite()) {
        return Err(Error::domain("k_max must be positive"));
    }
    if !(width > 0.0 && width <= k_max) {
        return Err(Error::domain("background panel width must lie in (0, k_max]"));
    }
    if let Some(p) = poles.iter().find(|p| p.k_center >= k_max) {
        return Err(Error::domain(alloc::format!(
            "k_max = {k_max} does not extend beyond the pole at k = {}",
            p.k_center
        )));
    }
    let panels = (k_max / width).ceil() as usize;
    let mut points: Vec<f64> = (0..=panels).map(|i| k_max * i as f64 / panels as f64).collect();
    let mut centers = Vec::new();
    for p in poles {
        let c = p.k_center;
        let w = p.half_width();
        centers.push((c, w));
        points.push(c);
        let mut r = w;
        loop {
            for x in [c - r, c + r] {
                if x > 0.0 && x < k_max {
                    points.push(x);
                }
            }
            if r >= width {
                break;
            }
            r *= 2.0;
        }
    }
    points.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut breakpoints: Vec<f64> = Vec::with_capacity(points.len());
    for x in points {
        match breakpoints.last() {
            Some(&last) if x - last <= 1e-14 * x.max(1e-300) => {}
            _ => breakpoints.push(x),
        }
    }
    let rule = GaussLegendre::new(PANEL_ORDER);
    let mut nodes = Vec::with_capacity(PANEL_ORDER * breakpoints.len());
    let mut weights = Vec::with_capacity(PANEL_ORDER * breakpoints.len());
    for pair in breakpoints.windows(2) {
        for (x, wt) in rule.panel(pair[0], pair[1]) {
            nodes.push(x);
            weights.push(wt);
        }
    }
    let refinement_map = centers
        .into_iter()
        .map(|(center, half_width)| {
            let lo = center - CORE_HALF_WIDTHS * half_width;
            let hi = center + CORE_HALF_WIDTHS * half_width;
            PanelRefinement {
                center,
                half_width,
                core_nodes: nodes.iter().filter(|&&k| k >= lo && k <= hi).count(),
            }
        })
        .collect();
    Ok(KGrid { nodes, weights, breakpoints, refinement_map, background_width: width })
}

/// Largest gap between adjacent nodes of one panel, as a fraction of its width.
pub fn panel_gap_fraction() -> f64 {
    let rule = GaussLegendre::new(PANEL_ORDER);
    rule.nodes().windows(2).map(|w| 0.5 * (w[1] - w[0])).fold(0.0, f64::max)
}

/// Background width keeping the phase of `e^{±ikx - ik²t/2m}` below
/// [`MAX_PHASE_STEP`] per node for `|x| ≤ x_extent`, `t ≤ t_max`, `k ≤ k_max`.
pub fn horizon_width(k_max: f64, x_extent: f64, t_max: f64, m: f64) -> f64 {
    let rate = x_extent + k_max * t_max / m;
    let w = MAX_PHASE_STEP / (panel_gap_fraction() * rate.max(1e-300));
    w.min(k_max)
}

/// Grid refined around every even and odd pole below `k_max`, with the
/// background width from [`horizon_width`] capped at `max_width`.
pub fn pole_refined_grid(
    params: &BarrierParams,
    k_max: f64,
    x_extent: f64,
    t_max: f64,
    max_width: f64,
) -> Result<KGrid> {
    let mut poles = crate::poles::poles_below(Parity::Even, k_max, params)?;
    poles.extend(crate::poles::poles_below(Parity::Odd, k_max, params)?);
    let width = horizon_width(k_max, x_extent, t_max, params.m).min(max_width);
    build_kgrid_with_width(&poles, k_max, width)
}

/// Wave function sampled on a grid symmetric about the origin.
#[derive(Debug, Clone)]
pub struct WaveSnapshot {
    pub x_grid: Vec<f64>,
    pub values: Vec<Complex64>,
    pub time: f64,
}

/// Probabilities in the inner and outer zones.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbabilitySplit {
    pub inner: f64,
    pub outer: f64,
    pub total: f64,
}

/// Composite Simpson rule on uniformly spaced samples, with a 3/8 panel at
/// the end when the interval count is odd.
pub fn simpson(values: &[f64], step: f64) -> f64 {
    let n = values.len();
    match n {
        0 | 1 => 0.0,
        2 => 0.5 * step * (values[0] + values[1]),
        3 => step / 3.0 * (values[0] + 4.0 * values[1] + values[2]),
        _ => {
            let intervals = n - 1;
            let simpson_end = if intervals % 2 == 0 { n - 1 } else { n - 4 };
            let mut s = values[0] + values[simpson_end];
            for (i, v) in values.iter().enumerate().take(simpson_end).skip(1) {
                s += if i % 2 == 1 { 4.0 * v } else { 2.0 * v };
            }
            let mut total = s * step / 3.0;
            if simpson_end != n - 1 {
                let v = &values[simpson_end..];
                total += 3.0 * step / 8.0 * (v[0] + 3.0 * v[1] + 3.0 * v[2] + v[3]);
            }
            total
        }
    }
}

impl WaveSnapshot {
    fn uniform_step(&self) -> Result<f64> {
        if self.x_grid.len() < 3 {
            return Err(Error::domain("snapshot grid is too short"));
        }
        Ok(self.x_grid[1] - self.x_grid[0])
    }

    fn integrate_between(&self, a: f64, b: f64) -> Result<f64> {
        let step = self.uniform_step()?;
        let start = self.x_grid[0];
        let i0 = ((a - start) / step).round() as isize;
        let i1 = ((b - start) / step).round() as isize;
        if i0 < 0 || i1 as usize >= self.x_grid.len() || i1 <= i0 {
            return Err(Error::domain("integration range outside the snapshot grid"));
        }
        for (i, x) in [(i0, a), (i1, b)] {
            if (self.x_grid[i as usize] - x).abs() > 1e-9 * step {
                return Err(Error::domain("integration limit is not a grid node"));
            }
        }
        let dens: Vec<f64> = self.values[i0 as usize..=i1 as usize].iter().map(|v| v.norm_sqr()).collect();
        Ok(simpson(&dens, step))
    }
}

/// `∫_{-x₀}^{x₀} |Ψ|² dx` on the snapshot grid (must contain `±x₀` as nodes).
pub fn survival_inner(snapshot: &WaveSnapshot, x0: f64) -> Result<f64> {
    snapshot.integrate_between(-x0, x0)
}

/// Inner, outer (`x₀ < |x| < outer_limit`) and total probability.
pub fn probability_split(snapshot: &WaveSnapshot, x0: f64, outer_limit: f64) -> Result<ProbabilitySplit> {
    if !(outer_limit > x0) {
        return Err(Error::domain("outer_limit must exceed x0"));
    }
    let inner = snapshot.integrate_between(-x0, x0)?;
    let outer = snapshot.integrate_between(-outer_limit, -x0)? + snapshot.integrate_between(x0, outer_limit)?;
    Ok(ProbabilitySplit { inner, outer, total: inner + outer })
}

/// Spectral propagator `Ψ(x,t) = Σ_parity Σ_i w_i a_i χ(k_i,x) e^{-ik_i²t/2m}`.
#[derive(Debug, Clone)]
pub struct Propagator {
    pub basis: ModeBasis,
    pub m: f64,
    pub even: Vec<Complex64>,
    pub odd: Vec<Complex64>,
    inner_rule: GaussLegendre,
}

fn phase(k: f64, t: f64, m: f64) -> Complex64 {
    Complex64::from_polar(1.0, -k * k * t / (2.0 * m))
}

impl Propagator {
    /// Undriven propagator from t = 0 overlaps.
    pub fn new(table: &ProjectionTable, params: &BarrierParams) -> Result<Self> {
        let basis = ModeBasis::new(&table.k, &table.weights, params)?;
        Ok(Propagator {
            basis,
            m: params.m,
            even: table.coefficients(Parity::Even),
            odd: table.coefficients(Parity::Odd),
            inner_rule: GaussLegendre::new(48),
        })
    }

    /// Propagator from weighted amplitudes that already include all time dependence
    /// other than the free phase.
    pub fn from_amplitudes(basis: ModeBasis, m: f64, even: Vec<Complex64>, odd: Vec<Complex64>) -> Self {
        Propagator { basis, m, even, odd, inner_rule: GaussLegendre::new(48) }
    }

    pub fn coefficients_at(&self, t: f64) -> (Vec<Complex64>, Vec<Complex64>) {
        let even = self.even.iter().zip(&self.basis.k).map(|(c, &k)| c * phase(k, t, self.m)).collect();
        let odd = self.odd.iter().zip(&self.basis.k).map(|(c, &k)| c * phase(k, t, self.m)).collect();
        (even, odd)
    }

    fn has_odd(&self) -> bool {
        self.odd.iter().any(|c| c.norm_sqr() > 0.0)
    }

    /// Even and odd parts, `Ψ(±x) = E(x) ± O(x)`, on `x_j = j·step`, `j < count`.
    pub fn parts_uniform(&self, t: f64, step: f64, count: usize) -> (Vec<Complex64>, Vec<Complex64>) {
        let (ce, co) = self.coefficients_at(t);
        let e = self.basis.eval_uniform(Parity::Even, &ce, 0.0, step, count);
        let o = if self.has_odd() {
            self.basis.eval_uniform(Parity::Odd, &co, 0.0, step, count)
        } else {
            vec![Complex64::new(0.0, 0.0); count]
        };
        (e, o)
    }

    /// `(Ψ, ∂ₓΨ)` at arbitrary points.
    pub fn values_at(&self, t: f64, xs: &[f64]) -> Vec<(Complex64, Complex64)> {
        let (ce, co) = self.coefficients_at(t);
        let mut v = self.basis.eval_points(Parity::Even, &ce, xs);
        if self.has_odd() {
            for (a, b) in v.iter_mut().zip(self.basis.eval_points(Parity::Odd, &co, xs)) {
                a.0 += b.0;
                a.1 += b.1;
            }
        }
        v
    }

    /// Snapshot on `[-half_length, half_length]` with the given step.
    pub fn snapshot(&self, t: f64, half_length: f64, step: f64) -> WaveSnapshot {
        let count = (half_length / step).round() as usize + 1;
        let (e, o) = self.parts_uniform(t, step, count);
        let mut x_grid = Vec::with_capacity(2 * count - 1);
        let mut values = Vec::with_capacity(2 * count - 1);
        for j in (1..count).rev() {
            x_grid.push(-(j as f64) * step);
            values.push(e[j] - o[j]);
        }
        for j in 0..count {
            x_grid.push(j as f64 * step);
            values.push(e[j] + o[j]);
        }
        WaveSnapshot { x_grid, values, time: t }
    }

    /// `∫_{-x₀}^{x₀} |Ψ|²` by Gauss–Legendre on `[0, x₀]`.
    pub fn inner_probability(&self, t: f64) -> f64 {
        let x0 = self.basis.x0;
        let (xs, ws): (Vec<f64>, Vec<f64>) = self.inner_rule.panel(0.0, x0).unzip();
        let (ce, co) = self.coefficients_at(t);
        let e = self.basis.eval_points(Parity::Even, &ce, &xs);
        let o = if self.has_odd() { Some(self.basis.eval_points(Parity::Odd, &co, &xs)) } else { None };
        (0..xs.len())
            .map(|i| {
                let odd = o.as_ref().map_or(0.0, |o| o[i].0.norm_sqr());
                2.0 * ws[i] * (e[i].0.norm_sqr() + odd)
            })
            .sum()
    }

    /// Probability current `Im(Ψ*∂ₓΨ)/m` at `x`.
    pub fn current(&self, t: f64, x: f64) -> f64 {
        let (v, d) = self.values_at(t, &[x])[0];
        (v.conj() * d).im / self.m
    }

    /// Net outflow `J(x₀) - J(-x₀)`, equal to `-d(inner)/dt`.
    pub fn outflow(&self, t: f64) -> f64 {
        let x0 = self.basis.x0;
        let v = self.values_at(t, &[-x0, x0]);
        ((v[1].0.conj() * v[1].1).im - (v[0].0.conj() * v[0].1).im) / self.m
    }

    /// Inner/outer/total probability on `[-outer_limit, outer_limit]`, sampled
    /// with `step` (which must divide `x₀`).
    pub fn probability_split(&self, t: f64, outer_limit: f64, step: f64) -> Result<ProbabilitySplit> {
        let x0 = self.basis.x0;
        let n0 = (x0 / step).round() as usize;
        if ((n0 as f64) * step - x0).abs() > 1e-9 * step || outer_limit <= x0 {
            return Err(Error::domain("step must divide x0 and outer_limit must exceed x0"));
        }
        let count = (outer_limit / step).round() as usize + 1;
        let (e, o) = self.parts_uniform(t, step, count);
        let dens: Vec<f64> = e.iter().zip(&o).map(|(e, o)| 2.0 * (e.norm_sqr() + o.norm_sqr())).collect();
        let inner = simpson(&dens[..=n0], step);
        let outer = simpson(&dens[n0..], step);
        Ok(ProbabilitySplit { inner, outer, total: inner + outer })
    }
}

/// Rejects evaluation times whose phase varies by more than
/// [`MAX_PHASE_STEP`] between adjacent grid nodes.
pub fn check_phase_resolution(grid: &KGrid, t: f64, m: f64) -> Result<()> {
    let step = grid.max_phase_step(t, m);
    if step > MAX_PHASE_STEP {
        return Err(Error::accuracy(
            "phase k²t/2m is under-resolved on the momentum grid; refine the grid",
            step,
        ));
    }
    Ok(())
}

/// `Ψ(x, t)` on the symmetric grid `[-half_length, half_length]`.
pub fn propagate(
    t: f64,
    table: &ProjectionTable,
    grid: &KGrid,
    half_length: f64,
    step: f64,
    params: &BarrierParams,
) -> Result<WaveSnapshot> {
    if !(t >= 0.0) {
        return Err(Error::domain("propagation time must be non-negative"));
    }
    if table.k.len() != grid.nodes.len() {
        return Err(Error::domain("projection table does not match the grid"));
    }
    check_phase_resolution(grid, t, params.m)?;
    Ok(Propagator::new(table, params)?.snapshot(t, half_length, step))
}

/// Multi-exponential inner-survival model
/// `P(t) ∝ Σ_ij w_i w_j S_ij Re e^{-i(q_i - q_j*)t/2m}`, where `S_ij` is the
/// overlap of `cos(k_i x)` and `cos(k_j x)` on `[-x₀, x₀]`. For one pole
/// this is `e^{-2Λt}`. The result is normalised to 1 at t = 0.
pub fn pole_survival(t: f64, poles: &[Pole], weights: &[f64], params: &BarrierParams) -> Result<f64> {
    if poles.is_empty() || poles.len() != weights.len() {
        return Err(Error::domain("need one weight per pole"));
    }
    if poles.iter().any(|p| !(p.q.im < 0.0)) {
        return Err(Error::domain("pole model needs Im q < 0"));
    }
    let x0 = params.x0;
    let profile = |p: &Pole, x: f64| match p.parity {
        Parity::Even => (p.k_center * x).cos(),
        Parity::Odd => (p.k_center * x).sin(),
    };
    let rule = GaussLegendre::new(64);
    let eval = |t: f64| {
        let mut total = 0.0;
        for (i, pi) in poles.iter().enumerate() {
            for (j, pj) in poles.iter().enumerate() {
                if pi.parity != pj.parity {
                    continue;
                }
                let s = rule.integrate(-x0, x0, |x| profile(pi, x) * profile(pj, x));
                let e = (Complex64::new(0.0, -1.0) * (pi.q - pj.q.conj()) * t / (2.0 * params.m)).exp();
                total += weights[i] * weights[j] * s * e.re;
            }
        }
        total
    };
    Ok(eval(t) / eval(0.0))
}

/// Amplitude decay rate from a log-linear least-squares fit: `-slope/2`.
pub fn fit_decay(times: &[f64], values: &[f64]) -> Result<f64> {
    if times.len() != values.len() || times.len() < 10 {
        return Err(Error::domain("fit_decay needs at least 10 (t, P) samples"));
    }
    if values.iter().any(|&v| !(v > 0.0)) {
        return Err(Error::domain("fit_decay needs positive values"));
    }
    let n = times.len() as f64;
    let tm = times.iter().sum::<f64>() / n;
    let logs: Vec<f64> = values.iter().map(|v| v.ln()).collect();
    let lm = logs.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    for (t, l) in times.iter().zip(&logs) {
        sxy += (t - tm) * (l - lm);
        sxx += (t - tm) * (t - tm);
    }
    if sxx == 0.0 {
        return Err(Error::domain("fit_decay needs distinct times"));
    }
    Ok(-0.5 * sxy / sxx)
}
