//! Independent finite-difference solver: Crank–Nicolson on a uniform grid
//! with hard walls at `±L`.
//!
//! Each delta is carried by `barrier_cells` cells of total area `λ/2`
//! centred on `±x₀` (one cell: a single node of height `λ/(2Δx)`). Undriven
//! even states can be run on the half line `[0, L]` with a Neumann
//! condition at the origin. Besides the three-point Crank–Nicolson default a
//! compact fourth-order stencil and a fourth-order Padé step are available
//! ([`GridSpec::high_order`]) for lifetime-length runs.

// only needed when std is absent from the build
#[cfg(not(test))]
#[allow(unused_imports)]
use num_traits::Float;
use alloc::vec;
use alloc::vec::Vec;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::{BarrierParams, DriveParams};

/// Magnitudes below this are flushed to zero; subnormal arithmetic in the
/// far tails otherwise slows the sweeps by two orders of magnitude.
const FLUSH: f64 = 1e-200;

#[inline]
fn flush(z: Complex64) -> Complex64 {
    if z.re.abs() < FLUSH && z.im.abs() < FLUSH { Complex64::new(0.0, 0.0) } else { z }
}

/// Bound on `Δt · k²/2m` at the resolved momentum (Crank–Nicolson).
pub const PHASE_GUARD: f64 = 0.1;
/// The same bound for the Padé scheme, at equal per-step phase error.
pub const PADE_PHASE_GUARD: f64 = 0.5;

/// Optional polynomial absorber `-i W₀ ((|x|-x_a)/(L-x_a))^p` beyond `x_a`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Absorber {
    pub start: f64,
    pub strength: f64,
    pub power: i32,
}

/// Spatial discretisation of the kinetic term.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stencil {
    /// Three-point Laplacian, dispersion error `(kΔx)²/12`.
    Standard,
    /// Fourth-order compact (Numerov) Laplacian, dispersion error `(kΔx)⁴/360`.
    Compact,
}

/// Time stepping.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TimeScheme {
    /// Implicit midpoint, phase error `φ³/12` per step.
    CrankNicolson,
    /// Diagonal (2,2) Padé approximant as two complex-shifted tridiagonal
    /// solves; phase error `φ⁵/720` per step. Time-independent runs only.
    Pade,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub half_length: f64,
    pub dx: f64,
    pub dt: f64,
    /// Cells carrying each delta (1, or an even number).
    pub barrier_cells: usize,
    /// Use the half line with `ψ'(0) = 0`; only valid for undriven even states.
    pub mirror: bool,
    pub absorber: Option<Absorber>,
    pub stencil: Stencil,
    pub scheme: TimeScheme,
}

impl GridSpec {
    pub fn new(half_length: f64, dx: f64, dt: f64) -> Self {
        GridSpec { half_length, dx, dt, barrier_cells: 1, mirror: false, absorber: None, stencil: Stencil::Standard, scheme: TimeScheme::CrankNicolson }
    }

    /// Compact stencil with the Padé step, for long time-independent runs.
    pub fn high_order(mut self) -> Self {
        self.stencil = Stencil::Compact;
        self.scheme = TimeScheme::Pade;
        self
    }

    pub fn mirrored(mut self) -> Self {
        self.mirror = true;
        self
    }

    /// Checks the layout against the barrier and the time-step guard for
    /// momenta up to `k_resolve`.
    pub fn validate(&self, params: &BarrierParams, k_resolve: f64) -> Result<()> {
        if !(self.dx > 0.0 && self.dt > 0.0 && self.half_length > 0.0) {
            return Err(Error::config("grid spacing, time step and half length must be positive"));
        }
        let n0 = params.x0 / self.dx;
        if (n0 - n0.round()).abs() > 1e-9 * n0.max(1.0) {
            return Err(Error::config("x0 must fall on a grid node"));
        }
        let nl = self.half_length / self.dx;
        if (nl - nl.round()).abs() > 1e-9 * nl.max(1.0) {
            return Err(Error::config("half length must be a whole number of cells"));
        }
        let reach = params.x0 + self.barrier_cells as f64 * self.dx;
        if self.half_length <= reach {
            return Err(Error::config("domain must extend beyond the barriers"));
        }
        if self.barrier_cells == 0 || (self.barrier_cells > 1 && self.barrier_cells % 2 == 1) {
            return Err(Error::config("barrier_cells must be 1 or even"));
        }
        if let Some(a) = self.absorber {
            if !(a.start > reach && a.start < self.half_length && a.strength >= 0.0 && a.power > 0) {
                return Err(Error::config("absorber must start beyond the barriers and inside the domain"));
            }
        }
        let guard = self.dt * k_resolve * k_resolve / (2.0 * params.m);
        let bound = match self.scheme {
            TimeScheme::CrankNicolson => PHASE_GUARD,
            TimeScheme::Pade => PADE_PHASE_GUARD,
        };
        if guard >= bound {
            return Err(Error::accuracy("time step too coarse: dt k²/2m exceeds the guard", guard));
        }
        Ok(())
    }

    /// Node positions (interior and boundary).
    pub fn nodes(&self) -> Vec<f64> {
        let n = (self.half_length / self.dx).round() as usize;
        if self.mirror {
            (0..=n).map(|j| j as f64 * self.dx).collect()
        } else {
            (0..=2 * n).map(|j| -self.half_length + j as f64 * self.dx).collect()
        }
    }
}

/// Wall-clock-free observables at one time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleSample {
    pub t: f64,
    pub inner: f64,
    pub outer: f64,
    pub total: f64,
    /// `∫|ψ_odd|²`, with `ψ_odd(x) = (ψ(x) - ψ(-x))/2`.
    pub odd_weight: f64,
    /// Current at `+x₀`.
    pub current: f64,
}

/// One factor `(B - aK) ψ' = (B + aK) ψ` of the step, with its cached
/// elimination. Crank–Nicolson is the single factor `a = -i dt/2`.
#[derive(Debug, Clone)]
struct Stage {
    off_rhs: Complex64,
    rhs_diag: Vec<Complex64>,
    inv: Vec<Complex64>,
    // lower coupling times the pivot inverse
    lower_inv: Vec<Complex64>,
    upper_inv: Vec<Complex64>,
}

/// A Crank–Nicolson (or factored Padé) stepper with its state. Sampled
/// initial data are normalised in the discrete norm.
///
/// With the compact stencil each factor is `(B - aK) ψ' = (B + aK) ψ` where
/// `B = (1, 10, 1)/12` and `K = -δ²/(2mΔx²) + V`; the step conserves the
/// `B`-weighted norm exactly. The standard stencil has `B = 1`.
#[derive(Debug, Clone)]
pub struct Oracle {
    pub spec: GridSpec,
    pub x: Vec<f64>,
    pub psi: Vec<Complex64>,
    pub t: f64,
    m: f64,
    static_v: Vec<Complex64>,
    n0: usize,
    origin: usize,
    drive: Option<DriveParams>,
    mass_diag: f64,
    mass_off: f64,
    stages: Vec<Stage>,
    scratch: Vec<Complex64>,
}

/// Roots `z` of `z² + 6z + 12`; the (2,2) Padé approximant of `e^z` is
/// `Π (1 - z/z_s)/(1 + z/z_s)`.
fn pade_roots() -> [Complex64; 2] {
    let r = 3.0f64.sqrt();
    [Complex64::new(-3.0, r), Complex64::new(-3.0, -r)]
}

impl Oracle {
    pub fn new(
        initial: &dyn Fn(f64) -> Complex64,
        params: &BarrierParams,
        drive: Option<DriveParams>,
        spec: GridSpec,
    ) -> Result<Self> {
        let drive = drive.filter(|d| d.mu != 0.0);
        if spec.mirror && drive.is_some() {
            return Err(Error::config("the mirrored half line cannot carry a parity-breaking drive"));
        }
        if spec.scheme == TimeScheme::Pade && drive.is_some() {
            return Err(Error::config("the Padé scheme is for time-independent runs; use Crank–Nicolson with a drive"));
        }
        let x = spec.nodes();
        let nx = x.len();
        let n0 = (params.x0 / spec.dx).round() as usize;
        let origin = if spec.mirror { 0 } else { (nx - 1) / 2 };
        let mut static_v = vec![Complex64::new(0.0, 0.0); nx];
        let s = params.delta_strength();
        let cells = spec.barrier_cells;
        let centres: Vec<usize> =
            if spec.mirror { vec![origin + n0] } else { vec![origin - n0, origin + n0] };
        for c in centres {
            if cells == 1 {
                static_v[c].re += s / spec.dx;
            } else {
                let h = s / (cells as f64 * spec.dx);
                let half = cells / 2;
                for j in c - half..=c + half {
                    let wt = if j == c - half || j == c + half { 0.5 } else { 1.0 };
                    static_v[j].re += wt * h;
                }
            }
        }
        if let Some(a) = spec.absorber {
            for (v, &xj) in static_v.iter_mut().zip(&x) {
                let d = xj.abs() - a.start;
                if d > 0.0 {
                    v.im -= a.strength * (d / (spec.half_length - a.start)).powi(a.power);
                }
            }
        }
        let mut psi: Vec<Complex64> = x.iter().map(|&x| initial(x)).collect();
        psi[nx - 1] = Complex64::new(0.0, 0.0);
        if !spec.mirror {
            psi[0] = Complex64::new(0.0, 0.0);
        }
        let (mass_diag, mass_off) = match spec.stencil {
            Stencil::Compact => (10.0 / 12.0, 1.0 / 12.0),
            Stencil::Standard => (1.0, 0.0),
        };
        let mut o = Oracle {
            spec,
            x,
            psi,
            t: 0.0,
            m: params.m,
            static_v,
            n0,
            origin,
            drive,
            mass_diag,
            mass_off,
            stages: Vec::new(),
            scratch: Vec::new(),
        };
        let norm = o.sample().total;
        if norm > 0.0 {
            let scale = norm.sqrt().recip();
            o.psi.iter_mut().for_each(|v| *v *= scale);
        }
        if o.drive.is_none() {
            let dt = spec.dt;
            let coefficients: Vec<Complex64> = match spec.scheme {
                TimeScheme::CrankNicolson => vec![Complex64::new(0.0, -0.5 * dt)],
                TimeScheme::Pade => pade_roots().iter().map(|z| Complex64::new(0.0, dt) / z).collect(),
            };
            o.stages = coefficients.into_iter().map(|a| o.stage(a, 0.0)).collect();
        }
        Ok(o)
    }

    fn kinetic(&self) -> f64 {
        1.0 / (self.m * self.spec.dx * self.spec.dx)
    }

    /// Builds and eliminates one factor with the potential at time `t`.
    fn stage(&self, a: Complex64, t: f64) -> Stage {
        let k = self.kinetic();
        let k_off = Complex64::new(-0.5 * k, 0.0);
        let off_lhs = self.mass_off - a * k_off;
        let off_rhs = self.mass_off + a * k_off;
        let first = self.first_unknown();
        let n = self.unknowns();
        let mut rhs_diag = Vec::with_capacity(n);
        let mut inv = Vec::with_capacity(n);
        let mut lower_inv = Vec::with_capacity(n);
        let mut upper_inv = Vec::with_capacity(n);
        let mut prev_up = Complex64::new(0.0, 0.0);
        for i in 0..n {
            let j = first + i;
            let mut v = self.static_v[j];
            if let Some(d) = self.drive {
                v.re += d.potential(self.x[j], t);
            }
            let kd = Complex64::new(k, 0.0) + v;
            let d = self.mass_diag - a * kd;
            rhs_diag.push(self.mass_diag + a * kd);
            let id = (d - off_lhs * prev_up).inv();
            inv.push(id);
            lower_inv.push(off_lhs * id);
            // the mirrored origin row couples to its neighbour twice
            let upper = if self.spec.mirror && i == 0 { 2.0 * off_lhs } else { off_lhs };
            prev_up = upper * id;
            upper_inv.push(prev_up);
        }
        Stage { off_rhs, rhs_diag, inv, lower_inv, upper_inv }
    }

    fn first_unknown(&self) -> usize {
        if self.spec.mirror { 0 } else { 1 }
    }

    fn unknowns(&self) -> usize {
        self.x.len() - 1 - self.first_unknown()
    }

    fn apply(psi: &mut [Complex64], rhs: &mut Vec<Complex64>, first: usize, st: &Stage) {
        let n = st.inv.len();
        let c = st.off_rhs;
        rhs.clear();
        let left0 = if first == 0 { psi[1] } else { psi[0] };
        rhs.push((st.rhs_diag[0] * psi[first] + c * (left0 + psi[first + 1])) * st.inv[0]);
        rhs.extend(
            psi[first..first + n + 1]
                .windows(3)
                .zip(&st.rhs_diag[1..])
                .zip(&st.inv[1..])
                .map(|((w, d), id)| (d * w[1] + c * (w[0] + w[2])) * id),
        );
        let mut prev = Complex64::new(0.0, 0.0);
        for (r, l) in rhs.iter_mut().zip(&st.lower_inv) {
            prev = flush(*r - l * prev);
            *r = prev;
        }
        let mut next = Complex64::new(0.0, 0.0);
        for ((p, r), u) in psi[first..first + n].iter_mut().zip(rhs.iter()).zip(&st.upper_inv).rev() {
            next = flush(r - u * next);
            *p = next;
        }
    }

    /// One time step.
    pub fn step(&mut self) {
        let first = self.first_unknown();
        if self.drive.is_some() {
            let st = self.stage(Complex64::new(0.0, -0.5 * self.spec.dt), self.t + 0.5 * self.spec.dt);
            Self::apply(&mut self.psi, &mut self.scratch, first, &st);
        } else {
            for st in &self.stages {
                Self::apply(&mut self.psi, &mut self.scratch, first, st);
            }
        }
        self.t += self.spec.dt;
    }

    pub fn conjugate(&mut self) {
        for v in &mut self.psi {
            *v = v.conj();
        }
    }

    fn neighbour_sum(&self, j: usize) -> Complex64 {
        let zero = Complex64::new(0.0, 0.0);
        let left = if j == 0 { if self.spec.mirror { self.psi[1] } else { zero } } else { self.psi[j - 1] };
        let right = if j + 1 < self.psi.len() { self.psi[j + 1] } else { zero };
        left + right
    }

    /// `Re ψ̄_j (Bψ)_j`, the density of the conserved norm.
    fn density(&self, j: usize) -> f64 {
        let bpsi = self.mass_diag * self.psi[j] + self.mass_off * self.neighbour_sum(j);
        (self.psi[j].conj() * bpsi).re
    }

    /// `Im(ψ̄ ∂ₓψ)/m` with the central difference at node `j`.
    fn node_current(&self, j: usize) -> f64 {
        let d = (self.psi[j + 1] - self.psi[j - 1]) / (2.0 * self.spec.dx);
        (self.psi[j].conj() * d).im / self.m
    }

    /// Current at `+x₀`, without the cost of a full [`Oracle::sample`].
    pub fn boundary_current(&self) -> f64 {
        self.node_current(self.origin + self.n0)
    }

    pub fn sample(&self) -> OracleSample {
        let dx = self.spec.dx;
        let nx = self.x.len();
        let o = self.origin;
        let (inner, total, odd) = if self.spec.mirror {
            let mut inner = 0.5 * self.density(0);
            for j in 1..self.n0 {
                inner += self.density(j);
            }
            inner += 0.5 * self.density(self.n0);
            let mut total = 0.5 * self.density(0);
            for j in 1..nx {
                total += self.density(j);
            }
            (2.0 * dx * inner, 2.0 * dx * total, 0.0)
        } else {
            let mut inner = 0.5 * (self.density(o - self.n0) + self.density(o + self.n0));
            for j in o + 1 - self.n0..o + self.n0 {
                inner += self.density(j);
            }
            let total: f64 = (0..nx).map(|j| self.density(j)).sum();
            let mut odd = 0.0;
            for i in 1..=o {
                odd += 2.0 * (0.5 * (self.psi[o + i] - self.psi[o - i])).norm_sqr();
            }
            (dx * inner, dx * total, dx * odd)
        };
        let current = self.node_current(o + self.n0);
        OracleSample { t: self.t, inner, outer: total - inner, total, odd_weight: odd, current }
    }

    /// `ψ` at `x = j·stride·Δx` for `j = 0..`, `x ≤ x_max`, on the right half line.
    pub fn right_half(&self, stride: usize, x_max: f64) -> Vec<Complex64> {
        let mut out = Vec::new();
        let mut j = self.origin;
        while j < self.x.len() && self.x[j] <= x_max + 1e-9 * self.spec.dx {
            out.push(self.psi[j]);
            j += stride;
        }
        out
    }
}

/// Result of [`evolve_grid`].
#[derive(Debug, Clone)]
pub struct OracleRun {
    pub samples: Vec<OracleSample>,
    pub state: Oracle,
}

/// Evolves to `t_end` (the step is shortened so it divides `t_end`) and
/// records observables every `sample_every` steps plus at the end.
pub fn evolve_grid(
    initial: &dyn Fn(f64) -> Complex64,
    params: &BarrierParams,
    drive: Option<DriveParams>,
    mut spec: GridSpec,
    t_end: f64,
    sample_every: usize,
    k_resolve: f64,
) -> Result<OracleRun> {
    if !(t_end >= 0.0) {
        return Err(Error::domain("end time must be non-negative"));
    }
    let steps = (t_end / spec.dt).ceil().max(1.0) as usize;
    if t_end > 0.0 {
        spec.dt = t_end / steps as f64;
    }
    spec.validate(params, k_resolve)?;
    let mut o = Oracle::new(initial, params, drive, spec)?;
    let every = sample_every.max(1);
    let mut samples = vec![o.sample()];
    if t_end > 0.0 {
        for n in 1..=steps {
            o.step();
            if n % every == 0 || n == steps {
                samples.push(o.sample());
            }
        }
    }
    Ok(OracleRun { samples, state: o })
}

/// `√(Σ w_j |a_j - b_j|²)` with weight `2·step` (half weight at the origin).
pub fn half_line_l2(a: &[Complex64], b: &[Complex64], step: f64) -> f64 {
    let n = a.len().min(b.len());
    let s: f64 = (0..n)
        .map(|j| {
            let w = if j == 0 { 1.0 } else { 2.0 };
            w * step * (a[j] - b[j]).norm_sqr()
        })
        .sum();
    s.sqrt()
}

/// One level of a refinement study.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceLevel {
    pub dx: f64,
    pub dt: f64,
    /// L² distance to the next finer level (NaN for the finest).
    pub self_difference: f64,
    /// L² distance to the supplied reference, when one is given.
    pub reference_difference: f64,
    pub observed_order: f64,
    pub final_sample: OracleSample,
}

/// Runs `levels` (coarse to fine, commensurate grids) to `t_end` and
/// compares the right-half wave functions on the coarsest spacing, up to
/// `x_compare`.
pub fn convergence_study(
    initial: &dyn Fn(f64) -> Complex64,
    params: &BarrierParams,
    levels: &[GridSpec],
    t_end: f64,
    k_resolve: f64,
    x_compare: f64,
    reference: Option<&[Complex64]>,
) -> Result<Vec<ConvergenceLevel>> {
    if levels.len() < 2 {
        return Err(Error::config("a convergence study needs at least two levels"));
    }
    let coarse = levels[0].dx;
    let mut states = Vec::new();
    let mut finals = Vec::new();
    for spec in levels {
        let ratio = coarse / spec.dx;
        if (ratio - ratio.round()).abs() > 1e-9 {
            return Err(Error::config("level spacings must divide the coarsest spacing"));
        }
        let run = evolve_grid(initial, params, None, *spec, t_end, usize::MAX, k_resolve)?;
        states.push(run.state.right_half(ratio.round() as usize, x_compare));
        finals.push((run.state.spec.dt, *run.samples.last().unwrap()));
    }
    let n = levels.len();
    let diffs: Vec<f64> =
        (0..n).map(|i| if i + 1 < n { half_line_l2(&states[i], &states[i + 1], coarse) } else { f64::NAN }).collect();
    Ok((0..n)
        .map(|i| ConvergenceLevel {
            dx: levels[i].dx,
            dt: finals[i].0,
            self_difference: diffs[i],
            reference_difference: reference.map_or(f64::NAN, |r| half_line_l2(&states[i], r, coarse)),
            observed_order: if i + 2 < n { (diffs[i] / diffs[i + 1]).log2() } else { f64::NAN },
            final_sample: finals[i].1,
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::PI;

    fn gaussian(delta: f64) -> impl Fn(f64) -> Complex64 {
        let n = (2.0 / (PI * delta * delta)).powf(0.25);
        move |x| Complex64::new(n * (-(x * x) / (delta * delta)).exp(), 0.0)
    }

    #[test]
    fn free_gaussian_spreads_analytically() {
        let p = BarrierParams::new(1.0, 0.0, 5.0).unwrap();
        let spec = GridSpec::new(60.0, 0.02, 0.005);
        let run = evolve_grid(&gaussian(1.0), &p, None, spec, 2.0, 1000, 2.0).unwrap();
        let t: f64 = 2.0;
        // |ψ|² width: Δ(t)² = Δ²(1 + (2t/mΔ²)²)
        let width2 = 1.0 + (2.0 * t).powi(2);
        let inner_exact = libm_erf((2.0f64 * 25.0 / width2).sqrt());
        let s = run.samples.last().unwrap();
        assert!((s.inner - inner_exact).abs() < 1e-4, "{} vs {inner_exact}", s.inner);
        assert!((s.total - 1.0).abs() < 1e-10);
    }

    fn libm_erf(x: f64) -> f64 {
        1.0 - crate::faddeeva::erfc(Complex64::new(x, 0.0)).re
    }

    #[test]
    fn pade_is_fourth_order_in_time() {
        let p = BarrierParams::new(1.0, 0.0, 5.0).unwrap();
        let run = |dt: f64| {
            let spec = GridSpec::new(40.0, 0.05, dt).high_order();
            evolve_grid(&gaussian(1.0), &p, None, spec, 4.0, usize::MAX, 1.0).unwrap().state.right_half(1, 40.0)
        };
        let (a, b, c) = (run(0.1), run(0.05), run(0.025));
        let order = (half_line_l2(&a, &b, 0.05) / half_line_l2(&b, &c, 0.05)).log2();
        assert!((order - 4.0).abs() < 0.3, "{order}");
    }

    #[test]
    fn time_reversal_restores_the_state() {
        let p = BarrierParams::new(20.0, 0.1, 10.0).unwrap();
        let spec = GridSpec::new(40.0, 0.1, 0.5);
        let mut o = Oracle::new(&gaussian(5.0), &p, None, spec).unwrap();
        let start = o.psi.clone();
        for _ in 0..200 {
            o.step();
        }
        o.conjugate();
        for _ in 0..200 {
            o.step();
        }
        o.conjugate();
        let err: f64 = o.psi.iter().zip(&start).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
        assert!(err < 1e-10, "{err}");
    }

    #[test]
    fn mirror_matches_full_domain() {
        let p = BarrierParams::new(20.0, 0.1, 10.0).unwrap();
        let full = evolve_grid(&gaussian(5.0), &p, None, GridSpec::new(60.0, 0.1, 1.0), 200.0, 50, 0.8).unwrap();
        let half =
            evolve_grid(&gaussian(5.0), &p, None, GridSpec::new(60.0, 0.1, 1.0).mirrored(), 200.0, 50, 0.8).unwrap();
        for (a, b) in full.samples.iter().zip(&half.samples) {
            assert!((a.inner - b.inner).abs() < 1e-12 && (a.total - b.total).abs() < 1e-12);
        }
        let a = full.state.right_half(1, 60.0);
        let b = half.state.right_half(1, 60.0);
        assert!(half_line_l2(&a, &b, 0.1) < 1e-12);
    }

    #[test]
    fn discrete_flux_balances_inner_loss() {
        let p = BarrierParams::new(20.0, 0.1, 10.0).unwrap();
        let spec = GridSpec::new(80.0, 0.05, 0.1);
        let run = evolve_grid(&gaussian(5.0), &p, None, spec, 400.0, 1, 1.0).unwrap();
        let s = &run.samples;
        let outflow: f64 = s.windows(2).map(|w| (w[1].t - w[0].t) * (w[0].current + w[1].current)).sum();
        let loss = s[0].inner - s.last().unwrap().inner;
        assert!((loss - outflow).abs() < 1e-3 * loss, "{loss} vs {outflow}");
    }

    #[test]
    fn driven_run_excites_odd_parity() {
        let p = BarrierParams::new(20.0, 0.1, 10.0).unwrap();
        let d = DriveParams::from_mu_tilde(0.05, 1.0, 20.0).unwrap();
        let run = evolve_grid(&gaussian(5.0), &p, Some(d), GridSpec::new(40.0, 0.05, 0.05), 20.0, 40, 1.0).unwrap();
        let last = run.samples.last().unwrap();
        assert!(last.odd_weight > 0.0);
        assert!((last.total - 1.0).abs() < 1e-9);
        assert!(run.samples[0].odd_weight < 1e-28);
    }

    #[test]
    fn invalid_layouts_are_rejected() {
        let p = BarrierParams::new(20.0, 0.1, 10.0).unwrap();
        assert!(GridSpec::new(40.0, 0.3, 0.1).validate(&p, 1.0).is_err());
        assert!(GridSpec::new(40.0, 0.1, 10.0).validate(&p, 1.0).is_err());
        assert!(GridSpec::new(10.0, 0.1, 0.1).validate(&p, 1.0).is_err());
        assert!(GridSpec::new(40.0, 0.1, 0.1).validate(&p, 1.0).is_ok());
        let d = DriveParams::from_mu_tilde(0.05, 1.0, 20.0).unwrap();
        assert!(Oracle::new(&gaussian(5.0), &p, Some(d), GridSpec::new(40.0, 0.1, 0.1).mirrored()).is_err());
    }
}
