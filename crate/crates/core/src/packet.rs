//! Projection of the Gaussian packet onto the continuum modes.
//!
//! For the even mode the overlap is `G(k)/n_e(k)` with the smooth factor
//!
//! `G(k) = 2N [∫₀^∞ e^{-x²/Δ²} cos kx dx + (mλ cos kx₀ / k) ∫_{x₀}^∞ e^{-x²/Δ²} sin k(x-x₀) dx]`,
//!
//! evaluated in closed form through the Faddeeva function. All structure in
//! `k` beyond the Gaussian envelope comes from `1/n_e`.

// only needed when std is absent from the build
#[cfg(not(test))]
#[allow(unused_imports)]
use num_traits::Float;
use alloc::vec::Vec;
use core::f64::consts::PI;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::faddeeva::{erfc, gaussian_tail_moments};
use crate::field::ModeBasis;
use crate::model::{BarrierParams, PacketParams};
use crate::poles::Pole;
use crate::quad::{adaptive, Estimate};
use crate::spectrum::{coefficients, inverse_norm, Parity};

/// The quadrature path truncates the tails at `x₀ + TAIL_WIDTHS·Δ`.
pub const TAIL_WIDTHS: f64 = 12.0;

fn check_k(k: f64) -> Result<()> {
    if k > 0.0 && k.is_finite() {
        Ok(())
    } else {
        Err(Error::domain("projection momentum must be positive"))
    }
}

/// `(G(k), G'(k))` for the even channel.
pub fn smooth_projection(k: f64, packet: &PacketParams, params: &BarrierParams) -> (f64, f64) {
    let d = packet.delta;
    let x0 = params.x0;
    let g = params.coupling();
    let head = 0.5 * d * PI.sqrt() * (-(0.25 * k * k * d * d)).exp();
    let dhead = -0.5 * k * d * d * head;
    let [m0, m1, _] = gaussian_tail_moments(x0, k, d);
    let shift = Complex64::from_polar(1.0, -k * x0);
    let s = (shift * m0).im;
    let ds = (shift * (m1 - x0 * m0)).re;
    let (sn, cs) = (k * x0).sin_cos();
    let amp = g * cs / k;
    let damp = -g * (x0 * sn * k + cs) / (k * k);
    let n2 = 2.0 * packet.norm;
    (n2 * (head + amp * s), n2 * (dhead + damp * s + amp * ds))
}

/// `∫ Ψ(x,0) χ(k,x) dx` in closed form.
pub fn project(parity: Parity, k: f64, packet: &PacketParams, params: &BarrierParams) -> Result<f64> {
    check_k(k)?;
    Ok(match parity {
        Parity::Even => smooth_projection(k, packet, params).0 * inverse_norm(Parity::Even, k, params),
        Parity::Odd => 0.0,
    })
}

/// The same overlap by adaptive quadrature over `(-L,-x₀)`, `(-x₀,x₀)`, `(x₀,L)`.
pub fn project_quadrature(
    parity: Parity,
    k: f64,
    packet: &PacketParams,
    params: &BarrierParams,
    tol: f64,
) -> Result<Estimate> {
    check_k(k)?;
    let mode = coefficients(parity, k, params)?;
    let x0 = params.x0;
    let l = x0 + TAIL_WIDTHS * packet.delta;
    let integrand = |x: f64| packet.value(x) * mode.eval(x);
    // enough intervals to resolve cos(kx) over the tail
    let limit = 64 + (4.0 * k * l) as usize;
    let mut value = 0.0;
    let mut error = 0.0;
    for (a, b) in [(-l, -x0), (-x0, x0), (x0, l)] {
        let e = adaptive(integrand, a, b, tol / 3.0, limit)?;
        value += e.value;
        error += e.error;
    }
    Ok(Estimate { value, error })
}

/// `e^{-k²Δ²/4}`.
pub fn momentum_envelope(k: f64, delta: f64) -> f64 {
    (-(0.25 * k * k * delta * delta)).exp()
}

/// Envelope values at each pole centre, relative to the lowest even pole
/// in the list (or to the first pole if there is no even one).
pub fn pole_weights(packet: &PacketParams, poles: &[Pole]) -> Result<Vec<f64>> {
    let reference = poles
        .iter()
        .filter(|p| p.parity == Parity::Even)
        .min_by_key(|p| p.index)
        .or(poles.first())
        .ok_or_else(|| Error::domain("pole list is empty"))?;
    let base = momentum_envelope(reference.k_center, packet.delta);
    Ok(poles.iter().map(|p| momentum_envelope(p.k_center, packet.delta) / base).collect())
}

/// Amplitude of the inner-region pole term `R cos(k_c x) e^{-iqt/2m}`:
/// `R = k_c G(k_c) / (2√(γβ))`, the integral of the smooth factor across
/// the `1/n²` spike.
pub fn residue(pole: &Pole, packet: &PacketParams, params: &BarrierParams) -> f64 {
    let kc = pole.k_center;
    let g = match pole.parity {
        Parity::Even => smooth_projection(kc, packet, params).0,
        Parity::Odd => 0.0,
    };
    kc * g / (2.0 * (pole.gamma * pole.beta).sqrt())
}

/// Large-`k` amplitude `C` of the kink tail, `|overlap| ≲ C/k²`.
pub fn kink_tail_amplitude(packet: &PacketParams, params: &BarrierParams) -> f64 {
    let u = params.x0 / packet.delta;
    2.0 * packet.norm * params.coupling() * (-(u * u)).exp() / PI.sqrt()
}

/// Estimated probability carried by momenta above `k`: the Gaussian part
/// `erfc(kΔ/√2)` plus the kink tail `C²/(6k³)`.
pub fn tail_mass(k: f64, packet: &PacketParams, params: &BarrierParams) -> f64 {
    let c = kink_tail_amplitude(packet, params);
    let gauss = erfc(Complex64::new(k * packet.delta / core::f64::consts::SQRT_2, 0.0)).re;
    if c == 0.0 {
        gauss
    } else {
        gauss + c * c / (6.0 * k * k * k)
    }
}

/// Smallest momentum cut-off whose [`tail_mass`] is below `mass`.
pub fn truncation_momentum(mass: f64, packet: &PacketParams, params: &BarrierParams) -> Result<f64> {
    if !(mass > 0.0 && mass < 1.0) {
        return Err(Error::domain("tail mass must lie in (0, 1)"));
    }
    let mut hi = 1.0 / packet.delta;
    while tail_mass(hi, packet, params) > mass {
        hi *= 2.0;
        if hi > 1e9 {
            return Err(Error::domain("tail mass target is unreachable"));
        }
    }
    let mut lo = 0.5 * hi;
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if tail_mass(mid, packet, params) > mass {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(hi)
}

/// Overlaps tabulated on a quadrature grid.
///
/// `b_even_raw` is the overlap `∫Ψχ_e dx`; `b_even_norm` is `n_e` times it,
/// i.e. the smooth factor `G`.
#[derive(Debug, Clone)]
pub struct ProjectionTable {
    pub k: Vec<f64>,
    pub weights: Vec<f64>,
    pub b_even_raw: Vec<f64>,
    pub b_even_norm: Vec<f64>,
    pub b_odd: Vec<f64>,
}

impl ProjectionTable {
    pub fn build(k: &[f64], weights: &[f64], packet: &PacketParams, params: &BarrierParams) -> Result<Self> {
        if k.len() != weights.len() {
            return Err(Error::domain("node and weight counts differ"));
        }
        let mut table = ProjectionTable {
            k: k.to_vec(),
            weights: weights.to_vec(),
            b_even_raw: Vec::with_capacity(k.len()),
            b_even_norm: Vec::with_capacity(k.len()),
            b_odd: Vec::with_capacity(k.len()),
        };
        for &ki in k {
            check_k(ki)?;
            let g = smooth_projection(ki, packet, params).0;
            table.b_even_norm.push(g);
            table.b_even_raw.push(g * inverse_norm(Parity::Even, ki, params));
            table.b_odd.push(project(Parity::Odd, ki, packet, params)?);
        }
        Ok(table)
    }

    /// `∫ (|b_e|² + |b_o|²) dk` on the table's quadrature.
    pub fn parseval(&self) -> f64 {
        (0..self.k.len())
            .map(|i| self.weights[i] * (self.b_even_raw[i].powi(2) + self.b_odd[i].powi(2)))
            .sum()
    }

    /// `w_i b(k_i)` per parity, the t = 0 expansion coefficients.
    pub fn coefficients(&self, parity: Parity) -> Vec<Complex64> {
        let b = match parity {
            Parity::Even => &self.b_even_raw,
            Parity::Odd => &self.b_odd,
        };
        b.iter().zip(&self.weights).map(|(b, w)| Complex64::new(b * w, 0.0)).collect()
    }
}

/// `Σ_parity ∫ χ(k,x) b(k) dk` at the points `xs`.
pub fn reconstruct(xs: &[f64], table: &ProjectionTable, params: &BarrierParams) -> Result<Vec<Complex64>> {
    let basis = ModeBasis::new(&table.k, &table.weights, params)?;
    let even = basis.eval_points(Parity::Even, &table.coefficients(Parity::Even), xs);
    let odd = basis.eval_points(Parity::Odd, &table.coefficients(Parity::Odd), xs);
    Ok(even.iter().zip(&odd).map(|(e, o)| e.0 + o.0).collect())
}
