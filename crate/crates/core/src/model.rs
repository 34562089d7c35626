//! Physical parameters and the dimensionless drive rescaling.
//!
//! Natural units with ħ = c = 1: lengths and times in fm, masses, momenta
//! and energies in fm⁻¹.

// only needed when std is absent from the build
#[cfg(not(test))]
#[allow(unused_imports)]
use num_traits::Float;
use core::f64::consts::PI;

use crate::error::{Error, Result};

/// Opacity `mλx₀` at and above which the closed-form pole expressions are
/// treated as trustworthy.
pub const LARGE_OPACITY: f64 = 50.0;

/// The static double-delta model.
///
/// The continuum eigenfunctions used throughout satisfy the derivative jump
/// `χ'(x₀⁺) - χ'(x₀⁻) = mλ χ(x₀)`, so the potential that generates them is
/// `(λ/2) [δ(x+x₀) + δ(x-x₀)]`; see [`BarrierParams::delta_strength`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BarrierParams {
    pub m: f64,
    pub lambda: f64,
    pub x0: f64,
}

impl BarrierParams {
    /// `λ = 0` is accepted and gives the free particle.
    pub fn new(m: f64, lambda: f64, x0: f64) -> Result<Self> {
        if !(m > 0.0 && m.is_finite()) {
            return Err(Error::domain("mass m must be positive"));
        }
        if !(lambda >= 0.0 && lambda.is_finite()) {
            return Err(Error::domain("barrier strength lambda must be non-negative"));
        }
        if !(x0 > 0.0 && x0.is_finite()) {
            return Err(Error::domain("barrier half-separation x0 must be positive"));
        }
        Ok(BarrierParams { m, lambda, x0 })
    }

    /// The combination `mλ` (fm⁻¹) that enters every mode coefficient.
    pub fn coupling(&self) -> f64 {
        self.m * self.lambda
    }

    pub fn opacity(&self) -> f64 {
        opacity(self)
    }

    pub fn is_large_opacity(&self) -> bool {
        self.opacity() >= LARGE_OPACITY
    }

    /// Strength of each delta in the Hamiltonian whose eigenfunctions the
    /// spectral modules use: `jump / 2m = λ / 2`.
    pub fn delta_strength(&self) -> f64 {
        0.5 * self.lambda
    }
}

pub fn opacity(params: &BarrierParams) -> f64 {
    params.m * params.lambda * params.x0
}

/// Harmonic drive `μ x sin(ωt)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriveParams {
    pub mu: f64,
    pub omega: f64,
    pub mu_tilde: f64,
}

impl DriveParams {
    pub fn new(mu: f64, omega: f64, m: f64) -> Result<Self> {
        if !(omega > 0.0 && omega.is_finite()) {
            return Err(Error::domain("drive frequency omega must be positive"));
        }
        if !(mu >= 0.0 && mu.is_finite()) {
            return Err(Error::domain("drive strength mu must be non-negative"));
        }
        let scale = Rescaling::new(m, omega)?;
        Ok(DriveParams { mu, omega, mu_tilde: scale.coupling(mu) })
    }

    /// Builds the drive from its dimensionless coupling.
    pub fn from_mu_tilde(mu_tilde: f64, omega: f64, m: f64) -> Result<Self> {
        let scale = Rescaling::new(m, omega)?;
        Self::new(scale.coupling_inverse(mu_tilde), omega, m)
    }

    /// `μ̃ < 1`, equivalently `μ² < ω³m`.
    pub fn is_perturbative(&self) -> bool {
        self.mu_tilde < 1.0
    }

    pub fn period(&self) -> f64 {
        2.0 * PI / self.omega
    }

    /// The time-dependent potential at position `x`.
    pub fn potential(&self, x: f64, t: f64) -> f64 {
        self.mu * x * (self.omega * t).sin()
    }
}

/// Gaussian initial packet `N exp(-x²/Δ²)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PacketParams {
    pub delta: f64,
    pub norm: f64,
}

impl PacketParams {
    pub fn new(delta: f64) -> Result<Self> {
        Ok(PacketParams { delta, norm: packet_norm(delta)? })
    }

    pub fn value(&self, x: f64) -> f64 {
        self.norm * (-(x * x) / (self.delta * self.delta)).exp()
    }
}

/// `N = (2/(πΔ²))^{1/4}`, the unit-L² normalization of the Gaussian.
pub fn packet_norm(delta: f64) -> Result<f64> {
    if !(delta > 0.0) {
        return Err(Error::domain("packet width delta must be positive"));
    }
    Ok((2.0 / (PI * delta * delta)).powf(0.25))
}

/// Maps between physical and drive-adapted dimensionless variables:
/// `k̃ = k/√(mω)`, `t̃ = ωt`, `μ̃ = μ/√(ω³m)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rescaling {
    pub m: f64,
    pub omega: f64,
    sqrt_m_omega: f64,
}

impl Rescaling {
    pub fn new(m: f64, omega: f64) -> Result<Self> {
        if !(omega > 0.0) {
            return Err(Error::domain("omega must be positive"));
        }
        if !(m > 0.0) {
            return Err(Error::domain("mass m must be positive"));
        }
        Ok(Rescaling { m, omega, sqrt_m_omega: (m * omega).sqrt() })
    }

    /// `√(mω)`, the momentum unit.
    pub fn momentum_unit(&self) -> f64 {
        self.sqrt_m_omega
    }

    pub fn momentum(&self, k: f64) -> f64 {
        k / self.sqrt_m_omega
    }

    pub fn momentum_inverse(&self, k_tilde: f64) -> f64 {
        k_tilde * self.sqrt_m_omega
    }

    pub fn time(&self, t: f64) -> f64 {
        self.omega * t
    }

    pub fn time_inverse(&self, t_tilde: f64) -> f64 {
        t_tilde / self.omega
    }

    pub fn coupling(&self, mu: f64) -> f64 {
        mu / (self.omega * self.sqrt_m_omega)
    }

    pub fn coupling_inverse(&self, mu_tilde: f64) -> f64 {
        mu_tilde * self.omega * self.sqrt_m_omega
    }
}

/// Returns `(k̃, t̃, μ̃)`.
pub fn rescale(k: f64, t: f64, mu: f64, params: &BarrierParams, omega: f64) -> Result<(f64, f64, f64)> {
    let s = Rescaling::new(params.m, omega)?;
    Ok((s.momentum(k), s.time(t), s.coupling(mu)))
}
