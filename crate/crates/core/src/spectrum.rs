//! Even and odd continuum eigenfunctions of the static double-delta problem.
//!
//! Each mode is written as `n(k) χ(k, x)` with the inner trigonometric piece
//! for `|x| < x₀` and a shifted combination outside. The normalisation is
//! handled through the reduced factor `f(k) = k² n²(k) / π`, which is a
//! trigonometric polynomial in `k` and stays finite at `k = 0`.

// only needed when std is absent from the build
#[cfg(not(test))]
#[allow(unused_imports)]
use num_traits::Float;
use alloc::vec::Vec;
use core::f64::consts::PI;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::BarrierParams;

/// Below this value of `k x₀` the `sin(2kx₀)/2k` factor uses its series.
pub const SMALL_KX0: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn name(self) -> &'static str {
        match self {
            Parity::Even => "even",
            Parity::Odd => "odd",
        }
    }

    /// `+1` for even, `-1` for odd: `χ(-x) = sign · χ(x)`.
    pub fn sign(self) -> f64 {
        match self {
            Parity::Even => 1.0,
            Parity::Odd => -1.0,
        }
    }

    pub fn other(self) -> Parity {
        match self {
            Parity::Even => Parity::Odd,
            Parity::Odd => Parity::Even,
        }
    }
}

impl core::str::FromStr for Parity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "even" | "e" => Ok(Parity::Even),
            "odd" | "o" => Ok(Parity::Odd),
            _ => Err(Error::domain(alloc::format!("unknown parity `{s}`"))),
        }
    }
}

/// `x₀ · sin(2kx₀)/(2kx₀)` with a series below [`SMALL_KX0`].
fn half_sin2_over_k(k: f64, x0: f64) -> f64 {
    let z = 2.0 * k * x0;
    if (k * x0).abs() < SMALL_KX0 {
        x0 * (1.0 - z * z / 6.0 + z.powi(4) / 120.0)
    } else {
        x0 * z.sin() / z
    }
}

/// Reduced normalisation factor `f(k) = k²n²(k)/π`.
///
/// even: `(k - mλ sin(2kx₀)/2)² + (mλ cos²(kx₀))²`;
/// odd:  `(k + mλ sin(2kx₀)/2)² + (mλ sin²(kx₀))²`.
pub fn norm_factor(parity: Parity, k: f64, params: &BarrierParams) -> f64 {
    norm_factor_derivatives(parity, k, params)[0]
}

/// `[f, f', f'']` with respect to `k`.
pub fn norm_factor_derivatives(parity: Parity, k: f64, params: &BarrierParams) -> [f64; 3] {
    let g = params.coupling();
    let x0 = params.x0;
    let (s2, c2) = (2.0 * k * x0).sin_cos();
    let sign = parity.sign();
    // h = k ∓ (g/2) sin 2θ, b = g (1 ± cos 2θ)/2
    let h = k - sign * 0.5 * g * s2;
    let dh = 1.0 - sign * g * x0 * c2;
    let ddh = sign * 2.0 * g * x0 * x0 * s2;
    let b = 0.5 * g * (1.0 + sign * c2);
    let db = -sign * g * x0 * s2;
    let ddb = -sign * 2.0 * g * x0 * x0 * c2;
    [
        h * h + b * b,
        2.0 * (h * dh + b * db),
        2.0 * (dh * dh + h * ddh + db * db + b * ddb),
    ]
}

/// Analytic continuation of `f` to complex `k`, returning `(f, f')`.
pub fn norm_factor_complex(parity: Parity, k: Complex64, params: &BarrierParams) -> (Complex64, Complex64) {
    let g = params.coupling();
    let x0 = params.x0;
    let arg = 2.0 * x0 * k;
    let (s2, c2) = (arg.sin(), arg.cos());
    let sign = parity.sign();
    let h = k - sign * 0.5 * g * s2;
    let dh = 1.0 - sign * g * x0 * c2;
    let b = 0.5 * g * (1.0 + sign * c2);
    let db = -sign * g * x0 * s2;
    (h * h + b * b, 2.0 * (h * dh + b * db))
}

/// `1/n(k) = k/√(π f(k))`, finite (and zero) at `k = 0`.
pub fn inverse_norm(parity: Parity, k: f64, params: &BarrierParams) -> f64 {
    k / (PI * norm_factor(parity, k, params)).sqrt()
}

/// `d/dk ln n(k)`, i.e. `n'/n = f'/(2f) - 1/k`.
pub fn log_norm_derivative(parity: Parity, k: f64, params: &BarrierParams) -> f64 {
    let [f, df, _] = norm_factor_derivatives(parity, k, params);
    0.5 * df / f - 1.0 / k
}

/// Outer-region coefficients and normalisation of one mode.
///
/// For the even mode `outer = (A, B)` with `n χ = A cos kx + B sin kx` at
/// `x > x₀`; for the odd mode `outer = (C, D)` with `n χ = C cos kx + D sin kx`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeCoefficients {
    pub parity: Parity,
    pub k: f64,
    pub x0: f64,
    pub outer_cos: f64,
    pub outer_sin: f64,
    /// `k² n²(k) / π`.
    pub norm_factor: f64,
}

pub fn coefficients(parity: Parity, k: f64, params: &BarrierParams) -> Result<ModeCoefficients> {
    if !(k > 0.0 && k.is_finite()) {
        return Err(Error::domain("mode momentum k must be positive"));
    }
    let g = params.coupling();
    let x0 = params.x0;
    let (s, c) = (k * x0).sin_cos();
    let (outer_cos, outer_sin) = match parity {
        Parity::Even => (1.0 - g * half_sin2_over_k(k, x0), g * c * c / k),
        Parity::Odd => (-g * s * s / k, 1.0 + g * half_sin2_over_k(k, x0)),
    };
    Ok(ModeCoefficients {
        parity,
        k,
        x0,
        outer_cos,
        outer_sin,
        norm_factor: norm_factor(parity, k, params),
    })
}

impl ModeCoefficients {
    /// `n²(k)`.
    pub fn norm_sq(&self) -> f64 {
        PI * self.norm_factor / (self.k * self.k)
    }

    pub fn inverse_norm(&self) -> f64 {
        self.k / (PI * self.norm_factor).sqrt()
    }

    /// `n χ` on the non-negative half line.
    fn unnormalised_right(&self, x: f64) -> f64 {
        let (s, c) = (self.k * x).sin_cos();
        if x <= self.x0 {
            match self.parity {
                Parity::Even => c,
                Parity::Odd => s,
            }
        } else {
            self.outer_cos * c + self.outer_sin * s
        }
    }

    fn unnormalised_right_derivative(&self, x: f64) -> f64 {
        let (s, c) = (self.k * x).sin_cos();
        let k = self.k;
        if x <= self.x0 {
            match self.parity {
                Parity::Even => -k * s,
                Parity::Odd => k * c,
            }
        } else {
            k * (self.outer_sin * c - self.outer_cos * s)
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        let v = if x >= 0.0 {
            self.unnormalised_right(x)
        } else {
            self.parity.sign() * self.unnormalised_right(-x)
        };
        v * self.inverse_norm()
    }

    /// `∂χ/∂x`; at `|x| = x₀` the inner-side limit is returned.
    pub fn eval_derivative(&self, x: f64) -> f64 {
        let v = if x >= 0.0 {
            self.unnormalised_right_derivative(x)
        } else {
            -self.parity.sign() * self.unnormalised_right_derivative(-x)
        };
        v * self.inverse_norm()
    }

    /// `χ'(x₀⁺) - χ'(x₀⁻)`, from the closed forms.
    pub fn derivative_jump(&self) -> f64 {
        let k = self.k;
        let (s, c) = (k * self.x0).sin_cos();
        let outer = k * (self.outer_sin * c - self.outer_cos * s);
        outer * self.inverse_norm() - self.unnormalised_right_derivative(self.x0) * self.inverse_norm()
    }
}

pub fn eval_mode(coeffs: &ModeCoefficients, x: f64) -> f64 {
    coeffs.eval(x)
}

/// Tabulates `π/(k² n²(k)) = 1/f(k)` on a uniform grid.
pub fn spike_profile(
    parity: Parity,
    k_min: f64,
    k_max: f64,
    samples: usize,
    params: &BarrierParams,
) -> Result<Vec<(f64, f64)>> {
    if !(k_min > 0.0 && k_max > k_min && k_max.is_finite()) {
        return Err(Error::domain("spike profile needs 0 < k_min < k_max"));
    }
    if samples < 2 {
        return Err(Error::domain("spike profile needs at least two samples"));
    }
    let step = (k_max - k_min) / (samples - 1) as f64;
    Ok((0..samples)
        .map(|i| {
            let k = if i + 1 == samples { k_max } else { k_min + step * i as f64 };
            (k, 1.0 / norm_factor(parity, k, params))
        })
        .collect())
}

/// Indices of interior local maxima of a sampled curve.
pub fn local_maxima(curve: &[(f64, f64)]) -> Vec<usize> {
    (1..curve.len().saturating_sub(1))
        .filter(|&i| curve[i].1 > curve[i - 1].1 && curve[i].1 >= curve[i + 1].1)
        .collect()
}
