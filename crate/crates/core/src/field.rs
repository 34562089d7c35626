//! Evaluation of `Σ_i c_i χ(k_i, x)` over a discrete momentum grid.
//!
//! The expansion coefficients `c_i` already carry quadrature weights and any
//! time phase; [`ModeBasis`] holds the per-node mode data so repeated
//! evaluation never recomputes normalisation factors.

// only needed when std is absent from the build
#[cfg(not(test))]
#[allow(unused_imports)]
use num_traits::Float;
use alloc::vec;
use alloc::vec::Vec;
use num_complex::Complex64;

use crate::error::Result;
use crate::model::BarrierParams;
use crate::spectrum::{coefficients, Parity};

/// Rotating phasors are re-seeded after this many steps.
const RESEED: usize = 128;

#[derive(Debug, Clone)]
pub struct ModeBasis {
    pub x0: f64,
    pub k: Vec<f64>,
    pub weights: Vec<f64>,
    /// `1/n_e`, `A`, `B` per node.
    pub inv_norm_even: Vec<f64>,
    pub outer_even: Vec<(f64, f64)>,
    /// `1/n_o`, `C`, `D` per node.
    pub inv_norm_odd: Vec<f64>,
    pub outer_odd: Vec<(f64, f64)>,
}

impl ModeBasis {
    pub fn new(k: &[f64], weights: &[f64], params: &BarrierParams) -> Result<Self> {
        let mut basis = ModeBasis {
            x0: params.x0,
            k: k.to_vec(),
            weights: weights.to_vec(),
            inv_norm_even: Vec::with_capacity(k.len()),
            outer_even: Vec::with_capacity(k.len()),
            inv_norm_odd: Vec::with_capacity(k.len()),
            outer_odd: Vec::with_capacity(k.len()),
        };
        for &ki in k {
            let e = coefficients(Parity::Even, ki, params)?;
            let o = coefficients(Parity::Odd, ki, params)?;
            basis.inv_norm_even.push(e.inverse_norm());
            basis.outer_even.push((e.outer_cos, e.outer_sin));
            basis.inv_norm_odd.push(o.inverse_norm());
            basis.outer_odd.push((o.outer_cos, o.outer_sin));
        }
        Ok(basis)
    }

    pub fn len(&self) -> usize {
        self.k.len()
    }

    pub fn is_empty(&self) -> bool {
        self.k.is_empty()
    }

    fn scaled(&self, parity: Parity, c: &[Complex64]) -> (Vec<f64>, Vec<f64>) {
        let inv = match parity {
            Parity::Even => &self.inv_norm_even,
            Parity::Odd => &self.inv_norm_odd,
        };
        c.iter().zip(inv).map(|(c, n)| (c.re * n, c.im * n)).unzip()
    }

    /// `Σ c_i χ(k_i, x)` and its `x` derivative at arbitrary points.
    pub fn eval_points(&self, parity: Parity, c: &[Complex64], xs: &[f64]) -> Vec<(Complex64, Complex64)> {
        assert_eq!(c.len(), self.len());
        let (cr, ci) = self.scaled(parity, c);
        let outer = match parity {
            Parity::Even => &self.outer_even,
            Parity::Odd => &self.outer_odd,
        };
        xs.iter()
            .map(|&x| {
                // χ(−x) = ±χ(x), χ'(−x) = ∓χ'(x)
                let (sign, dsign) = if x < 0.0 { (parity.sign(), -parity.sign()) } else { (1.0, 1.0) };
                let ax = x.abs();
                let inside = ax <= self.x0;
                let (mut v, mut d) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
                for i in 0..self.len() {
                    let k = self.k[i];
                    let (s, co) = (k * ax).sin_cos();
                    let (val, der) = if inside {
                        match parity {
                            Parity::Even => (co, -k * s),
                            Parity::Odd => (s, k * co),
                        }
                    } else {
                        let (p, q) = outer[i];
                        (p * co + q * s, k * (q * co - p * s))
                    };
                    let ck = Complex64::new(cr[i], ci[i]);
                    v += ck * val;
                    d += ck * der;
                }
                (v * sign, d * dsign)
            })
            .collect()
    }

    /// `Σ c_i χ(k_i, x_j)` on `x_j = start + j·step`, `start ≥ 0`, `step > 0`.
    pub fn eval_uniform(&self, parity: Parity, c: &[Complex64], start: f64, step: f64, count: usize) -> Vec<Complex64> {
        assert_eq!(c.len(), self.len());
        assert!(start >= 0.0 && step > 0.0);
        let n = self.len();
        let (cr, ci) = self.scaled(parity, c);
        let outer = match parity {
            Parity::Even => &self.outer_even,
            Parity::Odd => &self.outer_odd,
        };
        let (oa, ob): (Vec<f64>, Vec<f64>) = outer.iter().copied().unzip();
        let (rot_r, rot_i): (Vec<f64>, Vec<f64>) = self
            .k
            .iter()
            .map(|&k| {
                let (s, c) = (k * step).sin_cos();
                (c, s)
            })
            .unzip();
        let mut pr = vec![0.0; n];
        let mut pi = vec![0.0; n];
        let mut out = Vec::with_capacity(count);
        for j in 0..count {
            let x = start + step * j as f64;
            if j % RESEED == 0 {
                for i in 0..n {
                    let (s, c) = (self.k[i] * x).sin_cos();
                    pr[i] = c;
                    pi[i] = s;
                }
            }
            let (mut sr, mut si) = (0.0, 0.0);
            if x <= self.x0 {
                let basis = match parity {
                    Parity::Even => &pr,
                    Parity::Odd => &pi,
                };
                for i in 0..n {
                    sr += cr[i] * basis[i];
                    si += ci[i] * basis[i];
                }
            } else {
                for i in 0..n {
                    let v = oa[i] * pr[i] + ob[i] * pi[i];
                    sr += cr[i] * v;
                    si += ci[i] * v;
                }
            }
            out.push(Complex64::new(sr, si));
            for i in 0..n {
                let r = pr[i] * rot_r[i] - pi[i] * rot_i[i];
                pi[i] = pr[i] * rot_i[i] + pi[i] * rot_r[i];
                pr[i] = r;
            }
        }
        out
    }
}
