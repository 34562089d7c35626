//! Weak harmonic drive `μ x sin(ωt)` treated to second order in `μ̃`.
//!
//! Amplitudes are expanded as `a_e = b_e0 + μ̃² b_e2`, `a_o = μ̃ b_o1` in the
//! interaction picture, with only the singular `∂δ(k-k')` part of the dipole
//! matrix element kept. Signs are those of the Hermitian coupling:
//!
//! ```text
//! i ∂_t̃ a_o = -μ̃ sin t̃ · π/(n_o n_e) · (∂a_e - (n_e'/n_e) a_e - i k̃ t̃ a_e)
//! i ∂_t̃ a_e = +μ̃ sin t̃ · π/(n_e n_o) · (∂a_o - (n_o'/n_o) a_o - i k̃ t̃ a_o)
//! ```
//!
//! Derivatives are with respect to `k̃ = k/√(mω)`.

// only needed when std is absent from the build
#[cfg(not(test))]
#[allow(unused_imports)]
use num_traits::Float;
use alloc::vec::Vec;
use core::f64::consts::PI;
use num_complex::Complex64;

use crate::deriv::{k_derivative, k_derivative_complex};
use crate::error::{Error, Result};
use crate::evolve::Propagator;
use crate::field::ModeBasis;
use crate::model::{BarrierParams, DriveParams, PacketParams, Rescaling};
use crate::packet::smooth_projection;
use crate::quad::GaussLegendre;
use crate::spectrum::{inverse_norm, log_norm_derivative, norm_factor, norm_factor_derivatives, Parity};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// `π/(n_o(k) n_e(k)) = k²/√(f_o f_e)`; equal to 1 for the free particle.
/// The kernel depends on the physical momentum `k = k̃√(mω)`.
pub fn matrix_element_kernel(k: f64, params: &BarrierParams) -> Result<f64> {
    if !(k > 0.0) {
        return Err(Error::domain("kernel needs k > 0"));
    }
    let fo = norm_factor(Parity::Odd, k, params);
    let fe = norm_factor(Parity::Even, k, params);
    Ok(k * k / (fo * fe).sqrt())
}

/// `μ̃ k̃ t̃`, the size of the secular terms; the expansion needs it well below 1.
pub fn secular_parameter(mu_tilde: f64, k_tilde: f64, t_tilde: f64) -> f64 {
    mu_tilde * k_tilde * t_tilde
}

/// `[∫sin s, ∫s sin s]` over `[0, T]`.
pub fn first_order_integrals(t: f64) -> [f64; 2] {
    let (s, c) = t.sin_cos();
    [1.0 - c, s - t * c]
}

/// `J1..J4 = ∫₀ᵀ {1, 1, s, s} sin s {I1, I2, I1, I2}(s) ds`.
pub fn second_order_integrals(t: f64) -> [f64; 4] {
    let (s, c) = t.sin_cos();
    let (s2, c2) = (2.0 * t).sin_cos();
    [
        (1.0 - c) - 0.5 * s * s,
        0.5 * t + 0.25 * t * c2 - 0.375 * s2,
        s - t * c + 0.25 * t * c2 - 0.125 * s2,
        0.25 * t * t * (1.0 + c2) - 0.5 * t * s2 + 0.25 * (1.0 - c2),
    ]
}

/// Composite Gauss–Legendre nodes on `[0, T]`.
fn time_rule(t: f64, panels: usize) -> Vec<(f64, f64)> {
    let rule = GaussLegendre::new(16);
    let h = t / panels as f64;
    (0..panels).flat_map(|i| rule.panel(i as f64 * h, (i + 1) as f64 * h).collect::<Vec<_>>()).collect()
}

/// The first- and second-order integrals by quadrature.
pub fn time_integrals_quadrature(t: f64, panels: usize) -> ([f64; 2], [f64; 4]) {
    let mut first = [0.0; 2];
    let mut second = [0.0; 4];
    for (s, w) in time_rule(t, panels.max(1)) {
        let sn = s.sin();
        let [i1, i2] = first_order_integrals(s);
        first[0] += w * sn;
        first[1] += w * s * sn;
        second[0] += w * sn * i1;
        second[1] += w * sn * i2;
        second[2] += w * s * sn * i1;
        second[3] += w * s * sn * i2;
    }
    (first, second)
}

/// Drive-independent ingredients of the perturbative amplitudes on a k grid.
#[derive(Debug, Clone)]
pub struct AmplitudeSeries {
    pub scale: Rescaling,
    pub mu_tilde: f64,
    pub k: Vec<f64>,
    pub weights: Vec<f64>,
    pub k_tilde: Vec<f64>,
    /// Undriven even amplitude `G/n_e`.
    pub b_e0: Vec<f64>,
    /// `π/(n_e n_o)`.
    pub kernel: Vec<f64>,
    /// `(π/n_o) ∂(G/n_e²)`.
    pub p: Vec<f64>,
    /// `(π/n_o) G/n_e²`.
    pub q: Vec<f64>,
    pub dp: Vec<f64>,
    pub dq: Vec<f64>,
    /// Worst 5-point vs 3-point disagreement in `dp`, relative to `max |dp|`.
    pub derivative_check: f64,
    /// `n_o'/n_o`.
    pub nu: Vec<f64>,
    basis: ModeBasis,
    m: f64,
}

impl AmplitudeSeries {
    pub fn new(
        k: &[f64],
        weights: &[f64],
        packet: &PacketParams,
        params: &BarrierParams,
        drive: &DriveParams,
    ) -> Result<Self> {
        if k.len() != weights.len() {
            return Err(Error::domain("node and weight counts differ"));
        }
        if k.iter().any(|&k| !(k > 0.0)) {
            return Err(Error::domain("momentum grid must be positive"));
        }
        let scale = Rescaling::new(params.m, drive.omega)?;
        let u = scale.momentum_unit();
        let n = k.len();
        let mut s = AmplitudeSeries {
            scale,
            mu_tilde: drive.mu_tilde,
            k: k.to_vec(),
            weights: weights.to_vec(),
            k_tilde: k.iter().map(|&k| k / u).collect(),
            b_e0: Vec::with_capacity(n),
            kernel: Vec::with_capacity(n),
            p: Vec::with_capacity(n),
            q: Vec::with_capacity(n),
            dp: Vec::new(),
            dq: Vec::new(),
            derivative_check: 0.0,
            nu: Vec::with_capacity(n),
            basis: ModeBasis::new(k, weights, params)?,
            m: params.m,
        };
        for &ki in k {
            let (gk, dgk) = smooth_projection(ki, packet, params);
            let [f, df, _] = norm_factor_derivatives(Parity::Even, ki, params);
            let ie = inverse_norm(Parity::Even, ki, params);
            let io = inverse_norm(Parity::Odd, ki, params);
            // g = G k²/(π f)
            let g = gk * ki * ki / (PI * f);
            let dg = dgk * ki * ki / (PI * f) + gk * (2.0 * ki / (PI * f) - ki * ki * df / (PI * f * f));
            s.b_e0.push(gk * ie);
            s.kernel.push(PI * ie * io);
            s.p.push(PI * io * dg * u);
            s.q.push(PI * io * g);
            s.nu.push(log_norm_derivative(Parity::Odd, ki, params) * u);
        }
        let dp = k_derivative(&s.k_tilde, &s.p)?;
        let scale_p = dp.values.iter().fold(0.0f64, |a, v| a.max(v.abs())).max(1e-300);
        s.derivative_check = dp.error_estimate.iter().fold(0.0f64, |a, v| a.max(*v)) / scale_p;
        s.dp = dp.values;
        s.dq = k_derivative(&s.k_tilde, &s.q)?.values;
        Ok(s)
    }

    /// `b_o1(k̃, t̃)` in closed form.
    pub fn first_order(&self, t_tilde: f64) -> Vec<Complex64> {
        let [i1, i2] = first_order_integrals(t_tilde);
        (0..self.k.len())
            .map(|i| Complex64::new(self.k_tilde[i] * self.q[i] * i2, self.p[i] * i1))
            .collect()
    }

    /// `b_o1` by direct time quadrature of its equation of motion.
    pub fn first_order_quadrature(&self, t_tilde: f64, panels: usize) -> Vec<Complex64> {
        let mut out = alloc::vec![Complex64::new(0.0, 0.0); self.k.len()];
        for (s, w) in time_rule(t_tilde, panels.max(1)) {
            let sn = s.sin();
            for (i, o) in out.iter_mut().enumerate() {
                // ∂_s b_o1 = i sin s (π/n_o)(g' - i k̃ s g)
                let rhs = I * sn * Complex64::new(self.p[i], -self.k_tilde[i] * s * self.q[i]);
                *o += w * rhs;
            }
        }
        out
    }

    /// `b_e2(k̃, t̃)` in closed form.
    pub fn second_order(&self, t_tilde: f64) -> Vec<Complex64> {
        let [j1, j2, j3, j4] = second_order_integrals(t_tilde);
        (0..self.k.len())
            .map(|i| {
                let (kt, p, q, nu) = (self.k_tilde[i], self.p[i], self.q[i], self.nu[i]);
                let bracket = I * j1 * (self.dp[i] - nu * p)
                    + j2 * (q + kt * self.dq[i] - nu * kt * q)
                    + kt * p * j3
                    - I * kt * kt * q * j4;
                -I * self.kernel[i] * bracket
            })
            .collect()
    }

    /// `b_e2` by time quadrature, differentiating `b_o1(s)` numerically in k̃
    /// at every time node.
    pub fn second_order_quadrature(&self, t_tilde: f64, panels: usize) -> Result<Vec<Complex64>> {
        let mut out = alloc::vec![Complex64::new(0.0, 0.0); self.k.len()];
        for (s, w) in time_rule(t_tilde, panels.max(1)) {
            let b1 = self.first_order(s);
            let db1 = k_derivative_complex(&self.k_tilde, &b1)?;
            let sn = s.sin();
            for i in 0..self.k.len() {
                let d = db1[i] - self.nu[i] * b1[i] - I * self.k_tilde[i] * s * b1[i];
                out[i] += -I * w * sn * self.kernel[i] * d;
            }
        }
        Ok(out)
    }

    /// Checks the closed forms against quadrature; returns the worst relative
    /// deviations `(first, second)`.
    pub fn consistency(&self, t_tilde: f64, panels: usize) -> Result<(f64, f64)> {
        let rel = |a: &[Complex64], b: &[Complex64]| {
            let num: f64 = a.iter().zip(b).zip(&self.weights).map(|((a, b), w)| w * (a - b).norm_sqr()).sum();
            let den: f64 = a.iter().zip(&self.weights).map(|(a, w)| w * a.norm_sqr()).sum();
            (num / den.max(1e-300)).sqrt()
        };
        let f = rel(&self.first_order(t_tilde), &self.first_order_quadrature(t_tilde, panels));
        let s = rel(&self.second_order(t_tilde), &self.second_order_quadrature(t_tilde, panels)?);
        Ok((f, s))
    }

    /// `(a_e, a_o)` at `t̃`.
    pub fn amplitudes(&self, t_tilde: f64) -> (Vec<Complex64>, Vec<Complex64>) {
        self.amplitudes_to_order(t_tilde, 2)
    }

    /// `(a_e, a_o)` truncated after order `order` in μ̃ (1 drops `b_e2`).
    pub fn amplitudes_to_order(&self, t_tilde: f64, order: u8) -> (Vec<Complex64>, Vec<Complex64>) {
        let mu = self.mu_tilde;
        let b2 = if order >= 2 {
            self.second_order(t_tilde)
        } else {
            alloc::vec![Complex64::new(0.0, 0.0); self.k.len()]
        };
        let ae = self.b_e0.iter().zip(&b2).map(|(b0, b2)| b0 + mu * mu * b2).collect();
        let ao = self.first_order(t_tilde).into_iter().map(|b| mu * b).collect();
        (ae, ao)
    }

    /// `∫|a_o|² dk`.
    pub fn odd_norm(&self, t_tilde: f64) -> f64 {
        let mu = self.mu_tilde;
        self.first_order(t_tilde).iter().zip(&self.weights).map(|(b, w)| w * mu * mu * b.norm_sqr()).sum()
    }

    /// `μ̃² ∫ (|b_o1|² + 2 b_e0 Re b_e2) dk`, the O(μ̃²) change of the total norm.
    pub fn norm_defect(&self, t_tilde: f64) -> f64 {
        let b1 = self.first_order(t_tilde);
        let b2 = self.second_order(t_tilde);
        let s: f64 = (0..self.k.len())
            .map(|i| self.weights[i] * (b1[i].norm_sqr() + 2.0 * self.b_e0[i] * b2[i].re))
            .sum();
        self.mu_tilde * self.mu_tilde * s
    }

    /// Spectral propagator for the state at `t̃`, with the free phase applied
    /// at the matching physical time.
    pub fn propagator(&self, t_tilde: f64, driven: bool) -> Propagator {
        let (ae, ao) = if driven {
            self.amplitudes(t_tilde)
        } else {
            (
                self.b_e0.iter().map(|&b| Complex64::new(b, 0.0)).collect(),
                alloc::vec![Complex64::new(0.0, 0.0); self.k.len()],
            )
        };
        let even = ae.iter().zip(&self.weights).map(|(a, w)| a * w).collect();
        let odd = ao.iter().zip(&self.weights).map(|(a, w)| a * w).collect();
        Propagator::from_amplitudes(self.basis.clone(), self.m, even, odd)
    }
}

/// One time sample of the driven problem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DrivenSample {
    pub t_tilde: f64,
    pub t: f64,
    /// Inner survival to consistent O(μ̃²).
    pub inner_driven: f64,
    /// Inner survival of the reconstructed state including the O(μ̃⁴) `|b_e2|²` term.
    pub inner_driven_full: f64,
    pub inner_undriven: f64,
    pub odd_norm: f64,
    pub norm_defect: f64,
}

/// Inner survival with and without the drive at each `t̃`, keeping terms up
/// to `order` (1 or 2) in μ̃.
pub fn perturbed_survival(series: &AmplitudeSeries, t_tilde: &[f64], order: u8) -> Result<Vec<DrivenSample>> {
    if !(1..=2).contains(&order) {
        return Err(Error::config("perturbative order must be 1 or 2"));
    }
    let x0 = series.basis.x0;
    let (xs, ws): (Vec<f64>, Vec<f64>) = GaussLegendre::new(48).panel(0.0, x0).unzip();
    let mu2 = series.mu_tilde * series.mu_tilde;
    let weighted = |a: &[Complex64]| -> Vec<Complex64> { a.iter().zip(&series.weights).map(|(a, w)| a * w).collect() };
    let zero = alloc::vec![Complex64::new(0.0, 0.0); series.k.len()];
    let b0: Vec<Complex64> = series.b_e0.iter().map(|&b| Complex64::new(b, 0.0)).collect();
    t_tilde
        .iter()
        .map(|&tt| {
            if !(tt >= 0.0) {
                return Err(Error::domain("drive times must be non-negative"));
            }
            let t = series.scale.time_inverse(tt);
            let field = |even: &[Complex64], odd: &[Complex64]| {
                Propagator::from_amplitudes(series.basis.clone(), series.m, weighted(even), weighted(odd))
                    .values_at(t, &xs)
            };
            let e0 = field(&b0, &zero);
            let e2 = if order == 2 { field(&series.second_order(tt), &zero) } else { field(&zero, &zero) };
            let o1 = field(&zero, &series.first_order(tt));
            let (mut undriven, mut driven, mut full) = (0.0, 0.0, 0.0);
            for i in 0..xs.len() {
                // the odd field is antisymmetric, so ±x contribute equally
                let (a, b, c) = (e0[i].0, e2[i].0, o1[i].0);
                let base = 2.0 * ws[i] * a.norm_sqr();
                let second = 2.0 * ws[i] * mu2 * (2.0 * (a.conj() * b).re + c.norm_sqr());
                undriven += base;
                driven += base + second;
                full += base + second + 2.0 * ws[i] * mu2 * mu2 * b.norm_sqr();
            }
            Ok(DrivenSample {
                t_tilde: tt,
                t,
                inner_driven: driven,
                inner_driven_full: full,
                inner_undriven: undriven,
                odd_norm: series.odd_norm(tt),
                norm_defect: series.norm_defect(tt),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evolve::build_kgrid_with_width;
    use crate::poles::poles_below;
    use approx::assert_relative_eq;

    #[test]
    fn kernel_free_limit() {
        let p = BarrierParams::new(20.0, 0.0, 10.0).unwrap();
        for k in [0.01, 0.3, 2.0] {
            assert_relative_eq!(matrix_element_kernel(k, &p).unwrap(), 1.0, max_relative = 1e-12);
        }
        assert!(matrix_element_kernel(0.0, &p).is_err());
    }

    #[test]
    fn first_order_integrals_after_one_period() {
        let [i1, i2] = first_order_integrals(2.0 * PI);
        assert!(i1.abs() < 1e-15);
        assert_relative_eq!(i2, -2.0 * PI, max_relative = 1e-14);
        assert_eq!(first_order_integrals(0.0), [0.0, 0.0]);
    }

    #[test]
    fn even_correction_scales_as_mu_squared() {
        let a = series(0.1, 0.01);
        let b = series(0.1, 0.02);
        let t = 3.0 * PI;
        let (ea, _) = a.amplitudes(t);
        let (eb, _) = b.amplitudes(t);
        let i = a.k.len() / 3;
        let ratio = (eb[i] - b.b_e0[i]).norm() / (ea[i] - a.b_e0[i]).norm();
        assert_relative_eq!(ratio, 4.0, max_relative = 1e-10);
        assert!(a.first_order(0.0).iter().chain(&a.second_order(0.0)).all(|z| z.norm() == 0.0));
    }

    #[test]
    fn zero_drive_leaves_survival_unchanged() {
        let s = series(0.1, 0.0);
        let r = perturbed_survival(&s, &[0.0, 5.0], 2).unwrap();
        for x in r {
            assert_eq!(x.inner_driven, x.inner_undriven);
        }
        assert!(perturbed_survival(&s, &[1.0], 3).is_err());
    }

    #[test]
    fn time_integrals_closed_forms() {
        for t in [0.3, 2.0, 7.5, 40.0 * PI] {
            let (a, b) = time_integrals_quadrature(t, 200);
            let ca = first_order_integrals(t);
            let cb = second_order_integrals(t);
            for (x, y) in a.iter().zip(&ca).chain(b.iter().zip(&cb)) {
                assert!((x - y).abs() <= 1e-10 * (1.0 + y.abs()), "t={t}: {x} vs {y}");
            }
        }
        assert_eq!(second_order_integrals(0.0), [0.0; 4]);
    }

    fn series(lambda: f64, mu_tilde: f64) -> AmplitudeSeries {
        let p = BarrierParams::new(20.0, lambda, 10.0).unwrap();
        let drive = DriveParams::from_mu_tilde(mu_tilde, 1.0, 20.0).unwrap();
        let packet = PacketParams::new(5.0).unwrap();
        let mut poles = poles_below(Parity::Even, 1.2, &p).unwrap();
        poles.extend(poles_below(Parity::Odd, 1.2, &p).unwrap());
        let grid = build_kgrid_with_width(&poles, 1.2, 0.01).unwrap();
        AmplitudeSeries::new(&grid.nodes, &grid.weights, &packet, &p, &drive).unwrap()
    }

    #[test]
    fn closed_forms_match_quadrature() {
        let s = series(0.1, 0.1);
        let (first, second) = s.consistency(4.0 * PI, 40).unwrap();
        assert!(first < 1e-8, "{first}");
        assert!(second < 1e-4, "{second}");
    }

    #[test]
    fn odd_channel_is_linear_in_drive() {
        let a = series(0.1, 0.01);
        let b = series(0.1, 0.02);
        let t = 6.0 * PI;
        assert_relative_eq!(b.odd_norm(t).sqrt() / a.odd_norm(t).sqrt(), 2.0, max_relative = 1e-12);
    }

    #[test]
    fn free_norm_is_conserved_to_second_order() {
        let s = series(0.0, 0.1);
        let t = 4.0 * PI;
        let odd = s.odd_norm(t);
        assert!(odd > 0.0);
        assert!(s.norm_defect(t).abs() < 1e-3 * odd, "{} vs {odd}", s.norm_defect(t));
    }

    #[test]
    fn odd_amplitude_peaks_near_odd_poles() {
        let p = BarrierParams::new(20.0, 0.1, 10.0).unwrap();
        let s = series(0.1, 0.1);
        let b = s.first_order(4.0 * PI);
        for pole in poles_below(Parity::Odd, 1.0, &p).unwrap() {
            let window = 0.25 * PI / p.x0;
            let (imax, _) = s
                .k
                .iter()
                .enumerate()
                .filter(|(_, &k)| (k - pole.k_center).abs() < window)
                .map(|(i, _)| (i, b[i].norm()))
                .fold((0, 0.0), |a, c| if c.1 > a.1 { c } else { a });
            let panel = crate::evolve::CORE_HALF_WIDTHS * pole.half_width();
            assert!((s.k[imax] - pole.k_center).abs() < panel, "pole at {} peak {}", pole.k_center, s.k[imax]);
        }
    }
}
