//! Finite-difference derivatives on non-uniform grids.

use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Fornberg weights for the first derivative at `z` from the nodes `x`.
pub fn fornberg_weights(z: f64, x: &[f64]) -> Vec<f64> {
    let n = x.len();
    // c[j][k]: weight of node j for derivative order k (k = 0, 1)
    let mut c = alloc::vec![[0.0f64; 2]; n];
    let mut c1 = 1.0;
    let mut c4 = x[0] - z;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(1);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = x[i] - z;
        for j in 0..i {
            let c3 = x[i] - x[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[i][k] = c1 * (k as f64 * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for k in (1..=mn).rev() {
                c[j][k] = (c4 * c[j][k] - k as f64 * c[j][k - 1]) / c3;
            }
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    c.into_iter().map(|w| w[1]).collect()
}

/// Derivative values plus a self-check: the difference between the 5-point
/// and 3-point stencils at each node.
#[derive(Debug, Clone)]
pub struct Derivative {
    pub values: Vec<f64>,
    pub error_estimate: Vec<f64>,
}

fn stencil(i: usize, n: usize, width: usize) -> core::ops::Range<usize> {
    let half = width / 2;
    let start = i.saturating_sub(half).min(n - width);
    start..start + width
}

/// Fourth-order (five-point) derivative, centred in the interior and
/// one-sided at the two ends.
pub fn k_derivative(k: &[f64], values: &[f64]) -> Result<Derivative> {
    if k.len() != values.len() {
        return Err(Error::domain("grid and value lengths differ"));
    }
    if k.len() < 5 {
        return Err(Error::accuracy("derivative stencil needs at least 5 nodes", k.len() as f64));
    }
    let n = k.len();
    let mut out = Vec::with_capacity(n);
    let mut err = Vec::with_capacity(n);
    for i in 0..n {
        let r5 = stencil(i, n, 5);
        let w5 = fornberg_weights(k[i], &k[r5.clone()]);
        let d5: f64 = w5.iter().zip(&values[r5]).map(|(w, v)| w * v).sum();
        let r3 = stencil(i, n, 3);
        let w3 = fornberg_weights(k[i], &k[r3.clone()]);
        let d3: f64 = w3.iter().zip(&values[r3]).map(|(w, v)| w * v).sum();
        out.push(d5);
        err.push((d5 - d3).abs());
    }
    Ok(Derivative { values: out, error_estimate: err })
}

/// Complex-valued variant of [`k_derivative`] (real and imaginary parts separately).
pub fn k_derivative_complex(
    k: &[f64],
    values: &[num_complex::Complex64],
) -> Result<Vec<num_complex::Complex64>> {
    let re: Vec<f64> = values.iter().map(|v| v.re).collect();
    let im: Vec<f64> = values.iter().map(|v| v.im).collect();
    let dr = k_derivative(k, &re)?.values;
    let di = k_derivative(k, &im)?.values;
    Ok(dr.into_iter().zip(di).map(|(r, i)| num_complex::Complex64::new(r, i)).collect())
}
