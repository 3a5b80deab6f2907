//! Laurent coefficients and harmonic/interior moments.

use super::{CutDensity, Trace};
use crate::quadrature::adaptive_vec;
use crate::error::{Error, Result};
use crate::series::TruncatedLaurent;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Harmonic moments `T_k`, interior moments `V_k` and the capacity `u`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentSet {
    pub k: usize,
    pub t: Vec<f64>,
    pub v: Vec<f64>,
    pub u: f64,
}

impl MomentSet {
    pub fn compute(state: &CutDensity, k: usize) -> Result<Self> {
        let t = harmonic_moments(state, k)?;
        let v = interior_moments(state, k)?;
        let u = if state.is_empty() { 0.0 } else { laurent_coefficients(state, 1)?.capacity() };
        Ok(MomentSet { k, t, v, u })
    }
}

/// Power moments `mu_m = int h(p) p^m dp` for `m = 0..n`.
pub fn power_moments(state: &CutDensity, n: usize) -> Vec<f64> {
    if state.is_empty() {
        return vec![0.0; n];
    }
    let cv = state.cut_values();
    let mut mu = vec![0.0; n];
    for i in 0..cv.len() {
        let mut pw = cv.weights[i] * cv.h[i] * cv.p_t[i];
        for m in mu.iter_mut() {
            *m += pw;
            pw *= cv.p[i];
        }
    }
    mu
}

/// Coefficients `c_k` of `z(p) = p + sum_k c_k p^{-k}`, `k = 1..n`.
pub fn laurent_coefficients(state: &CutDensity, n: usize) -> Result<TruncatedLaurent> {
    if n == 0 {
        return Err(Error::OutOfRange("truncation order must be at least 1".into()));
    }
    let mu = power_moments(state, n);
    TruncatedLaurent::new(mu.iter().map(|m| -m / PI).collect())
}

/// `Im int_gamma y z^{sign * k} dz`, `k = 1..K`, with gamma traversed from
/// right to left. The boundary is taken from the nodal interpolants and
/// integrated adaptively: `z^{-k}` varies on a scale set by the distance to
/// the origin, which the nodal rule alone does not resolve.
fn contour_powers(state: &CutDensity, k: usize, sign: i32) -> Vec<f64> {
    let tr = Trace::new(state);
    let mut f = |t: f64, out: &mut [f64]| {
        let b = tr.at(t);
        let base = if sign < 0 { b.z.inv() } else { b.z };
        let mut pw = base;
        for o in out.iter_mut() {
            *o = -(b.y * pw * b.z_t).im;
            pw *= base;
        }
    };
    adaptive_vec(&mut f, k, 0.0, 1.0, 0.0, 1e-14, 2000)
}

/// Harmonic moments `T_1..T_K` of the exterior, from the contour form.
pub fn harmonic_moments(state: &CutDensity, k: usize) -> Result<Vec<f64>> {
    if state.is_empty() {
        return Ok(vec![0.0; k]);
    }
    let cv = state.cut_values();
    let closest = (0..cv.len()).map(|i| cv.z(i).norm()).fold(f64::INFINITY, f64::min);
    let (xm, xp) = state.corners();
    let near = 1e-6 * state.scale();
    if closest < near || xm.abs() < near || xp.abs() < near {
        return Err(Error::Quadrature("the origin lies on the boundary".into()));
    }
    let ints = contour_powers(state, k, -1);
    Ok(ints.iter().enumerate().map(|(j, v)| 2.0 / (PI * (j + 1) as f64) * v).collect())
}

/// Interior moments `V_1..V_K`, `V_k = (2/pi) Im int_B z^k d^2z`.
pub fn interior_moments(state: &CutDensity, k: usize) -> Result<Vec<f64>> {
    if state.is_empty() {
        return Ok(vec![0.0; k]);
    }
    Ok(contour_powers(state, k, 1).iter().map(|v| -2.0 / PI * v).collect())
}
