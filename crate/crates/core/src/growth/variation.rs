//! Elementary deformations `delta_a^-` and the operator `nabla^-(a)`.

use super::{evolve, Drive, IntegratorConfig};
use crate::error::{Error, Result};
use crate::kernel::green_odd;
use crate::slit::{harmonic_moments, CutDensity};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

/// `[F(delta_a^- eps) - F(delta_a^- (-eps))] / (2 eps)` with one Richardson
/// level (steps `eps` and `eps/2`).
pub fn elementary_derivative<F>(state: &CutDensity, a: C64, eps: f64, cfg: &IntegratorConfig, f: F) -> Result<f64>
where
    F: Fn(&CutDensity) -> Result<f64>,
{
    if !(eps > 0.0) {
        return Err(Error::OutOfRange("deformation size must be positive".into()));
    }
    let central = |h: f64| -> Result<f64> {
        let hi = evolve(state, Drive::Elementary(a), h, cfg)?.0;
        let lo = evolve(state, Drive::Elementary(a), -h, cfg)?.0;
        Ok((f(&hi)? - f(&lo)?) / (2.0 * h))
    };
    let (d1, d2) = (central(eps)?, central(eps / 2.0)?);
    Ok((4.0 * d2 - d1) / 3.0)
}

/// `nabla^-(a) T_k` for `k = 1..K` through the deformation route.
pub fn nabla_minus_moments(state: &CutDensity, a: C64, k: usize, eps: f64, cfg: &IntegratorConfig) -> Result<Vec<f64>> {
    (0..k)
        .map(|j| elementary_derivative(state, a, eps, cfg, |s| Ok(harmonic_moments(s, j + 1)?[j])))
        .collect()
}

/// The same quantity from the coordinate form
/// `nabla^-(a) = -2 sum_k (1/k) Im(a^{-k}) d/dT_k` applied to `T_j`.
pub fn nabla_minus_moments_exact(a: C64, k: usize) -> Vec<f64> {
    (1..=k).map(|j| -2.0 / j as f64 * a.powi(-(j as i32)).im).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HadamardReport {
    /// `nabla(a) G(b,c)`, `nabla(b) G(c,a)`, `nabla(c) G(a,b)`.
    pub values: [f64; 3],
    /// `(max - min) / max |value|`.
    pub asymmetry: f64,
}

/// Cyclic symmetry of the variation of `G^-` under elementary deformations.
pub fn hadamard_check(
    state: &CutDensity,
    points: [C64; 3],
    eps: f64,
    cfg: &IntegratorConfig,
) -> Result<HadamardReport> {
    let [a, b, c] = points;
    let mut values = [0.0; 3];
    for (slot, (x, y, z)) in values.iter_mut().zip([(a, b, c), (b, c, a), (c, a, b)]) {
        *slot = elementary_derivative(state, x, eps, cfg, |s| green_odd(s, y, z))?;
    }
    let max = values.iter().fold(f64::NEG_INFINITY, |m, v| m.max(*v));
    let min = values.iter().fold(f64::INFINITY, |m, v| m.min(*v));
    let scale = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    Ok(HadamardReport { values, asymmetry: (max - min) / scale })
}
