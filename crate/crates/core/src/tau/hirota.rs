//! Identities between derivatives of `F^-`, the interior moments and the
//! conformal map, all derivatives taken along actual flows.

use super::tau;
use crate::error::{Error, Result};
use crate::growth::{evolve, Drive, IntegratorConfig};
use crate::kernel::p_of_z;
use crate::series::invert_map;
use crate::slit::{interior_moments, laurent_coefficients, CutDensity, Trace};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::f64::consts::PI;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TauReport {
    #[serde(rename = "F_minus")]
    pub f_minus: f64,
    #[serde(rename = "V")]
    pub v: Vec<f64>,
    pub u: f64,
    /// `mixed[j][k] = dV_{k+1}/dT_{j+1}`.
    pub mixed: Vec<Vec<f64>>,
    /// Relative error of each identity, keyed `a`..`e`.
    pub residuals: BTreeMap<String, f64>,
    /// Size of the last retained shell of the double series in (e).
    pub tail_estimate: Option<f64>,
}

fn rel(err: f64, scale: f64) -> f64 {
    if scale > 0.0 {
        err / scale
    } else {
        err
    }
}

fn max_abs<'a>(v: impl IntoIterator<Item = &'a f64>) -> f64 {
    v.into_iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

/// Run the identity suite with flows of step `fd` in `T_1..T_K`.
pub fn hirota_suite(state: &CutDensity, fd: f64, k: usize, cfg: &IntegratorConfig) -> Result<TauReport> {
    if state.is_empty() {
        return Err(Error::InvalidState("the suite needs a nonempty state".into()));
    }
    if k == 0 || !(fd > 0.0) {
        return Err(Error::OutOfRange("need K >= 1 and a positive step".into()));
    }
    let f_minus = tau(state)?;
    let v = interior_moments(state, k)?;
    let u = laurent_coefficients(state, 1)?.capacity();
    let mut mixed = vec![vec![0.0; k]; k];
    let mut df = vec![0.0; k];
    for j in 0..k {
        let lo = evolve(state, Drive::Flow(j + 1), -fd, cfg)?.0;
        let hi = evolve(state, Drive::Flow(j + 1), fd, cfg)?.0;
        let (vl, vh) = (interior_moments(&lo, k)?, interior_moments(&hi, k)?);
        for m in 0..k {
            mixed[j][m] = (vh[m] - vl[m]) / (2.0 * fd);
        }
        df[j] = (tau(&hi)? - tau(&lo)?) / (2.0 * fd);
    }
    let mut residuals = BTreeMap::new();
    let a = df.iter().zip(&v).map(|(d, v)| (d - v).abs()).fold(0.0, f64::max);
    residuals.insert("a".to_string(), rel(a, max_abs(&v)));
    residuals.insert("b".to_string(), rel((u - mixed[0][0]).abs(), u.abs()));
    let mut tail_estimate = None;
    if k >= 2 {
        let inv = invert_map(&laurent_coefficients(state, k)?, k)?;
        let uk = inv.coefficients();
        let c = (0..k).map(|m| (uk[m] - mixed[0][m] / (m + 1) as f64).abs()).fold(0.0, f64::max);
        residuals.insert("c".to_string(), rel(c, max_abs(uk)));
        let mut d = 0.0f64;
        for j in 0..k {
            for m in j + 1..k {
                d = d.max((mixed[j][m] - mixed[m][j]).abs());
            }
        }
        residuals.insert("d".to_string(), rel(d, max_abs(mixed.iter().flatten())));
        let (e, tail) = pointwise(state, &mixed)?;
        residuals.insert("e".to_string(), e);
        tail_estimate = Some(tail);
    }
    Ok(TauReport { f_minus, v, u, mixed, residuals, tail_estimate })
}

/// Probe pairs on `|z| = 5 * shape radius`.
fn probe_pairs(state: &CutDensity) -> Vec<(C64, C64)> {
    let tr = Trace::new(state);
    let radius = (0..=256)
        .map(|i| tr.at(i as f64 / 256.0).z.norm())
        .fold(tr.corners.0.abs().max(tr.corners.1.abs()), f64::max);
    let r = 5.0 * radius;
    [(0.3, 0.7), (0.2, 0.45), (0.6, 0.9), (0.15, 0.55)]
        .iter()
        .map(|&(a, b)| (C64::from_polar(r, PI * a), C64::from_polar(r, PI * b)))
        .collect()
}

fn pointwise(state: &CutDensity, mixed: &[Vec<f64>]) -> Result<(f64, f64)> {
    let k = mixed.len();
    let mut worst = 0.0f64;
    let mut tail = 0.0f64;
    for (z, w) in probe_pairs(state) {
        let lhs = ((p_of_z(state, z)? - p_of_z(state, w)?) / (z - w)).ln();
        let mut rhs = C64::new(0.0, 0.0);
        let mut shell = 0.0f64;
        for j in 1..=k {
            for m in 1..=k {
                let term = -z.powi(-(j as i32)) * w.powi(-(m as i32)) * mixed[j - 1][m - 1] / (j * m) as f64;
                rhs += term;
                if j.max(m) == k {
                    shell += term.norm();
                }
            }
        }
        worst = worst.max((lhs - rhs).norm() / lhs.norm());
        tail = tail.max(shell / lhs.norm());
    }
    Ok((worst, tail))
}
