//! Residuals of the string equation and of the Lax and Zakharov-Shabat
//! hierarchies, by central differences along the flows.

use super::{evolve, explicit_dz_dt, explicit_z_prime, Drive, IntegratorConfig};
use crate::kernel::{pg_velocity, DeformationProfile};
use crate::error::{Error, Result};
use crate::series::{faber_polynomial, FaberPolynomial};
use crate::slit::{laurent_coefficients, CutDensity};
use num_complex::Complex64 as C64;

/// `sup |Im(conj(z') dz/dT) - 1/2|` over the open cut of the explicit
/// solution at time `t`, sampled at `n` points.
pub fn string_residual_explicit(t: f64, n: usize) -> Result<f64> {
    let mut worst = 0.0f64;
    for i in 0..n {
        let p = 2.0 * t * (-(std::f64::consts::PI * (i as f64 + 0.5) / n as f64).cos());
        let zp = explicit_z_prime(t, C64::new(p, 0.0))?;
        let zt = explicit_dz_dt(t, C64::new(p, 0.0))?;
        worst = worst.max(((zp.conj() * zt).im - 0.5).abs());
    }
    Ok(worst)
}

/// `sup |Im(conj(z') dz/dT) - 1/2|` over the cut nodes with `sigma` in
/// `[margin, 1 - margin]`, for given nodal velocities `dz/dT`. Near the
/// corners `|z'|^2` is large enough that `dz/dT` no longer resolves its
/// normal part, hence the margin.
pub fn string_residual_with(state: &CutDensity, dz_dt: &[C64], margin: f64) -> Result<f64> {
    let cv = state.cut_values();
    if dz_dt.len() != cv.len() {
        return Err(Error::InvalidState("velocity and state node counts differ".into()));
    }
    let worst = (0..cv.len())
        .filter(|&i| cv.sigma[i] >= margin && cv.sigma_c[i] >= margin)
        .map(|i| {
            let zp = cv.z_t(i) / cv.p_t[i];
            (zp.norm_sqr() * (dz_dt[i] / zp).im - 0.5).abs()
        })
        .fold(f64::NAN, f64::max);
    if worst.is_nan() {
        return Err(Error::OutOfRange("no cut nodes inside the sampling window".into()));
    }
    Ok(worst)
}

/// String residual of the Darcy velocity field, `|z'|^2 rho - 1/2`, at all
/// cut nodes.
pub fn string_residual(state: &CutDensity) -> Result<f64> {
    let v = pg_velocity(state, &DeformationProfile::darcy(state)?)?;
    let cv = state.cut_values();
    Ok((0..cv.len())
        .map(|i| ((cv.z_t(i) / cv.p_t[i]).norm_sqr() * v.rho[i] - 0.5).abs())
        .fold(0.0, f64::max))
}

/// String residual with `dz/dT` from central differences along the actual
/// Darcy trajectory (steps `fd` and `fd/2`, one Richardson level), at the
/// cut nodes whose `sigma` lies in `[margin, 1 - margin]`.
pub fn string_residual_trajectory(state: &CutDensity, fd: f64, margin: f64, cfg: &IntegratorConfig) -> Result<f64> {
    let wide = flow_pair(state, 1, fd, cfg)?;
    let narrow = flow_pair(state, 1, fd / 2.0, cfg)?;
    let g = state.grid_ref();
    let cv = state.cut_values();
    let mut worst = 0.0f64;
    let mut count = 0;
    for i in 0..cv.len() {
        if g.sigma[i] < margin || g.sigma_c[i] < margin {
            continue;
        }
        let p = cv.p[i];
        let diff = |(lo, hi): &(CutDensity, CutDensity), h: f64| -> Option<C64> {
            Some((hi.eval_cut(p, true).ok()? - lo.eval_cut(p, true).ok()?) / (2.0 * h))
        };
        let (Some(d1), Some(d2)) = (diff(&wide, fd), diff(&narrow, fd / 2.0)) else { continue };
        let zt = (4.0 * d2 - d1) / 3.0;
        let zp = cv.z_t(i) / cv.p_t[i];
        worst = worst.max(((zp.conj() * zt).im - 0.5).abs());
        count += 1;
    }
    if count == 0 {
        return Err(Error::OutOfRange("no cut nodes inside the sampling window".into()));
    }
    Ok(worst)
}

fn flow_pair(state: &CutDensity, k: usize, fd: f64, cfg: &IntegratorConfig) -> Result<(CutDensity, CutDensity)> {
    if !(fd > 0.0) {
        return Err(Error::OutOfRange("difference step must be positive".into()));
    }
    let lo = evolve(state, Drive::Flow(k), -fd, cfg)?.0;
    let hi = evolve(state, Drive::Flow(k), fd, cfg)?.0;
    Ok((lo, hi))
}

/// Probe points on the upper half of `|p| = 3 max(|p_-|, |p_+|)`.
pub fn probe_points(state: &CutDensity) -> Vec<C64> {
    let r = 3.0 * state.p_minus().abs().max(state.p_plus().abs());
    (0..16).map(|j| C64::from_polar(r, std::f64::consts::PI * (j as f64 + 0.5) / 16.0)).collect()
}

fn faber(state: &CutDensity, k: usize) -> Result<FaberPolynomial> {
    faber_polynomial(&laurent_coefficients(state, k + 1)?, k)
}

/// `max |dz/dT_k - {B_k, z}|` at the probe points, where
/// `{f, g} = f' dg/dT_1 - df/dT_1 g'`.
pub fn lax_residual(state: &CutDensity, k: usize, fd: f64, cfg: &IntegratorConfig) -> Result<f64> {
    let probes = probe_points(state);
    let (lk, hk) = flow_pair(state, k, fd, cfg)?;
    let (l1, h1) = flow_pair(state, 1, fd, cfg)?;
    let b = faber(state, k)?;
    let (bl, bh) = (faber(&l1, k)?, faber(&h1, k)?);
    let mut worst = 0.0f64;
    for p in probes {
        let dk = (hk.eval_map(p)? - lk.eval_map(p)?) / (2.0 * fd);
        let d1 = (h1.eval_map(p)? - l1.eval_map(p)?) / (2.0 * fd);
        let db = (bh.eval(p) - bl.eval(p)) / (2.0 * fd);
        let bracket = b.derivative(p) * d1 - db * state.map_derivative(p)?;
        worst = worst.max((dk - bracket).norm());
    }
    Ok(worst)
}

/// Signed Zakharov-Shabat residual
/// `dB_j/dT_k - dB_k/dT_j + {B_j, B_k}` at the probe points.
pub fn zakharov_shabat_residual(
    state: &CutDensity,
    j: usize,
    k: usize,
    fd: f64,
    cfg: &IntegratorConfig,
) -> Result<Vec<C64>> {
    let probes = probe_points(state);
    if j == k {
        return Ok(vec![C64::new(0.0, 0.0); probes.len()]);
    }
    let mut flows = std::collections::BTreeMap::new();
    for f in [1, j, k] {
        if let std::collections::btree_map::Entry::Vacant(e) = flows.entry(f) {
            e.insert(flow_pair(state, f, fd, cfg)?);
        }
    }
    // d B_a / d T_b at p
    let deriv = |a: usize, b: usize, p: C64| -> Result<C64> {
        let (lo, hi) = &flows[&b];
        Ok((faber(hi, a)?.eval(p) - faber(lo, a)?.eval(p)) / (2.0 * fd))
    };
    let (bj, bk) = (faber(state, j)?, faber(state, k)?);
    probes
        .iter()
        .map(|&p| {
            let cross = deriv(j, k, p)? - deriv(k, j, p)?;
            let bracket = bj.derivative(p) * deriv(k, 1, p)? - deriv(j, 1, p)? * bk.derivative(p);
            Ok(cross + bracket)
        })
        .collect()
}
