//! Odd Green's function of the exterior, deformation profiles and the
//! boundary velocity of a growth step.

use crate::error::{Error, Result};
use crate::quadrature::adaptive;
use crate::series::{faber_polynomial, invert_map};
use crate::slit::{laurent_coefficients, CutDensity, Trace};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Preimage `p(z)` in the upper half plane of a point `z` of the exterior.
///
/// Newton's method on `z(p) = z`, seeded from the inverted Laurent series far
/// away and continued along the radial segment for nearby points.
pub fn p_of_z(state: &CutDensity, z: C64) -> Result<C64> {
    if !z.re.is_finite() || !z.im.is_finite() {
        return Err(Error::OutOfRange(format!("non-finite point {z}")));
    }
    if z.im < 0.0 {
        return Err(Error::OutOfRange(format!("{z} lies below the real axis")));
    }
    if state.is_empty() {
        return Ok(z);
    }
    let tr = Trace::new(state);
    let scale = state.scale();
    let (_, d) = tr.closest(z);
    if d < 1e-12 * scale {
        return Err(Error::OnBoundary(format!("{z} lies on the boundary")));
    }
    if z.im == 0.0 && z.re >= tr.corners.0 && z.re <= tr.corners.1 {
        return Err(Error::OnBoundary(format!("{z} lies on the base")));
    }
    if tr.contains(z) {
        return Err(Error::InsideSlit(format!("{z} lies inside the slit")));
    }
    let radius = (0..=64)
        .map(|i| tr.at(i as f64 / 64.0).z.norm())
        .fold(tr.corners.0.abs().max(tr.corners.1.abs()), f64::max);
    let series = invert_map(&laurent_coefficients(state, 10)?, 10)?;
    let far = 3.0 * radius;
    if z.norm() >= far {
        return newton(state, z, series.eval(z));
    }
    // continue from a far point along the ray through z
    let dir = if z.norm() > 0.0 { z / z.norm() } else { C64::new(0.0, 1.0) };
    let start = dir * far;
    let mut p = newton(state, start, series.eval(start))?;
    let steps = 16;
    for k in 1..=steps {
        let s = k as f64 / steps as f64;
        let target = start + (z - start) * s;
        p = newton(state, target, p)?;
    }
    Ok(p)
}

fn newton(state: &CutDensity, z: C64, mut p: C64) -> Result<C64> {
    let scale = state.scale().max(z.norm());
    let mut resid = f64::INFINITY;
    for _ in 0..50 {
        if p.im <= 0.0 && z.im > 0.0 {
            p.im = 1e-3 * state.scale();
        }
        let f = state.eval_map(p)? - z;
        resid = f.norm();
        if resid <= 1e-13 * scale {
            return Ok(p);
        }
        let mut step = f / state.map_derivative(p)?;
        // stay in the closed upper half plane
        while z.im > 0.0 && (p - step).im <= 0.0 {
            step *= 0.5;
        }
        if z.im == 0.0 {
            // real points map to the real rays on the same side of the cut
            step.im = 0.0;
            let right = p.re > state.p_plus();
            let bad = |x: f64| if right { x <= state.p_plus() } else { x >= state.p_minus() };
            while bad((p - step).re) {
                step *= 0.5;
            }
        }
        p -= step;
        if step.norm() <= 1e-15 * scale {
            return Ok(p);
        }
    }
    Err(Error::NoConvergence { residual: resid })
}

/// `G^-(z, w) = log |(p(z) - p(w)) / (p(z) - conj p(w))|`.
pub fn green_odd(state: &CutDensity, z: C64, w: C64) -> Result<f64> {
    let (a, b) = (preimage_any(state, z)?, preimage_any(state, w)?);
    if a == b {
        return Err(Error::OutOfRange("Green's function is singular at z = w".into()));
    }
    Ok(((a - b) / (a - b.conj())).norm().ln())
}

/// Preimage for points on either side of the real axis.
fn preimage_any(state: &CutDensity, z: C64) -> Result<C64> {
    if z.im < 0.0 {
        Ok(p_of_z(state, z.conj())?.conj())
    } else {
        p_of_z(state, z)
    }
}

/// Outward normal derivative of `G^-(a, .)` at the boundary point `z(p + i0)`.
pub fn green_odd_normal(state: &CutDensity, a: C64, p: f64) -> Result<f64> {
    if state.is_empty() || !(p > state.p_minus() && p < state.p_plus()) {
        return Err(Error::OutOfRange(format!("{p} is not an interior cut point")));
    }
    let pa = preimage_any(state, a)?;
    let b = state.boundary_point(state.t_of_p(p));
    Ok(normal_kernel(pa, p, b.z_t().norm() / b.p_t))
}

fn normal_kernel(pa: C64, p: f64, zp_abs: f64) -> f64 {
    -2.0 * pa.im / (zp_abs * (C64::new(p, 0.0) - pa).norm_sqr())
}

/// Bounded harmonic extension into the exterior of boundary data `f(p)`
/// given on the cut, vanishing on the real rays.
pub fn poisson_extend<F: Fn(f64) -> f64>(state: &CutDensity, f: F, z: C64) -> Result<f64> {
    if state.is_empty() {
        return Err(Error::InvalidState("the empty state has no boundary".into()));
    }
    if z.im < 0.0 {
        return Ok(-poisson_extend(state, f, z.conj())?);
    }
    let pz = p_of_z(state, z)?;
    let g = state.grid_ref();
    let l = state.length();
    let mut k = |t: f64| {
        if t <= 0.0 || t >= 1.0 {
            return 0.0;
        }
        let (s, sc, st) = g.grading(t);
        let p = state.p_of(s, sc);
        f(p) * pz.im * l * st / (C64::new(p, 0.0) - pz).norm_sqr()
    };
    Ok(adaptive(&mut k, 0.0, 1.0, 1e-14, 2000) / PI)
}

/// Normal velocity `v_n` sampled at the canonical cut nodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeformationProfile {
    pub values: Vec<f64>,
    pub label: String,
}

impl DeformationProfile {
    /// `v_n = 1/(2|z'|)`, the Darcy profile generating the `T_1` flow.
    pub fn darcy(state: &CutDensity) -> Result<Self> {
        Self::faber(state, 1).map(|p| DeformationProfile { label: "darcy".into(), ..p })
    }

    /// `v_n = B_k'(p) / (2|z'|)`, generating the flow in `T_k`.
    pub fn faber(state: &CutDensity, k: usize) -> Result<Self> {
        nonempty(state)?;
        if k == 0 {
            return Err(Error::OutOfRange("flow index must be at least 1".into()));
        }
        let b = faber_polynomial(&laurent_coefficients(state, k + 1)?, k)?;
        let cv = state.cut_values();
        let values = (0..cv.len()).map(|i| b.derivative_real(cv.p[i]) * cv.p_t[i] / (2.0 * cv.z_t(i).norm())).collect();
        Ok(DeformationProfile { values, label: format!("faber-{k}") })
    }

    /// `v_n = -(1/2) d_n G^-(c, .)`, the elementary deformation at `c`.
    pub fn elementary(state: &CutDensity, c: C64) -> Result<Self> {
        nonempty(state)?;
        let pc = preimage_any(state, c)?;
        let cv = state.cut_values();
        let values =
            (0..cv.len()).map(|i| -0.5 * normal_kernel(pc, cv.p[i], cv.z_t(i).norm() / cv.p_t[i])).collect();
        Ok(DeformationProfile { values, label: format!("elementary({},{})", c.re, c.im) })
    }

    /// `rho = v_n / |z'|` at the nodes.
    pub fn rho(&self, state: &CutDensity) -> Vec<f64> {
        let cv = state.cut_values();
        self.values.iter().enumerate().map(|(i, v)| v * cv.p_t[i] / cv.z_t(i).norm()).collect()
    }
}

fn nonempty(state: &CutDensity) -> Result<()> {
    if state.is_empty() {
        Err(Error::InvalidState("operation needs a nonempty state".into()))
    } else {
        Ok(())
    }
}

/// Boundary velocity of the growth step driven by a profile.
#[derive(Debug, Clone)]
pub struct VelocityField {
    /// `rho = v_n / |z'|`.
    pub rho: Vec<f64>,
    /// `(1/pi) PV int rho dp' / (p' - p)`.
    pub gr: Vec<f64>,
    /// `gr + pdot(p)` divided by `sigma` and by `1 - sigma`.
    pub a_minus: Vec<f64>,
    pub a_plus: Vec<f64>,
    /// `d z(p + i0) / dT` at fixed `p`.
    pub dz_dt: Vec<C64>,
    /// Endpoint speeds `(dp_-/dT, dp_+/dT)`.
    pub p_dot: (f64, f64),
}

/// Velocity of the boundary for a normal velocity profile. The endpoint
/// speeds keep both corners fixed on the real axis.
pub fn pg_velocity(state: &CutDensity, profile: &DeformationProfile) -> Result<VelocityField> {
    nonempty(state)?;
    if profile.values.len() != state.node_count() {
        return Err(Error::InvalidState("profile and state node counts differ".into()));
    }
    if let Some(v) = profile.values.iter().find(|v| !v.is_finite()) {
        return Err(Error::InvalidState(format!("non-finite profile value {v}")));
    }
    let g = state.grid_ref();
    let cv = state.cut_values();
    let m = cv.len();
    let rho = profile.rho(state);
    let (mut fm, mut fp) = (0.0, 0.0);
    for i in 0..m {
        let k = cv.weights[i] * rho[i] * g.sigma_t[i];
        fm += k / g.sigma[i];
        fp -= k / g.sigma_c[i];
    }
    let p_dot = (-fm / PI, -fp / PI);
    let delta = p_dot.1 - p_dot.0;
    let gr: Vec<f64> = g.apply_pv(&rho).iter().map(|v| v / PI).collect();
    let over_s: Vec<f64> = (0..m).map(|i| rho[i] / g.sigma[i]).collect();
    let over_sc: Vec<f64> = (0..m).map(|i| rho[i] / g.sigma_c[i]).collect();
    let rm = g.apply_pv(&over_s);
    let rp = g.apply_pv(&over_sc);
    let mut a_minus = vec![0.0; m];
    let mut a_plus = vec![0.0; m];
    let mut dz_dt = vec![C64::new(0.0, 0.0); m];
    for i in 0..m {
        let (s, sc) = (g.sigma[i], g.sigma_c[i]);
        if s <= 0.5 {
            a_minus[i] = rm[i] / PI + delta;
            a_plus[i] = a_minus[i] * s / sc;
        } else {
            a_plus[i] = rp[i] / PI - delta;
            a_minus[i] = a_plus[i] * sc / s;
        }
        let zp = cv.z_t(i) / cv.p_t[i];
        dz_dt[i] = zp * C64::new(gr[i], rho[i]);
    }
    Ok(VelocityField { rho, gr, a_minus, a_plus, dz_dt, p_dot })
}

/// `dz/dT` at a point `p` off the cut, `z'(p) (1/pi) int rho dp'/(p' - p)`.
pub fn velocity_at(state: &CutDensity, field: &VelocityField, p: C64) -> Result<C64> {
    nonempty(state)?;
    if p.im == 0.0 && p.re >= state.p_minus() && p.re <= state.p_plus() {
        return Err(Error::OnBoundary(format!("{} lies on the cut", p.re)));
    }
    let g = state.grid_ref();
    let l = state.length();
    let mut f = |t: f64| {
        if t <= 0.0 || t >= 1.0 {
            return C64::new(0.0, 0.0);
        }
        let (s, sc, st) = g.grading(t);
        let r = g.unit.interpolate(&field.rho, t);
        let d = if s <= 0.5 {
            C64::new(l * s, 0.0) - (p - state.p_minus())
        } else {
            (C64::new(state.p_plus(), 0.0) - p) - l * sc
        };
        r * l * st / d
    };
    let cauchy = crate::quadrature::adaptive_c(&mut f, 0.0, 1.0, 1e-15, 2000);
    Ok(state.map_derivative(p)? * cauchy / PI)
}
