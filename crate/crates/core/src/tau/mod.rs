//! Electrostatic potential of the charged fat slit, the tau-functional
//! `F^-` and the Hirota-form identity suite.

use crate::error::{Error, Result};
use crate::quadrature::{adaptive_c, gauss_legendre};
use crate::slit::{CutDensity, Trace};
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use std::f64::consts::PI;

mod hirota;
mod montecarlo;

pub use hirota::{hirota_suite, TauReport};
pub use montecarlo::{tau_monte_carlo, MonteCarloEstimate};

fn xlogx2(s: f64, y: f64) -> f64 {
    let r = s * s + y * y;
    if r == 0.0 {
        0.0
    } else {
        r.ln()
    }
}

/// `int (s + iY)(log(s^2 + Y^2) - 1) ds` at `s`.
fn base_primitive(s: f64, y: f64) -> C64 {
    let l = xlogx2(s, y);
    let re = 0.5 * ((s * s + y * y) * l - s * s) - 0.5 * s * s;
    let at = if y == 0.0 { 0.0 } else { 2.0 * y * (s / y).atan() };
    let im = y * (s * l - 3.0 * s + at);
    C64::new(re, im)
}

/// `Phi^-(z) = -(2/pi) int_B log|(z - z')/(z - conj z')| d^2z'`, from closed
/// contour forms of the logarithmic area integrals over `B` and its mirror.
pub fn potential(state: &CutDensity, z: C64) -> Result<f64> {
    if !z.re.is_finite() || !z.im.is_finite() {
        return Err(Error::OutOfRange(format!("non-finite point {z}")));
    }
    if state.is_empty() {
        return Ok(0.0);
    }
    let tr = Trace::new(state);
    Ok(potential_with(&tr, state.scale(), z))
}

pub(crate) fn potential_with(tr: &Trace, scale: f64, z: C64) -> f64 {
    let zc = z.conj();
    // gamma traversed with t, i.e. from the left corner to the right one
    let mut f = |t: f64| {
        let b = tr.at(t);
        let xi = b.z;
        let j1 = (xi.conj() - zc) * (((xi - z).norm_sqr()).ln() - 1.0) * b.z_t;
        let j2 = (xi - zc) * (((xi.conj() - z).norm_sqr()).ln() - 1.0) * b.z_t.conj();
        if j1.is_finite() && j2.is_finite() {
            j1 + j2
        } else {
            C64::new(0.0, 0.0)
        }
    };
    let j = adaptive_c(&mut f, 0.0, 1.0, 1e-14 * scale.powi(3), 4000);
    let (xm, xp) = tr.corners;
    let base = base_primitive(xp - z.re, z.im) - base_primitive(xm - z.re, z.im);
    let total = (-j + 2.0 * base) / C64::new(0.0, 2.0);
    -total.re / PI
}

/// Polar fan quadrature of `int_B f d^2z` about a point `c` of the base:
/// rays to the boundary trace, Gauss-Legendre in angle parameter and radius.
pub(crate) fn fan_integral<F>(state: &CutDensity, panels: usize, radial: usize, f: F) -> f64
where
    F: Fn(C64) -> f64 + Sync,
{
    let tr = Trace::new(state);
    let (xm, xp) = tr.corners;
    let c = C64::new(if xm < 0.0 && xp > 0.0 { 0.0 } else { 0.5 * (xm + xp) }, 0.0);
    let rt = gauss_legendre(16);
    let rr = gauss_legendre(radial);
    // panels graded towards both corners like the cut nodes
    let nodes: Vec<(f64, f64)> = (0..panels)
        .flat_map(|k| {
            let (a, b) = (k as f64 / panels as f64, (k + 1) as f64 / panels as f64);
            rt.nodes.iter().zip(&rt.weights).map(move |(x, w)| (a + 0.5 * (b - a) * (x + 1.0), 0.5 * (b - a) * w))
        })
        .collect();
    let parts: Vec<f64> = nodes
        .par_iter()
        .map(|&(t, wt)| {
            let b = tr.at(t);
            let jac = -((b.z - c).conj() * b.z_t).im;
            let mut acc = 0.0;
            for (x, w) in rr.nodes.iter().zip(&rr.weights) {
                let r = 0.5 * (x + 1.0);
                acc += 0.5 * w * r * f(c + (b.z - c) * r);
            }
            wt * jac * acc
        })
        .collect();
    parts.iter().sum()
}

/// Grid quadrature of `F^- = (1/2pi) int_B Phi^- d^2z`.
pub fn tau(state: &CutDensity) -> Result<f64> {
    tau_grid(state, 8, 16)
}

/// `tau` with an explicit fan resolution (panels of 16 points, radial order).
pub fn tau_grid(state: &CutDensity, panels: usize, radial: usize) -> Result<f64> {
    if state.is_empty() {
        return Ok(0.0);
    }
    let tr = Trace::new(state);
    let scale = state.scale();
    Ok(fan_integral(state, panels, radial, |z| potential_with(&tr, scale, z)) / (2.0 * PI))
}

/// Area of `B` by the same fan quadrature.
pub fn area(state: &CutDensity) -> f64 {
    if state.is_empty() {
        return 0.0;
    }
    fan_integral(state, 16, 8, |_| 1.0)
}
