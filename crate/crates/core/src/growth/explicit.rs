//! The self-similar Darcy solution with a quarter-angle double corner:
//! `p_+- = +-2T`, `beta = 1/4`, boundary `|z^2 + T^2| = T^2`.

use crate::error::{Error, Result};
use crate::slit::CutDensity;
use num_complex::Complex64 as C64;

fn check(t: f64) -> Result<()> {
    if t > 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::OutOfRange(format!("time {t} must be positive")))
    }
}

// Real arguments are read as p + i0.
fn lift(p: C64) -> C64 {
    if p.im == 0.0 {
        C64::new(p.re, 0.0)
    } else {
        p
    }
}

fn parts(t: f64, p: C64) -> (C64, C64) {
    let p = lift(p);
    let a = (p - 2.0 * t).sqrt();
    let b = (p + 2.0 * t).sqrt();
    (a * b, (a.sqrt() * b.sqrt()) * (p + a * b).sqrt() / 2f64.sqrt())
}

/// `z(p, T)`.
pub fn explicit_solution(t: f64, p: C64) -> Result<C64> {
    check(t)?;
    Ok(parts(t, p).1)
}

/// `dz/dp` at `(p, T)`.
pub fn explicit_z_prime(t: f64, p: C64) -> Result<C64> {
    check(t)?;
    let (s, z) = parts(t, p);
    Ok(z * (p / (2.0 * s * s) + 1.0 / (2.0 * s)))
}

/// `dz/dT` at fixed `p`.
pub fn explicit_dz_dt(t: f64, p: C64) -> Result<C64> {
    check(t)?;
    let (s, z) = parts(t, p);
    Ok(z * (-2.0 * t / (s * s) - 2.0 * t / (s * (lift(p) + s))))
}

/// The explicit solution at time `T` as a cut density with `m` nodes.
pub fn density_from_explicit(t: f64, m: usize) -> Result<CutDensity> {
    check(t)?;
    // q = sqrt(T/2) (sqrt(sigma) + sqrt(1 - sigma)) in closed form
    let c = (t / 2.0).sqrt();
    CutDensity::from_profile(-2.0 * t, 2.0 * t, 0.25, 0.25, m, |s| {
        c * ((0.5 * (1.0 + s)).sqrt() + (0.5 * (1.0 - s)).sqrt())
    })
}

/// Upper boundary value of the explicit solution at the cut point with
/// `sigma = (p - p_-)/(p_+ - p_-)` and `sigma_c = 1 - sigma`, free of the
/// rounding of `p` near the corners.
pub fn explicit_cut(t: f64, sigma: f64, sigma_c: f64) -> Result<C64> {
    check(t)?;
    let l = 4.0 * t;
    let w = (l * l * sigma * sigma_c).sqrt().sqrt();
    let phase = C64::from_polar(1.0, std::f64::consts::FRAC_PI_4) * C64::new(sigma.sqrt(), sigma_c.sqrt());
    Ok(w * t.sqrt() * phase)
}
