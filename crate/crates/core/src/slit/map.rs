//! Evaluation of the inverse map `z(p)` and its boundary values.

use super::CutDensity;
use crate::error::{Error, Result};
use crate::quadrature::adaptive_c;
use num_complex::Complex64 as C64;
use std::f64::consts::PI;
use std::sync::Arc;

/// Boundary data of the upper side of the cut at the canonical nodes.
#[derive(Debug, Clone)]
pub struct CutValues {
    pub t: Vec<f64>,
    pub weights: Vec<f64>,
    pub sigma: Vec<f64>,
    pub sigma_c: Vec<f64>,
    pub p: Vec<f64>,
    /// `dp/dt`.
    pub p_t: Vec<f64>,
    /// `dq/dt`.
    pub q_t: Vec<f64>,
    pub h: Vec<f64>,
    pub h_t: Vec<f64>,
    /// `Re z(p + i0)` and its `t` derivative.
    pub x: Vec<f64>,
    pub x_t: Vec<f64>,
    /// `Re z'(p + i0)` and `Im z'(p + i0) = dh/dp`.
    pub x_p: Vec<f64>,
    pub h_p: Vec<f64>,
}

impl CutValues {
    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    /// Boundary point `z(p_i + i0)`.
    pub fn z(&self, i: usize) -> C64 {
        C64::new(self.x[i], self.h[i])
    }

    /// `z'(p_i + i0)`.
    pub fn z_p(&self, i: usize) -> C64 {
        C64::new(self.x_p[i], self.h_p[i])
    }

    /// `dz/dt` along the upper side, in the direction of increasing `p`.
    pub fn z_t(&self, i: usize) -> C64 {
        C64::new(self.x_t[i], self.h_t[i])
    }
}

/// Boundary data at one point of the upper side of the cut.
#[derive(Debug, Clone, Copy)]
pub struct BoundaryPoint {
    pub t: f64,
    pub p: f64,
    pub p_t: f64,
    pub x: f64,
    pub h: f64,
    pub x_t: f64,
    pub h_t: f64,
    pub x_p: f64,
    pub h_p: f64,
}

impl BoundaryPoint {
    pub fn z(&self) -> C64 {
        C64::new(self.x, self.h)
    }

    pub fn z_p(&self) -> C64 {
        C64::new(self.x_p, self.h_p)
    }

    pub fn z_t(&self) -> C64 {
        C64::new(self.x_t, self.h_t)
    }
}

impl CutDensity {
    /// Nodal boundary data (computed once per state).
    pub fn cut_values(&self) -> Arc<CutValues> {
        self.cache.get_or_init(|| Arc::new(self.compute_cut_values())).clone()
    }

    fn compute_cut_values(&self) -> CutValues {
        let g = self.grid_ref();
        let m = g.len();
        let l = self.length();
        let q_t = g.unit.derivative(&self.q);
        let mut p = Vec::with_capacity(m);
        let mut p_t = Vec::with_capacity(m);
        let mut h = Vec::with_capacity(m);
        let mut h_t = Vec::with_capacity(m);
        for i in 0..m {
            let (s, sc, st) = (g.sigma[i], g.sigma_c[i], g.sigma_t[i]);
            let w = self.corner_weight(s, sc);
            let lw = self.log_weight_dt(g.unit.t[i], s, sc);
            p.push(self.p_of(s, sc));
            p_t.push(l * st);
            h.push(w * self.q[i]);
            h_t.push(w * (lw * self.q[i] + q_t[i]));
        }
        let k_h = g.apply_pv(&h);
        let x: Vec<f64> = (0..m).map(|i| p[i] + k_h[i] / PI).collect();
        let x_t = g.unit.derivative(&x);
        let x_p = (0..m).map(|i| x_t[i] / p_t[i]).collect();
        let h_p = (0..m).map(|i| h_t[i] / p_t[i]).collect();
        CutValues {
            t: g.unit.t.clone(),
            weights: g.unit.w.clone(),
            sigma: g.sigma.clone(),
            sigma_c: g.sigma_c.clone(),
            p,
            p_t,
            q_t,
            h,
            h_t,
            x,
            x_t,
            x_p,
            h_p,
        }
    }

    /// `h(t) p_t(t)`, `h_t(t)` and `p(t) - p` at an arbitrary graded
    /// parameter, the last formed from the nearer endpoint to keep digits.
    pub(crate) fn density_at_rel(&self, t: f64, p: C64) -> (f64, f64, C64) {
        let g = self.grid_ref();
        let cv = self.cut_values();
        let (s, sc, st) = g.grading(t);
        let w = self.corner_weight(s, sc);
        let q = g.unit.interpolate(&self.q, t);
        let qt = g.unit.interpolate(&cv.q_t, t);
        let lw = self.log_weight_dt(t, s, sc);
        let l = self.length();
        let d = if s <= 0.5 {
            C64::new(l * s, 0.0) - (p - self.p_minus)
        } else {
            (C64::new(self.p_plus, 0.0) - p) - l * sc
        };
        (w * q * l * st, w * (lw * q + qt), d)
    }

    /// Boundary data on the upper side of the cut at graded parameter `t`.
    pub fn boundary_point(&self, t: f64) -> BoundaryPoint {
        let g = self.grid_ref();
        let cv = self.cut_values();
        let l = self.length();
        let (s, sc, st) = g.grading(t);
        let w = self.corner_weight(s, sc);
        let q = g.unit.interpolate(&self.q, t);
        let qt = g.unit.interpolate(&cv.q_t, t);
        let lw = self.log_weight_dt(t, s, sc);
        let p = self.p_of(s, sc);
        let h_t = w * (lw * q + qt);
        BoundaryPoint {
            t,
            p,
            p_t: l * st,
            x: p + g.pv_sigma_at(&cv.h, t) / PI,
            h: w * q,
            x_t: g.unit.interpolate(&cv.x_t, t),
            h_t,
            x_p: g.unit.interpolate(&cv.x_t, t) / (l * st),
            h_p: h_t / (l * st),
        }
    }

    /// Boundary value `z(p +- i0)` at a cut point, upper side when `upper`.
    pub fn eval_cut(&self, p: f64, upper: bool) -> Result<C64> {
        if self.is_empty() || !(p > self.p_minus && p < self.p_plus) {
            return Err(Error::OutOfRange(format!("{p} is not an interior cut point")));
        }
        let b = self.boundary_point(self.t_of_p(p));
        Ok(if upper { b.z() } else { b.z().conj() })
    }

    /// Distance from `p` to the cut.
    fn cut_distance(&self, p: C64) -> f64 {
        let dx = if p.re < self.p_minus {
            self.p_minus - p.re
        } else if p.re > self.p_plus {
            p.re - self.p_plus
        } else {
            0.0
        };
        dx.hypot(p.im)
    }

    /// `int_0^1 f(t) / (p(t) - p) dt` where `f` is selected from `density_at`.
    fn cauchy(&self, p: C64, derivative: bool) -> C64 {
        let cv = self.cut_values();
        let l = self.length();
        if self.cut_distance(p) >= 0.25 * l {
            let mut acc = C64::new(0.0, 0.0);
            for i in 0..cv.len() {
                let f = if derivative { cv.h_t[i] } else { cv.h[i] * cv.p_t[i] };
                acc += cv.weights[i] * f / (cv.p[i] - p);
            }
            return acc;
        }
        let scale = if derivative { 1.0 } else { l };
        let tol = 1e-15 * scale;
        if p.re > self.p_minus && p.re < self.p_plus {
            // subtract the density at Re p; the rest has a bounded integrand
            let t0 = self.t_of_p(p.re);
            let b = self.boundary_point(t0);
            let f0 = if derivative { b.h_p } else { b.h };
            let mut f = |t: f64| {
                let (phi, ht, d) = self.density_at_rel(t, p);
                let (_, _, st) = self.grid_ref().grading(t);
                let f = if derivative { ht } else { phi };
                if d == C64::new(0.0, 0.0) {
                    C64::new(0.0, 0.0)
                } else {
                    (f - f0 * l * st) / d
                }
            };
            let rest = adaptive_c(&mut f, 0.0, t0, tol, 400) + adaptive_c(&mut f, t0, 1.0, tol, 400);
            let log = ((C64::new(self.p_plus, 0.0) - p) / (C64::new(self.p_minus, 0.0) - p)).ln();
            rest + f0 * log
        } else {
            let mut f = |t: f64| {
                let (phi, ht, d) = self.density_at_rel(t, p);
                let f = if derivative { ht } else { phi };
                if d == C64::new(0.0, 0.0) {
                    C64::new(0.0, 0.0)
                } else {
                    f / d
                }
            };
            adaptive_c(&mut f, 0.0, 1.0, tol, 400)
        }
    }

    /// The inverse map `z(p)`. On the open cut this is the principal value,
    /// the mean of the two boundary values.
    pub fn eval_map(&self, p: C64) -> Result<C64> {
        if !p.re.is_finite() || !p.im.is_finite() {
            return Err(Error::OutOfRange(format!("non-finite argument {p}")));
        }
        if self.is_empty() {
            return Ok(p);
        }
        if p.im == 0.0 && (p.re == self.p_minus || p.re == self.p_plus) {
            return Err(Error::OnBoundary(format!("{} is a cut endpoint", p.re)));
        }
        if p.im == 0.0 && p.re > self.p_minus && p.re < self.p_plus {
            let b = self.boundary_point(self.t_of_p(p.re));
            return Ok(C64::new(b.x, 0.0));
        }
        Ok(p + self.cauchy(p, false) / PI)
    }

    /// `z'(p)` off the cut.
    pub fn map_derivative(&self, p: C64) -> Result<C64> {
        if self.is_empty() {
            return Ok(C64::new(1.0, 0.0));
        }
        if p.im == 0.0 && p.re >= self.p_minus && p.re <= self.p_plus {
            return Err(Error::OnBoundary(format!("z'({}) is singular or two-valued on the cut", p.re)));
        }
        Ok(C64::new(1.0, 0.0) + self.cauchy(p, true) / PI)
    }

    /// Corner points `z(p_-)` and `z(p_+)` on the real axis.
    pub fn corners(&self) -> (f64, f64) {
        if self.is_empty() {
            return (0.0, 0.0);
        }
        let a = self.p_minus + self.cauchy(C64::new(self.p_minus, 0.0), false).re / PI;
        let b = self.p_plus + self.cauchy(C64::new(self.p_plus, 0.0), false).re / PI;
        (a, b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn joukowski(p: C64) -> C64 {
        // branch with z ~ p at infinity, analytic off [-2, 2]
        let s = (p - 2.0).sqrt() * (p + 2.0).sqrt();
        0.5 * (p + s)
    }

    #[test]
    fn half_disk_boundary_values() {
        let st = CutDensity::half_disk(1.0, 96).unwrap();
        let cv = st.cut_values();
        for i in 0..cv.len() {
            let p = cv.p[i];
            assert!((cv.x[i] - 0.5 * p).abs() < 1e-12, "x at {p}");
            let r = (16.0 * cv.sigma[i] * cv.sigma_c[i]).sqrt();
            let exact = C64::new(0.5, -0.5 * p / r);
            let zt = cv.z_t(i);
            assert!((zt - exact * cv.p_t[i]).norm() < 1e-11, "z_t at {p}: {zt} vs {}", exact * cv.p_t[i]);
            if cv.sigma[i].min(cv.sigma_c[i]) > 1e-6 {
                assert!((cv.z_p(i) - exact).norm() < 1e-10 * exact.norm(), "z' at {p}");
            }
        }
    }

    #[test]
    fn half_disk_off_cut_map() {
        let st = CutDensity::half_disk(1.0, 96).unwrap();
        for p in [C64::new(3.0, 1.0), C64::new(0.3, 0.05), C64::new(-1.9, 0.01), C64::new(2.5, 0.0), C64::new(0.0, 7.0)] {
            let z = st.eval_map(p).unwrap();
            assert!((z - joukowski(p)).norm() < 1e-12, "{p}: {z} vs {}", joukowski(p));
            let d = st.map_derivative(p).unwrap();
            let expect = 0.5 * (1.0 + p / ((p - 2.0).sqrt() * (p + 2.0).sqrt()));
            assert!((d - expect).norm() < 1e-10 * (1.0 + expect.norm()), "{p}: {d} vs {expect}");
        }
    }

    #[test]
    fn corners_of_half_disk() {
        let st = CutDensity::half_disk(1.0, 96).unwrap();
        let (a, b) = st.corners();
        assert!((a + 1.0).abs() < 1e-12 && (b - 1.0).abs() < 1e-12);
    }

    #[test]
    fn boundary_point_matches_nodes() {
        let st = CutDensity::from_profile(-1.2, 1.6, 0.35, 0.3, 96, |s| 0.35 + 0.08 * s - 0.05 * s * s).unwrap();
        let cv = st.cut_values();
        for i in [0, 7, 20, 39] {
            let b = st.boundary_point(cv.t[i]);
            assert!((b.x - cv.x[i]).abs() < 1e-13);
            assert!((b.z_t() - cv.z_t(i)).norm() < 1e-11);
        }
        // off-node value against the limit from above
        let b = st.boundary_point(0.4321);
        let eps = 1e-8;
        let z = st.eval_map(C64::new(b.p, eps)).unwrap();
        let expect = b.z() + C64::new(0.0, eps) * b.z_p();
        assert!((z - expect).norm() < 1e-12, "{}", (z - expect).norm());
    }

    #[test]
    fn corners_are_ordered() {
        let st = CutDensity::from_profile(-1.2, 1.6, 0.35, 0.3, 64, |s| 0.35 + 0.08 * s - 0.05 * s * s).unwrap();
        let (a, b) = st.corners();
        let cv = st.cut_values();
        assert!(a < 0.0 && b > 0.0);
        assert!((cv.x[0] - a).abs() < 1e-3 && (cv.x[cv.len() - 1] - b).abs() < 1e-3);
    }
}
