//! Generating functions of the moments, the boundary curve and the
//! indefinite integral `Omega`.

use super::{CutDensity, Side};
use crate::error::{Error, Result};
use crate::quadrature::adaptive_c;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::io::Write;
use std::sync::Arc;

/// Fast boundary evaluation from the nodal interpolants.
pub(crate) struct Trace<'a> {
    state: &'a CutDensity,
    d: Arc<TraceData>,
    pub corners: (f64, f64),
}

#[derive(Debug)]
pub(crate) struct TraceData {
    x: Vec<f64>,
    x_t: Vec<f64>,
    q_t: Vec<f64>,
    corners: (f64, f64),
    polygon: Vec<C64>,
}

/// One point of the upper boundary: position, `dz/dt` and height.
#[derive(Debug, Clone, Copy)]
pub(crate) struct TracePoint {
    pub z: C64,
    pub z_t: C64,
    pub y: f64,
}

fn point(st: &CutDensity, d: &TraceData, t: f64) -> TracePoint {
    let g = st.grid_ref();
    if t <= 0.0 || t >= 1.0 {
        let x = if t <= 0.0 { d.corners.0 } else { d.corners.1 };
        return TracePoint { z: C64::new(x, 0.0), z_t: C64::new(0.0, 0.0), y: 0.0 };
    }
    let (s, sc, _) = g.grading(t);
    let w = st.corner_weight(s, sc);
    let q = g.unit.interpolate(st.q(), t);
    let qt = g.unit.interpolate(&d.q_t, t);
    let lw = st.log_weight_dt(t, s, sc);
    let y = w * q;
    let x = g.unit.interpolate(&d.x, t);
    let xt = g.unit.interpolate(&d.x_t, t);
    TracePoint { z: C64::new(x, y), z_t: C64::new(xt, w * (lw * q + qt)), y }
}

impl<'a> Trace<'a> {
    pub fn new(state: &'a CutDensity) -> Self {
        let d = state
            .trace_data()
            .get_or_init(|| {
                let cv = state.cut_values();
                let corners = state.corners();
                let mut d = TraceData { x: cv.x.clone(), x_t: cv.x_t.clone(), q_t: cv.q_t.clone(), corners, polygon: Vec::new() };
                let n = 800;
                let mut poly = vec![C64::new(corners.0, 0.0)];
                poly.extend((1..n).map(|i| point(state, &d, i as f64 / n as f64).z));
                poly.push(C64::new(corners.1, 0.0));
                d.polygon = poly;
                Arc::new(d)
            })
            .clone();
        let corners = d.corners;
        Trace { state, d, corners }
    }

    pub fn at(&self, t: f64) -> TracePoint {
        point(self.state, &self.d, t)
    }

    /// Closest point of the upper boundary to `z`: `(t, distance)`.
    pub fn closest(&self, z: C64) -> (f64, f64) {
        let n = self.d.polygon.len() - 1;
        let (mut best, mut bd) = (0, f64::INFINITY);
        for (i, v) in self.d.polygon.iter().enumerate() {
            let d = (v - z).norm();
            if d < bd {
                best = i;
                bd = d;
            }
        }
        let (mut lo, mut hi) = ((best.max(1) - 1) as f64 / n as f64, ((best + 1).min(n)) as f64 / n as f64);
        let dist = |t: f64| (self.at(t).z - z).norm();
        for _ in 0..80 {
            let m1 = lo + (hi - lo) / 3.0;
            let m2 = hi - (hi - lo) / 3.0;
            if dist(m1) < dist(m2) {
                hi = m2;
            } else {
                lo = m1;
            }
        }
        let t = 0.5 * (lo + hi);
        (t, dist(t))
    }

    /// Whether `z` lies in the open fat slit (above the real axis).
    pub fn contains(&self, z: C64) -> bool {
        if !(z.im > 0.0) {
            return false;
        }
        let (t, d) = self.closest(z);
        if d < 1e-3 * self.state.scale() && t > 1e-3 && t < 1.0 - 1e-3 {
            let b = self.at(t);
            return (b.z_t.conj() * (z - b.z)).im < 0.0;
        }
        // ray casting against the closed polygon (boundary plus base)
        let mut inside = false;
        let pts = &self.d.polygon;
        let n = pts.len();
        for i in 0..n {
            let a = pts[i];
            let b = pts[(i + 1) % n];
            if (a.im > z.im) != (b.im > z.im) {
                let x = a.re + (z.im - a.im) / (b.im - a.im) * (b.re - a.re);
                if z.re < x {
                    inside = !inside;
                }
            }
        }
        inside
    }

    /// Whether `z` lies in the doubled domain `D`.
    pub fn in_domain(&self, z: C64) -> bool {
        if z.im == 0.0 {
            return z.re > self.corners.0 && z.re < self.corners.1;
        }
        self.contains(if z.im > 0.0 { z } else { z.conj() })
    }

    /// `int_gamma y dxi / (xi - z)` along gamma from right to left.
    pub fn cauchy_upper(&self, z: C64) -> C64 {
        let scale = self.state.scale();
        let tol = 1e-14 * scale;
        let (t0, d) = self.closest(z);
        if d > 0.05 * scale || t0 <= 1e-6 || t0 >= 1.0 - 1e-6 {
            let mut f = |t: f64| {
                let b = self.at(t);
                b.y * b.z_t / (b.z - z)
            };
            return -adaptive_c(&mut f, 0.0, 1.0, tol, 600);
        }
        let y0 = self.at(t0).y;
        let mut f = |t: f64| {
            let b = self.at(t);
            (b.y - y0) * b.z_t / (b.z - z)
        };
        let rest = -(adaptive_c(&mut f, 0.0, t0, tol, 600) + adaptive_c(&mut f, t0, 1.0, tol, 600));
        let (xm, xp) = (C64::new(self.corners.0, 0.0), C64::new(self.corners.1, 0.0));
        let inside = if self.contains(z) { 1.0 } else { 0.0 };
        let turn = 2.0 * PI * inside - ((xp - z) / (xm - z)).arg();
        rest + y0 * C64::new(((xm - z) / (xp - z)).norm().ln(), turn)
    }

    /// `int_gamma y d conj(xi) / (conj(xi) - z)`, gamma from right to left.
    pub fn cauchy_lower(&self, z: C64) -> C64 {
        // the mirror of the upper integral: conj(int y dxi / (xi - conj z))
        self.cauchy_upper(z.conj()).conj()
    }

    /// `M(z)` from the Cauchy representation.
    pub fn generating(&self, z: C64) -> C64 {
        (self.cauchy_upper(z) - self.cauchy_lower(z)) / C64::new(0.0, PI)
    }
}

impl CutDensity {
    /// Whether `z` lies in the open fat slit.
    pub fn contains(&self, z: C64) -> bool {
        !self.is_empty() && Trace::new(self).contains(z)
    }

    /// Whether the corners are ordered and the upper boundary, closed by
    /// the base, is a simple curve (checked on a fine polygon).
    pub fn boundary_is_simple(&self) -> bool {
        if self.is_empty() {
            return true;
        }
        let tr = Trace::new(self);
        if !(tr.corners.0 < tr.corners.1) {
            return false;
        }
        let pts = &tr.d.polygon;
        if pts[1..pts.len() - 1].iter().any(|z| !(z.im > 0.0)) {
            return false;
        }
        let n = pts.len();
        let cross = |a: C64, b: C64, c: C64| ((b - a).conj() * (c - a)).im;
        let hits = |a: C64, b: C64, c: C64, d: C64| {
            let (d1, d2) = (cross(a, b, c), cross(a, b, d));
            let (d3, d4) = (cross(c, d, a), cross(c, d, b));
            d1 * d2 < 0.0 && d3 * d4 < 0.0
        };
        for i in 0..n - 1 {
            for j in i + 2..n - 1 {
                if hits(pts[i], pts[i + 1], pts[j], pts[j + 1]) {
                    return false;
                }
            }
        }
        true
    }
}

/// Generating function `M_+` (inside the doubled domain) or `M_-` (outside).
pub fn moment_generating(state: &CutDensity, z: C64, side: Side) -> Result<C64> {
    if state.is_empty() {
        return Ok(C64::new(0.0, 0.0));
    }
    let tr = Trace::new(state);
    let (t, d) = tr.closest(if z.im >= 0.0 { z } else { z.conj() });
    let _ = t;
    if d < 1e-12 * state.scale() {
        return Err(Error::OnBoundary(format!("{z} lies on the boundary")));
    }
    let inside = tr.in_domain(z);
    match (side, inside) {
        (Side::Inside, false) => Err(Error::OutOfRange(format!("{z} is outside the domain"))),
        (Side::Outside, true) => Err(Error::OutOfRange(format!("{z} is inside the domain"))),
        _ => Ok(tr.generating(z)),
    }
}

/// Boundary samples `(p, x(p), h(p))` with the corner points.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoundaryCurve {
    pub samples: Vec<(f64, f64, f64)>,
    pub x_minus: f64,
    pub x_plus: f64,
}

impl BoundaryCurve {
    /// Samples at the canonical nodes plus both corners, in increasing `p`.
    pub fn from_state(state: &CutDensity) -> Self {
        if state.is_empty() {
            return BoundaryCurve { samples: Vec::new(), x_minus: 0.0, x_plus: 0.0 };
        }
        let cv = state.cut_values();
        let (xm, xp) = state.corners();
        let mut samples = vec![(state.p_minus(), xm, 0.0)];
        samples.extend((0..cv.len()).map(|i| (cv.p[i], cv.x[i], cv.h[i])));
        samples.push((state.p_plus(), xp, 0.0));
        BoundaryCurve { samples, x_minus: xm, x_plus: xp }
    }

    /// Samples in the orientation of gamma (right to left).
    pub fn traverse(&self) -> impl Iterator<Item = &(f64, f64, f64)> {
        self.samples.iter().rev()
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "p,x,h")?;
        for (p, x, h) in &self.samples {
            writeln!(out, "{p:.16e},{x:.16e},{h:.16e}")?;
        }
        Ok(())
    }
}

/// `int y dx` beneath the boundary from the left corner to `z(p + i0)`.
pub fn partial_area(state: &CutDensity, p: f64) -> Result<f64> {
    if state.is_empty() || !(p > state.p_minus() && p < state.p_plus()) {
        return Err(Error::OutOfRange(format!("{p} is not an interior cut point")));
    }
    let tr = Trace::new(state);
    let t0 = state.t_of_p(p);
    let mut f = |t: f64| {
        let b = tr.at(t);
        C64::new(b.y * b.z_t.re, 0.0)
    };
    Ok(adaptive_c(&mut f, 0.0, t0, 1e-15 * state.scale().powi(2), 400).re)
}

/// `Omega(z) = int_0^z M_+ dz + int_z^infinity M_- dz` at the boundary point
/// `z(p + i0)`. The inside path is the segment from the origin, the outside
/// path the vertical ray.
pub fn omega(state: &CutDensity, p: f64) -> Result<C64> {
    if state.is_empty() {
        return Ok(C64::new(0.0, 0.0));
    }
    if !(p > state.p_minus() && p < state.p_plus()) {
        return Err(Error::OutOfRange(format!("{p} is not an interior cut point")));
    }
    let tr = Trace::new(state);
    let zb = tr.at(state.t_of_p(p)).z;
    let (xm, xp) = tr.corners;
    if !(xm < 0.0 && xp > 0.0) {
        return Err(Error::InvalidState("the origin must lie in the base".into()));
    }
    // both paths must stay on their side of the boundary
    for k in 1..64 {
        let s = k as f64 / 64.0;
        if !tr.contains(zb * s) {
            return Err(Error::OutOfRange("inside path crosses the boundary".into()));
        }
        let up = zb + C64::new(0.0, s / (1.0 - s) * state.scale());
        if tr.contains(up) {
            return Err(Error::OutOfRange("outside path crosses the boundary".into()));
        }
    }
    let tol = 1e-12 * state.scale();
    let mut inner = |s: f64| tr.generating(zb * s) * zb;
    let a = adaptive_c(&mut inner, 0.0, 1.0, tol, 300);
    // z = zb + i scale u/(1-u)
    let sc = state.scale();
    let mut outer = |u: f64| {
        let v = 1.0 - u;
        let z = zb + C64::new(0.0, sc * u / v);
        tr.generating(z) * C64::new(0.0, sc / (v * v))
    };
    let b = adaptive_c(&mut outer, 0.0, 1.0, tol, 300);
    Ok(a + b)
}
