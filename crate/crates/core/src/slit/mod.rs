//! The canonical geometric state of a fat slit and the functionals on it.
//!
//! A fat slit is stored through the boundary value of the inverse map on its
//! cut, `h(p) = Im z(p + i0)` for `p_- < p < p_+`, written as
//!
//! ```text
//! h(p) = (p_+ - p)^{beta_+} (p - p_-)^{beta_-} q(s(p))
//! ```
//!
//! with a positive profile `q`. The map itself is the Cauchy transform
//! `z(p) = p + (1/pi) int h(p') dp' / (p' - p)`.
//!
//! The profile is sampled on a graded variable `t in (0, 1)` with
//! `sigma = (p - p_-)/(p_+ - p_-) = t^a / (t^a + (1-t)^b)`. The exponents
//! `a = 1/beta_-`, `b = 1/beta_+` turn the corner power `(p - p_-)^{beta}`
//! into an integer power of `t`, so that the interpolant and the
//! Gauss–Legendre rule in `t` both see smooth data at the corners.

mod generating;
mod map;
mod moments;

pub use generating::{moment_generating, omega, partial_area, BoundaryCurve};
pub(crate) use generating::Trace;
pub use map::{BoundaryPoint, CutValues};
pub use moments::{harmonic_moments, interior_moments, laurent_coefficients, MomentSet};

use crate::error::{Error, Result};
use crate::quadrature::{adaptive_vec, barycentric_row, UnitGrid};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

/// Default number of profile nodes.
pub const DEFAULT_NODES: usize = 64;

/// Which side of the cut (or of the boundary) a value refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Inside,
    Outside,
}

/// Grading exponent `1/beta` for a corner exponent `beta`.
pub fn grading_exponent(beta: f64) -> f64 {
    1.0 / beta
}

/// Node layout shared by all states with the same node count and grading.
#[derive(Debug)]
pub struct SlitGrid {
    pub unit: UnitGrid,
    pub kappa_minus: f64,
    pub kappa_plus: f64,
    /// `sigma(t_i)`, `1 - sigma(t_i)` and `d sigma / dt` at the nodes.
    pub sigma: Vec<f64>,
    pub sigma_c: Vec<f64>,
    pub sigma_t: Vec<f64>,
    /// Principal-value operator `f -> PV int f d sigma' / (sigma' - sigma_i)`.
    pub pv_sigma: Vec<Vec<f64>>,
}

/// `(sigma, 1 - sigma, d sigma/dt)` at `t`.
pub fn grading(kappa_minus: f64, kappa_plus: f64, t: f64) -> (f64, f64, f64) {
    if t <= 0.0 {
        return (0.0, 1.0, 0.0);
    }
    if t >= 1.0 {
        return (1.0, 0.0, 0.0);
    }
    let la = kappa_minus * t.ln();
    let lb = kappa_plus * (1.0 - t).ln();
    // sigma = 1/(1 + e^{lb - la})
    let (sigma, sigma_c) = if la >= lb {
        let e = (lb - la).exp();
        (1.0 / (1.0 + e), e / (1.0 + e))
    } else {
        let e = (la - lb).exp();
        (e / (1.0 + e), 1.0 / (1.0 + e))
    };
    let dt = sigma * sigma_c * (kappa_minus / t + kappa_plus / (1.0 - t));
    (sigma, sigma_c, if dt.is_finite() { dt } else { 0.0 })
}

/// Inverse of [`grading`]: the `t` with `sigma(t) = sigma`, given both
/// `sigma` and `1 - sigma` to avoid cancellation.
pub fn ungrade(kappa_minus: f64, kappa_plus: f64, sigma: f64, sigma_c: f64) -> f64 {
    let target = sigma.ln() - sigma_c.ln();
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let v = kappa_minus * mid.ln() - kappa_plus * (1.0 - mid).ln();
        if v < target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-17 * mid.max(1e-300) {
            break;
        }
    }
    0.5 * (lo + hi)
}

impl SlitGrid {
    fn build(m: usize, kappa_minus: f64, kappa_plus: f64) -> Self {
        let unit = UnitGrid::new(m);
        let mut sigma = Vec::with_capacity(m);
        let mut sigma_c = Vec::with_capacity(m);
        let mut sigma_t = Vec::with_capacity(m);
        for &t in &unit.t {
            let (s, sc, st) = grading(kappa_minus, kappa_plus, t);
            sigma.push(s);
            sigma_c.push(sc);
            sigma_t.push(st);
        }
        let mut grid = SlitGrid { unit, kappa_minus, kappa_plus, sigma, sigma_c, sigma_t, pv_sigma: Vec::new() };
        grid.pv_sigma = (0..m).into_par_iter().map(|i| grid.pv_row(grid.unit.t[i])).collect();
        grid
    }

    /// Row `R_j = PV int_0^1 l_j(t') sigma'(t') / (sigma(t') - sigma(t)) dt'`
    /// for the Lagrange basis `l_j` of the nodes, so that `R f` approximates
    /// `PV int f d sigma' / (sigma' - sigma)`. The equation
    /// `sigma(t') = sigma(t)` has complex roots at distance of order `t` from
    /// the real axis, so the remainder after subtracting `l_j(t)` is
    /// integrated adaptively rather than with the nodal rule.
    pub fn pv_row(&self, t: f64) -> Vec<f64> {
        let m = self.len();
        let (s, sc, _) = self.grading(t);
        let at = barycentric_row(&self.unit.t, &self.unit.bary, t);
        let mut f = |tp: f64, out: &mut [f64]| {
            let (sp, spc, spt) = self.grading(tp);
            let d = sigma_diff(sp, spc, s, sc);
            let k = if d == 0.0 { 0.0 } else { spt / d };
            let row = barycentric_row(&self.unit.t, &self.unit.bary, tp);
            for j in 0..m {
                out[j] = (row[j] - at[j]) * k;
            }
        };
        let left = adaptive_vec(&mut f, m, 0.0, t, 1e-15, 1e-14, 2000);
        let right = adaptive_vec(&mut f, m, t, 1.0, 1e-15, 1e-14, 2000);
        let log_term = (sc / s).ln();
        (0..m).map(|j| left[j] + right[j] + at[j] * log_term).collect()
    }

    /// Shared grid for `m` nodes and the given corner exponents.
    pub fn shared(m: usize, beta_minus: f64, beta_plus: f64) -> Arc<SlitGrid> {
        static CACHE: OnceLock<Mutex<HashMap<(usize, u64, u64), Arc<SlitGrid>>>> = OnceLock::new();
        let km = grading_exponent(beta_minus);
        let kp = grading_exponent(beta_plus);
        let key = (m, km.to_bits(), kp.to_bits());
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        if let Some(g) = cache.lock().unwrap().get(&key) {
            return g.clone();
        }
        let g = Arc::new(SlitGrid::build(m, km, kp));
        cache.lock().unwrap().entry(key).or_insert(g).clone()
    }

    pub fn len(&self) -> usize {
        self.unit.len()
    }

    pub fn is_empty(&self) -> bool {
        self.unit.is_empty()
    }

    pub fn grading(&self, t: f64) -> (f64, f64, f64) {
        grading(self.kappa_minus, self.kappa_plus, t)
    }

    pub fn apply_pv(&self, f: &[f64]) -> Vec<f64> {
        self.pv_sigma
            .iter()
            .map(|row| row.iter().zip(f).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// `PV int f d sigma' / (sigma' - sigma(t))` at an arbitrary `t`.
    pub fn pv_sigma_at(&self, g: &[f64], t: f64) -> f64 {
        if let Some(i) = self.unit.t.iter().position(|&ti| ti == t) {
            return self.pv_sigma[i].iter().zip(g).map(|(a, b)| a * b).sum();
        }
        self.pv_row(t).iter().zip(g).map(|(a, b)| a * b).sum()
    }
}

/// `sigma_a - sigma_b`, using whichever representation keeps digits.
pub(crate) fn sigma_diff(sa: f64, sa_c: f64, sb: f64, sb_c: f64) -> f64 {
    if sa > 0.5 && sb > 0.5 {
        sb_c - sa_c
    } else {
        sa - sb
    }
}

/// Cut density of a fat slit (see the module docs). The empty state, with
/// no cut at all, represents the identity map.
#[derive(Debug, Clone)]
pub struct CutDensity {
    p_minus: f64,
    p_plus: f64,
    beta_minus: f64,
    beta_plus: f64,
    q: Vec<f64>,
    grid: Option<Arc<SlitGrid>>,
    cache: OnceLock<Arc<CutValues>>,
    trace: OnceLock<Arc<generating::TraceData>>,
}

impl CutDensity {
    pub fn empty() -> Self {
        CutDensity {
            p_minus: 0.0,
            p_plus: 0.0,
            beta_minus: 0.5,
            beta_plus: 0.5,
            q: Vec::new(),
            grid: None,
            cache: OnceLock::new(),
            trace: OnceLock::new(),
        }
    }

    /// Build from profile values at the canonical nodes.
    pub fn from_nodal(p_minus: f64, p_plus: f64, beta_minus: f64, beta_plus: f64, q: Vec<f64>) -> Result<Self> {
        if !(p_minus < p_plus) || !p_minus.is_finite() || !p_plus.is_finite() {
            return Err(Error::InvalidState(format!("cut endpoints must satisfy p_- < p_+ (got {p_minus}, {p_plus})")));
        }
        for (name, b) in [("beta_minus", beta_minus), ("beta_plus", beta_plus)] {
            if !(b > 0.0 && b <= 0.5) {
                return Err(Error::InvalidState(format!("{name} = {b} outside (0, 1/2]")));
            }
        }
        if q.len() < 4 {
            return Err(Error::InvalidState("profile needs at least 4 nodes".into()));
        }
        if let Some((i, v)) = q.iter().enumerate().find(|(_, v)| !(**v > 0.0) || !v.is_finite()) {
            return Err(Error::InvalidState(format!("profile value q[{i}] = {v} is not positive")));
        }
        let grid = SlitGrid::shared(q.len(), beta_minus, beta_plus);
        Ok(CutDensity {
            p_minus,
            p_plus,
            beta_minus,
            beta_plus,
            q,
            grid: Some(grid),
            cache: OnceLock::new(),
            trace: OnceLock::new(),
        })
    }

    /// Build by sampling a profile `q(s)` on the rescaled cut `s in (-1, 1)`.
    pub fn from_profile<F: Fn(f64) -> f64>(
        p_minus: f64,
        p_plus: f64,
        beta_minus: f64,
        beta_plus: f64,
        m: usize,
        profile: F,
    ) -> Result<Self> {
        let grid = SlitGrid::shared(m, beta_minus, beta_plus);
        let q = grid.sigma.iter().zip(&grid.sigma_c).map(|(s, sc)| profile(s - sc)).collect();
        Self::from_nodal(p_minus, p_plus, beta_minus, beta_plus, q)
    }

    /// Build from profile samples at arbitrary nodes `s_j` of the rescaled
    /// cut; they are resampled onto the canonical nodes by polynomial
    /// interpolation in `s`.
    pub fn from_samples(
        p_minus: f64,
        p_plus: f64,
        beta_minus: f64,
        beta_plus: f64,
        nodes: &[f64],
        q: &[f64],
        m: usize,
    ) -> Result<Self> {
        if nodes.len() != q.len() || nodes.is_empty() {
            return Err(Error::InvalidState("nodes and q must have equal nonzero length".into()));
        }
        let grid = SlitGrid::shared(m, beta_minus, beta_plus);
        let canonical: Vec<f64> = grid.sigma.iter().zip(&grid.sigma_c).map(|(s, sc)| s - sc).collect();
        if nodes.len() == m && nodes.iter().zip(&canonical).all(|(a, b)| (a - b).abs() <= 1e-12) {
            return Self::from_nodal(p_minus, p_plus, beta_minus, beta_plus, q.to_vec());
        }
        if nodes.iter().any(|s| !(s.abs() < 1.0)) {
            return Err(Error::InvalidState("profile nodes must lie in (-1, 1)".into()));
        }
        let mut bw = vec![1.0; nodes.len()];
        for j in 0..nodes.len() {
            for k in 0..nodes.len() {
                if j != k {
                    bw[j] /= nodes[j] - nodes[k];
                }
            }
        }
        let norm = bw.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        bw.iter_mut().for_each(|v| *v /= norm);
        let resampled = canonical.iter().map(|&s| crate::quadrature::barycentric_eval(nodes, &bw, q, s)).collect();
        Self::from_nodal(p_minus, p_plus, beta_minus, beta_plus, resampled)
    }

    /// Half disk of radius `r`: `h(p) = sqrt(4r^2 - p^2)/2` on `[-2r, 2r]`.
    pub fn half_disk(r: f64, m: usize) -> Result<Self> {
        if !(r > 0.0) {
            return Err(Error::InvalidState(format!("radius must be positive, got {r}")));
        }
        Self::from_profile(-2.0 * r, 2.0 * r, 0.5, 0.5, m, |_| 0.5)
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_none()
    }

    pub fn p_minus(&self) -> f64 {
        self.p_minus
    }

    pub fn p_plus(&self) -> f64 {
        self.p_plus
    }

    pub fn beta_minus(&self) -> f64 {
        self.beta_minus
    }

    pub fn beta_plus(&self) -> f64 {
        self.beta_plus
    }

    /// Cut length `p_+ - p_-`.
    pub fn length(&self) -> f64 {
        self.p_plus - self.p_minus
    }

    pub fn node_count(&self) -> usize {
        self.q.len()
    }

    /// Profile values at the canonical nodes.
    pub fn q(&self) -> &[f64] {
        &self.q
    }

    pub fn grid(&self) -> Option<&Arc<SlitGrid>> {
        self.grid.as_ref()
    }

    pub(crate) fn trace_data(&self) -> &OnceLock<Arc<generating::TraceData>> {
        &self.trace
    }

    pub(crate) fn grid_ref(&self) -> &SlitGrid {
        self.grid.as_ref().expect("empty state has no grid")
    }

    /// Rescaled cut coordinates `s_i` of the canonical nodes.
    pub fn nodes_s(&self) -> Vec<f64> {
        match &self.grid {
            None => Vec::new(),
            Some(g) => g.sigma.iter().zip(&g.sigma_c).map(|(s, sc)| s - sc).collect(),
        }
    }

    /// Cut points `p_i` of the canonical nodes.
    pub fn nodes_p(&self) -> Vec<f64> {
        match &self.grid {
            None => Vec::new(),
            Some(g) => g.sigma.iter().map(|s| self.p_minus + self.length() * s).collect(),
        }
    }

    /// `p(t)` from the graded parameter.
    pub fn p_of(&self, sigma: f64, sigma_c: f64) -> f64 {
        if sigma <= 0.5 {
            self.p_minus + self.length() * sigma
        } else {
            self.p_plus - self.length() * sigma_c
        }
    }

    /// Corner weight `(p_+ - p)^{beta_+} (p - p_-)^{beta_-}` in terms of sigma.
    pub fn corner_weight(&self, sigma: f64, sigma_c: f64) -> f64 {
        let l = self.length();
        (l * sigma_c).powf(self.beta_plus) * (l * sigma).powf(self.beta_minus)
    }

    /// `d ln w / dt` for the corner weight at `t`.
    pub(crate) fn log_weight_dt(&self, t: f64, sigma: f64, sigma_c: f64) -> f64 {
        let g = self.grid_ref();
        (g.kappa_minus / t + g.kappa_plus / (1.0 - t)) * (self.beta_minus * sigma_c - self.beta_plus * sigma)
    }

    /// Graded parameter `t` of a cut point.
    pub fn t_of_p(&self, p: f64) -> f64 {
        let g = self.grid_ref();
        let l = self.length();
        ungrade(g.kappa_minus, g.kappa_plus, (p - self.p_minus) / l, (self.p_plus - p) / l)
    }

    /// Height `h(p)` on the cut; zero outside it.
    pub fn height(&self, p: f64) -> f64 {
        if self.is_empty() || p <= self.p_minus || p >= self.p_plus {
            return 0.0;
        }
        let t = self.t_of_p(p);
        let (s, sc, _) = self.grid_ref().grading(t);
        self.corner_weight(s, sc) * self.grid_ref().unit.interpolate(&self.q, t)
    }

    /// Same endpoints and exponents, new nodal profile.
    pub fn with_profile(&self, p_minus: f64, p_plus: f64, q: Vec<f64>) -> Result<Self> {
        Self::from_nodal(p_minus, p_plus, self.beta_minus, self.beta_plus, q)
    }

    /// Uniform scaling `z -> lambda z` of the fat slit.
    pub fn scaled(&self, lambda: f64) -> Result<Self> {
        if self.is_empty() {
            return Ok(self.clone());
        }
        let f = lambda.powf(1.0 - self.beta_minus - self.beta_plus);
        let q = self.q.iter().map(|v| v * f).collect();
        Self::from_nodal(lambda * self.p_minus, lambda * self.p_plus, self.beta_minus, self.beta_plus, q)
    }

    /// Rough linear size of the fat slit, used to scale probes and steps.
    pub fn scale(&self) -> f64 {
        if self.is_empty() {
            1.0
        } else {
            0.5 * self.length()
        }
    }
}

/// On-disk JSON form of a [`CutDensity`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StateFile {
    pub p_minus: f64,
    pub p_plus: f64,
    pub beta_minus: f64,
    pub beta_plus: f64,
    pub nodes: Vec<f64>,
    pub q: Vec<f64>,
}

impl From<&CutDensity> for StateFile {
    fn from(s: &CutDensity) -> Self {
        StateFile {
            p_minus: s.p_minus,
            p_plus: s.p_plus,
            beta_minus: s.beta_minus,
            beta_plus: s.beta_plus,
            nodes: s.nodes_s(),
            q: s.q.clone(),
        }
    }
}

impl StateFile {
    /// Convert to a state with `m` canonical nodes (the file's own node count
    /// when `m` is `None`).
    pub fn into_state(self, m: Option<usize>) -> Result<CutDensity> {
        if self.q.is_empty() {
            return Ok(CutDensity::empty());
        }
        let m = m.unwrap_or(self.q.len());
        CutDensity::from_samples(self.p_minus, self.p_plus, self.beta_minus, self.beta_plus, &self.nodes, &self.q, m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grading_round_trip() {
        for &(km, kp) in &[(4.0, 4.0), (5.714285714285714, 4.0), (4.0, 10.0)] {
            for &t in &[1e-3, 0.2, 0.5, 0.77, 0.999] {
                let (s, sc, _) = grading(km, kp, t);
                assert!((s + sc - 1.0).abs() < 1e-15);
                let back = ungrade(km, kp, s, sc);
                assert!((back - t).abs() < 1e-13, "{t} {back}");
            }
        }
    }

    #[test]
    fn grading_turns_corner_power_into_integer_power() {
        for beta in [0.25, 0.35, 0.5, 0.1] {
            let k = grading_exponent(beta);
            assert!(k >= 2.0);
            let n = k * beta;
            assert!((n - n.round()).abs() < 1e-12);
        }
    }

    #[test]
    fn half_disk_height() {
        let s = CutDensity::half_disk(1.0, 32).unwrap();
        for p in [-1.9, -0.3, 0.0, 1.2] {
            let expect = (4.0 - p * p as f64).sqrt() / 2.0;
            assert!((s.height(p) - expect).abs() < 1e-13);
        }
        assert_eq!(s.height(2.5), 0.0);
    }

    #[test]
    fn rejects_invalid_states() {
        assert!(CutDensity::from_profile(1.0, -1.0, 0.3, 0.3, 16, |_| 1.0).is_err());
        assert!(CutDensity::from_profile(-1.0, 1.0, 0.6, 0.3, 16, |_| 1.0).is_err());
        assert!(CutDensity::from_profile(-1.0, 1.0, 0.3, 0.3, 16, |s| s).is_err());
    }

    #[test]
    fn resampling_from_foreign_nodes() {
        let nodes: Vec<f64> = (0..40).map(|i| -(std::f64::consts::PI * (i as f64 + 0.5) / 40.0).cos()).collect();
        let q: Vec<f64> = nodes.iter().map(|s| 1.0 + 0.2 * s).collect();
        let st = CutDensity::from_samples(-1.0, 1.5, 0.35, 0.3, &nodes, &q, 24).unwrap();
        for (s, v) in st.nodes_s().iter().zip(st.q()) {
            assert!((v - (1.0 + 0.2 * s)).abs() < 1e-12);
        }
    }

    #[test]
    fn json_round_trip_preserves_state() {
        let st = CutDensity::from_profile(-1.0, 1.5, 0.35, 0.3, 24, |s| 1.0 + 0.2 * s).unwrap();
        let text = serde_json::to_string(&StateFile::from(&st)).unwrap();
        let back: StateFile = serde_json::from_str(&text).unwrap();
        let back = back.into_state(None).unwrap();
        assert_eq!(back.q(), st.q());
        assert_eq!(back.p_plus(), st.p_plus());
    }
}
