//! Monte Carlo estimate of `F^-` by rejection sampling of `B`.

use crate::error::{Error, Result};
use crate::slit::{CutDensity, Trace};
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloEstimate {
    pub value: f64,
    pub std_error: f64,
    pub samples: u64,
    pub seed: u64,
}

/// Closed polygon (upper boundary plus base) with edges bucketed by height.
struct Polygon {
    pts: Vec<C64>,
    bins: Vec<Vec<usize>>,
    ymax: f64,
}

impl Polygon {
    fn new(state: &CutDensity, n: usize, nbins: usize) -> Self {
        let tr = Trace::new(state);
        let mut pts = vec![C64::new(tr.corners.0, 0.0)];
        pts.extend((1..n).map(|i| tr.at(i as f64 / n as f64).z));
        pts.push(C64::new(tr.corners.1, 0.0));
        let ymax = pts.iter().fold(0.0f64, |m, z| m.max(z.im));
        let mut bins = vec![Vec::new(); nbins];
        let m = pts.len();
        for i in 0..m {
            let (a, b) = (pts[i], pts[(i + 1) % m]);
            if a.im == b.im {
                continue;
            }
            let lo = ((a.im.min(b.im) / ymax * nbins as f64).floor() as usize).min(nbins - 1);
            let hi = ((a.im.max(b.im) / ymax * nbins as f64).floor() as usize).min(nbins - 1);
            for bin in &mut bins[lo..=hi] {
                bin.push(i);
            }
        }
        Polygon { pts, bins, ymax }
    }

    fn area(&self) -> f64 {
        let m = self.pts.len();
        -0.5 * (0..m).map(|i| (self.pts[i].conj() * self.pts[(i + 1) % m]).im).sum::<f64>()
    }

    fn contains(&self, z: C64) -> bool {
        if !(z.im > 0.0 && z.im < self.ymax) {
            return false;
        }
        let nb = self.bins.len();
        let bin = ((z.im / self.ymax * nb as f64) as usize).min(nb - 1);
        let m = self.pts.len();
        let mut inside = false;
        for &i in &self.bins[bin] {
            let (a, b) = (self.pts[i], self.pts[(i + 1) % m]);
            if (a.im > z.im) != (b.im > z.im) {
                let x = a.re + (z.im - a.im) / (b.im - a.im) * (b.re - a.re);
                if z.re < x {
                    inside = !inside;
                }
            }
        }
        inside
    }
}

/// `F^- = -(A^2/pi^2) E[log|(z - w)/(z - conj w)|]` for independent uniform
/// points of `B`. Fails when the relative standard error exceeds `rel_tol`.
pub fn tau_monte_carlo(state: &CutDensity, samples: u64, seed: u64, rel_tol: f64) -> Result<MonteCarloEstimate> {
    if state.is_empty() {
        return Ok(MonteCarloEstimate { value: 0.0, std_error: 0.0, samples, seed });
    }
    if samples < 2 {
        return Err(Error::OutOfRange("need at least two samples".into()));
    }
    let poly = Polygon::new(state, 8192, 2048);
    let xmin = poly.pts.iter().fold(f64::INFINITY, |m, z| m.min(z.re));
    let xmax = poly.pts.iter().fold(f64::NEG_INFINITY, |m, z| m.max(z.re));
    let streams = 256u64;
    let per = samples / streams;
    let extra = samples % streams;
    let sums: Vec<(f64, f64)> = (0..streams)
        .into_par_iter()
        .map(|s| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(s);
            let mut draw = || loop {
                let z = C64::new(rng.gen_range(xmin..xmax), rng.gen_range(0.0..poly.ymax));
                if poly.contains(z) {
                    return z;
                }
            };
            let n = per + u64::from(s < extra);
            let (mut a, mut b) = (0.0, 0.0);
            for _ in 0..n {
                let (z, w) = (draw(), draw());
                let k = ((z - w) / (z - w.conj())).norm().ln();
                a += k;
                b += k * k;
            }
            (a, b)
        })
        .collect();
    let (s1, s2) = sums.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
    let n = samples as f64;
    let mean = s1 / n;
    let var = (s2 / n - mean * mean).max(0.0) * n / (n - 1.0);
    let a = poly.area();
    let factor = -a * a / (PI * PI);
    let value = factor * mean;
    let std_error = factor.abs() * (var / n).sqrt();
    if std_error > rel_tol * value.abs() {
        return Err(Error::Quadrature(format!("relative standard error {:.3e} exceeds {rel_tol:.1e}", std_error / value.abs())));
    }
    Ok(MonteCarloEstimate { value, std_error, samples, seed })
}
