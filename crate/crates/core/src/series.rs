//! Truncated Laurent series `z(p) = p + sum c_k p^-k` with real coefficients,
//! their powers, Faber polynomials and series reversion.
//!
//! Every operation refuses requests outside the range where the truncation
//! cannot contaminate the result.

use crate::error::{Error, Result};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

/// `z(p) = p + sum_{k=1}^{N} c_k p^{-k}`; `c_1 = -u`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruncatedLaurent {
    coefficients: Vec<f64>,
}

impl TruncatedLaurent {
    pub fn new(coefficients: Vec<f64>) -> Result<Self> {
        if coefficients.is_empty() {
            return Err(Error::OutOfRange("truncation order must be at least 1".into()));
        }
        if let Some(c) = coefficients.iter().find(|c| !c.is_finite()) {
            return Err(Error::InvalidState(format!("non-finite Laurent coefficient {c}")));
        }
        Ok(TruncatedLaurent { coefficients })
    }

    pub fn identity(order: usize) -> Self {
        TruncatedLaurent { coefficients: vec![0.0; order.max(1)] }
    }

    pub fn truncation_order(&self) -> usize {
        self.coefficients.len()
    }

    /// `c_1 .. c_N`.
    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    /// `c_k`, `k >= 1`.
    pub fn coefficient(&self, k: usize) -> f64 {
        self.coefficients[k - 1]
    }

    /// Capacity `u = -c_1`.
    pub fn capacity(&self) -> f64 {
        -self.coefficients[0]
    }

    pub fn eval(&self, p: C64) -> C64 {
        let w = p.inv();
        // Horner in w for sum c_k w^k.
        let mut acc = C64::new(0.0, 0.0);
        for c in self.coefficients.iter().rev() {
            acc = (acc + *c) * w;
        }
        p + acc
    }

    pub fn derivative(&self, p: C64) -> C64 {
        let w = p.inv();
        let mut acc = C64::new(0.0, 0.0);
        for (k, c) in self.coefficients.iter().enumerate().rev() {
            acc = (acc - *c * (k + 1) as f64) * w;
        }
        C64::new(1.0, 0.0) + acc * w
    }

    /// Coefficients of `A(w)` in `z = p A(1/p)`, i.e. `1 + sum c_k w^{k+1}`,
    /// up to `w^{N+1}`.
    fn scaled_series(&self) -> Vec<f64> {
        let n = self.truncation_order();
        let mut a = vec![0.0; n + 2];
        a[0] = 1.0;
        for (k, c) in self.coefficients.iter().enumerate() {
            a[k + 2] = *c;
        }
        a
    }
}

fn mul_trunc(a: &[f64], b: &[f64], len: usize) -> Vec<f64> {
    let mut out = vec![0.0; len];
    for (i, ai) in a.iter().enumerate().take(len) {
        if *ai == 0.0 {
            continue;
        }
        for (j, bj) in b.iter().enumerate().take(len - i) {
            out[i + j] += ai * bj;
        }
    }
    out
}

fn pow_trunc(a: &[f64], k: usize, len: usize) -> Vec<f64> {
    let mut result = vec![0.0; len];
    result[0] = 1.0;
    let mut base = a[..len.min(a.len())].to_vec();
    base.resize(len, 0.0);
    let mut e = k;
    while e > 0 {
        if e & 1 == 1 {
            result = mul_trunc(&result, &base, len);
        }
        e >>= 1;
        if e > 0 {
            base = mul_trunc(&base, &base, len);
        }
    }
    result
}

/// Reciprocal of a power series with unit constant term.
fn recip_trunc(a: &[f64], len: usize) -> Vec<f64> {
    let mut r = vec![0.0; len];
    r[0] = 1.0 / a[0];
    for n in 1..len {
        let mut s = 0.0;
        for k in 1..=n.min(a.len() - 1) {
            s += a[k] * r[n - k];
        }
        r[n] = -s / a[0];
    }
    r
}

/// The coefficients of `z(p)^k` from `p^k` down to `p^{-order}`.
pub fn series_power(map: &TruncatedLaurent, k: usize, order: usize) -> Result<Vec<f64>> {
    if k < 1 {
        return Err(Error::OutOfRange("power k must be at least 1".into()));
    }
    let n = map.truncation_order();
    if order > n || order + k > n + 1 {
        return Err(Error::OutOfRange(format!(
            "order {order} exceeds the reliable range {} for k = {k}, N = {n}",
            (n + 1).saturating_sub(k).min(n)
        )));
    }
    let len = k + order + 1;
    Ok(pow_trunc(&map.scaled_series(), k, len))
}

/// Faber polynomial `B_k(p) = (z^k(p))_{>=0}`, highest degree first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FaberPolynomial {
    coefficients: Vec<f64>,
}

impl FaberPolynomial {
    pub fn degree(&self) -> usize {
        self.coefficients.len() - 1
    }

    /// Coefficients, highest degree first.
    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn eval(&self, p: C64) -> C64 {
        self.coefficients.iter().fold(C64::new(0.0, 0.0), |acc, c| acc * p + *c)
    }

    pub fn eval_real(&self, p: f64) -> f64 {
        self.coefficients.iter().fold(0.0, |acc, c| acc * p + c)
    }

    pub fn derivative(&self, p: C64) -> C64 {
        let d = self.degree();
        self.coefficients[..d]
            .iter()
            .enumerate()
            .fold(C64::new(0.0, 0.0), |acc, (i, c)| acc * p + *c * (d - i) as f64)
    }

    pub fn derivative_real(&self, p: f64) -> f64 {
        self.derivative(C64::new(p, 0.0)).re
    }
}

pub fn faber_polynomial(map: &TruncatedLaurent, k: usize) -> Result<FaberPolynomial> {
    if k < 1 || k > map.truncation_order() {
        return Err(Error::OutOfRange(format!(
            "Faber index {k} outside 1..={}",
            map.truncation_order()
        )));
    }
    let coefficients = series_power(map, k, 0)?;
    Ok(FaberPolynomial { coefficients })
}

/// Coefficients of `w(z) - z` expressed through `A(1/z)`: the residual of
/// composing `map` with the candidate inverse `1 + sum u_k v^{k+1}`.
fn composition_defect(map: &TruncatedLaurent, inv: &[f64], len: usize) -> Vec<f64> {
    // z(p(z)) / z = P + sum c_k v^{k+1} P^{-k}, v = 1/z.
    let recip = recip_trunc(inv, len);
    let mut out: Vec<f64> = inv[..len].to_vec();
    let mut rp = vec![0.0; len];
    rp[0] = 1.0;
    for k in 1..=map.truncation_order() {
        if k + 1 >= len {
            break;
        }
        rp = mul_trunc(&rp, &recip, len);
        let c = map.coefficient(k);
        for j in 0..len - k - 1 {
            out[j + k + 1] += c * rp[j];
        }
    }
    out[0] -= 1.0;
    out
}

/// Invert `z(p) = p + sum c_k p^-k` into `p(z) = z + sum u_k z^-k` up to
/// `z^{-order}`, by fixed-point iteration on the coefficients.
pub fn invert_map(map: &TruncatedLaurent, order: usize) -> Result<TruncatedLaurent> {
    if order < 1 || order > map.truncation_order() {
        return Err(Error::OutOfRange(format!(
            "inversion order {order} outside 1..={}",
            map.truncation_order()
        )));
    }
    let len = order + 2;
    let mut inv = vec![0.0; len];
    inv[0] = 1.0;
    for _ in 0..=order + 1 {
        let recip = recip_trunc(&inv, len);
        let mut next = vec![0.0; len];
        next[0] = 1.0;
        let mut rp = vec![0.0; len];
        rp[0] = 1.0;
        for k in 1..=order {
            rp = mul_trunc(&rp, &recip, len);
            let c = map.coefficient(k);
            for j in 0..len - k - 1 {
                next[j + k + 1] -= c * rp[j];
            }
        }
        let change = next.iter().zip(&inv).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        inv = next;
        let scale = inv.iter().map(|c| c.abs()).fold(1.0, f64::max);
        if change <= 1e-13 * scale {
            let defect = composition_defect(map, &inv, len);
            if defect.iter().all(|d| d.abs() <= 1e-13 * scale) {
                break;
            }
        }
    }
    TruncatedLaurent::new(inv[2..].to_vec())
}

/// Largest residual coefficient of `z(p(z)) - z` through `z^{-order}`.
pub fn inversion_residual(map: &TruncatedLaurent, inverse: &TruncatedLaurent) -> f64 {
    let order = inverse.truncation_order().min(map.truncation_order());
    let len = order + 2;
    let mut inv = inverse.scaled_series();
    inv.resize(len, 0.0);
    composition_defect(map, &inv, len).iter().map(|d| d.abs()).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn half_disk(n: usize) -> TruncatedLaurent {
        // z = (p + sqrt(p^2 - 4))/2 = p - sum Catalan_{m} p^{-2m-1}
        let mut c = vec![0.0; n];
        let mut cat = 1.0;
        for m in 0..n {
            if 2 * m < n {
                c[2 * m] = -cat;
            }
            cat = cat * 2.0 * (2.0 * m as f64 + 1.0) / (m as f64 + 2.0);
        }
        TruncatedLaurent::new(c).unwrap()
    }

    #[test]
    fn power_of_identity() {
        let z = TruncatedLaurent::identity(6);
        let s = series_power(&z, 3, 2).unwrap();
        assert_eq!(s, vec![1.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn square_of_joukowski() {
        let z = TruncatedLaurent::new(vec![-1.0, 0.0, 0.0]).unwrap();
        let s = series_power(&z, 2, 2).unwrap();
        assert_eq!(s, vec![1.0, 0.0, -2.0, 0.0, 1.0]);
    }

    #[test]
    fn cube_collects_by_power() {
        let (u, a2, a3) = (0.7, 0.3, -0.2);
        let z = TruncatedLaurent::new(vec![-u, a2, a3, 0.1]).unwrap();
        let s = series_power(&z, 3, 1).unwrap();
        let expect = [1.0, 0.0, -3.0 * u, 3.0 * a2, 3.0 * a3 + 3.0 * u * u];
        for (a, b) in s.iter().zip(expect) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn power_range_is_enforced() {
        let z = TruncatedLaurent::identity(4);
        assert!(series_power(&z, 0, 1).is_err());
        assert!(series_power(&z, 3, 3).is_err());
        assert!(series_power(&z, 3, 2).is_ok());
    }

    #[test]
    fn first_power_is_the_map() {
        let z = TruncatedLaurent::new(vec![-0.5, 0.25, 0.125]).unwrap();
        let s = series_power(&z, 1, 3).unwrap();
        assert_eq!(s, vec![1.0, 0.0, -0.5, 0.25, 0.125]);
    }

    #[test]
    fn faber_of_half_disk() {
        let z = half_disk(8);
        assert_eq!(faber_polynomial(&z, 1).unwrap().coefficients(), &[1.0, 0.0]);
        assert_eq!(faber_polynomial(&z, 2).unwrap().coefficients(), &[1.0, 0.0, -2.0]);
        assert_eq!(faber_polynomial(&z, 3).unwrap().coefficients(), &[1.0, 0.0, -3.0, 0.0]);
        assert!(faber_polynomial(&z, 9).is_err());
    }

    #[test]
    fn joukowski_inverse() {
        let z = half_disk(16);
        let p = invert_map(&z, 16).unwrap();
        assert!((p.coefficient(1) - 1.0).abs() < 1e-14);
        for k in 2..=16 {
            assert!(p.coefficient(k).abs() < 1e-12, "u_{k} = {}", p.coefficient(k));
        }
        assert_eq!(invert_map(&TruncatedLaurent::identity(5), 5).unwrap(), TruncatedLaurent::identity(5));
    }

    #[test]
    fn inverse_series_evaluates_consistently() {
        let z = TruncatedLaurent::new(vec![-0.8, 0.2, -0.1, 0.05, 0.02, -0.01]).unwrap();
        let p = invert_map(&z, 6).unwrap();
        let w = C64::new(3.0, 4.0);
        let back = z.eval(p.eval(w));
        // error is O(|w|^-7)
        assert!((back - w).norm() < 1e-4);
        let d = C64::new(1e-6, 0.0);
        let num = (z.eval(w + d) - z.eval(w - d)) / (2.0 * 1e-6);
        assert!((num - z.derivative(w)).norm() < 1e-8);
    }
}
