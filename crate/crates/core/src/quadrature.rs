//! Gaussian rules, barycentric interpolation and singular-integral weights.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use statrs::function::gamma::ln_gamma;
use std::f64::consts::PI;
use std::sync::OnceLock;

/// Nodes and weights of a quadrature rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct Rule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Rule {
    /// Integrate `f` over `[a, b]` with the rule mapped affinely.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let (c, r) = (0.5 * (a + b), 0.5 * (b - a));
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(x, w)| w * f(c + r * x))
            .sum::<f64>()
            * r
    }

    pub fn integrate_c<F: FnMut(f64) -> C64>(&self, a: f64, b: f64, mut f: F) -> C64 {
        let (c, r) = (0.5 * (a + b), 0.5 * (b - a));
        let mut acc = C64::new(0.0, 0.0);
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            acc += f(c + r * x) * *w;
        }
        acc * r
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// Gauss–Legendre rule with `n` points, nodes ascending.
pub fn gauss_legendre(n: usize) -> Rule {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre_with_derivative(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, dp) = legendre_with_derivative(n, x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    Rule { nodes, weights }
}

fn jacobi_with_derivative(n: usize, a: f64, b: f64, x: f64) -> (f64, f64) {
    if n == 0 {
        return (1.0, 0.0);
    }
    let mut p0 = 1.0;
    let mut p1 = 0.5 * (a - b + (a + b + 2.0) * x);
    for k in 2..=n {
        let kf = k as f64;
        let c = 2.0 * kf + a + b;
        let a1 = 2.0 * kf * (kf + a + b) * (c - 2.0);
        let a2 = (c - 1.0) * (a * a - b * b);
        let a3 = (c - 2.0) * (c - 1.0) * c;
        let a4 = 2.0 * (kf + a - 1.0) * (kf + b - 1.0) * c;
        let p2 = ((a2 + a3 * x) * p1 - a4 * p0) / a1;
        p0 = p1;
        p1 = p2;
    }
    // (2n+a+b)(1-x^2) P'_n = n(a-b-(2n+a+b)x) P_n + 2(n+a)(n+b) P_{n-1}
    let nf = n as f64;
    let c = 2.0 * nf + a + b;
    let dp = (nf * (a - b - c * x) * p1 + 2.0 * (nf + a) * (nf + b) * p0) / (c * (1.0 - x * x));
    (p1, dp)
}

/// Gauss–Jacobi rule for the weight `(1-x)^a (1+x)^b`, `a, b > -1`.
///
/// Nodes come from the Golub–Welsch eigenproblem and are then polished by
/// Newton steps on the three-term recurrence; weights use the closed form.
pub fn gauss_jacobi(n: usize, a: f64, b: f64) -> Rule {
    assert!(n >= 1 && a > -1.0 && b > -1.0);
    let mut jac = DMatrix::<f64>::zeros(n, n);
    for k in 0..n {
        let kf = k as f64;
        let c = 2.0 * kf + a + b;
        let diag = if k == 0 {
            (b - a) / (a + b + 2.0)
        } else {
            (b * b - a * a) / (c * (c + 2.0))
        };
        jac[(k, k)] = diag;
        if k + 1 < n {
            let k1 = kf + 1.0;
            let c1 = 2.0 * k1 + a + b;
            let off = (4.0 * k1 * (k1 + a) * (k1 + b) * (k1 + a + b) / (c1 * c1 * (c1 + 1.0) * (c1 - 1.0)))
                .sqrt();
            jac[(k, k + 1)] = off;
            jac[(k + 1, k)] = off;
        }
    }
    let eig = jac.symmetric_eigen();
    let mut nodes: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    nodes.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let nf = n as f64;
    let log_c = (a + b + 1.0) * 2f64.ln() + ln_gamma(nf + a + 1.0) + ln_gamma(nf + b + 1.0)
        - ln_gamma(nf + a + b + 1.0)
        - ln_gamma(nf + 1.0);
    let mut weights = Vec::with_capacity(n);
    for x in nodes.iter_mut() {
        for _ in 0..3 {
            let (p, dp) = jacobi_with_derivative(n, a, b, *x);
            let dx = p / dp;
            if dx.is_finite() && dx.abs() < 1e-6 {
                *x -= dx;
            }
        }
        let (_, dp) = jacobi_with_derivative(n, a, b, *x);
        weights.push(log_c.exp() / ((1.0 - *x * *x) * dp * dp));
    }
    Rule { nodes, weights }
}

/// Barycentric weights for the Gauss–Legendre nodes of `rule`.
pub fn legendre_barycentric_weights(rule: &Rule) -> Vec<f64> {
    rule.nodes
        .iter()
        .zip(&rule.weights)
        .enumerate()
        .map(|(j, (x, w))| {
            let s = ((1.0 - x * x) * w).sqrt();
            if j % 2 == 0 {
                s
            } else {
                -s
            }
        })
        .collect()
}

/// Evaluate the polynomial interpolant through `(nodes, values)` at `x`.
pub fn barycentric_eval<T>(nodes: &[f64], bw: &[f64], values: &[T], x: f64) -> T
where
    T: Copy + std::ops::Mul<f64, Output = T> + std::ops::Add<Output = T> + std::ops::Div<f64, Output = T>,
{
    let mut num: Option<T> = None;
    let mut den = 0.0;
    for ((xj, wj), vj) in nodes.iter().zip(bw).zip(values) {
        let d = x - xj;
        if d == 0.0 {
            return *vj;
        }
        let c = wj / d;
        num = Some(match num {
            None => *vj * c,
            Some(acc) => acc + *vj * c,
        });
        den += c;
    }
    num.expect("empty interpolation set") / den
}

/// The interpolation coefficients `l_j(x)` such that `f(x) ~ sum l_j f_j`.
pub fn barycentric_row(nodes: &[f64], bw: &[f64], x: f64) -> Vec<f64> {
    let mut row: Vec<f64> = Vec::with_capacity(nodes.len());
    for (j, xj) in nodes.iter().enumerate() {
        if x == *xj {
            let mut r = vec![0.0; nodes.len()];
            r[j] = 1.0;
            return r;
        }
        row.push(bw[j] / (x - xj));
    }
    let den: f64 = row.iter().sum();
    row.iter_mut().for_each(|r| *r /= den);
    row
}

/// Spectral differentiation matrix on arbitrary nodes with barycentric weights.
pub fn differentiation_matrix(nodes: &[f64], bw: &[f64]) -> Vec<Vec<f64>> {
    let n = nodes.len();
    let mut d = vec![vec![0.0; n]; n];
    for i in 0..n {
        let mut diag = 0.0;
        for j in 0..n {
            if i != j {
                let v = (bw[j] / bw[i]) / (nodes[i] - nodes[j]);
                d[i][j] = v;
                diag -= v;
            }
        }
        d[i][i] = diag;
    }
    d
}

/// A Gauss–Legendre discretization of `[0, 1]` with interpolation data and
/// the principal-value operator for the kernel `1/(t' - t_i)`.
#[derive(Debug, Clone)]
pub struct UnitGrid {
    pub t: Vec<f64>,
    pub w: Vec<f64>,
    pub bary: Vec<f64>,
    /// `d/dt` at the nodes.
    pub diff: Vec<Vec<f64>>,
    /// `(pv * g)_i ~ PV int_0^1 g(t') / (t' - t_i) dt'`, exact for
    /// polynomials of degree below the node count.
    pub pv: Vec<Vec<f64>>,
}

impl UnitGrid {
    pub fn new(m: usize) -> Self {
        let rule = gauss_legendre(m);
        let bary = legendre_barycentric_weights(&rule);
        let t: Vec<f64> = rule.nodes.iter().map(|x| 0.5 * (1.0 + x)).collect();
        let w: Vec<f64> = rule.weights.iter().map(|w| 0.5 * w).collect();
        let diff = differentiation_matrix(&t, &bary);
        let mut pv = vec![vec![0.0; m]; m];
        for i in 0..m {
            let mut s = 0.0;
            for j in 0..m {
                pv[i][j] = w[i] * diff[i][j];
                if j != i {
                    let c = w[j] / (t[j] - t[i]);
                    pv[i][j] += c;
                    s += c;
                }
            }
            pv[i][i] += ((1.0 - t[i]) / t[i]).ln() - s;
        }
        UnitGrid { t, w, bary, diff, pv }
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn interpolate<T>(&self, values: &[T], t: f64) -> T
    where
        T: Copy + std::ops::Mul<f64, Output = T> + std::ops::Add<Output = T> + std::ops::Div<f64, Output = T>,
    {
        barycentric_eval(&self.t, &self.bary, values, t)
    }

    pub fn derivative(&self, values: &[f64]) -> Vec<f64> {
        self.diff
            .iter()
            .map(|row| row.iter().zip(values).map(|(d, v)| d * v).sum())
            .collect()
    }

    /// `PV int_0^1 g(t')/(t' - t) dt'` for an arbitrary target `t` in (0, 1),
    /// given nodal values of `g`.
    pub fn pv_at(&self, g: &[f64], t: f64) -> f64 {
        if let Some(i) = self.t.iter().position(|&ti| ti == t) {
            return self.pv[i].iter().zip(g).map(|(a, b)| a * b).sum();
        }
        let gt = self.interpolate(g, t);
        let mut s = 0.0;
        for j in 0..self.len() {
            s += self.w[j] * (g[j] - gt) / (self.t[j] - t);
        }
        s + gt * ((1.0 - t) / t).ln()
    }
}

static GL16: OnceLock<Rule> = OnceLock::new();

/// The 16-point Gauss–Legendre rule used by the adaptive integrators.
pub fn gl16() -> &'static Rule {
    GL16.get_or_init(|| gauss_legendre(16))
}

struct Panel {
    a: f64,
    b: f64,
    value: Vec<f64>,
    error: f64,
}

fn panel_value<F: FnMut(f64, &mut [f64])>(f: &mut F, a: f64, b: f64, dim: usize, buf: &mut [f64]) -> Vec<f64> {
    let rule = gl16();
    let (c, r) = (0.5 * (a + b), 0.5 * (b - a));
    let mut acc = vec![0.0; dim];
    for (x, w) in rule.nodes.iter().zip(&rule.weights) {
        f(c + r * x, buf);
        for (s, v) in acc.iter_mut().zip(buf.iter()) {
            *s += w * r * v;
        }
    }
    acc
}

/// Globally adaptive integration of a vector-valued integrand with 16-point
/// Gauss–Legendre panels. The panel with the largest error estimate (the
/// max-norm change under bisection) is split until the summed estimate
/// drops below `tol + rel_tol * |sum|` (max norm) or `max_panels` is reached.
pub fn adaptive_vec<F: FnMut(f64, &mut [f64])>(
    f: &mut F,
    dim: usize,
    a: f64,
    b: f64,
    tol: f64,
    rel_tol: f64,
    max_panels: usize,
) -> Vec<f64> {
    let mut buf = vec![0.0; dim];
    let whole = panel_value(f, a, b, dim, &mut buf);
    let mut panels = vec![split_panel(f, a, b, &whole, dim, &mut buf)];
    let mut panels_done: Vec<Panel> = Vec::new();
    let mut sum = panels[0].value.clone();
    loop {
        let total: f64 = panels.iter().map(|p| p.error).sum();
        let size = sum.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if total <= tol + rel_tol * size || panels.len() + panels_done.len() >= max_panels {
            break;
        }
        let (idx, _) = panels
            .iter()
            .enumerate()
            .fold((0, -1.0), |best, (i, p)| if p.error > best.1 { (i, p.error) } else { best });
        let p = panels.swap_remove(idx);
        let m = 0.5 * (p.a + p.b);
        if m <= p.a || m >= p.b {
            panels_done.push(p);
            continue;
        }
        let left = panel_value(f, p.a, m, dim, &mut buf);
        let right = panel_value(f, m, p.b, dim, &mut buf);
        let l = split_panel(f, p.a, m, &left, dim, &mut buf);
        let r = split_panel(f, m, p.b, &right, dim, &mut buf);
        for j in 0..dim {
            sum[j] += l.value[j] + r.value[j] - p.value[j];
        }
        panels.push(l);
        panels.push(r);
    }
    panels.extend(panels_done);
    panels.sort_by(|x, y| x.a.total_cmp(&y.a));
    let mut out = vec![0.0; dim];
    for p in &panels {
        for (o, v) in out.iter_mut().zip(&p.value) {
            *o += v;
        }
    }
    out
}

fn split_panel<F: FnMut(f64, &mut [f64])>(f: &mut F, a: f64, b: f64, whole: &[f64], dim: usize, buf: &mut [f64]) -> Panel {
    let m = 0.5 * (a + b);
    let left = panel_value(f, a, m, dim, buf);
    let right = panel_value(f, m, b, dim, buf);
    let value: Vec<f64> = left.iter().zip(&right).map(|(l, r)| l + r).collect();
    let error = value.iter().zip(whole).map(|(v, w)| (v - w).abs()).fold(0.0, f64::max);
    Panel { a, b, value, error }
}

/// Scalar complex version of [`adaptive_vec`].
pub fn adaptive_c<F: FnMut(f64) -> C64>(f: &mut F, a: f64, b: f64, tol: f64, max_panels: usize) -> C64 {
    let mut g = |x: f64, out: &mut [f64]| {
        let v = f(x);
        out[0] = v.re;
        out[1] = v.im;
    };
    let v = adaptive_vec(&mut g, 2, a, b, tol, 0.0, max_panels);
    C64::new(v[0], v[1])
}

pub fn adaptive<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64, tol: f64, max_panels: usize) -> f64 {
    let mut g = |x: f64, out: &mut [f64]| out[0] = f(x);
    adaptive_vec(&mut g, 1, a, b, tol, 0.0, max_panels)[0]
}
