//! Time stepping of the cut density along the `T_k` flows and the
//! elementary deformations.

mod explicit;
mod residuals;
mod variation;

pub use explicit::{density_from_explicit, explicit_cut, explicit_dz_dt, explicit_solution, explicit_z_prime};
pub use residuals::{
    lax_residual, probe_points, string_residual, string_residual_explicit, string_residual_trajectory,
    string_residual_with, zakharov_shabat_residual,
};

pub use variation::{
    elementary_derivative, hadamard_check, nabla_minus_moments, nabla_minus_moments_exact, HadamardReport,
};

use crate::error::{Error, Result};
use crate::kernel::{pg_velocity, DeformationProfile};
use crate::slit::CutDensity;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Rk4,
    Rk45,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntegratorConfig {
    pub method: Method,
    /// Fixed step for RK4, initial step for RK45.
    pub dt: f64,
    /// Local error tolerance for RK45.
    pub tol: f64,
    pub max_steps: usize,
    pub node_count: usize,
    pub truncation: usize,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig { method: Method::Rk4, dt: 1e-3, tol: 1e-10, max_steps: 100_000, node_count: 64, truncation: 6 }
    }
}

/// What drives the boundary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Drive {
    /// Flow in `T_k` (Darcy for `k = 1`).
    Flow(usize),
    /// Elementary deformation at an exterior point.
    Elementary(C64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub k: usize,
    pub dt: f64,
    pub substeps: usize,
    pub error_estimate: f64,
}

/// A state together with its accumulated flow times.
#[derive(Debug, Clone)]
pub struct FlowState {
    pub geometry: CutDensity,
    pub times: Vec<f64>,
    pub step_log: Vec<StepRecord>,
}

impl FlowState {
    pub fn new(geometry: CutDensity, times: Vec<f64>) -> Self {
        FlowState { geometry, times, step_log: Vec::new() }
    }
}

fn profile(state: &CutDensity, drive: Drive) -> Result<DeformationProfile> {
    match drive {
        Drive::Flow(1) => DeformationProfile::darcy(state),
        Drive::Flow(k) => DeformationProfile::faber(state, k),
        Drive::Elementary(c) => DeformationProfile::elementary(state, c),
    }
}

/// Right-hand side for the unknowns `(q_1..q_M, p_-, p_+)`.
pub fn rhs(state: &CutDensity, drive: Drive) -> Result<Vec<f64>> {
    let prof = profile(state, drive)?;
    let v = pg_velocity(state, &prof)?;
    let g = state.grid_ref();
    let cv = state.cut_values();
    let (bm, bp) = (state.beta_minus(), state.beta_plus());
    let l = state.length();
    let (pdm, pdp) = v.p_dot;
    let lrate = (pdp - pdm) / l;
    let q = state.q();
    let m = q.len();
    let mut out = Vec::with_capacity(m + 2);
    for i in 0..m {
        let (s, sc, st) = (g.sigma[i], g.sigma_c[i], g.sigma_t[i]);
        let total = if s <= 0.5 { s * v.a_minus[i] } else { sc * v.a_plus[i] };
        let w = state.corner_weight(s, sc);
        let advect = q[i] * (bm * v.a_minus[i] - bp * v.a_plus[i]) / l + cv.q_t[i] * total / (l * st);
        let normal = cv.x_t[i] / cv.p_t[i] * v.rho[i] / w;
        out.push(advect + normal - (bm + bp) * lrate * q[i]);
    }
    out.push(pdm);
    out.push(pdp);
    Ok(out)
}

fn rebuild(base: &CutDensity, y: &[f64]) -> Result<CutDensity> {
    let m = y.len() - 2;
    if let Some((i, v)) = y[..m].iter().enumerate().find(|(_, v)| !(**v > 0.0)) {
        return Err(Error::StepRejected(format!("profile value q[{i}] = {v} is not positive")));
    }
    base.with_profile(y[m], y[m + 1], y[..m].to_vec()).map_err(|e| Error::StepRejected(e.to_string()))
}

fn pack(state: &CutDensity) -> Vec<f64> {
    let mut y = state.q().to_vec();
    y.push(state.p_minus());
    y.push(state.p_plus());
    y
}

fn axpy(y: &[f64], a: f64, k: &[f64]) -> Vec<f64> {
    y.iter().zip(k).map(|(y, k)| y + a * k).collect()
}

fn rk4_step(base: &CutDensity, y: &[f64], h: f64, drive: Drive) -> Result<Vec<f64>> {
    let k1 = rhs(&rebuild(base, y)?, drive)?;
    let k2 = rhs(&rebuild(base, &axpy(y, h / 2.0, &k1))?, drive)?;
    let k3 = rhs(&rebuild(base, &axpy(y, h / 2.0, &k2))?, drive)?;
    let k4 = rhs(&rebuild(base, &axpy(y, h, &k3))?, drive)?;
    Ok((0..y.len()).map(|i| y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])).collect())
}

// Dormand-Prince 5(4) tableau
const DP_A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const DP_B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const DP_B4: [f64; 7] =
    [5179.0 / 57600.0, 0.0, 7571.0 / 16695.0, 393.0 / 640.0, -92097.0 / 339200.0, 187.0 / 2100.0, 1.0 / 40.0];

/// One Dormand-Prince step: the fifth-order solution and the scaled error.
fn dp_step(base: &CutDensity, y: &[f64], h: f64, drive: Drive, tol: f64) -> Result<(Vec<f64>, f64)> {
    let mut ks: Vec<Vec<f64>> = Vec::with_capacity(7);
    for (s, row) in DP_A.iter().enumerate() {
        let mut ys = y.to_vec();
        for (j, a) in row.iter().enumerate().take(s) {
            for (v, k) in ys.iter_mut().zip(&ks[j]) {
                *v += h * a * k;
            }
        }
        ks.push(rhs(&rebuild(base, &ys)?, drive)?);
    }
    let mut y5 = y.to_vec();
    let mut err = 0.0f64;
    for i in 0..y.len() {
        let (mut d5, mut d4) = (0.0, 0.0);
        for s in 0..7 {
            d5 += DP_B5[s] * ks[s][i];
            d4 += DP_B4[s] * ks[s][i];
        }
        y5[i] += h * d5;
        err = err.max((h * (d5 - d4)).abs() / (tol * (1.0 + y[i].abs())));
    }
    Ok((y5, err))
}

/// Advance along `drive` by `dt`; internal steps follow the configuration.
pub fn evolve(state: &CutDensity, drive: Drive, dt: f64, cfg: &IntegratorConfig) -> Result<(CutDensity, StepRecord)> {
    let k = match drive {
        Drive::Flow(k) => k,
        Drive::Elementary(_) => 0,
    };
    if state.is_empty() {
        return Err(Error::InvalidState("the empty state cannot be evolved".into()));
    }
    if dt == 0.0 {
        return Ok((state.clone(), StepRecord { k, dt, substeps: 0, error_estimate: 0.0 }));
    }
    if !(cfg.dt > 0.0) || !dt.is_finite() {
        return Err(Error::OutOfRange("time steps must be positive and finite".into()));
    }
    let mut y = pack(state);
    let dir = dt.signum();
    let total = dt.abs();
    let mut done = 0.0;
    let mut steps = 0;
    let mut err_max = 0.0f64;
    match cfg.method {
        Method::Rk4 => {
            let n = (total / cfg.dt - 1e-9).ceil().max(1.0) as usize;
            if n > cfg.max_steps {
                return Err(Error::StepRejected(format!("{n} steps exceed the limit {}", cfg.max_steps)));
            }
            let h = dt / n as f64;
            for _ in 0..n {
                y = rk4_step(state, &y, h, drive)?;
            }
            steps = n;
        }
        Method::Rk45 => {
            let mut h = cfg.dt.min(total);
            while done < total * (1.0 - 1e-14) {
                if steps >= cfg.max_steps {
                    return Err(Error::StepRejected("step limit reached".into()));
                }
                h = h.min(total - done);
                let (y5, err) = dp_step(state, &y, dir * h, drive, cfg.tol)?;
                steps += 1;
                if err <= 1.0 {
                    y = y5;
                    done += h;
                    err_max = err_max.max(err * cfg.tol);
                }
                let fac = if err > 0.0 { 0.9 * err.powf(-0.2) } else { 5.0 };
                h *= fac.clamp(0.2, 5.0);
                if h < 1e-14 * total {
                    return Err(Error::StepRejected("step size underflow".into()));
                }
            }
        }
    }
    let out = rebuild(state, &y)?;
    Ok((out, StepRecord { k, dt, substeps: steps, error_estimate: err_max }))
}

/// Advance a flow state along the `T_k` flow by `dt`.
pub fn step_flow(state: &FlowState, k: usize, dt: f64, cfg: &IntegratorConfig) -> Result<FlowState> {
    if k == 0 {
        return Err(Error::OutOfRange("flow index must be at least 1".into()));
    }
    let (geometry, rec) = evolve(&state.geometry, Drive::Flow(k), dt, cfg)?;
    let mut times = state.times.clone();
    if times.len() < k {
        times.resize(k, 0.0);
    }
    times[k - 1] += dt;
    let mut step_log = state.step_log.clone();
    if dt != 0.0 {
        step_log.push(rec);
    }
    Ok(FlowState { geometry, times, step_log })
}
