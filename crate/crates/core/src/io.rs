//! Run configuration, state files and the CSV/JSON writers.

use crate::error::{Error, Result};
use crate::growth::{density_from_explicit, IntegratorConfig};
use crate::slit::{BoundaryCurve, CutDensity, StateFile};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

/// Where the initial state comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ShapeSpec {
    Halfdisk { radius: f64 },
    Explicit { t: f64 },
    Profile { file: PathBuf },
}

impl ShapeSpec {
    /// Build the state with `m` nodes (profile files keep their own count
    /// unless `m` is given).
    pub fn build(&self, m: Option<usize>) -> Result<CutDensity> {
        match self {
            ShapeSpec::Halfdisk { radius } => CutDensity::half_disk(*radius, m.unwrap_or(64)),
            ShapeSpec::Explicit { t } => density_from_explicit(*t, m.unwrap_or(64)),
            ShapeSpec::Profile { file } => read_state(file, m),
        }
    }

    /// Starting value of the run clock.
    pub fn start_time(&self) -> f64 {
        match self {
            ShapeSpec::Explicit { t } => *t,
            _ => 0.0,
        }
    }
}

/// One leg of a run: flow index and duration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Leg {
    pub k: usize,
    pub dt: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Moments,
    Hadamard,
    String,
    Lax,
    Zs,
    Hirota,
    Tau,
}

impl Suite {
    pub const ALL: [Suite; 7] =
        [Suite::Moments, Suite::Hadamard, Suite::String, Suite::Lax, Suite::Zs, Suite::Hirota, Suite::Tau];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Moments => "moments",
            Suite::Hadamard => "hadamard",
            Suite::String => "string",
            Suite::Lax => "lax",
            Suite::Zs => "zs",
            Suite::Hirota => "hirota",
            Suite::Tau => "tau",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::OutOfRange(format!("unknown suite '{s}'")))
    }
}

fn default_moments() -> usize {
    6
}

fn default_seed() -> u64 {
    0x5EED_F00D
}

fn default_mc_samples() -> u64 {
    10_000_000
}

fn default_snapshot_every() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub shape: ShapeSpec,
    #[serde(default)]
    pub flow: Vec<Leg>,
    #[serde(default)]
    pub integrator: IntegratorConfig,
    pub outputs: PathBuf,
    #[serde(default)]
    pub suites: Vec<Suite>,
    /// Number of moments tracked in the trajectory.
    #[serde(default = "default_moments")]
    pub moments: usize,
    #[serde(default = "default_seed")]
    pub seed: u64,
    /// Sample count of the Monte Carlo check in the tau suite.
    #[serde(default = "default_mc_samples")]
    pub mc_samples: u64,
    /// Boundary snapshot every this many accepted steps.
    #[serde(default = "default_snapshot_every")]
    pub snapshot_every: usize,
    /// Per-check tolerance overrides, keyed like the report entries.
    #[serde(default)]
    pub tolerances: BTreeMap<String, f64>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let cfg: RunConfig = serde_json::from_str(&text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        for (i, leg) in self.flow.iter().enumerate() {
            if !(leg.dt > 0.0) || leg.k == 0 {
                return Err(Error::InvalidState(format!("leg {i}: need k >= 1 and dT > 0")));
            }
        }
        let ic = &self.integrator;
        if !(ic.dt > 0.0) || !(ic.tol > 0.0) {
            return Err(Error::InvalidState("integrator dt and tol must be positive".into()));
        }
        if self.moments == 0 || self.snapshot_every == 0 {
            return Err(Error::InvalidState("moments and snapshot_every must be positive".into()));
        }
        Ok(())
    }
}

/// Read a state file; an empty profile gives the empty state.
pub fn read_state(path: &Path, m: Option<usize>) -> Result<CutDensity> {
    let text = std::fs::read_to_string(path)?;
    let file: StateFile = serde_json::from_str(&text)?;
    file.into_state(m)
}

pub fn write_state(path: &Path, state: &CutDensity) -> Result<()> {
    let text = serde_json::to_string_pretty(&StateFile::from(state))?;
    std::fs::write(path, text + "\n")?;
    Ok(())
}

/// Number with 17 significant digits.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

/// Trajectory CSV `T,p_minus,p_plus,u,T1..TK`.
pub struct TrajectoryWriter<W: Write> {
    out: W,
    k: usize,
}

impl<W: Write> TrajectoryWriter<W> {
    pub fn new(mut out: W, k: usize) -> Result<Self> {
        let mut header = vec!["T".to_string(), "p_minus".into(), "p_plus".into(), "u".into()];
        header.extend((1..=k).map(|j| format!("T{j}")));
        writeln!(out, "{}", header.join(","))?;
        Ok(TrajectoryWriter { out, k })
    }

    /// Moments that cannot be evaluated (the origin on the boundary) are
    /// written as `nan`.
    pub fn row(&mut self, t: f64, state: &CutDensity, moments: Option<&[f64]>, u: f64) -> Result<()> {
        let mut cells = vec![num(t), num(state.p_minus()), num(state.p_plus()), num(u)];
        match moments {
            Some(m) => cells.extend(m.iter().take(self.k).map(|v| num(*v))),
            None => cells.extend(std::iter::repeat_n("nan".to_string(), self.k)),
        }
        writeln!(self.out, "{}", cells.join(","))?;
        Ok(())
    }
}

/// Boundary snapshot CSV `p,x,h`.
pub fn write_boundary(path: &Path, state: &CutDensity) -> Result<()> {
    let file = std::fs::File::create(path)?;
    BoundaryCurve::from_state(state).write_csv(std::io::BufWriter::new(file))?;
    Ok(())
}

/// Run manifest: configuration echo, code version and diagnostics.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub version: String,
    pub config: RunConfig,
    pub accepted_steps: usize,
    pub completed: bool,
    pub error: Option<String>,
    pub diagnostics: BTreeMap<String, serde_json::Value>,
}

impl Manifest {
    pub fn new(config: RunConfig) -> Self {
        Manifest {
            version: env!("CARGO_PKG_VERSION").to_string(),
            config,
            accepted_steps: 0,
            completed: false,
            error: None,
            diagnostics: BTreeMap::new(),
        }
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self)? + "\n")?;
        Ok(())
    }
}
