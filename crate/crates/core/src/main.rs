use clap::{Args, Parser, Subcommand};
use fatslit::growth::{evolve, explicit_cut, Drive};
use fatslit::io::{num, write_boundary, write_state, Manifest, RunConfig, ShapeSpec, Suite, TrajectoryWriter};
use fatslit::slit::{harmonic_moments, interior_moments, laurent_coefficients};
use fatslit::suites::{run_suite, SuiteContext, SuiteReport};
use fatslit::{CutDensity, Error, IntegratorConfig, Result};
use serde_json::{json, Value};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "fatslit", version, about = "Fat slits: moments, growth and dKP flows")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Print harmonic moments, interior moments and the capacity.
    Moments {
        #[command(flatten)]
        shape: ShapeArgs,
        #[arg(short = 'K', default_value_t = 6)]
        k: usize,
        /// Also write the table as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Run the flow legs of a configuration.
    Evolve {
        config: PathBuf,
        /// Override the output directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run verification suites and write a JSON report.
    Verify {
        config: Option<PathBuf>,
        #[arg(long = "suite", value_parser = parse_suite)]
        suites: Vec<Suite>,
        #[command(flatten)]
        shape: ShapeArgs,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        mc_samples: Option<u64>,
        /// Report path; stdout when absent.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Write the state JSON and boundary CSV of a shape.
    Export {
        #[command(flatten)]
        shape: ShapeArgs,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct ShapeArgs {
    /// halfdisk, explicit or profile.
    #[arg(long)]
    shape: Option<String>,
    #[arg(long)]
    radius: Option<f64>,
    #[arg(long = "T")]
    t: Option<f64>,
    #[arg(long)]
    file: Option<PathBuf>,
    /// Number of quadrature nodes.
    #[arg(long)]
    nodes: Option<usize>,
}

impl ShapeArgs {
    fn spec(&self) -> Result<Option<ShapeSpec>> {
        let Some(kind) = self.shape.as_deref() else { return Ok(None) };
        let spec = match kind {
            "halfdisk" => ShapeSpec::Halfdisk { radius: self.radius.unwrap_or(1.0) },
            "explicit" => ShapeSpec::Explicit {
                t: self.t.ok_or_else(|| Error::OutOfRange("--shape explicit needs --T".into()))?,
            },
            "profile" => ShapeSpec::Profile {
                file: self.file.clone().ok_or_else(|| Error::OutOfRange("--shape profile needs --file".into()))?,
            },
            other => return Err(Error::OutOfRange(format!("unknown shape '{other}'"))),
        };
        Ok(Some(spec))
    }

    fn required(&self) -> Result<ShapeSpec> {
        self.spec()?.ok_or_else(|| Error::OutOfRange("a --shape is required".into()))
    }
}

fn parse_suite(s: &str) -> std::result::Result<Suite, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn set_threads() {
    if let Some(n) = std::env::var("FATSLIT_THREADS").ok().and_then(|v| v.trim().parse::<usize>().ok()) {
        if n > 0 {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
}

fn main() -> ExitCode {
    set_threads();
    let cli = Cli::parse();
    let code = match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    };
    ExitCode::from(code as u8)
}

fn run(cli: Cli) -> Result<i32> {
    match cli.cmd {
        Cmd::Moments { shape, k, csv } => cmd_moments(&shape, k, csv.as_deref()),
        Cmd::Evolve { config, out } => {
            let mut cfg = RunConfig::load(&config)?;
            if let Some(out) = out {
                cfg.outputs = out;
            }
            cmd_evolve(cfg)
        }
        Cmd::Verify { config, suites, shape, seed, mc_samples, report } => {
            cmd_verify(config.as_deref(), suites, &shape, seed, mc_samples, report.as_deref())
        }
        Cmd::Export { shape, out } => {
            let state = shape.required()?.build(shape.nodes)?;
            std::fs::create_dir_all(&out)?;
            write_state(&out.join("state.json"), &state)?;
            if !state.is_empty() {
                write_boundary(&out.join("boundary.csv"), &state)?;
            }
            Ok(0)
        }
    }
}

fn cmd_moments(shape: &ShapeArgs, k: usize, csv: Option<&Path>) -> Result<i32> {
    if k == 0 {
        return Err(Error::OutOfRange("K must be at least 1".into()));
    }
    let state = shape.required()?.build(shape.nodes)?;
    let t = match harmonic_moments(&state, k) {
        Ok(t) => Some(t),
        Err(Error::Quadrature(msg)) if msg.contains("origin") => {
            eprintln!("note: {msg}; harmonic moments are not defined");
            None
        }
        Err(e) => return Err(e),
    };
    let v = interior_moments(&state, k)?;
    let u = if state.is_empty() { 0.0 } else { laurent_coefficients(&state, 1)?.capacity() };
    let mut table = String::from("k,T_k,V_k\n");
    for j in 0..k {
        let tj = t.as_ref().map_or("nan".to_string(), |t| num(t[j]));
        table += &format!("{},{},{}\n", j + 1, tj, num(v[j]));
    }
    print!("{table}");
    println!("u,{}", num(u));
    if let Some(path) = csv {
        std::fs::write(path, format!("{table}u,{}\n", num(u)))?;
    }
    Ok(0)
}

fn moments_or_none(state: &CutDensity, k: usize) -> Option<Vec<f64>> {
    harmonic_moments(state, k).ok()
}

fn summary(state: &CutDensity, k: usize) -> Result<Value> {
    let u = laurent_coefficients(state, 1)?.capacity();
    Ok(json!({
        "p_minus": state.p_minus(),
        "p_plus": state.p_plus(),
        "u": u,
        "T": moments_or_none(state, k),
    }))
}

/// Shape describing the state at the end of a run, for the suites.
fn final_shape(cfg: &RunConfig, state_path: &Path) -> ShapeSpec {
    match cfg.shape {
        ShapeSpec::Explicit { t } if cfg.flow.iter().all(|l| l.k == 1) => {
            ShapeSpec::Explicit { t: t + cfg.flow.iter().map(|l| l.dt).sum::<f64>() }
        }
        _ if !cfg.flow.is_empty() => ShapeSpec::Profile { file: state_path.to_path_buf() },
        _ => cfg.shape.clone(),
    }
}

fn suite_context(shape: ShapeSpec, state: CutDensity, cfg: &RunConfig) -> SuiteContext {
    let mut ctx = SuiteContext::new(shape, state, cfg.integrator.clone());
    ctx.seed = cfg.seed;
    ctx.mc_samples = cfg.mc_samples;
    ctx.tolerances = cfg.tolerances.clone();
    ctx
}

/// Sup distance between the computed cut and the explicit solution at `t`.
fn explicit_errors(state: &CutDensity, t: f64) -> Result<Value> {
    let cv = state.cut_values();
    let mut curve = 0.0f64;
    for i in 0..cv.len() {
        curve = curve.max((cv.z(i) - explicit_cut(t, cv.sigma[i], cv.sigma_c[i])?).norm());
    }
    let u = laurent_coefficients(state, 1)?.capacity();
    Ok(json!({
        "T": t,
        "curve_error": curve,
        "p_minus_error": (state.p_minus() + 2.0 * t).abs(),
        "p_plus_error": (state.p_plus() - 2.0 * t).abs(),
        "u_relative_error": (u - 1.5 * t * t).abs() / (1.5 * t * t),
    }))
}

fn cmd_evolve(cfg: RunConfig) -> Result<i32> {
    let out = cfg.outputs.clone();
    let snaps = out.join("snapshots");
    std::fs::create_dir_all(&snaps)?;
    let ic = cfg.integrator.clone();
    let k = cfg.moments;
    let mut manifest = Manifest::new(cfg.clone());
    let initial = cfg.shape.build(Some(ic.node_count))?;
    if initial.is_empty() {
        if !cfg.flow.is_empty() {
            return Err(Error::InvalidState("the empty state cannot be evolved".into()));
        }
    } else {
        manifest.diagnostics.insert("initial".into(), summary(&initial, k)?);
    }
    let file = std::fs::File::create(out.join("trajectory.csv"))?;
    let mut traj = TrajectoryWriter::new(std::io::BufWriter::new(file), k)?;
    let mut leg_start = cfg.shape.start_time();
    let mut state = initial.clone();
    let u_of = |s: &CutDensity| -> Result<f64> {
        if s.is_empty() {
            Ok(0.0)
        } else {
            Ok(laurent_coefficients(s, 1)?.capacity())
        }
    };
    traj.row(leg_start, &state, moments_or_none(&state, k).as_deref(), u_of(&state)?)?;
    if !state.is_empty() {
        write_boundary(&snaps.join("step_000000.csv"), &state)?;
    }
    let mut expected = vec![0.0; k];
    let mut steps = 0usize;
    for leg in &cfg.flow {
        let n = (leg.dt / ic.dt - 1e-9).ceil().max(1.0) as usize;
        let h = leg.dt / n as f64;
        for i in 0..n {
            match evolve(&state, Drive::Flow(leg.k), h, &ic) {
                Ok((next, _)) => state = next,
                Err(e) => {
                    drop(traj);
                    write_state(&out.join("last_good_state.json"), &state)?;
                    manifest.accepted_steps = steps;
                    manifest.error = Some(e.to_string());
                    manifest.diagnostics.insert("final".into(), summary(&state, k)?);
                    manifest.write(&out.join("manifest.json"))?;
                    eprintln!("error: {e}");
                    return Ok(e.exit_code());
                }
            }
            steps += 1;
            let clock = leg_start + (i + 1) as f64 * h;
            if leg.k <= k {
                expected[leg.k - 1] += h;
            }
            traj.row(clock, &state, moments_or_none(&state, k).as_deref(), u_of(&state)?)?;
            if steps % cfg.snapshot_every == 0 {
                write_boundary(&snaps.join(format!("step_{steps:06}.csv")), &state)?;
            }
        }
        leg_start += leg.dt;
    }
    drop(traj);
    let state_path = out.join("state.json");
    write_state(&state_path, &state)?;
    manifest.accepted_steps = steps;
    if !state.is_empty() {
        manifest.diagnostics.insert("final".into(), summary(&state, k)?);
        if let (Some(a), Some(b)) = (moments_or_none(&initial, k), moments_or_none(&state, k)) {
            let drift: Vec<f64> = (0..k).map(|j| b[j] - a[j] - expected[j]).collect();
            let worst = drift.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            manifest.diagnostics.insert("moment_drift".into(), json!(drift));
            manifest.diagnostics.insert("max_moment_drift".into(), json!(worst));
        }
        let shape = final_shape(&cfg, &state_path);
        if let ShapeSpec::Explicit { t } = shape {
            manifest.diagnostics.insert("explicit".into(), explicit_errors(&state, t)?);
        }
        if !cfg.suites.is_empty() {
            let ctx = suite_context(shape, state, &cfg);
            let reports: Vec<SuiteReport> = cfg.suites.iter().map(|s| run_suite(*s, &ctx)).collect();
            manifest.diagnostics.insert("suites".into(), serde_json::to_value(reports)?);
        }
    }
    manifest.completed = true;
    manifest.write(&out.join("manifest.json"))?;
    Ok(0)
}

fn write_report(path: Option<&Path>, report: &Value) -> Result<()> {
    let text = serde_json::to_string_pretty(report)? + "\n";
    match path {
        Some(p) => std::fs::write(p, text)?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn cmd_verify(
    config: Option<&Path>,
    suites: Vec<Suite>,
    shape: &ShapeArgs,
    seed: Option<u64>,
    mc_samples: Option<u64>,
    report_path: Option<&Path>,
) -> Result<i32> {
    let cfg = config.map(RunConfig::load).transpose()?;
    let spec = match (shape.spec()?, &cfg) {
        (Some(s), _) => s,
        (None, Some(c)) => c.shape.clone(),
        (None, None) => return Err(Error::OutOfRange("a --shape or a config file is required".into())),
    };
    let suites = if suites.is_empty() { cfg.as_ref().map(|c| c.suites.clone()).unwrap_or_default() } else { suites };
    if suites.is_empty() {
        return Err(Error::OutOfRange("no suites selected".into()));
    }
    let integrator = cfg.as_ref().map(|c| c.integrator.clone()).unwrap_or_default();
    let nodes = shape.nodes.unwrap_or(integrator.node_count);
    let state = spec.build(Some(nodes))?;
    let mut ctx = SuiteContext::new(spec.clone(), state, IntegratorConfig { node_count: nodes, ..integrator });
    if let Some(c) = &cfg {
        ctx.seed = c.seed;
        ctx.mc_samples = c.mc_samples;
        ctx.tolerances = c.tolerances.clone();
    }
    ctx.seed = seed.unwrap_or(ctx.seed);
    ctx.mc_samples = mc_samples.unwrap_or(ctx.mc_samples);
    let mut reports: Vec<SuiteReport> = Vec::new();
    let mut report = json!({});
    for suite in suites {
        reports.push(run_suite(suite, &ctx));
        let pass = reports.iter().all(|r| r.pass);
        report = json!({
            "version": env!("CARGO_PKG_VERSION"),
            "shape": spec,
            "nodes": nodes,
            "seed": ctx.seed,
            "pass": pass,
            "suites": reports,
        });
        if report_path.is_some() {
            write_report(report_path, &report)?;
        }
    }
    if report_path.is_none() {
        write_report(None, &report)?;
    }
    Ok(if reports.iter().all(|r| r.pass) { 0 } else { 5 })
}
