mod config;

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use bilateral::compare::{effort_curve, linspace, EffortSettings, QUAD_TOL};
use bilateral::domain::quadrature::gauss_legendre5;
use bilateral::domain::{CoefficientProfile, HourglassGrid, IntervalGrid, KernelField};
use bilateral::export;
use bilateral::kernel_hyp::{
    hyp_gains, hyp_kernel_explicit, hyp_kernel_series, HypGains, HypKernel, HypPlant,
    SeriesSettings, SeriesTermLedger,
};
use bilateral::kernel_rd::{
    rd_gains, rd_kernel_explicit, rd_kernel_goursat, GoursatSettings, RdKernel, RdPlant,
};
use bilateral::par::Execution;
use bilateral::sim::{
    compatible_hyp_initial, compatible_wave_velocity, simulate_hyp, simulate_rd, simulate_wave,
    target_check, HypControl, PlantClass, RdControl, SimSettings, TargetCheck, TargetSpec,
    Trajectory, WaveControl, WaveOptions,
};
use bilateral::wave::{wave_to_hyp, WavePlant};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use config::{required, Control, Format, Method, RunConfig};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] bilateral::Error),
    #[error("cannot write {path}: {source}")]
    Output {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error("{0}")]
    NoCrossover(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        use bilateral::Error as E;
        match self {
            CliError::Config(_) => 2,
            CliError::NoCrossover(_) => 3,
            CliError::Core(e) => match e {
                E::Config(_) | E::Domain(_) | E::Unsupported(_) | E::GridMismatch(_) => 2,
                E::Convergence { .. } | E::BoundViolation { .. } | E::NotFound { .. } | E::Numeric(_) => 3,
                E::Divergence { .. } => 4,
                _ => 1,
            },
            CliError::Output { .. } | CliError::Json(_) => 1,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "bilateral", version, about = "Bilateral backstepping kernels, simulations and effort curves")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ClassArg {
    ReactionDiffusion,
    Hyperbolic,
    Wave,
}

impl From<ClassArg> for PlantClass {
    fn from(c: ClassArg) -> Self {
        match c {
            ClassArg::ReactionDiffusion => PlantClass::ReactionDiffusion,
            ClassArg::Hyperbolic => PlantClass::Hyperbolic,
            ClassArg::Wave => PlantClass::Wave,
        }
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Synthesize a kernel and its boundary gains.
    Kernel {
        config: PathBuf,
        /// Expected plant class; must match the config.
        #[arg(long, value_enum)]
        class: Option<ClassArg>,
        #[arg(long, value_enum)]
        method: Option<Method>,
        /// Output directory (overrides `output.directory`).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Simulate the plant in open or closed loop.
    Simulate {
        config: PathBuf,
        #[arg(long, conflicts_with = "open_loop")]
        closed_loop: bool,
        #[arg(long)]
        open_loop: bool,
        /// Check the transformed state against the target system.
        #[arg(long)]
        target_check: bool,
        #[arg(long, value_enum)]
        method: Option<Method>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Tabulate unilateral and bilateral effort norms over δ.
    Compare {
        #[arg(long, default_value_t = 0.5)]
        delta_min: f64,
        #[arg(long, default_value_t = 5.0)]
        delta_max: f64,
        #[arg(long, default_value_t = 10)]
        samples: usize,
        #[arg(long, default_value_t = QUAD_TOL)]
        rel_tol: f64,
        #[arg(long, default_value_t = 1e-6)]
        crossover_tol: f64,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Kernel { config, class, method, out } => cmd_kernel(&config, class, method, out),
        Command::Simulate { config, closed_loop, open_loop, target_check, method, out } => {
            let control = match (closed_loop, open_loop) {
                (true, _) => Some(Control::ClosedLoop),
                (_, true) => Some(Control::OpenLoop),
                _ => None,
            };
            cmd_simulate(&config, control, target_check, method, out)
        }
        Command::Compare { delta_min, delta_max, samples, rel_tol, crossover_tol, out } => {
            cmd_compare(delta_min, delta_max, samples, rel_tol, crossover_tol, &out)
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn load(path: &Path, method: Option<Method>, out: Option<PathBuf>) -> Result<RunConfig, CliError> {
    let mut cfg = RunConfig::load(path)?;
    if let Some(m) = method {
        cfg.solver.method = m;
    }
    if let Some(dir) = out {
        cfg.output.directory = dir;
    }
    Ok(cfg)
}

struct Output<'a> {
    dir: &'a Path,
    files: Vec<String>,
}

impl<'a> Output<'a> {
    fn new(dir: &'a Path) -> Result<Self, CliError> {
        fs::create_dir_all(dir).map_err(|source| CliError::Output { path: dir.into(), source })?;
        Ok(Self { dir, files: Vec::new() })
    }

    fn write<F>(&mut self, name: &str, f: F) -> Result<(), CliError>
    where
        F: FnOnce(&mut BufWriter<File>) -> Result<(), CliError>,
    {
        let path = self.dir.join(name);
        let io = |source| CliError::Output { path: path.clone(), source };
        let mut w = BufWriter::new(File::create(&path).map_err(io)?);
        f(&mut w)?;
        w.flush().map_err(io)?;
        self.files.push(name.to_string());
        Ok(())
    }

    fn json(&mut self, name: &str, value: &Value) -> Result<(), CliError> {
        self.write(name, |w| {
            serde_json::to_writer_pretty(&mut *w, value)?;
            writeln!(w).map_err(|e| CliError::Core(e.into()))
        })
    }
}

/// Plant and kernel for one config.
enum Synth {
    Rd {
        plant: RdPlant,
        kernel: RdKernel,
    },
    Hyp {
        plant: HypPlant,
        kernel: HypKernel,
        ledger: Option<SeriesTermLedger>,
    },
}

fn profile(c: &Option<config::Coefficient>, key: &str) -> Result<CoefficientProfile, CliError> {
    required(c, key)?.profile()
}

fn rd_plant(cfg: &RunConfig) -> Result<RdPlant, CliError> {
    Ok(RdPlant::new(cfg.epsilon(), profile(&cfg.plant.lambda, "plant.lambda")?, cfg.plant.half_length)?)
}

fn hyp_plant(cfg: &RunConfig) -> Result<(HypPlant, Option<WavePlant>), CliError> {
    let p = &cfg.plant;
    if p.class == PlantClass::Wave {
        let beta = match &p.beta {
            Some(b) => b.profile()?,
            None => CoefficientProfile::constant(0.0),
        };
        let wave = WavePlant::with_beta(
            profile(&p.lambda, "plant.lambda")?,
            profile(&p.alpha, "plant.alpha")?,
            &beta,
            p.half_length,
        )?;
        let (hyp, _) = wave_to_hyp(&wave)?;
        return Ok((hyp, Some(wave)));
    }
    let c = [
        profile(&p.c1, "plant.c1")?,
        profile(&p.c2, "plant.c2")?,
        profile(&p.c3, "plant.c3")?,
        profile(&p.c4, "plant.c4")?,
    ];
    Ok((HypPlant::new(cfg.epsilon(), c, p.half_length)?, None))
}

fn synthesize(cfg: &RunConfig, grid: &IntervalGrid) -> Result<Synth, CliError> {
    let hg = HourglassGrid::new(*grid);
    let s = &cfg.solver;
    let execution: Execution = s.execution;
    match cfg.plant.class {
        PlantClass::ReactionDiffusion => {
            let plant = rd_plant(cfg)?;
            let kernel = match s.method {
                Method::Explicit => rd_kernel_explicit(&plant, &hg)?,
                Method::Numeric => {
                    let settings = GoursatSettings {
                        tol: s.tol,
                        max_iter: s.max_iter,
                        richardson: s.richardson,
                        execution,
                    };
                    rd_kernel_goursat(&plant, &hg, &settings)?
                }
            };
            Ok(Synth::Rd { plant, kernel })
        }
        PlantClass::Hyperbolic | PlantClass::Wave => {
            let (plant, _) = hyp_plant(cfg)?;
            let (kernel, ledger) = match s.method {
                Method::Explicit => (hyp_kernel_explicit(&plant, &hg)?, None),
                Method::Numeric => {
                    let settings = SeriesSettings {
                        n_terms: s.n_terms,
                        tol: s.series_tol,
                        richardson: s.richardson,
                        execution,
                    };
                    let (k, l) = hyp_kernel_series(&plant, &hg, &settings)?;
                    (k, Some(l))
                }
            };
            Ok(Synth::Hyp { plant, kernel, ledger })
        }
    }
}

/// `∫₀ˣ f` at every node, by five-point Gauss rules on the grid cells.
fn cumulative_from_center(grid: &IntervalGrid, f: &CoefficientProfile) -> Vec<f64> {
    let n = grid.len();
    let c = grid.center();
    let mut out = vec![0.0; n];
    for i in c + 1..n {
        out[i] = out[i - 1] + gauss_legendre5(|x| f.sample(x), grid.node(i - 1), grid.node(i));
    }
    for i in (0..c).rev() {
        out[i] = out[i + 1] - gauss_legendre5(|x| f.sample(x), grid.node(i), grid.node(i + 1));
    }
    out
}

fn max_over<F: Fn(usize) -> f64>(n: usize, f: F) -> f64 {
    (0..n).map(f).fold(0.0, f64::max)
}

fn boundary_residuals(synth: &Synth, grid: &IntervalGrid) -> Value {
    let n = grid.len();
    let anti = |k: &KernelField| max_over(n, |i| k.get(i, grid.mirror(i)).abs());
    match synth {
        Synth::Rd { plant, kernel } => {
            let integral = cumulative_from_center(grid, &plant.lambda);
            let k = &kernel.field;
            json!({
                "diagonal": max_over(n, |i| (k.get(i, i) + integral[i] / (2.0 * plant.epsilon)).abs()),
                "anti_diagonal": anti(k),
            })
        }
        Synth::Hyp { plant, kernel, .. } => {
            let eps = kernel.epsilon;
            let diag = |k: &KernelField, c: &CoefficientProfile, sign: f64| {
                max_over(n, |i| (k.get(i, i) - sign * c.sample(grid.node(i)) / (2.0 * eps)).abs())
            };
            json!({
                "uu_anti_diagonal": anti(&kernel.uu),
                "vv_anti_diagonal": anti(&kernel.vv),
                "uv_diagonal": diag(&kernel.uv, &plant.c[1], 1.0),
                "vu_diagonal": diag(&kernel.vu, &plant.c[2], -1.0),
            })
        }
    }
}

fn ledger_summary(ledger: &SeriesTermLedger) -> Value {
    let runs: Vec<Value> = ledger
        .runs
        .iter()
        .map(|r| {
            let last = r.terms.last();
            json!({
                "pair": r.pair,
                "reflected": r.reflected,
                "refine": r.refine,
                "terms": r.terms.len(),
                "last_term_sup": last.map(|t| t.sup_transport.max(t.sup_coupling)),
                "max_ratio": r.terms.iter().map(|t| t.max_ratio).fold(0.0, f64::max),
            })
        })
        .collect();
    json!({
        "lambda_bar": ledger.lambda_bar,
        "max_terms": ledger.max_terms(),
        "max_ratio": ledger.max_ratio(),
        "runs": runs,
    })
}

fn config_value(cfg: &RunConfig) -> Result<Value, CliError> {
    Ok(serde_json::to_value(cfg)?)
}

fn cmd_kernel(
    path: &Path,
    class: Option<ClassArg>,
    method: Option<Method>,
    out: Option<PathBuf>,
) -> Result<(), CliError> {
    let cfg = load(path, method, out)?.resolve()?;
    if let Some(c) = class {
        if PlantClass::from(c) != cfg.plant.class {
            return config::config_err(format!("--class {c:?} does not match the config's plant class"));
        }
    }
    let grid = cfg.grid()?;
    let synth = synthesize(&cfg, &grid)?;
    let mut out = Output::new(&cfg.output.directory)?;
    let csv = cfg.output.wants(Format::Csv);
    let want_json = cfg.output.wants(Format::Json);

    let mut report = json!({
        "command": "kernel",
        "boundary_residuals": boundary_residuals(&synth, &grid),
        "config": config_value(&cfg)?,
    });
    let gains: Vec<(String, bilateral::domain::GainFunction)> = match &synth {
        Synth::Rd { kernel, .. } => {
            if csv {
                out.write("kernel_K.csv", |w| Ok(export::write_kernel_csv(w, &kernel.field)?))?;
            }
            if want_json {
                out.json("kernel_K.json", &export::kernel_json("K", &kernel.field, kernel.provenance))?;
            }
            report["provenance"] = json!(kernel.provenance);
            report["goursat"] = json!(kernel.report);
            let (right, left) = rd_gains(kernel)?;
            vec![("right".into(), right), ("left".into(), left)]
        }
        Synth::Hyp { kernel, ledger, .. } => {
            for (name, field) in kernel.components() {
                if csv {
                    out.write(&format!("kernel_{name}.csv"), |w| Ok(export::write_kernel_csv(w, field)?))?;
                }
                if want_json {
                    out.json(&format!("kernel_{name}.json"), &export::kernel_json(name, field, kernel.provenance))?;
                }
            }
            report["provenance"] = json!(kernel.provenance);
            report["series_ledger"] = ledger.as_ref().map_or(Value::Null, ledger_summary);
            let g = hyp_gains(kernel)?;
            g.all().iter().map(|(n, f)| (n.to_string(), (*f).clone())).collect()
        }
    };
    let norms: serde_json::Map<String, Value> =
        gains.iter().map(|(n, g)| (n.clone(), json!(g.l1_norm()))).collect();
    report["gain_l1_norms"] = Value::Object(norms);
    if csv {
        let refs: Vec<(&str, &bilateral::domain::GainFunction)> =
            gains.iter().map(|(n, g)| (n.as_str(), g)).collect();
        out.write("gains.csv", |w| Ok(export::write_gains_csv(w, &refs)?))?;
    }
    let mut files = out.files.clone();
    files.push("report.json".into());
    report["files"] = json!(files);
    out.json("report.json", &report)?;
    println!(
        "kernel written to {} ({} files)",
        cfg.output.directory.display(),
        files.len()
    );
    Ok(())
}

fn sample(c: &Option<config::Coefficient>, key: &str, grid: &IntervalGrid) -> Result<Vec<f64>, CliError> {
    Ok(profile(c, key)?.sample_all(&grid.nodes()))
}

fn target_report(check: &TargetCheck) -> Value {
    json!({
        "max_boundary_residual": check.max_boundary_residual,
        "max_dynamics_residual": check.max_dynamics_residual,
        "decay_rate": check.decay_rate,
        "times": check.times,
        "transformed_l2": check.transformed_l2,
        "transformed_sup": check.transformed_sup,
        "boundary_residual": check.boundary_residual,
    })
}

fn cmd_simulate(
    path: &Path,
    control: Option<Control>,
    check: bool,
    method: Option<Method>,
    out: Option<PathBuf>,
) -> Result<(), CliError> {
    let mut cfg = load(path, method, out)?;
    if let Some(c) = control {
        cfg.simulation.control = c;
    }
    if check {
        cfg.simulation.target_check = true;
    }
    let cfg = cfg.resolve()?;
    let grid = cfg.grid()?;
    let sim = &cfg.simulation;
    let closed = sim.control == Control::ClosedLoop;
    let settings = SimSettings {
        dt: sim.dt,
        horizon: sim.horizon,
        record_every: sim.record_every.unwrap_or(1),
    };
    let u0 = sample(&sim.u0, "simulation.u0", &grid)?;
    let synth = if closed || sim.target_check {
        Some(synthesize(&cfg, &grid)?)
    } else {
        None
    };

    let traj: Trajectory = match cfg.plant.class {
        PlantClass::ReactionDiffusion => {
            let plant = rd_plant(&cfg)?;
            let control = match (&synth, closed) {
                (Some(Synth::Rd { kernel, .. }), true) => {
                    let (right, left) = rd_gains(kernel)?;
                    RdControl::Feedback { right, left }
                }
                _ => RdControl::OpenLoop,
            };
            simulate_rd(&plant, &grid, &control, &u0, &settings)?
        }
        PlantClass::Hyperbolic => {
            let (plant, _) = hyp_plant(&cfg)?;
            let v0 = sample(&sim.v0, "simulation.v0", &grid)?;
            match closed_gains(&synth, closed)? {
                Some(g) => {
                    let (u0, v0) = if sim.compatible {
                        compatible_hyp_initial(&g, &grid, &u0, &v0)?
                    } else {
                        (u0, v0)
                    };
                    simulate_hyp(&plant, &grid, &HypControl::Feedback(g), &u0, &v0, &settings)?
                }
                None => simulate_hyp(&plant, &grid, &HypControl::OpenLoop, &u0, &v0, &settings)?,
            }
        }
        PlantClass::Wave => {
            let (_, wave) = hyp_plant(&cfg)?;
            let wave = wave.ok_or_else(|| CliError::Config("wave plant missing".into()))?;
            let ut0 = sample(&sim.ut0, "simulation.ut0", &grid)?;
            let options = WaveOptions { integrator: sim.integrator };
            match closed_gains(&synth, closed)? {
                Some(g) => {
                    let ut0 = if sim.compatible {
                        compatible_wave_velocity(&g, &grid, &u0, &ut0)?
                    } else {
                        ut0
                    };
                    simulate_wave(&wave, &grid, &WaveControl::Feedback(g), &u0, &ut0, &settings, options)?
                }
                None => simulate_wave(&wave, &grid, &WaveControl::OpenLoop, &u0, &ut0, &settings, options)?,
            }
        }
    };
    traj.verify()?;

    let mut summary = export::trajectory_json(&traj, Value::Null);
    if let Some(map) = summary.as_object_mut() {
        map.remove("parameters");
        map.insert("config".into(), config_value(&cfg)?);
    }
    summary["command"] = json!("simulate");
    summary["control"] = json!(sim.control);
    if sim.target_check {
        let spec = match &synth {
            Some(Synth::Rd { plant, kernel }) => TargetSpec::Rd { plant, kernel },
            Some(Synth::Hyp { plant, kernel, .. }) => TargetSpec::Hyp { plant, kernel },
            None => return config::config_err("target check needs a kernel"),
        };
        summary["target_check"] = target_report(&target_check(&traj, spec)?);
    }
    let mut out = Output::new(&cfg.output.directory)?;
    if cfg.output.wants(Format::Csv) {
        out.write("trajectory.csv", |w| Ok(export::write_trajectory_csv(w, &traj)?))?;
    }
    if cfg.output.wants(Format::Json) {
        out.json("summary.json", &summary)?;
    }
    let sm = traj.summary();
    println!(
        "{} steps, L2 {:.6e} -> {:.6e} ({})",
        traj.steps,
        sm.initial_l2,
        sm.final_l2,
        if sm.grows {
            "grows"
        } else if sm.decays {
            "decays"
        } else {
            "bounded"
        }
    );
    Ok(())
}

fn closed_gains(synth: &Option<Synth>, closed: bool) -> Result<Option<HypGains>, CliError> {
    match (synth, closed) {
        (Some(Synth::Hyp { kernel, .. }), true) => Ok(Some(hyp_gains(kernel)?)),
        _ => Ok(None),
    }
}

fn cmd_compare(
    delta_min: f64,
    delta_max: f64,
    samples: usize,
    rel_tol: f64,
    crossover_tol: f64,
    dir: &Path,
) -> Result<(), CliError> {
    if !(delta_min > 0.0 && delta_min < delta_max) {
        return config::config_err(format!("need 0 < delta-min < delta-max, got [{delta_min}, {delta_max}]"));
    }
    if samples == 0 {
        return config::config_err("--samples must be at least 1");
    }
    if !(rel_tol > 0.0 && crossover_tol > 0.0) {
        return config::config_err("tolerances must be positive");
    }
    let deltas = linspace(delta_min, delta_max, samples);
    let settings = EffortSettings {
        rel_tol,
        crossover_tol,
        execution: Execution::Parallel,
    };
    let curve = effort_curve(&deltas, &settings)?;
    let params = json!({
        "delta_min": delta_min,
        "delta_max": delta_max,
        "samples": samples,
        "rel_tol": rel_tol,
        "crossover_tol": crossover_tol,
    });
    let mut summary = export::effort_json(&curve, params);
    summary["crossover_attempted"] = json!(samples > 1);
    let mut out = Output::new(dir)?;
    out.write("effort.csv", |w| Ok(export::write_effort_csv(w, &curve)?))?;
    out.json("effort.json", &summary)?;

    let show = |d: Option<f64>| d.map_or("not found".to_string(), |d| format!("{d:.6}"));
    println!(
        "{} samples; crossover literal {}, shifted {}",
        samples,
        show(curve.crossover_literal),
        show(curve.crossover_shifted)
    );
    if samples > 1 && curve.crossover_literal.is_none() && curve.crossover_shifted.is_none() {
        return Err(CliError::NoCrossover(format!(
            "no crossover of J1 and J2 on [{delta_min}, {delta_max}] for either variant"
        )));
    }
    Ok(())
}
