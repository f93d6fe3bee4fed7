//! TOML run configuration.
//!
//! ```toml
//! [plant]
//! class = "reaction-diffusion"   # or "hyperbolic", "wave"
//! half_length = 1.0
//! epsilon = 1.0                  # not used by the wave class
//! lambda = "5 + 3*sin(2*x)"      # number, expression or { table = "file.csv" }
//!
//! [solver]
//! nodes = 201
//! method = "numeric"             # or "explicit"
//!
//! [simulation]
//! control = "closed-loop"
//! horizon = 2.0
//! dt = 1e-3
//! u0 = "sin(pi*(x + 1)/2)"
//!
//! [output]
//! directory = "out"
//! ```
//!
//! Coefficients per class: reaction-diffusion takes `lambda`; hyperbolic
//! takes `c1` to `c4`; wave takes `lambda`, `alpha` (default 0) and an
//! optional `beta` that must vanish. Initial data: `u0` for every class,
//! `v0` for hyperbolic plants and `ut0` (default 0) for the wave.

use std::fs;
use std::path::{Path, PathBuf};

use bilateral::domain::{CoefficientProfile, IntervalGrid};
use bilateral::par::Execution;
use bilateral::sim::PlantClass;
use bilateral::wave::ActuatorIntegrator;
use clap::ValueEnum;
use serde::{Deserialize, Serialize};

use crate::CliError;

/// A number, an expression in `x`, or a two-column `x,value` CSV table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Coefficient {
    Number(f64),
    Expression(String),
    Table(TableRef),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableRef {
    pub table: PathBuf,
}

impl Coefficient {
    pub fn profile(&self) -> Result<CoefficientProfile, CliError> {
        match self {
            Coefficient::Number(v) => Ok(CoefficientProfile::constant(*v)),
            Coefficient::Expression(s) => Ok(CoefficientProfile::expression(s)?),
            Coefficient::Table(t) => read_table(&t.table),
        }
    }

    fn absolutize(&mut self, base: &Path) {
        if let Coefficient::Table(t) = self {
            if t.table.is_relative() {
                t.table = base.join(&t.table);
            }
        }
    }
}

fn read_table(path: &Path) -> Result<CoefficientProfile, CliError> {
    let mut reader = csv::Reader::from_path(path)
        .map_err(|e| CliError::Config(format!("cannot read table {}: {e}", path.display())))?;
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for rec in reader.deserialize::<(f64, f64)>() {
        let (x, y) = rec.map_err(|e| CliError::Config(format!("table {}: {e}", path.display())))?;
        xs.push(x);
        ys.push(y);
    }
    Ok(CoefficientProfile::tabulated(xs, ys)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Explicit,
    Numeric,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Control {
    OpenLoop,
    ClosedLoop,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub plant: PlantConfig,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub simulation: SimulationConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlantConfig {
    pub class: PlantClass,
    pub half_length: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<Coefficient>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c1: Option<Coefficient>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c2: Option<Coefficient>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c3: Option<Coefficient>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c4: Option<Coefficient>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<Coefficient>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<Coefficient>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverConfig {
    /// Grid nodes on `[-L, L]`, odd.
    pub nodes: usize,
    pub method: Method,
    /// Goursat iteration tolerance.
    pub tol: f64,
    pub max_iter: usize,
    /// Series truncation tolerance and term cap.
    pub series_tol: f64,
    pub n_terms: usize,
    pub richardson: bool,
    pub execution: Execution,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            nodes: 201,
            method: Method::Numeric,
            tol: 1e-10,
            max_iter: 200,
            series_tol: 1e-13,
            n_terms: 200,
            richardson: true,
            execution: Execution::Parallel,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimulationConfig {
    pub control: Control,
    pub target_check: bool,
    pub horizon: f64,
    /// Required for reaction-diffusion; fixed to `h/ε` otherwise.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    /// Defaults to roughly 200 recorded steps.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub record_every: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub u0: Option<Coefficient>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub v0: Option<Coefficient>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ut0: Option<Coefficient>,
    /// Adjust hyperbolic and wave initial data to match the feedback law at
    /// the inflow ends.
    pub compatible: bool,
    pub integrator: ActuatorIntegrator,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        Self {
            control: Control::ClosedLoop,
            target_check: false,
            horizon: 2.0,
            dt: None,
            record_every: None,
            u0: None,
            v0: None,
            ut0: None,
            compatible: true,
            integrator: ActuatorIntegrator::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub directory: PathBuf,
    pub formats: Vec<Format>,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            directory: PathBuf::from("out"),
            formats: vec![Format::Csv, Format::Json],
        }
    }
}

impl OutputConfig {
    pub fn wants(&self, f: Format) -> bool {
        self.formats.contains(&f)
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg: RunConfig =
            toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        for c in cfg.coefficients_mut() {
            c.absolutize(base);
        }
        Ok(cfg)
    }

    fn coefficients_mut(&mut self) -> impl Iterator<Item = &mut Coefficient> {
        let p = &mut self.plant;
        let s = &mut self.simulation;
        [
            &mut p.lambda, &mut p.c1, &mut p.c2, &mut p.c3, &mut p.c4, &mut p.alpha, &mut p.beta,
            &mut s.u0, &mut s.v0, &mut s.ut0,
        ]
        .into_iter()
        .filter_map(Option::as_mut)
    }

    /// Checks class-specific keys and fills in every class default, so the
    /// result serializes to a self-contained config.
    pub fn resolve(mut self) -> Result<Self, CliError> {
        let p = &mut self.plant;
        if !(p.half_length.is_finite() && p.half_length > 0.0) {
            return config_err("plant.half_length must be positive");
        }
        let (allowed, required): (&[&str], &[&str]) = match p.class {
            PlantClass::ReactionDiffusion => (&["epsilon", "lambda"], &["lambda"]),
            PlantClass::Hyperbolic => (&["epsilon", "c1", "c2", "c3", "c4"], &["c1", "c2", "c3", "c4"]),
            PlantClass::Wave => (&["lambda", "alpha", "beta"], &["lambda"]),
        };
        let present = [
            ("epsilon", p.epsilon.is_some()),
            ("lambda", p.lambda.is_some()),
            ("c1", p.c1.is_some()),
            ("c2", p.c2.is_some()),
            ("c3", p.c3.is_some()),
            ("c4", p.c4.is_some()),
            ("alpha", p.alpha.is_some()),
            ("beta", p.beta.is_some()),
        ];
        let class = serde_json::to_value(p.class)?;
        for (key, set) in present {
            if set && !allowed.contains(&key) {
                return config_err(format!("plant.{key} is not a {class} parameter"));
            }
            if !set && required.contains(&key) {
                return config_err(format!("plant.{key} is required for class {class}"));
            }
        }
        match p.class {
            PlantClass::Wave => {
                p.alpha.get_or_insert(Coefficient::Number(0.0));
            }
            _ => {
                let eps = *p.epsilon.get_or_insert(1.0);
                if !(eps.is_finite() && eps > 0.0) {
                    return config_err("plant.epsilon must be positive");
                }
            }
        }

        let s = &self.solver;
        if s.nodes < 3 || s.nodes % 2 == 0 {
            return config_err(format!("solver.nodes must be odd and at least 3, got {}", s.nodes));
        }
        if !(s.tol > 0.0 && s.series_tol > 0.0) {
            return config_err("solver tolerances must be positive");
        }
        if s.max_iter == 0 || s.n_terms == 0 {
            return config_err("solver.max_iter and solver.n_terms must be positive");
        }

        let h = 2.0 * self.plant.half_length / (s.nodes - 1) as f64;
        let sim = &mut self.simulation;
        if !(sim.horizon.is_finite() && sim.horizon >= 0.0) {
            return config_err("simulation.horizon must be nonnegative");
        }
        let dt = match self.plant.class {
            PlantClass::ReactionDiffusion => *sim.dt.get_or_insert(1e-3),
            PlantClass::Hyperbolic => {
                let dt = h / self.plant.epsilon.unwrap_or(1.0);
                if sim.dt.is_some_and(|d| (d - dt).abs() > 1e-12 * dt) {
                    return config_err(format!("hyperbolic runs march at dt = h/ε = {dt}"));
                }
                *sim.dt.insert(dt)
            }
            PlantClass::Wave => {
                if sim.dt.is_some_and(|d| (d - h).abs() > 1e-12 * h) {
                    return config_err(format!("wave runs march at dt = h = {h}"));
                }
                *sim.dt.insert(h)
            }
        };
        if !(dt.is_finite() && dt > 0.0) {
            return config_err("simulation.dt must be positive");
        }
        let steps = (sim.horizon / dt).round().max(1.0) as usize;
        let every = *sim.record_every.get_or_insert((steps / 200).max(1));
        if every == 0 {
            return config_err("simulation.record_every must be positive");
        }
        match self.plant.class {
            PlantClass::ReactionDiffusion => {
                reject(&sim.v0, "v0")?;
                reject(&sim.ut0, "ut0")?;
            }
            PlantClass::Hyperbolic => reject(&sim.ut0, "ut0")?,
            PlantClass::Wave => {
                reject(&sim.v0, "v0")?;
                sim.ut0.get_or_insert(Coefficient::Number(0.0));
            }
        }
        if self.output.formats.is_empty() {
            return config_err("output.formats must name at least one format");
        }
        Ok(self)
    }

    pub fn grid(&self) -> Result<IntervalGrid, CliError> {
        Ok(IntervalGrid::new(self.plant.half_length, self.solver.nodes)?)
    }

    pub fn epsilon(&self) -> f64 {
        self.plant.epsilon.unwrap_or(1.0)
    }
}

fn reject(c: &Option<Coefficient>, key: &str) -> Result<(), CliError> {
    match c {
        Some(_) => config_err(format!("simulation.{key} does not apply to this plant class")),
        None => Ok(()),
    }
}

pub fn config_err<T>(msg: impl Into<String>) -> Result<T, CliError> {
    Err(CliError::Config(msg.into()))
}

/// Required coefficient, by key.
pub fn required<'a>(c: &'a Option<Coefficient>, key: &str) -> Result<&'a Coefficient, CliError> {
    c.as_ref()
        .ok_or_else(|| CliError::Config(format!("{key} is required for this run")))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(s: &str) -> Result<RunConfig, CliError> {
        toml::from_str::<RunConfig>(s)
            .map_err(|e| CliError::Config(e.to_string()))?
            .resolve()
    }

    #[test]
    fn rd_defaults_fill_in() {
        let c = parse("[plant]\nclass = \"reaction-diffusion\"\nhalf_length = 1.0\nlambda = 5\n").unwrap();
        assert_eq!(c.plant.epsilon, Some(1.0));
        assert_eq!(c.simulation.dt, Some(1e-3));
        assert_eq!(c.simulation.record_every, Some(10));
        let text = toml::to_string(&c).unwrap();
        assert_eq!(parse(&text).unwrap(), c);
    }

    #[test]
    fn class_keys_enforced() {
        assert!(parse("[plant]\nclass = \"hyperbolic\"\nhalf_length = 1.0\nc1 = 0\nc2 = 1\nc3 = 1\n").is_err());
        assert!(parse("[plant]\nclass = \"wave\"\nhalf_length = 1.0\nlambda = 1\nepsilon = 1\n").is_err());
        assert!(parse("[plant]\nclass = \"reaction-diffusion\"\nhalf_length = 1.0\nlambda = 1\nextra = 2\n").is_err());
        assert!(parse("[plant]\nclass = \"reaction-diffusion\"\nhalf_length = 1.0\nlambda = 1\n[solver]\nnodes = 100\n").is_err());
    }

    #[test]
    fn coefficient_forms() {
        let c = parse(
            "[plant]\nclass = \"hyperbolic\"\nhalf_length = 1.0\nc1 = 0\nc2 = \"1 + x\"\nc3 = { table = \"t.csv\" }\nc4 = -0.5\n",
        )
        .unwrap();
        assert_eq!(c.plant.c4, Some(Coefficient::Number(-0.5)));
        assert_eq!(c.plant.c2, Some(Coefficient::Expression("1 + x".into())));
        assert!(matches!(c.plant.c3, Some(Coefficient::Table(_))));
        assert_eq!(c.simulation.dt, Some(0.01));
    }
}
