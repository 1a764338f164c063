//! Run configuration: one JSON document per experiment.
//!
//! ```json
//! {
//!   "parameters": { "beta1": 0.3, "beta2": 0.5, "gamma1": 0.03, "gamma2": 0.04,
//!                   "delta1": 0.2, "delta2": 0.3, "alpha1": 0.2, "alpha2": 0.3,
//!                   "mu": 0.1, "N": 10000 },
//!   "simulation": { "runs": [ { "state": [100, 100] } ], "t_max": 100 },
//!   "portrait": { "window": { "d1": [0, 10000], "d2": [0, 10000] }, "grid": 5 },
//!   "sweep": { "axes": [ { "parameter": "beta2", "min": 0, "max": 1, "steps": 11 } ] },
//!   "output": { "directory": "out" }
//! }
//! ```
//!
//! Every population in the file is in persons, even in normalized mode.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use twodrug::model::RATE_NAMES;
use twodrug::{GridLayout, IntegratorOptions, ModelParameters, Tier, ValidatedParameters, Window};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub parameters: ModelParameters,
    #[serde(default)]
    pub simulation: Option<SimulationConfig>,
    #[serde(default)]
    pub portrait: PortraitConfig,
    #[serde(default)]
    pub sweep: Option<SweepConfig>,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationConfig {
    pub runs: Vec<RunSpec>,
    /// Years; overrides the integrator's horizon.
    #[serde(default)]
    pub t_max: Option<f64>,
    /// Defaults to the adaptive method scaled to N.
    #[serde(default)]
    pub integrator: Option<IntegratorOptions>,
}

/// One initial state. Its length picks the native tier: 5 full, 4 exact4, 2 reduced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSpec {
    #[serde(default)]
    pub name: Option<String>,
    pub state: Vec<f64>,
    /// Tiers to integrate from this state; defaults to the native one.
    #[serde(default)]
    pub tiers: Option<Vec<Tier>>,
}

impl RunSpec {
    pub fn native_tier(&self) -> Option<Tier> {
        match self.state.len() {
            5 => Some(Tier::Full),
            4 => Some(Tier::Exact4),
            2 => Some(Tier::Reduced),
            _ => None,
        }
    }

    pub fn tiers(&self) -> Vec<Tier> {
        match &self.tiers {
            Some(t) => t.clone(),
            None => self.native_tier().into_iter().collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PortraitConfig {
    /// Defaults to `[0, N] x [0, N]`.
    #[serde(default)]
    pub window: Option<Window>,
    #[serde(default = "default_grid")]
    pub grid: usize,
    #[serde(default)]
    pub layout: GridLayout,
    #[serde(default = "default_portrait_t_max")]
    pub t_max: f64,
}

fn default_grid() -> usize {
    5
}

fn default_portrait_t_max() -> f64 {
    500.0
}

impl Default for PortraitConfig {
    fn default() -> Self {
        Self { window: None, grid: default_grid(), layout: GridLayout::default(), t_max: default_portrait_t_max() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub axes: Vec<SweepAxis>,
    #[serde(default = "yes")]
    pub heatmap: bool,
    /// Evaluate cells on the rayon pool. Output is identical either way.
    #[serde(default = "yes")]
    pub parallel: bool,
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepAxis {
    pub parameter: String,
    pub min: f64,
    pub max: f64,
    pub steps: usize,
}

impl SweepAxis {
    pub fn values(&self) -> Vec<f64> {
        let last = (self.steps - 1) as f64;
        (0..self.steps)
            .map(|k| if k + 1 == self.steps { self.max } else { self.min + (self.max - self.min) * k as f64 / last })
            .collect()
    }

    fn check(&self) -> Result<(), CliError> {
        let p = &self.parameter;
        if !RATE_NAMES.contains(&p.as_str()) {
            return Err(CliError::InvalidSweepAxis(format!(
                "unknown parameter {p:?}; expected one of {}",
                RATE_NAMES.join(", ")
            )));
        }
        let in_unit = |v: f64| v.is_finite() && (0.0..=1.0).contains(&v);
        if !in_unit(self.min) || !in_unit(self.max) || self.min > self.max {
            return Err(CliError::InvalidSweepAxis(format!(
                "{p}: range [{}, {}] must lie in [0, 1] with min <= max",
                self.min, self.max
            )));
        }
        if self.steps < 2 {
            return Err(CliError::InvalidSweepAxis(format!("{p}: need at least 2 steps")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Text,
    Csv,
    Svg,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default)]
    pub directory: Option<PathBuf>,
    #[serde(default = "all_formats")]
    pub formats: Vec<Format>,
}

fn all_formats() -> Vec<Format> {
    vec![Format::Json, Format::Text, Format::Csv, Format::Svg]
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { directory: None, formats: all_formats() }
    }
}

impl OutputConfig {
    pub fn wants(&self, f: Format) -> bool {
        self.formats.contains(&f)
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let config: Self = serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        config.check()?;
        Ok(config)
    }

    pub fn from_path(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Read { path: path.to_owned(), source })?;
        Self::from_json(&text)
    }

    /// Baseline parameters with every section at its default.
    pub fn baseline() -> Self {
        Self {
            parameters: ModelParameters::baseline(),
            simulation: None,
            portrait: PortraitConfig::default(),
            sweep: None,
            output: OutputConfig::default(),
        }
    }

    fn check(&self) -> Result<(), CliError> {
        self.parameters.validate()?;
        if let Some(sim) = &self.simulation {
            if let Some(t) = sim.t_max {
                if !(t.is_finite() && t > 0.0) {
                    return Err(CliError::Config(format!("simulation.t_max = {t} must be positive")));
                }
            }
            for (i, run) in sim.runs.iter().enumerate() {
                if run.native_tier().is_none() {
                    return Err(CliError::Config(format!(
                        "simulation.runs[{i}].state has {} entries; expected 5, 4 or 2",
                        run.state.len()
                    )));
                }
                if let Some(name) = &run.name {
                    let safe = |c: char| c.is_ascii_alphanumeric() || c == '_' || c == '-';
                    if name.is_empty() || !name.chars().all(safe) {
                        return Err(CliError::Config(format!(
                            "simulation.runs[{i}].name {name:?} may only use letters, digits, '_' and '-'"
                        )));
                    }
                }
                if run.tiers().is_empty() {
                    return Err(CliError::Config(format!("simulation.runs[{i}].tiers is empty")));
                }
            }
        }
        if let Some(sim) = &self.simulation {
            let mut names: Vec<String> =
                sim.runs.iter().enumerate().map(|(i, r)| crate::simulate::run_name(i, r)).collect();
            names.sort();
            if let Some(w) = names.windows(2).find(|w| w[0] == w[1]) {
                return Err(CliError::Config(format!("duplicate run name {:?}", w[0])));
            }
        }
        if let Some(sweep) = &self.sweep {
            if !(1..=2).contains(&sweep.axes.len()) {
                return Err(CliError::InvalidSweepAxis(format!("expected 1 or 2 axes, got {}", sweep.axes.len())));
            }
            for axis in &sweep.axes {
                axis.check()?;
            }
            if sweep.axes.len() == 2 && sweep.axes[0].parameter == sweep.axes[1].parameter {
                return Err(CliError::InvalidSweepAxis("both axes sweep the same parameter".into()));
            }
        }
        Ok(())
    }
}

/// Parameters and unit scale for one invocation.
///
/// In normalized mode the model runs with `N = 1` and every configured
/// population is divided by the original N before use.
#[derive(Debug, Clone)]
pub struct Context {
    pub config: RunConfig,
    pub params: ValidatedParameters,
    /// Multiplier from configured persons to model units.
    pub scale: f64,
    pub normalized: bool,
}

impl Context {
    pub fn new(config: RunConfig, normalized: bool) -> Result<Self, CliError> {
        let raw = config.parameters.validate()?;
        let n = raw.n_total();
        let (params, scale) = if normalized { (raw.with_population(1.0)?, 1.0 / n) } else { (raw, 1.0) };
        Ok(Self { config, params, scale, normalized })
    }

    pub fn n_total(&self) -> f64 {
        self.params.n_total()
    }

    pub fn window(&self) -> Window {
        match self.config.portrait.window {
            Some(w) => w.scaled(self.scale),
            None => Window::square(self.n_total()),
        }
    }

    pub fn integrator(&self) -> IntegratorOptions {
        let sim = self.config.simulation.as_ref();
        let mut opts = match sim.and_then(|s| s.integrator) {
            Some(o) => scale_options(o, self.scale),
            None => IntegratorOptions::for_population(self.n_total()),
        };
        if let Some(t) = sim.and_then(|s| s.t_max) {
            opts.t_max = t;
        }
        opts
    }
}

/// Absolute tolerances are in persons and follow the unit change.
fn scale_options(mut o: IntegratorOptions, scale: f64) -> IntegratorOptions {
    if let twodrug::Method::Adaptive { abs_tol, rel_tol } = o.method {
        o.method = twodrug::Method::Adaptive { abs_tol: abs_tol * scale, rel_tol };
    }
    o.equilibrium_stop_tol = o.equilibrium_stop_tol.map(|t| t * scale);
    o
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASELINE: &str = r#"{"parameters": {"beta1": 0.3, "beta2": 0.5, "gamma1": 0.03,
        "gamma2": 0.04, "delta1": 0.2, "delta2": 0.3, "alpha1": 0.2, "alpha2": 0.3,
        "mu": 0.1, "N": 10000}}"#;

    fn with(extra: &str) -> String {
        format!("{}, {extra}}}", BASELINE.strip_suffix('}').unwrap())
    }

    #[test]
    fn minimal_config_loads() {
        let c = RunConfig::from_json(BASELINE).unwrap();
        assert_eq!(c.parameters, ModelParameters::baseline());
        assert_eq!(c.portrait.grid, 5);
        assert!(c.output.wants(Format::Svg));
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(matches!(RunConfig::from_json(&with(r#""extra": 1"#)), Err(CliError::Config(_))));
        let bad_param = BASELINE.replace("\"mu\"", "\"muu\"");
        assert!(matches!(RunConfig::from_json(&bad_param), Err(CliError::Config(_))));
        let nested = with(r#""portrait": {"grid": 3, "colour": "red"}"#);
        assert!(matches!(RunConfig::from_json(&nested), Err(CliError::Config(_))));
    }

    #[test]
    fn invalid_parameters_rejected() {
        let bad = BASELINE.replace("\"beta1\": 0.3", "\"beta1\": 1.5");
        let err = RunConfig::from_json(&bad).unwrap_err();
        assert_eq!(err.exit_code(), 1);
        assert!(err.to_string().contains("beta1"));
    }

    #[test]
    fn sweep_axis_checks() {
        let axis = |p: &str, min: f64, max: f64, steps: usize| {
            with(&format!(
                r#""sweep": {{"axes": [{{"parameter": "{p}", "min": {min}, "max": {max}, "steps": {steps}}}]}}"#
            ))
        };
        RunConfig::from_json(&axis("beta2", 0.0, 1.0, 11)).unwrap();
        for bad in
            [axis("zeta", 0.0, 1.0, 3), axis("beta2", 0.0, 1.5, 3), axis("beta2", 0.0, 1.0, 1), axis("N", 0.0, 1.0, 3)]
        {
            assert!(matches!(RunConfig::from_json(&bad), Err(CliError::InvalidSweepAxis(_))), "{bad}");
        }
        let three = with(
            r#""sweep": {"axes": [
                {"parameter": "beta1", "min": 0, "max": 1, "steps": 2},
                {"parameter": "beta2", "min": 0, "max": 1, "steps": 2},
                {"parameter": "mu", "min": 0, "max": 1, "steps": 2}]}"#,
        );
        assert!(matches!(RunConfig::from_json(&three), Err(CliError::InvalidSweepAxis(_))));
    }

    #[test]
    fn axis_values_hit_both_ends() {
        let a = SweepAxis { parameter: "beta2".into(), min: 0.0, max: 1.0, steps: 11 };
        let v = a.values();
        assert_eq!(v.len(), 11);
        assert_eq!(v[0], 0.0);
        assert_eq!(v[5], 0.5);
        assert_eq!(v[10], 1.0);
    }

    #[test]
    fn state_length_selects_tier() {
        let cfg = with(r#""simulation": {"runs": [{"state": [1, 2, 3]}]}"#);
        assert!(matches!(RunConfig::from_json(&cfg), Err(CliError::Config(_))));
        let run = RunSpec { name: None, state: vec![0.0; 4], tiers: None };
        assert_eq!(run.tiers(), vec![Tier::Exact4]);
    }

    #[test]
    fn normalized_context_scales_inputs() {
        let mut config = RunConfig::baseline();
        config.portrait.window = Some(Window::new((0.0, 5000.0), (0.0, 10_000.0)));
        let ctx = Context::new(config, true).unwrap();
        assert_eq!(ctx.n_total(), 1.0);
        assert_eq!(ctx.window(), Window::new((0.0, 0.5), (0.0, 1.0)));
        let plain = Context::new(RunConfig::baseline(), false).unwrap();
        assert_eq!(plain.window(), Window::square(10_000.0));
    }
}
