use serde::Serialize;
use twodrug::dynamics::{lift_to_exact4, lift_to_full};
use twodrug::integrator::{ReductionError, StepStats};
use twodrug::{
    integrate_exact4, integrate_full, integrate_reduced, reduced_coefficients, reduction_error, Exact4State,
    IntegrateError, PopulationState, ReducedState, TerminalReason, Tier, Trajectory,
};

use crate::config::{Context, RunSpec};
use crate::error::CliError;
use crate::output::trajectory_csv;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    pub name: String,
    pub tier: Tier,
    pub file: String,
    pub initial_state: Vec<f64>,
    pub terminal_state: Vec<f64>,
    pub terminal_time: f64,
    pub terminal_reason: TerminalReason,
    pub stats: StepStats,
    /// Full tier only: `max_t |sum X - N| / N`.
    pub conservation_drift: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum ReductionOutcome {
    Ok(ReductionError),
    Failed { error: String },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NamedReduction {
    pub name: String,
    pub reduction_error: ReductionOutcome,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationSummary {
    pub normalized: bool,
    pub runs: Vec<RunSummary>,
    pub reduction_errors: Vec<NamedReduction>,
    pub failed_runs: usize,
}

pub struct SimulationOutput {
    pub summary: SimulationSummary,
    /// `(file name, CSV body)` in run order.
    pub files: Vec<(String, String)>,
}

pub fn run_name(i: usize, run_spec: &RunSpec) -> String {
    run_spec.name.clone().unwrap_or_else(|| format!("run{i}"))
}

/// The configured state in model units and all three tier views of it.
struct Start {
    full: PopulationState,
    exact4: Exact4State,
    reduced: ReducedState,
}

fn start(ctx: &Context, run_spec: &RunSpec) -> Start {
    let x: Vec<f64> = run_spec.state.iter().map(|v| v * ctx.scale).collect();
    let n = ctx.n_total();
    match x.len() {
        5 => {
            let full = PopulationState::new(x[0], x[1], x[2], x[3], x[4]);
            let exact4 = Exact4State::from(full);
            Start { full, exact4, reduced: exact4.reduced() }
        }
        4 => {
            let exact4 = Exact4State::new(x[0], x[1], x[2], x[3]);
            Start { full: exact4.to_full(n), exact4, reduced: exact4.reduced() }
        }
        _ => {
            let reduced = ReducedState::new(x[0], x[1]);
            Start { full: lift_to_full(&ctx.params, reduced), exact4: lift_to_exact4(&ctx.params, reduced), reduced }
        }
    }
}

fn summarize<const D: usize>(name: &str, tier: Tier, file: String, tr: &Trajectory<D>, n_total: f64) -> RunSummary {
    let conservation_drift = (tier == Tier::Full)
        .then(|| tr.samples.iter().map(|s| (s.x.iter().sum::<f64>() - n_total).abs() / n_total).fold(0.0, f64::max));
    RunSummary {
        name: name.to_owned(),
        tier,
        file,
        initial_state: tr.samples[0].x.to_vec(),
        terminal_state: tr.final_state().to_vec(),
        terminal_time: tr.final_time(),
        terminal_reason: tr.terminal_reason.clone(),
        stats: tr.stats,
        conservation_drift,
    }
}

pub fn simulate(ctx: &Context) -> Result<SimulationOutput, CliError> {
    let Some(sim) = &ctx.config.simulation else {
        return Err(CliError::Config("simulate needs a \"simulation\" section".into()));
    };
    let opts = ctx.integrator();
    let n = ctx.n_total();
    let c = reduced_coefficients(&ctx.params);
    let mut runs = Vec::new();
    let mut files = Vec::new();
    let mut reduction_errors = Vec::new();

    for (i, run_spec) in sim.runs.iter().enumerate() {
        let name = run_name(i, run_spec);
        let x0 = start(ctx, run_spec);
        let tiers = run_spec.tiers();
        for &tier in &tiers {
            let file = format!("{name}_{}.csv", tier_name(tier));
            let (summary, csv) = match tier {
                Tier::Full => {
                    let tr = integrate_full(&ctx.params, &x0.full, &opts)?;
                    (summarize(&name, tier, file.clone(), &tr, n), trajectory_csv(tier.columns(), &tr))
                }
                Tier::Exact4 => {
                    let tr = integrate_exact4(&ctx.params, &x0.exact4, &opts)?;
                    (summarize(&name, tier, file.clone(), &tr, n), trajectory_csv(tier.columns(), &tr))
                }
                Tier::Reduced => {
                    let tr = integrate_reduced(&c, x0.reduced, &opts)?;
                    (summarize(&name, tier, file.clone(), &tr, n), trajectory_csv(tier.columns(), &tr))
                }
            };
            runs.push(summary);
            files.push((file, csv));
        }
        if tiers.contains(&Tier::Exact4) && tiers.contains(&Tier::Reduced) {
            let outcome = match reduction_error(&ctx.params, &x0.exact4, &opts) {
                Ok(e) => ReductionOutcome::Ok(e),
                Err(e @ IntegrateError::StepFailure { .. }) => ReductionOutcome::Failed { error: e.to_string() },
                Err(e) => return Err(e.into()),
            };
            reduction_errors.push(NamedReduction { name: name.clone(), reduction_error: outcome });
        }
    }

    let failed_runs = runs.iter().filter(|r| matches!(r.terminal_reason, TerminalReason::StepFailure { .. })).count();
    if !runs.is_empty() && failed_runs == runs.len() {
        return Err(CliError::AllRunsFailed);
    }
    Ok(SimulationOutput {
        summary: SimulationSummary { normalized: ctx.normalized, runs, reduction_errors, failed_runs },
        files,
    })
}

fn tier_name(t: Tier) -> &'static str {
    match t {
        Tier::Full => "full",
        Tier::Exact4 => "exact4",
        Tier::Reduced => "reduced",
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{RunConfig, SimulationConfig};

    fn ctx(runs: Vec<RunSpec>, t_max: Option<f64>, normalized: bool) -> Context {
        let mut config = RunConfig::baseline();
        config.simulation = Some(SimulationConfig { runs, t_max, integrator: None });
        Context::new(config, normalized).unwrap()
    }

    fn run_spec(state: &[f64], tiers: Option<Vec<Tier>>) -> RunSpec {
        RunSpec { name: None, state: state.to_vec(), tiers }
    }

    #[test]
    fn reduced_run_reaches_drug2_node() {
        let out = simulate(&ctx(vec![run_spec(&[100.0, 100.0], None)], Some(500.0), false)).unwrap();
        let run = &out.summary.runs[0];
        assert_eq!(run.file, "run0_reduced.csv");
        assert!((run.terminal_state[1] - 78_000.0 / 11.0).abs() < 1.0);
        let last = out.files[0].1.lines().last().unwrap();
        let d2: f64 = last.split(',').nth(2).unwrap().parse().unwrap();
        assert!((d2 - 7090.909).abs() < 1.0);
    }

    #[test]
    fn origin_run_stays_zero() {
        let out = simulate(&ctx(vec![run_spec(&[0.0, 0.0], None)], None, false)).unwrap();
        for line in out.files[0].1.lines().skip(1) {
            let v: Vec<f64> = line.split(',').map(|x| x.parse().unwrap()).collect();
            assert_eq!(&v[1..], &[0.0, 0.0]);
        }
    }

    #[test]
    fn full_run_conserves() {
        let out = simulate(&ctx(vec![run_spec(&[9800.0, 100.0, 100.0, 0.0, 0.0], None)], None, false)).unwrap();
        assert!(out.summary.runs[0].conservation_drift.unwrap() < 1e-6);
        assert!(out.files[0].1.starts_with("t,S,D1,D2,R1,R2\n"));
    }

    #[test]
    fn both_tiers_report_reduction_error() {
        let s = run_spec(&[9800.0, 100.0, 100.0, 0.0, 0.0], Some(vec![Tier::Full, Tier::Exact4, Tier::Reduced]));
        let out = simulate(&ctx(vec![s], Some(50.0), false)).unwrap();
        assert_eq!(out.summary.runs.len(), 3);
        assert_eq!(out.summary.reduction_errors.len(), 1);
        let ReductionOutcome::Ok(e) = &out.summary.reduction_errors[0].reduction_error else { panic!() };
        assert!(e.sup_state_diff > 0.0 && e.sup_state_diff.is_finite());
        assert!(out.files[1].1.starts_with("t,D1,D2,R1,R2\n"));
    }

    #[test]
    fn off_manifold_full_state_is_a_validation_error() {
        let err = simulate(&ctx(vec![run_spec(&[100.0, 100.0, 100.0, 0.0, 0.0], None)], None, false)).err().unwrap();
        assert_eq!(err.exit_code(), 1);
    }

    #[test]
    fn normalized_run_matches_scaled_persons() {
        let runs = vec![run_spec(&[100.0, 100.0], None)];
        let plain = simulate(&ctx(runs.clone(), Some(50.0), false)).unwrap();
        let norm = simulate(&ctx(runs, Some(50.0), true)).unwrap();
        let a = &plain.summary.runs[0].terminal_state;
        let b = &norm.summary.runs[0].terminal_state;
        assert!((a[1] / 1e4 - b[1]).abs() < 1e-6);
    }
}
