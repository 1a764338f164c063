//! Explicit Runge-Kutta integration of the model tiers.
//!
//! Two methods are provided: classical fixed-step RK4 and the Dormand-Prince
//! 5(4) embedded pair with proportional step control. Integration stops at
//! `t_max`, when the vector field becomes negligible (an equilibrium has been
//! reached), when an optional region predicate fires, or on step failure.

use serde::ser::SerializeSeq;
use serde::{Deserialize, Serialize, Serializer};
use thiserror::Error;

use crate::dynamics::{exact4_rhs, full_rhs, qss_recovered, reduced_rhs, Exact4State};
use crate::model::{
    reduced_coefficients, LVCoefficients, PopulationState, ReducedState, Tolerance, ValidatedParameters,
};

/// Undershoot below zero tolerated (and clamped) per component, relative to N.
pub const POSITIVITY_EPS: f64 = 1e-9;

/// An autonomous vector field on `D` compartments.
pub trait OdeSystem<const D: usize>: Sync {
    fn rhs(&self, x: &[f64; D]) -> [f64; D];
    /// Population size, the natural scale of the state.
    fn population(&self) -> f64;
}

#[derive(Debug, Clone)]
pub struct FullSystem(pub ValidatedParameters);

impl OdeSystem<5> for FullSystem {
    fn rhs(&self, x: &[f64; 5]) -> [f64; 5] {
        full_rhs(&self.0, &PopulationState::from_array(*x))
    }
    fn population(&self) -> f64 {
        self.0.n_total()
    }
}

#[derive(Debug, Clone)]
pub struct Exact4System(pub ValidatedParameters);

impl OdeSystem<4> for Exact4System {
    fn rhs(&self, x: &[f64; 4]) -> [f64; 4] {
        exact4_rhs(&self.0, &Exact4State::from_array(*x))
    }
    fn population(&self) -> f64 {
        self.0.n_total()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ReducedSystem(pub LVCoefficients);

impl OdeSystem<2> for ReducedSystem {
    fn rhs(&self, x: &[f64; 2]) -> [f64; 2] {
        reduced_rhs(&self.0, ReducedState::from_array(*x))
    }
    fn population(&self) -> f64 {
        self.0.n_total
    }
}

/// The negated vector field; integrating it runs the original system backward in time.
#[derive(Debug, Clone, Copy)]
pub struct Reversed<S>(pub S);

impl<const D: usize, S: OdeSystem<D>> OdeSystem<D> for Reversed<S> {
    fn rhs(&self, x: &[f64; D]) -> [f64; D] {
        self.0.rhs(x).map(|v| -v)
    }
    fn population(&self) -> f64 {
        self.0.population()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Tier {
    Full,
    Exact4,
    Reduced,
}

impl Tier {
    pub fn dimension(self) -> usize {
        match self {
            Tier::Full => 5,
            Tier::Exact4 => 4,
            Tier::Reduced => 2,
        }
    }

    pub fn columns(self) -> &'static [&'static str] {
        match self {
            Tier::Full => &["S", "D1", "D2", "R1", "R2"],
            Tier::Exact4 => &["D1", "D2", "R1", "R2"],
            Tier::Reduced => &["D1", "D2"],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Method {
    FixedRk4 { step: f64 },
    Adaptive { abs_tol: f64, rel_tol: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegratorOptions {
    pub method: Method,
    /// Integration horizon in years.
    pub t_max: f64,
    /// Stop once `||rhs||_inf * characteristic_time` falls below this many persons.
    pub equilibrium_stop_tol: Option<f64>,
    /// Years.
    pub characteristic_time: f64,
    pub max_steps: usize,
    /// First trial step for the adaptive method; estimated when absent.
    pub initial_step: Option<f64>,
}

impl IntegratorOptions {
    /// Adaptive defaults scaled to a population of `n_total`:
    /// `abs_tol = 1e-8 N`, `rel_tol = 1e-8`, equilibrium stop at `1e-6 N`.
    pub fn for_population(n_total: f64) -> Self {
        Self {
            method: Method::Adaptive { abs_tol: 1e-8 * n_total, rel_tol: 1e-8 },
            t_max: 100.0,
            equilibrium_stop_tol: Some(1e-6 * n_total),
            characteristic_time: 1.0,
            max_steps: 1_000_000,
            initial_step: None,
        }
    }

    pub fn fixed_rk4(step: f64, t_max: f64) -> Self {
        Self {
            method: Method::FixedRk4 { step },
            t_max,
            equilibrium_stop_tol: None,
            characteristic_time: 1.0,
            max_steps: usize::MAX,
            initial_step: None,
        }
    }

    pub fn with_t_max(self, t_max: f64) -> Self {
        Self { t_max, ..self }
    }

    pub fn without_equilibrium_stop(self) -> Self {
        Self { equilibrium_stop_tol: None, ..self }
    }

    pub fn validate(&self) -> Result<(), IntegrateError> {
        let bad = |msg: &str| Err(IntegrateError::InvalidOptions(msg.to_string()));
        let positive = |x: f64| x.is_finite() && x > 0.0;
        match self.method {
            Method::FixedRk4 { step } if !positive(step) => return bad("step must be positive"),
            Method::Adaptive { abs_tol, rel_tol }
                if !(abs_tol.is_finite() && rel_tol.is_finite())
                    || abs_tol < 0.0
                    || rel_tol < 0.0
                    || abs_tol + rel_tol <= 0.0 =>
            {
                return bad("tolerances must be nonnegative, finite and not both zero")
            }
            _ => {}
        }
        if !positive(self.t_max) {
            return bad("t_max must be positive");
        }
        if let Some(tol) = self.equilibrium_stop_tol {
            if !positive(tol) {
                return bad("equilibrium_stop_tol must be positive");
            }
        }
        if !positive(self.characteristic_time) {
            return bad("characteristic_time must be positive");
        }
        if self.max_steps == 0 {
            return bad("max_steps must be at least 1");
        }
        if let Some(h) = self.initial_step {
            if !positive(h) {
                return bad("initial_step must be positive");
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TerminalReason {
    ReachedTMax,
    ConvergedToEquilibrium,
    /// The region predicate passed to [`integrate_until`] fired.
    LeftRegion,
    StepFailure {
        reason: String,
    },
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepStats {
    pub accepted: usize,
    pub rejected: usize,
    pub rhs_evaluations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample<const D: usize> {
    pub t: f64,
    pub x: [f64; D],
}

impl<const D: usize> Serialize for Sample<D> {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut seq = serializer.serialize_seq(Some(D + 1))?;
        seq.serialize_element(&self.t)?;
        for v in &self.x {
            seq.serialize_element(v)?;
        }
        seq.end()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory<const D: usize> {
    pub samples: Vec<Sample<D>>,
    pub terminal_reason: TerminalReason,
    pub stats: StepStats,
}

impl<const D: usize> Trajectory<D> {
    pub fn last(&self) -> &Sample<D> {
        self.samples.last().expect("trajectory always holds the initial sample")
    }

    pub fn final_state(&self) -> [f64; D] {
        self.last().x
    }

    pub fn final_time(&self) -> f64 {
        self.last().t
    }

    pub fn failed(&self) -> bool {
        matches!(self.terminal_reason, TerminalReason::StepFailure { .. })
    }

    /// Turns a step failure into an error.
    pub fn into_result(self) -> Result<Self, IntegrateError> {
        match &self.terminal_reason {
            TerminalReason::StepFailure { reason } => {
                Err(IntegrateError::StepFailure { t: self.final_time(), reason: reason.clone() })
            }
            _ => Ok(self),
        }
    }

    /// Linear interpolation between samples; the terminal state is held
    /// constant past the last sample.
    pub fn state_at(&self, t: f64) -> [f64; D] {
        let s = &self.samples;
        if t <= s[0].t {
            return s[0].x;
        }
        if t >= self.final_time() {
            return self.final_state();
        }
        let i = s.partition_point(|p| p.t <= t);
        let (a, b) = (&s[i - 1], &s[i]);
        let w = (t - a.t) / (b.t - a.t);
        std::array::from_fn(|k| a.x[k] + w * (b.x[k] - a.x[k]))
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum IntegrateError {
    #[error("invalid integrator options: {0}")]
    InvalidOptions(String),
    #[error("invalid initial state: {0}")]
    InvalidInitialState(String),
    #[error("integration failed at t = {t}: {reason}")]
    StepFailure { t: f64, reason: String },
}

fn sup_norm<const D: usize>(v: &[f64; D]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn axpy<const D: usize>(x: &[f64; D], h: f64, terms: &[(f64, &[f64; D])]) -> [f64; D] {
    std::array::from_fn(|i| x[i] + h * terms.iter().map(|(c, k)| c * k[i]).sum::<f64>())
}

/// Clamps undershoot within `eps` to zero; `None` when some component is further below.
fn enforce_positivity<const D: usize>(x: [f64; D], eps: f64) -> Option<[f64; D]> {
    if x.iter().any(|v| !v.is_finite() || *v < -eps) {
        return None;
    }
    Some(x.map(|v| if v < 0.0 { 0.0 } else { v }))
}

struct Recorder<'a, const D: usize, S> {
    system: &'a S,
    opts: &'a IntegratorOptions,
    samples: Vec<Sample<D>>,
    stats: StepStats,
}

impl<const D: usize, S: OdeSystem<D>> Recorder<'_, D, S> {
    fn eval(&mut self, x: &[f64; D]) -> [f64; D] {
        self.stats.rhs_evaluations += 1;
        self.system.rhs(x)
    }

    fn converged(&self, f: &[f64; D]) -> bool {
        self.opts.equilibrium_stop_tol.is_some_and(|tol| sup_norm(f) * self.opts.characteristic_time < tol)
    }

    fn finish(self, terminal_reason: TerminalReason) -> Trajectory<D> {
        Trajectory { samples: self.samples, terminal_reason, stats: self.stats }
    }
}

pub fn integrate<const D: usize, S: OdeSystem<D>>(
    system: &S,
    x0: [f64; D],
    opts: &IntegratorOptions,
) -> Result<Trajectory<D>, IntegrateError> {
    integrate_until(system, x0, opts, |_| false)
}

/// As [`integrate`], additionally stopping with [`TerminalReason::LeftRegion`]
/// after the first accepted step whose state satisfies `stop`.
pub fn integrate_until<const D: usize, S: OdeSystem<D>>(
    system: &S,
    x0: [f64; D],
    opts: &IntegratorOptions,
    stop: impl Fn(&[f64; D]) -> bool,
) -> Result<Trajectory<D>, IntegrateError> {
    opts.validate()?;
    if let Some((i, v)) = x0.iter().enumerate().find(|(_, v)| !(v.is_finite() && **v >= 0.0)) {
        return Err(IntegrateError::InvalidInitialState(format!("component {i} = {v}")));
    }
    let eps_pos = POSITIVITY_EPS * system.population();
    let mut rec = Recorder { system, opts, samples: vec![Sample { t: 0.0, x: x0 }], stats: StepStats::default() };
    let f0 = rec.eval(&x0);
    if rec.converged(&f0) {
        return Ok(rec.finish(TerminalReason::ConvergedToEquilibrium));
    }
    let reason = match opts.method {
        Method::FixedRk4 { step } => run_rk4(&mut rec, step, eps_pos, &stop),
        Method::Adaptive { abs_tol, rel_tol } => {
            run_dopri5(&mut rec, f0, Tolerance::new(abs_tol, rel_tol), eps_pos, &stop)
        }
    };
    Ok(rec.finish(reason))
}

fn run_rk4<const D: usize, S: OdeSystem<D>>(
    rec: &mut Recorder<'_, D, S>,
    h: f64,
    eps_pos: f64,
    stop: &impl Fn(&[f64; D]) -> bool,
) -> TerminalReason {
    let t_max = rec.opts.t_max;
    let n_steps = ((t_max / h) - 1e-9).ceil().max(1.0) as usize;
    let mut x = rec.samples[0].x;
    let mut t = 0.0;
    for k in 1..=n_steps {
        if rec.stats.accepted >= rec.opts.max_steps {
            return TerminalReason::StepFailure { reason: "max_steps exceeded".into() };
        }
        let t_next = if k == n_steps { t_max } else { k as f64 * h };
        let dt = t_next - t;
        let k1 = rec.eval(&x);
        let k2 = rec.eval(&axpy(&x, 0.5 * dt, &[(1.0, &k1)]));
        let k3 = rec.eval(&axpy(&x, 0.5 * dt, &[(1.0, &k2)]));
        let k4 = rec.eval(&axpy(&x, dt, &[(1.0, &k3)]));
        let raw = axpy(&x, dt / 6.0, &[(1.0, &k1), (2.0, &k2), (2.0, &k3), (1.0, &k4)]);
        let Some(next) = enforce_positivity(raw, eps_pos) else {
            return TerminalReason::StepFailure {
                reason: format!("positivity violated beyond {eps_pos:e} at t = {t_next}"),
            };
        };
        x = next;
        t = t_next;
        rec.stats.accepted += 1;
        rec.samples.push(Sample { t, x });
        if stop(&x) {
            return TerminalReason::LeftRegion;
        }
        if rec.opts.equilibrium_stop_tol.is_some() {
            let f = rec.eval(&x);
            if rec.converged(&f) {
                return TerminalReason::ConvergedToEquilibrium;
            }
        }
    }
    TerminalReason::ReachedTMax
}

// Dormand-Prince 5(4) tableau. The system is autonomous, so the nodes c_i are unused.
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// Difference between the 5th- and 4th-order weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const MAX_GROWTH: f64 = 5.0;
const MIN_SHRINK: f64 = 0.2;
const SAFETY: f64 = 0.9;

fn initial_step<const D: usize>(x: &[f64; D], f: &[f64; D], tol: Tolerance, t_max: f64) -> f64 {
    let scale = |i: usize| tol.abs + tol.rel * x[i].abs();
    let d0 = (0..D).fold(0.0_f64, |m, i| m.max(x[i].abs() / scale(i)));
    let d1 = (0..D).fold(0.0_f64, |m, i| m.max(f[i].abs() / scale(i)));
    let h = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    h.min(t_max)
}

fn run_dopri5<const D: usize, S: OdeSystem<D>>(
    rec: &mut Recorder<'_, D, S>,
    f0: [f64; D],
    tol: Tolerance,
    eps_pos: f64,
    stop: &impl Fn(&[f64; D]) -> bool,
) -> TerminalReason {
    let t_max = rec.opts.t_max;
    let mut x = rec.samples[0].x;
    let mut k1 = f0;
    let mut t = 0.0;
    let mut h = rec.opts.initial_step.unwrap_or_else(|| initial_step(&x, &k1, tol, t_max));

    while t < t_max {
        if rec.stats.accepted + rec.stats.rejected >= rec.opts.max_steps {
            return TerminalReason::StepFailure { reason: "max_steps exceeded".into() };
        }
        if h < 1e-14 * t.abs().max(1.0) {
            return TerminalReason::StepFailure { reason: format!("step size underflow ({h:e}) at t = {t}") };
        }
        let last = t + h >= t_max;
        let dt = if last { t_max - t } else { h };

        let k2 = rec.eval(&axpy(&x, dt, &[(A21, &k1)]));
        let k3 = rec.eval(&axpy(&x, dt, &[(A31, &k1), (A32, &k2)]));
        let k4 = rec.eval(&axpy(&x, dt, &[(A41, &k1), (A42, &k2), (A43, &k3)]));
        let k5 = rec.eval(&axpy(&x, dt, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]));
        let k6 = rec.eval(&axpy(&x, dt, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]));
        let raw = axpy(&x, dt, &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)]);
        let k7 = rec.eval(&raw);
        let delta = axpy(&[0.0; D], dt, &[(E1, &k1), (E3, &k3), (E4, &k4), (E5, &k5), (E6, &k6), (E7, &k7)]);
        let err = (0..D).fold(0.0_f64, |m, i| {
            let sc = tol.abs + tol.rel * x[i].abs().max(raw[i].abs());
            m.max(delta[i].abs() / sc)
        });

        let positive = enforce_positivity(raw, eps_pos);
        if !err.is_finite() || err > 1.0 || positive.is_none() {
            rec.stats.rejected += 1;
            h = 0.5 * dt;
            continue;
        }
        let next = positive.unwrap_or(raw);
        let clamped = next != raw;
        rec.stats.accepted += 1;
        t = if last { t_max } else { t + dt };
        x = next;
        k1 = if clamped { rec.eval(&x) } else { k7 };
        rec.samples.push(Sample { t, x });

        if stop(&x) {
            return TerminalReason::LeftRegion;
        }
        if rec.converged(&k1) {
            return TerminalReason::ConvergedToEquilibrium;
        }
        let factor = if err == 0.0 { MAX_GROWTH } else { (SAFETY * err.powf(-0.2)).clamp(MIN_SHRINK, MAX_GROWTH) };
        h = dt * factor;
    }
    TerminalReason::ReachedTMax
}

pub fn integrate_full(
    params: &ValidatedParameters,
    x0: &PopulationState,
    opts: &IntegratorOptions,
) -> Result<Trajectory<5>, IntegrateError> {
    x0.check(params, Tolerance::new(0.0, 1e-9)).map_err(|e| IntegrateError::InvalidInitialState(e.to_string()))?;
    integrate(&FullSystem(params.clone()), x0.to_array(), opts)
}

pub fn integrate_exact4(
    params: &ValidatedParameters,
    x0: &Exact4State,
    opts: &IntegratorOptions,
) -> Result<Trajectory<4>, IntegrateError> {
    x0.check(params.n_total()).map_err(|e| IntegrateError::InvalidInitialState(e.to_string()))?;
    integrate(&Exact4System(params.clone()), x0.to_array(), opts)
}

pub fn integrate_reduced(
    c: &LVCoefficients,
    x0: ReducedState,
    opts: &IntegratorOptions,
) -> Result<Trajectory<2>, IntegrateError> {
    x0.check(c.n_total).map_err(|e| IntegrateError::InvalidInitialState(e.to_string()))?;
    integrate(&ReducedSystem(*c), x0.to_array(), opts)
}

/// Cost of the quasi-steady-state assumption along one initial condition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReductionError {
    /// `sup_t max_i |D_i^exact(t) - D_i^reduced(t)|`, persons.
    pub sup_state_diff: f64,
    /// Same difference at the common terminal time.
    pub terminal_diff: f64,
    /// `sup_t max_i |R_i(t) - gamma_i D_i(t) / (delta_i + mu)|` along the exact trajectory.
    pub sup_qss_deviation: f64,
    pub terminal_time: f64,
}

/// Integrates the exact 4D tier from `x0` and the reduced tier from its
/// `(D1, D2)` projection and compares them.
pub fn reduction_error(
    params: &ValidatedParameters,
    x0: &Exact4State,
    opts: &IntegratorOptions,
) -> Result<ReductionError, IntegrateError> {
    let exact = integrate_exact4(params, x0, opts)?.into_result()?;
    let c = reduced_coefficients(params);
    let reduced = integrate_reduced(&c, x0.reduced(), opts)?.into_result()?;

    let diff = |t: f64| {
        let e = exact.state_at(t);
        let r = reduced.state_at(t);
        (e[0] - r[0]).abs().max((e[1] - r[1]).abs())
    };
    let sup_state_diff =
        exact.samples.iter().map(|s| s.t).chain(reduced.samples.iter().map(|s| s.t)).map(diff).fold(0.0, f64::max);
    let terminal_time = exact.final_time().max(reduced.final_time());
    let sup_qss_deviation = exact
        .samples
        .iter()
        .map(|s| {
            let (q1, q2) = qss_recovered(params, ReducedState::new(s.x[0], s.x[1]));
            (s.x[2] - q1).abs().max((s.x[3] - q2).abs())
        })
        .fold(0.0, f64::max);
    Ok(ReductionError { sup_state_diff, terminal_diff: diff(terminal_time), sup_qss_deviation, terminal_time })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ModelParameters;

    fn baseline() -> (ValidatedParameters, LVCoefficients) {
        let v = ModelParameters::baseline().validate().unwrap();
        let c = reduced_coefficients(&v);
        (v, c)
    }

    #[test]
    fn equilibrium_start_does_not_drift() {
        let (_, c) = baseline();
        let x0 = ReducedState::new(5757.576, 0.0);
        let opts = IntegratorOptions::for_population(1e4).without_equilibrium_stop();
        let tr = integrate_reduced(&c, x0, &opts).unwrap();
        assert_eq!(tr.terminal_reason, TerminalReason::ReachedTMax);
        assert_eq!(tr.final_time(), 100.0);
        for s in &tr.samples {
            assert!((s.x[0] - x0.d1).abs() < 1e-6 * 1e4 && s.x[1] == 0.0);
        }
    }

    #[test]
    fn reduced_endpoint_matches_fine_rk4() {
        let (_, c) = baseline();
        let x0 = ReducedState::new(100.0, 100.0);
        let opts = IntegratorOptions::for_population(1e4).with_t_max(200.0);
        let tr = integrate_reduced(&c, x0, &opts).unwrap();
        let end = tr.final_state();
        assert!(end[0].hypot(end[1] - 7090.909) < 1.0, "{end:?}");

        let fine = integrate_reduced(&c, x0, &IntegratorOptions::fixed_rk4(1e-3, 200.0)).unwrap();
        let ref_end = fine.final_state();
        assert!(ref_end[0].hypot(ref_end[1] - 7090.909) < 1.0, "{ref_end:?}");
    }

    #[test]
    fn full_tier_conserves_population() {
        let (v, _) = baseline();
        let x0 = PopulationState::new(9800.0, 100.0, 100.0, 0.0, 0.0);
        let tr = integrate_full(&v, &x0, &IntegratorOptions::for_population(1e4)).unwrap();
        for s in &tr.samples {
            let sum: f64 = s.x.iter().sum();
            assert!((sum - 1e4).abs() / 1e4 < 1e-6);
        }
    }

    #[test]
    fn origin_start_converges_immediately() {
        let (_, c) = baseline();
        let tr = integrate_reduced(&c, ReducedState::ORIGIN, &IntegratorOptions::for_population(1e4)).unwrap();
        assert_eq!(tr.terminal_reason, TerminalReason::ConvergedToEquilibrium);
        assert_eq!(tr.samples.len(), 1);
    }

    #[test]
    fn invalid_options_rejected() {
        let (_, c) = baseline();
        let x0 = ReducedState::new(1.0, 1.0);
        let mut opts = IntegratorOptions::for_population(1e4);
        opts.t_max = 0.0;
        assert!(matches!(integrate_reduced(&c, x0, &opts), Err(IntegrateError::InvalidOptions(_))));
        let opts = IntegratorOptions::fixed_rk4(-1.0, 1.0);
        assert!(integrate_reduced(&c, x0, &opts).is_err());
        let opts = IntegratorOptions::for_population(1e4);
        assert!(matches!(
            integrate_reduced(&c, ReducedState::new(-1.0, 0.0), &opts),
            Err(IntegrateError::InvalidInitialState(_))
        ));
    }

    #[test]
    fn rk4_positivity_failure_reported() {
        // Constant drain: one unit step from 0.5 lands at -0.5.
        struct Drain;
        impl OdeSystem<1> for Drain {
            fn rhs(&self, _x: &[f64; 1]) -> [f64; 1] {
                [-1.0]
            }
            fn population(&self) -> f64 {
                1.0
            }
        }
        let tr = integrate(&Drain, [0.5], &IntegratorOptions::fixed_rk4(1.0, 5.0)).unwrap();
        assert!(tr.failed());
        assert_eq!(tr.samples.len(), 1);
        assert!(tr.clone().into_result().is_err());
        // Adaptive control shrinks the step until it hits the floor.
        let opts = IntegratorOptions::for_population(1.0).with_t_max(5.0);
        let tr = integrate(&Drain, [0.5], &opts).unwrap();
        assert!(tr.failed());
        assert!(tr.samples.iter().all(|s| s.x[0] >= 0.0));

        struct Decay;
        impl OdeSystem<1> for Decay {
            fn rhs(&self, x: &[f64; 1]) -> [f64; 1] {
                [-10.0 * x[0]]
            }
            fn population(&self) -> f64 {
                1.0
            }
        }
        // Adaptive control shrinks the step instead.
        let mut opts = IntegratorOptions::for_population(1.0).with_t_max(5.0);
        opts.equilibrium_stop_tol = None;
        let tr = integrate(&Decay, [1.0], &opts).unwrap();
        assert_eq!(tr.terminal_reason, TerminalReason::ReachedTMax);
        assert!((tr.final_state()[0] - (-50.0_f64).exp()).abs() < 1e-8);
    }

    #[test]
    fn max_steps_is_step_failure() {
        let (_, c) = baseline();
        let mut opts = IntegratorOptions::for_population(1e4);
        opts.max_steps = 3;
        let tr = integrate_reduced(&c, ReducedState::new(100.0, 100.0), &opts).unwrap();
        assert!(tr.failed());
    }

    #[test]
    fn region_predicate_stops() {
        let (_, c) = baseline();
        let opts = IntegratorOptions::for_population(1e4);
        let tr = integrate_until(&ReducedSystem(c), [100.0, 100.0], &opts, |x| x[1] > 1000.0).unwrap();
        assert_eq!(tr.terminal_reason, TerminalReason::LeftRegion);
        assert!(tr.final_state()[1] > 1000.0);
    }

    #[test]
    fn reduction_error_at_equilibrium_is_tiny() {
        let (v, _) = baseline();
        let x0 = Exact4State::new(190_000.0 / 33.0, 0.0, 19_000.0 / 33.0, 0.0);
        let r = reduction_error(&v, &x0, &IntegratorOptions::for_population(1e4)).unwrap();
        assert!(r.sup_state_diff < 1e-6 * 1e4);
        assert!(r.sup_qss_deviation < 1e-6 * 1e4);
    }

    #[test]
    fn reduction_error_transient_then_agreement() {
        let (v, _) = baseline();
        let x0 = Exact4State::new(100.0, 100.0, 0.0, 0.0);
        let opts = IntegratorOptions::for_population(1e4).with_t_max(500.0);
        let r = reduction_error(&v, &x0, &opts).unwrap();
        assert!(r.sup_state_diff > 0.0 && r.sup_qss_deviation > 0.0);
        assert!(r.terminal_diff < 1.0, "{r:?}");
    }

    #[test]
    fn fatal_disease_regime_reduction_is_exact() {
        let p = ModelParameters { gamma1: 0.0, gamma2: 0.0, ..ModelParameters::baseline() };
        let v = p.validate().unwrap();
        let x0 = Exact4State::new(100.0, 300.0, 0.0, 0.0);
        let opts = IntegratorOptions::for_population(1e4).with_t_max(50.0);
        let r = reduction_error(&v, &x0, &opts).unwrap();
        assert_eq!(r.sup_qss_deviation, 0.0);
        assert!(r.sup_state_diff < 1e-6, "{r:?}");
    }

    #[test]
    fn state_at_interpolates() {
        let tr = Trajectory::<1> {
            samples: vec![Sample { t: 0.0, x: [0.0] }, Sample { t: 2.0, x: [4.0] }],
            terminal_reason: TerminalReason::ReachedTMax,
            stats: StepStats::default(),
        };
        assert_eq!(tr.state_at(1.0), [2.0]);
        assert_eq!(tr.state_at(5.0), [4.0]);
        assert_eq!(tr.state_at(-1.0), [0.0]);
    }
}
