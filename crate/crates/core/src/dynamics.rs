//! Right-hand sides of the three model tiers and the recovered-class closure.
//!
//! * full: `(S, D1, D2, R1, R2)` with births balancing deaths,
//! * exact 4D: `S` eliminated through `S = N - D1 - D2 - R1 - R2`,
//! * reduced 2D: `R_i` replaced by its steady-state value `gamma_i D_i / (delta_i + mu)`.
//!
//! States are never clamped here.

use serde::{Deserialize, Serialize};

use crate::model::{
    check_nonnegative, Drug, LVCoefficients, PopulationState, ReducedState, StateError, ValidatedParameters,
};

/// State of the exact four-dimensional system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Exact4State {
    pub d1: f64,
    pub d2: f64,
    pub r1: f64,
    pub r2: f64,
}

impl Exact4State {
    pub fn new(d1: f64, d2: f64, r1: f64, r2: f64) -> Self {
        Self { d1, d2, r1, r2 }
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.d1, self.d2, self.r1, self.r2]
    }

    pub fn from_array(x: [f64; 4]) -> Self {
        Self::new(x[0], x[1], x[2], x[3])
    }

    pub fn total(&self) -> f64 {
        self.d1 + self.d2 + self.r1 + self.r2
    }

    pub fn reduced(&self) -> ReducedState {
        ReducedState::new(self.d1, self.d2)
    }

    /// Full state on the constraint manifold.
    pub fn to_full(&self, n_total: f64) -> PopulationState {
        PopulationState::new(n_total - self.total(), self.d1, self.d2, self.r1, self.r2)
    }

    pub fn check(&self, n_total: f64) -> Result<(), StateError> {
        check_nonnegative(&["D1", "D2", "R1", "R2"], &self.to_array())?;
        let sum = self.total();
        if sum > n_total * (1.0 + 1e-12) {
            return Err(StateError::ExceedsPopulation { sum, n_total });
        }
        Ok(())
    }
}

impl From<PopulationState> for Exact4State {
    fn from(x: PopulationState) -> Self {
        Self::new(x.d1, x.d2, x.r1, x.r2)
    }
}

/// `(dS, dD1, dD2, dR1, dR2)/dt` in persons per year.
pub fn full_rhs(params: &ValidatedParameters, x: &PopulationState) -> [f64; 5] {
    let p = params.get();
    let n = p.n_total;
    let infect1 = p.beta1 * x.s * x.d1 / n;
    let infect2 = p.beta2 * x.s * x.d2 / n;
    let switch = (p.alpha1 - p.alpha2) * x.d1 * x.d2 / n;
    [
        p.mu * n - p.mu * x.s - infect1 - infect2,
        infect1 + p.delta1 * x.r1 + switch - p.gamma1 * x.d1 - p.mu * x.d1,
        infect2 + p.delta2 * x.r2 - switch - p.gamma2 * x.d2 - p.mu * x.d2,
        p.gamma1 * x.d1 - p.delta1 * x.r1 - p.mu * x.r1,
        p.gamma2 * x.d2 - p.delta2 * x.r2 - p.mu * x.r2,
    ]
}

/// `(dD1, dD2, dR1, dR2)/dt` with `S` eliminated.
pub fn exact4_rhs(params: &ValidatedParameters, x: &Exact4State) -> [f64; 4] {
    let p = params.get();
    let n = p.n_total;
    let others = x.r1 + x.r2;
    let bracket1 = p.beta1 * x.d1 + (p.alpha2 - p.alpha1 + p.beta1) * x.d2 + p.beta1 * others;
    let bracket2 = (p.alpha1 - p.alpha2 + p.beta2) * x.d1 + p.beta2 * x.d2 + p.beta2 * others;
    [
        (p.beta1 - p.gamma1 - p.mu) * x.d1 + p.delta1 * x.r1 - x.d1 / n * bracket1,
        (p.beta2 - p.gamma2 - p.mu) * x.d2 + p.delta2 * x.r2 - x.d2 / n * bracket2,
        p.gamma1 * x.d1 - (p.delta1 + p.mu) * x.r1,
        p.gamma2 * x.d2 - (p.delta2 + p.mu) * x.r2,
    ]
}

/// Recovered compartments at quasi-steady state: `R_i = gamma_i D_i / (delta_i + mu)`.
///
/// `delta_i + mu > 0` is guaranteed by validation.
pub fn qss_recovered(params: &ValidatedParameters, d: ReducedState) -> (f64, f64) {
    (params.recovered_ratio(Drug::One) * d.d1, params.recovered_ratio(Drug::Two) * d.d2)
}

/// Lifts a reduced state to the exact 4D tier through [`qss_recovered`].
pub fn lift_to_exact4(params: &ValidatedParameters, d: ReducedState) -> Exact4State {
    let (r1, r2) = qss_recovered(params, d);
    Exact4State::new(d.d1, d.d2, r1, r2)
}

/// Lifts a reduced state to the full model on the constraint manifold.
pub fn lift_to_full(params: &ValidatedParameters, d: ReducedState) -> PopulationState {
    lift_to_exact4(params, d).to_full(params.n_total())
}

/// `dD_i/dt = r_i D_i - (D_i / N)(a_i1 D1 + a_i2 D2)`.
pub fn reduced_rhs(c: &LVCoefficients, d: ReducedState) -> [f64; 2] {
    let n = c.n_total;
    [c.r1 * d.d1 - d.d1 / n * (c.a11 * d.d1 + c.a12 * d.d2), c.r2 * d.d2 - d.d2 / n * (c.a21 * d.d1 + c.a22 * d.d2)]
}
